//! `thresholds`, `run`, `analyze` and `scenario-dump`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use flyrate::analysis::{ccdf, ccdf_percentile, gains, mean_ci99, GainReport, SeedMeans};
use flyrate::channel::build_threshold_table;
use flyrate::csvfmt::sig9;
use flyrate::kinematics::Scenario;
use flyrate::rate_control::Algorithm;
use flyrate::simulator::output::{run_file_name, write_batch, RUNS_DIR, SUMMARY_FILE};
use flyrate::simulator::{run_batch, BatchResults, LinkId, SimContext};

use crate::{CliError, RunConfig, OUT_DIR_ENV};

/// Percentile points reported by `analyze`, in CCDF terms.
pub const PERCENTILES: [f64; 3] = [70.0, 50.0, 30.0];

/// Output directory: explicit flag, then the config file, then the
/// environment, then `flyrate-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("flyrate-out"))
}

/// Threshold tables of both links as one CSV.
pub fn thresholds(cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::from("link,mcs,modulation,coding_rate,phy_rate_bps,snr_threshold_db\n");
    for (link, radio) in [
        (LinkId::Access, &cfg.access_radio),
        (LinkId::Relay, &cfg.relay_radio),
    ] {
        radio.validate()?;
        let table = build_threshold_table(cfg.target_ber, radio)?;
        for line in table.to_csv().lines().skip(1) {
            writeln!(out, "{link},{line}").unwrap();
        }
    }
    Ok(out)
}

pub fn scenario_dump(cfg: &RunConfig, seed: u64) -> Result<String, CliError> {
    let scenario = Scenario::generate(&cfg.scenario.with_seed(seed))?;
    Ok(scenario.to_csv())
}

/// Runs the configured batch on a pool of `cfg.jobs` threads.
pub fn simulate(cfg: &RunConfig) -> Result<BatchResults, CliError> {
    cfg.validate()?;
    let ctx = SimContext::new(cfg.sim_config())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let seeds = cfg.seeds.seeds();
    Ok(pool.install(|| run_batch(&cfg.scenario, &cfg.algorithms, &seeds, &ctx))?)
}

/// `run`: simulates, writes the batch under `out_dir` together with the
/// effective config, and returns a short report.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<String, CliError> {
    let batch = simulate(cfg)?;
    write_batch(out_dir, &batch).map_err(|e| CliError::io(out_dir.display(), e))?;
    let cfg_path = out_dir.join("config.toml");
    fs::write(&cfg_path, cfg.to_toml()).map_err(|e| CliError::io(cfg_path.display(), e))?;

    let mut means: BTreeMap<Algorithm, SeedMeans> = BTreeMap::new();
    for &alg in &cfg.algorithms {
        means.insert(alg, flyrate::analysis::seed_means(&batch, alg));
    }
    report(&means)
}

fn mean_of(m: &SeedMeans, link: LinkId) -> f64 {
    let v: Vec<f64> = m
        .iter()
        .filter(|((_, l), _)| *l == link)
        .map(|(_, &x)| x)
        .collect();
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn report(means: &BTreeMap<Algorithm, SeedMeans>) -> Result<String, CliError> {
    let mut out = String::new();
    for link in LinkId::ALL {
        writeln!(out, "{link} link mean throughput:").unwrap();
        for (alg, m) in means {
            writeln!(
                out,
                "  {:<9}{:>9.3} Mb/s",
                alg.as_str(),
                mean_of(m, link) / 1e6
            )
            .unwrap();
        }
    }
    if let Some(tara) = means.get(&Algorithm::Tara) {
        for (baseline, m) in means.iter().filter(|(a, _)| **a != Algorithm::Tara) {
            let r = gains(tara, m)?;
            for link in LinkId::ALL {
                let b = mean_of(m, link);
                let of_means = if b > 0.0 {
                    100.0 * (mean_of(tara, link) - b) / b
                } else {
                    f64::NAN
                };
                writeln!(
                    out,
                    "tara vs {baseline} ({link}): mean throughput {of_means:+.2}%, per-seed mean {:+.2}%, positive in {:.0}% of seeds",
                    r.mean_gain_pct(Some(link)),
                    100.0 * r.positive_fraction(Some(link)),
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct SummaryRow {
    seed: u64,
    algorithm: String,
    link: String,
    mean_throughput_bps: f64,
}

#[derive(Debug, Deserialize)]
struct RunRow {
    #[allow(dead_code)]
    time_s: u64,
    link: String,
    delivered_bits: u64,
}

fn corrupt(path: &Path, detail: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {detail}", path.display()))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| corrupt(path, e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| corrupt(path, e))
}

/// Per-seed means and pooled per-second samples loaded from a batch
/// directory.
struct BatchData {
    means: BTreeMap<Algorithm, SeedMeans>,
    pooled: BTreeMap<(Algorithm, LinkId), Vec<f64>>,
}

fn load(dir: &Path) -> Result<BatchData, CliError> {
    let summary_path = dir.join(SUMMARY_FILE);
    if !summary_path.is_file() {
        return Err(CliError::Runtime(format!(
            "missing {}",
            summary_path.display()
        )));
    }
    let mut means: BTreeMap<Algorithm, SeedMeans> = BTreeMap::new();
    for row in read_csv::<SummaryRow>(&summary_path)? {
        let alg: Algorithm = row
            .algorithm
            .parse()
            .map_err(|e| corrupt(&summary_path, e))?;
        let link: LinkId = row.link.parse().map_err(|e| corrupt(&summary_path, e))?;
        means
            .entry(alg)
            .or_default()
            .insert((row.seed, link), row.mean_throughput_bps);
    }
    if means.is_empty() {
        return Err(corrupt(&summary_path, "no rows"));
    }
    let mut pooled: BTreeMap<(Algorithm, LinkId), Vec<f64>> = BTreeMap::new();
    for (&alg, m) in &means {
        let seeds: std::collections::BTreeSet<u64> = m.keys().map(|(s, _)| *s).collect();
        for seed in seeds {
            let path = dir.join(RUNS_DIR).join(run_file_name(seed, alg));
            if !path.is_file() {
                return Err(CliError::Runtime(format!("missing {}", path.display())));
            }
            for row in read_csv::<RunRow>(&path)? {
                let link: LinkId = row.link.parse().map_err(|e| corrupt(&path, e))?;
                pooled
                    .entry((alg, link))
                    .or_default()
                    .push(row.delivered_bits as f64);
            }
        }
    }
    Ok(BatchData { means, pooled })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

/// `analyze`: reads a batch directory written by `run` and writes
/// `ccdf.csv`, `percentiles.csv`, `ci.csv`, `gains.csv`,
/// `gains_summary.csv` and `gain_ccdf.csv` into `out_dir`.
pub fn analyze(dir: &Path, out_dir: &Path) -> Result<String, CliError> {
    let data = load(dir)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir.display(), e))?;

    let mut ccdf_csv = String::from("algorithm,link,throughput_bps,ccdf\n");
    let mut pct_csv = String::from("algorithm,link,p70_bps,p50_bps,p30_bps\n");
    for (&(alg, link), samples) in &data.pooled {
        let c = ccdf(samples)?;
        for (x, p) in c.points() {
            writeln!(ccdf_csv, "{alg},{link},{},{}", sig9(x), sig9(p)).unwrap();
        }
        let [p70, p50, p30] = PERCENTILES.map(|q| sig9(ccdf_percentile(&c, q)));
        writeln!(pct_csv, "{alg},{link},{p70},{p50},{p30}").unwrap();
    }

    let mut ci_csv = String::from("algorithm,link,n,mean_bps,half_width_bps,lower_bps,upper_bps\n");
    for (alg, m) in &data.means {
        for link in LinkId::ALL {
            let v: Vec<f64> = m
                .iter()
                .filter(|((_, l), _)| *l == link)
                .map(|(_, &x)| x)
                .collect();
            if v.len() < 2 {
                continue;
            }
            let ci = mean_ci99(&v)?;
            writeln!(
                ci_csv,
                "{alg},{link},{},{},{},{},{}",
                ci.n,
                sig9(ci.mean),
                sig9(ci.half_width),
                sig9(ci.lower()),
                sig9(ci.upper())
            )
            .unwrap();
        }
    }

    let mut gains_csv = String::from("baseline,link,seed,tara_bps,baseline_bps,gain_pct\n");
    let mut summary_csv = String::from(
        "baseline,link,seeds,excluded_zero_baseline,mean_gain_pct,positive_fraction\n",
    );
    let mut gain_ccdf_csv = String::from("baseline,link,gain_pct,ccdf\n");
    if let Some(tara) = data.means.get(&Algorithm::Tara) {
        for (baseline, m) in data.means.iter().filter(|(a, _)| **a != Algorithm::Tara) {
            let r: GainReport = gains(tara, m)?;
            for g in &r.records {
                writeln!(
                    gains_csv,
                    "{baseline},{},{},{},{},{}",
                    g.link,
                    g.seed,
                    sig9(g.tara_bps),
                    sig9(g.baseline_bps),
                    sig9(g.gain_pct)
                )
                .unwrap();
            }
            for link in LinkId::ALL {
                let excluded = m
                    .iter()
                    .filter(|((_, l), &b)| *l == link && b == 0.0)
                    .count();
                let n = r.records.iter().filter(|g| g.link == link).count();
                writeln!(
                    summary_csv,
                    "{baseline},{link},{n},{excluded},{},{}",
                    sig9(r.mean_gain_pct(Some(link))),
                    sig9(r.positive_fraction(Some(link)))
                )
                .unwrap();
                if n > 0 {
                    for (x, p) in r.gain_ccdf(Some(link))?.points() {
                        writeln!(gain_ccdf_csv, "{baseline},{link},{},{}", sig9(x), sig9(p))
                            .unwrap();
                    }
                }
            }
        }
    }

    write_file(&out_dir.join("ccdf.csv"), &ccdf_csv)?;
    write_file(&out_dir.join("percentiles.csv"), &pct_csv)?;
    write_file(&out_dir.join("ci.csv"), &ci_csv)?;
    write_file(&out_dir.join("gains.csv"), &gains_csv)?;
    write_file(&out_dir.join("gains_summary.csv"), &summary_csv)?;
    write_file(&out_dir.join("gain_ccdf.csv"), &gain_ccdf_csv)?;
    report(&data.means)
}
