//! Evaluation statistics over batch results: throughput CCDFs and their
//! percentiles, 99% confidence intervals and per-seed relative gains.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::rate_control::Algorithm;
use crate::simulator::{BatchResults, LinkId};
use crate::{Error, Result};

/// Empirical complementary CDF, `F(x)` = fraction of samples strictly
/// greater than `x`, tabulated at each distinct sample value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ccdf {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl Ccdf {
    /// Distinct sample values, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F` at each entry of [`Ccdf::values`].
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    /// Evaluates `F(x)` for an arbitrary `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let above = self.values.partition_point(|&v| v <= x);
        if above == 0 {
            1.0
        } else {
            self.probs[above - 1]
        }
    }
}

pub fn ccdf(samples: &[f64]) -> Result<Ccdf> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("CCDF samples"));
    }
    if let Some(bad) = samples.iter().find(|x| x.is_nan()) {
        return Err(Error::Parse(format!("non-numeric sample {bad}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values = Vec::new();
    let mut probs = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        values.push(v);
        probs.push((sorted.len() - j) as f64 / n);
        i = j;
    }
    Ok(Ccdf { values, probs })
}

/// Value exceeded `q` percent of the time: the largest `x` with
/// `F(x) ≥ q/100`, interpolating `F` linearly between sample points.
pub fn ccdf_percentile(ccdf: &Ccdf, q: f64) -> f64 {
    let target = q / 100.0;
    let (values, probs) = (&ccdf.values, &ccdf.probs);
    if values.len() == 1 || target > probs[0] {
        return values[0];
    }
    // probs is non-increasing; find the last point still at or above target.
    let k = probs.partition_point(|&p| p >= target) - 1;
    if k + 1 == values.len() || probs[k] == target {
        return values[k];
    }
    let (x0, x1) = (values[k], values[k + 1]);
    let (p0, p1) = (probs[k], probs[k + 1]);
    x0 + (p0 - target) / (p0 - p1) * (x1 - x0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Sample mean with a two-sided 99% Student-t interval.
pub fn mean_ci99(samples: &[f64]) -> Result<MeanCi> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.995);
    Ok(MeanCi {
        mean,
        half_width: t * (var / n as f64).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    pub seed: u64,
    pub link: LinkId,
    pub tara_bps: f64,
    pub baseline_bps: f64,
    /// 100 · (tara − baseline) / baseline
    pub gain_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub records: Vec<GainRecord>,
    /// (seed, link) pairs skipped because the baseline mean was zero.
    pub excluded_zero_baseline: usize,
}

impl GainReport {
    fn on_link(&self, link: Option<LinkId>) -> impl Iterator<Item = &GainRecord> {
        self.records
            .iter()
            .filter(move |r| link.is_none_or(|l| r.link == l))
    }

    /// Fraction of records with a strictly positive gain; `None` selects
    /// every link.
    pub fn positive_fraction(&self, link: Option<LinkId>) -> f64 {
        let (mut pos, mut total) = (0usize, 0usize);
        for r in self.on_link(link) {
            total += 1;
            if r.gain_pct > 0.0 {
                pos += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            pos as f64 / total as f64
        }
    }

    pub fn mean_gain_pct(&self, link: Option<LinkId>) -> f64 {
        let g: Vec<f64> = self.on_link(link).map(|r| r.gain_pct).collect();
        if g.is_empty() {
            0.0
        } else {
            g.iter().sum::<f64>() / g.len() as f64
        }
    }

    pub fn gain_ccdf(&self, link: Option<LinkId>) -> Result<Ccdf> {
        let g: Vec<f64> = self.on_link(link).map(|r| r.gain_pct).collect();
        ccdf(&g)
    }
}

/// Per-(seed, link) mean throughputs, bits/s.
pub type SeedMeans = BTreeMap<(u64, LinkId), f64>;

/// Percentage gains of `tara` over `baseline`, matched on (seed, link).
pub fn gains(tara: &SeedMeans, baseline: &SeedMeans) -> Result<GainReport> {
    if tara.len() != baseline.len() || tara.keys().any(|k| !baseline.contains_key(k)) {
        return Err(Error::config(
            "gains",
            "TARA and baseline cover different (seed, link) pairs",
        ));
    }
    let mut records = Vec::with_capacity(tara.len());
    let mut excluded = 0;
    for (&(seed, link), &t) in tara {
        let b = baseline[&(seed, link)];
        if b == 0.0 {
            excluded += 1;
            continue;
        }
        records.push(GainRecord {
            seed,
            link,
            tara_bps: t,
            baseline_bps: b,
            gain_pct: 100.0 * (t - b) / b,
        });
    }
    Ok(GainReport {
        records,
        excluded_zero_baseline: excluded,
    })
}

pub fn seed_means(batch: &BatchResults, algorithm: Algorithm) -> SeedMeans {
    let mut out = SeedMeans::new();
    for run in batch.values().filter(|r| r.algorithm == algorithm) {
        for link in LinkId::ALL {
            out.insert((run.seed, link), run.link(link).mean_throughput_bps());
        }
    }
    out
}

/// Per-second throughputs of one link pooled across every seed, bits/s.
pub fn pooled_throughput(batch: &BatchResults, algorithm: Algorithm, link: LinkId) -> Vec<f64> {
    batch
        .values()
        .filter(|r| r.algorithm == algorithm)
        .flat_map(|r| r.link(link).delivered_bits.iter().map(|&b| b as f64))
        .collect()
}
