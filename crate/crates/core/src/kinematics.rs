//! Piecewise-linear node motion and the random edge-node / gateway /
//! backhaul scenarios.
//!
//! A node's trajectory is a time-ordered list of constant-velocity
//! segments. Past the end of the last segment the node is parked at its
//! final position.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const ZERO: Position3 = Position3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn midpoint(self, other: Position3) -> Position3 {
        (self + other) * 0.5
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Position3 {
    type Output = Position3;
    fn add(self, o: Position3) -> Position3 {
        Position3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Position3 {
    type Output = Position3;
    fn sub(self, o: Position3) -> Position3 {
        Position3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Position3 {
    type Output = Position3;
    fn mul(self, k: f64) -> Position3 {
        Position3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Euclidean distance between two points, in meters.
pub fn distance(a: Position3, b: Position3) -> f64 {
    (a - b).norm()
}

/// Constant-velocity motion starting at `start_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_time: f64,
    pub origin: Position3,
    /// Meters per second.
    pub velocity: Position3,
    pub duration: f64,
}

impl Segment {
    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn position_at(&self, t: f64) -> Position3 {
        let dt = (t - self.start_time).clamp(0.0, self.duration);
        self.origin + self.velocity * dt
    }

    pub fn end_position(&self) -> Position3 {
        self.origin + self.velocity * self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeId {
    Fen,
    Fgw,
    Bkh,
}

impl NodeId {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeId::Fen => "fen",
            NodeId::Fgw => "fgw",
            NodeId::Bkh => "bkh",
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fen" => Ok(NodeId::Fen),
            "fgw" => Ok(NodeId::Fgw),
            "bkh" => Ok(NodeId::Bkh),
            other => Err(Error::Parse(format!("unknown node id `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub node_id: NodeId,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn new(node_id: NodeId, segments: Vec<Segment>) -> Self {
        Self { node_id, segments }
    }

    /// A node parked at `position` from t = 0 for `duration` seconds.
    pub fn stationary(node_id: NodeId, position: Position3, duration: f64) -> Self {
        Self::new(
            node_id,
            vec![Segment {
                start_time: 0.0,
                origin: position,
                velocity: Position3::ZERO,
                duration,
            }],
        )
    }

    pub fn end_time(&self) -> Option<f64> {
        self.segments.last().map(Segment::end_time)
    }

    /// Position at time `t`. Before the first segment the node sits at its
    /// origin; after the last one it stays where that segment ended.
    pub fn position_at(&self, t: f64) -> Result<Position3> {
        let first = self.segments.first().ok_or(Error::NoSegments)?;
        if t <= first.start_time {
            return Ok(first.origin);
        }
        // Last segment whose start_time <= t.
        let idx = self.segments.partition_point(|s| s.start_time <= t) - 1;
        Ok(self.segments[idx].position_at(t))
    }
}

/// Free-function form of [`Trajectory::position_at`].
pub fn position_at(traj: &Trajectory, t: f64) -> Result<Position3> {
    traj.position_at(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub arena_side: f64,
    pub run_duration: f64,
    /// Trajectory update period.
    pub delta: f64,
    pub fen_speed: f64,
    pub bkh_position: Position3,
    pub altitude: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            arena_side: 1000.0,
            run_duration: 300.0,
            delta: 30.0,
            fen_speed: 8.0,
            bkh_position: Position3::new(0.0, 500.0, 20.0),
            altitude: 20.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.arena_side > 0.0 && self.arena_side.is_finite()) {
            return Err(Error::config("arena_side", "must be positive"));
        }
        if !(self.run_duration >= 0.0 && self.run_duration.is_finite()) {
            return Err(Error::config("run_duration", "must be non-negative"));
        }
        if !(self.delta > 0.0 && (self.run_duration == 0.0 || self.delta <= self.run_duration)) {
            return Err(Error::config(
                "delta",
                "must satisfy 0 < delta <= run_duration",
            ));
        }
        if !(self.fen_speed > 0.0 && self.fen_speed.is_finite()) {
            return Err(Error::config("fen_speed", "must be positive"));
        }
        if !self.bkh_position.is_finite() {
            return Err(Error::config("bkh_position", "must be finite"));
        }
        if !self.altitude.is_finite() {
            return Err(Error::config("altitude", "must be finite"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub fen: Trajectory,
    pub fgw: Trajectory,
    pub bkh: Trajectory,
    pub config: ScenarioConfig,
}

impl Scenario {
    /// Random edge-node walk with the gateway tracking the midpoint to the
    /// backhaul.
    pub fn generate(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let fen = generate_fen_trajectory(config);
        let fgw = derive_fgw_trajectory(&fen, config)?;
        let bkh = Trajectory::stationary(NodeId::Bkh, config.bkh_position, config.run_duration);
        Ok(Self {
            fen,
            fgw,
            bkh,
            config: config.clone(),
        })
    }

    /// All three nodes parked; used for static-link experiments.
    pub fn fixed(config: &ScenarioConfig, fen: Position3, fgw: Position3) -> Self {
        let d = config.run_duration;
        Self {
            fen: Trajectory::stationary(NodeId::Fen, fen, d),
            fgw: Trajectory::stationary(NodeId::Fgw, fgw, d),
            bkh: Trajectory::stationary(NodeId::Bkh, config.bkh_position, d),
            config: config.clone(),
        }
    }

    pub fn trajectories(&self) -> [&Trajectory; 3] {
        [&self.fen, &self.fgw, &self.bkh]
    }

    /// CSV table with one row per segment of every node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "node_id,segment_index,start_time,origin_x,origin_y,origin_z,velocity_x,velocity_y,velocity_z,duration\n",
        );
        for traj in self.trajectories() {
            for (i, s) in traj.segments.iter().enumerate() {
                // Shortest round-trip formatting keeps import exact.
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    traj.node_id,
                    i,
                    s.start_time,
                    s.origin.x,
                    s.origin.y,
                    s.origin.z,
                    s.velocity.x,
                    s.velocity.y,
                    s.velocity.z,
                    s.duration
                ));
            }
        }
        out
    }

    /// Parses the table written by [`Scenario::to_csv`]. The config is not
    /// part of the table and has to be supplied.
    pub fn from_csv(text: &str, config: &ScenarioConfig) -> Result<Self> {
        let mut fen = Vec::new();
        let mut fgw = Vec::new();
        let mut bkh = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 10 {
                return Err(Error::Parse(format!(
                    "scenario line {}: expected 10 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                cols[i].trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!(
                        "scenario line {} column {}: {e}",
                        lineno + 1,
                        i + 1
                    ))
                })
            };
            let seg = Segment {
                start_time: num(2)?,
                origin: Position3::new(num(3)?, num(4)?, num(5)?),
                velocity: Position3::new(num(6)?, num(7)?, num(8)?),
                duration: num(9)?,
            };
            match cols[0].trim().parse::<NodeId>()? {
                NodeId::Fen => fen.push(seg),
                NodeId::Fgw => fgw.push(seg),
                NodeId::Bkh => bkh.push(seg),
            }
        }
        for (name, segs) in [("fen", &fen), ("fgw", &fgw), ("bkh", &bkh)] {
            if segs.is_empty() {
                return Err(Error::Parse(format!("scenario has no segments for {name}")));
            }
        }
        Ok(Self {
            fen: Trajectory::new(NodeId::Fen, fen),
            fgw: Trajectory::new(NodeId::Fgw, fgw),
            bkh: Trajectory::new(NodeId::Bkh, bkh),
            config: config.clone(),
        })
    }
}

/// Distance along the unit `dir` from `p` to the boundary of the square
/// arena `[0, side]²` (horizontal plane only).
fn distance_to_boundary(p: Position3, dir: (f64, f64), side: f64) -> f64 {
    let axis = |pos: f64, d: f64| -> f64 {
        if d > 0.0 {
            (side - pos) / d
        } else if d < 0.0 {
            -pos / d
        } else {
            f64::INFINITY
        }
    };
    axis(p.x, dir.0).min(axis(p.y, dir.1)).max(0.0)
}

/// Random edge-node trajectory: a uniformly placed start point, then at
/// every multiple of `delta` a straight move with uniform heading and
/// uniform length in `(0, speed * delta]`, truncated at the arena edge.
/// The node hovers for the rest of each epoch.
pub fn generate_fen_trajectory(config: &ScenarioConfig) -> Trajectory {
    let mut pos_rng = substream(config.seed, Stream::FenInitialPosition);
    let mut dir_rng = substream(config.seed, Stream::FenDirection);
    let mut len_rng = substream(config.seed, Stream::FenLength);

    let side = config.arena_side;
    let mut pos = Position3::new(
        pos_rng.random::<f64>() * side,
        pos_rng.random::<f64>() * side,
        config.altitude,
    );

    let epochs = (config.run_duration / config.delta).ceil() as usize;
    let mut segments = Vec::with_capacity(2 * epochs.max(1));
    for k in 0..epochs {
        let start = k as f64 * config.delta;
        let epoch_end = ((k + 1) as f64 * config.delta).min(config.run_duration);

        let heading = dir_rng.random::<f64>() * 2.0 * PI;
        // random() is in [0, 1), so 1 - u is in (0, 1].
        let wanted = (1.0 - len_rng.random::<f64>()) * config.fen_speed * config.delta;
        let dir = (heading.cos(), heading.sin());
        let length = wanted.min(distance_to_boundary(pos, dir, side));
        let move_time = length / config.fen_speed;

        let mut t = start;
        if move_time > 0.0 {
            let velocity = Position3::new(dir.0 * config.fen_speed, dir.1 * config.fen_speed, 0.0);
            let seg = Segment {
                start_time: t,
                origin: pos,
                velocity,
                duration: move_time,
            };
            let mut end = seg.end_position();
            // Rounding can leave the endpoint a few ulps outside the arena.
            end.x = end.x.clamp(0.0, side);
            end.y = end.y.clamp(0.0, side);
            segments.push(seg);
            pos = end;
            t += move_time;
        }
        if epoch_end > t {
            segments.push(Segment {
                start_time: t,
                origin: pos,
                velocity: Position3::ZERO,
                duration: epoch_end - t,
            });
        }
    }
    if segments.is_empty() {
        segments.push(Segment {
            start_time: 0.0,
            origin: pos,
            velocity: Position3::ZERO,
            duration: 0.0,
        });
    }
    Trajectory::new(NodeId::Fen, segments)
}

/// Gateway trajectory that keeps the gateway at the midpoint between the
/// backhaul and the edge node: every edge-node segment maps to a segment
/// between the corresponding midpoints over the same time interval.
pub fn derive_fgw_trajectory(fen: &Trajectory, config: &ScenarioConfig) -> Result<Trajectory> {
    if fen.segments.is_empty() {
        return Err(Error::NoSegments);
    }
    let bkh = config.bkh_position;
    let segments = fen
        .segments
        .iter()
        .map(|s| {
            let from = bkh.midpoint(s.origin);
            let to = bkh.midpoint(s.end_position());
            let velocity = if s.duration > 0.0 {
                (to - from) * (1.0 / s.duration)
            } else {
                Position3::ZERO
            };
            Segment {
                start_time: s.start_time,
                origin: from,
                velocity,
                duration: s.duration,
            }
        })
        .collect();
    Ok(Trajectory::new(NodeId::Fgw, segments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_segment(origin: Position3, v: Position3, dur: f64) -> Trajectory {
        Trajectory::new(
            NodeId::Fen,
            vec![Segment {
                start_time: 0.0,
                origin,
                velocity: v,
                duration: dur,
            }],
        )
    }

    #[test]
    fn linear_motion_and_clamping() {
        let t = one_segment(Position3::ZERO, Position3::new(8.0, 0.0, 0.0), 30.0);
        assert_eq!(t.position_at(10.0).unwrap(), Position3::new(80.0, 0.0, 0.0));
        assert_eq!(
            t.position_at(40.0).unwrap(),
            Position3::new(240.0, 0.0, 0.0)
        );
        let s = one_segment(Position3::new(5.0, 5.0, 0.0), Position3::ZERO, 300.0);
        assert_eq!(s.position_at(123.0).unwrap(), Position3::new(5.0, 5.0, 0.0));
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let t = Trajectory::new(NodeId::Fen, vec![]);
        assert_eq!(t.position_at(1.0), Err(Error::NoSegments));
    }

    #[test]
    fn distances() {
        assert_eq!(
            distance(Position3::ZERO, Position3::new(3.0, 4.0, 0.0)),
            5.0
        );
        let p = Position3::new(1.0, 1.0, 1.0);
        assert_eq!(distance(p, p), 0.0);
        assert_abs_diff_eq!(
            distance(Position3::ZERO, Position3::new(1000.0, 1000.0, 0.0)),
            2f64.sqrt() * 1000.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn fgw_midpoint_example() {
        let z = 20.0;
        let config = ScenarioConfig {
            bkh_position: Position3::new(0.0, 500.0, z),
            ..Default::default()
        };
        let fen = Trajectory::new(
            NodeId::Fen,
            vec![
                Segment {
                    start_time: 0.0,
                    origin: Position3::new(400.0, 100.0, z),
                    velocity: Position3::new(8.0, 0.0, 0.0),
                    duration: 30.0,
                },
                Segment {
                    start_time: 30.0,
                    origin: Position3::new(640.0, 100.0, z),
                    velocity: Position3::ZERO,
                    duration: 30.0,
                },
            ],
        );
        let fgw = derive_fgw_trajectory(&fen, &config).unwrap();
        let first = fgw.segments[0];
        assert_eq!(first.origin, Position3::new(200.0, 300.0, z));
        assert_abs_diff_eq!(first.end_position().x, 320.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first.end_position().y, 300.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first.speed(), 4.0, epsilon = 1e-12);
        assert_eq!(fgw.segments[1].velocity, Position3::ZERO);
    }

    #[test]
    fn generated_walk_stays_in_arena() {
        let config = ScenarioConfig {
            seed: 42,
            ..Default::default()
        };
        let traj = generate_fen_trajectory(&config);
        for s in &traj.segments {
            let speed = s.speed();
            assert!(speed == 0.0 || (speed - 8.0).abs() < 1e-9, "speed {speed}");
        }
        for t in 0..=300 {
            let p = traj.position_at(t as f64).unwrap();
            assert!((0.0..=1000.0).contains(&p.x) && (0.0..=1000.0).contains(&p.y));
            assert_eq!(p.z, 20.0);
        }
    }

    #[test]
    fn epochs_align_with_delta() {
        let config = ScenarioConfig {
            seed: 3,
            ..Default::default()
        };
        let traj = generate_fen_trajectory(&config);
        for k in 0..10 {
            let t = k as f64 * 30.0;
            assert!(
                traj.segments.iter().any(|s| s.start_time == t),
                "no segment starts at {t}"
            );
        }
        assert_abs_diff_eq!(traj.end_time().unwrap(), 300.0, epsilon = 1e-9);
    }

    #[test]
    fn boundary_truncation() {
        let p = Position3::new(990.0, 500.0, 0.0);
        assert_abs_diff_eq!(distance_to_boundary(p, (1.0, 0.0), 1000.0), 10.0);
        assert_eq!(distance_to_boundary(p, (0.0, 1.0), 1000.0), 500.0);
        let corner = Position3::new(0.0, 0.0, 0.0);
        assert_eq!(distance_to_boundary(corner, (-1.0, 0.0), 1000.0), 0.0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let config = ScenarioConfig {
            seed: 9,
            ..Default::default()
        };
        let sc = Scenario::generate(&config).unwrap();
        let back = Scenario::from_csv(&sc.to_csv(), &config).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = ScenarioConfig {
            delta: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidConfig { field: "delta", .. })
        ));
    }
}
