//! Pastur–Tkachenko approximant sequences: periodic operators `V_1, V_2, …`
//! with dividing periods `T_1 | T_2 | …` and increments `‖V_n - V_{n+1}‖`
//! that decay faster than any exponential of the next period.
//!
//! Level `n+1` is level `n` extended to period `T_{n+1}` plus a seeded
//! pseudo-random bump of sup-amplitude `ε_n`. The generator is
//! `ChaCha8Rng::seed_from_u64(seed)`, drawn in a fixed order, so a
//! `(kind, seed, levels, schedule)` tuple determines the sequence bit for bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmv::PeriodicCmv;
use crate::continuum::PiecewisePotential;
use crate::error::{Error, Result};
use crate::jacobi::PeriodicJacobi;

/// Lower bound kept on Jacobi off-diagonal coefficients.
pub const JACOBI_GAMMA: f64 = 0.5;
/// Cap on `|α_n|` for CMV levels.
pub const CMV_ALPHA_CAP: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PtKind {
    Continuum,
    Jacobi,
    Cmv,
}

impl FromStr for PtKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuum" => Ok(PtKind::Continuum),
            "jacobi" => Ok(PtKind::Jacobi),
            "cmv" => Ok(PtKind::Cmv),
            _ => Err(Error::invalid(format!(
                "unknown operator kind {s:?} (expected continuum, jacobi or cmv)"
            ))),
        }
    }
}

impl fmt::Display for PtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PtKind::Continuum => "continuum",
            PtKind::Jacobi => "jacobi",
            PtKind::Cmv => "cmv",
        })
    }
}

/// Period multiples `m_n`: the discrete period is `T_n = m_n` and the
/// continuum period is `T_n = m_n·π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PeriodSchedule {
    /// `m_n = ratio^n`.
    Geometric { ratio: u64 },
    /// Explicit multiples; each must divide the next.
    Explicit { multiples: Vec<u64> },
}

/// Bump amplitudes `ε_n`, `n = 1, …, N-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AmplitudeSchedule {
    /// `ε_n = exp(-base^{n+1})`.
    SuperExponential {
        base: f64,
    },
    /// `ε_n = exp(-rate·T_{n+1})`, merely exponential decay.
    Exponential {
        rate: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub periods: PeriodSchedule,
    pub amplitudes: AmplitudeSchedule,
}

impl Default for Schedule {
    /// `T_n = 2^n` (times `π` for continuum) and `ε_n = exp(-4^{n+1})`.
    fn default() -> Self {
        Self {
            periods: PeriodSchedule::Geometric { ratio: 2 },
            amplitudes: AmplitudeSchedule::SuperExponential { base: 4.0 },
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// `default`, `superexp:<base>`, `exp:<rate>`, or a JSON schedule.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad schedule parameter {v:?}")))
        };
        if s == "default" {
            Ok(Self::default())
        } else if let Some(v) = s.strip_prefix("superexp:") {
            Ok(Self {
                amplitudes: AmplitudeSchedule::SuperExponential { base: num(v)? },
                ..Self::default()
            })
        } else if let Some(v) = s.strip_prefix("exp:") {
            Ok(Self {
                amplitudes: AmplitudeSchedule::Exponential { rate: num(v)? },
                ..Self::default()
            })
        } else {
            Ok(serde_json::from_str(s)?)
        }
    }
}

impl Schedule {
    /// Period multiples `m_1, …, m_N`.
    pub fn multiples(&self, levels: usize) -> Result<Vec<u64>> {
        let m: Vec<u64> = match &self.periods {
            PeriodSchedule::Geometric { ratio } => {
                if *ratio < 2 {
                    return Err(Error::invalid(format!("period ratio must be at least 2, got {ratio}")));
                }
                (1..=levels)
                    .map(|n| {
                        ratio
                            .checked_pow(n as u32)
                            .ok_or_else(|| Error::invalid(format!("period {ratio}^{n} overflows")))
                    })
                    .collect::<Result<_>>()?
            }
            PeriodSchedule::Explicit { multiples } => {
                if multiples.len() < levels {
                    return Err(Error::invalid(format!(
                        "schedule lists {} periods but {levels} levels were requested",
                        multiples.len()
                    )));
                }
                multiples[..levels].to_vec()
            }
        };
        if m.iter().any(|&x| x == 0) {
            return Err(Error::invalid("periods must be positive"));
        }
        if let Some(w) = m.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::invalid(format!("period {} does not divide {}", w[0], w[1])));
        }
        Ok(m)
    }

    /// Natural logarithms of `ε_1, …, ε_{levels-1}`; `-∞` encodes `ε = 0`.
    pub fn log_amplitudes(&self, periods: &[f64]) -> Result<Vec<f64>> {
        let n = periods.len().saturating_sub(1);
        let logs: Vec<f64> = match &self.amplitudes {
            AmplitudeSchedule::SuperExponential { base } => {
                if !(*base > 1.0) {
                    return Err(Error::invalid(format!(
                        "super-exponential base must exceed 1, got {base}"
                    )));
                }
                (1..=n).map(|k| -base.powi(k as i32 + 1)).collect()
            }
            AmplitudeSchedule::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return Err(Error::invalid(format!("exponential rate must be positive, got {rate}")));
                }
                (1..=n).map(|k| -rate * periods[k]).collect()
            }
            AmplitudeSchedule::Explicit { values } => {
                if values.len() < n {
                    return Err(Error::invalid(format!(
                        "schedule lists {} amplitudes, need {n}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::invalid("amplitudes must be finite and nonnegative"));
                }
                values[..n].iter().map(|v| v.ln()).collect()
            }
        };
        if logs.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("amplitudes must be nonincreasing"));
        }
        Ok(logs)
    }
}

/// One periodic level of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PeriodicOperator {
    Continuum(PiecewisePotential),
    Jacobi(PeriodicJacobi),
    Cmv(PeriodicCmv),
}

impl PeriodicOperator {
    pub fn kind(&self) -> PtKind {
        match self {
            PeriodicOperator::Continuum(_) => PtKind::Continuum,
            PeriodicOperator::Jacobi(_) => PtKind::Jacobi,
            PeriodicOperator::Cmv(_) => PtKind::Cmv,
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            PeriodicOperator::Continuum(v) => v.period(),
            PeriodicOperator::Jacobi(j) => j.period() as f64,
            PeriodicOperator::Cmv(c) => c.period() as f64,
        }
    }

    /// Extension to `q` times the period.
    pub fn extend(&self, q: usize) -> Result<Self> {
        Ok(match self {
            PeriodicOperator::Continuum(v) => PeriodicOperator::Continuum(v.extend(q)?),
            PeriodicOperator::Jacobi(j) => PeriodicOperator::Jacobi(j.extend(q * j.period())?.with_gamma(j.gamma())?),
            PeriodicOperator::Cmv(c) => PeriodicOperator::Cmv(c.extend(q * c.period())?),
        })
    }

    /// Increment norm: Besicovitch for continuum, coefficient sup otherwise.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (PeriodicOperator::Continuum(a), PeriodicOperator::Continuum(b)) => Ok(a.difference(b)?.besicovitch_norm()),
            (PeriodicOperator::Jacobi(a), PeriodicOperator::Jacobi(b)) => Ok(a.sup_distance(b)?.coefficient),
            (PeriodicOperator::Cmv(a), PeriodicOperator::Cmv(b)) => a.sup_distance(b),
            _ => Err(Error::invalid("operators of different kinds")),
        }
    }

    /// Stepanov distance (continuum only).
    pub fn stepanov_distance(&self, other: &Self) -> Result<Option<f64>> {
        match (self, other) {
            (PeriodicOperator::Continuum(a), PeriodicOperator::Continuum(b)) => {
                Ok(Some(a.difference(b)?.stepanov_norm()))
            }
            _ => Ok(None),
        }
    }

    /// `‖V‖_B` for continuum, the operator-norm bound for Jacobi, and
    /// `max |α|` for CMV.
    pub fn size(&self) -> f64 {
        match self {
            PeriodicOperator::Continuum(v) => v.besicovitch_norm(),
            PeriodicOperator::Jacobi(j) => j.norm_bound(),
            PeriodicOperator::Cmv(c) => c.alpha().iter().map(|a| a.norm()).fold(0.0, f64::max),
        }
    }
}

/// A chain of periodic approximants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct PtSequence {
    pub kind: PtKind,
    pub seed: u64,
    pub schedule: Schedule,
    /// `T_1, …, T_N`.
    pub periods: Vec<f64>,
    pub levels: Vec<PeriodicOperator>,
    /// Realized `‖V_n - V_{n+1}‖` (Besicovitch for continuum, coefficient
    /// sup for discrete kinds), computed from the stored coefficients.
    pub increments: Vec<f64>,
    /// Realized Stepanov increments (continuum only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepanov_increments: Option<Vec<f64>>,
    /// Nominal bump amplitudes `ε_n` (may underflow to 0).
    pub nominal_amplitudes: Vec<f64>,
    /// `ln ε_n`, exact even where `ε_n` underflows.
    pub log_nominal_amplitudes: Vec<f64>,
    /// Leading levels removed by [`PtSequence::drop_front`].
    #[serde(default)]
    pub dropped_levels: usize,
}

#[derive(Deserialize)]
struct RawSequence {
    kind: PtKind,
    seed: u64,
    schedule: Schedule,
    periods: Vec<f64>,
    levels: Vec<serde_json::Value>,
    #[serde(default)]
    dropped_levels: usize,
    #[serde(default)]
    increments: Option<Vec<f64>>,
}

impl TryFrom<RawSequence> for PtSequence {
    type Error = Error;

    fn try_from(r: RawSequence) -> Result<Self> {
        let levels = r
            .levels
            .into_iter()
            .map(|v| {
                Ok(match r.kind {
                    PtKind::Continuum => PeriodicOperator::Continuum(serde_json::from_value(v)?),
                    PtKind::Jacobi => PeriodicOperator::Jacobi(serde_json::from_value(v)?),
                    PtKind::Cmv => PeriodicOperator::Cmv(serde_json::from_value(v)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let seq = PtSequence::from_levels(r.kind, r.seed, r.schedule, r.periods, levels, r.dropped_levels)?;
        if let Some(inc) = r.increments {
            if inc.len() != seq.increments.len()
                || inc
                    .iter()
                    .zip(&seq.increments)
                    .any(|(a, b)| (a - b).abs() > 1e-14 * b.abs().max(1e-300))
            {
                return Err(Error::invalid("stored increments do not match the levels"));
            }
        }
        Ok(seq)
    }
}

fn unit_bump(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let m = u.iter().map(|x: &f64| x.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        let mut u = vec![0.0; n];
        u[0] = 1.0;
        return u;
    }
    u.into_iter().map(|x| x / m).collect()
}

/// Build a PT sequence of `levels` levels.
pub fn generate_pt_sequence(kind: PtKind, seed: u64, levels: usize, schedule: &Schedule) -> Result<PtSequence> {
    if levels == 0 {
        return Err(Error::invalid("a sequence needs at least one level"));
    }
    let multiples = schedule.multiples(levels)?;
    let unit = if kind == PtKind::Continuum { PI } else { 1.0 };
    let periods: Vec<f64> = multiples.iter().map(|&m| m as f64 * unit).collect();
    let logs = schedule.log_amplitudes(&periods)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = multiples[0] as usize;
    if kind == PtKind::Cmv && p1 % 2 != 0 {
        return Err(Error::invalid("CMV levels need even periods"));
    }
    let mut level = match kind {
        PtKind::Jacobi => {
            let a = (0..p1).map(|_| rng.random_range(0.75..=1.25)).collect();
            let b = (0..p1).map(|_| rng.random_range(-1.0..=1.0)).collect();
            PeriodicOperator::Jacobi(PeriodicJacobi::new(a, b)?.with_gamma(JACOBI_GAMMA)?)
        }
        PtKind::Cmv => {
            let alpha = (0..p1)
                .map(|_| {
                    let r: f64 = rng.random_range(0.2..=0.8);
                    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, phi)
                })
                .collect();
            PeriodicOperator::Cmv(PeriodicCmv::new(alpha)?)
        }
        PtKind::Continuum => {
            let v = (0..p1).map(|_| rng.random_range(-1.0..=1.0)).collect();
            PeriodicOperator::Continuum(PiecewisePotential::uniform(periods[0], v)?)
        }
    };
    let mut out = vec![level.clone()];
    for n in 0..levels - 1 {
        let q = (multiples[n + 1] / multiples[n]) as usize;
        let eps = logs[n].exp();
        let ext = level.extend(q)?;
        let cells = multiples[n + 1] as usize;
        let u = unit_bump(&mut rng, cells);
        level = match ext {
            PeriodicOperator::Jacobi(j) => {
                let b = j.b().iter().zip(&u).map(|(b, u)| b + eps * u).collect();
                PeriodicOperator::Jacobi(PeriodicJacobi::new(j.a().to_vec(), b)?.with_gamma(JACOBI_GAMMA)?)
            }
            PeriodicOperator::Cmv(c) => {
                let alpha = c
                    .alpha()
                    .iter()
                    .zip(&u)
                    .map(|(a, u)| {
                        let r = (a.norm() + eps * u).clamp(0.0, CMV_ALPHA_CAP);
                        Complex64::from_polar(r, a.arg())
                    })
                    .collect();
                PeriodicOperator::Cmv(PeriodicCmv::new(alpha)?)
            }
            PeriodicOperator::Continuum(v) => {
                let vals = v.values().iter().zip(&u).map(|(v, u)| v + eps * u).collect();
                PeriodicOperator::Continuum(PiecewisePotential::uniform(periods[n + 1], vals)?)
            }
        };
        out.push(level.clone());
    }
    PtSequence::from_levels(kind, seed, schedule.clone(), periods, out, 0)
}

/// `e^{b·T_{n+1}}·sup_{m≥n} ε_m` for one `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtConditionRow {
    pub b: f64,
    /// Natural logarithm of the proxy per level (`null` when the proxy is 0).
    pub log_values: Vec<Option<f64>>,
    /// First index from which the proxy is strictly decreasing.
    pub decreasing_from: Option<usize>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtConditionReport {
    pub rows: Vec<PtConditionRow>,
    pub pass: bool,
    /// Always set: a finite computation cannot verify the limit condition.
    pub note: String,
}

impl PtSequence {
    /// Assemble from explicit levels, validating divisibility and computing
    /// the realized increments.
    pub fn from_levels(
        kind: PtKind,
        seed: u64,
        schedule: Schedule,
        periods: Vec<f64>,
        levels: Vec<PeriodicOperator>,
        dropped_levels: usize,
    ) -> Result<Self> {
        if levels.is_empty() || levels.len() != periods.len() {
            return Err(Error::invalid(format!(
                "{} levels but {} periods",
                levels.len(),
                periods.len()
            )));
        }
        for (l, &t) in levels.iter().zip(&periods) {
            if l.kind() != kind {
                return Err(Error::invalid(format!(
                    "level of kind {} in a {kind} sequence",
                    l.kind()
                )));
            }
            if (l.period() - t).abs() > 1e-12 * t {
                return Err(Error::invalid(format!(
                    "level period {} does not match T = {t}",
                    l.period()
                )));
            }
        }
        for w in periods.windows(2) {
            let r = w[1] / w[0];
            if r < 1.0 || (r - r.round()).abs() > 1e-12 * r {
                return Err(Error::invalid(format!("period {} does not divide {}", w[0], w[1])));
            }
        }
        let mut logs = schedule.log_amplitudes(&periods)?;
        // a truncated sequence keeps the amplitudes of its own levels
        if dropped_levels > 0 {
            let full: Vec<f64> = std::iter::repeat_n(periods[0], dropped_levels)
                .chain(periods.iter().copied())
                .collect();
            if let Ok(l) = schedule.log_amplitudes(&full) {
                logs = l[dropped_levels..].to_vec();
            }
        }
        let increments = levels
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .collect::<Result<Vec<_>>>()?;
        let stepanov_increments = if kind == PtKind::Continuum {
            Some(
                levels
                    .windows(2)
                    .map(|w| w[0].stepanov_distance(&w[1]).map(|s| s.unwrap_or(0.0)))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Ok(Self {
            kind,
            seed,
            schedule,
            periods,
            levels,
            increments,
            stepanov_increments,
            nominal_amplitudes: logs.iter().map(|l| l.exp()).collect(),
            log_nominal_amplitudes: logs,
            dropped_levels,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The sequence with its first `k` levels removed and renumbered.
    pub fn drop_front(&self, k: usize) -> Result<Self> {
        if k >= self.levels.len() {
            return Err(Error::invalid(format!(
                "cannot drop {k} of {} levels",
                self.levels.len()
            )));
        }
        Ok(Self {
            kind: self.kind,
            seed: self.seed,
            schedule: self.schedule.clone(),
            periods: self.periods[k..].to_vec(),
            levels: self.levels[k..].to_vec(),
            increments: self.increments[k..].to_vec(),
            stepanov_increments: self.stepanov_increments.as_ref().map(|s| s[k..].to_vec()),
            nominal_amplitudes: self.nominal_amplitudes[k..].to_vec(),
            log_nominal_amplitudes: self.log_nominal_amplitudes[k..].to_vec(),
            dropped_levels: self.dropped_levels + k,
        })
    }

    /// Finite-sample proxy for the PT condition: for each `b`, the sequence
    /// `e^{b·T_{n+1}}·sup_{m≥n} ε_m` (nominal amplitudes) must be strictly
    /// decreasing from some index on. One value or none passes vacuously.
    pub fn check_pt_condition(&self, b_grid: &[f64]) -> Result<PtConditionReport> {
        if b_grid.is_empty() || b_grid.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::invalid("b grid must be nonempty and positive"));
        }
        let logs = &self.log_nominal_amplitudes;
        let n = logs.len();
        let mut tail = vec![f64::NEG_INFINITY; n];
        for k in (0..n).rev() {
            tail[k] = if k + 1 < n { logs[k].max(tail[k + 1]) } else { logs[k] };
        }
        let rows: Vec<PtConditionRow> = b_grid
            .iter()
            .map(|&b| {
                let vals: Vec<f64> = (0..n).map(|k| b * self.periods[k + 1] + tail[k]).collect();
                let mut from = vals.len().saturating_sub(1);
                while from > 0 && vals[from - 1] > vals[from] {
                    from -= 1;
                }
                let pass = vals.len() <= 1 || from + 1 < vals.len();
                PtConditionRow {
                    b,
                    log_values: vals.iter().map(|v| v.is_finite().then_some(*v)).collect(),
                    decreasing_from: (vals.len() > 1 && pass).then_some(from),
                    pass,
                }
            })
            .collect();
        Ok(PtConditionReport {
            pass: rows.iter().all(|r| r.pass),
            rows,
            note: "finite-sample proxy: the condition quantifies over every b > 0 and all n, which no finite computation verifies"
                .into(),
        })
    }

    /// `Σ_n T_{n+1}^w e^{K T_{n+1}} inc_n` over the realized increments.
    pub fn tail_sum(&self, k: f64, weight: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::invalid(format!("K must be positive, got {k}")));
        }
        Ok(weighted_sum(&self.periods, &self.increments, k, weight))
    }

    /// The same sum with the nominal amplitudes `ε_n`, evaluated in log
    /// space; may be `+∞`.
    pub fn nominal_tail_sum(&self, k: f64, weight: f64) -> f64 {
        self.log_nominal_amplitudes
            .iter()
            .enumerate()
            .map(|(n, &l)| {
                let t = self.periods[n + 1];
                (weight * t.ln() + k * t + l).exp()
            })
            .sum()
    }

    /// `sup_n` of the level sizes (see [`PeriodicOperator::size`]).
    pub fn max_level_size(&self) -> f64 {
        self.levels.iter().map(PeriodicOperator::size).fold(0.0, f64::max)
    }
}

fn weighted_sum(periods: &[f64], inc: &[f64], k: f64, weight: f64) -> f64 {
    inc.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(n, &x)| {
            let t = periods[n + 1];
            (weight * t.ln() + k * t + x.ln()).exp()
        })
        .fold(0.0, |a, b| a + b)
}
