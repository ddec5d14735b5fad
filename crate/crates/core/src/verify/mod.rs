//! Quantitative checks of the estimates behind homogeneity of limit-periodic
//! spectra: constant fitting for the discriminant-derivative, band-length
//! and edge-stability inequalities, lower semicontinuity of spectral
//! measure, the step-by-step homogeneity bookkeeping, and gap-length sums.
//!
//! The universal constants of these inequalities are proved to exist but
//! not computed, so every check runs in one of two modes: *fit* finds the
//! smallest constant for which the inequality holds on every sample, and
//! *verify* counts violations for a given constant. Fitted constants are
//! reported as such.

mod bounds;
mod ensemble;
mod spectra;
mod step;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{
    cmv_derivative_fit, cmv_edge_stability, jacobi_derivative_fit, jacobi_edge_stability, normalize_spectrum_bottom,
    verify_band_length_bound, verify_derivative_bound, verify_edge_stability, verify_ground_state_bound,
    EdgeStabilityInput, INTERIOR_SAMPLES,
};
pub use ensemble::{random_jacobi, random_jacobi_pairs, random_square_well_pairs, random_square_wells, Ensemble};
pub use spectra::{
    first_band_cluster, gap_length_partial_sums, level_spectra, semicontinuity, verify_semicontinuity, GapSumLevel,
    GapSumReport, LevelSpectrum, SemicontinuityReport, SpectrumSet,
};
pub use step::{
    delta0, step_homogeneity, tail_threshold, BudgetConstants, KInputs, LevelCheck, QMode, ReplayBranch, ReplayRecord,
    ReplaySummary, StepHomogeneityBudget, StepOptions, REPLAY_SLACK,
};

/// Names accepted by [`run_ensemble_check`].
pub const ENSEMBLE_CHECKS: [&str; 8] = [
    "derivative",
    "band-length",
    "edge-stability",
    "ground-state",
    "derivative-jacobi",
    "edge-stability-jacobi",
    "derivative-cmv",
    "edge-stability-cmv",
];

/// Run the ensemble check `check` (one of [`ENSEMBLE_CHECKS`]). `e_max` is
/// required by the continuum derivative and band-length checks; `n_max` is
/// the eigenvalue count of continuum edge stability.
pub fn run_ensemble_check(
    check: &str,
    ensemble: &Ensemble,
    constant: Option<f64>,
    e_max: Option<f64>,
    n_max: usize,
) -> crate::Result<FitResult> {
    let emax = || e_max.ok_or_else(|| crate::Error::invalid(format!("check '{check}' needs an energy window top")));
    match check {
        "derivative" => verify_derivative_bound(&ensemble.potentials()?, emax()?, constant),
        "band-length" => verify_band_length_bound(&ensemble.potentials()?, emax()?, constant),
        "edge-stability" => verify_edge_stability(&ensemble.potential_pairs()?, n_max, constant),
        "ground-state" => verify_ground_state_bound(&ensemble.potentials()?, constant),
        "derivative-jacobi" => jacobi_derivative_fit(&ensemble.jacobi()?, constant),
        "edge-stability-jacobi" => jacobi_edge_stability(&ensemble.jacobi_pairs()?, constant),
        "derivative-cmv" => cmv_derivative_fit(&ensemble.cmv()?, constant),
        "edge-stability-cmv" => cmv_edge_stability(&ensemble.cmv_pairs()?, constant),
        _ => Err(crate::Error::invalid(format!(
            "unknown check '{check}' (expected one of {})",
            ENSEMBLE_CHECKS.join(", ")
        ))),
    }
}

/// Version tag carried by every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// Serde for `f64` fields that may be non-finite: finite values are JSON
/// numbers, others the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {s:?}"
                ))),
            },
        }
    }
}

/// Whether a report fitted its constant or checked a supplied one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fit,
    Verify,
}

/// One evaluated instance of an inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    /// What the row checks, e.g. `edge` or `ground-state`.
    pub label: String,
    pub member: usize,
    /// Band index, eigenvalue index, or sample index, depending on the check.
    pub index: usize,
    pub energy: f64,
    pub lhs: f64,
    /// Right-hand side at the constant used by the report.
    pub rhs: f64,
    /// Smallest constant for which this instance holds.
    pub required_constant: f64,
    pub pass: bool,
}

/// Sample that forces the fitted constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub member: usize,
    pub index: usize,
    pub energy: f64,
    pub lhs: f64,
    #[serde(with = "float_or_string")]
    pub required_constant: f64,
}

/// Outcome of a fit or verification over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema_version: u32,
    pub check: String,
    pub constant_name: String,
    pub mode: Mode,
    /// Smallest constant making every sample hold (`"inf"` if none does).
    #[serde(with = "float_or_string")]
    pub fitted_value: f64,
    /// Constant the rows were evaluated with (supplied, or the fit).
    #[serde(with = "float_or_string")]
    pub constant_used: f64,
    pub samples: usize,
    pub violations: usize,
    pub pass: bool,
    pub ensemble_spec: String,
    pub worst_case_witness: Option<Witness>,
    /// Per-sample rows; written to CSV, omitted from JSON.
    #[serde(skip)]
    pub rows: Vec<CheckRow>,
}

impl FitResult {
    /// CSV with one row per evaluated instance.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "check",
            "label",
            "member",
            "index",
            "energy",
            "lhs",
            "rhs",
            "required_constant",
            "pass",
        ])?;
        for r in &self.rows {
            w.write_record([
                self.check.clone(),
                r.label.clone(),
                r.member.to_string(),
                r.index.to_string(),
                r.energy.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.required_constant.to_string(),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A sample of an inequality `lhs ≤ rhs(c)` (or `≥`), monotone in `c`.
pub(crate) struct Sample {
    pub label: &'static str,
    pub member: usize,
    pub index: usize,
    pub energy: f64,
    pub lhs: f64,
    /// `holds(c)`: the inequality at constant `c`; monotone false→true.
    pub holds: Box<dyn Fn(f64) -> bool + Send + Sync>,
    /// `rhs(c)` for reporting.
    pub rhs: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// Smallest `c ≥ 0` with `holds(c)`, for `holds` monotone in `c`; `+∞` if
/// none exists below `1e300`. The returned value always satisfies `holds`
/// (or is `0` when every positive constant works).
pub(crate) fn min_constant(holds: impl Fn(f64) -> bool) -> f64 {
    let mut hi = 1.0_f64;
    let mut lo;
    if holds(hi) {
        lo = 0.5;
        while holds(lo) {
            if lo < 1e-300 {
                return 0.0;
            }
            hi = lo;
            lo *= 0.5;
        }
    } else {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
            if holds(hi) {
                break;
            }
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Fit or verify over a list of samples.
pub(crate) fn run_fit(
    check: &str,
    constant_name: &str,
    ensemble_spec: String,
    samples: Vec<Sample>,
    constant: Option<f64>,
) -> FitResult {
    // parallel map; the max-reduction below runs in sample order, so the
    // witness is deterministic
    let required: Vec<f64> = samples.par_iter().map(|s| min_constant(&s.holds)).collect();
    let (mut fitted, mut worst) = (0.0_f64, None);
    for (s, &r) in samples.iter().zip(&required) {
        if worst.is_none() || r > fitted {
            fitted = fitted.max(r);
            worst = Some(Witness {
                member: s.member,
                index: s.index,
                energy: s.energy,
                lhs: s.lhs,
                required_constant: r,
            });
        }
    }
    let used = constant.unwrap_or(fitted);
    let rows: Vec<CheckRow> = samples
        .iter()
        .zip(&required)
        .map(|(s, &r)| CheckRow {
            label: s.label.into(),
            member: s.member,
            index: s.index,
            energy: s.energy,
            lhs: s.lhs,
            rhs: (s.rhs)(used),
            required_constant: r,
            pass: used.is_finite() && (s.holds)(used),
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.pass).count();
    FitResult {
        schema_version: SCHEMA_VERSION,
        check: check.into(),
        constant_name: constant_name.into(),
        mode: if constant.is_some() { Mode::Verify } else { Mode::Fit },
        fitted_value: fitted,
        constant_used: used,
        samples: rows.len(),
        violations,
        pass: violations == 0,
        ensemble_spec,
        worst_case_witness: worst,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_constant_brackets_threshold() {
        let c = min_constant(|c| c >= 3.7);
        assert!(c >= 3.7 && c < 3.7 * (1.0 + 1e-12));
        let c = min_constant(|c| c >= 1e-5);
        assert!(c >= 1e-5 && c < 1e-5 * (1.0 + 1e-12));
        assert_eq!(min_constant(|_| true), 0.0);
        assert_eq!(min_constant(|_| false), f64::INFINITY);
    }

    #[test]
    fn infinite_fit_round_trips() {
        let samples = vec![Sample {
            label: "never",
            member: 0,
            index: 0,
            energy: 0.0,
            lhs: 1.0,
            holds: Box::new(|_| false),
            rhs: Box::new(|_| 0.0),
        }];
        let fit = run_fit("never", "C", "one sample".into(), samples, None);
        assert_eq!(fit.fitted_value, f64::INFINITY);
        let text = serde_json::to_string(&fit).unwrap();
        assert!(text.contains(r#""fitted_value":"inf""#));
        // per-sample rows go to CSV only
        let expected = FitResult {
            rows: Vec::new(),
            ..fit
        };
        assert_eq!(serde_json::from_str::<FitResult>(&text).unwrap(), expected);
    }

    #[test]
    fn fit_then_verify_has_no_violations() {
        let samples: Vec<Sample> = [0.5, 2.0, 1.25]
            .iter()
            .enumerate()
            .map(|(i, &t)| Sample {
                label: "toy",
                member: i,
                index: 0,
                energy: 0.0,
                lhs: t,
                holds: Box::new(move |c: f64| t <= c * c),
                rhs: Box::new(|c: f64| c * c),
            })
            .collect();
        let fit = run_fit("toy", "C", "three samples".into(), samples, None);
        assert_eq!(fit.violations, 0);
        assert!((fit.fitted_value - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(fit.worst_case_witness.unwrap().member, 1);
    }
}
