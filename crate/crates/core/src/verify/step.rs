//! Step-by-step homogeneity at finite depth.
//!
//! For a sequence `V_1, …, V_N` the budget is
//!
//! * `K = max(C, C₁, Q, C Q^{1/2}, 8)` from the derivative-bound constant
//!   `C`, the edge-stability constant `C₁` and a bound `Q` on the level
//!   sizes;
//! * the tail condition `Σ_n T_{n+1}⁶ e^{K T_{n+1}} ‖V_n − V_{n+1}‖ < (1−τ)/(3K⁴)`,
//!   made to hold by dropping leading levels;
//! * `δ₀ = min(K⁻¹ T₁⁻³ e^{−K T₁}, (1−τ)/3)`.
//!
//! Every level is then certified `τ`-homogeneous on `(0, δ₀]`, and for
//! sampled `(x, δ)` the proof's bookkeeping is replayed: the band case
//! `δ ≤ s K⁻¹ T_N⁻³ e^{−K T_N}`, or the scale index `n`, the nearby point
//! `x₀ ∈ Σ_n`, an interval `I₀ ⊆ B_δ(x) ∩ Σ_n` of length `(2+τ)δ/3`, the
//! per-level losses `|I₀ ∩ (Σ_ℓ \ Σ_{ℓ+1})|` against
//! `2δK⁴T_{ℓ+1}⁶e^{KT_{ℓ+1}}‖V_ℓ − V_{ℓ+1}‖`, and the final chain
//! `|B_δ(x) ∩ Σ_N| ≥ |I₀| − Σ losses ≥ τδ`.
//!
//! All replay geometry is done in coordinates centred at `x`, where
//! endpoints near `x` are exact differences, so scales far below the
//! spacing of doubles near `x` stay meaningful.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{
    cmv_derivative_fit, cmv_edge_stability, jacobi_derivative_fit, jacobi_edge_stability, verify_derivative_bound,
    verify_edge_stability, EdgeStabilityInput,
};
use super::spectra::{level_spectra, LevelSpectrum, SpectrumSet};
use super::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::homogeneity::{HomogeneityReport, LatticeSpec};
use crate::intervals::{Interval, IntervalSet};
use crate::pt::{PeriodicOperator, PtKind, PtSequence};

/// Relative slack of the replay inequalities, as a fraction of `δ`.
pub const REPLAY_SLACK: f64 = 1e-12;
/// Periodic eigenvalues per pair when fitting `C₁` for continuum levels.
const EDGE_FIT_EIGENVALUES: usize = 10;

/// Which level-size bound enters `K`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    /// `max_n ‖V_n‖` over the computed levels.
    FiniteLevel,
    /// `max_n ‖V_n‖ + Σ_n ‖V_n − V_{n+1}‖`, an upper bound for the limit.
    #[default]
    UpperProxy,
}

/// Constants entering `K`; any left unset is fitted on the sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KInputs {
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepOptions {
    pub tau: f64,
    /// Window top for continuum spectra, in the caller's energy scale.
    pub e_max: f64,
    pub constants: KInputs,
    pub q_mode: QMode,
    pub lattice: LatticeSpec,
    /// Replace the computed `δ₀` (the budget still reports the formula).
    pub delta0_override: Option<f64>,
    /// Interior x-samples per component for the replay.
    pub replay_mesh: usize,
    /// The replay uses `δ₀·2^{-k}` for `k = 0, stride, 2·stride, …` up to the
    /// lattice depth.
    pub replay_stride: u32,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            tau: 0.5,
            e_max: 50.0,
            constants: KInputs::default(),
            q_mode: QMode::default(),
            lattice: LatticeSpec::default(),
            delta0_override: None,
            replay_mesh: 8,
            replay_stride: 4,
        }
    }
}

/// `δ₀ = min(K⁻¹ T₁⁻³ e^{−K T₁}, (1−τ)/3)`.
pub fn delta0(k: f64, t1: f64, tau: f64) -> f64 {
    band_scale(1.0, k, t1).min((1.0 - tau) / 3.0)
}

/// `(1−τ)/(3K⁴)`.
pub fn tail_threshold(k: f64, tau: f64) -> f64 {
    (1.0 - tau) / (3.0 * k.powi(4))
}

/// `s K⁻¹ T⁻³ e^{−K T}`; in log space only where the direct product would
/// underflow early.
fn band_scale(s: f64, k: f64, t: f64) -> f64 {
    if k * t < 700.0 {
        s / k / t.powi(3) * (-k * t).exp()
    } else {
        (s.ln() - k.ln() - 3.0 * t.ln() - k * t).exp()
    }
}

/// `2δ K⁴ T⁶ e^{K T} inc`, `0` for a zero increment.
fn loss_bound(delta: f64, k: f64, t: f64, inc: f64) -> f64 {
    if inc == 0.0 {
        return 0.0;
    }
    (2f64.ln() + delta.ln() + 4.0 * k.ln() + 6.0 * t.ln() + k * t + inc.ln()).exp()
}

/// Constants of the budget and where they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetConstants {
    pub c: f64,
    pub c_fitted: bool,
    pub c1: f64,
    pub c1_fitted: bool,
    /// `max_n ‖V_n‖` over all supplied levels.
    pub q_finite: f64,
    /// `q_finite + Σ increments`.
    pub q_upper: f64,
    pub q_mode: QMode,
    pub q: f64,
    pub q_supplied: bool,
    pub k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    /// 1-based index in the supplied sequence.
    pub level: usize,
    pub period: f64,
    /// Removed to meet the tail condition; certified for information only.
    pub dropped: bool,
    pub reused_from_previous: bool,
    pub recomputation_distance: Option<f64>,
    pub homogeneity: Option<HomogeneityReport>,
    pub pass: bool,
}

/// Which case of the proof a replay sample falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplayBranch {
    /// `δ ≤ s K⁻¹ T_N⁻³ e^{−K T_N}`: `x`'s band of `Σ_N` is longer than `δ`.
    Band,
    /// The scale-selection index `n` exists.
    Scale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    /// Depth `N` (1-based among kept levels).
    pub depth: usize,
    pub x: f64,
    pub delta: f64,
    pub s: f64,
    pub branch: ReplayBranch,
    /// Scale index `n` (1-based among kept levels).
    pub n: Option<usize>,
    /// `x₀ − x`.
    pub x0_offset: Option<f64>,
    /// `s K³ Σ_{ℓ=n}^{N−1} T_{ℓ+1}³ inc_ℓ`.
    pub x0_bound: Option<f64>,
    /// Length of the component of `Σ_n` (or of `Σ_N` in the band case)
    /// containing `x₀` (or `x`).
    pub component_length: Option<f64>,
    /// `I₀ − x`.
    pub i0_offset: Option<Interval>,
    pub losses: Vec<f64>,
    pub loss_bounds: Vec<f64>,
    /// `|I₀ ∩ Σ_n| − Σ losses` (or `δ` in the band case).
    pub lower_bound: f64,
    /// `|B_δ(x) ∩ Σ_N|`.
    pub measured: f64,
    pub pass: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub samples: usize,
    pub band_case: usize,
    pub scale_case: usize,
    pub failures: usize,
    pub pass: bool,
    /// Sample with the smallest `measured/δ`.
    pub tightest: Option<ReplayRecord>,
    /// Every sample; written to CSV, omitted from JSON.
    #[serde(skip)]
    pub records: Vec<ReplayRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepHomogeneityBudget {
    pub schema_version: u32,
    pub kind: PtKind,
    pub tau: f64,
    pub constants: BudgetConstants,
    /// Constant added to every continuum level so that `inf Σ_n ≥ 1`.
    pub spectrum_shift: f64,
    /// Window top after the shift (continuum only).
    pub window_top: Option<f64>,
    pub levels_supplied: usize,
    pub dropped_levels: usize,
    pub tail_sum: f64,
    pub tail_threshold: f64,
    pub tail_pass: bool,
    /// `K⁻¹ T₁⁻³ e^{−K T₁}` for the first kept level.
    pub delta0_band_scale: f64,
    /// `(1−τ)/3`.
    pub delta0_tau_scale: f64,
    pub delta0: f64,
    pub delta0_overridden: bool,
    pub levels: Vec<LevelCheck>,
    pub replay: Option<ReplaySummary>,
    pub pass: bool,
    pub failure: Option<String>,
}

impl StepHomogeneityBudget {
    /// One CSV row per replay sample.
    pub fn write_replay_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "depth",
            "x",
            "delta",
            "s",
            "branch",
            "n",
            "x0_offset",
            "x0_bound",
            "component_length",
            "loss_total",
            "loss_bound_total",
            "lower_bound",
            "measured",
            "pass",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in self.replay.iter().flat_map(|r| &r.records) {
            w.write_record([
                r.depth.to_string(),
                r.x.to_string(),
                r.delta.to_string(),
                r.s.to_string(),
                format!("{:?}", r.branch).to_lowercase(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.x0_offset),
                opt(r.x0_bound),
                opt(r.component_length),
                r.losses.iter().sum::<f64>().to_string(),
                r.loss_bounds.iter().sum::<f64>().to_string(),
                r.lower_bound.to_string(),
                r.measured.to_string(),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shift continuum levels so that every spectrum lies in `[1, ∞)`.
fn normalize_continuum(seq: &PtSequence) -> Result<(PtSequence, f64)> {
    let mut lowest = f64::INFINITY;
    for l in &seq.levels {
        if let PeriodicOperator::Continuum(v) = l {
            lowest = lowest.min(v.ground_state_energy()?);
        }
    }
    let c = (1.0 - lowest).max(0.0);
    if c == 0.0 {
        return Ok((seq.clone(), 0.0));
    }
    let levels = seq
        .levels
        .iter()
        .map(|l| match l {
            PeriodicOperator::Continuum(v) => PeriodicOperator::Continuum(v.shift(c)),
            other => other.clone(),
        })
        .collect();
    let shifted = PtSequence::from_levels(
        seq.kind,
        seq.seed,
        seq.schedule.clone(),
        seq.periods.clone(),
        levels,
        seq.dropped_levels,
    )?;
    Ok((shifted, c))
}

/// Pairs `(V_ℓ extended to T_{ℓ+1}, V_{ℓ+1})` with a nonzero increment;
/// equal operators carry no information about `C₁`.
fn nonzero_pairs(seq: &PtSequence) -> Result<Vec<(PeriodicOperator, PeriodicOperator)>> {
    let mut out = Vec::new();
    for (i, w) in seq.levels.windows(2).enumerate() {
        if seq.increments[i] == 0.0 {
            continue;
        }
        let q = (seq.periods[i + 1] / seq.periods[i]).round() as usize;
        out.push((w[0].extend(q)?, w[1].clone()));
    }
    Ok(out)
}

fn fit_constants(seq: &PtSequence, e_max: f64) -> Result<(f64, f64)> {
    let pairs = nonzero_pairs(seq)?;
    Ok(match seq.kind {
        PtKind::Continuum => {
            let vs: Vec<_> = seq
                .levels
                .iter()
                .filter_map(|l| match l {
                    PeriodicOperator::Continuum(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            let c = verify_derivative_bound(&vs, e_max, None)?.fitted_value;
            let inputs: Vec<EdgeStabilityInput> = pairs
                .into_iter()
                .filter_map(|p| match p {
                    (PeriodicOperator::Continuum(v1), PeriodicOperator::Continuum(v2)) => {
                        Some(EdgeStabilityInput { v1, v2 })
                    }
                    _ => None,
                })
                .collect();
            let c1 = if inputs.is_empty() {
                0.0
            } else {
                verify_edge_stability(&inputs, EDGE_FIT_EIGENVALUES, None)?.fitted_value
            };
            (c, c1)
        }
        PtKind::Jacobi => {
            let js: Vec<_> = seq
                .levels
                .iter()
                .filter_map(|l| match l {
                    PeriodicOperator::Jacobi(j) => Some(j.clone()),
                    _ => None,
                })
                .collect();
            let c = jacobi_derivative_fit(&js, None)?.fitted_value;
            let inputs: Vec<_> = pairs
                .into_iter()
                .filter_map(|p| match p {
                    (PeriodicOperator::Jacobi(a), PeriodicOperator::Jacobi(b)) => Some((a, b)),
                    _ => None,
                })
                .collect();
            let c1 = if inputs.is_empty() {
                0.0
            } else {
                jacobi_edge_stability(&inputs, None)?.fitted_value
            };
            (c, c1)
        }
        PtKind::Cmv => {
            let cs: Vec<_> = seq
                .levels
                .iter()
                .filter_map(|l| match l {
                    PeriodicOperator::Cmv(c) => Some(c.clone()),
                    _ => None,
                })
                .collect();
            let c = cmv_derivative_fit(&cs, None)?.fitted_value;
            let inputs: Vec<_> = pairs
                .into_iter()
                .filter_map(|p| match p {
                    (PeriodicOperator::Cmv(a), PeriodicOperator::Cmv(b)) => Some((a, b)),
                    _ => None,
                })
                .collect();
            let c1 = if inputs.is_empty() {
                0.0
            } else {
                cmv_edge_stability(&inputs, None)?.fitted_value
            };
            (c, c1)
        }
    })
}

/// Run the finite-depth homogeneity pipeline on `seq`.
pub fn step_homogeneity(seq: &PtSequence, opts: &StepOptions) -> Result<StepHomogeneityBudget> {
    let tau = opts.tau;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    if seq.is_empty() {
        return Err(Error::invalid("empty sequence"));
    }
    let continuum = seq.kind == PtKind::Continuum;
    let (seq, shift) = if continuum {
        normalize_continuum(seq)?
    } else {
        (seq.clone(), 0.0)
    };
    let e_max = opts.e_max + shift;

    // constants and K
    let (c, c1, c_fitted, c1_fitted) = match (opts.constants.c, opts.constants.c1) {
        (Some(c), Some(c1)) => (c, c1, false, false),
        (c_in, c1_in) => {
            let (cf, c1f) = fit_constants(&seq, e_max)?;
            (
                c_in.unwrap_or(cf),
                c1_in.unwrap_or(c1f),
                c_in.is_none(),
                c1_in.is_none(),
            )
        }
    };
    let q_finite = seq.max_level_size();
    let q_upper = q_finite + seq.increments.iter().sum::<f64>();
    let q = opts.constants.q.unwrap_or(match opts.q_mode {
        QMode::FiniteLevel => q_finite,
        QMode::UpperProxy => q_upper,
    });
    let k = [c, c1, q, c * q.sqrt(), 8.0]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !k.is_finite() {
        return Err(Error::numerical(format!(
            "K is not finite (C = {c}, C1 = {c1}, Q = {q})"
        )));
    }
    let constants = BudgetConstants {
        c,
        c_fitted,
        c1,
        c1_fitted,
        q_finite,
        q_upper,
        q_mode: opts.q_mode,
        q,
        q_supplied: opts.constants.q.is_some(),
        k,
    };

    // tail condition, dropping leading levels (at least two stay)
    let threshold = tail_threshold(k, tau);
    let max_drop = seq.len().saturating_sub(2);
    let mut dropped = 0;
    let mut tail = seq.tail_sum(k, 6.0)?;
    let mut best = (tail, 0);
    while !(tail < threshold) && dropped < max_drop {
        dropped += 1;
        tail = seq.drop_front(dropped)?.tail_sum(k, 6.0)?;
        if tail < best.0 {
            best = (tail, dropped);
        }
    }
    let tail_pass = tail < threshold;
    if !tail_pass {
        dropped = best.1;
        tail = best.0;
    }
    let kept = seq.drop_front(dropped)?;
    let t1 = kept.periods[0];
    let band0 = band_scale(1.0, k, t1);
    let tau0 = (1.0 - tau) / 3.0;
    let d0 = opts.delta0_override.unwrap_or(band0.min(tau0));

    let mut budget = StepHomogeneityBudget {
        schema_version: SCHEMA_VERSION,
        kind: seq.kind,
        tau,
        constants,
        spectrum_shift: shift,
        window_top: continuum.then_some(e_max),
        levels_supplied: seq.len(),
        dropped_levels: dropped,
        tail_sum: tail,
        tail_threshold: threshold,
        tail_pass,
        delta0_band_scale: band0,
        delta0_tau_scale: tau0,
        delta0: d0,
        delta0_overridden: opts.delta0_override.is_some(),
        levels: Vec::new(),
        replay: None,
        pass: false,
        failure: None,
    };
    if !tail_pass {
        budget.failure = Some(format!(
            "tail condition unachievable: smallest sum {tail:e} (after dropping {dropped} of {} levels) is not below (1-tau)/(3K^4) = {threshold:e}",
            seq.len()
        ));
        return Ok(budget);
    }
    if !(d0 > 0.0) {
        budget.failure = Some(format!(
            "delta0 = K^-1 T1^-3 e^(-K T1) underflows double precision (K = {k}, T1 = {t1})"
        ));
        return Ok(budget);
    }

    // certification at every level
    let spectra = level_spectra(&seq, e_max)?;
    let reports: Vec<Result<HomogeneityReport>> = spectra
        .par_iter()
        .map(|l| l.spectrum.certify(tau, d0, &opts.lattice))
        .collect();
    for (i, (l, rep)) in spectra.iter().zip(reports).enumerate() {
        let rep = rep?;
        budget.levels.push(LevelCheck {
            level: i + 1,
            period: seq.periods[i],
            dropped: i < dropped,
            reused_from_previous: l.reused_from_previous,
            recomputation_distance: l.recomputation_distance,
            pass: rep.pass,
            homogeneity: Some(rep),
        });
    }

    // replay on the kept levels
    let replay = replay(&kept, &spectra[dropped..], k, tau, d0, opts);
    let levels_pass = budget.levels.iter().filter(|l| !l.dropped).all(|l| l.pass);
    budget.pass = levels_pass && replay.pass;
    if !levels_pass {
        budget.failure = Some("certification failed at a kept level".into());
    } else if !replay.pass {
        budget.failure = Some(format!("{} replay samples failed", replay.failures));
    }
    budget.replay = Some(replay);
    Ok(budget)
}

fn replay(seq: &PtSequence, spectra: &[LevelSpectrum], k: f64, tau: f64, d0: f64, opts: &StepOptions) -> ReplaySummary {
    let stride = opts.replay_stride.max(1);
    let deltas: Vec<f64> = (0..=opts.lattice.ladder_depth)
        .step_by(stride as usize)
        .map(|j| d0 * 0.5f64.powi(j as i32))
        .collect();
    let continuum = seq.kind == PtKind::Continuum;
    let mut tasks = Vec::new();
    for depth in 1..=spectra.len() {
        for x in spectra[depth - 1].spectrum.samples(opts.replay_mesh) {
            for &d in &deltas {
                tasks.push((depth, x, d));
            }
        }
    }
    let records: Vec<ReplayRecord> = tasks
        .par_iter()
        .map(|&(depth, x, delta)| {
            let s = if continuum { 1.0 + x.max(0.0).sqrt() } else { 1.0 };
            replay_one(seq, spectra, k, tau, depth, x, delta, s)
        })
        .collect();
    let failures = records.iter().filter(|r| !r.pass).count();
    let tightest = records
        .iter()
        .min_by(|a, b| (a.measured / a.delta).total_cmp(&(b.measured / b.delta)))
        .cloned();
    ReplaySummary {
        samples: records.len(),
        band_case: records.iter().filter(|r| r.branch == ReplayBranch::Band).count(),
        scale_case: records.iter().filter(|r| r.branch == ReplayBranch::Scale).count(),
        failures,
        pass: failures == 0,
        tightest,
        records,
    }
}

fn local(set: &SpectrumSet, x: f64) -> IntervalSet {
    set.local(x)
}

#[allow(clippy::too_many_arguments)]
fn replay_one(
    seq: &PtSequence,
    spectra: &[LevelSpectrum],
    k: f64,
    tau: f64,
    depth: usize,
    x: f64,
    delta: f64,
    s: f64,
) -> ReplayRecord {
    let eta = REPLAY_SLACK * delta;
    let big_n = depth - 1; // 0-based
    let sigma_n_local = local(&spectra[big_n].spectrum, x);
    let measured = sigma_n_local.window_measure(0.0, delta);
    let mut rec = ReplayRecord {
        depth,
        x,
        delta,
        s,
        branch: ReplayBranch::Band,
        n: None,
        x0_offset: None,
        x0_bound: None,
        component_length: None,
        i0_offset: None,
        losses: Vec::new(),
        loss_bounds: Vec::new(),
        lower_bound: 0.0,
        measured,
        pass: false,
        failure: None,
    };
    let fail = |mut r: ReplayRecord, why: String| {
        r.pass = false;
        r.failure = Some(why);
        r
    };

    if delta <= band_scale(s, k, seq.periods[big_n]) {
        let comp = sigma_n_local.component_containing(0.0, eta);
        rec.component_length = comp.map(|c| c.length());
        rec.lower_bound = delta;
        let Some(comp) = comp else {
            return fail(rec, "sample point not in its own spectrum".into());
        };
        if comp.length() < delta {
            return fail(
                rec,
                format!("component of length {:e} is shorter than delta", comp.length()),
            );
        }
        if measured < delta - eta {
            return fail(rec, "window measure below delta in the band case".into());
        }
        rec.pass = measured >= tau * delta - eta;
        return rec;
    }

    rec.branch = ReplayBranch::Scale;
    // unique n with band_scale(T_{n+1}) < δ ≤ band_scale(T_n)
    let Some(n) =
        (0..big_n).find(|&n| band_scale(s, k, seq.periods[n + 1]) < delta && delta <= band_scale(s, k, seq.periods[n]))
    else {
        return fail(rec, "no scale-selection index".into());
    };
    rec.n = Some(n + 1);
    let loc: Vec<IntervalSet> = (n..=big_n).map(|l| local(&spectra[l].spectrum, x)).collect();

    let Some(x0) = loc[0].nearest_point(0.0) else {
        return fail(rec, "empty spectrum at the selected scale".into());
    };
    rec.x0_offset = Some(x0);
    let weighted: f64 = (n..big_n)
        .map(|l| {
            let inc = seq.increments[l];
            if inc == 0.0 {
                0.0
            } else {
                (3.0 * seq.periods[l + 1].ln() + inc.ln()).exp()
            }
        })
        .sum();
    let x0_bound = s * k.powi(3) * weighted;
    rec.x0_bound = Some(x0_bound);
    if x0.abs() > x0_bound + eta {
        return fail(
            rec,
            format!("|x - x0| = {:e} exceeds the stability bound {x0_bound:e}", x0.abs()),
        );
    }
    if x0.abs() >= delta * (1.0 - tau) / 3.0 + eta {
        return fail(rec, format!("|x - x0| = {:e} is not below delta(1-tau)/3", x0.abs()));
    }

    let Some(comp) = loc[0].component_containing(x0, 0.0) else {
        return fail(rec, "nearest point not in the set".into());
    };
    rec.component_length = Some(comp.length());
    if comp.length() < delta {
        return fail(
            rec,
            format!("band of length {:e} at scale n is shorter than delta", comp.length()),
        );
    }
    let len0 = (2.0 + tau) * delta / 3.0;
    let (lo, hi) = (comp.lo.max(-delta), comp.hi.min(delta));
    if hi - lo < len0 || x0 < lo || x0 > hi {
        return fail(
            rec,
            "no interval of length (2+tau)delta/3 around x0 inside B_delta(x) and the band".into(),
        );
    }
    let a = (x0 - 0.5 * len0).clamp(lo, hi - len0);
    let i0 = Interval { lo: a, hi: a + len0 };
    rec.i0_offset = Some(i0);

    let mut failure = None;
    for (j, l) in (n..big_n).enumerate() {
        let loss = loc[j].intersect_interval(i0).difference(&loc[j + 1]).measure();
        let bound = loss_bound(delta, k, seq.periods[l + 1], seq.increments[l]);
        if loss > bound + eta && failure.is_none() {
            failure = Some(format!("loss {loss:e} at level {} exceeds {bound:e}", l + 1));
        }
        rec.losses.push(loss);
        rec.loss_bounds.push(bound);
    }
    let covered = loc[0].intersect_interval(i0).measure();
    rec.lower_bound = covered - rec.losses.iter().sum::<f64>();
    if let Some(f) = failure {
        return fail(rec, f);
    }
    if rec.lower_bound < tau * delta - eta {
        let msg = format!("lower bound {:e} is below tau*delta", rec.lower_bound);
        return fail(rec, msg);
    }
    if measured < rec.lower_bound - eta {
        return fail(rec, "measured window is below the bookkeeping lower bound".into());
    }
    rec.pass = true;
    rec
}
