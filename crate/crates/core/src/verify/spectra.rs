//! Spectra of the levels of a sequence, lower semicontinuity of their
//! Lebesgue measure, and gap-length partial sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SCHEMA_VERSION;
use crate::arcs::CircularArcSet;
use crate::error::{Error, Result};
use crate::homogeneity::{
    arc_samples, certify_arc_homogeneity, certify_homogeneity, mesh_samples, HomogeneityReport, LatticeSpec,
};
use crate::intervals::{Interval, IntervalSet};
use crate::pt::{PeriodicOperator, PtSequence};

/// Spectrum of one level: a subset of the line, or of the circle for CMV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", content = "set", rename_all = "lowercase")]
pub enum SpectrumSet {
    Line(IntervalSet),
    Circle(CircularArcSet),
}

impl SpectrumSet {
    /// The set in coordinates centred at `x`: translated for the line, the
    /// `[-π, π]` arc view for the circle. Window measures, nearest points
    /// and components near `x` keep full relative precision there.
    pub fn local(&self, x: f64) -> IntervalSet {
        match self {
            SpectrumSet::Line(s) => s.translate(-x),
            SpectrumSet::Circle(a) => a.local_view(x),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            SpectrumSet::Line(s) => s.measure(),
            SpectrumSet::Circle(a) => a.measure(),
        }
    }

    /// Components as intervals (arcs split at angle 0).
    pub fn parts(&self) -> &IntervalSet {
        match self {
            SpectrumSet::Line(s) => s,
            SpectrumSet::Circle(a) => a.split_parts(),
        }
    }

    /// Total length of the gaps: bounded gaps on the line, all gaps of the
    /// circle.
    pub fn gap_length(&self) -> f64 {
        match self {
            SpectrumSet::Line(s) => s.gaps().iter().map(Interval::length).sum(),
            SpectrumSet::Circle(a) => a.gaps().iter().map(|(s, e)| e - s).sum(),
        }
    }

    pub fn gap_count(&self) -> usize {
        match self {
            SpectrumSet::Line(s) => s.gaps().len(),
            SpectrumSet::Circle(a) => a.gaps().len(),
        }
    }

    /// Endpoints plus `per_band` interior points per component.
    pub fn samples(&self, per_band: usize) -> Vec<f64> {
        match self {
            SpectrumSet::Line(s) => mesh_samples(s, per_band),
            SpectrumSet::Circle(a) => arc_samples(a, per_band),
        }
    }

    pub fn certify(&self, tau: f64, delta0: f64, spec: &LatticeSpec) -> Result<HomogeneityReport> {
        match self {
            SpectrumSet::Line(s) => certify_homogeneity(s, tau, delta0, spec),
            SpectrumSet::Circle(a) => certify_arc_homogeneity(a, tau, delta0, spec),
        }
    }

    pub fn hausdorff_distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (SpectrumSet::Line(a), SpectrumSet::Line(b)) => a.hausdorff_distance(b),
            (SpectrumSet::Circle(a), SpectrumSet::Circle(b)) => a.hausdorff_distance(b),
            _ => Err(Error::invalid("spectra of different geometry")),
        }
    }
}

/// One level's spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrum {
    pub spectrum: SpectrumSet,
    /// The increment into this level is exactly zero, so the level is the
    /// previous operator written over a longer period and its spectrum is
    /// taken over verbatim.
    pub reused_from_previous: bool,
    /// For a reused level: Hausdorff distance between the reused set and an
    /// independent recomputation (eigen-solver noise, not spectral change).
    pub recomputation_distance: Option<f64>,
}

fn compute_spectrum(op: &PeriodicOperator, e_max: f64) -> Result<SpectrumSet> {
    Ok(match op {
        PeriodicOperator::Continuum(v) => SpectrumSet::Line(v.band_structure_window(e_max)?.bands),
        PeriodicOperator::Jacobi(j) => SpectrumSet::Line(j.band_structure()?.bands),
        PeriodicOperator::Cmv(c) => SpectrumSet::Circle(c.arc_band_structure()?.arcs),
    })
}

/// Spectra of every level; `e_max` is the window top for continuum levels
/// and ignored otherwise.
pub fn level_spectra(seq: &PtSequence, e_max: f64) -> Result<Vec<LevelSpectrum>> {
    let computed: Vec<SpectrumSet> = seq
        .levels
        .par_iter()
        .map(|op| compute_spectrum(op, e_max))
        .collect::<Result<_>>()?;
    let mut out: Vec<LevelSpectrum> = Vec::with_capacity(computed.len());
    for (i, set) in computed.into_iter().enumerate() {
        if i > 0 && seq.increments[i - 1] == 0.0 {
            let prev = out[i - 1].spectrum.clone();
            let noise = prev.hausdorff_distance(&set)?;
            out.push(LevelSpectrum {
                spectrum: prev,
                reused_from_previous: true,
                recomputation_distance: Some(noise),
            });
        } else {
            out.push(LevelSpectrum {
                spectrum: set,
                reused_from_previous: false,
                recomputation_distance: None,
            });
        }
    }
    Ok(out)
}

/// Convex hull of the bands of the deepest level descended from the first
/// band of level 1: the parts of `Σ_N` within `r` of that band.
pub fn first_band_cluster(first: &IntervalSet, deepest: &IntervalSet, r: f64) -> Result<Interval> {
    let b = *first.parts().first().ok_or(Error::EmptySet)?;
    deepest
        .intersect_interval(Interval {
            lo: b.lo - r,
            hi: b.hi + r,
        })
        .hull()
        .ok_or_else(|| Error::numerical("no part of the deepest spectrum lies near the first band"))
}

/// `sup_{a ∈ A} dist(a, B)`; attained at an endpoint of `A` or at the
/// midpoint of a gap of `B` inside `A`.
fn one_sided_excess(a: &IntervalSet, b: &IntervalSet) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let mut cands = a.endpoints();
    cands.extend(b.gaps().iter().map(Interval::midpoint).filter(|&m| a.contains(m, 0.0)));
    cands.into_iter().map(|x| b.distance_to(x)).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    pub schema_version: u32,
    pub interval: Interval,
    /// `m_j = |I ∩ Σ_j|`.
    pub measures: Vec<f64>,
    /// `m_N`, the proxy for `|I ∩ Σ|`.
    pub deepest: f64,
    pub max_measure: f64,
    pub tolerance: f64,
    /// `max_j m_j − m_N` (negative when the deepest level is largest).
    pub deficit: f64,
    pub pass: bool,
    /// `sup_{y ∈ Σ_j ∩ I} dist(y, Σ_N)` per level.
    pub inclusion_excess: Vec<f64>,
    /// Smallest `ε` with `Σ_j ∩ I ⊆ B_ε(Σ_N)` for every `j`.
    pub fitted_epsilon: f64,
    /// Per-level Hausdorff budget where one is available (Jacobi: sum of
    /// the operator-norm bounds of the remaining increments).
    pub inclusion_budget: Option<Vec<f64>>,
    pub inclusion_pass: Option<bool>,
}

/// Lower semicontinuity check on explicit sets: `m_N ≥ max_j m_j − tolerance`.
pub fn semicontinuity(
    sets: &[IntervalSet],
    interval: Interval,
    tolerance: f64,
    budget: Option<Vec<f64>>,
) -> Result<SemicontinuityReport> {
    let deepest_set = sets.last().ok_or(Error::EmptySet)?;
    let measures: Vec<f64> = sets.iter().map(|s| s.intersect_interval(interval).measure()).collect();
    let deepest = *measures.last().unwrap();
    let max_measure = measures.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let excess: Vec<f64> = sets
        .iter()
        .map(|s| one_sided_excess(&s.intersect_interval(interval), deepest_set))
        .collect();
    let inclusion_pass = budget
        .as_ref()
        .map(|b| excess.iter().zip(b).all(|(e, b)| *e <= b + 1e-12));
    Ok(SemicontinuityReport {
        schema_version: SCHEMA_VERSION,
        interval,
        deepest,
        max_measure,
        tolerance,
        deficit: max_measure - deepest,
        pass: deepest >= max_measure - tolerance,
        fitted_epsilon: excess.iter().copied().fold(0.0, f64::max),
        measures,
        inclusion_excess: excess,
        inclusion_budget: budget,
        inclusion_pass,
    })
}

/// Semicontinuity along a sequence. `interval` defaults to the convex hull
/// of the first band cluster; the tolerance is `10·Σ increments`.
pub fn verify_semicontinuity(seq: &PtSequence, interval: Option<Interval>, e_max: f64) -> Result<SemicontinuityReport> {
    let spectra = level_spectra(seq, e_max)?;
    let sets: Vec<IntervalSet> = spectra.iter().map(|l| l.spectrum.parts().clone()).collect();
    let op_bounds: Option<Vec<f64>> = seq
        .levels
        .windows(2)
        .map(|w| match (&w[0], &w[1]) {
            (PeriodicOperator::Jacobi(a), PeriodicOperator::Jacobi(b)) => {
                Some(a.sup_distance(b).map(|d| d.operator_norm_bound))
            }
            _ => None,
        })
        .collect::<Option<Result<Vec<_>>>>()
        .transpose()?;
    let interval = match interval {
        Some(i) => i,
        None => {
            let r = op_bounds.as_ref().map_or(0.0, |b| b.iter().sum()) + 1e-12;
            first_band_cluster(&sets[0], sets.last().unwrap(), r)?
        }
    };
    if seq.kind == crate::pt::PtKind::Continuum && interval.hi > e_max {
        return Err(Error::invalid(format!(
            "interval [{}, {}] is not inside the window E <= {e_max}",
            interval.lo, interval.hi
        )));
    }
    let budget = op_bounds.map(|b| (0..sets.len()).map(|j| b[j..].iter().sum()).collect());
    let tolerance = 10.0 * seq.increments.iter().sum::<f64>();
    semicontinuity(&sets, interval, tolerance, budget)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSumLevel {
    pub level: usize,
    pub period: f64,
    pub gap_count: usize,
    /// Running sums `Σ_{j ≤ k} (b_j − a_j)` over the gaps in increasing order.
    pub partial_sums: Vec<f64>,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSumReport {
    pub schema_version: u32,
    pub window_top: Option<f64>,
    pub levels: Vec<GapSumLevel>,
    /// `total_{n+1} ≥ total_n − 2·(gaps of level n)·inc_n` for every `n`.
    pub nondecreasing_within_tolerance: bool,
    pub note: String,
}

/// Gap-length partial sums per level, in the window `E ≤ e_max` for
/// continuum levels and over the whole spectrum otherwise.
pub fn gap_length_partial_sums(seq: &PtSequence, e_max: f64) -> Result<GapSumReport> {
    let spectra = level_spectra(seq, e_max)?;
    let levels: Vec<GapSumLevel> = spectra
        .iter()
        .enumerate()
        .map(|(n, l)| {
            let lengths: Vec<f64> = match &l.spectrum {
                SpectrumSet::Line(s) => s.gaps().iter().map(Interval::length).collect(),
                SpectrumSet::Circle(a) => a.gaps().iter().map(|(s, e)| e - s).collect(),
            };
            let partial_sums: Vec<f64> = lengths
                .iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect();
            GapSumLevel {
                level: n + 1,
                period: seq.periods[n],
                gap_count: lengths.len(),
                total: partial_sums.last().copied().unwrap_or(0.0),
                partial_sums,
            }
        })
        .collect();
    let ok = levels
        .windows(2)
        .zip(&seq.increments)
        .all(|(w, inc)| w[1].total >= w[0].total - 2.0 * w[0].gap_count as f64 * inc);
    Ok(GapSumReport {
        schema_version: SCHEMA_VERSION,
        window_top: e_max.is_finite().then_some(e_max),
        levels,
        nondecreasing_within_tolerance: ok,
        note: "illustrative only: growth of finite partial sums is not a proof that the gap lengths diverge".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt::{generate_pt_sequence, PtKind, Schedule};
    use crate::PiecewisePotential;
    use std::f64::consts::PI;

    #[test]
    fn synthetic_sets_pass_with_equality_in_the_limit() {
        let sets: Vec<IntervalSet> = (1..=50)
            .map(|j| IntervalSet::single(0.0, 1.0 + 1.0 / j as f64).unwrap())
            .collect();
        let r = semicontinuity(&sets, Interval { lo: 0.0, hi: 2.0 }, 0.0, None).unwrap();
        // m_j decreases towards 1, so limsup = 1 while max_j m_j = 2
        assert!((r.deepest - 1.02).abs() < 1e-12);
        assert!(!r.pass);
        let tail = &sets[40..];
        let r = semicontinuity(
            tail,
            Interval { lo: 0.0, hi: 2.0 },
            1.0 / 41.0 - 1.0 / 50.0 + 1e-12,
            None,
        )
        .unwrap();
        assert!(r.pass);
    }

    #[test]
    fn constant_sequence_passes_trivially() {
        let sets = vec![IntervalSet::from_pairs(&[(0.0, 1.0), (2.0, 3.0)]).unwrap(); 4];
        let r = semicontinuity(&sets, Interval { lo: -1.0, hi: 4.0 }, 0.0, Some(vec![0.0; 4])).unwrap();
        assert!(r.pass && r.inclusion_pass == Some(true));
        assert_eq!(r.deficit, 0.0);
    }

    #[test]
    fn one_sided_excess_finds_gap_midpoints() {
        let a = IntervalSet::single(0.0, 3.0).unwrap();
        let b = IntervalSet::from_pairs(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(one_sided_excess(&a, &b), 0.5);
        assert_eq!(one_sided_excess(&b, &a), 0.0);
    }

    #[test]
    fn free_continuum_has_no_gap_length() {
        let v = PiecewisePotential::free(PI).unwrap();
        let seq = PtSequence::from_levels(
            PtKind::Continuum,
            0,
            Schedule::default(),
            vec![PI, 2.0 * PI],
            vec![
                PeriodicOperator::Continuum(v.clone()),
                PeriodicOperator::Continuum(v.extend(2).unwrap()),
            ],
            0,
        )
        .unwrap();
        let r = gap_length_partial_sums(&seq, 60.0).unwrap();
        assert!(r.levels.iter().all(|l| l.total < 1e-8), "{:?}", r.levels);
        assert!(r.nondecreasing_within_tolerance);
    }

    #[test]
    fn zero_increment_levels_reuse_spectra() {
        let seq = generate_pt_sequence(PtKind::Jacobi, 7, 4, &Schedule::default()).unwrap();
        let spectra = level_spectra(&seq, 0.0).unwrap();
        for (i, l) in spectra.iter().enumerate().skip(1) {
            assert_eq!(l.reused_from_previous, seq.increments[i - 1] == 0.0);
            if let Some(d) = l.recomputation_distance {
                assert!(d < 1e-9, "{d}");
            }
        }
    }
}
