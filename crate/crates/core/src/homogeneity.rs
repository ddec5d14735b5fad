//! Lattice certification of Carleson homogeneity.
//!
//! A set `S` is τ-homogeneous with scale `δ0` when `|B_δ(x) ∩ S| ≥ τδ` for
//! every `x ∈ S` and `0 < δ ≤ δ0`. At fixed `x` the window measure is
//! piecewise linear in `δ` with breakpoints at the distances from `x` to the
//! endpoints of `S`, so the certifier samples those distances together with
//! a geometric ladder `δ0·2^-k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcs::{wrap_signed, CircularArcSet};
use crate::error::{Error, Result};
use crate::intervals::{IntervalSet, MEMBERSHIP_TOL};

/// Shape of the `(x, δ)` sample lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatticeSpec {
    /// Uniform interior x-samples per component, on top of the endpoints.
    pub mesh_per_band: usize,
    /// Depth `K` of the ladder `δ0·2^-k`, `k = 0..=K`.
    pub ladder_depth: u32,
    /// Add the endpoint distances `|x - e| ∈ (0, δ0]` to the δ-samples.
    pub endpoint_distances: bool,
    pub membership_tol: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            mesh_per_band: 8,
            ladder_depth: 40,
            endpoint_distances: true,
            membership_tol: MEMBERSHIP_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub x_samples: usize,
    pub evaluations: usize,
    pub mesh_per_band: usize,
    pub ladder_depth: u32,
    pub endpoint_distances: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub tau: f64,
    pub delta0: f64,
    pub min_density: f64,
    pub witness_x: f64,
    pub witness_delta: f64,
    pub pass: bool,
    pub grid: LatticeSummary,
}

/// One lattice evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub delta: f64,
    pub density: f64,
}

fn validate(tau: f64, delta0: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(Error::invalid(format!("delta0 must be positive, got {delta0}")));
    }
    Ok(())
}

fn ladder(delta0: f64, depth: u32) -> Vec<f64> {
    (0..=depth).map(|k| delta0 * 0.5f64.powi(k as i32)).collect()
}

pub(crate) fn mesh_samples(set: &IntervalSet, per_band: usize) -> Vec<f64> {
    let mut xs = set.endpoints();
    for p in set.parts() {
        let len = p.length();
        if len > 0.0 {
            for i in 1..=per_band {
                xs.push(p.lo + len * i as f64 / (per_band + 1) as f64);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Evaluate `density` over the lattice. `offsets(x)` returns the signed
/// offsets from `x` of the set's endpoints.
fn evaluate<D, O>(xs: &[f64], delta0: f64, spec: &LatticeSpec, density: D, offsets: O) -> Vec<ProfileRow>
where
    D: Fn(f64, f64) -> f64 + Sync,
    O: Fn(f64) -> Vec<f64> + Sync,
{
    let base = ladder(delta0, spec.ladder_depth);
    xs.par_iter()
        .flat_map_iter(|&x| {
            let mut deltas = base.clone();
            if spec.endpoint_distances {
                deltas.extend(offsets(x).into_iter().map(f64::abs).filter(|&d| d > 0.0 && d <= delta0));
            }
            deltas.sort_by(|a, b| b.total_cmp(a));
            deltas.dedup();
            deltas
                .into_iter()
                .map(|delta| ProfileRow {
                    x,
                    delta,
                    density: density(x, delta),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn reduce(rows: &[ProfileRow], tau: f64, delta0: f64, summary: LatticeSummary) -> Result<HomogeneityReport> {
    // smallest density, ties broken by smallest (x, delta)
    let worst = rows
        .iter()
        .min_by(|a, b| {
            a.density
                .total_cmp(&b.density)
                .then(a.x.total_cmp(&b.x))
                .then(a.delta.total_cmp(&b.delta))
        })
        .ok_or_else(|| Error::invalid("degenerate homogeneity lattice: no samples"))?;
    Ok(HomogeneityReport {
        tau,
        delta0,
        min_density: worst.density,
        witness_x: worst.x,
        witness_delta: worst.delta,
        pass: worst.density >= tau,
        grid: summary,
    })
}

/// Density of `set` over the certification lattice.
pub fn homogeneity_profile(set: &IntervalSet, delta0: f64, spec: &LatticeSpec) -> Result<Vec<ProfileRow>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(Error::invalid(format!("delta0 must be positive, got {delta0}")));
    }
    let xs = mesh_samples(set, spec.mesh_per_band);
    let endpoints = set.endpoints();
    Ok(evaluate(
        &xs,
        delta0,
        spec,
        |x, d| (set.window_measure(x, d) / d).min(2.0),
        |x| {
            let lo = endpoints.partition_point(|&e| e - x < -delta0);
            endpoints[lo..]
                .iter()
                .take_while(|&&e| e - x <= delta0)
                .map(|&e| e - x)
                .collect()
        },
    ))
}

/// Certify τ-homogeneity of `set` on `(0, δ0]`.
pub fn certify_homogeneity(set: &IntervalSet, tau: f64, delta0: f64, spec: &LatticeSpec) -> Result<HomogeneityReport> {
    validate(tau, delta0)?;
    let rows = homogeneity_profile(set, delta0, spec)?;
    let summary = LatticeSummary {
        x_samples: mesh_samples(set, spec.mesh_per_band).len(),
        evaluations: rows.len(),
        mesh_per_band: spec.mesh_per_band,
        ladder_depth: spec.ladder_depth,
        endpoint_distances: spec.endpoint_distances,
    };
    reduce(&rows, tau, delta0, summary)
}

pub(crate) fn arc_samples(set: &CircularArcSet, per_band: usize) -> Vec<f64> {
    let mut xs = set.endpoints();
    let arcs = set.arcs();
    for (s, e) in arcs {
        let len = e - s;
        if len > 0.0 {
            for i in 1..=per_band {
                xs.push(crate::arcs::wrap_angle(s + len * i as f64 / (per_band + 1) as f64));
            }
        }
    }
    // the full circle has no endpoints
    if set.is_full() {
        xs.push(0.0);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

pub fn arc_homogeneity_profile(set: &CircularArcSet, delta0: f64, spec: &LatticeSpec) -> Result<Vec<ProfileRow>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(Error::invalid(format!("delta0 must be positive, got {delta0}")));
    }
    let xs = arc_samples(set, spec.mesh_per_band);
    let endpoints = set.endpoints();
    Ok(evaluate(
        &xs,
        delta0,
        spec,
        |x, d| (set.window_measure(x, d) / d).min(2.0),
        |x| endpoints.iter().map(|&e| wrap_signed(e - x)).collect(),
    ))
}

/// Certify τ-homogeneity of an arc set in the arc-length metric.
pub fn certify_arc_homogeneity(
    set: &CircularArcSet,
    tau: f64,
    delta0: f64,
    spec: &LatticeSpec,
) -> Result<HomogeneityReport> {
    validate(tau, delta0)?;
    let rows = arc_homogeneity_profile(set, delta0, spec)?;
    let summary = LatticeSummary {
        x_samples: arc_samples(set, spec.mesh_per_band).len(),
        evaluations: rows.len(),
        mesh_per_band: spec.mesh_per_band,
        ladder_depth: spec.ladder_depth,
        endpoint_distances: spec.endpoint_distances,
    };
    reduce(&rows, tau, delta0, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn set(pairs: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn single_interval_passes_with_unit_density() {
        let r = certify_homogeneity(&set(&[(0.0, 1.0)]), 0.9, 0.5, &LatticeSpec::default()).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.min_density, 1.0, epsilon = 1e-15);
        assert_eq!(r.witness_x, 0.0);
    }

    #[test]
    fn two_far_bands_pass() {
        let r = certify_homogeneity(&set(&[(0.0, 1.0), (2.0, 3.0)]), 0.9, 0.5, &LatticeSpec::default()).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.min_density, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn near_bands_match_exhaustive_oracle() {
        let a = set(&[(0.0, 1.0), (1.1, 2.1)]);
        let spec = LatticeSpec::default();
        let rows = homogeneity_profile(&a, 0.5, &spec).unwrap();
        // independent overlap arithmetic for every lattice point
        let oracle = |x: f64, d: f64| {
            let ov = |lo: f64, hi: f64| ((x + d).min(hi) - (x - d).max(lo)).max(0.0);
            (ov(0.0, 1.0) + ov(1.1, 2.1)) / d
        };
        let mut min_oracle = f64::INFINITY;
        for r in &rows {
            assert_abs_diff_eq!(r.density, oracle(r.x, r.delta), epsilon = 1e-12);
            min_oracle = min_oracle.min(oracle(r.x, r.delta));
        }
        let at_edge = rows.iter().find(|r| r.x == 1.0 && r.delta == 0.5).unwrap();
        assert_abs_diff_eq!(at_edge.density, 1.8, epsilon = 1e-12);
        let rep = certify_homogeneity(&a, 0.9, 0.5, &spec).unwrap();
        assert_abs_diff_eq!(rep.min_density, min_oracle, epsilon = 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn failing_set_reports_witness() {
        // a lone point has density 0
        let a = set(&[(0.0, 1.0), (1.5, 1.5)]);
        let r = certify_homogeneity(&a, 0.5, 0.4, &LatticeSpec::default()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness_x, 1.5);
        assert_eq!(r.min_density, 0.0);
    }

    #[test]
    fn argument_validation() {
        let a = set(&[(0.0, 1.0)]);
        let spec = LatticeSpec::default();
        assert!(certify_homogeneity(&a, 1.0, 0.5, &spec).is_err());
        assert!(certify_homogeneity(&a, 0.5, 0.0, &spec).is_err());
        assert!(matches!(
            certify_homogeneity(&IntervalSet::empty(), 0.5, 0.5, &spec),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn arc_certification() {
        let full = CircularArcSet::full_circle();
        let r = certify_arc_homogeneity(&full, 0.99, 0.5, &LatticeSpec::default()).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.min_density, 2.0, epsilon = 1e-14);

        let half = CircularArcSet::from_arcs(&[(0.0, PI)]).unwrap();
        let r = certify_arc_homogeneity(&half, 0.9, 0.1, &LatticeSpec::default()).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.min_density, 1.0, epsilon = 1e-14);
    }
}
