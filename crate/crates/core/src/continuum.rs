//! Periodic Schrödinger operators `H = -d²/dx² + V` on the line with a
//! piecewise-constant `T`-periodic potential.
//!
//! Monodromy convention: columns are the Neumann and Dirichlet solutions,
//!
//! ```text
//! M(E) = [[y_N(T), y_D(T)], [y_N'(T), y_D'(T)]],  y_N(0) = y_D'(0) = 1, y_N'(0) = y_D(0) = 0,
//! ```
//!
//! so `M` transports the column `(y, y')` across one period. On a piece of
//! length `h` carrying the value `v`, with `w = E - v`, the propagator is
//!
//! ```text
//! P = [[c, s], [-w·s, c]],  c = cos(√w h),  s = sin(√w h)/√w,
//! ```
//!
//! which continues analytically to `cosh`/`sinh` for `w < 0` and equals
//! `[[1, h], [0, 1]]` at `w = 0`. `c` and `s` are entire in `w`; near `w = 0`
//! they are evaluated from their Taylor series.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandEdge, BandStructure, EdgeLabel};
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::roots::{bisect, bracketed_root};

/// Use the Taylor series for the propagator entries when `|w|h² <` this.
const SERIES_THRESHOLD: f64 = 1.0;
const SERIES_TERMS: usize = 18;
/// Grid points per half-oscillation of the free discriminant.
const INITIAL_SAMPLES: usize = 32;
const MAX_SAMPLES: usize = 2048;
/// Relative tolerance for matching breakpoints and periods.
const GEOMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential")]
pub struct PiecewisePotential {
    #[serde(rename = "T")]
    t: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPotential {
    #[serde(rename = "T")]
    t: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPotential> for PiecewisePotential {
    type Error = Error;

    fn try_from(r: RawPotential) -> Result<Self> {
        PiecewisePotential::new(r.t, r.breakpoints, r.values)
    }
}

/// Propagator entries `(c, s, dc/dw, ds/dw)` on a piece of length `h`.
fn piece_functions(w: f64, h: f64) -> [f64; 4] {
    let u = -w * h * h;
    if u.abs() < SERIES_THRESHOLD {
        // c = Σ u^k/(2k)!, s = h Σ u^k/(2k+1)!, ds/dw = -h³ Σ_{k≥1} k u^{k-1}/(2k+1)!
        let (mut c, mut s, mut d) = (0.0, 0.0, 0.0);
        let (mut tc, mut ts) = (1.0, 1.0);
        for k in 0..SERIES_TERMS {
            let k2 = 2.0 * k as f64;
            c += tc;
            s += ts;
            d += ts / (2.0 * (k2 + 3.0));
            tc *= u / ((k2 + 1.0) * (k2 + 2.0));
            ts *= u / ((k2 + 2.0) * (k2 + 3.0));
        }
        let s = s * h;
        return [c, s, -0.5 * h * s, -h * h * h * d];
    }
    let (c, s) = if w > 0.0 {
        let om = w.sqrt();
        ((om * h).cos(), (om * h).sin() / om)
    } else {
        let ka = (-w).sqrt();
        ((ka * h).cosh(), (ka * h).sinh() / ka)
    };
    [c, s, -0.5 * h * s, (h * c - s) / (2.0 * w)]
}

/// Complex propagator entries `(c, s)`.
fn piece_functions_complex(w: Complex64, h: f64) -> (Complex64, Complex64) {
    let u = -w * h * h;
    if u.norm() < SERIES_THRESHOLD {
        let (mut c, mut s) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let (mut tc, mut ts) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for k in 0..SERIES_TERMS {
            let k2 = 2.0 * k as f64;
            c += tc;
            s += ts;
            tc *= u / ((k2 + 1.0) * (k2 + 2.0));
            ts *= u / ((k2 + 2.0) * (k2 + 3.0));
        }
        return (c, s * h);
    }
    let om = w.sqrt();
    ((om * h).cos(), (om * h).sin() / om)
}

/// Discriminant, its derivative, and the Frobenius norm of the monodromy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminantSample {
    pub value: f64,
    pub derivative: f64,
    pub monodromy_norm: f64,
}

/// Outcome of one grid pass of the band search.
struct SearchPass {
    bands: BandStructure,
    grid_points: usize,
}

impl PiecewisePotential {
    /// `T`-periodic potential equal to `values[i]` on
    /// `[breakpoints[i], breakpoints[i+1])`. The first breakpoint must be 0
    /// and the last must equal `T`.
    pub fn new(t: f64, mut breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("period must be positive and finite, got {t}")));
        }
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::invalid(format!(
                "need one more breakpoint than values ({} breakpoints, {} values)",
                breakpoints.len(),
                values.len()
            )));
        }
        if values.iter().chain(&breakpoints).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite breakpoint or value"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        let last = breakpoints.len() - 1;
        if (breakpoints[last] - t).abs() > GEOMETRY_TOL * t {
            return Err(Error::invalid(format!(
                "last breakpoint {} must equal T = {t}",
                breakpoints[last]
            )));
        }
        breakpoints[last] = t;
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        Ok(Self { t, breakpoints, values })
    }

    pub fn constant(t: f64, c: f64) -> Result<Self> {
        Self::new(t, vec![0.0, t], vec![c])
    }

    pub fn free(t: f64) -> Result<Self> {
        Self::constant(t, 0.0)
    }

    /// `values.len()` equal cells of width `T/m`, breakpoints `i·(T/m)`.
    pub fn uniform(t: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::invalid("uniform potential needs at least one value"));
        }
        let w = t / m as f64;
        let mut bp: Vec<f64> = (0..m).map(|i| i as f64 * w).collect();
        bp.push(t);
        Self::new(t, bp, values)
    }

    /// `0` on `[0, T/2)` and `v0` on `[T/2, T)`.
    pub fn square_well(t: f64, v0: f64) -> Result<Self> {
        Self::uniform(t, vec![0.0, v0])
    }

    pub fn period(&self) -> f64 {
        self.t
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |V|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[1] - w[0], v))
    }

    /// Cell width if the breakpoints are exactly `i·(T/m)`.
    fn uniform_width(&self) -> Option<f64> {
        let m = self.values.len();
        let w = self.t / m as f64;
        self.breakpoints[..m]
            .iter()
            .enumerate()
            .all(|(i, &b)| b == i as f64 * w)
            .then_some(w)
    }

    /// `V(x)` for any real `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let y = x.rem_euclid(self.t);
        let k = self.breakpoints.partition_point(|&b| b <= y);
        self.values[k.clamp(1, self.values.len()) - 1]
    }

    /// `V + c`.
    pub fn shift(&self, c: f64) -> Self {
        Self {
            t: self.t,
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// The same function viewed as `qT`-periodic. Uniform cell layouts stay
    /// uniform, so extension commutes exactly with [`Self::uniform`].
    pub fn extend(&self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("extension factor must be positive"));
        }
        let t = self.t * q as f64;
        let values: Vec<f64> = self
            .values
            .iter()
            .copied()
            .cycle()
            .take(q * self.values.len())
            .collect();
        if self.uniform_width().is_some() {
            return Self::uniform(t, values);
        }
        let mut bp = Vec::with_capacity(values.len() + 1);
        for k in 0..q {
            let off = k as f64 * self.t;
            bp.extend(self.breakpoints[..self.values.len()].iter().map(|b| b + off));
        }
        bp.push(t);
        Self::new(t, bp, values)
    }

    /// `V_π(x) = (T/π)² V(Tx/π)`, the rescaled `π`-periodic potential; its
    /// discriminant satisfies `Δ_π((T/π)² E) = Δ(E)`.
    pub fn rescale_to_pi(&self) -> Self {
        let r = self.t / PI;
        let mut bp: Vec<f64> = self.breakpoints.iter().map(|b| b / r).collect();
        let last = bp.len() - 1;
        bp[last] = PI;
        Self {
            t: PI,
            breakpoints: bp,
            values: self.values.iter().map(|v| r * r * v).collect(),
        }
    }

    /// Smallest common period, if one period is an integer multiple of the other.
    pub fn common_period(&self, other: &Self) -> Result<f64> {
        let (small, big) = if self.t <= other.t {
            (self.t, other.t)
        } else {
            (other.t, self.t)
        };
        let ratio = big / small;
        if (ratio - ratio.round()).abs() > GEOMETRY_TOL * ratio {
            return Err(Error::IncommensurablePeriods(self.t, other.t));
        }
        Ok(big)
    }

    /// `self - other` on the common period, on the merged partition.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        let t = self.common_period(other)?;
        let a = self.extend((t / self.t).round() as usize)?;
        let b = other.extend((t / other.t).round() as usize)?;
        let mut bp: Vec<f64> = a.breakpoints.iter().chain(&b.breakpoints).copied().collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup_by(|x, y| (*x - *y).abs() <= GEOMETRY_TOL * t);
        let last = bp.len() - 1;
        bp[last] = t;
        let values = bp
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                a.value_at(m) - b.value_at(m)
            })
            .collect();
        Self::new(t, bp, values)
    }

    // ---------------------------------------------------------------- norms

    /// `∫₀^x |V|²` for `x ∈ ℝ`, extended periodically.
    fn energy_integral(&self, x: f64) -> f64 {
        let total: f64 = self.pieces().map(|(h, v)| h * v * v).sum();
        let k = (x / self.t).floor();
        let y = x - k * self.t;
        let mut acc = 0.0;
        for (w, &v) in self.breakpoints.windows(2).zip(&self.values) {
            if y <= w[0] {
                break;
            }
            acc += (y.min(w[1]) - w[0]) * v * v;
        }
        k * total + acc
    }

    /// `(T⁻¹ ∫₀^T |V|²)^{1/2}`.
    pub fn besicovitch_norm(&self) -> f64 {
        (self.pieces().map(|(h, v)| h * v * v).sum::<f64>() / self.t).sqrt()
    }

    /// `sup_x (∫_x^{x+1} |V|²)^{1/2}`. The windowed integral is piecewise
    /// linear in `x` with breakpoints where `x` or `x + 1` hits a breakpoint
    /// of `V`, so the supremum is a maximum over those candidates.
    pub fn stepanov_norm(&self) -> f64 {
        let n = self.values.len();
        self.breakpoints[..n]
            .iter()
            .flat_map(|&b| [b, (b - 1.0).rem_euclid(self.t)])
            .map(|x| self.energy_integral(x + 1.0) - self.energy_integral(x))
            .fold(0.0, f64::max)
            .max(0.0)
            .sqrt()
    }

    // ------------------------------------------------------------ monodromy

    /// Monodromy matrix at real energy `E`.
    pub fn monodromy(&self, e: f64) -> Mat2<f64> {
        self.pieces().fold(Mat2::identity(), |m, (h, v)| {
            let w = e - v;
            let [c, s, _, _] = piece_functions(w, h);
            Mat2::new(c, s, -w * s, c) * m
        })
    }

    /// Monodromy matrix at complex energy `z`.
    pub fn monodromy_complex(&self, z: Complex64) -> Mat2<Complex64> {
        self.pieces().fold(Mat2::identity(), |m, (h, v)| {
            let w = z - v;
            let (c, s) = piece_functions_complex(w, h);
            Mat2::new(c, s, -w * s, c) * m
        })
    }

    pub fn discriminant(&self, e: f64) -> f64 {
        self.monodromy(e).trace()
    }

    /// `Δ(E)`, `Δ'(E)` and `‖M(E)‖` in one sweep; the derivative comes from
    /// the product rule with closed-form `dP/dE` on each piece.
    pub fn sample(&self, e: f64) -> DiscriminantSample {
        let mut m = Mat2::<f64>::identity();
        let mut dm = Mat2::<f64>::zero();
        for (h, v) in self.pieces() {
            let w = e - v;
            let [c, s, dc, ds] = piece_functions(w, h);
            let p = Mat2::new(c, s, -w * s, c);
            let dp = Mat2::new(dc, ds, -s - w * ds, dc);
            dm = dp * m + p * dm;
            m = p * m;
        }
        DiscriminantSample {
            value: m.trace(),
            derivative: dm.trace(),
            monodromy_norm: m.norm(),
        }
    }

    pub fn discriminant_derivative(&self, e: f64) -> f64 {
        self.sample(e).derivative
    }

    // ------------------------------------------------------------ band search

    /// All bands meeting `(-∞, E_max]`.
    ///
    /// Critical points of `Δ` are bracketed on a grid uniform in
    /// `s = (E - E_lo)^{1/2}`, `E_lo = min V - 1`, with `m` points per
    /// half-oscillation `π/T` of the free discriminant. Between critical
    /// points `Δ` is monotone, so each level `±2` has at most one root there.
    /// A critical point with `|Δ| = 2` up to rounding is a closed gap. The
    /// search is repeated on a grid twice as fine until two passes agree.
    pub fn band_structure_window(&self, e_max: f64) -> Result<BandStructure> {
        if !e_max.is_finite() {
            return Err(Error::invalid(format!("window top must be finite, got {e_max}")));
        }
        let mut m = INITIAL_SAMPLES;
        let mut prev: Option<SearchPass> = None;
        let mut last_err = None;
        while m <= MAX_SAMPLES {
            match self.band_search(e_max, m) {
                Ok(pass) => {
                    if let Some(p) = &prev {
                        if p.bands.edges.len() == pass.bands.edges.len()
                            && p.bands.closed_gap_points.len() == pass.bands.closed_gap_points.len()
                        {
                            if pass.bands.edges.is_empty() {
                                return Err(Error::invalid(format!("window top {e_max} lies below the spectrum")));
                            }
                            return Ok(pass.bands);
                        }
                    }
                    prev = Some(pass);
                }
                Err(e) => {
                    prev = None;
                    last_err = Some(e);
                }
            }
            m *= 2;
        }
        Err(last_err.unwrap_or_else(|| {
            Error::numerical(format!(
                "band search did not stabilise below E_max = {e_max} (last grid {} points, {} edges)",
                prev.as_ref().map_or(0, |p| p.grid_points),
                prev.as_ref().map_or(0, |p| p.bands.edges.len())
            ))
        }))
    }

    fn band_search(&self, e_max: f64, m: usize) -> Result<SearchPass> {
        let e_lo = self.min_value() - 1.0;
        let start = self.discriminant(e_lo);
        if !(start > 2.0) {
            return Err(Error::numerical(format!(
                "Δ({e_lo}) = {start} is not above 2 below the potential"
            )));
        }
        if e_max <= e_lo {
            return Ok(SearchPass {
                bands: BandStructure::from_sorted_edges(Vec::new(), 0.0, Some(e_max)),
                grid_points: 0,
            });
        }
        let s_max = (e_max - e_lo).sqrt();
        let ds = PI / (self.t * m as f64);
        let n = (s_max / ds).ceil().max(1.0) as usize;
        let energies: Vec<f64> = (0..=n)
            .map(|k| if k == n { e_max } else { e_lo + (k as f64 * ds).powi(2) })
            .collect();
        let derivs: Vec<f64> = energies.par_iter().map(|&e| self.discriminant_derivative(e)).collect();

        // critical points of Δ, in increasing order
        let mut crit = Vec::new();
        for k in 0..n {
            let (d0, d1) = (derivs[k], derivs[k + 1]);
            if d0 == 0.0 && k > 0 {
                crit.push(energies[k]);
            } else if d0 * d1 < 0.0 {
                crit.push(bisect(
                    |e| self.discriminant_derivative(e),
                    energies[k],
                    energies[k + 1],
                )?);
            }
        }

        // classify: alternate minima (Δ ≤ -2) and maxima (Δ ≥ 2)
        let mut closed: Vec<Option<f64>> = Vec::with_capacity(crit.len());
        for (i, &c) in crit.iter().enumerate() {
            let smp = self.sample(c);
            let want = if i % 2 == 0 { -1.0 } else { 1.0 };
            let excess = smp.value.abs() - 2.0;
            let noise = 1e-12 * smp.monodromy_norm.max(1.0);
            if smp.value.signum() != want || excess < -1e3 * noise.max(1e-9) {
                return Err(Error::numerical(format!(
                    "critical point {c} has Δ = {} (expected {} 2); grid of {} points with spacing {ds} in √(E - {e_lo}) is too coarse",
                    smp.value,
                    if want > 0.0 { "≥" } else { "≤ -" },
                    n + 1
                )));
            }
            closed.push((excess <= noise).then_some(want * 2.0));
        }

        let mut edges = Vec::new();
        let mut bounds = Vec::with_capacity(crit.len() + 2);
        bounds.push((e_lo, None));
        bounds.extend(crit.iter().copied().zip(closed.iter().copied()));
        bounds.push((e_max, None));
        for (i, &(c, level)) in bounds.iter().enumerate() {
            if let Some(level) = level {
                let label = EdgeLabel::of_sign(level);
                edges.push(BandEdge { energy: c, label });
                edges.push(BandEdge { energy: c, label });
            }
            if i + 1 == bounds.len() {
                break;
            }
            let (lo, lo_closed) = (c, level);
            let (hi, hi_closed) = bounds[i + 1];
            for target in [2.0, -2.0] {
                if lo_closed == Some(target) || hi_closed == Some(target) {
                    continue;
                }
                let f = |e: f64| self.discriminant(e) - target;
                let (flo, fhi) = (f(lo), f(hi));
                if flo * fhi > 0.0 || (flo == 0.0 && i > 0) {
                    continue;
                }
                let root = bracketed_root(&f, |e| self.discriminant_derivative(e), lo, hi, 1e-9, 5)?;
                edges.push(BandEdge {
                    energy: root.x,
                    label: EdgeLabel::of_sign(target),
                });
            }
        }
        edges.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(SearchPass {
            bands: BandStructure::from_sorted_edges(edges, 0.0, Some(e_max)),
            grid_points: n + 1,
        })
    }

    /// Bottom of the spectrum `E_{1,V}`.
    pub fn ground_state_energy(&self) -> Result<f64> {
        Ok(self.periodic_eigenvalues(1)?[0])
    }

    /// The first `n_max` solutions of `Δ(E) = 2`, counted with multiplicity
    /// (a gap closing at `Δ = 2` contributes a double eigenvalue). The
    /// window is enlarged until enough eigenvalues are found.
    pub fn periodic_eigenvalues(&self, n_max: usize) -> Result<Vec<f64>> {
        if n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        let span = self.max_value() - self.min_value() + 1.0;
        let mut reach = span + (PI * (n_max as f64 + 1.0) / self.t).powi(2);
        for _ in 0..24 {
            let e_max = self.min_value() - 1.0 + reach;
            let bs = self.band_structure_window(e_max)?;
            let ev = bs.periodic_eigenvalues();
            if ev.len() >= n_max {
                return Ok(ev[..n_max].to_vec());
            }
            reach *= 2.0;
        }
        Err(Error::numerical(format!(
            "fewer than {n_max} periodic eigenvalues found after enlarging the window"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn free_pi() -> PiecewisePotential {
        PiecewisePotential::free(PI).unwrap()
    }

    #[test]
    fn free_discriminant_closed_form() {
        let v = free_pi();
        assert_abs_diff_eq!(v.discriminant(0.0), 2.0, epsilon = 1e-15);
        for k in 0..200 {
            let e = -10.0 + 110.0 * k as f64 / 199.0;
            let exact = if e >= 0.0 {
                2.0 * (PI * e.sqrt()).cos()
            } else {
                2.0 * (PI * (-e).sqrt()).cosh()
            };
            assert!(
                (v.discriminant(e) - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                "E = {e}"
            );
        }
        // Δ'(E) = -π sin(π√E)/√E, so Δ'(1/4) = -2π
        assert_abs_diff_eq!(v.discriminant_derivative(0.25), -2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn parabolic_piece_has_trace_two() {
        let v = PiecewisePotential::constant(2.0, 3.5).unwrap();
        let m = v.monodromy(3.5);
        assert_eq!(m, Mat2::new(1.0, 2.0, 0.0, 1.0));
        assert_eq!(v.discriminant(3.5), 2.0);
    }

    #[test]
    fn square_well_is_product_of_two_factors() {
        let (t, v0, e): (f64, f64, f64) = (2.0, 3.0, 1.7);
        let v = PiecewisePotential::square_well(t, v0).unwrap();
        let h = t / 2.0;
        let om = e.sqrt();
        let p1 = Mat2::new(
            (om * h).cos(),
            (om * h).sin() / om,
            -om * (om * h).sin(),
            (om * h).cos(),
        );
        let ka = (v0 - e).sqrt();
        let p2 = Mat2::new(
            (ka * h).cosh(),
            (ka * h).sinh() / ka,
            ka * (ka * h).sinh(),
            (ka * h).cosh(),
        );
        let want = p2 * p1;
        let got = v.monodromy(e);
        for (x, y) in got.rows().iter().flatten().zip(want.rows().iter().flatten()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(got.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn derivative_matches_central_differences_across_series_switch() {
        let v = PiecewisePotential::new(3.0, vec![0.0, 0.7, 1.9, 3.0], vec![0.4, -1.2, 2.5]).unwrap();
        let h = 1e-5;
        for &e in &[-3.0, -1.2, -1.2 + 1e-7, 0.0, 0.4, 1.0, 2.5 - 1e-9, 2.5 + 0.3, 7.0, 40.0] {
            let fd = (v.discriminant(e + h) - v.discriminant(e - h)) / (2.0 * h);
            let d = v.discriminant_derivative(e);
            assert!((d - fd).abs() < 1e-6 * d.abs().max(1.0), "E = {e}: {d} vs {fd}");
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for &h in &[0.3, 1.0, 2.0] {
            let w = SERIES_THRESHOLD / (h * h);
            for sign in [1.0, -1.0] {
                let below = piece_functions(sign * w * (1.0 - 1e-9), h);
                let above = piece_functions(sign * w * (1.0 + 1e-9), h);
                for (a, b) in below.iter().zip(&above) {
                    assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "{below:?} vs {above:?}");
                }
            }
        }
    }

    #[test]
    fn complex_monodromy_matches_real_on_axis() {
        let v = PiecewisePotential::square_well(PI, 2.0).unwrap();
        for &e in &[-1.0, 0.5, 2.0, 9.0] {
            let r = v.monodromy(e);
            let c = v.monodromy_complex(Complex64::new(e, 0.0));
            assert_abs_diff_eq!(r.trace(), c.trace().re, epsilon = 1e-12);
            assert_abs_diff_eq!(c.det().re, 1.0, epsilon = 1e-12);
        }
        let z = Complex64::new(1.3, 0.7);
        assert_abs_diff_eq!(v.monodromy_complex(z).det().re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.monodromy_complex(z).det().im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn free_bands_have_closed_gaps() {
        let bs = free_pi().band_structure_window(100.0).unwrap();
        assert_eq!(bs.band_count(), 1);
        assert!(bs.gaps.iter().all(|g| g.length() < 1e-9));
        assert_abs_diff_eq!(bs.bands.parts()[0].lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bs.bands.parts()[0].hi, 100.0);
        assert_eq!(bs.closed_gap_points.len(), 9);
        for (k, c) in bs.closed_gap_points.iter().enumerate() {
            assert_abs_diff_eq!(*c, ((k + 1) * (k + 1)) as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn free_periodic_eigenvalues_on_two_pi() {
        let v = PiecewisePotential::free(2.0 * PI).unwrap();
        let ev = v.periodic_eigenvalues(7).unwrap();
        let want = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        for (a, b) in ev.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn square_well_edges_and_shift() {
        let v = PiecewisePotential::square_well(PI, 5.0).unwrap();
        let bs = v.band_structure_window(60.0).unwrap();
        assert!(bs.gaps[0].length() > 1e-3);
        for e in &bs.edges {
            assert!((v.discriminant(e.energy) - e.label.level()).abs() < 1e-9, "{e:?}");
        }
        let c = 1.75;
        let shifted = v.shift(c).band_structure_window(60.0 + c).unwrap();
        assert_eq!(shifted.edges.len(), bs.edges.len());
        for (a, b) in shifted.edges.iter().zip(&bs.edges) {
            assert_abs_diff_eq!(a.energy, b.energy + c, epsilon = 1e-10);
        }
    }

    #[test]
    fn period_doubling_gives_same_spectrum() {
        let v = PiecewisePotential::new(2.0, vec![0.0, 0.5, 2.0], vec![3.0, -1.0]).unwrap();
        let a = v.band_structure_window(40.0).unwrap();
        let b = v.extend(2).unwrap().band_structure_window(40.0).unwrap();
        assert!(a.bands.hausdorff_distance(&b.bands).unwrap() < 1e-10);
        for e in [0.3, 5.0, 17.0] {
            let d = v.discriminant(e);
            assert_abs_diff_eq!(
                v.extend(2).unwrap().discriminant(e),
                d * d - 2.0,
                epsilon = 1e-9 * d.abs().max(1.0).powi(2)
            );
        }
    }

    #[test]
    fn rescaling_to_period_pi() {
        let v = PiecewisePotential::new(3.0, vec![0.0, 1.0, 3.0], vec![2.0, -0.5]).unwrap();
        let vp = v.rescale_to_pi();
        let r = (3.0 / PI).powi(2);
        for e in [-0.3, 0.7, 4.0, 12.0] {
            assert_abs_diff_eq!(
                vp.discriminant(r * e),
                v.discriminant(e),
                epsilon = 1e-10 * v.discriminant(e).abs().max(1.0)
            );
        }
    }

    #[test]
    fn norms_closed_forms() {
        let ind = PiecewisePotential::new(2.0, vec![0.0, 1.0, 2.0], vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(ind.besicovitch_norm(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ind.stepanov_norm(), 1.0, epsilon = 1e-15);
        let c = PiecewisePotential::constant(0.3, -2.5).unwrap();
        assert_abs_diff_eq!(c.besicovitch_norm(), 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.stepanov_norm(), 2.5, epsilon = 1e-14);
    }

    #[test]
    fn extension_of_uniform_layout_is_exact() {
        let v = PiecewisePotential::uniform(2.0 * PI, vec![0.1, 0.2]).unwrap();
        let e = v.extend(4).unwrap();
        let direct = PiecewisePotential::uniform(8.0 * PI, [0.1, 0.2].repeat(4)).unwrap();
        assert_eq!(e, direct);
        assert_eq!(v.difference(&e).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PiecewisePotential::new(1.0, vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(PiecewisePotential::new(1.0, vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(PiecewisePotential::new(1.0, vec![0.1, 1.0], vec![1.0]).is_err());
        let a = PiecewisePotential::free(1.0).unwrap();
        let b = PiecewisePotential::free(PI).unwrap();
        assert!(a.difference(&b).is_err());
        let json = r#"{"T":2.0,"breakpoints":[0,1,2],"values":[1,0]}"#;
        let p: PiecewisePotential = serde_json::from_str(json).unwrap();
        assert_eq!(p.period(), 2.0);
        assert!(serde_json::to_string(&p).unwrap().contains(r#""T":2.0"#));
    }
}
