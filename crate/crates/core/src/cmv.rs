//! Periodic CMV operators through Szegő transfer matrices.
//!
//! One step is `A(α, z) = ρ⁻¹ [[z, -ᾱ], [-αz, 1]]` with `ρ = (1 - |α|²)^½`,
//! so `det A = z`. For even period `p` the normalized trace
//! `Δ(θ) = z^{-p/2} tr(A(α_{p-1}, z) ··· A(α_0, z))`, `z = e^{iθ}`, is real on
//! the circle and the spectrum is `{θ : |Δ(θ)| ≤ 2}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arcs::{wrap_angle, CircularArcSet};
use crate::bands::EdgeLabel;
use crate::error::{Error, Result};
use crate::intervals::{Interval, IntervalSet};
use crate::mat2::Mat2;
use crate::roots::bisect;

/// Largest tolerated imaginary part of the normalized trace, relative to its size.
pub const REALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCmv")]
pub struct PeriodicCmv {
    p: usize,
    alpha: Vec<Complex64>,
    #[serde(skip)]
    rho: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCmv {
    p: usize,
    alpha: Vec<Complex64>,
}

impl TryFrom<RawCmv> for PeriodicCmv {
    type Error = Error;

    fn try_from(r: RawCmv) -> Result<Self> {
        if r.alpha.len() != r.p {
            return Err(Error::invalid(format!(
                "expected {} Verblunsky coefficients, got {}",
                r.p,
                r.alpha.len()
            )));
        }
        PeriodicCmv::new(r.alpha)
    }
}

/// Szegő transfer matrix `A(α, z)`.
pub fn szego_transfer(alpha: Complex64, z: Complex64) -> Result<Mat2<Complex64>> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::invalid(format!(
            "Verblunsky coefficient {alpha} is not inside the unit disk"
        )));
    }
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "spectral parameter {z} is not on the unit circle"
        )));
    }
    Ok(step(alpha, (1.0 - alpha.norm_sqr()).sqrt(), z))
}

fn step(alpha: Complex64, rho: f64, z: Complex64) -> Mat2<Complex64> {
    Mat2::new(z, -alpha.conj(), -alpha * z, Complex64::new(1.0, 0.0)).scale(Complex64::new(1.0 / rho, 0.0))
}

/// An edge of a spectral arc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcEdge {
    pub angle: f64,
    pub label: EdgeLabel,
}

/// Spectral arcs of a periodic CMV operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcBandStructure {
    pub arcs: CircularArcSet,
    pub edges: Vec<ArcEdge>,
    pub closed_gap_points: Vec<f64>,
    pub grid_points: usize,
}

impl ArcBandStructure {
    /// Total angular length of the open gaps.
    pub fn gap_length(&self) -> f64 {
        TAU - self.arcs.measure()
    }
}

impl PeriodicCmv {
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        let p = alpha.len();
        if p == 0 || p % 2 != 0 {
            return Err(Error::invalid(format!("CMV period must be even and positive, got {p}")));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::invalid(format!(
                "Verblunsky coefficient {a} is not inside the unit disk"
            )));
        }
        let rho = alpha.iter().map(|a| (1.0 - a.norm_sqr()).sqrt()).collect();
        Ok(Self { p, alpha, rho })
    }

    pub fn free(p: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); p])
    }

    pub fn constant(p: usize, alpha: Complex64) -> Result<Self> {
        Self::new(vec![alpha; p])
    }

    pub fn period(&self) -> usize {
        self.p
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn extend(&self, q: usize) -> Result<Self> {
        if q == 0 || q % self.p != 0 {
            return Err(Error::invalid(format!("period {q} is not a multiple of {}", self.p)));
        }
        Self::new(self.alpha.iter().copied().cycle().take(q).collect())
    }

    /// Multiply every coefficient by `e^{iφ}`.
    pub fn rotate_coefficients(&self, phi: f64) -> Self {
        let w = Complex64::from_polar(1.0, phi);
        Self::new(self.alpha.iter().map(|a| a * w).collect()).expect("rotation keeps |α| < 1")
    }

    /// `max_n |α_n - β_n|` over the common period.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        let q =
            crate::jacobi::lcm(self.p, other.p).ok_or(Error::IncommensurablePeriods(self.p as f64, other.p as f64))?;
        Ok((0..q)
            .map(|n| (self.alpha[n % self.p] - other.alpha[n % other.p]).norm())
            .fold(0.0, f64::max))
    }

    /// `A(α_{p-1}, z) ··· A(α_0, z)`.
    pub fn transfer_product(&self, z: Complex64) -> Mat2<Complex64> {
        (0..self.p).fold(Mat2::identity(), |m, n| step(self.alpha[n], self.rho[n], z) * m)
    }

    /// `z^{-p/2}`-normalized transfer product; unimodular.
    pub fn normalized_transfer(&self, theta: f64) -> Mat2<Complex64> {
        let z = Complex64::from_polar(1.0, theta);
        self.transfer_product(z)
            .scale(Complex64::from_polar(1.0, -(self.p as f64) * theta / 2.0))
    }

    /// Normalized trace, before the reality check.
    pub fn discriminant_complex(&self, theta: f64) -> Complex64 {
        self.normalized_transfer(theta).trace()
    }

    /// Real discriminant `Δ(θ)`; fails if the imaginary residual is above
    /// [`REALITY_TOL`].
    pub fn discriminant(&self, theta: f64) -> Result<f64> {
        let d = self.discriminant_complex(theta);
        if d.im.abs() > REALITY_TOL * d.re.abs().max(1.0) {
            return Err(Error::numerical(format!(
                "CMV discriminant has imaginary part {} at θ = {theta}",
                d.im
            )));
        }
        Ok(d.re)
    }

    fn disc(&self, theta: f64) -> f64 {
        self.discriminant_complex(theta).re
    }

    /// `dΔ/dθ` by the product rule, `dA/dz = ρ⁻¹ [[1, 0], [-α, 0]]`.
    pub fn discriminant_derivative(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        let mut m = Mat2::<Complex64>::identity();
        let mut dm = Mat2::<Complex64>::zero();
        for n in 0..self.p {
            let r = Complex64::new(1.0 / self.rho[n], 0.0);
            let a = step(self.alpha[n], self.rho[n], z);
            let da = Mat2::new(
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                -self.alpha[n],
                Complex64::new(0.0, 0.0),
            )
            .scale(r);
            dm = da * m + a * dm;
            m = a * m;
        }
        let half = self.p as f64 / 2.0;
        let norm = Complex64::from_polar(1.0, -half * theta);
        let i = Complex64::new(0.0, 1.0);
        (i * norm * (z * dm.trace() - m.trace() * half)).re
    }

    /// Noise floor for `|Δ| - 2` when deciding whether a gap is closed.
    fn closed_tol(&self) -> f64 {
        1e-12 * self.rho.iter().map(|r| 1.0 / r).product::<f64>()
    }

    /// Spectral arcs, edges bracketed on a θ-grid of `64p` points (refined
    /// until two successive grids agree) and bisected to machine precision.
    pub fn arc_band_structure(&self) -> Result<ArcBandStructure> {
        const MAX_DOUBLINGS: u32 = 6;
        let base = (64 * self.p).max(128);
        let mut prev = self.arcs_on_grid(base)?;
        for k in 1..=MAX_DOUBLINGS {
            let next = self.arcs_on_grid(base << k)?;
            if next.edges.len() == prev.edges.len() && next.arcs.len() == prev.arcs.len() {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::numerical(format!(
            "arc structure did not stabilize after refining to {} grid points",
            base << MAX_DOUBLINGS
        )))
    }

    fn arcs_on_grid(&self, n: usize) -> Result<ArcBandStructure> {
        let h = TAU / n as f64;
        let values: Vec<f64> = (0..n).map(|j| self.discriminant(j as f64 * h)).collect::<Result<_>>()?;
        let mut roots: Vec<(f64, EdgeLabel)> = Vec::new();
        for j in 0..n {
            let (t0, t1) = (j as f64 * h, (j + 1) as f64 * h);
            let (v0, v1) = (values[j], values[(j + 1) % n]);
            for label in [EdgeLabel::Plus2, EdgeLabel::Minus2] {
                let level = label.level();
                let (g0, g1) = (v0 - level, v1 - level);
                if g0 == 0.0 {
                    roots.push((t0, label));
                } else if g0 * g1 < 0.0 {
                    roots.push((bisect(|t| self.disc(t) - level, t0, t1)?, label));
                }
            }
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        roots.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

        let tol = self.closed_tol();
        let inside = |t: f64| self.disc(t).abs() - 2.0 <= 0.0;
        if roots.is_empty() {
            let arcs = if inside(0.0) {
                CircularArcSet::full_circle()
            } else {
                CircularArcSet::empty()
            };
            return Ok(ArcBandStructure {
                arcs,
                edges: Vec::new(),
                closed_gap_points: Vec::new(),
                grid_points: n,
            });
        }

        // classify the segments between consecutive roots
        let m = roots.len();
        let mut segments = Vec::with_capacity(m);
        let mut closed = Vec::new();
        for k in 0..m {
            let start = roots[k].0;
            let mut end = roots[(k + 1) % m].0;
            if end <= start {
                end += TAU;
            }
            let mid = 0.5 * (start + end);
            let excess = self.disc(mid).abs() - 2.0;
            let is_in = excess <= 0.0 || (excess <= tol && end - start < 1e-4);
            if is_in && excess > 0.0 {
                closed.push(wrap_angle(mid));
            }
            segments.push((start, end, is_in));
        }
        let raw: Vec<Interval> = segments
            .iter()
            .filter(|s| s.2)
            .flat_map(|&(s, e, _)| {
                if e <= TAU {
                    vec![Interval { lo: s, hi: e }]
                } else {
                    vec![Interval { lo: s, hi: TAU }, Interval { lo: 0.0, hi: e - TAU }]
                }
            })
            .collect();
        let arcs = CircularArcSet::from_split(IntervalSet::normalize_unchecked(raw));
        // an edge separates an inside segment from an outside one
        let edges = (0..m)
            .filter(|&k| segments[k].2 != segments[(k + m - 1) % m].2)
            .map(|k| ArcEdge {
                angle: roots[k].0,
                label: roots[k].1,
            })
            .collect();
        Ok(ArcBandStructure {
            arcs,
            edges,
            closed_gap_points: closed,
            grid_points: n,
        })
    }
}
