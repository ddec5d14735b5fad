//! Periodic Jacobi operators
//! `(Jφ)_n = a_{n-1} φ_{n-1} + a_n φ_{n+1} + b_n φ_n`.
//!
//! Transfer-matrix convention: the one-step matrix acting on
//! `(φ_n, φ_{n-1})` is
//!
//! ```text
//! T_n(E) = (1/a_n) [[E - b_n, -a_{n-1}], [a_n, 0]]
//! ```
//!
//! and the period map is `T_{p-1} ··· T_0` with `a_{-1} = a_{p-1}`. Each
//! factor has determinant `a_{n-1}/a_n`, so the product is unimodular. For
//! the free operator (`p = 1`, `a = 1`, `b = 0`) the period map is
//! `[[E, -1], [1, 0]]` and `Δ(E) = E`, with spectrum `[-2, 2]`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bands::{BandEdge, BandStructure, EdgeLabel};
use crate::error::{Error, Result};
use crate::mat2::{Mat2, Scalar};

/// Edges closer than this are treated as a closed gap.
pub const CLOSED_GAP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJacobi")]
pub struct PeriodicJacobi {
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    gamma: f64,
}

#[derive(Deserialize)]
struct RawJacobi {
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(default)]
    gamma: Option<f64>,
}

impl TryFrom<RawJacobi> for PeriodicJacobi {
    type Error = Error;

    fn try_from(r: RawJacobi) -> Result<Self> {
        if r.a.len() != r.p {
            return Err(Error::invalid(format!(
                "expected {} off-diagonal entries, got {}",
                r.p,
                r.a.len()
            )));
        }
        let mut j = PeriodicJacobi::new(r.a, r.b)?;
        if let Some(g) = r.gamma {
            j = j.with_gamma(g)?;
        }
        Ok(j)
    }
}

/// Sup-norm distance between two Jacobi operators over a common period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupDistance {
    /// `max_n max(|Δa_n|, |Δb_n|)`.
    pub coefficient: f64,
    /// `2·max|Δa| + max|Δb|`, an upper bound on the operator norm.
    pub operator_norm_bound: f64,
    pub common_period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> Option<usize> {
    (a / gcd(a, b)).checked_mul(b)
}

impl PeriodicJacobi {
    /// Period-`p` operator with off-diagonal `a` and diagonal `b`.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid(format!(
                "coefficient lists must be nonempty and of equal length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite Jacobi coefficient"));
        }
        let gamma = a.iter().copied().fold(f64::INFINITY, f64::min);
        if !(gamma > 0.0) {
            return Err(Error::invalid(format!(
                "off-diagonal coefficients must be positive (min {gamma})"
            )));
        }
        Ok(Self {
            p: a.len(),
            a,
            b,
            gamma,
        })
    }

    pub fn free() -> Self {
        Self::new(vec![1.0], vec![0.0]).expect("valid")
    }

    /// Set the stored lower bound `γ ≤ min a_n`.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || gamma > self.gamma {
            return Err(Error::invalid(format!(
                "gamma {gamma} must lie in (0, min a = {}]",
                self.gamma
            )));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn period(&self) -> usize {
        self.p
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The same operator viewed with period `q` (a multiple of `p`).
    pub fn extend(&self, q: usize) -> Result<Self> {
        if q == 0 || q % self.p != 0 {
            return Err(Error::invalid(format!("period {q} is not a multiple of {}", self.p)));
        }
        let a = self.a.iter().copied().cycle().take(q).collect();
        let b = self.b.iter().copied().cycle().take(q).collect();
        Ok(Self {
            p: q,
            a,
            b,
            gamma: self.gamma,
        })
    }

    /// Add `c` to every diagonal entry.
    pub fn shift(&self, c: f64) -> Self {
        Self {
            b: self.b.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }

    fn a_prev(&self, n: usize) -> f64 {
        self.a[(n + self.p - 1) % self.p]
    }

    fn step<T: Scalar>(&self, n: usize, e: T) -> Mat2<T> {
        let inv = 1.0 / self.a[n];
        Mat2::new(
            (e - T::from(self.b[n])) * T::from(inv),
            T::from(-self.a_prev(n) * inv),
            T::from(1.0),
            T::from(0.0),
        )
    }

    /// Period map `T_{p-1}(E) ··· T_0(E)`.
    pub fn transfer_matrix<T: Scalar>(&self, e: T) -> Mat2<T> {
        (0..self.p).fold(Mat2::identity(), |m, n| self.step(n, e) * m)
    }

    pub fn transfer_matrix_complex(&self, z: Complex64) -> Mat2<Complex64> {
        self.transfer_matrix(z)
    }

    pub fn discriminant(&self, e: f64) -> f64 {
        self.transfer_matrix(e).trace()
    }

    /// `(Δ(E), Δ'(E))`, the derivative by the product rule with
    /// `T_n' = (1/a_n) [[1, 0], [0, 0]]`.
    pub fn discriminant_with_derivative(&self, e: f64) -> (f64, f64) {
        let mut m = Mat2::<f64>::identity();
        let mut dm = Mat2::<f64>::zero();
        for n in 0..self.p {
            let t = self.step(n, e);
            let dt = Mat2::new(1.0 / self.a[n], 0.0, 0.0, 0.0);
            dm = dt * m + t * dm;
            m = t * m;
        }
        (m.trace(), dm.trace())
    }

    pub fn discriminant_derivative(&self, e: f64) -> f64 {
        self.discriminant_with_derivative(e).1
    }

    /// Bloch matrix at quasi-momentum 0 (`sign = 1`) or π (`sign = -1`).
    pub fn bloch_matrix(&self, sign: f64) -> DMatrix<f64> {
        let p = self.p;
        let mut h = DMatrix::<f64>::zeros(p, p);
        for n in 0..p {
            h[(n, n)] += self.b[n];
            let m = (n + 1) % p;
            let coupling = if n == p - 1 { sign * self.a[n] } else { self.a[n] };
            h[(n, m)] += coupling;
            h[(m, n)] += coupling;
        }
        h
    }

    fn sorted_eigenvalues(h: DMatrix<f64>) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Solutions of `Δ = 2`: eigenvalues of the periodic truncation.
    pub fn periodic_eigenvalues(&self) -> Result<Vec<f64>> {
        Self::sorted_eigenvalues(self.bloch_matrix(1.0))
    }

    /// Solutions of `Δ = -2`: eigenvalues of the antiperiodic truncation.
    pub fn antiperiodic_eigenvalues(&self) -> Result<Vec<f64>> {
        Self::sorted_eigenvalues(self.bloch_matrix(-1.0))
    }

    fn polish(&self, e: f64, level: f64) -> f64 {
        let (d, dd) = self.discriminant_with_derivative(e);
        if dd == 0.0 || !dd.is_finite() {
            return e;
        }
        let step = (d - level) / dd;
        let cand = e - step;
        if step.abs() <= 1e-8 * e.abs().max(1.0) && (self.discriminant(cand) - level).abs() < (d - level).abs() {
            cand
        } else {
            e
        }
    }

    /// Bands from the periodic and antiperiodic eigenproblems, each edge
    /// polished by one Newton step on `Δ ∓ 2`.
    pub fn band_structure(&self) -> Result<BandStructure> {
        let mut edges: Vec<BandEdge> = self
            .periodic_eigenvalues()?
            .into_iter()
            .map(|e| BandEdge {
                energy: self.polish(e, 2.0),
                label: EdgeLabel::Plus2,
            })
            .chain(self.antiperiodic_eigenvalues()?.into_iter().map(|e| BandEdge {
                energy: self.polish(e, -2.0),
                label: EdgeLabel::Minus2,
            }))
            .collect();
        edges.sort_by(|x, y| x.energy.total_cmp(&y.energy));
        let bs = BandStructure::from_sorted_edges(edges, CLOSED_GAP_TOL, None);
        self.check_monotone(&bs)?;
        Ok(bs)
    }

    fn check_monotone(&self, bs: &BandStructure) -> Result<()> {
        for band in bs.raw_bands() {
            let len = band.length();
            if len <= 0.0 {
                continue;
            }
            let signs: Vec<f64> = (1..8)
                .map(|k| self.discriminant_derivative(band.lo + len * k as f64 / 8.0).signum())
                .collect();
            if signs.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::numerical(format!(
                    "discriminant is not monotone on band [{}, {}]",
                    band.lo, band.hi
                )));
            }
        }
        Ok(())
    }

    /// Coefficient distance over the least common period.
    pub fn sup_distance(&self, other: &Self) -> Result<SupDistance> {
        let q = lcm(self.p, other.p).ok_or(Error::IncommensurablePeriods(self.p as f64, other.p as f64))?;
        let mut da = 0.0_f64;
        let mut db = 0.0_f64;
        for n in 0..q {
            da = da.max((self.a[n % self.p] - other.a[n % other.p]).abs());
            db = db.max((self.b[n % self.p] - other.b[n % other.p]).abs());
        }
        Ok(SupDistance {
            coefficient: da.max(db),
            operator_norm_bound: 2.0 * da + db,
            common_period: q,
        })
    }

    /// `2·max a + max|b|`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        2.0 * self.a.iter().copied().fold(0.0, f64::max) + self.b.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Growth diagnostic for `max |Δ'|` on the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeGrowth {
    pub period: usize,
    pub max_derivative: f64,
    /// `max(1, max_E max_n |E - b_n|/a_n + max_n a_{n-1}/a_n)` over the spectrum.
    pub growth_factor: f64,
    /// `max |Δ'| / growth_factor^p`.
    pub fitted_constant: f64,
}

/// Sample `|Δ'|` over every band (edges, midpoint and `interior` uniform
/// points) and fit the constant in `max |Δ'| ≤ C·g^p`.
pub fn derivative_growth(j: &PeriodicJacobi, bs: &BandStructure, interior: usize) -> DerivativeGrowth {
    let mut max_d = 0.0_f64;
    let mut ratio = 0.0_f64;
    for n in 0..j.p {
        ratio = ratio.max(j.a_prev(n) / j.a[n]);
    }
    let mut reach = 0.0_f64;
    for band in bs.raw_bands() {
        for e in [band.lo, band.hi] {
            for n in 0..j.p {
                reach = reach.max((e - j.b[n]).abs() / j.a[n]);
            }
        }
        for k in 0..=(interior + 1) {
            let e = band.lo + band.length() * k as f64 / (interior + 1) as f64;
            max_d = max_d.max(j.discriminant_derivative(e).abs());
        }
        max_d = max_d.max(j.discriminant_derivative(band.midpoint()).abs());
    }
    let g = (reach + ratio).max(1.0);
    DerivativeGrowth {
        period: j.p,
        max_derivative: max_d,
        growth_factor: g,
        fitted_constant: max_d / g.powi(j.p as i32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn period_two(lambda: f64) -> PeriodicJacobi {
        PeriodicJacobi::new(vec![1.0, 1.0], vec![lambda, -lambda]).unwrap()
    }

    #[test]
    fn free_transfer_matrix() {
        let m = PeriodicJacobi::free().transfer_matrix(0.7);
        assert_eq!(m, Mat2::new(0.7, -1.0, 1.0, 0.0));
        assert_eq!(PeriodicJacobi::free().discriminant(2.0), 2.0);
        assert_eq!(PeriodicJacobi::free().discriminant(-2.0), -2.0);
        assert_eq!(PeriodicJacobi::free().discriminant_derivative(0.3), 1.0);
    }

    #[test]
    fn period_two_product_matches_symbolic_form() {
        // symbolic product [[(E+λ)(E-λ)-1, -(E+λ)], [E-λ, -1]]
        for &(e, l) in &[(0.3, 1.0), (-1.7, 0.4), (2.5, -0.8)] {
            let m = period_two(l).transfer_matrix(e);
            assert_abs_diff_eq!(m.a, (e + l) * (e - l) - 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(m.b, -(e + l), epsilon = 1e-14);
            assert_abs_diff_eq!(m.c, e - l, epsilon = 1e-14);
            assert_abs_diff_eq!(m.d, -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn period_two_discriminant_closed_form() {
        let j = period_two(1.0);
        let r5 = 5f64.sqrt();
        assert_abs_diff_eq!(j.discriminant(1.0), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.discriminant(-1.0), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.discriminant(r5), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.discriminant_derivative(1.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.discriminant_derivative(-0.4), -0.8, epsilon = 1e-14);
    }

    #[test]
    fn unimodular_with_unequal_couplings() {
        let j = PeriodicJacobi::new(vec![0.5, 1.7, 1.1], vec![0.2, -0.3, 1.0]).unwrap();
        for e in [-3.0, 0.1, 2.2] {
            assert_abs_diff_eq!(j.transfer_matrix(e).det(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn period_two_bands() {
        let bs = period_two(1.0).band_structure().unwrap();
        let r5 = 5f64.sqrt();
        let parts = bs.bands.parts();
        assert_eq!(parts.len(), 2);
        assert_abs_diff_eq!(parts[0].lo, -r5, epsilon = 1e-12);
        assert_abs_diff_eq!(parts[0].hi, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parts[1].lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parts[1].hi, r5, epsilon = 1e-12);
        assert_eq!(bs.gaps.len(), 1);
        let labels: Vec<EdgeLabel> = bs.edges.iter().map(|e| e.label).collect();
        use EdgeLabel::*;
        assert_eq!(labels, vec![Plus2, Minus2, Minus2, Plus2]);
    }

    #[test]
    fn free_bands_and_closed_gaps_of_extension() {
        let bs = PeriodicJacobi::free().band_structure().unwrap();
        assert_eq!(bs.bands.parts().len(), 1);
        assert_abs_diff_eq!(bs.bands.parts()[0].lo, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bs.bands.parts()[0].hi, 2.0, epsilon = 1e-14);

        // viewed with period 4 the free operator has three closed gaps
        let bs4 = PeriodicJacobi::free().extend(4).unwrap().band_structure().unwrap();
        assert_eq!(bs4.bands.len(), 1);
        assert_eq!(bs4.closed_gap_points.len(), 3);
        assert_eq!(bs4.raw_bands().len(), 4);
    }

    #[test]
    fn shift_translates_bands() {
        let j = PeriodicJacobi::new(vec![0.8, 1.3, 1.0], vec![0.5, -1.0, 0.2]).unwrap();
        let c = 0.37;
        let a = j.band_structure().unwrap();
        let b = j.shift(c).band_structure().unwrap();
        for (x, y) in a.edges.iter().zip(&b.edges) {
            assert_abs_diff_eq!(x.energy + c, y.energy, epsilon = 1e-12);
        }
        for e in [-1.0, 0.3, 2.0] {
            assert_abs_diff_eq!(j.shift(c).discriminant(e), j.discriminant(e - c), epsilon = 1e-12);
        }
    }

    #[test]
    fn sup_distance_examples() {
        let j = PeriodicJacobi::new(vec![1.0, 2.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(j.sup_distance(&j).unwrap().coefficient, 0.0);
        let d = j.sup_distance(&j.shift(0.25)).unwrap();
        assert_eq!(d.coefficient, 0.25);
        assert_eq!(d.operator_norm_bound, 0.25);
        let k = PeriodicJacobi::new(vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(j.sup_distance(&k).unwrap().common_period, 6);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(PeriodicJacobi::new(vec![0.0], vec![0.0]).is_err());
        assert!(PeriodicJacobi::new(vec![1.0, 1.0], vec![0.0]).is_err());
        assert!(PeriodicJacobi::new(vec![], vec![]).is_err());
        assert!(serde_json::from_str::<PeriodicJacobi>(r#"{"p":2,"a":[1],"b":[0]}"#).is_err());
        assert!(PeriodicJacobi::free().with_gamma(2.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let j: PeriodicJacobi = serde_json::from_str(r#"{"p":2,"a":[1,1],"b":[1,-1]}"#).unwrap();
        assert_eq!(j, period_two(1.0));
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(s, r#"{"p":2,"a":[1.0,1.0],"b":[1.0,-1.0],"gamma":1.0}"#);
        let g = j.with_gamma(0.5).unwrap();
        let back: PeriodicJacobi = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
