//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use ptspec::PiecewisePotential;

/// Bands of `v` in `[lo, hi]` from a uniform `n`-point scan of `|Δ| − 2`,
/// with edges placed by linear interpolation between the bracketing grid
/// points. Independent of the library's root finder.
pub fn scan_bands(v: &PiecewisePotential, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / (n - 1) as f64;
    let e = |i: usize| lo + h * i as f64;
    let f = |x: f64| v.discriminant(x).abs() - 2.0;
    let mut bands = Vec::new();
    let mut prev = f(e(0));
    let mut start = if prev <= 0.0 { Some(lo) } else { None };
    for i in 1..n {
        let x = e(i);
        let cur = f(x);
        let cross = || {
            let x0 = e(i - 1);
            x0 + h * prev / (prev - cur)
        };
        match (prev <= 0.0, cur <= 0.0) {
            (false, true) => start = Some(cross()),
            (true, false) => {
                bands.push((start.take().unwrap(), cross()));
            }
            _ => {}
        }
        prev = cur;
    }
    if let Some(s) = start {
        bands.push((s, hi));
    }
    bands
}

/// Gaps between consecutive scanned bands.
pub fn scan_gaps(bands: &[(f64, f64)]) -> Vec<(f64, f64)> {
    bands.windows(2).map(|w| (w[0].1, w[1].0)).collect()
}

/// `Θ(α) = [[ᾱ, ρ], [ρ, −α]]`.
fn theta(a: Complex64) -> [[Complex64; 2]; 2] {
    let rho = Complex64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
    [[a.conj(), rho], [rho, -a]]
}

/// Eigenangles in `(−π, π]` of the `n × n` extended CMV matrix `L·M` with
/// cyclic boundary (`n` even, a multiple of the period), built from the
/// periodically repeated Verblunsky coefficients `alpha`. The matrix is
/// exactly unitary, so its eigenvalues lie on the unit circle and sample
/// the spectrum of the periodic operator.
pub fn cmv_truncation_angles(alpha: &[Complex64], n: usize) -> Vec<f64> {
    assert!(n % 2 == 0 && n % alpha.len() == 0);
    let zero = Complex64::new(0.0, 0.0);
    let mut l = DMatrix::from_element(n, n, zero);
    let mut m = DMatrix::from_element(n, n, zero);
    for j in (0..n).step_by(2) {
        let t = theta(alpha[j % alpha.len()]);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            l[(j + r, j + c)] = t[r][c];
        }
    }
    for j in (1..n).step_by(2) {
        let t = theta(alpha[j % alpha.len()]);
        let idx = [j, (j + 1) % n];
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            m[(idx[r], idx[c])] = t[r][c];
        }
    }
    let u = l * m;
    let eig = u.schur().eigenvalues().expect("complex Schur form is triangular");
    let mut out: Vec<f64> = eig.iter().map(|z| z.arg()).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Seeded generator for test ensembles.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}
