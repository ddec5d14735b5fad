//! Safeguarded root polishing on a sign-change bracket.

use crate::error::{Error, Result};

/// Outcome of a bracketed solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisect `f` on `[lo, hi]` down to `width`, then take up to `newton_steps`
/// Newton steps with `df`, rejecting any step that leaves the bracket.
///
/// The bracket must contain a sign change (`f(lo)·f(hi) <= 0`).
pub fn bracketed_root<F, D>(f: F, df: D, lo: f64, hi: f64, width: f64, newton_steps: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numerical(format!("no sign change on [{a}, {b}] ({fa}, {fb})")));
    }
    let mut iterations = 0;
    while b - a > width && iterations < 200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Root {
                x: m,
                residual: 0.0,
                iterations,
            });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for _ in 0..newton_steps {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= a && next <= b) {
            break;
        }
        let fnext = f(next);
        iterations += 1;
        if fnext.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fnext;
        if fx == 0.0 {
            break;
        }
    }
    Ok(Root {
        x,
        residual: fx.abs(),
        iterations,
    })
}

/// Bisection to machine resolution.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    bracketed_root(&f, |_| f64::NAN, lo, hi, 0.0, 0).map(|r| r.x)
}
