//! Finite unions of closed arcs on the unit circle, parametrized by angle.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Interval, IntervalSet};

/// Union of closed arcs of `∂𝔻`.
///
/// Stored as a normal-form [`IntervalSet`] inside `[0, 2π]`; an arc crossing
/// angle zero is held as two pieces and re-joined by [`CircularArcSet::arcs`].
/// Serialized as `[start, end]` angle pairs with `start ∈ [0, 2π)` and
/// `start <= end <= start + 2π`, so a wrapping arc has `end > 2π`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CircularArcSet {
    split: IntervalSet,
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Reduce an angle difference to `(-π, π]`.
pub fn wrap_signed(theta: f64) -> f64 {
    let t = wrap_angle(theta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

impl CircularArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full_circle() -> Self {
        Self {
            split: IntervalSet::single(0.0, TAU).expect("finite"),
        }
    }

    /// Build from counterclockwise arcs `(start, end)`, `end >= start`.
    /// Arcs of angular length at least `2π` cover the circle.
    pub fn from_arcs(arcs: &[(f64, f64)]) -> Result<Self> {
        let mut raw = Vec::new();
        for &(start, end) in arcs {
            Interval::new(start, end)?;
            let len = end - start;
            if len >= TAU {
                return Ok(Self::full_circle());
            }
            let s = wrap_angle(start);
            let e = s + len;
            if e <= TAU {
                raw.push(Interval { lo: s, hi: e });
            } else {
                raw.push(Interval { lo: s, hi: TAU });
                raw.push(Interval { lo: 0.0, hi: e - TAU });
            }
        }
        Ok(Self {
            split: IntervalSet::normalize_unchecked(raw),
        })
    }

    pub(crate) fn from_split(split: IntervalSet) -> Self {
        Self { split }
    }

    /// Pieces inside `[0, 2π]` (a wrapping arc appears as two pieces).
    pub fn split_parts(&self) -> &IntervalSet {
        &self.split
    }

    pub fn is_empty(&self) -> bool {
        self.split.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.split.len() == 1 && self.split.parts()[0].lo <= 0.0 && self.split.parts()[0].hi >= TAU
    }

    /// Arcs as `(start, end)` with the wrapping arc re-joined.
    pub fn arcs(&self) -> Vec<(f64, f64)> {
        let parts = self.split.parts();
        if parts.is_empty() {
            return Vec::new();
        }
        if self.is_full() {
            return vec![(0.0, TAU)];
        }
        let first = parts[0];
        let last = parts[parts.len() - 1];
        let wraps = parts.len() >= 2 && first.lo <= 0.0 && last.hi >= TAU;
        if !wraps {
            return parts.iter().map(|p| (p.lo, p.hi)).collect();
        }
        let mut out: Vec<(f64, f64)> = parts[1..parts.len() - 1].iter().map(|p| (p.lo, p.hi)).collect();
        out.push((last.lo, TAU + first.hi));
        out
    }

    pub fn len(&self) -> usize {
        self.arcs().len()
    }

    pub fn measure(&self) -> f64 {
        self.split.measure()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            split: self.split.intersect(&other.split),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            split: self.split.union(&other.split),
        }
    }

    /// Rotate every arc by `phi`.
    pub fn rotate(&self, phi: f64) -> Self {
        let arcs: Vec<(f64, f64)> = self.arcs().into_iter().map(|(s, e)| (s + phi, e + phi)).collect();
        Self::from_arcs(&arcs).expect("rotation of valid arcs")
    }

    /// Open gaps (complementary arcs) as `(start, end)` pairs.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        if self.is_empty() {
            return vec![(0.0, TAU)];
        }
        if self.is_full() {
            return Vec::new();
        }
        let arcs = self.arcs();
        let n = arcs.len();
        (0..n)
            .map(|k| {
                let (_, e) = arcs[k];
                let (s_next, _) = arcs[(k + 1) % n];
                let mut s = s_next;
                while s < e || (n == 1 && s <= e) {
                    s += TAU;
                }
                (e, s)
            })
            .filter(|(a, b)| b > a)
            .collect()
    }

    /// Arc endpoints as angles in `[0, 2π)`.
    pub fn endpoints(&self) -> Vec<f64> {
        if self.is_full() {
            return Vec::new();
        }
        let mut out: Vec<f64> = self
            .arcs()
            .into_iter()
            .flat_map(|(s, e)| [wrap_angle(s), wrap_angle(e)])
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// The set seen from angle `x`: offsets in `[-π, π]` of points of the set.
    pub fn local_view(&self, x: f64) -> IntervalSet {
        let window = Interval { lo: -PI, hi: PI };
        let x = wrap_angle(x);
        let mut raw = Vec::new();
        for k in [-1.0, 0.0, 1.0] {
            let shifted = self.split.translate(k * TAU - x).intersect_interval(window);
            raw.extend_from_slice(shifted.parts());
        }
        IntervalSet::normalize_unchecked(raw)
    }

    /// Angular distance from `x` to the set.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.local_view(x).distance_to(0.0)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        !self.is_empty() && self.distance_to(x) <= tol
    }

    /// Angular length of the arc window `(x - δ, x + δ)` inside the set.
    pub fn window_measure(&self, x: f64, delta: f64) -> f64 {
        if delta >= PI {
            return self.measure();
        }
        self.local_view(x).window_measure(0.0, delta)
    }

    pub fn homogeneity_density(&self, x: f64, delta: f64, tol: f64) -> Result<f64> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("window radius must be positive, got {delta}")));
        }
        if !self.contains(x, tol) {
            return Err(Error::PointNotInSet { x, tol });
        }
        Ok((self.window_measure(x, delta) / delta).min(2.0))
    }

    fn excess_over(&self, other: &Self) -> f64 {
        if self.is_full() {
            // farthest point from `other` is a gap midpoint
            return other.gaps().into_iter().map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
        }
        let mut candidates: Vec<f64> = self.endpoints();
        for (a, b) in other.gaps() {
            let m = 0.5 * (a + b);
            if self.contains(m, 0.0) {
                candidates.push(m);
            }
        }
        candidates.into_iter().map(|t| other.distance_to(t)).fold(0.0, f64::max)
    }

    /// Hausdorff distance in the arc-length metric.
    pub fn hausdorff_distance(&self, other: &Self) -> Result<f64> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(self.excess_over(other).max(other.excess_over(self)))
    }
}

impl TryFrom<Vec<[f64; 2]>> for CircularArcSet {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = v.into_iter().map(|[a, b]| (a, b)).collect();
        CircularArcSet::from_arcs(&pairs)
    }
}

impl From<CircularArcSet> for Vec<[f64; 2]> {
    fn from(s: CircularArcSet) -> Self {
        s.arcs().into_iter().map(|(a, b)| [a, b]).collect()
    }
}
