//! Finite unions of closed intervals on the real line.
//!
//! An [`IntervalSet`] is always kept in normal form: components sorted,
//! pairwise disjoint and separated by gaps of positive length. Touching
//! intervals are merged, so a closed gap never shows up as a spurious
//! zero-length gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for deciding that a point belongs to a set.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Closed interval `[lo, hi]`. Degenerate (point) intervals are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Length of `(x - delta, x + delta) ∩ self`, evaluated in coordinates
    /// relative to `x` so that windows far below the spacing of floats
    /// around `x` are still measured correctly.
    pub fn window_overlap(&self, x: f64, delta: f64) -> f64 {
        let right = (self.hi - x).min(delta);
        let left = (self.lo - x).max(-delta);
        (right - left).max(0.0)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Normal-form finite union of closed intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntervalSet")]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

#[derive(Deserialize)]
struct RawIntervalSet {
    parts: Vec<Interval>,
}

impl TryFrom<RawIntervalSet> for IntervalSet {
    type Error = Error;

    fn try_from(raw: RawIntervalSet) -> Result<Self> {
        IntervalSet::normalize(&raw.parts)
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self {
            parts: vec![Interval::new(lo, hi)?],
        })
    }

    /// Sort, validate and merge overlapping or touching intervals.
    pub fn normalize(raw: &[Interval]) -> Result<Self> {
        for iv in raw {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(Self::normalize_unchecked(raw.to_vec()))
    }

    /// Build from `(lo, hi)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let raw = pairs
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize_unchecked(raw))
    }

    pub(crate) fn normalize_unchecked(mut raw: Vec<Interval>) -> Self {
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut parts: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match parts.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => parts.push(iv),
            }
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::length).sum()
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.parts.first()?.lo,
            hi: self.parts.last()?.hi,
        })
    }

    /// Bounded open gaps between consecutive components.
    pub fn gaps(&self) -> Vec<Interval> {
        self.parts
            .windows(2)
            .map(|w| Interval {
                lo: w[0].hi,
                hi: w[1].lo,
            })
            .collect()
    }

    /// All component endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.parts.len());
        for p in &self.parts {
            out.push(p.lo);
            if p.hi != p.lo {
                out.push(p.hi);
            }
        }
        out
    }

    pub fn translate(&self, shift: f64) -> Self {
        Self::normalize_unchecked(
            self.parts
                .iter()
                .map(|p| Interval {
                    lo: p.lo + shift,
                    hi: p.hi + shift,
                })
                .collect(),
        )
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = self.parts.clone();
        raw.extend_from_slice(&other.parts);
        Self::normalize_unchecked(raw)
    }

    /// Point-set intersection.
    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo <= hi {
                out.push(Interval { lo, hi });
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalize_unchecked(out)
    }

    pub fn intersect_interval(&self, iv: Interval) -> Self {
        self.intersect(&Self { parts: vec![iv] })
    }

    /// Closure of `self \ other`. Zero-length remnants are dropped, so the
    /// result has the measure of the set difference.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.parts {
            let mut cursor = a.lo;
            for b in other.parts.iter().filter(|b| b.hi >= a.lo && b.lo <= a.hi) {
                if b.lo > cursor {
                    out.push(Interval {
                        lo: cursor,
                        hi: b.lo.min(a.hi),
                    });
                }
                cursor = cursor.max(b.hi);
                if cursor >= a.hi {
                    break;
                }
            }
            if cursor < a.hi {
                out.push(Interval { lo: cursor, hi: a.hi });
            }
        }
        out.retain(|iv| iv.hi > iv.lo);
        Self::normalize_unchecked(out)
    }

    /// Closed `r`-neighborhood: every component fattened by `r` on both sides.
    pub fn neighborhood(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!("neighborhood radius must be positive, got {r}")));
        }
        Ok(Self::normalize_unchecked(
            self.parts
                .iter()
                .map(|p| Interval {
                    lo: p.lo - r,
                    hi: p.hi + r,
                })
                .collect(),
        ))
    }

    /// Index of the first component whose upper end is `>= x`.
    fn first_reaching(&self, x: f64) -> usize {
        self.parts.partition_point(|p| p.hi < x)
    }

    /// Distance from `x` to the set.
    pub fn distance_to(&self, x: f64) -> f64 {
        let k = self.first_reaching(x);
        let mut d = f64::INFINITY;
        if k < self.parts.len() {
            d = d.min(self.parts[k].distance(x));
        }
        if k > 0 {
            d = d.min(self.parts[k - 1].distance(x));
        }
        d
    }

    /// Nearest point of the set to `x`.
    pub fn nearest_point(&self, x: f64) -> Option<f64> {
        let k = self.first_reaching(x);
        let mut best: Option<(f64, f64)> = None;
        for idx in [k.checked_sub(1), Some(k)].into_iter().flatten() {
            if let Some(p) = self.parts.get(idx) {
                let y = x.clamp(p.lo, p.hi);
                let d = (y - x).abs();
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, y));
                }
            }
        }
        best.map(|(_, y)| y)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.distance_to(x) <= tol
    }

    /// Component containing `x` (within `tol`).
    pub fn component_containing(&self, x: f64, tol: f64) -> Option<Interval> {
        let k = self.parts.partition_point(|p| p.hi < x - tol);
        self.parts.get(k).copied().filter(|p| p.contains(x, tol))
    }

    /// One-sided Hausdorff excess `sup_{a in self} dist(a, other)`.
    fn excess_over(&self, other: &Self) -> f64 {
        let other_gaps = other.gaps();
        let mut worst = 0.0_f64;
        for a in &self.parts {
            worst = worst.max(other.distance_to(a.lo)).max(other.distance_to(a.hi));
            // distance to `other` peaks at gap midpoints inside the component
            let start = other_gaps.partition_point(|g| g.hi <= a.lo);
            for g in other_gaps[start..].iter().take_while(|g| g.lo < a.hi) {
                let m = g.midpoint().clamp(a.lo, a.hi);
                worst = worst.max(other.distance_to(m));
            }
        }
        worst
    }

    /// Hausdorff distance, computed exactly from endpoint geometry.
    pub fn hausdorff_distance(&self, other: &Self) -> Result<f64> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(self.excess_over(other).max(other.excess_over(self)))
    }

    /// `|(x - delta, x + delta) ∩ self|`, robust for windows of any size.
    pub fn window_measure(&self, x: f64, delta: f64) -> f64 {
        let start = self.parts.partition_point(|p| p.hi - x <= -delta);
        let end = start + self.parts[start..].partition_point(|p| p.lo - x < delta);
        let hits = &self.parts[start..end];
        match hits.len() {
            0 => 0.0,
            1 => hits[0].window_overlap(x, delta),
            n => {
                // interior components lie entirely inside the window
                let inner: f64 = hits[1..n - 1].iter().map(Interval::length).sum();
                hits[0].window_overlap(x, delta) + inner + hits[n - 1].window_overlap(x, delta)
            }
        }
    }

    /// Homogeneity density `|B_delta(x) ∩ self| / delta`, in `[0, 2]`.
    pub fn homogeneity_density(&self, x: f64, delta: f64) -> Result<f64> {
        self.homogeneity_density_tol(x, delta, MEMBERSHIP_TOL)
    }

    pub fn homogeneity_density_tol(&self, x: f64, delta: f64, tol: f64) -> Result<f64> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("window radius must be positive, got {delta}")));
        }
        if !self.contains(x, tol) {
            return Err(Error::PointNotInSet { x, tol });
        }
        Ok((self.window_measure(x, delta) / delta).min(2.0))
    }
}
