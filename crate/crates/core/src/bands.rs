//! Band structures of periodic operators on the real line.

use serde::{Deserialize, Serialize};

use crate::intervals::{Interval, IntervalSet};

/// Which level the discriminant takes at a band edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    #[serde(rename = "+2")]
    Plus2,
    #[serde(rename = "-2")]
    Minus2,
}

impl EdgeLabel {
    pub fn level(self) -> f64 {
        match self {
            EdgeLabel::Plus2 => 2.0,
            EdgeLabel::Minus2 => -2.0,
        }
    }

    pub fn of_sign(v: f64) -> Self {
        if v >= 0.0 {
            EdgeLabel::Plus2
        } else {
            EdgeLabel::Minus2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub energy: f64,
    pub label: EdgeLabel,
}

/// Bands, open gaps and labelled edges of a periodic operator.
///
/// `edges` lists every solution of `Δ = ±2` with multiplicity, so a closed
/// gap contributes two coincident edges and also appears in
/// `closed_gap_points`. For windowed spectra the top band may be cut at
/// `window_top`, in which case it has no upper edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    #[serde(flatten)]
    pub bands: IntervalSet,
    pub gaps: Vec<Interval>,
    pub edges: Vec<BandEdge>,
    pub closed_gap_points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_top: Option<f64>,
}

impl BandStructure {
    /// Assemble from edges sorted by energy, pairing them into bands.
    ///
    /// Consecutive edges of neighbouring bands closer than `closed_tol` are
    /// snapped together and reported as a closed gap. An odd trailing edge
    /// opens a band that is cut at `window_top`.
    pub(crate) fn from_sorted_edges(mut edges: Vec<BandEdge>, closed_tol: f64, window_top: Option<f64>) -> Self {
        let mut closed = Vec::new();
        let mut k = 1;
        while k + 1 < edges.len() {
            let (upper, lower) = (edges[k].energy, edges[k + 1].energy);
            if lower - upper <= closed_tol {
                let mid = 0.5 * (upper + lower);
                edges[k].energy = mid;
                edges[k + 1].energy = mid;
                closed.push(mid);
            }
            k += 2;
        }
        let mut raw: Vec<Interval> = edges
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| Interval {
                lo: c[0].energy,
                hi: c[1].energy.max(c[0].energy),
            })
            .collect();
        if edges.len() % 2 == 1 {
            let lo = edges[edges.len() - 1].energy;
            if let Some(top) = window_top {
                raw.push(Interval { lo, hi: top.max(lo) });
            }
        }
        let bands = IntervalSet::normalize_unchecked(raw);
        let gaps = bands.gaps();
        Self {
            bands,
            gaps,
            edges,
            closed_gap_points: closed,
            window_top,
        }
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Bands before merging across closed gaps, as `[α_j, β_j]`.
    pub fn raw_bands(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = self
            .edges
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| Interval {
                lo: c[0].energy,
                hi: c[1].energy,
            })
            .collect();
        if self.edges.len() % 2 == 1 {
            if let (Some(last), Some(top)) = (self.edges.last(), self.window_top) {
                out.push(Interval {
                    lo: last.energy,
                    hi: top,
                });
            }
        }
        out
    }

    /// Total length of the open gaps.
    pub fn gap_length(&self) -> f64 {
        self.gaps.iter().map(Interval::length).sum()
    }

    /// Solutions of `Δ = 2` in increasing order, counted with multiplicity.
    pub fn periodic_eigenvalues(&self) -> Vec<f64> {
        self.edges
            .iter()
            .filter(|e| e.label == EdgeLabel::Plus2)
            .map(|e| e.energy)
            .collect()
    }

    pub fn translate(&self, shift: f64) -> Self {
        Self {
            bands: self.bands.translate(shift),
            gaps: self
                .gaps
                .iter()
                .map(|g| Interval {
                    lo: g.lo + shift,
                    hi: g.hi + shift,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| BandEdge {
                    energy: e.energy + shift,
                    label: e.label,
                })
                .collect(),
            closed_gap_points: self.closed_gap_points.iter().map(|c| c + shift).collect(),
            window_top: self.window_top.map(|t| t + shift),
        }
    }

    /// CSV table with columns `band_index, lo, hi, length`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["band_index", "lo", "hi", "length"])?;
        for (k, b) in self.raw_bands().iter().enumerate() {
            w.write_record([
                (k + 1).to_string(),
                b.lo.to_string(),
                b.hi.to_string(),
                b.length().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(energy: f64, label: EdgeLabel) -> BandEdge {
        BandEdge { energy, label }
    }

    #[test]
    fn pairs_edges_and_snaps_closed_gaps() {
        use EdgeLabel::*;
        let bs = BandStructure::from_sorted_edges(
            vec![
                edge(0.0, Plus2),
                edge(1.0, Minus2),
                edge(1.0 + 1e-13, Minus2),
                edge(4.0, Plus2),
            ],
            1e-10,
            None,
        );
        assert_eq!(bs.band_count(), 1);
        assert_eq!(bs.closed_gap_points.len(), 1);
        assert!(bs.gaps.is_empty());
        assert_eq!(bs.raw_bands().len(), 2);
        assert_eq!(bs.periodic_eigenvalues(), vec![0.0, 4.0]);
    }

    #[test]
    fn truncated_top_band() {
        use EdgeLabel::*;
        let bs = BandStructure::from_sorted_edges(
            vec![edge(0.0, Plus2), edge(1.0, Minus2), edge(2.0, Minus2)],
            1e-10,
            Some(3.0),
        );
        assert_eq!(bs.band_count(), 2);
        assert_eq!(bs.gaps.len(), 1);
        assert_eq!(bs.gap_length(), 1.0);
        assert_eq!(bs.bands.measure(), 2.0);
    }

    #[test]
    fn json_flattens_parts() {
        use EdgeLabel::*;
        let bs = BandStructure::from_sorted_edges(vec![edge(-2.0, Minus2), edge(2.0, Plus2)], 1e-10, None);
        let s = serde_json::to_string(&bs).unwrap();
        assert!(s.starts_with(r#"{"parts":[[-2.0,2.0]]"#), "{s}");
        assert!(s.contains(r#""label":"+2""#));
        let back: BandStructure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, bs);
    }
}
