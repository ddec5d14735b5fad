//! Verification ensembles: explicit operator lists, or seeded random
//! families that expand deterministically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bounds::EdgeStabilityInput;
use crate::cmv::PeriodicCmv;
use crate::continuum::PiecewisePotential;
use crate::error::{Error, Result};
use crate::jacobi::PeriodicJacobi;

/// `count` square wells: period `T ∈ [1.5, 2π]`, well `V = v0` on
/// `[0, wT)` with `w ∈ [0.2, 0.8]`, `v0 ∈ [-4, 4]`, and `0` elsewhere.
pub fn random_square_wells(count: usize, seed: u64) -> Result<Vec<PiecewisePotential>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_well(&mut rng)).collect()
}

fn random_well(rng: &mut ChaCha8Rng) -> Result<PiecewisePotential> {
    let t = rng.random_range(1.5..=std::f64::consts::TAU);
    let w = rng.random_range(0.2..=0.8);
    let v0 = rng.random_range(-4.0..=4.0);
    PiecewisePotential::new(t, vec![0.0, w * t, t], vec![v0, 0.0])
}

/// `count` pairs `(V, V + δV)` with `V` a random square well and `δV` a
/// random step function on `1..=4` uniform cells scaled so that
/// `0 < ‖δV‖_B ≤ max_perturbation`.
pub fn random_square_well_pairs(count: usize, seed: u64, max_perturbation: f64) -> Result<Vec<EdgeStabilityInput>> {
    if !(max_perturbation > 0.0) {
        return Err(Error::invalid(format!(
            "perturbation bound must be positive, got {max_perturbation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v1 = random_well(&mut rng)?;
            let cells = rng.random_range(1..=4usize);
            let raw: Vec<f64> = (0..cells).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let target = max_perturbation * rng.random_range(0.05..=1.0);
            let neg = PiecewisePotential::uniform(v1.period(), raw.iter().map(|x| -x).collect())?;
            let norm = neg.besicovitch_norm();
            let neg = if norm > 0.0 {
                PiecewisePotential::uniform(v1.period(), raw.iter().map(|x| -x * target / norm).collect())?
            } else {
                PiecewisePotential::constant(v1.period(), -target)?
            };
            // v1 - (-δV)
            let v2 = v1.difference(&neg)?;
            Ok(EdgeStabilityInput { v1, v2 })
        })
        .collect()
}

/// `count` Jacobi operators with period `1..=max_p`, `a ∈ [0.5, 1.5]`,
/// `b ∈ [-1, 1]`.
pub fn random_jacobi(count: usize, seed: u64, max_p: usize) -> Result<Vec<PeriodicJacobi>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_jacobi_one(&mut rng, max_p)).collect()
}

fn random_jacobi_one(rng: &mut ChaCha8Rng, max_p: usize) -> Result<PeriodicJacobi> {
    if max_p == 0 {
        return Err(Error::invalid("maximal period must be at least 1"));
    }
    let p = rng.random_range(1..=max_p);
    let a = (0..p).map(|_| rng.random_range(0.5..=1.5)).collect();
    let b = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
    PeriodicJacobi::new(a, b)
}

/// `count` pairs `(J, J')`: `J` as in [`random_jacobi`], `J'` its extension
/// to period `p` or `2p` with every coefficient moved by at most `0.3`
/// (off-diagonal entries kept `≥ 0.2`).
pub fn random_jacobi_pairs(count: usize, seed: u64, max_p: usize) -> Result<Vec<(PeriodicJacobi, PeriodicJacobi)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let j = random_jacobi_one(&mut rng, max_p)?;
            let q = j.period() * rng.random_range(1..=2usize);
            let big = j.extend(q)?;
            let a = big
                .a()
                .iter()
                .map(|&x| (x + rng.random_range(-0.3..=0.3)).max(0.2))
                .collect();
            let b = big.b().iter().map(|&x| x + rng.random_range(-0.3..=0.3)).collect();
            Ok((j, PeriodicJacobi::new(a, b)?))
        })
        .collect()
}

/// Input of `ptspec verify`: explicit members, or a seeded generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Ensemble {
    Potentials {
        members: Vec<PiecewisePotential>,
    },
    PotentialPairs {
        pairs: Vec<EdgeStabilityInput>,
    },
    Jacobi {
        members: Vec<PeriodicJacobi>,
    },
    JacobiPairs {
        pairs: Vec<(PeriodicJacobi, PeriodicJacobi)>,
    },
    Cmv {
        members: Vec<PeriodicCmv>,
    },
    CmvPairs {
        pairs: Vec<(PeriodicCmv, PeriodicCmv)>,
    },
    RandomSquareWells {
        count: usize,
        seed: u64,
    },
    RandomSquareWellPairs {
        count: usize,
        seed: u64,
        #[serde(default = "default_perturbation")]
        max_perturbation: f64,
    },
    RandomJacobi {
        count: usize,
        seed: u64,
        #[serde(default = "default_max_p")]
        max_p: usize,
    },
    RandomJacobiPairs {
        count: usize,
        seed: u64,
        #[serde(default = "default_max_p")]
        max_p: usize,
    },
}

fn default_perturbation() -> f64 {
    0.1
}

fn default_max_p() -> usize {
    8
}

impl Ensemble {
    /// Potentials for single-operator continuum checks.
    pub fn potentials(&self) -> Result<Vec<PiecewisePotential>> {
        match self {
            Ensemble::Potentials { members } => Ok(members.clone()),
            Ensemble::RandomSquareWells { count, seed } => random_square_wells(*count, *seed),
            _ => Err(self.wrong("a potential ensemble")),
        }
    }

    pub fn potential_pairs(&self) -> Result<Vec<EdgeStabilityInput>> {
        match self {
            Ensemble::PotentialPairs { pairs } => Ok(pairs.clone()),
            Ensemble::RandomSquareWellPairs {
                count,
                seed,
                max_perturbation,
            } => random_square_well_pairs(*count, *seed, *max_perturbation),
            _ => Err(self.wrong("a potential-pair ensemble")),
        }
    }

    pub fn jacobi(&self) -> Result<Vec<PeriodicJacobi>> {
        match self {
            Ensemble::Jacobi { members } => Ok(members.clone()),
            Ensemble::RandomJacobi { count, seed, max_p } => random_jacobi(*count, *seed, *max_p),
            _ => Err(self.wrong("a Jacobi ensemble")),
        }
    }

    pub fn jacobi_pairs(&self) -> Result<Vec<(PeriodicJacobi, PeriodicJacobi)>> {
        match self {
            Ensemble::JacobiPairs { pairs } => Ok(pairs.clone()),
            Ensemble::RandomJacobiPairs { count, seed, max_p } => random_jacobi_pairs(*count, *seed, *max_p),
            _ => Err(self.wrong("a Jacobi-pair ensemble")),
        }
    }

    pub fn cmv(&self) -> Result<Vec<PeriodicCmv>> {
        match self {
            Ensemble::Cmv { members } => Ok(members.clone()),
            _ => Err(self.wrong("a CMV ensemble")),
        }
    }

    pub fn cmv_pairs(&self) -> Result<Vec<(PeriodicCmv, PeriodicCmv)>> {
        match self {
            Ensemble::CmvPairs { pairs } => Ok(pairs.clone()),
            _ => Err(self.wrong("a CMV-pair ensemble")),
        }
    }

    fn wrong(&self, expected: &str) -> Error {
        let tag = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.get("type").and_then(|t| t.as_str()).map(String::from))
            .unwrap_or_default();
        Error::invalid(format!("this check needs {expected}, got an ensemble of type '{tag}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_square_wells(5, 3).unwrap(), random_square_wells(5, 3).unwrap());
        assert_ne!(random_square_wells(5, 3).unwrap(), random_square_wells(5, 4).unwrap());
        assert_eq!(
            random_jacobi_pairs(4, 1, 8).unwrap(),
            random_jacobi_pairs(4, 1, 8).unwrap()
        );
    }

    #[test]
    fn pair_perturbation_within_bound() {
        for p in random_square_well_pairs(20, 11, 0.1).unwrap() {
            let d = p.v1.difference(&p.v2).unwrap().besicovitch_norm();
            assert!(d > 0.0 && d <= 0.1 * (1.0 + 1e-12), "{d}");
            assert_eq!(p.v1.period(), p.v2.period());
        }
    }

    #[test]
    fn ensemble_json_round_trip() {
        let e: Ensemble = serde_json::from_str(r#"{"type":"random_square_well_pairs","count":3,"seed":5}"#).unwrap();
        assert_eq!(e.potential_pairs().unwrap().len(), 3);
        assert!(e.potentials().is_err());
        let explicit = Ensemble::Jacobi {
            members: random_jacobi(2, 0, 4).unwrap(),
        };
        let back: Ensemble = serde_json::from_str(&serde_json::to_string(&explicit).unwrap()).unwrap();
        assert_eq!(back, explicit);
    }
}
