//! Strictness comparison between two losses by gradient dominance on a grid.
//!
//! Two readings are reported. The literal one compares signed gradients
//! componentwise; for y = 1 both gradients are negative, so literal dominance
//! means the *shallower* loss wins. The magnitude reading compares |∂l/∂ŷ|
//! and matches the intuition that a stricter loss penalizes wrong outputs
//! more steeply. Both verdicts are returned side by side.

use serde::Serialize;

use super::{LossError, LossSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrictnessVerdict {
    L1Stricter,
    L2Stricter,
    /// Gradients agree everywhere on the grid (within relative tolerance).
    Equal,
    /// Each loss dominates somewhere; witnesses carry one point per side.
    Incomparable,
}

impl std::fmt::Display for StrictnessVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StrictnessVerdict::L1Stricter => "l1_stricter",
            StrictnessVerdict::L2Stricter => "l2_stricter",
            StrictnessVerdict::Equal => "equal",
            StrictnessVerdict::Incomparable => "incomparable",
        };
        f.write_str(s)
    }
}

/// Evaluation grid: `points` samples of ŷ over [lo, hi] for each target in
/// `targets`.
#[derive(Debug, Clone)]
pub struct StrictnessRegion {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub targets: Vec<f64>,
}

impl StrictnessRegion {
    pub fn both_targets(lo: f64, hi: f64, points: usize) -> StrictnessRegion {
        StrictnessRegion {
            lo,
            hi,
            points,
            targets: vec![0.0, 1.0],
        }
    }

    pub fn target_one(lo: f64, hi: f64, points: usize) -> StrictnessRegion {
        StrictnessRegion {
            lo,
            hi,
            points,
            targets: vec![1.0],
        }
    }
}

/// A grid point where one side's gradient strictly exceeded the other's.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceWitness {
    pub y: f64,
    pub y_hat: f64,
    pub g1: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpretationVerdict {
    pub verdict: StrictnessVerdict,
    /// Points where l1 strictly dominated (first few).
    pub l1_witnesses: Vec<DominanceWitness>,
    /// Points where l2 strictly dominated (first few).
    pub l2_witnesses: Vec<DominanceWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictnessReport {
    pub l1_name: String,
    pub l2_name: String,
    /// Signed comparison, the definition read literally.
    pub literal: InterpretationVerdict,
    /// |gradient| comparison.
    pub magnitude: InterpretationVerdict,
}

const EQUALITY_REL_TOL: f64 = 1e-12;
const MAX_WITNESSES: usize = 5;

pub fn compare_strictness(
    l1: &LossSpec,
    l2: &LossSpec,
    region: &StrictnessRegion,
) -> Result<StrictnessReport, LossError> {
    l1.validate()?;
    l2.validate()?;
    if region.points == 0 || region.targets.is_empty() || !(region.lo < region.hi) {
        return Err(LossError::EmptyRegion);
    }
    let mut samples = Vec::with_capacity(region.points * region.targets.len());
    for &y in &region.targets {
        for i in 0..region.points {
            let y_hat = if region.points == 1 {
                region.lo
            } else {
                region.lo + (region.hi - region.lo) * i as f64 / (region.points - 1) as f64
            };
            let g1 = l1.grad(y, y_hat)?;
            let g2 = l2.grad(y, y_hat)?;
            samples.push((y, y_hat, g1, g2));
        }
    }
    Ok(StrictnessReport {
        l1_name: l1.name(),
        l2_name: l2.name(),
        literal: classify(&samples, |g| g),
        magnitude: classify(&samples, f64::abs),
    })
}

fn classify(samples: &[(f64, f64, f64, f64)], map: impl Fn(f64) -> f64) -> InterpretationVerdict {
    let mut l1_witnesses = Vec::new();
    let mut l2_witnesses = Vec::new();
    for &(y, y_hat, g1, g2) in samples {
        let (v1, v2) = (map(g1), map(g2));
        let tol = EQUALITY_REL_TOL * v1.abs().max(v2.abs()).max(1.0);
        let witness = DominanceWitness { y, y_hat, g1, g2 };
        if v1 > v2 + tol {
            if l1_witnesses.len() < MAX_WITNESSES {
                l1_witnesses.push(witness);
            }
        } else if v2 > v1 + tol && l2_witnesses.len() < MAX_WITNESSES {
            l2_witnesses.push(witness);
        }
    }
    let verdict = match (!l1_witnesses.is_empty(), !l2_witnesses.is_empty()) {
        (false, false) => StrictnessVerdict::Equal,
        (true, false) => StrictnessVerdict::L1Stricter,
        (false, true) => StrictnessVerdict::L2Stricter,
        (true, true) => StrictnessVerdict::Incomparable,
    };
    InterpretationVerdict {
        verdict,
        l1_witnesses,
        l2_witnesses,
    }
}
