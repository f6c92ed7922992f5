//! The loss catalogue: cross-entropy plus the eight alternate classification
//! losses, with hand-derived closed-form gradients.
//!
//! Every loss is a function of a binary target `y ∈ {0, 1}` and a predicted
//! probability `ŷ ∈ (0, 1)`. Predictions are clamped to
//! `[eps_clamp, 1 - eps_clamp]` before evaluation since every formula in the
//! catalogue is singular at one or both endpoints.

mod curve;
mod probe;
mod strict;

pub use curve::{export_loss_curve, write_curve_csv, CurveRow};
pub use probe::{probe_properties, PropertyCheck, PropertyReport, ProbeTolerances, Witness};
pub use strict::{
    compare_strictness, InterpretationVerdict, StrictnessRegion, StrictnessReport,
    StrictnessVerdict,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt;
use thiserror::Error;

pub const DEFAULT_EPS_CLAMP: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("invalid loss spec: {0}")]
    InvalidSpec(String),
    #[error("target must be exactly 0 or 1, got {0}")]
    InvalidTarget(f64),
    #[error("dimension mismatch: {targets} targets vs {outputs} outputs")]
    DimensionMismatch { targets: usize, outputs: usize },
    #[error("targets are not a one-hot vector")]
    NotOneHot,
    #[error("strictness region is empty")]
    EmptyRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    CrossEntropy,
    M,
    L,
    Tan,
    Sec,
    ParamM,
    ParamL,
    TwoParamL,
    ParamLog,
}

impl LossFamily {
    pub const ALL: [LossFamily; 9] = [
        LossFamily::CrossEntropy,
        LossFamily::M,
        LossFamily::L,
        LossFamily::Tan,
        LossFamily::Sec,
        LossFamily::ParamM,
        LossFamily::ParamL,
        LossFamily::TwoParamL,
        LossFamily::ParamLog,
    ];

    pub fn has_alpha(self) -> bool {
        matches!(
            self,
            LossFamily::ParamM | LossFamily::ParamL | LossFamily::TwoParamL | LossFamily::ParamLog
        )
    }

    pub fn has_beta(self) -> bool {
        self == LossFamily::TwoParamL
    }

    pub fn parse(name: &str) -> Option<LossFamily> {
        match name.to_ascii_lowercase().as_str() {
            "cross_entropy" | "crossentropy" | "ce" | "bce" => Some(LossFamily::CrossEntropy),
            "m" => Some(LossFamily::M),
            "l" => Some(LossFamily::L),
            "tan" => Some(LossFamily::Tan),
            "sec" => Some(LossFamily::Sec),
            "param_m" | "parametrized_m" | "paramm" => Some(LossFamily::ParamM),
            "param_l" | "parametrized_l" | "paraml" => Some(LossFamily::ParamL),
            "two_param_l" | "twoparaml" => Some(LossFamily::TwoParamL),
            "param_log" | "parametrized_log" | "paramlog" | "parametrized_cross_entropy" => {
                Some(LossFamily::ParamLog)
            }
            _ => None,
        }
    }
}

impl fmt::Display for LossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LossFamily::CrossEntropy => "cross_entropy",
            LossFamily::M => "m",
            LossFamily::L => "l",
            LossFamily::Tan => "tan",
            LossFamily::Sec => "sec",
            LossFamily::ParamM => "param_m",
            LossFamily::ParamL => "param_l",
            LossFamily::TwoParamL => "two_param_l",
            LossFamily::ParamLog => "param_log",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    SingleSided,
    Full,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::SingleSided => f.write_str("single"),
            Variant::Full => f.write_str("full"),
        }
    }
}

/// One fully-parameterized loss: family, variant, parameters and the clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub family: LossFamily,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_eps_clamp")]
    pub eps_clamp: f64,
}

fn default_eps_clamp() -> f64 {
    DEFAULT_EPS_CLAMP
}

impl LossSpec {
    /// Builds a spec with default parameters for the parametrized families
    /// (alpha = 2 for ParamM/ParamL/TwoParamL, beta = 0.5, log base e).
    pub fn new(family: LossFamily, variant: Variant) -> Result<LossSpec, LossError> {
        let alpha = match family {
            LossFamily::ParamM | LossFamily::ParamL | LossFamily::TwoParamL => Some(2.0),
            LossFamily::ParamLog => Some(E),
            _ => None,
        };
        let beta = if family == LossFamily::TwoParamL {
            Some(0.5)
        } else {
            None
        };
        LossSpec::custom(family, variant, alpha, beta, DEFAULT_EPS_CLAMP)
    }

    pub fn custom(
        family: LossFamily,
        variant: Variant,
        alpha: Option<f64>,
        beta: Option<f64>,
        eps_clamp: f64,
    ) -> Result<LossSpec, LossError> {
        let spec = LossSpec {
            family,
            variant,
            alpha,
            beta,
            eps_clamp,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), LossError> {
        if !(self.eps_clamp > 0.0 && self.eps_clamp < 0.5) {
            return Err(LossError::InvalidSpec(format!(
                "eps_clamp must lie in (0, 0.5), got {}",
                self.eps_clamp
            )));
        }
        if self.family == LossFamily::Sec && self.variant == Variant::SingleSided {
            return Err(LossError::InvalidSpec(
                "Sec loss has no single-sided variant".into(),
            ));
        }
        match (self.family.has_alpha(), self.alpha) {
            (true, None) => {
                return Err(LossError::InvalidSpec(format!(
                    "{} requires alpha",
                    self.family
                )))
            }
            (true, Some(a)) => {
                if self.family == LossFamily::ParamLog {
                    if a == 1.0 {
                        return Err(LossError::InvalidSpec(
                            "alpha must not equal 1 (it is the logarithm base)".into(),
                        ));
                    }
                    if !(a > 1.0) {
                        return Err(LossError::InvalidSpec(format!(
                            "alpha must exceed 1 for param_log (bases in (0,1) flip the loss sign), got {a}"
                        )));
                    }
                } else if !(a > 0.0) {
                    return Err(LossError::InvalidSpec(format!(
                        "alpha must be positive, got {a}"
                    )));
                }
            }
            (false, Some(_)) => {
                return Err(LossError::InvalidSpec(format!(
                    "{} takes no alpha parameter",
                    self.family
                )))
            }
            (false, None) => {}
        }
        match (self.family.has_beta(), self.beta) {
            (true, None) => {
                return Err(LossError::InvalidSpec("two_param_l requires beta".into()))
            }
            (true, Some(b)) if !(b > 0.0) => {
                return Err(LossError::InvalidSpec(format!(
                    "beta must be positive, got {b}"
                )))
            }
            (false, Some(_)) => {
                return Err(LossError::InvalidSpec(format!(
                    "{} takes no beta parameter",
                    self.family
                )))
            }
            _ => {}
        }
        Ok(())
    }

    /// Stable name used in reports and CSV exports, e.g. `m_full` or
    /// `two_param_l_full(a=2,b=0.5)`.
    pub fn name(&self) -> String {
        let base = format!("{}_{}", self.family, self.variant);
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => format!("{base}(a={a},b={b})"),
            (Some(a), None) => format!("{base}(a={a})"),
            _ => base,
        }
    }

    pub fn clamp(&self, y_hat: f64) -> f64 {
        y_hat.clamp(self.eps_clamp, 1.0 - self.eps_clamp)
    }

    pub fn point(&self, y: f64, y_hat: f64) -> Result<LossPoint, LossError> {
        LossPoint::new(self, y, y_hat)
    }

    /// l(y, ŷ) with clamping applied to ŷ.
    pub fn eval(&self, y: f64, y_hat: f64) -> Result<f64, LossError> {
        Ok(self.eval_at(self.point(y, y_hat)?))
    }

    /// ∂l/∂ŷ with clamping applied to ŷ.
    pub fn grad(&self, y: f64, y_hat: f64) -> Result<f64, LossError> {
        Ok(self.grad_at(self.point(y, y_hat)?))
    }

    pub fn eval_at(&self, p: LossPoint) -> f64 {
        let kernel = Kernel::of(self);
        match (self.variant, p.target_is_one()) {
            (_, true) => kernel.term1(p.y_hat) - kernel.bias,
            (Variant::Full, false) => kernel.term0(p.y_hat) - kernel.bias,
            (Variant::SingleSided, false) => 0.0,
        }
    }

    pub fn grad_at(&self, p: LossPoint) -> f64 {
        let kernel = Kernel::of(self);
        match (self.variant, p.target_is_one()) {
            (_, true) => kernel.dterm1(p.y_hat),
            (Variant::Full, false) => kernel.dterm0(p.y_hat),
            (Variant::SingleSided, false) => 0.0,
        }
    }
}

/// A validated (target, clamped prediction) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub y: f64,
    pub y_hat: f64,
}

impl LossPoint {
    pub fn new(spec: &LossSpec, y: f64, y_hat: f64) -> Result<LossPoint, LossError> {
        if y != 0.0 && y != 1.0 {
            return Err(LossError::InvalidTarget(y));
        }
        Ok(LossPoint {
            y,
            y_hat: spec.clamp(y_hat),
        })
    }

    fn target_is_one(&self) -> bool {
        self.y == 1.0
    }
}

/// Per-family y=1 / y=0 penalty terms and their derivatives in ŷ.
///
/// Every catalogue loss decomposes as `y·term1(ŷ) + (1-y)·term0(ŷ) - bias`,
/// with `bias` chosen so the loss is zero at the target. Single-sided
/// variants drop the term0 contribution and place the bias inside the
/// y-multiplied part so that l(0, ŷ) = 0 exactly.
struct Kernel {
    alpha: f64,
    beta: f64,
    bias: f64,
    family: LossFamily,
}

impl Kernel {
    fn of(spec: &LossSpec) -> Kernel {
        let bias = match spec.family {
            LossFamily::CrossEntropy | LossFamily::Tan | LossFamily::ParamLog => 0.0,
            _ => 1.0,
        };
        Kernel {
            alpha: spec.alpha.unwrap_or(1.0),
            beta: spec.beta.unwrap_or(1.0),
            bias,
            family: spec.family,
        }
    }

    fn term1(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            LossFamily::CrossEntropy => -p.ln(),
            LossFamily::M => 1.0 / p,
            LossFamily::L => 1.0 / one_minus_cpow(p, 2.0).sqrt(),
            LossFamily::Tan => (PI * (1.0 - p) / 2.0).tan(),
            LossFamily::Sec => 1.0 / (PI * p / 2.0).sin(),
            LossFamily::ParamM => p.powf(-a),
            LossFamily::ParamL => 1.0 / one_minus_cpow(p, a).sqrt(),
            LossFamily::TwoParamL => recip_pow(one_minus_cpow(p, a), b),
            LossFamily::ParamLog => -p.ln() / a.ln(),
        }
    }

    fn term0(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            LossFamily::CrossEntropy => -(1.0 - p).ln(),
            LossFamily::M => 1.0 / (1.0 - p),
            LossFamily::L => 1.0 / one_minus_cpow(1.0 - p, 2.0).sqrt(),
            LossFamily::Tan => (PI * p / 2.0).tan(),
            LossFamily::Sec => 1.0 / (PI * p / 2.0).cos(),
            LossFamily::ParamM => (1.0 - p).powf(-a),
            LossFamily::ParamL => 1.0 / one_minus_cpow(1.0 - p, a).sqrt(),
            LossFamily::TwoParamL => recip_pow(one_minus_cpow(1.0 - p, a), b),
            LossFamily::ParamLog => -(1.0 - p).ln() / a.ln(),
        }
    }

    fn dterm1(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            LossFamily::CrossEntropy => -1.0 / p,
            LossFamily::M => -1.0 / (p * p),
            LossFamily::L => -(1.0 - p) * one_minus_cpow(p, 2.0).powf(-1.5),
            LossFamily::Tan => {
                let c = (PI * (1.0 - p) / 2.0).cos();
                -(PI / 2.0) / (c * c)
            }
            LossFamily::Sec => {
                let t = PI * p / 2.0;
                -(PI / 2.0) * t.cos() / (t.sin() * t.sin())
            }
            LossFamily::ParamM => -a * p.powf(-a - 1.0),
            LossFamily::ParamL => {
                -(a / 2.0) * (1.0 - p).powf(a - 1.0) * one_minus_cpow(p, a).powf(-1.5)
            }
            LossFamily::TwoParamL => {
                -a * b * (1.0 - p).powf(a - 1.0) * one_minus_cpow(p, a).powf(-b - 1.0)
            }
            LossFamily::ParamLog => -1.0 / (p * a.ln()),
        }
    }

    fn dterm0(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            LossFamily::CrossEntropy => 1.0 / (1.0 - p),
            LossFamily::M => (1.0 - p).powi(-2),
            LossFamily::L => p * one_minus_cpow(1.0 - p, 2.0).powf(-1.5),
            LossFamily::Tan => {
                let c = (PI * p / 2.0).cos();
                (PI / 2.0) / (c * c)
            }
            LossFamily::Sec => {
                let t = PI * p / 2.0;
                (PI / 2.0) * t.sin() / (t.cos() * t.cos())
            }
            LossFamily::ParamM => a * (1.0 - p).powf(-a - 1.0),
            LossFamily::ParamL => {
                (a / 2.0) * p.powf(a - 1.0) * one_minus_cpow(1.0 - p, a).powf(-1.5)
            }
            LossFamily::TwoParamL => {
                a * b * p.powf(a - 1.0) * one_minus_cpow(1.0 - p, a).powf(-b - 1.0)
            }
            LossFamily::ParamLog => 1.0 / ((1.0 - p) * a.ln()),
        }
    }
}

/// `1 - (1 - x)^a` without catastrophic cancellation for small x.
fn one_minus_cpow(x: f64, a: f64) -> f64 {
    -(a * (-x).ln_1p()).exp_m1()
}

/// `u^(-b)`, routing b = 0.5 through sqrt: sqrt is correctly rounded
/// where powf is not, so the beta = 0.5 case lands on the same bits as
/// the square-root losses.
fn recip_pow(u: f64, b: f64) -> f64 {
    if b == 0.5 {
        1.0 / u.sqrt()
    } else {
        u.powf(-b)
    }
}

/// Sum of per-component losses for a one-hot target and a probability vector.
pub fn multiclass_loss(
    spec: &LossSpec,
    targets: &[f64],
    outputs: &[f64],
) -> Result<f64, LossError> {
    check_multiclass(targets, outputs)?;
    let mut total = 0.0;
    for (&t, &o) in targets.iter().zip(outputs) {
        total += spec.eval_at(spec.point(t, o)?);
    }
    Ok(total)
}

/// Componentwise ∂(multiclass loss)/∂ŷ_j.
pub fn multiclass_grad(
    spec: &LossSpec,
    targets: &[f64],
    outputs: &[f64],
) -> Result<Vec<f64>, LossError> {
    check_multiclass(targets, outputs)?;
    targets
        .iter()
        .zip(outputs)
        .map(|(&t, &o)| Ok(spec.grad_at(spec.point(t, o)?)))
        .collect()
}

fn check_multiclass(targets: &[f64], outputs: &[f64]) -> Result<(), LossError> {
    if targets.len() != outputs.len() {
        return Err(LossError::DimensionMismatch {
            targets: targets.len(),
            outputs: outputs.len(),
        });
    }
    let mut ones = 0usize;
    for &t in targets {
        if t == 1.0 {
            ones += 1;
        } else if t != 0.0 {
            return Err(LossError::NotOneHot);
        }
    }
    if ones != 1 {
        return Err(LossError::NotOneHot);
    }
    Ok(())
}

/// The full 16-entry catalogue: the 7 single-sided losses, the 8 full losses
/// (parametrized cross-entropy included as full param_log), and the baseline
/// full cross-entropy. Parametrized families carry their default parameters.
pub fn catalogue() -> Vec<LossSpec> {
    let singles = [
        LossFamily::M,
        LossFamily::L,
        LossFamily::ParamM,
        LossFamily::Tan,
        LossFamily::ParamL,
        LossFamily::TwoParamL,
        LossFamily::ParamLog,
    ];
    let fulls = [
        LossFamily::CrossEntropy,
        LossFamily::M,
        LossFamily::L,
        LossFamily::Tan,
        LossFamily::Sec,
        LossFamily::ParamM,
        LossFamily::ParamL,
        LossFamily::TwoParamL,
        LossFamily::ParamLog,
    ];
    singles
        .iter()
        .map(|&f| LossSpec::new(f, Variant::SingleSided).expect("valid catalogue entry"))
        .chain(
            fulls
                .iter()
                .map(|&f| LossSpec::new(f, Variant::Full).expect("valid catalogue entry")),
        )
        .collect()
}

#[cfg(test)]
mod tests;
