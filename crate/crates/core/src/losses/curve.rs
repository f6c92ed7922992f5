//! Loss-curve sampling for external plotting.

use super::{LossError, LossSpec};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub y_hat: f64,
    pub loss: f64,
    pub grad: f64,
}

/// Uniform samples of (ŷ, loss, grad) over the clamped domain for one target.
pub fn export_loss_curve(
    spec: &LossSpec,
    y: f64,
    n_points: usize,
) -> Result<Vec<CurveRow>, LossError> {
    spec.validate()?;
    if n_points < 2 {
        return Err(LossError::InvalidSpec(format!(
            "curve needs at least 2 points, got {n_points}"
        )));
    }
    let lo = spec.eps_clamp;
    let hi = 1.0 - spec.eps_clamp;
    (0..n_points)
        .map(|i| {
            let y_hat = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
            Ok(CurveRow {
                y_hat,
                loss: spec.eval(y, y_hat)?,
                grad: spec.grad(y, y_hat)?,
            })
        })
        .collect()
}

/// Writes `y_hat,loss,grad` rows in decimal notation with 17 significant
/// digits.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "y_hat,loss,grad")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{}",
            fmt_sig17(row.y_hat),
            fmt_sig17(row.loss),
            fmt_sig17(row.grad)
        )?;
    }
    Ok(())
}

/// Decimal (non-scientific) rendering with 17 significant digits, enough to
/// round-trip any finite f64.
pub(crate) fn fmt_sig17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(0, 340) as usize;
    format!("{v:.decimals$}")
}
