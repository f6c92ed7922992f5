//! Numerical probes for the loss axioms: zero at the target, convexity,
//! divergence toward the wrong target, and analytic-vs-numeric gradient
//! agreement.

use serde::Serialize;

use super::{LossError, LossSpec, Variant};

/// Thresholds for the four probes.
///
/// The divergence check accepts either the loss value or the gradient
/// magnitude exceeding the threshold at the clamp boundary: log-family
/// losses diverge too slowly for a pure value test at eps_clamp = 1e-7
/// (-ln(1e-7) ≈ 16) while their gradients blow up like 1/eps.
#[derive(Debug, Clone, Copy)]
pub struct ProbeTolerances {
    pub zero_at_target: f64,
    pub convexity_slack: f64,
    pub divergence_threshold: f64,
    pub grad_rel: f64,
    /// Central-difference step for the gradient probe.
    pub fd_step: f64,
    /// Gradient agreement is only checked at grid points at least this far
    /// from the clamp boundary; the stencil must fit inside the domain and
    /// stay out of the region where the losses vary on sub-step scales.
    pub fd_margin: f64,
}

impl Default for ProbeTolerances {
    fn default() -> Self {
        ProbeTolerances {
            zero_at_target: 1e-5,
            convexity_slack: 1e-6,
            divergence_threshold: 1e3,
            grad_rel: 1e-5,
            fd_step: 1e-6,
            fd_margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub y: f64,
    pub y_hat: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub loss_name: String,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const MAX_WITNESSES: usize = 5;

fn grid(spec: &LossSpec, n: usize) -> Vec<f64> {
    let lo = spec.eps_clamp;
    let hi = 1.0 - spec.eps_clamp;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn probe_properties(
    spec: &LossSpec,
    grid_size: usize,
) -> Result<PropertyReport, LossError> {
    probe_properties_with(spec, grid_size, &ProbeTolerances::default())
}

pub fn probe_properties_with(
    spec: &LossSpec,
    grid_size: usize,
    tol: &ProbeTolerances,
) -> Result<PropertyReport, LossError> {
    spec.validate()?;
    if grid_size < 16 {
        return Err(LossError::InvalidSpec(format!(
            "probe grid_size must be at least 16, got {grid_size}"
        )));
    }
    let points = grid(spec, grid_size);
    let checks = vec![
        check_zero_at_target(spec, &points, tol),
        check_convexity(spec, &points, tol),
        check_divergence(spec, &points, tol),
        check_gradient(spec, &points, tol),
    ];
    Ok(PropertyReport {
        loss_name: spec.name(),
        checks,
    })
}

fn push_witness(ws: &mut Vec<Witness>, y: f64, y_hat: f64, detail: String) {
    if ws.len() < MAX_WITNESSES {
        ws.push(Witness { y, y_hat, detail });
    }
}

fn check_zero_at_target(spec: &LossSpec, points: &[f64], tol: &ProbeTolerances) -> PropertyCheck {
    let mut ws = Vec::new();
    let at_one = spec.eval(1.0, 1.0 - spec.eps_clamp).unwrap();
    if at_one.abs() >= tol.zero_at_target {
        push_witness(
            &mut ws,
            1.0,
            1.0 - spec.eps_clamp,
            format!("l(1, 1-eps) = {at_one:.3e}"),
        );
    }
    match spec.variant {
        Variant::Full => {
            let at_zero = spec.eval(0.0, spec.eps_clamp).unwrap();
            if at_zero.abs() >= tol.zero_at_target {
                push_witness(
                    &mut ws,
                    0.0,
                    spec.eps_clamp,
                    format!("l(0, eps) = {at_zero:.3e}"),
                );
            }
        }
        Variant::SingleSided => {
            for &p in points {
                let v = spec.eval(0.0, p).unwrap();
                if v != 0.0 {
                    push_witness(&mut ws, 0.0, p, format!("l(0, y_hat) = {v:.3e}, expected 0"));
                }
            }
        }
    }
    PropertyCheck {
        name: "zero_at_target",
        passed: ws.is_empty(),
        witnesses: ws,
    }
}

fn check_convexity(spec: &LossSpec, points: &[f64], tol: &ProbeTolerances) -> PropertyCheck {
    let mut ws = Vec::new();
    for y in targets_for(spec) {
        let values: Vec<f64> = points.iter().map(|&p| spec.eval(y, p).unwrap()).collect();
        for i in 1..points.len() - 1 {
            let second = values[i - 1] - 2.0 * values[i] + values[i + 1];
            if second < -tol.convexity_slack {
                push_witness(
                    &mut ws,
                    y,
                    points[i],
                    format!("second difference {second:.3e}"),
                );
            }
        }
    }
    PropertyCheck {
        name: "convexity",
        passed: ws.is_empty(),
        witnesses: ws,
    }
}

fn check_divergence(spec: &LossSpec, points: &[f64], tol: &ProbeTolerances) -> PropertyCheck {
    let mut ws = Vec::new();
    for y in targets_for(spec) {
        let values: Vec<f64> = points.iter().map(|&p| spec.eval(y, p).unwrap()).collect();
        // monotone toward the wrong target: decreasing in y_hat when y=1,
        // increasing when y=0
        for i in 0..points.len() - 1 {
            let ok = if y == 1.0 {
                values[i + 1] < values[i]
            } else {
                values[i + 1] > values[i]
            };
            if !ok {
                push_witness(
                    &mut ws,
                    y,
                    points[i],
                    format!("not strictly monotone: l = {} then {}", values[i], values[i + 1]),
                );
            }
        }
        let boundary = if y == 1.0 { points[0] } else { *points.last().unwrap() };
        let loss = spec.eval(y, boundary).unwrap();
        let grad = spec.grad(y, boundary).unwrap().abs();
        if loss <= tol.divergence_threshold && grad <= tol.divergence_threshold {
            push_witness(
                &mut ws,
                y,
                boundary,
                format!("boundary loss {loss:.3e} and |grad| {grad:.3e} both below threshold"),
            );
        }
    }
    PropertyCheck {
        name: "divergence",
        passed: ws.is_empty(),
        witnesses: ws,
    }
}

fn check_gradient(spec: &LossSpec, points: &[f64], tol: &ProbeTolerances) -> PropertyCheck {
    let mut ws = Vec::new();
    let h = tol.fd_step;
    for y in targets_for(spec) {
        for &p in points {
            if p < tol.fd_margin || p > 1.0 - tol.fd_margin {
                continue;
            }
            let analytic = spec.grad(y, p).unwrap();
            let fd =
                (spec.eval(y, p + h).unwrap() - spec.eval(y, p - h).unwrap()) / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
            if rel >= tol.grad_rel {
                push_witness(
                    &mut ws,
                    y,
                    p,
                    format!("analytic {analytic:.6e} vs finite-difference {fd:.6e} (rel {rel:.3e})"),
                );
            }
        }
    }
    PropertyCheck {
        name: "gradient_check",
        passed: ws.is_empty(),
        witnesses: ws,
    }
}

fn targets_for(spec: &LossSpec) -> Vec<f64> {
    match spec.variant {
        Variant::Full => vec![0.0, 1.0],
        // single-sided losses are identically zero at y=0
        Variant::SingleSided => vec![1.0],
    }
}
