//! Bound-constrained minimization of a smooth objective over ordered relay
//! positions.
//!
//! Each sweep visits the relays in order and moves one to the zero of the
//! objective's partial derivative between its neighbours (or to the
//! bracketing neighbour when the derivative has one sign). Derivatives come
//! from central differences, which locate the minimum far more precisely than
//! comparing objective values in the flat region around it.

use crate::error::{ModelError, Result};

/// Stop when no position moves by more than this fraction of the span.
pub const POSITION_TOLERANCE: f64 = 1e-12;
/// Relative objective change below which a sweep counts as stalled.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 20_000;

const STEP_FRACTION: f64 = 1e-6;
const ROOT_ITERATIONS: usize = 200;
/// Sweeps whose objective change is at round-off level before the positions
/// are accepted even though they still move.
const FLAT_SWEEPS: usize = 50;
const FLAT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub positions: Vec<f64>,
    pub objective: f64,
    pub sweeps: usize,
}

/// Minimizes `objective` over `0 <= x_1 <= ... <= x_n <= span`, starting
/// from `start`.
pub fn minimize_ordered<F>(objective: F, start: &[f64], span: f64) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64,
{
    if !(span > 0.0) || !span.is_finite() {
        return Err(ModelError::Domain(format!("span must be positive, got {span}")));
    }
    let mut x: Vec<f64> = start.iter().map(|v| v.clamp(0.0, span)).collect();
    for i in 1..x.len() {
        if x[i] < x[i - 1] {
            x[i] = x[i - 1];
        }
    }
    if x.is_empty() {
        let objective = objective(&x);
        return Ok(Optimum {
            positions: x,
            objective,
            sweeps: 0,
        });
    }

    let h = STEP_FRACTION * span;
    let mut f = objective(&x);
    let mut flat = 0;
    for sweep in 1..=MAX_SWEEPS {
        let mut max_move: f64 = 0.0;
        for k in 0..x.len() {
            let lo = if k == 0 { 0.0 } else { x[k - 1] };
            let hi = if k + 1 == x.len() { span } else { x[k + 1] };
            let before = x[k];
            x[k] = minimize_coordinate(&objective, &mut x.clone(), k, lo, hi, h);
            max_move = max_move.max((x[k] - before).abs());
        }
        let f_new = objective(&x);
        let change = (f - f_new).abs() / f.abs().max(f64::MIN_POSITIVE);
        flat = if change <= FLAT_TOLERANCE { flat + 1 } else { 0 };
        f = f_new;
        if (max_move <= POSITION_TOLERANCE * span && change <= OBJECTIVE_TOLERANCE) || flat >= FLAT_SWEEPS {
            return Ok(Optimum {
                positions: x,
                objective: f,
                sweeps: sweep,
            });
        }
    }
    Err(ModelError::NotConverged {
        best: x,
        objective: f,
        sweeps: MAX_SWEEPS,
    })
}

fn minimize_coordinate<F>(objective: &F, x: &mut [f64], k: usize, lo: f64, hi: f64, h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut eval = |t: f64| {
        x[k] = t;
        objective(x)
    };
    if hi - lo <= 4.0 * h {
        // Too narrow to difference; pick the best of a few points.
        let candidates = [lo, 0.5 * (lo + hi), hi];
        return candidates
            .into_iter()
            .map(|t| (t, eval(t)))
            .fold((lo, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
            .0;
    }
    let mut slope = |t: f64| {
        let (a, b) = if t - h < lo {
            (t, t + h)
        } else if t + h > hi {
            (t - h, t)
        } else {
            (t - h, t + h)
        };
        (eval(b) - eval(a)) / (b - a)
    };

    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (slope(a), slope(b));
    if ga >= 0.0 {
        return lo;
    }
    if gb <= 0.0 {
        return hi;
    }
    // Illinois variant of regula falsi on the derivative.
    let tol = POSITION_TOLERANCE * (hi - lo).max(h);
    let mut side = 0i8;
    let mut t = 0.5 * (a + b);
    for _ in 0..ROOT_ITERATIONS {
        t = (a * gb - b * ga) / (gb - ga);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let gt = slope(t);
        if gt == 0.0 {
            return t;
        }
        if gt < 0.0 {
            a = t;
            ga = gt;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            gb = gt;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if b - a <= tol {
            break;
        }
    }
    t
}
