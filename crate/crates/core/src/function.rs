//! Monotone scalar functions used for mean latencies and variances.
//!
//! Every variant is continuous, non-decreasing and nonnegative on `[0, ∞)`.
//! Each supports exact evaluation and an exact definite integral from zero,
//! which the potential-based solver relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous, non-decreasing, nonnegative function on `[0, ∞)`.
///
/// `PiecewiseLinear` interpolates between breakpoints, is constant at the
/// first breakpoint's value to the left of it, and is extended linearly past
/// the last breakpoint using the slope of the final segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyFn {
    Constant {
        value: f64,
    },
    /// `slope * x + intercept`
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...`
    Polynomial {
        coeffs: Vec<f64>,
    },
    PiecewiseLinear {
        breakpoints: Vec<(f64, f64)>,
    },
}

impl LatencyFn {
    pub fn constant(value: f64) -> Self {
        LatencyFn::Constant { value }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        LatencyFn::Affine { slope, intercept }
    }

    pub fn zero() -> Self {
        LatencyFn::Constant { value: 0.0 }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        LatencyFn::Polynomial { coeffs }
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let f = LatencyFn::PiecewiseLinear { breakpoints };
        f.validate()?;
        Ok(f)
    }

    /// `max(0, slope * (x - threshold))` for `threshold >= 0`.
    ///
    /// Exactly zero on `[0, threshold]`, then linear.
    pub fn hinge(threshold: f64, slope: f64) -> Result<Self> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::Function(format!("hinge threshold {threshold} must be >= 0")));
        }
        let breakpoints = if threshold == 0.0 {
            vec![(0.0, 0.0), (1.0, slope)]
        } else {
            vec![(0.0, 0.0), (threshold, 0.0), (threshold + 1.0, slope)]
        };
        Self::piecewise_linear(breakpoints)
    }

    /// Checks finiteness, nonnegativity and monotonicity.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Function(format!("{what} must be finite, got {v}")))
            }
        };
        match self {
            LatencyFn::Constant { value } => {
                finite(*value, "constant")?;
                if *value < 0.0 {
                    return Err(Error::Function(format!("constant {value} is negative")));
                }
            }
            LatencyFn::Affine { slope, intercept } => {
                finite(*slope, "slope")?;
                finite(*intercept, "intercept")?;
                if *slope < 0.0 || *intercept < 0.0 {
                    return Err(Error::Function(format!(
                        "affine {slope}x + {intercept} needs nonnegative slope and intercept"
                    )));
                }
            }
            LatencyFn::Polynomial { coeffs } => {
                for c in coeffs {
                    finite(*c, "coefficient")?;
                    if *c < 0.0 {
                        return Err(Error::Function(format!("polynomial coefficient {c} is negative")));
                    }
                }
            }
            LatencyFn::PiecewiseLinear { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(Error::Function("piecewise-linear function without breakpoints".into()));
                }
                for &(x, y) in breakpoints {
                    finite(x, "breakpoint x")?;
                    finite(y, "breakpoint y")?;
                }
                if breakpoints[0].0 < 0.0 || breakpoints[0].1 < 0.0 {
                    return Err(Error::Function("first breakpoint must have nonnegative coordinates".into()));
                }
                for w in breakpoints.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::Function(format!(
                            "breakpoint x values must be strictly increasing ({} then {})",
                            w[0].0, w[1].0
                        )));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::Function(format!(
                            "breakpoint y values must be non-decreasing ({} then {})",
                            w[0].1, w[1].1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LatencyFn::Constant { value } => *value,
            LatencyFn::Affine { slope, intercept } => slope * x + intercept,
            LatencyFn::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            LatencyFn::PiecewiseLinear { breakpoints } => pwl_eval(breakpoints, x),
        }
    }

    /// `∫_0^x f(u) du` for `x >= 0`.
    pub fn integral(&self, x: f64) -> f64 {
        match self {
            LatencyFn::Constant { value } => value * x,
            LatencyFn::Affine { slope, intercept } => 0.5 * slope * x * x + intercept * x,
            LatencyFn::Polynomial { coeffs } => {
                coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64) * x
            }
            LatencyFn::PiecewiseLinear { breakpoints } => pwl_integral(breakpoints, x),
        }
    }

    /// True when the function takes the same value everywhere on `[0, ∞)`.
    pub fn is_constant(&self) -> bool {
        match self {
            LatencyFn::Constant { .. } => true,
            LatencyFn::Affine { slope, .. } => *slope == 0.0,
            LatencyFn::Polynomial { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            LatencyFn::PiecewiseLinear { breakpoints } => {
                breakpoints.first().map(|b| b.1) == breakpoints.last().map(|b| b.1)
            }
        }
    }
}

fn pwl_slope(bp: &[(f64, f64)], seg: usize) -> f64 {
    let (x0, y0) = bp[seg];
    let (x1, y1) = bp[seg + 1];
    (y1 - y0) / (x1 - x0)
}

fn pwl_eval(bp: &[(f64, f64)], x: f64) -> f64 {
    let (x_first, y_first) = bp[0];
    if bp.len() == 1 || x <= x_first {
        return y_first;
    }
    // k >= 1: index of the first breakpoint strictly right of x
    let k = bp.partition_point(|&(bx, _)| bx <= x);
    if bp[k - 1].0 == x {
        return bp[k - 1].1;
    }
    let seg = (k - 1).min(bp.len() - 2);
    let (x0, y0) = bp[seg];
    y0 + pwl_slope(bp, seg) * (x - x0)
}

fn pwl_integral(bp: &[(f64, f64)], x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (x_first, y_first) = bp[0];
    if bp.len() == 1 || x <= x_first {
        return y_first * x;
    }
    let mut total = y_first * x_first;
    for seg in 0..bp.len() - 1 {
        let (x0, y0) = bp[seg];
        let last = seg + 2 == bp.len();
        let x1 = if last { x } else { bp[seg + 1].0.min(x) };
        if x1 <= x0 {
            break;
        }
        let y1 = y0 + pwl_slope(bp, seg) * (x1 - x0);
        total += 0.5 * (y0 + y1) * (x1 - x0);
        if x1 >= x {
            break;
        }
    }
    total
}
