use crate::error::{Error, Result};
use crate::function::LatencyFn;
use crate::network::{EdgeFlow, NetworkInstance};

const GOLDEN_TOL: f64 = 1e-10;

/// `h(y) = y (ℓ(x) − ℓ(y))`
fn h(f: &LatencyFn, lx: f64, y: f64) -> f64 {
    y * (lx - f.eval(y))
}

fn golden_max(f: &LatencyFn, lx: f64, lo: f64, hi: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut hc, mut hd) = (h(f, lx, c), h(f, lx, d));
    while b - a > GOLDEN_TOL * hi.max(1e-300) {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - phi * (b - a);
            hc = h(f, lx, c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + phi * (b - a);
            hd = h(f, lx, d);
        }
    }
    h(f, lx, 0.5 * (a + b)).max(hc).max(hd)
}

/// Smallest μ with `y ℓ(x) ≤ y ℓ(y) + μ x ℓ(x)` for all `y ≥ 0`:
/// `sup_{0≤y≤x} y (ℓ(x) − ℓ(y)) / (x ℓ(x))`.
///
/// Exact for constant, affine and piecewise-linear functions, where the
/// supremum sits at a breakpoint or at a stationary point inside a linear
/// piece. Polynomials use golden-section search, which is valid because
/// `h` is concave for nonnegative coefficients.
pub fn estimate_smoothness_mu(f: &LatencyFn, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Parameter(format!("smoothness needs x > 0, got {x}")));
    }
    let lx = f.eval(x);
    if !(lx > 0.0) {
        return Err(Error::Undefined(format!("smoothness undefined where latency is {lx} at x = {x}")));
    }
    let best = match f {
        LatencyFn::Polynomial { .. } => golden_max(f, lx, 0.0, x),
        LatencyFn::Constant { .. } => 0.0,
        LatencyFn::Affine { .. } => linear_pieces_max(f, lx, &[0.0, x]),
        LatencyFn::PiecewiseLinear { breakpoints } => {
            let mut pts = vec![0.0];
            pts.extend(breakpoints.iter().map(|&(bx, _)| bx).filter(|&bx| bx > 0.0 && bx < x));
            pts.push(x);
            linear_pieces_max(f, lx, &pts)
        }
    };
    Ok((best / (x * lx)).max(0.0))
}

/// Max of `h` over consecutive intervals on which `f` is affine.
fn linear_pieces_max(f: &LatencyFn, lx: f64, pts: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (fp, fq) = (f.eval(p), f.eval(q));
        best = best.max(h(f, lx, p)).max(h(f, lx, q));
        let m = (fq - fp) / (q - p);
        if m > 0.0 {
            let c = fp - m * p;
            let y = (lx - c) / (2.0 * m);
            if y > p && y < q {
                // exact on the piece: y (lx − c − m y)
                best = best.max(y * (lx - c - m * y));
            }
        }
    }
    best
}

/// Worst-case μ of `x^p` over all `x`: `p (p+1)^{−(p+1)/p}`.
pub fn polynomial_mu(degree: u32) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    let p = degree as f64;
    p * (p + 1.0).powf(-(p + 1.0) / p)
}

/// Max of [`estimate_smoothness_mu`] over edges with positive flow and
/// positive latency. Edges with zero latency at their flow satisfy the
/// smoothness inequality for every μ and are skipped.
pub fn instance_mu(instance: &NetworkInstance, flow: &EdgeFlow) -> Result<f64> {
    let mut mu = 0.0f64;
    for (e, edge) in instance.edges().iter().enumerate() {
        let x = flow.get(e);
        if x > 0.0 && edge.latency.eval(x) > 0.0 {
            mu = mu.max(estimate_smoothness_mu(&edge.latency, x)?);
        }
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &LatencyFn, x: f64) -> f64 {
        let lx = f.eval(x);
        (0..=200_000).map(|k| h(f, lx, x * k as f64 / 200_000.0)).fold(0.0, f64::max) / (x * lx)
    }

    #[test]
    fn identity_is_one_quarter() {
        for x in [0.1, 1.0, 7.5] {
            let mu = estimate_smoothness_mu(&LatencyFn::affine(1.0, 0.0), x).unwrap();
            assert!((mu - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_is_zero() {
        assert_eq!(estimate_smoothness_mu(&LatencyFn::constant(3.0), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_latency_is_undefined() {
        let f = LatencyFn::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert!(matches!(estimate_smoothness_mu(&f, 0.5), Err(Error::Undefined(_))));
        assert!(estimate_smoothness_mu(&f, 0.0).is_err());
    }

    #[test]
    fn affine_with_intercept_matches_grid() {
        let f = LatencyFn::affine(2.0, 1.0);
        let mu = estimate_smoothness_mu(&f, 1.5).unwrap();
        assert!((mu - brute(&f, 1.5)).abs() < 1e-9);
    }

    #[test]
    fn threshold_function_hits_breakpoint_ratio() {
        // zero up to 1/4 then linear to (1/3, 1): μ = (1/4)/(1/3)
        let f = LatencyFn::piecewise_linear(vec![(0.0, 0.0), (0.25, 0.0), (1.0 / 3.0, 1.0)]).unwrap();
        let mu = estimate_smoothness_mu(&f, 1.0 / 3.0).unwrap();
        assert!((mu - 0.75).abs() < 1e-12);
    }

    #[test]
    fn polynomial_matches_closed_form() {
        for p in 1..=4u32 {
            let mut coeffs = vec![0.0; p as usize + 1];
            coeffs[p as usize] = 1.0;
            let f = LatencyFn::polynomial(coeffs);
            let mu = estimate_smoothness_mu(&f, 2.0).unwrap();
            assert!((mu - polynomial_mu(p)).abs() < 1e-12, "p = {p}");
        }
        let inv: Vec<f64> = (2..=4).map(|p| 1.0 / (1.0 - polynomial_mu(p))).collect();
        assert!((inv[0] - 1.626).abs() < 5e-4);
        assert!((inv[1] - 1.896).abs() < 5e-4);
        assert!((inv[2] - 2.151).abs() < 5e-4);
    }

    #[test]
    fn mixed_polynomial_matches_grid() {
        let f = LatencyFn::polynomial(vec![0.3, 0.2, 0.0, 0.7]);
        let mu = estimate_smoothness_mu(&f, 1.3).unwrap();
        assert!((mu - brute(&f, 1.3)).abs() < 1e-9);
        assert!(mu <= polynomial_mu(3) + 1e-12);
    }
}
