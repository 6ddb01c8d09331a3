use super::{dot, norm_inf};
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Limited-memory BFGS with a strong-Wolfe line search.
#[derive(Debug, Clone)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop when the gradient infinity-norm falls below this.
    pub grad_tol: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evals: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            memory: 10,
            max_iters: 500,
            grad_tol: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step (never increasing).
    pub trace: Vec<f64>,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Minimize `f`, which returns (value, gradient). Non-finite values are
/// treated as out-of-domain; the initial point must be finite.
pub fn lbfgs<F>(x0: &[f64], mut f: F, cfg: &LbfgsConfig) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut gx) = f(&x);
    if !fx.is_finite() || gx.iter().any(|g| !g.is_finite()) {
        return Err(Error::invalid_argument(
            "objective is not finite at the initial point",
        ));
    }

    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(cfg.memory);
    let mut trace = vec![fx];
    let mut converged = norm_inf(&gx) < cfg.grad_tol;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iters {
        // Two-loop recursion for the search direction.
        let mut q = gx.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for p in pairs.iter().rev() {
            let a = p.rho * dot(&p.s, &q);
            for (qi, yi) in q.iter_mut().zip(&p.y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = pairs
            .back()
            .map(|p| dot(&p.s, &p.y) / dot(&p.y, &p.y))
            .unwrap_or(1.0);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for (p, &a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = p.rho * dot(&p.y, &q);
            for (qi, si) in q.iter_mut().zip(&p.s) {
                *qi += (a - b) * si;
            }
        }
        let mut direction: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut dg = dot(&direction, &gx);
        if !(dg < 0.0) {
            // Not a descent direction (or NaN); reset to steepest descent.
            pairs.clear();
            direction = gx.iter().map(|v| -v).collect();
            dg = dot(&direction, &gx);
            if !(dg < 0.0) {
                break; // gradient unusable; return the best point so far
            }
        }

        match line_search_strong_wolfe(&mut f, &x, fx, &direction, dg, cfg) {
            Some((step, fx_new, gx_new)) => {
                let x_new: Vec<f64> = x
                    .iter()
                    .zip(&direction)
                    .map(|(xi, di)| xi + step * di)
                    .collect();
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gx_new.iter().zip(&gx).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                // Skip updates that would break positive definiteness.
                if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                    if pairs.len() == cfg.memory {
                        pairs.pop_front();
                    }
                    pairs.push_back(Pair {
                        rho: 1.0 / sy,
                        s,
                        y,
                    });
                }
                x = x_new;
                fx = fx_new;
                gx = gx_new;
                trace.push(fx);
                iterations += 1;
                converged = norm_inf(&gx) < cfg.grad_tol;
            }
            None => break, // no acceptable step; return the best point so far
        }
        let _ = n;
    }

    Ok(LbfgsOutcome {
        x,
        value: fx,
        gradient: gx,
        iterations,
        converged,
        trace,
    })
}

/// Bracket-and-zoom line search enforcing the strong Wolfe conditions
/// (sufficient decrease with c1, curvature with c2). Returns
/// (step, value, gradient) or None when no acceptable step exists.
fn line_search_strong_wolfe<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    d: &[f64],
    dg0: f64,
    cfg: &LbfgsConfig,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let eval = |f: &mut F, t: f64| {
        let xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
        let (mut v, g) = f(&xt);
        if !g.iter().all(|gi| gi.is_finite()) {
            v = f64::INFINITY; // a point with an unusable gradient is out of domain
        }
        let dg = if v.is_finite() { dot(&g, d) } else { f64::NAN };
        (v, g, dg)
    };

    let mut evals = 0;
    let mut t_prev = 0.0;
    let mut f_prev = f0;
    let mut dg_prev = dg0;
    let mut t = 1.0;

    let (mut lo, mut hi);
    let (mut f_lo, mut f_hi);
    let mut dg_lo;

    loop {
        let (ft, gt, dgt) = eval(f, t);
        evals += 1;
        let invalid = !ft.is_finite();
        if invalid || ft > f0 + cfg.c1 * t * dg0 || (evals > 1 && ft >= f_prev) {
            lo = t_prev;
            hi = t;
            f_lo = f_prev;
            f_hi = ft;
            dg_lo = dg_prev;
            break;
        }
        if dgt.abs() <= -cfg.c2 * dg0 {
            return Some((t, ft, gt));
        }
        if dgt >= 0.0 {
            lo = t;
            hi = t_prev;
            f_lo = ft;
            f_hi = f_prev;
            dg_lo = dgt;
            break;
        }
        if evals >= cfg.max_line_search_evals {
            // Ran out of budget while everything satisfied sufficient
            // decrease: accept the last point.
            return Some((t, ft, gt));
        }
        t_prev = t;
        f_prev = ft;
        dg_prev = dgt;
        t *= 2.0;
    }

    // Zoom phase.
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    while evals < cfg.max_line_search_evals {
        // Quadratic interpolation using (lo, f_lo, dg_lo) and (hi, f_hi),
        // falling back to bisection when it misbehaves.
        let mut t_mid = if f_hi.is_finite() {
            let denom = 2.0 * (f_hi - f_lo - dg_lo * (hi - lo));
            if denom.abs() > 1e-300 {
                lo - dg_lo * (hi - lo) * (hi - lo) / denom
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let span = b - a;
        if !(t_mid.is_finite()) || t_mid <= a + 0.1 * span || t_mid >= b - 0.1 * span {
            t_mid = 0.5 * (lo + hi);
        }

        let (ft, gt, dgt) = eval(f, t_mid);
        evals += 1;
        let invalid = !ft.is_finite();
        if invalid || ft > f0 + cfg.c1 * t_mid * dg0 || ft >= f_lo {
            hi = t_mid;
            f_hi = ft;
        } else {
            if ft < f0 && (best.is_none() || ft < best.as_ref().unwrap().1) {
                best = Some((t_mid, ft, gt.clone()));
            }
            if dgt.abs() <= -cfg.c2 * dg0 {
                return Some((t_mid, ft, gt));
            }
            if dgt * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = t_mid;
            f_lo = ft;
            dg_lo = dgt;
        }
        if (hi - lo).abs() < 1e-16 {
            break;
        }
    }
    // Could not satisfy curvature within budget; settle for the best
    // sufficient-decrease point if one exists.
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_exactly() {
        let f = |x: &[f64]| {
            let v = (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
            (v, vec![2.0 * (x[0] - 3.0), 20.0 * (x[1] + 1.0)])
        };
        let out = lbfgs(&[0.0, 0.0], f, &LbfgsConfig::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-6);
        assert!((out.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| {
            let a = 1.0 - x[0];
            let b = x[1] - x[0] * x[0];
            let v = a * a + 100.0 * b * b;
            let g = vec![-2.0 * a - 400.0 * x[0] * b, 200.0 * b];
            (v, g)
        };
        let out = lbfgs(&[-1.2, 1.0], f, &LbfgsConfig::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-4, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn trace_is_monotone_nonincreasing() {
        let f = |x: &[f64]| {
            let v = x[0].powi(4) + (x[1] - 2.0).powi(2) + (x[0] * x[1]).powi(2);
            let g = vec![
                4.0 * x[0].powi(3) + 2.0 * x[0] * x[1] * x[1],
                2.0 * (x[1] - 2.0) + 2.0 * x[1] * x[0] * x[0],
            ];
            (v, g)
        };
        let out = lbfgs(&[2.0, -3.0], f, &LbfgsConfig::default()).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] <= w[0], "objective increased: {w:?}");
        }
    }

    #[test]
    fn backs_away_from_invalid_region() {
        // Objective defined only for x < 2; minimum at x = 1.
        let f = |x: &[f64]| {
            if x[0] >= 2.0 {
                (f64::INFINITY, vec![f64::NAN])
            } else {
                ((x[0] - 1.0).powi(2), vec![2.0 * (x[0] - 1.0)])
            }
        };
        let out = lbfgs(&[-10.0], f, &LbfgsConfig::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-5, "{:?}", out.x);
    }

    #[test]
    fn rejects_invalid_start() {
        let f = |_: &[f64]| (f64::NAN, vec![0.0]);
        assert!(lbfgs(&[0.0], f, &LbfgsConfig::default()).is_err());
    }
}
