//! Nelder-Mead simplex minimization with an evaluation budget.

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    /// True when the budget ran out before the simplex collapsed.
    pub exhausted: bool,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `step`. At most `budget` evaluations are spent, including the vertices of
/// the initial simplex. Stops when the spread of function values drops below
/// `ftol`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, budget: usize, ftol: f64) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if budget == 0 {
        return SimplexResult {
            x: x0.to_vec(),
            fx: f64::NAN,
            evaluations: 0,
            exhausted: true,
        };
    }
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    pts.push((x0.to_vec(), f0));
    for i in 0..n {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        pts.push((x, v));
    }
    let best_of = |pts: &[(Vec<f64>, f64)]| {
        pts.iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .cloned()
            .unwrap()
    };
    if pts.len() < n + 1 || n == 0 {
        let (x, fx) = best_of(&pts);
        return SimplexResult {
            x,
            fx,
            evaluations: evals,
            exhausted: pts.len() < n + 1,
        };
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut exhausted = true;
    while evals < budget {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (pts[n].1 - pts[0].1).abs() <= ftol {
            exhausted = false;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &pts[..n] {
            for k in 0..n {
                centroid[k] += x[k] / n as f64;
            }
        }
        let towards = |t: f64, x: &[f64]| -> Vec<f64> {
            (0..n).map(|k| centroid[k] + t * (x[k] - centroid[k])).collect()
        };
        let worst = pts[n].clone();
        let xr = towards(-alpha, &worst.0);
        let fr = eval(&xr, &mut evals);
        if fr < pts[0].1 {
            if evals >= budget {
                pts[n] = (xr, fr);
                break;
            }
            let xe = towards(-alpha * gamma, &worst.0);
            let fe = eval(&xe, &mut evals);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
        } else {
            if evals >= budget {
                break;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = towards(-alpha * rho, &worst.0);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = towards(rho, &worst.0);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                pts[n] = (xc, fc);
            } else {
                let best = pts[0].0.clone();
                for p in pts.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x: Vec<f64> = (0..n).map(|k| best[k] + sigma * (p.0[k] - best[k])).collect();
                    let v = eval(&x, &mut evals);
                    *p = (x, v);
                }
            }
        }
    }
    let (x, fx) = best_of(&pts);
    SimplexResult {
        x,
        fx,
        evaluations: evals,
        exhausted,
    }
}
