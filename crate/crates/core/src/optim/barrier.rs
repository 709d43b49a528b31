//! Log-barrier Newton method for `max sum ln(1 + p)` over the power polytope.

use super::{Goal, PowerAllocation, PowerProblem, SolverStatus};
use crate::error::{Error, Result};

const BARRIER_GROWTH: f64 = 10.0;
const GAP_REL_TOL: f64 = 1e-10;
const MAX_OUTER: usize = 100;
const MAX_NEWTON: usize = 200;

/// Dense Cholesky solve of `h x = g` for a small symmetric positive definite `h`.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (g[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

struct Barrier {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Barrier {
    fn slacks(&self, p: &[f64]) -> Option<Vec<f64>> {
        let mut s = Vec::with_capacity(self.b.len());
        for (row, &bi) in self.a.iter().zip(&self.b) {
            let v = bi - row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>();
            if !(v > 0.0) {
                return None;
            }
            s.push(v);
        }
        if p.iter().any(|&x| !(x > 0.0)) {
            return None;
        }
        Some(s)
    }

    /// `t * (-f) - sum ln(slack) - sum ln(p)`, or `None` outside the domain.
    fn value(&self, t: f64, p: &[f64]) -> Option<f64> {
        let s = self.slacks(p)?;
        let f: f64 = p.iter().map(|x| x.ln_1p()).sum();
        Some(-t * f - s.iter().map(|v| v.ln()).sum::<f64>() - p.iter().map(|x| x.ln()).sum::<f64>())
    }

    /// Minimises the barrier function for fixed `t` starting from a strictly feasible `p`.
    fn center(&self, t: f64, p: &mut [f64]) -> Result<()> {
        let n = p.len();
        for _ in 0..MAX_NEWTON {
            let s = self.slacks(p).expect("iterate stays strictly feasible");
            let mut g = vec![0.0; n];
            let mut h = vec![vec![0.0; n]; n];
            for k in 0..n {
                g[k] = -t / (1.0 + p[k]) - 1.0 / p[k];
                h[k][k] = t / (1.0 + p[k]).powi(2) + 1.0 / (p[k] * p[k]);
            }
            for (row, &si) in self.a.iter().zip(&s) {
                for i in 0..n {
                    if row[i] == 0.0 {
                        continue;
                    }
                    g[i] += row[i] / si;
                    for j in 0..n {
                        h[i][j] += row[i] * row[j] / (si * si);
                    }
                }
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let step = cholesky_solve(&h, &neg_g).ok_or(Error::NonConvergence { iterations: 0, residual: f64::NAN })?;
            let decrement: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            let f0 = self.value(t, p).expect("current iterate is feasible");
            // the decrement bounds the barrier suboptimality, resolvable only to the precision of f0
            if decrement / 2.0 <= 1e-10 + 1e-14 * f0.abs() {
                return Ok(());
            }
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = p.iter().zip(&step).map(|(x, d)| x + alpha * d).collect();
                if trial == p {
                    // the step is below the resolution of the iterate
                    return Ok(());
                }
                if let Some(f1) = self.value(t, &trial) {
                    if f1 <= f0 - 0.25 * alpha * decrement {
                        p.copy_from_slice(&trial);
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    // no further progress representable at this precision
                    return Ok(());
                }
            }
        }
        Err(Error::NonConvergence { iterations: MAX_NEWTON, residual: f64::NAN })
    }
}

/// Maximises `sum ln(1 + p_a)`; the problem is strictly concave in `p`, so the
/// maximiser is unique.
pub fn solve_log_sum(problem: &PowerProblem) -> Result<PowerAllocation> {
    problem.validate()?;
    let n = problem.n_bs();
    // a zero cap pins every BS it couples to at zero
    let mut pinned = vec![false; n];
    for (row, &cap) in problem.w.iter().zip(&problem.i_max) {
        if cap <= 0.0 {
            for (k, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    pinned[k] = true;
                }
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&k| !pinned[k]).collect();
    let mut p_full = vec![0.0; n];
    if !free.is_empty() {
        let (a_all, b_all) = problem.lp_rows();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, bi) in a_all.iter().zip(b_all) {
            let reduced: Vec<f64> = free.iter().map(|&k| row[k]).collect();
            if reduced.iter().any(|&x| x > 0.0) {
                a.push(reduced);
                b.push(bi);
            }
        }
        let barrier = Barrier { a, b };
        let s = barrier
            .a
            .iter()
            .zip(&barrier.b)
            .map(|(row, bi)| bi / row.iter().sum::<f64>())
            .fold(problem.p_max, f64::min);
        let mut p = vec![s / 2.0; free.len()];
        let m = (barrier.b.len() + free.len()) as f64;
        let mut t = 1.0;
        let mut converged = false;
        for _ in 0..MAX_OUTER {
            barrier.center(t, &mut p)?;
            let f: f64 = p.iter().map(|x| x.ln_1p()).sum();
            if m / t < GAP_REL_TOL * f.abs().max(1.0) {
                converged = true;
                break;
            }
            t *= BARRIER_GROWTH;
        }
        if !converged {
            return Err(Error::NonConvergence { iterations: MAX_OUTER, residual: m / t });
        }
        for (&k, x) in free.iter().zip(p) {
            p_full[k] = x;
        }
    }
    problem.repair(&mut p_full);
    Ok(PowerAllocation {
        objective_value: Goal::LogSum.evaluate(&p_full),
        p_tx: p_full,
        solver_status: SolverStatus::Optimal,
    })
}
