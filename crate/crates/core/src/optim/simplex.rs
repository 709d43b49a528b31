//! Small dense simplex for `max c.x  s.t.  A x <= b, x >= 0`.
//!
//! Works on the compact (Tucker) tableau: one row per constraint, one column
//! per nonbasic variable, so memory is `m * n` even when the constraint count
//! dwarfs the variable count. Bland's rule is used throughout; the power
//! problems here are routinely degenerate.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFailure {
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// (m + 1) x (ncols + 1); last column is the rhs. The last row holds the
    /// objective as z = v - sum_j d_j x_j, i.e. negated reduced costs.
    t: Vec<f64>,
    basis: Vec<usize>,
    nonbasis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.ncols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.ncols)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.ncols + 1;
        let a = self.t[r * w + s];
        let inv = 1.0 / a;
        for j in 0..w {
            if j != s {
                self.t[r * w + j] *= inv;
            }
        }
        self.t[r * w + s] = inv;
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        // every row, the objective included, reads x_basic = rhs - sum_j t_ij x_j
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + s];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for j in 0..w {
                if j != s {
                    row[j] -= f * pivot_row[j];
                }
            }
            row[s] = -f * pivot_row[s];
        }
        std::mem::swap(&mut self.basis[r], &mut self.nonbasis[s]);
        self.pivots += 1;
    }

    /// Runs simplex on the current objective row.
    fn optimize(&mut self) -> std::result::Result<(), LpFailure> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpFailure::IterationLimit);
            }
            // Bland: entering variable with the smallest index among improving ones
            let mut enter: Option<usize> = None;
            for j in 0..self.ncols {
                if self.at(self.m, j) < -COST_TOL && enter.is_none_or(|e| self.nonbasis[j] < self.nonbasis[e]) {
                    enter = Some(j);
                }
            }
            let Some(s) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, s);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14 * best.abs().max(1.0)
                                || (ratio <= best + 1e-14 * best.abs().max(1.0) && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(LpFailure::Unbounded) };
            self.pivot(r, s);
        }
    }
}

/// Maximises `c.x` subject to `a x <= b`, `x >= 0`. `b` may have negative entries.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> std::result::Result<LpSolution, LpFailure> {
    let n = c.len();
    let m = b.len();
    debug_assert_eq!(a.len(), m);
    let needs_phase1 = b.iter().any(|&bi| bi < 0.0);
    // column n (if present) is the phase-1 artificial variable
    let ncols = if needs_phase1 { n + 1 } else { n };
    let w = ncols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for i in 0..m {
        debug_assert_eq!(a[i].len(), n);
        t[i * w..i * w + n].copy_from_slice(&a[i]);
        if needs_phase1 {
            t[i * w + n] = -1.0;
        }
        t[i * w + ncols] = b[i];
    }
    let artificial = n + m;
    let mut tab = Tableau {
        m,
        ncols,
        t,
        basis: (n..n + m).collect(),
        nonbasis: if needs_phase1 { (0..n).chain([artificial]).collect() } else { (0..n).collect() },
        pivots: 0,
    };

    if needs_phase1 {
        // maximise -x0
        tab.t[m * w + n] = 1.0;
        let worst = (0..m).min_by(|&i, &j| tab.rhs(i).partial_cmp(&tab.rhs(j)).unwrap()).expect("phase 1 needs a row");
        tab.pivot(worst, n);
        tab.optimize()?;
        let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if tab.rhs(m) < -1e-9 * scale {
            return Err(LpFailure::Infeasible);
        }
        // drive the artificial variable out of the basis if it stayed there at zero
        if let Some(r) = tab.basis.iter().position(|&v| v == artificial) {
            let s = (0..ncols)
                .filter(|&j| tab.at(r, j).abs() > PIVOT_TOL)
                .max_by(|&x, &y| tab.at(r, x).abs().partial_cmp(&tab.at(r, y).abs()).unwrap());
            match s {
                Some(s) => tab.pivot(r, s),
                None => return Err(LpFailure::Infeasible),
            }
        }
        // drop the artificial column
        let col = tab.nonbasis.iter().position(|&v| v == artificial).expect("artificial is nonbasic");
        let mut t2 = vec![0.0; (m + 1) * n + (m + 1)];
        for i in 0..=m {
            let mut k = 0;
            for j in 0..w {
                if j != col {
                    t2[i * (n + 1) + k] = tab.t[i * w + j];
                    k += 1;
                }
            }
        }
        tab.nonbasis.remove(col);
        tab.ncols = n;
        tab.t = t2;
        // restore the real objective in terms of the current nonbasic variables
        let w = n + 1;
        for j in 0..=n {
            tab.t[m * w + j] = 0.0;
        }
        let mut v = 0.0;
        for (k, &ck) in c.iter().enumerate() {
            if ck == 0.0 {
                continue;
            }
            if let Some(j) = tab.nonbasis.iter().position(|&x| x == k) {
                tab.t[m * w + j] -= ck;
            } else if let Some(i) = tab.basis.iter().position(|&x| x == k) {
                for j in 0..n {
                    tab.t[m * w + j] += ck * tab.t[i * w + j];
                }
                v += ck * tab.t[i * w + n];
            }
        }
        tab.t[m * w + n] = v;
    } else {
        for (j, &cj) in c.iter().enumerate() {
            tab.t[m * w + j] = -cj;
        }
    }

    tab.optimize()?;

    let mut x = vec![0.0; n];
    for (i, &var) in tab.basis.iter().enumerate() {
        if var < n {
            x[var] = tab.rhs(i).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective, pivots: tab.pivots })
}

impl From<LpFailure> for Error {
    fn from(f: LpFailure) -> Self {
        match f {
            LpFailure::Infeasible => Error::Infeasible("linear program has no feasible point".into()),
            LpFailure::Unbounded => Error::Infeasible("linear program is unbounded".into()),
            LpFailure::IterationLimit => Error::NonConvergence { iterations: MAX_PIVOTS, residual: f64::NAN },
        }
    }
}

pub fn maximize_checked(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    Ok(maximize(c, a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let sol = maximize(&[3.0, 5.0], &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]], &[4.0, 12.0, 18.0]).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn lower_bounds_need_phase_one() {
        // max -x - y s.t. x + y >= 2, x <= 3  ->  objective -2
        let sol = maximize(&[-1.0, -1.0], &[vec![-1.0, -1.0], vec![1.0, 0.0]], &[-2.0, 3.0]).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-9);
        assert!((sol.x[0] + sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(maximize(&[1.0], &[vec![1.0], vec![-1.0]], &[1.0, -2.0]), Err(LpFailure::Infeasible));
        assert_eq!(maximize(&[1.0, 0.0], &[vec![0.0, 1.0]], &[1.0]), Err(LpFailure::Unbounded));
    }

    #[test]
    fn degenerate_rows_terminate() {
        // many redundant copies of the same constraint through the optimum
        let a: Vec<Vec<f64>> = (0..50).map(|k| vec![1.0, 1.0 + k as f64 * 0.0]).collect();
        let b = vec![1.0; 50];
        let sol = maximize(&[1.0, 1.0], &a, &b).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
