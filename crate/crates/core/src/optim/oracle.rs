//! Exhaustive grid search over the power box, for cross-checking the solvers.

use rand::Rng;

use super::{Goal, PowerAllocation, PowerProblem, SolverStatus};
use crate::error::{Error, Result};
use crate::units::dbm_to_mw;

pub const MAX_ORACLE_DIM: usize = 3;
pub const MAX_ORACLE_GRID: usize = 200;
/// Half-width of a zoom box in steps of the previous grid.
const ZOOM_HALF_WIDTH: f64 = 10.0;

/// Grid over `[lo_a, hi_a]` per coordinate with `g` points.
struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    g: usize,
}

impl Grid {
    fn value(&self, a: usize, k: usize) -> f64 {
        if k + 1 == self.g {
            self.hi[a]
        } else {
            self.lo[a] + (self.hi[a] - self.lo[a]) * k as f64 / (self.g - 1) as f64
        }
    }
}

/// Best point of the search set: the grid on every axis except `line`, and
/// for each such grid node the exact largest feasible value along `line`
/// within `[lo, hi]`. Every goal is non-decreasing in each coordinate, so that
/// value dominates the rest of the line. Ties keep the first node in
/// lexicographic grid order.
fn search(problem: &PowerProblem, grid: &Grid, line: usize) -> Option<(Vec<f64>, f64)> {
    let n = problem.n_bs();
    let axes: Vec<usize> = (0..n).filter(|&a| a != line).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx = vec![0usize; axes.len()];
    let mut p = vec![0.0; n];
    loop {
        for (&a, &k) in axes.iter().zip(&idx) {
            p[a] = grid.value(a, k);
        }
        p[line] = 0.0;
        let mut top = grid.hi[line];
        for (row, &cap) in problem.w.iter().zip(&problem.i_max) {
            let partial: f64 = row.iter().zip(&p).map(|(w, x)| w * x).sum();
            if row[line] > 0.0 {
                top = top.min((cap - partial) / row[line]);
            }
        }
        if top >= grid.lo[line] {
            p[line] = top;
            if problem.is_feasible(&p) {
                let obj = problem.goal.evaluate(&p);
                if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                    best = Some((p.clone(), obj));
                }
            }
        }
        // advance the prefix odometer
        let mut a = idx.len();
        loop {
            if a == 0 {
                return best;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < grid.g {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Exhaustive search over a `grid_points_per_dim`-point grid per BS. Each axis
/// spans `[0, u_a]` with `u_a` the largest value BS `a` can take alone
/// (`p_max` tightened by every interference cap), which contains the whole
/// feasible set. The axis with the largest `u_a` is maximised exactly at each
/// node of the grid over the remaining axes.
pub fn brute_force_power_oracle(problem: &PowerProblem, grid_points_per_dim: usize) -> Result<PowerAllocation> {
    brute_force_power_oracle_refined(problem, grid_points_per_dim, 0)
}

/// As [`brute_force_power_oracle`], followed by `rounds` zoom passes that
/// re-grid a box of `ZOOM_HALF_WIDTH` steps either side of the incumbent.
pub fn brute_force_power_oracle_refined(
    problem: &PowerProblem,
    grid_points_per_dim: usize,
    rounds: usize,
) -> Result<PowerAllocation> {
    problem.validate()?;
    let n = problem.n_bs();
    if n > MAX_ORACLE_DIM || grid_points_per_dim > MAX_ORACLE_GRID {
        return Err(Error::OracleLimit(format!(
            "{n} BSs at {grid_points_per_dim} points per axis exceeds {MAX_ORACLE_DIM} BSs / {MAX_ORACLE_GRID} points"
        )));
    }
    if grid_points_per_dim < 2 {
        return Err(Error::Config("oracle grid needs at least 2 points per axis".into()));
    }
    if n == 0 {
        return Ok(PowerAllocation {
            p_tx: vec![],
            objective_value: problem.goal.evaluate(&[]),
            solver_status: SolverStatus::GridBest,
        });
    }
    let upper = problem.variable_bounds();
    let mut grid = Grid { lo: vec![0.0; n], hi: upper.clone(), g: grid_points_per_dim };
    // the widest axis is searched exactly, the others on the grid
    let line = (0..n).fold(0, |best, a| if upper[a] > upper[best] { a } else { best });
    let (mut p, mut obj) = search(problem, &grid, line).expect("the origin is always feasible");
    for _ in 0..rounds {
        let steps: Vec<f64> = (0..n).map(|a| (grid.hi[a] - grid.lo[a]) / (grid.g - 1) as f64).collect();
        grid.lo = (0..n).map(|a| (p[a] - ZOOM_HALF_WIDTH * steps[a]).max(0.0)).collect();
        grid.hi = (0..n).map(|a| (p[a] + ZOOM_HALF_WIDTH * steps[a]).min(upper[a])).collect();
        // the exact axis keeps its full range
        grid.lo[line] = 0.0;
        grid.hi[line] = upper[line];
        if let Some((q, o)) = search(problem, &grid, line) {
            if o > obj {
                p = q;
                obj = o;
            }
        }
    }
    Ok(PowerAllocation { p_tx: p, objective_value: obj, solver_status: SolverStatus::GridBest })
}

/// Seeded test instance: 1 to 3 BSs at 21 dBm, 1 to 10 victim points,
/// gains log-uniform over -120..-60 dB and each cap between 2% and 120% of
/// the interference all BSs cause at full power.
pub fn random_problem<R: Rng + ?Sized>(rng: &mut R, goal: Goal) -> PowerProblem {
    let n_bs = rng.random_range(1..=MAX_ORACLE_DIM);
    let n_points = rng.random_range(1..=10);
    let p_max = dbm_to_mw(21.0);
    let w: Vec<Vec<f64>> =
        (0..n_points).map(|_| (0..n_bs).map(|_| 10f64.powf(rng.random_range(-12.0..-6.0))).collect()).collect();
    let i_max = w.iter().map(|row| row.iter().sum::<f64>() * p_max * rng.random_range(0.02..1.2)).collect();
    PowerProblem { w, i_max, p_max, goal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::Goal;

    #[test]
    fn one_dimensional_closed_form() {
        let p = PowerProblem::new(vec![vec![2.0], vec![0.5]], vec![1.0, 3.0], 125.9, Goal::SumPower).unwrap();
        let a = brute_force_power_oracle(&p, 11).unwrap();
        assert_eq!(a.p_tx, vec![0.5]);
    }

    #[test]
    fn zero_caps_give_origin() {
        let p = PowerProblem::new(vec![vec![1.0, 1.0]], vec![0.0], 125.9, Goal::SumPower).unwrap();
        assert_eq!(brute_force_power_oracle(&p, 50).unwrap().p_tx, vec![0.0, 0.0]);
    }

    #[test]
    fn two_bs_sum_power_matches_lp_value() {
        let p = PowerProblem::new(vec![vec![1.0, 1.0]], vec![1.0], 125.9, Goal::SumPower).unwrap();
        let a = brute_force_power_oracle(&p, 200).unwrap();
        assert!((a.objective_value - 1.0).abs() <= 1.0 / 199.0);
    }

    #[test]
    fn limits_are_enforced() {
        let p = PowerProblem::new(vec![vec![1.0; 4]], vec![1.0], 1.0, Goal::SumPower).unwrap();
        assert!(matches!(brute_force_power_oracle(&p, 10), Err(Error::OracleLimit(_))));
        let q = PowerProblem::new(vec![vec![1.0]], vec![1.0], 1.0, Goal::SumPower).unwrap();
        assert!(matches!(brute_force_power_oracle(&q, 201), Err(Error::OracleLimit(_))));
    }
}
