//! Indoor power allocation under interference caps:
//!
//! ```text
//! max f(p)  s.t.  W p <= i_max,  0 <= p <= p_max
//! ```
//!
//! with `f` one of: total power, minimum power, or sum of `ln(1 + p)`.
//! The first two are linear programs solved with [`simplex`]; the third is a
//! smooth concave program solved with a log-barrier Newton method.

mod barrier;
mod dump;
mod oracle;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::CouplingMatrix;

pub use barrier::solve_log_sum;
pub use dump::{read_problem, write_problem};
pub use oracle::{
    brute_force_power_oracle, brute_force_power_oracle_refined, random_problem, MAX_ORACLE_DIM, MAX_ORACLE_GRID,
};

/// Relative slack allowed on interference caps when checking feasibility.
pub const FEASIBILITY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    SumPower,
    MaxMin,
    LogSum,
}

impl Goal {
    pub fn evaluate(&self, p: &[f64]) -> f64 {
        match self {
            Goal::SumPower => p.iter().sum(),
            Goal::MaxMin => p.iter().copied().fold(f64::INFINITY, f64::min),
            Goal::LogSum => p.iter().map(|x| x.ln_1p()).sum(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Goal::SumPower => "sum_power",
            Goal::MaxMin => "max_min",
            Goal::LogSum => "log_sum",
        }
    }
}

impl std::str::FromStr for Goal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum_power" => Ok(Goal::SumPower),
            "max_min" => Ok(Goal::MaxMin),
            "log_sum" => Ok(Goal::LogSum),
            other => Err(Error::Config(format!("unknown goal {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProblem {
    /// Coupling gains, one row per victim point, one column per indoor BS.
    pub w: Vec<Vec<f64>>,
    /// Interference cap per victim point, mW.
    pub i_max: Vec<f64>,
    /// Per-BS power limit, mW.
    pub p_max: f64,
    pub goal: Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    /// Best point of an exhaustive grid search.
    GridBest,
    /// Set without optimisation (fixed schemes, fail-safe fallbacks).
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Transmit power per indoor BS, mW.
    pub p_tx: Vec<f64>,
    pub objective_value: f64,
    pub solver_status: SolverStatus,
}

impl PowerAllocation {
    pub fn fixed(p_tx: Vec<f64>) -> Self {
        Self { objective_value: p_tx.iter().sum(), p_tx, solver_status: SolverStatus::Fixed }
    }
}

impl PowerProblem {
    pub fn new(w: Vec<Vec<f64>>, i_max: Vec<f64>, p_max: f64, goal: Goal) -> Result<Self> {
        let p = Self { w, i_max, p_max, goal };
        p.validate()?;
        Ok(p)
    }

    pub fn from_coupling(w: &CouplingMatrix, i_max: Vec<f64>, p_max: f64, goal: Goal) -> Result<Self> {
        Self::new(w.entries.clone(), i_max, p_max, goal)
    }

    pub fn n_bs(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    pub fn n_points(&self) -> usize {
        self.w.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.len() != self.i_max.len() {
            return Err(Error::Config(format!(
                "W has {} rows but {} interference caps",
                self.w.len(),
                self.i_max.len()
            )));
        }
        let n = self.n_bs();
        if self.w.iter().any(|r| r.len() != n) {
            return Err(Error::Config("W rows differ in length".into()));
        }
        if !(self.p_max > 0.0) || !self.p_max.is_finite() {
            return Err(Error::Config(format!("p_max must be positive and finite, got {}", self.p_max)));
        }
        if self.w.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Config("W entries must be finite and non-negative".into()));
        }
        if let Some(bad) = self.i_max.iter().find(|&&x| x < 0.0 || x.is_nan()) {
            return Err(Error::Infeasible(format!("negative interference cap {bad}")));
        }
        Ok(())
    }

    pub fn with_goal(&self, goal: Goal) -> Self {
        Self { goal, ..self.clone() }
    }

    /// Largest value each variable can take on its own: the box limit
    /// tightened by every row it appears in.
    pub fn variable_bounds(&self) -> Vec<f64> {
        (0..self.n_bs())
            .map(|a| {
                self.w
                    .iter()
                    .zip(&self.i_max)
                    .filter(|(row, _)| row[a] > 0.0)
                    .map(|(row, cap)| cap / row[a])
                    .fold(self.p_max, f64::min)
            })
            .collect()
    }

    pub fn is_feasible(&self, p: &[f64]) -> bool {
        if p.len() != self.n_bs() {
            return false;
        }
        if p.iter().any(|&x| !(x >= 0.0) || x > self.p_max * (1.0 + 1e-12)) {
            return false;
        }
        self.w.iter().zip(&self.i_max).all(|(row, &cap)| {
            let i: f64 = row.iter().zip(p).map(|(w, x)| w * x).sum();
            i <= cap * (1.0 + FEASIBILITY_REL_TOL)
        })
    }

    /// Pulls a numerically marginal point back inside the feasible set.
    fn repair(&self, p: &mut [f64]) {
        for x in p.iter_mut() {
            *x = x.clamp(0.0, self.p_max);
        }
        for (row, &cap) in self.w.iter().zip(&self.i_max) {
            let i: f64 = row.iter().zip(p.iter()).map(|(w, x)| w * x).sum();
            if i <= cap {
                continue;
            }
            if cap <= 0.0 {
                for (w, x) in row.iter().zip(p.iter_mut()) {
                    if *w > 0.0 {
                        *x = 0.0;
                    }
                }
            } else {
                let f = cap / i;
                for x in p.iter_mut() {
                    *x *= f;
                }
            }
        }
    }

    /// Row-scaled LP constraint block: interference rows (each divided by its
    /// largest coefficient) followed by the box rows.
    fn lp_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.n_bs();
        let mut a = Vec::with_capacity(self.n_points() + n);
        let mut b = Vec::with_capacity(self.n_points() + n);
        for (row, &cap) in self.w.iter().zip(&self.i_max) {
            let scale = row.iter().copied().fold(0.0, f64::max);
            if scale <= 0.0 {
                continue;
            }
            a.push(row.iter().map(|w| w / scale).collect());
            b.push(cap / scale);
        }
        for k in 0..n {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            a.push(row);
            b.push(self.p_max);
        }
        (a, b)
    }
}

/// Among all points of the current optimal face (objective `c.x >= z_star`),
/// returns the lexicographically smallest.
fn lexicographic_min(c: &[f64], z_star: f64, a: &[Vec<f64>], b: &[f64], start: Vec<f64>) -> Result<Vec<f64>> {
    let n = c.len();
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let slack = 1e-12 * z_star.abs().max(1e-300);
    a.push(c.iter().map(|x| -x).collect());
    b.push(-(z_star - slack));
    let mut x = start;
    for k in 0..n.saturating_sub(1) {
        let mut obj = vec![0.0; n];
        obj[k] = -1.0;
        let sol = simplex::maximize_checked(&obj, &a, &b)?;
        let fixed = sol.x[k];
        let mut row = vec![0.0; n];
        row[k] = 1.0;
        a.push(row);
        b.push(fixed);
        x = sol.x;
    }
    if n > 1 {
        // the last coordinate is pinned by the optimal face once the others are fixed
        let sol = simplex::maximize_checked(c, &a, &b)?;
        x = sol.x;
    }
    Ok(x)
}

fn finish(problem: &PowerProblem, mut p: Vec<f64>, goal: Goal) -> PowerAllocation {
    problem.repair(&mut p);
    PowerAllocation { objective_value: goal.evaluate(&p), p_tx: p, solver_status: SolverStatus::Optimal }
}

/// Maximises the total power; the lexicographically smallest optimum is returned.
pub fn solve_sum_power(problem: &PowerProblem) -> Result<PowerAllocation> {
    problem.validate()?;
    let n = problem.n_bs();
    if n == 0 {
        return Ok(finish(problem, vec![], Goal::SumPower));
    }
    let (a, b) = problem.lp_rows();
    let c = vec![1.0; n];
    let sol = simplex::maximize_checked(&c, &a, &b)?;
    let x = lexicographic_min(&c, sol.objective, &a, &b, sol.x)?;
    Ok(finish(problem, x, Goal::SumPower))
}

/// Maximises the smallest power, then spends the remaining slack on total
/// power with the minimum held at its optimum.
pub fn solve_max_min(problem: &PowerProblem) -> Result<PowerAllocation> {
    problem.validate()?;
    let n = problem.n_bs();
    if n == 0 {
        return Ok(finish(problem, vec![], Goal::MaxMin));
    }
    let (a, b) = problem.lp_rows();
    // stage 1 over (p, t): max t  s.t.  t - p_k <= 0
    let mut a1: Vec<Vec<f64>> = a.iter().map(|r| r.iter().copied().chain([0.0]).collect()).collect();
    let mut b1 = b.clone();
    for k in 0..n {
        let mut row = vec![0.0; n + 1];
        row[k] = -1.0;
        row[n] = 1.0;
        a1.push(row);
        b1.push(0.0);
    }
    let mut c1 = vec![0.0; n + 1];
    c1[n] = 1.0;
    let level = simplex::maximize_checked(&c1, &a1, &b1)?.objective;
    let floor = (level * (1.0 - 1e-12)).max(0.0);

    // stage 2: max sum p  s.t.  p_k >= level
    let mut a2 = a;
    let mut b2 = b;
    for k in 0..n {
        let mut row = vec![0.0; n];
        row[k] = -1.0;
        a2.push(row);
        b2.push(-floor);
    }
    let c = vec![1.0; n];
    let sol = simplex::maximize_checked(&c, &a2, &b2)?;
    let x = lexicographic_min(&c, sol.objective, &a2, &b2, sol.x)?;
    Ok(finish(problem, x, Goal::MaxMin))
}

/// Dispatches on `problem.goal`.
pub fn solve(problem: &PowerProblem) -> Result<PowerAllocation> {
    match problem.goal {
        Goal::SumPower => solve_sum_power(problem),
        Goal::MaxMin => solve_max_min(problem),
        Goal::LogSum => solve_log_sum(problem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P_MAX: f64 = 125.9;

    fn prob(w: Vec<Vec<f64>>, i: Vec<f64>) -> PowerProblem {
        PowerProblem::new(w, i, P_MAX, Goal::SumPower).unwrap()
    }

    #[test]
    fn sum_power_degenerate_face_picks_lexicographic_minimum() {
        let a = solve_sum_power(&prob(vec![vec![1.0, 1.0]], vec![1.0])).unwrap();
        assert!((a.objective_value - 1.0).abs() < 1e-9);
        assert!(a.p_tx[0].abs() < 1e-9 && (a.p_tx[1] - 1.0).abs() < 1e-9, "{:?}", a.p_tx);
    }

    #[test]
    fn huge_caps_saturate_the_box() {
        let p = prob(vec![vec![1.0, 0.5], vec![0.2, 1.0]], vec![1e9, 1e9]);
        for sol in [solve_sum_power(&p).unwrap(), solve_max_min(&p).unwrap()] {
            for x in &sol.p_tx {
                assert!((x - P_MAX).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_caps_switch_everything_off() {
        let p = prob(vec![vec![1.0, 0.5], vec![0.2, 1.0]], vec![0.0, 0.0]);
        assert_eq!(solve_sum_power(&p).unwrap().p_tx, vec![0.0, 0.0]);
        assert_eq!(solve_max_min(&p).unwrap().p_tx, vec![0.0, 0.0]);
    }

    #[test]
    fn negative_cap_is_infeasible() {
        assert!(matches!(
            PowerProblem::new(vec![vec![1.0]], vec![-1.0], P_MAX, Goal::SumPower),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn max_min_examples() {
        let a = solve_max_min(&prob(vec![vec![1.0, 1.0]], vec![1.0])).unwrap();
        assert!((a.p_tx[0] - 0.5).abs() < 1e-9 && (a.p_tx[1] - 0.5).abs() < 1e-9);
        let b = solve_max_min(&prob(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 2.0])).unwrap();
        assert!((b.objective_value - 1.0).abs() < 1e-9);
        assert!((b.p_tx[0] - 1.0).abs() < 1e-9 && (b.p_tx[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_instance_separates_goals() {
        let p = prob(vec![vec![1.0, 0.01]], vec![1.0]);
        let s = solve_sum_power(&p).unwrap();
        assert!(s.p_tx.contains(&0.0));
        assert!((s.p_tx[1] - 100.0).abs() < 1e-9);
        let m = solve_max_min(&p).unwrap();
        assert!(m.p_tx.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn scaled_problem_is_tiny_but_solvable() {
        // realistic magnitudes: gains ~1e-9, caps ~1e-9 mW
        let w = vec![vec![3e-9, 1e-10], vec![2e-10, 5e-9], vec![1e-9, 1e-9]];
        let i = vec![2e-9, 4e-9, 1.5e-9];
        let p = prob(w, i);
        let s = solve_sum_power(&p).unwrap();
        assert!(p.is_feasible(&s.p_tx));
        assert!(s.objective_value > 0.5);
    }
}
