//! Exhaustive search over grid-quantised labelings, used as a test oracle.

use super::energy::regularizer_unchecked;
use super::{LabelingState, OptimizeError, Problem};

/// Refuse searches larger than this many states by default.
pub const DEFAULT_BUDGET: f64 = 5e7;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn grid_positions(len: usize, grid_step: f64) -> Vec<f64> {
    let hi = len.saturating_sub(1) as f64;
    let count = (hi / grid_step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| i as f64 * grid_step).filter(|&p| p <= hi).collect()
}

/// Number of `(v_l, k)` states with `N <= max_n` on the position grid.
pub fn search_space_size(v_max: usize, len: usize, max_n: usize, grid_step: f64) -> f64 {
    let m = grid_positions(len, grid_step).len();
    (1..=max_n.min(v_max))
        .map(|n| (v_max + 1 - n) as f64 * binomial(m, n))
        .sum()
}

struct Search<'p, 'a> {
    problem: &'p Problem<'a>,
    pos: &'p [f64],
    reg_start: usize,
    /// Largest weighted activation of each label over the grid.
    label_max: Vec<f64>,
    k: Vec<f64>,
    best: Option<(usize, Vec<f64>, f64)>,
}

impl Search<'_, '_> {
    /// No completion of the current prefix can score below this.
    fn lower_bound(&self, v_l: usize, n: usize, partial: f64) -> f64 {
        let depth = self.k.len();
        let data: f64 = (depth..n).map(|j| self.label_max[v_l + j - 1]).sum();
        // every triple costs at least exp(1)
        let triples = (n.saturating_sub(1)).saturating_sub(self.reg_start.max(depth.saturating_sub(1)));
        partial - data + triples as f64 * std::f64::consts::E
    }

    fn descend(&mut self, v_l: usize, n: usize, next: usize, partial: f64) {
        let depth = self.k.len();
        if let Some(b) = &self.best {
            if self.lower_bound(v_l, n, partial) > b.2 + 1e-9 * (1.0 + b.2.abs()) {
                return;
            }
        }
        if depth == n {
            if self.best.as_ref().is_none_or(|b| partial < b.2) {
                self.best = Some((v_l, self.k.clone(), partial));
            }
            return;
        }
        let remaining = n - depth;
        for j in next..=self.pos.len() - remaining {
            let p = self.pos[j];
            let mut e = partial - self.problem.weighted(v_l + depth, p);
            // the triple centered on the previous point is complete once p is placed
            if depth >= 2 && depth - 1 >= self.reg_start {
                let (a, b) = (self.k[depth - 2], self.k[depth - 1]);
                e += regularizer_unchecked(b - a, p - b);
            }
            self.k.push(p);
            self.descend(v_l, n, j + 1, e);
            self.k.pop();
        }
    }
}

/// Global minimum of the energy over `v_l`, `N <= max_n` and increasing
/// positions on a grid with spacing `grid_step` samples.
pub fn brute_force_solve(
    problem: &Problem<'_>,
    max_n: usize,
    grid_step: f64,
    budget: f64,
) -> Result<LabelingState, OptimizeError> {
    let size = search_space_size(problem.v_max(), problem.len(), max_n, grid_step);
    if size > budget {
        return Err(OptimizeError::BudgetExceeded { size, budget });
    }
    let pos = grid_positions(problem.len(), grid_step);
    let label_max = (1..=problem.v_max())
        .map(|v| pos.iter().map(|&p| problem.weighted(v, p)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut search = Search {
        problem,
        pos: &pos,
        reg_start: problem.reg_start(),
        label_max,
        k: Vec::new(),
        best: None,
    };
    for n in 1..=max_n.min(problem.v_max()).min(pos.len()) {
        for v_l in 1..=problem.v_max() + 1 - n {
            search.descend(v_l, n, 0, 0.0);
        }
    }
    let (v_l, k, _) = search.best.ok_or(OptimizeError::NoVertebra)?;
    problem.state(v_l, k)
}
