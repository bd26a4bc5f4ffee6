use super::{LabelingState, OptimizeError, Problem};

/// Re-labels the run: exhaustive search over every feasible lowest label
/// with positions held fixed. Ties go to the smaller `v_l`.
pub fn offset_op(problem: &Problem<'_>, state: &LabelingState) -> Result<LabelingState, OptimizeError> {
    let n = state.n();
    let v_max = problem.v_max();
    if n > v_max {
        return Err(OptimizeError::Infeasible { n, v_max });
    }
    state.check(v_max, problem.len())?;
    let mut best_v = 1;
    let mut best_e = f64::INFINITY;
    for v_l in 1..=v_max + 1 - n {
        let e = problem.energy_unchecked(v_l, &state.k);
        if e < best_e {
            best_e = e;
            best_v = v_l;
        }
    }
    Ok(LabelingState {
        v_l: best_v,
        k: state.k.clone(),
        energy: best_e,
    })
}

/// Coordinate-wise hill climbing on the positions.
///
/// For each step size in `schedule`, sweeps `i = 0..N`, trying `k_i - step`
/// then `k_i + step`, and takes the first move that lowers the energy while
/// keeping positions ordered and in range. Sweeps repeat until one passes
/// without a move, then the next (smaller) step size starts.
pub fn finetune_op(problem: &Problem<'_>, state: &LabelingState, schedule: &[usize]) -> LabelingState {
    const MAX_SWEEPS: usize = 100_000;
    let hi = problem.len().saturating_sub(1) as f64;
    let mut k = state.k.clone();
    let mut energy = problem.energy_unchecked(state.v_l, &k);
    let n = k.len();
    for &step in schedule {
        let step = step as f64;
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for i in 0..n {
                let lower = if i == 0 { -f64::INFINITY } else { k[i - 1] };
                let upper = if i + 1 == n { f64::INFINITY } else { k[i + 1] };
                let original = k[i];
                for dir in [-1.0, 1.0] {
                    let cand = original + dir * step;
                    if cand < 0.0 || cand > hi || cand <= lower || cand >= upper {
                        continue;
                    }
                    k[i] = cand;
                    let e = problem.energy_unchecked(state.v_l, &k);
                    if e < energy {
                        energy = e;
                        moved = true;
                        break;
                    }
                    k[i] = original;
                }
            }
            if !moved {
                break;
            }
        }
    }
    LabelingState {
        v_l: state.v_l,
        k,
        energy,
    }
}

/// `k` with a new position inserted midway between `k_u` and `k_{u+1}`.
pub fn expansion_candidate(k: &[f64], u: usize) -> Vec<f64> {
    assert!(u + 1 < k.len(), "insertion index {u} needs a right neighbour");
    let mut out = Vec::with_capacity(k.len() + 1);
    out.extend_from_slice(&k[..=u]);
    out.push(0.5 * (k[u] + k[u + 1]));
    out.extend_from_slice(&k[u + 1..]);
    out
}

/// Inserts one vertebra at the gap midpoint that gives the lowest energy.
///
/// The best candidate is returned even when it is worse than `state`; the
/// caller's convergence test rejects bad expansions. No-op when `N < 2`,
/// when `N + 1` exceeds the label count, or when a gap is too narrow for a
/// distinct midpoint. If the run would overflow the top label, `v_l` is
/// lowered just enough to fit.
pub fn expansion_op(problem: &Problem<'_>, state: &LabelingState) -> LabelingState {
    let n = state.n();
    let v_max = problem.v_max();
    if n < 2 || n + 1 > v_max {
        return state.clone();
    }
    let v_l = state.v_l.min(v_max - n);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for u in 0..n - 1 {
        let cand = expansion_candidate(&state.k, u);
        if cand.windows(2).any(|w| w[1] <= w[0]) {
            continue;
        }
        let e = problem.energy_unchecked(v_l, &cand);
        if best.as_ref().is_none_or(|(_, be)| e < *be) {
            best = Some((cand, e));
        }
    }
    match best {
        Some((k, energy)) => LabelingState { v_l, k, energy },
        None => state.clone(),
    }
}

/// Expansion that relabels each candidate before comparing them.
///
/// Same candidates as [`expansion_op`], but each is scored with its best
/// lowest label, so a gap far from the current labeling's errors can still
/// win. Ties go to the smaller `u`, then the smaller `v_l`.
pub fn expansion_relabel_op(problem: &Problem<'_>, state: &LabelingState) -> LabelingState {
    let n = state.n();
    let v_max = problem.v_max();
    if n < 2 || n + 1 > v_max {
        return state.clone();
    }
    let mut best: Option<LabelingState> = None;
    for u in 0..n - 1 {
        let cand = expansion_candidate(&state.k, u);
        if cand.windows(2).any(|w| w[1] <= w[0]) {
            continue;
        }
        for v_l in 1..=v_max - n {
            let e = problem.energy_unchecked(v_l, &cand);
            if best.as_ref().is_none_or(|b| e < b.energy) {
                best = Some(LabelingState {
                    v_l,
                    k: cand.clone(),
                    energy: e,
                });
            }
        }
    }
    best.unwrap_or_else(|| state.clone())
}

/// Expansion that fine-tunes each insertion before comparing them.
///
/// Every gap gets its best lowest label as in [`expansion_relabel_op`];
/// the candidate is then refined with `schedule` and the lowest refined
/// energy wins. Ties go to the smaller `u`.
pub fn expansion_lookahead_op(problem: &Problem<'_>, state: &LabelingState, schedule: &[usize]) -> LabelingState {
    let n = state.n();
    let v_max = problem.v_max();
    if n < 2 || n + 1 > v_max {
        return state.clone();
    }
    let mut best: Option<LabelingState> = None;
    for u in 0..n - 1 {
        let cand = expansion_candidate(&state.k, u);
        if cand.windows(2).any(|w| w[1] <= w[0]) {
            continue;
        }
        let (v_l, energy) = (1..=v_max - n)
            .map(|v| (v, problem.energy_unchecked(v, &cand)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let tuned = finetune_op(problem, &LabelingState { v_l, k: cand, energy }, schedule);
        if best.as_ref().is_none_or(|b| tuned.energy < b.energy) {
            best = Some(tuned);
        }
    }
    best.unwrap_or_else(|| state.clone())
}
