//! 0/1 quadratic knapsack solvers for the scheduling problem:
//! maximize `sum p_i x_i - sum_{i<j} q_ij x_i x_j` subject to
//! `sum s_i x_i <= budget`, with non-negative profits and penalties.

use crate::{Error, Result};

/// Item count above which [`solve`] switches from the exact branch-and-bound
/// to greedy plus local search.
pub const EXACT_THRESHOLD: usize = 20;

const LOCAL_SEARCH_MAX_ITERS: usize = 1000;
const IMPROVE_EPS: f64 = 1e-12;
// Slack on bound pruning so float rounding can never cut off an optimum.
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
enum Penalties {
    /// No pairwise interaction; keeps the large-batch uncorrelated case
    /// free of an n-squared matrix.
    Zero,
    Dense(Vec<f64>),
}

/// One selection problem: linear profits, pairwise penalties (symmetric,
/// zero diagonal), item sizes in bits, and a bit budget.
#[derive(Debug, Clone)]
pub struct QkpInstance {
    n: usize,
    profits: Vec<f64>,
    penalties: Penalties,
    sizes: Vec<u64>,
    budget: u64,
}

impl QkpInstance {
    pub fn new(profits: Vec<f64>, penalties: Vec<f64>, sizes: Vec<u64>, budget: u64) -> Result<Self> {
        let n = profits.len();
        if penalties.len() != n * n {
            return Err(Error::InvalidParameter(
                "penalty matrix dimensions disagree with profits".into(),
            ));
        }
        for i in 0..n {
            if penalties[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter("penalty diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = penalties[i * n + j];
                if v < 0.0 || v.is_nan() {
                    return Err(Error::InvalidParameter("penalties must be non-negative".into()));
                }
                if v != penalties[j * n + i] {
                    return Err(Error::InvalidParameter("penalty matrix must be symmetric".into()));
                }
            }
        }
        Self::build(profits, Penalties::Dense(penalties), sizes, budget)
    }

    /// Instance with no pairwise penalties (a plain 0/1 knapsack).
    pub fn linear(profits: Vec<f64>, sizes: Vec<u64>, budget: u64) -> Result<Self> {
        Self::build(profits, Penalties::Zero, sizes, budget)
    }

    fn build(profits: Vec<f64>, penalties: Penalties, sizes: Vec<u64>, budget: u64) -> Result<Self> {
        let n = profits.len();
        if sizes.len() != n {
            return Err(Error::InvalidParameter(
                "profit and size dimensions disagree".into(),
            ));
        }
        if profits.iter().any(|&p| p < 0.0 || p.is_nan()) {
            return Err(Error::InvalidParameter("profits must be non-negative".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("sizes must be positive".into()));
        }
        Ok(QkpInstance {
            n,
            profits,
            penalties,
            sizes,
            budget,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn profit(&self, i: usize) -> f64 {
        self.profits[i]
    }

    pub fn size(&self, i: usize) -> u64 {
        self.sizes[i]
    }

    #[inline]
    pub fn penalty(&self, i: usize, j: usize) -> f64 {
        match &self.penalties {
            Penalties::Zero => 0.0,
            Penalties::Dense(q) => q[i * self.n + j],
        }
    }

    fn is_uncorrelated(&self) -> bool {
        matches!(self.penalties, Penalties::Zero)
    }

    /// Canonical objective of a chosen set, summed in a fixed order so the
    /// same set always produces bit-identical floats. `chosen` must be
    /// sorted ascending.
    pub fn objective_of(&self, chosen: &[usize]) -> f64 {
        debug_assert!(chosen.windows(2).all(|w| w[0] < w[1]));
        let mut sum = 0.0;
        for &b in chosen {
            sum += self.profits[b];
        }
        if let Penalties::Dense(q) = &self.penalties {
            let mut discount = 0.0;
            for (bi, &b) in chosen.iter().enumerate() {
                for &a in &chosen[..bi] {
                    discount += q[a * self.n + b];
                }
            }
            sum -= discount;
        }
        sum
    }

    pub fn total_size_of(&self, chosen: &[usize]) -> u64 {
        chosen.iter().map(|&i| self.sizes[i]).sum()
    }
}

/// A feasible solution: the chosen index set (sorted), its canonical
/// objective, and its total size.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Vec<usize>,
    pub objective: f64,
    pub total_size_bits: u64,
}

impl Selection {
    pub fn empty() -> Self {
        Selection {
            chosen: Vec::new(),
            objective: 0.0,
            total_size_bits: 0,
        }
    }

    fn from_set(inst: &QkpInstance, mut chosen: Vec<usize>) -> Self {
        chosen.sort_unstable();
        let objective = inst.objective_of(&chosen);
        let total_size_bits = inst.total_size_of(&chosen);
        Selection {
            chosen,
            objective,
            total_size_bits,
        }
    }

    /// Tie order: higher objective, then smaller size, then lexicographically
    /// smaller index set.
    fn beats(&self, other: &Selection) -> bool {
        if self.objective != other.objective {
            return self.objective > other.objective;
        }
        if self.total_size_bits != other.total_size_bits {
            return self.total_size_bits < other.total_size_bits;
        }
        self.chosen < other.chosen
    }
}

struct ExactSearch<'a> {
    inst: &'a QkpInstance,
    // Item indices sorted by profit density, for the fractional bound.
    density_order: Vec<usize>,
    best: Selection,
    chosen: Vec<usize>,
    sum_p: f64,
    sum_q: f64,
    used: u64,
}

impl<'a> ExactSearch<'a> {
    /// Fractional-knapsack bound on the profit still obtainable from items
    /// with index >= depth. Penalties are non-negative, so ignoring them can
    /// only overestimate.
    fn remaining_bound(&self, depth: usize) -> f64 {
        let mut room = self.inst.budget - self.used;
        let mut bound = 0.0;
        for &i in &self.density_order {
            if i < depth {
                continue;
            }
            if room == 0 {
                break;
            }
            let s = self.inst.size(i);
            if s <= room {
                bound += self.inst.profit(i);
                room -= s;
            } else {
                bound += self.inst.profit(i) * (room as f64 / s as f64);
                room = 0;
            }
        }
        bound
    }

    fn descend(&mut self, depth: usize) {
        if depth == self.inst.n() {
            let cand = Selection {
                chosen: self.chosen.clone(),
                objective: self.sum_p - self.sum_q,
                total_size_bits: self.used,
            };
            if cand.beats(&self.best) {
                self.best = cand;
            }
            return;
        }
        let value = self.sum_p - self.sum_q;
        if value + self.remaining_bound(depth) + PRUNE_EPS < self.best.objective {
            return;
        }
        // Include branch first: items are visited in ascending index order,
        // so pair discounts accumulate in the canonical order.
        let s = self.inst.size(depth);
        if self.used + s <= self.inst.budget {
            let (save_p, save_q) = (self.sum_p, self.sum_q);
            self.sum_p += self.inst.profit(depth);
            for &a in &self.chosen {
                self.sum_q += self.inst.penalty(a, depth);
            }
            self.used += s;
            self.chosen.push(depth);
            self.descend(depth + 1);
            self.chosen.pop();
            self.used -= s;
            self.sum_p = save_p;
            self.sum_q = save_q;
        }
        self.descend(depth + 1);
    }
}

/// Provably optimal solution by depth-first branch and bound. Refuses
/// instances larger than `EXACT_THRESHOLD` items.
pub fn solve_exact(inst: &QkpInstance) -> Result<Selection> {
    solve_exact_with_threshold(inst, EXACT_THRESHOLD)
}

pub fn solve_exact_with_threshold(inst: &QkpInstance, threshold: usize) -> Result<Selection> {
    if inst.n() > threshold {
        return Err(Error::InstanceTooLarge {
            n: inst.n(),
            max: threshold,
        });
    }
    let mut density_order: Vec<usize> = (0..inst.n()).collect();
    density_order.sort_by(|&a, &b| {
        let da = inst.profit(a) / inst.size(a) as f64;
        let db = inst.profit(b) / inst.size(b) as f64;
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });
    let mut search = ExactSearch {
        inst,
        density_order,
        best: Selection::empty(),
        chosen: Vec::with_capacity(inst.n()),
        sum_p: 0.0,
        sum_q: 0.0,
        used: 0,
    };
    search.descend(0);
    Ok(search.best)
}

/// Greedy construction: repeatedly add the feasible item with the highest
/// marginal value density, stopping when no feasible item improves the
/// objective. Ties go to the lower index.
pub fn solve_greedy(inst: &QkpInstance) -> Selection {
    let n = inst.n();
    let mut in_set = vec![false; n];
    let mut inter = vec![0.0; n]; // sum of penalties against the chosen set
    let mut picked: Vec<usize> = Vec::new();
    let mut used = 0u64;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if in_set[i] || used + inst.size(i) > inst.budget {
                continue;
            }
            let marginal = inst.profit(i) - inter[i];
            if marginal <= 0.0 {
                continue;
            }
            let density = marginal / inst.size(i) as f64;
            if best.map_or(true, |(_, d)| density > d) {
                best = Some((i, density));
            }
        }
        match best {
            Some((i, _)) => {
                in_set[i] = true;
                used += inst.size(i);
                if !inst.is_uncorrelated() {
                    for k in 0..n {
                        inter[k] += inst.penalty(k, i);
                    }
                }
                picked.push(i);
            }
            None => break,
        }
    }
    Selection::from_set(inst, picked)
}

/// Hill climbing over add / drop / swap moves, first improvement, starting
/// from a feasible seed. The result never scores below the seed.
pub fn solve_local_search(inst: &QkpInstance, seed: &Selection) -> Result<Selection> {
    let n = inst.n();
    let mut in_set = vec![false; n];
    for &i in &seed.chosen {
        if i >= n {
            return Err(Error::InfeasibleSeed);
        }
        if in_set[i] {
            return Err(Error::InfeasibleSeed);
        }
        in_set[i] = true;
    }
    let mut used = inst.total_size_of(&seed.chosen);
    if used > inst.budget {
        return Err(Error::InfeasibleSeed);
    }

    let mut inter = vec![0.0; n];
    if !inst.is_uncorrelated() {
        for i in 0..n {
            for &j in &seed.chosen {
                inter[i] += inst.penalty(i, j);
            }
        }
    }

    let add = |inter: &mut [f64], in_set: &mut [bool], used: &mut u64, i: usize| {
        in_set[i] = true;
        *used += inst.size(i);
        if !inst.is_uncorrelated() {
            for k in 0..n {
                inter[k] += inst.penalty(k, i);
            }
        }
    };
    let drop_ = |inter: &mut [f64], in_set: &mut [bool], used: &mut u64, j: usize| {
        in_set[j] = false;
        *used -= inst.size(j);
        if !inst.is_uncorrelated() {
            for k in 0..n {
                inter[k] -= inst.penalty(k, j);
            }
        }
    };

    for _ in 0..LOCAL_SEARCH_MAX_ITERS {
        let mut improved = false;

        'scan: {
            for i in 0..n {
                if !in_set[i]
                    && used + inst.size(i) <= inst.budget
                    && inst.profit(i) - inter[i] > IMPROVE_EPS
                {
                    add(&mut inter, &mut in_set, &mut used, i);
                    improved = true;
                    break 'scan;
                }
            }
            for j in 0..n {
                if in_set[j] && inter[j] - inst.profit(j) > IMPROVE_EPS {
                    drop_(&mut inter, &mut in_set, &mut used, j);
                    improved = true;
                    break 'scan;
                }
            }
            for j in 0..n {
                if !in_set[j] {
                    continue;
                }
                for i in 0..n {
                    if in_set[i] || used - inst.size(j) + inst.size(i) > inst.budget {
                        continue;
                    }
                    let gain_in = inst.profit(i) - (inter[i] - inst.penalty(i, j));
                    let gain_out = inst.profit(j) - inter[j];
                    if gain_in - gain_out > IMPROVE_EPS {
                        drop_(&mut inter, &mut in_set, &mut used, j);
                        add(&mut inter, &mut in_set, &mut used, i);
                        improved = true;
                        break 'scan;
                    }
                }
            }
        }

        if !improved {
            break;
        }
    }

    let chosen: Vec<usize> = (0..n).filter(|&i| in_set[i]).collect();
    let result = Selection::from_set(inst, chosen);
    // Incremental deltas are float-noisy; never hand back less than the seed.
    if result.objective < seed.objective {
        return Ok(seed.clone());
    }
    Ok(result)
}

/// Dispatcher: exact solve below [`EXACT_THRESHOLD`] items, otherwise greedy
/// refined by local search.
pub fn solve(inst: &QkpInstance) -> Selection {
    solve_with_threshold(inst, EXACT_THRESHOLD)
}

pub fn solve_with_threshold(inst: &QkpInstance, threshold: usize) -> Selection {
    if inst.n() <= threshold {
        solve_exact_with_threshold(inst, threshold).expect("within threshold")
    } else {
        let greedy = solve_greedy(inst);
        solve_local_search(inst, &greedy).expect("greedy seed is feasible")
    }
}

/// Exhaustive enumeration, usable as a test oracle for small instances.
/// Applies the same tie order as the solvers.
pub fn enumerate_optimal(inst: &QkpInstance) -> Selection {
    assert!(inst.n() <= 20, "enumeration oracle limited to 20 items");
    let mut best = Selection::empty();
    for mask in 0u32..(1u32 << inst.n()) {
        let chosen: Vec<usize> = (0..inst.n()).filter(|&i| mask >> i & 1 == 1).collect();
        let total = inst.total_size_of(&chosen);
        if total > inst.budget() {
            continue;
        }
        let cand = Selection {
            objective: inst.objective_of(&chosen),
            total_size_bits: total,
            chosen,
        };
        if cand.beats(&best) {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    /// The default V2X-style instance used by several examples: profits in
    /// sensor order (f, r, lft, rgt, L) with gains at 1.
    fn v2x_like() -> (Vec<f64>, Vec<u64>, Vec<f64>) {
        let p: Vec<f64> = vec![0.9, 0.7, 0.5, 0.5, 1.0];
        let sizes = vec![1_440_000, 1_440_000, 1_120_000, 1_120_000, 10_400_000];
        let mut w = vec![0.0; 25];
        let mut set = |i: usize, j: usize, v: f64| {
            w[i * 5 + j] = v;
            w[j * 5 + i] = v;
        };
        set(4, 0, 0.6);
        set(4, 1, 0.6);
        set(4, 2, 0.6);
        set(4, 3, 0.6);
        set(0, 2, 0.2);
        set(0, 3, 0.2);
        set(2, 3, 0.1);
        // q_ij = w_ij * min(p_i, p_j)
        let q: Vec<f64> = (0..25)
            .map(|k| {
                let (i, j) = (k / 5, k % 5);
                if i == j {
                    0.0
                } else {
                    w[k] * p[i].min(p[j])
                }
            })
            .collect();
        (p, sizes, q)
    }

    #[test]
    fn empty_and_zero_budget() {
        let inst = QkpInstance::linear(vec![], vec![], 100).unwrap();
        let sel = solve_exact(&inst).unwrap();
        assert!(sel.chosen.is_empty());
        assert_eq!(sel.objective, 0.0);

        let inst = QkpInstance::linear(vec![1.0, 2.0], vec![10, 20], 0).unwrap();
        let sel = solve_exact(&inst).unwrap();
        assert!(sel.chosen.is_empty());
        assert_eq!(sel.objective, 0.0);
    }

    #[test]
    fn v2x_budget_two_megabits() {
        let (p, sizes, q) = v2x_like();
        let inst = QkpInstance::new(p, q, sizes, 2_000_000).unwrap();
        let sel = solve_exact(&inst).unwrap();
        let oracle = enumerate_optimal(&inst);
        assert_eq!(sel.chosen, oracle.chosen);
        assert_eq!(sel.chosen, vec![0]);
        assert_eq!(sel.objective, 0.9);
    }

    #[test]
    fn v2x_budget_four_megabits_tie_breaks_by_index() {
        let (p, sizes, q) = v2x_like();
        let inst = QkpInstance::new(p, q, sizes, 4_000_000).unwrap();
        let sel = solve_exact(&inst).unwrap();
        let oracle = enumerate_optimal(&inst);
        assert_eq!(sel.objective, oracle.objective);
        // {f, r, lft} ties {f, r, rgt} at 2.0; the lex-smaller set wins.
        assert_eq!(sel.chosen, vec![0, 1, 2]);
        assert!((sel.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_refuses_above_threshold() {
        let n = EXACT_THRESHOLD + 1;
        let inst = QkpInstance::linear(vec![1.0; n], vec![1; n], 10).unwrap();
        assert!(matches!(
            solve_exact(&inst),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn greedy_reduces_to_sorting_without_penalties() {
        // Equal sizes, budget for three items: the top three profits win.
        let inst =
            QkpInstance::linear(vec![0.2, 0.9, 0.4, 0.7, 0.1], vec![10; 5], 30).unwrap();
        let sel = solve_greedy(&inst);
        assert_eq!(sel.chosen, vec![1, 2, 3]);
    }

    #[test]
    fn greedy_empty_instance() {
        let inst = QkpInstance::linear(vec![], vec![], 5).unwrap();
        let sel = solve_greedy(&inst);
        assert!(sel.chosen.is_empty());
    }

    #[test]
    fn greedy_skips_non_positive_marginals() {
        // Item 1 fits but its marginal value after item 0 is negative.
        let q = vec![0.0, 0.9, 0.9, 0.0];
        let inst = QkpInstance::new(vec![1. , 0.5], q, vec![10, 10], 20).unwrap();
        let sel = solve_greedy(&inst);
        assert_eq!(sel.chosen, vec![0]);
    }

    fn random_instance(rng: &mut ChaCha12Rng, n: usize, correlated: bool) -> QkpInstance {
        // Integer-valued profits/penalties keep float sums exact in any order.
        let profits: Vec<f64> = (0..n).map(|_| rng.random_range(0..=100) as f64).collect();
        let sizes: Vec<u64> = (0..n).map(|_| rng.random_range(1..=50)).collect();
        let total: u64 = sizes.iter().sum();
        let budget = rng.random_range(0..=total);
        let mut q = vec![0.0; n * n];
        if correlated {
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.4) {
                        let v = rng.random_range(0..=40) as f64;
                        q[i * n + j] = v;
                        q[j * n + i] = v;
                    }
                }
            }
        }
        QkpInstance::new(profits, q, sizes, budget).unwrap()
    }

    #[test]
    fn exact_matches_enumeration_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(0..=12);
            let inst = random_instance(&mut rng, n, true);
            let sel = solve_exact(&inst).unwrap();
            let oracle = enumerate_optimal(&inst);
            assert_eq!(sel.objective, oracle.objective, "n={n}");
            assert_eq!(sel.total_size_bits, oracle.total_size_bits);
            assert_eq!(sel.chosen, oracle.chosen);
        }
    }

    #[test]
    fn greedy_never_beats_exact_and_local_search_never_hurts() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.random_range(1..=12);
            let inst = random_instance(&mut rng, n, true);
            let exact = solve_exact(&inst).unwrap();
            let greedy = solve_greedy(&inst);
            assert!(greedy.objective <= exact.objective + 1e-9);
            let improved = solve_local_search(&inst, &greedy).unwrap();
            assert!(improved.objective >= greedy.objective);
            assert!(improved.objective <= exact.objective + 1e-9);
            assert!(improved.total_size_bits <= inst.budget());
        }
    }

    #[test]
    fn local_search_from_empty_recovers_v2x_optimum() {
        let (p, sizes, q) = v2x_like();
        let inst = QkpInstance::new(p, q, sizes, 4_000_000).unwrap();
        let sel = solve_local_search(&inst, &Selection::empty()).unwrap();
        assert!((sel.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn local_search_keeps_optimal_seed() {
        let (p, sizes, q) = v2x_like();
        let inst = QkpInstance::new(p, q, sizes, 4_000_000).unwrap();
        let opt = solve_exact(&inst).unwrap();
        let sel = solve_local_search(&inst, &opt).unwrap();
        assert_eq!(sel.objective, opt.objective);
    }

    #[test]
    fn local_search_rejects_infeasible_seed() {
        let inst = QkpInstance::linear(vec![1.0, 1.0], vec![10, 10], 5).unwrap();
        let seed = Selection {
            chosen: vec![0],
            objective: 1.0,
            total_size_bits: 10,
        };
        assert!(matches!(
            solve_local_search(&inst, &seed),
            Err(Error::InfeasibleSeed)
        ));
    }

    #[test]
    fn dispatcher_uses_exact_below_threshold() {
        let (p, sizes, q) = v2x_like();
        let inst = QkpInstance::new(p, q, sizes, 4_000_000).unwrap();
        let sel = solve(&inst);
        assert_eq!(sel.chosen, vec![0, 1, 2]);
    }

    #[test]
    fn dispatcher_large_uncorrelated_picks_top_k() {
        // 44 equal-size items, no penalties; budget for 14.
        let profits: Vec<f64> = (0..44).map(|i| (i % 17 + 1) as f64).collect();
        let inst = QkpInstance::linear(profits.clone(), vec![32; 44], 14 * 32).unwrap();
        let sel = solve(&inst);
        assert_eq!(sel.chosen.len(), 14);
        // Analytic top-k: no unchosen profit may exceed a chosen one.
        let min_chosen = sel
            .chosen
            .iter()
            .map(|&i| profits[i])
            .fold(f64::INFINITY, f64::min);
        for i in 0..44 {
            if !sel.chosen.contains(&i) {
                assert!(profits[i] <= min_chosen);
            }
        }
    }

    #[test]
    fn dispatcher_unconstrained_takes_everything() {
        let inst = QkpInstance::linear(vec![1.0, 2.0, 3.0], vec![5, 5, 5], 100).unwrap();
        let sel = solve(&inst);
        assert_eq!(sel.chosen, vec![0, 1, 2]);
    }

    #[test]
    fn selection_objective_recomputes_from_instance() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.random_range(1..=10);
            let inst = random_instance(&mut rng, n, true);
            let sel = solve(&inst);
            assert_eq!(sel.objective, inst.objective_of(&sel.chosen));
            assert_eq!(sel.total_size_bits, inst.total_size_of(&sel.chosen));
        }
    }

    /// Classic 0/1 knapsack dynamic program over integer sizes, the oracle
    /// for the penalty-free case.
    fn knapsack_dp(profits: &[f64], sizes: &[u64], budget: u64) -> f64 {
        let b = budget as usize;
        let mut dp = vec![0.0f64; b + 1];
        for (i, &s) in sizes.iter().enumerate() {
            let s = s as usize;
            for w in (s..=b).rev() {
                let cand = dp[w - s] + profits[i];
                if cand > dp[w] {
                    dp[w] = cand;
                }
            }
        }
        dp[b]
    }

    #[test]
    fn exact_matches_knapsack_dp_when_uncorrelated() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..100 {
            let n = rng.random_range(1..=15);
            let profits: Vec<f64> = (0..n).map(|_| rng.random_range(0..=100) as f64).collect();
            let sizes: Vec<u64> = (0..n).map(|_| rng.random_range(1..=1000)).collect();
            let budget = rng.random_range(0..=sizes.iter().sum::<u64>());
            let inst = QkpInstance::linear(profits.clone(), sizes.clone(), budget).unwrap();
            let sel = solve_exact(&inst).unwrap();
            let dp = knapsack_dp(&profits, &sizes, budget);
            assert_eq!(sel.objective, dp);
        }
    }

    #[test]
    fn scaling_profits_and_penalties_keeps_the_chosen_set() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=10);
            let inst = random_instance(&mut rng, n, true);
            let base = solve_exact(&inst).unwrap();
            // Powers of two scale floats exactly, so decisions cannot drift.
            for scale in [0.5, 2.0, 8.0] {
                let scaled = QkpInstance::new(
                    (0..n).map(|i| inst.profit(i) * scale).collect(),
                    (0..n * n)
                        .map(|k| inst.penalty(k / n, k % n) * scale)
                        .collect(),
                    inst.sizes.clone(),
                    inst.budget(),
                )
                .unwrap();
                let sel = solve_exact(&scaled).unwrap();
                assert_eq!(sel.chosen, base.chosen, "scale {scale}");
            }
        }
    }
}
