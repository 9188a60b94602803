//! Entropy rate of variable-memory chains: exact computation through the
//! induced first-order chain, a Monte Carlo path approximation for state
//! spaces too large to solve, and the posterior-over-entropy pipeline.

use rand::Rng;
use rayon::prelude::*;

use crate::ctw::{build_counts, run_ctw};
use crate::error::{BctError, Result};
use crate::infer::{PosteriorSummary, SummaryConfig};
use crate::sample::{sample_params, sample_posterior_tree, substream_rng};
use crate::types::{Symbol, TimeSeries, VariableMemoryChain};

/// Largest state space the exact solver will touch.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;
/// Path length of the Monte Carlo fallback.
pub const DEFAULT_MC_PATH_LEN: usize = 1_000_000;

const DENSE_SOLVE_MAX: usize = 128;
const DENSE_FALLBACK_MAX: usize = 4096;
const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITERS: usize = 1_000_000;

/// The first-order chain on blocks of length `depth(T)` induced by a
/// variable-memory chain. State `z` encodes the last `k` symbols
/// most-recent-first in base-m digits, lowest digit most recent.
pub struct InducedChain {
    m: usize,
    k: usize,
    states: usize,
    row_of_state: Vec<u32>,
    rows: Vec<Vec<f64>>,
}

impl InducedChain {
    pub fn new(chain: &VariableMemoryChain) -> Result<Self> {
        Self::with_state_cap(chain, DEFAULT_STATE_CAP)
    }

    pub fn with_state_cap(chain: &VariableMemoryChain, cap: usize) -> Result<Self> {
        let m = chain.alphabet().size();
        let k = chain.depth();
        let states = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if states > cap as u128 {
            return Err(BctError::Capacity {
                what: "induced chain state space",
                count: states,
                limit: cap as u128,
            });
        }
        let states = states as usize;
        let leaves: Vec<_> = chain.tree().leaves().collect();
        let rows: Vec<Vec<f64>> = leaves
            .iter()
            .map(|l| chain.params().get(l).expect("keyed by leaves").to_vec())
            .collect();
        let mut row_of_state = vec![0u32; states];
        let mut digits = vec![0 as Symbol; k];
        for (z, slot) in row_of_state.iter_mut().enumerate() {
            decode_state(z, m, &mut digits);
            let leaf = chain.tree().matching_leaf(&digits)?;
            let pos = leaves
                .iter()
                .position(|l| *l == leaf)
                .expect("leaf is in the leaf list");
            *slot = pos as u32;
        }
        Ok(InducedChain {
            m,
            k,
            states,
            row_of_state,
            rows,
        })
    }

    #[inline]
    pub fn state_count(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn block_len(&self) -> usize {
        self.k
    }

    /// Transition probabilities out of a state: entry `j` is the chance of
    /// emitting symbol `j` (and moving to state `j + m * (z mod m^{k-1})`).
    #[inline]
    pub fn transition_row(&self, state: usize) -> &[f64] {
        &self.rows[self.row_of_state[state] as usize]
    }

    /// Whether the chain has a unique stationary distribution (exactly one
    /// closed communicating class).
    fn has_unique_stationary(&self) -> bool {
        if self.states <= 1 {
            return true;
        }
        if self.rows.iter().all(|r| r.iter().all(|&p| p > 0.0)) {
            // strictly positive rows: every state reaches every other in k steps
            return true;
        }
        let m = self.m;
        let shift = self.states / m;
        let succ = |z: usize, j: usize| j + m * (z % shift);
        // Kosaraju: forward finish order, then reverse-graph sweep
        let mut order = Vec::with_capacity(self.states);
        let mut seen = vec![false; self.states];
        for start in 0..self.states {
            if seen[start] {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            seen[start] = true;
            while let Some(top) = stack.last_mut() {
                let z = top.0;
                if top.1 < m {
                    let sym = top.1;
                    top.1 += 1;
                    if self.transition_row(z)[sym] > 0.0 {
                        let t = succ(z, sym);
                        if !seen[t] {
                            seen[t] = true;
                            stack.push((t, 0));
                        }
                    }
                } else {
                    order.push(z);
                    stack.pop();
                }
            }
        }
        // reverse adjacency
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); self.states];
        for z in 0..self.states {
            let row = self.transition_row(z);
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    rev[succ(z, j)].push(z as u32);
                }
            }
        }
        let mut comp = vec![u32::MAX; self.states];
        let mut n_comp = 0u32;
        for &z in order.iter().rev() {
            if comp[z] != u32::MAX {
                continue;
            }
            let mut stack = vec![z];
            comp[z] = n_comp;
            while let Some(v) = stack.pop() {
                for &u in &rev[v] {
                    if comp[u as usize] == u32::MAX {
                        comp[u as usize] = n_comp;
                        stack.push(u as usize);
                    }
                }
            }
            n_comp += 1;
        }
        // closed classes: components with no edge leaving them
        let mut closed = vec![true; n_comp as usize];
        for z in 0..self.states {
            let row = self.transition_row(z);
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 && comp[succ(z, j)] != comp[z] {
                    closed[comp[z] as usize] = false;
                }
            }
        }
        closed.iter().filter(|&&c| c).count() == 1
    }

    /// Stationary distribution: dense solve for small state spaces, damped
    /// power iteration otherwise.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        if self.states == 1 {
            return Ok(vec![1.0]);
        }
        if !self.has_unique_stationary() {
            return Err(BctError::NotIrreducible);
        }
        let pi = if self.states <= DENSE_SOLVE_MAX {
            self.stationary_dense()?
        } else {
            match self.stationary_power() {
                Some(pi) => pi,
                None if self.states <= DENSE_FALLBACK_MAX => self.stationary_dense()?,
                None => return Err(BctError::SolverFailed),
            }
        };
        // sanity: residual must be tiny
        let residual = self.residual_l1(&pi);
        if residual > 1e-10 {
            return Err(BctError::SolverFailed);
        }
        Ok(pi)
    }

    fn apply(&self, pi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let shift = self.states / self.m;
        for (z, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = self.transition_row(z);
            let base = self.m * (z % shift);
            for (j, &q) in row.iter().enumerate() {
                out[j + base] += p * q;
            }
        }
    }

    fn residual_l1(&self, pi: &[f64]) -> f64 {
        let mut next = vec![0.0; self.states];
        self.apply(pi, &mut next);
        pi.iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    fn stationary_power(&self) -> Option<Vec<f64>> {
        let mut pi = vec![1.0 / self.states as f64; self.states];
        let mut next = vec![0.0; self.states];
        for _ in 0..POWER_MAX_ITERS {
            self.apply(&pi, &mut next);
            // half-step damping keeps periodic chains convergent
            let mut diff = 0.0;
            let mut sum = 0.0;
            for (p, n) in pi.iter_mut().zip(&next) {
                let v = 0.5 * *p + 0.5 * n;
                diff += (v - *p).abs();
                *p = v;
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                for p in pi.iter_mut() {
                    *p /= sum;
                }
            }
            if diff < POWER_TOL {
                return Some(pi);
            }
        }
        None
    }

    fn stationary_dense(&self) -> Result<Vec<f64>> {
        let s = self.states;
        let shift = self.states / self.m;
        // A = P^T - I with the last row replaced by ones; rhs = e_last
        let mut a = vec![0.0f64; s * s];
        for z in 0..s {
            let row = self.transition_row(z);
            let base = self.m * (z % shift);
            for (j, &p) in row.iter().enumerate() {
                a[(j + base) * s + z] += p;
            }
            a[z * s + z] -= 1.0;
        }
        for col in 0..s {
            a[(s - 1) * s + col] = 1.0;
        }
        let mut b = vec![0.0f64; s];
        b[s - 1] = 1.0;
        // Gaussian elimination with partial pivoting
        for col in 0..s {
            let mut piv = col;
            let mut best = a[col * s + col].abs();
            for r in col + 1..s {
                let v = a[r * s + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-300 {
                return Err(BctError::SolverFailed);
            }
            if piv != col {
                for c in 0..s {
                    a.swap(col * s + c, piv * s + c);
                }
                b.swap(col, piv);
            }
            let d = a[col * s + col];
            for r in col + 1..s {
                let f = a[r * s + col] / d;
                if f == 0.0 {
                    continue;
                }
                for c in col..s {
                    a[r * s + c] -= f * a[col * s + c];
                }
                b[r] -= f * b[col];
            }
        }
        let mut pi = vec![0.0f64; s];
        for r in (0..s).rev() {
            let mut v = b[r];
            for c in r + 1..s {
                v -= a[r * s + c] * pi[c];
            }
            pi[r] = v / a[r * s + r];
        }
        let mut sum = 0.0;
        for p in pi.iter_mut() {
            if *p < 0.0 {
                *p = 0.0; // round-off
            }
            sum += *p;
        }
        for p in pi.iter_mut() {
            *p /= sum;
        }
        Ok(pi)
    }

    /// Exact entropy rate in nats per symbol, weighting each state's
    /// next-symbol entropy by the stationary distribution.
    pub fn entropy_rate(&self) -> Result<f64> {
        let pi = self.stationary()?;
        let mut h = 0.0;
        for (z, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = self.transition_row(z);
            let mut hz = 0.0;
            for &q in row {
                if q > 0.0 {
                    hz -= q * q.ln();
                }
            }
            h += p * hz;
        }
        Ok(h)
    }
}

#[inline]
fn decode_state(mut z: usize, m: usize, digits: &mut [Symbol]) {
    for d in digits.iter_mut() {
        *d = (z % m) as Symbol;
        z /= m;
    }
}

/// Exact entropy rate via the induced chain's stationary distribution.
///
/// Errors with a capacity error when the state space exceeds the cap
/// (use [`entropy_rate_mc`] there) and with a domain error when the
/// induced chain has no unique stationary distribution.
pub fn entropy_rate_exact(chain: &VariableMemoryChain) -> Result<f64> {
    InducedChain::new(chain)?.entropy_rate()
}

/// Exact entropy rate with an explicit state-space cap.
pub fn entropy_rate_exact_capped(chain: &VariableMemoryChain, cap: usize) -> Result<f64> {
    InducedChain::with_state_cap(chain, cap)?.entropy_rate()
}

/// Monte Carlo entropy rate: minus the per-symbol log likelihood of a
/// simulated path of length `path_len`, after a burn-in of `10 * depth`
/// steps from a uniformly drawn start state.
pub fn entropy_rate_mc<R: Rng + ?Sized>(
    chain: &VariableMemoryChain,
    path_len: usize,
    rng: &mut R,
) -> Result<f64> {
    if path_len == 0 {
        return Err(BctError::NoSamples);
    }
    let m = chain.alphabet().size();
    let k = chain.depth();
    let mut state: Vec<Symbol> = (0..k).map(|_| rng.random_range(0..m as u16) as Symbol).collect();
    let mut log_sum = 0.0f64;
    let burn = 10 * k;
    for step in 0..burn + path_len {
        let row = chain.next_distribution(&state)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut sym = m - 1;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                sym = j;
                break;
            }
        }
        if step >= burn {
            log_sum += row[sym].ln();
        }
        if k > 0 {
            state.insert(0, sym as Symbol);
            state.truncate(k);
        }
    }
    Ok(-log_sum / path_len as f64)
}

/// Knobs for the posterior-over-entropy pipeline.
#[derive(Debug, Clone)]
pub struct EntropyConfig {
    /// Exact evaluation is used up to this many induced states.
    pub state_cap: usize,
    /// Path length for the Monte Carlo fallback beyond the cap.
    pub mc_path_len: usize,
    pub summary: SummaryConfig,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            state_cap: DEFAULT_STATE_CAP,
            mc_path_len: DEFAULT_MC_PATH_LEN,
            summary: SummaryConfig::default(),
        }
    }
}

/// Sample the posterior of the entropy rate: draw `(T, θ)` jointly from
/// the posterior, evaluate the entropy rate of each sampled chain (exactly
/// when the induced state space fits, by simulation otherwise), and
/// summarise.
pub fn entropy_posterior(
    x: &TimeSeries,
    depth: usize,
    beta: f64,
    n_samples: usize,
    seed: u64,
    cfg: &EntropyConfig,
) -> Result<PosteriorSummary> {
    if n_samples == 0 {
        return Err(BctError::NoSamples);
    }
    let counts = build_counts(x, depth)?;
    let wt = run_ctw(&counts, beta)?;
    let values: Result<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream_rng(seed, i as u64);
            let tree = sample_posterior_tree(&wt, &mut rng);
            let params = sample_params(&tree, &counts, &mut rng)?;
            let chain = VariableMemoryChain::new(tree, params)?;
            match entropy_rate_exact_capped(&chain, cfg.state_cap) {
                Ok(h) => Ok(h),
                Err(BctError::Capacity { .. }) => {
                    entropy_rate_mc(&chain, cfg.mc_path_len, &mut rng)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    PosteriorSummary::from_values(values?, &cfg.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Alphabet, Context, ContextTree, ParamSet};
    use std::collections::BTreeMap;

    fn chain_from(m: usize, leaves: &[(&[Symbol], &[f64])]) -> VariableMemoryChain {
        let alphabet = Alphabet::new(m).unwrap();
        let tree = ContextTree::from_leaves(
            alphabet,
            leaves.iter().map(|(c, _)| Context::from_symbols(c)),
        )
        .unwrap();
        let mut params = BTreeMap::new();
        for (c, row) in leaves {
            params.insert(Context::from_symbols(c), row.to_vec());
        }
        VariableMemoryChain::new(tree, ParamSet::new(alphabet, params).unwrap()).unwrap()
    }

    fn binary_first_order() -> VariableMemoryChain {
        chain_from(2, &[(&[0], &[0.9, 0.1]), (&[1], &[0.2, 0.8])])
    }

    fn binary_entropy(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn iid_uniform_is_log_m() {
        let chain = chain_from(2, &[(&[], &[0.5, 0.5])]);
        let h = entropy_rate_exact(&chain).unwrap();
        assert!((h - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn first_order_binary_chain_hand_solve() {
        let chain = binary_first_order();
        let expect = (2.0 / 3.0) * binary_entropy(0.1) + (1.0 / 3.0) * binary_entropy(0.2);
        let h = entropy_rate_exact(&chain).unwrap();
        assert!((h - expect).abs() < 1e-12, "h={h} expect={expect}");

        let ind = InducedChain::new(&chain).unwrap();
        let pi = ind.stationary().unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(ind.residual_l1(&pi) < 1e-10);
    }

    #[test]
    fn power_iteration_agrees_with_the_dense_solve() {
        // depth-2 ternary chain exercises both paths
        let rows: [&[f64]; 9] = [
            &[0.5, 0.3, 0.2],
            &[0.1, 0.6, 0.3],
            &[0.3, 0.3, 0.4],
            &[0.2, 0.5, 0.3],
            &[0.25, 0.25, 0.5],
            &[0.4, 0.4, 0.2],
            &[0.15, 0.45, 0.4],
            &[0.6, 0.2, 0.2],
            &[0.35, 0.35, 0.3],
        ];
        let leaves: Vec<(Vec<Symbol>, &[f64])> = (0..9)
            .map(|i| (vec![(i / 3) as Symbol, (i % 3) as Symbol], rows[i]))
            .collect();
        let refs: Vec<(&[Symbol], &[f64])> =
            leaves.iter().map(|(c, r)| (c.as_slice(), *r)).collect();
        let chain = chain_from(3, &refs);
        let ind = InducedChain::new(&chain).unwrap();
        let dense = ind.stationary_dense().unwrap();
        let power = ind.stationary_power().unwrap();
        for (a, b) in dense.iter().zip(&power) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn refining_a_leaf_leaves_the_rate_unchanged() {
        let chain = binary_first_order();
        let h0 = entropy_rate_exact(&chain).unwrap();
        // split leaf 1 into children with identical parameters
        let refined = chain_from(
            2,
            &[
                (&[0], &[0.9, 0.1]),
                (&[1, 0], &[0.2, 0.8]),
                (&[1, 1], &[0.2, 0.8]),
            ],
        );
        let h1 = entropy_rate_exact(&refined).unwrap();
        assert!((h0 - h1).abs() < 1e-10);
    }

    #[test]
    fn rate_is_within_bounds_for_skewed_chains() {
        let chain = chain_from(
            3,
            &[
                (&[0], &[0.98, 0.01, 0.01]),
                (&[1], &[0.01, 0.98, 0.01]),
                (&[2], &[0.4, 0.3, 0.3]),
            ],
        );
        let h = entropy_rate_exact(&chain).unwrap();
        assert!(h >= 0.0 && h <= 3.0f64.ln());
    }

    #[test]
    fn periodic_but_irreducible_chains_solve() {
        let chain = chain_from(2, &[(&[0], &[0.0, 1.0]), (&[1], &[1.0, 0.0])]);
        let ind = InducedChain::new(&chain).unwrap();
        let pi = ind.stationary().unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12);
        assert_eq!(entropy_rate_exact(&chain).unwrap(), 0.0);
    }

    #[test]
    fn reducible_chains_are_a_domain_error() {
        let chain = chain_from(2, &[(&[0], &[1.0, 0.0]), (&[1], &[0.0, 1.0])]);
        assert!(matches!(
            entropy_rate_exact(&chain),
            Err(BctError::NotIrreducible)
        ));
    }

    #[test]
    fn state_cap_is_enforced() {
        let chain = binary_first_order();
        assert!(matches!(
            entropy_rate_exact_capped(&chain, 1),
            Err(BctError::Capacity { .. })
        ));
    }

    #[test]
    fn mc_estimate_on_iid_uniform_is_exact() {
        let chain = chain_from(2, &[(&[], &[0.5, 0.5])]);
        let mut rng = substream_rng(5, 0);
        let h = entropy_rate_mc(&chain, 1000, &mut rng).unwrap();
        assert!((h - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mc_estimate_approaches_the_exact_value() {
        let chain = binary_first_order();
        let exact = entropy_rate_exact(&chain).unwrap();
        let mut rng = substream_rng(7, 0);
        let h = entropy_rate_mc(&chain, 200_000, &mut rng).unwrap();
        assert!((h - exact).abs() < 0.01, "mc={h} exact={exact}");
    }

    #[test]
    fn zero_data_entropy_posterior_concentrates_near_log_m() {
        // prior over the entropy rate: most mass near log m for beta close to 1
        let alphabet = Alphabet::new(2).unwrap();
        let x = crate::types::TimeSeries::new(alphabet, &[0, 0, 0], vec![]).unwrap();
        let s = entropy_posterior(&x, 3, 0.9, 2000, 13, &EntropyConfig::default()).unwrap();
        assert!(s.mean > 0.3 && s.mean <= 2.0f64.ln() + 1e-9);
        let frac_high = s
            .samples
            .iter()
            .filter(|&&h| h > 0.5 * 2.0f64.ln())
            .count() as f64
            / s.samples.len() as f64;
        assert!(frac_high > 0.5, "mass should sit near log 2, got {frac_high}");
    }
}
