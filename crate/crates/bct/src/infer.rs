//! Posterior predictive distribution, sequential prediction, and Monte
//! Carlo summaries of posterior functionals.

use rayon::prelude::*;

use crate::ctw::{CountTable, WeightedTree};
use crate::error::{BctError, Result};
use crate::math::log_sum_exp;
use crate::sample::JointSample;
use crate::types::{Alphabet, Context, ContextTree, ParamSet, Symbol};

/// Next-symbol distribution averaged over models and parameters, together
/// with the per-depth leaf weights `γ_0..γ_D` it mixes.
#[derive(Debug, Clone)]
pub struct PredictiveDistribution {
    pub probs: Vec<f64>,
    pub leaf_weights: Vec<f64>,
}

/// Posterior probability that the context of each length `0..=depth` is a
/// leaf, given branching probabilities along the path.
fn leaf_weights_from_pb(log_pbs: &[f64]) -> Vec<f64> {
    let depth = log_pbs.len();
    let mut gamma = Vec::with_capacity(depth + 1);
    let mut survive = 1.0f64;
    for &lpb in log_pbs {
        let pb = lpb.exp();
        gamma.push(survive * pb);
        survive *= 1.0 - pb;
    }
    gamma.push(survive);
    gamma
}

/// KT posterior-mean probability of `symbol` under a count vector.
#[inline]
fn kt_mean(a: &[u64], total: u64, m: usize, symbol: usize) -> f64 {
    (a[symbol] as f64 + 0.5) / (total as f64 + m as f64 / 2.0)
}

/// Posterior predictive distribution of the next symbol given the recent
/// past (most-recent-first, exactly `depth` symbols).
pub fn predictive(
    wt: &WeightedTree,
    counts: &CountTable,
    recent_past: &[Symbol],
) -> Result<PredictiveDistribution> {
    let depth = wt.depth();
    if recent_past.len() < depth {
        return Err(BctError::PastTooShort {
            have: recent_past.len(),
            need: depth,
        });
    }
    if recent_past.len() > depth {
        return Err(BctError::ContextTooLong {
            len: recent_past.len(),
            max: depth,
        });
    }
    let m = wt.alphabet().size();
    for &s in recent_past {
        wt.alphabet().check_symbol(s)?;
    }

    let mut log_pbs = Vec::with_capacity(depth);
    for i in 0..depth {
        let ctx = Context::from_symbols(&recent_past[..i]);
        log_pbs.push(wt.log_pb(&ctx));
    }
    let gamma = leaf_weights_from_pb(&log_pbs);

    let zero = vec![0u64; m];
    let mut probs = vec![0.0f64; m];
    for (i, &g) in gamma.iter().enumerate() {
        let ctx = Context::from_symbols(&recent_past[..i]);
        let (a, total) = match counts.counts(&ctx) {
            Some(a) => (a, a.iter().sum::<u64>()),
            None => (zero.as_slice(), 0),
        };
        for (sym, p) in probs.iter_mut().enumerate() {
            *p += g * kt_mean(a, total, m, sym);
        }
    }
    Ok(PredictiveDistribution {
        probs,
        leaf_weights: gamma,
    })
}

const NO_CHILD: u32 = u32::MAX;

struct SeqNode {
    counts: Vec<u64>,
    total: u64,
    log_pe: f64,
    log_pw: f64,
    child_sum: f64,
    children: Vec<u32>,
}

impl SeqNode {
    fn new(m: usize) -> Self {
        SeqNode {
            counts: vec![0; m],
            total: 0,
            log_pe: 0.0,
            log_pw: 0.0,
            child_sum: 0.0,
            children: vec![NO_CHILD; m],
        }
    }
}

/// Incremental CTW predictor: counts and weighted probabilities are
/// updated context-by-context as symbols arrive, so a full pass over a
/// series costs O(n * depth) and one-step-ahead predictions are always
/// available. The accumulated root weighted probability equals the batch
/// recursion's on the same data.
pub struct SequentialPredictor {
    alphabet: Alphabet,
    depth: usize,
    beta: f64,
    log_beta: f64,
    log_1m_beta: f64,
    nodes: Vec<SeqNode>,
    recent: Vec<Symbol>, // most-recent-first, length <= depth
    consumed: u64,
}

impl SequentialPredictor {
    /// `initial_context` is in forward time order and must supply at least
    /// `depth` symbols.
    pub fn new(
        alphabet: Alphabet,
        depth: usize,
        beta: f64,
        initial_context: &[Symbol],
    ) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(BctError::BadBeta(beta));
        }
        if initial_context.len() < depth {
            return Err(BctError::PastTooShort {
                have: initial_context.len(),
                need: depth,
            });
        }
        for &s in initial_context {
            alphabet.check_symbol(s)?;
        }
        let recent: Vec<Symbol> = initial_context.iter().rev().take(depth).copied().collect();
        Ok(SequentialPredictor {
            alphabet,
            depth,
            beta,
            log_beta: beta.ln(),
            log_1m_beta: (1.0 - beta).ln(),
            nodes: vec![SeqNode::new(alphabet.size())],
            recent,
            consumed: 0,
        })
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of symbols consumed so far.
    pub fn len(&self) -> u64 {
        self.consumed
    }

    pub fn is_empty(&self) -> bool {
        self.consumed == 0
    }

    /// Log prior predictive likelihood of everything consumed so far.
    pub fn log_prior_predictive(&self) -> f64 {
        self.nodes[0].log_pw
    }

    /// The current recent past, most-recent-first.
    pub fn recent_past(&self) -> &[Symbol] {
        &self.recent
    }

    /// Predictive distribution for the next symbol.
    pub fn predict(&self) -> PredictiveDistribution {
        let m = self.alphabet.size();
        let mut log_pbs = Vec::with_capacity(self.depth);
        let mut idx = Some(0usize);
        let mut path_nodes = Vec::with_capacity(self.depth + 1);
        path_nodes.push(idx);
        for d in 0..self.depth {
            if d < self.depth {
                if let Some(i) = idx {
                    let node = &self.nodes[i];
                    log_pbs.push(self.log_beta + node.log_pe - node.log_pw);
                } else {
                    log_pbs.push(self.log_beta);
                }
            }
            idx = idx.and_then(|i| {
                let c = self.nodes[i].children[self.recent[d] as usize];
                if c == NO_CHILD {
                    None
                } else {
                    Some(c as usize)
                }
            });
            path_nodes.push(idx);
        }
        let gamma = leaf_weights_from_pb(&log_pbs);
        let zero = vec![0u64; m];
        let mut probs = vec![0.0f64; m];
        for (i, &g) in gamma.iter().enumerate() {
            let (a, total) = match path_nodes[i] {
                Some(n) => (self.nodes[n].counts.as_slice(), self.nodes[n].total),
                None => (zero.as_slice(), 0),
            };
            for (sym, p) in probs.iter_mut().enumerate() {
                *p += g * kt_mean(a, total, m, sym);
            }
        }
        PredictiveDistribution {
            probs,
            leaf_weights: gamma,
        }
    }

    /// Consume one observed symbol, updating counts and weighted
    /// probabilities along its context path.
    pub fn update(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet.check_symbol(symbol)?;
        let m = self.alphabet.size();
        let sym = symbol as usize;

        // descend, creating the path for the current context
        let mut path = Vec::with_capacity(self.depth + 1);
        path.push(0usize);
        for d in 0..self.depth {
            let s = self.recent[d] as usize;
            let cur = *path.last().unwrap();
            let next = self.nodes[cur].children[s];
            let child = if next == NO_CHILD {
                let c = self.nodes.len() as u32;
                self.nodes[cur].children[s] = c;
                self.nodes.push(SeqNode::new(m));
                c as usize
            } else {
                next as usize
            };
            path.push(child);
        }

        // update counts and estimated probabilities along the path
        for &i in &path {
            let node = &mut self.nodes[i];
            node.log_pe +=
                ((node.counts[sym] as f64 + 0.5) / (node.total as f64 + m as f64 / 2.0)).ln();
            node.counts[sym] += 1;
            node.total += 1;
        }

        // recompute weighted probabilities bottom-up
        for d in (0..path.len()).rev() {
            let i = path[d];
            let old = self.nodes[i].log_pw;
            let new = if d == self.depth {
                self.nodes[i].log_pe
            } else {
                log_sum_exp(
                    self.log_beta + self.nodes[i].log_pe,
                    self.log_1m_beta + self.nodes[i].child_sum,
                )
            };
            self.nodes[i].log_pw = new;
            if d > 0 {
                let parent = path[d - 1];
                self.nodes[parent].child_sum += new - old;
            }
        }

        if self.depth > 0 {
            self.recent.insert(0, symbol);
            self.recent.truncate(self.depth);
        }
        self.consumed += 1;
        Ok(())
    }
}

/// Binned counts over a sample range.
#[derive(Debug, Clone)]
pub struct Histogram {
    /// `bins + 1` edges; bin `i` covers `[edges[i], edges[i+1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize) -> Histogram {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            return Histogram {
                edges: vec![min, max],
                counts: vec![values.len() as u64],
            };
        }
        let width = (max - min) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let mut b = ((v - min) / width) as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }
}

/// One approximately-Gaussian component of a multi-modal posterior.
#[derive(Debug, Clone, Copy)]
pub struct ModeComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Knobs for [`PosteriorSummary`] construction.
#[derive(Debug, Clone)]
pub struct SummaryConfig {
    /// Histogram bin count.
    pub bins: usize,
    /// Equal-tailed credible interval level.
    pub credible_level: f64,
    /// A histogram valley splits two modes when its count is at most this
    /// fraction of the smaller neighbouring peak.
    pub valley_ratio: f64,
    /// Peaks must reach this fraction of the global maximum to count.
    pub min_peak_fraction: f64,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig {
            bins: 100,
            credible_level: 0.95,
            valley_ratio: 0.5,
            min_peak_fraction: 0.05,
        }
    }
}

/// Monte Carlo summary of a scalar functional's posterior.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// Histogram-peak mode estimate.
    pub mode: f64,
    /// `(q, value)` pairs on a fixed grid.
    pub quantiles: Vec<(f64, f64)>,
    pub credible_interval: (f64, f64),
    pub credible_level: f64,
    pub histogram: Histogram,
    /// Two-component split `(dominant, secondary)` when the histogram has a
    /// qualifying interior valley.
    pub modes: Option<(ModeComponent, ModeComponent)>,
}

const QUANTILE_GRID: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    // Welford's recurrence; the population variance (denominator N) matches
    // reporting the spread of the Monte Carlo cloud itself
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    (mean, (m2 / values.len() as f64).sqrt())
}

impl PosteriorSummary {
    pub fn from_values(values: Vec<f64>, cfg: &SummaryConfig) -> Result<Self> {
        if values.is_empty() {
            return Err(BctError::NoSamples);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(BctError::NonFiniteSample { index, value });
        }
        let (mean, sd) = mean_sd(&values);
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantiles: Vec<(f64, f64)> = QUANTILE_GRID
            .iter()
            .map(|&q| (q, order_statistic(&sorted, q)))
            .collect();
        let tail = (1.0 - cfg.credible_level) / 2.0;
        let credible_interval = (
            order_statistic(&sorted, tail),
            order_statistic(&sorted, 1.0 - tail),
        );
        let histogram = Histogram::build(&values, cfg.bins);
        let peak = histogram
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mode = histogram.bin_center(peak.min(histogram.bin_count() - 1));
        let modes = split_modes(&values, &histogram, cfg);
        Ok(PosteriorSummary {
            samples: values,
            mean,
            sd,
            mode,
            quantiles,
            credible_interval,
            credible_level: cfg.credible_level,
            histogram,
            modes,
        })
    }

    pub fn is_bimodal(&self) -> bool {
        self.modes.is_some()
    }
}

/// Detect a two-mode shape: the split point is the deepest interior
/// histogram minimum whose flanking peaks both qualify.
fn split_modes(
    values: &[f64],
    hist: &Histogram,
    cfg: &SummaryConfig,
) -> Option<(ModeComponent, ModeComponent)> {
    let bins = hist.bin_count();
    if bins < 3 {
        return None;
    }
    let global_max = *hist.counts.iter().max()? as f64;
    let mut left_max = vec![0u64; bins];
    let mut right_max = vec![0u64; bins];
    let mut run = 0u64;
    for i in 0..bins {
        left_max[i] = run;
        run = run.max(hist.counts[i]);
    }
    run = 0;
    for i in (0..bins).rev() {
        right_max[i] = run;
        run = run.max(hist.counts[i]);
    }
    let mut best: Option<usize> = None;
    for i in 1..bins - 1 {
        let flank = left_max[i].min(right_max[i]) as f64;
        if flank < cfg.min_peak_fraction * global_max {
            continue;
        }
        if (hist.counts[i] as f64) <= cfg.valley_ratio * flank {
            match best {
                Some(b) if hist.counts[b] <= hist.counts[i] => {}
                _ => best = Some(i),
            }
        }
    }
    let split = hist.bin_center(best?);
    let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for &v in values {
        if v <= split {
            lo.push(v);
        } else {
            hi.push(v);
        }
    }
    if lo.is_empty() || hi.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let comp = |vals: &[f64]| {
        let (m, s) = mean_sd(vals);
        ModeComponent {
            weight: vals.len() as f64 / n,
            mean: m,
            sd: s,
        }
    };
    let (a, b) = (comp(&lo), comp(&hi));
    Some(if a.weight >= b.weight { (a, b) } else { (b, a) })
}

/// Summarise the posterior of a scalar functional `F(T, θ)` over a joint
/// sample stream. The empirical mean approximates the posterior mean; the
/// histogram peak is the mode estimate.
pub fn estimate_functional<F>(
    samples: &[JointSample],
    f: F,
    cfg: &SummaryConfig,
) -> Result<PosteriorSummary>
where
    F: Fn(&ContextTree, &ParamSet) -> f64 + Sync,
{
    if samples.is_empty() {
        return Err(BctError::NoSamples);
    }
    let values: Vec<f64> = samples
        .par_iter()
        .map(|s| f(&s.tree, &s.params))
        .collect();
    PosteriorSummary::from_values(values, cfg)
}

/// Rao-Blackwellised posterior-mean estimate of the next-symbol
/// distribution at a queried context: averages the Dirichlet posterior
/// means at each sampled tree's matching leaf instead of the sampled
/// parameters themselves.
pub fn rao_blackwell_params(
    trees: &[ContextTree],
    counts: &CountTable,
    recent_past: &[Symbol],
) -> Result<Vec<f64>> {
    if trees.is_empty() {
        return Err(BctError::NoSamples);
    }
    if recent_past.len() > counts.depth() {
        return Err(BctError::ContextTooLong {
            len: recent_past.len(),
            max: counts.depth(),
        });
    }
    let m = counts.alphabet().size();
    let mut acc = vec![0.0f64; m];
    for tree in trees {
        let leaf = tree.matching_leaf(recent_past)?;
        let a = counts.count_vector(leaf);
        let total: u64 = a.iter().sum();
        for (sym, v) in acc.iter_mut().enumerate() {
            *v += kt_mean(&a, total, m, sym);
        }
    }
    for v in &mut acc {
        *v /= trees.len() as f64;
    }
    Ok(acc)
}

/// Empirical distribution of sampled model depths: Markov order posterior.
pub fn order_posterior(trees: &[ContextTree], max_depth: usize) -> Result<Vec<u64>> {
    if trees.is_empty() {
        return Err(BctError::NoSamples);
    }
    let mut hist = vec![0u64; max_depth + 1];
    for t in trees {
        if t.depth() > max_depth {
            return Err(BctError::ContextTooLong {
                len: t.depth(),
                max: max_depth,
            });
        }
        hist[t.depth()] += 1;
    }
    Ok(hist)
}
