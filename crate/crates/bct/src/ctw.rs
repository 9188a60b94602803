//! Count tables and the context-tree weighting recursion.
//!
//! Everything here runs in the log domain. Only contexts that actually
//! occur in the data are materialised; absent contexts follow the
//! conventions `P_e = 1` (empty count vector) and `P_b = beta`, which keeps
//! memory at O(n * depth) instead of O(m^depth).

use statrs::function::gamma::ln_gamma;

use crate::error::{BctError, Result};
use crate::math::{log1m_exp, log_sum_exp};
use crate::types::{Alphabet, Context, ContextTree, Symbol, TimeSeries};

const NO_CHILD: u32 = u32::MAX;

/// Count vectors `a_s` for every context of length <= depth occurring in
/// the data, stored as an explicit tree keyed by context.
#[derive(Debug, Clone)]
pub struct CountTable {
    alphabet: Alphabet,
    depth: usize,
    nodes: Vec<CountNode>,
    depths: Vec<u16>,
}

#[derive(Debug, Clone)]
struct CountNode {
    counts: Vec<u64>,
    total: u64,
    children: Vec<u32>,
}

impl CountNode {
    fn new(m: usize) -> Self {
        CountNode {
            counts: vec![0; m],
            total: 0,
            children: vec![NO_CHILD; m],
        }
    }
}

impl CountTable {
    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total count at the root, equal to the series length `n`.
    pub fn n(&self) -> u64 {
        self.nodes[0].total
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn node_index(&self, ctx: &[Symbol]) -> Option<usize> {
        let mut idx = 0usize;
        for &s in ctx {
            let next = self.nodes[idx].children[s as usize];
            if next == NO_CHILD {
                return None;
            }
            idx = next as usize;
        }
        Some(idx)
    }

    /// Count vector for a context, if it occurs in the data.
    pub fn counts(&self, ctx: &Context) -> Option<&[u64]> {
        self.node_index(ctx.symbols())
            .map(|i| self.nodes[i].counts.as_slice())
    }

    /// Count vector for a context, all zeros if absent.
    pub fn count_vector(&self, ctx: &Context) -> Vec<u64> {
        match self.counts(ctx) {
            Some(c) => c.to_vec(),
            None => vec![0; self.alphabet.size()],
        }
    }

    /// Total `M_s`, zero if the context is absent.
    pub fn total(&self, ctx: &Context) -> u64 {
        self.node_index(ctx.symbols())
            .map_or(0, |i| self.nodes[i].total)
    }

    /// All (context, count vector) pairs, parents before children.
    pub fn iter(&self) -> Vec<(Context, &[u64])> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, Context::root())];
        while let Some((idx, ctx)) = stack.pop() {
            for (j, &c) in self.nodes[idx].children.iter().enumerate() {
                if c != NO_CHILD {
                    stack.push((c as usize, ctx.child(j as Symbol)));
                }
            }
            out.push((ctx, self.nodes[idx].counts.as_slice()));
        }
        out
    }

    pub(crate) fn node_depth(&self, idx: usize) -> usize {
        self.depths[idx] as usize
    }

    pub(crate) fn raw_counts(&self, idx: usize) -> &[u64] {
        &self.nodes[idx].counts
    }

    pub(crate) fn raw_children(&self, idx: usize) -> &[u32] {
        &self.nodes[idx].children
    }
}

/// Build the count table of `x` up to the given depth: for each position
/// `i = 1..n`, the count `a_s(x_i)` is incremented for every suffix `s`
/// of the past of `x_i`, of lengths `0..=depth`. The initial context only
/// supplies conditioning symbols; it is never counted as an observation.
pub fn build_counts(x: &TimeSeries, depth: usize) -> Result<CountTable> {
    let m = x.alphabet().size();
    if !x.is_empty() && x.context_len() < depth {
        return Err(BctError::PastTooShort {
            have: x.context_len(),
            need: depth,
        });
    }
    let mut nodes = vec![CountNode::new(m)];
    let mut depths: Vec<u16> = vec![0];
    let mut past = Vec::with_capacity(depth);
    for pos in 1..=x.len() {
        let sym = x.body()[pos - 1] as usize;
        x.past_of(pos, depth, &mut past)?;
        let mut idx = 0usize;
        nodes[0].counts[sym] += 1;
        nodes[0].total += 1;
        for (d, &s) in past.iter().enumerate() {
            let next = nodes[idx].children[s as usize];
            let child = if next == NO_CHILD {
                let c = nodes.len() as u32;
                nodes[idx].children[s as usize] = c;
                nodes.push(CountNode::new(m));
                depths.push(d as u16 + 1);
                c as usize
            } else {
                next as usize
            };
            nodes[child].counts[sym] += 1;
            nodes[child].total += 1;
            idx = child;
        }
    }
    Ok(CountTable {
        alphabet: x.alphabet(),
        depth,
        nodes,
        depths,
    })
}

/// Log of the Krichevsky-Trofimov sequence probability of a count vector:
/// the Dirichlet(1/2,..,1/2) marginal likelihood of the counts.
pub fn log_pe(a: &[u64]) -> f64 {
    let m = a.len() as f64;
    let total: u64 = a.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut lp = 0.0;
    for &aj in a {
        if aj > 0 {
            lp += ln_gamma(aj as f64 + 0.5) - ln_gamma(0.5);
        }
    }
    lp - ln_gamma(total as f64 + m / 2.0) + ln_gamma(m / 2.0)
}

/// Per-node estimated, weighted and branching probabilities (log domain)
/// over the contexts of the data.
#[derive(Debug, Clone)]
pub struct WeightedTree {
    alphabet: Alphabet,
    depth: usize,
    beta: f64,
    log_beta: f64,
    log_1m_beta: f64,
    nodes: Vec<WtNode>,
    depths: Vec<u16>,
}

#[derive(Debug, Clone)]
struct WtNode {
    log_pe: f64,
    log_pw: f64,
    log_pb: f64,
    children: Vec<u32>,
}

impl WeightedTree {
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

    #[inline]
    pub fn log_beta(&self) -> f64 {
        self.log_beta
    }

    /// Root weighted probability: the log prior predictive likelihood
    /// `log P(x)` of the whole series.
    pub fn log_pw_root(&self) -> f64 {
        self.nodes[0].log_pw
    }

    fn node_index(&self, ctx: &[Symbol]) -> Option<usize> {
        let mut idx = 0usize;
        for &s in ctx {
            let next = self.nodes[idx].children[s as usize];
            if next == NO_CHILD {
                return None;
            }
            idx = next as usize;
        }
        Some(idx)
    }

    /// Log estimated probability of a context (0 when absent).
    pub fn log_pe(&self, ctx: &Context) -> f64 {
        self.node_index(ctx.symbols())
            .map_or(0.0, |i| self.nodes[i].log_pe)
    }

    /// Log weighted probability of a context (0 when absent).
    pub fn log_pw(&self, ctx: &Context) -> f64 {
        self.node_index(ctx.symbols())
            .map_or(0.0, |i| self.nodes[i].log_pw)
    }

    /// Log branching probability of a context of length < depth;
    /// `log beta` for contexts that never occur in the data.
    pub fn log_pb(&self, ctx: &Context) -> f64 {
        debug_assert!(ctx.len() < self.depth || self.depth == 0);
        self.node_index(ctx.symbols())
            .map_or(self.log_beta, |i| self.nodes[i].log_pb)
    }

    pub(crate) fn root_node(&self) -> usize {
        0
    }

    pub(crate) fn child_of(&self, idx: usize, symbol: Symbol) -> Option<usize> {
        let c = self.nodes[idx].children[symbol as usize];
        if c == NO_CHILD {
            None
        } else {
            Some(c as usize)
        }
    }

    pub(crate) fn node_log_pb(&self, idx: usize) -> f64 {
        self.nodes[idx].log_pb
    }
}

/// Run the CTW recursion over the support of a count table.
///
/// Starting at the deepest contexts and moving towards the root, the
/// weighted probability of each node mixes its own estimated probability
/// with the product of its children's weighted probabilities; absent
/// children contribute the all-zero-count value 1.
pub fn run_ctw(counts: &CountTable, beta: f64) -> Result<WeightedTree> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(BctError::BadBeta(beta));
    }
    let log_beta = beta.ln();
    let log_1m_beta = (1.0 - beta).ln();
    let depth = counts.depth();
    let n_nodes = counts.node_count();
    let mut nodes: Vec<WtNode> = Vec::with_capacity(n_nodes);
    for idx in 0..n_nodes {
        nodes.push(WtNode {
            log_pe: 0.0,
            log_pw: 0.0,
            log_pb: 0.0,
            children: counts.raw_children(idx).to_vec(),
        });
    }
    // children always have larger indices than their parent
    for idx in (0..n_nodes).rev() {
        let lpe = log_pe(counts.raw_counts(idx));
        let d = counts.node_depth(idx);
        let lpw = if d == depth {
            lpe
        } else {
            let mut child_sum = 0.0;
            for &c in &nodes[idx].children {
                if c != NO_CHILD {
                    child_sum += nodes[c as usize].log_pw;
                }
            }
            log_sum_exp(log_beta + lpe, log_1m_beta + child_sum)
        };
        let node = &mut nodes[idx];
        node.log_pe = lpe;
        node.log_pw = lpw;
        node.log_pb = log_beta + lpe - lpw;
    }
    Ok(WeightedTree {
        alphabet: counts.alphabet(),
        depth,
        beta,
        log_beta,
        log_1m_beta,
        nodes,
        depths: (0..n_nodes).map(|i| counts.node_depth(i) as u16).collect(),
    })
}

/// Log prior probability of a tree: `(|T|-1) log alpha + (|T|-L_D(T)) log beta`
/// with `alpha = (1-beta)^{1/(m-1)}`.
pub fn log_prior(tree: &ContextTree, max_depth: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(BctError::BadBeta(beta));
    }
    if tree.depth() > max_depth {
        return Err(BctError::ContextTooLong {
            len: tree.depth(),
            max: max_depth,
        });
    }
    let m = tree.alphabet().size();
    let log_alpha = (1.0 - beta).ln() / (m as f64 - 1.0);
    let leaves = tree.leaf_count() as f64;
    let at_max = tree.leaves_at_depth(max_depth) as f64;
    Ok((leaves - 1.0) * log_alpha + (leaves - at_max) * beta.ln())
}

/// Log marginal likelihood `log P(x|T)`: the sum of the leaves' estimated
/// probabilities. Leaves absent from the data contribute zero.
pub fn log_marginal_likelihood(counts: &CountTable, tree: &ContextTree) -> Result<f64> {
    if tree.depth() > counts.depth() {
        return Err(BctError::ContextTooLong {
            len: tree.depth(),
            max: counts.depth(),
        });
    }
    let mut lp = 0.0;
    for leaf in tree.leaves() {
        if let Some(a) = counts.counts(leaf) {
            lp += log_pe(a);
        }
    }
    Ok(lp)
}

/// Log posterior probability of a tree, in product form over its nodes:
/// internal nodes contribute `log(1 - P_b)`, leaves at depth < D contribute
/// `log P_b`, and leaves at the maximum depth contribute nothing
/// (`P_b = 1` there by convention).
pub fn log_posterior(tree: &ContextTree, wt: &WeightedTree) -> Result<f64> {
    if tree.depth() > wt.depth() {
        return Err(BctError::ContextTooLong {
            len: tree.depth(),
            max: wt.depth(),
        });
    }
    let max_depth = wt.depth();
    let mut lp = 0.0;
    for node in tree.internal_nodes() {
        lp += log1m_exp(wt.log_pb(node));
    }
    for leaf in tree.leaves() {
        if leaf.len() < max_depth {
            lp += wt.log_pb(leaf);
        }
    }
    Ok(lp)
}

/// Maximum a posteriori tree and its log posterior probability.
///
/// Uses the maximising variant of the weighting recursion:
/// `P_m = max(beta * P_e, (1-beta) * prod_j P_m(child j))` below the
/// maximum depth and `P_m = P_e` at it, with ties broken toward the
/// smaller tree.
pub fn map_tree(wt: &WeightedTree) -> (ContextTree, f64) {
    let m = wt.alphabet.size();
    let depth = wt.depth;
    let log_beta = wt.log_beta;
    let log_1m_beta = wt.log_1m_beta;

    // log P_m for contexts absent from the data, by depth
    let mut absent = vec![0.0f64; depth + 1];
    let mut absent_is_leaf = vec![true; depth + 1];
    for d in (0..depth).rev() {
        let split = log_1m_beta + m as f64 * absent[d + 1];
        if log_beta >= split {
            absent[d] = log_beta;
            absent_is_leaf[d] = true;
        } else {
            absent[d] = split;
            absent_is_leaf[d] = false;
        }
    }
    if depth == 0 {
        absent_is_leaf[0] = true;
    }

    let n_nodes = wt.nodes.len();
    let mut log_pm = vec![0.0f64; n_nodes];
    let mut is_leaf = vec![true; n_nodes];
    for idx in (0..n_nodes).rev() {
        let d = wt.depths[idx] as usize;
        let node = &wt.nodes[idx];
        if d == depth {
            log_pm[idx] = node.log_pe;
            continue;
        }
        let mut split = log_1m_beta;
        for (j, &c) in node.children.iter().enumerate() {
            let _ = j;
            split += if c == NO_CHILD {
                absent[d + 1]
            } else {
                log_pm[c as usize]
            };
        }
        let keep = log_beta + node.log_pe;
        if keep >= split {
            log_pm[idx] = keep;
        } else {
            log_pm[idx] = split;
            is_leaf[idx] = false;
        }
    }

    // materialise the argmax tree
    let mut leaves = std::collections::BTreeSet::new();
    let mut internals = std::collections::BTreeSet::new();
    let mut max_leaf_depth = 0usize;
    let mut stack: Vec<(Option<usize>, Context)> = vec![(Some(0), Context::root())];
    while let Some((node, ctx)) = stack.pop() {
        let d = ctx.len();
        let leafy = match node {
            Some(idx) => d == depth || is_leaf[idx],
            None => d == depth || absent_is_leaf[d],
        };
        if leafy {
            max_leaf_depth = max_leaf_depth.max(d);
            leaves.insert(ctx);
        } else {
            for j in 0..m {
                let child = node.and_then(|idx| {
                    let c = wt.nodes[idx].children[j];
                    if c == NO_CHILD {
                        None
                    } else {
                        Some(c as usize)
                    }
                });
                stack.push((child, ctx.child(j as Symbol)));
            }
            internals.insert(ctx);
        }
    }
    let tree =
        ContextTree::from_parts_unchecked(wt.alphabet, leaves, internals, max_leaf_depth);
    let lp = log_posterior(&tree, wt).expect("map tree respects the depth bound");
    (tree, lp)
}
