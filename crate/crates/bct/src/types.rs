//! Alphabet, context, series and tree types shared by every other module.
//!
//! Contexts are stored most-recent-symbol-first: `ctx[d]` is the symbol
//! `d + 1` steps in the past, so descending a tree branches on the symbols
//! in the order they are consumed when matching a context. A context's
//! display form reads root-to-leaf, e.g. `02002` for the context whose
//! most recent symbol is 0.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{BctError, Result};

/// Symbols are dense nonnegative integers `0..m`.
pub type Symbol = u8;

/// Maximum number of trees `enumerate_trees` will materialise.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// A finite alphabet `{0, 1, .., m-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    m: usize,
}

impl Alphabet {
    pub fn new(m: usize) -> Result<Self> {
        if !(2..=256).contains(&m) {
            return Err(BctError::BadAlphabet(m));
        }
        Ok(Alphabet { m })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn contains(&self, symbol: Symbol) -> bool {
        (symbol as usize) < self.m
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.m as u16).map(|s| s as Symbol)
    }

    /// Default prior hyperparameter `beta = 1 - 2^{-(m-1)}`.
    pub fn default_beta(&self) -> f64 {
        1.0 - 0.5f64.powi(self.m as i32 - 1)
    }

    pub fn check_symbol(&self, symbol: Symbol) -> Result<()> {
        if self.contains(symbol) {
            Ok(())
        } else {
            Err(BctError::SymbolOutOfRange {
                symbol: symbol as usize,
                alphabet: self.m,
            })
        }
    }
}

/// A context string, most-recent-symbol-first. The empty context is the
/// root `λ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Context(Vec<Symbol>);

impl Context {
    pub fn root() -> Self {
        Context(Vec::new())
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        Context(symbols.to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    /// The child context one step deeper into the past.
    pub fn child(&self, symbol: Symbol) -> Context {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(symbol);
        Context(v)
    }

    pub fn parent(&self) -> Option<Context> {
        if self.is_root() {
            None
        } else {
            Some(Context(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl From<Vec<Symbol>> for Context {
    fn from(v: Vec<Symbol>) -> Self {
        Context(v)
    }
}

impl Borrow<[Symbol]> for Context {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return write!(f, "λ");
        }
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A discrete time series: observations `x_1..x_n` plus an initial context
/// `x_{-k+1}..x_0` supplying conditioning symbols for the first positions.
///
/// The initial context is stored in forward time order (oldest first), the
/// way it appears in a data file.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    alphabet: Alphabet,
    initial_context: Vec<Symbol>,
    body: Vec<Symbol>,
}

impl TimeSeries {
    pub fn new(alphabet: Alphabet, initial_context: &[Symbol], body: Vec<Symbol>) -> Result<Self> {
        for &s in initial_context.iter().chain(body.iter()) {
            alphabet.check_symbol(s)?;
        }
        Ok(TimeSeries {
            alphabet,
            initial_context: initial_context.to_vec(),
            body,
        })
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Number of observations `n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.body.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    #[inline]
    pub fn body(&self) -> &[Symbol] {
        &self.body
    }

    /// Initial context in forward time order.
    #[inline]
    pub fn initial_context(&self) -> &[Symbol] {
        &self.initial_context
    }

    pub fn context_len(&self) -> usize {
        self.initial_context.len()
    }

    /// Symbol `lag` steps before 1-based body position `pos` (lag >= 1),
    /// reading into the initial context where needed.
    pub fn symbol_before(&self, pos: usize, lag: usize) -> Option<Symbol> {
        let t = pos as i64 - lag as i64; // time index of the wanted symbol
        if t >= 1 {
            Some(self.body[(t - 1) as usize])
        } else {
            let idx = self.initial_context.len() as i64 + t - 1;
            if idx >= 0 {
                Some(self.initial_context[idx as usize])
            } else {
                None
            }
        }
    }

    /// Fill `buf` with the `depth` symbols preceding 1-based position `pos`,
    /// most-recent-first. Returns an error if the past is too short.
    pub fn past_of(&self, pos: usize, depth: usize, buf: &mut Vec<Symbol>) -> Result<()> {
        buf.clear();
        for lag in 1..=depth {
            match self.symbol_before(pos, lag) {
                Some(s) => buf.push(s),
                None => {
                    return Err(BctError::PastTooShort {
                        have: lag - 1 + pos.saturating_sub(1),
                        need: depth,
                    })
                }
            }
        }
        Ok(())
    }

    /// The `depth` most recent symbols of the whole series, most-recent-first.
    pub fn tail(&self, depth: usize) -> Result<Vec<Symbol>> {
        let mut buf = Vec::with_capacity(depth);
        self.past_of(self.body.len() + 1, depth, &mut buf)?;
        Ok(buf)
    }
}

/// A proper m-ary context tree, identified with its leaf set.
///
/// Internal nodes are materialised alongside the leaves so the posterior
/// product form can iterate over them directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTree {
    alphabet: Alphabet,
    leaves: BTreeSet<Context>,
    internals: BTreeSet<Context>,
    depth: usize,
}

impl ContextTree {
    /// The tree consisting of the root only.
    pub fn root_only(alphabet: Alphabet) -> Self {
        let mut leaves = BTreeSet::new();
        leaves.insert(Context::root());
        ContextTree {
            alphabet,
            leaves,
            internals: BTreeSet::new(),
            depth: 0,
        }
    }

    /// Build and validate a tree from its leaf set.
    pub fn from_leaves<I>(alphabet: Alphabet, leaves: I) -> Result<Self>
    where
        I: IntoIterator<Item = Context>,
    {
        let leaves: BTreeSet<Context> = leaves.into_iter().collect();
        if leaves.is_empty() {
            return Err(BctError::ImproperTree("empty leaf set".into()));
        }
        let mut internals = BTreeSet::new();
        let mut depth = 0;
        for leaf in &leaves {
            for &s in leaf.symbols() {
                alphabet.check_symbol(s)?;
            }
            depth = depth.max(leaf.len());
            let mut anc = leaf.clone();
            while let Some(p) = anc.parent() {
                internals.insert(p.clone());
                anc = p;
            }
        }
        for leaf in &leaves {
            if internals.contains(leaf) {
                return Err(BctError::ImproperTree(format!(
                    "leaf {leaf} is an ancestor of another leaf"
                )));
            }
        }
        for node in &internals {
            for j in alphabet.symbols() {
                let child = node.child(j);
                if !leaves.contains(&child) && !internals.contains(&child) {
                    return Err(BctError::ImproperTree(format!(
                        "internal node {node} is missing child {child}"
                    )));
                }
            }
        }
        Ok(ContextTree {
            alphabet,
            leaves,
            internals,
            depth,
        })
    }

    /// Construct from parts known to be proper (used by the samplers, which
    /// build trees top-down and cannot violate properness).
    pub(crate) fn from_parts_unchecked(
        alphabet: Alphabet,
        leaves: BTreeSet<Context>,
        internals: BTreeSet<Context>,
        depth: usize,
    ) -> Self {
        ContextTree {
            alphabet,
            leaves,
            internals,
            depth,
        }
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Number of leaves `|T|`.
    #[inline]
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Maximum leaf depth.
    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Context> {
        self.leaves.iter()
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &Context> {
        self.internals.iter()
    }

    pub fn is_leaf(&self, ctx: &Context) -> bool {
        self.leaves.contains(ctx)
    }

    pub fn contains(&self, ctx: &Context) -> bool {
        self.leaves.contains(ctx) || self.internals.contains(ctx)
    }

    /// Number of leaves at depth `d`.
    pub fn leaves_at_depth(&self, d: usize) -> usize {
        self.leaves.iter().filter(|c| c.len() == d).count()
    }

    /// Number of nodes (leaves and internal) at depth `d`.
    pub fn nodes_at_depth(&self, d: usize) -> usize {
        self.leaves.iter().filter(|c| c.len() == d).count()
            + self.internals.iter().filter(|c| c.len() == d).count()
    }

    /// The unique leaf that is a suffix of the recent past.
    ///
    /// `recent_past` is most-recent-first and must supply at least
    /// `self.depth()` symbols.
    pub fn matching_leaf(&self, recent_past: &[Symbol]) -> Result<&Context> {
        for d in 0..=self.depth {
            if d > recent_past.len() {
                break;
            }
            let prefix: &[Symbol] = &recent_past[..d];
            if let Some(leaf) = self.leaves.get(prefix) {
                return Ok(leaf);
            }
            if !self.internals.contains(prefix) {
                return Err(BctError::ImproperTree(format!(
                    "no node covers past prefix of length {d}"
                )));
            }
        }
        Err(BctError::PastTooShort {
            have: recent_past.len(),
            need: self.depth,
        })
    }
}

/// Per-leaf transition probability vectors `θ_s`.
#[derive(Debug, Clone)]
pub struct ParamSet {
    params: std::collections::BTreeMap<Context, Vec<f64>>,
    m: usize,
}

impl ParamSet {
    pub fn new(alphabet: Alphabet, params: std::collections::BTreeMap<Context, Vec<f64>>) -> Result<Self> {
        let m = alphabet.size();
        for (ctx, row) in &params {
            if row.len() != m {
                return Err(BctError::BadProbabilities(format!(
                    "row for {ctx} has {} entries, expected {m}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(BctError::BadProbabilities(format!(
                        "row for {ctx} contains invalid entry {p}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(BctError::BadProbabilities(format!(
                    "row for {ctx} sums to {sum}"
                )));
            }
        }
        Ok(ParamSet { params, m })
    }

    #[inline]
    pub fn get(&self, ctx: &Context) -> Option<&[f64]> {
        self.params.get(ctx).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Context, &[f64])> {
        self.params.iter().map(|(c, v)| (c, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    #[inline]
    pub fn row_len(&self) -> usize {
        self.m
    }
}

/// A variable-memory chain: a tree model plus one probability vector per leaf.
#[derive(Debug, Clone)]
pub struct VariableMemoryChain {
    tree: ContextTree,
    params: ParamSet,
}

impl VariableMemoryChain {
    pub fn new(tree: ContextTree, params: ParamSet) -> Result<Self> {
        if params.len() != tree.leaf_count()
            || tree.leaves().any(|leaf| params.get(leaf).is_none())
        {
            return Err(BctError::BadProbabilities(
                "parameters must be keyed exactly by the tree's leaves".into(),
            ));
        }
        Ok(VariableMemoryChain { tree, params })
    }

    #[inline]
    pub fn tree(&self) -> &ContextTree {
        &self.tree
    }

    #[inline]
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.tree.alphabet()
    }

    /// Next-symbol distribution given the recent past (most-recent-first).
    pub fn next_distribution(&self, recent_past: &[Symbol]) -> Result<&[f64]> {
        let leaf = self.tree.matching_leaf(recent_past)?;
        Ok(self.params.get(leaf).expect("params keyed by leaves"))
    }
}

/// Number of proper m-ary trees of depth at most `d`, observing the
/// enumeration limit.
fn tree_count(m: usize, d: usize) -> Option<u128> {
    let mut n: u128 = 1;
    for _ in 0..d {
        // n_{k+1} = 1 + n_k^m
        let mut p: u128 = 1;
        for _ in 0..m {
            p = p.checked_mul(n)?;
            if p > ENUMERATION_LIMIT {
                return None;
            }
        }
        n = p.checked_add(1)?;
    }
    Some(n)
}

/// Every proper m-ary tree of depth <= `max_depth`, each exactly once.
///
/// Guarded so the enumeration never exceeds [`ENUMERATION_LIMIT`] trees;
/// intended as a brute-force oracle for small `(m, D)`.
pub fn enumerate_trees(alphabet: Alphabet, max_depth: usize) -> Result<Vec<ContextTree>> {
    let m = alphabet.size();
    let count = tree_count(m, max_depth).ok_or(BctError::Capacity {
        what: "tree enumeration",
        count: u128::MAX,
        limit: ENUMERATION_LIMIT,
    })?;
    if count > ENUMERATION_LIMIT {
        return Err(BctError::Capacity {
            what: "tree enumeration",
            count,
            limit: ENUMERATION_LIMIT,
        });
    }

    fn leafsets(m: usize, d: usize) -> Vec<Vec<Vec<Symbol>>> {
        let mut out = vec![vec![Vec::new()]]; // the root-only tree
        if d == 0 {
            return out;
        }
        let sub = leafsets(m, d - 1);
        // all ways of choosing one subtree per child symbol
        let mut picks = vec![0usize; m];
        loop {
            let mut leaves = Vec::new();
            for (j, &p) in picks.iter().enumerate() {
                for rel in &sub[p] {
                    let mut abs = Vec::with_capacity(rel.len() + 1);
                    abs.push(j as Symbol);
                    abs.extend_from_slice(rel);
                    leaves.push(abs);
                }
            }
            out.push(leaves);
            // next combination
            let mut k = 0;
            loop {
                picks[k] += 1;
                if picks[k] < sub.len() {
                    break;
                }
                picks[k] = 0;
                k += 1;
                if k == m {
                    return out;
                }
            }
        }
    }

    let sets = leafsets(m, max_depth);
    let mut trees = Vec::with_capacity(sets.len());
    for set in sets {
        let leaves = set.into_iter().map(Context::from);
        trees.push(ContextTree::from_leaves(alphabet, leaves)?);
    }
    Ok(trees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx(s: &[Symbol]) -> Context {
        Context::from_symbols(s)
    }

    /// The 5th-order ternary tree used throughout the docs: leaves
    /// 1, 2, 00, 01, 022, 0210, 0211, 0212, 0201, 0202, 02000, 02001, 02002.
    pub(crate) fn ternary_depth5_tree() -> ContextTree {
        let alphabet = Alphabet::new(3).unwrap();
        let labels: [&[Symbol]; 13] = [
            &[1],
            &[2],
            &[0, 0],
            &[0, 1],
            &[0, 2, 2],
            &[0, 2, 1, 0],
            &[0, 2, 1, 1],
            &[0, 2, 1, 2],
            &[0, 2, 0, 1],
            &[0, 2, 0, 2],
            &[0, 2, 0, 0, 0],
            &[0, 2, 0, 0, 1],
            &[0, 2, 0, 0, 2],
        ];
        ContextTree::from_leaves(alphabet, labels.iter().map(|l| ctx(l))).unwrap()
    }

    #[test]
    fn root_tree_matches_everything() {
        let tree = ContextTree::root_only(Alphabet::new(2).unwrap());
        let leaf = tree.matching_leaf(&[1, 0, 1]).unwrap();
        assert!(leaf.is_root());
        let leaf = tree.matching_leaf(&[]).unwrap();
        assert!(leaf.is_root());
    }

    #[test]
    fn fifth_order_tree_lookup() {
        let tree = ternary_depth5_tree();
        assert_eq!(tree.leaf_count(), 13);
        assert_eq!(tree.depth(), 5);
        // most recent symbol 0, then 2, 0, 0, 2 going back in time
        let leaf = tree.matching_leaf(&[0, 2, 0, 0, 2]).unwrap();
        assert_eq!(leaf.to_string(), "02002");
        let leaf = tree.matching_leaf(&[1, 1, 1, 1, 1]).unwrap();
        assert_eq!(leaf.to_string(), "1");
    }

    #[test]
    fn complete_depth2_lookup() {
        let alphabet = Alphabet::new(2).unwrap();
        let leaves = [[0, 0], [0, 1], [1, 0], [1, 1]].map(|l| ctx(&l));
        let tree = ContextTree::from_leaves(alphabet, leaves).unwrap();
        let leaf = tree.matching_leaf(&[1, 0, 1, 1]).unwrap();
        assert_eq!(leaf.to_string(), "10");
    }

    #[test]
    fn improper_leaf_sets_are_rejected() {
        let alphabet = Alphabet::new(2).unwrap();
        // missing sibling of 0
        assert!(ContextTree::from_leaves(alphabet, [ctx(&[0])]).is_err());
        // a leaf that is an ancestor of another leaf
        assert!(
            ContextTree::from_leaves(alphabet, [ctx(&[0]), ctx(&[1]), ctx(&[1, 0]), ctx(&[1, 1])])
                .is_err()
        );
        assert!(ContextTree::from_leaves(alphabet, std::iter::empty()).is_err());
    }

    #[test]
    fn past_too_short_is_reported() {
        let alphabet = Alphabet::new(2).unwrap();
        let leaves = [[0, 0], [0, 1], [1, 0], [1, 1]].map(|l| ctx(&l));
        let tree = ContextTree::from_leaves(alphabet, leaves).unwrap();
        assert!(matches!(
            tree.matching_leaf(&[1]),
            Err(BctError::PastTooShort { .. })
        ));
    }

    #[test]
    fn enumeration_counts_follow_the_recurrence() {
        let a2 = Alphabet::new(2).unwrap();
        assert_eq!(enumerate_trees(a2, 0).unwrap().len(), 1);
        assert_eq!(enumerate_trees(a2, 1).unwrap().len(), 2);
        assert_eq!(enumerate_trees(a2, 2).unwrap().len(), 5);
        assert_eq!(enumerate_trees(a2, 3).unwrap().len(), 26);
        assert_eq!(enumerate_trees(a2, 4).unwrap().len(), 677);
        let a3 = Alphabet::new(3).unwrap();
        assert_eq!(enumerate_trees(a3, 1).unwrap().len(), 2);
        assert_eq!(enumerate_trees(a3, 2).unwrap().len(), 9);

        // N(D) = 1 + N(D-1)^m
        let mut n = 1usize;
        for d in 1..=4 {
            n = 1 + n * n;
            assert_eq!(enumerate_trees(a2, d).unwrap().len(), n);
        }
    }

    #[test]
    fn enumeration_is_guarded_and_duplicate_free() {
        let a2 = Alphabet::new(2).unwrap();
        assert!(matches!(
            enumerate_trees(a2, 6),
            Err(BctError::Capacity { .. })
        ));

        let trees = enumerate_trees(a2, 3).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for t in &trees {
            let key: Vec<Context> = t.leaves().cloned().collect();
            assert!(seen.insert(key), "duplicate tree in enumeration");
            assert!(t.depth() <= 3);
        }
    }

    fn random_proper_tree(alphabet: Alphabet, max_depth: usize, rng: &mut StdRng) -> ContextTree {
        fn grow(
            alphabet: Alphabet,
            ctx: &Context,
            max_depth: usize,
            rng: &mut StdRng,
            leaves: &mut Vec<Context>,
        ) {
            if ctx.len() == max_depth || rng.random::<f64>() < 0.55 {
                leaves.push(ctx.clone());
            } else {
                for j in alphabet.symbols() {
                    grow(alphabet, &ctx.child(j), max_depth, rng, leaves);
                }
            }
        }
        let mut leaves = Vec::new();
        grow(alphabet, &Context::root(), max_depth, rng, &mut leaves);
        ContextTree::from_leaves(alphabet, leaves).unwrap()
    }

    #[test]
    fn matching_leaf_is_a_unique_suffix() {
        let mut rng = StdRng::seed_from_u64(42);
        for trial in 0..10_000 {
            let m = if trial % 2 == 0 { 2 } else { 3 };
            let alphabet = Alphabet::new(m).unwrap();
            let tree = random_proper_tree(alphabet, 4, &mut rng);
            let past: Vec<Symbol> = (0..6).map(|_| rng.random_range(0..m as u8)).collect();
            let leaf = tree.matching_leaf(&past).unwrap();
            assert_eq!(&past[..leaf.len()], leaf.symbols());
            let matches = tree
                .leaves()
                .filter(|l| past.len() >= l.len() && &past[..l.len()] == l.symbols())
                .count();
            assert_eq!(matches, 1, "leaf match must be unique");
        }
    }

    #[test]
    fn series_indexing_reaches_into_the_initial_context() {
        let alphabet = Alphabet::new(3).unwrap();
        let x = TimeSeries::new(alphabet, &[2, 1], vec![0, 1, 2]).unwrap();
        assert_eq!(x.symbol_before(1, 1), Some(1)); // x_0
        assert_eq!(x.symbol_before(1, 2), Some(2)); // x_{-1}
        assert_eq!(x.symbol_before(1, 3), None);
        assert_eq!(x.symbol_before(3, 1), Some(1)); // x_2
        assert_eq!(x.tail(2).unwrap(), vec![2, 1]);
        let mut buf = Vec::new();
        x.past_of(4, 2, &mut buf).unwrap();
        assert_eq!(buf, vec![2, 1]); // past of the (hypothetical) next symbol
    }

    #[test]
    fn param_set_validation() {
        let alphabet = Alphabet::new(2).unwrap();
        let mut map = std::collections::BTreeMap::new();
        map.insert(Context::root(), vec![0.25, 0.75]);
        assert!(ParamSet::new(alphabet, map.clone()).is_ok());
        map.insert(Context::root(), vec![0.3, 0.8]);
        assert!(ParamSet::new(alphabet, map.clone()).is_err());
        map.insert(Context::root(), vec![1.0]);
        assert!(ParamSet::new(alphabet, map).is_err());
    }

    #[test]
    fn chain_requires_params_on_exactly_the_leaves() {
        let alphabet = Alphabet::new(2).unwrap();
        let tree =
            ContextTree::from_leaves(alphabet, [ctx(&[0]), ctx(&[1])]).unwrap();
        let mut map = std::collections::BTreeMap::new();
        map.insert(ctx(&[0]), vec![0.9, 0.1]);
        map.insert(ctx(&[1]), vec![0.2, 0.8]);
        let chain =
            VariableMemoryChain::new(tree.clone(), ParamSet::new(alphabet, map.clone()).unwrap())
                .unwrap();
        assert_eq!(chain.next_distribution(&[1]).unwrap(), &[0.2, 0.8]);

        map.remove(&ctx(&[1]));
        map.insert(Context::root(), vec![0.5, 0.5]);
        let bad = ParamSet::new(alphabet, map).unwrap();
        assert!(VariableMemoryChain::new(tree, bad).is_err());
    }
}
