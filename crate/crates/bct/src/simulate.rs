//! Synthetic series generation from variable-memory chains, plus the three
//! reference chains used by the reproduction experiments.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BctError, Result};
use crate::types::{
    Alphabet, Context, ContextTree, ParamSet, Symbol, TimeSeries, VariableMemoryChain,
};

/// Generate `n` symbols from a chain, conditioning on `initial_context`
/// (forward time order, at least `depth(chain)` symbols). Reproducible by
/// seed.
pub fn generate(
    chain: &VariableMemoryChain,
    n: usize,
    initial_context: &[Symbol],
    seed: u64,
) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(chain, n, initial_context, &mut rng)
}

pub fn generate_with_rng<R: Rng + ?Sized>(
    chain: &VariableMemoryChain,
    n: usize,
    initial_context: &[Symbol],
    rng: &mut R,
) -> Result<TimeSeries> {
    let depth = chain.depth();
    if initial_context.len() < depth {
        return Err(BctError::PastTooShort {
            have: initial_context.len(),
            need: depth,
        });
    }
    for &s in initial_context {
        chain.alphabet().check_symbol(s)?;
    }
    let mut recent: Vec<Symbol> = initial_context.iter().rev().take(depth).copied().collect();
    let mut body = Vec::with_capacity(n);
    for _ in 0..n {
        let row = chain.next_distribution(&recent)?;
        let sym = draw_symbol(row, rng);
        body.push(sym);
        if depth > 0 {
            recent.insert(0, sym);
            recent.truncate(depth);
        }
    }
    TimeSeries::new(chain.alphabet(), initial_context, body)
}

fn draw_symbol<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> Symbol {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j as Symbol;
        }
    }
    (row.len() - 1) as Symbol
}

/// A reference chain with its known minimal model and reported entropy rate.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub chain: VariableMemoryChain,
    /// Entropy rate of the chain, nats per symbol.
    pub entropy_rate: f64,
}

impl Fixture {
    /// The minimal model of the chain.
    pub fn minimal_model(&self) -> &ContextTree {
        self.chain.tree()
    }

    /// Simulate a series of length `n` carrying an initial context of
    /// `context_len` symbols. The start is drawn by burn-in: `10 * depth`
    /// steps from an all-zeros state are discarded.
    pub fn series(&self, n: usize, context_len: usize, seed: u64) -> Result<TimeSeries> {
        let depth = self.chain.depth();
        if context_len < depth {
            return Err(BctError::PastTooShort {
                have: context_len,
                need: depth,
            });
        }
        let burn = (10 * context_len.max(depth)).max(context_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let warm = generate_with_rng(&self.chain, burn, &vec![0; depth], &mut rng)?;
        let context = &warm.body()[burn - context_len..];
        let mut recent_rng = rng; // continue the same stream after burn-in
        let out = generate_with_rng(&self.chain, n, context, &mut recent_rng)?;
        Ok(out)
    }
}

/// Fixture registry: `ternary5`, `binary3`, `bimodal6`.
pub fn fixture(name: &str) -> Result<Fixture> {
    match name {
        "ternary5" => Ok(ternary5()),
        "binary3" => Ok(binary3()),
        "bimodal6" => Ok(bimodal6()),
        other => Err(BctError::UnknownFixture(other.to_string())),
    }
}

pub fn fixture_names() -> [&'static str; 3] {
    ["ternary5", "binary3", "bimodal6"]
}

fn build_chain(m: usize, leaves: &[(&[Symbol], &[f64])]) -> VariableMemoryChain {
    let alphabet = Alphabet::new(m).expect("valid alphabet");
    let tree = ContextTree::from_leaves(
        alphabet,
        leaves.iter().map(|(c, _)| Context::from_symbols(c)),
    )
    .expect("fixture tree is proper");
    let mut params = BTreeMap::new();
    for (c, row) in leaves {
        params.insert(Context::from_symbols(c), row.to_vec());
    }
    VariableMemoryChain::new(tree, ParamSet::new(alphabet, params).expect("rows sum to 1"))
        .expect("params keyed by leaves")
}

/// 5th-order ternary chain on the 13-leaf tree
/// {1, 2, 00, 01, 022, 0210, 0211, 0212, 0201, 0202, 02000, 02001, 02002}.
pub fn ternary5() -> Fixture {
    let leaves: [(&[Symbol], &[f64]); 13] = [
        (&[1], &[0.4, 0.4, 0.2]),
        (&[2], &[0.2, 0.4, 0.4]),
        (&[0, 0], &[0.4, 0.2, 0.4]),
        (&[0, 1], &[0.3, 0.6, 0.1]),
        (&[0, 2, 2], &[0.5, 0.3, 0.2]),
        (&[0, 2, 1, 0], &[0.35, 0.55, 0.1]),
        (&[0, 2, 1, 1], &[0.05, 0.25, 0.7]),
        (&[0, 2, 1, 2], &[0.1, 0.3, 0.6]),
        (&[0, 2, 0, 1], &[0.8, 0.05, 0.15]),
        (&[0, 2, 0, 2], &[0.1, 0.2, 0.7]),
        (&[0, 2, 0, 0, 0], &[0.3, 0.45, 0.25]),
        (&[0, 2, 0, 0, 1], &[0.1, 0.1, 0.8]),
        (&[0, 2, 0, 0, 2], &[0.7, 0.2, 0.1]),
    ];
    Fixture {
        name: "ternary5",
        chain: build_chain(3, &leaves),
        entropy_rate: 1.02,
    }
}

/// 3rd-order binary chain: the complete depth-3 tree pruned at node 11.
pub fn binary3() -> Fixture {
    let leaves: [(&[Symbol], &[f64]); 7] = [
        (&[0, 0, 0], &[0.68, 0.32]),
        (&[0, 0, 1], &[0.97, 0.03]),
        (&[0, 1, 0], &[0.91, 0.09]),
        (&[0, 1, 1], &[0.64, 0.36]),
        (&[1, 0, 0], &[0.85, 0.15]),
        (&[1, 0, 1], &[0.74, 0.26]),
        (&[1, 1], &[0.41, 0.59]),
    ];
    Fixture {
        name: "binary3",
        chain: build_chain(2, &leaves),
        entropy_rate: 0.4815,
    }
}

/// Row `i` of the 6-state transition matrix driving the depth-3 chain
/// whose next symbol depends on the past only through the symbol three
/// steps back.
const BIMODAL_Q: [[f64; 6]; 6] = [
    [0.5, 0.2, 0.1, 0.0, 0.05, 0.15],
    [0.4, 0.0, 0.4, 0.2, 0.0, 0.0],
    [0.3, 0.1, 0.23, 0.12, 0.05, 0.2],
    [0.05, 0.1, 0.05, 0.05, 0.03, 0.72],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.1, 0.2, 0.3, 0.2, 0.05, 0.15],
];

/// 3rd-order chain over a 6-letter alphabet: the complete depth-3 tree,
/// with each leaf's parameters depending only on its depth-3 symbol. Its
/// entropy posterior is bimodal at moderate sample sizes.
pub fn bimodal6() -> Fixture {
    let mut leaves: Vec<(Vec<Symbol>, Vec<f64>)> = Vec::with_capacity(216);
    for a in 0..6u8 {
        for b in 0..6u8 {
            for i in 0..6u8 {
                leaves.push((vec![a, b, i], BIMODAL_Q[i as usize].to_vec()));
            }
        }
    }
    let refs: Vec<(&[Symbol], &[f64])> = leaves
        .iter()
        .map(|(c, r)| (c.as_slice(), r.as_slice()))
        .collect();
    Fixture {
        name: "bimodal6",
        chain: build_chain(6, &refs),
        entropy_rate: 1.355,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy_rate_exact;

    #[test]
    fn unknown_fixture_name_errors() {
        assert!(matches!(
            fixture("ternary6"),
            Err(BctError::UnknownFixture(_))
        ));
        for name in fixture_names() {
            assert!(fixture(name).is_ok());
        }
    }

    #[test]
    fn fixture_rates_match_their_reported_values() {
        for name in fixture_names() {
            let f = fixture(name).unwrap();
            let h = entropy_rate_exact(&f.chain).unwrap();
            assert!(
                (h - f.entropy_rate).abs() < 0.005,
                "{name}: exact {h} vs reported {}",
                f.entropy_rate
            );
        }
    }

    #[test]
    fn ternary5_literals_are_pinned() {
        let f = ternary5();
        assert_eq!(f.chain.tree().leaf_count(), 13);
        assert_eq!(f.chain.depth(), 5);
        let get = |s: &[Symbol]| {
            f.chain
                .params()
                .get(&Context::from_symbols(s))
                .unwrap()
                .to_vec()
        };
        assert_eq!(get(&[1]), vec![0.4, 0.4, 0.2]);
        assert_eq!(get(&[0, 2, 0, 0, 2]), vec![0.7, 0.2, 0.1]);
        assert_eq!(get(&[0, 2, 1, 1]), vec![0.05, 0.25, 0.7]);
        // transcription checksum over every literal
        let mut sum = 0.0;
        for (_, row) in f.chain.params().iter() {
            for (j, &v) in row.iter().enumerate() {
                sum += (j + 1) as f64 * v;
            }
        }
        assert!((sum - 26.4).abs() < 1e-9, "checksum {sum}");
    }

    #[test]
    fn binary3_shape_and_literals_are_pinned() {
        let f = binary3();
        assert_eq!(f.chain.tree().leaf_count(), 7);
        assert_eq!(f.chain.depth(), 3);
        // node 11 is a leaf; every other depth-2 node is internal
        let t = f.chain.tree();
        assert!(t.is_leaf(&Context::from_symbols(&[1, 1])));
        assert!(!t.is_leaf(&Context::from_symbols(&[0, 1])));
        let mut sum = 0.0;
        for (_, row) in f.chain.params().iter() {
            for (j, &v) in row.iter().enumerate() {
                sum += (j + 1) as f64 * v;
            }
        }
        assert!((sum - 8.8).abs() < 1e-9, "checksum {sum}");
    }

    #[test]
    fn bimodal6_depends_only_on_the_third_symbol_back() {
        let f = bimodal6();
        assert_eq!(f.chain.tree().leaf_count(), 216);
        for a in [0u8, 3, 5] {
            for b in [1u8, 4] {
                for i in 0..6u8 {
                    let row = f
                        .chain
                        .params()
                        .get(&Context::from_symbols(&[a, b, i]))
                        .unwrap();
                    assert_eq!(row, &BIMODAL_Q[i as usize][..]);
                }
            }
        }
        for row in BIMODAL_Q {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_rows_give_a_determined_path() {
        let chain = build_chain(
            2,
            &[(&[0], &[0.0, 1.0]), (&[1], &[1.0, 0.0])],
        );
        let x = generate(&chain, 8, &[0], 9).unwrap();
        assert_eq!(x.body(), &[1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn generation_is_reproducible_by_seed() {
        let f = ternary5();
        let a = f.series(500, 10, 123).unwrap();
        let b = f.series(500, 10, 123).unwrap();
        let c = f.series(500, 10, 124).unwrap();
        assert_eq!(a.body(), b.body());
        assert_eq!(a.initial_context(), b.initial_context());
        assert_ne!(a.body(), c.body());
        assert_eq!(a.len(), 500);
        assert_eq!(a.context_len(), 10);
    }

    #[test]
    fn short_context_is_rejected() {
        let f = ternary5();
        assert!(matches!(
            generate(&f.chain, 10, &[0, 1], 1),
            Err(BctError::PastTooShort { .. })
        ));
        assert!(f.series(10, 3, 1).is_err());
    }

    #[test]
    fn empirical_transition_frequencies_converge() {
        let f = binary3();
        let x = f.series(200_000, 3, 31).unwrap();
        // count per-leaf next-symbol frequencies
        let mut hits: BTreeMap<Context, [u64; 2]> = BTreeMap::new();
        let mut past = Vec::new();
        for pos in 1..=x.len() {
            x.past_of(pos, 3, &mut past).unwrap();
            let leaf = f.chain.tree().matching_leaf(&past).unwrap().clone();
            hits.entry(leaf).or_insert([0, 0])[x.body()[pos - 1] as usize] += 1;
        }
        for (leaf, counts) in hits {
            let total = (counts[0] + counts[1]) as f64;
            let p_hat = counts[1] as f64 / total;
            let p = f.chain.params().get(&leaf).unwrap()[1];
            let se = (p * (1.0 - p) / total).sqrt();
            assert!(
                (p_hat - p).abs() < 4.0 * se.max(1e-4),
                "leaf {leaf}: {p_hat} vs {p} (n={total})"
            );
        }
    }
}
