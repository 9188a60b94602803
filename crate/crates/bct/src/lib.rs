//! Bayesian context trees for discrete time series.
//!
//! Variable-memory Markov chains are represented by proper m-ary context
//! trees with one transition vector per leaf. This crate computes the
//! exact model posterior induced by an exponential tree prior and
//! Dirichlet(1/2) parameter priors, draws exact i.i.d. samples from the
//! joint posterior on models and parameters via its branching-process
//! form, and builds on those samples for prediction and fully-Bayesian
//! entropy-rate estimation.
//!
//! The pieces, bottom to top:
//!
//! - [`types`]: alphabets, contexts, series, trees, parameter sets.
//! - [`ctw`]: count tables, the weighting recursion, and exact prior /
//!   likelihood / posterior scores of individual trees.
//! - [`sample`]: i.i.d. tree and parameter samplers.
//! - [`infer`]: the posterior predictive distribution, incremental
//!   prediction, and Monte Carlo summaries of posterior functionals.
//! - [`entropy`]: entropy rate of a chain (exact or simulated) and the
//!   posterior distribution of the entropy rate of a series.
//! - [`baselines`]: plug-in, Lempel-Ziv and weighting-based point
//!   estimators for comparison.
//! - [`simulate`]: series generation and reference chains.
//!
//! ```
//! use bct::prelude::*;
//!
//! let chain = bct::simulate::fixture("ternary5").unwrap();
//! let x = chain.series(500, 10, 7).unwrap();
//! let counts = build_counts(&x, 10).unwrap();
//! let wt = run_ctw(&counts, x.alphabet().default_beta()).unwrap();
//! let (map, log_post) = map_tree(&wt);
//! assert!(log_post <= 0.0);
//! assert!(map.leaf_count() >= 1);
//! ```

pub mod baselines;
pub mod ctw;
pub mod entropy;
pub mod error;
pub mod infer;
pub mod math;
pub mod sample;
pub mod simulate;
pub mod types;

pub use error::{BctError, Result};

/// The common working set.
pub mod prelude {
    pub use crate::ctw::{
        build_counts, log_marginal_likelihood, log_pe, log_posterior, log_prior, map_tree,
        run_ctw, CountTable, WeightedTree,
    };
    pub use crate::entropy::{
        entropy_posterior, entropy_rate_exact, entropy_rate_mc, EntropyConfig, InducedChain,
    };
    pub use crate::error::{BctError, Result};
    pub use crate::infer::{
        estimate_functional, order_posterior, predictive, rao_blackwell_params,
        PosteriorSummary, PredictiveDistribution, SequentialPredictor, SummaryConfig,
    };
    pub use crate::sample::{
        sample_params, sample_posterior_tree, sample_prior_tree, JointSample, SampleStream,
    };
    pub use crate::simulate::{fixture, generate, Fixture};
    pub use crate::types::{
        enumerate_trees, Alphabet, Context, ContextTree, ParamSet, Symbol, TimeSeries,
        VariableMemoryChain,
    };
}
