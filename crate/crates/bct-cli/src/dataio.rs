//! Reading and writing series files: plain text, nonnegative integer
//! symbols separated by any whitespace.

use std::path::Path;

use anyhow::{bail, Context as _, Result};
use bct::types::{Alphabet, Symbol, TimeSeries};

pub struct LoadedSeries {
    pub series: TimeSeries,
    pub inferred_alphabet: bool,
}

pub fn parse_symbols(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let v: usize = tok
            .parse()
            .with_context(|| format!("symbol `{tok}` is not a nonnegative integer"))?;
        out.push(v);
    }
    Ok(out)
}

/// Load a series file. The alphabet is `alphabet_override` when given,
/// otherwise inferred as (max symbol + 1), at least 2. With
/// `context_in_file` the first `depth` symbols are consumed as the initial
/// context; otherwise the context is borrowed from the head of the series
/// (cycled when the series is shorter than `depth`), with a warning.
pub fn read_series(
    path: &Path,
    depth: usize,
    context_in_file: bool,
    alphabet_override: Option<usize>,
) -> Result<LoadedSeries> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let raw = parse_symbols(&text)?;
    if raw.is_empty() {
        bail!("no data: {} contains no symbols", path.display());
    }

    let max_sym = *raw.iter().max().unwrap();
    let (m, inferred) = match alphabet_override {
        Some(m) => (m, false),
        None => (usize::max(max_sym + 1, 2), true),
    };
    if max_sym >= m {
        bail!("symbol {max_sym} out of range for alphabet of size {m}");
    }
    if m > 256 {
        bail!("alphabet of size {m} unsupported (max 256)");
    }
    let alphabet = Alphabet::new(m)?;

    let mut seen = vec![false; m];
    for &v in &raw {
        seen[v] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        eprintln!(
            "warning: symbol {missing} never occurs in {}; check --alphabet if {m} is wrong",
            path.display()
        );
    }

    let symbols: Vec<Symbol> = raw.iter().map(|&v| v as Symbol).collect();
    let (context, body): (Vec<Symbol>, Vec<Symbol>) = if context_in_file {
        if symbols.len() <= depth {
            bail!(
                "no data: {} has {} symbols, all consumed by the initial context (depth {depth})",
                path.display(),
                symbols.len()
            );
        }
        (symbols[..depth].to_vec(), symbols[depth..].to_vec())
    } else {
        if depth > 0 {
            eprintln!(
                "warning: no initial context supplied; borrowing the first {depth} symbols of the series (pass --context-in-file if the file starts with a context)"
            );
        }
        let ctx: Vec<Symbol> = (0..depth).map(|i| symbols[i % symbols.len()]).collect();
        (ctx, symbols)
    };

    Ok(LoadedSeries {
        series: TimeSeries::new(alphabet, &context, body)?,
        inferred_alphabet: inferred,
    })
}

/// Write a series as whitespace-separated symbols, initial context first
/// (readable back with `--context-in-file`).
pub fn write_series(path: &Path, x: &TimeSeries) -> Result<()> {
    let mut out = String::new();
    for &s in x.initial_context().iter().chain(x.body().iter()) {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
