//! Matching repair machinery: the intersection-closed flat family over the
//! quotient, replacement targets, alternating path tangles and chains,
//! parity-partition exchanges on the uncovered basis, the zero-deficit
//! repair pass, and the flat-coverage improvement step.

mod exchange;
mod family;
mod paths;
mod repair;

pub use exchange::{exchange_uncovered_basis, parity_partition, ExchangeDigraph, ExchangeOutcome};
pub use family::{
    build_flat_family, build_target, full_target, select_target_flat, FlatFamily, TargetMode,
    TargetSet, UncoveredBasis,
};
pub use paths::{find_path_chain, simplify_chain, validate_chain, ChainContext, ChainUse, PathChain};
pub use repair::{improve_matching, repair_zero_deficit, RepairStats};

use thiserror::Error;

/// Failures of the repair machinery. These are retryable: the extractor
/// falls back to a different initial matching.
#[derive(Debug, Error)]
pub enum ChainError {
    #[error("uncovered elements do not map to a quotient basis")]
    UncoveredNotBasis,
    #[error("no alternating path reaches the root zone")]
    RootPathMissing,
    #[error("path tangle stalled before reaching the required origin")]
    TangleStalled,
    #[error("root zone is not covered by the free replacement targets")]
    BudgetExhausted,
    #[error("no fresh chain round matches the pending terminus")]
    CompositionStuck,
    #[error("path chain failed validation: {0}")]
    InvalidChain(String),
    #[error("exchange digraph has a directed cycle")]
    CyclicDigraph,
    #[error("exchange produced a dependent replacement set")]
    ExchangeRankFailure,
    #[error("matching update broke an invariant: {0}")]
    InvariantBroken(String),
    #[error("improvement loop exceeded its iteration bound")]
    ImproveLoopStalled,
}

/// Line-oriented trace sink for path and exchange events. The format is
/// stable: tests capture it.
#[derive(Debug, Default)]
pub struct Trace {
    pub enabled: bool,
    pub lines: Vec<String>,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            lines: Vec::new(),
        }
    }

    pub fn log(&mut self, line: impl FnOnce() -> String) {
        if self.enabled {
            self.lines.push(line());
        }
    }
}

fn fmt_indices(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| (x + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub(crate) fn path_trace_line(kind: &str, slot: usize, origin: usize, terminus: usize) -> String {
    format!(
        "path kind={kind} beta={} origin=v{} terminus=v{}",
        slot + 1,
        origin + 1,
        terminus + 1
    )
}

pub(crate) fn exchange_trace_line(
    kind: &str,
    slots: &[usize],
    origins: &[usize],
    termini: &[usize],
    rank_ok: bool,
) -> String {
    format!(
        "exchange kind={kind} beta={} origins={} termini={} rank_ok={rank_ok}",
        fmt_indices(slots),
        fmt_indices(origins),
        fmt_indices(termini)
    )
}
