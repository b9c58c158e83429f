//! The extraction loop: find a rainbow matching, repair it (zero-deficit
//! pass, then flat-coverage saturation), remove it, and keep the deficit
//! feasibility condition alive until no further step is possible.

use crate::chain::{
    build_flat_family, improve_matching, repair_zero_deficit, select_target_flat, ChainError,
    RepairStats, Trace,
};
use crate::error::{Error, Result};
use crate::graph::{ColouredGraph, Matching};
use crate::intersect::{find_rainbow_basis, flats_violating_slack, MinMaxCertificate, RainbowSearch};
use crate::matroid::{BaseSequence, BinaryMatroid};
use crate::quotient::{Flat, QuotientMatroid, DEFAULT_FLAT_CAP};

/// Extraction knobs. `seed` feeds tie-breaking only; `retries` bounds how
/// many fresh initial matchings a step may try after a repair failure.
#[derive(Clone, Debug)]
pub struct ExtractConfig {
    pub seed: u64,
    pub retries: u32,
    pub flat_cap: usize,
    pub trace: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            retries: 8,
            flat_cap: DEFAULT_FLAT_CAP,
            trace: false,
        }
    }
}

/// Why extraction stopped.
#[derive(Clone, Debug)]
pub enum StopReason {
    /// Every matching was removed: the full count was extracted.
    Exhausted,
    /// No rainbow matching exists; carries the min-max witness.
    NoRainbowMatching { certificate: MinMaxCertificate },
    /// Repairs kept failing across all retries.
    RepairFailed { detail: String },
}

impl StopReason {
    pub fn token(&self) -> &'static str {
        match self {
            StopReason::Exhausted => "exhausted",
            StopReason::NoRainbowMatching { .. } => "no_rainbow_matching",
            StopReason::RepairFailed { .. } => "repair_failed",
        }
    }
}

/// Per-step diagnostics. Stats accumulate across retry attempts; a stopped
/// step still leaves a report with `removed` unset.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub p_before: usize,
    pub attempts: u32,
    pub removed: bool,
    pub deficit_total: usize,
    pub deficit_budget: usize,
    pub stats: RepairStats,
    pub trace: Vec<String>,
}

/// All state of one extraction run.
pub struct ExtractionState {
    pub matroid: BinaryMatroid,
    pub bases: BaseSequence,
    pub quotient: QuotientMatroid,
    pub flats: Vec<Flat>,
    pub graph: ColouredGraph,
    pub reports: Vec<StepReport>,
}

pub enum StepOutcome {
    Removed,
    Stopped(StopReason),
}

/// The extracted family with its verification summary.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub n: usize,
    pub k: usize,
    /// Row r, position c: the 0-based element representing colour c.
    pub rows: Vec<Vec<usize>>,
    pub stop: StopReason,
}

impl Certificate {
    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn b0_observed(&self) -> usize {
        self.n - self.t()
    }

    /// Text format:
    ///
    /// ```text
    /// RAINBOW t n k
    /// <t rows of n space-separated 1-based element indices>
    /// B0 <n - t>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = format!("RAINBOW {} {} {}\n", self.t(), self.n, self.k);
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|e| (e + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.push_str(&format!("B0 {}\n", self.b0_observed()));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty certificate".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("RAINBOW") {
            return Err(Error::Parse("expected RAINBOW header".into()));
        }
        let t: usize = next_number(&mut parts, "t")?;
        let n: usize = next_number(&mut parts, "n")?;
        let k: usize = next_number(&mut parts, "k")?;
        let mut rows = Vec::with_capacity(t);
        for _ in 0..t {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing certificate row".into()))?;
            let mut row = Vec::with_capacity(n);
            for tok in line.split_whitespace() {
                let idx: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element index {tok:?}")))?;
                if idx == 0 || idx > n + k {
                    return Err(Error::Parse(format!("element index {idx} out of range")));
                }
                row.push(idx - 1);
            }
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "certificate row has {} entries, expected {n}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        let footer = lines
            .next()
            .ok_or_else(|| Error::Parse("missing B0 line".into()))?;
        let mut parts = footer.split_whitespace();
        if parts.next() != Some("B0") {
            return Err(Error::Parse("expected B0 footer".into()));
        }
        let b0: usize = next_number(&mut parts, "b0")?;
        if b0 != n - t {
            return Err(Error::Parse(format!(
                "B0 value {b0} disagrees with n - t = {}",
                n - t
            )));
        }
        Ok(Self {
            n,
            k,
            rows,
            stop: StopReason::Exhausted,
        })
    }
}

fn next_number(parts: &mut std::str::SplitWhitespace<'_>, what: &str) -> Result<usize> {
    parts
        .next()
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn attempt_seed(base: u64, p: usize, attempt: u32) -> u64 {
    if attempt == 0 && base == 0 {
        return 0;
    }
    splitmix64(base ^ splitmix64((p as u64) << 32 | attempt as u64))
}

pub fn start(m: &BinaryMatroid, b: &BaseSequence, cfg: &ExtractConfig) -> Result<ExtractionState> {
    let quotient = QuotientMatroid::for_matroid(m)?;
    let flats = quotient.enumerate_flats(cfg.flat_cap)?;
    let graph = ColouredGraph::build(b);
    Ok(ExtractionState {
        matroid: m.clone(),
        bases: b.clone(),
        quotient,
        flats,
        graph,
        reports: Vec::new(),
    })
}

/// One extraction step: search, repair, saturate, remove, re-verify.
pub fn extract_step(state: &mut ExtractionState, cfg: &ExtractConfig) -> Result<StepOutcome> {
    let n = state.matroid.rank();
    let p = state.graph.removed_count();
    if p == n {
        return Ok(StepOutcome::Stopped(StopReason::Exhausted));
    }
    let mut last_error: Option<ChainError> = None;
    let mut stats = RepairStats::default();
    for attempt in 0..=cfg.retries {
        let seed = attempt_seed(cfg.seed, p, attempt);
        let initial = match find_rainbow_basis(&state.graph, &state.matroid, seed) {
            RainbowSearch::Found(w) => w,
            RainbowSearch::Infeasible { certificate, .. } => {
                let violations =
                    flats_violating_slack(&state.graph, &state.quotient, &state.flats, 0);
                if violations.is_empty() {
                    return Err(Error::Consistency(
                        "deficit feasibility holds yet the intersection came up short".into(),
                    ));
                }
                return Ok(StepOutcome::Stopped(StopReason::NoRainbowMatching {
                    certificate,
                }));
            }
        };
        let mut trace = Trace::new(cfg.trace);
        match run_repairs(state, &initial, &mut trace, &mut stats) {
            Ok(w) => {
                state
                    .graph
                    .remove_matching(&w)
                    .map_err(|e| Error::Consistency(format!("removal rejected: {e}")))?;
                let deficit_total = state.graph.total_deficit();
                let deficit_budget = state.graph.excess() * state.graph.eta();
                let violations =
                    flats_violating_slack(&state.graph, &state.quotient, &state.flats, 0);
                if !violations.is_empty() {
                    return Err(Error::Consistency(
                        "a flat violates the deficit bound after removal".into(),
                    ));
                }
                state.reports.push(StepReport {
                    p_before: p,
                    attempts: attempt + 1,
                    removed: true,
                    deficit_total,
                    deficit_budget,
                    stats,
                    trace: trace.lines,
                });
                return Ok(StepOutcome::Removed);
            }
            Err(e) => {
                last_error = Some(e);
            }
        }
    }
    let detail = last_error
        .map(|e| e.to_string())
        .unwrap_or_else(|| "no repair attempt ran".into());
    state.reports.push(StepReport {
        p_before: p,
        attempts: cfg.retries + 1,
        removed: false,
        deficit_total: state.graph.total_deficit(),
        deficit_budget: state.graph.excess() * state.graph.eta(),
        stats,
        trace: Vec::new(),
    });
    Ok(StepOutcome::Stopped(StopReason::RepairFailed { detail }))
}

/// Would removing `w` keep every flat within its shrunken deficit budget?
/// Exactly the bound the post-removal check asserts: the deficit of a flat
/// drops by the number of uncovered classes inside it.
fn removal_keeps_flats_in_budget(state: &ExtractionState, w: &Matching) -> bool {
    let deficits = state.graph.deficits();
    let eta = state.graph.eta();
    let uncovered_classes: Vec<usize> = w
        .uncovered_elements()
        .iter()
        .map(|&v| state.quotient.class_of(v))
        .collect();
    state.flats.iter().all(|f| {
        let drop = uncovered_classes
            .iter()
            .filter(|&&c| f.contains_class(c))
            .count();
        deficits.of_flat(&state.quotient, f) - drop <= f.rank * (eta - 1)
    })
}

fn run_repairs(
    state: &ExtractionState,
    initial: &Matching,
    trace: &mut Trace,
    stats: &mut RepairStats,
) -> std::result::Result<Matching, ChainError> {
    let mut w = repair_zero_deficit(
        &state.graph,
        &state.quotient,
        &state.matroid,
        initial,
        trace,
        stats,
    )?;
    let k = state.graph.excess();
    let bound = (k + 1) * (state.flats.len() + 1) * (k + 1) + 8;
    let mut rounds = 0usize;
    loop {
        let fam = build_flat_family(&state.quotient, &state.graph, &w, &state.flats)?;
        if select_target_flat(&fam).is_none() {
            return Ok(w);
        };
        // go for the lowest-rank uncovered flat first, falling back to the
        // others before declaring the attempt dead
        let candidates: Vec<_> = fam
            .frak
            .iter()
            .filter(|f| fam.coverage(f) < f.rank)
            .cloned()
            .collect();
        let mut improved = None;
        let mut last_error = ChainError::ImproveLoopStalled;
        for flat in candidates {
            match improve_matching(
                &state.graph,
                &state.quotient,
                &state.matroid,
                &state.flats,
                &w,
                &flat,
                trace,
                stats,
            ) {
                Ok(next) => {
                    improved = Some(next);
                    break;
                }
                Err(e) => last_error = e,
            }
        }
        match improved {
            Some(next) => w = next,
            // full saturation is sufficient but not necessary: the matching
            // is still fine to remove when every flat stays within budget
            None => {
                if removal_keeps_flats_in_budget(state, &w) {
                    stats.partial_saturation_accepts += 1;
                    return Ok(w);
                }
                return Err(last_error);
            }
        }
        rounds += 1;
        if rounds > bound {
            return Err(ChainError::ImproveLoopStalled);
        }
    }
}

/// The extracted family plus the final state, for diagnostics.
pub struct Extraction {
    pub certificate: Certificate,
    pub state: ExtractionState,
}

/// Runs extraction to a stop and independently re-verifies the certificate.
pub fn extract_all(m: &BinaryMatroid, b: &BaseSequence, cfg: &ExtractConfig) -> Result<Extraction> {
    let mut state = start(m, b, cfg)?;
    let stop = loop {
        match extract_step(&mut state, cfg)? {
            StepOutcome::Removed => continue,
            StepOutcome::Stopped(reason) => break reason,
        }
    };
    let n = m.rank();
    let rows: Vec<Vec<usize>> = state
        .graph
        .removed()
        .iter()
        .map(|w| {
            (0..n)
                .map(|c| w.mate_of_colour(c).expect("removed matchings saturate"))
                .collect()
        })
        .collect();
    // independent re-verification before handing the certificate out
    for row in &rows {
        for (c, &e) in row.iter().enumerate() {
            if !state.bases.base(c).contains(&e) {
                return Err(Error::Consistency(format!(
                    "row entry {e} is not in the colour-{c} base"
                )));
            }
        }
        if !state.matroid.is_basis(row)? {
            return Err(Error::Consistency("certificate row is not a basis".into()));
        }
    }
    for c in 0..n {
        let mut reps: Vec<usize> = rows.iter().map(|r| r[c]).collect();
        reps.sort_unstable();
        reps.dedup();
        if reps.len() != rows.len() {
            return Err(Error::Consistency(format!(
                "colour {c} repeats a representative"
            )));
        }
    }
    let certificate = Certificate {
        n,
        k: m.corank_excess(),
        rows,
        stop,
    };
    Ok(Extraction { certificate, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::Instance;

    #[test]
    fn zero_excess_extracts_everything() {
        let inst = Instance::parse("MATROID 2 0\n10\n01\nBASES\n1 2\n1 2\n").unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        assert_eq!(out.certificate.t(), 2);
        assert_eq!(out.certificate.b0_observed(), 0);
        assert_eq!(out.certificate.stop.token(), "exhausted");
    }

    #[test]
    fn running_example_extracts_all_rows() {
        let inst = Instance::parse("MATROID 2 1\n101\n011\nBASES\n1 2\n1 3\n").unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        assert_eq!(out.certificate.t(), 2);
        for report in &out.state.reports {
            assert_eq!(report.deficit_total, report.deficit_budget);
        }
    }

    #[test]
    fn parallel_pair_instance_needs_the_repair_machinery() {
        let inst = Instance::parse("MATROID 2 2\n1011\n0111\nBASES\n1 3\n2 4\n").unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        assert_eq!(out.certificate.t(), 2, "stop: {:?}", out.certificate.stop);
    }

    #[test]
    fn certificate_text_round_trip() {
        let cert = Certificate {
            n: 2,
            k: 1,
            rows: vec![vec![0, 2], vec![1, 0]],
            stop: StopReason::Exhausted,
        };
        let text = cert.to_text();
        assert_eq!(text, "RAINBOW 2 2 1\n1 3\n2 1\nB0 0\n");
        let parsed = Certificate::parse(&text).unwrap();
        assert_eq!(parsed.rows, cert.rows);
        assert!(Certificate::parse("RAINBOW 2 2 1\n1 3\nB0 0\n").is_err());
        assert!(Certificate::parse("RAINBOW 1 2 1\n1 3\nB0 0\n").is_err());
    }

    #[test]
    fn determinism_of_whole_run() {
        let inst = Instance::parse(
            "MATROID 3 2\n10001\n01011\n00111\nBASES\n1 2 4\n1 3 4\n1 2 5\n",
        )
        .unwrap();
        let cfg = ExtractConfig {
            seed: 7,
            ..Default::default()
        };
        let a = extract_all(&inst.matroid, &inst.bases, &cfg).unwrap();
        let b = extract_all(&inst.matroid, &inst.bases, &cfg).unwrap();
        assert_eq!(a.certificate.to_text(), b.certificate.to_text());
    }
}
