//! Replacing uncovered-basis classes along a simple chain, certified by
//! cocircuit intersections built from parity partitions of the exchange
//! digraph, and finally checked by a direct rank computation.

use super::family::UncoveredBasis;
use super::paths::{ChainContext, PathChain};
use super::{exchange_trace_line, ChainError, Trace};
use crate::error::{Error, Result};
use crate::quotient::QuotientMatroid;

/// Arc (i, j) present when the class replacing slot j+1 (cyclically) lies
/// in the fundamental cocircuit of the origin at position i.
#[derive(Clone, Debug)]
pub struct ExchangeDigraph {
    pub vertex_count: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl ExchangeDigraph {
    pub fn build(cx: &ChainContext<'_>, chain: &PathChain) -> Self {
        let t = chain.len();
        let term: Vec<usize> = chain.paths.iter().map(|p| cx.term_class(p)).collect();
        let mut arcs = Vec::new();
        for i in 0..t {
            let cocirc = cx.slots.cocircuit[chain.origin_slots[i]];
            for j in 0..t {
                if i == j {
                    continue;
                }
                let incoming = term[(j + 1) % t];
                if cocirc >> incoming & 1 == 1 {
                    arcs.push((i, j));
                }
            }
        }
        Self {
            vertex_count: t,
            arcs,
        }
    }

    fn restricted(&self, lo: usize, hi: usize) -> (usize, Vec<(usize, usize)>) {
        let arcs = self
            .arcs
            .iter()
            .filter(|&&(a, b)| (lo..=hi).contains(&a) && (lo..=hi).contains(&b))
            .map(|&(a, b)| (a - lo, b - lo))
            .collect();
        (hi - lo + 1, arcs)
    }
}

/// Partition of an acyclic digraph's vertices into (X, Y) with `root` in X
/// such that `1_X(v) + |X ∩ in(v)|` is odd exactly at `root`. Returns the
/// X-membership vector. Cyclic inputs and bad roots are input errors.
pub fn parity_partition(vertex_count: usize, arcs: &[(usize, usize)], root: usize) -> Result<Vec<bool>> {
    if root >= vertex_count {
        return Err(Error::Input(format!(
            "root {root} out of range for {vertex_count} vertices"
        )));
    }
    let mut arc_set: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in arcs {
        if a >= vertex_count || b >= vertex_count {
            return Err(Error::Input(format!("arc ({a},{b}) out of range")));
        }
        if a == b {
            return Err(Error::Input("digraph has a directed cycle".into()));
        }
        if !arc_set.contains(&(a, b)) {
            arc_set.push((a, b));
        }
    }
    let mut alive = vec![true; vertex_count];
    let mut eliminated: Vec<(usize, bool)> = Vec::new(); // (vertex, is_sink)
    for _ in 0..vertex_count.saturating_sub(1) {
        let pick = (0..vertex_count).filter(|&v| alive[v] && v != root).find(|&v| {
            let has_in = arc_set.iter().any(|&(a, b)| b == v && alive[a]);
            let has_out = arc_set.iter().any(|&(a, b)| a == v && alive[b]);
            !has_in || !has_out
        });
        let Some(v) = pick else {
            return Err(Error::Input("digraph has a directed cycle".into()));
        };
        let has_in = arc_set.iter().any(|&(a, b)| b == v && alive[a]);
        eliminated.push((v, has_in));
        alive[v] = false;
    }
    let mut in_x = vec![false; vertex_count];
    let mut present = vec![false; vertex_count];
    in_x[root] = true;
    present[root] = true;
    for &(v, is_sink) in eliminated.iter().rev() {
        if is_sink {
            let odd_in = arc_set
                .iter()
                .filter(|&&(a, b)| b == v && present[a] && in_x[a])
                .count()
                % 2
                == 1;
            in_x[v] = odd_in;
        }
        present[v] = true;
    }
    debug_assert!((0..vertex_count).all(|v| {
        let sum = usize::from(in_x[v])
            + arc_set
                .iter()
                .filter(|&&(a, b)| b == v && in_x[a])
                .count();
        (sum % 2 == 1) == (v == root)
    }));
    Ok(in_x)
}

/// Result of a validated exchange: the replacement classes per slot, plus
/// whether every intermediate cocircuit certificate held.
#[derive(Clone, Debug)]
pub struct ExchangeOutcome {
    pub new_slot_classes: Vec<usize>,
    pub certificates_ok: bool,
}

/// Validates the exchange a simple chain encodes: replaces the class at
/// every origin slot by its terminus class, certifying each induction step
/// with a symmetric-difference cocircuit and gating on the final rank.
pub fn exchange_uncovered_basis(
    q: &QuotientMatroid,
    cx: &ChainContext<'_>,
    chain: &PathChain,
    kind: &str,
    trace: &mut Trace,
    stats: &mut super::RepairStats,
) -> std::result::Result<ExchangeOutcome, ChainError> {
    let slots: &UncoveredBasis = cx.slots;
    let t = chain.len();
    let k = slots.slot_count();
    let beta = &chain.origin_slots;
    let term: Vec<usize> = chain.paths.iter().map(|p| cx.term_class(p)).collect();
    let a: Vec<usize> = slots.class_of_slot.clone();

    let mut new_slot_classes = a.clone();
    for j in 0..t {
        new_slot_classes[beta[j]] = term[j];
    }

    let mut certificates_ok = true;
    let digraph = ExchangeDigraph::build(cx, chain);

    // chronological replacement sets; rank must stay full at every step
    let set_mask = |classes: &[usize]| classes.iter().fold(0u64, |acc, &c| acc | 1 << c);
    let mut staged: Vec<Vec<usize>> = Vec::with_capacity(t + 1);
    staged.push(a.clone());
    for step in 1..t {
        let mut s = staged[step - 1].clone();
        let out = a[beta[t - 1 - step]];
        if let Some(pos) = s.iter().position(|&c| c == out) {
            s.remove(pos);
        }
        s.push(term[t - step]);
        staged.push(s);
    }
    if t >= 1 {
        let mut s = staged[t - 1].clone();
        let out = a[beta[t - 1]];
        if let Some(pos) = s.iter().position(|&c| c == out) {
            s.remove(pos);
        }
        s.push(term[0]);
        staged.push(s);
    }
    for s in &staged {
        if q.rank_of_class_mask(set_mask(s)) != k {
            certificates_ok = false;
        }
    }

    // per-step cocircuit certificates from parity partitions
    let xor_cocircuit = |in_x: &[bool], lo: usize| -> u64 {
        in_x.iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .fold(0u64, |acc, (i, _)| acc ^ slots.cocircuit[beta[lo + i]])
    };
    if t == 1 {
        let out = a[beta[0]];
        if term[0] != out {
            let cocirc = slots.cocircuit[beta[0]];
            let base = set_mask(&a) | 1 << term[0];
            let expect = (1u64 << out) | 1 << term[0];
            if cocirc & base != expect {
                certificates_ok = false;
            }
        }
    } else {
        for s in 2..t {
            // windowed digraph on positions s-2 ..= t-2, rooted at s-2
            let (count, arcs) = digraph.restricted(s - 2, t - 2);
            match parity_partition(count, &arcs, 0) {
                Ok(in_x) => {
                    let cstar = xor_cocircuit(&in_x, s - 2);
                    let out = a[beta[s - 2]];
                    let incoming = term[s - 1];
                    if incoming != out {
                        let base = set_mask(&staged[t - s]) | 1 << incoming;
                        let expect = (1u64 << out) | 1 << incoming;
                        if cstar & base != expect {
                            certificates_ok = false;
                        }
                    }
                }
                Err(_) => {
                    certificates_ok = false;
                }
            }
        }
        // final step on the full digraph, rooted at the last position
        match parity_partition(digraph.vertex_count, &digraph.arcs, t - 1) {
            Ok(in_x) => {
                let cstar = xor_cocircuit(&in_x, 0);
                let out = a[beta[t - 1]];
                let incoming = term[0];
                if incoming != out {
                    let base = set_mask(&staged[t - 1]) | 1 << incoming;
                    let expect = (1u64 << out) | 1 << incoming;
                    if cstar & base != expect {
                        certificates_ok = false;
                    }
                }
            }
            Err(_) => {
                certificates_ok = false;
            }
        }
    }

    let rank_ok = q.rank_of_class_mask(set_mask(&new_slot_classes)) == k;
    let origins: Vec<usize> = chain.paths.iter().map(|p| p.origin()).collect();
    let termini: Vec<usize> = chain.paths.iter().map(|p| p.terminus()).collect();
    trace.log(|| exchange_trace_line(kind, beta, &origins, &termini, rank_ok));
    stats.exchange_checks += 1;
    if !certificates_ok {
        stats.certificate_faults += 1;
    }
    if !rank_ok {
        stats.exchange_rank_failures += 1;
        return Err(ChainError::ExchangeRankFailure);
    }
    Ok(ExchangeOutcome {
        new_slot_classes,
        certificates_ok,
    })
}
