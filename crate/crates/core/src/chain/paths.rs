//! Tangles and chains of alternating paths rooted at a class zone.
//!
//! A tangle grows one path at a time: each new path starts at a fresh
//! uncovered vertex and ends inside the zone accumulated so far (the root
//! zone plus the targets of the origins already used). Back-chasing turns a
//! tangle into a chain (every terminus lands in the target of the previous
//! origin), chains compose, and reduction yields a simple chain: paths
//! vertex-disjoint, termini fresh.

use super::family::{TargetSet, UncoveredBasis};
use super::{path_trace_line, ChainError, Trace};
use crate::graph::{find_alternating_path, AltPath, ColouredGraph, Matching};
use crate::quotient::QuotientMatroid;

/// Everything a chain search needs to look up.
pub struct ChainContext<'a> {
    pub g: &'a ColouredGraph,
    pub q: &'a QuotientMatroid,
    pub w: &'a Matching,
    pub slots: &'a UncoveredBasis,
    pub target: &'a TargetSet,
    /// Class mask of the root zone.
    pub root_mask: u64,
}

impl ChainContext<'_> {
    pub fn term_class(&self, p: &AltPath) -> usize {
        self.q.class_of(p.terminus())
    }

    fn in_mask(&self, mask: u64, class: usize) -> bool {
        mask >> class & 1 == 1
    }

    /// Positive-deficit vertices whose class lies in the zone.
    fn zone_vertices(&self, mask: u64) -> Vec<usize> {
        (0..self.g.element_count())
            .filter(|&e| self.in_mask(mask, self.q.class_of(e)) && self.g.deficit(e) > 0)
            .collect()
    }
}

/// Which repair is running; drives reduction policy and validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainUse {
    /// Clearing zero-deficit uncovered vertices; the chain must end at the
    /// given slot and later termini must avoid the root zone.
    ZeroRepair { target_slot: usize },
    /// Raising the coverage of the target flat; the chain must end at a
    /// free slot and wrap (first terminus inside the last slot's target).
    FlatRepair,
}

/// An ordered tuple of alternating paths with the slot of each origin.
#[derive(Clone, Debug)]
pub struct PathChain {
    pub paths: Vec<AltPath>,
    pub origin_slots: Vec<usize>,
}

impl PathChain {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Grows a tangle. With `stop_slot` set, stops as soon as a path originates
/// there (and fails if the search stalls first); otherwise grows until no
/// fresh origin has a path into the current zone.
pub fn build_tangle(
    cx: &ChainContext<'_>,
    stop_slot: Option<usize>,
    trace: &mut Trace,
) -> Result<PathChain, ChainError> {
    let mut zone = cx.root_mask;
    let mut used_origins: Vec<usize> = Vec::new();
    let mut paths: Vec<AltPath> = Vec::new();
    let mut origin_slots: Vec<usize> = Vec::new();
    for _ in 0..=cx.slots.slot_count() {
        let targets = cx.zone_vertices(zone);
        let Some(p) = find_alternating_path(cx.g, cx.w, &targets, &used_origins) else {
            match stop_slot {
                Some(_) if paths.is_empty() => return Err(ChainError::RootPathMissing),
                Some(_) => return Err(ChainError::TangleStalled),
                None => break,
            }
        };
        let slot = cx
            .slots
            .slot_of_vertex(p.origin())
            .ok_or_else(|| ChainError::InvariantBroken("path origin is not uncovered".into()))?;
        trace.log(|| path_trace_line("tangle", slot, p.origin(), p.terminus()));
        used_origins.push(p.origin());
        zone |= cx.target.of_slot[slot];
        paths.push(p);
        origin_slots.push(slot);
        if stop_slot == Some(slot) {
            return Ok(PathChain {
                paths,
                origin_slots,
            });
        }
    }
    if stop_slot.is_some() {
        return Err(ChainError::TangleStalled);
    }
    Ok(PathChain {
        paths,
        origin_slots,
    })
}

/// Positions of a chain inside the tangle ending at `end_pos`: walk each
/// terminus back to the earliest position whose target holds it, until a
/// terminus lands in the root zone.
fn back_chase(
    cx: &ChainContext<'_>,
    tangle: &PathChain,
    end_pos: usize,
) -> Result<Vec<usize>, ChainError> {
    let mut seq = vec![end_pos];
    let mut cur = end_pos;
    loop {
        let tc = cx.term_class(&tangle.paths[cur]);
        if cx.in_mask(cx.root_mask, tc) {
            break;
        }
        let prev = (0..cur)
            .find(|&l| cx.in_mask(cx.target.of_slot[tangle.origin_slots[l]], tc))
            .ok_or_else(|| {
                ChainError::InvariantBroken("tangle terminus outside all earlier zones".into())
            })?;
        seq.push(prev);
        cur = prev;
    }
    seq.reverse();
    Ok(seq)
}

/// Builds a chain for a flat repair: grow the tangle, check that the free
/// targets cover the root zone, then stitch back-chased chains together
/// until the first terminus wraps into some round's final target.
pub fn find_path_chain(cx: &ChainContext<'_>, trace: &mut Trace) -> Result<PathChain, ChainError> {
    let tangle = build_tangle(cx, None, trace)?;
    if tangle.is_empty() {
        return Err(ChainError::RootPathMissing);
    }
    let free_positions: Vec<usize> = (0..tangle.len())
        .filter(|&p| cx.target.free_slots[tangle.origin_slots[p]])
        .collect();
    let free_union = free_positions
        .iter()
        .fold(0u64, |acc, &p| acc | cx.target.of_slot[tangle.origin_slots[p]]);
    if cx.root_mask & !free_union != 0 {
        return Err(ChainError::BudgetExhausted);
    }
    let mut rounds: Vec<Vec<usize>> = Vec::new();
    let mut round_end: Vec<usize> = Vec::new();
    let mut current_end = free_positions[0];
    for _ in 0..=tangle.len() {
        let positions = back_chase(cx, &tangle, current_end)?;
        let first_tc = cx.term_class(&tangle.paths[positions[0]]);
        rounds.push(positions);
        round_end.push(current_end);
        if let Some(l) = round_end
            .iter()
            .position(|&e| cx.in_mask(cx.target.of_slot[tangle.origin_slots[e]], first_tc))
        {
            let mut all = Vec::new();
            for r in (l..rounds.len()).rev() {
                all.extend(rounds[r].iter().copied());
            }
            let chain = PathChain {
                paths: all.iter().map(|&p| tangle.paths[p].clone()).collect(),
                origin_slots: all.iter().map(|&p| tangle.origin_slots[p]).collect(),
            };
            return Ok(chain);
        }
        let next = free_positions.iter().copied().find(|&p| {
            !round_end.contains(&p)
                && cx.in_mask(cx.target.of_slot[tangle.origin_slots[p]], first_tc)
        });
        match next {
            Some(p) => current_end = p,
            None => return Err(ChainError::CompositionStuck),
        }
    }
    Err(ChainError::CompositionStuck)
}

/// Turns a zero-repair tangle into a chain ending at its final path.
pub fn chain_from_tangle(
    cx: &ChainContext<'_>,
    tangle: &PathChain,
) -> Result<PathChain, ChainError> {
    let positions = back_chase(cx, tangle, tangle.len() - 1)?;
    Ok(PathChain {
        paths: positions.iter().map(|&p| tangle.paths[p].clone()).collect(),
        origin_slots: positions.iter().map(|&p| tangle.origin_slots[p]).collect(),
    })
}

/// Re-routes two intersecting paths into one: follow the later path until
/// its first colour shared with the earlier one, then continue along the
/// earlier path to its terminus. Identical origins short-circuit.
fn splice(early: &AltPath, late: &AltPath) -> Option<AltPath> {
    if late.origin() == early.origin() {
        return Some(early.clone());
    }
    for (i, &c) in late.colours().iter().enumerate() {
        if let Some(l) = early.colours().iter().position(|&ec| ec == c) {
            let mut elems: Vec<usize> = late.elements()[..=i].to_vec();
            elems.extend_from_slice(&early.elements()[l + 1..]);
            let mut colours: Vec<usize> = late.colours()[..=i].to_vec();
            colours.extend_from_slice(&early.colours()[l + 1..]);
            return Some(AltPath::new(elems, colours).expect("splice yields a path"));
        }
    }
    None
}

fn share_vertices(a: &AltPath, b: &AltPath) -> bool {
    a.elements().iter().any(|e| b.elements().contains(e))
        || a.colours().iter().any(|c| b.colours().contains(c))
}

/// Reduces a chain to a simple one: splices intersecting paths, drops
/// detours past stale zones, and (per use) drops prefixes re-entering the
/// root zone or shrinks to a wrapped sub-chain.
pub fn simplify_chain(
    cx: &ChainContext<'_>,
    mut chain: PathChain,
    usage: ChainUse,
) -> Result<PathChain, ChainError> {
    'outer: loop {
        let t = chain.len();
        if t == 0 {
            return Err(ChainError::InvalidChain("empty chain".into()));
        }
        // vertex-disjointness via splicing
        for j1 in 0..t {
            for j2 in j1 + 1..t {
                if share_vertices(&chain.paths[j1], &chain.paths[j2]) {
                    let new_path = splice(&chain.paths[j1], &chain.paths[j2])
                        .ok_or_else(|| {
                            ChainError::InvalidChain("intersecting paths failed to splice".into())
                        })?;
                    let slot = chain.origin_slots[j2];
                    chain.paths.splice(j1..=j2, [new_path]);
                    chain.origin_slots.splice(j1..=j2, [slot]);
                    continue 'outer;
                }
            }
        }
        // terminus freshness: a terminus inside an older target zone lets
        // the chain skip the positions in between
        for j in 1..t {
            let tc = cx.term_class(&chain.paths[j]);
            if let Some(jp) =
                (0..j - 1).find(|&jp| cx.in_mask(cx.target.of_slot[chain.origin_slots[jp]], tc))
            {
                chain.paths.drain(jp + 1..j);
                chain.origin_slots.drain(jp + 1..j);
                continue 'outer;
            }
        }
        match usage {
            ChainUse::ZeroRepair { .. } => {
                // a later terminus back in the root zone restarts the chain
                for j in 1..t {
                    let tc = cx.term_class(&chain.paths[j]);
                    if cx.in_mask(cx.root_mask, tc) {
                        chain.paths.drain(..j);
                        chain.origin_slots.drain(..j);
                        continue 'outer;
                    }
                }
            }
            ChainUse::FlatRepair => {
                // a wrapped pair strictly inside the chain is a shorter chain
                let flat_mask = cx
                    .target
                    .flat
                    .as_ref()
                    .map(|f| f.mask)
                    .ok_or_else(|| ChainError::InvalidChain("flat repair without a flat".into()))?;
                for jp in 0..t {
                    let tc = cx.term_class(&chain.paths[jp]);
                    for j in jp..t {
                        if j - jp >= t - 1 {
                            continue;
                        }
                        let slot = chain.origin_slots[j];
                        if cx.target.free_slots[slot]
                            && cx.in_mask(flat_mask & cx.target.of_slot[slot], tc)
                        {
                            chain.paths.drain(j + 1..);
                            chain.paths.drain(..jp);
                            chain.origin_slots.drain(j + 1..);
                            chain.origin_slots.drain(..jp);
                            continue 'outer;
                        }
                    }
                }
            }
        }
        return Ok(chain);
    }
}

/// Full validation of a simple chain against its context and use.
pub fn validate_chain(
    cx: &ChainContext<'_>,
    chain: &PathChain,
    usage: ChainUse,
) -> Result<(), ChainError> {
    let t = chain.len();
    let fail = |msg: String| Err(ChainError::InvalidChain(msg));
    if t == 0 {
        return fail("empty chain".into());
    }
    for (j, p) in chain.paths.iter().enumerate() {
        p.validate(cx.g, cx.w)
            .map_err(|e| ChainError::InvalidChain(e.to_string()))?;
        let slot = chain.origin_slots[j];
        if cx.slots.vertices.get(slot) != Some(&p.origin()) {
            return fail(format!("position {j} origin does not match its slot"));
        }
        if cx.g.deficit(p.terminus()) == 0 {
            return fail(format!("position {j} terminus has zero deficit"));
        }
    }
    for j1 in 0..t {
        for j2 in j1 + 1..t {
            if share_vertices(&chain.paths[j1], &chain.paths[j2]) {
                return fail(format!("positions {j1} and {j2} share a vertex"));
            }
        }
    }
    let first_tc = cx.term_class(&chain.paths[0]);
    if !cx.in_mask(cx.root_mask, first_tc) {
        return fail("first terminus misses the root zone".into());
    }
    for j in 1..t {
        let tc = cx.term_class(&chain.paths[j]);
        if !cx.in_mask(cx.target.of_slot[chain.origin_slots[j - 1]], tc) {
            return fail(format!("position {j} terminus misses the previous target"));
        }
        for jp in 0..j.saturating_sub(1) {
            if cx.in_mask(cx.target.of_slot[chain.origin_slots[jp]], tc) {
                return fail(format!("position {j} terminus is stale against {jp}"));
            }
        }
    }
    match usage {
        ChainUse::ZeroRepair { target_slot } => {
            if chain.origin_slots[t - 1] != target_slot {
                return fail("chain does not end at the zero-deficit slot".into());
            }
            for j in 1..t {
                if cx.in_mask(cx.root_mask, cx.term_class(&chain.paths[j])) {
                    return fail(format!("position {j} re-enters the root zone"));
                }
            }
        }
        ChainUse::FlatRepair => {
            let last_slot = chain.origin_slots[t - 1];
            if !cx.target.free_slots[last_slot] {
                return fail("chain does not end at a free slot".into());
            }
            if !cx.in_mask(cx.target.of_slot[last_slot], first_tc) {
                return fail("first terminus misses the final target (no wrap)".into());
            }
            let flat_mask = cx
                .target
                .flat
                .as_ref()
                .map(|f| f.mask)
                .ok_or_else(|| ChainError::InvalidChain("flat repair without a flat".into()))?;
            for jp in 0..t {
                let tc = cx.term_class(&chain.paths[jp]);
                for j in jp..t {
                    if j - jp >= t - 1 {
                        continue;
                    }
                    let slot = chain.origin_slots[j];
                    if cx.target.free_slots[slot]
                        && cx.in_mask(flat_mask & cx.target.of_slot[slot], tc)
                    {
                        return fail(format!("wrapped pair ({jp},{j}) inside the chain"));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(elems: &[usize], colours: &[usize]) -> AltPath {
        AltPath::new(elems.to_vec(), colours.to_vec()).unwrap()
    }

    #[test]
    fn splice_reroutes_at_the_first_shared_colour() {
        let early = path(&[10, 11, 12], &[0, 1]);
        let late = path(&[20, 11], &[0]);
        let out = splice(&early, &late).unwrap();
        assert_eq!(out.origin(), 20);
        assert_eq!(out.terminus(), 12);
        assert_eq!(out.elements(), &[20, 11, 12]);
        assert_eq!(out.colours(), &[0, 1]);
    }

    #[test]
    fn splice_shortcuts_equal_origins() {
        let early = path(&[10, 11], &[0]);
        let late = path(&[10, 99], &[7]);
        let out = splice(&early, &late).unwrap();
        assert_eq!(out, early);
    }

    #[test]
    fn splice_requires_an_intersection() {
        let early = path(&[10, 11], &[0]);
        let late = path(&[20, 21], &[1]);
        assert!(splice(&early, &late).is_none());
    }
}
