//! The coloured bipartite graph of a base sequence: colour vertices on one
//! side, element vertices on the other, with an edge when the element lies
//! in that colour's base. Supports matching removal, the deficit table,
//! maximum matchings with a deficiency witness, and alternating-path search.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::matroid::BaseSequence;
use crate::quotient::{Flat, QuotientMatroid};

/// A partial matching between colours and elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    mate_of_colour: Vec<Option<usize>>,
    mate_of_element: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            mate_of_colour: vec![None; n],
            mate_of_element: vec![None; m],
        }
    }

    pub fn from_pairs(n: usize, m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut w = Self::empty(n, m);
        for &(c, e) in pairs {
            if c >= n || e >= m {
                return Err(Error::Input(format!("edge ({c},{e}) out of range")));
            }
            if w.mate_of_colour[c].is_some() || w.mate_of_element[e].is_some() {
                return Err(Error::Input(format!(
                    "edge ({c},{e}) shares an endpoint with another matching edge"
                )));
            }
            w.mate_of_colour[c] = Some(e);
            w.mate_of_element[e] = Some(c);
        }
        Ok(w)
    }

    pub fn colour_count(&self) -> usize {
        self.mate_of_colour.len()
    }

    pub fn element_count(&self) -> usize {
        self.mate_of_element.len()
    }

    pub fn mate_of_colour(&self, c: usize) -> Option<usize> {
        self.mate_of_colour[c]
    }

    pub fn mate_of_element(&self, e: usize) -> Option<usize> {
        self.mate_of_element[e]
    }

    pub fn contains_edge(&self, c: usize, e: usize) -> bool {
        self.mate_of_colour[c] == Some(e)
    }

    pub fn len(&self) -> usize {
        self.mate_of_colour.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn saturates_colours(&self) -> bool {
        self.mate_of_colour.iter().all(Option::is_some)
    }

    /// Edges sorted by colour.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.mate_of_colour
            .iter()
            .enumerate()
            .filter_map(|(c, e)| e.map(|e| (c, e)))
            .collect()
    }

    /// The matched element set, sorted.
    pub fn elements(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.mate_of_colour.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// Element vertices left unmatched, sorted.
    pub fn uncovered_elements(&self) -> Vec<usize> {
        (0..self.mate_of_element.len())
            .filter(|&e| self.mate_of_element[e].is_none())
            .collect()
    }
}

/// An alternating path `v0 -u1- v1 -u2- ... -ua- va` starting at an
/// unmatched element with a non-matching edge; every colour is left through
/// its matching edge, so the path ends at a matched element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltPath {
    elems: Vec<usize>,
    colours: Vec<usize>,
}

impl AltPath {
    pub fn new(elems: Vec<usize>, colours: Vec<usize>) -> Result<Self> {
        if elems.len() != colours.len() + 1 || colours.is_empty() {
            return Err(Error::Input("malformed alternating path".into()));
        }
        Ok(Self { elems, colours })
    }

    pub fn origin(&self) -> usize {
        self.elems[0]
    }

    pub fn terminus(&self) -> usize {
        *self.elems.last().unwrap()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elems
    }

    pub fn colours(&self) -> &[usize] {
        &self.colours
    }

    /// Checks alternation against a graph and matching: edge i goes
    /// (elems[i], colours[i]) outside the matching, then (colours[i],
    /// elems[i+1]) inside it, with the origin unmatched.
    pub fn validate(&self, g: &ColouredGraph, w: &Matching) -> Result<()> {
        if w.mate_of_element(self.origin()).is_some() {
            return Err(Error::Input("path origin is matched".into()));
        }
        for i in 0..self.colours.len() {
            let (v, c, v2) = (self.elems[i], self.colours[i], self.elems[i + 1]);
            if !g.has_edge(c, v) {
                return Err(Error::Input(format!("missing edge ({c},{v})")));
            }
            if w.contains_edge(c, v) {
                return Err(Error::Input(format!(
                    "edge ({c},{v}) should be outside the matching"
                )));
            }
            if !w.contains_edge(c, v2) {
                return Err(Error::Input(format!(
                    "edge ({c},{v2}) should be a matching edge"
                )));
            }
        }
        let mut seen = self.elems.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.elems.len() {
            return Err(Error::Input("path repeats an element vertex".into()));
        }
        let mut seen_c = self.colours.clone();
        seen_c.sort_unstable();
        seen_c.dedup();
        if seen_c.len() != self.colours.len() {
            return Err(Error::Input("path repeats a colour vertex".into()));
        }
        Ok(())
    }
}

/// Per-element deficit snapshot: budget minus current degree.
#[derive(Clone, Debug)]
pub struct DeficitTable {
    eta: usize,
    per_element: Vec<usize>,
}

impl DeficitTable {
    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn of_element(&self, e: usize) -> usize {
        self.per_element[e]
    }

    pub fn of_set(&self, elems: &[usize]) -> usize {
        elems.iter().map(|&e| self.per_element[e]).sum()
    }

    pub fn of_flat(&self, q: &QuotientMatroid, flat: &Flat) -> usize {
        self.of_set(&q.flat_elements(flat))
    }

    pub fn total(&self) -> usize {
        self.per_element.iter().sum()
    }
}

/// The residual coloured graph after removing a prefix of matchings.
#[derive(Clone)]
pub struct ColouredGraph {
    n: usize,
    m: usize,
    colour_adj: Vec<BitVec>,
    element_adj: Vec<BitVec>,
    degree: Vec<usize>,
    removed: Vec<Matching>,
}

impl ColouredGraph {
    pub fn build(bases: &BaseSequence) -> Self {
        let n = bases.colour_count();
        let m = bases.element_count();
        let mut colour_adj = vec![BitVec::zeros(m); n];
        let mut element_adj = vec![BitVec::zeros(n); m];
        let mut degree = vec![0usize; m];
        for (c, base) in bases.bases().iter().enumerate() {
            for &e in base {
                colour_adj[c].set(e, true);
                element_adj[e].set(c, true);
                degree[e] += 1;
            }
        }
        Self {
            n,
            m,
            colour_adj,
            element_adj,
            degree,
            removed: Vec::new(),
        }
    }

    pub fn colour_count(&self) -> usize {
        self.n
    }

    pub fn element_count(&self) -> usize {
        self.m
    }

    pub fn excess(&self) -> usize {
        self.m - self.n
    }

    pub fn removed_count(&self) -> usize {
        self.removed.len()
    }

    pub fn removed(&self) -> &[Matching] {
        &self.removed
    }

    /// Remaining degree budget: colour count minus removals.
    pub fn eta(&self) -> usize {
        self.n - self.removed.len()
    }

    pub fn has_edge(&self, c: usize, e: usize) -> bool {
        self.colour_adj[c].get(e)
    }

    pub fn degree(&self, e: usize) -> usize {
        self.degree[e]
    }

    pub fn deficit(&self, e: usize) -> usize {
        debug_assert!(self.degree[e] <= self.eta());
        self.eta() - self.degree[e]
    }

    pub fn deficits(&self) -> DeficitTable {
        DeficitTable {
            eta: self.eta(),
            per_element: (0..self.m).map(|e| self.deficit(e)).collect(),
        }
    }

    pub fn colour_elements(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.colour_adj[c].iter_ones()
    }

    pub fn element_colours(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.element_adj[e].iter_ones()
    }

    /// Sum of all element deficits; always the excess times the budget.
    pub fn total_deficit(&self) -> usize {
        let total: usize = (0..self.m).map(|e| self.deficit(e)).sum();
        assert_eq!(
            total,
            self.excess() * self.eta(),
            "deficit checksum violated"
        );
        total
    }

    /// Deletes a colour-saturating matching from the graph. The matching
    /// must consist of present edges and must cover every element whose
    /// degree is at the current budget, so the budget invariant survives.
    pub fn remove_matching(&mut self, w: &Matching) -> Result<()> {
        if w.colour_count() != self.n || w.element_count() != self.m {
            return Err(Error::Input("matching has mismatched dimensions".into()));
        }
        if !w.saturates_colours() {
            return Err(Error::Input("matching must saturate every colour".into()));
        }
        for (c, e) in w.edges() {
            if !self.has_edge(c, e) {
                return Err(Error::Input(format!(
                    "matching edge ({c},{e}) is not present in the graph"
                )));
            }
        }
        let eta_next = self.eta() - 1;
        for e in 0..self.m {
            let drop = usize::from(w.mate_of_element(e).is_some());
            if self.degree[e] - drop > eta_next {
                return Err(Error::Input(format!(
                    "removing this matching would leave element {e} over budget"
                )));
            }
        }
        for (c, e) in w.edges() {
            self.colour_adj[c].set(e, false);
            self.element_adj[e].set(c, false);
            self.degree[e] -= 1;
        }
        self.removed.push(w.clone());
        Ok(())
    }

    /// Edge list dump, 1-based, one `u<i> v<j>` line per edge.
    pub fn dump_edges(&self) -> String {
        let mut out = String::new();
        for c in 0..self.n {
            for e in self.colour_elements(c) {
                out.push_str(&format!("u{} v{}\n", c + 1, e + 1));
            }
        }
        out
    }
}

/// A maximum matching of a plain bipartite graph, as mate arrays.
#[derive(Clone, Debug)]
pub struct BipartiteMatching {
    pub mate_x: Vec<Option<usize>>,
    pub mate_y: Vec<Option<usize>>,
}

impl BipartiteMatching {
    pub fn len(&self) -> usize {
        self.mate_x.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Maximum bipartite matching by augmenting paths, together with a witness
/// set X' attaining the deficiency bound: |matching| = |X| - (|X'| - |N(X')|).
pub fn maximum_matching(adj: &[Vec<usize>], y_count: usize) -> (BipartiteMatching, Vec<usize>) {
    let x_count = adj.len();
    let mut mate_x: Vec<Option<usize>> = vec![None; x_count];
    let mut mate_y: Vec<Option<usize>> = vec![None; y_count];
    for x in 0..x_count {
        let mut visited = vec![false; y_count];
        try_augment(adj, x, &mut visited, &mut mate_x, &mut mate_y);
    }
    // alternating reachability from unmatched X vertices
    let mut x_reached = vec![false; x_count];
    let mut y_reached = vec![false; y_count];
    let mut queue: VecDeque<usize> = (0..x_count).filter(|&x| mate_x[x].is_none()).collect();
    for &x in &queue {
        x_reached[x] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !y_reached[y] {
                y_reached[y] = true;
                if let Some(x2) = mate_y[y] {
                    if !x_reached[x2] {
                        x_reached[x2] = true;
                        queue.push_back(x2);
                    }
                }
            }
        }
    }
    let witness: Vec<usize> = (0..x_count).filter(|&x| x_reached[x]).collect();
    (BipartiteMatching { mate_x, mate_y }, witness)
}

fn try_augment(
    adj: &[Vec<usize>],
    x: usize,
    visited: &mut [bool],
    mate_x: &mut [Option<usize>],
    mate_y: &mut [Option<usize>],
) -> bool {
    for &y in &adj[x] {
        if visited[y] {
            continue;
        }
        visited[y] = true;
        let free = match mate_y[y] {
            None => true,
            Some(x2) => try_augment(adj, x2, visited, mate_x, mate_y),
        };
        if free {
            mate_x[x] = Some(y);
            mate_y[y] = Some(x);
            return true;
        }
    }
    false
}

/// Colours reachable from `y` by alternating walks whose first step uses the
/// matching edge of a vertex in `y`.
pub fn reachable_colours(g: &ColouredGraph, w: &Matching, y: &[usize]) -> Result<Vec<usize>> {
    let mut in_set = vec![false; g.colour_count()];
    let mut queue = VecDeque::new();
    for &v in y {
        match w.mate_of_element(v) {
            Some(c) => {
                if !in_set[c] {
                    in_set[c] = true;
                    queue.push_back(c);
                }
            }
            None => {
                return Err(Error::Input(format!(
                    "element {v} is not saturated by the matching"
                )))
            }
        }
    }
    while let Some(c) = queue.pop_front() {
        for e in g.colour_elements(c) {
            if w.contains_edge(c, e) {
                continue;
            }
            if let Some(c2) = w.mate_of_element(e) {
                if !in_set[c2] {
                    in_set[c2] = true;
                    queue.push_back(c2);
                }
            }
        }
    }
    Ok((0..g.colour_count()).filter(|&c| in_set[c]).collect())
}

/// Shortest alternating path from an unmatched element (outside
/// `excluded_origins`) to a matched element of `targets`. Ties break on the
/// lowest origin index, then the lowest terminus index.
pub fn find_alternating_path(
    g: &ColouredGraph,
    w: &Matching,
    targets: &[usize],
    excluded_origins: &[usize],
) -> Option<AltPath> {
    let m = g.element_count();
    let mut is_target = vec![false; m];
    for &t in targets {
        if w.mate_of_element(t).is_some() {
            is_target[t] = true;
        }
    }
    if !is_target.iter().any(|&b| b) {
        return None;
    }
    let mut excluded = vec![false; m];
    for &e in excluded_origins {
        excluded[e] = true;
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m]; // (prev elem, colour)
    let mut origin_of: Vec<Option<usize>> = vec![None; m];
    let mut layer: Vec<usize> = w
        .uncovered_elements()
        .into_iter()
        .filter(|&e| !excluded[e])
        .collect();
    for &e in &layer {
        origin_of[e] = Some(e);
    }
    while !layer.is_empty() {
        let mut next: Vec<usize> = Vec::new();
        for &v in &layer {
            for c in g.element_colours(v) {
                if w.contains_edge(c, v) {
                    continue;
                }
                let v2 = w
                    .mate_of_colour(c)
                    .expect("matching saturates every colour during path search");
                if origin_of[v2].is_none() {
                    origin_of[v2] = origin_of[v];
                    parent[v2] = Some((v, c));
                    next.push(v2);
                }
            }
        }
        let mut best: Option<(usize, usize)> = None; // (origin, terminus)
        for &v in &next {
            if is_target[v] {
                let cand = (origin_of[v].unwrap(), v);
                if best.is_none() || cand < best.unwrap() {
                    best = Some(cand);
                }
            }
        }
        if let Some((_, terminus)) = best {
            let mut elems = vec![terminus];
            let mut colours = Vec::new();
            let mut cur = terminus;
            while let Some((prev, c)) = parent[cur] {
                colours.push(c);
                elems.push(prev);
                cur = prev;
            }
            elems.reverse();
            colours.reverse();
            return Some(AltPath { elems, colours });
        }
        layer = next;
    }
    None
}

/// Applies vertex-disjoint alternating paths to a matching: matching edges
/// on each path are swapped for the non-matching ones. Origins become
/// matched, termini become unmatched; the size is unchanged.
pub fn apply_paths(g: &ColouredGraph, w: &Matching, paths: &[AltPath]) -> Result<Matching> {
    for (i, p) in paths.iter().enumerate() {
        p.validate(g, w)?;
        for q in &paths[..i] {
            let shared_elem = p.elements().iter().any(|e| q.elements().contains(e));
            let shared_colour = p.colours().iter().any(|c| q.colours().contains(c));
            if shared_elem || shared_colour {
                return Err(Error::Input("paths are not vertex-disjoint".into()));
            }
        }
    }
    let mut out = w.clone();
    for p in paths {
        for i in 0..p.colours().len() {
            let (v, c, v2) = (p.elements()[i], p.colours()[i], p.elements()[i + 1]);
            out.mate_of_element[v2] = None;
            out.mate_of_colour[c] = Some(v);
            out.mate_of_element[v] = Some(c);
        }
    }
    debug_assert_eq!(out.len(), w.len());
    Ok(out)
}
