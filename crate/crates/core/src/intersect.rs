//! Rainbow basis search by matroid intersection: the transversal matroid of
//! the residual coloured graph against the binary matroid, with an
//! exchange-graph augmenting-path algorithm, a min-max certificate on
//! failure, and the deficit inequality scan over quotient flats.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{maximum_matching, ColouredGraph, Matching};
use crate::matroid::BinaryMatroid;
use crate::quotient::{Flat, QuotientMatroid};

/// Witness that no size-n common independent set exists: a set A with
/// r1(A) + r2(E - A) below the rank.
#[derive(Clone, Debug)]
pub struct MinMaxCertificate {
    pub set: Vec<usize>,
    pub transversal_rank: usize,
    pub complement_rank: usize,
}

impl MinMaxCertificate {
    pub fn value(&self) -> usize {
        self.transversal_rank + self.complement_rank
    }
}

/// Outcome of the rainbow basis search.
pub enum RainbowSearch {
    /// A colour-saturating matching whose element set is a basis.
    Found(Matching),
    /// Maximum common independent set is short; carries the min-max witness.
    Infeasible {
        certificate: MinMaxCertificate,
        best: Vec<usize>,
    },
}

struct Oracles<'a> {
    g: &'a ColouredGraph,
    m: &'a BinaryMatroid,
    transversal_cache: HashMap<Vec<usize>, bool>,
    rank_cache: HashMap<Vec<usize>, bool>,
}

impl<'a> Oracles<'a> {
    fn new(g: &'a ColouredGraph, m: &'a BinaryMatroid) -> Self {
        Self {
            g,
            m,
            transversal_cache: HashMap::new(),
            rank_cache: HashMap::new(),
        }
    }

    /// Independent in the transversal matroid: the set matches into the
    /// colour side of the residual graph.
    fn independent_transversal(&mut self, set: &[usize]) -> bool {
        let key = set.to_vec();
        if let Some(&v) = self.transversal_cache.get(&key) {
            return v;
        }
        let adj: Vec<Vec<usize>> = set
            .iter()
            .map(|&e| self.g.element_colours(e).collect())
            .collect();
        let (mm, _) = maximum_matching(&adj, self.g.colour_count());
        let v = mm.len() == set.len();
        self.transversal_cache.insert(key, v);
        v
    }

    /// Independent in the binary matroid.
    fn independent_linear(&mut self, set: &[usize]) -> bool {
        let key = set.to_vec();
        if let Some(&v) = self.rank_cache.get(&key) {
            return v;
        }
        let v = self.m.subset_rank(set).unwrap_or(0) == set.len();
        self.rank_cache.insert(key, v);
        v
    }
}

fn with_element(set: &[usize], e: usize) -> Vec<usize> {
    let mut v = set.to_vec();
    v.push(e);
    v.sort_unstable();
    v
}

fn swapped(set: &[usize], out: usize, add: usize) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().copied().filter(|&x| x != out).collect();
    v.push(add);
    v.sort_unstable();
    v
}

/// Maximum common independent set of the transversal and linear matroids.
/// The `seed` permutes exploration order (0 keeps the identity order);
/// the result size and feasibility are order-independent.
pub fn max_common_independent(
    g: &ColouredGraph,
    m: &BinaryMatroid,
    seed: u64,
) -> (Vec<usize>, Option<MinMaxCertificate>) {
    let total = m.element_count();
    let mut order: Vec<usize> = (0..total).collect();
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    let mut oracles = Oracles::new(g, m);
    let mut current: Vec<usize> = Vec::new();
    loop {
        if current.len() == m.rank() {
            return (current, None);
        }
        let in_current = |e: usize| current.binary_search(&e).is_ok();
        let sources: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&e| !in_current(e) && oracles.independent_transversal(&with_element(&current, e)))
            .collect();
        let sinks: Vec<bool> = {
            let mut v = vec![false; total];
            for &e in &order {
                if !in_current(e) && oracles.independent_linear(&with_element(&current, e)) {
                    v[e] = true;
                }
            }
            v
        };
        // BFS over the exchange digraph
        let mut parent: Vec<Option<usize>> = vec![None; total];
        let mut reached = vec![false; total];
        let mut queue: Vec<usize> = Vec::new();
        for &s in &sources {
            reached[s] = true;
            queue.push(s);
        }
        let mut found: Option<usize> = None;
        let mut qi = 0;
        'bfs: while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            if !in_current(v) && sinks[v] {
                found = Some(v);
                break 'bfs;
            }
            if in_current(v) {
                // arcs x -> y: swapping keeps the transversal side independent
                for &y in &order {
                    if reached[y] || in_current(y) {
                        continue;
                    }
                    if oracles.independent_transversal(&swapped(&current, v, y)) {
                        reached[y] = true;
                        parent[y] = Some(v);
                        queue.push(y);
                    }
                }
            } else {
                // arcs y -> x: swapping keeps the linear side independent
                for &x in &order {
                    if reached[x] || !in_current(x) {
                        continue;
                    }
                    if oracles.independent_linear(&swapped(&current, x, v)) {
                        reached[x] = true;
                        parent[x] = Some(v);
                        queue.push(x);
                    }
                }
            }
        }
        match found {
            Some(sink) => {
                let mut node = sink;
                let mut add = Vec::new();
                let mut drop = Vec::new();
                loop {
                    if in_current(node) {
                        drop.push(node);
                    } else {
                        add.push(node);
                    }
                    match parent[node] {
                        Some(p) => node = p,
                        None => break,
                    }
                }
                current.retain(|e| !drop.contains(e));
                current.extend(add);
                current.sort_unstable();
                debug_assert!(oracles.independent_transversal(&current));
                debug_assert!(oracles.independent_linear(&current));
            }
            None => {
                let unreached: Vec<usize> = (0..total).filter(|&e| !reached[e]).collect();
                let reached_set: Vec<usize> = (0..total).filter(|&e| reached[e]).collect();
                let r1 = transversal_rank(g, &unreached);
                let r2 = m.subset_rank(&reached_set).expect("elements in range");
                debug_assert_eq!(r1 + r2, current.len());
                return (
                    current,
                    Some(MinMaxCertificate {
                        set: unreached,
                        transversal_rank: r1,
                        complement_rank: r2,
                    }),
                );
            }
        }
    }
}

/// Rank in the transversal matroid of the residual graph.
pub fn transversal_rank(g: &ColouredGraph, set: &[usize]) -> usize {
    let adj: Vec<Vec<usize>> = set
        .iter()
        .map(|&e| g.element_colours(e).collect())
        .collect();
    maximum_matching(&adj, g.colour_count()).0.len()
}

/// Searches the residual graph for a colour-saturating matching whose
/// element set is a basis. Absence comes with a min-max certificate.
pub fn find_rainbow_basis(g: &ColouredGraph, m: &BinaryMatroid, seed: u64) -> RainbowSearch {
    let (common, certificate) = max_common_independent(g, m, seed);
    if common.len() < m.rank() {
        let certificate = certificate.expect("short set implies a certificate");
        return RainbowSearch::Infeasible {
            certificate,
            best: common,
        };
    }
    let adj: Vec<Vec<usize>> = common
        .iter()
        .map(|&e| g.element_colours(e).collect())
        .collect();
    let (mm, _) = maximum_matching(&adj, g.colour_count());
    debug_assert_eq!(mm.len(), m.rank());
    let pairs: Vec<(usize, usize)> = mm
        .mate_x
        .iter()
        .enumerate()
        .map(|(i, c)| (c.expect("saturating"), common[i]))
        .collect();
    let w = Matching::from_pairs(g.colour_count(), g.element_count(), &pairs)
        .expect("mates form a matching");
    RainbowSearch::Found(w)
}

/// Exhaustively verifies that the algorithmic maximum equals the min-max
/// bound over all element subsets. Capped to keep the scan exact and fast.
pub fn verify_min_max(g: &ColouredGraph, m: &BinaryMatroid) -> Result<bool> {
    let total = m.element_count();
    if total > 12 {
        return Err(Error::Resource(format!(
            "exhaustive min-max scan capped at 12 elements, got {total}"
        )));
    }
    let (best, _) = max_common_independent(g, m, 0);
    let mut min_value = usize::MAX;
    for mask in 0u32..1 << total {
        let a: Vec<usize> = (0..total).filter(|&e| mask >> e & 1 == 1).collect();
        let complement: Vec<usize> = (0..total).filter(|&e| mask >> e & 1 == 0).collect();
        let value = transversal_rank(g, &a) + m.subset_rank(&complement)?;
        min_value = min_value.min(value);
    }
    Ok(best.len() == min_value)
}

/// All flats whose deficit exceeds `rank * (eta - slack)`. An empty result
/// at slack 0 certifies the feasibility condition for the next extraction.
pub fn flats_violating_slack(
    g: &ColouredGraph,
    q: &QuotientMatroid,
    flats: &[Flat],
    slack: usize,
) -> Vec<Flat> {
    let deficits = g.deficits();
    let eta = g.eta();
    flats
        .iter()
        .filter(|f| deficits.of_flat(q, f) > f.rank * eta.saturating_sub(slack))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::Instance;
    use crate::quotient::DEFAULT_FLAT_CAP;

    fn running_example() -> Instance {
        Instance::parse("MATROID 2 1\n101\n011\nBASES\n1 2\n1 3\n").unwrap()
    }

    #[test]
    fn finds_rainbow_basis_on_fresh_graph() {
        let inst = running_example();
        let g = ColouredGraph::build(&inst.bases);
        match find_rainbow_basis(&g, &inst.matroid, 0) {
            RainbowSearch::Found(w) => {
                assert!(w.saturates_colours());
                assert!(inst.matroid.is_basis(&w.elements()).unwrap());
            }
            RainbowSearch::Infeasible { .. } => panic!("fresh graph must be feasible"),
        }
    }

    #[test]
    fn zero_excess_forces_the_full_element_set() {
        let inst = Instance::parse("MATROID 2 0\n10\n01\nBASES\n1 2\n1 2\n").unwrap();
        let g = ColouredGraph::build(&inst.bases);
        match find_rainbow_basis(&g, &inst.matroid, 0) {
            RainbowSearch::Found(w) => assert_eq!(w.elements(), vec![0, 1]),
            RainbowSearch::Infeasible { .. } => panic!("perfect matching exists"),
        }
    }

    #[test]
    fn engineered_infeasible_case_has_certificate() {
        // columns (1,0),(0,1),(1,1),(1,1); after deleting a bad matching the
        // survivors force a parallel pair
        let inst = Instance::parse("MATROID 2 2\n1011\n0111\nBASES\n1 3\n2 4\n").unwrap();
        let mut g = ColouredGraph::build(&inst.bases);
        let w = Matching::from_pairs(2, 4, &[(0, 0), (1, 1)]).unwrap();
        g.remove_matching(&w).unwrap();
        match find_rainbow_basis(&g, &inst.matroid, 0) {
            RainbowSearch::Found(_) => panic!("forced survivors are dependent"),
            RainbowSearch::Infeasible { certificate, best } => {
                assert!(certificate.value() < 2);
                assert_eq!(best.len(), certificate.value());
            }
        }
        assert!(verify_min_max(&g, &inst.matroid).unwrap());

        // the feasibility condition really is violated after the bad removal
        let q = QuotientMatroid::for_matroid(&inst.matroid).unwrap();
        let flats = q.enumerate_flats(DEFAULT_FLAT_CAP).unwrap();
        assert!(!flats_violating_slack(&g, &q, &flats, 0).is_empty());
    }

    #[test]
    fn slack_scan_is_clean_on_fresh_instances() {
        let inst = running_example();
        let g = ColouredGraph::build(&inst.bases);
        let q = QuotientMatroid::for_matroid(&inst.matroid).unwrap();
        let flats = q.enumerate_flats(DEFAULT_FLAT_CAP).unwrap();
        assert!(flats_violating_slack(&g, &q, &flats, 0).is_empty());
    }

    #[test]
    fn min_max_on_running_example() {
        let inst = running_example();
        let g = ColouredGraph::build(&inst.bases);
        assert!(verify_min_max(&g, &inst.matroid).unwrap());
    }
}
