//! The rank-k quotient matroid: images of elements under the fundamental
//! circuit indicator map, preimage classes, flats, and the duality bridge
//! between circuits of the big matroid and cocircuits of the quotient.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::gf2::{mask_rank, MaskSieve};
use crate::matroid::BinaryMatroid;

/// Default cap on the quotient rank when enumerating flats.
pub const DEFAULT_FLAT_CAP: usize = 6;

/// One point of the quotient: a vector of GF(2)^k together with the
/// elements mapping to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NClass {
    pub vector: u64,
    pub members: Vec<usize>,
}

/// A closed subset of quotient points, keyed by its sorted class list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    pub classes: Vec<usize>,
    pub mask: u64,
    pub rank: usize,
}

impl Flat {
    pub fn contains_class(&self, c: usize) -> bool {
        self.mask >> c & 1 == 1
    }
}

/// Quotient of a binary matroid by a fixed basis: every element maps to the
/// indicator vector of the fundamental circuits containing it.
#[derive(Clone)]
pub struct QuotientMatroid {
    n: usize,
    k: usize,
    base_star: Vec<usize>,
    nonbasis: Vec<usize>,
    circuits: Vec<Vec<usize>>,
    element_vector: Vec<u64>,
    classes: Vec<NClass>,
    class_of: Vec<usize>,
}

impl QuotientMatroid {
    /// Builds the quotient for an explicit basis choice.
    pub fn build(m: &BinaryMatroid, base_star: &[usize]) -> Result<Self> {
        if !m.is_basis(base_star)? {
            return Err(Error::Input("base_star is not a basis".into()));
        }
        let k = m.corank_excess();
        if k > 63 {
            return Err(Error::Resource(format!(
                "corank excess {k} exceeds the supported width"
            )));
        }
        let total = m.element_count();
        let mut base_star = base_star.to_vec();
        base_star.sort_unstable();
        let in_base: Vec<bool> = {
            let mut v = vec![false; total];
            for &e in &base_star {
                v[e] = true;
            }
            v
        };
        let nonbasis: Vec<usize> = (0..total).filter(|&e| !in_base[e]).collect();
        let mut circuits = Vec::with_capacity(k);
        let mut element_vector = vec![0u64; total];
        for (i, &f) in nonbasis.iter().enumerate() {
            let circuit = m.fundamental_circuit(&base_star, f)?;
            for &e in &circuit {
                element_vector[e] |= 1 << i;
            }
            circuits.push(circuit);
        }
        // classes sorted by vector value; loops (zero vector) come first
        let mut vectors: Vec<u64> = element_vector.clone();
        vectors.sort_unstable();
        vectors.dedup();
        let mut classes: Vec<NClass> = vectors
            .into_iter()
            .map(|vector| NClass {
                vector,
                members: Vec::new(),
            })
            .collect();
        let mut class_of = vec![0usize; total];
        for e in 0..total {
            let idx = classes
                .binary_search_by_key(&element_vector[e], |c| c.vector)
                .expect("class exists");
            classes[idx].members.push(e);
            class_of[e] = idx;
        }
        Ok(Self {
            n: m.rank(),
            k,
            base_star,
            nonbasis,
            circuits,
            element_vector,
            classes,
            class_of,
        })
    }

    /// Builds the quotient using the lexicographically first basis.
    pub fn for_matroid(m: &BinaryMatroid) -> Result<Self> {
        let basis = m.lex_min_basis();
        Self::build(m, &basis)
    }

    pub fn quotient_rank(&self) -> usize {
        self.k
    }

    pub fn element_count(&self) -> usize {
        self.element_vector.len()
    }

    pub fn base_star(&self) -> &[usize] {
        &self.base_star
    }

    pub fn nonbasis_elements(&self) -> &[usize] {
        &self.nonbasis
    }

    pub fn fundamental_circuits(&self) -> &[Vec<usize>] {
        &self.circuits
    }

    pub fn vector_of(&self, e: usize) -> u64 {
        self.element_vector[e]
    }

    pub fn class_of(&self, e: usize) -> usize {
        self.class_of[e]
    }

    pub fn classes(&self) -> &[NClass] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Rank of a set of classes, by their vectors.
    pub fn rank_of_classes(&self, cls: &[usize]) -> usize {
        mask_rank(cls.iter().map(|&c| self.classes[c].vector))
    }

    pub fn rank_of_class_mask(&self, mask: u64) -> usize {
        mask_rank(
            (0..self.classes.len())
                .filter(|&c| mask >> c & 1 == 1)
                .map(|c| self.classes[c].vector),
        )
    }

    /// Rank of the image of an element set.
    pub fn rank_of_image(&self, elems: &[usize]) -> usize {
        mask_rank(elems.iter().map(|&e| self.element_vector[e]))
    }

    /// All classes whose vector lies in the span of the given classes.
    /// Loops belong to every closure.
    pub fn closure_classes(&self, cls: &[usize]) -> Vec<usize> {
        let mut sieve = MaskSieve::new();
        for &c in cls {
            sieve.insert(self.classes[c].vector);
        }
        (0..self.classes.len())
            .filter(|&c| sieve.contains(self.classes[c].vector))
            .collect()
    }

    pub fn closure_class_mask(&self, mask: u64) -> u64 {
        let cls: Vec<usize> = (0..self.classes.len())
            .filter(|&c| mask >> c & 1 == 1)
            .collect();
        self.closure_classes(&cls)
            .into_iter()
            .fold(0u64, |acc, c| acc | 1 << c)
    }

    pub fn is_flat(&self, cls: &[usize]) -> bool {
        self.closure_classes(cls) == {
            let mut s = cls.to_vec();
            s.sort_unstable();
            s
        }
    }

    /// Elements of the big matroid mapping into the flat.
    pub fn flat_elements(&self, flat: &Flat) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in &flat.classes {
            out.extend_from_slice(&self.classes[c].members);
        }
        out.sort_unstable();
        out
    }

    /// Whether a class set is a cocircuit: the complement must be a flat of
    /// rank one below the quotient rank.
    pub fn is_cocircuit_classes(&self, cls: &[usize]) -> bool {
        if cls.is_empty() {
            return false;
        }
        let in_set: HashSet<usize> = cls.iter().copied().collect();
        let complement: Vec<usize> = (0..self.classes.len())
            .filter(|c| !in_set.contains(c))
            .collect();
        self.rank_of_classes(&complement) == self.k.saturating_sub(1)
            && self.is_flat(&complement)
    }

    /// Checks that a circuit of the big matroid maps to a cocircuit of the
    /// quotient whose preimage is the circuit itself (and vacuously holds
    /// for non-circuits).
    pub fn circuit_maps_to_cocircuit(&self, m: &BinaryMatroid, c: &[usize]) -> Result<bool> {
        if !m.is_circuit(c)? {
            return Ok(true);
        }
        let mut image: Vec<usize> = c.iter().map(|&e| self.class_of[e]).collect();
        image.sort_unstable();
        image.dedup();
        if !self.is_cocircuit_classes(&image) {
            return Ok(false);
        }
        let mut preimage: Vec<usize> = image
            .iter()
            .flat_map(|&cl| self.classes[cl].members.iter().copied())
            .collect();
        preimage.sort_unstable();
        let mut sorted_c = c.to_vec();
        sorted_c.sort_unstable();
        Ok(preimage == sorted_c)
    }

    /// A size-n set is a basis exactly when the image of its complement is a
    /// basis of the quotient; returns whether the two sides agree.
    pub fn complement_basis_agrees(&self, m: &BinaryMatroid, b: &[usize]) -> Result<bool> {
        if b.len() != self.n {
            return Err(Error::Input(format!(
                "expected a size-{} set, got {}",
                self.n,
                b.len()
            )));
        }
        let left = m.is_basis(b)?;
        let in_b: HashSet<usize> = b.iter().copied().collect();
        let complement: Vec<usize> = (0..self.element_count())
            .filter(|e| !in_b.contains(e))
            .collect();
        let right = self.rank_of_image(&complement) == self.k;
        Ok(left == right)
    }

    /// Rank of an element set computed through the quotient:
    /// `n - |E - X| + r_N(image(E - X))`.
    pub fn rank_via_complement(&self, x: &[usize]) -> usize {
        let in_x: HashSet<usize> = x.iter().copied().collect();
        let complement: Vec<usize> = (0..self.element_count())
            .filter(|e| !in_x.contains(e))
            .collect();
        self.n + self.rank_of_image(&complement) - complement.len()
    }

    /// Every flat of the quotient, each exactly once, sorted by
    /// (rank, class list). Includes the loop-closure flat and the full set.
    pub fn enumerate_flats(&self, cap: usize) -> Result<Vec<Flat>> {
        if self.k > cap || self.k > DEFAULT_FLAT_CAP {
            return Err(Error::Resource(format!(
                "flat enumeration needs quotient rank <= {}, got {}",
                cap.min(DEFAULT_FLAT_CAP),
                self.k
            )));
        }
        // subspaces of GF(2)^k as point-set masks over the 2^k vectors
        let vectors = 1u64 << self.k;
        let mut seen: HashSet<u64> = HashSet::new();
        let mut queue = vec![1u64]; // the zero subspace {0}
        seen.insert(1);
        let mut idx = 0;
        while idx < queue.len() {
            let sub = queue[idx];
            idx += 1;
            for v in 1..vectors {
                if sub >> v & 1 == 1 {
                    continue;
                }
                let mut grown = sub;
                for s in 0..vectors {
                    if sub >> s & 1 == 1 {
                        grown |= 1 << (s ^ v);
                    }
                }
                if seen.insert(grown) {
                    queue.push(grown);
                }
            }
        }
        let mut flats: Vec<Flat> = Vec::new();
        let mut seen_masks: HashSet<u64> = HashSet::new();
        for sub in queue {
            let classes: Vec<usize> = (0..self.classes.len())
                .filter(|&c| sub >> self.classes[c].vector & 1 == 1)
                .collect();
            let mask = classes.iter().fold(0u64, |acc, &c| acc | 1 << c);
            if seen_masks.insert(mask) {
                let rank = self.rank_of_classes(&classes);
                flats.push(Flat {
                    classes,
                    mask,
                    rank,
                });
            }
        }
        flats.sort_by(|a, b| (a.rank, &a.classes).cmp(&(b.rank, &b.classes)));
        Ok(flats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Matrix;

    fn matroid(rows: &[&str]) -> BinaryMatroid {
        BinaryMatroid::new(Gf2Matrix::from_bit_strings(rows).unwrap()).unwrap()
    }

    #[test]
    fn quotient_of_running_example() {
        // columns: (1,0), (0,1), (1,1)
        let m = matroid(&["101", "011"]);
        let q = QuotientMatroid::build(&m, &[0, 1]).unwrap();
        assert_eq!(q.fundamental_circuits(), &[vec![0, 1, 2]]);
        assert_eq!(q.vector_of(0), 1);
        assert_eq!(q.vector_of(1), 1);
        assert_eq!(q.vector_of(2), 1);
        assert_eq!(q.class_count(), 1);
    }

    #[test]
    fn quotient_with_loop_class() {
        // columns: (1,0), (0,1), (0,1): e1 sits in no fundamental circuit
        let m = matroid(&["100", "011"]);
        let q = QuotientMatroid::for_matroid(&m).unwrap();
        assert_eq!(q.vector_of(0), 0);
        assert_eq!(q.vector_of(1), 1);
        assert_eq!(q.vector_of(2), 1);
    }

    #[test]
    fn zero_excess_quotient() {
        let m = matroid(&["10", "01"]);
        let q = QuotientMatroid::for_matroid(&m).unwrap();
        assert_eq!(q.quotient_rank(), 0);
        assert_eq!(q.class_count(), 1);
        assert_eq!(q.classes()[0].vector, 0);
        let flats = q.enumerate_flats(DEFAULT_FLAT_CAP).unwrap();
        assert_eq!(flats.len(), 1);
        assert_eq!(flats[0].rank, 0);
        assert!(q.complement_basis_agrees(&m, &[0, 1]).unwrap());
    }

    #[test]
    fn duality_examples() {
        let m = matroid(&["101", "011"]);
        let q = QuotientMatroid::build(&m, &[0, 1]).unwrap();
        assert!(q.circuit_maps_to_cocircuit(&m, &[0, 1, 2]).unwrap());
        assert!(q.circuit_maps_to_cocircuit(&m, &[0, 1]).unwrap()); // vacuous
        assert!(q.complement_basis_agrees(&m, &[0, 1]).unwrap());

        // parallel pair makes {e1,e3} dependent; both sides must be false
        let m2 = matroid(&["101", "010"]);
        let q2 = QuotientMatroid::for_matroid(&m2).unwrap();
        assert!(q2.complement_basis_agrees(&m2, &[0, 2]).unwrap());
    }

    #[test]
    fn rank_via_complement_examples() {
        let m = matroid(&["101", "011"]);
        let q = QuotientMatroid::build(&m, &[0, 1]).unwrap();
        assert_eq!(q.rank_via_complement(&[0, 1, 2]), 2);
        assert_eq!(q.rank_via_complement(&[0]), 1);
        assert_eq!(q.rank_via_complement(&[]), 0);
    }

    #[test]
    fn flats_of_rank_one_quotient() {
        let m = matroid(&["101", "011"]);
        let q = QuotientMatroid::build(&m, &[0, 1]).unwrap();
        let flats = q.enumerate_flats(DEFAULT_FLAT_CAP).unwrap();
        // the empty flat (no loops) and the full point set
        assert_eq!(flats.len(), 2);
        assert_eq!(flats[0].classes, Vec::<usize>::new());
        assert_eq!(flats[0].rank, 0);
        assert_eq!(flats[1].rank, 1);
        assert_eq!(q.flat_elements(&flats[1]), vec![0, 1, 2]);
    }

    #[test]
    fn flats_of_free_two_point_quotient() {
        // columns: (1,0), (0,1), (1,0), (0,1) -> two independent points
        let m = matroid(&["1010", "0101"]);
        let q = QuotientMatroid::for_matroid(&m).unwrap();
        assert_eq!(q.class_count(), 2);
        let flats = q.enumerate_flats(DEFAULT_FLAT_CAP).unwrap();
        assert_eq!(flats.len(), 4);
        assert_eq!(flats.iter().filter(|f| f.rank == 1).count(), 2);
    }

    #[test]
    fn closure_is_extensive_and_idempotent() {
        let m = matroid(&["10110", "01011", "00101"]);
        let q = QuotientMatroid::for_matroid(&m).unwrap();
        let all: Vec<usize> = (0..q.class_count()).collect();
        for start in 0..q.class_count() {
            let cl = q.closure_classes(&[start]);
            assert!(cl.contains(&start));
            assert_eq!(q.closure_classes(&cl), cl);
        }
        assert_eq!(q.closure_classes(&all), all);
    }
}
