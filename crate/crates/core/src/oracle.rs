//! Ground truth at desk scale: seeded instance generation, an exact
//! backtracking count of disjoint rainbow bases, and certificate
//! verification independent of the extractor's internals.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extract::Certificate;
use crate::gf2::{Gf2Matrix, MaskSieve};
use crate::matroid::{BaseSequence, BinaryMatroid, Instance};

/// How instances are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    /// Representation sampled uniformly until it has full rank; bases grown
    /// greedily over random element permutations.
    Uniform,
    /// Identity block plus two fixed dependent columns planting a parallel
    /// class that the repair machinery must handle. Requires k = 2, n >= 3.
    Planted,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub mode: GenMode,
}

/// Deterministic in the spec: the same seed reproduces the instance bit
/// for bit.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance> {
    match spec.mode {
        GenMode::Uniform => gen_uniform(spec.n, spec.k, spec.seed),
        GenMode::Planted => gen_planted(spec.n, spec.k),
    }
}

fn gen_uniform(n: usize, k: usize, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Input("rank must be at least 1".into()));
    }
    let m = n + k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matroid = loop {
        let mut rep = Gf2Matrix::zeros(n, m);
        for r in 0..n {
            for c in 0..m {
                rep.set(r, c, rng.gen::<bool>());
            }
        }
        if rep.rank() == n {
            break BinaryMatroid::new(rep)?;
        }
    };
    let mut bases = Vec::with_capacity(n);
    for _ in 0..n {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        let mut sieve = crate::gf2::Sieve::new();
        let mut base = Vec::with_capacity(n);
        for e in order {
            if sieve.insert(matroid.rep().column(e)) {
                base.push(e);
                if base.len() == n {
                    break;
                }
            }
        }
        base.sort_unstable();
        bases.push(base);
    }
    let bases = BaseSequence::new(&matroid, bases)?;
    Ok(Instance { matroid, bases })
}

fn gen_planted(n: usize, k: usize) -> Result<Instance> {
    if k != 2 || n < 3 {
        return Err(Error::Input(
            "planted instances need k = 2 and n >= 3".into(),
        ));
    }
    let m = n + 2;
    let mut rep = Gf2Matrix::zeros(n, m);
    for i in 0..n {
        rep.set(i, i, true);
    }
    // column n = e2 + e3, column n+1 = e1 + e2 + e3: elements 2 and 3 fall
    // into the same quotient class, the planted parallel pair
    rep.set(1, n, true);
    rep.set(2, n, true);
    rep.set(0, n + 1, true);
    rep.set(1, n + 1, true);
    rep.set(2, n + 1, true);
    let matroid = BinaryMatroid::new(rep)?;
    let rest: Vec<usize> = (3..n).collect();
    let with_rest = |mut head: Vec<usize>| {
        head.extend(rest.iter().copied());
        head.sort_unstable();
        head
    };
    let b1 = with_rest(vec![0, 1, n]);
    let b2 = with_rest(vec![0, 2, n]);
    let b3 = with_rest(vec![0, 1, n + 1]);
    let mut bases = vec![b1.clone(), b2.clone(), b3];
    for colour in 3..n {
        bases.push(if colour % 2 == 1 { b1.clone() } else { b2.clone() });
    }
    let bases = BaseSequence::new(&matroid, bases)?;
    Ok(Instance { matroid, bases })
}

/// Exact maximum number of disjoint rainbow bases, by backtracking over
/// per-colour representatives with rank pruning. Rows are canonicalised by
/// their strictly increasing first-colour representative.
pub fn exact_max_disjoint(m: &BinaryMatroid, b: &BaseSequence) -> Result<usize> {
    let n = m.rank();
    if n > 5 || m.corank_excess() > 2 {
        return Err(Error::Resource(
            "exact search capped at rank 5 and excess 2".into(),
        ));
    }
    let col_mask: Vec<u64> = (0..m.element_count())
        .map(|e| {
            (0..n)
                .filter(|&r| m.rep().get(r, e))
                .fold(0u64, |acc, r| acc | 1 << r)
        })
        .collect();
    let mut used = vec![vec![false; m.element_count()]; n];
    let mut best = 0usize;
    descend(m, b, &col_mask, &mut used, 0, 0, &mut best);
    Ok(best)
}

fn descend(
    m: &BinaryMatroid,
    b: &BaseSequence,
    col_mask: &[u64],
    used: &mut Vec<Vec<bool>>,
    rows_done: usize,
    min_first: usize,
    best: &mut usize,
) {
    *best = (*best).max(rows_done);
    let n = m.rank();
    let remaining = (0..n)
        .map(|c| b.base(c).iter().filter(|&&e| !used[c][e]).count())
        .min()
        .unwrap_or(0);
    if rows_done + remaining <= *best {
        return;
    }
    let mut row = Vec::with_capacity(n);
    try_row(
        m,
        b,
        col_mask,
        used,
        rows_done,
        min_first,
        0,
        &mut row,
        &MaskSieve::new(),
        best,
    );
}

#[allow(clippy::too_many_arguments)]
fn try_row(
    m: &BinaryMatroid,
    b: &BaseSequence,
    col_mask: &[u64],
    used: &mut Vec<Vec<bool>>,
    rows_done: usize,
    min_first: usize,
    colour: usize,
    row: &mut Vec<usize>,
    sieve: &MaskSieve,
    best: &mut usize,
) {
    let n = m.rank();
    if colour == n {
        for (c, &e) in row.iter().enumerate() {
            used[c][e] = true;
        }
        descend(m, b, col_mask, used, rows_done + 1, row[0] + 1, best);
        for (c, &e) in row.iter().enumerate() {
            used[c][e] = false;
        }
        return;
    }
    for &e in b.base(colour) {
        if used[colour][e] {
            continue;
        }
        if colour == 0 && e < min_first {
            continue;
        }
        let mut next = sieve.clone();
        if next.insert(col_mask[e]) {
            row.push(e);
            try_row(
                m, b, col_mask, used, rows_done, min_first, colour + 1, row, &next, best,
            );
            row.pop();
        }
    }
}

/// Checks a certificate from scratch: every row drawn from the right
/// colours, every row a basis, and no colour repeating a representative.
pub fn verify_certificate(
    m: &BinaryMatroid,
    b: &BaseSequence,
    cert: &Certificate,
) -> Result<bool> {
    let n = m.rank();
    if cert.n != n || cert.k != m.corank_excess() {
        return Err(Error::Input(
            "certificate dimensions do not match the instance".into(),
        ));
    }
    for row in &cert.rows {
        if row.len() != n {
            return Err(Error::Input("certificate row has the wrong length".into()));
        }
        for (c, &e) in row.iter().enumerate() {
            if e >= m.element_count() {
                return Err(Error::Input(format!("element index {e} out of range")));
            }
            if !b.base(c).contains(&e) {
                return Ok(false);
            }
        }
        if !m.is_basis(row)? {
            return Ok(false);
        }
    }
    for c in 0..n {
        let mut reps: Vec<usize> = cert.rows.iter().map(|r| r[c]).collect();
        reps.sort_unstable();
        reps.dedup();
        if reps.len() != cert.rows.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{extract_all, ExtractConfig, StopReason};

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec {
            n: 4,
            k: 2,
            seed: 11,
            mode: GenMode::Uniform,
        };
        let a = gen_instance(&spec).unwrap().to_text();
        let b = gen_instance(&spec).unwrap().to_text();
        assert_eq!(a, b);
        let c = gen_instance(&InstanceSpec { seed: 12, ..spec })
            .unwrap()
            .to_text();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_excess_generation_repeats_the_unique_basis() {
        let inst = gen_instance(&InstanceSpec {
            n: 2,
            k: 0,
            seed: 3,
            mode: GenMode::Uniform,
        })
        .unwrap();
        for base in inst.bases.bases() {
            assert_eq!(base, &vec![0, 1]);
        }
    }

    #[test]
    fn planted_mode_validates_and_embeds_the_pair() {
        assert!(gen_instance(&InstanceSpec {
            n: 2,
            k: 2,
            seed: 0,
            mode: GenMode::Planted
        })
        .is_err());
        let inst = gen_instance(&InstanceSpec {
            n: 4,
            k: 2,
            seed: 0,
            mode: GenMode::Planted,
        })
        .unwrap();
        let q = crate::quotient::QuotientMatroid::for_matroid(&inst.matroid).unwrap();
        assert_eq!(q.class_of(1), q.class_of(2));
    }

    #[test]
    fn exact_count_on_known_instances() {
        let inst = Instance::parse("MATROID 2 0\n10\n01\nBASES\n1 2\n1 2\n").unwrap();
        assert_eq!(exact_max_disjoint(&inst.matroid, &inst.bases).unwrap(), 2);

        let inst = Instance::parse("MATROID 2 1\n101\n011\nBASES\n1 2\n1 3\n").unwrap();
        assert_eq!(exact_max_disjoint(&inst.matroid, &inst.bases).unwrap(), 2);
    }

    #[test]
    fn exact_count_matches_enumeration_on_a_small_case() {
        let inst = Instance::parse(
            "MATROID 3 1\n1001\n0101\n0011\nBASES\n1 2 3\n1 2 4\n2 3 4\n",
        )
        .unwrap();
        let fast = exact_max_disjoint(&inst.matroid, &inst.bases).unwrap();

        // independent route: enumerate every rainbow row, then take the
        // largest packing with per-colour distinct representatives
        let m = &inst.matroid;
        let b = &inst.bases;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for &e0 in b.base(0) {
            for &e1 in b.base(1) {
                for &e2 in b.base(2) {
                    let row = vec![e0, e1, e2];
                    if m.is_basis(&row).unwrap() {
                        rows.push(row);
                    }
                }
            }
        }
        fn pack(rows: &[Vec<usize>], chosen: &mut Vec<usize>, best: &mut usize) {
            *best = (*best).max(chosen.len());
            let start = chosen.last().map(|&i| i + 1).unwrap_or(0);
            for i in start..rows.len() {
                let ok = chosen.iter().all(|&j| {
                    rows[i].iter().zip(&rows[j]).all(|(a, c)| a != c)
                });
                if ok {
                    chosen.push(i);
                    pack(rows, chosen, best);
                    chosen.pop();
                }
            }
        }
        let mut slow = 0;
        pack(&rows, &mut Vec::new(), &mut slow);
        assert_eq!(fast, slow);
    }

    #[test]
    fn exact_count_rejects_large_instances() {
        let inst = gen_instance(&InstanceSpec {
            n: 6,
            k: 0,
            seed: 0,
            mode: GenMode::Uniform,
        })
        .unwrap();
        assert!(exact_max_disjoint(&inst.matroid, &inst.bases).is_err());
    }

    #[test]
    fn verify_accepts_extractor_output_and_rejects_duplicates() {
        let inst = Instance::parse("MATROID 2 1\n101\n011\nBASES\n1 2\n1 3\n").unwrap();
        let out = extract_all(&inst.matroid, &inst.bases, &ExtractConfig::default()).unwrap();
        assert!(verify_certificate(&inst.matroid, &inst.bases, &out.certificate).unwrap());

        let empty = Certificate {
            n: 2,
            k: 1,
            rows: vec![],
            stop: StopReason::Exhausted,
        };
        assert!(verify_certificate(&inst.matroid, &inst.bases, &empty).unwrap());

        let dup = Certificate {
            n: 2,
            k: 1,
            rows: vec![vec![0, 2], vec![0, 2]],
            stop: StopReason::Exhausted,
        };
        assert!(!verify_certificate(&inst.matroid, &inst.bases, &dup).unwrap());
    }
}
