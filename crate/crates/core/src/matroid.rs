//! Binary matroids given by a GF(2) representation matrix, coloured base
//! sequences, and the instance text format.
//!
//! Elements are 0-based column indices in code; the text format is 1-based.

use crate::error::{Error, Result};
use crate::gf2::{Gf2Matrix, Sieve};

/// A rank-`n` binary matroid on `n + k` elements, represented by an
/// `n x (n+k)` GF(2) matrix of full row rank.
#[derive(Clone)]
pub struct BinaryMatroid {
    rep: Gf2Matrix,
    n: usize,
    k: usize,
}

impl BinaryMatroid {
    pub fn new(rep: Gf2Matrix) -> Result<Self> {
        let n = rep.rows();
        let m = rep.cols();
        if n == 0 {
            return Err(Error::Input("matroid rank must be at least 1".into()));
        }
        if m < n {
            return Err(Error::Input(format!(
                "element count {m} is below the rank {n}"
            )));
        }
        if rep.rank() != n {
            return Err(Error::Input(format!(
                "representation matrix has rank below {n}"
            )));
        }
        Ok(Self { rep, n, k: m - n })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Excess of element count over rank.
    pub fn corank_excess(&self) -> usize {
        self.k
    }

    pub fn element_count(&self) -> usize {
        self.n + self.k
    }

    pub fn rep(&self) -> &Gf2Matrix {
        &self.rep
    }

    fn check_elements(&self, xs: &[usize]) -> Result<()> {
        let m = self.element_count();
        for &x in xs {
            if x >= m {
                return Err(Error::Input(format!(
                    "element index {x} out of range (m = {m})"
                )));
            }
        }
        Ok(())
    }

    /// GF(2) rank of a set of elements.
    pub fn subset_rank(&self, xs: &[usize]) -> Result<usize> {
        self.check_elements(xs)?;
        Ok(self.rep.col_rank(xs))
    }

    pub fn is_basis(&self, xs: &[usize]) -> Result<bool> {
        Ok(xs.len() == self.n && self.subset_rank(xs)? == self.n)
    }

    /// Minimal dependent set test.
    pub fn is_circuit(&self, xs: &[usize]) -> Result<bool> {
        self.check_elements(xs)?;
        if xs.is_empty() {
            return Ok(false);
        }
        let mut sorted = xs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != xs.len() {
            return Ok(false);
        }
        if self.rep.col_rank(&sorted) != sorted.len() - 1 {
            return Ok(false);
        }
        for i in 0..sorted.len() {
            let mut rest = sorted.clone();
            rest.remove(i);
            if self.rep.col_rank(&rest) != rest.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The unique circuit inside `basis + e`, for `e` outside the basis.
    pub fn fundamental_circuit(&self, basis: &[usize], e: usize) -> Result<Vec<usize>> {
        self.check_elements(&[e])?;
        if basis.contains(&e) {
            return Err(Error::Input(format!("element {e} lies in the basis")));
        }
        if !self.is_basis(basis)? {
            return Err(Error::Input("the given set is not a basis".into()));
        }
        let coeffs = self
            .rep
            .express_in_columns(basis, e)
            .ok_or_else(|| Error::Consistency("basis does not span the ground set".into()))?;
        let mut circuit: Vec<usize> = coeffs.into_iter().map(|i| basis[i]).collect();
        circuit.push(e);
        circuit.sort_unstable();
        Ok(circuit)
    }

    /// All elements whose addition to `xs` does not raise the rank.
    pub fn closure(&self, xs: &[usize]) -> Result<Vec<usize>> {
        self.check_elements(xs)?;
        let mut sieve = Sieve::new();
        for &x in xs {
            sieve.insert(self.rep.column(x));
        }
        Ok((0..self.element_count())
            .filter(|&e| sieve.contains(&self.rep.column(e)))
            .collect())
    }

    /// Lexicographically first basis under greedy column scan.
    pub fn lex_min_basis(&self) -> Vec<usize> {
        let mut sieve = Sieve::new();
        let mut basis = Vec::with_capacity(self.n);
        for e in 0..self.element_count() {
            if sieve.insert(self.rep.column(e)) {
                basis.push(e);
                if basis.len() == self.n {
                    break;
                }
            }
        }
        basis
    }
}

/// An ordered sequence of `n` bases; the i-th carries colour i.
#[derive(Clone)]
pub struct BaseSequence {
    m: usize,
    bases: Vec<Vec<usize>>,
}

impl BaseSequence {
    pub fn new(matroid: &BinaryMatroid, bases: Vec<Vec<usize>>) -> Result<Self> {
        if bases.len() != matroid.rank() {
            return Err(Error::Input(format!(
                "expected {} bases, got {}",
                matroid.rank(),
                bases.len()
            )));
        }
        let mut stored = Vec::with_capacity(bases.len());
        for (i, b) in bases.into_iter().enumerate() {
            let mut b = b;
            b.sort_unstable();
            b.dedup();
            if !matroid.is_basis(&b)? {
                return Err(Error::Input(format!("colour {} set is not a basis", i + 1)));
            }
            stored.push(b);
        }
        Ok(Self {
            m: matroid.element_count(),
            bases: stored,
        })
    }

    pub fn colour_count(&self) -> usize {
        self.bases.len()
    }

    pub fn element_count(&self) -> usize {
        self.m
    }

    pub fn base(&self, colour: usize) -> &[usize] {
        &self.bases[colour]
    }

    pub fn bases(&self) -> &[Vec<usize>] {
        &self.bases
    }
}

/// A matroid plus its coloured base sequence; the unit of the text format.
#[derive(Clone)]
pub struct Instance {
    pub matroid: BinaryMatroid,
    pub bases: BaseSequence,
}

impl Instance {
    /// Parses the instance text format:
    ///
    /// ```text
    /// MATROID n k
    /// <n rows of (n+k)-character bit strings>
    /// BASES
    /// <n lines of n space-separated 1-based element indices>
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty instance".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("MATROID") {
            return Err(Error::Parse("expected MATROID header".into()));
        }
        let n: usize = parse_field(parts.next(), "rank n")?;
        let k: usize = parse_field(parts.next(), "excess k")?;
        if parts.next().is_some() {
            return Err(Error::Parse("trailing tokens on MATROID line".into()));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let row = lines
                .next()
                .ok_or_else(|| Error::Parse("missing matrix row".into()))?;
            if row.len() != n + k {
                return Err(Error::Parse(format!(
                    "matrix row has {} characters, expected {}",
                    row.len(),
                    n + k
                )));
            }
            rows.push(row.to_string());
        }
        let matroid = BinaryMatroid::new(Gf2Matrix::from_bit_strings(&rows)?)?;
        if lines.next() != Some("BASES") {
            return Err(Error::Parse("expected BASES separator".into()));
        }
        let m = n + k;
        let mut bases = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing basis line".into()))?;
            let mut base = Vec::with_capacity(n);
            for tok in line.split_whitespace() {
                let idx: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element index {tok:?}")))?;
                if idx == 0 || idx > m {
                    return Err(Error::Parse(format!(
                        "element index {idx} out of range 1..={m}"
                    )));
                }
                base.push(idx - 1);
            }
            if base.len() != n {
                return Err(Error::Parse(format!(
                    "basis line has {} entries, expected {n}",
                    base.len()
                )));
            }
            bases.push(base);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing content after bases".into()));
        }
        let bases = BaseSequence::new(&matroid, bases)?;
        Ok(Self { matroid, bases })
    }

    pub fn to_text(&self) -> String {
        let n = self.matroid.rank();
        let k = self.matroid.corank_excess();
        let mut out = format!("MATROID {n} {k}\n");
        for r in 0..n {
            for c in 0..n + k {
                out.push(if self.matroid.rep().get(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out.push_str("BASES\n");
        for base in self.bases.bases() {
            let line: Vec<String> = base.iter().map(|e| (e + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn parse_field(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}
