//! Binary tag-state codes.
//!
//! A codeword is the vector of all `N` tag states for one time slot; a code
//! is the `N x T` binary matrix of codewords used across `T` slots. The
//! canonical enumeration of the `M = 2^N` codewords is binary counting with
//! the least significant bit assigned to tag 1, and every proportion vector
//! is indexed by that enumeration.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Largest supported tag count for full codeword enumeration.
pub const MAX_ENUMERATED_TAGS: usize = 20;

/// Tolerance on the proportion-vector sum.
pub const PROPORTION_SUM_TOL: f64 = 1e-12;

/// States of all tags in one time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Codeword {
    bits: u32,
    len: u8,
}

impl Codeword {
    /// Codeword with the bit pattern of `index` (LSB = tag 1).
    pub fn from_index(index: usize, n: usize) -> Result<Self> {
        check_tag_count(n)?;
        if index >= (1usize << n) {
            return Err(Error::invalid(
                "index",
                format!("codeword index {index} out of range for {n} tags"),
            ));
        }
        Ok(Codeword {
            bits: index as u32,
            len: n as u8,
        })
    }

    pub fn from_states(states: &[bool]) -> Result<Self> {
        check_tag_count(states.len())?;
        let mut bits = 0u32;
        for (i, &s) in states.iter().enumerate() {
            if s {
                bits |= 1 << i;
            }
        }
        Ok(Codeword {
            bits,
            len: states.len() as u8,
        })
    }

    /// Position in the canonical enumeration.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// State of tag `tag` (0-based).
    pub fn state(&self, tag: usize) -> bool {
        debug_assert!(tag < self.len());
        (self.bits >> tag) & 1 == 1
    }

    pub fn states(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", if self.state(i) { 1 } else { 0 })?;
        }
        Ok(())
    }
}

fn check_tag_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENUMERATED_TAGS {
        return Err(Error::invalid(
            "n",
            format!("tag count must be in 1..={MAX_ENUMERATED_TAGS}, got {n}"),
        ));
    }
    Ok(())
}

/// All `2^n` codewords in canonical (binary counting) order.
pub fn enumerate_codewords(n: usize) -> Result<Vec<Codeword>> {
    check_tag_count(n)?;
    Ok((0..(1usize << n))
        .map(|i| Codeword {
            bits: i as u32,
            len: n as u8,
        })
        .collect())
}

/// Binary code matrix: one codeword per time slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    columns: Vec<Codeword>,
}

impl Code {
    pub fn new(columns: Vec<Codeword>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::invalid("columns", "a code needs at least one column"));
        };
        let n = first.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("columns", "codeword lengths differ"));
        }
        Ok(Code { columns })
    }

    /// Number of tags.
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    /// Number of time slots.
    pub fn t(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, t: usize) -> &Codeword {
        &self.columns[t]
    }

    pub fn columns(&self) -> &[Codeword] {
        &self.columns
    }

    /// Occurrence count of each canonical codeword.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; 1 << self.n()];
        for c in &self.columns {
            counts[c.index()] += 1;
        }
        counts
    }

    /// Code with columns reordered by the permutation `perm`
    /// (`new[t] = old[perm[t]]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.t() {
            return Err(Error::invalid("perm", "permutation length must equal T"));
        }
        let mut seen = vec![false; self.t()];
        for &p in perm {
            if p >= self.t() || seen[p] {
                return Err(Error::invalid("perm", "not a permutation"));
            }
            seen[p] = true;
        }
        Code::new(perm.iter().map(|&p| self.columns[p]).collect())
    }

    /// Serialize as `N` rows by `T` columns of space-separated 0/1.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n() * self.t() * 2);
        for tag in 0..self.n() {
            for (t, c) in self.columns.iter().enumerate() {
                if t > 0 {
                    out.push(' ');
                }
                out.push(if c.state(tag) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parse the row-of-0/1 text format produced by [`Code::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<bool>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| match tok {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(Error::invalid(
                            "code text",
                            format!("expected 0 or 1, got `{other}`"),
                        )),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if rows.is_empty() {
            return Err(Error::invalid("code text", "no rows"));
        }
        let t = rows[0].len();
        if t == 0 || rows.iter().any(|r| r.len() != t) {
            return Err(Error::invalid("code text", "ragged or empty rows"));
        }
        let n = rows.len();
        check_tag_count(n)?;
        let columns = (0..t)
            .map(|slot| {
                let states: Vec<bool> = (0..n).map(|tag| rows[tag][slot]).collect();
                Codeword::from_states(&states)
            })
            .collect::<Result<_>>()?;
        Code::new(columns)
    }
}

/// Empirical codeword frequencies of a code, indexed canonically.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionVector<T> {
    weights: Vec<T>,
}

impl<T: Real> ProportionVector<T> {
    /// Validate and wrap raw weights (must sum to 1 within tolerance).
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if !weights.len().is_power_of_two() || weights.len() < 2 {
            return Err(Error::invalid(
                "weights",
                format!("length must be 2^N >= 2, got {}", weights.len()),
            ));
        }
        if weights.iter().any(|w| *w < T::zero() || !w.is_finite()) {
            return Err(Error::invalid("weights", "negative or non-finite entry"));
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > real(PROPORTION_SUM_TOL) {
            return Err(Error::invalid(
                "weights",
                format!("entries sum to {sum}, expected 1"),
            ));
        }
        Ok(ProportionVector { weights })
    }

    /// Uniform distribution over all `2^n` codewords.
    pub fn uniform(n: usize) -> Result<Self> {
        check_tag_count(n)?;
        let m = 1usize << n;
        Ok(ProportionVector {
            weights: vec![T::one() / real(m as f64); m],
        })
    }

    /// All mass on one codeword.
    pub fn indicator(n: usize, index: usize) -> Result<Self> {
        check_tag_count(n)?;
        let m = 1usize << n;
        if index >= m {
            return Err(Error::invalid("index", "codeword index out of range"));
        }
        let mut weights = vec![T::zero(); m];
        weights[index] = T::one();
        Ok(ProportionVector { weights })
    }

    /// Equal mass on the `n` standard-basis codewords.
    pub fn orthogonal(n: usize) -> Result<Self> {
        check_tag_count(n)?;
        let m = 1usize << n;
        let mut weights = vec![T::zero(); m];
        let share = T::one() / real(n as f64);
        for tag in 0..n {
            weights[1usize << tag] = share;
        }
        Ok(ProportionVector { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Tag count `N = log2(len)`.
    pub fn n(&self) -> usize {
        self.weights.len().trailing_zeros() as usize
    }

    pub fn weight(&self, index: usize) -> T {
        self.weights[index]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Proportion vector of a code: occurrence counts normalized by `T`.
pub fn proportions_of<T: Real>(code: &Code) -> ProportionVector<T> {
    let t = real::<T>(code.t() as f64);
    let weights = code
        .counts()
        .into_iter()
        .map(|c| real::<T>(c as f64) / t)
        .collect();
    ProportionVector { weights }
}

/// Realize a proportion vector as a code of exactly `t` columns using
/// largest-remainder rounding of `t * pi`; columns come out in canonical
/// codeword order.
pub fn code_from_proportions<T: Real>(pi: &ProportionVector<T>, t: usize) -> Result<Code> {
    if t == 0 {
        return Err(Error::invalid("t", "code length must be at least 1"));
    }
    let n = pi.n();
    let tf = real::<T>(t as f64);
    let mut counts = vec![0usize; pi.len()];
    let mut remainders: Vec<(usize, T)> = Vec::with_capacity(pi.len());
    let mut assigned = 0usize;
    for (i, &w) in pi.weights().iter().enumerate() {
        let exact = w * tf;
        let floor = exact.floor();
        let c = floor.to_usize().unwrap_or(0).min(t);
        counts[i] = c;
        assigned += c;
        remainders.push((i, exact - floor));
    }
    // Distribute the leftover slots by largest remainder, lowest index first
    // on ties.
    let mut leftover = t.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite remainders").then(a.0.cmp(&b.0)));
    let mut cursor = 0usize;
    while leftover > 0 {
        let (idx, _) = remainders[cursor % remainders.len()];
        counts[idx] += 1;
        leftover -= 1;
        cursor += 1;
    }
    let mut columns = Vec::with_capacity(t);
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            columns.push(Codeword::from_index(i, n)?);
        }
    }
    debug_assert_eq!(columns.len(), t);
    Code::new(columns)
}

/// The channel-agnostic baseline: each standard-basis codeword `e_i` used
/// exactly `t / n` times.
pub fn orthogonal_code(n: usize, t: usize) -> Result<Code> {
    check_tag_count(n)?;
    if t == 0 || t % n != 0 {
        return Err(Error::invalid(
            "t",
            format!("code length {t} must be a positive multiple of the tag count {n}"),
        ));
    }
    let reps = t / n;
    let mut columns = Vec::with_capacity(t);
    for tag in 0..n {
        let cw = Codeword::from_index(1usize << tag, n)?;
        for _ in 0..reps {
            columns.push(cw);
        }
    }
    Code::new(columns)
}

/// `t` copies of a single codeword.
pub fn repetition_code(codeword: Codeword, t: usize) -> Result<Code> {
    if t == 0 {
        return Err(Error::invalid("t", "code length must be at least 1"));
    }
    Code::new(vec![codeword; t])
}
