//! ANOVA term sets and grouped frequency index sets.
//!
//! Coordinates are stored 0-based. Labels produced for reports are 1-based
//! (`"1-3-8"`, `"const"` for the empty term).
//!
//! Terms are kept in canonical order: by cardinality, then lexicographically.
//! Inside a group the frequencies are enumerated in odometer order with the
//! smallest coordinate varying fastest and component values ascending. The
//! flat coefficient layout of a [`GroupedIndexSet`] concatenates the groups in
//! term order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormal system the frequencies refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `exp(2πi⟨k,x⟩)` on the torus, `k_j ∈ [-N/2, N/2) \ {0}`.
    Exponential,
    /// `√2^{|supp k|} Π cos(π k_j x_j)` on the unit cube, `k_j ∈ {1, …, N-1}`.
    Cosine,
}

/// A subset `u` of the coordinate indices, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Term(Vec<usize>);

impl Term {
    /// Builds a term from 0-based coordinates. Duplicates are rejected.
    pub fn new(mut coords: Vec<usize>) -> Result<Self> {
        coords.sort_unstable();
        if coords.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTerm {
                term: coords,
                reason: "repeated coordinate".into(),
            });
        }
        Ok(Term(coords))
    }

    /// Builds a term from 1-based coordinates, as written in reports.
    pub fn from_one_based(coords: &[usize]) -> Result<Self> {
        if coords.contains(&0) {
            return Err(Error::InvalidTerm {
                term: coords.to_vec(),
                reason: "1-based coordinates start at 1".into(),
            });
        }
        Term::new(coords.iter().map(|c| c - 1).collect())
    }

    pub fn empty() -> Self {
        Term(Vec::new())
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.0.binary_search(&coord).is_ok()
    }

    pub fn is_subset_of(&self, other: &Term) -> bool {
        self.0.iter().all(|c| other.contains(*c))
    }

    /// All proper subsets, in canonical order.
    pub fn proper_subsets(&self) -> Vec<Term> {
        let r = self.0.len();
        let mut out: Vec<Term> = (0..(1usize << r) - 1)
            .map(|mask| {
                Term(
                    (0..r)
                        .filter(|b| mask & (1 << b) != 0)
                        .map(|b| self.0[b])
                        .collect(),
                )
            })
            .collect();
        out.sort();
        out
    }

    /// Report label: coordinates joined by `-` (1-based), `const` for `∅`.
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            "const".to_string()
        } else {
            self.0
                .iter()
                .map(|c| (c + 1).to_string())
                .collect::<Vec<_>>()
                .join("-")
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Ordered collection of distinct terms over `d` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    d: usize,
    terms: Vec<Term>,
}

impl TermSet {
    /// Sorts the terms into canonical order and validates them.
    pub fn new(d: usize, mut terms: Vec<Term>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if let Some(bad) = terms.iter().find(|t| t.0.iter().any(|&c| c >= d)) {
            return Err(Error::InvalidTerm {
                term: bad.0.clone(),
                reason: format!("coordinate outside 0..{d}"),
            });
        }
        terms.sort();
        if let Some(w) = terms.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidTerm {
                term: w[0].0.clone(),
                reason: "duplicate term".into(),
            });
        }
        Ok(TermSet { d, terms })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Term> {
        self.terms.iter()
    }

    /// Position of `term` in canonical order.
    pub fn position(&self, term: &Term) -> Option<usize> {
        self.terms.binary_search(term).ok()
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.position(term).is_some()
    }

    /// Largest term cardinality.
    pub fn max_order(&self) -> usize {
        self.terms.iter().map(Term::len).max().unwrap_or(0)
    }

    /// True if every subset of every member is a member.
    pub fn is_downward_closed(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.proper_subsets().iter().all(|s| self.contains(s)))
    }
}

/// `U_{d_s}`: every subset of `{0, …, d-1}` with at most `ds` elements.
pub fn build_term_superset(d: usize, ds: usize) -> Result<TermSet> {
    if ds == 0 || ds > d {
        return Err(Error::InvalidThreshold { d, ds });
    }
    let mut terms = vec![Term::empty()];
    let mut current = vec![Term::empty()];
    for _ in 0..ds {
        let mut next = Vec::new();
        for t in &current {
            let start = t.0.last().map_or(0, |&c| c + 1);
            for c in start..d {
                let mut coords = t.0.clone();
                coords.push(c);
                next.push(Term(coords));
            }
        }
        terms.extend(next.iter().cloned());
        current = next;
    }
    TermSet::new(d, terms)
}

/// `(N - 1)^{|u|}`, and 1 for the empty term.
pub fn group_cardinality(order: usize, bandwidth: usize) -> usize {
    if order == 0 {
        1
    } else {
        bandwidth.saturating_sub(1).pow(order as u32)
    }
}

fn check_bandwidth(term: &Term, bandwidth: usize, basis: Basis) -> Result<()> {
    if term.is_empty() {
        return Ok(());
    }
    if bandwidth < 2 {
        return Err(Error::InvalidBandwidth {
            term: term.label(),
            bandwidth,
            reason: "bandwidth must be at least 2",
        });
    }
    if basis == Basis::Exponential && !bandwidth.is_multiple_of(2) {
        return Err(Error::InvalidBandwidth {
            term: term.label(),
            bandwidth,
            reason: "exponential basis requires an even bandwidth",
        });
    }
    Ok(())
}

/// Nonzero one-dimensional frequencies of a group axis, ascending.
pub fn axis_frequencies(bandwidth: usize, basis: Basis) -> Vec<i64> {
    let n = bandwidth as i64;
    match basis {
        Basis::Exponential => (-n / 2..n / 2).filter(|&k| k != 0).collect(),
        Basis::Cosine => (1..n).collect(),
    }
}

/// All `d`-dimensional frequencies with support exactly `term`, in odometer order.
pub fn enumerate_group(term: &Term, bandwidth: usize, basis: Basis, d: usize) -> Result<Vec<Vec<i64>>> {
    check_bandwidth(term, bandwidth, basis)?;
    if let Some(&c) = term.0.last() {
        if c >= d {
            return Err(Error::InvalidTerm {
                term: term.0.clone(),
                reason: format!("coordinate outside 0..{d}"),
            });
        }
    }
    let axis = axis_frequencies(bandwidth, basis);
    let count = group_cardinality(term.len(), bandwidth);
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; term.len()];
    for _ in 0..count {
        let mut k = vec![0i64; d];
        for (slot, &c) in term.0.iter().enumerate() {
            k[c] = axis[digits[slot]];
        }
        out.push(k);
        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < axis.len() {
                break;
            }
            *digit = 0;
        }
    }
    Ok(out)
}

/// Restricts `k` to the coordinates of `term`; fails unless `supp k = term`.
pub fn extension_index(term: &Term, k: &[i64]) -> Result<Vec<i64>> {
    let support: Vec<usize> = k
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(j, _)| j)
        .collect();
    if support != term.0 {
        return Err(Error::SupportMismatch { term: term.label() });
    }
    Ok(term.0.iter().map(|&c| k[c]).collect())
}

/// Inverse of [`extension_index`]: embeds `k_u` into `ℤ^d`.
pub fn embed_frequency(term: &Term, restricted: &[i64], d: usize) -> Result<Vec<i64>> {
    if restricted.len() != term.len() {
        return Err(Error::DimensionMismatch {
            expected: term.len(),
            got: restricted.len(),
        });
    }
    let mut k = vec![0i64; d];
    for (&c, &v) in term.0.iter().zip(restricted) {
        if c >= d {
            return Err(Error::DimensionMismatch { expected: d, got: c + 1 });
        }
        k[c] = v;
    }
    Ok(k)
}

/// Position of a frequency inside the flat coefficient layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrequencyAddress {
    /// Position of the owning term in the term set.
    pub term: usize,
    /// Odometer offset inside the group.
    pub offset: usize,
}

/// Disjoint union of full frequency cubes, one per term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedIndexSet {
    terms: TermSet,
    bandwidths: Vec<usize>,
    basis: Basis,
    offsets: Vec<usize>,
}

impl GroupedIndexSet {
    /// Per-term bandwidths, given in term order.
    pub fn new(terms: TermSet, bandwidths: Vec<usize>, basis: Basis) -> Result<Self> {
        if bandwidths.len() != terms.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                got: bandwidths.len(),
            });
        }
        for (t, &n) in terms.iter().zip(&bandwidths) {
            check_bandwidth(t, n, basis)?;
        }
        let mut offsets = Vec::with_capacity(terms.len() + 1);
        offsets.push(0);
        for (t, &n) in terms.iter().zip(&bandwidths) {
            let last = *offsets.last().unwrap();
            offsets.push(last + group_cardinality(t.len(), n));
        }
        Ok(GroupedIndexSet {
            terms,
            bandwidths,
            basis,
            offsets,
        })
    }

    /// Bandwidths given per order: `per_order[i]` applies to terms with `i + 1` elements.
    pub fn with_order_bandwidths(terms: TermSet, per_order: &[usize], basis: Basis) -> Result<Self> {
        if per_order.len() < terms.max_order() {
            return Err(Error::InvalidParameter(format!(
                "need {} per-order bandwidths, got {}",
                terms.max_order(),
                per_order.len()
            )));
        }
        let bandwidths = terms
            .iter()
            .map(|t| if t.is_empty() { 1 } else { per_order[t.len() - 1] })
            .collect();
        GroupedIndexSet::new(terms, bandwidths, basis)
    }

    pub fn terms(&self) -> &TermSet {
        &self.terms
    }

    pub fn dimension(&self) -> usize {
        self.terms.dimension()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn bandwidths(&self) -> &[usize] {
        &self.bandwidths
    }

    pub fn bandwidth(&self, term_index: usize) -> usize {
        self.bandwidths[term_index]
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn group_len(&self, term_index: usize) -> usize {
        self.offsets[term_index + 1] - self.offsets[term_index]
    }

    /// Flat range occupied by a group.
    pub fn group_range(&self, term_index: usize) -> std::ops::Range<usize> {
        self.offsets[term_index]..self.offsets[term_index + 1]
    }

    pub fn total_cardinality(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn address(&self, flat: usize) -> Option<FrequencyAddress> {
        if flat >= self.total_cardinality() {
            return None;
        }
        // offsets is nondecreasing; pick the last group starting at or before `flat`
        // that is nonempty.
        let term = self.offsets.partition_point(|&o| o <= flat) - 1;
        Some(FrequencyAddress {
            term,
            offset: flat - self.offsets[term],
        })
    }

    pub fn flat(&self, addr: FrequencyAddress) -> Option<usize> {
        if addr.term < self.num_terms() && addr.offset < self.group_len(addr.term) {
            Some(self.offsets[addr.term] + addr.offset)
        } else {
            None
        }
    }

    /// Restricted frequency `k_u` of a group entry.
    pub fn restricted_frequency(&self, addr: FrequencyAddress) -> Vec<i64> {
        let term = &self.terms.terms()[addr.term];
        let axis = axis_frequencies(self.bandwidths[addr.term], self.basis);
        let mut rest = addr.offset;
        (0..term.len())
            .map(|_| {
                let v = axis[rest % axis.len()];
                rest /= axis.len();
                v
            })
            .collect()
    }

    /// Full `d`-dimensional frequency at a flat position.
    pub fn frequency(&self, flat: usize) -> Option<Vec<i64>> {
        let addr = self.address(flat)?;
        let term = &self.terms.terms()[addr.term];
        embed_frequency(term, &self.restricted_frequency(addr), self.dimension()).ok()
    }

    /// Frequencies of one group in odometer order.
    pub fn enumerate_group(&self, term_index: usize) -> Vec<Vec<i64>> {
        enumerate_group(
            &self.terms.terms()[term_index],
            self.bandwidths[term_index],
            self.basis,
            self.dimension(),
        )
        .expect("validated at construction")
    }

    /// Every frequency of the set in flat order.
    pub fn enumerate(&self) -> Vec<Vec<i64>> {
        (0..self.num_terms())
            .flat_map(|t| self.enumerate_group(t))
            .collect()
    }

    /// Subset keeping only `keep`, with bandwidths chosen per order.
    pub fn restrict(&self, keep: &TermSet, per_order: &[usize]) -> Result<GroupedIndexSet> {
        GroupedIndexSet::with_order_bandwidths(keep.clone(), per_order, self.basis)
    }
}
