//! Permutations in one-line notation, induced patterns, pattern densities,
//! the eight symmetries of a permutation matrix, and sets of 4-permutations.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::rational::{binomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("empty permutation")]
    Empty,
    #[error("not a bijection of [1..{order}]: {detail}")]
    NotABijection { order: usize, detail: String },
    #[error("position {position} out of range for a permutation of order {order}")]
    IndexOutOfRange { position: usize, order: usize },
    #[error("positions must be nonempty and strictly increasing")]
    BadPositions,
}

/// A bijection of `[k]` stored in one-line notation with 1-based values.
///
/// Order zero is allowed as the neutral element of direct sums; the parser never
/// produces it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    image: Vec<u8>,
}

impl Permutation {
    pub fn new(image: Vec<u8>) -> Result<Self, PermError> {
        let k = image.len();
        if k > u8::MAX as usize {
            return Err(PermError::NotABijection {
                order: k,
                detail: "order exceeds 255".into(),
            });
        }
        let mut seen = vec![false; k + 1];
        for &v in &image {
            let v = v as usize;
            if v == 0 || v > k {
                return Err(PermError::NotABijection {
                    order: k,
                    detail: alloc::format!("value {v} out of range"),
                });
            }
            if seen[v] {
                return Err(PermError::NotABijection {
                    order: k,
                    detail: alloc::format!("value {v} repeated"),
                });
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub(crate) fn from_image_unchecked(image: Vec<u8>) -> Self {
        debug_assert!(Self::new(image.clone()).is_ok());
        Self { image }
    }

    pub fn identity(k: usize) -> Self {
        Self::from_image_unchecked((1..=k as u8).collect())
    }

    pub fn empty() -> Self {
        Self { image: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// One-line notation, `image()[i - 1] == π(i)`.
    pub fn image(&self) -> &[u8] {
        &self.image
    }

    /// `π(position)` for a 1-based position.
    pub fn at(&self, position: usize) -> usize {
        self.image[position - 1] as usize
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.order()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize - 1] = (i + 1) as u8;
        }
        Self { image: inv }
    }

    pub fn reverse(&self) -> Self {
        Self {
            image: self.image.iter().rev().copied().collect(),
        }
    }

    pub fn complement(&self) -> Self {
        let k = self.order() as u8;
        Self {
            image: self.image.iter().map(|&v| k + 1 - v).collect(),
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.image.windows(2).all(|w| w[0] < w[1])
    }

    /// All permutations of order `k` in lexicographic order of one-line notation.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::with_capacity(crate::rational::factorial(k as u64) as usize);
        let mut current: Vec<u8> = (1..=k as u8).collect();
        loop {
            out.push(Self {
                image: current.clone(),
            });
            if !next_permutation(&mut current) {
                break;
            }
        }
        out
    }

    /// Position of this permutation in `Permutation::all(k)`.
    pub fn lex_rank(&self) -> usize {
        let k = self.order();
        let mut rank = 0usize;
        for i in 0..k {
            let smaller = self.image[i + 1..].iter().filter(|&&v| v < self.image[i]).count();
            rank = rank * (k - i) + smaller;
        }
        rank
    }

    pub fn from_lex_rank(k: usize, mut rank: usize) -> Self {
        let mut digits = vec![0usize; k];
        for i in (0..k).rev() {
            let base = k - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<u8> = (1..=k as u8).collect();
        let image = digits.into_iter().map(|d| pool.remove(d)).collect();
        Self { image }
    }

    /// The pattern induced by a strictly increasing list of 1-based positions.
    pub fn induced(&self, positions: &[usize]) -> Result<Permutation, PermError> {
        if positions.is_empty() || positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PermError::BadPositions);
        }
        if let Some(&p) = positions.iter().find(|&&p| p == 0 || p > self.order()) {
            return Err(PermError::IndexOutOfRange {
                position: p,
                order: self.order(),
            });
        }
        let values: Vec<u8> = positions.iter().map(|&p| self.image[p - 1]).collect();
        Ok(Self {
            image: standardize(&values),
        })
    }

    /// Direct sum: `self` below-left of `other`.
    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let shift = self.order() as u8;
        let mut image = self.image.clone();
        image.extend(other.image.iter().map(|&v| v + shift));
        Self { image }
    }
}

/// Relative order of distinct values, as 1-based ranks.
pub(crate) fn standardize(values: &[u8]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| 1 + values.iter().filter(|&&w| w < v).count() as u8)
        .collect()
}

fn next_permutation(a: &mut [u8]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Calls `visit` with every strictly increasing `k`-subset of `0..n` (0-based).
pub(crate) fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() <= 9 {
            for v in &self.image {
                write!(f, "{v}")?;
            }
        } else {
            for (i, v) in self.image.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    /// Digits (`"2143"`) or comma-separated values (`"10,1,2,...`").
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        if text.is_empty() {
            return Err(PermError::Empty);
        }
        let bad = |detail: &str| PermError::NotABijection {
            order: 0,
            detail: detail.into(),
        };
        let values: Vec<u8> = if text.contains(',') {
            text.split(',')
                .map(|t| t.trim().parse::<u8>().map_err(|_| bad(t)))
                .collect::<Result<_, _>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| bad("non-digit character"))
                })
                .collect::<Result<_, _>>()?
        };
        Permutation::new(values)
    }
}

/// Number of `k`-subsets of positions of `host` inducing each pattern of order `k`,
/// indexed by lexicographic rank.
pub fn pattern_counts(host: &Permutation, k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; crate::rational::factorial(k as u64) as usize];
    let mut values = vec![0u8; k];
    for_each_subset(host.order(), k, |subset| {
        for (slot, &p) in values.iter_mut().zip(subset) {
            *slot = host.image[p];
        }
        let pattern = Permutation {
            image: standardize(&values),
        };
        counts[pattern.lex_rank()] += 1;
    });
    counts
}

/// `d(pattern, host)`: the fraction of `|pattern|`-subsets of positions inducing it.
pub fn pattern_density(pattern: &Permutation, host: &Permutation) -> Rational {
    let k = pattern.order();
    let n = host.order();
    if n < k {
        return Rational::from_integer(BigInt::from(0));
    }
    let mut hits = 0u64;
    let mut values = vec![0u8; k];
    for_each_subset(n, k, |subset| {
        for (slot, &p) in values.iter_mut().zip(subset) {
            *slot = host.image[p];
        }
        if standardize(&values) == pattern.image {
            hits += 1;
        }
    });
    Rational::new(BigInt::from(hits), BigInt::from(binomial(n as u64, k as u64)))
}

/// One of the eight symmetries of the square acting on permutation matrices.
///
/// Each op is "optionally invert, then optionally reverse positions, then
/// optionally complement values".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymmetryOp {
    Identity,
    Reverse,
    Complement,
    ReverseComplement,
    Inverse,
    InverseReverse,
    InverseComplement,
    InverseReverseComplement,
}

impl SymmetryOp {
    pub const ALL: [SymmetryOp; 8] = [
        SymmetryOp::Identity,
        SymmetryOp::Reverse,
        SymmetryOp::Complement,
        SymmetryOp::ReverseComplement,
        SymmetryOp::Inverse,
        SymmetryOp::InverseReverse,
        SymmetryOp::InverseComplement,
        SymmetryOp::InverseReverseComplement,
    ];

    fn flags(self) -> (bool, bool, bool) {
        use SymmetryOp::*;
        match self {
            Identity => (false, false, false),
            Reverse => (false, true, false),
            Complement => (false, false, true),
            ReverseComplement => (false, true, true),
            Inverse => (true, false, false),
            InverseReverse => (true, true, false),
            InverseComplement => (true, false, true),
            InverseReverseComplement => (true, true, true),
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&op| op == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        use SymmetryOp::*;
        match self {
            Identity => "id",
            Reverse => "reverse",
            Complement => "complement",
            ReverseComplement => "rev-complement",
            Inverse => "inverse",
            InverseReverse => "inv-reverse",
            InverseComplement => "inv-complement",
            InverseReverseComplement => "inv-rev-complement",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|op| op.name() == name)
    }

    pub fn apply(self, p: &Permutation) -> Permutation {
        let (inv, rev, comp) = self.flags();
        let mut q = if inv { p.inverse() } else { p.clone() };
        if rev {
            q = q.reverse();
        }
        if comp {
            q = q.complement();
        }
        q
    }

    /// Image of the point `(position, value)` of a permutation of order `k`.
    pub fn map_point(self, k: usize, point: (usize, usize)) -> (usize, usize) {
        let (inv, rev, comp) = self.flags();
        let (mut x, mut y) = point;
        if inv {
            core::mem::swap(&mut x, &mut y);
        }
        if rev {
            x = k + 1 - x;
        }
        if comp {
            y = k + 1 - y;
        }
        (x, y)
    }

    /// The op `c` with `c.apply(p) == self.apply(&other.apply(p))`.
    pub fn then_after(self, other: SymmetryOp) -> SymmetryOp {
        // 12534 has trivial stabilizer, so its image determines the op.
        let probe = Permutation::from_image_unchecked(vec![1, 2, 5, 3, 4]);
        let target = self.apply(&other.apply(&probe));
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.apply(&probe) == target)
            .expect("the eight symmetries are closed under composition")
    }

    pub fn group_inverse(self) -> SymmetryOp {
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.then_after(self) == SymmetryOp::Identity)
            .expect("every symmetry has an inverse")
    }
}

impl fmt::Display for SymmetryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn apply_symmetry(op: SymmetryOp, p: &Permutation) -> Permutation {
    op.apply(p)
}

/// Distinct images of `p` under the eight symmetries, sorted.
pub fn orbit(p: &Permutation) -> Vec<Permutation> {
    let mut out: Vec<Permutation> = SymmetryOp::ALL.iter().map(|op| op.apply(p)).collect();
    out.sort();
    out.dedup();
    out
}

/// The 24 permutations of order 4 in lexicographic order; bit `i` of a
/// [`PermSet`] mask stands for `S4[i]`.
pub fn s4() -> Vec<Permutation> {
    Permutation::all(4)
}

pub const FULL_MASK: u32 = (1 << 24) - 1;

/// A subset of the 24 permutations of order 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PermSet(u32);

impl PermSet {
    pub fn from_mask(mask: u32) -> Self {
        Self(mask & FULL_MASK)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn empty() -> Self {
        Self(0)
    }

    pub fn full() -> Self {
        Self(FULL_MASK)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, p: &Permutation) -> bool {
        p.order() == 4 && self.0 & (1 << p.lex_rank()) != 0
    }

    pub fn insert(&mut self, p: &Permutation) -> Result<(), PermError> {
        if p.order() != 4 {
            return Err(PermError::NotABijection {
                order: p.order(),
                detail: "set members must have order 4".into(),
            });
        }
        self.0 |= 1 << p.lex_rank();
        Ok(())
    }

    pub fn from_perms<'a, I: IntoIterator<Item = &'a Permutation>>(perms: I) -> Result<Self, PermError> {
        let mut s = Self::empty();
        for p in perms {
            s.insert(p)?;
        }
        Ok(s)
    }

    pub fn complement(self) -> Self {
        Self(!self.0 & FULL_MASK)
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Members in lexicographic order.
    pub fn members(self) -> Vec<Permutation> {
        (0..24)
            .filter(|i| self.0 & (1 << i) != 0)
            .map(|i| Permutation::from_lex_rank(4, i))
            .collect()
    }

    /// Lexicographic ranks of the members.
    pub fn ranks(self) -> impl Iterator<Item = usize> {
        (0..24usize).filter(move |i| self.0 & (1 << i) != 0)
    }

    pub fn apply_symmetry(self, op: SymmetryOp) -> Self {
        let mut out = 0u32;
        for p in self.members() {
            out |= 1 << op.apply(&p).lex_rank();
        }
        Self(out)
    }
}

impl fmt::Display for PermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.members().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for PermSet {
    type Err = PermError;

    /// Comma-separated 4-permutations, e.g. `"1234,2143,3412,4321"`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut s = PermSet::empty();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            s.insert(&token.parse()?)?;
        }
        Ok(s)
    }
}

/// Lexicographically least image in the orbit of `s`, comparing masks as integers
/// (bit `i` = `S4[i]`), over the 8 symmetries and optionally their complements.
pub fn canonical_form(s: PermSet, include_complement: bool) -> PermSet {
    canonical_with_op(s, include_complement).0
}

/// Canonical form together with an op and complement flag mapping `s` onto it.
pub fn canonical_with_op(s: PermSet, include_complement: bool) -> (PermSet, SymmetryOp, bool) {
    let mut best = (PermSet(u32::MAX), SymmetryOp::Identity, false);
    for op in SymmetryOp::ALL {
        let image = s.apply_symmetry(op);
        if image.0 < best.0 .0 {
            best = (image, op, false);
        }
        if include_complement && image.complement().0 < best.0 .0 {
            best = (image.complement(), op, true);
        }
    }
    best
}

/// Byte lookup tables for applying symmetries to masks in bulk.
#[derive(Debug, Clone)]
pub struct SymmetryTables {
    tables: [[[u32; 256]; 3]; 8],
}

impl SymmetryTables {
    pub fn new() -> Self {
        let perms = s4();
        let mut bit_images = [[0usize; 24]; 8];
        for (o, op) in SymmetryOp::ALL.iter().enumerate() {
            for (i, p) in perms.iter().enumerate() {
                bit_images[o][i] = op.apply(p).lex_rank();
            }
        }
        let mut tables = [[[0u32; 256]; 3]; 8];
        for o in 0..8 {
            for byte in 0..3 {
                for value in 0..256usize {
                    let mut out = 0u32;
                    for bit in 0..8 {
                        if value & (1 << bit) != 0 {
                            out |= 1 << bit_images[o][byte * 8 + bit];
                        }
                    }
                    tables[o][byte][value] = out;
                }
            }
        }
        Self { tables }
    }

    #[inline]
    pub fn apply(&self, op_index: usize, mask: u32) -> u32 {
        let t = &self.tables[op_index];
        t[0][(mask & 0xff) as usize]
            | t[1][((mask >> 8) & 0xff) as usize]
            | t[2][((mask >> 16) & 0xff) as usize]
    }

    /// Canonical mask and the number of distinct images in the orbit.
    #[inline]
    pub fn canonical(&self, mask: u32, include_complement: bool) -> (u32, usize) {
        let mut images = [0u32; 16];
        let mut count = 0;
        for o in 0..8 {
            let img = self.apply(o, mask);
            images[count] = img;
            count += 1;
            if include_complement {
                images[count] = !img & FULL_MASK;
                count += 1;
            }
        }
        let images = &mut images[..count];
        images.sort_unstable();
        let mut distinct = 1;
        for w in images.windows(2) {
            if w[0] != w[1] {
                distinct += 1;
            }
        }
        (images[0], distinct)
    }

    /// True when `mask` is the least element of its orbit.
    #[inline]
    pub fn is_canonical(&self, mask: u32, include_complement: bool) -> bool {
        for o in 1..8 {
            if self.apply(o, mask) < mask {
                return false;
            }
        }
        if include_complement {
            for o in 0..8 {
                if !self.apply(o, mask) & FULL_MASK < mask {
                    return false;
                }
            }
        }
        true
    }
}

impl Default for SymmetryTables {
    fn default() -> Self {
        Self::new()
    }
}
