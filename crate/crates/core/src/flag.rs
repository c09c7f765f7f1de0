//! Permutations rooted at two points of type `12` or `21`, their products and
//! unlabeling, and exact verification of the sum-of-squares certificates for the
//! forcing sets.
//!
//! Roots are written in brackets: `[1]2[3]4` roots positions 1 and 3, and a
//! bracket may hold both roots when they are adjacent, as in `1[23]4`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::perm::{
    for_each_subset, pattern_counts, standardize, PermError, PermSet, Permutation, SymmetryOp,
};
use crate::perturbation::{inertia, Inertia, SymmetricForm};
use crate::rational::{binomial, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlagError {
    #[error("expected exactly two roots, found {0}")]
    BadRootCount(usize),
    #[error("roots induce {found}, not the declared type {declared}")]
    RootsInduceWrongType { declared: FlagType, found: FlagType },
    #[error("malformed rooted permutation `{0}`")]
    Malformed(String),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("flags of different types cannot be combined")]
    TypeMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("relation {0} fails")]
    RelationFails(String),
    #[error("unknown flag vector `{0}`")]
    UnknownVector(String),
}

/// One of the two order-2 root types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlagType {
    /// `12`
    Tau1,
    /// `21`
    Tau2,
}

impl FlagType {
    pub fn permutation(self) -> Permutation {
        match self {
            FlagType::Tau1 => Permutation::identity(2),
            FlagType::Tau2 => Permutation::new(vec![2, 1]).expect("valid"),
        }
    }

    pub fn other(self) -> Self {
        match self {
            FlagType::Tau1 => FlagType::Tau2,
            FlagType::Tau2 => FlagType::Tau1,
        }
    }

    fn of_values(first: u8, second: u8) -> Self {
        if first < second {
            FlagType::Tau1
        } else {
            FlagType::Tau2
        }
    }
}

impl fmt::Display for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagType::Tau1 => "12",
            FlagType::Tau2 => "21",
        })
    }
}

impl FromStr for FlagType {
    type Err = FlagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "12" | "tau1" => Ok(FlagType::Tau1),
            "21" | "tau2" => Ok(FlagType::Tau2),
            other => Err(FlagError::Malformed(other.into())),
        }
    }
}

/// A permutation with two distinguished positions `a < b` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootedPermutation {
    base: Permutation,
    roots: (u8, u8),
}

impl RootedPermutation {
    pub fn new(base: Permutation, a: usize, b: usize) -> Result<Self, FlagError> {
        if a == 0 || b == 0 || a == b || a.max(b) > base.order() {
            return Err(FlagError::BadRootCount(if a == b { 1 } else { 2 }));
        }
        let (a, b) = (a.min(b), a.max(b));
        Ok(Self {
            base,
            roots: (a as u8, b as u8),
        })
    }

    /// The type flag of order 2.
    pub fn unit(t: FlagType) -> Self {
        Self {
            base: t.permutation(),
            roots: (1, 2),
        }
    }

    /// Parses with an optional declared type.
    pub fn parse_typed(text: &str, declared: Option<FlagType>) -> Result<Self, FlagError> {
        let malformed = || FlagError::Malformed(text.into());
        let mut values = Vec::new();
        let mut roots = Vec::new();
        let mut inside = false;
        let mut group = 0;
        for ch in text.trim().chars() {
            match ch {
                '[' if !inside => {
                    inside = true;
                    group = 0;
                }
                ']' if inside => {
                    if group == 0 {
                        return Err(malformed());
                    }
                    inside = false;
                }
                d if d.is_ascii_digit() && d != '0' => {
                    if inside {
                        roots.push(values.len() + 1);
                        group += 1;
                    }
                    values.push(d as u8 - b'0');
                }
                ' ' => {}
                _ => return Err(malformed()),
            }
        }
        if inside || values.is_empty() {
            return Err(malformed());
        }
        if roots.len() != 2 {
            return Err(FlagError::BadRootCount(roots.len()));
        }
        let base = Permutation::new(values)?;
        let flag = Self::new(base, roots[0], roots[1])?;
        if let Some(t) = declared {
            if flag.flag_type() != t {
                return Err(FlagError::RootsInduceWrongType {
                    declared: t,
                    found: flag.flag_type(),
                });
            }
        }
        Ok(flag)
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn roots(&self) -> (usize, usize) {
        (self.roots.0 as usize, self.roots.1 as usize)
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn flag_type(&self) -> FlagType {
        FlagType::of_values(
            self.base.at(self.roots.0 as usize) as u8,
            self.base.at(self.roots.1 as usize) as u8,
        )
    }

    /// The flag induced on `positions` (0-based, increasing, containing both roots).
    fn restrict(&self, positions: &[usize]) -> Self {
        let values: Vec<u8> = positions.iter().map(|&p| self.base.image()[p]).collect();
        let a = positions
            .iter()
            .position(|&p| p + 1 == self.roots.0 as usize)
            .expect("root kept");
        let b = positions
            .iter()
            .position(|&p| p + 1 == self.roots.1 as usize)
            .expect("root kept");
        Self {
            base: Permutation::new(standardize(&values)).expect("standardized"),
            roots: (a as u8 + 1, b as u8 + 1),
        }
    }

    /// Image under a symmetry of the square, roots following their points.
    pub fn apply_symmetry(&self, op: SymmetryOp) -> Self {
        let k = self.order();
        let (a, b) = self.roots();
        let base = op.apply(&self.base);
        let ra = op.map_point(k, (a, self.base.at(a))).0;
        let rb = op.map_point(k, (b, self.base.at(b))).0;
        Self {
            base,
            roots: (ra.min(rb) as u8, ra.max(rb) as u8),
        }
    }

    /// The value complement with root positions kept, turning a `12`-flag into a
    /// `21`-flag and back.
    pub fn mirror(&self) -> Self {
        self.apply_symmetry(SymmetryOp::Complement)
    }

    /// Swaps the values of the two roots (another `12` ↔ `21` bijection).
    pub fn swap_root_values(&self) -> Self {
        let mut image = self.base.image().to_vec();
        image.swap(self.roots.0 as usize - 1, self.roots.1 as usize - 1);
        Self {
            base: Permutation::new(image).expect("swap keeps a bijection"),
            roots: self.roots,
        }
    }

    fn non_roots(&self) -> Vec<usize> {
        (0..self.order())
            .filter(|&p| p + 1 != self.roots.0 as usize && p + 1 != self.roots.1 as usize)
            .collect()
    }
}

impl fmt::Display for RootedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.order() > 9;
        for (i, v) in self.base.image().iter().enumerate() {
            if wide && i > 0 {
                f.write_str(",")?;
            }
            let p = i + 1;
            if p == self.roots.0 as usize || p == self.roots.1 as usize {
                write!(f, "[{v}]")?;
            } else {
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for RootedPermutation {
    type Err = FlagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_typed(s, None)
    }
}

/// All flags of a type and order, by base (lexicographic) and then root pair.
pub fn enumerate_flags(t: FlagType, k: usize) -> Vec<RootedPermutation> {
    let mut out = Vec::new();
    for base in Permutation::all(k) {
        for a in 1..=k {
            for b in a + 1..=k {
                if FlagType::of_values(base.at(a) as u8, base.at(b) as u8) == t {
                    out.push(RootedPermutation {
                        base: base.clone(),
                        roots: (a as u8, b as u8),
                    });
                }
            }
        }
    }
    out
}

/// A finite linear combination of flags of one type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagVector {
    flag_type: FlagType,
    terms: BTreeMap<RootedPermutation, Rational>,
}

impl FlagVector {
    pub fn zero(t: FlagType) -> Self {
        Self {
            flag_type: t,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(flag: RootedPermutation) -> Self {
        let mut v = Self::zero(flag.flag_type());
        v.terms.insert(flag, Rational::one());
        v
    }

    pub fn flag_type(&self) -> FlagType {
        self.flag_type
    }

    pub fn add_term(&mut self, flag: RootedPermutation, coef: Rational) -> Result<(), FlagError> {
        if flag.flag_type() != self.flag_type {
            return Err(FlagError::TypeMismatch);
        }
        self.accumulate(flag, coef);
        Ok(())
    }

    /// `Σ (plus_i − minus_i)`, all of type `t`.
    pub fn from_pairs(t: FlagType, pairs: &[(&str, &str)]) -> Result<Self, FlagError> {
        let mut v = Self::zero(t);
        for (plus, minus) in pairs {
            v.add_term(RootedPermutation::parse_typed(plus, Some(t))?, int(1))?;
            v.add_term(RootedPermutation::parse_typed(minus, Some(t))?, int(-1))?;
        }
        Ok(v)
    }

    pub fn get(&self, flag: &RootedPermutation) -> Option<&Rational> {
        self.terms.get(flag)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RootedPermutation, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common order of all terms, if there is one.
    pub fn order(&self) -> Option<usize> {
        let mut orders = self.terms.keys().map(RootedPermutation::order);
        let first = orders.next()?;
        orders.all(|o| o == first).then_some(first)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.flag_type);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FlagError> {
        if self.flag_type != other.flag_type {
            return Err(FlagError::TypeMismatch);
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FlagError> {
        self.add(&other.scale(&int(-1)))
    }

    /// Applies [`RootedPermutation::mirror`] to every term.
    pub fn mirror(&self) -> Self {
        self.map_flags(RootedPermutation::mirror)
    }

    pub fn apply_symmetry(&self, op: SymmetryOp) -> Self {
        self.map_flags(|f| f.apply_symmetry(op))
    }

    /// Applies a bijection of flags termwise.
    pub fn map_flags(&self, map: impl Fn(&RootedPermutation) -> RootedPermutation) -> Self {
        let mut out: Option<Self> = None;
        for (k, v) in &self.terms {
            let image = map(k);
            let o = out.get_or_insert_with(|| Self::zero(image.flag_type()));
            o.accumulate(image, v.clone());
        }
        out.unwrap_or_else(|| Self::zero(self.flag_type))
    }

    /// Adds `coef` times a flag that is not known to carry this vector's type.
    fn accumulate(&mut self, flag: RootedPermutation, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.get_mut(&flag) {
            Some(v) => {
                *v += coef;
                if v.is_zero() {
                    self.terms.remove(&flag);
                }
            }
            None => {
                self.terms.insert(flag, coef);
            }
        }
    }
}

impl fmt::Display for FlagVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            let sign = if v.is_negative() { "-" } else { "+" };
            if i > 0 || v.is_negative() {
                write!(f, "{}{}", if i > 0 { " " } else { "" }, sign)?;
                if i > 0 {
                    f.write_str(" ")?;
                }
            }
            let mag = v.abs();
            if mag.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "{mag}·{k}")?;
            }
        }
        Ok(())
    }
}

/// Calls `visit(F1, F2)` for each way of splitting the non-roots of `rho` into
/// `k1 - 2` points for the first factor and the rest for the second.
fn for_each_split(
    rho: &RootedPermutation,
    k1: usize,
    mut visit: impl FnMut(&RootedPermutation, &RootedPermutation),
) {
    let non_roots = rho.non_roots();
    let (a, b) = (rho.roots.0 as usize - 1, rho.roots.1 as usize - 1);
    let mut left = Vec::with_capacity(k1);
    let mut right = Vec::with_capacity(rho.order());
    for_each_subset(non_roots.len(), k1 - 2, |chosen| {
        left.clear();
        right.clear();
        left.extend([a, b]);
        right.extend([a, b]);
        let mut c = 0;
        for (i, &p) in non_roots.iter().enumerate() {
            if c < chosen.len() && chosen[c] == i {
                left.push(p);
                c += 1;
            } else {
                right.push(p);
            }
        }
        left.sort_unstable();
        right.sort_unstable();
        visit(&rho.restrict(&left), &rho.restrict(&right));
    });
}

/// `F1 · F2` expanded over flags of order `k1 + k2 - 2`: the coefficient of `ρ` is
/// the probability that a random split of its non-roots induces `F1` and `F2`.
pub fn flag_product(f1: &RootedPermutation, f2: &RootedPermutation) -> Result<FlagVector, FlagError> {
    let t = f1.flag_type();
    if f2.flag_type() != t {
        return Err(FlagError::TypeMismatch);
    }
    let (k1, k2) = (f1.order(), f2.order());
    let k = k1 + k2 - 2;
    let splits = int(binomial((k - 2) as u64, (k1 - 2) as u64) as i64);
    let mut out = FlagVector::zero(t);
    for rho in enumerate_flags(t, k) {
        let mut hits = 0i64;
        for_each_split(&rho, k1, |g1, g2| {
            if g1 == f1 && g2 == f2 {
                hits += 1;
            }
        });
        if hits > 0 {
            out.terms.insert(rho, int(hits) / &splits);
        }
    }
    Ok(out)
}

/// Bilinear extension of [`flag_product`].
pub fn product(v1: &FlagVector, v2: &FlagVector) -> Result<FlagVector, FlagError> {
    if v1.flag_type != v2.flag_type {
        return Err(FlagError::TypeMismatch);
    }
    let mut out = FlagVector::zero(v1.flag_type);
    for (f1, c1) in &v1.terms {
        for (f2, c2) in &v2.terms {
            for (rho, c) in flag_product(f1, f2)?.terms {
                out.accumulate(rho, c * c1 * c2);
            }
        }
    }
    Ok(out)
}

/// `Σ_{a,b} M_ab · w_a · w_b`.
pub fn quadratic_form(w: &[FlagVector], m: &SymmetricForm) -> Result<FlagVector, FlagError> {
    if w.len() != m.order() {
        return Err(FlagError::DimensionMismatch(alloc::format!(
            "{} vectors against a form of order {}",
            w.len(),
            m.order()
        )));
    }
    let Some(first) = w.first() else {
        return Err(FlagError::DimensionMismatch("no vectors".into()));
    };
    let t = first.flag_type;
    if w.iter().any(|v| v.flag_type != t) {
        return Err(FlagError::TypeMismatch);
    }
    let orders: Vec<usize> = w
        .iter()
        .filter(|v| !v.is_empty())
        .filter_map(FlagVector::order)
        .collect();
    let Some(&k1) = orders.first() else {
        return Ok(FlagVector::zero(t));
    };
    if orders.iter().any(|&o| o != k1) || w.iter().any(|v| !v.is_empty() && v.order().is_none()) {
        return Err(FlagError::DimensionMismatch("terms of different orders".into()));
    }
    let k = 2 * k1 - 2;
    let splits = int(binomial((k - 2) as u64, (k1 - 2) as u64) as i64);
    let r = w.len();
    let zero = Rational::zero();
    let mut out = FlagVector::zero(t);
    let mut u = vec![Rational::zero(); r];
    let mut v = vec![Rational::zero(); r];
    for rho in enumerate_flags(t, k) {
        let mut total = Rational::zero();
        for_each_split(&rho, k1, |g1, g2| {
            let mut any_u = false;
            let mut any_v = false;
            for a in 0..r {
                u[a] = w[a].get(g1).unwrap_or(&zero).clone();
                v[a] = w[a].get(g2).unwrap_or(&zero).clone();
                any_u |= !u[a].is_zero();
                any_v |= !v[a].is_zero();
            }
            if !(any_u && any_v) {
                return;
            }
            for a in 0..r {
                if u[a].is_zero() {
                    continue;
                }
                for b in 0..r {
                    if !v[b].is_zero() && !m.get(a, b).is_zero() {
                        total += m.get(a, b) * &u[a] * &v[b];
                    }
                }
            }
        });
        if !total.is_zero() {
            out.terms.insert(rho, total / &splits);
        }
    }
    Ok(out)
}

/// A linear combination of permutations (of any orders) plus a constant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PermCombination {
    pub constant: Rational,
    pub terms: BTreeMap<Permutation, Rational>,
}

impl PermCombination {
    pub fn constant(c: Rational) -> Self {
        Self {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    /// `Σ_{π∈S} π`.
    pub fn of_set(s: PermSet) -> Self {
        let mut out = Self::default();
        for p in s.members() {
            out.add(p, int(1));
        }
        out
    }

    pub fn add(&mut self, p: Permutation, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(p.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (p, c) in &other.terms {
            out.add(p.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::constant(&self.constant * c);
        for (p, v) in &self.terms {
            out.add(p.clone(), v * c);
        }
        out
    }
}

/// `⟦V⟧`: each flag of order `k` becomes its base with weight `1/C(k,2)`.
pub fn unlabel(v: &FlagVector) -> PermCombination {
    let mut out = PermCombination::default();
    for (flag, c) in &v.terms {
        let k = flag.order() as u64;
        out.add(flag.base.clone(), c / int(binomial(k, 2) as i64));
    }
    out
}

/// Order of the hosts used when comparing certificates.
pub const LIFT_ORDER: usize = 6;

/// `σ ↦ constant + Σ_π c_π · d(π, σ)` over all `σ` of order 6, in lexicographic order.
pub fn lift_to_order6(combo: &PermCombination) -> Vec<Rational> {
    lift(combo, LIFT_ORDER)
}

/// As [`lift_to_order6`] for hosts of any order `n ≥` every term's order.
pub fn lift(combo: &PermCombination, n: usize) -> Vec<Rational> {
    let mut by_order: BTreeMap<usize, Vec<(usize, &Rational)>> = BTreeMap::new();
    for (p, c) in &combo.terms {
        assert!(p.order() <= n, "term order exceeds host order");
        by_order.entry(p.order()).or_default().push((p.lex_rank(), c));
    }
    Permutation::all(n)
        .iter()
        .map(|sigma| {
            let mut acc = combo.constant.clone();
            for (&k, terms) in &by_order {
                let counts = pattern_counts(sigma, k);
                let total = int(binomial(n as u64, k as u64) as i64);
                for &(rank, c) in terms {
                    if counts[rank] > 0 {
                        acc += c * int(counts[rank] as i64) / &total;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Outcome of a definiteness query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Definiteness {
    /// All leading principal minors are positive.
    PositiveDefinite {
        minors: Vec<Rational>,
    },
    PositiveSemidefinite {
        inertia: Inertia,
    },
    /// Some eigenvalue is negative.
    Indefinite {
        inertia: Inertia,
    },
}

impl Definiteness {
    pub fn is_psd(&self) -> bool {
        !matches!(self, Definiteness::Indefinite { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Definiteness::PositiveDefinite { .. } => "PD",
            Definiteness::PositiveSemidefinite { .. } => "PSD",
            Definiteness::Indefinite { .. } => "Indefinite",
        }
    }
}

pub fn check_pd(m: &SymmetricForm) -> Definiteness {
    let minors = m.leading_principal_minors();
    if minors.iter().all(Signed::is_positive) {
        return Definiteness::PositiveDefinite { minors };
    }
    let inertia = inertia(m);
    if inertia.neg == 0 {
        Definiteness::PositiveSemidefinite { inertia }
    } else {
        Definiteness::Indefinite { inertia }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Σ_{π∈S} d(π, μ) ≥ constant`
    AtLeast,
    /// `Σ_{π∈S} d(π, μ) ≤ constant`
    AtMost,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::AtLeast => ">=",
            Direction::AtMost => "<=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s.trim() {
            ">=" | "≥" => Some(Direction::AtLeast),
            "<=" | "≤" => Some(Direction::AtMost),
            _ => None,
        }
    }
}

/// `⟦w₁ M w₁ᵀ⟧ + ⟦w₂ M w₂ᵀ⟧ = scale · ±(Σ_{π∈S} π − constant)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub name: String,
    pub set: PermSet,
    pub constant: Rational,
    pub direction: Direction,
    pub m: SymmetricForm,
    pub w1: Vec<FlagVector>,
    pub w2: Vec<FlagVector>,
    pub expected_scale: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateFailure {
    #[error("left and right sides differ in direction at {sigma}")]
    NotProportional { sigma: Permutation },
    #[error("scale {0} is not positive")]
    WrongSign(Rational),
    #[error("the matrix is not positive semidefinite")]
    NotPsd,
    #[error("computed scale {computed} differs from the expected {expected}")]
    ScaleMismatch { computed: Rational, expected: Rational },
    #[error(transparent)]
    Malformed(#[from] FlagError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub name: String,
    /// `L(σ) / R(σ)` when the two 720-vectors are proportional.
    pub scale: Option<Rational>,
    pub expected_scale: Rational,
    /// `L − expected_scale · R` at each `σ` where it is nonzero.
    pub residuals: Vec<(Permutation, Rational)>,
    pub definiteness: Definiteness,
    pub failure: Option<CertificateFailure>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Both sides of a certificate as exact vectors over the order-6 hosts.
pub fn certificate_sides(c: &Certificate) -> Result<(Vec<Rational>, Vec<Rational>), FlagError> {
    if c.w1.len() != c.w2.len() {
        return Err(FlagError::DimensionMismatch("w1 and w2 differ in length".into()));
    }
    if c.w1.iter().any(|v| v.flag_type != FlagType::Tau1)
        || c.w2.iter().any(|v| v.flag_type != FlagType::Tau2)
    {
        return Err(FlagError::TypeMismatch);
    }
    let left = unlabel(&quadratic_form(&c.w1, &c.m)?).plus(&unlabel(&quadratic_form(&c.w2, &c.m)?));
    let sign = match c.direction {
        Direction::AtLeast => int(1),
        Direction::AtMost => int(-1),
    };
    let right = PermCombination::of_set(c.set)
        .plus(&PermCombination::constant(-c.constant.clone()))
        .scaled(&sign);
    Ok((lift_to_order6(&left), lift_to_order6(&right)))
}

pub fn verify_certificate(c: &Certificate) -> CertificateReport {
    let definiteness = check_pd(&c.m);
    let mut report = CertificateReport {
        name: c.name.clone(),
        scale: None,
        expected_scale: c.expected_scale.clone(),
        residuals: Vec::new(),
        definiteness,
        failure: None,
    };
    let (left, right) = match certificate_sides(c) {
        Ok(sides) => sides,
        Err(e) => {
            report.failure = Some(e.into());
            return report;
        }
    };
    let hosts = Permutation::all(LIFT_ORDER);
    report.residuals = hosts
        .iter()
        .zip(left.iter().zip(&right))
        .filter_map(|(sigma, (l, r))| {
            let d = l - &c.expected_scale * r;
            (!d.is_zero()).then(|| (sigma.clone(), d))
        })
        .collect();
    let mut scale: Option<Rational> = None;
    let mut mismatch = None;
    for (i, (l, r)) in left.iter().zip(&right).enumerate() {
        if r.is_zero() {
            if !l.is_zero() {
                mismatch = Some(i);
                break;
            }
            continue;
        }
        let q = l / r;
        match &scale {
            None => scale = Some(q),
            Some(s) if *s != q => {
                mismatch = Some(i);
                break;
            }
            _ => {}
        }
    }
    if let Some(i) = mismatch {
        report.failure = Some(CertificateFailure::NotProportional {
            sigma: hosts[i].clone(),
        });
        return report;
    }
    let scale = scale.unwrap_or_else(Rational::zero);
    report.scale = Some(scale.clone());
    report.failure = if !scale.is_positive() {
        Some(CertificateFailure::WrongSign(scale))
    } else if !report.definiteness.is_psd() {
        Some(CertificateFailure::NotPsd)
    } else if scale != c.expected_scale {
        Some(CertificateFailure::ScaleMismatch {
            computed: scale,
            expected: c.expected_scale.clone(),
        })
    } else {
        None
    };
    report
}

type Pairs = &'static [(&'static str, &'static str)];

/// The named vectors of the certificates, each as printed pairs `(plus, minus)`.
const VECTORS: &[(&str, FlagType, Pairs)] = &[
    (
        "A1",
        FlagType::Tau1,
        &[
            ("[1]2[3]4", "[1]4[3]2"),
            ("1[2]3[4]", "3[2]1[4]"),
            ("[2]3[4]1", "[2]1[4]3"),
            ("4[1]2[3]", "2[1]4[3]"),
        ],
    ),
    (
        "A2",
        FlagType::Tau2,
        &[
            ("[3]2[1]4", "[3]4[1]2"),
            ("1[4]3[2]", "3[4]1[2]"),
            ("[4]3[2]1", "[4]1[2]3"),
            ("4[3]2[1]", "2[3]4[1]"),
        ],
    ),
    (
        "B1",
        FlagType::Tau1,
        &[
            ("1[2]3[4]", "3[2]1[4]"),
            ("1[23]4", "4[23]1"),
            ("1[24]3", "3[24]1"),
            ("1[2]4[3]", "4[2]1[3]"),
        ],
    ),
    (
        "B2",
        FlagType::Tau2,
        &[
            ("1[4]3[2]", "3[4]1[2]"),
            ("1[32]4", "4[32]1"),
            ("1[42]3", "3[42]1"),
            ("1[3]4[2]", "4[3]1[2]"),
        ],
    ),
    (
        "C1",
        FlagType::Tau1,
        &[
            ("[1]2[3]4", "[1]4[3]2"),
            ("1[23]4", "4[23]1"),
            ("[2]1[3]4", "[2]4[3]1"),
            ("2[13]4", "4[13]2"),
        ],
    ),
    (
        "D1",
        FlagType::Tau1,
        &[
            ("2[1]4[3]", "4[1]2[3]"),
            ("1[23]4", "4[23]1"),
            ("2[13]4", "4[13]2"),
            ("1[2]4[3]", "4[2]1[3]"),
        ],
    ),
    (
        "E1",
        FlagType::Tau1,
        &[
            ("[2]1[4]3", "[2]3[4]1"),
            ("1[23]4", "4[23]1"),
            ("[2]1[3]4", "[2]4[3]1"),
            ("1[24]3", "3[24]1"),
        ],
    ),
    (
        "F1",
        FlagType::Tau1,
        &[
            ("1[24]3", "3[24]1"),
            ("4[13]2", "2[13]4"),
            ("[1]24[3]", "[1]42[3]"),
            ("[2]31[4]", "[2]13[4]"),
            ("[13]24", "[13]42"),
            ("[24]31", "[24]13"),
            ("31[24]", "13[24]"),
            ("24[13]", "42[13]"),
        ],
    ),
    (
        "G1",
        FlagType::Tau1,
        &[
            ("[12]43", "[12]34"),
            ("[34]21", "[34]12"),
            ("[14]32", "[14]23"),
            ("[23]14", "[23]41"),
            ("43[12]", "34[12]"),
            ("21[34]", "12[34]"),
            ("32[14]", "23[14]"),
            ("14[23]", "41[23]"),
            ("[1]43[2]", "[1]34[2]"),
            ("[3]21[4]", "[3]12[4]"),
            ("[1]32[4]", "[1]23[4]"),
            ("[2]14[3]", "[2]41[3]"),
            ("3[12]4", "4[12]3"),
            ("1[34]2", "2[34]1"),
            ("2[14]3", "3[14]2"),
            ("4[23]1", "1[23]4"),
        ],
    ),
    (
        "H1",
        FlagType::Tau1,
        &[
            ("1[2]3[4]", "3[2]1[4]"),
            ("[2]3[4]1", "[2]1[4]3"),
            ("1[2]4[3]", "4[2]1[3]"),
            ("[2]4[3]1", "[2]1[3]4"),
        ],
    ),
    (
        "I1",
        FlagType::Tau1,
        &[
            ("2[1]4[3]", "4[1]2[3]"),
            ("[1]4[3]2", "[1]2[3]4"),
            ("1[2]4[3]", "4[2]1[3]"),
            ("[2]4[3]1", "[2]1[3]4"),
        ],
    ),
    (
        "J1",
        FlagType::Tau1,
        &[
            ("[2]13[4]", "[2]31[4]"),
            ("13[24]", "31[24]"),
            ("3[24]1", "1[24]3"),
            ("[24]13", "[24]31"),
            ("4[23]1", "1[23]4"),
            ("14[23]", "41[23]"),
            ("[23]14", "[23]41"),
            ("[2]14[3]", "[2]41[3]"),
        ],
    ),
    (
        "K1",
        FlagType::Tau1,
        &[
            ("24[13]", "42[13]"),
            ("4[13]2", "2[13]4"),
            ("[1]24[3]", "[1]42[3]"),
            ("[13]24", "[13]42"),
            ("4[23]1", "1[23]4"),
            ("14[23]", "41[23]"),
            ("[23]14", "[23]41"),
            ("[2]14[3]", "[2]41[3]"),
        ],
    ),
    (
        "L1",
        FlagType::Tau1,
        &[
            ("4[2]1[3]", "1[2]4[3]"),
            ("4[1]2[3]", "2[1]4[3]"),
            ("[2]3[4]1", "[2]1[4]3"),
            ("4[23]1", "1[23]4"),
            ("[1]2[3]4", "[1]4[3]2"),
            ("3[24]1", "1[24]3"),
        ],
    ),
    (
        "M1",
        FlagType::Tau1,
        &[
            ("[2]1[3]4", "[2]4[3]1"),
            ("1[23]4", "4[23]1"),
            ("[1]2[3]4", "[1]4[3]2"),
            ("1[24]3", "3[24]1"),
            ("2[13]4", "4[13]2"),
            ("3[24]1", "1[24]3"),
        ],
    ),
    (
        "N1",
        FlagType::Tau1,
        &[
            ("[12]43", "[12]34"),
            ("21[34]", "12[34]"),
            ("[1]32[4]", "[1]23[4]"),
            ("[2]14[3]", "[2]41[3]"),
            ("2[14]3", "3[14]2"),
            ("[23]14", "[23]41"),
            ("32[14]", "23[14]"),
            ("[1]43[2]", "[1]34[2]"),
            ("1[34]2", "2[34]1"),
            ("[3]21[4]", "[3]12[4]"),
            ("3[12]4", "4[12]3"),
            ("[34]21", "[34]12"),
            ("43[12]", "34[12]"),
            ("[14]32", "[14]23"),
            ("14[23]", "41[23]"),
            ("4[23]1", "1[23]4"),
        ],
    ),
    (
        "O1",
        FlagType::Tau1,
        &[
            ("[1]42[3]", "[1]24[3]"),
            ("[13]42", "[13]24"),
            ("13[24]", "31[24]"),
            ("[24]13", "[24]31"),
            ("42[13]", "24[13]"),
            ("[2]13[4]", "[2]31[4]"),
            ("2[13]4", "4[13]2"),
            ("3[24]1", "1[24]3"),
        ],
    ),
];

/// Names of the transcribed vectors.
pub fn vector_names() -> impl Iterator<Item = &'static str> {
    VECTORS.iter().map(|(n, _, _)| *n)
}

/// Number of printed `(plus, minus)` pairs of a named vector.
pub fn printed_pairs(name: &str) -> Option<usize> {
    VECTORS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, p)| p.len())
}

impl Certificate {
    /// The same identity for the symmetric image of the set; vectors whose type
    /// flips trade places between `w1` and `w2`.
    pub fn apply_symmetry(&self, op: SymmetryOp) -> Self {
        let mut w1: Vec<FlagVector> = self.w1.iter().map(|v| v.apply_symmetry(op)).collect();
        let mut w2: Vec<FlagVector> = self.w2.iter().map(|v| v.apply_symmetry(op)).collect();
        if w1.first().is_some_and(|v| v.flag_type == FlagType::Tau2) {
            core::mem::swap(&mut w1, &mut w2);
        }
        Self {
            name: self.name.clone(),
            set: self.set.apply_symmetry(op),
            w1,
            w2,
            ..self.clone()
        }
    }
}

/// A transcribed vector (`"A1"`, `"B2"`, ...); `X2` names that are not transcribed
/// are produced as mirrors of `X1`.
pub fn named_vector(name: &str) -> Result<FlagVector, FlagError> {
    if let Some((_, t, pairs)) = VECTORS.iter().find(|(n, _, _)| *n == name) {
        return FlagVector::from_pairs(*t, pairs);
    }
    if let Some(stem) = name.strip_suffix('2') {
        let first = alloc::format!("{stem}1");
        if VECTORS.iter().any(|(n, _, _)| *n == first) {
            return Ok(named_vector(&first)?.mirror());
        }
    }
    Err(FlagError::UnknownVector(name.into()))
}

fn form(rows: &[&[i64]]) -> SymmetricForm {
    SymmetricForm::from_integers(rows).expect("symmetric literal")
}

fn builtin(
    name: &str,
    set: &str,
    constant: Rational,
    direction: Direction,
    m: SymmetricForm,
    stems: &[&str],
    expected_scale: Rational,
) -> Certificate {
    let w1: Vec<FlagVector> = stems
        .iter()
        .map(|s| named_vector(&alloc::format!("{s}1")).expect("transcribed"))
        .collect();
    let w2 = w1.iter().map(FlagVector::mirror).collect();
    Certificate {
        name: name.into(),
        set: set.parse().expect("valid set literal"),
        constant,
        direction,
        m,
        w1,
        w2,
        expected_scale,
    }
}

/// The four certificates, in the order set8a, set8b, set8c, set12.
pub fn builtin_certificates() -> Vec<Certificate> {
    vec![
        builtin(
            "set8a",
            "1234,1243,2134,2143,3412,3421,4312,4321",
            ratio(1, 3),
            Direction::AtLeast,
            form(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 2, 0], &[0, 0, 0, 2]]),
            &["B", "C", "D", "E"],
            ratio(2, 3),
        ),
        builtin(
            "set8b",
            "1234,1432,2143,2341,3214,3412,4123,4321",
            ratio(1, 3),
            Direction::AtLeast,
            form(&[&[5, 0, 3], &[0, 9, 0], &[3, 0, 4]]),
            &["A", "F", "G"],
            int(2),
        ),
        // The transcribed H..K certify the inverse image of the stated set.
        builtin(
            "set8c",
            "1324,1423,2314,2413,3142,3241,4132,4231",
            ratio(1, 3),
            Direction::AtMost,
            form(&[
                &[35, 0, 12, 0],
                &[0, 35, 0, -12],
                &[12, 0, 37, 0],
                &[0, -12, 0, 37],
            ]),
            &["H", "I", "J", "K"],
            int(16),
        )
        .apply_symmetry(SymmetryOp::Inverse),
        builtin(
            "set12",
            "1234,1243,1432,2134,2143,2341,3214,3412,3421,4123,4312,4321",
            ratio(1, 2),
            Direction::AtLeast,
            form(&[
                &[1132, -652, -638, 197, 326],
                &[-652, 774, 516, -68, -326],
                &[-638, 516, 774, 68, -326],
                &[197, -68, 68, 172, 0],
                &[326, -326, -326, 0, 516],
            ]),
            &["A", "L", "M", "N", "O"],
            int(172),
        ),
    ]
}

pub fn builtin_certificate(name: &str) -> Option<Certificate> {
    builtin_certificates().into_iter().find(|c| c.name == name)
}

/// One checked identity between transcribed vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub holds: bool,
    /// Informational relations are reported but never fail the check.
    pub required: bool,
}

fn combine(parts: &[(i64, &str)]) -> Result<FlagVector, FlagError> {
    let mut acc: Option<FlagVector> = None;
    for (c, name) in parts {
        let v = named_vector(name)?.scale(&int(*c));
        acc = Some(match acc {
            None => v,
            Some(a) => a.add(&v)?,
        });
    }
    acc.ok_or_else(|| FlagError::DimensionMismatch("empty combination".into()))
}

/// `A₁ = B₁ + C₁ − D₁ − E₁`, `A₁ = H₁ − I₁`, `A₂` is the mirror of `A₁`, and the
/// mirror is an involution on every vector. The printed `B₂` is compared against both
/// the mirror and the root-value swap of `B₁` for information.
pub fn check_linear_relations() -> Result<Vec<Relation>, FlagError> {
    let mut out = Vec::new();
    let a1 = named_vector("A1")?;
    out.push(Relation {
        name: "A1 = B1 + C1 - D1 - E1".into(),
        holds: a1 == combine(&[(1, "B1"), (1, "C1"), (-1, "D1"), (-1, "E1")])?,
        required: true,
    });
    out.push(Relation {
        name: "A1 = H1 - I1".into(),
        holds: a1 == combine(&[(1, "H1"), (-1, "I1")])?,
        required: true,
    });
    let printed = |name: &str| -> Result<FlagVector, FlagError> {
        let (_, t, p) = VECTORS.iter().find(|(n, _, _)| *n == name).expect("printed");
        FlagVector::from_pairs(*t, p)
    };
    out.push(Relation {
        name: "A2 = mirror(A1)".into(),
        holds: printed("A2")? == named_vector("A1")?.mirror(),
        required: true,
    });
    // The printed B2 is the root-value swap of B1; the certificates need the mirror.
    let b1 = named_vector("B1")?;
    out.push(Relation {
        name: "B2 = mirror(B1)".into(),
        holds: printed("B2")? == b1.mirror(),
        required: false,
    });
    out.push(Relation {
        name: "B2 = swap_root_values(B1)".into(),
        holds: printed("B2")? == b1.map_flags(RootedPermutation::swap_root_values),
        required: false,
    });
    for name in vector_names() {
        let v = named_vector(name)?;
        out.push(Relation {
            name: alloc::format!("mirror(mirror({name})) = {name}"),
            holds: v.mirror().mirror() == v,
            required: true,
        });
    }
    if let Some(bad) = out.iter().find(|r| r.required && !r.holds) {
        return Err(FlagError::RelationFails(bad.name.clone()));
    }
    Ok(out)
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: Σ_{{π∈S}} d(π,μ) {} {} for S = {{{}}}",
            self.name,
            self.direction.symbol(),
            self.constant,
            self.set
        )
    }
}

/// Renders a flag in the bracket notation.
pub fn render_flag(flag: &RootedPermutation) -> String {
    flag.to_string()
}
