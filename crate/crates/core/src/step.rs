//! Step permutons `μ[A]` given by doubly stochastic rational matrices, their exact
//! pattern densities, and diagonal blends of two step permutons.
//!
//! Entry `A[i][j]` is the mass of the cell `[(i-1)/n, i/n) × [(j-1)/n, j/n)`; the
//! row index runs along the first (horizontal) coordinate.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::perm::{PermSet, Permutation, SymmetryOp};
use crate::rational::{binomial, common_denominator, factorial, ratio, Rational};

/// Largest pattern order accepted by the density routines.
pub const MAX_PATTERN_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix must have order at least 1")]
    EmptyMatrix,
    #[error("negative entry at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize },
    #[error("row {0} does not sum to 1")]
    RowSumNotOne(usize),
    #[error("column {0} does not sum to 1")]
    ColSumNotOne(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("pattern order {0} exceeds the supported maximum of 6")]
    OrderTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlendError {
    #[error("f(1) and f(2) do not strictly straddle the target")]
    NoStraddle,
    #[error("tolerance must be positive")]
    BadTolerance,
}

/// A validated doubly stochastic matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    /// Validates a candidate matrix given as rows.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::EmptyMatrix);
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::NotSquare);
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(MatrixError::NegativeEntry {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        let one = Rational::one();
        for j in 0..n {
            if rows.iter().fold(Rational::zero(), |a, r| a + &r[j]) != one {
                return Err(MatrixError::ColSumNotOne(j + 1));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().fold(Rational::zero(), |a, v| a + v) != one {
                return Err(MatrixError::RowSumNotOne(i + 1));
            }
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "uniform matrix needs n >= 1");
        Self {
            n,
            entries: vec![ratio(1, n as i64); n * n],
        }
    }

    /// The 0/1 matrix with a one at `(j, σ(j))`, so that `μ[P_σ]` refines to `σ`.
    pub fn permutation_matrix(sigma: &Permutation) -> Self {
        let n = sigma.order();
        assert!(n >= 1, "permutation matrix needs order >= 1");
        let mut entries = vec![Rational::zero(); n * n];
        for j in 1..=n {
            entries[(j - 1) * n + sigma.at(j) - 1] = Rational::one();
        }
        Self { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// 1-based entry access.
    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[(row - 1) * self.n + col - 1]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    fn map_positions(&self, f: impl Fn(usize, usize) -> (usize, usize)) -> Self {
        let n = self.n;
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = f(i, j);
                entries[a * n + b] = self.entries[i * n + j].clone();
            }
        }
        Self { n, entries }
    }

    pub fn transpose(&self) -> Self {
        self.map_positions(|i, j| (j, i))
    }

    /// Mirrors the horizontal coordinate.
    pub fn reverse_rows(&self) -> Self {
        let n = self.n;
        self.map_positions(|i, j| (n - 1 - i, j))
    }

    /// Mirrors the vertical coordinate.
    pub fn reverse_cols(&self) -> Self {
        let n = self.n;
        self.map_positions(|i, j| (i, n - 1 - j))
    }

    /// The step matrix of the image permuton: `d(op(π), μ[op(A)]) = d(π, μ[A])`.
    pub fn apply_symmetry(&self, op: SymmetryOp) -> Self {
        let n = self.n;
        self.map_positions(|i, j| {
            let (a, b) = op.map_point(n, (i + 1, j + 1));
            (a - 1, b - 1)
        })
    }

    /// The `m`-fold refinement: every entry becomes an `m × m` block of `a/m`.
    pub fn blowup(&self, m: usize) -> Self {
        let n = self.n;
        let big = n * m;
        let scale = ratio(1, m as i64);
        let mut entries = vec![Rational::zero(); big * big];
        for i in 0..big {
            for j in 0..big {
                entries[i * big + j] = &self.entries[(i / m) * n + j / m] * &scale;
            }
        }
        Self { n: big, entries }
    }

    /// Block-diagonal matrix `diag(A1, A2)`, the step permuton of the blend with equal
    /// weights when the two inputs share an order.
    pub fn block_diagonal(a: &RationalMatrix, b: &RationalMatrix) -> Self {
        let n = a.n + b.n;
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..a.n {
            for j in 0..a.n {
                entries[i * n + j] = a.entries[i * a.n + j].clone();
            }
        }
        for i in 0..b.n {
            for j in 0..b.n {
                entries[(a.n + i) * n + a.n + j] = b.entries[i * b.n + j].clone();
            }
        }
        Self { n, entries }
    }

    pub fn is_permutation_matrix(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero() || v.is_one())
    }
}

/// Integer numerators over a common denominator, the form the density sum runs on.
struct ScaledMatrix<T> {
    n: usize,
    numerators: Vec<T>,
    nonzero_cols: Vec<Vec<usize>>,
    denominator: BigInt,
}

fn scaled<T: From<u64> + Clone>(a: &RationalMatrix, convert: impl Fn(&BigInt) -> T) -> ScaledMatrix<T> {
    let n = a.n;
    let denominator = common_denominator(a.entries.iter());
    let numerators: Vec<T> = a
        .entries
        .iter()
        .map(|v| convert(&(v.numer() * (&denominator / v.denom()))))
        .collect();
    let nonzero_cols = (0..n)
        .map(|i| (0..n).filter(|&j| !a.entries[i * n + j].is_zero()).collect())
        .collect();
    ScaledMatrix {
        n,
        numerators,
        nonzero_cols,
        denominator,
    }
}

/// Sum over monotone row/column assignments of `w_f · w_g · ∏ numerators`, where
/// `w_f = k!/∏|f⁻¹(i)|!` is the multinomial weight of the row assignment.
fn weighted_sum<T>(m: &ScaledMatrix<T>, pi: &Permutation) -> T
where
    T: Clone + From<u64> + core::ops::Add<Output = T> + core::ops::Mul<Output = T>,
{
    let k = pi.order();
    let mut state = Dfs {
        m,
        pi: pi.image(),
        k,
        rows: vec![0; k],
        cols: vec![0; k],
        fact: (0..=k as u64).map(factorial).collect(),
        total: T::from(0),
    };
    state.descend(0, T::from(1));
    state.total
}

struct Dfs<'a, T> {
    m: &'a ScaledMatrix<T>,
    pi: &'a [u8],
    k: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    fact: Vec<u64>,
    total: T,
}

impl<T> Dfs<'_, T>
where
    T: Clone + From<u64> + core::ops::Add<Output = T> + core::ops::Mul<Output = T>,
{
    fn descend(&mut self, pos: usize, product: T) {
        if pos == self.k {
            let weight = self.multinomial(&self.rows) * self.column_multinomial();
            let total = core::mem::replace(&mut self.total, T::from(0));
            self.total = total + product * T::from(weight);
            return;
        }
        let row_start = if pos == 0 { 0 } else { self.rows[pos - 1] };
        let value = self.pi[pos];
        // Columns must be non-decreasing in value order among placed points.
        let mut lo = 0usize;
        let mut hi = self.m.n - 1;
        for q in 0..pos {
            let c = self.cols[q];
            if self.pi[q] < value {
                lo = lo.max(c);
            } else {
                hi = hi.min(c);
            }
        }
        if lo > hi {
            return;
        }
        for row in row_start..self.m.n {
            self.rows[pos] = row;
            for ci in 0..self.m.nonzero_cols[row].len() {
                let col = self.m.nonzero_cols[row][ci];
                if col < lo || col > hi {
                    continue;
                }
                self.cols[pos] = col;
                let entry = self.m.numerators[row * self.m.n + col].clone();
                self.descend(pos + 1, product.clone() * entry);
            }
        }
    }

    fn multinomial(&self, assignment: &[usize]) -> u64 {
        let mut denom = 1u64;
        let mut run = 1usize;
        for i in 1..=assignment.len() {
            if i < assignment.len() && assignment[i] == assignment[i - 1] {
                run += 1;
            } else {
                denom *= self.fact[run];
                run = 1;
            }
        }
        self.fact[self.k] / denom
    }

    fn column_multinomial(&self) -> u64 {
        let mut sorted = self.cols.clone();
        sorted.sort_unstable();
        self.multinomial(&sorted)
    }
}

fn fits_u128(m: &RationalMatrix, k: usize) -> Option<ScaledMatrix<u128>> {
    let s = scaled(m, |v| v.to_u128().unwrap_or(u128::MAX));
    let max_bits = s
        .numerators
        .iter()
        .map(|&v| 128 - v.leading_zeros())
        .max()
        .unwrap_or(0) as u64;
    let n = m.n as u64;
    let pairs = binomial(n + k as u64 - 1, k as u64).max(1);
    let weight_bits = 2 * (64 - factorial(k as u64).leading_zeros() as u64);
    let bound = max_bits * k as u64 + weight_bits + 2 * (64 - pairs.leading_zeros() as u64);
    (bound < 127).then_some(s)
}

fn finish(sum: BigUint, k: usize, n: usize, denominator: &BigInt) -> Rational {
    let denom =
        BigInt::from(factorial(k as u64)) * BigInt::from(n as u64).pow(k as u32) * denominator.pow(k as u32);
    Rational::new(BigInt::from(sum), denom)
}

/// `d(π, μ[A])` via the monotone double sum over row and column assignments.
pub fn step_density(a: &RationalMatrix, pi: &Permutation) -> Result<Rational, StepError> {
    let k = pi.order();
    if k > MAX_PATTERN_ORDER {
        return Err(StepError::OrderTooLarge(k));
    }
    if k == 0 {
        return Ok(Rational::one());
    }
    if let Some(s) = fits_u128(a, k) {
        let sum = weighted_sum(&s, pi);
        return Ok(finish(BigUint::from(sum), k, a.n, &s.denominator));
    }
    let s = scaled(a, |v| v.to_biguint().expect("entries are nonnegative"));
    let sum = weighted_sum(&s, pi);
    Ok(finish(sum, k, a.n, &s.denominator))
}

/// Densities of every pattern of order `k`, indexed by lexicographic rank.
pub fn step_densities(a: &RationalMatrix, k: usize) -> Result<Vec<Rational>, StepError> {
    if k > MAX_PATTERN_ORDER {
        return Err(StepError::OrderTooLarge(k));
    }
    let perms = Permutation::all(k);
    if k == 0 {
        return Ok(vec![Rational::one()]);
    }
    if let Some(s) = fits_u128(a, k) {
        return Ok(perms
            .iter()
            .map(|p| finish(BigUint::from(weighted_sum(&s, p)), k, a.n, &s.denominator))
            .collect());
    }
    let s = scaled(a, |v| v.to_biguint().expect("entries are nonnegative"));
    Ok(perms
        .iter()
        .map(|p| finish(weighted_sum(&s, p), k, a.n, &s.denominator))
        .collect())
}

/// `Σ_{π ∈ S} d(π, μ[A])`.
pub fn set_density_sum(a: &RationalMatrix, s: PermSet) -> Rational {
    s.members()
        .iter()
        .map(|p| step_density(a, p).expect("order 4 is supported"))
        .fold(Rational::zero(), |acc, v| acc + v)
}

/// All ways to write `π = α ⊕ β`, including the two trivial splits.
pub fn direct_sum_decompositions(pi: &Permutation) -> Vec<(Permutation, Permutation)> {
    let k = pi.order();
    let mut out = Vec::new();
    for split in 0..=k {
        // A prefix of positions maps onto a prefix of values iff its max equals its length.
        let prefix_max = pi.image()[..split].iter().copied().max().unwrap_or(0) as usize;
        if prefix_max == split {
            let alpha = Permutation::from_image_unchecked(pi.image()[..split].to_vec());
            let beta = Permutation::from_image_unchecked(
                pi.image()[split..].iter().map(|&v| v - split as u8).collect(),
            );
            out.push((alpha, beta));
        }
    }
    out
}

/// `f(λ) = Σ_i c_i λ^i` on `[1, 2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlendPolynomial {
    pub coefficients: [Rational; 5],
}

impl BlendPolynomial {
    pub fn eval(&self, lambda: &Rational) -> Rational {
        self.coefficients
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * lambda + c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| !c.is_zero())
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[Rational], e: usize) -> Vec<Rational> {
    (0..e).fold(vec![Rational::one()], |acc, _| poly_mul(&acc, base))
}

/// Density sum of `S` in the diagonal blend of `μ[A1]` (weight `2-λ`, lower-left
/// block) and `μ[A2]` (weight `λ-1`, upper-right block), as a polynomial in `λ`.
pub fn blend_polynomial(s: PermSet, a1: &RationalMatrix, a2: &RationalMatrix) -> BlendPolynomial {
    let low = [ratio(2, 1), ratio(-1, 1)];
    let high = [ratio(-1, 1), ratio(1, 1)];
    let dens1: Vec<Vec<Rational>> = (0..=4).map(|k| step_densities(a1, k).unwrap()).collect();
    let dens2: Vec<Vec<Rational>> = (0..=4).map(|k| step_densities(a2, k).unwrap()).collect();
    let mut coefficients: [Rational; 5] = Default::default();
    for pi in s.members() {
        for (alpha, beta) in direct_sum_decompositions(&pi) {
            let j = alpha.order();
            let weight = Rational::from_integer(BigInt::from(binomial(4, j as u64)))
                * &dens1[j][alpha.lex_rank()]
                * &dens2[4 - j][beta.lex_rank()];
            if weight.is_zero() {
                continue;
            }
            let term = poly_mul(&poly_pow(&low, j), &poly_pow(&high, 4 - j));
            for (c, t) in coefficients.iter_mut().zip(term) {
                *c += t * &weight;
            }
        }
    }
    BlendPolynomial { coefficients }
}

/// A bisection bracket `[lo, hi] ⊆ [1, 2]` whose endpoint values lie on opposite
/// sides of the target (or an exact root when `lo == hi`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlendInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub f_lo: Rational,
    pub f_hi: Rational,
}

impl BlendInterval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_exact_root(&self) -> bool {
        self.lo == self.hi
    }

    /// Re-checks the bracket against the polynomial from scratch.
    pub fn certifies(&self, poly: &BlendPolynomial, target: &Rational) -> bool {
        let f_lo = poly.eval(&self.lo);
        let f_hi = poly.eval(&self.hi);
        if f_lo != self.f_lo || f_hi != self.f_hi {
            return false;
        }
        if self.is_exact_root() {
            return &f_lo == target;
        }
        (&f_lo < target && target < &f_hi) || (&f_hi < target && target < &f_lo)
    }
}

/// Bisects `f(λ) = target` on `[1, 2]` with exact sign evaluations.
pub fn blend_witness(
    poly: &BlendPolynomial,
    target: &Rational,
    tol: &Rational,
) -> Result<BlendInterval, BlendError> {
    if !tol.is_positive() {
        return Err(BlendError::BadTolerance);
    }
    let mut lo = ratio(1, 1);
    let mut hi = ratio(2, 1);
    let mut f_lo = poly.eval(&lo);
    let mut f_hi = poly.eval(&hi);
    let lo_below = &f_lo < target;
    let straddles = (lo_below && &f_hi > target) || (&f_lo > target && &f_hi < target);
    if !straddles {
        return Err(BlendError::NoStraddle);
    }
    let half = ratio(1, 2);
    while &(&hi - &lo) > tol {
        let mid = (&lo + &hi) * &half;
        let f_mid = poly.eval(&mid);
        if &f_mid == target {
            return Ok(BlendInterval {
                lo: mid.clone(),
                hi: mid,
                f_lo: f_mid.clone(),
                f_hi: f_mid,
            });
        }
        if (&f_mid < target) == lo_below {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(BlendInterval { lo, hi, f_lo, f_hi })
}

/// Blend polynomial and bracket in one call.
pub fn blend_witness_for(
    s: PermSet,
    a1: &RationalMatrix,
    a2: &RationalMatrix,
    target: &Rational,
    tol: &Rational,
) -> Result<(BlendPolynomial, BlendInterval), BlendError> {
    let poly = blend_polynomial(s, a1, a2);
    let interval = blend_witness(&poly, target, tol)?;
    Ok((poly, interval))
}

/// The 6×6 permutation matrix whose step permuton has density sum 25/72 for the
/// set {1342,1423,2314,2431,3124,3241,4132,4213}.
pub fn six_by_six_example() -> RationalMatrix {
    let ones = [4usize, 5, 1, 3, 6, 2];
    let rows = ones
        .iter()
        .map(|&c| {
            (1..=6)
                .map(|j| if j == c { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    RationalMatrix::new(rows).expect("permutation matrix is doubly stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn m(rows: &[&[(i64, i64)]]) -> Result<RationalMatrix, MatrixError> {
        RationalMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect())
                .collect(),
        )
    }

    #[test]
    fn matrix_symmetries_carry_densities() {
        let a = six_by_six_example();
        let pi: Permutation = "1342".parse().unwrap();
        for op in SymmetryOp::ALL {
            assert_eq!(
                step_density(&a.apply_symmetry(op), &op.apply(&pi)).unwrap(),
                step_density(&a, &pi).unwrap(),
                "{}",
                op.name()
            );
        }
    }

    #[test]
    fn validate_examples() {
        assert!(m(&[&[(1, 1)]]).is_ok());
        assert!(RationalMatrix::new(RationalMatrix::permutation_matrix(&p("1234")).rows()).is_ok());
        assert_eq!(
            m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 4)]]),
            Err(MatrixError::ColSumNotOne(2))
        );
        assert_eq!(
            m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)], &[(0, 1), (0, 1)]]),
            Err(MatrixError::NotSquare)
        );
        assert_eq!(
            m(&[&[(3, 2), (-1, 2)], &[(-1, 2), (3, 2)]]),
            Err(MatrixError::NegativeEntry { row: 1, col: 2 })
        );
        // Columns fine, rows off.
        assert_eq!(
            m(&[&[(1, 1), (1, 1)], &[(0, 1), (0, 1)]]),
            Err(MatrixError::RowSumNotOne(1))
        );
    }

    #[test]
    fn constructors() {
        assert_eq!(RationalMatrix::uniform(1).rows(), vec![vec![ratio(1, 1)]]);
        let id = RationalMatrix::permutation_matrix(&p("12"));
        assert_eq!(
            id.rows(),
            vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]]
        );
        assert!(RationalMatrix::new(RationalMatrix::uniform(5).rows()).is_ok());
    }

    #[test]
    fn uniform_densities_are_one_over_factorial() {
        for n in 1..=4 {
            let u = RationalMatrix::uniform(n);
            for k in 1..=4 {
                for pi in Permutation::all(k) {
                    assert_eq!(
                        step_density(&u, &pi).unwrap(),
                        ratio(1, factorial(k as u64) as i64)
                    );
                }
            }
        }
    }

    #[test]
    fn order_guard() {
        assert_eq!(
            step_density(&RationalMatrix::uniform(2), &Permutation::identity(7)),
            Err(StepError::OrderTooLarge(7))
        );
    }

    #[test]
    fn twenty_five_seventy_seconds() {
        let s: PermSet = "1342,1423,2314,2431,3124,3241,4132,4213".parse().unwrap();
        assert_eq!(set_density_sum(&six_by_six_example(), s), ratio(25, 72));
    }

    #[test]
    fn decompositions() {
        assert_eq!(direct_sum_decompositions(&p("1234")).len(), 5);
        let d: Vec<(usize, usize)> = direct_sum_decompositions(&p("2143"))
            .iter()
            .map(|(a, b)| (a.order(), b.order()))
            .collect();
        assert_eq!(d, vec![(0, 4), (2, 2), (4, 0)]);
        assert_eq!(direct_sum_decompositions(&p("2143"))[1], (p("21"), p("21")));
        assert_eq!(direct_sum_decompositions(&p("3142")).len(), 2);
    }

    #[test]
    fn blend_of_two_uniform_blocks() {
        let s: PermSet = "1234,2413,3142".parse().unwrap();
        let u = RationalMatrix::uniform(1);
        let poly = blend_polynomial(s, &u, &u);
        assert_eq!(poly.eval(&ratio(1, 1)), ratio(1, 8));
        assert_eq!(poly.eval(&ratio(2, 1)), ratio(1, 8));
        // Half/half direct sum: 1234 gets Σ C(4,j)²/(16·24), the other two 2/(16·24).
        assert_eq!(poly.eval(&ratio(3, 2)), ratio(37, 192));
        let block = RationalMatrix::block_diagonal(&u, &u);
        assert_eq!(set_density_sum(&block, s), ratio(37, 192));
    }

    #[test]
    fn bisection_on_linear_function() {
        let poly = BlendPolynomial {
            coefficients: [ratio(-1, 1), ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)],
        };
        let tol = ratio(1, 1 << 20);
        let iv = blend_witness(&poly, &ratio(1, 2), &tol).unwrap();
        assert!(iv.lo <= ratio(3, 2) && ratio(3, 2) <= iv.hi);
        assert!(iv.certifies(&poly, &ratio(1, 2)));
        assert_eq!(
            blend_witness(&poly, &ratio(3, 1), &tol),
            Err(BlendError::NoStraddle)
        );
        assert_eq!(
            blend_witness(&poly, &ratio(1, 2), &ratio(0, 1)),
            Err(BlendError::BadTolerance)
        );
    }
}
