//! Perturbations `U + Σ x_ij B^{ij}` of the uniform matrix, the density-sum function
//! `h_{S,n}` on the cube `‖x‖∞ ≤ 1/(4n)`, its exact gradient and Hessian at the
//! origin, the cover matrix of a set, and exact inertia of symmetric forms.
//!
//! Coordinates `x_ij`, `i, j ∈ [n-1]`, are ordered row-major (`i` outer).

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::perm::{PermSet, Permutation};
use crate::rational::{factorial, int, ratio, round_to_denominator, Rational};
use crate::step::{set_density_sum, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerturbationError {
    #[error("basis index ({i}, {j}) out of range for order {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("perturbation leaves the cube ‖x‖∞ ≤ 1/(4n)")]
    OutsideCube,
    #[error("expected {expected} coordinates, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("block order must be at least 2")]
    OrderTooSmall,
    #[error("kernel of the cover-to-gradient map has dimension {0}, expected 1")]
    KernelTooLarge(usize),
    #[error("kernel check is defined for n in {{4, 5}}")]
    UnsupportedOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("form is not square")]
    NotSquare,
    #[error("form is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
}

/// `B^{ij}` of order `n` (1-based `i, j`): `+1` at `(i,j)`, `(i+1,j+1)`, `-1` at
/// `(i,j+1)`, `(i+1,j)`.
pub fn basis_matrix(i: usize, j: usize, n: usize) -> Result<Vec<Vec<i64>>, PerturbationError> {
    if n < 2 || i == 0 || j == 0 || i >= n || j >= n {
        return Err(PerturbationError::IndexOutOfRange { i, j, n });
    }
    let mut b = vec![vec![0i64; n]; n];
    b[i - 1][j - 1] = 1;
    b[i][j] = 1;
    b[i - 1][j] = -1;
    b[i][j - 1] = -1;
    Ok(b)
}

/// Row-major index of the coordinate `x_ij` (1-based `i, j`).
pub fn coordinate_index(i: usize, j: usize, n: usize) -> usize {
    (i - 1) * (n - 1) + (j - 1)
}

/// Signed coordinates contributing to cell `(r, c)` (0-based) of the perturbed matrix.
fn cell_terms(r: usize, c: usize, n: usize) -> ([(usize, i64); 4], usize) {
    let m = n - 1;
    let mut out = [(0usize, 0i64); 4];
    let mut len = 0;
    let mut push = |v: usize, s: i64| {
        out[len] = (v, s);
        len += 1;
    };
    if r < m && c < m {
        push(r * m + c, 1);
    }
    if r >= 1 && c >= 1 {
        push((r - 1) * m + c - 1, 1);
    }
    if r < m && c >= 1 {
        push(r * m + c - 1, -1);
    }
    if r >= 1 && c < m {
        push((r - 1) * m + c, -1);
    }
    (out, len)
}

/// A point of the cube `U_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationVector {
    n: usize,
    x: Vec<Rational>,
}

impl PerturbationVector {
    pub fn new(n: usize, x: Vec<Rational>) -> Result<Self, PerturbationError> {
        if n < 2 {
            return Err(PerturbationError::OrderTooSmall);
        }
        let expected = (n - 1) * (n - 1);
        if x.len() != expected {
            return Err(PerturbationError::WrongLength {
                expected,
                got: x.len(),
            });
        }
        let bound = ratio(1, 4 * n as i64);
        if x.iter().any(|v| v.abs() > bound) {
            return Err(PerturbationError::OutsideCube);
        }
        Ok(Self { n, x })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            x: vec![Rational::zero(); (n - 1) * (n - 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coordinates(&self) -> &[Rational] {
        &self.x
    }

    /// `t · self`, if the result stays in the cube.
    pub fn scaled(&self, t: &Rational) -> Result<Self, PerturbationError> {
        Self::new(self.n, self.x.iter().map(|v| v * t).collect())
    }
}

/// `U + Σ x_ij B^{ij}`, doubly stochastic for every `x` in the cube.
pub fn perturbed_matrix(x: &PerturbationVector) -> RationalMatrix {
    let n = x.n;
    let base = ratio(1, n as i64);
    let rows =
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let (terms, len) = cell_terms(r, c, n);
                        terms[..len].iter().fold(base.clone(), |acc, &(v, s)| {
                            if s > 0 {
                                acc + &x.x[v]
                            } else {
                                acc - &x.x[v]
                            }
                        })
                    })
                    .collect()
            })
            .collect();
    RationalMatrix::new(rows).expect("cube points give doubly stochastic matrices")
}

/// `h_{S,n}(x)`: the density sum of `S` in the perturbed step permuton.
pub fn h_eval(s: PermSet, x: &PerturbationVector) -> Rational {
    set_density_sum(&perturbed_matrix(x), s)
}

/// `C[i][j]` = number of members with `π(j) = i` (stored 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoverMatrix(pub [[u32; 4]; 4]);

impl CoverMatrix {
    pub fn is_constant(&self) -> bool {
        let first = self.0[0][0];
        self.0.iter().flatten().all(|&c| c == first)
    }

    pub fn get(&self, value: usize, position: usize) -> u32 {
        self.0[value - 1][position - 1]
    }

    pub fn as_rationals(&self) -> [[Rational; 4]; 4] {
        core::array::from_fn(|i| core::array::from_fn(|j| int(self.0[i][j] as i64)))
    }
}

pub fn cover_matrix(s: PermSet) -> CoverMatrix {
    let mut c = [[0u32; 4]; 4];
    for p in s.members() {
        for j in 1..=4 {
            c[p.at(j) - 1][j - 1] += 1;
        }
    }
    CoverMatrix(c)
}

/// Cover matrices of the single permutations, for fast cover computations on masks.
pub fn cover_contributions() -> [[u8; 4]; 24] {
    let mut out = [[0u8; 4]; 24];
    for (i, p) in Permutation::all(4).iter().enumerate() {
        for j in 0..4 {
            out[i][j] = p.image()[j] - 1;
        }
    }
    out
}

/// All non-decreasing maps `[k] → [n]` (0-based values) with their multinomial
/// weights `k!/∏|f⁻¹(i)|!`.
pub fn monotone_maps(k: usize, n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut current = vec![0usize; k];
    fn rec(pos: usize, start: usize, n: usize, current: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if pos == current.len() {
            let k = current.len();
            let mut denom = 1u64;
            let mut run = 1u64;
            for i in 1..=k {
                if i < k && current[i] == current[i - 1] {
                    run += 1;
                } else {
                    denom *= factorial(run);
                    run = 1;
                }
            }
            out.push((current.clone(), (factorial(k as u64) / denom) as i64));
            return;
        }
        for v in start..n {
            current[pos] = v;
            rec(pos + 1, v, n, current, out);
        }
    }
    rec(0, 0, n, &mut current, &mut out);
    out
}

/// Exact first and second partials of `h_{π,n}` at the origin for every 4-permutation.
///
/// Values are kept as integers over the common denominators `k!·n^{2k-1}` (gradient)
/// and `k!·n^{2k-2}` (Hessian), `k = 4`.
#[derive(Debug, Clone)]
pub struct TaylorTable {
    n: usize,
    gradients: Vec<Vec<i64>>,
    hessians: Option<Vec<Vec<i64>>>,
}

impl TaylorTable {
    /// Expands the product of affine entries for every monotone row/column pair.
    pub fn new(n: usize, with_hessian: bool) -> Self {
        assert!(n >= 2, "block order must be at least 2");
        let k = 4;
        let vars = (n - 1) * (n - 1);
        let maps = monotone_maps(k, n);
        let perms = Permutation::all(k);
        let mut gradients = vec![vec![0i64; vars]; perms.len()];
        let mut hessians = with_hessian.then(|| vec![vec![0i64; vars * vars]; perms.len()]);
        for (pi_idx, pi) in perms.iter().enumerate() {
            let grad = &mut gradients[pi_idx];
            for (f, wf) in &maps {
                for (g, wg) in &maps {
                    let w = wf * wg;
                    let cells: Vec<([(usize, i64); 4], usize)> =
                        (0..k).map(|m| cell_terms(f[m], g[pi.at(m + 1) - 1], n)).collect();
                    for (terms, len) in &cells {
                        for &(v, s) in &terms[..*len] {
                            grad[v] += w * s;
                        }
                    }
                    if let Some(h) = hessians.as_mut() {
                        let h = &mut h[pi_idx];
                        for a in 0..k {
                            for b in 0..k {
                                if a == b {
                                    continue;
                                }
                                let (ta, la) = &cells[a];
                                let (tb, lb) = &cells[b];
                                for &(va, sa) in &ta[..*la] {
                                    for &(vb, sb) in &tb[..*lb] {
                                        h[va * vars + vb] += w * sa * sb;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self {
            n,
            gradients,
            hessians,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    fn gradient_denominator(&self) -> BigInt {
        BigInt::from(24) * BigInt::from(self.n as u64).pow(7)
    }

    fn hessian_denominator(&self) -> BigInt {
        BigInt::from(24) * BigInt::from(self.n as u64).pow(6)
    }

    /// Integer gradient numerators of `S`.
    pub fn gradient_numerators(&self, s: PermSet) -> Vec<i64> {
        let mut out = vec![0i64; self.variables()];
        for r in s.ranks() {
            for (o, g) in out.iter_mut().zip(&self.gradients[r]) {
                *o += g;
            }
        }
        out
    }

    pub fn gradient(&self, s: PermSet) -> Vec<Rational> {
        let den = self.gradient_denominator();
        self.gradient_numerators(s)
            .into_iter()
            .map(|v| Rational::new(BigInt::from(v), den.clone()))
            .collect()
    }

    pub fn hessian_numerators(&self, s: PermSet) -> Vec<i64> {
        let h = self.hessians.as_ref().expect("table built without Hessians");
        let vars = self.variables();
        let mut out = vec![0i64; vars * vars];
        for r in s.ranks() {
            for (o, v) in out.iter_mut().zip(&h[r]) {
                *o += v;
            }
        }
        out
    }

    pub fn hessian(&self, s: PermSet) -> SymmetricForm {
        let vars = self.variables();
        let den = self.hessian_denominator();
        let entries = self
            .hessian_numerators(s)
            .into_iter()
            .map(|v| Rational::new(BigInt::from(v), den.clone()))
            .collect();
        SymmetricForm { m: vars, entries }
    }
}

/// Gradient of `h_{S,n}` at the origin from the polynomial expansion.
pub fn gradient_symbolic(s: PermSet, n: usize) -> Vec<Rational> {
    TaylorTable::new(n, false).gradient(s)
}

/// Hessian of `h_{S,n}` at the origin from the polynomial expansion.
pub fn hessian(s: PermSet, n: usize) -> SymmetricForm {
    TaylorTable::new(n, true).hessian(s)
}

/// One gradient entry from the cover-matrix formula.
///
/// `cover[v][p]` counts members sending position `p` to value `v` (0-based); positions
/// are spread over rows by `f` and values over columns by `g`.
fn cover_formula_entry(
    cover: &[[Rational; 4]; 4],
    maps: &[(Vec<usize>, i64)],
    i: usize,
    j: usize,
    n: usize,
) -> Rational {
    let block = |f: &[usize], g: &[usize], row: usize, col: usize| -> Rational {
        let mut acc = Rational::zero();
        for p in (0..4).filter(|&p| f[p] == row) {
            for v in (0..4).filter(|&v| g[v] == col) {
                acc += &cover[v][p];
            }
        }
        acc
    };
    let mut total = Rational::zero();
    for (f, wf) in maps {
        for (g, wg) in maps {
            let inner =
                block(f, g, i, j) - block(f, g, i + 1, j) - block(f, g, i, j + 1) + block(f, g, i + 1, j + 1);
            if !inner.is_zero() {
                total += inner * int(wf * wg);
            }
        }
    }
    // 4!/n^7 · 1/∏|f⁻¹|!|g⁻¹|!  =  w_f·w_g / (4!·n^7)
    total / Rational::from_integer(BigInt::from(24) * BigInt::from(n as u64).pow(7))
}

/// The gradient as a linear function of an arbitrary 4×4 "cover" matrix.
pub fn gradient_from_cover(cover: &[[Rational; 4]; 4], n: usize) -> Vec<Rational> {
    let maps = monotone_maps(4, n);
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            out.push(cover_formula_entry(cover, &maps, i, j, n));
        }
    }
    out
}

/// Gradient of `h_{S,n}` at the origin from the cover-matrix formula.
pub fn gradient_formula(s: PermSet, n: usize) -> Vec<Rational> {
    gradient_from_cover(&cover_matrix(s).as_rationals(), n)
}

/// Integer matrix of the linear map cover → gradient numerators (over `4!·n^7`).
#[derive(Debug, Clone)]
pub struct CoverGradientMap {
    n: usize,
    /// `coefficients[v][cell]`, cell = 4·value + position (0-based).
    coefficients: Vec<[i64; 16]>,
}

impl CoverGradientMap {
    pub fn new(n: usize) -> Self {
        let scale = Rational::from_integer(BigInt::from(24) * BigInt::from(n as u64).pow(7));
        let vars = (n - 1) * (n - 1);
        let mut coefficients = vec![[0i64; 16]; vars];
        for cell in 0..16 {
            let mut unit: [[Rational; 4]; 4] = Default::default();
            unit[cell / 4][cell % 4] = Rational::one();
            for (v, g) in gradient_from_cover(&unit, n).into_iter().enumerate() {
                let scaled = g * &scale;
                debug_assert!(scaled.is_integer());
                coefficients[v][cell] = scaled.to_integer().to_i64().expect("small");
            }
        }
        Self { n, coefficients }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn apply(&self, cover: &[[u32; 4]; 4]) -> Vec<i64> {
        self.coefficients
            .iter()
            .map(|row| {
                (0..16)
                    .map(|cell| row[cell] * cover[cell / 4][cell % 4] as i64)
                    .sum()
            })
            .collect()
    }
}

/// Rank certificate for the cover → gradient map on balanced cover matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    pub n: usize,
    pub subspace_dim: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub constant_maps_to_zero: bool,
}

/// Rank of a list of rational vectors by exact elimination.
pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut rows: Vec<Vec<Rational>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let factor = &rows[r][c] / &pivot;
                for cc in c..cols {
                    let delta = &factor * &rows[rank][cc];
                    rows[r][cc] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Checks that on 4×4 matrices with equal row and column sums the gradient vanishes
/// exactly on the constant matrices.
pub fn gradient_kernel_check(n: usize) -> Result<KernelReport, PerturbationError> {
    if n != 4 && n != 5 {
        return Err(PerturbationError::UnsupportedOrder);
    }
    let mut basis: Vec<[[Rational; 4]; 4]> = Vec::new();
    basis.push(core::array::from_fn(|_| {
        core::array::from_fn(|_| Rational::one())
    }));
    for k in 1..=3 {
        for l in 1..=3 {
            let b = basis_matrix(k, l, 4).expect("in range");
            basis.push(core::array::from_fn(|i| core::array::from_fn(|j| int(b[i][j]))));
        }
    }
    let images: Vec<Vec<Rational>> = basis.iter().map(|c| gradient_from_cover(c, n)).collect();
    let constant_maps_to_zero = images[0].iter().all(Zero::is_zero);
    let r = rank(&images);
    let report = KernelReport {
        n,
        subspace_dim: basis.len(),
        rank: r,
        kernel_dim: basis.len() - r,
        constant_maps_to_zero,
    };
    if report.kernel_dim != 1 || !constant_maps_to_zero {
        return Err(PerturbationError::KernelTooLarge(report.kernel_dim));
    }
    Ok(report)
}

/// Coefficients `c[i][j]` of `u^i v^j` of `h_{S,n}` restricted to the plane spanned by
/// coordinates `a` (variable `u`) and `b` (variable `v`); when `a == b` only `c[i][0]`
/// is populated.
pub fn plane_polynomial(s: PermSet, n: usize, a: usize, b: usize) -> [[Rational; 5]; 5] {
    let k = 4;
    let maps = monotone_maps(k, n);
    let mut acc = [[0i128; 5]; 5];
    for pi in s.members() {
        for (f, wf) in &maps {
            for (g, wg) in &maps {
                // Each entry is (1 + n·(su·u + sv·v))/n; collect the integer product.
                let mut poly = [[0i128; 5]; 5];
                poly[0][0] = 1;
                for m in 0..k {
                    let (terms, len) = cell_terms(f[m], g[pi.at(m + 1) - 1], n);
                    let mut su = 0i128;
                    let mut sv = 0i128;
                    for &(var, sign) in &terms[..len] {
                        if var == a {
                            su += sign as i128;
                        } else if var == b {
                            sv += sign as i128;
                        }
                    }
                    let nn = n as i128;
                    let mut next = [[0i128; 5]; 5];
                    for i in 0..5 {
                        for j in 0..5 {
                            let c = poly[i][j];
                            if c == 0 {
                                continue;
                            }
                            next[i][j] += c;
                            if i < 4 {
                                next[i + 1][j] += c * nn * su;
                            }
                            if j < 4 {
                                next[i][j + 1] += c * nn * sv;
                            }
                        }
                    }
                    poly = next;
                }
                let w = (wf * wg) as i128;
                for i in 0..5 {
                    for j in 0..5 {
                        acc[i][j] += w * poly[i][j];
                    }
                }
            }
        }
    }
    // d = Σ w_f w_g ∏A / (4!·n^4) and ∏A = poly / n^4.
    let den = BigInt::from(24) * BigInt::from(n as u64).pow(8);
    core::array::from_fn(|i| core::array::from_fn(|j| Rational::new(BigInt::from(acc[i][j]), den.clone())))
}

/// Sign counts `(n₊, n₋, n₀)` of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn is_indefinite(&self) -> bool {
        self.pos > 0 && self.neg > 0
    }
}

/// A symmetric matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricForm {
    m: usize,
    entries: Vec<Rational>,
}

impl SymmetricForm {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, FormError> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(FormError::NotSquare);
        }
        for a in 0..m {
            for b in a + 1..m {
                if rows[a][b] != rows[b][a] {
                    return Err(FormError::NotSymmetric(a, b));
                }
            }
        }
        Ok(Self {
            m,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self, FormError> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let m = values.len();
        let mut entries = vec![Rational::zero(); m * m];
        for (i, v) in values.iter().enumerate() {
            entries[i * m + i] = v.clone();
        }
        Self { m, entries }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, b: usize) -> &Rational {
        &self.entries[a * self.m + b]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.m.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn neg(&self) -> Self {
        Self {
            m: self.m,
            entries: self.entries.iter().map(|v| -v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        Self {
            m: self.m,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `Pᵀ F P` for a square `P` given as rows.
    pub fn congruence(&self, p: &[Vec<Rational>]) -> Self {
        let m = self.m;
        let mut fp = vec![Rational::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = Rational::zero();
                for k in 0..m {
                    acc += self.get(i, k) * &p[k][j];
                }
                fp[i * m + j] = acc;
            }
        }
        let mut out = vec![Rational::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = Rational::zero();
                for k in 0..m {
                    acc += &p[k][i] * &fp[k * m + j];
                }
                out[i * m + j] = acc;
            }
        }
        Self { m, entries: out }
    }

    /// `vᵀ F v`.
    pub fn quadratic_value(&self, v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for a in 0..self.m {
            if v[a].is_zero() {
                continue;
            }
            for b in 0..self.m {
                acc += self.get(a, b) * &v[a] * &v[b];
            }
        }
        acc
    }

    /// Determinants of the leading principal submatrices.
    pub fn leading_principal_minors(&self) -> Vec<Rational> {
        (1..=self.m).map(|k| self.leading_determinant(k)).collect()
    }

    fn leading_determinant(&self, k: usize) -> Rational {
        let mut a: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut det = Rational::one();
        for c in 0..k {
            let Some(p) = (c..k).find(|&r| !a[r][c].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            let pivot = a[c][c].clone();
            det *= &pivot;
            for r in c + 1..k {
                if a[r][c].is_zero() {
                    continue;
                }
                let factor = &a[r][c] / &pivot;
                for cc in c..k {
                    let delta = &factor * &a[c][cc];
                    a[r][cc] -= delta;
                }
            }
        }
        det
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows()
            .iter()
            .map(|r| r.iter().map(crate::rational::approx).collect())
            .collect()
    }
}

/// Exact inertia by symmetric elimination (congruences only), using a 2×2 pivot when
/// the remaining diagonal vanishes.
pub fn inertia(form: &SymmetricForm) -> Inertia {
    let mut a: Vec<Vec<Rational>> = form.rows();
    let mut active: Vec<usize> = (0..form.m).collect();
    let mut pos = 0;
    let mut neg = 0;
    while !active.is_empty() {
        if let Some(pi) = active.iter().position(|&i| !a[i][i].is_zero()) {
            let p = active.remove(pi);
            let d = a[p][p].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            let col: Vec<Rational> = active.iter().map(|&i| a[i][p].clone()).collect();
            for (x, &i) in active.iter().enumerate() {
                if col[x].is_zero() {
                    continue;
                }
                let factor = &col[x] / &d;
                for (y, &j) in active.iter().enumerate() {
                    if !col[y].is_zero() {
                        let delta = &factor * &col[y];
                        a[i][j] -= delta;
                    }
                }
            }
            continue;
        }
        let pair = active.iter().enumerate().find_map(|(x, &i)| {
            active[x + 1..]
                .iter()
                .find(|&&j| !a[i][j].is_zero())
                .map(|&j| (i, j))
        });
        let Some((p, q)) = pair else {
            break;
        };
        // [[0, b], [b, 0]] has one eigenvalue of each sign.
        pos += 1;
        neg += 1;
        let b = a[p][q].clone();
        active.retain(|&i| i != p && i != q);
        let cp: Vec<Rational> = active.iter().map(|&i| a[i][p].clone()).collect();
        let cq: Vec<Rational> = active.iter().map(|&i| a[i][q].clone()).collect();
        for (x, &i) in active.iter().enumerate() {
            for (y, &j) in active.iter().enumerate() {
                let delta = (&cp[x] * &cq[y] + &cq[x] * &cp[y]) / &b;
                if !delta.is_zero() {
                    a[i][j] -= delta;
                }
            }
        }
    }
    let zero = form.m - pos - neg;
    Inertia { pos, neg, zero }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matching unit eigenvectors. Only used to propose
/// search directions; every claim built on them is re-verified exactly.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..m).map(|i| a[i][i] * a[i][i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..m).map(|i| a[i][i]).collect();
    let vectors = (0..m).map(|j| (0..m).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Denominator bound used when rationalizing floating directions.
pub const DIRECTION_DENOMINATOR: u64 = 1 << 16;

/// Rounds a float direction to denominator `2^16` and scales it by the largest power
/// of 1/2 that keeps it inside `U_n`.
pub fn rationalize_direction(direction: &[f64], n: usize) -> Option<PerturbationVector> {
    let max = direction.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return None;
    }
    let x: Vec<Rational> = direction
        .iter()
        .map(|&v| round_to_denominator(v / max, DIRECTION_DENOMINATOR))
        .collect();
    if x.iter().all(Zero::is_zero) {
        return None;
    }
    let bound = ratio(1, 4 * n as i64);
    let top = x.iter().map(|v| v.abs()).max().expect("nonempty");
    let mut t = Rational::one();
    while &top * &t > bound {
        t /= int(2);
    }
    PerturbationVector::new(n, x.into_iter().map(|v| v * &t).collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn basis_matrix_examples() {
        assert_eq!(basis_matrix(1, 1, 2).unwrap(), vec![vec![1, -1], vec![-1, 1]]);
        let b = basis_matrix(2, 3, 5).unwrap();
        for row in &b {
            assert_eq!(row.iter().sum::<i64>(), 0);
        }
        for j in 0..5 {
            assert_eq!(b.iter().map(|r| r[j]).sum::<i64>(), 0);
        }
        assert_eq!(b.iter().flatten().filter(|&&v| v != 0).count(), 4);
        assert!(basis_matrix(0, 1, 3).is_err());
        assert!(basis_matrix(3, 1, 3).is_err());
    }

    #[test]
    fn perturbed_matrix_examples() {
        assert_eq!(
            perturbed_matrix(&PerturbationVector::zero(3)),
            RationalMatrix::uniform(3)
        );
        let x = PerturbationVector::new(2, vec![ratio(1, 8)]).unwrap();
        assert_eq!(
            perturbed_matrix(&x).rows(),
            vec![vec![ratio(5, 8), ratio(3, 8)], vec![ratio(3, 8), ratio(5, 8)]]
        );
        assert_eq!(
            PerturbationVector::new(3, vec![ratio(1, 6), int(0), int(0), int(0)]),
            Err(PerturbationError::OutsideCube)
        );
        assert!(PerturbationVector::new(3, vec![int(0); 3]).is_err());
    }

    #[test]
    fn h_at_origin_and_full_set() {
        let s: PermSet = "1234,2413,3142".parse().unwrap();
        assert_eq!(h_eval(s, &PerturbationVector::zero(3)), ratio(3, 24));
        let x = PerturbationVector::new(3, vec![ratio(1, 12), ratio(-1, 20), int(0), ratio(1, 13)]).unwrap();
        assert_eq!(h_eval(PermSet::full(), &x), int(1));
    }

    #[test]
    fn cover_examples() {
        assert!(cover_matrix(PermSet::full()).0.iter().flatten().all(|&c| c == 6));
        let id = cover_matrix("1234".parse().unwrap());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id.0[i][j], (i == j) as u32);
            }
        }
        let set8a: PermSet = "1234,1243,2134,2143,3412,3421,4312,4321".parse().unwrap();
        assert!(cover_matrix(set8a).0.iter().flatten().all(|&c| c == 2));
    }

    #[test]
    fn inertia_examples() {
        let id = SymmetricForm::diagonal(&[int(1), int(1), int(1)]);
        assert_eq!(
            inertia(&id),
            Inertia {
                pos: 3,
                neg: 0,
                zero: 0
            }
        );
        let d = SymmetricForm::diagonal(&[int(1), int(-2), int(0)]);
        assert_eq!(
            inertia(&d),
            Inertia {
                pos: 1,
                neg: 1,
                zero: 1
            }
        );
        let m = SymmetricForm::from_integers(&[&[5, 0, 3], &[0, 9, 0], &[3, 0, 4]]).unwrap();
        assert_eq!(
            inertia(&m),
            Inertia {
                pos: 3,
                neg: 0,
                zero: 0
            }
        );
        let hyperbolic = SymmetricForm::from_integers(&[&[0, 2, 0], &[2, 0, 0], &[0, 0, 0]]).unwrap();
        assert_eq!(
            inertia(&hyperbolic),
            Inertia {
                pos: 1,
                neg: 1,
                zero: 1
            }
        );
        assert_eq!(
            SymmetricForm::from_integers(&[&[1, 2], &[3, 1]]),
            Err(FormError::NotSymmetric(0, 1))
        );
    }

    #[test]
    fn minors() {
        let m = SymmetricForm::from_integers(&[&[5, 0, 3], &[0, 9, 0], &[3, 0, 4]]).unwrap();
        assert_eq!(m.leading_principal_minors(), vec![int(5), int(45), int(99)]);
    }

    #[test]
    fn monotone_map_counts() {
        assert_eq!(monotone_maps(4, 5).len(), 70);
        let total: i64 = monotone_maps(4, 3).iter().map(|(_, w)| w).sum();
        // Σ multinomials over monotone maps = n^k.
        assert_eq!(total, 81);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let (vals, vecs) = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - 1.0).abs() < 1e-12 && (sorted[1] - 3.0).abs() < 1e-12);
        for (l, v) in vals.iter().zip(&vecs) {
            let av0 = 2.0 * v[0] + v[1];
            assert!((av0 - l * v[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn rationalized_direction_in_cube() {
        let x = rationalize_direction(&[0.3, -0.9, 0.1, 0.0], 3).unwrap();
        let bound = ratio(1, 12);
        assert!(x.coordinates().iter().all(|v| v.abs() <= bound));
        assert!(rationalize_direction(&[0.0; 4], 3).is_none());
    }

    #[test]
    fn kernel_is_constant_matrices() {
        for n in [4, 5] {
            let r = gradient_kernel_check(n).unwrap();
            assert_eq!((r.subspace_dim, r.rank, r.kernel_dim), (10, 9, 1));
            assert!(r.constant_maps_to_zero);
        }
        assert_eq!(gradient_kernel_check(3), Err(PerturbationError::UnsupportedOrder));
    }

    #[test]
    fn formula_matches_expansion() {
        for n in 2..=5 {
            let table = TaylorTable::new(n, false);
            for mask in [1u32, 0b1011, 0x00f0f1, 0x123456, 0xabcdef, 0x800001] {
                let s = PermSet::from_mask(mask);
                assert_eq!(table.gradient(s), gradient_formula(s, n), "n={n} mask={mask:x}");
            }
        }
    }

    #[test]
    fn constant_cover_has_zero_gradient() {
        let set8a: PermSet = "1234,1243,2134,2143,3412,3421,4312,4321".parse().unwrap();
        for n in 2..=6 {
            assert!(gradient_symbolic(set8a, n).iter().all(Zero::is_zero));
            assert!(gradient_symbolic(PermSet::full(), n).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn gradient_against_central_differences() {
        let s: PermSet = "1234".parse().unwrap();
        let n = 4;
        let grad = gradient_symbolic(s, n);
        assert!(grad.iter().any(|g| !g.is_zero()));
        let step = ratio(1, 64);
        for v in 0..9 {
            let mut plus = vec![Rational::zero(); 9];
            plus[v] = step.clone();
            let minus: Vec<Rational> = plus.iter().map(|x| -x).collect();
            let hp = h_eval(s, &PerturbationVector::new(n, plus).unwrap());
            let hm = h_eval(s, &PerturbationVector::new(n, minus).unwrap());
            let fd = (hp - hm) / (int(2) * &step);
            // Odd-order remainder: the cubic term of the restriction.
            let poly = plane_polynomial(s, n, v, v);
            let cubic = &poly[3][0] * &step * &step;
            assert_eq!(fd, &grad[v] + cubic);
        }
    }

    #[test]
    fn hessian_against_plane_polynomial_and_differences() {
        let s: PermSet = "1234,1342,2413".parse().unwrap();
        let n = 3;
        let h = hessian(s, n);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(h.get(a, b), h.get(b, a));
                let poly = plane_polynomial(s, n, a, b);
                if a == b {
                    assert_eq!(h.get(a, a), &(int(2) * &poly[2][0]));
                } else {
                    assert_eq!(h.get(a, b), &poly[1][1]);
                }
            }
        }
        let step = ratio(1, 128);
        let at = |v: usize, t: &Rational| {
            let mut x = vec![Rational::zero(); 4];
            x[v] = t.clone();
            h_eval(s, &PerturbationVector::new(n, x).unwrap())
        };
        for v in 0..4 {
            let second = (at(v, &step) + at(v, &-step.clone()) - int(2) * ratio(3, 24)) / (&step * &step);
            let diff = second - h.get(v, v);
            assert!(diff.abs() < ratio(1, 100), "v={v}");
        }
    }

    #[test]
    fn complement_negates_derivatives() {
        let s: PermSet = "1234,1342,2413,4321,3142".parse().unwrap();
        let t = TaylorTable::new(5, true);
        let g: Vec<Rational> = t.gradient(s.complement()).iter().map(|v| -v).collect();
        assert_eq!(t.gradient(s), g);
        assert_eq!(t.hessian(s), t.hessian(s.complement()).neg());
        assert_eq!(t.hessian(s).order(), 16);
    }

    #[test]
    fn plane_polynomial_evaluates_h() {
        let s: PermSet = "2413,3142,1324".parse().unwrap();
        let n = 3;
        let (u, v) = (ratio(1, 20), ratio(-1, 15));
        let poly = plane_polynomial(s, n, 1, 2);
        let mut value = Rational::zero();
        for i in 0..5 {
            for j in 0..5 {
                value += &poly[i][j] * num_traits::pow(u.clone(), i) * num_traits::pow(v.clone(), j);
            }
        }
        let x = PerturbationVector::new(n, vec![int(0), u, v, int(0)]).unwrap();
        assert_eq!(value, h_eval(s, &x));
    }
}
