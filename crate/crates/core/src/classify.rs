//! Enumeration of pattern sets up to symmetry, the exceptional Hessian list and the
//! forcing/non-forcing pipeline with machine-checkable evidence.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flag::builtin_certificates;
use crate::perm::{PermSet, Permutation, SymmetryOp, SymmetryTables, FULL_MASK};
use crate::perturbation::{
    cover_contributions, cover_matrix, gradient_formula, h_eval, inertia, jacobi_eigen, monotone_maps,
    perturbed_matrix, rationalize_direction, CoverGradientMap, Inertia, PerturbationVector, SymmetricForm,
    TaylorTable,
};
use crate::rational::{int, ratio, Rational};
use crate::step::{
    blend_witness_for, set_density_sum, six_by_six_example, step_densities, BlendInterval, BlendPolynomial,
    RationalMatrix,
};

/// Order of the block matrices used for the Hessian test.
pub const HESSIAN_ORDER: usize = 5;

/// The exceptional sets as printed, one per class up to symmetry (sizes 4 and 8)
/// or symmetry and complement (size 12).
pub const PRINTED_EXCEPTIONAL: [&str; 13] = [
    "1234,2143,3412,4321",
    "1234,1243,2134,2143,3412,3421,4312,4321",
    "1234,1432,2143,2341,3214,3412,4123,4321",
    "1324,1342,2413,2431,3124,3142,4213,4231",
    "1342,1423,2314,2431,3124,3241,4132,4213",
    "1234,1243,1324,2134,2143,2413,3142,3412,3421,4231,4312,4321",
    "1234,1243,1342,2134,2143,2431,3124,3412,3421,4213,4312,4321",
    "1234,1243,1342,2134,2143,2431,3214,3412,3421,4123,4312,4321",
    "1234,1243,1432,2134,2143,2341,3214,3412,3421,4123,4312,4321",
    "1234,1243,1432,2134,2341,2413,3142,3214,3421,4123,4312,4321",
    "1234,1243,1432,2143,2314,2341,3214,3412,3421,4123,4132,4321",
    "1234,1342,1423,2143,2314,2431,3124,3241,3412,4132,4213,4321",
    "1234,1342,1423,2314,2413,2431,3124,3142,3241,4132,4213,4321",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("constant-cover sets have size 4, 8 or 12 here, not {0}")]
    BadSize(usize),
    #[error("class {class} disagrees with the printed exceptional list: {reason}")]
    MismatchWithKnownList { class: PermSet, reason: &'static str },
    #[error("search budget exhausted (low side found: {low_found}, high side found: {high_found})")]
    BudgetExhausted { low_found: bool, high_found: bool },
}

/// A canonical class representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetClass {
    pub representative: PermSet,
    pub orbit_size: usize,
    pub constant_cover: bool,
}

impl SetClass {
    /// Class of `s` under the 8 symmetries, plus complement when asked.
    pub fn of(s: PermSet, include_complement: bool) -> Self {
        let tables = SymmetryTables::new();
        let (rep, orbit) = tables.canonical(s.mask(), include_complement);
        Self {
            representative: PermSet::from_mask(rep),
            orbit_size: orbit,
            constant_cover: cover_matrix(s).is_constant(),
        }
    }
}

/// Constant-cover classes of the given size.
///
/// Sizes 4 and 8 are taken up to symmetry, size 12 up to symmetry and complement.
pub fn enumerate_constant_cover(size: usize) -> Result<Vec<SetClass>, ClassifyError> {
    if !matches!(size, 4 | 8 | 12) {
        return Err(ClassifyError::BadSize(size));
    }
    let with_complement = size == 12;
    let tables = SymmetryTables::new();
    let images = cover_contributions();
    let cap = (size / 4) as u8;
    let mut found = BTreeSet::new();
    let mut counts = [[0u8; 4]; 4];
    let mut visit = |mask: u32| {
        let (rep, orbit) = tables.canonical(mask, with_complement);
        found.insert((rep, orbit));
    };
    cover_search(0, 0, size, cap, &images, &mut counts, &mut visit);
    Ok(found
        .into_iter()
        .map(|(rep, orbit)| SetClass {
            representative: PermSet::from_mask(rep),
            orbit_size: orbit,
            constant_cover: true,
        })
        .collect())
}

fn cover_search(
    next: usize,
    mask: u32,
    remaining: usize,
    cap: u8,
    images: &[[u8; 4]; 24],
    counts: &mut [[u8; 4]; 4],
    visit: &mut impl FnMut(u32),
) {
    if remaining == 0 {
        visit(mask);
        return;
    }
    if 24 - next < remaining {
        return;
    }
    for p in next..24 {
        let img = &images[p];
        if (0..4).all(|j| counts[img[j] as usize][j] < cap) {
            for j in 0..4 {
                counts[img[j] as usize][j] += 1;
            }
            cover_search(p + 1, mask | 1 << p, remaining - 1, cap, images, counts, visit);
            for j in 0..4 {
                counts[img[j] as usize][j] -= 1;
            }
        }
    }
}

/// Exact `H_S` at order [`HESSIAN_ORDER`], shared across many sets.
pub struct HessianTable(TaylorTable);

impl HessianTable {
    pub fn new() -> Self {
        Self(TaylorTable::new(HESSIAN_ORDER, true))
    }

    pub fn hessian(&self, s: PermSet) -> SymmetricForm {
        self.0.hessian(s)
    }
}

impl Default for HessianTable {
    fn default() -> Self {
        Self::new()
    }
}

/// The printed list as canonical masks under the matching group.
pub fn printed_exceptional_classes() -> Vec<SetClass> {
    PRINTED_EXCEPTIONAL
        .iter()
        .map(|text| {
            let s: PermSet = text.parse().expect("printed sets are well formed");
            SetClass::of(s, s.len() == 12)
        })
        .collect()
}

/// Constant-cover classes whose Hessian at n = 5 misses a sign, checked against the
/// printed list.
pub fn exceptional_sets() -> Result<Vec<SetClass>, ClassifyError> {
    let table = HessianTable::new();
    exceptional_sets_with(&table)
}

pub fn exceptional_sets_with(table: &HessianTable) -> Result<Vec<SetClass>, ClassifyError> {
    let mut out = Vec::new();
    for size in [4, 8, 12] {
        for class in enumerate_constant_cover(size)? {
            let signs = inertia(&table.hessian(class.representative));
            if !signs.is_indefinite() {
                out.push(class);
            }
        }
    }
    let printed: BTreeSet<PermSet> = printed_exceptional_classes()
        .into_iter()
        .map(|c| c.representative)
        .collect();
    let computed: BTreeSet<PermSet> = out.iter().map(|c| c.representative).collect();
    if let Some(extra) = computed.difference(&printed).next() {
        return Err(ClassifyError::MismatchWithKnownList {
            class: *extra,
            reason: "semidefinite Hessian but not printed",
        });
    }
    if let Some(missing) = printed.difference(&computed).next() {
        return Err(ClassifyError::MismatchWithKnownList {
            class: *missing,
            reason: "printed but the Hessian is indefinite or the cover is not constant",
        });
    }
    Ok(out)
}

/// Two perturbations on opposite sides of `|S|/24`, re-checkable with `h_eval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidedPerturbation {
    pub x_low: PerturbationVector,
    pub x_high: PerturbationVector,
    pub h_low: Rational,
    pub h_high: Rational,
}

impl SidedPerturbation {
    /// Recomputes both values from scratch.
    pub fn recheck(&self, s: PermSet) -> bool {
        let target = target_sum(s);
        let low = h_eval(s, &self.x_low);
        let high = h_eval(s, &self.x_high);
        low == self.h_low && high == self.h_high && low < target && target < high
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientEvidence {
    pub n: usize,
    pub gradient: Vec<Rational>,
    pub sides: SidedPerturbation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HessianEvidence {
    pub n: usize,
    pub inertia: Inertia,
    pub sides: SidedPerturbation,
}

/// Two step permutons on opposite sides of the target and a crossing of their blend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub low: RationalMatrix,
    pub high: RationalMatrix,
    pub low_sum: Rational,
    pub high_sum: Rational,
    pub low_source: String,
    pub high_source: String,
    pub polynomial: BlendPolynomial,
    pub interval: BlendInterval,
}

impl Witness {
    /// Re-sums both matrices and re-evaluates the bracket.
    pub fn recheck(&self, s: PermSet) -> bool {
        let target = target_sum(s);
        let low = set_density_sum(&self.low, s);
        let high = set_density_sum(&self.high, s);
        low == self.low_sum
            && high == self.high_sum
            && low < target
            && target < high
            && self.interval.certifies(&self.polynomial, &target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    SigmaForcing {
        certificate: String,
        op: SymmetryOp,
        complemented: bool,
    },
    NotForcingGradient(GradientEvidence),
    NotForcingHessian(HessianEvidence),
    NotForcingWitness(Box<Witness>),
    /// `S` is empty or everything: the sum is `|S|/24` for every permuton, so any
    /// non-uniform matrix is a witness.
    NotForcingTrivial {
        witness: RationalMatrix,
    },
}

impl Verdict {
    pub fn is_forcing(&self) -> bool {
        matches!(self, Verdict::SigmaForcing { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SigmaForcing { .. } => "sigma-forcing",
            Verdict::NotForcingGradient(_) => "gradient",
            Verdict::NotForcingHessian(_) => "hessian",
            Verdict::NotForcingWitness(_) => "witness",
            Verdict::NotForcingTrivial { .. } => "trivial",
        }
    }

    /// Independent re-verification of the evidence carried by the verdict.
    pub fn recheck(&self, s: PermSet) -> bool {
        match self {
            Verdict::SigmaForcing {
                certificate,
                op,
                complemented,
            } => builtin_certificates().iter().any(|c| {
                &c.name == certificate && {
                    let image = c.set.apply_symmetry(*op);
                    (if *complemented { image.complement() } else { image }) == s
                }
            }),
            Verdict::NotForcingGradient(e) => e.gradient.iter().any(|g| !g.is_zero()) && e.sides.recheck(s),
            Verdict::NotForcingHessian(e) => e.inertia.is_indefinite() && e.sides.recheck(s),
            Verdict::NotForcingWitness(w) => w.recheck(s),
            Verdict::NotForcingTrivial { witness } => {
                (s.is_empty() || s.mask() == FULL_MASK)
                    && witness != &RationalMatrix::uniform(witness.order())
                    && set_density_sum(witness, s) == target_sum(s)
            }
        }
    }
}

/// Search limits for [`counterexample_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    /// Largest order of permutation matrices tried exhaustively.
    pub max_perm_order: usize,
    /// Largest order of identity matrices tried for the monotone side.
    pub max_identity_order: usize,
    pub hessian_directions: bool,
    /// Number of random Birkhoff points.
    pub random_points: usize,
    pub random_order: usize,
    pub random_terms: usize,
    /// Frank-Wolfe runs from random vertices, per side still missing.
    pub descent_runs: usize,
    pub descent_order: usize,
    pub descent_steps: usize,
    /// The blend bracket is narrowed to width `2^-blend_bits`.
    pub blend_bits: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_perm_order: 6,
            max_identity_order: 12,
            hessian_directions: true,
            random_points: 2000,
            random_order: 6,
            random_terms: 3,
            descent_runs: 8,
            descent_order: 7,
            descent_steps: 120,
            blend_bits: 20,
        }
    }
}

impl Budget {
    /// Only the cheap deterministic strategies.
    pub fn small() -> Self {
        Self {
            max_perm_order: 5,
            max_identity_order: 8,
            hessian_directions: false,
            random_points: 0,
            descent_runs: 0,
            ..Self::default()
        }
    }

    pub fn blend_tolerance(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << self.blend_bits as usize)
    }
}

pub fn target_sum(s: PermSet) -> Rational {
    ratio(s.len() as i64, 24)
}

/// The certified class containing `s`, with `s = op(C)` or its complement.
pub fn forcing_lookup(s: PermSet) -> Option<(String, SymmetryOp, bool)> {
    for cert in builtin_certificates() {
        for op in SymmetryOp::ALL {
            let image = cert.set.apply_symmetry(op);
            if image == s {
                return Some((cert.name.clone(), op, false));
            }
            if image.complement() == s {
                return Some((cert.name.clone(), op, true));
            }
        }
    }
    None
}

/// Halves `x` until `h(x)` and `h(y)` land strictly on opposite sides of the target.
fn separate(
    s: PermSet,
    x_high: PerturbationVector,
    x_low: PerturbationVector,
    max_halvings: usize,
) -> Option<SidedPerturbation> {
    let target = target_sum(s);
    let half = ratio(1, 2);
    let (mut hi, mut lo) = (x_high, x_low);
    for _ in 0..=max_halvings {
        let h_high = h_eval(s, &hi);
        let h_low = h_eval(s, &lo);
        if h_low < target && target < h_high {
            return Some(SidedPerturbation {
                x_low: lo,
                x_high: hi,
                h_low,
                h_high,
            });
        }
        hi = hi.scaled(&half).ok()?;
        lo = lo.scaled(&half).ok()?;
    }
    None
}

fn negate(x: &PerturbationVector) -> PerturbationVector {
    x.scaled(&int(-1)).expect("the cube is symmetric")
}

/// Gradient evidence at the first `n ∈ {4, 5}` with a nonzero gradient.
pub fn gradient_evidence(s: PermSet) -> Option<GradientEvidence> {
    for n in [4, 5] {
        let gradient = gradient_formula(s, n);
        let top = gradient.iter().map(|g| g.abs()).max()?;
        if top.is_zero() {
            continue;
        }
        let scale = ratio(1, 4 * n as i64) / &top;
        let x = PerturbationVector::new(n, gradient.iter().map(|g| g * &scale).collect()).ok()?;
        if let Some(sides) = separate(s, x.clone(), negate(&x), 40) {
            return Some(GradientEvidence { n, gradient, sides });
        }
    }
    None
}

/// Directions of most negative and most positive curvature, rationalized.
fn curvature_directions(form: &SymmetricForm) -> (Option<PerturbationVector>, Option<PerturbationVector>) {
    let (values, vectors) = jacobi_eigen(&form.to_f64());
    let n = libm::round(libm::sqrt(form.order() as f64)) as usize + 1;
    let pick = |want_positive: bool| {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
        if want_positive {
            order.reverse();
        }
        order.into_iter().find_map(|i| {
            let x = rationalize_direction(&vectors[i], n)?;
            let q = form.quadratic_value(x.coordinates());
            let good = if want_positive {
                q.is_positive()
            } else {
                q.is_negative()
            };
            good.then_some(x)
        })
    };
    (pick(false), pick(true))
}

/// Evidence from an indefinite Hessian at order 5 (the gradient must vanish).
pub fn hessian_evidence(s: PermSet, table: &HessianTable) -> Option<HessianEvidence> {
    let form = table.hessian(s);
    let signs = inertia(&form);
    if !signs.is_indefinite() {
        return None;
    }
    let (neg, pos) = curvature_directions(&form);
    let sides = separate(s, pos?, neg?, 40)?;
    Some(HessianEvidence {
        n: HESSIAN_ORDER,
        inertia: signs,
        sides,
    })
}

/// Runs the full pipeline on one set.
pub fn classify_set(s: PermSet, budget: &Budget) -> Result<Verdict, ClassifyError> {
    classify_set_with(s, budget, 0, &HessianTable::new())
}

pub fn classify_set_with(
    s: PermSet,
    budget: &Budget,
    seed: u64,
    table: &HessianTable,
) -> Result<Verdict, ClassifyError> {
    if let Some((certificate, op, complemented)) = forcing_lookup(s) {
        return Ok(Verdict::SigmaForcing {
            certificate,
            op,
            complemented,
        });
    }
    if s.is_empty() || s.mask() == FULL_MASK {
        return Ok(Verdict::NotForcingTrivial {
            witness: RationalMatrix::permutation_matrix(&Permutation::identity(2)),
        });
    }
    if !cover_matrix(s).is_constant() {
        let evidence = gradient_evidence(s).expect("non-constant cover gives a usable gradient");
        return Ok(Verdict::NotForcingGradient(evidence));
    }
    if let Some(evidence) = hessian_evidence(s, table) {
        return Ok(Verdict::NotForcingHessian(evidence));
    }
    counterexample_search_with(s, budget, seed, Some(table)).map(|w| Verdict::NotForcingWitness(Box::new(w)))
}

/// All permutations of order `k` in lexicographic order, as matrices.
fn permutation_matrices(k: usize) -> impl Iterator<Item = (Permutation, RationalMatrix)> {
    Permutation::all(k).into_iter().map(|p| {
        let m = RationalMatrix::permutation_matrix(&p);
        (p, m)
    })
}

struct SearchState {
    s: PermSet,
    target: Rational,
    low: Option<(RationalMatrix, Rational, String)>,
    high: Option<(RationalMatrix, Rational, String)>,
}

impl SearchState {
    fn offer(&mut self, m: RationalMatrix, source: impl FnOnce() -> String) {
        let densities = step_densities(&m, 4).expect("order 4 is supported");
        let sum = self
            .s
            .ranks()
            .fold(Rational::zero(), |acc, r| acc + &densities[r]);
        if sum < self.target && self.low.is_none() {
            self.low = Some((m, sum, source()));
        } else if sum > self.target && self.high.is_none() {
            self.high = Some((m, sum, source()));
        }
    }

    fn done(&self) -> bool {
        self.low.is_some() && self.high.is_some()
    }
}

/// A random convex combination of permutation matrices with dyadic weights.
pub fn birkhoff_point(rng: &mut ChaCha8Rng, order: usize, terms: usize) -> RationalMatrix {
    let mut weights: Vec<i64> = (0..terms).map(|_| rng.gen_range(1..=16)).collect();
    let total: i64 = weights.iter().sum();
    let mut rows = vec![vec![Rational::zero(); order]; order];
    for w in weights.iter_mut() {
        let mut image: Vec<usize> = (0..order).collect();
        for i in (1..order).rev() {
            let j = rng.gen_range(0..=i);
            image.swap(i, j);
        }
        let coef = ratio(*w, total);
        for (r, &c) in image.iter().enumerate() {
            rows[r][c] += &coef;
        }
    }
    RationalMatrix::new(rows).expect("convex combinations stay doubly stochastic")
}

/// Float density sums of a fixed set and their gradients, for steering the search.
struct FloatEvaluator {
    n: usize,
    maps: Vec<(Vec<usize>, f64)>,
    members: Vec<[usize; 4]>,
    norm: f64,
}

impl FloatEvaluator {
    fn new(s: PermSet, n: usize) -> Self {
        let maps = monotone_maps(4, n)
            .into_iter()
            .map(|(f, w)| (f, w as f64))
            .collect();
        let members = s
            .members()
            .iter()
            .map(|p| core::array::from_fn(|m| p.at(m + 1) - 1))
            .collect();
        let nf = n as f64;
        Self {
            n,
            maps,
            members,
            norm: 24.0 * nf * nf * nf * nf,
        }
    }

    fn value_and_gradient(&self, a: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n;
        let mut value = 0.0;
        let mut grad = vec![0.0; n * n];
        for (f, wf) in &self.maps {
            for (g, wg) in &self.maps {
                let w = wf * wg;
                for pi in &self.members {
                    let idx: [usize; 4] = core::array::from_fn(|m| f[m] * n + g[pi[m]]);
                    let e: [f64; 4] = core::array::from_fn(|m| a[idx[m]]);
                    let prefix = [1.0, e[0], e[0] * e[1], e[0] * e[1] * e[2]];
                    let suffix = [e[1] * e[2] * e[3], e[2] * e[3], e[3], 1.0];
                    value += w * prefix[3] * e[3];
                    for m in 0..4 {
                        grad[idx[m]] += w * prefix[m] * suffix[m];
                    }
                }
            }
        }
        for v in grad.iter_mut() {
            *v /= self.norm;
        }
        (value / self.norm, grad)
    }
}

/// Minimum-cost perfect matching on an `n × n` cost matrix (row `i` → column `out[i]`).
fn assignment(cost: &[f64], n: usize) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        out[owner[j] - 1] = j - 1;
    }
    out
}

/// `Σ_s 2(s+1) P_s / (T(T+1))`: the Frank-Wolfe iterate after the vertices `P_0..P_{T-1}`
/// with step sizes `2/(t+2)`.
pub fn frank_wolfe_matrix(vertices: &[Vec<usize>]) -> RationalMatrix {
    let n = vertices[0].len();
    let t = vertices.len() as i64;
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (s, image) in vertices.iter().enumerate() {
        let coef = ratio(2 * (s as i64 + 1), t * (t + 1));
        for (r, &c) in image.iter().enumerate() {
            rows[r][c] += &coef;
        }
    }
    RationalMatrix::new(rows).expect("convex combinations stay doubly stochastic")
}

/// Frank-Wolfe descent of `sign · Σ_S d` from a vertex; returns the vertex sequence.
fn frank_wolfe(eval: &FloatEvaluator, sign: f64, start: Vec<usize>, steps: usize) -> Vec<Vec<usize>> {
    let n = eval.n;
    let mut a = vec![0.0; n * n];
    for (r, &c) in start.iter().enumerate() {
        a[r * n + c] = 1.0;
    }
    let mut vertices = vec![start];
    for t in 1..steps {
        let (_, grad) = eval.value_and_gradient(&a);
        let cost: Vec<f64> = grad.iter().map(|g| sign * g).collect();
        let p = assignment(&cost, n);
        let gamma = 2.0 / (t as f64 + 2.0);
        for v in a.iter_mut() {
            *v *= 1.0 - gamma;
        }
        for (r, &c) in p.iter().enumerate() {
            a[r * n + c] += gamma;
        }
        vertices.push(p);
    }
    vertices
}

/// Exact rational kernel basis of a symmetric form.
pub fn kernel_basis(form: &SymmetricForm) -> Vec<Vec<Rational>> {
    let m = form.order();
    let mut rows = form.rows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..m {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..m)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); m];
            v[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][free].clone();
            }
            v
        })
        .collect()
}

fn into_cube(v: &[Rational], n: usize) -> Option<PerturbationVector> {
    let top = v.iter().map(|x| x.abs()).max()?;
    if top.is_zero() {
        return None;
    }
    let scale = ratio(1, 4 * n as i64) / top;
    PerturbationVector::new(n, v.iter().map(|x| x * &scale).collect()).ok()
}

/// Searches for step permutons strictly below and strictly above `|S|/24`.
pub fn counterexample_search(s: PermSet, budget: &Budget, seed: u64) -> Result<Witness, ClassifyError> {
    counterexample_search_with(s, budget, seed, None)
}

fn counterexample_search_with(
    s: PermSet,
    budget: &Budget,
    seed: u64,
    table: Option<&HessianTable>,
) -> Result<Witness, ClassifyError> {
    let mut state = SearchState {
        s,
        target: target_sum(s),
        low: None,
        high: None,
    };
    // (a) permutation matrices, then longer identities for the monotone side.
    'perms: for k in 2..=budget.max_perm_order {
        for (p, m) in permutation_matrices(k) {
            state.offer(m, || alloc::format!("permutation {p}"));
            if state.done() {
                break 'perms;
            }
        }
    }
    for k in budget.max_perm_order.max(1) + 1..=budget.max_identity_order {
        if state.done() {
            break;
        }
        let id = Permutation::identity(k);
        state.offer(RationalMatrix::permutation_matrix(&id), || {
            alloc::format!("permutation {id}")
        });
    }
    // (b) the explicit 6×6 matrix.
    if !state.done() {
        state.offer(six_by_six_example(), || "six-by-six example".into());
    }
    // (c) curvature and kernel directions of the Hessian at order 5.
    if !state.done() && budget.hessian_directions {
        let owned;
        let table = match table {
            Some(t) => t,
            None => {
                owned = HessianTable::new();
                &owned
            }
        };
        let form = table.hessian(s);
        let (neg, pos) = curvature_directions(&form);
        let mut directions: Vec<(String, PerturbationVector)> = Vec::new();
        directions.extend(neg.map(|x| ("negative curvature direction".into(), x)));
        directions.extend(pos.map(|x| ("positive curvature direction".into(), x)));
        for (i, v) in kernel_basis(&form).iter().enumerate() {
            if let Some(x) = into_cube(v, HESSIAN_ORDER) {
                directions.push((alloc::format!("kernel direction {i}"), negate(&x)));
                directions.push((alloc::format!("kernel direction {i}"), x));
            }
        }
        let half = ratio(1, 2);
        for (name, x) in directions {
            let mut x = x;
            for step in 0..6 {
                state.offer(perturbed_matrix(&x), || alloc::format!("{name}, scale 2^-{step}"));
                if state.done() {
                    break;
                }
                x = x.scaled(&half).expect("halving stays in the cube");
            }
            if state.done() {
                break;
            }
        }
    }
    // (d) seeded Birkhoff points.
    if !state.done() && budget.random_points > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..budget.random_points {
            let m = birkhoff_point(&mut rng, budget.random_order, budget.random_terms);
            state.offer(m, || alloc::format!("Birkhoff point {i} (seed {seed})"));
            if state.done() {
                break;
            }
        }
    }
    // (e) Frank-Wolfe descent on the Birkhoff polytope for a missing side.
    if !state.done() && budget.descent_runs > 0 && !s.is_empty() {
        let eval = FloatEvaluator::new(s, budget.descent_order);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for run in 0..budget.descent_runs {
            let sign = if state.low.is_none() { 1.0 } else { -1.0 };
            let mut start: Vec<usize> = (0..budget.descent_order).collect();
            for i in (1..start.len()).rev() {
                let j = rng.gen_range(0..=i);
                start.swap(i, j);
            }
            let vertices = frank_wolfe(&eval, sign, start, budget.descent_steps);
            state.offer(frank_wolfe_matrix(&vertices), || {
                alloc::format!(
                    "Frank-Wolfe run {run} (seed {seed}, order {}, {} steps)",
                    budget.descent_order,
                    budget.descent_steps
                )
            });
            if state.done() {
                break;
            }
        }
    }
    let (Some(low), Some(high)) = (state.low.clone(), state.high.clone()) else {
        return Err(ClassifyError::BudgetExhausted {
            low_found: state.low.is_some(),
            high_found: state.high.is_some(),
        });
    };
    witness_from(s, low, high, budget)
}

fn witness_from(
    s: PermSet,
    low: (RationalMatrix, Rational, String),
    high: (RationalMatrix, Rational, String),
    budget: &Budget,
) -> Result<Witness, ClassifyError> {
    let target = target_sum(s);
    let exhausted = ClassifyError::BudgetExhausted {
        low_found: true,
        high_found: true,
    };
    // Independent re-summation through the single-pattern path.
    if set_density_sum(&low.0, s) != low.1 || set_density_sum(&high.0, s) != high.1 {
        return Err(exhausted);
    }
    let (polynomial, interval) =
        blend_witness_for(s, &low.0, &high.0, &target, &budget.blend_tolerance()).map_err(|_| exhausted)?;
    Ok(Witness {
        low: low.0,
        high: high.0,
        low_sum: low.1,
        high_sum: high.1,
        low_source: low.2,
        high_source: high.2,
        polynomial,
        interval,
    })
}

/// Builds a witness from supplied matrices, checking both sides exactly.
pub fn witness_from_matrices(
    s: PermSet,
    low: RationalMatrix,
    high: RationalMatrix,
    budget: &Budget,
) -> Option<Witness> {
    let target = target_sum(s);
    let low_sum = set_density_sum(&low, s);
    let high_sum = set_density_sum(&high, s);
    if !(low_sum < target && target < high_sum) {
        return None;
    }
    witness_from(
        s,
        (low, low_sum, "supplied".into()),
        (high, high_sum, "supplied".into()),
        budget,
    )
    .ok()
}

/// Low/high matrices for `comp?(op(S))` from low/high matrices for `S`.
pub fn transport_witness(
    low: &RationalMatrix,
    high: &RationalMatrix,
    op: SymmetryOp,
    complemented: bool,
) -> (RationalMatrix, RationalMatrix) {
    let (low, high) = (low.apply_symmetry(op), high.apply_symmetry(op));
    if complemented {
        (high, low)
    } else {
        (low, high)
    }
}

/// Outcome recorded for one class in a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum ClassStatus {
    Verdict(Verdict),
    Pending { low_found: bool, high_found: bool },
}

impl ClassStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ClassStatus::Verdict(v) => v.label(),
            ClassStatus::Pending { .. } => "pending",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanEntry {
    pub class: SetClass,
    pub status: ClassStatus,
}

/// Classes with a non-constant cover counted in one slice of the mask range.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChunkSummary {
    pub classes: usize,
    pub subsets: usize,
    pub gradient_classes: usize,
    pub gradient_subsets: usize,
    /// Constant-cover representatives, handled in the second phase.
    pub constant_cover: Vec<SetClass>,
}

impl ChunkSummary {
    pub fn merge(mut self, other: ChunkSummary) -> ChunkSummary {
        self.classes += other.classes;
        self.subsets += other.subsets;
        self.gradient_classes += other.gradient_classes;
        self.gradient_subsets += other.gradient_subsets;
        self.constant_cover.extend(other.constant_cover);
        self
    }
}

/// Byte-sliced cover counts for masks.
pub struct CoverTables {
    tables: [[[u8; 16]; 256]; 3],
}

impl CoverTables {
    pub fn new() -> Self {
        let images = cover_contributions();
        let mut tables = [[[0u8; 16]; 256]; 3];
        for (byte, table) in tables.iter_mut().enumerate() {
            for (value, cell) in table.iter_mut().enumerate() {
                for bit in 0..8 {
                    if value & (1 << bit) != 0 {
                        let img = &images[byte * 8 + bit];
                        for j in 0..4 {
                            cell[img[j] as usize * 4 + j] += 1;
                        }
                    }
                }
            }
        }
        Self { tables }
    }

    pub fn cover(&self, mask: u32) -> [u8; 16] {
        let mut out = [0u8; 16];
        for byte in 0..3 {
            let cell = &self.tables[byte][((mask >> (8 * byte)) & 0xff) as usize];
            for (o, c) in out.iter_mut().zip(cell) {
                *o += c;
            }
        }
        out
    }
}

impl Default for CoverTables {
    fn default() -> Self {
        Self::new()
    }
}

/// First phase of a scan over masks in `start..end`: canonical classes under
/// symmetry and complement, split by whether the cover is constant.
pub fn scan_chunk(start: u32, end: u32, symmetry: &SymmetryTables, covers: &CoverTables) -> ChunkSummary {
    let gradient = CoverGradientMap::new(4);
    let mut out = ChunkSummary::default();
    for mask in start..end.min(FULL_MASK + 1) {
        if !symmetry.is_canonical(mask, true) {
            continue;
        }
        let (_, orbit) = symmetry.canonical(mask, true);
        out.classes += 1;
        out.subsets += orbit;
        let cover = covers.cover(mask);
        if cover.iter().all(|&c| c == cover[0]) {
            out.constant_cover.push(SetClass {
                representative: PermSet::from_mask(mask),
                orbit_size: orbit,
                constant_cover: true,
            });
            continue;
        }
        let mut cells = [[0u32; 4]; 4];
        for (i, row) in cells.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = cover[i * 4 + j] as u32;
            }
        }
        // A non-constant cover must give a nonzero gradient at order 4.
        assert!(
            gradient.apply(&cells).iter().any(|&g| g != 0),
            "non-constant cover with zero gradient for mask {mask:#x}"
        );
        out.gradient_classes += 1;
        out.gradient_subsets += orbit;
    }
    out
}

/// Classification of every subset of `S_4`, grouped by canonical class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub classes: usize,
    pub subsets: usize,
    pub gradient_classes: usize,
    pub gradient_subsets: usize,
    /// Constant-cover classes with their full verdicts, ordered by representative.
    pub entries: Vec<ScanEntry>,
    /// Every forcing subset, sorted by mask.
    pub forcing_sets: Vec<PermSet>,
}

impl ScanReport {
    pub fn pending(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, ClassStatus::Pending { .. }))
    }
}

/// Full verdict for one constant-cover class.
///
/// `supplied` low/high matrices are verified exactly; the search runs when they are
/// missing or fail.
pub fn classify_class(
    class: SetClass,
    supplied: Option<(RationalMatrix, RationalMatrix)>,
    budget: &Budget,
    table: &HessianTable,
) -> ScanEntry {
    let s = class.representative;
    let supplied = supplied.and_then(|(low, high)| witness_from_matrices(s, low, high, budget));
    let needs_witness = || {
        forcing_lookup(s).is_none()
            && !s.is_empty()
            && s.mask() != FULL_MASK
            && cover_matrix(s).is_constant()
            && !inertia(&table.hessian(s)).is_indefinite()
    };
    let status = match supplied {
        Some(w) if needs_witness() => ClassStatus::Verdict(Verdict::NotForcingWitness(Box::new(w))),
        _ => match classify_set_with(s, budget, 0, table) {
            Ok(v) => ClassStatus::Verdict(v),
            Err(ClassifyError::BudgetExhausted {
                low_found,
                high_found,
            }) => ClassStatus::Pending {
                low_found,
                high_found,
            },
            Err(_) => ClassStatus::Pending {
                low_found: false,
                high_found: false,
            },
        },
    };
    ScanEntry { class, status }
}

/// Orders the entries and expands the forcing classes into their subsets.
pub fn assemble_scan(summary: &ChunkSummary, mut entries: Vec<ScanEntry>) -> ScanReport {
    entries.sort_by_key(|e| e.class);
    let mut forcing = BTreeSet::new();
    for e in &entries {
        if matches!(e.status, ClassStatus::Verdict(Verdict::SigmaForcing { .. })) {
            let s = e.class.representative;
            for op in SymmetryOp::ALL {
                forcing.insert(s.apply_symmetry(op));
                forcing.insert(s.apply_symmetry(op).complement());
            }
        }
    }
    ScanReport {
        classes: summary.classes,
        subsets: summary.subsets,
        gradient_classes: summary.gradient_classes,
        gradient_subsets: summary.gradient_subsets,
        entries,
        forcing_sets: forcing.into_iter().collect(),
    }
}

/// Second phase: full verdicts for the constant-cover classes, in order.
pub fn finish_scan(
    summary: ChunkSummary,
    budget: &Budget,
    witnesses: &mut dyn FnMut(PermSet) -> Option<(RationalMatrix, RationalMatrix)>,
) -> ScanReport {
    let table = HessianTable::new();
    let mut classes = summary.constant_cover.clone();
    classes.sort();
    let entries = classes
        .into_iter()
        .map(|c| classify_class(c, witnesses(c.representative), budget, &table))
        .collect();
    assemble_scan(&summary, entries)
}

/// Sequential scan over all `2^24` subsets.
pub fn full_scan(
    budget: &Budget,
    witnesses: &mut dyn FnMut(PermSet) -> Option<(RationalMatrix, RationalMatrix)>,
) -> ScanReport {
    let symmetry = SymmetryTables::new();
    let covers = CoverTables::new();
    let summary = scan_chunk(0, FULL_MASK + 1, &symmetry, &covers);
    finish_scan(summary, budget, witnesses)
}
