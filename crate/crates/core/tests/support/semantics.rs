//! Rooted densities of step permutons by direct enumeration of cell assignments.
//!
//! The first two sampled points are the roots. Inside a shared row (or column) block
//! the order of the points is uniform, so every tie structure has a fixed
//! distribution of labelled patterns, counted here from scratch.

use std::collections::{BTreeMap, HashMap};

use quasiperm_core::flag::{enumerate_flags, unlabel, FlagType, FlagVector, RootedPermutation};
use quasiperm_core::rational::{int, ratio};
use quasiperm_core::step::step_density;
use quasiperm_core::{Permutation, Rational, RationalMatrix};

type Outcome = (Vec<u8>, (usize, usize));
/// Labelled outcomes with their counts, and the number of tie-breaks.
type TieLaw = (Vec<(Outcome, u64)>, u64);

fn orders(blocks: &[usize]) -> Vec<Vec<usize>> {
    // All rank vectors compatible with the block order; ties broken every way.
    let k = blocks.len();
    Permutation::all(k)
        .into_iter()
        .map(|p| p.image().iter().map(|&v| v as usize - 1).collect::<Vec<_>>())
        .filter(|ranks| (0..k).all(|a| (0..k).all(|b| blocks[a] >= blocks[b] || ranks[a] < ranks[b])))
        .collect()
}

fn tie_outcomes(rows: &[usize], cols: &[usize]) -> TieLaw {
    let k = rows.len();
    let mut counts: BTreeMap<Outcome, u64> = BTreeMap::new();
    let mut total = 0;
    let xs = orders(rows);
    let ys = orders(cols);
    for x in &xs {
        for y in &ys {
            let mut by_x = vec![0usize; k];
            for (point, &rank) in x.iter().enumerate() {
                by_x[rank] = point;
            }
            let pattern: Vec<u8> = by_x.iter().map(|&p| y[p] as u8 + 1).collect();
            let (a, b) = (x[0].min(x[1]) + 1, x[0].max(x[1]) + 1);
            *counts.entry((pattern, (a, b))).or_default() += 1;
            total += 1;
        }
    }
    (counts.into_iter().collect(), total)
}

fn normalize(v: &[usize]) -> Vec<usize> {
    let mut sorted = v.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    v.iter().map(|x| sorted.binary_search(x).unwrap()).collect()
}

/// Law of the rooted pattern, built root configuration by root configuration.
pub struct RootedLaw {
    /// `P(roots induce t)`.
    pub type_density: BTreeMap<FlagType, Rational>,
    /// `E[h^t(F) | roots induce t]` for every flag seen with positive probability.
    pub conditional: BTreeMap<RootedPermutation, Rational>,
}

pub fn rooted_law(a: &RationalMatrix, k: usize) -> RootedLaw {
    assert!((2..=4).contains(&k));
    let n = a.order();
    let cells: Vec<(usize, usize, Rational)> = (1..=n)
        .flat_map(|r| (1..=n).map(move |c| (r, c)))
        .filter(|&(r, c)| a.get(r, c) != &int(0))
        .map(|(r, c)| (r, c, a.get(r, c) / int(n as i64)))
        .collect();
    let mut memo: HashMap<(Vec<usize>, Vec<usize>), TieLaw> = HashMap::new();
    let mut joint: BTreeMap<RootedPermutation, Rational> = BTreeMap::new();
    for r0 in &cells {
        for r1 in &cells {
            // Conditional law given the root cells.
            let root_weight = &r0.2 * &r1.2;
            let mut given: BTreeMap<RootedPermutation, Rational> = BTreeMap::new();
            let mut rest = vec![0usize; k - 2];
            loop {
                let mut rows = vec![r0.0, r1.0];
                let mut cols = vec![r0.1, r1.1];
                let mut w = int(1);
                for &i in &rest {
                    rows.push(cells[i].0);
                    cols.push(cells[i].1);
                    w *= &cells[i].2;
                }
                let key = (normalize(&rows), normalize(&cols));
                let (outcomes, total) = memo
                    .entry(key.clone())
                    .or_insert_with(|| tie_outcomes(&key.0, &key.1));
                for ((pattern, (x, y)), count) in outcomes.iter() {
                    let flag =
                        RootedPermutation::new(Permutation::new(pattern.clone()).unwrap(), *x, *y).unwrap();
                    *given.entry(flag).or_insert_with(|| int(0)) += &w * ratio(*count as i64, *total as i64);
                }
                // Next assignment of the non-root points.
                let mut i = 0;
                while i < rest.len() {
                    rest[i] += 1;
                    if rest[i] < cells.len() {
                        break;
                    }
                    rest[i] = 0;
                    i += 1;
                }
                if i == rest.len() {
                    break;
                }
            }
            for (flag, p) in given {
                *joint.entry(flag).or_insert_with(|| int(0)) += &root_weight * p;
            }
        }
    }
    // Summing the joint law over the flags of one type gives the type density.
    let mut per_type: BTreeMap<FlagType, Rational> = BTreeMap::new();
    for (flag, p) in &joint {
        *per_type.entry(flag.flag_type()).or_insert_with(|| int(0)) += p;
    }
    let conditional = joint
        .iter()
        .map(|(flag, p)| (flag.clone(), p / &per_type[&flag.flag_type()]))
        .collect();
    RootedLaw {
        type_density: per_type,
        conditional,
    }
}

/// Checks `h(⟦F⟧) = d(τ)·E[h^τ(F)]` for every flag of order `2..=4`; returns the count.
pub fn check_semantics(a: &RationalMatrix) -> Result<usize, String> {
    let mut checked = 0;
    for k in 2..=4 {
        let law = rooted_law(a, k);
        for t in [FlagType::Tau1, FlagType::Tau2] {
            let d_tau = law.type_density.get(&t).cloned().unwrap_or_else(|| int(0));
            let d_lib = step_density(a, &t.permutation()).unwrap();
            if d_tau != d_lib {
                return Err(format!("type density {t}: {d_tau} vs {d_lib}"));
            }
            for flag in enumerate_flags(t, k) {
                let combo = unlabel(&FlagVector::single(flag.clone()));
                let lhs = combo.terms.iter().fold(combo.constant.clone(), |acc, (p, c)| {
                    acc + c * step_density(a, p).unwrap()
                });
                let expectation = law.conditional.get(&flag).cloned().unwrap_or_else(|| int(0));
                let rhs = &d_tau * expectation;
                if lhs != rhs {
                    return Err(format!("flag {flag}: {lhs} vs {rhs}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Seeded Birkhoff point of order `1..=4`.
pub fn seeded_matrix(seed: u64) -> RationalMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4usize);
    let terms = rng.gen_range(1..=3usize);
    let weights: Vec<i64> = (0..terms).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    let mut rows = vec![vec![int(0); n]; n];
    for w in weights {
        let sigma = Permutation::from_lex_rank(n, rng.gen_range(0..(1..=n).product::<usize>()));
        for j in 1..=n {
            rows[j - 1][sigma.at(j) - 1] += ratio(w, total);
        }
    }
    RationalMatrix::new(rows).unwrap()
}
