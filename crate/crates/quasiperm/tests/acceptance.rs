//! The twelve acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always print. The run succeeds when
//! the failing criteria are exactly `KNOWN_RED`; anything else, including a known red
//! criterion turning green, exits nonzero so the table gets updated.

#[path = "../../core/tests/support/semantics.rs"]
mod semantics;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasiperm::core::classify::{
    counterexample_search, enumerate_constant_cover, exceptional_sets, printed_exceptional_classes,
    target_sum, Budget, ClassStatus, HessianTable,
};
use quasiperm::core::flag::{
    builtin_certificates, check_linear_relations, enumerate_flags, named_vector, verify_certificate,
    Certificate, Definiteness, RootedPermutation,
};
use quasiperm::core::perm::canonical_form;
use quasiperm::core::perturbation::{
    cover_matrix, gradient_formula, gradient_kernel_check, h_eval, PerturbationVector, TaylorTable,
};
use quasiperm::core::rational::{abs, int, ratio, sum};
use quasiperm::core::step::{set_density_sum, step_densities};
use quasiperm::core::{PermSet, SymmetryOp};
use quasiperm::fixtures::{fixtures_dir, six_by_six_path, WitnessStore};
use quasiperm::format::load_matrix;
use quasiperm::mutation::{apply_mutation, Mutation};
use quasiperm::scan::parallel_scan;

/// Criteria expected to fail, with the reason recorded in the project notes.
const KNOWN_RED: &[usize] = &[
    // The printed B2 is the root-value swap of B1, not its mirror.
    2, // No permuton below 1/6 has been found for {1234,2143,3412,4321}.
    12,
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn set(s: &str) -> PermSet {
    s.parse().unwrap()
}

fn c1_certificates() -> Outcome {
    let want = [
        ("set8a", ratio(2, 3)),
        ("set8b", int(2)),
        ("set8c", int(16)),
        ("set12", int(172)),
    ];
    let certs = builtin_certificates();
    check(certs.len() == 4, "expected four certificates")?;
    for (c, (name, scale)) in certs.iter().zip(want) {
        let r = verify_certificate(c);
        check(c.name == name, format!("{} out of order", c.name))?;
        check(r.passed(), format!("{name}: {:?}", r.failure))?;
        check(
            r.scale.as_ref() == Some(&scale),
            format!("{name}: scale {:?}", r.scale),
        )?;
        match &r.definiteness {
            Definiteness::PositiveDefinite { minors } => check(
                minors.iter().all(|m| m > &int(0)),
                format!("{name}: minor not positive"),
            )?,
            other => return Err(format!("{name}: M is {}", other.label())),
        }
    }
    Ok("scales 2/3, 2, 16, 172; all four M positive definite".into())
}

fn c2_relations() -> Outcome {
    let rels = check_linear_relations().map_err(|e| e.to_string())?;
    for name in ["A1 = B1 + C1 - D1 - E1", "A1 = H1 - I1"] {
        check(
            rels.iter().any(|r| r.name == name && r.holds),
            format!("{name} fails"),
        )?;
    }
    let anchor: RootedPermutation = "1[4]3[2]".parse().unwrap();
    let b2 = named_vector("B2").unwrap();
    check(
        b2.get(&anchor).is_some(),
        "printed B2 lacks its anchor term 1[4]3[2]",
    )?;
    let mut bad = Vec::new();
    for stem in ["A", "B"] {
        let printed = named_vector(&format!("{stem}2")).unwrap();
        if printed != named_vector(&format!("{stem}1")).unwrap().mirror() {
            bad.push(format!("{stem}2"));
        }
    }
    let mirror_has_anchor = named_vector("B1").unwrap().mirror().get(&anchor).is_some();
    check(
        bad.is_empty(),
        format!(
            "A1 identities hold; printed {} differ from the mirrors of their τ1 vectors (anchor 1[4]3[2] in mirror(B1): {mirror_has_anchor})",
            bad.join(", ")
        ),
    )?;
    Ok("both A1 identities hold; printed τ2 vectors are mirrors".into())
}

fn random_mutation(c: &Certificate, rng: &mut ChaCha8Rng) -> (Mutation, String) {
    let deltas = [int(1), int(-1), ratio(1, 2), ratio(-1, 3), int(3)];
    let delta = deltas[rng.gen_range(0..deltas.len())].clone();
    if rng.gen_bool(0.5) {
        let n = c.m.order();
        let (row, col) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let value = c.m.get(row, col) + &delta;
        let spec = format!("M[{row}][{col}]={value}");
        return (Mutation::Matrix { row, col, value }, spec);
    }
    let side = rng.gen_range(1..=2usize);
    let vectors = if side == 1 { &c.w1 } else { &c.w2 };
    let index = rng.gen_range(0..vectors.len());
    let v = &vectors[index];
    let (flag, value) = if rng.gen_bool(0.7) {
        let terms: Vec<_> = v.terms().collect();
        let (f, old) = terms[rng.gen_range(0..terms.len())];
        (f.clone(), old + &delta)
    } else {
        let candidates = enumerate_flags(v.flag_type(), v.order().unwrap());
        let f = candidates[rng.gen_range(0..candidates.len())].clone();
        let old = v.get(&f).cloned().unwrap_or_else(|| int(0));
        (f, old + &delta)
    };
    let spec = format!("w{side}[{index}][{flag}]={value}");
    (
        Mutation::Vector {
            side,
            index,
            flag,
            value,
        },
        spec,
    )
}

fn c3_mutations() -> Outcome {
    let mut total = 0;
    for (k, c) in builtin_certificates().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        for _ in 0..20 {
            let (m, spec) = random_mutation(c, &mut rng);
            let mutated = apply_mutation(c, &m, &spec).map_err(|e| e.to_string())?;
            check(mutated != *c, format!("{}: {spec} changed nothing", c.name))?;
            check(
                !verify_certificate(&mutated).passed(),
                format!("{}: {spec} still verifies", c.name),
            )?;
            total += 1;
        }
    }
    Ok(format!("{total} seeded single-entry mutations all rejected"))
}

fn c4_enumeration() -> Outcome {
    let counts: Vec<usize> = [4, 8, 12]
        .iter()
        .map(|&k| enumerate_constant_cover(k).map(|v| v.len()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check(counts == [12, 65, 68], format!("counts {counts:?}"))?;
    Ok("12 / 65 / 68 constant-cover classes".into())
}

fn c5_exceptional() -> Outcome {
    let found = exceptional_sets().map_err(|e| e.to_string())?;
    let key = |s: PermSet| canonical_form(s, s.len() == 12);
    let got: BTreeSet<u32> = found.iter().map(|c| key(c.representative).mask()).collect();
    let printed: BTreeSet<u32> = printed_exceptional_classes()
        .iter()
        .map(|c| key(c.representative).mask())
        .collect();
    check(
        got.len() == 13 && got == printed,
        format!("{} classes, match {}", got.len(), got == printed),
    )?;
    Ok("13 classes, equal to the printed list".into())
}

fn c6_six_by_six() -> Outcome {
    let a = load_matrix(&six_by_six_path(&fixtures_dir())).map_err(|e| e.to_string())?;
    let s = set("1342,1423,2314,2431,3124,3241,4132,4213");
    let v = set_density_sum(&a, s);
    check(v == ratio(25, 72), format!("sum {v}"))?;
    Ok("fixture matrix gives 25/72".into())
}

fn c7_gradients() -> Outcome {
    let mut constant: Vec<PermSet> = Vec::new();
    for k in [4, 8, 12] {
        constant.extend(
            enumerate_constant_cover(k)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|c| c.representative),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let random: Vec<PermSet> = (0..200)
        .map(|_| PermSet::from_mask(rng.gen_range(0..1 << 24)))
        .collect();
    for n in 2..=5 {
        let table = TaylorTable::new(n, false);
        for &s in constant.iter().chain(&random) {
            let g = table.gradient(s);
            check(
                g == gradient_formula(s, n),
                format!("n={n}: formula and expansion differ on {s}"),
            )?;
            if cover_matrix(s).is_constant() {
                check(
                    g.iter().all(|v| v == &int(0)),
                    format!("n={n}: nonzero gradient on {s}"),
                )?;
            }
        }
    }
    for n in [4, 5] {
        let r = gradient_kernel_check(n).map_err(|e| e.to_string())?;
        check(r.kernel_dim == 1, format!("kernel dim {} at n={n}", r.kernel_dim))?;
    }
    Ok(format!(
        "{} sets × n=2..5 agree; zero on constant covers; kernel dim 1 at n=4,5",
        constant.len() + 200
    ))
}

fn c8_hessians() -> Outcome {
    let table = HessianTable::new();
    let singles: Vec<_> = (0..24)
        .map(|r| table.hessian(PermSet::from_mask(1 << r)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 4;
    let fd_table = TaylorTable::new(n, true);
    let delta = ratio(1, 8 * n as i64);
    let vars = (n - 1) * (n - 1);
    // Degree-4 terms survive the central differences; |h4(δu)| ≤ (|u|₁ δ / n)^4 per
    // evaluation, with |u|₁ ≤ 8 for the perturbation matrix of e_a ± e_b.
    let n4 = int((n * n * n * n) as i64);
    let bound_mixed = int(4096) * &delta * &delta / &n4;
    let bound_diag = int(512) * &delta * &delta / &n4;
    let point = |coords: &[(usize, i64)]| {
        let mut x = vec![int(0); vars];
        for &(i, s) in coords {
            x[i] += int(s) * &delta;
        }
        PerturbationVector::new(n, x).unwrap()
    };
    for _ in 0..50 {
        let s = PermSet::from_mask(rng.gen_range(0..1 << 24));
        let h = table.hessian(s);
        let total = s
            .ranks()
            .fold(table.hessian(PermSet::empty()), |acc, r| acc.add(&singles[r]));
        check(total == h, format!("H_S is not the sum over members for {s}"))?;
        check(
            table.hessian(s.complement()) == h.neg(),
            format!("H_S̄ ≠ −H_S for {s}"),
        )?;

        let exact = fd_table.hessian(s);
        let h0 = h_eval(s, &PerturbationVector::zero(n));
        for a in 0..vars {
            let fd = (h_eval(s, &point(&[(a, 1)])) + h_eval(s, &point(&[(a, -1)])) - int(2) * &h0)
                / (&delta * &delta);
            check(
                abs(&(fd - exact.get(a, a))) <= bound_diag,
                format!("diagonal {a} off for {s}"),
            )?;
            for b in a + 1..vars {
                let fd = (h_eval(s, &point(&[(a, 1), (b, 1)])) + h_eval(s, &point(&[(a, -1), (b, -1)]))
                    - h_eval(s, &point(&[(a, 1), (b, -1)]))
                    - h_eval(s, &point(&[(a, -1), (b, 1)])))
                    / (int(4) * &delta * &delta);
                check(
                    abs(&(fd - exact.get(a, b))) <= bound_mixed,
                    format!("entry ({a},{b}) off for {s}"),
                )?;
            }
        }
    }
    Ok("50 sets: additive, antisymmetric under complement, differences within the remainder bound".into())
}

fn c9_normalization() -> Outcome {
    for seed in 0..30u64 {
        let a = seeded_birkhoff(seed, 5);
        for k in 1..=4 {
            let total = sum(&step_densities(&a, k).map_err(|e| e.to_string())?);
            check(total == int(1), format!("seed {seed}, k={k}: total {total}"))?;
        }
    }
    for seed in 100..110u64 {
        let a = seeded_birkhoff(seed, 3);
        let d = step_densities(&a, 4).unwrap();
        check(
            step_densities(&a.blowup(2), 4).unwrap() == d,
            format!("seed {seed}: blowup changes densities"),
        )?;
    }
    Ok("30 matrices sum to 1 for k ≤ 4; 10 blowups keep all densities".into())
}

fn seeded_birkhoff(seed: u64, max_order: usize) -> quasiperm::core::RationalMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_order);
    quasiperm::core::classify::birkhoff_point(&mut rng, n, 3)
}

fn c10_semantics() -> Outcome {
    let mut checked = 0;
    for seed in 0..10 {
        checked += semantics::check_semantics(&semantics::seeded_matrix(seed))
            .map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("{checked} flag checks on 10 matrices"))
}

fn listed_forcing_sets() -> BTreeSet<u32> {
    [
        "1234,1243,2134,2143,3412,3421,4312,4321",
        "1234,1432,2143,2341,3214,3412,4123,4321",
        "1324,1342,2413,2431,3124,3142,4213,4231",
        "1324,1423,2314,2413,3142,3241,4132,4231",
        "1234,1243,1432,2134,2143,2341,3214,3412,3421,4123,4312,4321",
    ]
    .iter()
    .flat_map(|s| [set(s).mask(), set(s).complement().mask()])
    .collect()
}

fn c11_scan() -> Outcome {
    let store = WitnessStore::load(&fixtures_dir()).map_err(|e| e.to_string())?;
    let report = parallel_scan(&Budget::default(), Some(&store), &|m: &str| eprintln!("  {m}"));
    check(report.subsets == 1 << 24, format!("{} subsets", report.subsets))?;
    let forcing: BTreeSet<u32> = report.forcing_sets.iter().map(|s| s.mask()).collect();
    check(forcing.len() == 10, format!("{} forcing sets", forcing.len()))?;
    let min = report.forcing_sets.iter().map(|s| s.len()).min();
    check(min == Some(8), format!("smallest forcing set {min:?}"))?;
    check(
        forcing == listed_forcing_sets(),
        "forcing sets differ from the listed ones",
    )?;
    for e in &report.entries {
        if let ClassStatus::Verdict(v) = &e.status {
            check(
                v.recheck(e.class.representative),
                format!("verdict for {} fails its recheck", e.class.representative),
            )?;
        }
    }
    for s in &report.forcing_sets {
        for op in SymmetryOp::ALL {
            let image = s.apply_symmetry(op);
            for candidate in [image, image.complement()] {
                check(
                    forcing.contains(&candidate.mask()),
                    format!("image {candidate} of {s} not forcing"),
                )?;
            }
        }
    }
    let pending = report.pending().count();
    Ok(format!(
        "10 forcing sets, smallest 8, equal to the listed five and complements ({pending} class pending)"
    ))
}

fn c12_witnesses() -> Outcome {
    let budget = Budget::default();
    let tol = budget.blend_tolerance();
    let example = set("1342,1423,2314,2431,3124,3241,4132,4213");
    let w = counterexample_search(example, &budget, 7).map_err(|e| format!("example class: {e}"))?;
    check(w.recheck(example), "example witness fails its recheck")?;
    check(w.interval.width() <= tol, "example bracket too wide")?;

    let store = WitnessStore::load(&fixtures_dir()).map_err(|e| e.to_string())?;
    let mut pending = Vec::new();
    let mut replayed = 0;
    for class in exceptional_sets().map_err(|e| e.to_string())? {
        let s = class.representative;
        if quasiperm::core::classify::forcing_lookup(s).is_some()
            || canonical_form(s, true) == canonical_form(example, true)
        {
            continue;
        }
        match store
            .files()
            .find(|f| canonical_form(f.set, true) == canonical_form(s, true))
        {
            Some(f) => {
                let again =
                    counterexample_search(f.set, &budget, f.seed).map_err(|e| format!("{}: {e}", f.set))?;
                check(
                    again.low == f.low && again.high == f.high,
                    format!("{}: replay differs", f.set),
                )?;
                check(
                    again.interval.width() <= tol,
                    format!("{}: bracket too wide", f.set),
                )?;
                check(
                    set_density_sum(&f.low, f.set) < target_sum(f.set)
                        && set_density_sum(&f.high, f.set) > target_sum(f.set),
                    format!("{}: stored sides wrong", f.set),
                )?;
                replayed += 1;
            }
            None => match counterexample_search(s, &budget, 7) {
                Ok(_) => return Err(format!("{s}: witness found but not frozen as a fixture")),
                Err(e) => pending.push(format!("{s} ({e})")),
            },
        }
    }
    check(
        pending.is_empty(),
        format!(
            "example class certified; {replayed} replayed; pending: {}",
            pending.join("; ")
        ),
    )?;
    Ok(format!(
        "example class certified; {replayed} classes replayed from fixtures"
    ))
}

fn main() {
    // `cargo test -- --list` and filters come through here too.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [Criterion; 12] = [
        ("certificate suite", c1_certificates),
        ("linear relations", c2_relations),
        ("mutation soundness", c3_mutations),
        ("enumeration counts", c4_enumeration),
        ("exceptional list", c5_exceptional),
        ("known density value", c6_six_by_six),
        ("gradient theory", c7_gradients),
        ("Hessian consistency", c8_hessians),
        ("normalization", c9_normalization),
        ("flag semantics", c10_semantics),
        ("classification end-to-end", c11_scan),
        ("witness search", c12_witnesses),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let k = i + 1;
        match outcome {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                let tag = if KNOWN_RED.contains(&k) { " (known)" } else { "" };
                println!("criterion {k:>2} FAIL{tag}  {name}: {detail} [{secs:.1}s]");
                failed.insert(k);
            }
        }
    }
    let known: BTreeSet<usize> = KNOWN_RED.iter().copied().collect();
    if failed != known {
        eprintln!("failing criteria {failed:?} differ from the known set {known:?}");
        std::process::exit(1);
    }
    println!("{} of 12 criteria pass; red: {:?}", 12 - failed.len(), failed);
}
