use proptest::prelude::*;
use quasiperm_core::flag::{enumerate_flags, flag_product, product, FlagType, FlagVector};
use quasiperm_core::perm::{canonical_form, canonical_with_op};
use quasiperm_core::perturbation::{hessian, inertia, SymmetricForm};
use quasiperm_core::rational::{int, ratio, sum};
use quasiperm_core::step::{blend_polynomial, set_density_sum, step_densities, step_density};
use quasiperm_core::{PermSet, Permutation, Rational, RationalMatrix, SymmetryOp};

/// Birkhoff point `Σ w_i P_i / Σ w_i` from lex ranks and positive weights.
fn birkhoff(n: usize, terms: &[(usize, u8)]) -> RationalMatrix {
    let total: i64 = terms.iter().map(|&(_, w)| w as i64).sum();
    let mut rows = vec![vec![Rational::from_integer(0.into()); n]; n];
    for &(rank, w) in terms {
        let sigma = Permutation::from_lex_rank(n, rank % factorial(n));
        for j in 1..=n {
            rows[j - 1][sigma.at(j) - 1] += ratio(w as i64, total);
        }
    }
    RationalMatrix::new(rows).unwrap()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn matrix(max_order: usize) -> impl Strategy<Value = RationalMatrix> {
    (1..=max_order, prop::collection::vec((0usize..720, 1u8..6), 1..4))
        .prop_map(|(n, terms)| birkhoff(n, &terms))
}

fn perm_set() -> impl Strategy<Value = PermSet> {
    (0u32..1 << 24).prop_map(PermSet::from_mask)
}

fn op() -> impl Strategy<Value = SymmetryOp> {
    (0usize..8).prop_map(|i| SymmetryOp::ALL[i])
}

fn perm(k: usize) -> impl Strategy<Value = Permutation> {
    (0..factorial(k)).prop_map(move |r| Permutation::from_lex_rank(k, r))
}

fn flag_vector(t: FlagType, k: usize) -> impl Strategy<Value = FlagVector> {
    let flags = enumerate_flags(t, k);
    let len = flags.len();
    prop::collection::vec((0..len, -3i64..4), 1..4).prop_map(move |terms| {
        let mut v = FlagVector::zero(t);
        for (i, c) in terms {
            if c != 0 {
                v.add_term(flags[i].clone(), int(c)).unwrap();
            }
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn densities_sum_to_one(a in matrix(5), k in 1usize..=4) {
        prop_assert_eq!(sum(&step_densities(&a, k).unwrap()), int(1));
    }

    #[test]
    fn blowup_keeps_densities(a in matrix(3), m in 2usize..=3) {
        prop_assert_eq!(step_densities(&a.blowup(m), 4).unwrap(), step_densities(&a, 4).unwrap());
    }

    #[test]
    fn symmetries_act_on_matrices(a in matrix(4), g in op(), pi in perm(4)) {
        prop_assert_eq!(
            step_density(&a.apply_symmetry(g), &g.apply(&pi)).unwrap(),
            step_density(&a, &pi).unwrap()
        );
    }

    #[test]
    fn canonical_form_is_an_orbit_invariant(s in perm_set(), g in op(), comp in any::<bool>()) {
        let image = if comp { s.apply_symmetry(g).complement() } else { s.apply_symmetry(g) };
        prop_assert_eq!(canonical_form(image, true), canonical_form(s, true));
        prop_assert_eq!(canonical_form(s.apply_symmetry(g), false), canonical_form(s, false));
        let (rep, h, c) = canonical_with_op(s, true);
        let moved = s.apply_symmetry(h);
        prop_assert_eq!(if c { moved.complement() } else { moved }, rep);
    }

    #[test]
    fn set_text_round_trips(s in perm_set()) {
        prop_assume!(!s.is_empty());
        prop_assert_eq!(s.to_string().parse::<PermSet>().unwrap(), s);
    }

    #[test]
    fn inertia_is_congruence_invariant(
        entries in prop::collection::vec(-4i64..5, 10),
        upper in prop::collection::vec(-3i64..4, 6),
        diag in prop::collection::vec(prop_oneof![Just(1i64), Just(-2), Just(3)], 4),
    ) {
        let mut rows = vec![vec![int(0); 4]; 4];
        let mut it = entries.iter();
        for a in 0..4 {
            for b in a..4 {
                let v = int(*it.next().unwrap());
                rows[a][b] = v.clone();
                rows[b][a] = v;
            }
        }
        let m = SymmetricForm::new(rows).unwrap();
        let mut p = vec![vec![int(0); 4]; 4];
        let mut it = upper.iter();
        for a in 0..4 {
            p[a][a] = int(diag[a]);
            for b in a + 1..4 {
                p[a][b] = int(*it.next().unwrap());
            }
        }
        prop_assert_eq!(inertia(&m.congruence(&p)), inertia(&m));
    }

    #[test]
    fn hessians_add_over_members(s in perm_set()) {
        let total = s
            .members()
            .iter()
            .map(|pi| hessian(PermSet::from_perms([pi]).unwrap(), 3))
            .fold(hessian(PermSet::empty(), 3), |acc, h| acc.add(&h));
        prop_assert_eq!(&total, &hessian(s, 3));
        prop_assert_eq!(hessian(s.complement(), 3), total.neg());
    }

    #[test]
    fn blend_interpolates_its_ends(a in matrix(3), b in matrix(3), s in perm_set()) {
        let f = blend_polynomial(s, &a, &b);
        prop_assert_eq!(f.eval(&int(1)), set_density_sum(&a, s));
        prop_assert_eq!(f.eval(&int(2)), set_density_sum(&b, s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flag_products_commute(
        t in prop_oneof![Just(FlagType::Tau1), Just(FlagType::Tau2)],
        i in 0usize..64,
        j in 0usize..64,
    ) {
        let flags = enumerate_flags(t, 3);
        let f1 = &flags[i % flags.len()];
        let f2 = &flags[j % flags.len()];
        prop_assert_eq!(flag_product(f1, f2).unwrap(), flag_product(f2, f1).unwrap());
    }

    #[test]
    fn flag_products_are_bilinear(
        v1 in flag_vector(FlagType::Tau1, 3),
        v2 in flag_vector(FlagType::Tau1, 3),
        w in flag_vector(FlagType::Tau1, 3),
        a in -3i64..4,
        b in -3i64..4,
    ) {
        let combo = v1.scale(&int(a)).add(&v2.scale(&int(b))).unwrap();
        let lhs = product(&combo, &w).unwrap();
        let rhs = product(&v1, &w).unwrap().scale(&int(a)).add(&product(&v2, &w).unwrap().scale(&int(b))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
