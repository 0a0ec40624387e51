//! Randomized invariants over the whole stack. Sizes stay small enough
//! that every oracle involved is exhaustive, so a failing case is a real
//! counterexample and shrinks to a readable one.

use proptest::prelude::*;

use qlrc::asymptotic::{asym_bounds, crossover_delta, AsymptoticPoint};
use qlrc::css::{css_compose, Purity};
use qlrc::cyclic::{bch_bound, cyclic_code_build, defining_set_make, is_dual_containing};
use qlrc::galois::{gcd, multiplicative_order, nth_root_of_unity, Elem, FieldSpec, Poly};
use qlrc::linear::{is_subcode, weight, LinearCode, Matrix};
use qlrc::locality::{
    cm_bound, kopt_exact, kopt_upper, locality_certificate, singleton_like_bound,
    LocalityOutcome, OraclePref,
};
use qlrc::{Budget, ExactRate};

const FIELD_ORDERS: [u64; 12] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27];

fn field_order() -> impl Strategy<Value = u64> {
    prop::sample::select(FIELD_ORDERS.as_slice())
}

/// (q, n) with gcd(n, q) = 1 and a splitting field small enough to build.
fn coprime_length() -> impl Strategy<Value = (u64, usize)> {
    (field_order(), 2usize..=15).prop_filter("coprime, small splitting field", |&(q, n)| {
        gcd(q, n as u64) == 1
            && multiplicative_order(q, n as u64)
                .map(|m| (q as u128).pow(m as u32) <= 1 << 16)
                .unwrap_or(false)
    })
}

/// Raw generator rows for a random code: field order, length, entries.
fn code_rows(
    q_max_index: usize,
    n_range: std::ops::RangeInclusive<usize>,
    k_max: usize,
) -> impl Strategy<Value = (u64, usize, Vec<Vec<u32>>)> {
    let orders = &FIELD_ORDERS[..q_max_index];
    (prop::sample::select(orders), n_range).prop_flat_map(move |(q, n)| {
        let rows = prop::collection::vec(prop::collection::vec(0..q as u32, n), 1..=k_max.min(n));
        (Just(q), Just(n), rows)
    })
}

fn build(q: u64, rows: Vec<Vec<u32>>) -> LinearCode {
    let field = FieldSpec::from_order(q).unwrap();
    LinearCode::from_generator(&field, Matrix::from_rows(rows).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn inverse_and_lagrange(q in field_order(), raw in 1u32..1 << 16) {
        let f = FieldSpec::from_order(q).unwrap();
        let a = 1 + raw % (f.order() - 1);
        let inv = f.inv(a).unwrap();
        prop_assert_eq!(f.mul(a, inv), 1);
        prop_assert_eq!(f.pow(a, (f.order() - 1) as u64), 1);
        prop_assert_eq!(f.pow(a, f.order() as u64), a);
    }

    #[test]
    fn poly_division_round_trips(
        q in field_order(),
        f_raw in prop::collection::vec(0u32..1 << 16, 0..8),
        g_raw in prop::collection::vec(0u32..1 << 16, 1..5),
        lead in 0u32..1 << 16,
    ) {
        let field = FieldSpec::from_order(q).unwrap();
        let f = Poly::new(f_raw.iter().map(|&c| c % field.order()).collect());
        let mut g_coeffs: Vec<Elem> = g_raw.iter().map(|&c| c % field.order()).collect();
        let last = g_coeffs.len() - 1;
        g_coeffs[last] = 1 + lead % (field.order() - 1);
        let g = Poly::new(g_coeffs);
        let (quot, rem) = field.poly_divmod(&f, &g).unwrap();
        let back = field.poly_add(&field.poly_mul(&quot, &g), &rem);
        prop_assert_eq!(back, f);
        let fits = rem.degree().map_or(true, |dr| dr < g.degree().unwrap());
        prop_assert!(fits, "remainder degree below divisor degree");
    }

    #[test]
    fn root_of_unity_has_exact_order((q, n) in coprime_length()) {
        let field = FieldSpec::from_order(q).unwrap();
        let root = nth_root_of_unity(&field, n).unwrap();
        prop_assert_eq!(root.alpha_pow(n as i64), 1);
        for d in 1..n {
            if n % d == 0 {
                prop_assert_ne!(root.alpha_pow(d as i64), 1, "proper divisor {} fixed", d);
            }
        }
    }

    #[test]
    fn generator_annihilates_dual((q, _, rows) in code_rows(6, 1..=8, 8)) {
        let code = build(q, rows);
        let dual = code.dual();
        let product = code
            .generator()
            .mul(&dual.generator().transpose(), code.field())
            .unwrap();
        prop_assert!(product.is_zero());
        prop_assert_eq!(dual.k(), code.n() - code.k());
        let double = dual.dual();
        prop_assert!(is_subcode(&double, &code, false).unwrap());
        prop_assert!(is_subcode(&code, &double, false).unwrap());
    }

    #[test]
    fn canonical_generator_is_idempotent((q, _, rows) in code_rows(6, 1..=8, 8)) {
        let code = build(q, rows);
        let field = FieldSpec::from_order(q).unwrap();
        let again = LinearCode::from_generator(&field, code.generator().clone()).unwrap();
        prop_assert_eq!(code.generator(), again.generator());
    }

    #[test]
    fn weight_oracles_agree((q, _, rows) in code_rows(4, 2..=7, 3)) {
        let code = build(q, rows);
        if code.k() == 0 {
            return Ok(());
        }
        let budget = Budget::new(1 << 22);
        let (d, witness) = code.min_weight(&budget).unwrap();
        prop_assert_eq!(weight(&witness), d);
        prop_assert!(code.contains(&witness).unwrap());
        let hits = code.low_weight_search(d, &Budget::new(1 << 22)).unwrap();
        prop_assert_eq!(hits.iter().map(|(w, _)| *w).min(), Some(d));
        for (w, word) in &hits {
            prop_assert_eq!(weight(word), *w);
            prop_assert!(code.contains(word).unwrap());
        }
    }

    #[test]
    fn relative_weight_dominates((q, _, rows) in code_rows(4, 2..=7, 4)) {
        let code = build(q, rows);
        if code.k() < 2 {
            return Ok(());
        }
        let field = FieldSpec::from_order(q).unwrap();
        let sub_rows: Vec<Vec<Elem>> = code
            .generator()
            .iter_rows()
            .take(code.k() - 1)
            .map(|r| r.to_vec())
            .collect();
        let sub =
            LinearCode::from_generator(&field, Matrix::from_rows(sub_rows).unwrap()).unwrap();
        prop_assert_eq!(sub.k(), code.k() - 1);
        let budget = Budget::new(1 << 22);
        let (rel, witness) = code.relative_min_weight(&sub, &budget).unwrap();
        let (d, _) = code.min_weight(&budget).unwrap();
        prop_assert!(rel >= d);
        prop_assert_eq!(weight(&witness), rel);
        prop_assert!(code.contains(&witness).unwrap());
        prop_assert!(!sub.contains(&witness).unwrap());
    }

    #[test]
    fn certified_codes_respect_classical_bounds((q, _, rows) in code_rows(4, 2..=7, 3)) {
        let code = build(q, rows);
        if code.k() == 0 || code.k() == code.n() {
            return Ok(());
        }
        let budget = Budget::new(1 << 22);
        let d = code.certify_distance(&budget).unwrap().value;
        let mut locality = None;
        for r in 1..code.n() {
            match locality_certificate(&code, r, &Budget::new(1 << 22)).unwrap() {
                LocalityOutcome::Certified(cert) => {
                    locality = Some(cert.r);
                    break;
                }
                LocalityOutcome::Refused { .. } => continue,
            }
        }
        let Some(r) = locality else { return Ok(()) };
        prop_assert!(d as i64 <= singleton_like_bound(code.n(), code.k(), r).unwrap());
        let (k_bound, _) = cm_bound(q, code.n(), d, r, OraclePref::Upper).unwrap();
        prop_assert!(code.k() <= k_bound);
    }

    #[test]
    fn kopt_oracles_ordered(
        q in prop::sample::select([2u64, 3].as_slice()),
        n in 1usize..=8,
        d in 1usize..=8,
    ) {
        prop_assume!(d <= n);
        prop_assume!((q as u128).pow(n as u32) <= 1 << 14);
        let exact = kopt_exact(q, n, d).unwrap();
        prop_assert!(kopt_upper(q, n, d) >= exact);
        if d < n {
            prop_assert!(kopt_exact(q, n, d + 1).unwrap() <= exact, "non-increasing in d");
        }
        if (q as u128).pow(n as u32 + 1) <= 1 << 14 {
            prop_assert!(kopt_exact(q, n + 1, d).unwrap() >= exact, "non-decreasing in n");
        }
    }

    #[test]
    fn cyclic_build_invariants(
        (q, n) in coprime_length(),
        picks in prop::collection::vec(0usize..200, 1..=3),
    ) {
        let seeds: Vec<usize> = picks.iter().map(|&s| s % n).collect();
        let ds = defining_set_make(n, q, &seeds).unwrap();
        let field = FieldSpec::from_order(q).unwrap();
        let built = cyclic_code_build(&field, &ds).unwrap();
        prop_assert_eq!(built.code.k(), n - ds.len());
        let matrix_level = is_subcode(&built.code.dual(), &built.code, false).unwrap();
        prop_assert_eq!(is_dual_containing(&ds), matrix_level);
        if built.code.k() == 0 {
            return Ok(());
        }
        for row in built.code.generator().iter_rows() {
            let shifted: Vec<Elem> = (0..n).map(|j| row[(j + n - 1) % n]).collect();
            prop_assert!(built.code.contains(&shifted).unwrap(), "shift closure");
        }
        if built.code.word_count() <= 1 << 16 {
            let (d, _) = built.code.min_weight(&Budget::new(1 << 17)).unwrap();
            prop_assert!(d >= bch_bound(&ds), "BCH bound is a lower bound");
        }
    }

    #[test]
    fn purity_matches_ingredient_distances(
        (q, _, rows) in code_rows(2, 3..=6, 5),
        keep in 1usize..=4,
    ) {
        let c2 = build(q, rows);
        if c2.k() < 2 || c2.k() == c2.n() {
            return Ok(());
        }
        let field = FieldSpec::from_order(q).unwrap();
        let s = 1 + (keep - 1) % (c2.k() - 1);
        let sub_rows: Vec<Vec<Elem>> = c2
            .generator()
            .iter_rows()
            .take(s)
            .map(|r| r.to_vec())
            .collect();
        let c1 = LinearCode::from_parity(&field, Matrix::from_rows(sub_rows).unwrap()).unwrap();
        let rebuilt = build(q, c2.generator().iter_rows().map(|r| r.to_vec()).collect());
        let qc = css_compose(c1, rebuilt, &Budget::new(1 << 22)).unwrap();
        prop_assert!(qc.is_certified());
        let d1 = qc.c1().distance_cert().unwrap().value;
        let d2 = qc.c2().distance_cert().unwrap().value;
        let pure = qc.purity() == Some(Purity::Pure);
        prop_assert_eq!(pure, qc.delta() == d1.min(d2), "purity per relative weights");
    }

    #[test]
    fn rate_lines_affine_and_ordered(
        r in 1usize..=6,
        q in field_order(),
        picks in prop::collection::btree_set(0i64..=200, 3),
        offset in 1i64..=50,
    ) {
        let xs: Vec<ExactRate> = picks.iter().map(|&a| ExactRate::new(a, 1000)).collect();
        let pts: Vec<AsymptoticPoint<ExactRate>> = xs
            .iter()
            .map(|d| asym_bounds::<ExactRate>(r, q, *d).unwrap())
            .collect();
        for p in &pts {
            prop_assert!(p.r_cm <= p.r_dist, "oracle line below distance line");
        }
        // Inside delta <= 1/5 none of the lines has clamped yet, so exact
        // slopes over distinct sample pairs must coincide.
        let lines: Vec<fn(&AsymptoticPoint<ExactRate>) -> ExactRate> =
            vec![|p| p.r_dim, |p| p.r_dist, |p| p.r_cm];
        for f in lines {
            let s01 = (f(&pts[1]) - f(&pts[0])) / (xs[1] - xs[0]);
            let s12 = (f(&pts[2]) - f(&pts[1])) / (xs[2] - xs[1]);
            prop_assert_eq!(s01, s12, "affine in delta");
        }
        // Some (r, q) pairs have no positive-rate crossover; the ordering
        // claim only binds where one exists inside the unit interval.
        if let Ok(cross) = crossover_delta::<ExactRate>(r, q) {
            let beyond = cross + ExactRate::new(offset, 100);
            if beyond <= ExactRate::new(1, 1) {
                let p = asym_bounds::<ExactRate>(r, q, beyond).unwrap();
                prop_assert!(p.r_cm <= p.r_dim, "oracle below dimension line past crossover");
            }
        }
    }

    #[test]
    fn budget_accounting_is_exact(
        max in 1u64..10_000,
        charges in prop::collection::vec(0u128..20_000, 0..20),
    ) {
        let budget = Budget::new(max);
        let mut used = 0u64;
        for c in charges {
            if budget.charge(c).is_ok() {
                used += c as u64;
                prop_assert!(used <= max);
            } else {
                prop_assert!(used as u128 + c > max as u128, "refusal only past the cap");
            }
            prop_assert_eq!(budget.used(), used, "refused charges leave no trace");
        }
        prop_assert_eq!(budget.remaining(), max - used);
    }
}
