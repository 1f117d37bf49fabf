use ellrank::analyze::{analyze, AnalyzeOptions};
use ellrank::certify::{reduce_mod_ell, stabilize_lattice, RationalMat};
use ellrank::corpus;
use ellrank::gf::{make_field, Field, FieldElement, Mat};
use ellrank::grp::{composition_series, enumerate, Codec};
use ellrank::instance::{instance_to_json, parse_instance};
use ellrank::liealg::{nil_exp, nil_log};
use ellrank::lietypes::{rank_profile, RankProfile};
use proptest::prelude::*;

fn field_params() -> impl Strategy<Value = (u64, usize)> {
    prop::sample::select(vec![(5u64, 1usize), (7, 1), (11, 1), (13, 1), (5, 2), (7, 2), (5, 3)])
}

fn mat(k: &Field, n: usize, raw: &[u32]) -> Mat {
    let q = k.order() as u32;
    Mat::from_entries(n, raw.iter().take(n * n).map(|&v| FieldElement(v % q)).collect()).unwrap()
}

fn strictly_upper(k: &Field, n: usize, raw: &[u32]) -> Mat {
    let q = k.order() as u32;
    let mut m = Mat::zero(n);
    let mut it = raw.iter();
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, FieldElement(it.next().copied().unwrap_or(1) % q));
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_arithmetic((ell, f) in field_params(), a in 0u32..1 << 20, b in 0u32..1 << 20, c in 0u32..1 << 20) {
        let k = make_field(ell, f).unwrap();
        let q = k.order() as u32;
        let (a, b, c) = (FieldElement(a % q), FieldElement(b % q), FieldElement(c % q));
        prop_assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
        prop_assert_eq!(k.mul(a, b), k.mul(b, a));
        if !a.is_zero() {
            prop_assert_eq!(k.mul(a, k.inv(a).unwrap()), FieldElement::ONE);
            prop_assert_eq!(k.pow(a, k.order() - 1), FieldElement::ONE);
        }
    }

    #[test]
    fn weil_restriction_is_multiplicative((ell, f) in field_params(), n in 1usize..4, raw in prop::collection::vec(any::<u32>(), 18)) {
        let k = make_field(ell, f).unwrap();
        let a = mat(&k, n, &raw[..9]);
        let b = mat(&k, n, &raw[9..]);
        let lhs = k.weil_restrict(&k.mat_mul(&a, &b));
        let pf = k.prime_field();
        let rhs = pf.mat_mul(&k.weil_restrict(&a), &k.weil_restrict(&b));
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(k.weil_unrestrict(&lhs), k.mat_mul(&a, &b));
    }

    #[test]
    fn exp_and_log_invert((ell, f) in field_params(), n in 1usize..5, raw in prop::collection::vec(any::<u32>(), 6), t in any::<u32>()) {
        let k = make_field(ell, f).unwrap();
        let x = strictly_upper(&k, n, &raw);
        let t = FieldElement(t % k.order() as u32);
        let u = nil_exp(&k, &x, t).unwrap();
        prop_assert_eq!(nil_log(&k, &u).unwrap(), k.mat_scale(t, &x));
        // one-parameter subgroup
        let u2 = nil_exp(&k, &x, k.add(t, t)).unwrap();
        prop_assert_eq!(k.mat_mul(&u, &u), u2);
    }

    #[test]
    fn packed_product_matches((ell, n) in prop::sample::select(vec![(5u64, 2usize), (7, 3), (11, 2), (13, 4)]), raw in prop::collection::vec(any::<u32>(), 32)) {
        let k = Field::prime(ell).unwrap();
        let codec = Codec::new(n, ell).unwrap();
        let a = mat(&k, n, &raw[..16]);
        let b = mat(&k, n, &raw[16..]);
        prop_assert_eq!(codec.decode(codec.encode(&a)), a.clone());
        prop_assert_eq!(codec.decode(codec.mul(codec.encode(&a), codec.encode(&b))), k.mat_mul(&a, &b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profile_is_additive_over_direct_products(i in 0usize..5, j in 0usize..5) {
        let groups = [
            corpus::sl(2, 5, 1),
            corpus::sl(2, 7, 1),
            corpus::borel(2, 7),
            corpus::torus(3, 5),
            corpus::principal_sl2(3, 7),
        ];
        let profile = |g| {
            let e = enumerate(g, 1 << 20).unwrap();
            composition_series(&e, e.ell()).unwrap()
        };
        let (a, b) = (&groups[i], &groups[j]);
        prop_assume!(a.ell() == b.ell());
        let fa = profile(a);
        let fb = profile(b);
        let ell = a.ell();
        let joint: Vec<_> = fa.iter().chain(&fb).cloned().collect();
        let sum: RankProfile = rank_profile(&fa, ell).add(&rank_profile(&fb, ell));
        prop_assert_eq!(rank_profile(&joint, ell), sum);
    }

    #[test]
    fn conjugation_leaves_the_analysis_alone(which in 0usize..4, raw in prop::collection::vec(any::<u32>(), 16)) {
        let g = [
            corpus::sl(2, 7, 1),
            corpus::borel(3, 7),
            corpus::principal_sl2(3, 7),
            corpus::levi_21(7),
        ][which].clone();
        let k = g.field.clone();
        let c = mat(&k, g.n, &raw);
        prop_assume!(k.is_invertible(&c));
        let h = g.conjugate(&c).unwrap();
        let opts = AnalyzeOptions::default();
        let a = analyze(&g, &opts).unwrap();
        let b = analyze(&h, &opts).unwrap();
        prop_assert_eq!(a.profile, b.profile);
        prop_assert_eq!(a.envelope, b.envelope);
    }

    #[test]
    fn instance_files_round_trip(which in 0usize..5) {
        let g = [
            corpus::sl(2, 7, 1),
            corpus::sl(2, 5, 2),
            corpus::block_sl2_sl2(11),
            corpus::borel(3, 5),
            corpus::su3(5),
        ][which]
            .clone();
        let v = instance_to_json(&g);
        let parsed = parse_instance(&serde_json::to_string_pretty(&v).unwrap()).unwrap();
        let ellrank::instance::Instance::Finite(h) = parsed.instance else {
            panic!("finite instance expected");
        };
        prop_assert_eq!(&h.generators, &g.generators);
        prop_assert_eq!(&h.ambient, &g.ambient);
        prop_assert_eq!(parse_instance(&v.to_string()).unwrap().digest, parsed.digest);
    }

    #[test]
    fn lattice_profile_ignores_max_iter(k in 1u32..3, extra in 0usize..8) {
        // SL_2(Z) unipotents conjugated by diag(7^k, 1)
        let p = 7i64.pow(k);
        let gens = [
            RationalMat::from_fracs(&[&[(1, 1), (1, p)], &[(0, 1), (1, 1)]]),
            RationalMat::from_fracs(&[&[(1, 1), (0, 1)], &[(p, 1), (1, 1)]]),
        ];
        let short = stabilize_lattice(&gens, 7, 4 * k as usize).unwrap();
        let long = stabilize_lattice(&gens, 7, 4 * k as usize + extra + 8).unwrap();
        let profile = |st: &ellrank::certify::StableLattice| {
            let g = reduce_mod_ell(&st.generators, 7).unwrap();
            analyze(&g, &AnalyzeOptions::default()).unwrap().profile.unwrap().rank_profile()
        };
        prop_assert_eq!(profile(&short), profile(&long));
    }
}
