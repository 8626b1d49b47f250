use proptest::prelude::*;

use slcover::cover::{CoverClass, LiftMode};
use slcover::curves::{canonical_form, default_autos, enumerate_scc, validate_auto};
use slcover::mobius::{classify_psl, normalize, Matrix2};
use slcover::surface::{format_signs, parse_signs};
use slcover::word::{Generator, Letter, Word};
use slcover::{mw_bounds, special_lift, Cover, Matrix, MwVerdict, Representation, Surface};

fn letter() -> impl Strategy<Value = Letter> {
    (0usize..3, 1usize..3, any::<bool>()).prop_map(|(k, i, inv)| {
        let g = match k {
            0 => Generator::A(i),
            1 => Generator::B(i),
            _ => Generator::C(i),
        };
        Letter::new(g, inv)
    })
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(), 0..16).prop_map(Word)
}

fn sl() -> impl Strategy<Value = Matrix> {
    (0.0..std::f64::consts::TAU, 0.0..1.5f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(a, s, b)| Matrix::rotation(a) * Matrix::stretch(s.exp()) * Matrix::rotation(b))
}

fn cover() -> impl Strategy<Value = Cover> {
    (sl(), -3i64..=3).prop_map(|(m, k)| Cover::new(normalize(m).unwrap(), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn canonical_form_is_a_conjugacy_invariant(w in word(), k in 0usize..16) {
        let c = canonical_form(&w);
        prop_assert_eq!(canonical_form(&c), c.clone());
        prop_assert_eq!(canonical_form(&w.inverse()), c.clone());
        let r = w.cyclically_reduced();
        if !r.is_empty() {
            let k = k % r.len();
            let rot = Word(r.letters()[k..].iter().chain(&r.letters()[..k]).copied().collect());
            prop_assert_eq!(canonical_form(&rot), c.clone());
        }
        let x = Word(vec![Letter::new(Generator::A(1), false)]);
        let conj = Word::product([&x, &w, &x.inverse()]);
        prop_assert_eq!(canonical_form(&conj), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn cover_product_projects_and_associates(x in cover(), y in cover(), z in cover()) {
        let xy = x.mul(&y).unwrap();
        let b = normalize(x.base().rep() * y.base().rep()).unwrap();
        prop_assert!(xy.base().approx_eq(&b, 1e-9));
        let l = xy.mul(&z).unwrap();
        let r = x.mul(&y.mul(&z).unwrap()).unwrap();
        prop_assert_eq!(l.index(), r.index());
        let e = x.mul(&x.inverse().unwrap()).unwrap();
        prop_assert_eq!(e.classify().unwrap(), CoverClass::Center(0));
    }

    #[test]
    fn lift_is_monotone_and_periodic(x in cover(), t in -3.0..3.0f64) {
        let pi = std::f64::consts::PI;
        prop_assert!((x.eval(t + pi) - x.eval(t) - pi).abs() < 1e-9);
        prop_assert!(x.eval(t + 1e-3) > x.eval(t));
    }

    #[test]
    fn flip_mirrors_the_class(x in cover()) {
        if let Ok(c) = x.classify() {
            prop_assert_eq!(x.flipped().classify().unwrap(), c.mirrored());
        }
    }

    #[test]
    fn special_lift_lands_in_index_zero(m in sl()) {
        let p = normalize(m).unwrap();
        let l = special_lift(&p, LiftMode::Eval).unwrap();
        match l.classify().unwrap() {
            CoverClass::Ell(n) => prop_assert_eq!(n, 1),
            c => prop_assert_eq!(c.index(), 0),
        }
    }

    #[test]
    fn normalize_is_sign_blind(m in sl()) {
        let a = normalize(m).unwrap();
        prop_assert_eq!(a, normalize(-m).unwrap());
        prop_assert_eq!(classify_psl(&a), classify_psl(&normalize(-m).unwrap()));
    }

    #[test]
    fn signs_round_trip(s in prop::collection::vec(prop_oneof![Just(-1i8), Just(0i8), Just(1i8)], 1..8)) {
        prop_assert_eq!(parse_signs(&format_signs(&s)).unwrap(), s);
    }

    #[test]
    fn milnor_wood_verdict_is_flip_symmetric(
        g in 0usize..3, p in 1usize..6, n in -6i64..=6,
        s in prop::collection::vec(prop_oneof![Just(-1i8), Just(0i8), Just(1i8)], 6),
    ) {
        let s = &s[..p];
        let neg: Vec<i8> = s.iter().map(|x| -x).collect();
        prop_assert_eq!(mw_bounds(g, p, n, s), mw_bounds(g, p, -n, &neg));
    }

    #[test]
    fn representation_json_round_trips(a in sl(), b in sl(), c in sl()) {
        let s = Surface::new(1, 2).unwrap();
        let rep = Representation::new(s, vec![normalize(a).unwrap(), normalize(b).unwrap(), normalize(c).unwrap()]).unwrap();
        let back = Representation::from_json_str(&rep.to_json_string()).unwrap();
        prop_assert_eq!(back, rep);
    }
}

#[test]
fn matrix_json_is_a_row_major_tuple() {
    let m: Matrix2<f64> = serde_json::from_str("[2.0, 1.0, 1.0, 1.0]").unwrap();
    assert_eq!(m.to_f64(), [2.0, 1.0, 1.0, 1.0]);
    assert_eq!(serde_json::to_string(&m).unwrap(), "[2.0,1.0,1.0,1.0]");
}

#[test]
fn default_automorphisms_are_valid() {
    for (g, p) in [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 1), (2, 2)] {
        let s = Surface::new(g, p).unwrap();
        for f in default_autos(&s) {
            assert!(validate_auto(&f, &s), "{s}");
        }
    }
}

#[test]
fn enumeration_grows_and_excludes_trivial_classes() {
    let s = Surface::new(0, 4).unwrap();
    let d2 = enumerate_scc(&s, 2).curves.len();
    let d3 = enumerate_scc(&s, 3);
    assert!(d3.curves.len() > d2);
    assert!(d3.curves.iter().all(|c| !c.canonical().is_empty()));
}

#[test]
fn mw_examples() {
    assert_eq!(mw_bounds(0, 4, 1, &[1, 1, 1, -1]), MwVerdict::FeasibleSufficient);
    assert_eq!(mw_bounds(0, 3, 1, &[1, 1, 0]), MwVerdict::FeasibleIff);
    assert_eq!(mw_bounds(0, 3, 0, &[1, 1, 0]), MwVerdict::Infeasible);
    assert_eq!(mw_bounds(0, 3, 1, &[1, 1, 1]), MwVerdict::Unknown);
}
