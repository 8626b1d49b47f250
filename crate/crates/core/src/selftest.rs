//! Randomized property suites: cover group laws, image theorems, sign rules, Euler-class
//! checks and solver/table agreement. Each check counts trials and failures.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::audit::check_additivity;
use crate::constructors::{
    build_rep, commutator_reachable, product_reachable, solve_commutator, solve_product, BuildRequest, FactorKind,
};
use crate::cover::{special_lift, CoverClass, LiftMode};
use crate::error::Error;
use crate::mobius::{axes_cross, classify_psl, normalize, PslType};
use crate::sampling::{
    derive_seed, random_cover, random_elliptic, random_hyperbolic, random_in_class, random_parabolic, random_psl, rng,
    SeededRng,
};
use crate::surface::{Representation, Surface};
use crate::word::Generator;
use crate::{Cover, Matrix, Psl};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl Check {
    fn new(name: &str) -> Check {
        Check { name: name.to_string(), trials: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    fn fail(&mut self, detail: String) {
        self.record(false, || detail);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

/// Trial counts for each suite.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub group_laws: usize,
    pub shifts: usize,
    pub commutators: usize,
    pub products: usize,
    pub signs: usize,
    pub euler: usize,
    pub built: usize,
    pub mobius: usize,
    pub queries: usize,
}

impl Budget {
    pub const FULL: Budget = Budget {
        group_laws: 10_000,
        shifts: 1_000,
        commutators: 10_000,
        products: 1_000,
        signs: 1_000,
        euler: 1_000,
        built: 100,
        mobius: 10_000,
        queries: 1_000,
    };

    pub const QUICK: Budget = Budget {
        group_laws: 500,
        shifts: 100,
        commutators: 500,
        products: 100,
        signs: 100,
        euler: 100,
        built: 6,
        mobius: 500,
        queries: 200,
    };
}

pub fn run_all(budget: Budget, seed: u64) -> Vec<Check> {
    let mut out = vec![calibration()];
    out.extend(mobius_checks(budget.mobius, derive_seed(seed, 1)));
    out.extend(cover_laws(budget.group_laws, budget.shifts, derive_seed(seed, 2)));
    out.extend(image_theorems(budget.commutators, budget.products, derive_seed(seed, 3)));
    out.extend(sign_rules(budget.signs, derive_seed(seed, 4)));
    out.extend(euler_checks(budget.euler, budget.built, derive_seed(seed, 5)));
    out.extend(reachability(budget.queries, derive_seed(seed, 6)));
    out
}

fn ell_window(n: i64) -> i64 {
    if n > 0 {
        n - 1
    } else {
        n
    }
}

fn ell_from_window(w: i64) -> i64 {
    if w >= 0 {
        w + 1
    } else {
        w
    }
}

/// Class of z^m x, written out from the component definitions.
fn expected_shift(c: CoverClass, m: i64) -> CoverClass {
    match c {
        CoverClass::Hyp(n) => CoverClass::Hyp(n + m),
        CoverClass::ParPlus(n) => CoverClass::ParPlus(n + m),
        CoverClass::ParMinus(n) => CoverClass::ParMinus(n + m),
        CoverClass::Center(n) => CoverClass::Center(n + m),
        CoverClass::Ell(n) => CoverClass::Ell(ell_from_window(ell_window(n) + m)),
    }
}

pub fn mobius_checks(n: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut cross = Check::new("mobius/axes-cross-vs-commutator-trace");
    while cross.trials < n {
        let (p, q) = (random_hyperbolic(&mut r), random_hyperbolic(&mut r));
        let (a, b) = (p.rep(), q.rep());
        let t = (a * b * a.inverse() * b.inverse()).trace();
        if (t - 2.0).abs() < 1e-8 {
            continue;
        }
        match axes_cross(&p, &q) {
            Ok(x) => cross.record(x == (t < 2.0), || format!("{p} {q}: cross {x}, trace {t}")),
            Err(e) => cross.fail(format!("{p} {q}: {e}")),
        }
    }
    let mut conj = Check::new("mobius/classify-conjugation-invariant");
    let mut norm = Check::new("mobius/normalize-idempotent");
    for i in 0..n / 10 {
        let p = match i % 3 {
            0 => random_hyperbolic(&mut r),
            1 => random_elliptic(&mut r),
            _ => {
                let sign = if r.gen_bool(0.5) { 1 } else { -1 };
                random_parabolic(&mut r, sign)
            }
        };
        let g = random_psl(&mut r);
        let (a, b) = (classify_psl(&p), classify_psl(&p.conj(&g)));
        conj.record(a == b, || format!("{p}: {a} vs {b}"));
        let m = crate::sampling::random_sl(&mut r, 1.5);
        let ok = match (normalize(m), normalize(-m)) {
            (Ok(x), Ok(y)) => normalize(x.rep()).map(|z| z.approx_eq(&x, 1e-14)).unwrap_or(false) && x == y,
            _ => false,
        };
        norm.record(ok, || format!("{m}"));
    }
    vec![cross, conj, norm]
}

pub fn cover_laws(n: usize, shifts: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut hom = Check::new("cover/homomorphism");
    let mut assoc = Check::new("cover/associativity");
    let mut inv = Check::new("cover/inverse");
    let mut conj = Check::new("cover/conjugation-invariance");
    let mut parity = Check::new("cover/hyperbolic-trace-parity");
    for _ in 0..n {
        let (x, y, z) = (random_cover(&mut r), random_cover(&mut r), random_cover(&mut r));
        let mut step = || -> crate::Result<()> {
            let xy = x.mul(&y)?;
            let b = normalize(x.base().rep() * y.base().rep())?;
            hom.record(xy.base().approx_eq(&b, 1e-9), || format!("{x} * {y} -> {xy}"));
            let l = xy.mul(&z)?;
            let rr = x.mul(&y.mul(&z)?)?;
            assoc.record(l.index() == rr.index() && l.base().approx_eq(&rr.base(), 1e-9), || {
                format!("({x} {y}) {z}: {l} vs {rr}")
            });
            let e = x.mul(&x.inverse()?)?;
            inv.record(e.index() == 0 && e.base().is_identity(1e-9), || format!("{x}: x x^-1 = {e}"));
            let c = x.classify()?;
            let cc = x.conj(&y)?.classify()?;
            conj.record(c == cc, || format!("{x} by {y}: {c} vs {cc}"));
            if let CoverClass::Hyp(k) = c {
                let t = x.sl_projection().trace();
                let want = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                parity.record(t * want > 0.0, || format!("{x} in {c}: trace {t}"));
            }
            Ok(())
        };
        if let Err(e) = step() {
            hom.fail(format!("{x} {y} {z}: {e}"));
        }
    }
    let mut shift = Check::new("cover/central-shift");
    for _ in 0..shifts {
        let x = random_cover(&mut r);
        let m = r.gen_range(-3..=3);
        let res = Cover::z_pow(m).mul(&x).and_then(|zx| Ok((x.classify()?, zx.classify()?)));
        match res {
            Ok((c, d)) => shift.record(d == expected_shift(c, m), || format!("z^{m} {x}: {c} -> {d}")),
            Err(e) => shift.fail(format!("z^{m} {x}: {e}")),
        }
    }
    for k in -3..=3 {
        let c = Cover::z_pow(k).classify();
        shift.record(c == Ok(CoverClass::Center(k)), || format!("z^{k}: {c:?}"));
    }
    vec![hom, assoc, inv, conj, shift, parity]
}

/// The image of the commutator map, listed component by component.
fn in_commutator_image(c: CoverClass) -> bool {
    use CoverClass::*;
    match c {
        Hyp(n) => (-1..=1).contains(&n),
        Ell(n) => n == 1 || n == -1,
        ParPlus(n) => n == -1 || n == 0,
        ParMinus(n) => n == 0 || n == 1,
        Center(n) => n == 0,
    }
}

struct ProductItem {
    name: &'static str,
    left: CoverClass,
    right: CoverClass,
    want: PslType,
    allowed: &'static [CoverClass],
}

fn product_items() -> Vec<ProductItem> {
    use CoverClass::*;
    use PslType::Hyperbolic as H;
    let e = PslType::Elliptic;
    vec![
        ProductItem { name: "hyp-hyp-hyp", left: Hyp(0), right: Hyp(0), want: H, allowed: &[Hyp(-1), Hyp(0), Hyp(1)] },
        ProductItem { name: "parplus-hyp-hyp", left: ParPlus(0), right: Hyp(0), want: H, allowed: &[Hyp(0), Hyp(1)] },
        ProductItem { name: "parminus-hyp-hyp", left: ParMinus(0), right: Hyp(0), want: H, allowed: &[Hyp(0), Hyp(-1)] },
        ProductItem { name: "parplus-parplus-hyp", left: ParPlus(0), right: ParPlus(0), want: H, allowed: &[Hyp(1)] },
        ProductItem { name: "parplus-parminus-hyp", left: ParPlus(0), right: ParMinus(0), want: H, allowed: &[Hyp(0)] },
        ProductItem { name: "parminus-parplus-hyp", left: ParMinus(0), right: ParPlus(0), want: H, allowed: &[Hyp(0)] },
        ProductItem { name: "parminus-parminus-hyp", left: ParMinus(0), right: ParMinus(0), want: H, allowed: &[Hyp(-1)] },
        ProductItem { name: "parplus-parplus-ell", left: ParPlus(0), right: ParPlus(0), want: e, allowed: &[Ell(1)] },
        ProductItem { name: "parminus-parminus-ell", left: ParMinus(0), right: ParMinus(0), want: e, allowed: &[Ell(-1)] },
        ProductItem { name: "parplus-ell1-ell", left: ParPlus(0), right: Ell(1), want: e, allowed: &[Ell(1)] },
        ProductItem { name: "parminus-ell1-ell", left: ParMinus(0), right: Ell(1), want: e, allowed: &[Ell(1)] },
        ProductItem { name: "hyp-hyp-ell", left: Hyp(0), right: Hyp(0), want: e, allowed: &[Ell(-1), Ell(1)] },
        ProductItem { name: "hyp-parplus-ell", left: Hyp(0), right: ParPlus(0), want: e, allowed: &[Ell(1)] },
        ProductItem { name: "hyp-parminus-ell", left: Hyp(0), right: ParMinus(0), want: e, allowed: &[Ell(-1)] },
        ProductItem { name: "hyp-ell1-ell", left: Hyp(0), right: Ell(1), want: e, allowed: &[Ell(1)] },
        ProductItem { name: "ellminus1-ell1-ell", left: Ell(-1), right: Ell(1), want: e, allowed: &[Ell(-1), Ell(1)] },
    ]
}

pub fn image_theorems(commutators: usize, products: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut comm = Check::new("image/commutator");
    for _ in 0..commutators {
        let (x, y) = (random_cover(&mut r), random_cover(&mut r));
        match x.commutator(&y).and_then(|c| c.classify()) {
            Ok(c) => comm.record(in_commutator_image(c), || format!("[{x}, {y}] in {c}")),
            Err(e) => comm.fail(format!("[{x}, {y}]: {e}")),
        }
    }
    let mut out = vec![comm];
    for item in product_items() {
        let mut chk = Check::new(&format!("image/product/{}", item.name));
        let mut attempts = 0;
        while chk.trials < products && attempts < 1000 * products {
            attempts += 1;
            let x = random_in_class(&mut r, item.left);
            let y = random_in_class(&mut r, item.right);
            let xy = match x.mul(&y) {
                Ok(v) => v,
                Err(e) => {
                    chk.fail(format!("{x} {y}: {e}"));
                    continue;
                }
            };
            // Condition away from the parabolic band so the type is unambiguous.
            let t = xy.base().abs_trace();
            if classify_psl(&xy.base()) != item.want || (t - 2.0).abs() < 1e-6 {
                continue;
            }
            match xy.classify() {
                Ok(c) => chk.record(item.allowed.contains(&c), || format!("{x} * {y} in {c}")),
                Err(e) => chk.fail(format!("{x} * {y}: {e}")),
            }
        }
        if chk.trials < products {
            chk.fail(format!("only {} conditioned samples in {attempts} attempts", chk.trials));
        }
        out.push(chk);
    }
    out
}

fn sgn(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn sign_rules(n: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut par = Check::new("signs/parabolic-offdiagonal");
    let mut ell = Check::new("signs/elliptic-offdiagonal");
    for k in -2i64..=2 {
        for class in [CoverClass::ParPlus(k), CoverClass::ParMinus(k), CoverClass::Ell(k)] {
            if class == CoverClass::Ell(0) {
                continue;
            }
            for _ in 0..n {
                let x = random_in_class(&mut r, class);
                let c = match x.classify() {
                    Ok(c) => c,
                    Err(e) => {
                        par.fail(format!("{x}: {e}"));
                        continue;
                    }
                };
                let m = x.sl_projection();
                let (b, c21) = (sgn(m.a12), sgn(m.a21));
                let odd = k.rem_euclid(2) == 1;
                match c {
                    CoverClass::ParPlus(_) | CoverClass::ParMinus(_) => {
                        let s = if matches!(c, CoverClass::ParPlus(_)) { 1 } else { -1 };
                        let from_entries = if b != 0 { b } else { -c21 };
                        let want = if odd { -s } else { s };
                        let ok = c == class && from_entries == want && (b != 0 || c21 != 0);
                        par.record(ok, || format!("{x} in {c} (generated {class}): a12 {}, a21 {}", m.a12, m.a21));
                    }
                    CoverClass::Ell(_) => {
                        let sn = k.signum();
                        let ok = c == class
                            && b != 0
                            && c21 != 0
                            && if odd { sn == b && sn == -c21 } else { sn == -b && sn == c21 };
                        ell.record(ok, || format!("{x} in {c} (generated {class}): a12 {}, a21 {}", m.a12, m.a21));
                    }
                    _ => par.fail(format!("{x}: unexpected class {c} for {class}")),
                }
            }
        }
    }
    vec![par, ell]
}

/// Euler class by an explicit cover product, with a/b lifts shifted by `shifts`.
fn euler_by_hand(rep: &Representation, shifts: &[i64]) -> crate::Result<i64> {
    let s = rep.surface();
    let mut acc = Cover::identity();
    for j in 1..=s.genus {
        let a = Cover::canonical(rep.image(Generator::A(j))?).times_z(shifts[2 * j - 2]);
        let b = Cover::canonical(rep.image(Generator::B(j))?).times_z(shifts[2 * j - 1]);
        let c = a.mul(&b)?.mul(&a.inverse()?)?.mul(&b.inverse()?)?;
        acc = acc.mul(&c)?;
    }
    for c in rep.peripherals()? {
        acc = acc.mul(&special_lift(&c, LiftMode::ClosureHyp0)?)?;
    }
    if !acc.base().is_identity(1e-7) {
        return Err(Error::RelatorNotCentral(acc.base().dist(&Psl::identity())));
    }
    Ok((acc.eval(0.0) / PI).round() as i64)
}

/// Random representation whose peripherals c_1..c_{p-1} are parabolic or hyperbolic and
/// whose implied c_p is hyperbolic.
fn random_hp_rep(r: &mut SeededRng, g: usize, p: usize) -> Representation {
    let s = Surface::new(g, p).expect("surface");
    loop {
        let mut images = Vec::new();
        for _ in 0..2 * g {
            images.push(random_psl(r));
        }
        for _ in 1..p {
            images.push(match r.gen_range(0..3) {
                0 => random_hyperbolic(r),
                1 => random_parabolic(r, 1),
                _ => random_parabolic(r, -1),
            });
        }
        let rep = Representation::new(s, images).expect("image count");
        let cp = rep.peripheral(p).expect("c_p");
        if classify_psl(&cp) == PslType::Hyperbolic && cp.abs_trace() > 2.0 + 1e-6 {
            return rep;
        }
    }
}

pub fn euler_checks(n: usize, built: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let mut forced = Check::new("euler/pants-forced-values");
    let s03 = Surface::new(0, 3).expect("surface");
    for (c2, want_e, want_s) in [(Matrix::lower(-5.0), 1, vec![1, 1, 0]), (Matrix::lower(5.0), 0, vec![1, -1, 0])] {
        let rep = Representation::new(s03, vec![Psl::from_unit(Matrix::upper(1.0)), Psl::from_unit(c2)]).unwrap();
        let got = rep.euler_class().and_then(|e| Ok((e, rep.sign_vector()?)));
        forced.record(got == Ok((want_e, want_s.clone())), || format!("c2 = {c2}: {got:?}"));
    }
    while forced.trials < n {
        let s2: i8 = if r.gen_bool(0.5) { 1 } else { -1 };
        let images = vec![random_parabolic(&mut r, 1), random_parabolic(&mut r, s2)];
        let rep = Representation::new(s03, images).unwrap();
        let c3 = rep.peripheral(3).unwrap();
        if classify_psl(&c3) != PslType::Hyperbolic || c3.abs_trace() < 2.0 + 1e-6 {
            continue;
        }
        let want = (if s2 > 0 { 1 } else { 0 }, vec![1, s2, 0]);
        let got = rep.euler_class().and_then(|e| Ok((e, rep.sign_vector()?)));
        forced.record(got == Ok(want.clone()), || format!("{:?}: {got:?}, want {want:?}", rep.free_images()));
    }

    let mut lift = Check::new("euler/lift-choice-independence");
    let mut flip = Check::new("euler/pgl-flip");
    let mut conj = Check::new("euler/conjugation-invariance");
    let shapes = [(1, 1), (1, 2), (2, 1), (0, 4)];
    for i in 0..n {
        let (g, p) = shapes[i % shapes.len()];
        let rep = random_hp_rep(&mut r, g, p);
        let e = match rep.euler_class() {
            Ok(e) => e,
            Err(err) => {
                lift.fail(format!("{:?}: {err}", rep.free_images()));
                continue;
            }
        };
        let signs = rep.sign_vector().unwrap();
        let shifts: Vec<i64> = (0..2 * g).map(|_| r.gen_range(-3..=3)).collect();
        let by_hand = euler_by_hand(&rep, &shifts);
        lift.record(by_hand == Ok(e), || format!("{:?} shifts {shifts:?}: {by_hand:?} vs {e}", rep.free_images()));
        let f = rep.flipped();
        let neg: Vec<i8> = signs.iter().map(|s| -s).collect();
        let got = f.euler_class().and_then(|e| Ok((e, f.sign_vector()?)));
        flip.record(got == Ok((-e, neg)), || format!("{:?}: {got:?} vs e = {e}", rep.free_images()));
        let h = random_psl(&mut r);
        let c = rep.conjugated(&h);
        let got = c.euler_class().and_then(|e| Ok((e, c.sign_vector()?)));
        conj.record(got == Ok((e, signs.clone())), || format!("{:?} by {h}: {got:?}", rep.free_images()));
    }

    let mut evb = Check::new("euler/evaluation-bound");
    for (g, p) in [(1usize, 1usize), (0, 3), (1, 2), (0, 4)] {
        let s = Surface::new(g, p).unwrap();
        let (lo, hi) = (1 - 2 * g as i64, 2 * g as i64 + p as i64 - 2);
        let mut count = 0;
        while count < n {
            let mut images: Vec<Psl> = (0..2 * g).map(|_| random_psl(&mut r)).collect();
            images.extend((1..p).map(|_| random_parabolic(&mut r, 1)));
            let rep = Representation::new(s, images).unwrap();
            let cp = rep.peripheral(p).unwrap();
            if (cp.abs_trace() - 2.0).abs() < 1e-6 {
                continue;
            }
            count += 1;
            match rep.evaluation_map().and_then(|x| x.classify()) {
                Ok(CoverClass::Hyp(k)) | Ok(CoverClass::Ell(k)) => {
                    evb.record(lo <= k && k <= hi, || format!("{s}: {:?} has ev index {k}", rep.free_images()))
                }
                other => evb.fail(format!("{s}: {:?} has ev {other:?}", rep.free_images())),
            }
        }
    }

    let mut add = Check::new("euler/additivity-on-builds");
    let requests = [
        BuildRequest::new(0, 4, 1, vec![1, 1, 1, -1], 0),
        BuildRequest::new(1, 2, 1, vec![1, -1], 0),
        BuildRequest::new(1, 2, 2, vec![1, 1], 0),
        BuildRequest::new(0, 4, 2, vec![1, 1, 1, 1], 0),
        BuildRequest::new(0, 4, -1, vec![-1, -1, -1, 1], 0),
    ];
    for i in 0..built {
        let req = requests[i % requests.len()].with_seed(derive_seed(seed, i as u64));
        match build_rep(&req).and_then(|rep| check_additivity(&rep)) {
            Ok((checked, ok)) => add.record(ok && checked > 0, || format!("{req:?}: {checked} splittings, ok {ok}")),
            Err(e) => add.fail(format!("{req:?}: {e}")),
        }
    }
    vec![forced, lift, flip, conj, evb, add]
}

fn target_classes() -> Vec<CoverClass> {
    use CoverClass::*;
    vec![
        Hyp(-2),
        Hyp(-1),
        Hyp(0),
        Hyp(1),
        Hyp(2),
        ParPlus(-1),
        ParPlus(0),
        ParPlus(1),
        ParMinus(-1),
        ParMinus(0),
        ParMinus(1),
        Ell(-2),
        Ell(-1),
        Ell(1),
        Ell(2),
        Center(0),
        Center(1),
    ]
}

fn random_target(r: &mut SeededRng, c: CoverClass) -> Cover {
    // Keep hyperbolic targets away from the parabolic band and elliptic ones away from +-I.
    loop {
        let x = random_in_class(r, c);
        let t = x.base().abs_trace();
        if matches!(c, CoverClass::Center(_)) || ((t - 2.0).abs() > 0.05 && t > 0.1) || classify_psl(&x.base()).is_parabolic() {
            return x;
        }
    }
}

/// The solvers succeed exactly on the targets the component tables allow, and their
/// outputs multiply back to the target. `n` random (kinds, class) queries for each solver.
pub fn reachability(n: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let classes: Vec<CoverClass> =
        target_classes().into_iter().filter(|c| !matches!(c, CoverClass::Center(_))).collect();
    let mut prod = Check::new("solvers/product-table");
    for _ in 0..n {
        let k1 = FactorKind::ALL[r.gen_range(0..FactorKind::ALL.len())];
        let k2 = FactorKind::ALL[r.gen_range(0..FactorKind::ALL.len())];
        let c = classes[r.gen_range(0..classes.len())];
        let target = random_target(&mut r, c);
        let reach = product_reachable(k1, k2, c);
        match solve_product(k1, k2, &target) {
            Ok((x, y)) => {
                let ok = reach
                    && x.classify() == Ok(k1.class())
                    && y.classify() == Ok(k2.class())
                    && x.mul(&y).map(|p| p.index() == target.index() && p.base().approx_eq(&target.base(), 1e-8))
                        == Ok(true);
                prod.record(ok, || format!("{k1:?} x {k2:?} -> {target} ({c}): got {x}, {y}"));
            }
            Err(Error::UnreachableTarget(_)) => {
                prod.record(!reach, || format!("{k1:?} x {k2:?} -> {target} ({c}): reported unreachable"))
            }
            Err(e) => prod.fail(format!("{k1:?} x {k2:?} -> {target} ({c}): {e}")),
        }
    }
    let all = target_classes();
    let mut comm = Check::new("solvers/commutator-table");
    for _ in 0..n {
        let c = all[r.gen_range(0..all.len())];
        let target = random_target(&mut r, c);
        let reach = commutator_reachable(c);
        if reach != in_commutator_image(c) {
            comm.fail(format!("{c}: table says {reach}"));
            continue;
        }
        match solve_commutator(&target) {
            Ok((x, y)) => {
                let ok = reach
                    && x.commutator(&y).map(|p| p.index() == target.index() && p.base().approx_eq(&target.base(), 1e-8))
                        == Ok(true);
                comm.record(ok, || format!("[x, y] = {target} ({c}): got {x}, {y}"));
            }
            Err(Error::TargetOutsideImage(_)) => comm.record(!reach, || format!("{target} ({c}): reported outside image")),
            Err(e) => comm.fail(format!("{target} ({c}): {e}")),
        }
    }
    vec![prod, comm]
}

/// Rotation angle check used by the suites' calibration: rotation(t) acts as x -> x + t.
pub fn calibration() -> Check {
    let mut c = Check::new("calibration/rotation-and-parabolic");
    let t = 0.7;
    let x = Cover::canonical(Psl::from_unit(Matrix::rotation(t)));
    c.record((x.eval(0.3) - 1.0).abs() < 1e-12, || format!("rotation lift at 0.3: {}", x.eval(0.3)));
    let p = Cover::canonical(Psl::from_unit(Matrix::upper(1.0))).classify();
    c.record(p == Ok(CoverClass::ParPlus(0)), || format!("[[1,1],[0,1]] classifies as {p:?}"));
    let h = Cover::canonical(Psl::from_unit(Matrix::stretch(PI))).classify();
    c.record(h == Ok(CoverClass::Hyp(0)), || format!("diag lift classifies as {h:?}"));
    c
}
