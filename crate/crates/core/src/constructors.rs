//! Solvers for prescribed products and commutators in the cover, and pants-gluing builders.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{audit_rep, AuditReport, DEFAULT_MARGIN};
use crate::cover::{special_lift, CoverClass, LiftMode};
use crate::curves::{canonical_form, CurveWord};
use crate::error::{Error, Result};
use crate::mobius::{conjugator, flow, PslType};
use crate::sampling::{derive_seed, random_hyperbolic, random_parabolic, random_sl, rng, SeededRng};
use crate::surface::{format_signs, mw_bounds, sign_counts, MwVerdict, Representation, Surface};
use crate::word::{Generator, Word};
use crate::{Cover, Matrix, Psl};

const ATTEMPTS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorKind {
    Hyp0,
    ParPlus0,
    ParMinus0,
    Ell1,
    EllMinus1,
}

impl FactorKind {
    pub const ALL: [FactorKind; 5] =
        [FactorKind::Hyp0, FactorKind::ParPlus0, FactorKind::ParMinus0, FactorKind::Ell1, FactorKind::EllMinus1];

    /// The component this kind names (Hyp0 stands for the open component).
    pub fn class(self) -> CoverClass {
        match self {
            FactorKind::Hyp0 => CoverClass::Hyp(0),
            FactorKind::ParPlus0 => CoverClass::ParPlus(0),
            FactorKind::ParMinus0 => CoverClass::ParMinus(0),
            FactorKind::Ell1 => CoverClass::Ell(1),
            FactorKind::EllMinus1 => CoverClass::Ell(-1),
        }
    }

    /// The lift of `p` lying in this kind's component, if any.
    pub fn lift(self, p: &Psl) -> Result<Cover> {
        let l = match self {
            FactorKind::Hyp0 | FactorKind::ParPlus0 | FactorKind::ParMinus0 => {
                special_lift(p, LiftMode::ClosureHyp0)?
            }
            FactorKind::Ell1 => special_lift(p, LiftMode::Eval)?,
            FactorKind::EllMinus1 => special_lift(p, LiftMode::Eval)?.times_z(-1),
        };
        Ok(l)
    }

    fn par_sign(self) -> Option<i64> {
        match self {
            FactorKind::ParPlus0 => Some(1),
            FactorKind::ParMinus0 => Some(-1),
            _ => None,
        }
    }

    fn ell_sign(self) -> Option<f64> {
        match self {
            FactorKind::Ell1 => Some(1.0),
            FactorKind::EllMinus1 => Some(-1.0),
            _ => None,
        }
    }

    /// Order used to pick which factor gets the simpler normal form.
    fn rank(self) -> u8 {
        match self {
            FactorKind::ParPlus0 | FactorKind::ParMinus0 => 0,
            FactorKind::Ell1 | FactorKind::EllMinus1 => 1,
            FactorKind::Hyp0 => 2,
        }
    }
}

/// Whether `target` lies in the known image of the product map on k1 x k2.
pub fn product_reachable(k1: FactorKind, k2: FactorKind, target: CoverClass) -> bool {
    use CoverClass as C;
    use FactorKind as K;
    let (a, b) = if k1.rank() <= k2.rank() { (k1, k2) } else { (k2, k1) };
    match (a, b) {
        (K::Hyp0, K::Hyp0) => matches!(
            target,
            C::Hyp(-1) | C::Hyp(0) | C::Hyp(1) | C::Ell(1) | C::Ell(-1) | C::ParPlus(0) | C::ParMinus(0)
        ),
        (p, K::Hyp0) if p.par_sign().is_some() => {
            let s = p.par_sign().unwrap();
            target == C::Hyp(0) || target == C::Hyp(s) || target == C::Ell(s)
        }
        (p, q) if p.par_sign().is_some() && q.par_sign().is_some() => {
            let (s1, s2) = (p.par_sign().unwrap(), q.par_sign().unwrap());
            target == C::Hyp((s1 + s2) / 2) || (s1 == s2 && target == C::Ell(s1))
        }
        (p, K::Ell1) if p.par_sign().is_some() => target == C::Ell(1),
        (K::Ell1, K::Hyp0) => target == C::Ell(1),
        (K::Ell1, K::EllMinus1) | (K::EllMinus1, K::Ell1) => matches!(target, C::Ell(1) | C::Ell(-1)),
        _ => false,
    }
}

/// Membership in the image of the commutator map.
pub fn commutator_reachable(target: CoverClass) -> bool {
    use CoverClass as C;
    matches!(
        target,
        C::Hyp(-1)
            | C::ParPlus(-1)
            | C::Ell(-1)
            | C::ParPlus(0)
            | C::ParMinus(0)
            | C::Center(0)
            | C::Hyp(0)
            | C::Ell(1)
            | C::ParMinus(1)
            | C::Hyp(1)
    )
}

/// Free parameters for one solver attempt; the first attempt uses fixed defaults.
struct Params<'a> {
    rng: &'a mut SeededRng,
    first: bool,
}

impl Params<'_> {
    fn pick(&mut self, default: f64, lo: f64, hi: f64) -> f64 {
        if self.first {
            default
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    fn coin(&mut self) -> bool {
        !self.first && self.rng.gen_bool(0.5)
    }
}

/// Trace of B for a factor of kind k, or None when no admissible value exists.
fn pick_trace(k: FactorKind, par: &mut Params) -> f64 {
    match k {
        FactorKind::Hyp0 => par.pick(3.0, 2.05, 6.0),
        FactorKind::ParPlus0 | FactorKind::ParMinus0 => 2.0,
        FactorKind::Ell1 | FactorKind::EllMinus1 => par.pick(0.0, -1.95, 1.95),
    }
}

/// Whether an SL matrix has the sign pattern of the kind's SL projection.
fn sl_matches(k: FactorKind, m: &Matrix) -> bool {
    let t = m.trace();
    match k {
        FactorKind::Hyp0 => t > 2.0,
        FactorKind::ParPlus0 | FactorKind::ParMinus0 => {
            let plus = if m.a12.abs() >= m.a21.abs() { m.a12 > 0.0 } else { m.a21 < 0.0 };
            (t - 2.0).abs() < 1e-9 && plus == (k == FactorKind::ParPlus0)
        }
        FactorKind::Ell1 => t.abs() < 2.0 && m.a21 < 0.0,
        FactorKind::EllMinus1 => t.abs() < 2.0 && m.a21 > 0.0,
    }
}

/// One candidate pair (A, B) of SL matrices with tr(AB) = tau, A in normal form for ka.
fn candidate(ka: FactorKind, kb: FactorKind, tau: f64, ts: f64, par: &mut Params) -> Option<(Matrix, Matrix)> {
    if let Some(s) = ka.par_sign() {
        let a = s as f64 * par.pick(1.0, 0.3, 3.0);
        let am = Matrix::upper(a);
        let tb = if let Some(e) = kb.ell_sign() {
            // Need sgn(w) = -e where w = (tau - tb)/a.
            let want = -e * a.signum();
            let lo_edge = (-1.98f64).min(0.5 * (tau - 2.0));
            let hi_edge = 1.98f64.max(0.5 * (tau + 2.0));
            let (lo, hi) = if want > 0.0 { (lo_edge, tau.min(hi_edge)) } else { (tau.max(lo_edge), hi_edge) };
            if lo >= hi {
                return None;
            }
            par.pick(0.5 * (lo + hi), lo, hi)
        } else {
            pick_trace(kb, par)
        };
        let w = (tau - tb) / a;
        if w.abs() < 1e-12 {
            return None;
        }
        let x = if kb.par_sign().is_some() { par.pick(1.0, -1.0, 3.0) } else { par.pick(tb / 2.0, tb / 2.0 - 1.5, tb / 2.0 + 1.5) };
        let k = x * (tb - x) - 1.0;
        let bm = Matrix::new(x, k / w, w, tb - x);
        return Some((am, bm));
    }
    if let Some(e) = ka.ell_sign() {
        let (phi, tb) = match kb.ell_sign() {
            Some(eb) if ts != 0.0 => {
                // Displacements add exactly for commuting rotations; split the target's.
                let d = ts * (tau / 2.0).clamp(-1.0, 1.0).acos();
                let (l1, h1) = if e > 0.0 { (0.0, PI) } else { (-PI, 0.0) };
                let (l2, h2) = if eb > 0.0 { (d - PI, d) } else { (d, d + PI) };
                let (lo, hi) = (l1.max(l2) + 0.02, h1.min(h2) - 0.02);
                if lo >= hi {
                    return None;
                }
                let da = par.pick(0.5 * (lo + hi), lo, hi);
                let eps = par.pick(0.0, -0.4, 0.4);
                (if e > 0.0 { da } else { da + PI }, (2.0 * (d - da + eps).cos()).clamp(-1.98, 1.98))
            }
            _ => (par.pick(PI / 2.0, 0.1, PI - 0.1), pick_trace(kb, par)),
        };
        let am = Matrix::rotation(phi).scale(e);
        let (s, c) = phi.sin_cos();
        let q = (tau / e - c * tb) / s;
        let x = if kb.par_sign().is_some() {
            let r = (q.abs() / 2.0).min(2.0);
            par.pick(1.0, 1.0 - r, 1.0 + r)
        } else {
            let r = if kb.ell_sign().is_some() && ts != 0.0 { 0.3 } else { 1.0 };
            par.pick(tb / 2.0, tb / 2.0 - r, tb / 2.0 + r)
        };
        let k = x * (tb - x) - 1.0;
        let mut disc = q * q + 4.0 * k;
        if disc < 0.0 && disc > -1e-12 {
            disc = 0.0;
        }
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let y = if par.coin() { (-q + sq) / 2.0 } else { (-q - sq) / 2.0 };
        let w = y + q;
        return Some((am, Matrix::new(x, y, w, tb - x)));
    }
    // Both hyperbolic.
    let l = par.pick(2.0, 1.2, 4.0);
    let am = Matrix::stretch(l);
    let tb = pick_trace(kb, par);
    let x = (tau - tb / l) / (l - 1.0 / l);
    let k = x * (tb - x) - 1.0;
    let r = par.pick(1.0, 0.3, 3.0) * if par.coin() { -1.0 } else { 1.0 };
    Some((am, Matrix::new(x, r, k / r, tb - x)))
}

/// Time t of the flow through `q` minimizing the entries of the pieces conjugated by
/// flow(q, t) * g; the cost is convex in t for hyperbolic and parabolic q.
fn balancing_time(q: &Psl, g: &Psl, pieces: &[Psl]) -> f64 {
    if !matches!(q.classify(), PslType::Hyperbolic | PslType::ParabolicPlus | PslType::ParabolicMinus) {
        return 0.0;
    }
    let cost = |t: f64| -> f64 {
        let h = flow(q, t) * *g;
        pieces
            .iter()
            .map(|m| {
                let c = m.conj(&h).rep();
                c.a11 * c.a11 + c.a12 * c.a12 + c.a21 * c.a21 + c.a22 * c.a22
            })
            .sum()
    };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while cost(lo) < cost(lo + 0.5) && lo > -1e3 {
        lo *= 2.0;
    }
    while cost(hi) < cost(hi - 0.5) && hi < 1e3 {
        hi *= 2.0;
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if cost(a) < cost(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Conjugate a solved pair so its product lands exactly on the target.
fn transport(
    x: Cover,
    y: Cover,
    product: &Cover,
    target: &Cover,
    twist: Option<f64>,
) -> Result<(Cover, Cover)> {
    let mut g = conjugator(&product.base(), &target.base())?;
    g = flow(&target.base(), balancing_time(&target.base(), &g, &[x.base(), y.base()])) * g;
    if let Some(t) = twist {
        g = flow(&target.base(), t) * g;
    }
    let gl = Cover::canonical(g);
    Ok((x.conj(&gl)?, y.conj(&gl)?))
}

fn sl_trace(c: &Cover) -> f64 {
    c.sl_projection().trace()
}

/// Find (x, y) with x in k1, y in k2 and x*y = target.
pub fn solve_product(k1: FactorKind, k2: FactorKind, target: &Cover) -> Result<(Cover, Cover)> {
    solve_product_with(k1, k2, target, &mut rng(0), false)
}

/// As `solve_product`, drawing free parameters (and a random centralizer twist when
/// `randomize` is set) from `rng`.
pub fn solve_product_with(
    k1: FactorKind,
    k2: FactorKind,
    target: &Cover,
    rng: &mut SeededRng,
    randomize: bool,
) -> Result<(Cover, Cover)> {
    let class = target.classify()?;
    if !product_reachable(k1, k2, class) {
        return Err(Error::UnreachableTarget(class.to_string()));
    }
    let tau = sl_trace(target);
    let ts = match class {
        CoverClass::Ell(k) => k.signum() as f64,
        _ => 0.0,
    };
    let swap = k2.rank() < k1.rank();
    let (ka, kb) = if swap { (k2, k1) } else { (k1, k2) };
    let mut last = String::from("no admissible candidate");
    for attempt in 0..ATTEMPTS {
        let mut par = Params { rng, first: attempt == 0 && !randomize };
        let Some((am, bm)) = candidate(ka, kb, tau, ts, &mut par) else { continue };
        if !am.is_finite() || !bm.is_finite() || !sl_matches(ka, &am) || !sl_matches(kb, &bm) {
            continue;
        }
        let (Ok(pa), Ok(pb)) = (crate::normalize(am), crate::normalize(bm)) else { continue };
        let (Ok(la), Ok(lb)) = (ka.lift(&pa), kb.lift(&pb)) else { continue };
        if la.classify().ok() != Some(ka.class()) || lb.classify().ok() != Some(kb.class()) {
            continue;
        }
        // Order back to (k1, k2); B*A is conjugate to A*B.
        let (x, y) = if swap { (lb, la) } else { (la, lb) };
        let Ok(prod) = x.mul(&y) else { continue };
        match prod.classify() {
            Ok(c) if c == class => {}
            Ok(c) => {
                last = format!("candidate product in {c}");
                continue;
            }
            Err(e) => {
                last = e.to_string();
                continue;
            }
        }
        let twist = randomize.then(|| rng.gen_range(-0.3..0.3));
        let Ok((x, y)) = transport(x, y, &prod, target, twist) else { continue };
        let Ok(check) = x.mul(&y) else { continue };
        let tol = 1e-8 * target.base().rep().max_abs().max(1.0);
        if check.approx_eq(target, tol)
            && x.classify().ok() == Some(k1.class())
            && y.classify().ok() == Some(k2.class())
        {
            return Ok((x, y));
        }
        last = "self-verification residual too large".into();
    }
    Err(Error::SolveFailed(format!("{k1:?} x {k2:?} -> {class} (trace {tau}): {last}")))
}

/// Root t > 2 of t^3 - 3t^2 + kappa + 2 = 0 by bisection.
pub fn diagonal_commutator_trace(kappa: f64) -> f64 {
    let f = |t: f64| t * t * t - 3.0 * t * t + kappa + 2.0;
    let (mut lo, mut hi) = (2.0, 3.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// SL pair with tr A = x, tr B = y, tr AB = z (x > 2).
fn pair_from_traces(x: f64, y: f64, z: f64, r: f64) -> (Matrix, Matrix) {
    let l = (x + (x * x - 4.0).sqrt()) / 2.0;
    let b11 = (z - y / l) / (l - 1.0 / l);
    let k = b11 * (y - b11) - 1.0;
    (Matrix::stretch(l), Matrix::new(b11, r, k / r, y - b11))
}

/// Find (x, y) with [x, y] = target.
pub fn solve_commutator(target: &Cover) -> Result<(Cover, Cover)> {
    solve_commutator_with(target, &mut rng(0), false)
}

pub fn solve_commutator_with(target: &Cover, rng: &mut SeededRng, randomize: bool) -> Result<(Cover, Cover)> {
    let class = target.classify()?;
    if !commutator_reachable(class) {
        return Err(Error::TargetOutsideImage(class.to_string()));
    }
    if class == CoverClass::Center(0) {
        return Ok((Cover::identity(), Cover::identity()));
    }
    let kappa = sl_trace(target);
    let mut last = String::from("no admissible candidate");
    for attempt in 0..ATTEMPTS {
        let first = attempt == 0 && !randomize;
        let (x, y, z) = if first && kappa < 2.0 {
            let t = diagonal_commutator_trace(kappa);
            (t, t, t)
        } else {
            let (x, y) = if first { (3.0, 3.0) } else { (rng.gen_range(2.1..5.0), rng.gen_range(2.1..5.0)) };
            let disc = x * x * y * y - 4.0 * (x * x + y * y - 2.0 - kappa);
            if disc < -1e-9 {
                continue;
            }
            let sq = disc.max(0.0).sqrt();
            let z = if !first && rng.gen_bool(0.5) { (x * y - sq) / 2.0 } else { (x * y + sq) / 2.0 };
            (x, y, z)
        };
        let r = if first { 1.0 } else { rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 } };
        let (am, bm) = pair_from_traces(x, y, z, r);
        if !am.is_finite() || !bm.is_finite() {
            continue;
        }
        let (Ok(pa), Ok(pb)) = (crate::normalize(am), crate::normalize(bm)) else { continue };
        let (mut a, mut b) = (Cover::canonical(pa), Cover::canonical(pb));
        let Ok(mut c) = a.commutator(&b) else { continue };
        match c.classify() {
            Ok(k) if k == class => {}
            Ok(k) if k.mirrored() == class => {
                a = a.flipped();
                b = b.flipped();
                let Ok(cc) = a.commutator(&b) else { continue };
                c = cc;
                if c.classify().ok() != Some(class) {
                    continue;
                }
            }
            Ok(k) => {
                last = format!("candidate commutator in {k}");
                continue;
            }
            Err(e) => {
                last = e.to_string();
                continue;
            }
        }
        let twist = randomize.then(|| rng.gen_range(-0.3..0.3));
        let Ok((a, b)) = transport(a, b, &c, target, twist) else { continue };
        let Ok(check) = a.commutator(&b) else { continue };
        let tol = 1e-8 * target.base().rep().max_abs().max(1.0);
        if check.approx_eq(target, tol) {
            return Ok((a, b));
        }
        last = "self-verification residual too large".into();
    }
    Err(Error::SolveFailed(format!("commutator -> {class} (trace {kappa}): {last}")))
}

fn require_hyperbolic(c: &Psl) -> Result<()> {
    match c.classify() {
        PslType::Hyperbolic => Ok(()),
        PslType::Elliptic => Err(Error::BoundaryElliptic),
        t => Err(Error::BoundaryNotHyperbolic(t.to_string())),
    }
}

/// Free-generator images of an extremal representation of S(g,p) with c_p = c and the
/// other peripherals positive parabolic.
fn extremal_images(g: usize, p: usize, c: &Psl, rng: &mut SeededRng, randomize: bool) -> Result<Vec<Psl>> {
    require_hyperbolic(c)?;
    let target = special_lift(&c.inverse(), LiftMode::ClosureHyp0)?.times_z(1);
    match (g, p) {
        (1, 1) => {
            let (a, b) = solve_commutator_with(&target, rng, randomize)?;
            Ok(vec![a.base(), b.base()])
        }
        (0, 3) => {
            let (x, y) = solve_product_with(FactorKind::ParPlus0, FactorKind::ParPlus0, &target, rng, randomize)?;
            Ok(vec![x.base(), y.base()])
        }
        (_, p) if p >= 2 => {
            let (d, cl) = solve_product_with(FactorKind::Hyp0, FactorKind::ParPlus0, &target, rng, randomize)?;
            let mut v = extremal_images(g, p - 1, &d.base().inverse(), rng, randomize)?;
            v.push(cl.base());
            Ok(v)
        }
        (g, 1) if g >= 2 => {
            let (d1, d2) = solve_product_with(FactorKind::Hyp0, FactorKind::Hyp0, &target, rng, randomize)?;
            let mut v = extremal_images(g - 1, 1, &d1.base().inverse(), rng, randomize)?;
            v.extend(extremal_images(1, 1, &d2.base().inverse(), rng, randomize)?);
            Ok(v)
        }
        _ => Err(Error::InvalidSurface { genus: g, punctures: p }),
    }
}

fn verify_invariants(rep: &Representation, n: i64, s: &[i8]) -> Result<()> {
    let e = rep.euler_class()?;
    let chi = rep.surface().chi();
    if e.abs() > -chi {
        return Err(Error::Verification(format!("Milnor-Wood violated: e = {e}, chi = {chi}")));
    }
    let got = rep.sign_vector()?;
    if e != n || got != s {
        return Err(Error::Verification(format!(
            "built e = {e}, s = ({}); requested e = {n}, s = ({})",
            format_signs(&got),
            format_signs(s)
        )));
    }
    Ok(())
}

/// Extremal representation of S(g,p): e = -chi, punctures 1..p-1 positive parabolic, c_p = boundary.
pub fn build_boundary_extremal(g: usize, p: usize, boundary: &Psl) -> Result<Representation> {
    build_boundary_extremal_with(g, p, boundary, &mut rng(0), false)
}

pub fn build_boundary_extremal_with(
    g: usize,
    p: usize,
    boundary: &Psl,
    rng: &mut SeededRng,
    randomize: bool,
) -> Result<Representation> {
    let s = Surface::new(g, p)?;
    let rep = Representation::new(s, extremal_images(g, p, boundary, rng, randomize)?)?;
    let rep = polish_last(rep.balanced(), boundary.abs_trace())?;
    let rep = match conjugator(&rep.peripheral(p)?, boundary) {
        Ok(h) => rep.conjugated(&h),
        Err(_) => rep,
    };
    let mut signs = vec![1i8; p];
    signs[p - 1] = 0;
    verify_invariants(&rep, -s.chi(), &signs)?;
    let cp = rep.peripheral(p)?;
    let err = cp.dist(boundary);
    if err > 1e-8 * boundary.rep().max_abs().max(1.0) {
        return Err(Error::Verification(format!("boundary image off by {err:e}")));
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildRequest {
    pub genus: usize,
    pub punctures: usize,
    pub euler: i64,
    pub signs: Vec<i8>,
    pub seed: u64,
}

impl BuildRequest {
    pub fn new(genus: usize, punctures: usize, euler: i64, signs: Vec<i8>, seed: u64) -> BuildRequest {
        BuildRequest { genus, punctures, euler, signs, seed }
    }

    pub fn surface(&self) -> Result<Surface> {
        Surface::new(self.genus, self.punctures)
    }

    pub fn with_seed(&self, seed: u64) -> BuildRequest {
        BuildRequest { seed, ..self.clone() }
    }

    fn flipped(&self) -> BuildRequest {
        BuildRequest { euler: -self.euler, signs: self.signs.iter().map(|s| -s).collect(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// |n| = -chi with all signs equal.
    Extremal,
    /// n = -chi - 1 with exactly one negative puncture (or the mirror).
    Counterexample,
}

/// Check feasibility and identify the supported family.
pub fn classify_request(req: &BuildRequest) -> Result<(Family, bool)> {
    let s = req.surface()?;
    if req.signs.len() != s.punctures {
        return Err(Error::Parse(format!("{} signs given for {} punctures", req.signs.len(), s.punctures)));
    }
    let chi = s.chi();
    let n = req.euler;
    let bound = || {
        let (plus, _, minus) = sign_counts(&req.signs);
        format!(
            "Milnor-Wood bound chi + p+ <= n <= -chi - p- gives {} <= n <= {} on {s} (chi = {chi}), but n = {n}",
            chi + plus as i64,
            -chi - minus as i64
        )
    };
    if n.abs() > -chi {
        return Err(Error::InfeasibleRequest(format!("Milnor-Wood inequality |n| <= -chi = {} fails for n = {n}", -chi)));
    }
    let (plus, zero, minus) = sign_counts(&req.signs);
    let p = s.punctures;
    let family = if zero == 0 && n == -chi && plus == p {
        Some((Family::Extremal, false))
    } else if zero == 0 && n == chi && minus == p {
        Some((Family::Extremal, true))
    } else if zero == 0 && n == -chi - 1 && minus == 1 {
        Some((Family::Counterexample, false))
    } else if zero == 0 && n == chi + 1 && plus == 1 {
        Some((Family::Counterexample, true))
    } else {
        None
    };
    let verdict = mw_bounds(s.genus, p, n, &req.signs);
    let feasible = matches!(verdict, MwVerdict::FeasibleIff | MwVerdict::FeasibleSufficient);
    match family {
        // Extremal type-preserving components are Fuchsian; they exist although the
        // generalized inequality does not certify them.
        Some(f @ (Family::Extremal, _)) => Ok(f),
        Some(f) if feasible => Ok(f),
        _ if !feasible => Err(Error::InfeasibleRequest(bound())),
        _ => Err(Error::NotSupported(format!(
            "(n, s) = ({n}, ({})) on {s} is feasible but outside the constructible families",
            format_signs(&req.signs)
        ))),
    }
}

/// Extremal piece S(g,p) on a random hyperbolic boundary, with its realized boundary image.
fn left_piece(g: usize, p: usize, rng: &mut SeededRng) -> Result<(Vec<Psl>, Psl)> {
    let v = extremal_images(g, p, &random_hyperbolic(rng), rng, true)?;
    let piece = Representation::new(Surface::new(g, p)?, v)?.balanced();
    let t = piece.image(Generator::C(p))?;
    Ok((piece.free_images().to_vec(), t))
}

/// Extremal type-preserving all-plus images.
fn all_plus_images(g: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Psl>> {
    match (g, p) {
        (0, 3) => {
            let u: f64 = rng.gen_range(0.5..4.0);
            let c1 = Matrix::upper(u);
            let c2 = Matrix::lower(-4.0 / u);
            let h = random_sl(rng, 1.0);
            Ok(vec![Psl::from_unit(c1.conj(&h)), Psl::from_unit(c2.conj(&h))])
        }
        (1, 1) => {
            let c1 = random_parabolic(rng, 1);
            let target = special_lift(&c1.inverse(), LiftMode::ClosureHyp0)?.times_z(1);
            let (a, b) = solve_commutator_with(&target, rng, true)?;
            Ok(vec![a.base(), b.base()])
        }
        (g, 1) => {
            let gam = random_hyperbolic(rng);
            let mut v = extremal_images(g - 1, 1, &gam.inverse(), rng, true)?;
            v.extend(extremal_images(1, 2, &gam, rng, true)?);
            Ok(v)
        }
        (g, p) => {
            let (mut v, t) = left_piece(g, p - 1, rng)?;
            let target = special_lift(&t, LiftMode::ClosureHyp0)?.times_z(1);
            let (x, _) = solve_product_with(FactorKind::ParPlus0, FactorKind::ParPlus0, &target, rng, true)?;
            v.push(x.base());
            Ok(v)
        }
    }
}

/// Counterexample-component images with the negative puncture last.
fn minus_last_images(g: usize, p: usize, rng: &mut SeededRng) -> Result<Vec<Psl>> {
    match (g, p) {
        (1, 1) => {
            let c1 = random_parabolic(rng, -1);
            let target = special_lift(&c1.inverse(), LiftMode::ClosureHyp0)?;
            let (a, b) = solve_commutator_with(&target, rng, true)?;
            Ok(vec![a.base(), b.base()])
        }
        (g, 1) => {
            let c1 = random_parabolic(rng, -1);
            let target = special_lift(&c1.inverse(), LiftMode::ClosureHyp0)?;
            let (d1, d2) = solve_product_with(FactorKind::Hyp0, FactorKind::Hyp0, &target, rng, true)?;
            let mut v = extremal_images(1, 1, &d1.base().inverse(), rng, true)?;
            v.extend(extremal_images(g - 1, 1, &d2.base().inverse(), rng, true)?);
            Ok(v)
        }
        (g, p) => {
            let (mut v, t) = left_piece(g, p - 1, rng)?;
            let target = special_lift(&t, LiftMode::ClosureHyp0)?;
            let (x, _) = solve_product_with(FactorKind::ParPlus0, FactorKind::ParMinus0, &target, rng, true)?;
            v.push(x.base());
            Ok(v)
        }
    }
}

/// Braid sigma_i: c_i -> c_i c_{i+1} c_i^-1, c_{i+1} -> c_i.
pub fn braid(i: usize) -> BTreeMap<Generator, Word> {
    let (ci, cj) = (Generator::C(i), Generator::C(i + 1));
    let mut m = BTreeMap::new();
    m.insert(ci, Word::product([&Word::gen(ci), &Word::gen(cj), &Word::gen(ci).inverse()]));
    m.insert(cj, Word::gen(ci));
    m
}

fn random_twists(rep: Representation, rng: &mut SeededRng) -> Result<Representation> {
    let s = rep.surface();
    let mut rep = rep;
    for j in 0..=s.genus {
        for k in 0..s.punctures {
            if !s.valid_split(j, k) {
                continue;
            }
            let gamma = rep.eval_word(&s.gamma(j, k))?;
            if gamma.classify() == PslType::Hyperbolic {
                let t = rng.gen_range(-0.3..0.3);
                rep = twist_at(&rep, j, k, t)?;
            }
        }
    }
    Ok(rep)
}

/// Conjugate the last free image by a short flow so that the implied c_p, which carries
/// the accumulated roundoff of the whole construction, has |trace| = `trace` to working precision.
fn polish_last(rep: Representation, trace: f64) -> Result<Representation> {
    let s = rep.surface();
    let n = rep.free_images().len() - 1;
    let with = |h: &Matrix| -> Result<Representation> {
        let mut v = rep.free_images().to_vec();
        v[n] = v[n].conj(&Psl::from_unit(*h));
        Representation::new(s, v)
    };
    let f = |r: &Representation| -> Result<f64> { Ok(r.image(Generator::C(s.punctures))?.abs_trace() - trace) };
    let f0 = f(&rep)?;
    if f0.abs() < 1e-14 * trace || f0.abs() > 1e-4 * trace {
        return Ok(rep);
    }
    let mut best = (f0.abs(), rep.clone());
    for dir in [Matrix::upper as fn(f64) -> Matrix, Matrix::lower, |t: f64| Matrix::stretch(t.exp())] {
        let mut t = 0.0;
        let mut ft = f0;
        for _ in 0..30 {
            let h = 1e-5;
            let d = (f(&with(&dir(t + h))?)? - f(&with(&dir(t - h))?)?) / (2.0 * h);
            if d.abs() < 1e-9 {
                break;
            }
            t -= ft / d;
            let cand = with(&dir(t))?;
            ft = f(&cand)?;
            if ft.abs() < best.0 {
                best = (ft.abs(), cand);
            }
            if ft.abs() < 1e-14 * trace {
                break;
            }
        }
        if best.0 < 1e-13 * trace {
            break;
        }
    }
    Ok(best.1)
}

fn build_once(req: &BuildRequest, family: Family, rng: &mut SeededRng) -> Result<Representation> {
    let s = req.surface()?;
    let (g, p) = (s.genus, s.punctures);
    let rep = match family {
        Family::Extremal => Representation::new(s, all_plus_images(g, p, rng)?)?,
        Family::Counterexample => {
            let neg = req.signs.iter().position(|&x| x < 0).expect("one negative sign") + 1;
            let mut rep = Representation::new(s, minus_last_images(g, p, rng)?)?;
            for i in (neg..p).rev() {
                rep = rep.precompose(&braid(i))?;
            }
            rep
        }
    };
    polish_last(random_twists(rep, rng)?.balanced(), 2.0)
}

/// Build a representation with the requested Euler class and sign vector.
pub fn build_rep(req: &BuildRequest) -> Result<Representation> {
    let (family, mirror) = classify_request(req)?;
    let inner = if mirror { req.flipped() } else { req.clone() };
    let mut last = None;
    for retry in 0..8u64 {
        let mut r = rng(derive_seed(req.seed, retry));
        match build_once(&inner, family, &mut r) {
            Ok(rep) => {
                let rep = if mirror { rep.flipped() } else { rep };
                verify_invariants(&rep, req.euler, &req.signs)?;
                let meta = serde_json::to_value(req).expect("serializable");
                return Ok(rep.with_meta("request", meta).with_meta("attempt", retry.into()));
            }
            Err(e @ Error::Verification(_)) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::SolveFailed("no attempt made".into())))
}

fn twist_at(rep: &Representation, j: usize, k: usize, t: f64) -> Result<Representation> {
    let s = rep.surface();
    let gamma = rep.eval_word(&s.gamma(j, k))?;
    require_hyperbolic(&gamma)?;
    let tw = flow(&gamma, t);
    let c1 = rep.eval_word(&s.gamma(0, k))?;
    let handle_tw = c1 * tw * c1.inverse();
    let images = s
        .free_generators()
        .iter()
        .map(|&g| {
            let m = rep.image(g)?;
            Ok(match g {
                Generator::A(i) | Generator::B(i) if i > j => m.conj(&handle_tw),
                Generator::C(i) if i > k => m.conj(&tw),
                _ => m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Representation::new(s, images)?;
    out.meta = rep.meta.clone();
    Ok(out)
}

/// Twist along a standard separating curve gamma(j,k) by time t of the one-parameter
/// subgroup through its image.
pub fn twist_deform(rep: &Representation, curve: &CurveWord, t: f64) -> Result<Representation> {
    let s = rep.surface();
    let target = canonical_form(&s.eliminate_cp(curve.word()));
    let mut found = None;
    'outer: for j in 0..=s.genus {
        for k in 0..s.punctures {
            if s.valid_split(j, k) && canonical_form(&s.gamma(j, k)) == target {
                found = Some((j, k));
                break 'outer;
            }
        }
    }
    let (j, k) = found.ok_or(Error::UnsupportedCurve)?;
    let out = twist_at(rep, j, k, t)?;
    if let (Ok(e0), Ok(s0)) = (rep.euler_class(), rep.sign_vector()) {
        verify_invariants(&out, e0, &s0)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSummary {
    pub request: BuildRequest,
    pub count: usize,
    pub depth: usize,
    pub np_pass: usize,
    pub np_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub reps: Vec<Representation>,
    pub reports: Vec<AuditReport>,
    pub summary: SampleSummary,
}

/// `count` independent builds with derived seeds, each audited at `depth`.
pub fn sample(req: &BuildRequest, count: usize, depth: usize) -> Result<SampleOutcome> {
    classify_request(req)?;
    let built: Vec<Result<(Representation, AuditReport)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let r = build_rep(&req.with_seed(derive_seed(req.seed, 1_000_000 + i as u64)))?;
            let a = audit_rep(&r, depth, DEFAULT_MARGIN)?;
            Ok((r, a))
        })
        .collect();
    let mut reps = Vec::with_capacity(count);
    let mut reports = Vec::with_capacity(count);
    for b in built {
        let (r, a) = b?;
        reps.push(r);
        reports.push(a);
    }
    let np_pass = reports.iter().filter(|a| a.violations.is_empty()).count();
    let summary = SampleSummary {
        request: req.clone(),
        count,
        depth,
        np_pass,
        np_fraction: if count == 0 { 0.0 } else { np_pass as f64 / count as f64 },
    };
    Ok(SampleOutcome { reps, reports, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_in_class;

    fn p(m: [f64; 4]) -> Psl {
        Psl::from_f64(m).unwrap()
    }

    #[test]
    fn product_examples() {
        let a = special_lift(&p([1.0, 1.0, 0.0, 1.0]), LiftMode::ClosureHyp0).unwrap();
        let b = special_lift(&p([1.0, 0.0, -5.0, 1.0]), LiftMode::ClosureHyp0).unwrap();
        let target = a.mul(&b).unwrap();
        let (x, y) = solve_product(FactorKind::ParPlus0, FactorKind::ParPlus0, &target).unwrap();
        assert!(x.mul(&y).unwrap().approx_eq(&target, 1e-9));
        // Same pair up to the target's centralizer: tr(x y^-1) is a pair invariant.
        let t = (x.base() * y.base().inverse()).abs_trace();
        assert!((t - (a.base() * b.base().inverse()).abs_trace()).abs() < 1e-9);
        assert_eq!(x.classify().unwrap(), CoverClass::ParPlus(0));

        let h0 = Cover::canonical(p([2.0, 0.0, 0.0, 0.5]));
        assert!(matches!(
            solve_product(FactorKind::ParPlus0, FactorKind::ParPlus0, &h0),
            Err(Error::UnreachableTarget(_))
        ));

        let e = special_lift(&p([-1.0, 1.0, -2.0, 1.0]), LiftMode::Eval).unwrap();
        assert_eq!(e.classify().unwrap(), CoverClass::Ell(1));
        let (x, y) = solve_product(FactorKind::ParPlus0, FactorKind::ParPlus0, &e).unwrap();
        assert!(x.mul(&y).unwrap().approx_eq(&e, 1e-9));
    }

    #[test]
    fn commutator_examples() {
        assert!((diagonal_commutator_trace(-3.0) - 3.10380).abs() < 1e-5);
        let mut r = rng(5);
        let t = random_in_class(&mut r, CoverClass::Hyp(1));
        let (a, b) = solve_commutator(&t).unwrap();
        assert!(a.commutator(&b).unwrap().approx_eq(&t, 1e-8));
        let (a, b) = solve_commutator(&Cover::identity()).unwrap();
        assert_eq!((a, b), (Cover::identity(), Cover::identity()));
        let t2 = random_in_class(&mut r, CoverClass::Hyp(2));
        assert!(matches!(solve_commutator(&t2), Err(Error::TargetOutsideImage(_))));
    }

    #[test]
    fn every_reachable_product_solves() {
        let mut r = rng(11);
        let classes = [
            CoverClass::Hyp(-1),
            CoverClass::Hyp(0),
            CoverClass::Hyp(1),
            CoverClass::ParPlus(0),
            CoverClass::ParMinus(0),
            CoverClass::Ell(1),
            CoverClass::Ell(-1),
        ];
        for k1 in FactorKind::ALL {
            for k2 in FactorKind::ALL {
                for c in classes {
                    if !product_reachable(k1, k2, c) {
                        continue;
                    }
                    for _ in 0..5 {
                        let t = random_in_class(&mut r, c);
                        let res = solve_product_with(k1, k2, &t, &mut r, true);
                        assert!(res.is_ok(), "{k1:?} {k2:?} {c}: {res:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn extremal_examples() {
        let c = p([3.0, 1.0, 5.0, 2.0]);
        for (g, pp) in [(0, 3), (1, 1), (1, 2), (0, 4), (2, 1)] {
            let rep = build_boundary_extremal(g, pp, &c).unwrap();
            assert_eq!(rep.euler_class().unwrap(), -rep.surface().chi());
        }
    }

    #[test]
    fn build_examples() {
        let rep = build_rep(&BuildRequest::new(0, 4, 1, vec![1, 1, 1, -1], 42)).unwrap();
        assert_eq!(rep.euler_class().unwrap(), 1);
        let rep = build_rep(&BuildRequest::new(1, 2, 1, vec![1, -1], 7)).unwrap();
        assert_eq!(rep.sign_vector().unwrap(), vec![1, -1]);
        assert!(matches!(
            build_rep(&BuildRequest::new(0, 4, 2, vec![1, 1, 1, -1], 1)),
            Err(Error::InfeasibleRequest(_))
        ));
        for (g, pp, n, s) in [
            (0, 4, 1, vec![-1, 1, 1, 1]),
            (0, 5, 2, vec![1, 1, -1, 1, 1]),
            (2, 1, 2, vec![-1]),
            (1, 1, 0, vec![-1]),
            (0, 4, -1, vec![-1, 1, -1, -1]),
            (0, 3, 1, vec![1, 1, 1]),
            (1, 1, -1, vec![-1]),
            (2, 2, 4, vec![1, 1]),
        ] {
            let req = BuildRequest::new(g, pp, n, s.clone(), 3);
            let rep = build_rep(&req).unwrap_or_else(|e| panic!("{req:?}: {e}"));
            assert_eq!(rep.euler_class().unwrap(), n);
            assert_eq!(rep.sign_vector().unwrap(), s);
        }
        assert!(build_rep(&BuildRequest::new(0, 4, 1, vec![1, 1, 0, -1], 1)).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let req = BuildRequest::new(1, 2, 1, vec![1, -1], 9);
        assert_eq!(build_rep(&req).unwrap().to_json_string(), build_rep(&req).unwrap().to_json_string());
    }

    #[test]
    fn twist_examples() {
        let rep = build_rep(&BuildRequest::new(1, 2, 1, vec![1, -1], 7)).unwrap();
        let s = rep.surface();
        let curve = CurveWord::new(&s, s.gamma(1, 0));
        let same = twist_deform(&rep, &curve, 0.0).unwrap();
        for (a, b) in same.free_images().iter().zip(rep.free_images()) {
            assert!(a.approx_eq(b, 1e-12));
        }
        let moved = twist_deform(&rep, &curve, 0.7).unwrap();
        assert_eq!(moved.euler_class().unwrap(), 1);
        assert_eq!(moved.sign_vector().unwrap(), vec![1, -1]);
        let a1 = CurveWord::new(&s, Word::gen(Generator::A(1)));
        assert_eq!(twist_deform(&rep, &a1, 0.3).unwrap_err(), Error::UnsupportedCurve);
    }

    #[test]
    fn sample_empty() {
        let req = BuildRequest::new(0, 4, 1, vec![1, 1, 1, -1], 1);
        assert!(sample(&req, 0, 2).unwrap().reps.is_empty());
        assert!(sample(&BuildRequest::new(0, 4, 2, vec![1, 1, 1, -1], 1), 3, 2).is_err());
    }
}
