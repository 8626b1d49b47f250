//! The universal cover of PSL(2,R), modelled by lifts of the projective-line action.
//!
//! A point of the projective line is an angle x mod pi, standing for the direction
//! (cos x, -sin x). With this orientation `Matrix2::rotation(t)` acts as x -> x + t,
//! and the central generator z is the translation x -> x + pi.
//!
//! For a PSL element B the canonical lift g_B is the increasing lift of its action
//! with g_B(0) in [0, pi). The cover element (B, k) is the lift g_B + k*pi.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{classify_psl, Matrix2, ProjectiveMatrix, PslType};
use crate::scalar::Scalar;

/// Closed-form data of the canonical lift of a PSL element.
///
/// Writing the action in the complex coordinate e^{ix}, the displacement
/// g(x) - x equals arg(alpha) + Arg(1 + rho e^{-2ix}) + j*pi with |rho| < 1,
/// so it ranges over [c - w, c + w] with c = arg(alpha) + j*pi, w = asin|rho|.
#[derive(Clone, Copy, Debug)]
struct LiftData<T> {
    arg_alpha: T,
    rho: (T, T),
    j: i64,
    w: T,
}

fn lift_data<T: Scalar>(p: &ProjectiveMatrix<T>) -> LiftData<T> {
    let m = p.rep();
    let half = T::of(0.5);
    let alpha = ((m.a11 + m.a22) * half, (m.a12 - m.a21) * half);
    let beta = ((m.a11 - m.a22) * half, -(m.a12 + m.a21) * half);
    let n2 = alpha.0 * alpha.0 + alpha.1 * alpha.1;
    let rho = (
        (beta.0 * alpha.0 + beta.1 * alpha.1) / n2,
        (beta.1 * alpha.0 - beta.0 * alpha.1) / n2,
    );
    let arg_alpha = alpha.1.atan2(alpha.0);
    let r = rho.0.hypot(rho.1).min(T::one());
    let mut d = LiftData { arg_alpha, rho, j: 0, w: r.asin() };
    let pi = T::PI();
    let raw = (-m.a21).atan2(m.a11);
    // Window [-eps, pi - eps): products that should fix the direction 0 land on index 0
    // whichever side of it roundoff puts them.
    let eps = T::of(T::WRAP_EPS);
    let mut g0 = raw - ((raw + eps) / pi).floor() * pi;
    if g0 >= pi - eps {
        g0 = g0 - pi;
    }
    d.j = ((g0 - d.displacement(T::zero())) / pi).round().to_i64().unwrap_or(0);
    d
}

impl<T: Scalar> LiftData<T> {
    /// arg(alpha) + Arg(1 + rho e^{-2ix}), without the j*pi term.
    fn displacement(&self, x: T) -> T {
        let (s, c) = (x + x).sin_cos();
        let re = T::one() + self.rho.0 * c + self.rho.1 * s;
        let im = self.rho.1 * c - self.rho.0 * s;
        self.arg_alpha + im.atan2(re)
    }

    fn eval(&self, x: T) -> T {
        x + self.displacement(x) + T::of(self.j as f64) * T::PI()
    }

    fn center(&self) -> T {
        self.arg_alpha + T::of(self.j as f64) * T::PI()
    }
}

/// Value of the canonical lift g_p at x.
pub fn angle_lift<T: Scalar>(p: &ProjectiveMatrix<T>, x: T) -> T {
    lift_data(p).eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CoverElement<T> {
    #[serde(rename = "matrix")]
    base: ProjectiveMatrix<T>,
    index: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", content = "n")]
pub enum CoverClass {
    Hyp(i64),
    ParPlus(i64),
    ParMinus(i64),
    Ell(i64),
    Center(i64),
}

impl CoverClass {
    pub fn index(self) -> i64 {
        match self {
            CoverClass::Hyp(n)
            | CoverClass::ParPlus(n)
            | CoverClass::ParMinus(n)
            | CoverClass::Ell(n)
            | CoverClass::Center(n) => n,
        }
    }

    /// The class of the image under conjugation by an orientation-reversing element.
    pub fn mirrored(self) -> CoverClass {
        match self {
            CoverClass::Hyp(n) => CoverClass::Hyp(-n),
            CoverClass::ParPlus(n) => CoverClass::ParMinus(-n),
            CoverClass::ParMinus(n) => CoverClass::ParPlus(-n),
            CoverClass::Ell(n) => CoverClass::Ell(-n),
            CoverClass::Center(n) => CoverClass::Center(-n),
        }
    }

    /// The class after multiplying by z^m.
    pub fn shifted(self, m: i64) -> CoverClass {
        match self {
            CoverClass::Hyp(n) => CoverClass::Hyp(n + m),
            CoverClass::ParPlus(n) => CoverClass::ParPlus(n + m),
            CoverClass::ParMinus(n) => CoverClass::ParMinus(n + m),
            CoverClass::Center(n) => CoverClass::Center(n + m),
            CoverClass::Ell(n) => {
                // Ell indices skip 0: the windows are ((n-1)pi, n pi) for n >= 1 and (n pi, (n+1)pi) for n <= -1.
                let window = if n > 0 { n - 1 } else { n };
                let w = window + m;
                CoverClass::Ell(if w >= 0 { w + 1 } else { w })
            }
        }
    }
}

impl fmt::Display for CoverClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftMode {
    ClosureHyp0,
    Eval,
}

/// Whether a parabolic whose displacement range touches a multiple of pi from
/// above (touching at the range minimum) is positive. Calibrated once on [[1,1],[0,1]].
fn plus_touches_min() -> bool {
    static CAL: OnceLock<bool> = OnceLock::new();
    *CAL.get_or_init(|| {
        let side = |m: Matrix2<f64>| {
            let e = CoverElement::new(ProjectiveMatrix::from_unit(m), 0);
            e.center() - e.touched_multiple() as f64 * std::f64::consts::PI > 0.0
        };
        let plus = side(Matrix2::upper(1.0));
        let minus = side(Matrix2::upper(-1.0));
        assert_ne!(plus, minus, "parabolic touching-side calibration is inconsistent");
        plus
    })
}

impl<T: Scalar> CoverElement<T> {
    pub fn new(base: ProjectiveMatrix<T>, index: i64) -> Self {
        CoverElement { base, index }
    }

    pub fn identity() -> Self {
        CoverElement::new(ProjectiveMatrix::identity(), 0)
    }

    /// The central generator z (translation by pi).
    pub fn z() -> Self {
        CoverElement::new(ProjectiveMatrix::identity(), 1)
    }

    pub fn z_pow(n: i64) -> Self {
        CoverElement::new(ProjectiveMatrix::identity(), n)
    }

    /// The canonical lift (index 0).
    pub fn canonical(p: ProjectiveMatrix<T>) -> Self {
        CoverElement::new(p, 0)
    }

    pub fn base(&self) -> ProjectiveMatrix<T> {
        self.base
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    /// Value of the lift at x.
    pub fn eval(&self, x: T) -> T {
        lift_data(&self.base).eval(x) + T::of(self.index as f64) * T::PI()
    }

    /// Midpoint of the displacement range.
    pub fn center(&self) -> T {
        lift_data(&self.base).center() + T::of(self.index as f64) * T::PI()
    }

    /// Displacement range [r_min, r_max] of x -> g(x) - x.
    pub fn range(&self) -> (T, T) {
        let d = lift_data(&self.base);
        let c = d.center() + T::of(self.index as f64) * T::PI();
        (c - d.w, c + d.w)
    }

    fn touched_multiple(&self) -> i64 {
        (self.center() / T::PI()).round().to_i64().unwrap_or(0)
    }

    /// The SL(2,R) matrix this element projects to: (-1)^(j+k) times the stored representative.
    pub fn sl_projection(&self) -> Matrix2<T> {
        let d = lift_data(&self.base);
        if (d.j + self.index).rem_euclid(2) == 0 {
            self.base.rep()
        } else {
            -self.base.rep()
        }
    }

    pub fn mul(&self, y: &Self) -> Result<Self> {
        let base = self.base * y.base;
        let lx = lift_data(&self.base);
        let ly = lift_data(&y.base);
        let lxy = lift_data(&base);
        let pi = T::PI();
        let diff = lx.eval(ly.eval(T::zero())) - lxy.eval(T::zero());
        let d = (diff / pi).round();
        let residual = (diff - d * pi).abs().f64();
        if !(residual < T::INDEX_GUARD) {
            return Err(Error::IndexRoundingUnstable(residual));
        }
        Ok(CoverElement::new(base, self.index + y.index + d.to_i64().unwrap_or(0)))
    }

    pub fn inverse(&self) -> Result<Self> {
        let base = self.base.inverse();
        let lx = lift_data(&self.base);
        let li = lift_data(&base);
        let pi = T::PI();
        let v = lx.eval(li.eval(T::zero()));
        let d = (v / pi).round();
        let residual = (v - d * pi).abs().f64();
        if !(residual < T::INDEX_GUARD) {
            return Err(Error::IndexRoundingUnstable(residual));
        }
        Ok(CoverElement::new(base, -self.index - d.to_i64().unwrap_or(0)))
    }

    /// g * self * g^-1.
    pub fn conj(&self, g: &Self) -> Result<Self> {
        g.mul(self)?.mul(&g.inverse()?)
    }

    /// Commutator self * y * self^-1 * y^-1.
    pub fn commutator(&self, y: &Self) -> Result<Self> {
        self.mul(y)?.mul(&self.inverse()?)?.mul(&y.inverse()?)
    }

    pub fn times_z(&self, n: i64) -> Self {
        CoverElement::new(self.base, self.index + n)
    }

    /// Conjugate by the orientation-reversing flip diag(1,-1), which acts on lifts as x -> -x.
    pub fn flipped(&self) -> Self {
        let base = self.base.flipped();
        let target = -self.eval(T::zero());
        let g0 = angle_lift(&base, T::zero());
        let k = ((target - g0) / T::PI()).round().to_i64().unwrap_or(0);
        CoverElement::new(base, k)
    }

    /// Same element up to tolerance on the base (the lift value at 0 then fixes the index).
    pub fn approx_eq(&self, o: &Self, tol: T) -> bool {
        self.base.approx_eq(&o.base, tol) && (self.eval(T::zero()) - o.eval(T::zero())).abs() < T::of(0.5)
    }

    pub fn classify(&self) -> Result<CoverClass> {
        let pi = T::PI();
        let guard = T::of(T::RANGE_GUARD);
        let d = lift_data(&self.base);
        let c = d.center() + T::of(self.index as f64) * pi;
        let w = d.w;
        match classify_psl(&self.base) {
            PslType::Identity => Ok(CoverClass::Center((c / pi).round().to_i64().unwrap_or(0))),
            PslType::Hyperbolic => {
                let n = (c / pi).round();
                let gap = w - (c - n * pi).abs();
                if gap < guard {
                    return Err(Error::DegenerateRange(gap.f64()));
                }
                Ok(CoverClass::Hyp(n.to_i64().unwrap_or(0)))
            }
            PslType::ParabolicPlus | PslType::ParabolicMinus => {
                let n = (c / pi).round();
                let off = c - n * pi;
                if off.abs() < guard {
                    return Err(Error::DegenerateRange(off.f64()));
                }
                let n = n.to_i64().unwrap_or(0);
                if (off > T::zero()) == plus_touches_min() {
                    Ok(CoverClass::ParPlus(n))
                } else {
                    Ok(CoverClass::ParMinus(n))
                }
            }
            PslType::Elliptic => {
                let m = ((c - w) / pi).floor();
                let lo = (c - w) - m * pi;
                let hi = (m + T::one()) * pi - (c + w);
                if lo < guard || hi < guard {
                    return Err(Error::DegenerateRange(lo.min(hi).f64()));
                }
                let m = m.to_i64().unwrap_or(0);
                Ok(CoverClass::Ell(if m >= 0 { m + 1 } else { m }))
            }
        }
    }
}

/// The unique lift of `p` with class index 0 (ClosureHyp0), or additionally the Ell(1) lift of an elliptic (Eval).
pub fn special_lift<T: Scalar>(p: &ProjectiveMatrix<T>, mode: LiftMode) -> Result<CoverElement<T>> {
    let d = lift_data(p);
    let s = d.center() / T::PI();
    if classify_psl(p) == PslType::Elliptic {
        if mode == LiftMode::ClosureHyp0 {
            return Err(Error::EllipticHasNoHyp0Lift);
        }
        return Ok(CoverElement::new(*p, -s.floor().to_i64().unwrap_or(0)));
    }
    Ok(CoverElement::new(*p, -s.round().to_i64().unwrap_or(0)))
}

impl<T: Scalar> fmt::Display for CoverElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.base, self.index)
    }
}
