//! 2x2 real matrices, PSL(2,R) normalization and Mobius-type classification.

use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Scalar> Matrix2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Matrix2 { a11, a12, a21, a22 }
    }

    pub fn from_f64(m: [f64; 4]) -> Self {
        Matrix2::new(T::of(m[0]), T::of(m[1]), T::of(m[2]), T::of(m[3]))
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [self.a11.f64(), self.a12.f64(), self.a21.f64(), self.a22.f64()]
    }

    pub fn identity() -> Self {
        Matrix2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(a: T, d: T) -> Self {
        Matrix2::new(a, T::zero(), T::zero(), d)
    }

    /// diag(l, 1/l).
    pub fn stretch(l: T) -> Self {
        Matrix2::diag(l, l.recip())
    }

    /// [[1, s], [0, 1]].
    pub fn upper(s: T) -> Self {
        Matrix2::new(T::one(), s, T::zero(), T::one())
    }

    /// [[1, 0], [s, 1]].
    pub fn lower(s: T) -> Self {
        Matrix2::new(T::one(), T::zero(), s, T::one())
    }

    /// [[cos t, sin t], [-sin t, cos t]]; acts on the angle line as x -> x + t.
    pub fn rotation(t: T) -> Self {
        let (s, c) = t.sin_cos();
        Matrix2::new(c, s, -s, c)
    }

    /// diag(1, -1), the orientation-reversing flip.
    pub fn flip() -> Self {
        Matrix2::diag(T::one(), -T::one())
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Matrix2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn scale(&self, s: T) -> Self {
        Matrix2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Matrix2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }

    pub fn max_abs(&self) -> T {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs().max(self.a22.abs()))
    }

    /// Largest entrywise difference.
    pub fn dist(&self, o: &Self) -> T {
        self.sub(o).max_abs()
    }

    /// g * self * g^-1.
    pub fn conj(&self, g: &Self) -> Self {
        *g * *self * g.inverse()
    }

    /// Rescale by 1/sqrt(det); det must be positive. Left unchanged when det is 1 up to its own rounding error,
    /// so stored unit matrices survive a serialization round trip bit for bit.
    pub fn renormalized(&self) -> Self {
        let d = self.det();
        let err = (self.a11 * self.a22).abs() + (self.a12 * self.a21).abs();
        if (d - T::one()).abs() <= T::epsilon() * T::of(4.0) * err {
            return *self;
        }
        self.scale(d.sqrt().recip())
    }

    pub fn apply(&self, v: (T, T)) -> (T, T) {
        (self.a11 * v.0 + self.a12 * v.1, self.a21 * v.0 + self.a22 * v.1)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl<T: Scalar> Mul for Matrix2<T> {
    type Output = Matrix2<T>;

    fn mul(self, o: Self) -> Self {
        Matrix2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl<T: Scalar> Neg for Matrix2<T> {
    type Output = Matrix2<T>;

    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> fmt::Display for Matrix2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

impl<T: Scalar> Serialize for Matrix2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_f64().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Matrix2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = <[f64; 4]>::deserialize(d)?;
        Ok(Matrix2::from_f64(m))
    }
}

/// A PSL(2,R) element stored as its canonical-sign unit-determinant representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveMatrix<T> {
    rep: Matrix2<T>,
}

fn sign_fix<T: Scalar>(m: Matrix2<T>) -> Matrix2<T> {
    let lead = if m.a11 != T::zero() {
        m.a11
    } else if m.a12 != T::zero() {
        m.a12
    } else {
        m.a21
    };
    if lead < T::zero() {
        -m
    } else {
        m
    }
}

/// Canonical PSL representative of `m`, which must have determinant close to 1.
pub fn normalize<T: Scalar>(m: Matrix2<T>) -> Result<ProjectiveMatrix<T>> {
    let d = m.det();
    if !m.is_finite() || d <= T::zero() || (d - T::one()).abs().f64() >= T::DET_TOL {
        return Err(Error::NonUnitDeterminant(d.f64()));
    }
    Ok(ProjectiveMatrix { rep: sign_fix(m.renormalized()) })
}

impl<T: Scalar> ProjectiveMatrix<T> {
    pub fn identity() -> Self {
        ProjectiveMatrix { rep: Matrix2::identity() }
    }

    /// Renormalize a product of unit-determinant matrices; drift is absorbed silently.
    pub(crate) fn from_unit(m: Matrix2<T>) -> Self {
        ProjectiveMatrix { rep: sign_fix(m.renormalized()) }
    }

    pub fn from_f64(m: [f64; 4]) -> Result<Self> {
        normalize(Matrix2::from_f64(m))
    }

    pub fn rep(&self) -> Matrix2<T> {
        self.rep
    }

    pub fn inverse(&self) -> Self {
        ProjectiveMatrix::from_unit(self.rep.inverse())
    }

    pub fn conj(&self, g: &Self) -> Self {
        ProjectiveMatrix::from_unit(self.rep.conj(&g.rep))
    }

    pub fn abs_trace(&self) -> T {
        self.rep.trace().abs()
    }

    /// Distance in PSL: entrywise, minimized over the sign ambiguity.
    pub fn dist(&self, o: &Self) -> T {
        self.rep.dist(&o.rep).min(self.rep.dist(&(-o.rep)))
    }

    pub fn approx_eq(&self, o: &Self, tol: T) -> bool {
        self.dist(o) <= tol
    }

    pub fn is_identity(&self, tol: T) -> bool {
        self.rep.dist(&Matrix2::identity()) <= tol
    }

    /// Conjugate by diag(1,-1).
    pub fn flipped(&self) -> Self {
        ProjectiveMatrix::from_unit(Matrix2::new(self.rep.a11, -self.rep.a12, -self.rep.a21, self.rep.a22))
    }

    pub fn classify(&self) -> PslType {
        classify_psl(self)
    }
}

impl<T: Scalar> Mul for ProjectiveMatrix<T> {
    type Output = ProjectiveMatrix<T>;

    fn mul(self, o: Self) -> Self {
        ProjectiveMatrix::from_unit(self.rep * o.rep)
    }
}

impl<T: Scalar> fmt::Display for ProjectiveMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

impl<T: Scalar> Serialize for ProjectiveMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rep.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ProjectiveMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix2::<T>::deserialize(d)?;
        normalize(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PslType {
    Hyperbolic,
    ParabolicPlus,
    ParabolicMinus,
    Elliptic,
    Identity,
}

impl PslType {
    pub fn is_parabolic(self) -> bool {
        matches!(self, PslType::ParabolicPlus | PslType::ParabolicMinus)
    }

    /// +1 / -1 for parabolics, 0 otherwise.
    pub fn sign(self) -> i8 {
        match self {
            PslType::ParabolicPlus => 1,
            PslType::ParabolicMinus => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for PslType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Unit-determinant representative with positive trace (the "trace +2 lift" for parabolics).
fn positive_rep<T: Scalar>(p: &ProjectiveMatrix<T>) -> Matrix2<T> {
    if p.rep.trace() < T::zero() {
        -p.rep
    } else {
        p.rep
    }
}

pub fn classify_psl<T: Scalar>(p: &ProjectiveMatrix<T>) -> PslType {
    let t = p.abs_trace();
    let band = T::of(T::PAR_BAND);
    let two = T::of(2.0);
    if t > two + band {
        return PslType::Hyperbolic;
    }
    if t < two - band {
        return PslType::Elliptic;
    }
    let s = positive_rep(p);
    let (b, c) = (s.a12, s.a21);
    if s.dist(&Matrix2::identity()) <= band {
        return PslType::Identity;
    }
    // For a true parabolic b*c <= 0, so the larger off-diagonal entry decides robustly.
    let plus = if b.abs() >= c.abs() { b > T::zero() } else { c < T::zero() };
    if plus {
        PslType::ParabolicPlus
    } else {
        PslType::ParabolicMinus
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FixedDirections<T> {
    All,
    Angles(Vec<T>),
}

fn eigenvector<T: Scalar>(m: &Matrix2<T>, mu: T) -> (T, T) {
    let u = (m.a12, mu - m.a11);
    let v = (mu - m.a22, m.a21);
    if u.0.hypot(u.1) >= v.0.hypot(v.1) {
        u
    } else {
        v
    }
}

fn direction_angle<T: Scalar>(v: (T, T)) -> T {
    let a = v.1.atan2(v.0);
    let pi = T::PI();
    let r = a - (a / pi).floor() * pi;
    if r >= pi {
        T::zero()
    } else {
        r
    }
}

fn hyperbolic_eigenvalue<T: Scalar>(t: T) -> T {
    (t + (t * t - T::of(4.0)).max(T::zero()).sqrt()) / T::of(2.0)
}

/// Directions (cos th, sin th), th in [0, pi), fixed projectively by `p`, sorted.
pub fn fixed_directions<T: Scalar>(p: &ProjectiveMatrix<T>) -> FixedDirections<T> {
    let s = positive_rep(p);
    match classify_psl(p) {
        PslType::Identity => FixedDirections::All,
        PslType::Elliptic => FixedDirections::Angles(Vec::new()),
        PslType::ParabolicPlus | PslType::ParabolicMinus => {
            FixedDirections::Angles(vec![direction_angle(eigenvector(&s, T::one()))])
        }
        PslType::Hyperbolic => {
            let l = hyperbolic_eigenvalue(s.trace());
            let mut v = vec![
                direction_angle(eigenvector(&s, l)),
                direction_angle(eigenvector(&s, l.recip())),
            ];
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            FixedDirections::Angles(v)
        }
    }
}

/// Whether the fixed-direction pairs of two hyperbolics strictly interleave on [0, pi).
pub fn axes_cross<T: Scalar>(p: &ProjectiveMatrix<T>, q: &ProjectiveMatrix<T>) -> Result<bool> {
    let (FixedDirections::Angles(a), FixedDirections::Angles(b)) = (fixed_directions(p), fixed_directions(q))
    else {
        return Err(Error::NotHyperbolic);
    };
    if a.len() != 2 || b.len() != 2 {
        return Err(Error::NotHyperbolic);
    }
    let inside = |x: T| x > a[0] && x < a[1];
    let on = |x: T| x == a[0] || x == a[1];
    if b.iter().any(|&x| on(x)) {
        return Ok(false);
    }
    Ok(inside(b[0]) != inside(b[1]))
}

/// Normal form of a PSL element up to conjugation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalForm<T> {
    Identity,
    /// diag(l, 1/l), l > 1.
    Stretch(T),
    /// [[1, s], [0, 1]], s = +-1.
    Shear(T),
    /// rotation(th), th in (0, pi).
    Rotation(T),
}

impl<T: Scalar> NormalForm<T> {
    /// The time-t element of the one-parameter subgroup through the normal form.
    pub fn at(&self, t: T) -> Matrix2<T> {
        match *self {
            NormalForm::Identity => Matrix2::identity(),
            NormalForm::Stretch(l) => Matrix2::stretch(l.powf(t)),
            NormalForm::Shear(s) => Matrix2::upper(s * t),
            NormalForm::Rotation(th) => Matrix2::rotation(th * t),
        }
    }

    pub fn matrix(&self) -> Matrix2<T> {
        self.at(T::one())
    }
}

/// A frame F with F^-1 * p * F equal to the normal form (as SL matrices).
pub fn frame<T: Scalar>(p: &ProjectiveMatrix<T>) -> (Matrix2<T>, NormalForm<T>) {
    let s = positive_rep(p);
    match classify_psl(p) {
        PslType::Identity => (Matrix2::identity(), NormalForm::Identity),
        PslType::Hyperbolic => {
            let l = hyperbolic_eigenvalue(s.trace());
            let v1 = eigenvector(&s, l);
            let mut v2 = eigenvector(&s, l.recip());
            let mut f = Matrix2::new(v1.0, v2.0, v1.1, v2.1);
            if f.det() < T::zero() {
                v2 = (-v2.0, -v2.1);
                f = Matrix2::new(v1.0, v2.0, v1.1, v2.1);
            }
            (f.renormalized(), NormalForm::Stretch(l))
        }
        PslType::ParabolicPlus | PslType::ParabolicMinus => {
            let sg = if classify_psl(p) == PslType::ParabolicPlus { T::one() } else { -T::one() };
            let n = s.sub(&Matrix2::identity());
            let u1 = n.apply((T::one(), T::zero()));
            let u2 = n.apply((T::zero(), T::one()));
            let (u, w) = if u1.0.hypot(u1.1) >= u2.0.hypot(u2.1) {
                (u1, (T::one(), T::zero()))
            } else {
                (u2, (T::zero(), T::one()))
            };
            let d = (u.0 * w.1 - u.1 * w.0).abs();
            let a = d.sqrt().recip();
            let f = Matrix2::new(a * u.0, sg * a * w.0, a * u.1, sg * a * w.1);
            (f, NormalForm::Shear(sg))
        }
        PslType::Elliptic => {
            // Representative whose a21 < 0 is the rotation-angle-in-(0,pi) one.
            let r = if p.rep.a21 < T::zero() { p.rep } else { -p.rep };
            let c = (r.trace() / T::of(2.0)).max(-T::one()).min(T::one());
            let th = c.acos();
            let sn = th.sin();
            let m = r.sub(&Matrix2::identity().scale(c)).scale(sn.recip());
            let f = Matrix2::new(T::one(), -m.a11, T::zero(), -m.a21);
            (f.renormalized(), NormalForm::Rotation(th))
        }
    }
}

/// The time-t element of the one-parameter subgroup through `p` (t = 1 gives `p`).
pub fn flow<T: Scalar>(p: &ProjectiveMatrix<T>, t: T) -> ProjectiveMatrix<T> {
    // Hyperbolic and parabolic flows as a I + b G, which commute with G up to roundoff.
    let g = if p.rep().trace() < T::zero() { -p.rep() } else { p.rep() };
    let two = T::of(2.0);
    let (a, b) = match classify_psl(p) {
        PslType::Hyperbolic => {
            let mu = (g.trace() / two).acosh();
            let b = (t * mu).sinh() / mu.sinh();
            ((t * mu).cosh() - b * mu.cosh(), b)
        }
        PslType::ParabolicPlus | PslType::ParabolicMinus => (T::one() - t, t),
        _ => {
            let (f, nf) = frame(p);
            return ProjectiveMatrix::from_unit(nf.at(t).conj(&f));
        }
    };
    let m = Matrix2::new(a + b * g.a11, b * g.a12, b * g.a21, a + b * g.a22);
    ProjectiveMatrix::from_unit(m.renormalized())
}

/// G with G p G^-1 = q.
pub fn conjugator<T: Scalar>(p: &ProjectiveMatrix<T>, q: &ProjectiveMatrix<T>) -> Result<ProjectiveMatrix<T>> {
    let (tp, tq) = (classify_psl(p), classify_psl(q));
    if tp != tq {
        return Err(Error::NotConjugate(format!("types {tp} and {tq}")));
    }
    let (fp, np) = frame(p);
    let (fq, nq) = frame(q);
    let tol = T::of(T::MATCH_TOL);
    match (np, nq) {
        (NormalForm::Stretch(a), NormalForm::Stretch(b)) => {
            let (ta, tb) = (a + a.recip(), b + b.recip());
            if (ta - tb).abs() > tol * ta.max(T::one()) {
                return Err(Error::NotConjugate(format!("traces {ta} and {tb}")));
            }
        }
        (NormalForm::Rotation(a), NormalForm::Rotation(b)) => {
            if (a - b).abs() > tol {
                return Err(Error::NotConjugate(format!("rotation angles {a} and {b}")));
            }
        }
        _ => {}
    }
    let g = ProjectiveMatrix::from_unit(fq * fp.inverse());
    let scale = q.rep.max_abs().max(T::one());
    let err = p.conj(&g).dist(q);
    if err > tol * scale * T::of(10.0) {
        return Err(Error::NotConjugate(format!("verification residual {err}")));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type M = Matrix2<f64>;
    type P = ProjectiveMatrix<f64>;

    fn p(m: [f64; 4]) -> P {
        P::from_f64(m).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(p([-1.0, 0.0, 0.0, -1.0]).rep(), M::identity());
        assert_eq!(p([0.0, -2.0, 0.5, 0.0]).rep().to_f64(), [0.0, 2.0, -0.5, 0.0]);
        assert!(matches!(P::from_f64([1.0, 0.0, 0.0, 2.0]), Err(Error::NonUnitDeterminant(_))));
        assert!(P::from_f64([0.0, 1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(p([1.0, 1.0, 0.0, 1.0]).classify(), PslType::ParabolicPlus);
        assert_eq!(p([1.0, 0.0, 2.0, 1.0]).classify(), PslType::ParabolicMinus);
        assert_eq!(p([-1.0, 0.0, -2.0, -1.0]).classify(), PslType::ParabolicMinus);
        assert_eq!(p([2.0, 0.0, 0.0, 0.5]).classify(), PslType::Hyperbolic);
        assert_eq!(P::from_unit(M::rotation(PI / 3.0)).classify(), PslType::Elliptic);
        assert_eq!(P::identity().classify(), PslType::Identity);
    }

    #[test]
    fn fixed_direction_examples() {
        let FixedDirections::Angles(a) = fixed_directions(&p([2.0, 0.0, 0.0, 0.5])) else { panic!() };
        assert!((a[0] - 0.0).abs() < 1e-12 && (a[1] - PI / 2.0).abs() < 1e-12);
        assert_eq!(fixed_directions(&p([1.0, 1.0, 0.0, 1.0])), FixedDirections::Angles(vec![0.0]));
        assert_eq!(fixed_directions(&P::from_unit(M::rotation(PI / 3.0))), FixedDirections::Angles(vec![]));
        assert_eq!(fixed_directions(&P::identity()), FixedDirections::All);
    }

    #[test]
    fn axes_cross_examples() {
        let a = p([2.0, 0.0, 0.0, 0.5]);
        let r = P::from_unit(M::rotation(PI / 4.0));
        let b = a.conj(&r);
        assert!(axes_cross(&a, &b).unwrap());
        let comm = a.rep() * b.rep() * a.rep().inverse() * b.rep().inverse();
        assert!(comm.trace() < 2.0);

        let fr = M::new(0.1f64.cos(), 0.3f64.cos(), 0.1f64.sin(), 0.3f64.sin()).renormalized();
        let c = P::from_unit(M::stretch(3.0).conj(&fr));
        let FixedDirections::Angles(dirs) = fixed_directions(&c) else { panic!() };
        assert!((dirs[0] - 0.1).abs() < 1e-9 && (dirs[1] - 0.3).abs() < 1e-9);
        assert!(!axes_cross(&a, &c).unwrap());
        let comm = a.rep() * c.rep() * a.rep().inverse() * c.rep().inverse();
        assert!(comm.trace() >= 2.0);

        assert!(!axes_cross(&a, &a).unwrap());
        assert_eq!(axes_cross(&a, &r), Err(Error::NotHyperbolic));
    }

    #[test]
    fn conjugator_examples() {
        let a = p([2.0, 0.0, 0.0, 0.5]);
        let g = conjugator(&a, &a).unwrap();
        assert!(a.conj(&g).approx_eq(&a, 1e-12));
        let b = a.conj(&P::from_unit(M::rotation(PI / 4.0)));
        let g = conjugator(&a, &b).unwrap();
        assert!(a.conj(&g).approx_eq(&b, 1e-10));
        assert!(matches!(conjugator(&a, &p([3.0, 0.0, 0.0, 1.0 / 3.0])), Err(Error::NotConjugate(_))));
        assert!(matches!(
            conjugator(&p([1.0, 1.0, 0.0, 1.0]), &p([1.0, -1.0, 0.0, 1.0])),
            Err(Error::NotConjugate(_))
        ));
    }

    #[test]
    fn frames_give_normal_forms() {
        for m in [[2.0, 1.0, 3.0, 2.0], [1.0, 0.0, -3.0, 1.0], [0.5, 1.0, -1.0, 0.0], [-1.0, 4.0, -0.5, 1.0]] {
            let q = P::from_unit(M::from_f64(m));
            let (f, nf) = frame(&q);
            assert!((f.det() - 1.0).abs() < 1e-12);
            let back = P::from_unit(nf.matrix().conj(&f));
            assert!(back.approx_eq(&q, 1e-10), "{m:?}");
            assert!(flow(&q, 1.0).approx_eq(&q, 1e-10));
        }
    }

    #[test]
    fn generic_over_f32() {
        let q = ProjectiveMatrix::<f32>::from_f64([1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(q.classify(), PslType::ParabolicPlus);
        let r = ProjectiveMatrix::<f32>::from_unit(Matrix2::rotation(0.7f32));
        assert_eq!(r.classify(), PslType::Elliptic);
    }
}
