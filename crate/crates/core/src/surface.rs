//! Punctured-surface presentations and their PSL(2,R) representations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cover::{special_lift, LiftMode};
use crate::error::{Error, Result};
use crate::mobius::{classify_psl, Matrix2, PslType};
use crate::word::{Generator, Letter, Word};
use crate::{Cover, Matrix, Psl};

/// Sigma_{g,p}: genus g with p >= 1 punctures and negative Euler characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Surface {
    pub genus: usize,
    pub punctures: usize,
}

impl Surface {
    pub fn new(genus: usize, punctures: usize) -> Result<Surface> {
        if punctures == 0 || 2 * genus + punctures < 3 {
            return Err(Error::InvalidSurface { genus, punctures });
        }
        Ok(Surface { genus, punctures })
    }

    pub fn chi(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.punctures as i64
    }

    /// a1, b1, ..., ag, bg, c1, ..., c_{p-1}.
    pub fn free_generators(&self) -> Vec<Generator> {
        let mut v = Vec::with_capacity(2 * self.genus + self.punctures - 1);
        for j in 1..=self.genus {
            v.push(Generator::A(j));
            v.push(Generator::B(j));
        }
        for i in 1..self.punctures {
            v.push(Generator::C(i));
        }
        v
    }

    /// Free generators plus the last peripheral c_p.
    pub fn all_generators(&self) -> Vec<Generator> {
        let mut v = self.free_generators();
        v.push(Generator::C(self.punctures));
        v
    }

    pub fn slot(&self, g: Generator) -> Option<usize> {
        match g {
            Generator::A(j) if (1..=self.genus).contains(&j) => Some(2 * (j - 1)),
            Generator::B(j) if (1..=self.genus).contains(&j) => Some(2 * (j - 1) + 1),
            Generator::C(i) if (1..self.punctures).contains(&i) => Some(2 * self.genus + i - 1),
            _ => None,
        }
    }

    pub fn has_generator(&self, g: Generator) -> bool {
        self.slot(g).is_some() || g == Generator::C(self.punctures)
    }

    /// [a1,b1]...[aj,bj] c1...ck.
    pub fn gamma(&self, j: usize, k: usize) -> Word {
        let mut parts = Vec::new();
        for i in 1..=j {
            parts.push(Word::commutator(&Word::gen(Generator::A(i)), &Word::gen(Generator::B(i))));
        }
        for i in 1..=k {
            parts.push(Word::gen(Generator::C(i)));
        }
        Word::product(parts.iter())
    }

    /// The full relator including c_p.
    pub fn relator(&self) -> Word {
        self.gamma(self.genus, self.punctures)
    }

    /// Defining word of c_p in the free generators.
    pub fn cp_word(&self) -> Word {
        self.gamma(self.genus, self.punctures - 1).inverse()
    }

    /// Rewrite a word over all generators as a reduced word in the free generators.
    pub fn eliminate_cp(&self, w: &Word) -> Word {
        let cp = Generator::C(self.punctures);
        let def = self.cp_word();
        w.substitute(|g| (g == cp).then(|| def.clone()))
    }

    /// Whether gamma(j,k) splits into two pieces of negative Euler characteristic.
    pub fn valid_split(&self, j: usize, k: usize) -> bool {
        j <= self.genus && k < self.punctures && 2 * j + k >= 2 && 2 * (self.genus - j) + self.punctures - k >= 2
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S({},{})", self.genus, self.punctures)
    }
}

/// Verdict of the generalized Milnor-Wood inequality chi + p+ <= n <= -chi - p-.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MwVerdict {
    FeasibleIff,
    FeasibleSufficient,
    Infeasible,
    Unknown,
}

pub fn sign_counts(s: &[i8]) -> (usize, usize, usize) {
    let plus = s.iter().filter(|&&x| x > 0).count();
    let minus = s.iter().filter(|&&x| x < 0).count();
    (plus, s.len() - plus - minus, minus)
}

pub fn mw_bounds(genus: usize, punctures: usize, n: i64, s: &[i8]) -> MwVerdict {
    let chi = 2 - 2 * genus as i64 - punctures as i64;
    let (plus, zero, minus) = sign_counts(s);
    let holds = chi + plus as i64 <= n && n <= -chi - minus as i64;
    match (zero >= 1, holds) {
        (true, true) => MwVerdict::FeasibleIff,
        (true, false) => MwVerdict::Infeasible,
        (false, true) => MwVerdict::FeasibleSufficient,
        (false, false) => MwVerdict::Unknown,
    }
}

pub fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|t| match t.trim() {
            "+" | "+1" | "1" => Ok(1),
            "-" | "-1" | "\u{2212}" => Ok(-1),
            "0" => Ok(0),
            other => Err(Error::Parse(format!("bad sign token {other:?}"))),
        })
        .collect()
}

pub fn format_signs(s: &[i8]) -> String {
    s.iter()
        .map(|&x| match x {
            1 => "+",
            -1 => "-",
            _ => "0",
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Images of the free generators; c_p is implied by the relator.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    surface: Surface,
    images: Vec<Psl>,
    pub meta: BTreeMap<String, Value>,
}

fn product_of(ms: impl IntoIterator<Item = Matrix2<f64>>) -> Psl {
    let mut acc = Matrix2::identity();
    for (i, m) in ms.into_iter().enumerate() {
        acc = acc * m;
        if i % 8 == 7 {
            acc = acc.renormalized();
        }
    }
    Psl::from_unit(acc)
}

impl Representation {
    pub fn new(surface: Surface, images: Vec<Psl>) -> Result<Representation> {
        if images.len() != surface.free_generators().len() {
            return Err(Error::Parse(format!(
                "{} images given for {} free generators",
                images.len(),
                surface.free_generators().len()
            )));
        }
        Ok(Representation { surface, images, meta: BTreeMap::new() })
    }

    pub fn from_map(surface: Surface, map: &BTreeMap<Generator, Psl>) -> Result<Representation> {
        let images = surface
            .free_generators()
            .iter()
            .map(|g| map.get(g).copied().ok_or_else(|| Error::UnknownGenerator(g.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(surface, images)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn free_images(&self) -> &[Psl] {
        &self.images
    }

    pub fn image(&self, g: Generator) -> Result<Psl> {
        if let Some(i) = self.surface.slot(g) {
            return Ok(self.images[i]);
        }
        if g == Generator::C(self.surface.punctures) {
            return self.eval_word(&self.surface.cp_word());
        }
        Err(Error::UnknownGenerator(g.to_string()))
    }

    /// Image of the i-th peripheral (1-based, c_p included).
    pub fn peripheral(&self, i: usize) -> Result<Psl> {
        self.image(Generator::C(i))
    }

    pub fn peripherals(&self) -> Result<Vec<Psl>> {
        (1..=self.surface.punctures).map(|i| self.peripheral(i)).collect()
    }

    fn letter_matrix(&self, l: &Letter, cp: &Option<Psl>) -> Result<Matrix2<f64>> {
        let m = match self.surface.slot(l.gen) {
            Some(i) => self.images[i],
            None if l.gen == Generator::C(self.surface.punctures) => cp.expect("c_p image precomputed"),
            None => return Err(Error::UnknownGenerator(l.gen.to_string())),
        };
        Ok(if l.inv { m.rep().inverse() } else { m.rep() })
    }

    pub fn eval_word(&self, w: &Word) -> Result<Psl> {
        let cpg = Generator::C(self.surface.punctures);
        let cp = if w.letters().iter().any(|l| l.gen == cpg) {
            Some(self.eval_word(&self.surface.cp_word())?)
        } else {
            None
        };
        let ms = w.letters().iter().map(|l| self.letter_matrix(l, &cp)).collect::<Result<Vec<_>>>()?;
        Ok(product_of(ms))
    }

    /// Lifted relator product; returns the central power n with product z^n.
    pub fn euler_class(&self) -> Result<i64> {
        let g = self.surface.genus;
        let periph = self.peripherals()?;
        let mut lifts = Vec::with_capacity(periph.len());
        for (i, c) in periph.iter().enumerate() {
            match classify_psl(c) {
                PslType::Elliptic | PslType::Identity => return Err(Error::NotHP(i + 1)),
                _ => lifts.push(special_lift(c, LiftMode::ClosureHyp0)?),
            }
        }
        let mut acc = Cover::identity();
        for j in 0..g {
            let a = Cover::canonical(self.images[2 * j]);
            let b = Cover::canonical(self.images[2 * j + 1]);
            acc = acc.mul(&a.commutator(&b)?)?;
        }
        for l in &lifts {
            acc = acc.mul(l)?;
        }
        let defect = acc.base().dist(&Psl::identity());
        if defect > 1e-8 * self.scale() {
            return Err(Error::RelatorNotCentral(defect));
        }
        Ok((acc.eval(0.0) / std::f64::consts::PI).round() as i64)
    }

    /// Tolerance scale for relator checks: grows with the size of the entries.
    fn scale(&self) -> f64 {
        let m = self.images.iter().map(|p| p.rep().max_abs()).fold(1.0, f64::max);
        m * m
    }

    pub fn sign_vector(&self) -> Result<Vec<i8>> {
        self.peripherals()?
            .iter()
            .enumerate()
            .map(|(i, c)| match classify_psl(c) {
                PslType::Hyperbolic => Ok(0),
                PslType::ParabolicPlus => Ok(1),
                PslType::ParabolicMinus => Ok(-1),
                _ => Err(Error::NotHP(i + 1)),
            })
            .collect()
    }

    pub fn is_type_preserving(&self) -> Result<bool> {
        Ok(self.peripherals()?.iter().all(|c| classify_psl(c).is_parabolic()))
    }

    /// [a1,b1]...[ag,bg] c1...c_{p-1} in the cover, peripherals lifted into Hyp0-closure or Ell1.
    pub fn evaluation_map(&self) -> Result<Cover> {
        let mut acc = Cover::identity();
        for j in 0..self.surface.genus {
            let a = Cover::canonical(self.images[2 * j]);
            let b = Cover::canonical(self.images[2 * j + 1]);
            acc = acc.mul(&a.commutator(&b)?)?;
        }
        for i in 1..self.surface.punctures {
            acc = acc.mul(&special_lift(&self.image(Generator::C(i))?, LiftMode::Eval)?)?;
        }
        Ok(acc)
    }

    /// Restrict along gamma(j,k): the left piece carries a1..aj, b1..bj, c1..ck with
    /// boundary gamma^-1; the right piece carries the remaining generators
    /// (handles conjugated by c1...ck) with boundary gamma.
    pub fn restrict(&self, j: usize, k: usize) -> Result<(Representation, Representation)> {
        let s = self.surface;
        if !s.valid_split(j, k) {
            return Err(Error::InvalidSplitting(j, k));
        }
        let gamma = self.eval_word(&s.gamma(j, k))?;
        match classify_psl(&gamma) {
            PslType::Elliptic => return Err(Error::BoundaryElliptic),
            PslType::Identity => return Err(Error::BoundaryNotHyperbolic("identity".into())),
            _ => {}
        }
        let left_s = Surface::new(j, k + 1)?;
        let mut left = Vec::new();
        for i in 1..=j {
            left.push(self.image(Generator::A(i))?);
            left.push(self.image(Generator::B(i))?);
        }
        for i in 1..=k {
            left.push(self.image(Generator::C(i))?);
        }
        let right_s = Surface::new(s.genus - j, s.punctures - k + 1)?;
        let c1 = self.eval_word(&s.gamma(0, k))?;
        let ci = c1.inverse();
        let mut right = Vec::new();
        for i in j + 1..=s.genus {
            right.push(ci * self.image(Generator::A(i))? * c1);
            right.push(ci * self.image(Generator::B(i))? * c1);
        }
        for i in k + 1..=s.punctures {
            right.push(self.image(Generator::C(i))?);
        }
        Ok((Representation::new(left_s, left)?, Representation::new(right_s, right)?))
    }

    /// All images conjugated by g.
    pub fn conjugated(&self, g: &Psl) -> Representation {
        let images = self.images.iter().map(|m| m.conj(g)).collect();
        Representation { surface: self.surface, images, meta: self.meta.clone() }
    }

    /// Conjugate to (locally) minimize the summed squared entries of the free images.
    pub fn balanced(&self) -> Representation {
        let cost = |g: &Matrix| -> f64 {
            let gi = g.inverse();
            self.images
                .iter()
                .map(|m| {
                    let c = *g * m.rep() * gi;
                    c.a11 * c.a11 + c.a12 * c.a12 + c.a21 * c.a21 + c.a22 * c.a22
                })
                .sum()
        };
        let mut g = Matrix::identity();
        let mut best = cost(&g);
        let mut step = 0.5f64;
        while step > 1e-7 {
            let mut improved = false;
            for d in [
                Matrix::stretch(step.exp()),
                Matrix::stretch((-step).exp()),
                Matrix::upper(step),
                Matrix::upper(-step),
                Matrix::lower(step),
                Matrix::lower(-step),
            ] {
                let cand = d * g;
                let c = cost(&cand);
                if c < best {
                    best = c;
                    g = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        self.conjugated(&Psl::from_unit(g))
    }

    /// All images conjugated by diag(1,-1).
    pub fn flipped(&self) -> Representation {
        let images = self.images.iter().map(|m| m.flipped()).collect();
        Representation { surface: self.surface, images, meta: self.meta.clone() }
    }

    /// phi o f, where f sends each free generator to a word (generators not listed are fixed).
    pub fn precompose(&self, f: &BTreeMap<Generator, Word>) -> Result<Representation> {
        let images = self
            .surface
            .free_generators()
            .iter()
            .map(|g| match f.get(g) {
                Some(w) => self.eval_word(w),
                None => self.image(*g),
            })
            .collect::<Result<Vec<_>>>()?;
        Representation::new(self.surface, images)
    }

    pub fn with_meta(mut self, key: &str, v: Value) -> Representation {
        self.meta.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> RepresentationJson {
        let images = self
            .surface
            .free_generators()
            .iter()
            .zip(&self.images)
            .map(|(g, m)| (g.to_string(), m.rep().to_f64()))
            .collect();
        RepresentationJson { surface: self.surface, images, meta: self.meta.clone() }
    }

    pub fn from_json(j: &RepresentationJson) -> Result<Representation> {
        let s = Surface::new(j.surface.genus, j.surface.punctures)?;
        let mut map = BTreeMap::new();
        for (name, m) in &j.images {
            let g: Generator = name.parse()?;
            if !s.has_generator(g) {
                return Err(Error::UnknownGenerator(name.clone()));
            }
            map.insert(g, Psl::from_f64(*m)?);
        }
        let explicit_cp = map.remove(&Generator::C(s.punctures));
        let mut rep = Representation::from_map(s, &map)?;
        rep.meta = j.meta.clone();
        if let Some(cp) = explicit_cp {
            let d = rep.peripheral(s.punctures)?.dist(&cp);
            if d > 1e-8 * rep.scale() {
                return Err(Error::RelatorMismatch(d));
            }
        }
        Ok(rep)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Representation> {
        let j: RepresentationJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Representation::from_json(&j)
    }
}

/// Serialized form of a representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationJson {
    pub surface: Surface,
    pub images: BTreeMap<String, [f64; 4]>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn p(m: [f64; 4]) -> Psl {
        Psl::from_f64(m).unwrap()
    }

    fn pants(c1: [f64; 4], c2: [f64; 4]) -> Representation {
        Representation::new(Surface::new(0, 3).unwrap(), vec![p(c1), p(c2)]).unwrap()
    }

    #[test]
    fn surfaces() {
        assert!(Surface::new(0, 2).is_err());
        assert!(Surface::new(1, 0).is_err());
        let s = Surface::new(1, 2).unwrap();
        assert_eq!(s.chi(), -2);
        assert_eq!(s.relator().to_string(), "a1 b1 a1^-1 b1^-1 c1 c2");
        assert_eq!(s.cp_word().to_string(), "c1^-1 b1 a1 b1^-1 a1^-1");
        assert!(s.valid_split(1, 0));
        assert!(!s.valid_split(0, 1));
    }

    #[test]
    fn eval_examples() {
        let r = pants([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, -5.0, 1.0]);
        assert!(r.eval_word(&Word::empty()).unwrap().approx_eq(&Psl::identity(), 0.0));
        let c3 = r.eval_word(&Word::parse("c3").unwrap()).unwrap();
        let expect = (p([1.0, 1.0, 0.0, 1.0]) * p([1.0, 0.0, -5.0, 1.0])).inverse();
        assert!(c3.approx_eq(&expect, 1e-12));
        assert!(matches!(r.eval_word(&Word::parse("a1").unwrap()), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn euler_examples() {
        let r = pants([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, -5.0, 1.0]);
        assert_eq!(r.euler_class().unwrap(), 1);
        assert_eq!(r.sign_vector().unwrap(), vec![1, 1, 0]);
        assert_eq!(r.flipped().sign_vector().unwrap(), vec![-1, -1, 0]);
        assert_eq!(r.flipped().euler_class().unwrap(), -1);
        let r = pants([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, 5.0, 1.0]);
        assert_eq!(r.euler_class().unwrap(), 0);
        assert_eq!(r.sign_vector().unwrap(), vec![1, -1, 0]);
        let f = pants([1.0, 2.0, 0.0, 1.0], [1.0, 0.0, -2.0, 1.0]);
        let s = f.sign_vector().unwrap();
        assert!(s.iter().all(|&x| x != 0));
        assert_eq!(f.euler_class().unwrap(), 1);
    }

    #[test]
    fn evaluation_map_matches_relator() {
        let r = pants([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, -5.0, 1.0]);
        let ev = r.evaluation_map().unwrap();
        assert_eq!(ev.classify().unwrap(), crate::CoverClass::Hyp(1));
        assert!(ev.base().approx_eq(&r.peripheral(3).unwrap().inverse(), 1e-12));
    }

    #[test]
    fn mw_examples() {
        assert_eq!(mw_bounds(0, 4, 1, &[1, 1, 1, -1]), MwVerdict::FeasibleSufficient);
        assert_eq!(mw_bounds(0, 3, 1, &[1, 1, 0]), MwVerdict::FeasibleIff);
        assert_eq!(mw_bounds(0, 3, 0, &[1, 1, 0]), MwVerdict::Infeasible);
        assert_eq!(mw_bounds(0, 3, 1, &[1, 1, 1]), MwVerdict::Unknown);
        assert_eq!(mw_bounds(0, 4, 2, &[1, 1, 1, -1]), MwVerdict::Unknown);
    }

    #[test]
    fn signs_parse() {
        assert_eq!(parse_signs("+,+,0,-").unwrap(), vec![1, 1, 0, -1]);
        assert!(parse_signs("+,x").is_err());
        assert_eq!(format_signs(&[1, -1, 0]), "+,-,0");
    }

    #[test]
    fn json_round_trip() {
        let r = pants([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, -5.0, 1.0]).with_meta("seed", 3.into());
        let s = r.to_json_string();
        let back = Representation::from_json_str(&s).unwrap();
        assert_eq!(back, r);
        let mut j = r.to_json();
        j.images.insert("c3".into(), r.peripheral(3).unwrap().rep().to_f64());
        assert!(Representation::from_json(&j).is_ok());
        j.images.insert("c3".into(), Matrix::identity().to_f64());
        assert!(matches!(Representation::from_json(&j), Err(Error::RelatorMismatch(_))));
    }
}
