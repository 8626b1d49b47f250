//! Curve words, canonical conjugacy forms, mapping-class automorphisms and orbit enumeration.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::surface::Surface;
use crate::word::{Generator, Letter, Word};

/// Maximum word length kept during orbit enumeration.
pub const MAX_WORD_LEN: usize = 512;

/// Lexicographically least rotation of a cyclically reduced word and of its inverse.
pub fn canonical_form(w: &Word) -> Word {
    let r = w.cyclically_reduced();
    if r.is_empty() {
        return r;
    }
    let inv = r.inverse();
    let a = least_rotation(r.letters());
    let b = least_rotation(inv.letters());
    Word(a.min(b))
}

fn least_rotation(v: &[Letter]) -> Vec<Letter> {
    let n = v.len();
    let mut best = 0;
    for i in 1..n {
        for k in 0..n {
            let (x, y) = (v[(i + k) % n], v[(best + k) % n]);
            if x != y {
                if x < y {
                    best = i;
                }
                break;
            }
        }
    }
    v[best..].iter().chain(&v[..best]).copied().collect()
}

/// A reduced word over the free generators of a surface group, with its canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurveWord {
    word: Word,
    canonical: Word,
}

impl CurveWord {
    /// Letters c_p are rewritten through the relator.
    pub fn new(surface: &Surface, w: Word) -> CurveWord {
        let word = surface.eliminate_cp(&w);
        let canonical = canonical_form(&word);
        CurveWord { word, canonical }
    }

    pub fn parse(surface: &Surface, s: &str) -> crate::Result<CurveWord> {
        let w = Word::parse(s)?;
        if let Some(l) = w.letters().iter().find(|l| !surface.has_generator(l.gen)) {
            return Err(crate::Error::UnknownGenerator(l.gen.to_string()));
        }
        Ok(CurveWord::new(surface, w))
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn canonical(&self) -> &Word {
        &self.canonical
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }
}

impl fmt::Display for CurveWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.canonical.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveClass {
    Peripheral(usize),
    SeparatingNonPeripheral,
    NonSeparating,
}

fn peripheral_forms(s: &Surface) -> Vec<Word> {
    (1..=s.punctures).map(|i| canonical_form(&s.eliminate_cp(&Word::gen(Generator::C(i))))).collect()
}

pub fn classify_curve(w: &CurveWord, s: &Surface) -> CurveClass {
    if let Some(i) = peripheral_forms(s).iter().position(|c| c == w.canonical()) {
        return CurveClass::Peripheral(i + 1);
    }
    let homologous_zero = (1..=s.genus).all(|j| {
        w.word().exponent_sum(Generator::A(j)) == 0 && w.word().exponent_sum(Generator::B(j)) == 0
    });
    if homologous_zero {
        CurveClass::SeparatingNonPeripheral
    } else {
        CurveClass::NonSeparating
    }
}

/// Endomorphism of the free group on a1..bg, c1..cp (c_p included as a letter);
/// unlisted generators are fixed.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct McgAuto {
    pub name: String,
    pub images: BTreeMap<Generator, Word>,
}

impl McgAuto {
    pub fn new(name: impl Into<String>, images: BTreeMap<Generator, Word>) -> McgAuto {
        McgAuto { name: name.into(), images }
    }

    pub fn from_pairs(name: &str, pairs: &[(&str, &str)]) -> crate::Result<McgAuto> {
        let mut images = BTreeMap::new();
        for (g, w) in pairs {
            images.insert(g.parse()?, Word::parse(w)?);
        }
        Ok(McgAuto::new(name, images))
    }

    pub fn image(&self, g: Generator) -> Word {
        self.images.get(&g).cloned().unwrap_or_else(|| Word::gen(g))
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(|g| self.images.get(&g).cloned())
    }

    /// Inverse automorphism by Nielsen reduction of the image tuple, if it is one.
    pub fn inverse(&self, s: &Surface) -> Option<McgAuto> {
        let gens = s.all_generators();
        let mut t: Vec<Word> = gens.iter().map(|&g| self.image(g).reduced()).collect();
        let mut src: Vec<Word> = gens.iter().map(|&g| Word::gen(g)).collect();
        let n = gens.len();
        let mut changed = true;
        let mut rounds = 0;
        while changed {
            changed = false;
            rounds += 1;
            if rounds > 10_000 {
                return None;
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for inv in [false, true] {
                        let tj = if inv { t[j].inverse() } else { t[j].clone() };
                        let sj = if inv { src[j].inverse() } else { src[j].clone() };
                        let right = t[i].concat(&tj);
                        if right.len() < t[i].len() {
                            t[i] = right;
                            src[i] = src[i].concat(&sj);
                            changed = true;
                            continue;
                        }
                        let left = tj.concat(&t[i]);
                        if left.len() < t[i].len() {
                            t[i] = left;
                            src[i] = sj.concat(&src[i]);
                            changed = true;
                        }
                    }
                }
            }
        }
        let mut images = BTreeMap::new();
        for (ti, si) in t.iter().zip(&src) {
            if ti.len() != 1 {
                return None;
            }
            let l = ti.letters()[0];
            let w = if l.inv { si.inverse() } else { si.clone() };
            if images.insert(l.gen, w).is_some() || !gens.contains(&l.gen) {
                return None;
            }
        }
        let inv = McgAuto::new(format!("{}^-1", self.name), images);
        let ok = gens.iter().all(|&g| {
            let x = Word::gen(g);
            self.apply(&inv.apply(&x)) == x && inv.apply(&self.apply(&x)) == x
        });
        ok.then_some(inv)
    }
}

/// Automorphism, relator-class preserving, and permuting the peripheral classes.
pub fn validate_auto(f: &McgAuto, s: &Surface) -> bool {
    let gens = s.all_generators();
    let uses_known = f.images.iter().all(|(g, w)| gens.contains(g) && w.letters().iter().all(|l| gens.contains(&l.gen)));
    if !uses_known || f.inverse(s).is_none() {
        return false;
    }
    let rel = s.relator();
    if canonical_form(&f.apply(&rel)) != canonical_form(&rel) {
        return false;
    }
    let periph: BTreeSet<Word> = (1..=s.punctures).map(|i| canonical_form(&Word::gen(Generator::C(i)))).collect();
    let images: BTreeSet<Word> =
        (1..=s.punctures).map(|i| canonical_form(&f.apply(&Word::gen(Generator::C(i))))).collect();
    periph == images
}

/// Handle twists a_j -> a_j b_j, b_j -> b_j a_j and braids on adjacent punctures, with inverses.
pub fn default_autos(s: &Surface) -> Vec<McgAuto> {
    let mut v = Vec::new();
    for j in 1..=s.genus {
        let (a, b) = (Word::gen(Generator::A(j)), Word::gen(Generator::B(j)));
        v.push(McgAuto::new(format!("ta{j}"), BTreeMap::from([(Generator::A(j), a.concat(&b))])));
        v.push(McgAuto::new(format!("tb{j}"), BTreeMap::from([(Generator::B(j), b.concat(&a))])));
    }
    for i in 1..s.punctures {
        v.push(McgAuto::new(format!("s{i}"), crate::constructors::braid(i)));
    }
    let inverses: Vec<McgAuto> = v.iter().map(|f| f.inverse(s).expect("default automorphism is invertible")).collect();
    v.extend(inverses);
    for f in &v {
        assert!(validate_auto(f, s), "default automorphism {} fails validation on {s}", f.name);
    }
    v
}

/// Seed curves: a_j, b_j, gamma(j,k) and, on spheres, c_i c_{i+1}.
pub fn seed_curves(s: &Surface) -> Vec<CurveWord> {
    let mut words = Vec::new();
    for j in 1..=s.genus {
        words.push(Word::gen(Generator::A(j)));
        words.push(Word::gen(Generator::B(j)));
    }
    for j in 0..=s.genus {
        for k in 0..s.punctures {
            words.push(s.gamma(j, k));
        }
    }
    if s.genus == 0 {
        for i in 1..s.punctures {
            words.push(Word::product([&Word::gen(Generator::C(i)), &Word::gen(Generator::C(i + 1))]));
        }
    }
    let mut seen = HashSet::new();
    words
        .into_iter()
        .map(|w| CurveWord::new(s, w))
        .filter(|c| !c.is_empty() && !matches!(classify_curve(c, s), CurveClass::Peripheral(_)))
        .filter(|c| seen.insert(c.canonical().clone()))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SccEnumeration {
    pub curves: Vec<CurveWord>,
    pub dropped_overlong: usize,
}

pub fn enumerate_scc(s: &Surface, depth: usize) -> SccEnumeration {
    enumerate_scc_with(s, depth, &default_autos(s))
}

/// Orbit of the seed curves under `autos` up to composition depth `depth`.
pub fn enumerate_scc_with(s: &Surface, depth: usize, autos: &[McgAuto]) -> SccEnumeration {
    let periph: HashSet<Word> = peripheral_forms(s).into_iter().collect();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut out = Vec::new();
    let mut frontier = Vec::new();
    for c in seed_curves(s) {
        seen.insert(c.canonical().clone());
        frontier.push(c.canonical().clone());
        out.push(c);
    }
    let mut dropped = 0;
    for _ in 0..depth {
        let images: Vec<Vec<Word>> = frontier
            .par_iter()
            .map(|w| autos.iter().map(|f| canonical_form(&s.eliminate_cp(&f.apply(w)))).collect())
            .collect();
        let mut next = Vec::new();
        for w in images.into_iter().flatten() {
            if w.len() > MAX_WORD_LEN {
                dropped += 1;
                continue;
            }
            if w.is_empty() || periph.contains(&w) || !seen.insert(w.clone()) {
                continue;
            }
            next.push(w.clone());
            out.push(CurveWord::new(s, w));
        }
        frontier = next;
    }
    out.sort_by(|a, b| (a.len(), a.canonical()).cmp(&(b.len(), b.canonical())));
    SccEnumeration { curves: out, dropped_overlong: dropped }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_form(&w("a1 b1 b1^-1")), w("a1"));
        assert_eq!(canonical_form(&w("b1 a1 b1^-1")), w("a1"));
        assert_eq!(canonical_form(&w("a1^-1")), w("a1"));
        let x = w("a1 b1 c1^-1 a2");
        let y = w("c1^-1 a2 a1 b1");
        assert_eq!(canonical_form(&x), canonical_form(&y));
        assert_eq!(canonical_form(&x), canonical_form(&x.inverse()));
    }

    #[test]
    fn classify_examples() {
        let s = Surface::new(1, 2).unwrap();
        assert_eq!(classify_curve(&CurveWord::parse(&s, "c1").unwrap(), &s), CurveClass::Peripheral(1));
        assert_eq!(classify_curve(&CurveWord::parse(&s, "c2").unwrap(), &s), CurveClass::Peripheral(2));
        assert_eq!(
            classify_curve(&CurveWord::parse(&s, "b1 a1 b1^-1 a1^-1 c1^-1").unwrap(), &s),
            CurveClass::Peripheral(2)
        );
        assert_eq!(classify_curve(&CurveWord::parse(&s, "a1").unwrap(), &s), CurveClass::NonSeparating);
        assert_eq!(
            classify_curve(&CurveWord::parse(&s, "a1 b1 a1^-1 b1^-1").unwrap(), &s),
            CurveClass::SeparatingNonPeripheral
        );
    }

    #[test]
    fn validate_examples() {
        let s04 = Surface::new(0, 4).unwrap();
        let sigma = McgAuto::from_pairs("s1", &[("c1", "c1 c2 c1^-1"), ("c2", "c1")]).unwrap();
        assert!(validate_auto(&sigma, &s04));
        let s12 = Surface::new(1, 2).unwrap();
        let twist = McgAuto::from_pairs("t", &[("a1", "a1 b1")]).unwrap();
        assert!(validate_auto(&twist, &s12));
        let square = McgAuto::from_pairs("sq", &[("a1", "a1 a1")]).unwrap();
        assert!(!validate_auto(&square, &s12));
        let swap = McgAuto::from_pairs("sw", &[("c1", "c2"), ("c2", "c1")]).unwrap();
        assert!(!validate_auto(&swap, &s04));
    }

    #[test]
    fn enumeration_growth() {
        let s = Surface::new(0, 4).unwrap();
        let d0 = enumerate_scc(&s, 0);
        assert_eq!(d0.curves.len(), seed_curves(&s).len());
        let d2 = enumerate_scc(&s, 2).curves.len();
        let d3 = enumerate_scc(&s, 3).curves.len();
        assert!(d3 > d2);
        for c in enumerate_scc(&s, 3).curves {
            assert!(!c.is_empty());
            assert!(!matches!(classify_curve(&c, &s), CurveClass::Peripheral(_)));
        }
    }
}
