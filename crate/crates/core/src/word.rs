//! Words in the generators a_j, b_j, c_i.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Generator of the surface presentation; indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    A(usize),
    B(usize),
    C(usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::A(i) => write!(f, "a{i}"),
            Generator::B(i) => write!(f, "b{i}"),
            Generator::C(i) => write!(f, "c{i}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownGenerator(s.to_string());
        let (head, tail) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        let i: usize = tail.parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        match head {
            "a" => Ok(Generator::A(i)),
            "b" => Ok(Generator::B(i)),
            "c" => Ok(Generator::C(i)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: Generator,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: Generator, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "{}^-1", self.gen)
        } else {
            write!(f, "{}", self.gen)
        }
    }
}

/// A (not necessarily reduced) word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn gen(g: Generator) -> Self {
        Word(vec![Letter::new(g, false)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Free reduction.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Reduced concatenation.
    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word(v).reduced()
    }

    pub fn product<'a>(ws: impl IntoIterator<Item = &'a Word>) -> Word {
        let mut v = Vec::new();
        for w in ws {
            v.extend_from_slice(&w.0);
        }
        Word(v).reduced()
    }

    /// x y x^-1 y^-1.
    pub fn commutator(x: &Word, y: &Word) -> Word {
        Word::product([x, y, &x.inverse(), &y.inverse()])
    }

    /// Reduced word with cancelling first/last letters removed.
    pub fn cyclically_reduced(&self) -> Word {
        let r = self.reduced().0;
        let (mut i, mut j) = (0, r.len());
        while j > i + 1 && r[i] == r[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        Word(r[i..j].to_vec())
    }

    /// Replace each letter by a word (inverted letters by the inverse word).
    pub fn substitute(&self, f: impl Fn(Generator) -> Option<Word>) -> Word {
        let mut v = Vec::new();
        for &l in &self.0 {
            match f(l.gen) {
                Some(w) if l.inv => v.extend(w.inverse().0),
                Some(w) => v.extend(w.0),
                None => v.push(l),
            }
        }
        Word(v).reduced()
    }

    /// Total exponent of a generator.
    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.0.iter().filter(|l| l.gen == g).map(|l| if l.inv { -1 } else { 1 }).sum()
    }

    pub fn parse(s: &str) -> Result<Word> {
        let mut v = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',' || c == '*').filter(|t| !t.is_empty()) {
            let (g, e) = match tok.split_once('^') {
                Some((g, e)) => (g, e.parse::<i64>().map_err(|_| Error::BadWord(tok.to_string()))?),
                None => (tok, 1),
            };
            let g: Generator = g.parse()?;
            for _ in 0..e.unsigned_abs() {
                v.push(Letter::new(g, e < 0));
            }
        }
        Ok(Word(v))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let w = Word::parse("a1 b1 a1^-1 b1^-1 c12^2").unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w.to_string(), "a1 b1 a1^-1 b1^-1 c12 c12");
        assert!(Word::parse("d1").is_err());
        assert!(Word::parse("a0").is_err());
        assert!(Word::parse("a").is_err());
        assert!(Word::parse("").unwrap().is_empty());
    }

    #[test]
    fn reduction() {
        let w = Word::parse("a1 b1 b1^-1 a1^-1 c1").unwrap();
        assert_eq!(w.reduced().to_string(), "c1");
        let w = Word::parse("b1 a1 c1 b1^-1").unwrap();
        assert_eq!(w.cyclically_reduced().to_string(), "a1 c1");
        let w = Word::parse("a1 a1^-1").unwrap();
        assert!(w.cyclically_reduced().is_empty());
    }

    #[test]
    fn substitution() {
        let w = Word::parse("a1 b1^-1").unwrap();
        let s = w.substitute(|g| (g == Generator::B(1)).then(|| Word::parse("b1 a1").unwrap()));
        assert_eq!(s.to_string(), "b1^-1");
        assert_eq!(Word::parse("a1 b1 a1^-1").unwrap().exponent_sum(Generator::A(1)), 0);
    }
}
