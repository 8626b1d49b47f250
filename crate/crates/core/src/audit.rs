//! Depth-qualified total-hyperbolicity audits and restriction certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::enumerate_scc;
use crate::error::{Error, Result};
use crate::mobius::{classify_psl, PslType};
use crate::surface::{sign_counts, Representation, Surface};
use crate::{Matrix, Psl};

pub const DEFAULT_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Elliptic,
    Margin,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub curve: String,
    pub kind: ViolationKind,
    pub psl_type: PslType,
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub surface: Surface,
    pub euler: i64,
    pub signs: Vec<i8>,
    pub depth: usize,
    pub margin: f64,
    pub curves_checked: usize,
    pub dropped_overlong: usize,
    /// Minimum of |trace| - 2 over the checked curves.
    pub min_trace_margin: Option<f64>,
    pub milnor_wood_ok: bool,
    pub additivity_checked: usize,
    pub additivity_ok: bool,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn csv_header() -> &'static str {
        "genus,punctures,euler,signs,depth,curves_checked,min_trace_margin,violations,additivity_ok"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.surface.genus,
            self.surface.punctures,
            self.euler,
            crate::surface::format_signs(&self.signs).replace(',', " "),
            self.depth,
            self.curves_checked,
            self.min_trace_margin.map(|m| format!("{m:e}")).unwrap_or_default(),
            self.violations.len(),
            self.additivity_ok
        )
    }
}

/// Number of standard splittings checked and whether e is additive across all of them.
pub fn check_additivity(rep: &Representation) -> Result<(usize, bool)> {
    let s = rep.surface();
    let e = rep.euler_class()?;
    let mut checked = 0;
    let mut ok = true;
    for j in 0..=s.genus {
        for k in 0..s.punctures {
            if !s.valid_split(j, k) {
                continue;
            }
            let (l, r) = match rep.restrict(j, k) {
                Ok(x) => x,
                Err(Error::BoundaryElliptic | Error::BoundaryNotHyperbolic(_)) => continue,
                Err(e) => return Err(e),
            };
            checked += 1;
            ok &= l.euler_class()? + r.euler_class()? == e;
        }
    }
    Ok((checked, ok))
}

/// Evaluate every enumerated curve and record non-hyperbolic or near-parabolic images.
pub fn audit_rep(rep: &Representation, depth: usize, margin: f64) -> Result<AuditReport> {
    let s = rep.surface();
    for (i, c) in rep.peripherals()?.iter().enumerate() {
        if !classify_psl(c).is_parabolic() {
            return Err(Error::NotTypePreserving(i + 1));
        }
    }
    let euler = rep.euler_class()?;
    let signs = rep.sign_vector()?;
    let en = enumerate_scc(&s, depth);
    let evals: Vec<Result<(f64, PslType)>> = en
        .curves
        .par_iter()
        .map(|c| {
            let m = rep.eval_word(c.word())?;
            Ok((m.abs_trace(), classify_psl(&m)))
        })
        .collect();
    let mut violations = Vec::new();
    let mut min_margin: Option<f64> = None;
    for (c, ev) in en.curves.iter().zip(evals) {
        let (t, ty) = ev?;
        let m = t - 2.0;
        min_margin = Some(min_margin.map_or(m, |x| x.min(m)));
        let kind = match ty {
            PslType::Elliptic => Some(ViolationKind::Elliptic),
            PslType::Identity => Some(ViolationKind::Identity),
            _ if m <= margin => Some(ViolationKind::Margin),
            _ => None,
        };
        if let Some(kind) = kind {
            violations.push(Violation { curve: c.to_string(), kind, psl_type: ty, trace: t });
        }
    }
    let (additivity_checked, additivity_ok) = check_additivity(rep)?;
    Ok(AuditReport {
        surface: s,
        euler,
        signs,
        depth,
        margin,
        curves_checked: en.curves.len(),
        dropped_overlong: en.dropped_overlong,
        min_trace_margin: min_margin,
        milnor_wood_ok: euler.abs() <= -s.chi(),
        additivity_checked,
        additivity_ok,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub role: String,
    pub surface: Surface,
    pub euler: i64,
    pub extremal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub surface: Surface,
    pub euler: i64,
    pub special_puncture: usize,
    pub pieces: Vec<Piece>,
    pub pants_euler: i64,
    pub complements_extremal: bool,
    pub additive: bool,
    pub ok: bool,
}

/// Split off a standard pair of pants containing puncture i.
fn isolate(rep: &Representation, i: usize) -> Result<(Representation, Vec<Representation>)> {
    let s = rep.surface();
    let (g, p) = (s.genus, s.punctures);
    if (g, p) == (0, 3) {
        return Ok((rep.clone(), Vec::new()));
    }
    if p == 1 {
        if g == 1 {
            return Err(Error::NotSupported("S(1,1) contains no essential separating curve".into()));
        }
        let (left, right) = rep.restrict(1, 0)?;
        let (pants, mut others) = isolate(&right, 1)?;
        others.push(left);
        return Ok((pants, others));
    }
    if i + 1 >= p {
        let (left, right) = rep.restrict(g, p - 2)?;
        return Ok((right, vec![left]));
    }
    if g == 0 && i <= 2 {
        let (left, right) = rep.restrict(0, 2)?;
        return Ok((left, vec![right]));
    }
    let (left, right) = rep.restrict(g, i)?;
    let (pants, mut others) = isolate(&left, i)?;
    others.push(right);
    Ok((pants, others))
}

/// Certify that the pants around the odd-signed puncture carries e = 0 and every other
/// piece of the standard splitting is extremal.
pub fn check_restrictions(rep: &Representation) -> Result<RestrictionReport> {
    let s = rep.surface();
    let e = rep.euler_class()?;
    let signs = rep.sign_vector()?;
    let chi = s.chi();
    let (plus, zero, minus) = sign_counts(&signs);
    let special = if zero == 0 && e == -chi - 1 && minus == 1 {
        signs.iter().position(|&x| x < 0).unwrap() + 1
    } else if zero == 0 && e == chi + 1 && plus == 1 {
        signs.iter().position(|&x| x > 0).unwrap() + 1
    } else if e.abs() == -chi {
        s.punctures
    } else {
        return Err(Error::NotCounterexample(format!("e = {e}, signs {signs:?}")));
    };
    let (pants, others) = isolate(rep, special)?;
    let pants_euler = pants.euler_class()?;
    let mut pieces = vec![Piece { role: "pants".into(), surface: pants.surface(), euler: pants_euler, extremal: pants_euler.abs() == 1 }];
    for o in &others {
        let oe = o.euler_class()?;
        pieces.push(Piece { role: "complement".into(), surface: o.surface(), euler: oe, extremal: oe.abs() == -o.surface().chi() });
    }
    let complements_extremal = pieces[1..].iter().all(|p| p.extremal);
    let additive = pieces.iter().map(|p| p.euler).sum::<i64>() == e;
    let ok = if e.abs() == -chi {
        pieces.iter().all(|p| p.extremal) && additive
    } else {
        pants_euler == 0 && complements_extremal && additive
    };
    Ok(RestrictionReport { surface: s, euler: e, special_puncture: special, pieces, pants_euler, complements_extremal, additive, ok })
}

/// S(0,4) with c1 = [[1,1],[0,1]], c2 = [[1,0],[-2,1]] (so c1 c2 has trace 0) and c3 a
/// positive parabolic chosen so that c4 is parabolic.
pub fn negative_control() -> Representation {
    let c1 = Matrix::upper(1.0);
    let c2 = Matrix::lower(-2.0);
    let m = c1 * c2;
    let c3 = |t: f64| Matrix::upper(1.0).conj(&Matrix::rotation(t));
    let f = |t: f64| (m * c3(t)).trace() + 2.0;
    let (mut lo, mut hi) = (0.5, 2.5);
    if f(lo) * f(hi) > 0.0 {
        let grid: Vec<f64> = (1..314).map(|i| i as f64 * 0.01).collect();
        let w = grid.windows(2).find(|w| f(w[0]) * f(w[1]) < 0.0).expect("sign change");
        lo = w[0];
        hi = w[1];
    }
    let flo = f(lo);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = Surface::new(0, 4).expect("valid surface");
    let images = vec![Psl::from_unit(c1), Psl::from_unit(c2), Psl::from_unit(c3(0.5 * (lo + hi)))];
    Representation::new(s, images).expect("three images")
}
