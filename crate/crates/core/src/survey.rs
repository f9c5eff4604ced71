//! Envelope surveys over parametrized families of intersection matrices.
//!
//! A family is a matrix template whose entries are integer linear
//! expressions in single-letter variables, e.g. `[[0,n],[n,0]]` or
//! `[[2a,b],[b,0]]`; each variable ranges over an inclusive interval.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::Engine;
use crate::envelope::{plot_envelope, Gap};
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::quad::{self, Rational};
use crate::surface::Surface;

/// `c + Σ coeffs[v]·v`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Affine {
    constant: i64,
    coeffs: BTreeMap<char, i64>,
}

impl Affine {
    fn eval(&self, values: &BTreeMap<char, i64>) -> Result<i64> {
        self.coeffs.iter().try_fold(self.constant, |acc, (v, c)| {
            let x = values.get(v).ok_or_else(|| Error::BadFamily(format!("variable {v} has no range")))?;
            c.checked_mul(*x)
                .and_then(|t| acc.checked_add(t))
                .ok_or_else(|| Error::BadFamily("entry overflows".into()))
        })
    }
}

impl FromStr for Affine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadFamily(format!("bad entry {s:?}"));
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(bad());
        }
        let mut out = Affine { constant: 0, coeffs: BTreeMap::new() };
        // Split into signed terms.
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            if (ch == '+' || ch == '-') && i > start {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let (sign, body) = match term.as_bytes()[0] {
                b'-' => (-1, &term[1..]),
                b'+' => (1, &term[1..]),
                _ => (1, term),
            };
            let body = body.replace('*', "");
            let split = body.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(body.len());
            let (digits, var) = body.split_at(split);
            let coeff: i64 = match digits {
                "" if !var.is_empty() => 1,
                d => d.parse().map_err(|_| bad())?,
            };
            let mut chars = var.chars();
            match (chars.next(), chars.next()) {
                (None, _) => out.constant += sign * coeff,
                (Some(v), None) if v.is_ascii_lowercase() => *out.coeffs.entry(v).or_default() += sign * coeff,
                _ => return Err(bad()),
            }
        }
        Ok(out)
    }
}

/// A matrix template with variable ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    entries: Vec<Vec<Affine>>,
    ranges: BTreeMap<char, (i64, i64)>,
}

impl Family {
    /// Parses a template such as `[[2a,b],[b,0]]` with ranges such as
    /// `[("a", 1, 3), ("b", 1, 5)]`.
    pub fn new(template: &str, ranges: &[(char, i64, i64)]) -> Result<Family> {
        let t: String = template.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix("[[")
            .and_then(|s| s.strip_suffix("]]"))
            .ok_or_else(|| Error::BadFamily(format!("template {template:?} is not of the form [[..],..,[..]]")))?;
        let entries = inner
            .split("],[")
            .map(|row| row.split(',').map(str::parse).collect::<Result<Vec<Affine>>>())
            .collect::<Result<Vec<_>>>()?;
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(Error::BadFamily("template is not square".into()));
        }
        let mut map = BTreeMap::new();
        for &(v, lo, hi) in ranges {
            if lo > hi || map.insert(v, (lo, hi)).is_some() {
                return Err(Error::BadFamily(format!("bad or repeated range for {v}")));
            }
        }
        for v in entries.iter().flatten().flat_map(|a| a.coeffs.keys()) {
            if !map.contains_key(v) {
                return Err(Error::BadFamily(format!("variable {v} has no range")));
            }
        }
        Ok(Family { entries, ranges: map })
    }

    /// Parameter assignments in lexicographic order.
    pub fn assignments(&self) -> Vec<BTreeMap<char, i64>> {
        self.ranges.iter().fold(vec![BTreeMap::new()], |acc, (&v, &(lo, hi))| {
            acc.into_iter()
                .flat_map(|a| {
                    (lo..=hi).map(move |x| {
                        let mut a = a.clone();
                        a.insert(v, x);
                        a
                    })
                })
                .collect()
        })
    }

    pub fn instantiate(&self, values: &BTreeMap<char, i64>) -> Result<Vec<Vec<i64>>> {
        self.entries.iter().map(|row| row.iter().map(|a| a.eval(values)).collect()).collect()
    }
}

/// Parses `n=1..6` into `('n', 1, 6)`.
pub fn parse_range(s: &str) -> Result<(char, i64, i64)> {
    let bad = || Error::BadFamily(format!("bad range {s:?}, expected like n=1..6"));
    let (v, r) = s.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = r.split_once("..").ok_or_else(bad)?;
    let mut chars = v.trim().chars();
    let var = match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => c,
        _ => return Err(bad()),
    };
    Ok((var, lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

/// Outcome for one member of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurveyRow {
    pub params: BTreeMap<char, i64>,
    pub matrix: Vec<Vec<i64>>,
    /// Whether the gap report at δ is empty; `None` if the matrix was rejected.
    pub piecewise_linear: Option<bool>,
    pub gap_loci: Vec<Gap>,
    pub segment_count: usize,
    pub error: Option<String>,
}

/// Builds the envelope of every member at resolution δ. Members run in
/// parallel under `mode`; rows follow the order of
/// [`Family::assignments`].
pub fn run_survey(family: &Family, delta: &Rational, mode: ExecMode) -> Result<Vec<SurveyRow>> {
    let members = family
        .assignments()
        .into_iter()
        .map(|a| family.instantiate(&a).map(|m| (a, m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(par::map(mode, &members, |(params, matrix)| {
        let outcome = Surface::from_entries(matrix.clone())
            .and_then(|s| plot_envelope(&Engine::new(s.with_exec(ExecMode::Sequential)).with_verification(false), delta));
        let mut row = SurveyRow {
            params: params.clone(),
            matrix: matrix.clone(),
            piecewise_linear: None,
            gap_loci: Vec::new(),
            segment_count: 0,
            error: None,
        };
        match outcome {
            Ok(env) => {
                row.piecewise_linear = Some(env.gaps.is_empty());
                row.segment_count = env.segments.len();
                row.gap_loci = env.gaps.uncovered;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }))
}

/// Gap midpoints, for compact reporting.
pub fn gap_centres(row: &SurveyRow) -> Vec<Rational> {
    row.gap_loci.iter().map(|g| (&g.lo + &g.hi) / quad::rat_int(2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rat;

    #[test]
    fn parses_templates() {
        let f = Family::new("[[2a, b], [b, 0]]", &[('a', 1, 2), ('b', 2, 3)]).unwrap();
        let all = f.assignments();
        assert_eq!(all.len(), 4);
        assert_eq!(f.instantiate(&all[1]).unwrap(), vec![vec![2, 3], vec![3, 0]]);
        let g = Family::new("[[0,n-1],[n-1,-2*n+3]]", &[('n', 2, 2)]).unwrap();
        assert_eq!(g.instantiate(&g.assignments()[0]).unwrap(), vec![vec![0, 1], vec![1, -1]]);
        assert!(matches!(Family::new("[[0,n],[n]]", &[('n', 1, 2)]), Err(Error::BadFamily(_))));
        assert!(matches!(Family::new("[[0,n],[n,0]]", &[]), Err(Error::BadFamily(_))));
        assert!(matches!(Family::new("[[0,nn],[nn,0]]", &[('n', 1, 2)]), Err(Error::BadFamily(_))));
        assert!(matches!(Family::new("0,n", &[('n', 1, 2)]), Err(Error::BadFamily(_))));
        assert_eq!(parse_range("n=1..6").unwrap(), ('n', 1, 6));
        assert!(parse_range("n=1-6").is_err());
    }

    #[test]
    fn small_survey() {
        let f = Family::new("[[0,n],[n,0]]", &[('n', 1, 3)]).unwrap();
        let rows = run_survey(&f, &rat(1, 50), ExecMode::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.piecewise_linear == Some(true) && r.error.is_none()));
        let bad = Family::new("[[n,0],[0,n]]", &[('n', 1, 1)]).unwrap();
        let rows = run_survey(&bad, &rat(1, 50), ExecMode::Sequential).unwrap();
        assert!(rows[0].error.is_some() && rows[0].piecewise_linear.is_none());
    }
}
