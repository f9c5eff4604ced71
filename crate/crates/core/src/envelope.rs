//! The Seshadri function `t ↦ ε(B₀ + tB₁)` for Picard number two, assembled
//! from certified linear pieces.
//!
//! Internally the section is parametrized by `u` with class `U·(1, u)`, so
//! that grid classes and all curve functionals are rational; `t = κu` with
//! `κ = √(d₁/d₀)` and `ε(B₀+tB₁) = ε(U(1,u))/√d₀`.
//!
//! Certification: ε is concave and every curve functional is an upper bound,
//! so a functional that agrees with ε at two points agrees on the segment
//! between them.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::engine::{CurveKind, Engine, SeshadriCurve};
use crate::error::{Error, Result};
use crate::lattice::LatticeClass;
use crate::par;
use crate::quad::{self, rat, rat_int, QuadValue, Rational};
use crate::surface::Surface;

/// A maximal piece of the envelope on which `curve` computes ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub curve: SeshadriCurve,
    pub t_lo: QuadValue,
    pub t_hi: QuadValue,
    pub eps_lo: QuadValue,
    pub eps_hi: QuadValue,
    pub certified: bool,
    #[serde(with = "quad::serde_rational")]
    pub u_lo: Rational,
    #[serde(with = "quad::serde_rational")]
    pub u_hi: Rational,
}

/// Regions of the section not covered by certified segments at resolution δ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(with = "quad::serde_rational")]
    pub delta: Rational,
    pub uncovered: Vec<Gap>,
    pub segment_count: usize,
}

/// An open `t`-interval.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gap {
    #[serde(with = "quad::serde_rational")]
    pub lo: Rational,
    #[serde(with = "quad::serde_rational")]
    pub hi: Rational,
}

impl Gap {
    pub fn contains(&self, t: &Rational) -> bool {
        &self.lo < t && t < &self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub segments: Vec<Segment>,
    pub gaps: GapReport,
    /// Number of Seshadri-constant evaluations performed.
    pub evaluations: usize,
}

impl Envelope {
    /// Segments meeting `(lo, hi]` in `t`.
    pub fn segments_meeting(&self, lo: &Rational, hi: &Rational) -> usize {
        let lo = QuadValue::from_rational(lo.clone());
        let hi = QuadValue::from_rational(hi.clone());
        self.segments.iter().filter(|s| s.t_hi > lo && s.t_lo <= hi).count()
    }
}

/// Coefficients `(c₀, c₁)` with `curve.functional(B₀ + tB₁) = c₀ + c₁t`.
pub fn curve_functional_on_section(surface: &Surface, curve: &SeshadriCurve) -> Result<(QuadValue, QuadValue)> {
    if surface.rho() != 2 {
        return Err(Error::WrongRho(surface.rho()));
    }
    let (a, b) = affine_u(surface, curve);
    let frame = surface.frame();
    Ok((frame.sqrt_d(0).recip().scale(&a), frame.sqrt_d(1).recip().scale(&b)))
}

/// `(α, β)` with `curve.functional(U(1,u)) = α + βu`.
fn affine_u(surface: &Surface, curve: &SeshadriCurve) -> (Rational, Rational) {
    let frame = surface.frame();
    let col = |i: usize| LatticeClass(frame.column(i).to_vec());
    (curve.eval_class(&col(0)), curve.eval_class(&col(1)))
}

#[derive(Clone, Debug)]
struct Point {
    /// `None` when the evaluation exceeded the candidate budget.
    value: Option<QuadValue>,
    /// Curves reported by the engine at this point.
    witnesses: Vec<usize>,
}

/// Curve registry keyed by numerical class.
#[derive(Default)]
struct Registry {
    curves: Vec<SeshadriCurve>,
    affine: Vec<(Rational, Rational)>,
    index: BTreeMap<(CurveKind, LatticeClass), usize>,
}

impl Registry {
    fn insert(&mut self, surface: &Surface, curve: SeshadriCurve) -> usize {
        let key = (curve.kind, curve.cls.clone());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.affine.push(affine_u(surface, &curve));
        self.curves.push(curve);
        self.index.insert(key, self.curves.len() - 1);
        self.curves.len() - 1
    }

    fn at(&self, i: usize, u: &Rational) -> Rational {
        let (a, b) = &self.affine[i];
        a + b * u
    }

    /// Every known curve attaining ε at `u`.
    fn attaining(&self, u: &Rational, p: &Point) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = p.witnesses.iter().copied().collect();
        if let Some(v) = p.value.as_ref().and_then(QuadValue::as_rational) {
            set.extend((0..self.curves.len()).filter(|&i| &self.at(i, u) == v));
        }
        set
    }
}

enum Step {
    Certified(usize),
    Leaf,
    Split(Rational),
}

/// Builds the envelope over the section from an initial `t`-grid, refining
/// until every interval is certified or shorter than `delta`.
pub fn build_envelope(engine: &Engine, t_grid: &[Rational], delta: &Rational) -> Result<Envelope> {
    let surface = engine.surface();
    if surface.rho() != 2 {
        return Err(Error::WrongRho(surface.rho()));
    }
    if !delta.is_positive() {
        return Err(Error::BoundNotPositive);
    }
    let frame = surface.frame();
    let kappa = QuadValue::sqrt_of(&(&frame.d()[1] / &frame.d()[0]));
    let den = BigInt::one() << 40;
    let kappa_lo = kappa.lower_rational(&den);
    let kappa_hi = kappa.upper_rational(&den);
    let one = Rational::one();
    for t in t_grid {
        if t.abs() > one {
            return Err(Error::GridPointNotNef(quad::fmt_rational(t)));
        }
    }
    // Section end in u; irrational ends are replaced by inner rationals.
    let u_end = kappa.recip().lower_rational(&den);
    let to_u = |t: &Rational| -> Rational {
        match kappa.as_rational() {
            Some(k) => t / k,
            None => {
                let u = (t / &kappa_lo).min(u_end.clone()).max(-u_end.clone());
                round_to(&u, &den)
            }
        }
    };
    let mut us: Vec<Rational> = t_grid.iter().map(to_u).collect();
    us.push(-u_end.clone());
    us.push(u_end.clone());
    us.sort();
    us.dedup();
    let delta_u = delta / &kappa_hi;

    let eval = |u: &Rational, hints: &[Vec<Rational>]| -> Result<(Option<QuadValue>, Vec<SeshadriCurve>)> {
        let cls: Vec<Rational> =
            (0..2).map(|j| rat_int(frame.column(0)[j]) + u * rat_int(frame.column(1)[j])).collect();
        match engine.seshadri_rational_unverified(&cls, hints) {
            Ok(r) => Ok((Some(r.value), r.curves)),
            Err(Error::SearchTooLarge(_)) => Ok((None, Vec::new())),
            Err(e) => Err(e),
        }
    };

    let mut registry = Registry::default();
    let mut points: BTreeMap<Rational, Point> = BTreeMap::new();
    let mut evaluations = 0usize;
    let mut add_points = |us: Vec<Rational>, registry: &mut Registry, points: &mut BTreeMap<Rational, Point>| -> Result<()> {
        // Known curves bound ε from above and shrink each search.
        let hints: Vec<Vec<Rational>> = registry.curves.iter().map(|c| c.functional.clone()).collect();
        let results = par::map(surface.exec(), &us, |u| eval(u, &hints));
        evaluations += us.len();
        for (u, res) in us.into_iter().zip(results) {
            let (value, curves) = res?;
            let witnesses = curves.into_iter().map(|c| registry.insert(surface, c)).collect();
            points.insert(u, Point { value, witnesses });
        }
        Ok(())
    };
    add_points(us.clone(), &mut registry, &mut points)?;

    let mut work: Vec<(Rational, Rational)> = us.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let mut certified: Vec<(Rational, Rational, usize)> = Vec::new();
    let mut leaves: Vec<(Rational, Rational)> = Vec::new();
    while !work.is_empty() {
        let mut splits: Vec<(Rational, Rational, Rational)> = Vec::new();
        for (a, b) in work.drain(..) {
            match decide(&registry, &points, &a, &b, &delta_u) {
                Step::Certified(c) => certified.push((a, b, c)),
                Step::Leaf => leaves.push((a, b)),
                Step::Split(m) => splits.push((a, b, m)),
            }
        }
        let mut fresh: Vec<Rational> = splits.iter().map(|(_, _, m)| m.clone()).filter(|m| !points.contains_key(m)).collect();
        fresh.sort();
        fresh.dedup();
        add_points(fresh, &mut registry, &mut points)?;
        for (a, b, m) in splits {
            work.push((a, m.clone()));
            work.push((m, b));
        }
        work.sort();
    }

    // Verify each ample curve once.
    let used: BTreeSet<usize> = certified.iter().map(|(_, _, c)| *c).collect();
    let to_verify: Vec<usize> = used.iter().copied().filter(|&c| registry.curves[c].kind == CurveKind::Ample).collect();
    let verdicts = par::map(surface.exec(), &to_verify, |&c| engine.verify_ample_curve(&registry.curves[c].cls));
    for (c, v) in to_verify.into_iter().zip(verdicts) {
        registry.curves[c].verified = Some(v?);
    }

    certified.sort();
    let mut merged: Vec<(Rational, Rational, usize)> = Vec::new();
    for (a, b, c) in certified {
        match merged.last_mut() {
            Some(last) if last.1 == a && last.2 == c => last.1 = b,
            _ => merged.push((a, b, c)),
        }
    }
    let inv_sqrt_d0 = frame.sqrt_d(0).recip();
    let segments: Vec<Segment> = merged
        .into_iter()
        .map(|(a, b, c)| Segment {
            curve: registry.curves[c].clone(),
            t_lo: kappa.scale(&a),
            t_hi: kappa.scale(&b),
            eps_lo: inv_sqrt_d0.scale(&registry.at(c, &a)),
            eps_hi: inv_sqrt_d0.scale(&registry.at(c, &b)),
            certified: true,
            u_lo: a,
            u_hi: b,
        })
        .collect();

    let uncovered = pad_gaps(leaves, &kappa, delta, &den);
    let segment_count = segments.len();
    Ok(Envelope { segments, gaps: GapReport { delta: delta.clone(), uncovered, segment_count }, evaluations })
}

fn round_to(x: &Rational, den: &BigInt) -> Rational {
    Rational::new(quad::floor_int(&(x * rat_int(den.clone()))), den.clone())
}

fn decide(reg: &Registry, points: &BTreeMap<Rational, Point>, a: &Rational, b: &Rational, delta_u: &Rational) -> Step {
    let pa = &points[a];
    let pb = &points[b];
    let sa = reg.attaining(a, pa);
    let sb = reg.attaining(b, pb);
    if let Some(&c) = sa.intersection(&sb).next() {
        return Step::Certified(c);
    }
    if &(b - a) < delta_u {
        return Step::Leaf;
    }
    // Split points are taken with small denominators: evaluation cost grows
    // with the size of the primitive class along the ray.
    let w = b - a;
    let quarter = &w / rat(4, 1);
    let pick = |x: &Rational| {
        let lo = (x - &quarter / rat(2, 1)).max(a + &quarter);
        let hi = (x + &quarter / rat(2, 1)).min(b - &quarter);
        quad::simplest_between(&lo.clone().min(hi.clone()), &hi.max(lo))
    };
    let mid = pick(&((a + b) / rat(2, 1)));
    // Supporting lines that stay lowest towards the other end.
    let ca = sa.iter().min_by(|&&x, &&y| reg.at(x, b).cmp(&reg.at(y, b)).then(x.cmp(&y)));
    let cb = sb.iter().min_by(|&&x, &&y| reg.at(x, a).cmp(&reg.at(y, a)).then(x.cmp(&y)));
    if let (Some(&ca), Some(&cb)) = (ca, cb) {
        let (a0, a1) = &reg.affine[ca];
        let (b0, b1) = &reg.affine[cb];
        if a1 != b1 {
            let cross = (b0 - a0) / (a1 - b1);
            if a < &cross && &cross < b {
                return Step::Split(cross);
            }
        }
    }
    Step::Split(mid)
}

/// Widens each uncovered `u`-leaf to a `t`-interval of length at least δ
/// inside `[-1, 1]`, then merges overlaps.
fn pad_gaps(leaves: Vec<(Rational, Rational)>, kappa: &QuadValue, delta: &Rational, den: &BigInt) -> Vec<Gap> {
    let one = Rational::one();
    let two = rat(2, 1);
    let mut gaps: Vec<Gap> = leaves
        .into_iter()
        .map(|(a, b)| {
            let lo = kappa.scale(&a).lower_rational(den).max(-one.clone());
            let hi = kappa.scale(&b).upper_rational(den).min(one.clone());
            let width = &hi - &lo;
            if &width >= delta {
                return Gap { lo, hi };
            }
            let center = (&lo + &hi) / &two;
            let mut lo = &center - delta / &two;
            let mut hi = &center + delta / &two;
            if lo < -one.clone() {
                lo = -one.clone();
                hi = &lo + delta;
            } else if hi > one {
                hi = one.clone();
                lo = &hi - delta;
            }
            Gap { lo, hi }
        })
        .collect();
    gaps.sort();
    let mut merged: Vec<Gap> = Vec::new();
    for g in gaps {
        match merged.last_mut() {
            Some(last) if g.lo <= last.hi => {
                if g.hi > last.hi {
                    last.hi = g.hi;
                }
            }
            _ => merged.push(g),
        }
    }
    merged
}

/// Uniform `t`-grid with `n` intervals on `[-1, 1]`.
pub fn uniform_grid(n: u32) -> Vec<Rational> {
    let n = n.max(1) as i64;
    (0..=n).map(|i| rat(2 * i - n, n)).collect()
}

/// Envelope on the default grid (16 intervals) at resolution δ.
pub fn plot_envelope(engine: &Engine, delta: &Rational) -> Result<Envelope> {
    build_envelope(engine, &uniform_grid(16), delta)
}

impl Segment {
    /// Whether `t` lies in the closed segment.
    pub fn covers(&self, t: &QuadValue) -> bool {
        &self.t_lo <= t && t <= &self.t_hi
    }
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.uncovered.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CurveKind;

    fn engine(e: &[&[i64]]) -> Engine {
        Engine::new(Surface::from_entries(e.iter().map(|r| r.to_vec()).collect()).unwrap())
    }

    fn q(n: i64, d: i64) -> QuadValue {
        QuadValue::from_rational(rat(n, d))
    }

    #[test]
    fn section_functionals() {
        let e = engine(&[&[0, 4], &[4, 0]]);
        let s = e.surface();
        let r2 = QuadValue::sqrt_of_int(2);
        let c = SeshadriCurve::elliptic(s, &LatticeClass(vec![1, 0]));
        assert_eq!(curve_functional_on_section(s, &c).unwrap(), (r2.clone(), -r2.clone()));
        let c = SeshadriCurve::elliptic(s, &LatticeClass(vec![0, 1]));
        assert_eq!(curve_functional_on_section(s, &c).unwrap(), (r2.clone(), r2.clone()));
        let r = e.seshadri_constant(&LatticeClass(vec![1, 1])).unwrap();
        let (c0, c1) = curve_functional_on_section(s, &r.curves[0]).unwrap();
        assert_eq!(c0, QuadValue::new(rat(2, 3), 2));
        assert!(c1.is_zero());
        let exe = Surface::from_entries(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(curve_functional_on_section(&exe, &c), Err(Error::WrongRho(3)));
    }

    #[test]
    fn three_segments_for_the_hyperbolic_plane() {
        let e = engine(&[&[0, 4], &[4, 0]]);
        let grid = [rat(-1, 1), rat(-1, 2), rat(0, 1), rat(1, 2), rat(1, 1)];
        let env = build_envelope(&e, &grid, &rat(1, 100)).unwrap();
        assert!(env.gaps.is_empty());
        let segs: Vec<_> = env.segments.iter().map(|s| (s.curve.kind, s.curve.cls.clone(), s.t_lo.clone(), s.t_hi.clone())).collect();
        assert_eq!(
            segs,
            vec![
                (CurveKind::Elliptic, LatticeClass(vec![0, 1]), q(-1, 1), q(-1, 3)),
                (CurveKind::Ample, LatticeClass(vec![1, 1]), q(-1, 3), q(1, 3)),
                (CurveKind::Elliptic, LatticeClass(vec![1, 0]), q(1, 3), q(1, 1)),
            ]
        );
        assert_eq!(env.segments[1].eps_lo, QuadValue::new(rat(2, 3), 2));
        assert_eq!(env.segments[1].curve.verified, Some(true));
        assert_eq!(build_envelope(&e, &[rat(2, 1)], &rat(1, 10)), Err(Error::GridPointNotNef("2".into())));
    }
}
