//! Seshadri constants `ε(L) = min{ε_ell(L), ε_amp(L), √(L²)}`.
//!
//! The ample part is a minimum of Pell bounds `π_P(L)`. Only finitely many
//! can undercut a known upper bound `R < √(L²)`: each such `P` has a
//! submaximality domain containing a cross-polytope of volume `ζ` (built from
//! per-axis windows), which bounds `b₀(P)`. On top of that box, every `P` with
//! `π_P(L) ≤ R` satisfies `(L·P)² − R²·P² ≤ R²` (because `k/ℓ ≥ 1/√(P²+1)`),
//! a positive definite quadratic condition that is enumerated directly.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::elliptic;
use crate::error::{Error, Result};
use crate::frame::LatticeBox;
use crate::linalg::RatMatrix;
use crate::lattice::{primitive_from_rational, primitive_part, IsometryMap, LatticeClass, Positivity};
use crate::pell::{self, make_pell_bound, PellBound, PellSolution};
use crate::quad::{self, rat, rat_int, QuadValue, Rational};
use crate::surface::Surface;

/// Rational over-approximation of π used in sphere volumes.
fn pi_upper() -> Rational {
    rat(355, 113)
}

fn window_den() -> BigInt {
    BigInt::one() << 48
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    Elliptic,
    Ample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attainment {
    Elliptic,
    Ample,
    SqrtBound,
}

/// A curve computing (or bounding) Seshadri constants, by its numerical data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeshadriCurve {
    pub kind: CurveKind,
    #[serde(rename = "class")]
    pub cls: LatticeClass,
    #[serde(with = "quad::serde_opt_bigint")]
    pub ell: Option<BigInt>,
    #[serde(with = "quad::serde_opt_bigint")]
    pub k: Option<BigInt>,
    /// `M ↦ functional·M`: `S·E` for elliptic curves, `(k/ℓ)·S·P` otherwise.
    #[serde(with = "quad::serde_rational_vec")]
    pub functional: Vec<Rational>,
    /// For ample curves: whether the Pell bound was confirmed to be the unique
    /// minimizer at `P` itself.
    pub verified: Option<bool>,
}

impl SeshadriCurve {
    pub fn elliptic(surface: &Surface, e: &LatticeClass) -> SeshadriCurve {
        let functional = surface.matrix().covector(e.coords()).into_iter().map(rat_int).collect();
        SeshadriCurve { kind: CurveKind::Elliptic, cls: e.clone(), ell: None, k: None, functional, verified: None }
    }

    pub fn ample(bound: &PellBound, verified: Option<bool>) -> SeshadriCurve {
        SeshadriCurve {
            kind: CurveKind::Ample,
            cls: bound.p.clone(),
            ell: Some(bound.sol.ell.clone()),
            k: Some(bound.sol.k.clone()),
            functional: bound.form.clone(),
            verified,
        }
    }

    pub fn pell(&self, surface: &Surface) -> Option<PellSolution> {
        let n = surface.matrix().self_int(&self.cls).ok()?;
        Some(PellSolution { n: n as u128, ell: self.ell.clone()?, k: self.k.clone()? })
    }

    pub fn eval(&self, m: &[Rational]) -> Rational {
        self.functional.iter().zip(m).fold(Rational::zero(), |acc, (f, x)| acc + f * x)
    }

    pub fn eval_class(&self, m: &LatticeClass) -> Rational {
        self.eval(&m.to_rational())
    }
}

/// Window `(t1, t2)` on the normalized cross-section line through `L` along
/// `Bᵢ` on which every admissible functional is submaximal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmaximalityWindow {
    pub axis: usize,
    pub t1: QuadValue,
    pub t2: QuadValue,
}

impl SubmaximalityWindow {
    fn width(&self) -> Rational {
        let t1 = self.t1.as_rational().expect("rational window");
        let t2 = self.t2.as_rational().expect("rational window");
        t2 - t1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Upper bound used to size the search, in units of the input class.
    #[serde(with = "quad::serde_rational")]
    pub r: Rational,
    /// `r` is the perfect-square hypothesis rather than a proven bound.
    pub r_is_hypothesis: bool,
    pub windows: Vec<SubmaximalityWindow>,
    #[serde(with = "quad::serde_rational")]
    pub zeta: Rational,
    #[serde(with = "quad::serde_rational")]
    pub p0_bound: Rational,
    pub pell_box: u64,
    pub elliptic_box: u64,
    pub rounds: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeshadriResult {
    pub value: QuadValue,
    pub attained_by: Vec<Attainment>,
    pub curves: Vec<SeshadriCurve>,
    pub candidates_scanned: u64,
    pub diagnostics: Diagnostics,
}

impl SeshadriResult {
    fn scaled(mut self, r: &Rational) -> SeshadriResult {
        self.value = self.value.scale(r);
        self.diagnostics.r = &self.diagnostics.r * r;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable result")
    }

    pub fn from_json(text: &str) -> Result<SeshadriResult> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Search radius `a/b` with `a²`, `b²` precomputed.
struct Radius {
    r: Rational,
    a2: BigInt,
    b2: BigInt,
}

impl Radius {
    fn new(r: &Rational) -> Radius {
        Radius { r: r.clone(), a2: r.numer() * r.numer(), b2: r.denom() * r.denom() }
    }
}

/// Cube radius up to which a bound within 2⁻⁶⁴ of √(L²) is only used to
/// grow the cube, before its certified region is computed.
fn near_maximal_steps(rho: usize) -> u64 {
    match rho {
        2 => 1 << 20,
        3 => 1 << 9,
        _ => 1 << 6,
    }
}

/// Own Pell solutions beyond this `k` are not computed when a hint exists.
/// Default per-point candidate budget for envelope evaluations. Near points
/// where ε touches `√(L²)` the minimizing curves become arbitrarily large and
/// an exact search need not finish; such points are left uncertified.
pub const ENVELOPE_BUDGET: u64 = 1 << 23;

/// Under a finite budget the own Pell bound is abandoned past this size.
const BUDGETED_OWN_K_BITS: usize = 4096;

const HINTED_OWN_K_MAX: u64 = 1 << 40;

/// Upper bound `R < √(L²)` for a primitive ample class, and whether it is the
/// perfect-square hypothesis.
fn primitive_upper_bound(engine: &Engine, p: &LatticeClass) -> Result<(Rational, bool)> {
    primitive_own_bound(engine, p, None).map(|b| b.expect("unbounded solve"))
}

/// As [`primitive_upper_bound`], giving up (`None`) when the Pell solution
/// of `P²` has `k > k_max`.
fn primitive_own_bound(engine: &Engine, p: &LatticeClass, k_max: Option<&BigInt>) -> Result<Option<(Rational, bool)>> {
    let sq = engine.surface.matrix().self_int(p)?;
    let big = BigInt::from(sq);
    if quad::is_square(&big) {
        let root = quad::isqrt(&big);
        return Ok(Some((Rational::new(BigInt::from(2 * sq - 1), 2 * root), true)));
    }
    Ok(engine.pell(sq as u128, k_max).map(|sol| (Rational::new(sol.k * big, sol.ell), false)))
}

/// `R` for an ample class: `g·kP²/ℓ` for `L = gP` with `P²` non-square, and
/// `g(2P²−1)/(2√P²)` otherwise.
pub fn upper_bound(surface: &Surface, l: &LatticeClass) -> Result<QuadValue> {
    if surface.positivity(l)? != Positivity::Ample {
        return Err(Error::NotAmple);
    }
    let (p, g) = primitive_part(l)?;
    let engine = Engine::new(surface.clone());
    let (r, _) = primitive_upper_bound(&engine, &p)?;
    Ok(QuadValue::from_rational(r * rat_int(g)))
}

/// Inner rational bound for the exit points of the cross-section line
/// `L + σ·uᵢ`: returns `(α, β)` with `α ≤ |σ_a|`, `β ≤ σ_b`.
fn section_exits(yi: &Rational, l_sq_over_d: &Rational, den: &BigInt) -> (Rational, Rational) {
    let disc = yi * yi + l_sq_over_d;
    let lo = quad::sqrt_lower(&disc, den);
    let hi = quad::sqrt_upper(&disc, den);
    // σ_a·σ_b = −L²/d avoids cancellation on the short side.
    let alpha = if !yi.is_negative() { yi + &lo } else { l_sq_over_d / (-yi + &hi) };
    let beta = if !yi.is_positive() { -yi + &lo } else { l_sq_over_d / (yi + &hi) };
    (alpha, beta)
}

/// Window of guaranteed submaximality along axis `i ≥ 1` for functionals
/// `f ≥ 0` on the section with `f(L) ≤ R`.
///
/// Along `L + σ·uᵢ` (with `uᵢ = U·eᵢ`) the square is
/// `Q(σ) = L² − 2σdᵢyᵢ − σ²dᵢ`. The steepest admissible functional on the
/// right is `R(1 + σ/α)`; it meets `√Q` at the positive root of
/// `(R²/α² + dᵢ)σ² + (2R²/α + 2dᵢyᵢ)σ + R² − L²`, and symmetrically on the
/// left. Roots are rounded inward and mapped to normalized `t`.
pub fn submaximality_window(surface: &Surface, l: &LatticeClass, r: &Rational, axis: usize) -> Result<SubmaximalityWindow> {
    let rho = surface.rho();
    if axis == 0 || axis >= rho {
        return Err(Error::DimensionMismatch { expected: rho - 1, got: axis });
    }
    if surface.positivity(l)? != Positivity::Ample {
        return Err(Error::NotAmple);
    }
    if !r.is_positive() {
        return Err(Error::BoundNotPositive);
    }
    let l_sq = rat_int(surface.matrix().self_int(l)?);
    let r2 = r * r;
    if r2 >= l_sq {
        return Err(Error::BoundNotSubmaximal);
    }
    let frame = surface.frame();
    let y = frame.y(l);
    let d = &frame.d()[axis];
    let yi = &y[axis];
    let two = rat_int(2);
    let c = &r2 - &l_sq;
    let scale = QuadValue::sqrt_of(&(d / &frame.d()[0])).scale(&y[0].recip());
    let mut den = window_den();
    loop {
        let (alpha, beta) = section_exits(yi, &(&l_sq / d), &den);

        let a = &r2 / (&alpha * &alpha) + d;
        let b = &two * &r2 / &alpha + &two * d * yi;
        let disc = &b * &b - rat_int(4) * &a * &c;
        let sigma2 = if b.is_positive() {
            -&two * &c / (&b + quad::sqrt_upper(&disc, &den))
        } else {
            (-&b + quad::sqrt_lower(&disc, &den)) / (&two * &a)
        };

        let a = &r2 / (&beta * &beta) + d;
        let b = -&two * &r2 / &beta + &two * d * yi;
        let disc = &b * &b - rat_int(4) * &a * &c;
        let sigma1 = if b.is_negative() {
            &two * &c / (-&b + quad::sqrt_upper(&disc, &den))
        } else {
            (-&b - quad::sqrt_lower(&disc, &den)) / (&two * &a)
        };

        let t2 = scale.scale(&sigma2).lower_rational(&den);
        let t1 = scale.scale(&sigma1).upper_rational(&den);
        if t2.is_positive() && t1.is_negative() {
            return Ok(SubmaximalityWindow {
                axis,
                t1: QuadValue::from_rational(t1),
                t2: QuadValue::from_rational(t2),
            });
        }
        den = &den * &den;
    }
}

/// Volume `∏(t2ᵢ − t1ᵢ)/(ρ−1)!` of the cross-polytope spanned by the windows.
pub fn guaranteed_volume(windows: &[SubmaximalityWindow]) -> Result<Rational> {
    let n = windows.len();
    let mut axes: Vec<usize> = windows.iter().map(|w| w.axis).collect();
    axes.sort_unstable();
    if n == 0 || axes != (1..=n).collect::<Vec<_>>() {
        return Err(Error::WindowCountMismatch { expected: n.max(1), got: axes.iter().filter(|&&a| a >= 1 && a <= n).count() });
    }
    let factorial = (1..=n as i64).product::<i64>();
    let zeta = windows.iter().fold(Rational::one(), |acc, w| acc * w.width()) / rat_int(factorial);
    if !zeta.is_positive() {
        return Err(Error::ZetaNotPositive);
    }
    Ok(zeta)
}

/// Upper bound `(Vol(S^{ρ−2})/ζ)^{1/(ρ−1)}` on `b₀(P)` for every Pell class
/// whose submaximality domain has volume at least `ζ`.
pub fn p0_bound(zeta: &Rational, rho: usize) -> Result<Rational> {
    if !zeta.is_positive() {
        return Err(Error::ZetaNotPositive);
    }
    let vol = match rho {
        2 => rat_int(2),
        3 => rat_int(2) * pi_upper(),
        4 => rat_int(4) * pi_upper(),
        _ => return Err(Error::WrongRho(rho)),
    };
    Ok(quad::root_upper(&(vol / zeta), rho as u32 - 1, &BigInt::from(1u64 << 32)))
}

/// Every Pell bound of a primitive ample class with non-square square whose
/// `b₀` is at most the volume bound for `ζ` (full cube scan).
pub fn candidate_pell_classes(surface: &Surface, zeta: &Rational) -> Result<Vec<PellBound>> {
    let bound = p0_bound(zeta, surface.rho())?;
    let cube = surface.frame().pell_box_radius(&bound)?;
    let m = i64::try_from(cube.radius).map_err(|_| Error::SearchTooLarge(format!("cube radius {}", cube.radius)))?;
    let cells = (2 * m as u128 + 1).checked_pow(surface.rho() as u32).unwrap_or(u128::MAX);
    if cells > 100_000_000 {
        return Err(Error::SearchTooLarge(format!("Pell cube of radius {m}")));
    }
    let bound_sq = &bound * &bound;
    let engine = Engine::new(surface.clone());
    let rho = surface.rho();
    let mut out = crate::par::flat_map_range(surface.exec(), -m, m, |x0| {
        let mut hits = Vec::new();
        let mut rest = vec![-m; rho - 1];
        loop {
            let mut v = vec![x0];
            v.extend(&rest);
            let within = |p: &(LatticeClass, i128)| {
                let y0 = surface.frame().y(&p.0).swap_remove(0);
                &surface.frame().d()[0] * &y0 * &y0 <= bound_sq
            };
            if let Some(p) = engine.admissible_class(&v).filter(within) {
                let sol = engine.pell(p.1 as u128, None).expect("unbounded solve");
                hits.push(PellBound::from_solution(surface.matrix(), p.0, sol));
            }
            let Some(pos) = rest.iter().rposition(|&x| x < m) else { break };
            rest[pos] += 1;
            rest[pos + 1..].iter_mut().for_each(|x| *x = -m);
        }
        hits
    });
    out.sort_by(|a, b| a.p.cmp(&b.p));
    Ok(out)
}

/// Maps a Seshadri curve along a validated isometry.
pub fn transport_curve(surface: &Surface, curve: &SeshadriCurve, psi: &IsometryMap) -> Result<SeshadriCurve> {
    let psi = surface.matrix().check_isometry(surface.h(), psi.matrix().to_vec())?;
    let cls = psi.apply(&curve.cls);
    Ok(match curve.kind {
        CurveKind::Elliptic => SeshadriCurve::elliptic(surface, &cls),
        CurveKind::Ample => {
            let ratio = Rational::new(curve.k.clone().unwrap_or_default(), curve.ell.clone().unwrap_or_else(BigInt::one));
            let functional = surface.matrix().covector(cls.coords()).into_iter().map(|c| rat_int(c) * &ratio).collect();
            SeshadriCurve { cls, functional, ..curve.clone() }
        }
    })
}

#[derive(Clone, Debug)]
enum CachedPell {
    Solved(PellSolution),
    /// The fundamental `k` exceeds this value.
    Beyond(BigInt),
}

/// Outcome of the Pell-candidate search below a bound.
#[derive(Clone, Debug)]
struct PellSearch {
    /// The initial radius, or the first value found when none was given.
    r0: Rational,
    best: Option<Rational>,
    minimizers: Vec<PellBound>,
    scanned: u64,
    rounds: u32,
    windows: Vec<SubmaximalityWindow>,
    zeta: Rational,
    p0_bound: Rational,
    pell_box: u64,
}

/// Computes Seshadri constants on one surface, caching Pell solutions.
#[derive(Debug)]
pub struct Engine {
    surface: Surface,
    verify: bool,
    budget: Option<u64>,
    cache: Mutex<HashMap<u128, CachedPell>>,
}

impl Engine {
    pub fn new(surface: Surface) -> Engine {
        Engine { surface, verify: true, budget: None, cache: Mutex::new(HashMap::new()) }
    }

    /// Caps the lattice points examined by a single Pell search; a search
    /// that would exceed it fails with [`Error::SearchTooLarge`].
    pub fn with_candidate_budget(mut self, budget: Option<u64>) -> Engine {
        self.budget = budget;
        self
    }

    /// Whether ample witnesses are checked with [`Engine::verify_ample_curve`].
    pub fn with_verification(mut self, verify: bool) -> Engine {
        self.verify = verify;
        self
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    /// Fundamental Pell solution for `n`, or `None` when its `k` is known to
    /// exceed `k_max`.
    fn pell(&self, n: u128, k_max: Option<&BigInt>) -> Option<PellSolution> {
        {
            let cache = self.cache.lock().expect("pell cache");
            match (cache.get(&n), k_max) {
                (Some(CachedPell::Solved(sol)), Some(km)) if &sol.k > km => return None,
                (Some(CachedPell::Solved(sol)), _) => return Some(sol.clone()),
                (Some(CachedPell::Beyond(k0)), Some(km)) if k0 >= km => return None,
                _ => {}
            }
        }
        let result = pell::pell_bounded(n, k_max).expect("non-square");
        let entry = match (&result, k_max) {
            (Some(sol), _) => CachedPell::Solved(sol.clone()),
            (None, Some(km)) => CachedPell::Beyond(km.clone()),
            (None, None) => unreachable!(),
        };
        self.cache.lock().expect("pell cache").insert(n, entry);
        result.filter(|sol| k_max.is_none_or(|km| &sol.k <= km))
    }

    /// `(P, P²)` if `v` is a primitive forward class with non-square `P² > 0`.
    fn admissible_class(&self, v: &[i64]) -> Option<(LatticeClass, i128)> {
        let surface = &self.surface;
        let p_sq = surface.dot(v, v);
        if p_sq <= 0 || quad::is_square(&BigInt::from(p_sq)) || surface.dot(v, surface.h().coords()) <= 0 {
            return None;
        }
        let cls = LatticeClass(v.to_vec());
        cls.is_primitive().then_some((cls, p_sq))
    }

    /// Pell bound of `v` at `L` if it is at most `r`.
    fn pell_candidate(&self, l: &LatticeClass, v: &[i64], r: &Radius) -> Option<(Rational, PellBound)> {
        let lp = self.surface.dot(l.coords(), v);
        let p_sq = self.surface.dot(v, v);
        if lp <= 0 || p_sq <= 0 {
            return None;
        }
        // k ≤ R/√((L·P)² − R²P²) is necessary for kL·P/ℓ ≤ R; with R = a/b
        // this reads k² ≤ a²/((L·P)²b² − a²P²).
        let gap = &r.b2 * BigInt::from(lp * lp) - &r.a2 * BigInt::from(p_sq);
        if !gap.is_positive() {
            return None;
        }
        let k_max = quad::isqrt(&(&r.a2 / gap));
        if k_max.is_zero() {
            return None;
        }
        let (cls, p_sq) = self.admissible_class(v)?;
        let sol = self.pell(p_sq as u128, Some(&k_max))?;
        let value = Rational::new(&sol.k * BigInt::from(lp), sol.ell.clone());
        (value <= r.r).then(|| (value, PellBound::from_solution(self.surface.matrix(), cls, sol)))
    }

    /// All Pell bounds with `π_P(L) ≤ r0` attaining the least value, for a
    /// primitive ample `L` and rational `r0 < √(L²)`; without `r0` the bound
    /// must come from a near-maximal candidate.
    ///
    /// The cube is grown geometrically and `r` is lowered to the best value
    /// found; the search stops once the cube covers the certified region for
    /// the current `r` (which only shrinks as `r` decreases).
    fn pell_search(&self, l: &LatticeClass, r0: Option<Rational>, budget: u64) -> Result<PellSearch> {
        let surface = &self.surface;
        let rho = surface.rho();
        let sl: Vec<Rational> = surface.matrix().covector(l.coords()).into_iter().map(rat_int).collect();
        let s_rat = surface.matrix().to_rational();
        // The search radius only has to dominate the best value; rounding it
        // up to a nearby rational with a small denominator keeps the exact
        // per-round arithmetic cheap.
        let l_sq = rat_int(surface.matrix().self_int(l)?);
        let root_lo = quad::sqrt_lower(&l_sq, &(BigInt::one() << 64));
        let relax = |r: Rational| -> Rational {
            if r >= root_lo {
                return r;
            }
            let hi = &r + (&root_lo - &r) / rat_int(1024);
            quad::simplest_between(&r, &hi)
        };
        let probe_r = quad::simplest_between(&(&root_lo - &root_lo / rat_int(1u64 << 40)), &(&root_lo - &root_lo / rat_int(1u64 << 41)));
        // Without an initial bound only a candidate found while probing can
        // supply one.
        let mut proven = r0.is_some();
        let mut r0 = r0.unwrap_or_else(|| root_lo.clone());
        let mut r = relax(r0.clone());
        let mut step: u64 = 1;
        let mut found: BTreeMap<LatticeClass, (Rational, PellBound)> = BTreeMap::new();
        let mut scanned = 0u64;
        let mut rounds = 0u32;
        loop {
            rounds += 1;
            // While r is within 2⁻⁶⁴ of √(L²) the certified region is
            // negligible and its exact computation costly; the cube only
            // grows until a better candidate lowers r.
            let near_maximal = r >= root_lo && step < near_maximal_steps(rho);
            if !near_maximal && !proven {
                return Err(Error::SearchTooLarge("no upper bound below the square root".into()));
            }
            let region = if near_maximal {
                None
            } else {
                let windows = (1..rho).map(|i| submaximality_window(surface, l, &r, i)).collect::<Result<Vec<_>>>()?;
                let zeta = guaranteed_volume(&windows)?;
                let p0 = p0_bound(&zeta, rho)?;
                let zeta_box = surface.frame().pell_box_radius(&p0)?.radius;
                Some((windows, zeta, p0, zeta_box))
            };
            // Near-maximal rounds never conclude the search, so their cube
            // only needs to propose candidates; a simple radius suffices.
            let r2 = if near_maximal { &probe_r * &probe_r } else { &r * &r };
            let g: Vec<Vec<Rational>> =
                (0..rho).map(|i| (0..rho).map(|j| &sl[i] * &sl[j] - &r2 * &s_rat[i][j]).collect()).collect();
            let ellipsoid = Ellipsoid::new(&g, &r2).ok_or(Error::BoundNotSubmaximal)?;
            let full = match &region {
                Some((.., zeta_box)) => {
                    let extent = Ellipsoid::extent(&g, &r2).and_then(|e| e.to_u64()).unwrap_or(u64::MAX);
                    (*zeta_box).min(extent)
                }
                None => u64::MAX,
            };
            let m = step.min(full);
            let m = i64::try_from(m).map_err(|_| Error::SearchTooLarge(format!("cube radius {m}")))?;
            // Near-maximal rounds look only for values below the probe radius.
            let radius = Radius::new(if near_maximal { &probe_r } else { &r });
            let counter = AtomicU64::new(scanned);
            let hits = ellipsoid.points(surface.exec(), m, |v| {
                if counter.fetch_add(1, Ordering::Relaxed) >= budget {
                    return None;
                }
                self.pell_candidate(l, v, &radius)
            });
            scanned = counter.into_inner();
            if scanned > budget {
                return Err(Error::SearchTooLarge(format!("more than {budget} Pell candidates")));
            }
            for (value, bound) in hits {
                found.entry(bound.p.clone()).or_insert((value, bound));
            }
            if let Some(best) = found.values().map(|(v, _)| v).min() {
                if !proven {
                    r0 = best.clone();
                    proven = true;
                }
                if *best < r {
                    r = relax(best.clone());
                }
            }
            if let Some((windows, zeta, p0, _)) = region.filter(|_| step >= full) {
                let best = found.values().map(|(v, _)| v.clone()).min();
                let minimizers = found
                    .into_values()
                    .filter(|(v, _)| Some(v) == best.as_ref())
                    .map(|(_, b)| b)
                    .collect();
                return Ok(PellSearch { r0, best, minimizers, scanned, rounds, windows, zeta, p0_bound: p0, pell_box: full });
            }
            step = step.saturating_mul(2);
        }
    }

    /// Pell bounds with `π_P(L) = s` exactly, where `L² = s²`.
    ///
    /// Such `P` satisfy `k²((L·P)² − L²P²) = s²`. The form `(L·P)² − L²P²` is
    /// invariant under `P ↦ P + aL` and positive definite on a complement of
    /// `L`, so the solutions are finitely many lines `P₀ + ℤL`; each line
    /// contributes its first member inside the positive cone that is an
    /// admissible class whose fundamental Pell solution has the right `k`.
    fn square_ties(&self, l: &LatticeClass, s: i128) -> Result<Vec<PellBound>> {
        let surface = &self.surface;
        let rho = surface.rho();
        let basis = complete_basis(l.coords());
        let rest = &basis[1..];
        let lb: Vec<i128> = rest.iter().map(|b| surface.dot(l.coords(), b)).collect();
        let s_sq = s * s;
        let g: RatMatrix = (0..rho - 1)
            .map(|i| (0..rho - 1).map(|j| rat_int(lb[i] * lb[j] - s_sq * surface.dot(&rest[i], &rest[j]))).collect())
            .collect();
        let r2 = rat_int(s_sq);
        let Some(ellipsoid) = Ellipsoid::new(&g, &r2) else {
            return Ok(Vec::new());
        };
        let m = Ellipsoid::extent(&g, &r2).and_then(|e| e.to_i64()).ok_or_else(|| Error::SearchTooLarge("tie search".into()))?;
        let lines = ellipsoid.points(surface.exec(), m, |c| {
            let v: Vec<i64> = (0..rho).map(|t| rest.iter().zip(c).map(|(b, &x)| b[t] * x).sum()).collect();
            let lv = surface.dot(l.coords(), &v);
            let q = lv * lv - s_sq * surface.dot(&v, &v);
            if q <= 0 || s_sq % q != 0 {
                return None;
            }
            let k = quad::isqrt(&BigInt::from(s_sq / q)).to_i128()?;
            (k * k * q == s_sq && (k * lv) % s == 0).then_some((v, lv, k))
        });
        let mut ties = Vec::new();
        for (v, lv, k) in lines {
            // P² > 0 with L·P > 0 needs a > (s/k − L·v)/s².
            let a0: BigInt = quad::floor_int(&(Rational::new(BigInt::from(s - k * lv), BigInt::from(k * s_sq)))) + 1;
            let Some(a0) = a0.to_i64() else { continue };
            let hit = (a0..a0 + 64).find_map(|a| {
                let w: Vec<i64> = v.iter().zip(l.coords()).map(|(x, y)| x + a * y).collect();
                let (cls, p_sq) = self.admissible_class(&w)?;
                let sol = self.pell(p_sq as u128, Some(&BigInt::from(k)))?;
                (sol.k == BigInt::from(k)).then(|| PellBound::from_solution(surface.matrix(), cls, sol))
            });
            ties.extend(hit);
        }
        ties.sort_by(|a, b| a.p.cmp(&b.p));
        ties.dedup_by(|a, b| a.p == b.p);
        Ok(ties)
    }

    /// `ε(L)` for a nef class `L`.
    pub fn seshadri_constant(&self, l: &LatticeClass) -> Result<SeshadriResult> {
        self.constant_with(l, self.verify, &[], self.budget.unwrap_or(u64::MAX))
    }

    fn constant_with(&self, l: &LatticeClass, verify: bool, hints: &[Vec<Rational>], budget: u64) -> Result<SeshadriResult> {
        let surface = &self.surface;
        match surface.positivity(l)? {
            Positivity::NotNef => return Err(Error::NotNef),
            _ if l.is_zero() => return Err(Error::ZeroVector),
            _ => {}
        }
        let (p, g) = primitive_part(l)?;
        if surface.matrix().self_int(&p)? == 0 {
            return Ok(SeshadriResult {
                value: QuadValue::zero(),
                attained_by: vec![Attainment::Elliptic],
                curves: vec![SeshadriCurve::elliptic(surface, &p)],
                candidates_scanned: 0,
                diagnostics: Diagnostics::default(),
            });
        }
        Ok(self.primitive_constant(&p, verify, hints, budget)?.scaled(&rat_int(g)))
    }

    /// `ε(v)` for a nef class with rational coordinates, by homogeneity.
    pub fn seshadri_rational(&self, v: &[Rational]) -> Result<SeshadriResult> {
        if v.len() != self.surface.rho() {
            return Err(Error::DimensionMismatch { expected: self.surface.rho(), got: v.len() });
        }
        let (cls, r) = primitive_from_rational(v)?;
        Ok(self.seshadri_constant(&cls)?.scaled(&r))
    }

    /// As [`Engine::seshadri_rational`], without verifying ample witnesses and
    /// with a finite candidate budget ([`ENVELOPE_BUDGET`] unless one is set).
    /// `hints` are functionals of known curves (upper bounds for ε), used
    /// only to tighten the search.
    pub(crate) fn seshadri_rational_unverified(&self, v: &[Rational], hints: &[Vec<Rational>]) -> Result<SeshadriResult> {
        let (cls, r) = primitive_from_rational(v)?;
        Ok(self.constant_with(&cls, false, hints, self.budget.unwrap_or(ENVELOPE_BUDGET))?.scaled(&r))
    }

    fn primitive_constant(&self, p: &LatticeClass, verify: bool, hints: &[Vec<Rational>], budget: u64) -> Result<SeshadriResult> {
        let surface = &self.surface;
        let sq = surface.matrix().self_int(p)?;
        let root = QuadValue::sqrt_of_int(sq);
        let elliptic_box = surface.frame().elliptic_box_radius(surface.matrix(), p, &root)?;
        let ells = elliptic::elliptic_up_to(surface, p, &root, false)?;
        let eps_ell = ells.iter().map(|(d, _)| *d).find(|d| d * d < sq);
        // Candidates for R, each a genuine upper bound for ε(P) except the
        // perfect-square hypothesis. The own Pell bound is skipped when its
        // solution is huge and a hint is available.
        let root_sq = rat_int(sq);
        let hint = hints
            .iter()
            .filter(|f| f.len() == p.0.len())
            .map(|f| f.iter().zip(&p.0).map(|(a, &x)| a * rat_int(x)).sum::<Rational>())
            .filter(|v| v.is_positive() && v * v < root_sq)
            .min();
        let own_limit = match (&hint, budget) {
            (Some(_), _) => Some(BigInt::from(HINTED_OWN_K_MAX)),
            (None, u64::MAX) => None,
            (None, _) => Some(BigInt::one() << BUDGETED_OWN_K_BITS),
        };
        let own = primitive_own_bound(self, p, own_limit.as_ref())?;
        let mut options: Vec<(Rational, bool)> = own.into_iter().collect();
        options.extend(hint.map(|h| (h, false)));
        options.extend(eps_ell.map(|e| (rat_int(e), false)));
        // On ties, prefer a proven bound over the hypothesis.
        let best_option = options.into_iter().min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let hypothesis = best_option.as_ref().is_some_and(|o| o.1);
        let search = self.pell_search(p, best_option.map(|o| o.0), budget)?;
        let r0 = search.r0.clone();

        let ell_value = eps_ell.map(QuadValue::from_int);
        let amp_value = search.best.clone().map(QuadValue::from_rational);
        let value = [ell_value.clone(), amp_value.clone(), Some(root.clone())].into_iter().flatten().min().expect("non-empty");

        let mut attained_by = Vec::new();
        let mut curves = Vec::new();
        let ell_hits: Vec<&LatticeClass> =
            ells.iter().filter(|(d, _)| QuadValue::from_int(*d) == value).map(|(_, e)| &e.0).collect();
        if !ell_hits.is_empty() {
            attained_by.push(Attainment::Elliptic);
            curves.extend(ell_hits.into_iter().map(|e| SeshadriCurve::elliptic(surface, e)));
        }
        if amp_value.as_ref() == Some(&value) {
            attained_by.push(Attainment::Ample);
            for bound in &search.minimizers {
                let verified = if verify { Some(self.verify_ample_curve(&bound.p)?) } else { None };
                curves.push(SeshadriCurve::ample(bound, verified));
            }
        }
        if value == root {
            if let Some(s) = root.as_rational().and_then(|r| r.to_integer().to_i128()) {
                let ties = self.square_ties(p, s)?;
                if !ties.is_empty() {
                    attained_by.push(Attainment::Ample);
                }
                for bound in &ties {
                    let verified = if verify { Some(self.verify_ample_curve(&bound.p)?) } else { None };
                    curves.push(SeshadriCurve::ample(bound, verified));
                }
            }
            attained_by.push(Attainment::SqrtBound);
        }
        Ok(SeshadriResult {
            value,
            attained_by,
            curves,
            candidates_scanned: search.scanned,
            diagnostics: Diagnostics {
                r: r0,
                r_is_hypothesis: hypothesis,
                windows: search.windows,
                zeta: search.zeta,
                p0_bound: search.p0_bound,
                pell_box: search.pell_box,
                elliptic_box: elliptic_box.radius,
                rounds: search.rounds,
            },
        })
    }

    /// Whether `π_P` is the unique strict minimum at `P` among all Pell bounds
    /// and elliptic degrees, i.e. whether it is realized by a Seshadri curve.
    pub fn verify_ample_curve(&self, p: &LatticeClass) -> Result<bool> {
        let surface = &self.surface;
        let bound = make_pell_bound(surface.matrix(), surface.h(), p)?;
        let r = bound.eval(p)?;
        if !elliptic::elliptic_up_to(surface, p, &QuadValue::from_rational(r.clone()), false)?.is_empty() {
            return Ok(false);
        }
        let search = self.pell_search(p, Some(r.clone()), self.budget.unwrap_or(u64::MAX))?;
        Ok(search.best.as_ref() == Some(&r) && search.minimizers.len() == 1 && search.minimizers[0].p == *p)
    }

    /// The box used for elliptic classes of degree at most `√(L²)`.
    pub fn elliptic_box(&self, l: &LatticeClass) -> Result<LatticeBox> {
        let sq = self.surface.matrix().self_int(l)?;
        self.surface.frame().elliptic_box_radius(self.surface.matrix(), l, &QuadValue::sqrt_of_int(sq))
    }
}

/// `ε(L)` on a surface (fresh engine; see [`Engine`] to reuse Pell caches).
pub fn seshadri_constant(surface: &Surface, l: &LatticeClass) -> Result<SeshadriResult> {
    Engine::new(surface.clone()).seshadri_constant(l)
}

pub fn verify_ample_curve(surface: &Surface, p: &LatticeClass) -> Result<bool> {
    Engine::new(surface.clone()).verify_ample_curve(p)
}

/// A basis of `ℤ^ρ` whose first vector is the primitive vector `v`.
fn complete_basis(v: &[i64]) -> Vec<Vec<i64>> {
    let n = v.len();
    // Row operations reducing `w` to a multiple of e₁, applied inversely to
    // the columns of `inv`, so that `inv·w = v` throughout.
    let mut w: Vec<i64> = v.to_vec();
    let mut inv: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for i in 1..n {
        if w[i] == 0 {
            continue;
        }
        let (g, x, y) = ext_gcd(w[0], w[i]);
        let (a, b) = (w[0] / g, w[i] / g);
        // [[x, y], [−b, a]] has inverse [[a, −y], [b, x]].
        for row in inv.iter_mut() {
            let (c0, ci) = (row[0], row[i]);
            row[0] = c0 * a + ci * b;
            row[i] = -c0 * y + ci * x;
        }
        w[0] = g;
        w[i] = 0;
    }
    if w[0] < 0 {
        inv.iter_mut().for_each(|row| row[0] = -row[0]);
    }
    (0..n).map(|j| (0..n).map(|i| inv[i][j]).collect()).collect()
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf(e: &[&[i64]]) -> Surface {
        Surface::from_entries(e.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn c(v: &[i64]) -> LatticeClass {
        LatticeClass(v.to_vec())
    }

    fn q(n: i64, d: i64) -> QuadValue {
        QuadValue::from_rational(rat(n, d))
    }

    #[test]
    fn basis_completion() {
        for v in [vec![9i64, 32], vec![-3, 5], vec![0, 1], vec![6, 10, 15], vec![4, -6, 9, 0]] {
            let b = complete_basis(&v);
            assert_eq!(b[0], v);
            let inv = crate::linalg::inverse(&crate::linalg::from_int(&b)).expect("invertible");
            assert!(inv.iter().flatten().all(|x| x.is_integer()));
        }
    }

    #[test]
    fn square_classes_report_tying_curves() {
        let e = Engine::new(surf(&[&[0, 9], &[9, 0]]));
        let r = e.seshadri_constant(&c(&[9, 32])).unwrap();
        assert_eq!(r.value, QuadValue::from_int(72));
        let classes: Vec<_> = r.curves.iter().map(|c| c.cls.clone()).collect();
        assert!(classes.contains(&c(&[1, 4])) && classes.contains(&c(&[7, 24])), "{classes:?}");
        assert!(r.attained_by.contains(&Attainment::SqrtBound));
    }

    #[test]
    fn upper_bounds() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        assert_eq!(upper_bound(&s4, &c(&[1, 1])).unwrap(), q(8, 3));
        assert_eq!(upper_bound(&s4, &c(&[2, 2])).unwrap(), q(16, 3));
        let s8 = surf(&[&[0, 8], &[8, 0]]);
        assert_eq!(upper_bound(&s8, &c(&[1, 1])).unwrap(), q(31, 8));
        assert_eq!(upper_bound(&s8, &c(&[1, 0])), Err(Error::NotAmple));
    }

    #[test]
    fn windows() {
        let s = surf(&[&[1, 0], &[0, -1]]);
        let w = submaximality_window(&s, &c(&[1, 0]), &rat(1, 2), 1).unwrap();
        assert_eq!((w.t1.clone(), w.t2.clone()), (q(-3, 5), q(3, 5)));
        assert_eq!(guaranteed_volume(&[w]).unwrap(), rat(6, 5));
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let w = submaximality_window(&s4, &c(&[1, 1]), &rat(8, 3), 1).unwrap();
        assert_eq!((w.t1, w.t2), (q(-1, 17), q(1, 17)));
        assert_eq!(submaximality_window(&s4, &c(&[1, 1]), &rat(3, 1), 1), Err(Error::BoundNotSubmaximal));
        assert_eq!(guaranteed_volume(&[]), Err(Error::WindowCountMismatch { expected: 1, got: 0 }));
        let half = |axis| SubmaximalityWindow { axis, t1: q(-1, 2), t2: q(1, 2) };
        assert_eq!(guaranteed_volume(&[half(1), half(2)]).unwrap(), rat(1, 2));
        let flat = SubmaximalityWindow { axis: 1, t1: q(1, 2), t2: q(1, 2) };
        assert_eq!(guaranteed_volume(&[flat]), Err(Error::ZetaNotPositive));
    }

    #[test]
    fn window_is_sound_for_off_center_classes() {
        let s = surf(&[&[2, 1], &[1, -2]]);
        let l = c(&[3, 1]);
        let sq = s.matrix().self_int(&l).unwrap();
        let r = rat(7, 2);
        assert!(&r * &r < rat_int(sq));
        let w = submaximality_window(&s, &l, &r, 1).unwrap();
        assert!(w.t1 < QuadValue::zero() && w.t2 > QuadValue::zero());
    }

    #[test]
    fn volumes_to_boxes() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let cands = candidate_pell_classes(&s4, &rat(2, 3)).unwrap();
        assert!(cands.iter().any(|b| b.p == c(&[1, 1])));
        assert!(candidate_pell_classes(&s4, &rat(4, 1)).unwrap().is_empty());
        assert_eq!(candidate_pell_classes(&s4, &rat(0, 1)), Err(Error::ZetaNotPositive));
        let exe = surf(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert!(!candidate_pell_classes(&exe, &rat(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn constants_on_model_surfaces() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let r = seshadri_constant(&s4, &c(&[1, 1])).unwrap();
        assert_eq!(r.value, q(8, 3));
        assert_eq!(r.attained_by, vec![Attainment::Ample]);
        assert_eq!(r.curves.len(), 1);
        assert_eq!(r.curves[0].cls, c(&[1, 1]));
        assert_eq!((r.curves[0].ell.clone(), r.curves[0].k.clone()), (Some(BigInt::from(3)), Some(BigInt::from(1))));
        assert_eq!(r.curves[0].verified, Some(true));

        let s8 = surf(&[&[0, 8], &[8, 0]]);
        let r = seshadri_constant(&s8, &c(&[1, 1])).unwrap();
        assert_eq!(r.value, QuadValue::from_int(4));
        assert_eq!(r.attained_by, vec![Attainment::SqrtBound]);
        assert!(r.curves.is_empty());
        assert!(r.diagnostics.r_is_hypothesis);
        assert_eq!(r.diagnostics.r, rat(31, 8));

        let exe = surf(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let r = seshadri_constant(&exe, &c(&[1, 1, 1])).unwrap();
        assert_eq!(r.value, QuadValue::from_int(2));
        assert_eq!(r.attained_by, vec![Attainment::Elliptic]);
        let mut classes: Vec<_> = r.curves.iter().map(|x| x.cls.clone()).collect();
        classes.sort();
        assert_eq!(classes, vec![c(&[0, 0, 1]), c(&[0, 1, 0]), c(&[1, 0, 0])]);

        let r = seshadri_constant(&s4, &c(&[1, 0])).unwrap();
        assert_eq!(r.value, QuadValue::zero());
        assert_eq!(r.curves[0].kind, CurveKind::Elliptic);
        assert_eq!(seshadri_constant(&s4, &c(&[1, -1])), Err(Error::NotNef));
    }

    #[test]
    fn homogeneity_and_rational_classes() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let e = Engine::new(s4);
        assert_eq!(e.seshadri_constant(&c(&[3, 3])).unwrap().value, QuadValue::from_int(8));
        let r = e.seshadri_rational(&[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(r.value, q(4, 3));
    }

    #[test]
    fn verification() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        assert!(verify_ample_curve(&s4, &c(&[1, 1])).unwrap());
        let s8 = surf(&[&[0, 8], &[8, 0]]);
        assert_eq!(verify_ample_curve(&s8, &c(&[1, 1])), Err(Error::SquareSelfIntersection(16)));
        assert_eq!(verify_ample_curve(&s8, &c(&[1, 4])), Err(Error::SquareSelfIntersection(64)));
    }

    #[test]
    fn transport() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let swap = s4.matrix().check_isometry(s4.h(), vec![vec![0, 1], vec![1, 0]]).unwrap();
        let e = SeshadriCurve::elliptic(&s4, &c(&[1, 0]));
        assert_eq!(transport_curve(&s4, &e, &swap).unwrap().cls, c(&[0, 1]));
        let r = seshadri_constant(&s4, &c(&[1, 1])).unwrap();
        let a = &r.curves[0];
        assert_eq!(&transport_curve(&s4, a, &swap).unwrap(), a);
        let id = IsometryMap::identity(2);
        assert_eq!(&transport_curve(&s4, a, &id).unwrap(), a);
    }

    #[test]
    fn json_round_trip() {
        let s4 = surf(&[&[0, 4], &[4, 0]]);
        let r = seshadri_constant(&s4, &c(&[1, 2])).unwrap();
        assert_eq!(SeshadriResult::from_json(&r.to_json()).unwrap(), r);
    }
}

