//! Pell equations `ℓ² − N·k² = 1` and the linear bounds `M ↦ k(M·P)/ℓ` they
//! induce on the Néron–Severi space.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::HodgeFrame;
use crate::lattice::{IntersectionMatrix, LatticeClass, Positivity};
use crate::quad::{self, rat_int, QuadValue, Rational};

/// Fundamental solution of `ℓ² − N·k² = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PellSolution {
    pub n: u128,
    #[serde(with = "quad::serde_bigint")]
    pub ell: BigInt,
    #[serde(with = "quad::serde_bigint")]
    pub k: BigInt,
}

/// Fundamental solution via the continued fraction of `√N`.
pub fn pell_fundamental(n: u128) -> Result<PellSolution> {
    match pell_bounded(n, None)? {
        Some(sol) => Ok(sol),
        None => unreachable!("unbounded expansion always terminates"),
    }
}

/// Like [`pell_fundamental`], but gives up (returning `None`) as soon as the
/// convergent denominators exceed `k_max`: the fundamental `k` is then larger.
///
/// The expansion runs on machine integers while `log₂ k` is tracked in
/// floating point; exact convergents are built only once the period closes,
/// so rejecting a huge solution costs linear rather than quadratic time.
pub fn pell_bounded(n: u128, k_max: Option<&BigInt>) -> Result<Option<PellSolution>> {
    let a0 = n.isqrt();
    if a0 * a0 == n {
        return Err(Error::PerfectSquare(n.to_string()));
    }
    // One bit of slack covers the floating-point drift.
    let limit = k_max.map(|km| km.bits() as f64 + 1.0);
    let (mut m, mut d, mut a) = (0u128, 1u128, a0);
    let mut quotients = Vec::new();
    // k as kc·2^scale, with the previous denominator kp on the same scale.
    let (mut kp, mut kc, mut scale) = (0f64, 1f64, 0f64);
    let mut sign = 1i8;
    loop {
        m = d * a - m;
        d = (n - m * m) / d;
        sign = -sign;
        if d == 1 && sign == 1 {
            break;
        }
        if limit.is_some_and(|l| scale + kc.log2() > l) {
            return Ok(None);
        }
        a = (a0 + m) / d;
        quotients.push(a);
        (kp, kc) = (kc, a as f64 * kc + kp);
        if kc > 1e300 {
            kp *= 2f64.powi(-960);
            kc *= 2f64.powi(-960);
            scale += 960.0;
        }
    }
    let (mut h_prev, mut h) = (BigInt::one(), BigInt::from(a0));
    let (mut k_prev, mut k) = (BigInt::zero(), BigInt::one());
    for q in quotients {
        let q = BigInt::from(q);
        let h_next = &q * &h + &h_prev;
        let k_next = &q * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
    }
    if k_max.is_some_and(|km| &k > km) {
        return Ok(None);
    }
    Ok(Some(PellSolution { n, ell: h, k }))
}

/// The functional `π_P(M) = k(M·P)/ℓ` attached to a primitive ample class
/// `P` with non-square `P²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PellBound {
    pub p: LatticeClass,
    pub sol: PellSolution,
    /// The covector `(k/ℓ)·S·P`.
    #[serde(with = "quad::serde_rational_vec")]
    pub form: Vec<Rational>,
    #[serde(skip)]
    sp: Vec<i128>,
    #[serde(skip)]
    ratio: Rational,
}

pub fn make_pell_bound(s: &IntersectionMatrix, h: &LatticeClass, p: &LatticeClass) -> Result<PellBound> {
    let content = p.content();
    if content != 1 {
        return Err(Error::NotPrimitive(content));
    }
    if s.positivity_class(h, p)? != Positivity::Ample {
        return Err(Error::NotAmple);
    }
    let p_sq = s.self_int(p)?;
    let sol = match pell_fundamental(p_sq as u128) {
        Err(Error::PerfectSquare(_)) => return Err(Error::SquareSelfIntersection(p_sq)),
        other => other?,
    };
    Ok(PellBound::from_solution(s, p.clone(), sol))
}

impl PellBound {
    pub(crate) fn from_solution(s: &IntersectionMatrix, p: LatticeClass, sol: PellSolution) -> PellBound {
        let sp = s.covector(p.coords());
        let ratio = Rational::new(sol.k.clone(), sol.ell.clone());
        let form = sp.iter().map(|&c| rat_int(c) * &ratio).collect();
        PellBound { p, sol, form, sp, ratio }
    }

    /// `k/ℓ`.
    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn eval(&self, m: &LatticeClass) -> Result<Rational> {
        if m.rho() != self.sp.len() {
            return Err(Error::DimensionMismatch { expected: self.sp.len(), got: m.rho() });
        }
        Ok(self.eval_coords(m.coords()))
    }

    pub(crate) fn eval_coords(&self, m: &[i64]) -> Rational {
        let dot: i128 = m.iter().zip(&self.sp).map(|(&x, &c)| x as i128 * c).sum();
        rat_int(dot) * &self.ratio
    }

    pub fn eval_rational(&self, m: &[Rational]) -> Rational {
        m.iter().zip(&self.form).fold(Rational::zero(), |acc, (x, f)| acc + x * f)
    }
}

pub fn eval_bound(b: &PellBound, m: &LatticeClass) -> Result<Rational> {
    b.eval(m)
}

/// Whether the two functionals agree; happens exactly when `P = P'`.
pub fn bounds_coincide(b1: &PellBound, b2: &PellBound) -> Result<bool> {
    if b1.form.len() != b2.form.len() {
        return Err(Error::DimensionMismatch { expected: b1.form.len(), got: b2.form.len() });
    }
    Ok(b1.form == b2.form)
}

/// Length of the interval of `t` where `π_P(B₀+tB₁) < √(1−t²)`, in closed
/// form `2ℓ/(ℓ² + k²p₁²)` (equivalently `2ℓ/(p₀²k²+1)`).
pub fn sd_length(b: &PellBound, frame: &HodgeFrame) -> Result<Rational> {
    if frame.rho() != 2 {
        return Err(Error::WrongRho(frame.rho()));
    }
    let p1 = &frame.b_coords(&b.p)[1];
    let ell = rat_int(b.sol.ell.clone());
    let k = rat_int(b.sol.k.clone());
    Ok(rat_int(2) * &ell / (&ell * &ell + &k * &k * p1.square()))
}

/// Endpoints of the open interval of `t` on which `π_P(B₀+tB₁) < √(1−t²)`.
///
/// With `c = k/ℓ` and `p = (p₀, p₁)` the `B`-coordinates of `P`, the endpoints
/// solve `(c²p₁² + 1)t² − 2c²p₀p₁t + c²p₀² − 1 = 0`, whose discriminant is
/// `1/ℓ²` by the Pell identity. They are of the form `q√n` only when `p₀p₁`
/// is rational; otherwise `IrrationalClass` is returned.
pub fn sd_interval(b: &PellBound, frame: &HodgeFrame) -> Result<(QuadValue, QuadValue)> {
    if frame.rho() != 2 {
        return Err(Error::WrongRho(frame.rho()));
    }
    let pb = frame.b_coords(&b.p);
    let c2 = &b.ratio * &b.ratio;
    let cross = (&pb[0] * &pb[1]).scale(&c2);
    let denom = &c2 * pb[1].square() + Rational::one();
    let half = Rational::new(BigInt::one(), b.sol.ell.clone());
    let mid = cross.as_rational().ok_or(Error::IrrationalClass)?;
    let lo = (mid - &half) / &denom;
    let hi = (mid + &half) / &denom;
    Ok((QuadValue::from_rational(lo), QuadValue::from_rational(hi)))
}
