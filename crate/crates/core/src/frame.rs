//! Standardized real basis `B₀,…,B_{ρ-1}` with Gram matrix `diag(1,-1,…,-1)`.
//!
//! The frame keeps a rational base change `U` with `UᵀSU = diag(d₀,-d₁,…)` and
//! carries the scalings `√dᵢ` symbolically: `Bᵢ = U·eᵢ/√dᵢ`, so the
//! `B`-coordinates of a class `v` are `bᵢ(v) = √dᵢ·(U⁻¹v)ᵢ`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{IntersectionMatrix, LatticeClass};
use crate::linalg::{self, RatMatrix};
use crate::quad::{self, rat_int, QuadValue, Rational};

/// Denominator used for one-sided rational bounds of square roots.
pub(crate) fn bound_den() -> BigInt {
    BigInt::from(1u64 << 24)
}

/// The cube `[-m, m]^ρ` in lattice coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LatticeBox {
    pub radius: u64,
}

impl LatticeBox {
    pub fn new(radius: u64) -> Self {
        LatticeBox { radius: radius.max(1) }
    }

    pub fn contains(&self, v: &LatticeClass) -> bool {
        v.coords().iter().all(|c| c.unsigned_abs() <= self.radius)
    }

    pub(crate) fn from_bound(m: &BigInt) -> Self {
        LatticeBox::new(m.to_u64().unwrap_or(u64::MAX))
    }
}

#[derive(Clone, Debug)]
pub struct HodgeFrame {
    /// `columns[i] = U·eᵢ`, a primitive integer vector.
    columns: Vec<Vec<i64>>,
    u: RatMatrix,
    u_inv: RatMatrix,
    d: Vec<Rational>,
    sqrt_d: Vec<QuadValue>,
    inv_sqrt_d_upper: Vec<Rational>,
}

impl HodgeFrame {
    /// Lagrange diagonalization of `S`, oriented so that `h` has `b₀ > 0`.
    pub fn diagonalize(s: &IntersectionMatrix, h: &LatticeClass) -> HodgeFrame {
        let (basis, pivots) = linalg::congruence_diagonalize(&s.to_rational());
        let pos = pivots.iter().position(|p| p.is_positive()).expect("signature (1, rho-1)");
        let mut order = vec![pos];
        order.extend((0..pivots.len()).filter(|&i| i != pos));
        let mut columns: Vec<Vec<i64>> = order
            .iter()
            .map(|&i| basis[i].iter().map(|x| x.to_integer().to_i64().expect("small basis vector")).collect())
            .collect();
        let mut d: Vec<Rational> = order.iter().map(|&i| pivots[i].abs()).collect();
        let mut frame = Self::assemble(std::mem::take(&mut columns), std::mem::take(&mut d));
        if frame.y(h)[0].is_negative() {
            let mut cols = frame.columns.clone();
            for x in cols[0].iter_mut() {
                *x = -*x;
            }
            frame = Self::assemble(cols, frame.d.clone());
        }
        frame
    }

    fn assemble(columns: Vec<Vec<i64>>, d: Vec<Rational>) -> HodgeFrame {
        let u = linalg::transpose(&linalg::from_int(&columns));
        let u_inv = linalg::inverse(&u).expect("frame is invertible");
        let sqrt_d = d.iter().map(QuadValue::sqrt_of).collect();
        let den = bound_den();
        let inv_sqrt_d_upper = d.iter().map(|x| quad::sqrt_upper(&x.recip(), &den)).collect();
        HodgeFrame { columns, u, u_inv, d, sqrt_d, inv_sqrt_d_upper }
    }

    pub fn rho(&self) -> usize {
        self.d.len()
    }

    /// `U·eᵢ` in lattice coordinates.
    pub fn column(&self, i: usize) -> &[i64] {
        &self.columns[i]
    }

    pub fn u(&self) -> &RatMatrix {
        &self.u
    }

    /// Positive scalings with `UᵀSU = diag(d₀, -d₁, …)`.
    pub fn d(&self) -> &[Rational] {
        &self.d
    }

    pub fn sqrt_d(&self, i: usize) -> &QuadValue {
        &self.sqrt_d[i]
    }

    /// `U⁻¹·v`.
    pub fn y(&self, v: &LatticeClass) -> Vec<Rational> {
        linalg::mul_vec(&self.u_inv, &v.to_rational())
    }

    pub fn y_rational(&self, v: &[Rational]) -> Vec<Rational> {
        linalg::mul_vec(&self.u_inv, v)
    }

    /// `v²` recomputed from frame coordinates: `d₀y₀² − Σ dᵢyᵢ²`.
    pub fn square_from_y(&self, y: &[Rational]) -> Rational {
        y.iter()
            .zip(&self.d)
            .enumerate()
            .fold(Rational::zero(), |acc, (i, (yi, di))| {
                let t = di * yi * yi;
                if i == 0 {
                    acc + t
                } else {
                    acc - t
                }
            })
    }

    /// Exact `B`-coordinates `(b₀, …, b_{ρ-1})` with no orientation check.
    pub fn b_coords(&self, v: &LatticeClass) -> Vec<QuadValue> {
        self.y(v).iter().enumerate().map(|(i, yi)| self.sqrt_d[i].scale(yi)).collect()
    }

    /// `B`-coordinates `a₀,…` of a class in the closed forward half-space;
    /// the cross-section representative is `(1, a₁/a₀, …)`.
    pub fn cross_section_coords(&self, v: &LatticeClass) -> Result<Vec<QuadValue>> {
        let y = self.y(v);
        if y[0].is_negative() {
            return Err(Error::NotForward);
        }
        Ok(y.iter().enumerate().map(|(i, yi)| self.sqrt_d[i].scale(yi)).collect())
    }

    /// Radius `m` (ceiling of the real bound) such that every lattice class with `0 ≤ b₀ ≤ bound` and
    /// `|bᵢ| ≤ bound` lies in `[-m, m]^ρ`. Uses `|vⱼ| ≤ Σᵢ |Uⱼᵢ|·bound/√dᵢ`
    /// with upper rational bounds for `1/√dᵢ`.
    pub(crate) fn box_for_b_bound(&self, bound: &Rational) -> LatticeBox {
        let rho = self.rho();
        let mut best = Rational::zero();
        for j in 0..rho {
            let row = (0..rho).fold(Rational::zero(), |acc, i| {
                acc + rat_int(self.columns[i][j].abs()) * &self.inv_sqrt_d_upper[i]
            });
            if row > best {
                best = row;
            }
        }
        LatticeBox::from_bound(&quad::ceil_int(&(best * bound)))
    }

    /// Box containing every elliptic class `E` (`E² = 0`, forward) with
    /// `L·E ≤ cap`. Such an `E` has `b₀(E) ≤ cap/(a₀ − |a'|)` where `a₀` and
    /// `a'` are the `B`-coordinates of `L`; the denominator is rewritten as
    /// `L²/(a₀ + |a'|)` so only upper bounds of square roots are needed.
    pub fn elliptic_box_radius(&self, s: &IntersectionMatrix, l: &LatticeClass, cap: &QuadValue) -> Result<LatticeBox> {
        if !cap.is_positive() {
            return Err(Error::CapNotPositive);
        }
        let l_sq = s.self_int(l)?;
        let y = self.y(l);
        if l_sq <= 0 || !y[0].is_positive() {
            return Err(Error::DenominatorNonPositive);
        }
        let den = bound_den();
        let a0_up = self.sqrt_d[0].scale(&y[0]).upper_rational(&den);
        let rest: Rational = (1..self.rho()).fold(Rational::zero(), |acc, i| acc + &self.d[i] * &y[i] * &y[i]);
        let rest_up = quad::sqrt_upper(&rest, &den);
        let bound = cap.upper_rational(&den) * (a0_up + rest_up) / rat_int(BigInt::from(l_sq));
        Ok(self.box_for_b_bound(&bound))
    }

    /// Box containing every lattice class with `0 ≤ b₀ ≤ p0_bound` and
    /// `|bᵢ| ≤ p0_bound`.
    pub fn pell_box_radius(&self, p0_bound: &Rational) -> Result<LatticeBox> {
        if !p0_bound.is_positive() {
            return Err(Error::BoundNotPositive);
        }
        Ok(self.box_for_b_bound(p0_bound))
    }
}
