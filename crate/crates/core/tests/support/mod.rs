//! Random instances and independent oracles shared by the property and
//! acceptance suites.

#![allow(dead_code)]

pub mod properties;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use std::collections::HashMap;

use seshadri::pell::pell_fundamental;
use seshadri::quad::{is_square, rat_int};
use seshadri::{Engine, IntersectionMatrix, LatticeClass, Positivity, QuadValue, Rational, Surface};

pub const CASES: u32 = 200;
pub const SEED: [u8; 32] = *b"seshadri-constants-property-seed";

/// Fixed-seed runner: the same 200 cases on every run.
pub fn runner() -> TestRunner {
    let config = Config { cases: CASES, max_global_rejects: 1_000_000, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

/// A hyperbolic even lattice of rank 2 or 3 with `|entries| ≤ 12` and an ample
/// class with small coordinates.
#[derive(Clone, Debug)]
pub struct Instance {
    pub entries: Vec<Vec<i64>>,
    pub l: LatticeClass,
}

impl Instance {
    pub fn surface(&self) -> Surface {
        Surface::from_entries(self.entries.clone()).expect("validated")
    }

    pub fn engine(&self) -> Engine {
        Engine::new(self.surface()).with_verification(false)
    }
}

fn symmetric(rho: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    let diag = proptest::collection::vec(-6i64..=6, rho);
    let off = proptest::collection::vec(-12i64..=12, rho * (rho - 1) / 2);
    (diag, off).prop_map(move |(d, o)| {
        let mut m = vec![vec![0; rho]; rho];
        let mut it = o.into_iter();
        for i in 0..rho {
            m[i][i] = 2 * d[i];
            for j in i + 1..rho {
                let x = it.next().unwrap();
                m[i][j] = x;
                m[j][i] = x;
            }
        }
        m
    })
}

pub fn instance() -> impl Strategy<Value = Instance> {
    prop_oneof![Just(2usize), Just(3usize)]
        .prop_flat_map(|rho| (symmetric(rho), proptest::collection::vec(-3i64..=3, rho)))
        .prop_filter_map("hyperbolic lattice with an ample class", |(entries, coords)| {
            let surface = Surface::from_entries(entries.clone()).ok()?;
            let l = LatticeClass::new(coords);
            (surface.positivity(&l).ok()? == Positivity::Ample).then_some(Instance { entries, l })
        })
}

/// `v ↦ Av` for an integer matrix.
pub fn apply(a: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `UᵀSU`.
pub fn congruent(s: &[Vec<i64>], u: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = s.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| u[a][i] * s[a][b] * u[b][j]).sum()).collect())
        .collect()
}

/// An integer matrix and its integer inverse.
pub type Unimodular = (Vec<Vec<i64>>, Vec<Vec<i64>>);

/// A unimodular matrix and its inverse: a permutation followed by a few
/// elementary row operations `row_i += c·row_j`.
pub fn unimodular(rho: usize) -> impl Strategy<Value = Unimodular> {
    let perm = Just((0..rho).collect::<Vec<_>>()).prop_shuffle();
    let ops = proptest::collection::vec((0..rho, 0..rho, -1i64..=1), 0..3);
    (perm, ops).prop_map(move |(perm, ops)| {
        let mut u: Vec<Vec<i64>> = (0..rho).map(|i| (0..rho).map(|j| i64::from(perm[i] == j)).collect()).collect();
        let mut inv: Vec<Vec<i64>> = (0..rho).map(|i| (0..rho).map(|j| i64::from(perm[j] == i)).collect()).collect();
        for (i, j, c) in ops.into_iter().filter(|(i, j, _)| i != j) {
            // u ← E·u with E = I + c·e_{ij}; inv ← inv·E⁻¹.
            let row = u[j].clone();
            u[i].iter_mut().zip(&row).for_each(|(x, y)| *x += c * y);
            for r in inv.iter_mut() {
                r[j] -= c * r[i];
            }
        }
        (u, inv)
    })
}

/// Independent upper bound: the minimum of `√L²`, every elliptic degree and
/// every Pell bound `k(L·P)/ℓ` over primitive classes in a cube.
pub fn truncated_minimum(s: &IntersectionMatrix, l: &LatticeClass, radius: i64) -> QuadValue {
    let rho = s.rho();
    let h = s.reference_ample();
    let l2 = s.self_int(l).unwrap();
    let mut best = QuadValue::sqrt_of_int(l2);
    let mut pell: HashMap<i128, (BigInt, BigInt)> = HashMap::new();
    let mut v = vec![-radius; rho];
    loop {
        let p = LatticeClass::new(v.clone());
        if p.is_primitive() {
            let p2 = s.self_int(&p).unwrap();
            let lp = s.pair(l, &p).unwrap();
            let hp = s.pair(&h, &p).unwrap();
            if p2 == 0 && hp > 0 && lp >= 0 {
                best = best.min(QuadValue::from_int(lp));
            } else if p2 > 0 && hp > 0 && !is_square(&BigInt::from(p2)) {
                let (ell, k) = pell.entry(p2).or_insert_with(|| {
                    let sol = pell_fundamental(p2 as u128).unwrap();
                    (sol.ell, sol.k)
                });
                let bound = rat_int(&*k * lp) / rat_int(ell.clone());
                best = best.min(QuadValue::from_rational(bound));
            }
        }
        let Some(i) = (0..rho).find(|&i| v[i] < radius) else { break };
        v[i] += 1;
        v[..i].iter_mut().for_each(|x| *x = -radius);
    }
    best
}

/// `N_{α,β} = (β²−αβ)F₁ + (α²−αβ)F₂ + αβΔ` on `E×E` in the basis
/// `(F₁, F₂, Δ)`.
pub fn n_alpha_beta(a: i64, b: i64) -> LatticeClass {
    LatticeClass::new(vec![b * b - a * b, a * a - a * b, a * b])
}

/// Smallest `k ≤ limit` with `N·k² + 1` a square, by exhaustive scan.
pub fn pell_scan(n: u64, limit: u64) -> Option<(u128, u128)> {
    let n = u128::from(n);
    let mut l: u128 = 1;
    (1..=u128::from(limit)).find_map(|k| {
        let t = n * k * k + 1;
        while l * l < t {
            l += 1;
        }
        (l * l == t).then_some((l, k))
    })
}

/// Fundamental Pell solution by the chakravala method, independent of
/// continued fractions.
pub fn pell_chakravala(n: i128) -> (i128, i128) {
    let root = (n as f64).sqrt() as i128;
    let (mut a, mut b): (i128, i128) = if (root + 1) * (root + 1) - n < n - root * root { (root + 1, 1) } else { (root, 1) };
    let mut k = a * a - n;
    while k != 1 {
        let m_abs = k.abs();
        // b·m ≡ −a (mod |k|), m > 0, |m² − N| minimal.
        let inv = (1..=m_abs).find(|x| (b.rem_euclid(m_abs) * x) % m_abs == 1 % m_abs).unwrap_or(1);
        let r = (-a * inv).rem_euclid(m_abs);
        let base = r + ((root - r).max(0) / m_abs) * m_abs;
        let m = [base, base + m_abs]
            .into_iter()
            .filter(|&m| m > 0)
            .min_by_key(|&m| (m * m - n).abs())
            .unwrap();
        let (a2, b2) = ((a * m + n * b) / m_abs, (a + b * m) / m_abs);
        k = (m * m - n) / k;
        a = a2.abs();
        b = b2.abs();
    }
    (a, b)
}

pub fn value_squared(v: &QuadValue) -> Rational {
    v.square()
}

pub fn nonneg(r: &Rational) -> bool {
    !r.is_negative() || r.is_zero()
}
