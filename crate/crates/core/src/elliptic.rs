//! Elliptic curve classes: primitive forward classes with `E² = 0`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LatticeBox;
use crate::lattice::{LatticeClass, Positivity};
use crate::par;
use crate::quad::{QuadValue, Rational};
use crate::surface::Surface;

/// Above this many sub-box cells the enumeration is refused.
const MAX_CELLS: u128 = 4_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EllipticClass(pub LatticeClass);

/// Minimal degree `L·E` together with every class attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllipticMin {
    pub value: i128,
    pub minimizers: Vec<EllipticClass>,
}

fn isqrt_i128(x: i128) -> Option<i128> {
    if x < 0 {
        return None;
    }
    let r = (x as u128).isqrt() as i128;
    (r * r == x).then_some(r)
}

/// Integer roots of `a·x² + b·x + c` inside `[-m, m]`; `None` means every
/// `x` is a root.
fn integer_roots(a: i128, b: i128, c: i128, m: i64) -> Option<Vec<i64>> {
    let m = m as i128;
    let mut out = Vec::new();
    let mut push = |num: i128, den: i128| {
        if den != 0 && num % den == 0 {
            let x = num / den;
            if x.abs() <= m && !out.contains(&(x as i64)) {
                out.push(x as i64);
            }
        }
    };
    if a == 0 {
        if b == 0 {
            return if c == 0 { None } else { Some(Vec::new()) };
        }
        push(-c, b);
    } else if let Some(r) = b.checked_mul(b).and_then(|bb| bb.checked_sub(4 * a * c)).and_then(isqrt_i128) {
        push(-b + r, 2 * a);
        push(-b - r, 2 * a);
    }
    Some(out)
}

/// All primitive elliptic classes in the cube, sorted lexicographically.
///
/// One coordinate is solved for: the form restricted to the line through a
/// point of the remaining `ρ-1` coordinates is a quadratic in it.
pub fn enumerate_elliptic(surface: &Surface, cube: LatticeBox) -> Result<Vec<EllipticClass>> {
    let s = surface.matrix().entries();
    let rho = surface.rho();
    let m = i64::try_from(cube.radius).map_err(|_| Error::SearchTooLarge(format!("box radius {}", cube.radius)))?;
    let cells = (2 * m as u128 + 1).checked_pow(rho as u32 - 1).unwrap_or(u128::MAX);
    if cells > MAX_CELLS {
        return Err(Error::SearchTooLarge(format!("elliptic box of radius {m} in rank {rho}")));
    }
    let j = (0..rho).find(|&i| s[i][i] != 0).unwrap_or(rho - 1);
    let others: Vec<usize> = (0..rho).filter(|&i| i != j).collect();
    let first = others[0];
    let rest = &others[1..];
    let mut found = par::flat_map_range(surface.exec(), -m, m, |x0| {
        let mut v = vec![0i64; rho];
        v[first] = x0;
        let mut hits = Vec::new();
        let mut odometer = vec![-m; rest.len()];
        loop {
            for (&i, &x) in rest.iter().zip(&odometer) {
                v[i] = x;
            }
            v[j] = 0;
            let a = s[j][j] as i128;
            let b: i128 = others.iter().map(|&i| 2 * s[i][j] as i128 * v[i] as i128).sum();
            let c = surface.dot(&v, &v);
            let roots = integer_roots(a, b, c, m).unwrap_or_else(|| (-m..=m).collect());
            for x in roots {
                v[j] = x;
                let cls = LatticeClass(v.clone());
                if cls.is_primitive() && surface.dot(&v, surface.h().coords()) > 0 {
                    hits.push(EllipticClass(cls));
                }
            }
            let Some(pos) = odometer.iter().rposition(|&x| x < m) else { break };
            odometer[pos] += 1;
            odometer[pos + 1..].iter_mut().for_each(|x| *x = -m);
        }
        hits
    });
    found.sort();
    found.dedup();
    Ok(found)
}

/// Elliptic classes `E` with `L·E ≤ cap` (or `< cap` when `strict`), sorted
/// by degree and then by class.
pub(crate) fn elliptic_up_to(surface: &Surface, l: &LatticeClass, cap: &QuadValue, strict: bool) -> Result<Vec<(i128, EllipticClass)>> {
    let cube = surface.frame().elliptic_box_radius(surface.matrix(), l, cap)?;
    let mut out: Vec<(i128, EllipticClass)> = enumerate_elliptic(surface, cube)?
        .into_iter()
        .map(|e| (surface.dot(l.coords(), e.0.coords()), e))
        .filter(|(d, _)| {
            let d = QuadValue::from_int(*d);
            if strict {
                &d < cap
            } else {
                &d <= cap
            }
        })
        .collect();
    out.sort();
    Ok(out)
}

fn minimum(list: Vec<(i128, EllipticClass)>) -> Option<EllipticMin> {
    let value = list.first()?.0;
    let minimizers = list.into_iter().take_while(|(d, _)| *d == value).map(|(_, e)| e).collect();
    Some(EllipticMin { value, minimizers })
}

fn require_ample(surface: &Surface, l: &LatticeClass) -> Result<()> {
    match surface.positivity(l)? {
        Positivity::Ample => Ok(()),
        _ => Err(Error::NotAmple),
    }
}

/// Minimal degree over elliptic classes with `L·E < √(L²)`; `None` certifies
/// that no elliptic curve is submaximal for `L`.
pub fn eps_elliptic_submaximal(surface: &Surface, l: &LatticeClass) -> Result<Option<EllipticMin>> {
    require_ample(surface, l)?;
    let cap = QuadValue::sqrt_of_int(surface.matrix().self_int(l)?);
    Ok(minimum(elliptic_up_to(surface, l, &cap, true)?))
}

/// Minimal degree over elliptic classes with `L·E ≤ cap`.
pub fn eps_elliptic_capped(surface: &Surface, l: &LatticeClass, cap: &Rational) -> Result<Option<EllipticMin>> {
    require_ample(surface, l)?;
    if !cap.is_positive() {
        return Err(Error::CapNotPositive);
    }
    Ok(minimum(elliptic_up_to(surface, l, &QuadValue::from_rational(cap.clone()), false)?))
}
