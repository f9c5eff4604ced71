//! Small dense matrices over the rationals (dimension at most four).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::quad::{rat_int, Rational};

pub type RatMatrix = Vec<Vec<Rational>>;

pub fn from_int(m: &[Vec<i64>]) -> RatMatrix {
    m.iter().map(|row| row.iter().map(|&x| rat_int(x)).collect()).collect()
}

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Rational::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn mul_vec(a: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.len();
    let mut m: RatMatrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Symmetric congruence diagonalization over the rationals.
///
/// Returns `(basis, pivots)` where `basis[k]` is the k-th new basis vector in
/// the original coordinates, so `basisᵢᵀ·A·basisⱼ = δᵢⱼ·pivots[i]`. At each
/// step the remaining diagonal entry of largest absolute value is used as
/// pivot (ties broken by lowest index). When every remaining diagonal entry
/// vanishes, the first nonzero off-diagonal pair `(i, j)` is combined into
/// `eᵢ + eⱼ`. Each basis vector is finally rescaled to a primitive integer
/// vector whose first nonzero entry is positive.
pub fn congruence_diagonalize(a: &RatMatrix) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = a.len();
    let mut work = a.clone();
    let mut basis = identity(n); // rows are basis vectors
    for k in 0..n {
        let best = (k..n)
            .filter(|&i| !work[i][i].is_zero())
            .fold(None::<usize>, |acc, i| match acc {
                Some(b) if work[b][b].abs() >= work[i][i].abs() => Some(b),
                _ => Some(i),
            });
        let pivot = match best {
            Some(i) => i,
            None => {
                let pair = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !work[i][j].is_zero());
                let Some((i, j)) = pair else { break };
                // eᵢ ← eᵢ + eⱼ
                let bj = basis[j].clone();
                for (x, y) in basis[i].iter_mut().zip(bj.iter()) {
                    *x += y;
                }
                let rj = work[j].clone();
                for (x, y) in work[i].iter_mut().zip(rj.iter()) {
                    *x += y;
                }
                for row in work.iter_mut() {
                    let v = row[j].clone();
                    row[i] += v;
                }
                i
            }
        };
        work.swap(k, pivot);
        for row in work.iter_mut() {
            row.swap(k, pivot);
        }
        basis.swap(k, pivot);
        let p = work[k][k].clone();
        for j in k + 1..n {
            if work[j][k].is_zero() {
                continue;
            }
            let f = &work[j][k] / &p;
            let bk = basis[k].clone();
            for (x, y) in basis[j].iter_mut().zip(bk.iter()) {
                *x -= &f * y;
            }
            let rk = work[k].clone();
            for (x, y) in work[j].iter_mut().zip(rk.iter()) {
                *x -= &f * y;
            }
            for row in work.iter_mut() {
                let v = row[k].clone();
                row[j] -= &f * v;
            }
        }
    }
    let mut pivots = Vec::with_capacity(n);
    for (i, vec) in basis.iter_mut().enumerate() {
        let scale = primitive_scale(vec);
        for x in vec.iter_mut() {
            *x *= &scale;
        }
        pivots.push(&work[i][i] * &scale * &scale);
    }
    (basis, pivots)
}

/// Positive-or-negative rational `c` such that `c·v` is a primitive integer
/// vector whose first nonzero entry is positive.
fn primitive_scale(v: &[Rational]) -> Rational {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * rat_int(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Rational::one();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    Rational::new(lcm * sign, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rat;

    fn check(s: &[Vec<i64>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let a = from_int(s);
        let (basis, pivots) = congruence_diagonalize(&a);
        let u = transpose(&basis);
        let d = mul(&mul(&transpose(&u), &a), &u);
        for i in 0..s.len() {
            for j in 0..s.len() {
                let expect = if i == j { pivots[i].clone() } else { Rational::zero() };
                assert_eq!(d[i][j], expect, "{s:?}");
            }
        }
        (basis, pivots)
    }

    #[test]
    fn hyperbolic_plane() {
        let (basis, pivots) = check(&[vec![0, 4], vec![4, 0]]);
        assert_eq!(basis[0], vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(basis[1], vec![rat(1, 1), rat(-1, 1)]);
        assert_eq!(pivots, vec![rat(8, 1), rat(-8, 1)]);
    }

    #[test]
    fn various_forms() {
        check(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        check(&[vec![2, 3], vec![3, 0]]);
        check(&[vec![0, 0, 1], vec![0, 0, 2], vec![1, 2, 0]]);
        check(&[vec![-2, 1, 0, 0], vec![1, -2, 1, 0], vec![0, 1, -2, 1], vec![0, 0, 1, 4]]);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = from_int(&[vec![2, 1], vec![1, -2]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mul(&a, &inv), identity(2));
        assert!(inverse(&from_int(&[vec![1, 2], vec![2, 4]])).is_none());
    }
}
