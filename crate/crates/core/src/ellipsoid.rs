//! Candidate generation for integer points in `{v : vᵀGv ≤ r²} ∩ [-m, m]^ρ`,
//! `G` positive definite and rational (Fincke–Pohst).
//!
//! The completed-square decomposition is computed exactly and the traversal
//! runs in floating point with every coordinate range widened by a margin
//! far above the rounding error. The result is therefore a superset of the
//! lattice points of the ellipsoid; callers apply their own exact test.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::linalg::{self, RatMatrix};
use crate::par::{self, ExecMode};
use crate::quad::{self, rational_to_f64, Rational};

/// Relative slack added to every range.
const SLACK: f64 = 1e-9;

/// `G` in completed-square form `Σᵢ qᵢ(vᵢ + Σ_{j>i} μᵢⱼvⱼ)²`.
#[derive(Clone, Debug)]
pub(crate) struct Ellipsoid {
    q: Vec<f64>,
    mu: Vec<Vec<f64>>,
    r2: f64,
}

impl Ellipsoid {
    /// `None` when `G` is not positive definite.
    pub fn new(g: &RatMatrix, r2: &Rational) -> Option<Ellipsoid> {
        let n = g.len();
        let mut a = g.clone();
        let mut q = vec![Rational::zero(); n];
        let mut mu = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            if !a[i][i].is_positive() {
                return None;
            }
            q[i] = a[i][i].clone();
            for j in i + 1..n {
                mu[i][j] = &a[i][j] / &q[i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let delta = &mu[i][k] * &q[i] * &mu[i][l];
                    a[k][l] -= &delta;
                    if l != k {
                        a[l][k] = a[k][l].clone();
                    }
                }
            }
        }
        Some(Ellipsoid {
            q: q.iter().map(rational_to_f64).collect(),
            mu: mu.iter().map(|row| row.iter().map(rational_to_f64).collect()).collect(),
            r2: rational_to_f64(r2),
        })
    }

    /// `max |vⱼ|` over the real ellipsoid, rounded up: `⌈√(r²·(G⁻¹)ⱼⱼ)⌉`.
    pub fn extent(g: &RatMatrix, r2: &Rational) -> Option<BigInt> {
        let inv = linalg::inverse(g)?;
        let den = BigInt::from(1u64 << 20);
        (0..g.len())
            .map(|j| quad::ceil_int(&quad::sqrt_upper(&(r2 * &inv[j][j]), &den)))
            .max()
    }

    /// Widened integer range of coordinate `i` given `v[i+1..]`.
    fn range(&self, i: usize, v: &[i64], budget: f64, m: i64) -> (f64, i64, i64) {
        let terms = (i + 1..v.len()).map(|j| self.mu[i][j] * v[j] as f64);
        let (sum, mag) = terms.fold((0.0, 0.0), |(s, a), t| (s + t, a + t.abs()));
        let center = -sum;
        let rad = (budget.max(0.0) / self.q[i]).sqrt();
        let slack = SLACK * (mag + rad + self.r2.sqrt() + 1.0);
        let lo = (center - rad - slack).ceil().max(-m as f64) as i64;
        let hi = (center + rad + slack).floor().min(m as f64) as i64;
        (center, lo, hi)
    }

    fn descend<T, F>(&self, i: usize, v: &mut Vec<i64>, budget: f64, m: i64, visit: &F, out: &mut Vec<T>)
    where
        F: Fn(&[i64]) -> Option<T>,
    {
        let (center, lo, hi) = self.range(i, v, budget, m);
        for x in lo..=hi {
            v[i] = x;
            if i == 0 {
                out.extend(visit(v));
            } else {
                let dx = x as f64 - center;
                self.descend(i - 1, v, budget - self.q[i] * dx * dx, m, visit, out);
            }
        }
        v[i] = 0;
    }

    /// Applies `visit` to a superset of the lattice points of the ellipsoid
    /// inside the cube and collects the `Some` results, in a deterministic
    /// order.
    pub fn points<T, F>(&self, mode: ExecMode, m: i64, visit: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[i64]) -> Option<T> + Sync + Send,
    {
        let n = self.q.len();
        let top = n - 1;
        let zeros = vec![0i64; n];
        let (center, lo, hi) = self.range(top, &zeros, self.r2, m);
        par::flat_map_range(mode, lo, hi, |x| {
            let mut out = Vec::new();
            let mut v = zeros.clone();
            v[top] = x;
            if top == 0 {
                out.extend(visit(&v));
            } else {
                let dx = x as f64 - center;
                self.descend(top - 1, &mut v, self.r2 - self.q[top] * dx * dx, m, &visit, &mut out);
            }
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{rat, rat_int};
    use num_traits::ToPrimitive;

    fn brute(g: &RatMatrix, r2: &Rational, m: i64) -> Vec<Vec<i64>> {
        let n = g.len();
        let mut out = Vec::new();
        let mut v = vec![-m; n];
        loop {
            let rv: Vec<Rational> = v.iter().map(|&x| rat_int(x)).collect();
            let val = rv.iter().zip(linalg::mul_vec(g, &rv)).fold(Rational::zero(), |a, (x, y)| a + x * y);
            if &val <= r2 {
                out.push(v.clone());
            }
            let Some(p) = v.iter().rposition(|&x| x < m) else { break };
            v[p] += 1;
            v[p + 1..].iter_mut().for_each(|x| *x = -m);
        }
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force() {
        let forms = [
            linalg::from_int(&[vec![3, 1], vec![1, 2]]),
            vec![vec![rat(7, 3), rat(-1, 2), rat(0, 1)], vec![rat(-1, 2), rat(5, 4), rat(1, 3)], vec![rat(0, 1), rat(1, 3), rat(1, 1)]],
            linalg::from_int(&[vec![2, 1, 0, 0], vec![1, 2, 1, 0], vec![0, 1, 2, 1], vec![0, 0, 1, 2]]),
        ];
        for g in &forms {
            for (r2, m) in [(rat(9, 1), 4), (rat(25, 2), 2), (rat(1, 3), 3)] {
                let e = Ellipsoid::new(g, &r2).unwrap();
                let exact = brute(g, &r2, m);
                for mode in [ExecMode::Sequential, ExecMode::Parallel] {
                    let got = e.points(mode, m, |v| Some(v.to_vec()));
                    assert!(exact.iter().all(|p| got.contains(p)));
                    assert!(got.len() <= 3 * exact.len() + 9);
                }
                let ext = Ellipsoid::extent(g, &r2).unwrap().to_i64().unwrap();
                assert!(brute(g, &r2, ext + 2).iter().all(|v| v.iter().all(|x| x.abs() <= ext)));
            }
        }
        assert!(Ellipsoid::new(&linalg::from_int(&[vec![1, 2], vec![2, 1]]), &rat(1, 1)).is_none());
    }
}
