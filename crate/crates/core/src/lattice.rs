//! The Néron–Severi lattice: intersection form, positivity and isometries.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};
use crate::quad::{gcd_i64, Rational};

/// Integer coordinate vector in the Néron–Severi basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeClass(pub Vec<i64>);

impl LatticeClass {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeClass(coords)
    }

    pub fn zero(rho: usize) -> Self {
        LatticeClass(vec![0; rho])
    }

    pub fn unit(rho: usize, i: usize) -> Self {
        let mut v = vec![0; rho];
        v[i] = 1;
        LatticeClass(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rho(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0, |g, &c| gcd_i64(g, c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn scaled(&self, g: i64) -> Self {
        LatticeClass(self.0.iter().map(|&c| c * g).collect())
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1)
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.0.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect()
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `v / gcd(v)` together with the gcd.
pub fn primitive_part(v: &LatticeClass) -> Result<(LatticeClass, i64)> {
    let g = v.content();
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    Ok((LatticeClass(v.0.iter().map(|&c| c / g).collect()), g))
}

/// Clears denominators of a rational vector: returns the primitive integer
/// class on the same ray and the positive rational `r` with `v = r·class`.
pub fn primitive_from_rational(v: &[Rational]) -> Result<(LatticeClass, Rational)> {
    use num_integer::Integer;
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    let coords = ints
        .iter()
        .map(|x| {
            i64::try_from(x / &g).map_err(|_| Error::SearchTooLarge("class coordinates exceed 64 bits".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((LatticeClass(coords), Rational::new(g, lcm)))
}

/// Signature data of a validated form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormProfile {
    pub signature: (usize, usize),
    #[serde(with = "crate::quad::serde_rational_vec")]
    pub pivots: Vec<Rational>,
    pub even_diagonal: bool,
}

/// Checks symmetry and signature `(1, ρ-1)` by exact congruence
/// diagonalization. Odd diagonal entries are reported, not rejected.
pub fn validate_matrix(entries: &[Vec<i64>]) -> Result<FormProfile> {
    let rho = entries.len();
    if !(2..=4).contains(&rho) || entries.iter().any(|row| row.len() != rho) {
        return Err(Error::BadShape(format!("{rho} rows with lengths {:?}", entries.iter().map(Vec::len).collect::<Vec<_>>())));
    }
    for i in 0..rho {
        for j in 0..i {
            if entries[i][j] != entries[j][i] {
                return Err(Error::NotSymmetric);
            }
        }
    }
    if entries.iter().flatten().any(|x| x.unsigned_abs() > 1 << 30) {
        return Err(Error::BadShape("entries exceed 2^30 in absolute value".into()));
    }
    let (_, pivots) = linalg::congruence_diagonalize(&linalg::from_int(entries));
    let positive = pivots.iter().filter(|p| p.is_positive()).count();
    let negative = pivots.iter().filter(|p| p.is_negative()).count();
    let zero = rho - positive - negative;
    if positive != 1 || negative != rho - 1 {
        return Err(Error::WrongSignature { positive, negative, zero });
    }
    let even_diagonal = (0..rho).all(|i| entries[i][i] % 2 == 0);
    Ok(FormProfile { signature: (positive, negative), pivots, even_diagonal })
}

/// Symmetric integer matrix of signature `(1, ρ-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionMatrix {
    entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        validate_matrix(&entries)?;
        Ok(IntersectionMatrix { entries })
    }

    /// Parses `{"matrix": [[...], ...]}` or a bare `[[...], ...]` array.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Input {
            Wrapped { matrix: Vec<Vec<i64>> },
            Bare(Vec<Vec<i64>>),
        }
        let input: Input = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let entries = match input {
            Input::Wrapped { matrix } => matrix,
            Input::Bare(m) => m,
        };
        Self::new(entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "matrix": self.entries }).to_string()
    }

    pub fn rho(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn profile(&self) -> FormProfile {
        validate_matrix(&self.entries).expect("validated on construction")
    }

    pub fn to_rational(&self) -> RatMatrix {
        linalg::from_int(&self.entries)
    }

    pub fn determinant(&self) -> Rational {
        self.profile().pivots.iter().fold(Rational::one(), |acc, p| acc * p)
    }

    fn check_dim(&self, v: &LatticeClass) -> Result<()> {
        if v.rho() != self.rho() {
            return Err(Error::DimensionMismatch { expected: self.rho(), got: v.rho() });
        }
        Ok(())
    }

    /// `vᵀ·S·w`.
    pub fn pair(&self, v: &LatticeClass, w: &LatticeClass) -> Result<i128> {
        self.check_dim(v)?;
        self.check_dim(w)?;
        Ok(self.dot(v.coords(), w.coords()))
    }

    pub fn self_int(&self, v: &LatticeClass) -> Result<i128> {
        self.pair(v, v)
    }

    pub(crate) fn dot(&self, v: &[i64], w: &[i64]) -> i128 {
        let mut acc = 0i128;
        for (i, row) in self.entries.iter().enumerate() {
            if v[i] == 0 {
                continue;
            }
            let mut inner = 0i128;
            for (j, &s) in row.iter().enumerate() {
                inner += s as i128 * w[j] as i128;
            }
            acc += v[i] as i128 * inner;
        }
        acc
    }

    /// The covector `S·v`.
    pub(crate) fn covector(&self, v: &[i64]) -> Vec<i128> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).map(|(&s, &x)| s as i128 * x as i128).sum())
            .collect()
    }

    /// First class with positive self-intersection found by scanning boxes of
    /// radius 1, 2, … . Inside a box the coordinates run lexicographically over
    /// the value order `0, 1, -1, 2, -2, …`.
    pub fn reference_ample(&self) -> LatticeClass {
        let rho = self.rho();
        for radius in 1i64.. {
            let values: Vec<i64> = std::iter::once(0).chain((1..=radius).flat_map(|k| [k, -k])).collect();
            let mut idx = vec![0usize; rho];
            loop {
                let v: Vec<i64> = idx.iter().map(|&i| values[i]).collect();
                if v.iter().any(|c| c.abs() == radius) && self.dot(&v, &v) > 0 {
                    return LatticeClass(v);
                }
                let mut pos = rho;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < values.len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
        }
        unreachable!("a form of signature (1, rho-1) has a positive vector")
    }

    /// Ample, nef-boundary or not nef, relative to the forward cone of `h`.
    pub fn positivity_class(&self, h: &LatticeClass, v: &LatticeClass) -> Result<Positivity> {
        let sq = self.self_int(v)?;
        let dh = self.pair(v, h)?;
        Ok(if v.is_zero() {
            Positivity::NefBoundary
        } else if sq > 0 && dh > 0 {
            Positivity::Ample
        } else if sq == 0 && dh > 0 {
            Positivity::NefBoundary
        } else {
            Positivity::NotNef
        })
    }

    /// Validates an integer matrix `ψ` (acting on column vectors) as a
    /// forward-cone preserving isometry.
    pub fn check_isometry(&self, h: &LatticeClass, psi: Vec<Vec<i64>>) -> Result<IsometryMap> {
        let rho = self.rho();
        if psi.len() != rho || psi.iter().any(|r| r.len() != rho) {
            return Err(Error::DimensionMismatch { expected: rho, got: psi.len() });
        }
        let map = IsometryMap { matrix: psi };
        for i in 0..rho {
            for j in 0..rho {
                let ci = map.column(i);
                let cj = map.column(j);
                if self.dot(&ci, &cj) != self.entries[i][j] as i128 {
                    return Err(Error::NotIsometry);
                }
            }
        }
        let image = map.apply(h);
        if self.dot(image.coords(), h.coords()) <= 0 {
            return Err(Error::ReversesCone);
        }
        Ok(map)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    Ample,
    NefBoundary,
    NotNef,
}

/// Integer isometry of the lattice preserving the forward cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryMap {
    matrix: Vec<Vec<i64>>,
}

impl IsometryMap {
    pub fn identity(rho: usize) -> Self {
        IsometryMap {
            matrix: (0..rho).map(|i| (0..rho).map(|j| i64::from(i == j)).collect()).collect(),
        }
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    fn column(&self, j: usize) -> Vec<i64> {
        self.matrix.iter().map(|row| row[j]).collect()
    }

    pub fn apply(&self, v: &LatticeClass) -> LatticeClass {
        LatticeClass(
            self.matrix.iter().map(|row| row.iter().zip(v.coords()).map(|(a, b)| a * b).sum()).collect(),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &IsometryMap) -> IsometryMap {
        let n = self.matrix.len();
        IsometryMap {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum()).collect())
                .collect(),
        }
    }

    /// Inverse map; integral because an isometry of a nondegenerate lattice
    /// has determinant ±1.
    pub fn inverse(&self) -> IsometryMap {
        let inv = linalg::inverse(&linalg::from_int(&self.matrix)).expect("isometries are invertible");
        IsometryMap {
            matrix: inv
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|x| {
                            assert!(x.is_integer(), "isometry inverse is not integral");
                            i64::try_from(x.to_integer()).expect("entry fits in i64")
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[&[i64]]) -> IntersectionMatrix {
        IntersectionMatrix::new(e.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn c(v: &[i64]) -> LatticeClass {
        LatticeClass(v.to_vec())
    }

    #[test]
    fn validate_examples() {
        let p = validate_matrix(&[vec![0, 4], vec![4, 0]]).unwrap();
        assert_eq!(p.signature, (1, 1));
        assert!(p.even_diagonal);
        assert_eq!(
            validate_matrix(&[vec![2, 0], vec![0, 2]]),
            Err(Error::WrongSignature { positive: 2, negative: 0, zero: 0 })
        );
        let p = validate_matrix(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(p.signature, (1, 2));
        assert_eq!(validate_matrix(&[vec![0, 1], vec![2, 0]]), Err(Error::NotSymmetric));
        assert!(matches!(validate_matrix(&[vec![1, 1], vec![1, 1]]), Err(Error::WrongSignature { zero: 1, .. })));
        assert!(!validate_matrix(&[vec![1, 0], vec![0, -1]]).unwrap().even_diagonal);
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(m(&[&[0, 4], &[4, 0]]).pair(&c(&[1, 1]), &c(&[1, 1])).unwrap(), 8);
        let exe = m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert_eq!(exe.pair(&c(&[1, 1, 1]), &c(&[1, 0, 0])).unwrap(), 2);
        assert_eq!(m(&[&[0, 8], &[8, 0]]).self_int(&c(&[1, 1])).unwrap(), 16);
        assert_eq!(exe.pair(&c(&[1, 1]), &c(&[1, 0, 0])), Err(Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive_part(&c(&[2, 4])).unwrap(), (c(&[1, 2]), 2));
        assert_eq!(primitive_part(&c(&[1, 1])).unwrap(), (c(&[1, 1]), 1));
        assert_eq!(primitive_part(&c(&[-3, 6, 9])).unwrap(), (c(&[-1, 2, 3]), 3));
        assert_eq!(primitive_part(&c(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn reference_ample_scan() {
        // Radius-1 order: (0,0) (0,1) (0,-1) (1,0) (1,1): the first positive is (1,1).
        assert_eq!(m(&[&[0, 4], &[4, 0]]).reference_ample(), c(&[1, 1]));
        assert_eq!(m(&[&[2, 1], &[1, -2]]).reference_ample(), c(&[1, 0]));
        // (0,0,1) and (0,1,0) are isotropic, (0,1,1) has square 2.
        assert_eq!(m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]).reference_ample(), c(&[0, 1, 1]));
        // Every radius-1 vector is non-positive here.
        let s = m(&[&[-3, 2], &[2, -1]]);
        assert_eq!(s.reference_ample(), c(&[1, 2]));
    }

    #[test]
    fn positivity_examples() {
        let s = m(&[&[0, 4], &[4, 0]]);
        let h = c(&[1, 1]);
        assert_eq!(s.positivity_class(&h, &c(&[1, 0])).unwrap(), Positivity::NefBoundary);
        assert_eq!(s.positivity_class(&h, &c(&[1, 1])).unwrap(), Positivity::Ample);
        assert_eq!(s.positivity_class(&h, &c(&[1, -1])).unwrap(), Positivity::NotNef);
        assert_eq!(s.positivity_class(&h, &c(&[-1, 0])).unwrap(), Positivity::NotNef);
        assert_eq!(s.positivity_class(&h, &c(&[0, 0])).unwrap(), Positivity::NefBoundary);
    }

    #[test]
    fn isometry_examples() {
        let s = m(&[&[0, 4], &[4, 0]]);
        let h = s.reference_ample();
        let swap = s.check_isometry(&h, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(swap.apply(&c(&[1, 0])), c(&[0, 1]));
        assert_eq!(swap.compose(&swap), IsometryMap::identity(2));
        assert_eq!(swap.inverse(), swap);
        assert_eq!(s.check_isometry(&h, vec![vec![-1, 0], vec![0, -1]]), Err(Error::ReversesCone));
        let t = m(&[&[2, 1], &[1, -2]]);
        assert_eq!(t.check_isometry(&t.reference_ample(), vec![vec![0, 1], vec![1, 0]]), Err(Error::NotIsometry));
    }

    #[test]
    fn rational_classes() {
        use crate::quad::rat;
        let (cls, r) = primitive_from_rational(&[rat(4, 3), rat(2, 3)]).unwrap();
        assert_eq!(cls, c(&[2, 1]));
        assert_eq!(r, rat(2, 3));
    }
}
