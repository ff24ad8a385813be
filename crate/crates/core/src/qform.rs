//! Integral quadratic functions κ(H, λ, α) with κ(v) = λ(v,v) + α(v).

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{cokernel, FinAbGroup, GroupHom};
use crate::matrix::IntMatrix;
use crate::snf::smith_normal_form;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticFunction {
    gram: IntMatrix,
    linear: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Characteristic,
    Even,
    EvenForm,
    Linear,
    Other,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Characteristic => "characteristic",
            Flavor::Even => "even",
            Flavor::EvenForm => "even form",
            Flavor::Linear => "linear",
            Flavor::Other => "other",
        };
        f.write_str(s)
    }
}

impl QuadraticFunction {
    pub fn new(gram: IntMatrix, linear: Vec<BigInt>) -> Result<Self> {
        if !gram.is_square() || gram.rows() != linear.len() {
            return Err(Error::DimensionMismatch {
                expected: gram.rows(),
                found: linear.len(),
            });
        }
        if !gram.is_symmetric() {
            return Err(Error::Invalid("Gram matrix is not symmetric".into()));
        }
        Ok(QuadraticFunction { gram, linear })
    }

    /// Convenience constructor from machine integers. Panics on malformed input.
    pub fn from_i64(gram: &[Vec<i64>], linear: &[i64]) -> Self {
        let g = if gram.is_empty() {
            IntMatrix::zeros(0, 0)
        } else {
            IntMatrix::from_rows(gram)
        };
        Self::new(g, linear.iter().map(|&x| BigInt::from(x)).collect()).expect("valid quadratic function")
    }

    pub fn empty() -> Self {
        QuadraticFunction {
            gram: IntMatrix::zeros(0, 0),
            linear: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.linear.len()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn linear(&self) -> &[BigInt] {
        &self.linear
    }

    pub fn bilinear(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        self.gram.bilinear(v, w)
    }

    pub fn evaluate(&self, v: &[BigInt]) -> Result<BigInt> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.len(),
            });
        }
        let lin: BigInt = self.linear.iter().zip(v).map(|(a, b)| a * b).sum();
        Ok(self.bilinear(v, v) + lin)
    }

    /// κ(v) = λ(v,v) + α(v) is even for every v.
    pub fn is_characteristic(&self) -> bool {
        (0..self.rank()).all(|i| (&self.gram[(i, i)] + &self.linear[i]).is_even())
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    /// Most specific tag, with precedence EvenForm > Even > Characteristic > Linear > Other.
    pub fn flavor(&self) -> Flavor {
        if self.is_even() {
            if self.linear.iter().all(Zero::is_zero) {
                Flavor::EvenForm
            } else {
                Flavor::Even
            }
        } else if self.is_characteristic() {
            Flavor::Characteristic
        } else if self.gram.is_zero() {
            Flavor::Linear
        } else {
            Flavor::Other
        }
    }

    pub fn det(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn is_nonsingular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn signature(&self) -> i64 {
        signature(&self.gram)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut linear = self.linear.clone();
        linear.extend(other.linear.iter().cloned());
        QuadraticFunction {
            gram: self.gram.block_sum(&other.gram),
            linear,
        }
    }

    /// κ⁻ = κ(H, −λ, α).
    pub fn reverse(&self) -> Self {
        QuadraticFunction {
            gram: self.gram.neg(),
            linear: self.linear.clone(),
        }
    }

    /// Restriction to the span of the columns of `basis`, in that basis.
    pub fn restrict(&self, basis: &IntMatrix) -> Self {
        let bt = basis.transpose();
        let gram = &(&bt * &self.gram) * basis;
        let linear = bt.mul_vec(&self.linear);
        QuadraticFunction { gram, linear }
    }

    /// Pulls back along `theta` (columns are images of basis vectors).
    pub fn pullback(&self, theta: &IntMatrix) -> Self {
        self.restrict(theta)
    }

    /// Replaces the linear term.
    pub fn with_linear(&self, linear: Vec<BigInt>) -> Result<Self> {
        Self::new(self.gram.clone(), linear)
    }

    /// Whether `theta` is an isometry from `self` onto `other`.
    pub fn is_isometry_to(&self, other: &Self, theta: &IntMatrix) -> bool {
        theta.rows() == other.rank()
            && theta.cols() == self.rank()
            && theta.is_square()
            && theta.det().abs().is_one()
            && other.pullback(theta) == *self
    }
}

impl fmt::Display for QuadraticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(λ = {}, α = [", self.gram)?;
        for (i, a) in self.linear.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "])")
    }
}

/// Signature by exact congruence diagonalization over Q.
pub fn signature(gram: &IntMatrix) -> i64 {
    assert!(gram.is_symmetric(), "signature of a non-symmetric matrix");
    let n = gram.rows();
    let mut a: Vec<Vec<BigRational>> = gram
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from).collect())
        .collect();
    let mut sig = 0i64;
    for k in 0..n {
        if let Some(i) = (k..n).find(|&i| !a[i][i].is_zero()) {
            swap_sym(&mut a, i, k);
        } else {
            let pair = (k..n).flat_map(|i| (k..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero());
            let Some((i, j)) = pair else { break };
            // x_i ← x_i + x_j turns a hyperbolic block into one with a nonzero diagonal.
            let rowj = a[j].clone();
            for (x, y) in a[i].iter_mut().zip(&rowj) {
                *x += y;
            }
            for r in a.iter_mut() {
                let t = r[j].clone();
                r[i] += t;
            }
            swap_sym(&mut a, i, k);
        }
        let p = a[k][k].clone();
        sig += if p.is_positive() { 1 } else { -1 };
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            let rowk = a[k].clone();
            for (x, y) in a[i].iter_mut().zip(&rowk) {
                *x -= &f * y;
            }
            for r in a.iter_mut() {
                let t = &f * &r[k];
                r[i] -= t;
            }
        }
    }
    sig
}

fn swap_sym(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    a.swap(i, j);
    for r in a.iter_mut() {
        r.swap(i, j);
    }
}

/// The rational pairing λ⁻¹ on H* for a nondegenerate λ.
#[derive(Clone, Debug)]
pub struct InversePairing {
    inv: Vec<Vec<BigRational>>,
}

impl InversePairing {
    pub fn new(gram: &IntMatrix) -> Result<Self> {
        let inv = gram
            .rational_inverse()
            .map_err(|_| Error::Degenerate("λ⁻¹ requires a nondegenerate form"))?;
        Ok(InversePairing { inv })
    }

    /// `y(λ̂⁻¹ x)`.
    pub fn pair(&self, x: &[BigInt], y: &[BigInt]) -> BigRational {
        let mut s = BigRational::zero();
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (j, xj) in x.iter().enumerate() {
                if xj.is_zero() {
                    continue;
                }
                s += &self.inv[i][j] * BigRational::from(yi * xj);
            }
        }
        s
    }

    /// `λ̂⁻¹ x` as a rational vector.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigRational> {
        self.inv
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * BigRational::from(b.clone())).sum())
            .collect()
    }
}

pub fn inverse_pairing(gram: &IntMatrix, x: &[BigInt], y: &[BigInt]) -> Result<BigRational> {
    Ok(InversePairing::new(gram)?.pair(x, y))
}

/// `0 → F → H → H* → G → 0` with a canonical section complement Ψ of F.
#[derive(Clone, Debug)]
pub struct FundamentalSequence {
    pub radical_basis: IntMatrix,
    pub section_basis: IntMatrix,
    pub quotient: FinAbGroup,
    pub projection: GroupHom,
}

pub fn fundamental_sequence(k: &QuadraticFunction) -> FundamentalSequence {
    let s = smith_normal_form(k.gram());
    let r = s.rank();
    let n = k.rank();
    let section: Vec<usize> = (0..r).collect();
    let radical: Vec<usize> = (r..n).collect();
    let (quotient, projection) = cokernel(k.gram());
    // A nondegenerate form keeps its own basis as the section.
    let section_basis = if r == n { IntMatrix::identity(n) } else { s.v.select_cols(&section) };
    FundamentalSequence {
        radical_basis: s.v.select_cols(&radical),
        section_basis,
        quotient,
        projection,
    }
}

/// Returns `α|_F` on the radical basis and the nondegenerate part κ(Ψ) in the section basis.
pub fn split_by_section(k: &QuadraticFunction) -> (Vec<BigInt>, QuadraticFunction) {
    let fs = fundamental_sequence(k);
    let alpha_f = fs.radical_basis.transpose().mul_vec(k.linear());
    (alpha_f, k.restrict(&fs.section_basis))
}
