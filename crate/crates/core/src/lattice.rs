//! Isometry search between integral quadratic functions.
//!
//! Definite forms are decided exhaustively by short-vector enumeration. Indefinite or
//! degenerate forms get a bounded search that reports `Undecided` instead of a false "no".

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::config::Bounds;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::qform::QuadraticFunction;

const VECTOR_CAP: usize = 2_000_000;
const NODE_CAP: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeVerdict {
    /// Columns of the matrix are the images of the basis of the source.
    Isometric(IntMatrix),
    NotIsometric,
    Undecided,
}

impl LatticeVerdict {
    pub fn is_isometric(&self) -> bool {
        matches!(self, LatticeVerdict::Isometric(_))
    }
}

fn small_matrix(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    m.to_i64_rows()
}

fn small_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(|x| x.to_i64().ok_or(Error::Overflow)).collect()
}

fn alpha_matches(lhs: i64, rhs: i64, modulus: Option<u64>) -> bool {
    match modulus {
        None => lhs == rhs,
        Some(0) => lhs == rhs,
        Some(m) => (lhs as i128 - rhs as i128).rem_euclid(m as i128) == 0,
    }
}

fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x))
}

/// Sort key realizing the entry order 0, 1, −1, 2, −2, …
fn entry_key(x: i64) -> u64 {
    if x > 0 {
        2 * x as u64 - 1
    } else {
        2 * x.unsigned_abs()
    }
}

fn vector_key(v: &[i64]) -> Vec<u64> {
    v.iter().map(|&x| entry_key(x)).collect()
}

/// Searches for Θ: H₀ → H₁ with λ₁(Θv, Θw) = λ₀(v, w) and Θ*α₁ = α₀ (or congruent modulo
/// `constraint_mod`). The identity is returned whenever it is a witness; otherwise the
/// witness is lexicographically least column by column, entries ordered 0, 1, −1, 2, −2, …
pub fn isometry_search(
    k0: &QuadraticFunction,
    k1: &QuadraticFunction,
    constraint_mod: Option<u64>,
    bounds: &Bounds,
) -> Result<LatticeVerdict> {
    let n = k0.rank();
    if n != k1.rank() {
        return Ok(LatticeVerdict::NotIsometric);
    }
    if n > bounds.rank_bound {
        return Err(Error::RankBound {
            rank: n,
            bound: bounds.rank_bound,
        });
    }
    if k0.det() != k1.det() || k0.signature() != k1.signature() || k0.is_even() != k1.is_even() {
        return Ok(LatticeVerdict::NotIsometric);
    }
    if k0.gram().rank() != k1.gram().rank() {
        return Ok(LatticeVerdict::NotIsometric);
    }
    match constraint_mod {
        None | Some(0) => {
            if content(k0.linear()) != content(k1.linear()) || k0.is_characteristic() != k1.is_characteristic() {
                return Ok(LatticeVerdict::NotIsometric);
            }
        }
        Some(m) if m % 2 == 0 => {
            if k0.is_characteristic() != k1.is_characteristic() {
                return Ok(LatticeVerdict::NotIsometric);
            }
        }
        Some(_) => {}
    }
    let g0 = small_matrix(k0.gram())?;
    let g1 = small_matrix(k1.gram())?;
    let a0 = small_vec(k0.linear())?;
    let a1 = small_vec(k1.linear())?;
    if n == 0 {
        return Ok(LatticeVerdict::Isometric(IntMatrix::zeros(0, 0)));
    }
    if g0 == g1 && a0.iter().zip(&a1).all(|(&x, &y)| alpha_matches(x, y, constraint_mod)) {
        return Ok(LatticeVerdict::Isometric(IntMatrix::identity(n)));
    }

    let sigma = k0.signature();
    let definite = !k0.det().is_zero() && sigma.unsigned_abs() as usize == n;
    let search = Search {
        n,
        g0: &g0,
        g1: &g1,
        a0: &a0,
        a1: &a1,
        modulus: constraint_mod,
        check_det: !definite,
    };
    let candidates = if definite {
        let s = if sigma > 0 { 1 } else { -1 };
        let pos: Vec<Vec<i64>> = g1.iter().map(|r| r.iter().map(|x| s * x).collect()).collect();
        let max_norm = (0..n).map(|i| s * g0[i][i]).max().unwrap_or(0);
        match short_vectors(&pos, max_norm) {
            Some(v) => v,
            None => return Ok(LatticeVerdict::Undecided),
        }
    } else {
        box_vectors(n, bounds.entry_bound)
    };
    let buckets = search.bucket(candidates);
    match search.run(&buckets) {
        Outcome::Found(cols) => {
            let mut m = IntMatrix::zeros(n, n);
            for (j, c) in cols.iter().enumerate() {
                for (i, &x) in c.iter().enumerate() {
                    m[(i, j)] = BigInt::from(x);
                }
            }
            Ok(LatticeVerdict::Isometric(m))
        }
        Outcome::Exhausted if definite => Ok(LatticeVerdict::NotIsometric),
        _ => Ok(LatticeVerdict::Undecided),
    }
}

/// All nonzero v with vᵀ G v ≤ bound for positive definite G, or `None` past the cap.
fn short_vectors(g: &[Vec<i64>], bound: i64) -> Option<Vec<Vec<i64>>> {
    let n = g.len();
    if bound <= 0 {
        return Some(Vec::new());
    }
    let mut q = vec![vec![0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            q[i][j] = g[i][j] as f64;
        }
    }
    for i in 0..n {
        for k in 0..i {
            let qki = q[k][i];
            q[i][i] -= q[k][k] * qki * qki;
        }
        for j in i + 1..n {
            let mut s = g[i][j] as f64;
            for k in 0..i {
                s -= q[k][k] * q[k][i] * q[k][j];
            }
            q[i][j] = s / q[i][i];
        }
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    let ok = fp_recurse(g, &q, n, bound, bound as f64, &mut x, &mut out);
    ok.then_some(out)
}

fn fp_recurse(
    g: &[Vec<i64>],
    q: &[Vec<f64>],
    level: usize,
    bound: i64,
    remaining: f64,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) -> bool {
    let n = g.len();
    if level == 0 {
        if x.iter().all(|&v| v == 0) {
            return true;
        }
        let norm: i64 = (0..n).map(|i| (0..n).map(|j| x[i] * g[i][j] * x[j]).sum::<i64>()).sum();
        if norm <= bound {
            out.push(x.clone());
        }
        return out.len() <= VECTOR_CAP;
    }
    let i = level - 1;
    let c: f64 = -(i + 1..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
    let r = libm::sqrt(remaining.max(0.0) / q[i][i]) + 1e-6;
    let lo = libm::ceil(c - r) as i64;
    let hi = libm::floor(c + r) as i64;
    for v in lo..=hi {
        let d = v as f64 - c;
        let rem = remaining - q[i][i] * d * d;
        if rem < -1e-6 {
            continue;
        }
        x[i] = v;
        if !fp_recurse(g, q, level - 1, bound, rem, x, out) {
            return false;
        }
    }
    x[i] = 0;
    true
}

/// Nonzero vectors with entries bounded by the largest b ≤ `entry_bound` that keeps the
/// box under the vector cap.
fn box_vectors(n: usize, entry_bound: i64) -> Vec<Vec<i64>> {
    let mut b = entry_bound.max(0);
    while b > 0 && (2 * b + 1).checked_pow(n as u32).is_none_or(|s| s as usize > VECTOR_CAP) {
        b -= 1;
    }
    let mut out = Vec::new();
    let mut x = vec![-b; n];
    loop {
        if x.iter().any(|&v| v != 0) {
            out.push(x.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
            i += 1;
        }
    }
}

enum Outcome {
    Found(Vec<Vec<i64>>),
    Exhausted,
    Aborted,
}

struct Search<'a> {
    n: usize,
    g0: &'a [Vec<i64>],
    g1: &'a [Vec<i64>],
    a0: &'a [i64],
    a1: &'a [i64],
    modulus: Option<u64>,
    check_det: bool,
}

impl Search<'_> {
    /// Candidate images per source basis vector, sorted in witness order.
    fn bucket(&self, vectors: Vec<Vec<i64>>) -> Vec<Vec<(Vec<i64>, Vec<i64>)>> {
        let n = self.n;
        let mut buckets: Vec<Vec<(Vec<i64>, Vec<i64>)>> = vec![Vec::new(); n];
        for v in vectors {
            let gv: Vec<i64> = (0..n).map(|i| (0..n).map(|j| self.g1[i][j] * v[j]).sum()).collect();
            let norm: i64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
            let av: i64 = self.a1.iter().zip(&v).map(|(a, b)| a * b).sum();
            for j in 0..n {
                if norm == self.g0[j][j] && alpha_matches(av, self.a0[j], self.modulus) {
                    buckets[j].push((v.clone(), gv.clone()));
                }
            }
        }
        for b in buckets.iter_mut() {
            b.sort_by_key(|x| vector_key(&x.0));
        }
        buckets
    }

    fn run(&self, buckets: &[Vec<(Vec<i64>, Vec<i64>)>]) -> Outcome {
        let mut chosen: Vec<usize> = Vec::with_capacity(self.n);
        let mut nodes = 0u64;
        if self.dfs(buckets, &mut chosen, &mut nodes) {
            let cols = chosen.iter().enumerate().map(|(j, &c)| buckets[j][c].0.clone()).collect();
            Outcome::Found(cols)
        } else if nodes > NODE_CAP {
            Outcome::Aborted
        } else {
            Outcome::Exhausted
        }
    }

    fn dfs(&self, buckets: &[Vec<(Vec<i64>, Vec<i64>)>], chosen: &mut Vec<usize>, nodes: &mut u64) -> bool {
        let j = chosen.len();
        if j == self.n {
            if !self.check_det {
                return true;
            }
            let cols: Vec<Vec<i64>> = chosen.iter().enumerate().map(|(k, &c)| buckets[k][c].0.clone()).collect();
            let m = IntMatrix::from_rows(&cols);
            return m.det().abs() == BigInt::from(1);
        }
        for (c, (v, _)) in buckets[j].iter().enumerate() {
            *nodes += 1;
            if *nodes > NODE_CAP {
                return false;
            }
            let fits = chosen.iter().enumerate().all(|(i, &ci)| {
                let gw = &buckets[i][ci].1;
                v.iter().zip(gw).map(|(a, b)| a * b).sum::<i64>() == self.g0[i][j]
            });
            if !fits {
                continue;
            }
            chosen.push(c);
            if self.dfs(buckets, chosen, nodes) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}
