//! Smith and Hermite normal forms, integer kernels and integer solving.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// `U·M·V = D` with `U`, `V` unimodular and `D` diagonal with `d₁ | d₂ | …`, all `dᵢ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

struct Work {
    a: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.a.iter_mut().chain(self.v.iter_mut()) {
            r.swap(i, j);
        }
    }

    /// row_i += f·row_j
    fn add_row(&mut self, i: usize, j: usize, f: &BigInt) {
        for m in [&mut self.a, &mut self.u] {
            let src = m[j].clone();
            for (x, y) in m[i].iter_mut().zip(src) {
                *x += f * y;
            }
        }
    }

    /// col_i += f·col_j
    fn add_col(&mut self, i: usize, j: usize, f: &BigInt) {
        for m in [&mut self.a, &mut self.v] {
            for r in m.iter_mut() {
                let t = f * &r[j];
                r[i] += t;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for x in m[i].iter_mut() {
                *x = -&*x;
            }
        }
    }
}

fn to_matrix(rows: Vec<Vec<BigInt>>, r: usize, c: usize) -> IntMatrix {
    IntMatrix::from_vec(r, c, rows.into_iter().flatten().collect()).expect("shape")
}

fn min_abs_position<'a>(cands: impl Iterator<Item = ((usize, usize), &'a BigInt)>) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for (pos, x) in cands {
        if x.is_zero() {
            continue;
        }
        let ax = x.abs();
        if best.as_ref().is_none_or(|(_, b)| ax < *b) {
            best = Some((pos, ax));
        }
    }
    best.map(|(p, _)| p)
}

/// Smith normal form with minimal-absolute-value pivoting. Deterministic.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = Work {
        a: m.to_rows(),
        u: IntMatrix::identity(rows).to_rows(),
        v: IntMatrix::identity(cols).to_rows(),
    };
    for t in 0..rows.min(cols) {
        let all = (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j)));
        let Some((pi, pj)) = min_abs_position(all.map(|(i, j)| ((i, j), &w.a[i][j]))) else {
            break;
        };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let p = w.a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if !w.a[i][t].is_zero() {
                    let q = -(&w.a[i][t] / &p);
                    w.add_row(i, t, &q);
                    clean &= w.a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !w.a[t][j].is_zero() {
                    let q = -(&w.a[t][j] / &p);
                    w.add_col(j, t, &q);
                    clean &= w.a[t][j].is_zero();
                }
            }
            if !clean {
                let col = (t..rows).map(|i| ((i, t), &w.a[i][t]));
                let row = (t + 1..cols).map(|j| ((t, j), &w.a[t][j]));
                let (ni, nj) = min_abs_position(col.chain(row)).expect("nonzero pivot");
                w.swap_rows(t, ni);
                w.swap_cols(t, nj);
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !w.a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => w.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
    }
    SmithDecomposition {
        u: to_matrix(w.u, rows, rows),
        d: to_matrix(w.a, rows, cols),
        v: to_matrix(w.v, cols, cols),
    }
}

/// Column Hermite normal form of the lattice spanned by the columns of `b`.
///
/// The result is lower-triangular in column-echelon shape: the pivot of each column sits strictly
/// below the pivot of the previous one, pivots are positive, and entries to the left of a pivot
/// lie in `[0, pivot)`. The basis is therefore unique for a given lattice.
pub fn column_hnf(b: &IntMatrix) -> IntMatrix {
    let (n, k) = (b.rows(), b.cols());
    // Work on columns as vectors.
    let mut cols: Vec<Vec<BigInt>> = (0..k).map(|j| b.col(j)).collect();
    let mut c = 0;
    for i in 0..n {
        if c == cols.len() {
            break;
        }
        loop {
            let pos = (c..cols.len())
                .filter(|&j| !cols[j][i].is_zero())
                .min_by(|&x, &y| cols[x][i].abs().cmp(&cols[y][i].abs()));
            let Some(jmin) = pos else { break };
            cols.swap(c, jmin);
            let mut done = true;
            for j in c + 1..cols.len() {
                if !cols[j][i].is_zero() {
                    let q = cols[j][i].div_floor(&cols[c][i]);
                    let pivot = cols[c].clone();
                    for (x, y) in cols[j].iter_mut().zip(&pivot) {
                        *x -= &q * y;
                    }
                    done &= cols[j][i].is_zero();
                }
            }
            if done {
                break;
            }
        }
        if c < cols.len() && !cols[c][i].is_zero() {
            if cols[c][i].is_negative() {
                for x in cols[c].iter_mut() {
                    *x = -&*x;
                }
            }
            let pivot = cols[c].clone();
            for j in 0..c {
                let q = cols[j][i].div_floor(&pivot[i]);
                if !q.is_zero() {
                    for (x, y) in cols[j].iter_mut().zip(&pivot) {
                        *x -= &q * y;
                    }
                }
            }
            c += 1;
        }
    }
    let mut out = IntMatrix::zeros(n, c);
    for (j, col) in cols.into_iter().take(c).enumerate() {
        for (i, x) in col.into_iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    out
}

/// Basis of the integer kernel of `m`, in column Hermite normal form. The span is saturated.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(m);
    let r = s.rank();
    let idx: Vec<usize> = (r..m.cols()).collect();
    column_hnf(&s.v.select_cols(&idx))
}

/// An integer solution of `a·x = b`, if one exists.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len(), "dimension mismatch");
    let s = smith_normal_form(a);
    let ub = s.u.mul_vec(b);
    let r = s.rank();
    let mut y = alloc::vec![BigInt::zero(); a.cols()];
    for (i, rhs) in ub.iter().enumerate() {
        if i < r {
            let d = &s.d[(i, i)];
            if !rhs.is_multiple_of(d) {
                return None;
            }
            y[i] = rhs / d;
        } else if !rhs.is_zero() {
            return None;
        }
    }
    Some(s.v.mul_vec(&y))
}

/// Whether the columns of `b` span a direct summand (all Smith invariants equal one).
pub fn is_saturated(b: &IntMatrix) -> bool {
    let s = smith_normal_form(b);
    s.rank() == b.cols() && s.diagonal().iter().all(|d| d.is_one())
}
