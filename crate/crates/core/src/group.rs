//! Finitely generated abelian groups in primary normal form, homomorphisms, cokernels.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{factor, mod_inv, modp, prime_power};
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::snf::{column_hnf, kernel_basis, smith_normal_form};

/// Coordinates of a group element: one per cyclic factor, then one per free factor.
pub type Element = Vec<i64>;

/// `⊕ Z/oᵢ ⊕ Z^f` with every `oᵢ` a prime power, sorted by prime then exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FinAbGroup {
    orders: Vec<u64>,
    free_rank: usize,
}

impl FinAbGroup {
    /// Validates an already normalized order sequence.
    pub fn new(orders: Vec<u64>, free_rank: usize) -> Result<Self> {
        let mut keys = Vec::with_capacity(orders.len());
        for &o in &orders {
            let (p, k) = prime_power(o)
                .ok_or_else(|| Error::Invalid(alloc::format!("order {o} is not a prime power")))?;
            keys.push((p, k));
        }
        if keys.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("orders are not sorted by prime then exponent".into()));
        }
        Ok(FinAbGroup { orders, free_rank })
    }

    /// Normalizes arbitrary cyclic orders (1 is dropped, composites are split).
    pub fn from_cyclic(orders: &[u64], free_rank: usize) -> Self {
        let mut pp: Vec<(u64, u32)> = orders.iter().flat_map(|&o| factor(o)).collect();
        pp.sort();
        FinAbGroup {
            orders: pp.iter().map(|&(p, k)| p.pow(k)).collect(),
            free_rank,
        }
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        FinAbGroup {
            orders: Vec::new(),
            free_rank: rank,
        }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion_rank(&self) -> usize {
        self.orders.len()
    }

    pub fn ngens(&self) -> usize {
        self.orders.len() + self.free_rank
    }

    pub fn torsion(&self) -> FinAbGroup {
        FinAbGroup {
            orders: self.orders.clone(),
            free_rank: 0,
        }
    }

    /// Order of the torsion subgroup; saturates at `u64::MAX`.
    pub fn torsion_order(&self) -> u64 {
        self.orders.iter().fold(1u64, |a, &o| a.saturating_mul(o))
    }

    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1u64, |a, &o| crate::arith::lcm_u64(a, o))
    }

    /// Distinct primes dividing the torsion order.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.orders.iter().map(|&o| factor(o)[0].0).collect();
        ps.dedup();
        ps
    }

    /// Prime of the i-th cyclic factor.
    pub fn prime_of(&self, i: usize) -> u64 {
        factor(self.orders[i])[0].0
    }

    pub fn direct_sum(&self, other: &Self) -> (Self, Vec<usize>, Vec<usize>) {
        let mut tagged: Vec<(u64, u32, usize, usize)> = Vec::new();
        for (i, &o) in self.orders.iter().enumerate() {
            let (p, k) = prime_power(o).expect("prime power");
            tagged.push((p, k, 0, i));
        }
        for (i, &o) in other.orders.iter().enumerate() {
            let (p, k) = prime_power(o).expect("prime power");
            tagged.push((p, k, 1, i));
        }
        tagged.sort();
        let mut left = vec![0; self.orders.len()];
        let mut right = vec![0; other.orders.len()];
        for (pos, t) in tagged.iter().enumerate() {
            if t.2 == 0 {
                left[t.3] = pos;
            } else {
                right[t.3] = pos;
            }
        }
        let g = FinAbGroup {
            orders: tagged.iter().map(|t| t.0.pow(t.1)).collect(),
            free_rank: self.free_rank + other.free_rank,
        };
        (g, left, right)
    }

    pub fn zero(&self) -> Element {
        vec![0; self.ngens()]
    }

    pub fn generator(&self, i: usize) -> Element {
        let mut e = self.zero();
        e[i] = 1;
        e
    }

    pub fn reduce(&self, x: &mut [i64]) {
        for (c, &o) in x.iter_mut().zip(&self.orders) {
            *c = c.rem_euclid(o as i64);
        }
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Element {
        let mut z: Element = x.iter().zip(y).map(|(a, b)| a + b).collect();
        self.reduce(&mut z);
        z
    }

    pub fn sub(&self, x: &[i64], y: &[i64]) -> Element {
        let mut z: Element = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.reduce(&mut z);
        z
    }

    pub fn scale(&self, x: &[i64], k: i64) -> Element {
        let mut z: Element = x
            .iter()
            .zip(self.orders.iter().map(Some).chain(core::iter::repeat(None)))
            .map(|(&a, o)| match o {
                Some(&o) => ((a as i128 * k as i128).rem_euclid(o as i128)) as i64,
                None => a * k,
            })
            .collect();
        self.reduce(&mut z);
        z
    }

    pub fn is_zero(&self, x: &[i64]) -> bool {
        x.iter().all(|&c| c == 0)
    }

    /// Order of a torsion element; `None` when the free part is nonzero.
    pub fn order_of(&self, x: &[i64]) -> Option<u64> {
        if x[self.orders.len()..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(
            x.iter()
                .zip(&self.orders)
                .map(|(&c, &o)| o / crate::arith::gcd_u64(c.rem_euclid(o as i64) as u64, o))
                .fold(1, crate::arith::lcm_u64),
        )
    }

    /// Whether `x` lies in `k·G` (torsion coordinates only).
    pub fn is_divisible(&self, x: &[i64], k: u64) -> bool {
        let tors = x.iter().zip(&self.orders).all(|(&c, &o)| {
            let g = crate::arith::gcd_u64(k, o);
            (c.rem_euclid(o as i64) as u64).is_multiple_of(g)
        });
        tors && x[self.orders.len()..].iter().all(|&c| (c.unsigned_abs()) % k == 0)
    }

    /// Index of a torsion element in lexicographic order of its coordinates.
    pub fn index_of(&self, x: &[i64]) -> usize {
        let mut idx = 0usize;
        for (&c, &o) in x.iter().zip(&self.orders) {
            idx = idx * o as usize + c.rem_euclid(o as i64) as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> Element {
        let mut x = vec![0i64; self.ngens()];
        for i in (0..self.orders.len()).rev() {
            let o = self.orders[i] as usize;
            x[i] = (idx % o) as i64;
            idx /= o;
        }
        x
    }

    /// All torsion elements in lexicographic order. Fails above `cap`.
    pub fn elements(&self, cap: u64) -> Result<Vec<Element>> {
        let n = self.torsion_order();
        if n > cap {
            return Err(Error::CapExceeded { size: n, cap });
        }
        Ok((0..n as usize).map(|i| self.element_at(i)).collect())
    }

    /// Indices of the cyclic factors belonging to prime `p`.
    pub fn prime_indices(&self, p: u64) -> Vec<usize> {
        (0..self.orders.len()).filter(|&i| self.prime_of(i) == p).collect()
    }
}

impl core::fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut parts: Vec<alloc::string::String> =
            self.orders.iter().map(|o| alloc::format!("Z/{o}")).collect();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 {
                "Z".into()
            } else {
                alloc::format!("Z^{}", self.free_rank)
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// All finite abelian groups of order `n` in normal form, ordered by their order sequences.
pub fn groups_of_order(n: u64) -> Vec<FinAbGroup> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for (p, k) in factor(n) {
        let mut next = Vec::new();
        for part in partitions(k, k) {
            let mut exps = part;
            exps.sort();
            for prefix in &out {
                let mut o = prefix.clone();
                o.extend(exps.iter().map(|&e| p.pow(e)));
                next.push(o);
            }
        }
        out = next;
    }
    out.sort();
    out.into_iter().map(|orders| FinAbGroup { orders, free_rank: 0 }).collect()
}

fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A homomorphism given by the images of the source generators (matrix columns).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupHom {
    source: FinAbGroup,
    target: FinAbGroup,
    matrix: IntMatrix,
}

impl GroupHom {
    pub fn new(source: FinAbGroup, target: FinAbGroup, mut matrix: IntMatrix) -> Result<Self> {
        if matrix.rows() != target.ngens() || matrix.cols() != source.ngens() {
            return Err(Error::DimensionMismatch {
                expected: target.ngens() * source.ngens(),
                found: matrix.rows() * matrix.cols(),
            });
        }
        matrix.reduce_rows(target.orders());
        let h = GroupHom {
            source,
            target,
            matrix,
        };
        for (j, &o) in h.source.orders.iter().enumerate() {
            let img = h.image_of_generator(j);
            if !h.target.is_zero(&h.target.scale(&img, o as i64)) {
                return Err(Error::Invalid(alloc::format!(
                    "generator {j} of order {o} is not mapped to an element of order dividing {o}"
                )));
            }
        }
        Ok(h)
    }

    /// Builds a homomorphism from generator images given as element coordinates.
    pub fn from_images(source: FinAbGroup, target: FinAbGroup, images: &[Element]) -> Result<Self> {
        let mut m = IntMatrix::zeros(target.ngens(), source.ngens());
        if images.len() != source.ngens() {
            return Err(Error::DimensionMismatch {
                expected: source.ngens(),
                found: images.len(),
            });
        }
        for (j, img) in images.iter().enumerate() {
            if img.len() != target.ngens() {
                return Err(Error::DimensionMismatch {
                    expected: target.ngens(),
                    found: img.len(),
                });
            }
            for (i, &c) in img.iter().enumerate() {
                m[(i, j)] = BigInt::from(c);
            }
        }
        Self::new(source, target, m)
    }

    pub fn identity(g: &FinAbGroup) -> Self {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMatrix::identity(g.ngens()),
        }
    }

    pub fn source(&self) -> &FinAbGroup {
        &self.source
    }

    pub fn target(&self) -> &FinAbGroup {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn image_of_generator(&self, j: usize) -> Element {
        (0..self.target.ngens())
            .map(|i| self.matrix[(i, j)].to_i64().expect("small coordinates"))
            .collect()
    }

    pub fn images(&self) -> Vec<Element> {
        (0..self.source.ngens()).map(|j| self.image_of_generator(j)).collect()
    }

    pub fn apply(&self, x: &[i64]) -> Element {
        let mut y = vec![0i128; self.target.ngens()];
        for (j, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += c as i128 * self.matrix[(i, j)].to_i128().expect("small coordinates");
            }
        }
        let mut out: Element = y
            .iter()
            .enumerate()
            .map(|(i, &v)| match self.target.orders.get(i) {
                Some(&o) => modp(v, o) as i64,
                None => v as i64,
            })
            .collect();
        self.target.reduce(&mut out);
        out
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupHom) -> Result<GroupHom> {
        if self.target != other.source {
            return Err(Error::Invalid("composition of incompatible homomorphisms".into()));
        }
        GroupHom::new(self.source.clone(), other.target.clone(), other.matrix() * &self.matrix)
    }

    /// Bijectivity check for finite groups, by enumeration.
    pub fn is_bijective(&self, cap: u64) -> Result<bool> {
        if self.source.free_rank > 0 || self.target.free_rank > 0 {
            return Err(Error::Unsupported("bijectivity check on infinite groups"));
        }
        if self.source.torsion_order() != self.target.torsion_order() {
            return Ok(false);
        }
        let mut seen = vec![false; self.target.torsion_order() as usize];
        for x in self.source.elements(cap)? {
            let i = self.target.index_of(&self.apply(&x));
            if seen[i] {
                return Ok(false);
            }
            seen[i] = true;
        }
        Ok(true)
    }

    /// Inverse of a bijective homomorphism between finite groups.
    pub fn inverse(&self, cap: u64) -> Result<GroupHom> {
        if !self.is_bijective(cap)? {
            return Err(Error::Invalid("homomorphism is not invertible".into()));
        }
        let mut pre = vec![None; self.target.torsion_order() as usize];
        for x in self.source.elements(cap)? {
            let i = self.target.index_of(&self.apply(&x));
            pre[i] = Some(x);
        }
        let images: Vec<Element> = (0..self.target.ngens())
            .map(|j| pre[self.target.index_of(&self.target.generator(j))].clone().expect("bijective"))
            .collect();
        GroupHom::from_images(self.target.clone(), self.source.clone(), &images)
    }
}

/// Cokernel of an integer matrix together with a lift of each generator.
#[derive(Clone, Debug)]
pub struct Cokernel {
    pub group: FinAbGroup,
    /// `π: Z^rows → G`.
    pub projection: GroupHom,
    /// Column `j` lifts generator `j` to `Z^rows`.
    pub lifts: IntMatrix,
}

/// `Cok(M) = Z^rows / M·Z^cols` in normalized primary decomposition.
pub fn cokernel_full(m: &IntMatrix) -> Cokernel {
    let rows = m.rows();
    let s = smith_normal_form(m);
    let diag = s.diagonal();
    let r = s.rank();
    let uinv = unimodular_inverse(&s.u);
    // (prime, exponent, row index)
    let mut tors: Vec<(u64, u32, usize)> = Vec::new();
    for (i, d) in diag.iter().enumerate().take(r) {
        let d = d.to_u64().expect("Smith invariant exceeds u64");
        for (p, k) in factor(d) {
            tors.push((p, k, i));
        }
    }
    tors.sort();
    let free = rows - r;
    let ngens = tors.len() + free;
    let mut proj = IntMatrix::zeros(ngens, rows);
    let mut lifts = IntMatrix::zeros(rows, ngens);
    for (g, &(p, k, i)) in tors.iter().enumerate() {
        let q = p.pow(k);
        let d = diag[i].to_u64().expect("fits");
        let cof = d / q;
        let inv = mod_inv(cof as i128, q).expect("coprime cofactor");
        let qb = BigInt::from(q);
        for j in 0..rows {
            proj[(g, j)] = (&s.u[(i, j)] * BigInt::from(inv)).mod_floor(&qb);
            lifts[(j, g)] = &uinv[(j, i)] * BigInt::from(cof);
        }
    }
    for f in 0..free {
        let g = tors.len() + f;
        for j in 0..rows {
            proj[(g, j)] = s.u[(r + f, j)].clone();
            lifts[(j, g)] = uinv[(j, r + f)].clone();
        }
    }
    let group = FinAbGroup {
        orders: tors.iter().map(|&(p, k, _)| p.pow(k)).collect(),
        free_rank: free,
    };
    let projection = GroupHom {
        source: FinAbGroup::free(rows),
        target: group.clone(),
        matrix: proj,
    };
    Cokernel {
        group,
        projection,
        lifts,
    }
}

/// `Cok(M)` and the projection from the codomain lattice.
pub fn cokernel(m: &IntMatrix) -> (FinAbGroup, GroupHom) {
    let c = cokernel_full(m);
    (c.group, c.projection)
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(u: &IntMatrix) -> IntMatrix {
    let inv = u.rational_inverse().expect("unimodular matrix");
    let n = u.rows();
    let mut out = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            assert!(inv[i][j].is_integer(), "matrix is not unimodular");
            out[(i, j)] = inv[i][j].to_integer();
        }
    }
    out
}

/// Basis (column Hermite normal form) of `{ v : target_hom(M·v) = 0 }`.
pub fn preimage_lattice(m: &IntMatrix, target_hom: &GroupHom) -> Result<IntMatrix> {
    if target_hom.source().ngens() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: target_hom.source().ngens(),
            found: m.rows(),
        });
    }
    let a = target_hom.matrix() * m;
    let t = target_hom.target();
    let n = m.cols();
    let mut slack = IntMatrix::zeros(a.rows(), t.torsion_rank());
    for (i, &o) in t.orders().iter().enumerate() {
        slack[(i, i)] = BigInt::from(o);
    }
    let k = kernel_basis(&a.hstack(&slack));
    let idx: Vec<usize> = (0..n).collect();
    let proj = k.select_rows(&idx);
    let basis = column_hnf(&proj);
    debug_assert!(basis.cols() == n || t.free_rank() > 0 || n == 0 || !basis.is_zero());
    Ok(basis)
}

/// Whether `h` is the identity of its source group.
pub fn is_identity_hom(h: &GroupHom) -> bool {
    let mut id = IntMatrix::identity(h.source.ngens());
    id.reduce_rows(h.target.orders());
    h.source == h.target && h.matrix == id
}
