//! Gluing and splitting, linking-form invariants, the refinement classification, the generator
//! catalog and bounded realization.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{gcd_u64, legendre, mod_inv, prime_power};
use crate::config::Bounds;
use crate::error::{Error, Result};
use crate::group::{preimage_lattice, Element, FinAbGroup, GroupHom};
use crate::matrix::IntMatrix;
use crate::qform::QuadraticFunction;
use crate::ratmod::RationalModZ;
use crate::snf::{column_hnf, is_saturated, kernel_basis, solve_integer};
use crate::torsion::{
    brute_isometry, brute_isometry_linking, brute_isometry_wilkens, gauss_invariant, homogeneous_refinement,
    phase_sum, snap_argument, Boundary, LinkingForm, QuadraticLinkingFunction, WilkensData,
};

/// Result of gluing two quadratic functions along a boundary isometry.
#[derive(Clone, Debug)]
pub struct Glued {
    pub kappa: QuadraticFunction,
    /// Columns are the images of the basis of H₀ in the glued lattice.
    pub i0: IntMatrix,
    /// Columns are the images of the basis of H₁ (an isometric embedding of κ₁⁻).
    pub i1: IntMatrix,
}

/// Whether `theta` carries the first boundary refinement onto the second.
fn boundary_isometry(q0: &QuadraticLinkingFunction, q1: &QuadraticLinkingFunction, theta: &GroupHom) -> bool {
    if theta.source() != q0.group() || theta.target() != q1.group() {
        return false;
    }
    let imgs = theta.images();
    let n = imgs.len();
    let preserves = (0..n).all(|i| {
        q1.evaluate(&imgs[i]) == q0.gen_values()[i]
            && (0..n).all(|j| {
                q1.base().pair(&imgs[i], &imgs[j]) == q0.base().pair(&q0.group().generator(i), &q0.group().generator(j))
            })
    });
    preserves && q0.group().orders() == q1.group().orders()
}

fn boundary_refinements(
    k0: &QuadraticFunction,
    k1: &QuadraticFunction,
) -> Result<(Boundary, Boundary, QuadraticLinkingFunction, QuadraticLinkingFunction)> {
    let b0 = Boundary::new(k0)?;
    let b1 = Boundary::new(k1)?;
    let (q0, q1) = if k0.is_characteristic() && k1.is_characteristic() {
        (b0.characteristic()?, b1.characteristic()?)
    } else if k0.is_even() && k1.is_even() {
        (b0.even()?, b1.even()?)
    } else {
        return Err(Error::Flavor("gluing needs two characteristic or two even quadratic functions"));
    };
    Ok((b0, b1, q0, q1))
}

/// `κ₀ ∪_θ κ₁⁻` on `H = {(x₀, x₁) ∈ H₀* ⊕ H₁* : θ[x₀] = [x₁]}`.
pub fn glue(k0: &QuadraticFunction, k1: &QuadraticFunction, theta: &GroupHom) -> Result<Glued> {
    if !k0.is_nondegenerate() || !k1.is_nondegenerate() {
        return Err(Error::Degenerate("gluing needs nondegenerate quadratic functions"));
    }
    let (bd0, bd1, q0, q1) = boundary_refinements(k0, k1)?;
    if !boundary_isometry(&q0, &q1, theta) {
        return Err(Error::NotIsometry("θ does not carry the boundary of κ₀ onto the boundary of κ₁".into()));
    }
    let (n0, n1) = (k0.rank(), k1.rank());
    let n = n0 + n1;
    let g1 = bd1.group().clone();
    let left = theta.matrix() * bd0.cokernel.projection.matrix();
    let hom = GroupHom::new(FinAbGroup::free(n), g1, left.hstack(&bd1.cokernel.projection.matrix().neg()))?;
    let basis = column_hnf(&preimage_lattice(&IntMatrix::identity(n), &hom)?);
    if basis.cols() != n {
        return Err(Error::Inconsistent("glued lattice has the wrong rank".into()));
    }
    let split = |c: &[BigInt]| (c[..n0].to_vec(), c[n0..].to_vec());
    let cols: Vec<(Vec<BigInt>, Vec<BigInt>)> = (0..n).map(|j| split(&basis.col(j))).collect();
    let mut gram = IntMatrix::zeros(n, n);
    for a in 0..n {
        for c in a..n {
            let v = bd0.inverse.pair(&cols[a].0, &cols[c].0) - bd1.inverse.pair(&cols[a].1, &cols[c].1);
            let v = integral(&v, "glued λ")?;
            gram[(a, c)] = v.clone();
            gram[(c, a)] = v;
        }
    }
    let mut alpha = Vec::with_capacity(n);
    for (x0, x1) in &cols {
        let v = bd0.inverse.pair(k0.linear(), x0) - bd1.inverse.pair(k1.linear(), x1);
        alpha.push(integral(&v, "glued α")?);
    }
    let kappa = QuadraticFunction::new(gram, alpha)?;
    let embed = |blocks: &dyn Fn(usize) -> Vec<BigInt>, count: usize| -> Result<IntMatrix> {
        let mut m = IntMatrix::zeros(n, count);
        for j in 0..count {
            let coords = solve_integer(&basis, &blocks(j))
                .ok_or_else(|| Error::Inconsistent("embedding does not land in the glued lattice".into()))?;
            for (i, c) in coords.into_iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        Ok(m)
    };
    let i0 = embed(
        &|j| {
            let mut v = k0.gram().col(j);
            v.extend(core::iter::repeat_n(BigInt::zero(), n1));
            v
        },
        n0,
    )?;
    let i1 = embed(
        &|j| {
            let mut v = vec![BigInt::zero(); n0];
            v.extend(k1.gram().col(j).into_iter().map(|x| -x));
            v
        },
        n1,
    )?;
    Ok(Glued { kappa, i0, i1 })
}

fn integral(v: &BigRational, what: &str) -> Result<BigInt> {
    if v.is_integer() {
        Ok(v.to_integer())
    } else {
        Err(Error::Inconsistent(alloc::format!("{what} has a non-integral entry {v}")))
    }
}

/// Output of [`split`]: `κ₀ = κ|H₀`, `κ₁ = (κ|H₀^⊥)⁻` and the boundary isometry θ.
#[derive(Clone, Debug)]
pub struct Split {
    pub k0: QuadraticFunction,
    pub k1: QuadraticFunction,
    /// Basis of H₀^⊥ used for `k1`.
    pub h1_basis: IntMatrix,
    pub theta: GroupHom,
}

pub fn split(k: &QuadraticFunction, h0_basis: &IntMatrix) -> Result<Split> {
    let h1_basis = kernel_basis(&(&h0_basis.transpose() * k.gram()));
    split_with(k, h0_basis, &h1_basis)
}

/// [`split`] with a caller-chosen basis of `H₀^⊥`; θ is expressed in that basis.
pub fn split_with(k: &QuadraticFunction, h0_basis: &IntMatrix, h1_basis: &IntMatrix) -> Result<Split> {
    if !k.is_nonsingular() {
        return Err(Error::Degenerate("splitting needs a nonsingular quadratic function"));
    }
    if h0_basis.rows() != k.rank() || !is_saturated(h0_basis) {
        return Err(Error::Invalid("the given basis does not span a direct summand".into()));
    }
    let k0 = k.restrict(h0_basis);
    if !k0.is_nondegenerate() {
        return Err(Error::Degenerate("restriction to H₀ is degenerate"));
    }
    let b0t = h0_basis.transpose();
    if h1_basis.rows() != k.rank()
        || h1_basis.cols() + h0_basis.cols() != k.rank()
        || !(&b0t * &(k.gram() * h1_basis)).is_zero()
        || !is_saturated(h1_basis)
    {
        return Err(Error::Invalid("complement basis does not span the orthogonal complement".into()));
    }
    let k1 = k.restrict(h1_basis).reverse();
    let (bd0, bd1, q0, q1) = boundary_refinements(&k0, &k1)?;
    let mut images = Vec::with_capacity(bd0.group().ngens());
    let b1t = h1_basis.transpose();
    for j in 0..bd0.group().ngens() {
        let y = solve_integer(&b0t, &bd0.lift(j))
            .ok_or_else(|| Error::Inconsistent("functional on H₀ does not extend".into()))?;
        images.push(bd1.class_of(&b1t.mul_vec(&y)));
    }
    let theta = GroupHom::from_images(bd0.group().clone(), bd1.group().clone(), &images)?;
    if !boundary_isometry(&q0, &q1, &theta) {
        return Err(Error::Inconsistent("split map is not a boundary isometry".into()));
    }
    Ok(Split {
        k0,
        k1,
        h1_basis: h1_basis.clone(),
        theta,
    })
}

/// Verdict of [`crate::family::stably_equivalent`].
#[derive(Clone, Debug)]
pub struct StableVerdict {
    pub equivalent: bool,
    /// The glued nonsingular function `κ₀(Ψ₀) ∪_θ κ₁(Ψ₁')⁻` when equivalent.
    pub witness: Option<QuadraticFunction>,
}

/// Characteristic-element phase invariant at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sigma {
    Value(u8),
    Infinity,
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::Value(v) => write!(f, "{v}"),
            Sigma::Infinity => write!(f, "inf"),
        }
    }
}

/// Ranks per `(p, k)`, 2-primary phases and characteristic flags per level, and the
/// Legendre symbol of the level determinant for odd primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct KKInvariants {
    pub ranks: BTreeMap<(u64, u32), usize>,
    pub sigma: BTreeMap<u32, Sigma>,
    pub char_nonzero: BTreeMap<u32, bool>,
    pub odd_discriminant: BTreeMap<(u64, u32), i8>,
}

fn level_indices(g: &FinAbGroup, p: u64, k: u32) -> Vec<usize> {
    (0..g.torsion_rank()).filter(|&i| g.orders()[i] == p.pow(k)).collect()
}

/// The matrix of `p^{k-1}·b` on the level-k generators, as residues mod p.
fn level_matrix(b: &LinkingForm, idx: &[usize], p: u64, k: u32) -> Vec<Vec<u64>> {
    let scale = p.pow(k - 1) as i128;
    idx.iter()
        .map(|&i| {
            idx.iter()
                .map(|&j| {
                    let v = b.gram()[i][j].mul_int(scale);
                    debug_assert!(p.is_multiple_of(v.denominator()));
                    v.over(p)
                })
                .collect()
        })
        .collect()
}

fn det_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = m.len();
    let mut det: u64 = 1;
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !m[r][c].is_multiple_of(p)) else { return 0 };
        if r != c {
            m.swap(r, c);
            det = (p - det) % p;
        }
        let piv = m[c][c];
        det = det * piv % p;
        let inv = mod_inv(piv as i128, p).expect("unit pivot");
        for r in c + 1..n {
            let f = m[r][c] * inv % p;
            for j in c..n {
                m[r][j] = (m[r][j] + p * p - f * m[c][j] % p) % p;
            }
        }
    }
    det
}

pub fn kk_invariants(b: &LinkingForm, cap: u64) -> Result<KKInvariants> {
    let g = b.group();
    if g.torsion_order() > cap {
        return Err(Error::CapExceeded {
            size: g.torsion_order(),
            cap,
        });
    }
    let mut inv = KKInvariants::default();
    for i in 0..g.torsion_rank() {
        let (p, k) = prime_power(g.orders()[i]).expect("prime power");
        *inv.ranks.entry((p, k)).or_insert(0) += 1;
    }
    for (&(p, k), _) in inv.ranks.clone().iter().filter(|((p, _), _)| *p != 2) {
        let idx = level_indices(g, p, k);
        let d = det_mod_p(level_matrix(b, &idx, p, k), p);
        if d == 0 {
            return Err(Error::Inconsistent("singular level form at an odd prime".into()));
        }
        inv.odd_discriminant.insert((p, k), legendre(d as i128, p));
    }
    let two: Vec<usize> = g.prime_indices(2);
    let max_k = two.iter().map(|&i| g.orders()[i].trailing_zeros()).max().unwrap_or(0);
    for k in 1..=max_k {
        let idx = level_indices(g, 2, k);
        let m = level_matrix(b, &idx, 2, k);
        let char_nonzero = (0..idx.len()).any(|i| m[i][i] == 1);
        inv.char_nonzero.insert(k, char_nonzero);
        let sigma = if char_nonzero { Sigma::Infinity } else { Sigma::Value(level_phase(b, &two, k)?) };
        inv.sigma.insert(k, sigma);
    }
    Ok(inv)
}

/// Phase of `Σ exp(2πi·2^{k-1}b(x,x))` over representatives of `G₂/Ḡ^k`, in eighths.
fn level_phase(b: &LinkingForm, two: &[usize], k: u32) -> Result<u8> {
    let g = b.group();
    let high: Vec<(usize, u64)> = two
        .iter()
        .filter_map(|&i| {
            let ki = g.orders()[i].trailing_zeros();
            (ki > k).then(|| (i, 1u64 << (ki - k)))
        })
        .collect();
    let scale = 1i128 << (k - 1);
    let d = b.exponent();
    let mut counts = vec![0u64; d as usize];
    let mut coords = vec![0u64; high.len()];
    loop {
        let mut x = g.zero();
        for (c, &(i, _)) in coords.iter().zip(&high) {
            x[i] = *c as i64;
        }
        let v = b.pair(&x, &x).mul_int(scale);
        counts[v.over(d) as usize] += 1;
        let mut pos = 0;
        loop {
            if pos == high.len() {
                let (re, im) = phase_sum(&counts, d);
                if libm::sqrt(re * re + im * im) < 1e-6 {
                    return Err(Error::Inconsistent(alloc::format!("GS_{k} vanished")));
                }
                let s = snap_argument(re, im, 8)?;
                return Ok(s.over(8) as u8);
            }
            coords[pos] += 1;
            if coords[pos] < high[pos].1 {
                break;
            }
            coords[pos] = 0;
            pos += 1;
        }
    }
}

/// Isometry of linking forms by invariants; with `cross_validate` the verdict is also checked
/// by exhaustive search and a disagreement is reported as an error.
pub fn linking_forms_isometric(b0: &LinkingForm, b1: &LinkingForm, cap: u64, cross_validate: bool) -> Result<bool> {
    let verdict = b0.group().orders() == b1.group().orders() && kk_invariants(b0, cap)? == kk_invariants(b1, cap)?;
    if cross_validate {
        let brute = brute_isometry_linking(b0, b1, cap)?.is_some();
        if brute != verdict {
            return Err(Error::Inconsistent(alloc::format!(
                "invariants say {verdict} but exhaustive search says {brute} for {b0} and {b1}"
            )));
        }
    }
    Ok(verdict)
}

/// Isometry of refinements: equal K and isometric Wilkens pairs.
pub fn qlf_isometric(q0: &QuadraticLinkingFunction, q1: &QuadraticLinkingFunction, cap: u64) -> Result<bool> {
    if q0.group().orders() != q1.group().orders() {
        return Ok(false);
    }
    if gauss_invariant(q0, cap)?.k != gauss_invariant(q1, cap)?.k {
        return Ok(false);
    }
    Ok(brute_isometry_wilkens(&q0.wilkens_data(), &q1.wilkens_data(), cap)?.is_some())
}

/// Names of the indecomposable generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorName {
    /// `A_p^k(n)`: `b(e,e) = n/p^k`.
    A { p: u64, k: u32, n: i64 },
    /// `E^{k,0}`.
    E0 { k: u32 },
    /// `E^{k,1}`, `k ≥ 2`.
    E1 { k: u32 },
}

impl GeneratorName {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorName::A { p, k, n } => {
                if k == 0 || prime_power(p) != Some((p, 1)) {
                    return Err(Error::Invalid(alloc::format!("A({p},{k},{n}) needs a prime p and k ≥ 1")));
                }
                if gcd_u64(n.unsigned_abs(), p) != 1 {
                    return Err(Error::Invalid(alloc::format!("A({p},{k},{n}): n must be a unit mod {p}")));
                }
            }
            GeneratorName::E0 { k: 0 } => return Err(Error::Invalid("E0 needs k ≥ 1".into())),
            GeneratorName::E1 { k } if k < 2 => return Err(Error::Invalid("E1 needs k ≥ 2".into())),
            _ => {}
        }
        Ok(())
    }

    /// The parameters listed in the presentation of the 2-primary semigroup.
    pub fn legal_units(k: u32) -> &'static [i64] {
        match k {
            1 => &[1],
            2 => &[1, -1],
            _ => &[1, -1, 5, -5],
        }
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorName::A { p, k, n } => write!(f, "A({p},{k},{n})"),
            GeneratorName::E0 { k } => write!(f, "E0({k})"),
            GeneratorName::E1 { k } => write!(f, "E1({k})"),
        }
    }
}

impl FromStr for GeneratorName {
    type Err = Error;

    /// Parses `A(p,k,n)`, `E0(k)` or `E1(k)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(alloc::format!("bad generator name {s:?}; expected A(p,k,n), E0(k) or E1(k)"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let head = &s[..open];
        let args: Vec<i64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let name = match (head, args.as_slice()) {
            ("A", &[p, k, n]) if p > 0 && k > 0 => GeneratorName::A {
                p: p as u64,
                k: k as u32,
                n,
            },
            ("E0", &[k]) if k > 0 => GeneratorName::E0 { k: k as u32 },
            ("E1", &[k]) if k > 0 => GeneratorName::E1 { k: k as u32 },
            _ => return Err(bad()),
        };
        name.validate()?;
        Ok(name)
    }
}

/// The named refinement: `q(e) = n/2^{k+1}` for 2-primary A, the homogeneous refinement for odd
/// A, `q = 0` on the basis of `E^{k,0}` and `q(eᵢ) = 2^{-k}` on the basis of `E^{k,1}`.
/// An optional translation is applied afterwards.
pub fn generator_catalog(name: GeneratorName, refine: Option<&[i64]>) -> Result<QuadraticLinkingFunction> {
    name.validate()?;
    let q = match name {
        GeneratorName::A { p, k, n } => {
            let o = p.pow(k);
            let b = LinkingForm::new(FinAbGroup::new(vec![o], 0)?, vec![vec![RationalModZ::new(n as i128, o as i128)]])?;
            if p == 2 {
                QuadraticLinkingFunction::new(b, vec![RationalModZ::new(n as i128, 2 * o as i128)])?
            } else {
                homogeneous_refinement(&b)
            }
        }
        GeneratorName::E0 { k } => {
            let o = 1i128 << k;
            let off = RationalModZ::new(1, o);
            let b = LinkingForm::new(
                FinAbGroup::new(vec![o as u64; 2], 0)?,
                vec![vec![RationalModZ::ZERO, off], vec![off, RationalModZ::ZERO]],
            )?;
            QuadraticLinkingFunction::new(b, vec![RationalModZ::ZERO; 2])?
        }
        GeneratorName::E1 { k } => {
            let o = 1i128 << k;
            let off = RationalModZ::new(1, o);
            let diag = RationalModZ::new(2, o);
            let b = LinkingForm::new(FinAbGroup::new(vec![o as u64; 2], 0)?, vec![vec![diag, off], vec![off, diag]])?;
            QuadraticLinkingFunction::new(b, vec![off; 2])?
        }
    };
    Ok(match refine {
        Some(a) => {
            if a.len() != q.group().ngens() {
                return Err(Error::DimensionMismatch {
                    expected: q.group().ngens(),
                    found: a.len(),
                });
            }
            q.translate(a)
        }
        None => q,
    })
}

/// Ambiguity criterion for an indecomposable pair: groups without 2-torsion are never
/// ambiguous; otherwise `|G| ≤ 4` with `β = 0`, or `|G| > 4` with `β ∉ 4G`.
pub fn is_ambiguous(w: &WilkensData) -> Result<bool> {
    let g = w.b.group();
    let o = g.orders();
    let shape_ok = match o {
        [x] => prime_power(*x).is_some(),
        [x, y] => x == y && x.is_power_of_two(),
        _ => false,
    };
    if !shape_ok {
        return Err(Error::Invalid(alloc::format!("{g} does not carry an indecomposable linking form")));
    }
    if o.len() == 2 && kk_invariants(&w.b, u64::MAX)?.char_nonzero.values().any(|&c| c) {
        return Err(Error::Invalid("linking form splits into cyclic summands".into()));
    }
    if g.torsion_order() % 2 == 1 {
        return Ok(false);
    }
    if g.torsion_order() <= 4 {
        Ok(g.is_zero(&w.beta))
    } else {
        Ok(!g.is_divisible(&w.beta, 4))
    }
}

/// Bounded search for a characteristic quadratic function with a prescribed boundary,
/// caching results per input.
#[derive(Clone, Debug, Default)]
pub struct Realizer {
    pub bounds: Bounds,
    cache: BTreeMap<String, QuadraticFunction>,
}

impl Realizer {
    pub fn new(bounds: Bounds) -> Self {
        Realizer {
            bounds,
            cache: BTreeMap::new(),
        }
    }

    /// Fills the cache with every catalog generator of exponent at most `2^max_k`.
    pub fn with_catalog(bounds: Bounds, max_k: u32) -> Result<Self> {
        let mut r = Self::new(bounds);
        for k in 1..=max_k {
            for &n in GeneratorName::legal_units(k) {
                r.realize(&generator_catalog(GeneratorName::A { p: 2, k, n }, None)?)?;
            }
            r.realize(&generator_catalog(GeneratorName::E0 { k }, None)?)?;
            if k >= 2 {
                r.realize(&generator_catalog(GeneratorName::E1 { k }, None)?)?;
            }
        }
        Ok(r)
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Searches even Grams by rank, then entry bound, with α = 2·lift(a) for a translation a.
    pub fn realize(&mut self, q: &QuadraticLinkingFunction) -> Result<QuadraticFunction> {
        let key = q.to_string();
        if let Some(k) = self.cache.get(&key) {
            return Ok(k.clone());
        }
        let k = realize_uncached(q, &self.bounds)?;
        self.cache.insert(key, k.clone());
        Ok(k)
    }
}

pub fn realize(q: &QuadraticLinkingFunction, bounds: &Bounds) -> Result<QuadraticFunction> {
    realize_uncached(q, bounds)
}

fn realize_uncached(q: &QuadraticLinkingFunction, bounds: &Bounds) -> Result<QuadraticFunction> {
    let g = q.group();
    let size = g.torsion_order();
    if size > bounds.oracle_cap {
        return Err(Error::CapExceeded {
            size,
            cap: bounds.oracle_cap,
        });
    }
    if size == 1 {
        return Ok(QuadraticFunction::empty());
    }
    let factors = g.primes().iter().map(|&p| g.prime_indices(p).len()).max().unwrap_or(0);
    for rank in factors..=bounds.rank_bound {
        for bound in 1..=bounds.entry_bound {
            if let Some(k) = search_rank(q, rank, bound, bounds.oracle_cap)? {
                return Ok(k);
            }
        }
    }
    Err(Error::NotFound)
}

fn entry_values(bound: i64, even: bool) -> Vec<i64> {
    let mut v = vec![0];
    for x in 1..=bound {
        if !even || x % 2 == 0 {
            v.push(x);
            v.push(-x);
        }
    }
    v
}

fn search_rank(q: &QuadraticLinkingFunction, rank: usize, bound: i64, cap: u64) -> Result<Option<QuadraticFunction>> {
    let slots: Vec<(usize, usize)> = (0..rank).flat_map(|i| (i..rank).map(move |j| (i, j))).collect();
    let values: Vec<Vec<i64>> = slots.iter().map(|&(i, j)| entry_values(bound, i == j)).collect();
    let target = q.group().torsion_order() as i128;
    let mut counter = vec![0usize; slots.len()];
    let mut m = vec![vec![0i64; rank]; rank];
    loop {
        for (s, &(i, j)) in slots.iter().enumerate() {
            m[i][j] = values[s][counter[s]];
            m[j][i] = m[i][j];
        }
        let top = m.iter().flatten().map(|x| x.abs()).max().unwrap_or(0);
        if top == bound && small_det(&m).abs() == target {
            if let Some(k) = try_gram(q, &m, cap)? {
                return Ok(Some(k));
            }
        }
        let mut s = slots.len();
        loop {
            if s == 0 {
                return Ok(None);
            }
            s -= 1;
            counter[s] += 1;
            if counter[s] < values[s].len() {
                break;
            }
            counter[s] = 0;
        }
    }
}

fn small_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else { return 0 };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * if n == 0 { 1 } else { a[n - 1][n - 1] }
}

fn try_gram(q: &QuadraticLinkingFunction, m: &[Vec<i64>], cap: u64) -> Result<Option<QuadraticFunction>> {
    let rank = m.len();
    let kappa = QuadraticFunction::new(IntMatrix::from_rows(m), vec![BigInt::zero(); rank])?;
    let bd = Boundary::new(&kappa)?;
    if bd.group().orders() != q.group().orders() || brute_isometry_linking(q.base(), &bd.b, cap)?.is_none() {
        return Ok(None);
    }
    let qev = bd.even()?;
    for a in bd.group().elements(cap)? {
        if brute_isometry(q, &qev.translate(&a), cap)?.is_some() {
            let mut alpha = vec![BigInt::zero(); rank];
            for (j, &c) in a.iter().enumerate() {
                for (x, l) in alpha.iter_mut().zip(bd.lift(j)) {
                    *x += BigInt::from(2 * c) * l;
                }
            }
            return Ok(Some(QuadraticFunction::new(kappa.gram().clone(), alpha)?));
        }
    }
    Ok(None)
}

/// `θ(x)` for a homomorphism given by images, used by callers holding raw image lists.
pub fn apply_images(target: &FinAbGroup, images: &[Element], x: &[i64]) -> Element {
    let mut y = target.zero();
    for (c, img) in x.iter().zip(images) {
        y = target.add(&y, &target.scale(img, *c));
    }
    y
}

/// `q(a)` for every `a`, used to pick translations with a given K shift.
pub fn translation_values(q: &QuadraticLinkingFunction, cap: u64) -> Result<Vec<(Element, RationalModZ)>> {
    Ok(q.group().elements(cap)?.into_iter().map(|a| {
        let v = q.evaluate(&a);
        (a, v)
    }).collect())
}
