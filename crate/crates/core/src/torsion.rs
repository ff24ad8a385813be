//! Linking forms and quadratic linking functions on finite abelian groups.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::arith::{binom2, factor, gcd_u64, mod_inv};
use crate::error::{Error, Result};
use crate::group::{cokernel_full, Cokernel, Element, FinAbGroup, GroupHom};
use crate::matrix::IntMatrix;
use crate::snf::smith_normal_form;
use crate::qform::{signature, split_by_section, InversePairing, QuadraticFunction};
use crate::ratmod::{mod_one, RationalModZ};

/// Largest group on which nonsingularity is verified by enumeration.
pub const NONSINGULARITY_CAP: u64 = 1 << 12;

/// A symmetric bilinear form `b: G × G → Q/Z` on a finite group, stored on the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkingForm {
    group: FinAbGroup,
    gram: Vec<Vec<RationalModZ>>,
    exp: u64,
    nums: Vec<Vec<u64>>,
}

impl LinkingForm {
    /// Validates symmetry, denominators and nonsingularity.
    pub fn new(group: FinAbGroup, gram: Vec<Vec<RationalModZ>>) -> Result<Self> {
        let b = Self::bilinear(group, gram)?;
        if !b.is_nonsingular(NONSINGULARITY_CAP)? {
            return Err(Error::Invalid("linking form is singular".into()));
        }
        Ok(b)
    }

    /// Validates everything except nonsingularity.
    pub fn bilinear(group: FinAbGroup, gram: Vec<Vec<RationalModZ>>) -> Result<Self> {
        if group.free_rank() > 0 {
            return Err(Error::Invalid("linking forms live on finite groups".into()));
        }
        let n = group.ngens();
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gram.len(),
            });
        }
        let o = group.orders();
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Invalid("linking form is not symmetric".into()));
                }
                if !gcd_u64(o[i], o[j]).is_multiple_of(gram[i][j].denominator()) {
                    return Err(Error::Invalid(alloc::format!(
                        "entry ({i},{j}) = {} is not defined on Z/{} x Z/{}",
                        gram[i][j],
                        o[i],
                        o[j]
                    )));
                }
            }
        }
        Ok(Self::build(group, gram))
    }

    fn build(group: FinAbGroup, gram: Vec<Vec<RationalModZ>>) -> Self {
        let exp = group.exponent();
        let nums = gram.iter().map(|r| r.iter().map(|x| x.over(exp)).collect()).collect();
        LinkingForm { group, gram, exp, nums }
    }

    pub fn trivial() -> Self {
        Self::build(FinAbGroup::trivial(), Vec::new())
    }

    /// A form on arbitrary cyclic factors, rewritten on the primary generators
    /// `(n/p^k)·eᵢ` of each factor.
    pub fn from_presentation(orders: &[u64], gram: &[Vec<RationalModZ>]) -> Result<Self> {
        let (group, coefs) = primary_generators(orders);
        let n = coefs.len();
        if gram.len() != orders.len() || gram.iter().any(|r| r.len() != orders.len()) {
            return Err(Error::DimensionMismatch {
                expected: orders.len(),
                found: gram.len(),
            });
        }
        let mut g = vec![vec![RationalModZ::ZERO; n]; n];
        for (a, &(i, ca)) in coefs.iter().enumerate() {
            for (b, &(j, cb)) in coefs.iter().enumerate() {
                g[a][b] = gram[i][j].mul_int(ca as i128 * cb as i128);
            }
        }
        Self::new(group, g)
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn gram(&self) -> &[Vec<RationalModZ>] {
        &self.gram
    }

    pub fn order(&self) -> u64 {
        self.group.torsion_order()
    }

    /// Common denominator of all values: the exponent of the group.
    pub fn exponent(&self) -> u64 {
        self.exp
    }

    /// `b(x, y)` as a numerator over [`Self::exponent`].
    pub fn pair_num(&self, x: &[i64], y: &[i64]) -> u64 {
        let e = self.exp as i128;
        let mut s: i128 = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let mut t: i128 = 0;
            for (j, &yj) in y.iter().enumerate() {
                t += yj as i128 * self.nums[i][j] as i128;
            }
            s = (s + xi as i128 * (t % e)) % e;
        }
        s.rem_euclid(e) as u64
    }

    pub fn pair(&self, x: &[i64], y: &[i64]) -> RationalModZ {
        RationalModZ::new(self.pair_num(x, y) as i128, self.exp as i128)
    }

    /// Adjoint `G → Hom(G, Q/Z)` is injective. Checked on all elements up to `cap`, through the
    /// Smith form of the adjoint presentation beyond it.
    pub fn is_nonsingular(&self, cap: u64) -> Result<bool> {
        let n = self.group.ngens();
        if self.group.torsion_order() > cap {
            return Ok(self.adjoint_is_onto());
        }
        let elems = self.group.elements(cap)?;
        for y in elems.iter().skip(1) {
            let hits = (0..n).any(|i| {
                let t: i128 = y.iter().enumerate().map(|(j, &c)| c as i128 * self.nums[i][j] as i128).sum();
                t.rem_euclid(self.exp as i128) != 0
            });
            if !hits {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `x ↦ (oⱼ·b(x, eⱼ))ⱼ` together with the relations `oⱼ·eⱼ` spans `Z^n`.
    fn adjoint_is_onto(&self) -> bool {
        let n = self.group.ngens();
        let o = self.group.orders();
        let mut m = IntMatrix::zeros(n, 2 * n);
        for j in 0..n {
            for i in 0..n {
                m[(j, i)] = BigInt::from(self.gram[i][j].numerator()) * BigInt::from(o[j] / self.gram[i][j].denominator());
            }
            m[(j, n + j)] = BigInt::from(o[j]);
        }
        let d = smith_normal_form(&m).diagonal();
        d.len() == n && d.iter().all(|x| x.is_one())
    }

    pub fn negate(&self) -> Self {
        let gram = self.gram.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
        Self::build(self.group.clone(), gram)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (group, i0, i1) = self.group.direct_sum(&other.group);
        let n = group.ngens();
        let mut g = vec![vec![RationalModZ::ZERO; n]; n];
        for (a, &ia) in i0.iter().enumerate() {
            for (b, &ib) in i0.iter().enumerate() {
                g[ia][ib] = self.gram[a][b];
            }
        }
        for (a, &ia) in i1.iter().enumerate() {
            for (b, &ib) in i1.iter().enumerate() {
                g[ia][ib] = other.gram[a][b];
            }
        }
        Self::build(group, g)
    }

    /// Restriction to the subgroup spanned by the listed generators.
    pub fn restrict_generators(&self, idx: &[usize]) -> Self {
        let orders = idx.iter().map(|&i| self.group.orders()[i]).collect();
        let group = FinAbGroup::new(orders, 0).expect("subsequence of a normalized sequence");
        let gram = idx.iter().map(|&i| idx.iter().map(|&j| self.gram[i][j]).collect()).collect();
        Self::build(group, gram)
    }

    /// Pulls back along a homomorphism into this form's group.
    pub fn pullback(&self, h: &GroupHom) -> Self {
        let imgs = h.images();
        let gram = imgs.iter().map(|x| imgs.iter().map(|y| self.pair(x, y)).collect()).collect();
        Self::build(h.source().clone(), gram)
    }
}

impl fmt::Display for LinkingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b on {} = [", self.group)?;
        for (i, r) in self.gram.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

/// Primary generators of `⊕ Z/nᵢ`: the normalized group and, per generator, the
/// source factor and the coefficient `nᵢ/p^k`.
fn primary_generators(orders: &[u64]) -> (FinAbGroup, Vec<(usize, u64)>) {
    let mut keys: Vec<(u64, u32, usize, u64)> = Vec::new();
    for (i, &n) in orders.iter().enumerate() {
        for (p, k) in factor(n) {
            keys.push((p, k, i, n / p.pow(k)));
        }
    }
    keys.sort();
    let group = FinAbGroup::new(keys.iter().map(|&(p, k, _, _)| p.pow(k)).collect(), 0).expect("normalized");
    (group, keys.iter().map(|&(_, _, i, c)| (i, c)).collect())
}

/// Coordinates on the primary generators of an element given on arbitrary cyclic factors.
pub fn primary_coordinates(orders: &[u64], x: &[i64]) -> Element {
    let (group, coefs) = primary_generators(orders);
    coefs
        .iter()
        .zip(group.orders())
        .map(|(&(i, c), &o)| {
            let inv = mod_inv(c as i128, o).expect("cofactor is a unit");
            ((x[i] as i128).rem_euclid(o as i128) * inv as i128 % o as i128) as i64
        })
        .collect()
}

/// A quadratic refinement `q` of a linking form, stored by its values on the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticLinkingFunction {
    base: LinkingForm,
    gen_values: Vec<RationalModZ>,
    qnums: Vec<u64>,
}

impl QuadraticLinkingFunction {
    pub fn new(base: LinkingForm, gen_values: Vec<RationalModZ>) -> Result<Self> {
        let n = base.group.ngens();
        if gen_values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gen_values.len(),
            });
        }
        let d = 2 * base.exp;
        for (i, v) in gen_values.iter().enumerate() {
            let o = base.group.orders()[i];
            if !(2 * o).is_multiple_of(v.denominator()) {
                return Err(Error::Invalid(alloc::format!("q(g{i}) = {v} has the wrong denominator")));
            }
            let lhs = v.mul_int(o as i128) + base.gram[i][i].mul_int(binom2(o as i128));
            if !lhs.is_zero() {
                return Err(Error::Invalid(alloc::format!("q is not well defined on generator {i}")));
            }
        }
        let qnums = gen_values.iter().map(|v| v.over(d)).collect();
        Ok(QuadraticLinkingFunction {
            base,
            gen_values,
            qnums,
        })
    }

    /// A function on arbitrary cyclic factors, rewritten on primary generators.
    pub fn from_presentation(orders: &[u64], gram: &[Vec<RationalModZ>], values: &[RationalModZ]) -> Result<Self> {
        let base = LinkingForm::from_presentation(orders, gram)?;
        if values.len() != orders.len() {
            return Err(Error::DimensionMismatch {
                expected: orders.len(),
                found: values.len(),
            });
        }
        let (_, coefs) = primary_generators(orders);
        let gv = coefs
            .iter()
            .map(|&(i, c)| values[i].mul_int(c as i128) + gram[i][i].mul_int(binom2(c as i128)))
            .collect();
        Self::new(base, gv)
    }

    pub fn trivial() -> Self {
        QuadraticLinkingFunction {
            base: LinkingForm::trivial(),
            gen_values: Vec::new(),
            qnums: Vec::new(),
        }
    }

    pub fn base(&self) -> &LinkingForm {
        &self.base
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.base.group
    }

    pub fn gen_values(&self) -> &[RationalModZ] {
        &self.gen_values
    }

    /// Common denominator of all values, twice the exponent.
    pub fn denominator(&self) -> u64 {
        2 * self.base.exp
    }

    /// `q(x)` as a numerator over [`Self::denominator`].
    pub fn value_num(&self, x: &[i64]) -> u64 {
        let d = self.denominator() as i128;
        let nums = &self.base.nums;
        let mut s: i128 = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let xi = xi as i128;
            s += xi * self.qnums[i] as i128 + binom2(xi) % d * (2 * nums[i][i] as i128);
            for (j, &xj) in x.iter().enumerate().skip(i + 1) {
                s += (xi * xj as i128) % d * (2 * nums[i][j] as i128);
            }
            s %= d;
        }
        s.rem_euclid(d) as u64
    }

    pub fn evaluate(&self, x: &[i64]) -> RationalModZ {
        RationalModZ::new(self.value_num(x) as i128, self.denominator() as i128)
    }

    /// Value numerators of every element, in index order.
    pub fn values(&self, cap: u64) -> Result<Vec<u64>> {
        Ok(self.group().elements(cap)?.iter().map(|x| self.value_num(x)).collect())
    }

    /// `q_a(x) = q(x) + b(x, a)`.
    pub fn translate(&self, a: &[i64]) -> Self {
        let gv = (0..self.group().ngens())
            .map(|i| self.gen_values[i] + self.base.pair(&self.group().generator(i), a))
            .collect();
        Self::new(self.base.clone(), gv).expect("translates stay well defined")
    }

    /// `-q`, refining `-b`.
    pub fn negate(&self) -> Self {
        Self::new(self.base.negate(), self.gen_values.iter().map(|&v| -v).collect()).expect("well defined")
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let base = self.base.direct_sum(&other.base);
        let (_, i0, i1) = self.group().direct_sum(other.group());
        let mut gv = vec![RationalModZ::ZERO; base.group.ngens()];
        for (a, &i) in i0.iter().enumerate() {
            gv[i] = self.gen_values[a];
        }
        for (a, &i) in i1.iter().enumerate() {
            gv[i] = other.gen_values[a];
        }
        Self::new(base, gv).expect("well defined")
    }

    pub fn restrict_generators(&self, idx: &[usize]) -> Self {
        let base = self.base.restrict_generators(idx);
        Self::new(base, idx.iter().map(|&i| self.gen_values[i]).collect()).expect("well defined")
    }

    /// `q ∘ h` for a homomorphism `h` into this function's group.
    pub fn pullback(&self, h: &GroupHom) -> Result<Self> {
        let gv = h.images().iter().map(|x| self.evaluate(x)).collect();
        Self::new(self.base.pullback(h), gv)
    }

    /// Whether `q(-x) = q(x)` for all `x`, by enumeration.
    pub fn is_homogeneous(&self, cap: u64) -> Result<bool> {
        let g = self.group();
        Ok(g.elements(cap)?.iter().all(|x| self.value_num(x) == self.value_num(&g.scale(x, -1))))
    }

    pub fn wilkens_data(&self) -> WilkensData {
        wilkens_data(self)
    }
}

impl fmt::Display for QuadraticLinkingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, q = [", self.base)?;
        for (i, v) in self.gen_values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// The refinement with `2q(g) = b(g,g)` on every generator: the odd-denominator root on odd
/// generators and the root below 1/2 on 2-power generators.
pub fn homogeneous_refinement(b: &LinkingForm) -> QuadraticLinkingFunction {
    let gv = (0..b.group.ngens())
        .map(|i| {
            let o = b.group.orders()[i] as i128;
            let bii = b.gram[i][i];
            let num = bii.over(o as u64) as i128;
            if o % 2 == 1 {
                RationalModZ::new(num * ((o + 1) / 2), o)
            } else {
                RationalModZ::new(num, 2 * o)
            }
        })
        .collect();
    QuadraticLinkingFunction::new(b.clone(), gv).expect("homogeneous refinement is well defined")
}

/// Every quadratic refinement of `b`, as translates of the homogeneous one in element order.
pub fn refinements(b: &LinkingForm, cap: u64) -> Result<Vec<QuadraticLinkingFunction>> {
    let q0 = homogeneous_refinement(b);
    Ok(b.group.elements(cap)?.iter().map(|a| q0.translate(a)).collect())
}

/// Every nonsingular linking form on `group`, in lexicographic order of the upper triangle.
pub fn all_linking_forms(group: &FinAbGroup, cap: u64) -> Result<Vec<LinkingForm>> {
    let o = group.orders();
    let n = o.len();
    let slots: Vec<(usize, usize, u64)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j, gcd_u64(o[i], o[j])))).collect();
    let total = slots.iter().try_fold(1u64, |acc, s| acc.checked_mul(s.2));
    match total {
        Some(t) if t <= cap.saturating_mul(64) => {}
        _ => {
            return Err(Error::CapExceeded {
                size: total.unwrap_or(u64::MAX),
                cap: cap.saturating_mul(64),
            })
        }
    }
    let mut out = Vec::new();
    let mut counter = vec![0u64; slots.len()];
    loop {
        let mut gram = vec![vec![RationalModZ::ZERO; n]; n];
        for (s, &(i, j, d)) in slots.iter().enumerate() {
            let v = RationalModZ::new(counter[s] as i128, d as i128);
            gram[i][j] = v;
            gram[j][i] = v;
        }
        let b = LinkingForm::build(group.clone(), gram);
        if b.is_nonsingular(cap)? {
            out.push(b);
        }
        let mut s = slots.len();
        loop {
            if s == 0 {
                return Ok(out);
            }
            s -= 1;
            counter[s] += 1;
            if counter[s] < slots[s].2 {
                break;
            }
            counter[s] = 0;
        }
    }
}

/// The pair `(b(q), β(q))` with `β(q) = 2a` where `q = q°_a` for a homogeneous `q°`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WilkensData {
    pub b: LinkingForm,
    pub beta: Element,
}

pub fn wilkens_data(q: &QuadraticLinkingFunction) -> WilkensData {
    let b = q.base().clone();
    let g = b.group.clone();
    let q0 = homogeneous_refinement(&b);
    let target: Vec<RationalModZ> = (0..g.ngens()).map(|i| q.gen_values[i] - q0.gen_values[i]).collect();
    let n = g.torsion_order() as usize;
    let a = (0..n)
        .map(|i| g.element_at(i))
        .find(|a| (0..g.ngens()).all(|i| b.pair(&g.generator(i), a) == target[i]))
        .expect("nonsingular forms admit a unique translation");
    WilkensData {
        beta: g.scale(&a, 2),
        b,
    }
}

/// Normalized Gauss sum and its argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussInvariant {
    pub re: f64,
    pub im: f64,
    /// `arg GS / 2π`, exact after snapping.
    pub k: RationalModZ,
}

pub fn gauss_invariant(q: &QuadraticLinkingFunction, cap: u64) -> Result<GaussInvariant> {
    let size = q.group().torsion_order();
    let d = q.denominator();
    let mut counts = vec![0u64; d as usize];
    for v in q.values(cap)? {
        counts[v as usize] += 1;
    }
    let (re, im) = phase_sum(&counts, d);
    let norm = libm::sqrt(size as f64);
    let (re, im) = (re / norm, im / norm);
    let modulus = libm::sqrt(re * re + im * im);
    if (modulus - 1.0).abs() > 1e-6 {
        return Err(Error::Inconsistent(alloc::format!("|GS| = {modulus} for a nonsingular form")));
    }
    let k = snap_argument(re, im, 8 * size)?;
    Ok(GaussInvariant { re, im, k })
}

/// `Σ counts[v]·exp(2πi v/d)`.
pub(crate) fn phase_sum(counts: &[u64], d: u64) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for (v, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let t = 2.0 * core::f64::consts::PI * v as f64 / d as f64;
        re += c as f64 * libm::cos(t);
        im += c as f64 * libm::sin(t);
    }
    (re, im)
}

/// The multiple of `1/denom` nearest to `arg(re + i·im)/2π`.
pub(crate) fn snap_argument(re: f64, im: f64, denom: u64) -> Result<RationalModZ> {
    let turn = libm::atan2(im, re) / (2.0 * core::f64::consts::PI);
    let scaled = turn * denom as f64;
    let m = libm::round(scaled);
    let distance = (scaled - m).abs() / denom as f64;
    if distance > 1e-6 {
        return Err(Error::Snap { distance });
    }
    Ok(RationalModZ::new(m as i128, denom as i128))
}

/// The torsion boundary of a quadratic function, computed on its nondegenerate part.
#[derive(Clone, Debug)]
pub struct Boundary {
    /// Nondegenerate part κ(Ψ), the presentation the boundary is read from.
    pub kappa: QuadraticFunction,
    pub cokernel: Cokernel,
    pub inverse: InversePairing,
    pub b: LinkingForm,
}

impl Boundary {
    pub fn new(k: &QuadraticFunction) -> Result<Self> {
        let (_, kappa) = split_by_section(k);
        let cokernel = cokernel_full(kappa.gram());
        let inverse = InversePairing::new(kappa.gram())?;
        let n = cokernel.group.ngens();
        let lifts: Vec<Vec<BigInt>> = (0..n).map(|j| cokernel.lifts.col(j)).collect();
        let mut gram = vec![vec![RationalModZ::ZERO; n]; n];
        for a in 0..n {
            for c in a..n {
                let v = mod_one(&inverse.pair(&lifts[a], &lifts[c]))?;
                gram[a][c] = v;
                gram[c][a] = v;
            }
        }
        let b = LinkingForm::new(cokernel.group.clone(), gram)?;
        Ok(Boundary {
            kappa,
            cokernel,
            inverse,
            b,
        })
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.cokernel.group
    }

    pub fn lift(&self, j: usize) -> Vec<BigInt> {
        self.cokernel.lifts.col(j)
    }

    /// Class in the boundary group of a covector on the section.
    pub fn class_of(&self, x: &[BigInt]) -> Element {
        let v: Vec<i64> = x.iter().map(|c| c.to_i64().expect("small covector")).collect();
        self.cokernel.projection.apply(&v)
    }

    /// `q^c(x) = (λ⁻¹(x,x) + λ⁻¹(x,α))/2`.
    pub fn characteristic(&self) -> Result<QuadraticLinkingFunction> {
        if !self.kappa.is_characteristic() {
            return Err(Error::Flavor("q^c needs a characteristic quadratic function"));
        }
        let alpha = self.kappa.linear().to_vec();
        self.refine(|x| self.inverse.pair(x, x) + self.inverse.pair(x, &alpha))
    }

    /// `q^ev(x) = λ⁻¹(x,x)/2`.
    pub fn even(&self) -> Result<QuadraticLinkingFunction> {
        if !self.kappa.is_even() {
            return Err(Error::Flavor("q^ev needs an even form"));
        }
        self.refine(|x| self.inverse.pair(x, x))
    }

    /// `q^c` when κ is characteristic, otherwise `q^ev` when λ is even.
    pub fn quadratic(&self) -> Result<QuadraticLinkingFunction> {
        if self.kappa.is_characteristic() {
            self.characteristic()
        } else if self.kappa.is_even() {
            self.even()
        } else {
            Err(Error::Flavor("boundary refinement needs a characteristic or even quadratic function"))
        }
    }

    fn refine(&self, twice: impl Fn(&[BigInt]) -> num_rational::BigRational) -> Result<QuadraticLinkingFunction> {
        let two = num_rational::BigRational::from(BigInt::from(2));
        let gv = (0..self.group().ngens())
            .map(|j| mod_one(&(twice(&self.lift(j)) / &two)))
            .collect::<Result<Vec<_>>>()?;
        QuadraticLinkingFunction::new(self.b.clone(), gv)
    }
}

pub fn boundary_linking_form(k: &QuadraticFunction) -> Result<LinkingForm> {
    Ok(Boundary::new(k)?.b)
}

pub fn boundary_quadratic(k: &QuadraticFunction) -> Result<QuadraticLinkingFunction> {
    Boundary::new(k)?.quadratic()
}

/// `(λ⁻¹(α,α) − σ(λ))/8` for a nondegenerate characteristic κ.
pub fn sbar_from_presentation(k: &QuadraticFunction) -> Result<RationalModZ> {
    mod_one(&sbar_rational(k)?)
}

/// The unreduced rational `(λ⁻¹(α,α) − σ(λ))/8`.
pub fn sbar_rational(k: &QuadraticFunction) -> Result<num_rational::BigRational> {
    if !k.is_nondegenerate() {
        return Err(Error::Degenerate("s̄ needs a nondegenerate presentation"));
    }
    if !k.is_characteristic() {
        return Err(Error::Flavor("s̄ needs a characteristic quadratic function"));
    }
    let inv = InversePairing::new(k.gram())?;
    let a = k.linear();
    let raw = inv.pair(a, a) - num_rational::BigRational::from(BigInt::from(signature(k.gram())));
    Ok(raw / num_rational::BigRational::from(BigInt::from(8)))
}

struct Side<'a> {
    b: &'a LinkingForm,
    q: Option<&'a QuadraticLinkingFunction>,
}

/// Exhaustive search for an isometry `θ: G₀ → G₁` with `b₁(θx, θy) = b₀(x, y)`, also
/// matching `q` when both sides carry one. `accept` filters complete candidates. The identity
/// wins when it qualifies; otherwise images are tried in element order, so the witness is
/// lexicographically least.
fn search(src: Side<'_>, dst: Side<'_>, cap: u64, accept: &mut dyn FnMut(&[Element]) -> bool) -> Result<Option<GroupHom>> {
    let g0 = src.b.group();
    let g1 = dst.b.group();
    for g in [g0, g1] {
        if g.torsion_order() > cap {
            return Err(Error::CapExceeded {
                size: g.torsion_order(),
                cap,
            });
        }
    }
    if g0.orders() != g1.orders() {
        return Ok(None);
    }
    let n = g0.ngens();
    if src.b == dst.b && src.q.map(|q| q.gen_values()) == dst.q.map(|q| q.gen_values()) {
        let id: Vec<Element> = (0..n).map(|i| g0.generator(i)).collect();
        if accept(&id) {
            return Ok(Some(GroupHom::identity(g0)));
        }
    }
    let elems = g1.elements(cap)?;
    let b1 = dst.b;
    let mut cands: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let gi = g0.generator(i);
        let oi = g0.orders()[i];
        let bii = src.b.pair_num(&gi, &gi);
        let qi = src.q.map(|q| q.value_num(&gi));
        let list = elems
            .iter()
            .enumerate()
            .filter(|(_, y)| {
                g1.order_of(y) == Some(oi)
                    && b1.pair_num(y, y) == bii
                    && match (qi, dst.q) {
                        (Some(v), Some(q)) => q.value_num(y) == v,
                        _ => true,
                    }
            })
            .map(|(k, _)| k)
            .collect::<Vec<_>>();
        if list.is_empty() {
            return Ok(None);
        }
        cands.push(list);
    }
    let src_pairs: Vec<Vec<u64>> =
        (0..n).map(|i| (0..n).map(|j| src.b.pair_num(&g0.generator(i), &g0.generator(j))).collect()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let found = dfs(&elems, b1, &cands, &src_pairs, &mut chosen, accept);
    if !found {
        return Ok(None);
    }
    let imgs: Vec<Element> = chosen.iter().map(|&k| elems[k].clone()).collect();
    GroupHom::from_images(g0.clone(), g1.clone(), &imgs).map(Some)
}

fn dfs(
    elems: &[Element],
    b1: &LinkingForm,
    cands: &[Vec<usize>],
    src_pairs: &[Vec<u64>],
    chosen: &mut Vec<usize>,
    accept: &mut dyn FnMut(&[Element]) -> bool,
) -> bool {
    let i = chosen.len();
    if i == cands.len() {
        let imgs: Vec<Element> = chosen.iter().map(|&k| elems[k].clone()).collect();
        return accept(&imgs);
    }
    for &k in &cands[i] {
        let y = &elems[k];
        if chosen.iter().enumerate().all(|(j, &c)| b1.pair_num(&elems[c], y) == src_pairs[j][i]) {
            chosen.push(k);
            if dfs(elems, b1, cands, src_pairs, chosen, accept) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Whether the given θ is an isometry `q₀ → q₁`, that is bijective with `q₁ ∘ θ = q₀`.
pub fn is_isometry(
    q0: &QuadraticLinkingFunction,
    q1: &QuadraticLinkingFunction,
    theta: &GroupHom,
    cap: u64,
) -> Result<bool> {
    if theta.source() != q0.group() || theta.target() != q1.group() {
        return Ok(false);
    }
    if !theta.is_bijective(cap)? {
        return Ok(false);
    }
    let g = q0.group();
    let imgs = theta.images();
    for i in 0..g.ngens() {
        if q1.evaluate(&imgs[i]) != q0.gen_values()[i] {
            return Ok(false);
        }
        for j in i + 1..g.ngens() {
            if q1.base().pair(&imgs[i], &imgs[j]) != q0.base().pair(&g.generator(i), &g.generator(j)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Least isometry `q₀ → q₁` (`q₀ = q₁ ∘ θ`), if any.
pub fn brute_isometry(
    q0: &QuadraticLinkingFunction,
    q1: &QuadraticLinkingFunction,
    cap: u64,
) -> Result<Option<GroupHom>> {
    brute_isometry_with(q0, q1, cap, &mut |_| true)
}

/// As [`brute_isometry`], with an extra condition on the generator images.
pub fn brute_isometry_with(
    q0: &QuadraticLinkingFunction,
    q1: &QuadraticLinkingFunction,
    cap: u64,
    accept: &mut dyn FnMut(&[Element]) -> bool,
) -> Result<Option<GroupHom>> {
    search(
        Side {
            b: q0.base(),
            q: Some(q0),
        },
        Side {
            b: q1.base(),
            q: Some(q1),
        },
        cap,
        accept,
    )
}

pub fn brute_isometry_linking(b0: &LinkingForm, b1: &LinkingForm, cap: u64) -> Result<Option<GroupHom>> {
    brute_isometry_linking_with(b0, b1, cap, &mut |_| true)
}

pub fn brute_isometry_linking_with(
    b0: &LinkingForm,
    b1: &LinkingForm,
    cap: u64,
    accept: &mut dyn FnMut(&[Element]) -> bool,
) -> Result<Option<GroupHom>> {
    search(Side { b: b0, q: None }, Side { b: b1, q: None }, cap, accept)
}

/// Isometry of Wilkens pairs: `b₀ ≅ b₁` through some θ with `θ(β₀) = β₁`.
pub fn brute_isometry_wilkens(w0: &WilkensData, w1: &WilkensData, cap: u64) -> Result<Option<GroupHom>> {
    let g1 = w1.b.group().clone();
    let beta0 = w0.beta.clone();
    let beta1 = w1.beta.clone();
    brute_isometry_linking_with(&w0.b, &w1.b, cap, &mut |imgs| {
        let mut y = g1.zero();
        for (c, img) in beta0.iter().zip(imgs) {
            y = g1.add(&y, &g1.scale(img, *c));
        }
        y == beta1
    })
}

/// Splits along primes; cross terms between distinct primes must vanish.
pub fn primary_decompose(b: &LinkingForm) -> Result<Vec<(u64, LinkingForm)>> {
    check_primary(b)?;
    Ok(b.group.primes().into_iter().map(|p| (p, b.restrict_generators(&b.group.prime_indices(p)))).collect())
}

pub fn primary_decompose_quadratic(q: &QuadraticLinkingFunction) -> Result<Vec<(u64, QuadraticLinkingFunction)>> {
    check_primary(q.base())?;
    let g = q.group();
    Ok(g.primes().into_iter().map(|p| (p, q.restrict_generators(&g.prime_indices(p)))).collect())
}

fn check_primary(b: &LinkingForm) -> Result<()> {
    let g = &b.group;
    for i in 0..g.ngens() {
        for j in 0..g.ngens() {
            if g.prime_of(i) != g.prime_of(j) && !b.gram[i][j].is_zero() {
                return Err(Error::Inconsistent(alloc::format!(
                    "nonzero pairing {} between generators of different primes",
                    b.gram[i][j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> RationalModZ {
        RationalModZ::new(n, d)
    }

    fn cyclic(n: u64, num: i128) -> LinkingForm {
        LinkingForm::from_presentation(&[n], &[vec![r(num, n as i128)]]).unwrap()
    }

    fn e10() -> LinkingForm {
        LinkingForm::new(FinAbGroup::from_cyclic(&[2, 2], 0), vec![vec![r(0, 1), r(1, 2)], vec![r(1, 2), r(0, 1)]])
            .unwrap()
    }

    fn q(g: &[Vec<i64>], a: &[i64]) -> QuadraticFunction {
        QuadraticFunction::from_i64(g, a)
    }

    #[test]
    fn validation() {
        assert!(LinkingForm::new(FinAbGroup::from_cyclic(&[2], 0), vec![vec![r(0, 1)]]).is_err());
        assert!(LinkingForm::new(FinAbGroup::from_cyclic(&[2], 0), vec![vec![r(1, 4)]]).is_err());
        let b = cyclic(2, 1);
        assert!(QuadraticLinkingFunction::new(b.clone(), vec![r(1, 2)]).is_err());
        assert!(QuadraticLinkingFunction::new(b, vec![r(3, 4)]).is_ok());
    }

    #[test]
    fn boundary_examples() {
        let b = boundary_linking_form(&q(&[vec![5]], &[1])).unwrap();
        assert_eq!(b.gram(), &[vec![r(1, 5)]]);
        assert_eq!(boundary_linking_form(&q(&[vec![2, 1], vec![1, 1]], &[0, 0])).unwrap(), LinkingForm::trivial());
        let b = boundary_linking_form(&q(&[vec![2, 0], vec![0, 3]], &[0, 0])).unwrap();
        assert_eq!(b.group().orders(), &[2, 3]);
        assert_eq!(b.gram(), &[vec![r(1, 2), r(0, 1)], vec![r(0, 1), r(1, 3)]]);
        let qc = boundary_quadratic(&q(&[vec![2]], &[0])).unwrap();
        assert_eq!(qc.gen_values(), &[r(1, 4)]);
        let qc = boundary_quadratic(&q(&[vec![2]], &[2])).unwrap();
        assert_eq!(qc.gen_values(), &[r(3, 4)]);
        assert!(boundary_quadratic(&q(&[vec![3]], &[0])).is_err());
        let degenerate = boundary_quadratic(&q(&[vec![2, 0], vec![0, 0]], &[0, 6])).unwrap();
        assert_eq!(degenerate.gen_values(), &[r(1, 4)]);
    }

    #[test]
    fn perturbation_law() {
        for (n, m) in [(8i64, 1i64), (6, 2), (-10, 3), (4, -1)] {
            let k = q(&[vec![n]], &[n + 2 * m]);
            let base = boundary_quadratic(&k).unwrap();
            for eps in [-4i64, 2, 6] {
                let shifted = boundary_quadratic(&q(&[vec![n]], &[n + 2 * m + eps])).unwrap();
                let bd = Boundary::new(&k).unwrap();
                let a = bd.class_of(&[BigInt::from(eps / 2)]);
                assert_eq!(shifted, base.translate(&a));
            }
        }
    }

    #[test]
    fn translation_and_refinement() {
        let q1 = QuadraticLinkingFunction::new(cyclic(2, 1), vec![r(1, 4)]).unwrap();
        assert_eq!(q1.translate(&[0]), q1);
        assert_eq!(q1.translate(&[1]).gen_values(), &[r(3, 4)]);
        let q8 = QuadraticLinkingFunction::new(cyclic(8, 3), vec![r(3, 16)]).unwrap();
        assert_eq!(q8.translate(&[3]).translate(&[5]), q8);
        assert_eq!(homogeneous_refinement(&cyclic(3, 1)).gen_values(), &[r(2, 3)]);
        assert_eq!(homogeneous_refinement(&cyclic(8, 1)).gen_values(), &[r(1, 16)]);
        assert_eq!(homogeneous_refinement(&e10()).gen_values(), &[r(0, 1), r(0, 1)]);
    }

    #[test]
    fn refinement_law_and_homogeneity() {
        let forms = [cyclic(8, 3), cyclic(9, 2), e10(), cyclic(4, 1).direct_sum(&cyclic(3, 1))];
        for b in &forms {
            for qa in refinements(b, 64).unwrap() {
                let g = qa.group();
                let els = g.elements(64).unwrap();
                for x in &els {
                    for y in &els {
                        let lhs = qa.evaluate(&g.add(x, y)) - qa.evaluate(x) - qa.evaluate(y);
                        assert_eq!(lhs, b.pair(x, y));
                    }
                }
                assert_eq!(qa.is_homogeneous(64).unwrap(), g.is_zero(&qa.wilkens_data().beta));
            }
        }
    }

    #[test]
    fn wilkens_examples() {
        let q0 = homogeneous_refinement(&cyclic(8, 5));
        assert_eq!(q0.wilkens_data().beta, vec![0]);
        let w = q0.translate(&[3]).wilkens_data();
        assert_eq!(w.beta, vec![6]);
        let q1e = QuadraticLinkingFunction::new(cyclic(2, 1), vec![r(3, 4)]).unwrap();
        assert_eq!(q1e.wilkens_data().beta, vec![0]);
    }

    #[test]
    fn gauss_examples() {
        let q1 = QuadraticLinkingFunction::new(cyclic(2, 1), vec![r(1, 4)]).unwrap();
        let g = gauss_invariant(&q1, 4096).unwrap();
        assert_eq!(g.k, r(1, 8));
        assert!((g.re - libm::cos(core::f64::consts::PI / 4.0)).abs() < 1e-12);
        assert_eq!(gauss_invariant(&q1.translate(&[1]), 4096).unwrap().k, r(7, 8));
        let base = homogeneous_refinement(&e10());
        let ks: Vec<RationalModZ> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|a| gauss_invariant(&base.translate(a), 4096).unwrap().k)
            .collect();
        assert_eq!(ks, vec![r(0, 1), r(0, 1), r(0, 1), r(1, 2)]);
        let big = homogeneous_refinement(&cyclic(9, 1));
        assert!(matches!(gauss_invariant(&big, 8), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn sbar_examples() {
        assert_eq!(sbar_from_presentation(&q(&[vec![2]], &[0])).unwrap(), r(7, 8));
        assert_eq!(sbar_from_presentation(&q(&[vec![8]], &[10])).unwrap(), r(7, 16));
        assert_eq!(sbar_from_presentation(&q(&[vec![1]], &[1])).unwrap(), r(0, 1));
        assert!(sbar_from_presentation(&q(&[vec![0]], &[0])).is_err());
    }

    #[test]
    fn brute_examples() {
        let base = homogeneous_refinement(&e10());
        let id = brute_isometry(&base, &base, 4096).unwrap().unwrap();
        assert!(crate::group::is_identity_hom(&id));
        let swap = brute_isometry(&base.translate(&[1, 0]), &base.translate(&[0, 1]), 4096).unwrap().unwrap();
        assert_eq!(swap.images(), vec![vec![0, 1], vec![1, 0]]);
        let q1 = QuadraticLinkingFunction::new(cyclic(2, 1), vec![r(1, 4)]).unwrap();
        assert_eq!(brute_isometry(&q1, &q1.translate(&[1]), 4096).unwrap(), None);
        let w0 = homogeneous_refinement(&cyclic(8, 1)).translate(&[1]).wilkens_data();
        let w1 = homogeneous_refinement(&cyclic(8, 1)).translate(&[3]).wilkens_data();
        let t = brute_isometry_wilkens(&w0, &w1, 4096).unwrap().unwrap();
        assert_eq!(t.apply(&w0.beta), w1.beta);
    }

    #[test]
    fn primary_examples() {
        let b = LinkingForm::from_presentation(&[6], &[vec![r(1, 6)]]).unwrap();
        let parts = primary_decompose(&b).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, 2);
        assert_eq!(parts[0].1.gram(), &[vec![r(1, 2)]]);
        // 2e generates the 3-part and b(2e, 2e) = 4/6.
        assert_eq!(parts[1].1.gram(), &[vec![r(2, 3)]]);
        assert_eq!(primary_decompose(&e10()).unwrap().len(), 1);
        assert!(primary_decompose(&LinkingForm::trivial()).unwrap().is_empty());
    }

    #[test]
    fn enumeration() {
        let g = FinAbGroup::from_cyclic(&[2, 2], 0);
        let all = all_linking_forms(&g, 4096).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all_linking_forms(&FinAbGroup::from_cyclic(&[8], 0), 4096).unwrap().len(), 4);
        assert_eq!(refinements(&e10(), 64).unwrap().len(), 4);
    }
}
