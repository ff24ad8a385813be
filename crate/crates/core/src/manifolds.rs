//! Quadratic linking families, manifold descriptors, the four classification decisions and
//! S³-bundles over S⁴.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::arith::gcd_u64;
use crate::classify::{glue, StableVerdict};
use crate::error::{Error, Result};
use crate::group::{Element, FinAbGroup, GroupHom};
use crate::qform::{fundamental_sequence, QuadraticFunction};
use crate::ratmod::{mod_one, RationalModZ};
use crate::torsion::{
    brute_isometry_with, primary_coordinates, sbar_rational, Boundary, LinkingForm, QuadraticLinkingFunction,
};

/// `(G, q*, β)` stored through its value at the canonical section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticLinkingFamily {
    /// Torsion generators first, then `free_rank` free generators.
    pub group: FinAbGroup,
    pub beta: Element,
    pub q_at_section: QuadraticLinkingFunction,
    /// Nonnegative generator of the content of the free part of β (0 when it vanishes).
    pub beta_divisibility: u64,
    /// Whether the refinement is `q^c` (depends on α) rather than `q^ev`.
    pub characteristic: bool,
}

impl QuadraticLinkingFamily {
    pub fn free_rank(&self) -> usize {
        self.group.free_rank()
    }

    pub fn torsion(&self) -> &FinAbGroup {
        self.q_at_section.group()
    }

    pub fn beta_torsion(&self) -> Element {
        self.beta[..self.group.torsion_rank()].to_vec()
    }

    pub fn beta_free(&self) -> Element {
        self.beta[self.group.torsion_rank()..].to_vec()
    }

    /// Family of the reversed presentation: `q ↦ −q`, `b ↦ −b`, β unchanged.
    pub fn reverse(&self) -> Self {
        QuadraticLinkingFamily {
            q_at_section: self.q_at_section.negate(),
            ..self.clone()
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let q = self.q_at_section.direct_sum(&other.q_at_section);
        let (_, i0, i1) = self.torsion().direct_sum(other.torsion());
        let mut beta = q.group().zero();
        for (a, &i) in i0.iter().enumerate() {
            beta[i] = self.beta[a];
        }
        for (a, &i) in i1.iter().enumerate() {
            beta[i] = other.beta[a];
        }
        beta.extend(self.beta_free());
        beta.extend(other.beta_free());
        let group = FinAbGroup::new(q.group().orders().to_vec(), self.free_rank() + other.free_rank())
            .expect("normalized torsion");
        QuadraticLinkingFamily {
            group,
            beta,
            q_at_section: q,
            beta_divisibility: gcd_u64(self.beta_divisibility, other.beta_divisibility),
            characteristic: self.characteristic && other.characteristic,
        }
    }
}

impl fmt::Display for QuadraticLinkingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "G = {}, β = {:?}, q = {{{}}}, divisibility {}",
            self.group, self.beta, self.q_at_section, self.beta_divisibility
        )
    }
}

pub fn family_of(k: &QuadraticFunction) -> Result<QuadraticLinkingFamily> {
    let characteristic = k.is_characteristic();
    if !characteristic && !k.is_even() {
        return Err(Error::Flavor("families need a characteristic or even quadratic function"));
    }
    let fs = fundamental_sequence(k);
    let bd = Boundary::new(k)?;
    let q = if characteristic { bd.characteristic()? } else { bd.even()? };
    let mut beta = bd.class_of(bd.kappa.linear());
    let free: Vec<i64> = fs
        .radical_basis
        .transpose()
        .mul_vec(k.linear())
        .iter()
        .map(|x| x.to_i64().ok_or(Error::Overflow))
        .collect::<Result<_>>()?;
    let divisibility = free.iter().fold(0u64, |g, x| gcd_u64(g, x.unsigned_abs()));
    beta.extend(free.iter().copied());
    let group = FinAbGroup::new(q.group().orders().to_vec(), free.len())?;
    Ok(QuadraticLinkingFamily {
        group,
        beta,
        q_at_section: q,
        beta_divisibility: divisibility,
        characteristic,
    })
}

/// Torsion isometry `θ` and section shift `a` with `q₀ = (q₁)_{r·a} ∘ θ`, where `2r` is the
/// divisibility of the free part of β.
#[derive(Clone, Debug)]
pub struct FamilyIsometry {
    pub theta: GroupHom,
    pub shift: Element,
}

pub fn families_isometric(
    f0: &QuadraticLinkingFamily,
    f1: &QuadraticLinkingFamily,
    cap: u64,
) -> Result<Option<FamilyIsometry>> {
    if f0.free_rank() != f1.free_rank()
        || f0.beta_divisibility != f1.beta_divisibility
        || f0.characteristic != f1.characteristic
    {
        return Ok(None);
    }
    search_shifts(f0, f1, f1.beta_divisibility, cap, true)
}

/// Looks for `a` and `θ` with `q₀ = (q₁)_{(d/2)·a} ∘ θ` and `θ(β₀) = β₁ + d·a` on torsion; with
/// `match_beta` false only the refinements are compared.
fn search_shifts(
    f0: &QuadraticLinkingFamily,
    f1: &QuadraticLinkingFamily,
    d: u64,
    cap: u64,
    match_beta: bool,
) -> Result<Option<FamilyIsometry>> {
    let (q0, q1) = (&f0.q_at_section, &f1.q_at_section);
    if q0.group() != q1.group() {
        return Ok(None);
    }
    let g = q1.group().clone();
    let shifts = if d == 0 { alloc::vec![g.zero()] } else { g.elements(cap)? };
    let beta0 = f0.beta_torsion();
    let mut seen = Vec::new();
    for a in shifts {
        let da = g.scale(&a, d as i64);
        let ha = g.scale(&a, (d / 2) as i64);
        let key = (ha.clone(), da.clone());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let target_q = if f1.characteristic { q1.translate(&ha) } else { q1.clone() };
        let target_beta = g.add(&f1.beta_torsion(), &da);
        let found = brute_isometry_with(q0, &target_q, cap, &mut |imgs| {
            !match_beta || crate::classify::apply_images(&g, imgs, &beta0) == target_beta
        })?;
        if let Some(theta) = found {
            return Ok(Some(FamilyIsometry { theta, shift: a }));
        }
    }
    Ok(None)
}

/// Stable equivalence, decided by the boundary families; the witness glues the nondegenerate
/// parts after moving the second section so the refinements match.
pub fn stably_equivalent(k0: &QuadraticFunction, k1: &QuadraticFunction, cap: u64) -> Result<StableVerdict> {
    if k0.flavor() != k1.flavor() {
        return Err(Error::Invalid(alloc::format!(
            "stable equivalence needs one flavor, got {} and {}",
            k0.flavor(),
            k1.flavor()
        )));
    }
    let (f0, f1) = (family_of(k0)?, family_of(k1)?);
    let Some(iso) = families_isometric(&f0, &f1, cap)? else {
        return Ok(StableVerdict {
            equivalent: false,
            witness: None,
        });
    };
    let bd0 = Boundary::new(k0)?;
    let bd1 = Boundary::new(k1)?;
    let d = BigInt::from(f1.beta_divisibility);
    let mut alpha = bd1.kappa.linear().to_vec();
    for (j, &c) in iso.shift.iter().enumerate() {
        for (x, l) in alpha.iter_mut().zip(bd1.lift(j)) {
            *x += &d * BigInt::from(c) * l;
        }
    }
    let moved = bd1.kappa.with_linear(alpha)?;
    let glued = glue(&bd0.kappa, &moved, &iso.theta)?;
    Ok(StableVerdict {
        equivalent: true,
        witness: Some(glued.kappa),
    })
}

/// Presenting data of a 2-connected 7- or 15-manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldDescriptor {
    pub dim: u32,
    pub presentation: QuadraticFunction,
    pub sigma_p_exotic: bool,
}

impl ManifoldDescriptor {
    pub fn new(dim: u32, presentation: QuadraticFunction, sigma_p_exotic: bool) -> Result<Self> {
        if dim != 7 && dim != 15 {
            return Err(Error::Invalid(alloc::format!("dimension must be 7 or 15, got {dim}")));
        }
        if !presentation.is_characteristic() {
            return Err(Error::Flavor("a presentation must be characteristic"));
        }
        if dim == 7 && sigma_p_exotic {
            return Err(Error::Invalid("the homotopy sphere is standard in dimension 7".into()));
        }
        Ok(ManifoldDescriptor {
            dim,
            presentation,
            sigma_p_exotic,
        })
    }

    pub fn reverse_orientation(&self) -> Self {
        ManifoldDescriptor {
            presentation: self.presentation.reverse(),
            ..self.clone()
        }
    }
}

/// `(G, b, β)` with β in the full group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WilkensTriple {
    pub group: FinAbGroup,
    pub b: LinkingForm,
    pub beta: Element,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldInvariants {
    pub dim: u32,
    pub family: QuadraticLinkingFamily,
    pub triple: WilkensTriple,
    pub sbar: Option<RationalModZ>,
    pub s1: Option<RationalModZ>,
    pub sigma_p_exotic: bool,
}

impl ManifoldInvariants {
    fn from_parts(
        dim: u32,
        family: QuadraticLinkingFamily,
        sbar_raw: Option<BigRational>,
        sigma_p_exotic: bool,
    ) -> Result<Self> {
        let triple = WilkensTriple {
            group: family.group.clone(),
            b: family.q_at_section.base().clone(),
            beta: family.beta.clone(),
        };
        let (sbar, s1) = match sbar_raw {
            Some(x) => {
                let scale = BigRational::from(BigInt::from(bp_order(dim)));
                (Some(mod_one(&x)?), Some(mod_one(&(x / scale))?))
            }
            None => (None, None),
        };
        Ok(ManifoldInvariants {
            dim,
            family,
            triple,
            sbar,
            s1,
            sigma_p_exotic,
        })
    }

    pub fn reverse(&self) -> Self {
        ManifoldInvariants {
            family: self.family.reverse(),
            triple: WilkensTriple {
                b: self.triple.b.negate(),
                ..self.triple.clone()
            },
            sbar: self.sbar.map(|x| -x),
            s1: self.s1.map(|x| -x),
            ..self.clone()
        }
    }
}

fn bp_order(dim: u32) -> i64 {
    if dim == 7 {
        28
    } else {
        8128
    }
}

/// Family, Wilkens triple, and `s̄`, `s₁` when the presentation is nondegenerate.
pub fn invariants(p: &ManifoldDescriptor) -> Result<ManifoldInvariants> {
    let family = family_of(&p.presentation)?;
    let sbar = if p.presentation.is_nondegenerate() { Some(sbar_rational(&p.presentation)?) } else { None };
    ManifoldInvariants::from_parts(p.dim, family, sbar, p.sigma_p_exotic)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    AlmostDiffeo,
    Homeo,
    Diffeo,
    Homotopy,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::AlmostDiffeo, Level::Homeo, Level::Diffeo, Level::Homotopy];

    pub fn name(&self) -> &'static str {
        match self {
            Level::AlmostDiffeo => "almost_diffeo",
            Level::Homeo => "homeo",
            Level::Diffeo => "diffeo",
            Level::Homotopy => "homotopy",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Level::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Invalid(alloc::format!("unknown level {s:?}")))
    }
}

/// Orientation-preserving and orientation-reversing answers (`P₀ ≅ P₁` and `P₀ ≅ −P₁`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Verdict {
    pub preserving: bool,
    pub reversing: bool,
}

impl Verdict {
    pub fn any(&self) -> bool {
        self.preserving || self.reversing
    }
}

pub fn compare(p0: &ManifoldDescriptor, p1: &ManifoldDescriptor, level: Level, cap: u64) -> Result<Verdict> {
    compare_invariants(&invariants(p0)?, &invariants(p1)?, level, cap)
}

pub fn compare_invariants(
    i0: &ManifoldInvariants,
    i1: &ManifoldInvariants,
    level: Level,
    cap: u64,
) -> Result<Verdict> {
    if i0.dim != i1.dim {
        return Err(Error::Invalid("manifolds of different dimensions".into()));
    }
    if i0.dim == 15 && matches!(level, Level::Homeo | Level::Homotopy) {
        return Err(Error::Unsupported("homeomorphism and homotopy decisions are only available in dimension 7"));
    }
    if level == Level::Diffeo && (i0.s1.is_none() || i1.s1.is_none()) {
        return Err(Error::Degenerate("s₁ needs rational homology spheres"));
    }
    let r1 = i1.reverse();
    let one = |other: &ManifoldInvariants| -> Result<bool> {
        Ok(match level {
            Level::AlmostDiffeo | Level::Homeo => families_isometric(&i0.family, &other.family, cap)?.is_some(),
            Level::Diffeo => {
                i0.s1 == other.s1
                    && i0.sigma_p_exotic == other.sigma_p_exotic
                    && families_isometric(&i0.family, &other.family, cap)?.is_some()
            }
            Level::Homotopy => homotopy_families(&i0.family, &other.family, cap)?,
        })
    };
    Ok(Verdict {
        preserving: one(i1)?,
        reversing: one(&r1)?,
    })
}

/// Free parts agree up to β mod 24; torsion refinements agree up to translation by
/// `gcd(r, 12)·TG`, where `2r` is the free divisibility.
fn homotopy_families(f0: &QuadraticLinkingFamily, f1: &QuadraticLinkingFamily, cap: u64) -> Result<bool> {
    if f0.free_rank() != f1.free_rank()
        || gcd_u64(f0.beta_divisibility, 24) != gcd_u64(f1.beta_divisibility, 24)
        || !f0.characteristic
        || !f1.characteristic
    {
        return Ok(false);
    }
    let step = 2 * gcd_u64(f1.beta_divisibility / 2, 12);
    Ok(search_shifts(f0, f1, step, cap, false)?.is_some())
}

/// Total space of the S³-bundle over S⁴ with Euler number `n` and stable class `n + 2m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SphereBundle {
    pub m: i64,
    pub n: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleInvariants {
    pub bundle: SphereBundle,
    /// `None` when `n = 0`.
    pub q: Option<QuadraticLinkingFunction>,
    /// `2m·e` on the cyclic presentation `Z/n` (or `Z` when `n = 0`).
    pub beta: i64,
    pub sbar: Option<RationalModZ>,
    pub s1: Option<RationalModZ>,
    pub manifold: ManifoldInvariants,
}

/// The tabulated invariants: `q(je) = (j² + 2mj)/2n`, `β = 2m·e`, `b(je,ke) = jk/n` and
/// `s̄ = ((n+2m)² − n·sign(n))/8n`. For odd `n` the `1/2` in `q` is read as the inverse of 2.
pub fn bundle_invariants(bundle: SphereBundle) -> Result<BundleInvariants> {
    let SphereBundle { m, n } = bundle;
    if n == 0 {
        let family = QuadraticLinkingFamily {
            group: FinAbGroup::free(1),
            beta: alloc::vec![2 * m],
            q_at_section: QuadraticLinkingFunction::trivial(),
            beta_divisibility: (2 * m).unsigned_abs(),
            characteristic: true,
        };
        let manifold = ManifoldInvariants::from_parts(7, family, None, false)?;
        return Ok(BundleInvariants {
            bundle,
            q: None,
            beta: 2 * m,
            sbar: None,
            s1: None,
            manifold,
        });
    }
    let o = n.unsigned_abs();
    let (n128, m128) = (n as i128, m as i128);
    let b = RationalModZ::new(1, n128);
    let qe = if n % 2 == 0 {
        RationalModZ::new(1 + 2 * m128, 2 * n128)
    } else {
        RationalModZ::new((o as i128 + 1) / 2 + m128, n128)
    };
    let q = QuadraticLinkingFunction::from_presentation(&[o], &[alloc::vec![b]], &[qe])?;
    let beta_t = primary_coordinates(&[o], &[(2 * m).rem_euclid(o as i64)]);
    let family = QuadraticLinkingFamily {
        group: q.group().clone(),
        beta: beta_t,
        q_at_section: q.clone(),
        beta_divisibility: 0,
        characteristic: true,
    };
    let sbar_raw = bundle_sbar_rational(m, n);
    let manifold = ManifoldInvariants::from_parts(7, family, Some(sbar_raw), false)?;
    Ok(BundleInvariants {
        bundle,
        q: Some(q),
        beta: 2 * m,
        sbar: manifold.sbar,
        s1: manifold.s1,
        manifold,
    })
}

fn bundle_sbar_rational(m: i64, n: i64) -> BigRational {
    let (m, n) = (BigInt::from(m), BigInt::from(n));
    let top = (&n + &m * 2) * (&n + &m * 2) - n.abs();
    BigRational::new(top, n * 8)
}

/// The congruence classifier for `P_{m₀,n₀}` against `P_{m₁,n₁}`.
pub fn bundle_compare(b0: SphereBundle, b1: SphereBundle, level: Level) -> Result<Verdict> {
    if b0.n.unsigned_abs() != b1.n.unsigned_abs() {
        return Ok(Verdict::default());
    }
    if b0.n == 0 {
        let same = match level {
            Level::Homotopy => gcd_u64(b0.m.unsigned_abs(), 12) == gcd_u64(b1.m.unsigned_abs(), 12),
            _ => b0.m.unsigned_abs() == b1.m.unsigned_abs(),
        };
        return Ok(Verdict {
            preserving: same,
            reversing: same,
        });
    }
    // P_{m,n} = −P_{m+n,−n}: normalize the first Euler number to be positive.
    let (m0, n, flip) = if b0.n > 0 { (b0.m, b0.n, false) } else { (b0.m + b0.n, -b0.n, true) };
    let eps: i128 = if b1.n == n { 1 } else { -1 };
    let (m0, m1, n) = (m0 as i128, b1.m as i128, n as i128);
    let holds = |sign: i128| -> bool {
        match level {
            Level::AlmostDiffeo | Level::Homeo | Level::Diffeo => {
                let modulus = if level == Level::Diffeo { 224 * n } else { 8 * n };
                let lhs = 4 * m0 * (n + m0) + (n * n - n);
                let rhs = 4 * m1 * (n + eps * m1) + eps * (n * n - n);
                (lhs - sign * rhs).rem_euclid(modulus) == 0
                    && (0..n).any(|al| (2 * m0 - 2 * al * m1).rem_euclid(n) == 0 && (al * al - sign * eps).rem_euclid(n) == 0)
            }
            Level::Homotopy => {
                let s = sign * eps;
                let g = 2 * n.gcd(&12);
                (0..2 * n).any(|u| {
                    (u * u - s).rem_euclid(n) == 0 && (2 * m0 - s * (2 * u * m1 + u * u - s)).rem_euclid(g) == 0
                })
            }
        }
    };
    let (plus, minus) = (holds(1), holds(-1));
    Ok(if flip {
        Verdict {
            preserving: minus,
            reversing: plus,
        }
    } else {
        Verdict {
            preserving: plus,
            reversing: minus,
        }
    })
}

/// Euler number, stable class and the image in `π₃(SG(4)) ≅ Z/12 ⊕ Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pi3Invariants {
    pub euler: i64,
    pub stable: i64,
    pub sg4: (i64, i64),
}

pub fn pi3_invariants(m: i64, n: i64) -> Pi3Invariants {
    Pi3Invariants {
        euler: n,
        stable: 2 * m + n,
        sg4: (m.rem_euclid(12), n),
    }
}

/// One disagreement found by [`coherence_grid`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDisagreement {
    pub b0: SphereBundle,
    pub b1: SphereBundle,
    pub level: Level,
    pub congruence: Verdict,
    pub generic: Verdict,
}

#[derive(Clone, Debug, Default)]
pub struct GridReport {
    pub checked: usize,
    pub disagreements: Vec<GridDisagreement>,
}

/// Cross-checks [`bundle_compare`] against [`compare_invariants`] on table data for
/// `1 ≤ n ≤ max_n`, `0 ≤ m₀, m₁ < n` and `n₁ = ±n`.
pub fn coherence_grid(max_n: i64, levels: &[Level], cap: u64) -> Result<GridReport> {
    let mut report = GridReport::default();
    for n in 1..=max_n {
        let table: Vec<_> = (0..n).map(|m| bundle_invariants(SphereBundle { m, n })).collect::<Result<_>>()?;
        let reversed: Vec<_> =
            (0..n).map(|m| bundle_invariants(SphereBundle { m, n: -n })).collect::<Result<_>>()?;
        for m0 in 0..n {
            for (side, n1) in [(&table, n), (&reversed, -n)] {
                for m1 in 0..n {
                    let (b0, b1) = (SphereBundle { m: m0, n }, SphereBundle { m: m1, n: n1 });
                    for &level in levels {
                        let congruence = bundle_compare(b0, b1, level)?;
                        let generic =
                            compare_invariants(&table[m0 as usize].manifold, &side[m1 as usize].manifold, level, cap)?;
                        report.checked += 1;
                        if congruence != generic {
                            report.disagreements.push(GridDisagreement {
                                b0,
                                b1,
                                level,
                                congruence,
                                generic,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

impl fmt::Display for GridDisagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{}) vs ({},{}) at {}: congruence {:?}, generic {:?}",
            self.b0.m, self.b0.n, self.b1.m, self.b1.n, self.level, self.congruence, self.generic
        )
    }
}
