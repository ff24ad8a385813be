//! Acceptance suite: one PASS/FAIL line per criterion with its runtime budget.

mod common;
mod tables;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use tf_core::classify::{
    glue, is_ambiguous, kk_invariants, linking_forms_isometric, split_with, GeneratorName,
};
use tf_core::group::groups_of_order;
use tf_core::lattice::isometry_search;
use tf_core::manifolds::{bundle_compare, bundle_invariants, coherence_grid, Level, SphereBundle};
use tf_core::qform::InversePairing;
use tf_core::torsion::{
    all_linking_forms, boundary_quadratic, brute_isometry, brute_isometry_linking, brute_isometry_wilkens,
    gauss_invariant, refinements, sbar_from_presentation, Boundary,
};
use tf_core::{Bounds, LinkingForm, QuadraticFunction, QuadraticLinkingFunction, RationalModZ, WilkensData};

use common::*;

const CAP: u64 = 1 << 16;

type Outcome = Result<String, String>;

fn r(n: i128, d: i128) -> RationalModZ {
    RationalModZ::new(n, d)
}

fn k_of(q: &QuadraticLinkingFunction) -> RationalModZ {
    gauss_invariant(q, CAP).expect("nonsingular").k
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1() -> Outcome {
    let q = a2(1, 1);
    let (k0, k1) = (k_of(&q), k_of(&q.translate(&[1])));
    ensure(k0 == r(1, 8) && k1 == r(7, 8), || format!("K(q^1(1)) = {k0}, K(q^1(1)_e) = {k1}"))?;
    let e10 = e(1, 0);
    let ks: Vec<_> = [[0, 0], [1, 0], [0, 1], [1, 1]].iter().map(|a| k_of(&e10.translate(a))).collect();
    ensure(ks == vec![r(0, 1), r(0, 1), r(0, 1), r(1, 2)], || format!("E^(1,0) table {ks:?}"))?;
    Ok(format!("K = 1/8, 7/8; E^(1,0) refinements K = {}", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")))
}

fn c2() -> Outcome {
    let mut rng = rng(0x6d696c);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 200 {
        let n = rand::Rng::gen_range(&mut rng, 1..=6usize);
        let g = random_symmetric(&mut rng, n, 5, true);
        let d = det_i64(&g);
        if d.is_zero() || d.abs() > BigInt::from(CAP) {
            continue;
        }
        let k = QuadraticFunction::from_i64(&g, &vec![0; n]);
        let q = Boundary::new(&k).and_then(|b| b.even()).map_err(|e| e.to_string())?;
        let gs = gauss_invariant(&q, CAP).map_err(|e| e.to_string())?;
        let t = 2.0 * std::f64::consts::PI * k.signature() as f64 / 8.0;
        let err = ((gs.re - t.cos()).powi(2) + (gs.im - t.sin()).powi(2)).sqrt();
        worst = worst.max(err);
        ensure(err < 1e-9, || format!("gram {g:?}: |GS − e(σ/8)| = {err:e}"))?;
        done += 1;
    }
    Ok(format!("200 even forms, max |GS − exp(2πiσ/8)| = {worst:.1e}"))
}

fn c3() -> Outcome {
    let mut rng = rng(0x6d6f6438);
    for _ in 0..200 {
        let k = random_nonsingular_characteristic(&mut rng, 8);
        let inv = InversePairing::new(k.gram()).map_err(|e| e.to_string())?;
        let v = inv.pair(k.linear(), k.linear()) - num_rational::BigRational::from(BigInt::from(k.signature()));
        let ok = v.is_integer() && (v.to_integer() % BigInt::from(8)).is_zero();
        ensure(ok, || format!("{k}: λ⁻¹(α,α) − σ = {v}"))?;
    }
    Ok("200 nonsingular characteristic forms, rank ≤ 8: λ⁻¹(α,α) − σ ≡ 0 mod 8".into())
}

fn c4() -> Outcome {
    let mut rng = rng(0x73626172);
    for _ in 0..200 {
        let k = random_characteristic(&mut rng, 6, 4, 500);
        let s = sbar_from_presentation(&k).map_err(|e| e.to_string())?;
        let q = boundary_quadratic(&k).map_err(|e| e.to_string())?;
        let kk = k_of(&q);
        ensure((s + kk).is_zero(), || format!("{k}: s̄ = {s}, K = {kk}"))?;
    }
    Ok("200 characteristic forms, rank ≤ 6, |det| ≤ 500: s̄ + K = 0".into())
}

fn isometric_qf(a: &QuadraticFunction, b: &QuadraticFunction) -> bool {
    isometry_search(a, b, None, &Bounds::default()).map(|v| v.is_isometric()).unwrap_or(false)
}

fn c5() -> Outcome {
    let mut rng = rng(0x676c7565);
    let pool: Vec<QuadraticFunction> = (0..400).map(|_| random_characteristic(&mut rng, 3, 3, 48)).collect();
    let bqs: Vec<QuadraticLinkingFunction> =
        pool.iter().map(boundary_quadratic).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut pairs = Vec::new();
    'outer: for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            if pool[i] == pool[j] || bqs[i].group() != bqs[j].group() {
                continue;
            }
            if let Some(t) = brute_isometry(&bqs[i], &bqs[j], CAP).map_err(|e| e.to_string())? {
                pairs.push((pool[i].clone(), pool[j].clone(), t));
                if pairs.len() == 50 {
                    break 'outer;
                }
            }
        }
    }
    let found = pairs.len();
    let mut idx = 0;
    while pairs.len() < 100 {
        let k0 = pool[idx % pool.len()].clone();
        idx += 7;
        let u = random_unimodular(&mut rng, k0.rank(), 4);
        let k1 = k0.pullback(&u);
        let (q0, q1) = (boundary_quadratic(&k0).unwrap(), boundary_quadratic(&k1).unwrap());
        let t = brute_isometry(&q0, &q1, CAP).map_err(|e| e.to_string())?.ok_or("pullback lost its boundary")?;
        pairs.push((k0, k1, t));
    }
    for (k0, k1, t) in &pairs {
        let g = glue(k0, k1, t).map_err(|e| format!("glue {k0} / {k1}: {e}"))?;
        ensure(g.kappa.is_nonsingular() && g.kappa.is_characteristic(), || format!("glued {} is not nonsingular characteristic", g.kappa))?;
        ensure(g.kappa.signature() == k0.signature() - k1.signature(), || format!("σ of {} ≠ σ₀ − σ₁", g.kappa))?;
        let s = split_with(&g.kappa, &g.i0, &g.i1).map_err(|e| e.to_string())?;
        ensure(&s.theta == t, || format!("split of {} recovered {:?}, glued along {:?}", g.kappa, s.theta, t))?;
        ensure(isometric_qf(&s.k0, k0) && isometric_qf(&s.k1, k1), || format!("split summands of {} differ", g.kappa))?;
    }
    Ok(format!("100 pairs ({found} from the random pool, {} unimodular pullbacks)", 100 - found))
}

fn c6() -> Outcome {
    let mut total = 0;
    let mut bad = 0;
    let mut classes = 0;
    for n in 1..=16u64 {
        for g in groups_of_order(n) {
            let qs: Vec<QuadraticLinkingFunction> = all_linking_forms(&g, 4096)
                .map_err(|e| e.to_string())?
                .iter()
                .flat_map(|b| refinements(b, 4096).expect("small group"))
                .collect();
            let values = |q: &QuadraticLinkingFunction| {
                let mut v = q.values(4096).expect("small group");
                v.sort_unstable();
                v
            };
            let brute = partition(&qs, values, |a, b| brute_isometry(a, b, 4096).unwrap().is_some());
            let wk = partition(&qs, k_of, |a, b| {
                brute_isometry_wilkens(&a.wilkens_data(), &b.wilkens_data(), 4096).unwrap().is_some()
            });
            bad += partition_disagreements(&brute, &wk);
            total += qs.len();
            classes += brute.iter().max().map_or(0, |m| m + 1);
        }
    }
    ensure(bad == 0, || format!("{bad} disagreements among {total} functions"))?;
    Ok(format!("{total} functions on groups of order ≤ 16, {classes} classes, 0 disagreements"))
}

fn kk_relations() -> Result<usize, String> {
    let a = |k: u32, n: i64| LinkingForm::clone(a2(k, n).base());
    let e0 = |k: u32| e(k, 0).base().clone();
    let e1 = |k: u32| e(k, 1).base().clone();
    let s = |v: Vec<LinkingForm>| v.iter().skip(1).fold(v[0].clone(), |acc, b| acc.direct_sum(b));
    let units = GeneratorName::legal_units;
    let mut cases: Vec<(String, LinkingForm, LinkingForm)> = Vec::new();
    for k in 1..=3u32 {
        for &n in units(k) {
            if k >= 3 {
                for &n2 in units(k) {
                    cases.push((format!("(0.1) k={k} n={n},{n2}"), s(vec![a(k, n), a(k, n2)]), s(vec![a(k, n + 4), a(k, n2 + 4)])));
                }
            }
            cases.push((format!("(0.2) k={k} n={n}"), s(vec![a(k, n), a(k, -n), a(k, -n)]), s(vec![a(k, -n), e0(k)])));
            if k >= 2 {
                // The hyperbolic summand cannot be E^{k,0}: see `literal_relation_rejected`.
                cases.push((format!("(0.3) k={k} n={n}"), s(vec![a(k, n), a(k, n), a(k, n)]), s(vec![a(k, 4 - n), e1(k)])));
            }
            for &n2 in units(k + 1) {
                cases.push((
                    format!("(1.1) k={k} n={n},{n2}"),
                    s(vec![a(k, n), a(k + 1, n2)]),
                    s(vec![a(k, n + 2 * n2), a(k + 1, n2 + 2 * n)]),
                ));
            }
            cases.push((format!("(1.2) k={k} n={n}"), s(vec![a(k, n), e1(k + 1)]), s(vec![a(k, n + 4), e0(k + 1)])));
            for &n2 in units(k + 2) {
                cases.push((
                    format!("(2.1) k={k} n={n},{n2}"),
                    s(vec![a(k, n), a(k + 2, n2)]),
                    s(vec![a(k, n + 4), a(k + 2, n2 + 4)]),
                ));
            }
        }
        if k >= 2 {
            cases.push((format!("(0.4) k={k}"), s(vec![e0(k), e0(k)]), s(vec![e1(k), e1(k)])));
            for &n in units(k + 1) {
                cases.push((format!("(1.3) k={k} n={n}"), s(vec![e1(k), a(k + 1, n)]), s(vec![e0(k), a(k + 1, n + 4)])));
            }
        }
    }
    for (name, lhs, rhs) in &cases {
        let kk = linking_forms_isometric(lhs, rhs, CAP, false).map_err(|e| e.to_string())?;
        let brute = brute_isometry_linking(lhs, rhs, CAP).map_err(|e| e.to_string())?.is_some();
        ensure(kk && brute, || format!("relation {name}: invariants {kk}, search {brute}"))?;
    }
    Ok(cases.len())
}

/// `3A^k(n)` and `A^k(4−n) ⊕ E^{k,0}` differ: both deciders must say so.
fn literal_relation_rejected() -> Result<usize, String> {
    let mut n_cases = 0;
    for k in 2..=3u32 {
        for &n in GeneratorName::legal_units(k) {
            let lhs = sum(&[a2(k, n), a2(k, n), a2(k, n)]);
            let rhs = sum(&[a2(k, 4 - n), e(k, 0)]);
            let kk = linking_forms_isometric(lhs.base(), rhs.base(), CAP, false).map_err(|e| e.to_string())?;
            let brute = brute_isometry_linking(lhs.base(), rhs.base(), CAP).map_err(|e| e.to_string())?.is_some();
            ensure(!kk && !brute, || format!("3A^{k}({n}) vs A^{k}({}) ⊕ E^({k},0): invariants {kk}, search {brute}", 4 - n))?;
            n_cases += 1;
        }
    }
    Ok(n_cases)
}

fn c7() -> Outcome {
    let mut total = 0;
    let mut bad = 0;
    for j in 0..=5u32 {
        for g in groups_of_order(1 << j) {
            let forms = all_linking_forms(&g, 4096).map_err(|e| e.to_string())?;
            let diag = |b: &LinkingForm| {
                let mut v: Vec<u64> = g.elements(64).unwrap().iter().map(|x| b.pair_num(x, x)).collect();
                v.sort_unstable();
                v
            };
            let brute = partition(&forms, diag, |a, b| brute_isometry_linking(a, b, 64).unwrap().is_some());
            let kk = partition(&forms, |b| kk_invariants(b, 64).unwrap(), |_, _| true);
            bad += partition_disagreements(&brute, &kk);
            total += forms.len();
        }
    }
    ensure(bad == 0, || format!("{bad} disagreements among {total} forms"))?;
    let rel = kk_relations()?;
    let lit = literal_relation_rejected()?;
    Ok(format!(
        "{total} forms on 2-groups of order ≤ 32, 0 disagreements; {rel} relation instances hold \
         ((0.3) with E^(k,1)); {lit} instances of (0.3) with E^(k,0) rejected by both deciders"
    ))
}

fn c8() -> Outcome {
    let mut pairs = 0;
    let mut ambiguous = 0;
    let mut forms: Vec<(String, LinkingForm)> = Vec::new();
    for k in 1..=5u32 {
        for &n in GeneratorName::legal_units(k) {
            forms.push((format!("A^{k}({n})"), a2(k, n).base().clone()));
        }
    }
    forms.push(("E^(1,0)".into(), e(1, 0).base().clone()));
    forms.push(("E^(2,0)".into(), e(2, 0).base().clone()));
    forms.push(("E^(2,1)".into(), e(2, 1).base().clone()));
    for (name, b) in &forms {
        let g = b.group();
        let elems = g.elements(64).unwrap();
        let qs = refinements(b, 64).unwrap();
        let mut betas: Vec<Vec<i64>> = elems.iter().map(|a| g.scale(a, 2)).collect();
        betas.sort();
        betas.dedup();
        for beta in betas {
            let with: Vec<QuadraticLinkingFunction> =
                elems.iter().zip(&qs).filter(|(a, _)| g.scale(a, 2) == beta).map(|(_, q)| q.clone()).collect();
            let labels = partition(&with, k_of, |x, y| brute_isometry(x, y, 64).unwrap().is_some());
            let count = labels.iter().max().unwrap() + 1;
            let amb = is_ambiguous(&WilkensData { b: b.clone(), beta: beta.clone() }).map_err(|e| e.to_string())?;
            ensure(count == if amb { 2 } else { 1 }, || format!("({name}, β={beta:?}): {count} classes, ambiguous = {amb}"))?;
            if amb {
                ambiguous += 1;
                let first = k_of(&with[0]);
                let other = with.iter().zip(&labels).find(|(_, &l)| l != labels[0]).map(|(q, _)| k_of(q)).unwrap();
                let exceptional = g.torsion_order() == 2;
                ensure(exceptional || first - other == r(1, 2), || format!("({name}, β={beta:?}): K values {first}, {other}"))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} indecomposable pairs, {ambiguous} ambiguous, class counts and K gaps as predicted"))
}

fn c9() -> Outcome {
    let (p18, p58) = (SphereBundle { m: 1, n: 8 }, SphereBundle { m: 5, n: 8 });
    let s0 = bundle_invariants(p18).map_err(|e| e.to_string())?.sbar.unwrap();
    let s1 = bundle_invariants(p58).map_err(|e| e.to_string())?.sbar.unwrap();
    ensure(s0 - s1 == r(1, 2), || format!("s̄ values {s0}, {s1}"))?;
    let homotopy = bundle_compare(p18, p58, Level::Homotopy).map_err(|e| e.to_string())?;
    let homeo = bundle_compare(p18, p58, Level::Homeo).map_err(|e| e.to_string())?;
    ensure(homotopy.any() && !homeo.any(), || format!("homotopy {homotopy:?}, homeo {homeo:?}"))?;
    let grid = coherence_grid(30, &[Level::Homeo, Level::Diffeo, Level::Homotopy], 4096).map_err(|e| e.to_string())?;
    ensure(grid.disagreements.is_empty(), || {
        format!("{} grid disagreements, first {}", grid.disagreements.len(), grid.disagreements[0])
    })?;
    Ok(format!("s̄ = {s0}, {s1}; homotopy equivalent, not homeomorphic; grid {} comparisons, 0 disagreements", grid.checked))
}

fn c10() -> Outcome {
    let mut checked = 0;
    for t in tables::all() {
        for inst in &t.instances {
            let ok = tables::verify(inst)?;
            ensure(ok, || format!("{}: {}", t.name, inst.label))?;
            checked += 1;
        }
    }
    let rejected = tables::printed_variants_rejected()?;
    Ok(format!("{checked} table instances verify; {rejected}"))
}

fn main() {
    type Criterion = (u32, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        (1, c1, 1),
        (2, c2, 30),
        (3, c3, 30),
        (4, c4, 60),
        (5, c5, 120),
        (6, c6, 300),
        (7, c7, 300),
        (8, c8, 120),
        (9, c9, 180),
        (10, c10, 30),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, f, limit) in criteria {
        if !only.is_empty() && !only.contains(&i) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let dt = start.elapsed();
        let in_time = dt <= Duration::from_secs(limit);
        let (status, detail) = match (&out, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over budget: {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {i:>2}: {status} [{:.2}s / {limit}s] {detail}", dt.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
