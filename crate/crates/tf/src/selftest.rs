//! Seeded randomized consistency checks behind `tf selftest`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tf_core::classify::{linking_forms_isometric, qlf_isometric};
use tf_core::qform::InversePairing;
use tf_core::torsion::{
    all_linking_forms, boundary_quadratic, brute_isometry, brute_isometry_linking, gauss_invariant, refinements,
    sbar_from_presentation,
};
use tf_core::{FinAbGroup, IntMatrix, QuadraticFunction, RationalModZ};

use crate::doc::{self, Document, LinkingFormDoc, QuadraticFunctionDoc, QuadraticLinkingDoc};
use crate::{Report, Status};

type Check = Result<(), String>;

fn symmetric(r: &mut ChaCha8Rng, n: usize, bound: i64, even: bool) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j && even { 2 * r.gen_range(-bound / 2..=bound / 2) } else { r.gen_range(-bound..=bound) };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Nondegenerate form with `|det| ≤ det_bound`.
fn nondegenerate(r: &mut ChaCha8Rng, max_rank: usize, even: bool, det_bound: u64) -> Vec<Vec<i64>> {
    loop {
        let n = r.gen_range(1..=max_rank);
        let g = symmetric(r, n, 4, even);
        let d = IntMatrix::from_rows(&g).det();
        if d != BigInt::from(0) && d.magnitude() <= &det_bound.into() {
            return g;
        }
    }
}

fn characteristic(r: &mut ChaCha8Rng, g: &[Vec<i64>]) -> QuadraticFunction {
    let a: Vec<i64> = (0..g.len()).map(|i| g[i][i].rem_euclid(2) + 2 * r.gen_range(-2..=2)).collect();
    QuadraticFunction::from_i64(g, &a)
}

/// A sum of ±1 and hyperbolic blocks under a random change of basis.
fn unimodular(r: &mut ChaCha8Rng, max_rank: usize) -> Vec<Vec<i64>> {
    let n = r.gen_range(1..=max_rank);
    let mut g = vec![vec![0i64; n]; n];
    let mut i = 0;
    while i < n {
        if i + 1 < n && r.gen_bool(0.3) {
            g[i][i + 1] = 1;
            g[i + 1][i] = 1;
            i += 2;
        } else {
            g[i][i] = if r.gen_bool(0.5) { 1 } else { -1 };
            i += 1;
        }
    }
    for _ in 0..3 * n {
        if n < 2 {
            break;
        }
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a == b {
            continue;
        }
        let c = if r.gen_bool(0.5) { 1 } else { -1 };
        // Basis change e_b += c·e_a, i.e. G ↦ EᵀGE.
        for row in g.iter_mut() {
            row[b] += c * row[a];
        }
        for col in 0..n {
            g[b][col] += c * g[a][col];
        }
    }
    g
}

fn small_group(r: &mut ChaCha8Rng) -> FinAbGroup {
    const SHAPES: &[&[u64]] = &[&[2], &[4], &[8], &[2, 2], &[2, 4], &[3], &[9], &[2, 3], &[4, 4], &[2, 2, 2]];
    FinAbGroup::new(SHAPES[r.gen_range(0..SHAPES.len())].to_vec(), 0).expect("normalized")
}

fn milgram(r: &mut ChaCha8Rng, cap: u64) -> Check {
    let g = nondegenerate(r, 4, true, 4096);
    let k = QuadraticFunction::from_i64(&g, &vec![0; g.len()]);
    let kv = gauss_invariant(&boundary_quadratic(&k).map_err(|e| e.to_string())?, cap).map_err(|e| e.to_string())?.k;
    let expect = RationalModZ::new(k.signature() as i128, 8);
    (kv == expect).then_some(()).ok_or_else(|| format!("gram {g:?}: K = {kv}, σ/8 = {expect}"))
}

fn mod_eight(r: &mut ChaCha8Rng) -> Check {
    let g = unimodular(r, 8);
    let k = characteristic(r, &g);
    let inv = InversePairing::new(k.gram()).map_err(|e| e.to_string())?;
    let v = inv.pair(k.linear(), k.linear()) - BigRational::from(BigInt::from(k.signature()));
    let ok = v.is_integer() && (v.to_integer() % BigInt::from(8)) == BigInt::from(0);
    ok.then_some(()).ok_or_else(|| format!("gram {g:?}: λ⁻¹(α,α) − σ = {v}"))
}

fn sbar_k(r: &mut ChaCha8Rng, cap: u64) -> Check {
    let g = nondegenerate(r, 4, false, 500);
    let k = characteristic(r, &g);
    let s = sbar_from_presentation(&k).map_err(|e| e.to_string())?;
    let q = boundary_quadratic(&k).map_err(|e| e.to_string())?;
    let kv = gauss_invariant(&q, cap).map_err(|e| e.to_string())?.k;
    (s + kv).is_zero().then_some(()).ok_or_else(|| format!("gram {g:?}: s̄ = {s}, K = {kv}"))
}

fn round_trip(r: &mut ChaCha8Rng) -> Check {
    let n = r.gen_range(0..=4);
    let g = symmetric(r, n, 9, false);
    let k = characteristic(r, &g);
    let back = doc::load::<QuadraticFunctionDoc>(&doc::emit::<QuadraticFunctionDoc>(&k), "emitted").map_err(|e| e.to_string())?;
    if back != k {
        return Err(format!("quadratic function {g:?} did not round trip"));
    }
    let grp = small_group(r);
    let forms = all_linking_forms(&grp, 4096).map_err(|e| e.to_string())?;
    let b = &forms[r.gen_range(0..forms.len())];
    if doc::load::<LinkingFormDoc>(&doc::emit::<LinkingFormDoc>(b), "emitted").map_err(|e| e.to_string())? != *b {
        return Err(format!("linking form {:?} did not round trip", LinkingFormDoc::from_value(b)));
    }
    let qs = refinements(b, 4096).map_err(|e| e.to_string())?;
    let q = &qs[r.gen_range(0..qs.len())];
    if doc::load::<QuadraticLinkingDoc>(&doc::emit::<QuadraticLinkingDoc>(q), "emitted").map_err(|e| e.to_string())? != *q {
        return Err(format!("refinement {:?} did not round trip", QuadraticLinkingDoc::from_value(q)));
    }
    Ok(())
}

fn deciders(r: &mut ChaCha8Rng, cap: u64) -> Check {
    let grp = small_group(r);
    let forms = all_linking_forms(&grp, cap).map_err(|e| e.to_string())?;
    let (b0, b1) = (&forms[r.gen_range(0..forms.len())], &forms[r.gen_range(0..forms.len())]);
    let fast = linking_forms_isometric(b0, b1, cap, false).map_err(|e| e.to_string())?;
    let brute = brute_isometry_linking(b0, b1, cap).map_err(|e| e.to_string())?.is_some();
    if fast != brute {
        return Err(format!("linking forms {:?} / {:?}: invariants {fast}, brute force {brute}", b0.gram(), b1.gram()));
    }
    let qs = refinements(b0, cap).map_err(|e| e.to_string())?;
    let (q0, q1) = (&qs[r.gen_range(0..qs.len())], &qs[r.gen_range(0..qs.len())]);
    let fast = qlf_isometric(q0, q1, cap).map_err(|e| e.to_string())?;
    let brute = brute_isometry(q0, q1, cap).map_err(|e| e.to_string())?.is_some();
    (fast == brute).then_some(()).ok_or_else(|| format!("refinements {q0} / {q1}: invariants {fast}, brute force {brute}"))
}

/// Runs every check `cases` times from `seed`; negative when any case fails.
pub fn run(seed: u64, cases: usize, cap: u64) -> Report {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    type Runner = fn(&mut ChaCha8Rng, u64) -> Check;
    let checks: [(&str, Runner); 5] = [
        ("milgram", milgram),
        ("mod-8 identity", |r, _| mod_eight(r)),
        ("s̄ = −K", sbar_k),
        ("document round trip", |r, _| round_trip(r)),
        ("KK and K deciders vs brute force", deciders),
    ];
    let mut text = format!("selftest seed {seed}, {cases} cases per check\n");
    let mut rows = Vec::new();
    let mut all_ok = true;
    for (name, f) in checks {
        let failure = (0..cases).find_map(|_| f(&mut r, cap).err());
        all_ok &= failure.is_none();
        match &failure {
            None => text += &format!("{name}: PASS\n"),
            Some(m) => text += &format!("{name}: FAIL ({m})\n"),
        }
        rows.push(json!({ "check": name, "pass": failure.is_none(), "failure": failure }));
    }
    let json = json!({ "seed": seed, "cases": cases, "checks": rows, "pass": all_ok });
    Report::new(Status::from_bool(all_ok), json, text)
}
