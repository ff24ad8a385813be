#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tf_core::classify::{generator_catalog, GeneratorName};
use tf_core::{FinAbGroup, GroupHom, IntMatrix, QuadraticFunction, QuadraticLinkingFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries in `[-bound, bound]`; even diagonal when `even`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, bound: i64, even: bool) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j && even {
                2 * rng.gen_range(-(bound / 2)..=bound / 2)
            } else if i != j && rng.gen_bool(0.4) {
                0
            } else {
                rng.gen_range(-bound..=bound)
            };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// A characteristic covector for `gram` with coordinates of size at most `2·spread + 1`.
pub fn random_characteristic_alpha(rng: &mut ChaCha8Rng, gram: &[Vec<i64>], spread: i64) -> Vec<i64> {
    (0..gram.len())
        .map(|i| gram[i][i].rem_euclid(2) + 2 * rng.gen_range(-spread..=spread))
        .collect()
}

pub fn det_i64(gram: &[Vec<i64>]) -> BigInt {
    IntMatrix::from_rows(gram).det()
}

/// Nondegenerate characteristic quadratic function of rank in `1..=max_rank`, `|det| ≤ det_bound`.
pub fn random_characteristic(
    rng: &mut ChaCha8Rng,
    max_rank: usize,
    bound: i64,
    det_bound: u64,
) -> QuadraticFunction {
    loop {
        let n = rng.gen_range(1..=max_rank);
        let g = random_symmetric(rng, n, bound, false);
        let d = det_i64(&g);
        if d == BigInt::from(0) || d.magnitude() > &det_bound.into() {
            continue;
        }
        let a = random_characteristic_alpha(rng, &g, 2);
        return QuadraticFunction::from_i64(&g, &a);
    }
}

/// Random unimodular matrix built from elementary moves and sign changes.
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, moves: usize) -> IntMatrix {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    if n < 2 {
        if rng.gen_bool(0.5) && n == 1 {
            m[0][0] = -1;
        }
        return IntMatrix::from_rows(&m);
    }
    for _ in 0..moves {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = rng.gen_range(-1..=1i64);
        for row in m.iter_mut() {
            row[j] += c * row[i];
        }
        if rng.gen_bool(0.1) {
            for row in m.iter_mut() {
                row[i] = -row[i];
            }
        }
    }
    IntMatrix::from_rows(&m)
}

pub fn e8_gram() -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; 8]; 8];
    for i in 0..8 {
        m[i][i] = 2;
    }
    for i in 0..6 {
        m[i][i + 1] = -1;
        m[i + 1][i] = -1;
    }
    m[4][7] = -1;
    m[7][4] = -1;
    m
}

/// Nonsingular characteristic function of rank `≤ max_rank`: a block sum of `±1`, the hyperbolic
/// plane and `±E8`, conjugated by a random unimodular change of basis.
pub fn random_nonsingular_characteristic(rng: &mut ChaCha8Rng, max_rank: usize) -> QuadraticFunction {
    let mut blocks: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut rank = 0;
    let target = rng.gen_range(1..=max_rank);
    while rank < target {
        let left = target - rank;
        let pick = rng.gen_range(0..10);
        let b = if pick == 0 && left >= 8 {
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            e8_gram().iter().map(|r| r.iter().map(|x| s * x).collect()).collect()
        } else if pick < 3 && left >= 2 {
            vec![vec![0, 1], vec![1, 0]]
        } else {
            vec![vec![if rng.gen_bool(0.5) { 1 } else { -1 }]]
        };
        rank += b.len();
        blocks.push(b);
    }
    let mut g = vec![vec![0i64; rank]; rank];
    let mut off = 0;
    for b in &blocks {
        for i in 0..b.len() {
            for j in 0..b.len() {
                g[off + i][off + j] = b[i][j];
            }
        }
        off += b.len();
    }
    let u = random_unimodular(rng, rank, 3 * rank);
    let base = QuadraticFunction::from_i64(&g, &vec![0; rank]);
    let lam = base.pullback(&u);
    let rows = lam.gram().to_i64_rows().expect("small entries");
    let a = random_characteristic_alpha(rng, &rows, 3);
    QuadraticFunction::from_i64(&rows, &a)
}

/// Labels items by the classes of an equivalence relation. `key` must be an invariant of the
/// relation; only items with equal keys are compared.
pub fn partition<T, K: Hash + Eq>(
    items: &[T],
    key: impl Fn(&T) -> K,
    mut equiv: impl FnMut(&T, &T) -> bool,
) -> Vec<usize> {
    let mut reps: HashMap<K, Vec<(usize, usize)>> = HashMap::new();
    let mut labels = Vec::with_capacity(items.len());
    let mut next = 0;
    for (i, x) in items.iter().enumerate() {
        let bucket = reps.entry(key(x)).or_default();
        let found = bucket.iter().find(|&&(r, _)| equiv(&items[r], x)).map(|&(_, l)| l);
        let label = match found {
            Some(l) => l,
            None => {
                bucket.push((i, next));
                next += 1;
                next - 1
            }
        };
        labels.push(label);
    }
    labels
}

/// Number of positions where two labelings disagree on "same class".
pub fn partition_disagreements(a: &[usize], b: &[usize]) -> usize {
    let mut ab: HashMap<usize, usize> = HashMap::new();
    let mut ba: HashMap<usize, usize> = HashMap::new();
    let mut bad = 0;
    for (&x, &y) in a.iter().zip(b) {
        let e1 = *ab.entry(x).or_insert(y);
        let e2 = *ba.entry(y).or_insert(x);
        if e1 != y || e2 != x {
            bad += 1;
        }
    }
    bad
}

pub fn cat(name: &str) -> QuadraticLinkingFunction {
    generator_catalog(name.parse::<GeneratorName>().expect("catalog name"), None).expect("catalog entry")
}

pub fn a2(k: u32, n: i64) -> QuadraticLinkingFunction {
    generator_catalog(GeneratorName::A { p: 2, k, n }, None).expect("A generator")
}

pub fn e(k: u32, eps: u8) -> QuadraticLinkingFunction {
    if eps == 0 {
        generator_catalog(GeneratorName::E0 { k }, None).expect("E0")
    } else {
        generator_catalog(GeneratorName::E1 { k }, None).expect("E1")
    }
}

pub fn sum(parts: &[QuadraticLinkingFunction]) -> QuadraticLinkingFunction {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, q| acc.direct_sum(q))
}

/// The map sending generator `i` to `images[i]`.
pub fn hom(g: &FinAbGroup, images: &[Vec<i64>]) -> GroupHom {
    GroupHom::from_images(g.clone(), g.clone(), images).expect("images fit the group")
}
