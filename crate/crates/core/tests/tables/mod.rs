//! Explicit isometries between translates of block sums of the 2-primary generators.
//!
//! Each instance lists its blocks, a source and a target translation per block and, for every
//! block generator, its image as one vector per block. The map must carry the source translate
//! onto the target translate: `q_tgt(θ x) = q_src(x)`.

use tf_core::classify::GeneratorName;
use tf_core::torsion::is_isometry;
use tf_core::{GroupHom, QuadraticLinkingFunction};

use crate::common::{a2, e};

type Block = Vec<i64>;

pub struct Instance {
    pub label: String,
    pub parts: Vec<QuadraticLinkingFunction>,
    pub src: Vec<Block>,
    pub tgt: Vec<Block>,
    /// `images[b][i]` is the image of generator `i` of block `b`, one vector per block.
    pub images: Vec<Vec<Vec<Block>>>,
}

pub struct Table {
    pub name: &'static str,
    pub instances: Vec<Instance>,
}

fn h(k: u32) -> i64 {
    1 << (k - 1)
}

fn units(k: u32) -> &'static [i64] {
    GeneratorName::legal_units(k)
}

fn odd() -> [i64; 2] {
    [1, 3]
}

fn even() -> [i64; 2] {
    [0, 2]
}

fn ak_parity(k: u32) -> [i64; 2] {
    if k == 2 {
        even()
    } else {
        odd()
    }
}

fn eps_range(k: u32) -> Vec<u8> {
    if k >= 2 {
        vec![0, 1]
    } else {
        vec![0]
    }
}

/// The block sum together with the position of every block generator in it.
fn assemble(parts: &[QuadraticLinkingFunction]) -> (QuadraticLinkingFunction, Vec<Vec<usize>>) {
    let mut q = parts[0].clone();
    let mut pos: Vec<Vec<usize>> = vec![(0..parts[0].group().ngens()).collect()];
    for p in &parts[1..] {
        let (_, left, right) = q.group().direct_sum(p.group());
        for v in pos.iter_mut() {
            for x in v.iter_mut() {
                *x = left[*x];
            }
        }
        pos.push(right);
        q = q.direct_sum(p);
    }
    (q, pos)
}

fn flatten(pos: &[Vec<usize>], n: usize, blocks: &[Block]) -> Vec<i64> {
    let mut out = vec![0; n];
    for (b, v) in blocks.iter().enumerate() {
        for (i, &x) in v.iter().enumerate() {
            out[pos[b][i]] = x;
        }
    }
    out
}

pub fn verify(inst: &Instance) -> Result<bool, String> {
    let (q, pos) = assemble(&inst.parts);
    let g = q.group().clone();
    let n = g.ngens();
    let q_src = q.translate(&flatten(&pos, n, &inst.src));
    let q_tgt = q.translate(&flatten(&pos, n, &inst.tgt));
    let mut imgs = vec![Vec::new(); n];
    for (b, gens) in inst.images.iter().enumerate() {
        for (i, img) in gens.iter().enumerate() {
            let mut v = flatten(&pos, n, img);
            g.reduce(&mut v);
            imgs[pos[b][i]] = v;
        }
    }
    let theta = GroupHom::from_images(g.clone(), g, &imgs).map_err(|e| e.to_string())?;
    is_isometry(&q_src, &q_tgt, &theta, 1 << 16).map_err(|e| e.to_string())
}

fn inst(label: String, parts: Vec<QuadraticLinkingFunction>, src: Vec<Block>, tgt: Vec<Block>, images: Vec<Vec<Vec<Block>>>) -> Instance {
    Instance {
        label,
        parts,
        src,
        tgt,
        images,
    }
}

/// `A^k(n)`, multiplication by `1 + 2^{k-1}`: `q_{a+2^{k-1}e} → q_a`, `a` odd for `k = 2`,
/// even for `k ≥ 3`.
fn cyclic() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for &n in units(k) {
            let parity = if k == 2 { odd() } else { even() };
            for a in parity {
                v.push(inst(
                    format!("k={k} n={n} a={a}"),
                    vec![a2(k, n)],
                    vec![vec![a + h(k)]],
                    vec![vec![a]],
                    vec![vec![vec![vec![1 + h(k)]]]],
                ));
            }
        }
    }
    Table {
        name: "A^k multiplication",
        instances: v,
    }
}

/// `E^{k,ε}`: `e₁ ↦ e₁`, `e₂ ↦ e₂ + 2^{k-1}e₁`, `q_a → q_{a+2^{k-1}e₁}` with `a₂` even.
fn e_shear() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for eps in eps_range(k) {
            for a1 in 0..4 {
                for a2 in even() {
                    v.push(inst(
                        format!("k={k} ε={eps} a=({a1},{a2})"),
                        vec![e(k, eps)],
                        vec![vec![a1, a2]],
                        vec![vec![a1 + h(k), a2]],
                        vec![vec![vec![vec![1, 0]], vec![vec![h(k), 1]]]],
                    ));
                }
            }
        }
    }
    Table {
        name: "E^{k,ε} shear",
        instances: v,
    }
}

/// `E^{k,ε}`: `e₁ ↦ e₁ + 2^{k-1}c₂e₂`, `e₂ ↦ e₂ + 2^{k-1}e₁`, `q_a → q_{a+2^{k-1}c}`.
fn e_twisted() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for eps in eps_range(k) {
            for c in [[1i64, 0], [0, 1], [1, 1]] {
                for a1 in 0..4i64 {
                    for a2 in 0..4i64 {
                        let admissible = match c {
                            [1, 0] => a2 % 2 == 0,
                            [0, 1] => a1 % 2 == 0 && a2 % 2 == 1,
                            _ => a1 % 2 == 0 && a2 % 2 == 0,
                        };
                        if !admissible {
                            continue;
                        }
                        v.push(inst(
                            format!("k={k} ε={eps} c={c:?} a=({a1},{a2})"),
                            vec![e(k, eps)],
                            vec![vec![a1, a2]],
                            vec![vec![a1 + h(k) * c[0], a2 + h(k) * c[1]]],
                            vec![vec![vec![vec![1, h(k) * c[1]]], vec![vec![h(k), 1]]]],
                        ));
                    }
                }
            }
        }
    }
    Table {
        name: "E^{k,ε} twisted shear",
        instances: v,
    }
}

fn a_a() -> Table {
    let mut v = Vec::new();
    for k in 3..=4 {
        for l in 2..=4 {
            for &n0 in units(k) {
                for &n1 in units(l) {
                    for a0 in odd() {
                        for a1 in if l == 2 { even() } else { odd() } {
                            v.push(inst(
                                format!("k={k} l={l} n=({n0},{n1}) a=({a0},{a1})"),
                                vec![a2(k, n0), a2(l, n1)],
                                vec![vec![a0], vec![a1]],
                                vec![vec![a0 + h(k)], vec![a1 + h(l)]],
                                vec![vec![vec![vec![1], vec![h(l)]]], vec![vec![vec![h(k)], vec![1]]]],
                            ));
                        }
                    }
                }
            }
        }
    }
    Table {
        name: "A^k ⊕ A^l",
        instances: v,
    }
}

fn a_e() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for l in 2..=4 {
            for &n0 in units(k) {
                for eps in eps_range(l) {
                    for a0 in ak_parity(k) {
                        for x in 0..2 {
                            for y in odd() {
                                v.push(inst(
                                    format!("k={k} l={l} n={n0} ε={eps} a=({a0};{x},{y})"),
                                    vec![a2(k, n0), e(l, eps)],
                                    vec![vec![a0], vec![x, y]],
                                    vec![vec![a0 + h(k)], vec![x + h(l), y]],
                                    vec![
                                        vec![vec![vec![1], vec![h(l), 0]]],
                                        vec![vec![vec![0], vec![1, 0]], vec![vec![h(k)], vec![0, 1]]],
                                    ],
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Table {
        name: "A^k ⊕ E^{l,ε}",
        instances: v,
    }
}

fn e_e() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for l in 2..=4 {
            for eps in [0u8, 1] {
                for x0 in 0..2 {
                    for y0 in odd() {
                        for x1 in 0..2 {
                            for y1 in odd() {
                                v.push(inst(
                                    format!("k={k} l={l} ε={eps} a=({x0},{y0};{x1},{y1})"),
                                    vec![e(k, eps), e(l, eps)],
                                    vec![vec![x0, y0], vec![x1, y1]],
                                    vec![vec![x0 + h(k), y0], vec![x1 + h(l), y1]],
                                    vec![
                                        vec![vec![vec![1, 0], vec![0, 0]], vec![vec![0, 1], vec![h(l), 0]]],
                                        vec![vec![vec![0, 0], vec![1, 0]], vec![vec![h(k), 0], vec![0, 1]]],
                                    ],
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Table {
        name: "E^{k,ε} ⊕ E^{l,ε}",
        instances: v,
    }
}

fn a_e10() -> Table {
    let mut v = Vec::new();
    for k in 3..=4 {
        for &n0 in units(k) {
            for a0 in odd() {
                v.push(inst(
                    format!("k={k} n={n0} a={a0}"),
                    vec![a2(k, n0), e(1, 0)],
                    vec![vec![a0], vec![1, 1]],
                    vec![vec![a0 + h(k)], vec![0, 0]],
                    vec![
                        vec![vec![vec![1], vec![1, 1]]],
                        vec![vec![vec![h(k)], vec![1, 0]], vec![vec![h(k)], vec![0, 1]]],
                    ],
                ));
            }
        }
    }
    Table {
        name: "A^k ⊕ E^{1,0}",
        instances: v,
    }
}

/// The two `A¹(1)` translates agree: refinements of `A¹(1) ⊕ A¹(1)` differing in K by 1/2.
fn a_a1a1() -> Table {
    let mut v = Vec::new();
    for k in 3..=4 {
        for &n0 in units(k) {
            for a0 in odd() {
                for t in 0..2 {
                    v.push(inst(
                        format!("k={k} n={n0} a=({a0};{t},{t})"),
                        vec![a2(k, n0), a2(1, 1), a2(1, 1)],
                        vec![vec![a0], vec![t], vec![t]],
                        vec![vec![a0 + h(k)], vec![t + 1], vec![t + 1]],
                        vec![
                            vec![vec![vec![1], vec![1], vec![1]]],
                            vec![vec![vec![h(k)], vec![1], vec![0]]],
                            vec![vec![vec![h(k)], vec![0], vec![1]]],
                        ],
                    ));
                }
            }
        }
    }
    Table {
        name: "A^k ⊕ A^1(1) ⊕ A^1(1)",
        instances: v,
    }
}

fn e_e10() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for eps in eps_range(k) {
            for x in 0..2 {
                for y in odd() {
                    v.push(inst(
                        format!("k={k} ε={eps} a=({x},{y})"),
                        vec![e(k, eps), e(1, 0)],
                        vec![vec![x, y], vec![1, 1]],
                        vec![vec![x + h(k), y], vec![0, 0]],
                        vec![
                            vec![vec![vec![1, 0], vec![0, 0]], vec![vec![0, 1], vec![1, 1]]],
                            vec![vec![vec![h(k), 0], vec![1, 0]], vec![vec![h(k), 0], vec![0, 1]]],
                        ],
                    ));
                }
            }
        }
    }
    Table {
        name: "E^{k,ε} ⊕ E^{1,0}",
        instances: v,
    }
}

fn e_a1a1() -> Table {
    let mut v = Vec::new();
    for k in 2..=4 {
        for eps in eps_range(k) {
            for x in 0..2 {
                for y in odd() {
                    for t in 0..2 {
                        v.push(inst(
                            format!("k={k} ε={eps} a=({x},{y};{t},{t})"),
                            vec![e(k, eps), a2(1, 1), a2(1, 1)],
                            vec![vec![x, y], vec![t], vec![t]],
                            vec![vec![x + h(k), y], vec![t + 1], vec![t + 1]],
                            vec![
                                vec![vec![vec![1, 0], vec![0], vec![0]], vec![vec![0, 1], vec![1], vec![1]]],
                                vec![vec![vec![h(k), 0], vec![1], vec![0]]],
                                vec![vec![vec![h(k), 0], vec![0], vec![1]]],
                            ],
                        ));
                    }
                }
            }
        }
    }
    Table {
        name: "E^{k,ε} ⊕ A^1(1) ⊕ A^1(1)",
        instances: v,
    }
}

pub fn all() -> Vec<Table> {
    vec![
        cyclic(),
        e_shear(),
        e_twisted(),
        a_a(),
        a_e(),
        e_e(),
        a_e10(),
        a_a1a1(),
        e_e10(),
        e_a1a1(),
    ]
}

/// The literal forms of two maps that are not isometries under any translation: the twisted
/// shear with `e₂ ↦ e₂ + 2^{k-1}e₂`, and the `E ⊕ A¹(1) ⊕ A¹(1)` map copied from the `E ⊕ E` case.
pub fn printed_variants_rejected() -> Result<String, String> {
    let mut tried = 0;
    for k in 2..=4u32 {
        for eps in eps_range(k) {
            for c2 in 0..2 {
                for a1 in 0..4 {
                    for a2v in 0..4 {
                        for s in [[1i64, 0], [0, 1], [1, 1]] {
                            let i = inst(
                                String::new(),
                                vec![e(k, eps)],
                                vec![vec![a1, a2v]],
                                vec![vec![a1 + h(k) * s[0], a2v + h(k) * s[1]]],
                                vec![vec![vec![vec![1, h(k) * c2]], vec![vec![0, 1 + h(k)]]]],
                            );
                            if verify(&i)? {
                                return Err(format!("literal twisted shear is an isometry at k={k} a=({a1},{a2v})"));
                            }
                            tried += 1;
                        }
                    }
                }
            }
            for a in 0..16i64 {
                let (x, y, t0, t1) = (a & 1, (a >> 1) & 1, (a >> 2) & 1, (a >> 3) & 1);
                for s in 1..16i64 {
                    let shift = [(s & 1) * h(k), ((s >> 1) & 1) * h(k), (s >> 2) & 1, (s >> 3) & 1];
                    let i = inst(
                        String::new(),
                        vec![e(k, eps), a2(1, 1), a2(1, 1)],
                        vec![vec![x, y], vec![t0], vec![t1]],
                        vec![vec![x + shift[0], y + shift[1]], vec![t0 + shift[2]], vec![t1 + shift[3]]],
                        vec![
                            vec![vec![vec![1, 0], vec![0], vec![0]], vec![vec![0, 1], vec![1], vec![0]]],
                            vec![vec![vec![0, 0], vec![1], vec![0]]],
                            vec![vec![vec![h(k), 0], vec![0], vec![1]]],
                        ],
                    );
                    if verify(&i)? {
                        return Err(format!("literal E ⊕ 2A^1 map is an isometry at k={k}"));
                    }
                    tried += 1;
                }
            }
        }
    }
    Ok(format!("{tried} instances of the two literal maps correctly rejected"))
}
