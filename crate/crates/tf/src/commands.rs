//! One handler per subcommand.

use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};
use tf_core::classify::{
    glue, is_ambiguous, kk_invariants, linking_forms_isometric, qlf_isometric, realize, split, split_with,
    generator_catalog, GeneratorName, KKInvariants,
};
use tf_core::manifolds::{
    bundle_compare, bundle_invariants, coherence_grid, compare, invariants, pi3_invariants, stably_equivalent,
    BundleInvariants, Level, ManifoldInvariants, QuadraticLinkingFamily, SphereBundle, Verdict,
};
use tf_core::torsion::{
    boundary_quadratic, brute_isometry, brute_isometry_linking, brute_isometry_wilkens, gauss_invariant,
    homogeneous_refinement, primary_decompose, sbar_from_presentation,
};
use tf_core::{isometry_search, GroupHom, LatticeVerdict, QuadraticFunction};

use crate::doc::{
    self, BasisDoc, BundleDoc, Document, HomDoc, LinkingFormDoc, ManifoldDoc, QuadraticFunctionDoc,
    QuadraticLinkingDoc,
};
use crate::report::{self, gauss_json, gauss_text, group_json, list, matrix, qlf_json, rat, rats, yes_no, Table};
use crate::{BundleCmd, Cli, CliError, Command, GlueArgs, LformCmd, ManifoldCmd, OracleCmd, QformCmd, QlfCmd};
use crate::{Report, Status};

type Res = Result<Report, CliError>;

pub fn dispatch(cli: &Cli) -> Res {
    match &cli.command {
        Command::Qform { cmd } => qform(cli, cmd),
        Command::Lform { cmd } => lform(cli, cmd),
        Command::Qlf { cmd } => qlf(cli, cmd),
        Command::Manifold { cmd } => manifold(cli, cmd),
        Command::Bundle { cmd } => bundle(cli, cmd),
        Command::Oracle { cmd } => oracle(cli, cmd),
        Command::Selftest { seed, cases } => Ok(crate::selftest::run(*seed, *cases as usize, cli.oracle_cap)),
        Command::Glue(args) => glue_cmd(args),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn load<D: Document>(path: &Path) -> Result<D::Value, CliError> {
    Ok(doc::load::<D>(&read(path)?, &path.display().to_string())?)
}

fn to_json<D: Document>(v: &D::Value) -> Value {
    serde_json::to_value(D::from_value(v)).expect("documents serialize")
}

fn hom_text(h: &GroupHom) -> String {
    h.images().iter().enumerate().map(|(i, im)| format!("e{i} -> {}", list(im))).collect::<Vec<_>>().join(", ")
}

fn verdict_report(holds: bool, noun: &str, mut json: Value, extra: &str) -> Report {
    json["verdict"] = Value::Bool(holds);
    let head = if holds { noun.to_string() } else { format!("NOT {noun}") };
    let text = if extra.is_empty() { head } else { format!("{head}\n{extra}") };
    Report::new(Status::from_bool(holds), json, text)
}

// ---------------------------------------------------------------- qform

fn qform(cli: &Cli, cmd: &QformCmd) -> Res {
    match cmd {
        QformCmd::Invariants { input } => qform_invariants(&load::<QuadraticFunctionDoc>(input)?, cli.oracle_cap),
        QformCmd::Isometric { pair, modulus } => {
            let k0 = load::<QuadraticFunctionDoc>(&pair.first)?;
            let k1 = load::<QuadraticFunctionDoc>(&pair.second)?;
            match isometry_search(&k0, &k1, *modulus, &cli.bounds())? {
                LatticeVerdict::Isometric(m) => {
                    let w = BasisDoc::from_matrix(&m);
                    let text = w.basis.iter().enumerate().map(|(i, c)| format!("e{i} -> {}", list(&c.iter().map(|x| &x.0).collect::<Vec<_>>()))).collect::<Vec<_>>().join(", ");
                    Ok(verdict_report(true, "isometric", json!({ "witness": w }), &format!("witness: {text}")))
                }
                LatticeVerdict::NotIsometric => Ok(verdict_report(false, "isometric", json!({}), "")),
                LatticeVerdict::Undecided => Ok(Report::new(
                    Status::Undecided,
                    json!({ "verdict": Value::Null, "undecided": true }),
                    "UNDECIDED within the rank and entry bounds".into(),
                )),
            }
        }
        QformCmd::Glue(args) => glue_cmd(args),
        QformCmd::Split { input, h0, h1 } => {
            let k = load::<QuadraticFunctionDoc>(input)?;
            let b0 = doc::parse::<BasisDoc>(&read(h0)?, &h0.display().to_string())?.to_matrix(k.rank())?;
            let s = match h1 {
                Some(p) => {
                    let b1 = doc::parse::<BasisDoc>(&read(p)?, &p.display().to_string())?.to_matrix(k.rank())?;
                    split_with(&k, &b0, &b1)?
                }
                None => split(&k, &b0)?,
            };
            let json = json!({
                "k0": to_json::<QuadraticFunctionDoc>(&s.k0),
                "k1": to_json::<QuadraticFunctionDoc>(&s.k1),
                "h1_basis": BasisDoc::from_matrix(&s.h1_basis),
                "theta": HomDoc::from_hom(&s.theta),
            });
            Ok(Report::document(json))
        }
        QformCmd::Stable(pair) => {
            let k0 = load::<QuadraticFunctionDoc>(&pair.first)?;
            let k1 = load::<QuadraticFunctionDoc>(&pair.second)?;
            let v = stably_equivalent(&k0, &k1, cli.oracle_cap)?;
            let witness = v.witness.as_ref().map(to_json::<QuadraticFunctionDoc>);
            let extra = match &v.witness {
                Some(w) => format!("witness: gram {}, alpha {}", matrix(&w.gram().to_rows()), list(w.linear())),
                None => String::new(),
            };
            Ok(verdict_report(v.equivalent, "stably equivalent", json!({ "witness": witness }), &extra))
        }
    }
}

fn qform_invariants(k: &QuadraticFunction, cap: u64) -> Res {
    let mut t = Table::default();
    let flavor = k.flavor();
    let det = k.det();
    t.row("flavor", flavor)
        .row("rank", k.rank())
        .row("signature", k.signature())
        .row("det", &det)
        .row("characteristic", yes_no(k.is_characteristic()));
    let mut json = json!({
        "flavor": flavor.to_string(),
        "rank": k.rank(),
        "signature": k.signature(),
        "det": serde_json::to_value(doc::Int(det.clone())).expect("ints serialize"),
        "characteristic": k.is_characteristic(),
        "nondegenerate": k.is_nondegenerate(),
        "nonsingular": k.is_nonsingular(),
    });
    if !k.is_characteristic() && !k.is_even() {
        t.row("boundary", "none (neither even nor characteristic)");
        return Ok(Report::new(Status::Positive, json, t.finish()));
    }
    let family = tf_core::manifolds::family_of(k)?;
    family_rows(&family, &mut t, &mut json);
    let g = gauss_invariant(&family.q_at_section, cap)?;
    t.row("GS", gauss_text(&g));
    json["gauss"] = gauss_json(&g);
    if k.is_nondegenerate() && k.is_characteristic() {
        let s = sbar_from_presentation(k)?;
        t.row("s̄", s);
        json["sbar"] = rat(s);
    }
    Ok(Report::new(Status::Positive, json, t.finish()))
}

fn family_rows(f: &QuadraticLinkingFamily, t: &mut Table, json: &mut Value) {
    let q = &f.q_at_section;
    t.row("G", &f.group)
        .row("|TG|", q.group().torsion_order())
        .row("b", matrix(q.base().gram()))
        .row("q", list(q.gen_values()))
        .row("β", list(&f.beta))
        .row("β divisibility", f.beta_divisibility)
        .row("refinement", if f.characteristic { "characteristic" } else { "even" });
    json["group"] = group_json(&f.group);
    json["torsion_order"] = json!(q.group().torsion_order());
    json["b"] = report::rat_matrix(q.base().gram());
    json["q"] = rats(q.gen_values());
    json["beta"] = json!(f.beta);
    json["beta_divisibility"] = json!(f.beta_divisibility);
    json["refinement"] = json!(if f.characteristic { "characteristic" } else { "even" });
}

fn glue_cmd(args: &GlueArgs) -> Res {
    let k0 = load::<QuadraticFunctionDoc>(&args.first)?;
    let k1 = load::<QuadraticFunctionDoc>(&args.second)?;
    let (q0, q1) = (boundary_quadratic(&k0)?, boundary_quadratic(&k1)?);
    let theta = doc::parse::<HomDoc>(&read(&args.theta)?, &args.theta.display().to_string())?
        .to_hom(q0.group(), q1.group())
        .map_err(|mut e| {
            e.source = args.theta.display().to_string();
            CliError::from(e)
        })?;
    let g = glue(&k0, &k1, &theta)?;
    Ok(Report::document(to_json::<QuadraticFunctionDoc>(&g.kappa)))
}

// ---------------------------------------------------------------- lform

fn kk_json(kk: &KKInvariants) -> Value {
    json!({
        "ranks": kk.ranks.iter().map(|(&(p, k), &r)| json!({ "p": p, "k": k, "rank": r })).collect::<Vec<_>>(),
        "sigma": kk.sigma.iter().map(|(k, s)| (k.to_string(), Value::String(s.to_string()))).collect::<serde_json::Map<_, _>>(),
        "char_nonzero": kk.char_nonzero.iter().map(|(k, &c)| (k.to_string(), Value::Bool(c))).collect::<serde_json::Map<_, _>>(),
        "odd_discriminant": kk.odd_discriminant.iter().map(|(&(p, k), &d)| json!({ "p": p, "k": k, "legendre": d })).collect::<Vec<_>>(),
    })
}

fn kk_rows(kk: &KKInvariants, t: &mut Table) {
    for (&(p, k), r) in &kk.ranks {
        t.row(format!("rank Z/{p}^{k}"), r);
    }
    for (k, s) in &kk.sigma {
        t.row(format!("σ_{k}"), s);
    }
    for (k, c) in &kk.char_nonzero {
        t.row(format!("characteristic ≠ 0 at level {k}"), yes_no(*c));
    }
    for (&(p, k), d) in &kk.odd_discriminant {
        t.row(format!("discriminant Z/{p}^{k}"), d);
    }
}

fn lform(cli: &Cli, cmd: &LformCmd) -> Res {
    match cmd {
        LformCmd::Invariants { input } => {
            let b = load::<LinkingFormDoc>(input)?;
            let kk = kk_invariants(&b, cli.oracle_cap)?;
            let h = homogeneous_refinement(&b);
            let g = gauss_invariant(&h, cli.oracle_cap)?;
            let parts = primary_decompose(&b)?;
            let mut t = Table::default();
            t.row("G", b.group()).row("order", b.order()).row("exponent", b.exponent());
            for (p, part) in &parts {
                t.row(format!("{p}-part"), matrix(part.gram()));
            }
            kk_rows(&kk, &mut t);
            t.row("homogeneous GS", gauss_text(&g));
            let json = json!({
                "group": group_json(b.group()),
                "order": b.order(),
                "exponent": b.exponent(),
                "primary": parts.iter().map(|(p, part)| json!({ "p": p, "form": report::lform_json(part) })).collect::<Vec<_>>(),
                "kk": kk_json(&kk),
                "homogeneous": { "q": qlf_json(&h), "gauss": gauss_json(&g) },
            });
            Ok(Report::new(Status::Positive, json, t.finish()))
        }
        LformCmd::Kk { input } => {
            let b = load::<LinkingFormDoc>(input)?;
            let kk = kk_invariants(&b, cli.oracle_cap)?;
            let mut t = Table::default();
            kk_rows(&kk, &mut t);
            Ok(Report::new(Status::Positive, kk_json(&kk), t.finish()))
        }
        LformCmd::Isometric { pair, cross_validate } => {
            let b0 = load::<LinkingFormDoc>(&pair.first)?;
            let b1 = load::<LinkingFormDoc>(&pair.second)?;
            let v = linking_forms_isometric(&b0, &b1, cli.oracle_cap, *cross_validate)?;
            Ok(verdict_report(v, "isometric", json!({}), ""))
        }
    }
}

// ---------------------------------------------------------------- qlf

fn qlf(cli: &Cli, cmd: &QlfCmd) -> Res {
    let cap = cli.oracle_cap;
    match cmd {
        QlfCmd::Invariants { input } => {
            let q = load::<QuadraticLinkingDoc>(input)?;
            let g = gauss_invariant(&q, cap)?;
            let w = q.wilkens_data();
            // Only indecomposable pairs have an ambiguity answer.
            let amb = match is_ambiguous(&w) {
                Ok(a) => Some(a),
                Err(tf_core::Error::Invalid(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let mut t = Table::default();
            t.row("G", q.group())
                .row("GS", gauss_text(&g))
                .row("β", list(&w.beta))
                .row("homogeneous", yes_no(q.group().is_zero(&w.beta)))
                .row("(b, β) ambiguous", amb.map_or("n/a (decomposable)", yes_no));
            let json = json!({
                "group": group_json(q.group()),
                "gauss": gauss_json(&g),
                "beta": w.beta,
                "homogeneous": q.group().is_zero(&w.beta),
                "ambiguous": amb,
            });
            Ok(Report::new(Status::Positive, json, t.finish()))
        }
        QlfCmd::Isometric(pair) => {
            let q0 = load::<QuadraticLinkingDoc>(&pair.first)?;
            let q1 = load::<QuadraticLinkingDoc>(&pair.second)?;
            let v = qlf_isometric(&q0, &q1, cap)?;
            let (k0, k1) = (gauss_invariant(&q0, cap)?.k, gauss_invariant(&q1, cap)?.k);
            let extra = format!("K = {k0}, {k1}");
            Ok(verdict_report(v, "isometric", json!({ "K": [rat(k0), rat(k1)] }), &extra))
        }
        QlfCmd::Translate { input, by } => {
            let q = load::<QuadraticLinkingDoc>(input)?;
            let n = q.group().ngens();
            if by.len() != n {
                return Err(CliError::Input(format!("--by has {} coordinates, the group has {n} generators", by.len())));
            }
            Ok(Report::document(to_json::<QuadraticLinkingDoc>(&q.translate(by))))
        }
        QlfCmd::Realize { input } => {
            let q = load::<QuadraticLinkingDoc>(input)?;
            match realize(&q, &cli.bounds()) {
                Ok(k) => Ok(Report::document(to_json::<QuadraticFunctionDoc>(&k))),
                Err(tf_core::Error::NotFound) => Ok(Report::new(
                    Status::Negative,
                    json!({ "found": false }),
                    "NOT found within the rank and entry bounds".into(),
                )),
                Err(e) => Err(e.into()),
            }
        }
        QlfCmd::Catalog { name, refine } => {
            let name: GeneratorName = name.parse().map_err(|e: tf_core::Error| CliError::Input(e.to_string()))?;
            let q = generator_catalog(name, refine.as_deref())?;
            Ok(Report::document(to_json::<QuadraticLinkingDoc>(&q)))
        }
    }
}

// ---------------------------------------------------------------- manifolds

fn level_noun(level: Level) -> &'static str {
    match level {
        Level::AlmostDiffeo => "almost diffeomorphic",
        Level::Homeo => "homeomorphic",
        Level::Diffeo => "diffeomorphic",
        Level::Homotopy => "homotopy equivalent",
    }
}

fn compare_report(v: Verdict, level: Level) -> Report {
    let json = json!({ "level": level.name(), "preserving": v.preserving, "reversing": v.reversing });
    let extra = format!(
        "orientation-preserving: {}, orientation-reversing: {}",
        yes_no(v.preserving),
        yes_no(v.reversing)
    );
    verdict_report(v.any(), level_noun(level), json, &extra)
}

fn manifold_rows(inv: &ManifoldInvariants, t: &mut Table, json: &mut Value) {
    t.row("dim", inv.dim);
    json["dim"] = json!(inv.dim);
    family_rows(&inv.family, t, json);
    if let Some(s) = inv.sbar {
        t.row("s̄", s);
        json["sbar"] = rat(s);
    }
    if let Some(s) = inv.s1 {
        t.row("s₁", s);
        json["s1"] = rat(s);
    }
    t.row("Σ_P exotic", yes_no(inv.sigma_p_exotic));
    json["sigma_p_exotic"] = json!(inv.sigma_p_exotic);
}

fn manifold(cli: &Cli, cmd: &ManifoldCmd) -> Res {
    match cmd {
        ManifoldCmd::Invariants { input } => {
            let p = load::<ManifoldDoc>(input)?;
            let inv = invariants(&p)?;
            let (mut t, mut json) = (Table::default(), json!({}));
            manifold_rows(&inv, &mut t, &mut json);
            Ok(Report::new(Status::Positive, json, t.finish()))
        }
        ManifoldCmd::Compare { pair, level } => {
            let p0 = load::<ManifoldDoc>(&pair.first)?;
            let p1 = load::<ManifoldDoc>(&pair.second)?;
            Ok(compare_report(compare(&p0, &p1, *level, cli.oracle_cap)?, *level))
        }
        ManifoldCmd::Reverse { input } => {
            let p = load::<ManifoldDoc>(input)?;
            Ok(Report::document(to_json::<ManifoldDoc>(&p.reverse_orientation())))
        }
    }
}

fn bundles(values: &[i64], inputs: &[std::path::PathBuf], count: usize) -> Result<Vec<SphereBundle>, CliError> {
    match (values.len(), inputs.len()) {
        (v, 0) if v == 2 * count => Ok(values.chunks(2).map(|c| SphereBundle { m: c[0], n: c[1] }).collect()),
        (0, i) if i == count => inputs.iter().map(|p| load::<BundleDoc>(p)).collect(),
        _ => Err(CliError::Input(format!(
            "expected {} integers (m n per bundle) or {count} --input documents",
            2 * count
        ))),
    }
}

fn bundle_rows(b: &BundleInvariants, t: &mut Table, json: &mut Value) {
    let pi = pi3_invariants(b.bundle.m, b.bundle.n);
    t.row("bundle", format!("P(m = {}, n = {})", b.bundle.m, b.bundle.n))
        .row("euler, stable class", format!("{}, {}", pi.euler, pi.stable))
        .row("π₃(SG(4))", format!("({}, {})", pi.sg4.0, pi.sg4.1))
        .row("β", format!("{}·e", b.beta));
    json["bundle"] = json!(BundleDoc::from_value(&b.bundle));
    json["euler"] = json!(pi.euler);
    json["stable_class"] = json!(pi.stable);
    json["sg4"] = json!([pi.sg4.0, pi.sg4.1]);
    json["beta"] = json!(b.beta);
    if let Some(q) = &b.q {
        t.row("q", format!("{} on {}", list(q.gen_values()), q.group()));
        json["q"] = qlf_json(q);
    }
    if let Some(s) = b.sbar {
        t.row("s̄", s);
        json["sbar"] = rat(s);
    }
    if let Some(s) = b.s1 {
        t.row("s₁", s);
        json["s1"] = rat(s);
    }
}

fn bundle(cli: &Cli, cmd: &BundleCmd) -> Res {
    match cmd {
        BundleCmd::Invariants { values, input } => {
            let inputs: Vec<_> = input.iter().cloned().collect();
            let b = bundles(values, &inputs, 1)?[0];
            let inv = bundle_invariants(b)?;
            let (mut t, mut json) = (Table::default(), json!({}));
            bundle_rows(&inv, &mut t, &mut json);
            Ok(Report::new(Status::Positive, json, t.finish()))
        }
        BundleCmd::Compare { values, input, level } => {
            let bs = bundles(values, input, 2)?;
            Ok(compare_report(bundle_compare(bs[0], bs[1], *level)?, *level))
        }
        BundleCmd::Sweep { max_n, level } => {
            let levels: Vec<Level> = if level.is_empty() { Level::ALL.to_vec() } else { level.clone() };
            let r = coherence_grid(*max_n, &levels, cli.oracle_cap)?;
            let per_level = r.checked / levels.len().max(1);
            let mut text = format!("coherence grid 1 ≤ n ≤ {max_n}\n{:<14} {:>12} {:>14}\n", "level", "comparisons", "disagreements");
            let mut rows = Vec::new();
            for &l in &levels {
                let d = r.disagreements.iter().filter(|x| x.level == l).count();
                text += &format!("{:<14} {:>12} {:>14}\n", l.name(), per_level, d);
                rows.push(json!({ "level": l.name(), "comparisons": per_level, "disagreements": d }));
            }
            for d in r.disagreements.iter().take(10) {
                text += &format!(
                    "  {}: ({}, {}) vs ({}, {}): congruence {:?}, invariants {:?}\n",
                    d.level, d.b0.m, d.b0.n, d.b1.m, d.b1.n, d.congruence, d.generic
                );
            }
            let ok = r.disagreements.is_empty();
            let json = json!({ "max_n": max_n, "levels": rows, "checked": r.checked, "coherent": ok });
            Ok(Report::new(Status::from_bool(ok), json, text))
        }
    }
}

// ---------------------------------------------------------------- oracle

fn witness_report(w: Option<GroupHom>) -> Report {
    match w {
        Some(h) => verdict_report(true, "isometric", json!({ "witness": HomDoc::from_hom(&h) }), &format!("witness: {}", hom_text(&h))),
        None => verdict_report(false, "isometric", json!({ "witness": Value::Null }), ""),
    }
}

fn oracle(cli: &Cli, cmd: &OracleCmd) -> Res {
    let cap = cli.oracle_cap;
    match cmd {
        OracleCmd::Qlf(p) => {
            let (q0, q1) = (load::<QuadraticLinkingDoc>(&p.first)?, load::<QuadraticLinkingDoc>(&p.second)?);
            Ok(witness_report(brute_isometry(&q0, &q1, cap)?))
        }
        OracleCmd::Lform(p) => {
            let (b0, b1) = (load::<LinkingFormDoc>(&p.first)?, load::<LinkingFormDoc>(&p.second)?);
            Ok(witness_report(brute_isometry_linking(&b0, &b1, cap)?))
        }
        OracleCmd::Wilkens(p) => {
            let (q0, q1) = (load::<QuadraticLinkingDoc>(&p.first)?, load::<QuadraticLinkingDoc>(&p.second)?);
            Ok(witness_report(brute_isometry_wilkens(&q0.wilkens_data(), &q1.wilkens_data(), cap)?))
        }
    }
}
