use std::path::Path;

use hermcone::derived::{
    class_of_iso, class_of_morphism, herm_cone, structure_distance, torsor_add, triangle_class, HermStructure,
    HermTriangle, Roof,
};
use hermcone::gen::{isometric_copy, random_complex, random_matrix, random_pd, rng};
use hermcone::genera::{
    additive_from_multiplicative, bott_chern_point, genus_of_complex, todd_series, GenusKind, GenusSpec, PointInput,
    TruncSeries,
};
use hermcone::hermlin::{direct_sum, shift, HermComplex};
use hermcone::osm::{compose, verify_associativity, ToyMorphism, ToySpace};
use hermcone::torsion::tau_with;
use hermcone::verify::{run_suite, Report, RunOptions, Suite};
use hermcone::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bundle::Bundle;
use crate::chain::{morphism_doc, space_doc, ChainDoc};
use crate::{Cli, CliError, Command, Format, GenusAction, SampleKind};

/// Largest associativity residual accepted by `compose --check-assoc`.
const ASSOC_TOL: f64 = 1e-8;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_bundle(path: &Path) -> Result<Bundle, CliError> {
    Bundle::from_json(&read(path)?)
}

fn lib(ctx: &str) -> impl Fn(hermcone::Error) -> CliError + '_ {
    move |e| CliError::from_lib(e, ctx)
}

/// Twelve decimals, with `-0` printed as `0`.
pub fn fixed12(v: f64) -> String {
    format!("{:.12}", v + 0.0).replace("-0.000000000000", "0.000000000000")
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value")
}

/// Scalar results: bare number in text mode, an object otherwise.
fn scalar(fmt: Format, key: &str, v: f64, extra: serde_json::Value) -> String {
    match fmt {
        Format::Text => fixed12(v),
        Format::Json => {
            let mut o = json!({ key: v, "display": fixed12(v) });
            if let (Some(m), Some(e)) = (o.as_object_mut(), extra.as_object()) {
                m.extend(e.clone());
            }
            pretty(&o)
        }
    }
}

fn tolerances(cli: &Cli) -> Tolerances {
    let mut t = Tolerances::default();
    if let Some(x) = cli.tol {
        t.tau_tol = x;
    }
    t
}

#[derive(Debug, Serialize, Deserialize)]
struct GenusDoc {
    kind: GenusKind,
    coefficients: Vec<String>,
    #[serde(default = "one")]
    point_scale: f64,
}

fn one() -> f64 {
    1.0
}

/// Exit code and stdout text. With `--out`, the result goes to the file and
/// stdout stays empty; error bodies always go to stdout.
pub fn run(cli: &Cli) -> (i32, String) {
    match execute(cli) {
        Ok((code, text)) => match &cli.out {
            Some(p) => match std::fs::write(p, format!("{text}\n")) {
                Ok(()) => (code, String::new()),
                Err(e) => {
                    let err = CliError::Invalid(format!("{}: {e}", p.display()));
                    (err.code(), pretty(&err.body()))
                }
            },
            None => (code, text),
        },
        Err(e) => (e.code(), pretty(&e.body())),
    }
}

fn execute(cli: &Cli) -> Result<(i32, String), CliError> {
    let tol = tolerances(cli);
    match &cli.command {
        Command::Tau { bundle, name } => {
            let b = load_bundle(bundle)?;
            let cx = b.complex(name)?;
            let v = tau_with(&cx, &tol).map_err(lib(name))?;
            Ok((0, scalar(cli.format.unwrap_or(Format::Text), "tau", v, json!({ "name": name }))))
        }
        Command::Verify { suite, seed, cases, corrupt_rule } => {
            let suites = Suite::parse(suite).ok_or_else(|| CliError::Invalid(format!("unknown suite '{suite}'")))?;
            let opts = RunOptions { tol, corrupt_rule: corrupt_rule.clone() };
            let mut report = Report::default();
            for s in suites {
                let n = cases.unwrap_or(default_cases(s));
                report.extend(run_suite(s, *seed, n, &opts));
            }
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => report
                    .records
                    .iter()
                    .map(|r| serde_json::to_string(r).expect("record"))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Text => verify_summary(&report),
            };
            Ok((if report.all_pass() { 0 } else { 1 }, text))
        }
        Command::Cone { bundle, source, target, map, name } => {
            let b = load_bundle(bundle)?;
            let (a, t, r) = (b.structure(source)?, b.structure(target)?, b.roof(map)?);
            let hc = herm_cone(&a, &t, &r).map_err(lib("cone"))?;
            let mut out = Bundle::default();
            out.put_structure(name, &hc.structure);
            Ok((0, out.to_json()))
        }
        Command::ClassIso { bundle, roof, source, target } => {
            let b = load_bundle(bundle)?;
            let r = b.roof(roof)?;
            let v = match (source, target) {
                (Some(s), Some(t)) => class_of_morphism(&r, &b.structure(s)?, &b.structure(t)?),
                _ => class_of_iso(&r),
            }
            .map_err(lib(roof))?;
            Ok((0, scalar(cli.format.unwrap_or(Format::Json), "class", v, json!({ "roof": roof }))))
        }
        Command::ClassTriangle { bundle, triangle } => {
            let b = load_bundle(bundle)?;
            let t = b.triangle(triangle)?;
            let c = triangle_class(&t).map_err(lib(triangle))?;
            let extra = json!({ "triangle": triangle, "independence": c.independence });
            Ok((0, scalar(cli.format.unwrap_or(Format::Json), "class", c.value, extra)))
        }
        Command::Distance { bundle, a, b: bn } => {
            let b = load_bundle(bundle)?;
            let v = structure_distance(&b.structure(a)?, &b.structure(bn)?).map_err(lib("distance"))?;
            Ok((0, scalar(cli.format.unwrap_or(Format::Json), "distance", v, json!({ "a": a, "b": bn }))))
        }
        Command::Todd { order } => {
            let t = todd_series(*order);
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Text => t
                    .fractions()
                    .iter()
                    .enumerate()
                    .map(|(n, f)| format!("{n}\t{f}\t{:e}", t.to_f64().coeff(n)))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Json => pretty(&json!({
                    "order": order,
                    "fractions": t.fractions(),
                    "floats": t.to_f64().coeffs(),
                })),
            };
            Ok((0, text))
        }
        Command::Genus { action: GenusAction::Eval { spec, input } } => {
            let doc: GenusDoc =
                serde_json::from_str(&read(spec)?).map_err(|e| CliError::Invalid(format!("genus spec: {e}")))?;
            let series = TruncSeries::parse(&doc.coefficients).map_err(lib("genus spec"))?;
            let g = match doc.kind {
                GenusKind::Additive => GenusSpec::additive(series),
                GenusKind::Multiplicative => GenusSpec::multiplicative(series).map_err(lib("genus spec"))?,
            }
            .with_point_scale(doc.point_scale);
            let cx: HermComplex = serde_json::from_str(&read(input)?)
                .map_err(|e| CliError::Invalid(format!("input complex: {e}")))?;
            let cx = cx.validated().map_err(lib("input complex"))?;
            let phi = match g.kind {
                GenusKind::Additive => g.clone(),
                GenusKind::Multiplicative => additive_from_multiplicative(&g).map_err(lib("genus"))?,
            };
            // degree-zero parts only: ψ⁰ = 1 for every rank
            let value = match g.kind {
                GenusKind::Additive => genus_of_complex(&g, &cx).map_err(lib("genus"))?,
                GenusKind::Multiplicative => 1.0,
            };
            let point = bott_chern_point(&phi, &PointInput::Acyclic(cx)).ok();
            Ok((0, pretty(&json!({ "kind": g.kind, "genus": value, "point_class": point }))))
        }
        Command::Compose { chain, check_assoc } => {
            let doc = ChainDoc::from_json(&read(chain)?)?;
            let ms = doc.morphisms()?;
            let mut acc = ms[0].clone();
            for m in &ms[1..] {
                acc = compose(m, &acc).map_err(lib("compose"))?;
            }
            let composite = ChainDoc {
                spaces: vec![space_doc(&acc.source), space_doc(&acc.target)],
                morphisms: vec![morphism_doc(&acc)?],
            };
            if !check_assoc {
                return Ok((0, pretty(&serde_json::to_value(&composite).expect("chain"))));
            }
            if ms.len() < 3 {
                return Err(CliError::Precondition("--check-assoc needs at least three morphisms".into()));
            }
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for k in 0..ms.len() - 2 {
                let r = verify_associativity(&ms[k], &ms[k + 1], &ms[k + 2]).map_err(lib("associativity"))?;
                worst = worst.max(r);
                rows.push(json!({ "triple": k, "residual": r, "pass": r <= ASSOC_TOL }));
            }
            let pass = worst <= ASSOC_TOL;
            let body = json!({ "composite": composite, "associativity": rows, "max_residual": worst, "pass": pass });
            Ok((if pass { 0 } else { 1 }, pretty(&body)))
        }
        Command::Sample { kind, a, seed } => sample(*kind, *a, *seed).map(|t| (0, t)),
    }
}

pub fn default_cases(s: Suite) -> u64 {
    match s {
        Suite::TriangleClasses => 50,
        _ => 200,
    }
}

fn verify_summary(rep: &Report) -> String {
    let mut lines = Vec::new();
    let mut seen: Vec<(String, String)> = Vec::new();
    for r in &rep.records {
        let key = (r.suite.clone(), r.rule.clone());
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    for (suite, rule) in seen {
        let rs: Vec<_> = rep.records.iter().filter(|r| r.suite == suite && r.rule == rule).collect();
        let worst = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
        let failed = rs.iter().filter(|r| !r.pass).count();
        let verdict = if failed == 0 { "PASS" } else { "FAIL" };
        lines.push(format!("{verdict} {suite} {rule} cases={} failed={failed} max_residual={worst:e}", rs.len()));
    }
    lines.push(format!("{} records, {}", rep.records.len(), if rep.all_pass() { "all pass" } else { "FAILURES" }));
    lines.join("\n")
}

fn sample(kind: SampleKind, a: f64, seed: u64) -> Result<String, CliError> {
    let mut r = rng(seed);
    let mut b = Bundle::default();
    match kind {
        SampleKind::Ea => {
            b.put_complex("ea", &HermComplex::ea(a));
        }
        SampleKind::Meager => {
            let e = HermComplex::ea(a);
            b.put_complex("meager", &direct_sum(&e, &shift(&e, 1)));
        }
        SampleKind::Point => {
            b.put_complex("point", &HermComplex::single(0, hermcone::linalg::eye(1)));
        }
        SampleKind::Iso => {
            let c = random_complex(&mut r, 3, 3);
            let (_, q) = isometric_copy(&mut r, &c);
            b.put_complex("c", &c);
            b.put_roof("id", &Roof::identity(&c));
            b.put_roof("iso", &Roof::from_map(q));
        }
        SampleKind::Triangle => {
            let ha = HermStructure::trivial(&random_complex(&mut r, 2, 2));
            let hc = HermStructure::trivial(&random_complex(&mut r, 2, 2));
            let hb = ha.direct_sum(&hc);
            let t = HermTriangle::split(ha, hc, hb).map_err(lib("sample"))?;
            b.put_triangle("t", &t);
            let u = random_complex(&mut r, 2, 3);
            let h1 = HermStructure::trivial(&u);
            b.put_structure("h1", &h1);
            b.put_structure("h2", &torsor_add(&h1, a));
        }
        SampleKind::Chain => {
            let dims = [2usize, 3, 2, 2];
            let sp: Vec<ToySpace> = ["X", "Y", "Z", "W"]
                .iter()
                .zip(dims)
                .map(|(l, n)| ToySpace::new(l, random_pd(&mut r, n)).expect("random metric"))
                .collect();
            let mut ms = Vec::new();
            for k in 0..3 {
                let df = random_matrix(&mut r, dims[k + 1], dims[k]);
                ms.push(ToyMorphism::ambient(sp[k].clone(), sp[k + 1].clone(), df).map_err(lib("sample"))?);
            }
            let doc = ChainDoc {
                spaces: sp.iter().map(space_doc).collect(),
                morphisms: ms
                    .iter()
                    .map(|m| {
                        let mut d = morphism_doc(m)?;
                        d.structure = None;
                        Ok(d)
                    })
                    .collect::<Result<_, CliError>>()?,
            };
            return Ok(pretty(&serde_json::to_value(&doc).expect("chain")));
        }
        SampleKind::Genus => {
            let doc = GenusDoc {
                kind: GenusKind::Additive,
                coefficients: vec!["1".into(), "1".into(), "1/2".into(), "1/6".into()],
                point_scale: 1.0,
            };
            return Ok(pretty(&serde_json::to_value(&doc).expect("genus")));
        }
    }
    Ok(b.to_json())
}
