use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};
use toposforge::fincat::FiniteCategory;
use toposforge::gluing::{
    glued_universe, naive_mismatches, realign_at_syntax, restricts_exactly, sample_syntax_problem, GluingContext,
};
use toposforge::internal::{
    check_glue, check_structure, external_internal_roundtrip, glue_type, realignment_structure_apply, sample_glue_input,
    sample_partial_isomorph,
};
use toposforge::sample::{random_presheaf, Shape};
use toposforge::sheaf_universe::{saturation_check, u8_search, SaturationMode, SheafUniverse, SoaConfig, SoaState, Solve};
use toposforge::site::{is_sheaf, sheafify, Site};
use toposforge::universe::{
    check_all, check_solution, classify_family, compare_hierarchy, instance_rng, realign_presheaf, sample_problem,
    CheckConfig, Classifier, Universe,
};
use toposforge::{Cap, Error, Outcome};

use crate::input;
use crate::report::{Report, Section};
use crate::{Cli, Command, Opts};

enum RunError {
    Input(anyhow::Error),
    Run(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Run(e)
    }
}

type Run<T> = std::result::Result<T, RunError>;

fn inp<T>(r: anyhow::Result<T>) -> Run<T> {
    r.map_err(RunError::Input)
}

fn guard(r: toposforge::Result<Outcome>) -> Outcome {
    r.unwrap_or_else(|e| match e {
        Error::CapExceeded { .. } | Error::BoundOverflow { .. } => Outcome::Inconclusive(e.to_string()),
        other => Outcome::Fail(other.to_string()),
    })
}

fn cap_of(o: &Opts) -> anyhow::Result<Cap> {
    if let Some(c) = o.cap {
        anyhow::ensure!(c >= 1, "--cap must be at least 1");
        return Ok(Cap(c));
    }
    match std::env::var("TOPOSFORGE_CAP") {
        Ok(s) => {
            let c: usize = s.trim().parse().map_err(|e| anyhow::anyhow!("TOPOSFORGE_CAP: {e}"))?;
            anyhow::ensure!(c >= 1, "TOPOSFORGE_CAP must be at least 1");
            Ok(Cap(c))
        }
        Err(_) => Ok(Cap::DEFAULT),
    }
}

fn bound(o: &Opts, default: usize) -> anyhow::Result<usize> {
    let n = o.bound.unwrap_or(default);
    anyhow::ensure!(n >= 1, "--bound must be at least 1");
    Ok(n)
}

fn bounds(o: &Opts, default: (usize, usize)) -> anyhow::Result<(usize, usize)> {
    let (n, m) = match &o.bounds {
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(v) => anyhow::bail!("--bounds takes two values N,M, got {}", v.len()),
        None => default,
    };
    anyhow::ensure!(n >= 1 && m >= 1, "bounds must be at least 1");
    Ok((n, m))
}

fn need_cat(o: &Opts) -> anyhow::Result<Arc<FiniteCategory>> {
    match &o.cat {
        Some(p) => input::load_category(p),
        None => anyhow::bail!("this command needs --cat"),
    }
}

fn need_site(o: &Opts, cap: Cap) -> anyhow::Result<Site> {
    let cat = o.cat.as_deref().map(input::load_category).transpose()?;
    match (&o.site, cat) {
        (Some(p), cat) => input::load_site(p, cat, cap),
        (None, Some(cat)) => Ok(Site::trivial(&cat)),
        (None, None) => anyhow::bail!("this command needs --site or --cat"),
    }
}

fn config(command: Command, o: &Opts, cap: Cap) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    let path = |p: &Option<std::path::PathBuf>| p.as_ref().map(|p| p.display().to_string());
    for (k, v) in [
        ("cat", path(&o.cat)),
        ("site", path(&o.site)),
        ("presheaf", path(&o.presheaf)),
        ("family", path(&o.family)),
        ("problem", path(&o.problem)),
    ] {
        if let Some(v) = v {
            m.insert(k.to_string(), json!(v));
        }
    }
    if let Some(b) = o.bound {
        m.insert("bound".into(), json!(b));
    }
    if let Some(b) = &o.bounds {
        m.insert("bounds".into(), json!(b));
    }
    if let Some(s) = o.stages {
        m.insert("stages".into(), json!(s));
    }
    if let Some(i) = o.instances {
        m.insert("instances".into(), json!(i));
    }
    m.insert("cap".into(), json!(cap.0));
    m.insert("seed".into(), json!(o.seed));
    m.insert("exhaustive".into(), json!(o.exhaustive));
    m.insert("command".into(), json!(name(command)));
    m
}

pub fn name(c: Command) -> &'static str {
    match c {
        Command::CheckAxioms => "check-axioms",
        Command::Classify => "classify",
        Command::Realign => "realign",
        Command::Sheafify => "sheafify",
        Command::Soa => "soa",
        Command::U8Search => "u8-search",
        Command::Glue => "glue",
        Command::Strictify => "strictify",
        Command::Roundtrip => "roundtrip",
    }
}

/// Runs the command; returns the text summary, the JSON report and the
/// exit status.
pub fn execute(cli: &Cli) -> (String, String, u8) {
    let o = &cli.opts;
    let result = inp(cap_of(o)).and_then(|cap| {
        let report = Report::new(name(cli.command), config(cli.command, o, cap));
        match cli.command {
            Command::CheckAxioms => check_axioms(o, cap, report),
            Command::Classify => classify(o, cap, report),
            Command::Realign => realign(o, cap, report),
            Command::Sheafify => sheafify_cmd(o, cap, report),
            Command::Soa => soa(o, cap, report),
            Command::U8Search => search(o, cap, report),
            Command::Glue => glue(o, cap, report),
            Command::Strictify => strictify(o, cap, report),
            Command::Roundtrip => roundtrip(o, cap, report),
        }
    });
    match result {
        Ok(r) => {
            let r = r.finish();
            (r.to_text(), r.to_json(), r.status.exit_code() as u8)
        }
        Err(RunError::Input(e)) => {
            let msg = format!("{e:#}");
            let doc = json!({ "command": name(cli.command), "error": msg, "status": "input-error" });
            (format!("error: {msg}\n"), format!("{doc:#}\n"), 3)
        }
        Err(RunError::Run(e)) => {
            let inconclusive = matches!(e, Error::CapExceeded { .. } | Error::BoundOverflow { .. });
            let status = if inconclusive { "inconclusive" } else { "fail" };
            let doc = json!({ "command": name(cli.command), "error": e.to_string(), "status": status });
            (format!("{}: {status}: {e}\n", name(cli.command)), format!("{doc:#}\n"), if inconclusive { 2 } else { 1 })
        }
    }
}

fn codes_json(cl: &Classifier, cat: &FiniteCategory) -> Value {
    let codes: BTreeMap<String, Value> = cat
        .objects()
        .map(|c| {
            let row: Vec<Value> = cl.codes[c].iter().map(|k| json!({ "sizes": k.sizes, "tables": k.tables })).collect();
            (cat.object_name(c).to_string(), Value::Array(row))
        })
        .collect();
    let points: BTreeMap<String, Value> = cat.objects().map(|c| (cat.object_name(c).to_string(), json!(cl.points[c]))).collect();
    json!({ "codes": codes, "points": points })
}

fn check_axioms(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let n = inp(bound(o, 2))?;
    let u = Universe::new(&cat, n)?;
    let cfg = CheckConfig {
        instances: o.instances.unwrap_or(200),
        seed: o.seed,
        exhaustive: o.exhaustive,
        shape: Shape::default(),
        cap,
    };
    for r in check_all(&u, &cfg) {
        let short = r.needed_bound.filter(|&m| n < m);
        let mut s = Section::new(r.axiom.to_string(), short.is_none());
        for i in &r.instances {
            s.push(format!("{} {}", i.index, i.description), &i.outcome);
        }
        if let Some(m) = r.needed_bound {
            s.note(format!("needed bound {m}"));
        }
        report.add(s);
    }
    Ok(report)
}

fn classify(o: &Opts, _cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let n = inp(bound(o, 2))?;
    let path = inp(o.family.clone().ok_or_else(|| anyhow::anyhow!("classify needs --family")))?;
    let f = inp(input::load_family(&path, &cat, n))?;
    let u = Universe::new(&cat, n)?;
    let cl = classify_family(&u, &f)?;
    let mut s = Section::new("classification", true);
    s.push("cartesian square", &guard(cl.verify(&u, &f).map(|_| Outcome::Pass)));
    s.push(
        "pullback comparison",
        &guard(cl.witness(&u, &f).and_then(|(pulled, iso)| {
            Ok(Outcome::check(iso.is_iso() && pulled.after(&iso)? == f, || "comparison is not an isomorphism over the base".into()))
        })),
    );
    report.add(s);
    report.data.insert("classifier".into(), codes_json(&cl, &cat));
    Ok(report)
}

fn realign(o: &Opts, _cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let n = inp(bound(o, 2))?;
    let u = Universe::new(&cat, n)?;
    let mut s = Section::new("strict realignment", true);
    if let Some(p) = &o.problem {
        let problem = inp(input::load_problem(p, &u))?;
        let cl = realign_presheaf(&u, &problem)?;
        s.push(p.display().to_string(), &check_solution(&u, &problem, &cl));
        report.data.insert("solution".into(), codes_json(&cl, &cat));
    } else {
        for i in 0..o.instances.unwrap_or(500) {
            let p = sample_problem(&u, Shape::default(), &mut instance_rng(o.seed, 81, i));
            let out = guard(realign_presheaf(&u, &p).map(|cl| check_solution(&u, &p, &cl)));
            s.push(format!("problem {i} over {:?}", p.base().sizes()), &out);
        }
    }
    report.add(s);
    Ok(report)
}

fn sheafify_one(x: &toposforge::presheaf::Presheaf, site: &Site, cap: Cap) -> toposforge::Result<Outcome> {
    let top = &site.topology;
    let s = sheafify(x, top, cap)?;
    if !is_sheaf(&s.sheaf, top, cap)? {
        return Ok(Outcome::fail("result is not a sheaf"));
    }
    if !sheafify(&s.sheaf, top, cap)?.unit.is_iso() {
        return Ok(Outcome::fail("sheafifying a sheaf is not invertible"));
    }
    Ok(Outcome::check(is_sheaf(x, top, cap)? == s.unit.is_iso(), || {
        "unit is invertible exactly when the input is a sheaf fails".into()
    }))
}

fn sheafify_cmd(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let site = inp(need_site(o, cap))?;
    let cat = site.category.clone();
    let mut s = Section::new("sheafification", true);
    if let Some(p) = &o.presheaf {
        let x = inp(input::load_presheaf(p, &cat))?;
        s.push(p.display().to_string(), &guard(sheafify_one(&x, &site, cap)));
        let sh = sheafify(&x, &site.topology, cap)?;
        report.data.insert(
            "sheaf".into(),
            json!({ "sizes": sh.sheaf.sizes(), "tables": sh.sheaf.tables(), "unit": sh.unit.components() }),
        );
    } else {
        for i in 0..o.instances.unwrap_or(50) {
            let x = random_presheaf(&cat, Shape::default(), &mut instance_rng(o.seed, 82, i));
            s.push(format!("presheaf {i} {:?}", x.sizes()), &guard(sheafify_one(&x, &site, cap)));
        }
    }
    report.add(s);
    Ok(report)
}

fn soa(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let site = inp(need_site(o, cap))?;
    let n = inp(bound(o, 2))?;
    let stages = o.stages.unwrap_or(2);
    let instances = o.instances.unwrap_or(50);
    let config = SoaConfig {
        bound: n,
        cap,
        ..SoaConfig::default()
    };
    let state = SoaState::new(&site, config)?.run(stages)?;
    let mut s = Section::new("stage invariants", true);
    s.extend(&state.verify()?);
    report.add(s);

    let mut s = Section::new("ledger problems", true);
    let mut d = Section::new("sampled problems", false);
    for i in 0..instances {
        let mut rng = instance_rng(o.seed, 83, i);
        if let Some(p) = state.ledger_problem(&mut rng)? {
            let out = guard(state.solve(&p).and_then(|r| match r {
                Solve::Solved(sol) => state.check_solution(&p, &sol),
                Solve::Unresolved(m) => Ok(Outcome::Fail(m)),
            }));
            s.push(format!("ledger problem {i} on generator {}", p.generator), &out);
        }
        if let Some(p) = state.sample_problem(&mut rng)? {
            let out = guard(state.solve(&p).and_then(|r| match r {
                Solve::Solved(sol) => state.check_solution(&p, &sol),
                Solve::Unresolved(m) => Ok(Outcome::Inconclusive(m)),
            }));
            d.push(format!("sampled problem {i} on generator {}", p.generator), &out);
        }
    }
    d.note("problems whose datum was not adjoined by the last stage are inconclusive");
    report.add(s);
    report.add(d);

    for mode in SaturationMode::ALL {
        let (after, r) = saturation_check(state.clone(), mode, instances, o.seed, stages + 1)?;
        let mut s = Section::new(format!("saturation {mode}"), true);
        s.extend(&r.instances);
        s.note(format!("finished at stage {}", after.index()));
        report.add(s);
    }
    let sizes: Vec<Value> = state.stages().iter().map(|st| json!(st.family.cod().sizes())).collect();
    report.data.insert("stage_bases".into(), Value::Array(sizes));
    report.data.insert("ledger".into(), json!(state.ledger().len()));
    report.data.insert("generators".into(), json!(state.generators().len()));
    report.data.insert("saturated".into(), json!(state.saturated()));
    Ok(report)
}

fn search(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let site = inp(need_site(o, cap))?;
    let n = inp(bound(o, 2))?;
    let h = SheafUniverse::new(&site, n, cap)?;
    let r = u8_search(&h, o.instances.unwrap_or(10_000), cap)?;
    let mut s = Section::new("strict extensions", false);
    s.push(
        "scan",
        &if r.truncated {
            Outcome::Inconclusive("budget reached".into())
        } else {
            Outcome::Pass
        },
    );
    for (i, p) in r.stuck.iter().enumerate() {
        s.push(
            format!("problem {i} on generator {}", p.generator),
            &Outcome::fail(format!("no strict extension among {} classifying maps", p.candidates)),
        );
    }
    s.note(r.summary());
    report.add(s);
    report.data.insert("scanned".into(), json!(r.scanned));
    report.data.insert("stuck".into(), json!(r.stuck.len()));
    Ok(report)
}

fn glue(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let (n, m) = inp(bounds(o, (2, 4)))?;
    let instances = o.instances.unwrap_or(100);
    let ctx = GluingContext::new(&cat)?;
    let gu = glued_universe(&ctx, n, m, cap)?;
    let mut s = Section::new("glued universe", true);
    s.push("open part and fibers", &guard(gu.check()));
    report.add(s);

    let small = Shape {
        generators: 2,
        relations: 1,
    };
    let mut adj = Section::new("adjunctions", true);
    let mut frac = Section::new("fracture", true);
    for i in 0..instances.min(20) {
        let mut rng = instance_rng(o.seed, 84, i);
        let xs: Vec<_> = (0..2).map(|_| random_presheaf(ctx.base(), small, &mut rng)).collect();
        let es: Vec<_> = (0..2).map(|_| random_presheaf(ctx.cone(), small, &mut rng)).collect();
        adj.push(format!("sample {i}"), &guard(ctx.check_adjunctions(&xs, &es, cap)));
    }
    for i in 0..instances {
        let e = random_presheaf(ctx.cone(), Shape::default(), &mut instance_rng(o.seed, 85, i));
        let out = guard(ctx.fracture(&e, cap).map(|f| Outcome::check(f.is_cartesian(), || "square is not cartesian".into())));
        frac.push(format!("object {i} {:?}", e.sizes()), &out);
    }
    report.add(adj);
    report.add(frac);

    let mut s = Section::new("realign at syntax", true);
    let mut naive = Section::new("naive classifier", false);
    for i in 0..instances {
        let mut rng = instance_rng(o.seed, 86, i);
        let r = sample_syntax_problem(&gu, Shape::default(), &mut rng).and_then(|(f, x0)| {
            let x = realign_at_syntax(&gu, &f, &x0)?;
            let k = naive_mismatches(&gu, &f, &x0)?;
            Ok((restricts_exactly(&gu, &x, &x0), k))
        });
        match r {
            Ok((strict, k)) => {
                s.push(format!("square {i}"), &Outcome::check(strict, || "restriction differs from x0".into()));
                naive.push(
                    format!("square {i}"),
                    &Outcome::check(k == 0, || format!("{k} open elements classified differently from q∘x0")),
                );
            }
            Err(e) => s.push(format!("square {i}"), &guard(Err(e))),
        }
    }
    naive.note("direct classification in the outer universe, compared with q∘x0 on the open part");
    report.add(s);
    report.add(naive);
    report.data.insert("open_base".into(), json!(gu.inner_ty.ty.sizes()));
    report.data.insert("glued_base".into(), json!(gu.base.sizes()));
    Ok(report)
}

fn strictify(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let (n, m) = inp(bounds(o, (2, 6)))?;
    let r = compare_hierarchy(&cat, n, m, cap)?;
    let mut s = Section::new("strictified Π", true);
    s.push(
        "codes commute with inclusion",
        &Outcome::check(r.strict(), || format!("{} mismatches", r.strict_mismatches.len())),
    );
    s.push(
        "scan is exhaustive",
        &Outcome::check(r.exhaustive(), || format!("scanned {:?}, counted {:?}", r.scanned, r.counted)),
    );
    s.push("inclusion is cartesian", &Outcome::check(r.inclusion_cartesian, || "not cartesian".into()));
    s.push("inclusion is natural", &Outcome::check(r.inclusion_commutes, || "not natural".into()));
    s.push(
        "off-level codes agree up to isomorphism",
        &Outcome::check(r.off_level.iter().all(|t| t.2), || "some strictified code is not isomorphic to the plain one".into()),
    );
    s.note(r.summary());
    report.add(s);
    let mut d = Section::new("plain Π", false);
    for mm in &r.plain_mismatches {
        d.push(
            format!("object {} datum {}", cat.object_name(mm.object), mm.datum),
            &Outcome::fail("plain code differs from the included lower code"),
        );
    }
    if r.plain_mismatches.is_empty() {
        d.note("no mismatches; the scan above is exhaustive");
    }
    report.add(d);
    Ok(report)
}

fn roundtrip(o: &Opts, cap: Cap, mut report: Report) -> Run<Report> {
    let cat = inp(need_cat(o))?;
    let n = inp(bound(o, 3))?;
    let instances = o.instances.unwrap_or(100);
    let u = Universe::new(&cat, n)?;
    let problems: Vec<_> = (0..instances)
        .map(|i| sample_problem(&u, Shape::default(), &mut instance_rng(o.seed, 87, i)))
        .collect();
    let r = external_internal_roundtrip(&u, &problems, cap);
    let mut s = Section::new("external and internal boundaries", true);
    s.extend(&r.instances);
    report.add(s);

    let mut s = Section::new("realignment structures", true);
    let mut g = Section::new("glue", true);
    for i in 0..instances {
        let out = guard(
            sample_partial_isomorph(&u, Shape::default(), &mut instance_rng(o.seed, 88, i), cap)
                .and_then(|d| check_structure(&u, &d, &realignment_structure_apply(&u, &d, cap)?, cap)),
        );
        s.push(format!("datum {i}"), &out);
        let out = guard(
            sample_glue_input(&u, Shape::default(), &mut instance_rng(o.seed, 89, i), cap)
                .and_then(|input| Ok(check_glue(&u, &input, &glue_type(&u, &input, cap)?))),
        );
        g.push(format!("input {i}"), &out);
    }
    report.add(s);
    report.add(g);
    Ok(report)
}
