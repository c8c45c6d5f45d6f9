//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero when any of them fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toposforge::corpus::{categories, sites};
use toposforge::fincat::FiniteCategory;
use toposforge::gluing::{
    glued_universe, naive_mismatches, realign_at_syntax, restricts_exactly, sample_syntax_problem, GluingContext,
};
use toposforge::internal::{
    check_glue, check_structure, external_internal_roundtrip, glue_type, realignment_structure_apply, sample_glue_input,
    sample_partial_isomorph,
};
use toposforge::presheaf::{
    colimit_descent, colimit_injections_mono, colimit_of_cartesian_mono, coproduct, coproduct_disjointness,
    cover_reflects_mono, finite_colimit, pullback, pushout_adhesivity, random_hom, Diagram, Presheaf, PresheafMap,
};
use toposforge::sample::{random_cover, random_family, random_presheaf, random_subobject, Shape};
use toposforge::sheaf_universe::{
    classify_sheaf_family, saturation_check, SaturationMode, SheafUniverse, SoaConfig, SoaState, Solve,
};
use toposforge::site::sheafify_map;
use toposforge::universe::{
    check_all, check_solution, compare_hierarchy, instance_rng, realign_presheaf, sample_problem, Axiom, CheckConfig,
    Universe,
};
use toposforge::{Cap, Outcome, Result, Tally};

const SEED: u64 = 0xACCE97;
const CAP: Cap = Cap::DEFAULT;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn record(t: &mut Tally, r: Result<Outcome>) {
    t.record(&r.unwrap_or_else(|e| Outcome::fail(format!("error: {e}"))));
}

fn tally_line(t: &Tally) -> String {
    match &t.first_failure {
        Some(f) => format!("{}/{} pass, first failure: {f}", t.pass, t.total()),
        None => format!("{}/{} pass", t.pass, t.total()),
    }
}

fn rng(salt: u64, i: usize) -> ChaCha8Rng {
    instance_rng(SEED, salt, i)
}

fn universe_axioms() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut instances = 0;
    for (name, cat) in categories() {
        for n in [2, 3] {
            let u = match Universe::new(&cat, n) {
                Ok(u) => u,
                Err(e) => return verdict(false, format!("{name} N={n}: {e}")),
            };
            let cfg = CheckConfig {
                instances: 200,
                seed: SEED,
                exhaustive: true,
                shape: Shape::default(),
                cap: CAP,
            };
            for r in check_all(&u, &cfg) {
                instances += r.tally.total();
                let good = match r.axiom {
                    Axiom::U2 | Axiom::U6 => r.acceptable(n),
                    _ => r.tally.fail == 0,
                };
                if !good {
                    ok = false;
                    lines.push(format!("{name} N={n} {}: {}", r.axiom, tally_line(&r.tally)));
                }
                if let Some(m) = r.needed_bound.filter(|&m| n < m) {
                    lines.push(format!("{name} N={n} {} needs bound {m}", r.axiom));
                }
            }
        }
    }
    lines.insert(0, format!("{instances} instances"));
    verdict(ok, lines.join("; "))
}

fn strict_realignment() -> Verdict {
    let mut t = Tally::default();
    for (k, (_, cat)) in categories().into_iter().enumerate() {
        for n in [2, 3] {
            let u = match Universe::new(&cat, n) {
                Ok(u) => u,
                Err(e) => return verdict(false, e.to_string()),
            };
            for i in 0..60 {
                let p = sample_problem(&u, Shape::default(), &mut rng(200 + k as u64 * 10 + n as u64, i));
                record(&mut t, realign_presheaf(&u, &p).map(|cl| check_solution(&u, &p, &cl)));
            }
        }
    }
    verdict(t.fail == 0 && t.inconclusive == 0 && t.pass >= 500, tally_line(&t))
}

/// Smallness is asserted at N = 2. At N = 3, sheafified families that leave
/// the bound are counted and classification is checked on the rest.
fn sheaf_universe() -> Verdict {
    let (mut small, mut sound) = (Tally::default(), Tally::default());
    let mut outside = 0;
    for (k, (_, site)) in sites().into_iter().enumerate() {
        for n in [2, 3] {
            let h = match SheafUniverse::new(&site, n, CAP) {
                Ok(h) => h,
                Err(e) => return verdict(false, e.to_string()),
            };
            for i in 0..40 {
                let mut r = rng(300 + k as u64 * 10 + n as u64, i);
                let b = random_presheaf(&site.category, Shape::default(), &mut r);
                let f = random_family(&b, n, Shape::default(), &mut r);
                let fs = match sheafify_map(&f, &site.topology, CAP) {
                    Ok((_, _, fs)) => fs,
                    Err(e) => {
                        sound.record(&Outcome::fail(e.to_string()));
                        continue;
                    }
                };
                let in_class = h.in_class(&fs);
                if n == 2 {
                    small.record(&Outcome::check(in_class, || {
                        format!("sheafified family has a fiber of size {}", fs.max_fiber())
                    }));
                } else if !in_class {
                    outside += 1;
                    continue;
                }
                record(
                    &mut sound,
                    classify_sheaf_family(&h, &fs, CAP)
                        .map(|cl| Outcome::check(cl.witness.is_iso(), || "pullback comparison is not invertible".into())),
                );
            }
        }
    }
    verdict(
        small.fail + sound.fail == 0 && small.inconclusive + sound.inconclusive == 0,
        format!(
            "smallness at N=2 {}; classification {}; at N=3 {outside} sheafified families leave the bound",
            tally_line(&small),
            tally_line(&sound)
        ),
    )
}

fn small_object_argument() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, site) in sites() {
        let config = SoaConfig {
            bound: 2,
            cap: CAP,
            ..SoaConfig::default()
        };
        let state = match SoaState::new(&site, config).and_then(|s| s.run(2)) {
            Ok(s) => s,
            Err(e) => return verdict(false, format!("{name}: {e}")),
        };
        let mut links = Tally::default();
        match state.verify() {
            Ok(v) => v.iter().for_each(|(_, o)| links.record(o)),
            Err(e) => links.record(&Outcome::fail(e.to_string())),
        }
        let mut ledger = Tally::default();
        for i in 0..50 {
            match state.ledger_problem(&mut rng(400, i)) {
                Ok(Some(p)) => record(
                    &mut ledger,
                    state.solve(&p).and_then(|r| match r {
                        Solve::Solved(sol) => state.check_solution(&p, &sol),
                        Solve::Unresolved(m) => Ok(Outcome::Fail(m)),
                    }),
                ),
                Ok(None) => {}
                Err(e) => ledger.record(&Outcome::fail(e.to_string())),
            }
        }
        let mut modes = Vec::new();
        for mode in SaturationMode::ALL {
            match saturation_check(state.clone(), mode, 50, SEED, 3) {
                Ok((_, r)) => {
                    ok &= r.passed(50);
                    modes.push(format!("{mode} {}", tally_line(&r.tally)));
                }
                Err(e) => {
                    ok = false;
                    modes.push(format!("{mode} error: {e}"));
                }
            }
        }
        ok &= links.fail == 0 && links.inconclusive == 0 && ledger.fail == 0 && ledger.inconclusive == 0;
        lines.push(format!(
            "{name}: stages {}, ledger {}, {}",
            tally_line(&links),
            tally_line(&ledger),
            modes.join(", ")
        ));
    }
    verdict(ok, lines.join("; "))
}

fn hierarchy() -> Verdict {
    let cat = categories()[1].1.clone();
    match compare_hierarchy(&cat, 2, 6, CAP) {
        Ok(r) => verdict(r.passed() && (!r.plain_mismatches.is_empty() || r.exhaustive()), r.summary()),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn gluing() -> Verdict {
    let cats = categories();
    let cases: [(&Arc<FiniteCategory>, &str, usize, usize); 3] =
        [(&cats[0].1, "terminal", 2, 4), (&cats[1].1, "interval", 2, 4), (&cats[1].1, "interval", 3, 3)];
    let mut ok = true;
    let mut naive_total = 0;
    let mut lines = Vec::new();
    for (k, (cat, name, n, m)) in cases.into_iter().enumerate() {
        let gu = match GluingContext::new(cat).and_then(|ctx| glued_universe(&ctx, n, m, CAP)) {
            Ok(g) => g,
            Err(e) => return verdict(false, format!("{name} ({n},{m}): {e}")),
        };
        let open = gu.restricts_to_inner();
        let fibers = gu.check().map(|o| o.is_pass()).unwrap_or(false);
        let mut strict = Tally::default();
        let mut naive = 0;
        for i in 0..100 {
            let r = sample_syntax_problem(&gu, Shape::default(), &mut rng(600 + k as u64, i)).and_then(|(f, x0)| {
                let x = realign_at_syntax(&gu, &f, &x0)?;
                Ok((restricts_exactly(&gu, &x, &x0), naive_mismatches(&gu, &f, &x0)?))
            });
            match r {
                Ok((s, bad)) => {
                    strict.record(&Outcome::check(s, || "restriction differs from x0".into()));
                    naive += usize::from(bad > 0);
                }
                Err(e) => strict.record(&Outcome::fail(e.to_string())),
            }
        }
        naive_total += naive;
        ok &= open && fibers && strict.pass == 100;
        lines.push(format!(
            "{name} ({n},{m}): open part {}, strict {}, naive failures {naive}",
            if open { "exact" } else { "differs" },
            tally_line(&strict)
        ));
    }
    verdict(ok && naive_total >= 1, lines.join("; "))
}

fn internal_external() -> Verdict {
    let (mut rt, mut st, mut gl) = (Tally::default(), Tally::default(), Tally::default());
    for (k, (_, cat)) in categories().into_iter().enumerate() {
        let u = match Universe::new(&cat, 3) {
            Ok(u) => u,
            Err(e) => return verdict(false, e.to_string()),
        };
        let salt = 700 + 10 * k as u64;
        let problems: Vec<_> = (0..100).map(|i| sample_problem(&u, Shape::default(), &mut rng(salt, i))).collect();
        let r = external_internal_roundtrip(&u, &problems, CAP);
        r.instances.iter().for_each(|(_, o)| rt.record(o));
        for i in 0..100 {
            record(
                &mut st,
                sample_partial_isomorph(&u, Shape::default(), &mut rng(salt + 1, i), CAP)
                    .and_then(|d| check_structure(&u, &d, &realignment_structure_apply(&u, &d, CAP)?, CAP)),
            );
            record(
                &mut gl,
                sample_glue_input(&u, Shape::default(), &mut rng(salt + 2, i), CAP)
                    .and_then(|input| Ok(check_glue(&u, &input, &glue_type(&u, &input, CAP)?))),
            );
        }
    }
    let clean = |t: &Tally| t.fail == 0 && t.inconclusive == 0 && t.pass >= 100;
    verdict(
        clean(&rt) && clean(&st) && clean(&gl),
        format!("roundtrip {}; structures {}; glue {}", tally_line(&rt), tally_line(&st), tally_line(&gl)),
    )
}

fn family(base: &Presheaf, r: &mut ChaCha8Rng) -> PresheafMap {
    random_family(base, 3, Shape::default(), r)
}

/// A span from a pullback, a kernel pair, a chain, or a span of random maps.
fn base_diagram(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Diagram> {
    let z = random_presheaf(cat, Shape::default(), r);
    match r.gen_range(0..4) {
        0 => {
            let (h, k) = (family(&z, r), family(&z, r));
            let pb = pullback(&h, &k, CAP)?;
            Diagram::new(cat.clone(), vec![pb.apex, h.dom().clone(), k.dom().clone()], vec![(0, 1, pb.left), (0, 2, pb.right)])
        }
        1 => {
            let h = family(&z, r);
            let pb = pullback(&h, &h, CAP)?;
            Diagram::new(cat.clone(), vec![pb.apex, h.dom().clone()], vec![(0, 1, pb.left), (0, 1, pb.right)])
        }
        2 => {
            let f1 = family(&z, r);
            let f0 = family(f1.dom(), r);
            Diagram::new(
                cat.clone(),
                vec![f0.dom().clone(), f1.dom().clone(), z],
                vec![(0, 1, f0), (1, 2, f1)],
            )
        }
        _ => {
            let (x, y) = (random_presheaf(cat, Shape::default(), r), random_presheaf(cat, Shape::default(), r));
            match (random_hom(&z, &x, r), random_hom(&z, &y, r)) {
                (Some(f), Some(g)) => Diagram::new(cat.clone(), vec![z, x, y], vec![(0, 1, f), (0, 2, g)]),
                _ => Diagram::new(cat.clone(), vec![z], vec![]),
            }
        }
    }
}

/// Pulls `q` back along the colimit injections of `base`, giving a
/// cartesian transformation into `base`.
fn pulled_back(base: &Diagram, q: &PresheafMap) -> Result<(Diagram, Vec<PresheafMap>)> {
    let co = finite_colimit(base);
    let pbs = co.injections.iter().map(|inj| pullback(inj, q, CAP)).collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for (s, t, f) in &base.edges {
        let to_x = f.after(&pbs[*s].left)?;
        let to_z = co.injections[*t].after(&to_x)?;
        edges.push((*s, *t, pbs[*t].induced(&to_x, &pbs[*s].right, &to_z)?));
    }
    let total = Diagram::new(base.cat.clone(), pbs.iter().map(|p| p.apex.clone()).collect(), edges)?;
    Ok((total, pbs.into_iter().map(|p| p.left).collect()))
}

fn mono_diagram(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Diagram> {
    let z = random_presheaf(cat, Shape::default(), r);
    match r.gen_range(0..3) {
        0 => {
            let m1 = random_subobject(&z, 0.6, r);
            let m0 = random_subobject(m1.dom(), 0.6, r);
            Diagram::new(cat.clone(), vec![m0.dom().clone(), m1.dom().clone(), z], vec![(0, 1, m0), (1, 2, m1)])
        }
        1 => {
            let (a, b) = (random_subobject(&z, 0.5, r), random_subobject(&z, 0.5, r));
            let pb = pullback(&a, &b, CAP)?;
            Diagram::new(cat.clone(), vec![pb.apex, a.dom().clone(), b.dom().clone()], vec![(0, 1, pb.left), (0, 2, pb.right)])
        }
        _ => {
            let m = random_subobject(&z, 0.5, r);
            let extra = random_presheaf(cat, Shape::default(), r);
            let co = coproduct(cat, &[m.dom().clone(), extra])?;
            let inj = co.injections[0].clone();
            Diagram::new(cat.clone(), vec![m.dom().clone(), z, co.apex], vec![(0, 1, m), (0, 2, inj)])
        }
    }
}

type Suite = fn(&Arc<FiniteCategory>, &mut ChaCha8Rng) -> Result<Outcome>;

fn disjointness(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut summands: Vec<Presheaf> = (0..r.gen_range(1..=3)).map(|_| random_presheaf(cat, Shape::default(), r)).collect();
    if r.gen_bool(0.3) {
        summands.push(summands[0].clone());
    }
    coproduct_disjointness(&summands, CAP)
}

fn adhesivity(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    let z = random_presheaf(cat, Shape::default(), r);
    let h = family(&z, r);
    let m = random_subobject(h.dom(), 0.5, r);
    let g = match r.gen_range(0..3) {
        0 => h.after(&m)?,
        1 => PresheafMap::to_terminal(m.dom()),
        _ => {
            let y = random_presheaf(cat, Shape::default(), r);
            random_hom(m.dom(), &y, r).unwrap_or_else(|| PresheafMap::to_terminal(m.dom()))
        }
    };
    pushout_adhesivity(&m, &g)
}

fn descent(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    let base = base_diagram(cat, r)?;
    let apex = finite_colimit(&base).apex;
    let (total, legs) = pulled_back(&base, &family(&apex, r))?;
    colimit_descent(&base, &total, &legs)
}

fn injections_mono(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    colimit_injections_mono(&mono_diagram(cat, r)?)
}

fn cartesian_mono(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    let base = base_diagram(cat, r)?;
    let apex = finite_colimit(&base).apex;
    let (sub, legs) = pulled_back(&base, &random_subobject(&apex, 0.5, r))?;
    colimit_of_cartesian_mono(&base, &sub, &legs)
}

fn reflects_mono(cat: &Arc<FiniteCategory>, r: &mut ChaCha8Rng) -> Result<Outcome> {
    let c = random_presheaf(cat, Shape::default(), r);
    let b = if r.gen_bool(0.5) { random_subobject(&c, 0.6, r) } else { family(&c, r) };
    let e = if r.gen_bool(0.3) { PresheafMap::identity(b.dom()) } else { random_cover(b.dom(), Shape::default(), r) };
    cover_reflects_mono(&e, &b)
}

fn descent_suites() -> Verdict {
    let suites: [(&str, Suite); 6] = [
        ("disjointness", disjointness),
        ("adhesivity", adhesivity),
        ("colimit descent", descent),
        ("injections mono", injections_mono),
        ("cartesian mono", cartesian_mono),
        ("cover reflects mono", reflects_mono),
    ];
    let cats = categories();
    let mut ok = true;
    let mut lines = Vec::new();
    for (k, (name, suite)) in suites.into_iter().enumerate() {
        let mut t = Tally::default();
        for i in 0..200 {
            let cat = &cats[i % cats.len()].1;
            record(&mut t, suite(cat, &mut rng(800 + k as u64, i)));
        }
        ok &= t.fail == 0 && t.inconclusive == 0 && t.pass >= 200;
        lines.push(format!("{name} {}", tally_line(&t)));
    }
    verdict(ok, lines.join("; "))
}

/// A textual trace of a representative slice of every pipeline.
fn trace() -> String {
    let mut out = Vec::new();
    let cats = categories();
    for (_, cat) in &cats {
        let u = Universe::new(cat, 3).expect("universe");
        for i in 0..20 {
            let p = sample_problem(&u, Shape::default(), &mut rng(900, i));
            out.push(format!("{:?}", realign_presheaf(&u, &p).map(|cl| cl.codes)));
        }
        let problems: Vec<_> = (0..10).map(|i| sample_problem(&u, Shape::default(), &mut rng(901, i))).collect();
        out.push(format!("{:?}", external_internal_roundtrip(&u, &problems, CAP).instances));
    }
    let gu = GluingContext::new(&cats[1].1).and_then(|ctx| glued_universe(&ctx, 3, 3, CAP)).expect("glued");
    for i in 0..10 {
        let r = sample_syntax_problem(&gu, Shape::default(), &mut rng(902, i))
            .and_then(|(f, x0)| realign_at_syntax(&gu, &f, &x0).map(|x| (x.chi.components().to_vec(), x.top.components().to_vec())));
        out.push(format!("{r:?}"));
    }
    for i in 0..20 {
        out.push(format!("{:?}", descent(&cats[i % 5].1, &mut rng(903, i))));
    }
    let state = SoaState::new(&sites()[0].1, SoaConfig::default()).and_then(|s| s.run(2)).expect("soa");
    out.push(format!("{:?}", saturation_check(state, SaturationMode::ALL[0], 10, SEED, 3).map(|(_, r)| r.instances)));
    out.join("\n")
}

fn determinism() -> Verdict {
    let (a, b) = (trace(), trace());
    verdict(a == b, format!("{} bytes per trace", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("presheaf universe axioms", universe_axioms),
        ("strict realignment", strict_realignment),
        ("sheaf universe", sheaf_universe),
        ("bounded small object argument", small_object_argument),
        ("universe hierarchy", hierarchy),
        ("gluing along the cone", gluing),
        ("internal and external realignment", internal_external),
        ("colimit and descent properties", descent_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        failed += usize::from(!v.ok);
        println!(
            "[{}] {} {name} ({:.1}s): {}",
            if v.ok { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
