//! Realignment along pushouts, finite composites and retracts of generating
//! monos, assembled from solutions along the generators themselves.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Cap, Result};
use crate::fincat::Obj;
use crate::outcome::{Outcome, Tally};
use crate::presheaf::{
    enumerate_homs, generated_subobject, is_cartesian_map, pullback, pushout, random_hom, sub_presheaf, Presheaf,
    PresheafMap, Pullback, Sieve,
};
use crate::sample::{random_presheaf, random_subobject, Shape};
use crate::site::{sheafify, sheafify_map, Topology};

use super::generating::{image_mask, mono_iso};
use super::soa::{SoaProblem, SoaState, Solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SaturationMode {
    Pushout,
    Composition,
    Retract,
}

impl SaturationMode {
    pub const ALL: [SaturationMode; 3] = [SaturationMode::Pushout, SaturationMode::Composition, SaturationMode::Retract];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pushout" => Some(SaturationMode::Pushout),
            "composition" => Some(SaturationMode::Composition),
            "retract" => Some(SaturationMode::Retract),
            _ => None,
        }
    }
}

impl fmt::Display for SaturationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SaturationMode::Pushout => "pushout",
            SaturationMode::Composition => "composition",
            SaturationMode::Retract => "retract",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SaturationReport {
    pub mode: SaturationMode,
    pub tally: Tally,
    /// Stage index when the check finished.
    pub stage: usize,
    pub instances: Vec<(String, Outcome)>,
}

impl SaturationReport {
    pub fn passed(&self, required: usize) -> bool {
        self.tally.fail == 0 && self.tally.pass >= required
    }
}

/// A problem over `mono : C ↣ D` against the current stage.
#[derive(Debug, Clone)]
struct Problem {
    mono: PresheafMap,
    family: PresheafMap,
    partial: PresheafMap,
    lift: PresheafMap,
}

enum Attempt {
    Solved,
    NeedsStage(String),
    Failed(String),
}

/// Partial classifying data over `D` and over the total space of `f`.
struct Assignment<'a> {
    pi: &'a PresheafMap,
    topology: &'a Topology,
    f: &'a PresheafMap,
    chi: Vec<Vec<Option<usize>>>,
    top: Vec<Vec<Option<usize>>>,
}

impl<'a> Assignment<'a> {
    fn new(pi: &'a PresheafMap, topology: &'a Topology, f: &'a PresheafMap) -> Self {
        let cat = f.category();
        Assignment {
            pi,
            topology,
            f,
            chi: cat.objects().map(|c| vec![None; f.cod().size(c)]).collect(),
            top: cat.objects().map(|c| vec![None; f.dom().size(c)]).collect(),
        }
    }

    fn set_chi(&mut self, c: Obj, b: usize, u: usize) -> std::result::Result<(), String> {
        match self.chi[c][b] {
            Some(v) if v != u => Err(format!("pieces disagree on the classifier at ({c}, {b})")),
            _ => {
                self.chi[c][b] = Some(u);
                Ok(())
            }
        }
    }

    fn set_top(&mut self, c: Obj, q: usize, e: usize) -> std::result::Result<(), String> {
        match self.top[c][q] {
            Some(v) if v != e => Err(format!("pieces disagree on the lift at ({c}, {q})")),
            _ => {
                self.top[c][q] = Some(e);
                Ok(())
            }
        }
    }

    fn seed(&mut self, p: &Problem, cap: Cap) -> Result<std::result::Result<(), String>> {
        for c in p.mono.category().objects() {
            for a in 0..p.mono.dom().size(c) {
                if let Err(e) = self.set_chi(c, p.mono.apply(c, a), p.partial.apply(c, a)) {
                    return Ok(Err(e));
                }
            }
        }
        let pb = pullback(&p.mono, &p.family, cap)?;
        for (c, x) in pb.apex.elements() {
            if let Err(e) = self.set_top(c, pb.right.apply(c, x), p.lift.apply(c, x)) {
                return Ok(Err(e));
            }
        }
        Ok(Ok(()))
    }

    fn sieve_where(&self, c: Obj, known: impl Fn(usize) -> bool) -> Result<Sieve> {
        let cat = self.f.category();
        let ms: Vec<_> = cat.arrows_into(c).iter().copied().filter(|&m| known(m)).collect();
        Sieve::generated(cat, c, &ms)
    }

    /// Extends along dense inclusions: an element whose known restrictions
    /// form a covering sieve gets the unique amalgamation.
    fn close(&mut self) -> Result<std::result::Result<(), String>> {
        let cat = self.f.category().clone();
        let (d, q, u, e) = (self.f.cod(), self.f.dom(), self.pi.cod(), self.pi.dom());
        loop {
            let mut changed = false;
            for c in cat.objects() {
                for b in 0..d.size(c) {
                    if self.chi[c][b].is_some() {
                        continue;
                    }
                    let s = self.sieve_where(c, |m| self.chi[cat.src(m)][d.restrict(m, b)].is_some())?;
                    if !self.topology.is_covering(&s) {
                        continue;
                    }
                    let fits = |v: usize| {
                        cat.arrows_into(c)
                            .iter()
                            .filter(|&&m| s.contains(m))
                            .all(|&m| Some(u.restrict(m, v)) == self.chi[cat.src(m)][d.restrict(m, b)])
                    };
                    let cands: Vec<usize> = (0..u.size(c)).filter(|&v| fits(v)).collect();
                    if cands.len() != 1 {
                        return Ok(Err(format!("{} amalgamations of the classifier at ({c}, {b})", cands.len())));
                    }
                    self.chi[c][b] = Some(cands[0]);
                    changed = true;
                }
                for x in 0..q.size(c) {
                    if self.top[c][x].is_some() {
                        continue;
                    }
                    let Some(over) = self.chi[c][self.f.apply(c, x)] else { continue };
                    let s = self.sieve_where(c, |m| self.top[cat.src(m)][q.restrict(m, x)].is_some())?;
                    if !self.topology.is_covering(&s) {
                        continue;
                    }
                    let fits = |v: usize| {
                        self.pi.apply(c, v) == over
                            && cat
                                .arrows_into(c)
                                .iter()
                                .filter(|&&m| s.contains(m))
                                .all(|&m| Some(e.restrict(m, v)) == self.top[cat.src(m)][q.restrict(m, x)])
                    };
                    let cands: Vec<usize> = (0..e.size(c)).filter(|&v| fits(v)).collect();
                    if cands.len() != 1 {
                        return Ok(Err(format!("{} amalgamations of the lift at ({c}, {x})", cands.len())));
                    }
                    self.top[c][x] = Some(cands[0]);
                    changed = true;
                }
            }
            if !changed {
                return Ok(Ok(()));
            }
        }
    }

    fn first_unassigned(&self) -> Option<(Obj, usize)> {
        self.chi
            .iter()
            .enumerate()
            .find_map(|(c, v)| v.iter().position(Option::is_none).map(|b| (c, b)))
    }

    /// The problem along generator `g` obtained by pulling back along
    /// `u : B_g → D`.
    fn pulled_problem(&self, state: &SoaState, g: usize, u: &PresheafMap) -> Result<(SoaProblem, Pullback)> {
        let cap = state.config().cap;
        let gen = &state.generators()[g];
        let pb = pullback(u, self.f, cap)?;
        let family = pb.left.clone();
        let partial = PresheafMap::from_fn(gen.mono.dom().clone(), self.pi.cod().clone(), |c, a| {
            self.chi[c][u.apply(c, gen.mono.apply(c, a))].expect("boundary is assigned")
        })?;
        let inner = pullback(&gen.mono, &family, cap)?;
        let lift = PresheafMap::from_fn(inner.apex.clone(), self.pi.dom().clone(), |c, x| {
            let (_, qb) = inner.pair(c, x);
            self.top[c][pb.right.apply(c, qb)].expect("boundary lift is assigned")
        })?;
        Ok((
            SoaProblem {
                generator: g,
                family,
                partial,
                lift,
            },
            pb,
        ))
    }

    /// Solves along generator `g` through `u` and writes the solution back.
    fn solve_piece(&mut self, state: &SoaState, g: usize, u: &PresheafMap) -> Result<Option<Attempt>> {
        let (p, pb) = self.pulled_problem(state, g, u)?;
        let sol = match state.solve(&p)? {
            Solve::Solved(s) => s,
            Solve::Unresolved(why) => return Ok(Some(Attempt::NeedsStage(why))),
        };
        let o = state.check_solution(&p, &sol)?;
        if !o.is_pass() {
            return Ok(Some(Attempt::Failed(format!("generator solution rejected: {o}"))));
        }
        for (c, b) in u.dom().elements() {
            if let Err(e) = self.set_chi(c, u.apply(c, b), sol.chi.apply(c, b)) {
                return Ok(Some(Attempt::Failed(e)));
            }
        }
        for (c, x) in pb.apex.elements() {
            if let Err(e) = self.set_top(c, pb.right.apply(c, x), sol.top.apply(c, x)) {
                return Ok(Some(Attempt::Failed(e)));
            }
        }
        Ok(None)
    }

    fn finish(&self, p: &Problem, cap: Cap) -> Result<Attempt> {
        if let Some((c, b)) = self.first_unassigned() {
            return Ok(Attempt::Failed(format!("classifier undetermined at ({c}, {b})")));
        }
        let chi = PresheafMap::new(
            self.f.cod().clone(),
            self.pi.cod().clone(),
            self.chi.iter().map(|v| v.iter().map(|x| x.expect("total")).collect()).collect(),
        );
        let top = self.top.iter().map(|v| v.iter().copied().collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>();
        let (Ok(chi), Some(top)) = (chi, top) else {
            return Ok(Attempt::Failed("glued data is not natural or not total".into()));
        };
        let Ok(top) = PresheafMap::new(self.f.dom().clone(), self.pi.dom().clone(), top) else {
            return Ok(Attempt::Failed("glued lift is not natural".into()));
        };
        if !is_cartesian_map(&top, self.f, self.pi, &chi)? {
            return Ok(Attempt::Failed("glued square is not cartesian".into()));
        }
        if chi.after(&p.mono)? != p.partial {
            return Ok(Attempt::Failed("glued classifier does not restrict to the partial one".into()));
        }
        let pb = pullback(&p.mono, &p.family, cap)?;
        if top.after(&pb.right)? != p.lift {
            return Ok(Attempt::Failed("glued lift does not extend the partial one".into()));
        }
        Ok(Attempt::Solved)
    }
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(()) => {}
            Err(msg) => return Ok(Attempt::Failed(msg)),
        }
    };
}

/// A pushout `C → D ← B` of generator `g` along `A → C`.
struct PushoutShape {
    g: usize,
    from_b: PresheafMap,
}

/// A retract of generator `g`: `s : D ↣ B`, `r : B → D` with `r s = 1`.
struct RetractShape {
    g: usize,
    section: PresheafMap,
    retraction: PresheafMap,
}

enum Construction {
    Pushout(PushoutShape),
    Composition,
    Retract(RetractShape),
}

/// Pushout: solve the `B^*f` problem along the generator and glue with the
/// given data on `C`.
fn solve_pushout(state: &SoaState, p: &Problem, s: &PushoutShape) -> Result<Attempt> {
    let cap = state.config().cap;
    let mut a = Assignment::new(state.current(), &state.site().topology, &p.family);
    attempt!(a.seed(p, cap)?);
    if let Some(r) = a.solve_piece(state, s.g, &s.from_b)? {
        return Ok(r);
    }
    attempt!(a.close()?);
    a.finish(p, cap)
}

/// Composition: adjoin one cell at a time, each a pushout of a generator
/// along the part already solved.
fn solve_composite(state: &SoaState, p: &Problem) -> Result<Attempt> {
    let cap = state.config().cap;
    let top = &state.site().topology;
    let d = p.family.cod();
    let cat = d.category().clone();
    let mut a = Assignment::new(state.current(), top, &p.family);
    attempt!(a.seed(p, cap)?);
    attempt!(a.close()?);
    while let Some((c, x)) = a.first_unassigned() {
        let gx = image_mask(&generated_subobject(d, &[(c, x)]));
        let closure = |keep: &dyn Fn(Obj, usize) -> bool| -> Result<Vec<Vec<bool>>> {
            cat.objects()
                .map(|e| {
                    (0..d.size(e))
                        .map(|b| {
                            let ms: Vec<_> = cat.arrows_into(e).iter().copied().filter(|&m| keep(cat.src(m), d.restrict(m, b))).collect();
                            Ok(top.is_covering(&Sieve::generated(&cat, e, &ms)?))
                        })
                        .collect()
                })
                .collect()
        };
        let g_mask = closure(&|e, b| gx[e][b])?;
        let k_mask = closure(&|e, b| gx[e][b] && a.chi[e][b].is_some())?;
        let g_in_d = sub_presheaf(d, &g_mask)?;
        let k_rel: Vec<Vec<bool>> = cat
            .objects()
            .map(|e| g_in_d.component(e).iter().map(|&b| k_mask[e][b]).collect())
            .collect();
        let k_in_g = sub_presheaf(g_in_d.dom(), &k_rel)?;
        let mut found = None;
        for (i, gen) in state.generators().iter().enumerate() {
            if let Some(psi) = mono_iso(&k_in_g, &gen.mono, cap)? {
                found = Some((i, psi));
                break;
            }
        }
        let Some((g, psi)) = found else {
            return Ok(Attempt::Failed(format!("cell at ({c}, {x}) is not a generating mono")));
        };
        let u = g_in_d.after(&psi.inverse().expect("isomorphism"))?;
        if let Some(r) = a.solve_piece(state, g, &u)? {
            return Ok(r);
        }
        attempt!(a.close()?);
        if a.chi[c][x].is_none() {
            return Ok(Attempt::Failed(format!("cell at ({c}, {x}) did not assign its element")));
        }
    }
    a.finish(p, cap)
}

/// Retract: solve along the generator for the family pulled back along the
/// retraction, then restrict along the section.
fn solve_retract(state: &SoaState, p: &Problem, s: &RetractShape) -> Result<Attempt> {
    let cap = state.config().cap;
    let gen = &state.generators()[s.g];
    let pi = state.current();
    let pb = pullback(&s.retraction, &p.family, cap)?;
    let family = pb.left.clone();
    let partial = PresheafMap::from_fn(gen.mono.dom().clone(), pi.cod().clone(), |c, a| {
        let d = s.retraction.apply(c, gen.mono.apply(c, a));
        let x = p.mono.component(c).iter().position(|&v| v == d).expect("retraction preserves the subobject");
        p.partial.apply(c, x)
    })?;
    let inner = pullback(&gen.mono, &family, cap)?;
    let outer = pullback(&p.mono, &p.family, cap)?;
    let lift = PresheafMap::from_fn(inner.apex.clone(), pi.dom().clone(), |c, x| {
        let (_, qb) = inner.pair(c, x);
        let (b, q) = pb.pair(c, qb);
        let d = s.retraction.apply(c, b);
        let ci = p.mono.component(c).iter().position(|&v| v == d).expect("in the subobject");
        p.lift.apply(c, outer.lookup(c, ci, q, d).expect("pullback element"))
    })?;
    let base = SoaProblem {
        generator: s.g,
        family,
        partial,
        lift,
    };
    let sol = match state.solve(&base)? {
        Solve::Solved(sol) => sol,
        Solve::Unresolved(why) => return Ok(Attempt::NeedsStage(why)),
    };
    let o = state.check_solution(&base, &sol)?;
    if !o.is_pass() {
        return Ok(Attempt::Failed(format!("generator solution rejected: {o}")));
    }
    let chi = sol.chi.after(&s.section)?;
    let top = PresheafMap::from_fn(p.family.dom().clone(), pi.dom().clone(), |c, q| {
        let d = p.family.apply(c, q);
        let b = s.section.apply(c, d);
        sol.top.apply(c, pb.lookup(c, b, q, d).expect("section lies over the retraction"))
    })?;
    let mut a = Assignment::new(pi, &state.site().topology, &p.family);
    a.chi = chi.components().iter().map(|v| v.iter().map(|&x| Some(x)).collect()).collect();
    a.top = top.components().iter().map(|v| v.iter().map(|&x| Some(x)).collect()).collect();
    a.finish(p, cap)
}

fn attempt(state: &SoaState, p: &Problem, k: &Construction) -> Result<Attempt> {
    match k {
        Construction::Pushout(s) => solve_pushout(state, p, s),
        Construction::Composition => solve_composite(state, p),
        Construction::Retract(s) => solve_retract(state, p, s),
    }
}

/// A problem over `mono : C ↣ D` whose data come from a random map
/// `D → U` at the previous stage.
fn problem_from_previous<R: Rng + ?Sized>(
    state: &SoaState,
    mono: PresheafMap,
    rng: &mut R,
) -> Result<Option<Problem>> {
    let cap = state.config().cap;
    let n = state.index();
    let prev = &state.stages()[n - 1].family;
    let Some(chi) = random_hom(mono.cod(), prev.cod(), rng) else {
        return Ok(None);
    };
    let pb = pullback(&chi, prev, cap)?;
    let (chi, top) = state.transport(n - 1, &chi, &pb.right)?;
    let family = pb.left.clone();
    let restricted = pullback(&mono, &family, cap)?;
    Ok(Some(Problem {
        partial: chi.after(&mono)?,
        lift: top.after(&restricted.right)?,
        mono,
        family,
    }))
}

fn random_sheaf<R: Rng + ?Sized>(state: &SoaState, shape: Shape, rng: &mut R) -> Result<Presheaf> {
    Ok(sheafify(&random_presheaf(&state.site().category, shape, rng), &state.site().topology, state.config().cap)?.sheaf)
}

fn build<R: Rng + ?Sized>(state: &SoaState, mode: SaturationMode, rng: &mut R) -> Result<Option<(Problem, Construction, String)>> {
    let cap = state.config().cap;
    let top = &state.site().topology;
    let shape = Shape {
        generators: 2,
        relations: 1,
    };
    match mode {
        SaturationMode::Pushout => {
            let g = rng.gen_range(0..state.generators().len());
            let j = state.generators()[g].mono.clone();
            let c = random_sheaf(state, shape, rng)?;
            let Some(along) = random_hom(j.dom(), &c, rng) else {
                return Ok(None);
            };
            let po = pushout(&along, &j)?;
            let sd = sheafify(&po.apex, top, cap)?;
            let mono = sd.unit.after(&po.left)?;
            let from_b = sd.unit.after(&po.right)?;
            let desc = format!("pushout of generator {g} along a map into a sheaf of size {:?}", c.sizes());
            Ok(problem_from_previous(state, mono, rng)?
                .map(|p| (p, Construction::Pushout(PushoutShape { g, from_b }), desc)))
        }
        SaturationMode::Composition => {
            let d = random_sheaf(state, shape, rng)?;
            let m = random_subobject(&d, 0.4, rng);
            let (_, _, closed) = sheafify_map(&m, top, cap)?;
            let back = sheafify(&d, top, cap)?.unit.inverse().expect("sheaf");
            let mono = back.after(&closed)?;
            let desc = format!("mono of sizes {:?} ↣ {:?}", mono.dom().sizes(), d.sizes());
            Ok(problem_from_previous(state, mono, rng)?.map(|p| (p, Construction::Composition, desc)))
        }
        SaturationMode::Retract => {
            let g = rng.gen_range(0..state.generators().len());
            let j = &state.generators()[g].mono;
            let b = j.cod();
            let in_a = image_mask(j);
            let cat = b.category();
            let idempotents: Vec<PresheafMap> = enumerate_homs(b, b, cap)?
                .into_iter()
                .filter(|e| {
                    e.after(e).is_ok_and(|ee| &ee == e)
                        && cat.objects().all(|c| (0..b.size(c)).all(|x| !in_a[c][x] || in_a[c][e.apply(c, x)]))
                })
                .collect();
            let e = idempotents.choose(rng).expect("the identity is idempotent").clone();
            let d_mask: Vec<Vec<bool>> = cat
                .objects()
                .map(|c| (0..b.size(c)).map(|x| e.apply(c, x) == x).collect())
                .collect();
            let section = sub_presheaf(b, &d_mask)?;
            let retraction = PresheafMap::from_fn(b.clone(), section.dom().clone(), |c, x| {
                let y = e.apply(c, x);
                section.component(c).iter().position(|&v| v == y).expect("image of the idempotent")
            })?;
            let c_mask: Vec<Vec<bool>> = cat
                .objects()
                .map(|c| section.component(c).iter().map(|&x| in_a[c][x]).collect())
                .collect();
            let mono = sub_presheaf(section.dom(), &c_mask)?;
            let desc = format!(
                "retract of generator {g} onto sizes {:?} ↣ {:?}",
                mono.dom().sizes(),
                mono.cod().sizes()
            );
            Ok(problem_from_previous(state, mono, rng)?
                .map(|p| (p, Construction::Retract(RetractShape { g, section, retraction }), desc)))
        }
    }
}

fn transport_problem(state: &SoaState, p: &Problem) -> Result<Problem> {
    let (t, b) = state.stages()[state.index()].link.as_ref().expect("linked stage");
    Ok(Problem {
        partial: b.after(&p.partial)?,
        lift: t.after(&p.lift)?,
        ..p.clone()
    })
}

/// Builds `instances` problems for `mode` from the previous stage and
/// solves each by the corresponding construction, extending the state when
/// a generator problem needs a later stage, up to `max_stages`.
pub fn saturation_check(
    mut state: SoaState,
    mode: SaturationMode,
    instances: usize,
    seed: u64,
    max_stages: usize,
) -> Result<(SoaState, SaturationReport)> {
    if state.index() == 0 {
        state = state.extend()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (mode as u64).wrapping_mul(0x9E37_79B9));
    let mut tally = Tally::default();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < instances && tries < instances * 20 {
        tries += 1;
        let Some((mut p, k, desc)) = build(&state, mode, &mut rng)? else {
            continue;
        };
        let outcome = loop {
            match attempt(&state, &p, &k)? {
                Attempt::Solved => break Outcome::Pass,
                Attempt::Failed(msg) => break Outcome::fail(msg),
                Attempt::NeedsStage(why) => {
                    if state.index() >= max_stages {
                        break Outcome::Inconclusive(format!("stage budget {max_stages} reached: {why}"));
                    }
                    state = state.extend()?;
                    p = transport_problem(&state, &p)?;
                }
            }
        };
        tally.record(&outcome);
        out.push((desc, outcome));
    }
    Ok((
        state.clone(),
        SaturationReport {
            mode,
            tally,
            stage: state.index(),
            instances: out,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sites;
    use crate::sheaf_universe::SoaConfig;

    #[test]
    fn all_modes_on_the_corpus() {
        for (name, site) in sites() {
            let mut state = SoaState::new(&site, SoaConfig::default()).unwrap().run(2).unwrap();
            for mode in SaturationMode::ALL {
                let (next, report) = saturation_check(state, mode, 12, 3, 6).unwrap();
                state = next;
                for (d, o) in &report.instances {
                    assert!(!o.is_fail(), "{name} {mode}: {d}: {o}");
                }
                assert!(report.tally.pass > 0, "{name} {mode}: {:?}", report.tally);
            }
        }
    }
}
