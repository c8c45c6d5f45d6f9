//! A bounded small object argument: stages `π⁰ ↣ π¹ ↣ …` obtained by
//! pushing out coproducts of realignment data along generating monos.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Cap, Error, Result};
use crate::outcome::Outcome;
use crate::presheaf::{coproduct, is_cartesian_map, pullback, pushout, random_hom, Presheaf, PresheafMap, Pullback};
use crate::sample::shuffle_family;
use crate::site::{is_sheaf, sheafify, sheafify_map, Site};
use crate::universe::{Materialized, Universe};

use super::generating::{generating_monos, GeneratingMono};
use super::lifts::{cartesian_lifts, no_constraints};
use super::small_sheaf_families;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoaConfig {
    pub bound: usize,
    pub cap: Cap,
    /// Cartesian lifts enumerated per datum base map.
    pub lift_limit: usize,
}

impl Default for SoaConfig {
    fn default() -> Self {
        SoaConfig {
            bound: 2,
            cap: Cap::DEFAULT,
            lift_limit: 64,
        }
    }
}

/// A family over a generating codomain, its restriction along the
/// generating mono, and its automorphisms over the base.
#[derive(Debug, Clone)]
pub(crate) struct FamilyRep {
    pub f: PresheafMap,
    pub pb: Pullback,
    /// Automorphisms on the total space and on the restricted total space.
    pub autos: Vec<(PresheafMap, PresheafMap)>,
}

impl FamilyRep {
    fn new(mono: &PresheafMap, f: PresheafMap, cap: Cap) -> Result<Self> {
        let pb = pullback(mono, &f, cap)?;
        let id = PresheafMap::identity(f.cod());
        let mut autos = Vec::new();
        for psi in cartesian_lifts(&f, &f, &id, &no_constraints(&f), usize::MAX, cap)? {
            let on_h = restrict_iso(&pb, mono, &psi)?;
            autos.push((psi, on_h));
        }
        Ok(FamilyRep { f, pb, autos })
    }

    /// The restricted family `h = A^*f` over `A`.
    pub fn h(&self) -> &PresheafMap {
        &self.pb.left
    }

    /// The inclusion of the restricted total space.
    pub fn incl(&self) -> &PresheafMap {
        &self.pb.right
    }
}

/// The action of an isomorphism of families over `B` on their restrictions
/// along `mono`.
fn restrict_iso(pb_src: &Pullback, mono: &PresheafMap, psi: &PresheafMap) -> Result<PresheafMap> {
    restrict_between(pb_src, pb_src, mono, psi)
}

fn restrict_between(src: &Pullback, dst: &Pullback, mono: &PresheafMap, psi: &PresheafMap) -> Result<PresheafMap> {
    PresheafMap::from_fn(src.apex.clone(), dst.apex.clone(), |c, p| {
        let (a, q) = src.pair(c, p);
        dst.lookup(c, a, psi.apply(c, q), mono.apply(c, a)).expect("pullback element")
    })
}

/// A realignment datum against the current stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datum {
    pub generator: usize,
    pub family: usize,
    /// `A → U`.
    pub partial: PresheafMap,
    /// `A^*Q → E`, cartesian over `partial`.
    pub lift: PresheafMap,
}

type Key = (usize, usize, Vec<Vec<usize>>, Vec<Vec<usize>>);

impl Datum {
    fn key(&self) -> Key {
        (self.generator, self.family, self.partial.components().to_vec(), self.lift.components().to_vec())
    }
}

/// A datum adjoined at `stage`, with its solution at the current stage.
#[derive(Debug, Clone)]
pub struct Adjoined {
    pub datum: Datum,
    pub stage: usize,
    pub chi: PresheafMap,
    pub top: PresheafMap,
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub family: PresheafMap,
    /// Links from the previous stage: total spaces, then bases.
    pub link: Option<(PresheafMap, PresheafMap)>,
    pub adjoined: usize,
}

/// A realignment problem along a generating mono against the current stage.
#[derive(Debug, Clone)]
pub struct SoaProblem {
    pub generator: usize,
    pub family: PresheafMap,
    pub partial: PresheafMap,
    pub lift: PresheafMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoaSolution {
    pub chi: PresheafMap,
    pub top: PresheafMap,
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solve {
    Solved(SoaSolution),
    Unresolved(String),
}

#[derive(Debug, Clone)]
pub struct SoaState {
    site: Site,
    universe: Universe,
    materialized: Materialized,
    config: SoaConfig,
    gens: Vec<GeneratingMono>,
    families: Vec<Vec<FamilyRep>>,
    stages: Vec<Stage>,
    ledger: Vec<Adjoined>,
    keys: HashMap<Key, usize>,
}

impl SoaState {
    /// Stage 0: the initial family.
    pub fn new(site: &Site, config: SoaConfig) -> Result<Self> {
        let cap = config.cap;
        let universe = Universe::new(&site.category, config.bound)?;
        let materialized = universe.materialize(cap)?;
        let gens = generating_monos(site, cap)?;
        let mut families = Vec::with_capacity(gens.len());
        for g in &gens {
            let fams = small_sheaf_families(&universe, &materialized, &site.topology, g.mono.cod(), cap)?;
            families.push(
                fams.into_iter()
                    .map(|(f, _)| FamilyRep::new(&g.mono, f, cap))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let initial = sheafify(&Presheaf::initial(&site.category), &site.topology, cap)?.sheaf;
        Ok(SoaState {
            site: site.clone(),
            universe,
            materialized,
            config,
            gens,
            families,
            stages: vec![Stage {
                family: PresheafMap::identity(&initial),
                link: None,
                adjoined: 0,
            }],
            ledger: Vec::new(),
            keys: HashMap::new(),
        })
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn materialized(&self) -> &Materialized {
        &self.materialized
    }

    pub fn config(&self) -> &SoaConfig {
        &self.config
    }

    pub fn generators(&self) -> &[GeneratingMono] {
        &self.gens
    }

    pub fn family_count(&self, g: usize) -> usize {
        self.families[g].len()
    }

    pub fn family(&self, g: usize, i: usize) -> &PresheafMap {
        &self.families[g][i].f
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Index of the current stage.
    pub fn index(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn current(&self) -> &PresheafMap {
        &self.stages[self.index()].family
    }

    pub fn ledger(&self) -> &[Adjoined] {
        &self.ledger
    }

    /// Whether the last extension adjoined nothing.
    pub fn saturated(&self) -> bool {
        self.stages.len() > 1 && self.stages[self.index()].adjoined == 0
    }

    /// `(key, φ)` where the key uses the least lift in the orbit of `lift`
    /// under automorphisms of the family, and `φ` attains it.
    fn canonical(&self, g: usize, i: usize, partial: PresheafMap, lift: &PresheafMap) -> Result<(Datum, usize)> {
        let rep = &self.families[g][i];
        let mut best: Option<(PresheafMap, usize)> = None;
        for (k, (_, on_h)) in rep.autos.iter().enumerate() {
            let l = lift.after(on_h)?;
            if best.as_ref().is_none_or(|(b, _)| l.components() < b.components()) {
                best = Some((l, k));
            }
        }
        let (lift, k) = best.expect("the identity is an automorphism");
        Ok((
            Datum {
                generator: g,
                family: i,
                partial,
                lift,
            },
            k,
        ))
    }

    /// Data against the current stage not yet adjoined, one per
    /// isomorphism class.
    pub fn new_data(&self) -> Result<Vec<Datum>> {
        let pi = self.current();
        let cap = self.config.cap;
        let mut seen: HashMap<Key, ()> = HashMap::new();
        let mut out = Vec::new();
        for (g, gen) in self.gens.iter().enumerate() {
            for (i, rep) in self.families[g].iter().enumerate() {
                for a in crate::presheaf::enumerate_homs(gen.mono.dom(), pi.cod(), cap)? {
                    let lifts = cartesian_lifts(rep.h(), pi, &a, &no_constraints(rep.h()), self.config.lift_limit, cap)?;
                    for l in lifts {
                        let (d, _) = self.canonical(g, i, a.clone(), &l)?;
                        let key = d.key();
                        if self.keys.contains_key(&key) || seen.insert(key, ()).is_some() {
                            continue;
                        }
                        out.push(d);
                        cap.check(out.len(), || "enumerating realignment data".into())?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pushes out the coproduct of all new data and links the next stage.
    pub fn extend(self) -> Result<SoaState> {
        let data = self.new_data()?;
        self.adjoin(data)
    }

    fn adjoin(mut self, data: Vec<Datum>) -> Result<SoaState> {
        let cap = self.config.cap;
        let cat = self.site.category.clone();
        let pi = self.current().clone();
        let reps: Vec<&FamilyRep> = data.iter().map(|d| &self.families[d.generator][d.family]).collect();
        let sum_a = coproduct(&cat, &data.iter().map(|d| self.gens[d.generator].mono.dom().clone()).collect::<Vec<_>>())?;
        let sum_b = coproduct(&cat, &data.iter().map(|d| self.gens[d.generator].mono.cod().clone()).collect::<Vec<_>>())?;
        let sum_h = coproduct(&cat, &reps.iter().map(|r| r.pb.apex.clone()).collect::<Vec<_>>())?;
        let sum_q = coproduct(&cat, &reps.iter().map(|r| r.f.dom().clone()).collect::<Vec<_>>())?;
        let legs = |xs: Vec<PresheafMap>| xs;
        let a_to_b = sum_a.induced(
            &legs(
                data.iter()
                    .enumerate()
                    .map(|(k, d)| sum_b.injections[k].after(&self.gens[d.generator].mono))
                    .collect::<Result<Vec<_>>>()?,
            ),
            &sum_b.apex,
        )?;
        let a_to_u = sum_a.induced(&data.iter().map(|d| d.partial.clone()).collect::<Vec<_>>(), pi.cod())?;
        let h_to_q = sum_h.induced(
            &reps
                .iter()
                .enumerate()
                .map(|(k, r)| sum_q.injections[k].after(r.incl()))
                .collect::<Result<Vec<_>>>()?,
            &sum_q.apex,
        )?;
        let h_to_e = sum_h.induced(&data.iter().map(|d| d.lift.clone()).collect::<Vec<_>>(), pi.dom())?;
        let q_to_b = sum_q.induced(
            &reps
                .iter()
                .enumerate()
                .map(|(k, r)| sum_b.injections[k].after(&r.f))
                .collect::<Result<Vec<_>>>()?,
            &sum_b.apex,
        )?;
        let pu = pushout(&a_to_u, &a_to_b)?;
        let pe = pushout(&h_to_e, &h_to_q)?;
        let fam = pe.induced(&pu.left.after(&pi)?, &pu.right.after(&q_to_b)?, &pu.apex)?;
        let (se, su, next) = sheafify_map(&fam, &self.site.topology, cap)?;
        let bottom = su.unit.after(&pu.left)?;
        let top = se.unit.after(&pe.left)?;
        if let Some((c, y, n)) = next.oversized_fiber(self.config.bound) {
            return Err(Error::FiberTooLarge {
                element: format!("{y} at `{}` in stage {}", cat.object_name(c), self.stages.len()),
                size: n,
                bound: self.config.bound,
            });
        }
        let stage = self.stages.len();
        // transport the ledger
        let old = std::mem::take(&mut self.ledger);
        self.keys.clear();
        for e in old {
            let partial = bottom.after(&e.datum.partial)?;
            let lift = top.after(&e.datum.lift)?;
            let (d, k) = self.canonical(e.datum.generator, e.datum.family, partial, &lift)?;
            let phi = &self.families[d.generator][d.family].autos[k].0;
            let entry = Adjoined {
                chi: bottom.after(&e.chi)?,
                top: top.after(&e.top)?.after(phi)?,
                stage: e.stage,
                datum: d,
            };
            self.keys.insert(entry.datum.key(), self.ledger.len());
            self.ledger.push(entry);
        }
        for (k, d) in data.iter().enumerate() {
            let rep = &self.families[d.generator][d.family];
            let partial = bottom.after(&d.partial)?;
            let lift = top.after(&d.lift)?;
            let chi = su.unit.after(&pu.right)?.after(&sum_b.injections[k])?;
            let tq = se.unit.after(&pe.right)?.after(&sum_q.injections[k])?;
            let (nd, j) = self.canonical(d.generator, d.family, partial, &lift)?;
            let entry = Adjoined {
                chi,
                top: tq.after(&rep.autos[j].0)?,
                stage,
                datum: nd,
            };
            if self.keys.insert(entry.datum.key(), self.ledger.len()).is_none() {
                self.ledger.push(entry);
            }
        }
        self.stages.push(Stage {
            family: next,
            link: Some((top, bottom)),
            adjoined: data.len(),
        });
        Ok(self)
    }

    /// Extends until `stages` extensions have been made or nothing new
    /// appears.
    pub fn run(mut self, stages: usize) -> Result<SoaState> {
        for _ in 0..stages {
            self = self.extend()?;
            if self.saturated() {
                break;
            }
        }
        Ok(self)
    }

    /// Recognizes the problem's datum in the ledger and returns the
    /// composite solution.
    pub fn solve(&self, p: &SoaProblem) -> Result<Solve> {
        let cap = self.config.cap;
        let gen = &self.gens[p.generator];
        if p.family.cod() != gen.mono.cod() || p.partial.dom() != gen.mono.dom() {
            return Err(Error::InvalidProblem("problem does not lie over its generating mono".into()));
        }
        let id = PresheafMap::identity(gen.mono.cod());
        let mut found = None;
        for (i, rep) in self.families[p.generator].iter().enumerate() {
            if let Some(psi) = cartesian_lifts(&p.family, &rep.f, &id, &no_constraints(&p.family), 1, cap)?.pop() {
                found = Some((i, psi));
                break;
            }
        }
        let Some((i, psi)) = found else {
            return Ok(Solve::Unresolved("family is not among the enumerated sheaf families".into()));
        };
        let rep = &self.families[p.generator][i];
        let pb = pullback(&gen.mono, &p.family, cap)?;
        if pb.apex != *p.lift.dom() {
            return Err(Error::InvalidProblem("lift is not defined on the restricted family".into()));
        }
        let psi_h = restrict_between(&pb, &rep.pb, &gen.mono, &psi)?;
        let inv_h = psi_h.inverse().expect("restriction of an isomorphism");
        let (d, k) = self.canonical(p.generator, i, p.partial.clone(), &p.lift.after(&inv_h)?)?;
        let Some(&slot) = self.keys.get(&d.key()) else {
            return Ok(Solve::Unresolved(format!(
                "datum over generator {} was not adjoined by stage {}",
                p.generator,
                self.index()
            )));
        };
        let entry = &self.ledger[slot];
        let phi_inv = rep.autos[k].0.inverse().expect("automorphism");
        let top = entry.top.after(&phi_inv)?.after(&psi)?;
        Ok(Solve::Solved(SoaSolution {
            chi: entry.chi.clone(),
            top,
            stage: entry.stage,
        }))
    }

    /// Checks a solution: cartesian, and restricting to the partial data on
    /// the nose.
    pub fn check_solution(&self, p: &SoaProblem, s: &SoaSolution) -> Result<Outcome> {
        let gen = &self.gens[p.generator];
        let pi = self.current();
        if !is_cartesian_map(&s.top, &p.family, pi, &s.chi)? {
            return Ok(Outcome::fail("solution square is not cartesian"));
        }
        if s.chi.after(&gen.mono)? != p.partial {
            return Ok(Outcome::fail("solution does not restrict to the partial classifier"));
        }
        let pb = pullback(&gen.mono, &p.family, self.config.cap)?;
        Ok(Outcome::check(s.top.after(&pb.right)? == p.lift, || "solution does not extend the given lift".into()))
    }

    /// A problem along a random generator with a relabeled family and a
    /// random partial square.
    pub fn sample_problem<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<SoaProblem>> {
        let g = rng.gen_range(0..self.gens.len());
        if self.families[g].is_empty() {
            return Ok(None);
        }
        let rep = &self.families[g][rng.gen_range(0..self.families[g].len())];
        let (f, _) = shuffle_family(&rep.f, rng);
        let gen = &self.gens[g];
        let pi = self.current();
        let Some(a) = random_hom(gen.mono.dom(), pi.cod(), rng) else {
            return Ok(None);
        };
        let pb = pullback(&gen.mono, &f, self.config.cap)?;
        let lifts = cartesian_lifts(&pb.left, pi, &a, &no_constraints(&pb.left), 16, self.config.cap)?;
        Ok(lifts.choose(rng).map(|l| SoaProblem {
            generator: g,
            family: f,
            partial: a,
            lift: l.clone(),
        }))
    }

    /// A problem whose datum is a relabeled ledger entry.
    pub fn ledger_problem<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<SoaProblem>> {
        let Some(e) = self.ledger.choose(rng) else {
            return Ok(None);
        };
        let d = &e.datum;
        let rep = &self.families[d.generator][d.family];
        let gen = &self.gens[d.generator];
        let (f, psi) = shuffle_family(&rep.f, rng);
        let pb = pullback(&gen.mono, &f, self.config.cap)?;
        let psi_h = restrict_between(&rep.pb, &pb, &gen.mono, &psi)?;
        let lift = d.lift.after(&psi_h.inverse().expect("isomorphism"))?;
        Ok(Some(SoaProblem {
            generator: d.generator,
            family: f,
            partial: d.partial.clone(),
            lift,
        }))
    }

    /// Stage invariants: links are cartesian monos, stage families are
    /// small families of sheaves, and every ledger solution is strict.
    pub fn verify(&self) -> Result<Vec<(String, Outcome)>> {
        let cap = self.config.cap;
        let top = &self.site.topology;
        let mut out = Vec::new();
        for (n, s) in self.stages.iter().enumerate() {
            let f = &s.family;
            let sheaves = is_sheaf(f.dom(), top, cap)? && is_sheaf(f.cod(), top, cap)?;
            out.push((
                format!("stage {n} family"),
                Outcome::check(sheaves && f.oversized_fiber(self.config.bound).is_none(), || {
                    "stage family is not a small family of sheaves".into()
                }),
            ));
            if let Some((t, b)) = &s.link {
                let prev = &self.stages[n - 1].family;
                let ok = t.is_mono() && b.is_mono() && is_cartesian_map(t, prev, f, b)?;
                out.push((format!("link {} → {n}", n - 1), Outcome::check(ok, || "link is not a cartesian mono".into())));
            }
        }
        for (k, e) in self.ledger.iter().enumerate() {
            let rep = &self.families[e.datum.generator][e.datum.family];
            let p = SoaProblem {
                generator: e.datum.generator,
                family: rep.f.clone(),
                partial: e.datum.partial.clone(),
                lift: e.datum.lift.clone(),
            };
            let s = SoaSolution {
                chi: e.chi.clone(),
                top: e.top.clone(),
                stage: e.stage,
            };
            out.push((format!("ledger entry {k}"), self.check_solution(&p, &s)?));
        }
        Ok(out)
    }

    /// Maps the solution of a problem at stage `from` to the current stage.
    pub fn transport(&self, from: usize, chi: &PresheafMap, top: &PresheafMap) -> Result<(PresheafMap, PresheafMap)> {
        let (mut c, mut t) = (chi.clone(), top.clone());
        for s in &self.stages[from + 1..] {
            let (lt, lb) = s.link.as_ref().expect("later stages are linked");
            c = lb.after(&c)?;
            t = lt.after(&t)?;
        }
        Ok((c, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dense_interval, sites};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_stage_is_the_coproduct_of_all_families() {
        let (_, site) = &sites()[3];
        let s = SoaState::new(site, SoaConfig::default()).unwrap();
        let total_families: usize = (0..s.generators().len())
            .filter(|&g| s.generators()[g].mono.dom().is_empty())
            .map(|g| s.family_count(g))
            .sum();
        let s = s.extend().unwrap();
        assert_eq!(s.stages()[1].adjoined, total_families);
        let u = s.current().cod();
        let expected: Vec<usize> = s.site().category.objects().map(|c| {
            (0..s.generators().len())
                .filter(|&g| s.generators()[g].mono.dom().is_empty())
                .map(|g| s.family_count(g) * s.generators()[g].mono.cod().size(c))
                .sum()
        }).collect();
        assert_eq!(u.sizes(), expected.as_slice());
    }

    #[test]
    fn stages_are_linked_by_cartesian_monos() {
        for (name, site) in sites() {
            let s = SoaState::new(&site, SoaConfig::default()).unwrap().run(3).unwrap();
            for (what, o) in s.verify().unwrap() {
                assert!(o.is_pass(), "{name}: {what}: {o}");
            }
        }
    }

    #[test]
    fn dense_interval_saturates() {
        let s = SoaState::new(&dense_interval(), SoaConfig::default()).unwrap().run(5).unwrap();
        assert!(s.saturated());
        assert!(s.new_data().unwrap().is_empty());
    }

    #[test]
    fn ledger_problems_are_solved_strictly() {
        for (name, site) in sites() {
            let s = SoaState::new(&site, SoaConfig::default()).unwrap().run(2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..20 {
                let Some(p) = s.ledger_problem(&mut rng).unwrap() else { continue };
                match s.solve(&p).unwrap() {
                    Solve::Solved(sol) => assert!(s.check_solution(&p, &sol).unwrap().is_pass(), "{name}"),
                    Solve::Unresolved(why) => panic!("{name}: {why}"),
                }
            }
        }
    }

    #[test]
    fn empty_boundary_problems_are_solved_after_one_stage() {
        let (_, site) = &sites()[3];
        let s = SoaState::new(site, SoaConfig::default()).unwrap().run(1).unwrap();
        let g = s.generators().iter().position(|g| g.mono.dom().is_empty()).unwrap();
        for i in 0..s.family_count(g) {
            let f = s.family(g, i).clone();
            let a = PresheafMap::from_initial(s.current().cod());
            let pb = pullback(&s.generators()[g].mono, &f, Cap::DEFAULT).unwrap();
            let p = SoaProblem {
                generator: g,
                family: f,
                partial: a,
                lift: PresheafMap::from_initial(s.current().dom()).clone(),
            };
            assert_eq!(pb.apex.total_size(), 0);
            let Solve::Solved(sol) = s.solve(&p).unwrap() else { panic!() };
            assert!(s.check_solution(&p, &sol).unwrap().is_pass());
        }
    }
}
