//! Checkers for the universe axioms U1–U8 on sampled or enumerated
//! instances.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Cap, Error};
use crate::outcome::{Outcome, Tally};
use crate::presheaf::{
    dependent_product, enumerate_homs, enumerate_subobjects, pullback, random_hom, Omega, Presheaf, PresheafMap,
};
use crate::sample::{random_cover, random_family, random_inhabited, random_presheaf, random_subobject, shuffle_family, Shape};

use super::{classify_family, code_pi, code_sigma, dependent_codes, realign_presheaf, Classifier, RealignmentProblem, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    U1,
    U2,
    U3,
    U4,
    U5,
    U6,
    U7,
    U8,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::U1,
        Axiom::U2,
        Axiom::U3,
        Axiom::U4,
        Axiom::U5,
        Axiom::U6,
        Axiom::U7,
        Axiom::U8,
    ];

    pub fn parse(s: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.to_string().eq_ignore_ascii_case(s))
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", *self as usize + 1)
    }
}

/// How many instances to check and how to generate them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub instances: usize,
    pub seed: u64,
    pub exhaustive: bool,
    pub shape: Shape,
    pub cap: Cap,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            instances: 200,
            seed: 0x5EED,
            exhaustive: false,
            shape: Shape::default(),
            cap: Cap::DEFAULT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceReport {
    pub index: usize,
    pub description: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub tally: Tally,
    /// The least bound for which the axiom's instances pass, when the
    /// configured bound is too small.
    pub needed_bound: Option<usize>,
    pub instances: Vec<InstanceReport>,
}

impl AxiomReport {
    /// No failures, or failures explained by a bound below the reported
    /// minimum.
    pub fn acceptable(&self, bound: usize) -> bool {
        self.tally.fail == 0 || self.needed_bound.is_some_and(|n| bound < n)
    }
}

/// Deterministic per-instance generator.
pub fn instance_rng(seed: u64, salt: u64, index: usize) -> ChaCha8Rng {
    let mix = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    ChaCha8Rng::seed_from_u64(mix)
}

fn describe_map(f: &PresheafMap) -> String {
    format!("{:?} → {:?}", f.dom().sizes(), f.cod().sizes())
}

fn from_err(e: Error) -> Outcome {
    match e {
        Error::BoundOverflow { .. } | Error::CapExceeded { .. } => Outcome::Inconclusive(e.to_string()),
        other => Outcome::Fail(other.to_string()),
    }
}

fn in_class(u: &Universe, f: &PresheafMap) -> bool {
    f.oversized_fiber(u.bound()).is_none()
}

/// A realignment problem whose partial classifier comes from a relabeled
/// copy of the family, so that it is usually not the canonical one.
pub fn sample_problem<R: Rng + ?Sized>(u: &Universe, shape: Shape, rng: &mut R) -> RealignmentProblem {
    let cat = u.category();
    let b = random_inhabited(cat, shape, rng);
    let f = random_family(&b, u.bound(), shape, rng);
    let m = random_subobject(&b, 0.5, rng);
    relabeled_problem(u, m, f, rng)
}

/// The problem of extending, along `m`, the classifier of a random
/// relabeling of `f`.
pub fn relabeled_problem<R: Rng + ?Sized>(u: &Universe, m: PresheafMap, f: PresheafMap, rng: &mut R) -> RealignmentProblem {
    let (g, iso) = shuffle_family(&f, rng);
    let cl = classify_family(u, &g).expect("family is small");
    let points = f
        .category()
        .objects()
        .map(|c| (0..f.dom().size(c)).map(|q| cl.points[c][iso.apply(c, q)]).collect())
        .collect();
    let total = Classifier { codes: cl.codes, points };
    RealignmentProblem::from_total(u, m, f, &total).expect("restricted classifier is valid")
}

/// Checks that the classifier of a problem's solution is cartesian and
/// restricts to the partial classifier exactly.
pub fn check_solution(u: &Universe, problem: &RealignmentProblem, cl: &Classifier) -> Outcome {
    if let Err(e) = cl.verify(u, &problem.family) {
        return Outcome::Fail(format!("solution is not a cartesian square: {e}"));
    }
    Outcome::check(problem.is_extended_by(cl), || "solution does not restrict to the partial classifier".into())
}

fn u1(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let cat = u.category();
    let b = random_presheaf(cat, cfg.shape, rng);
    let f = random_family(&b, u.bound(), cfg.shape, rng);
    let b2 = random_presheaf(cat, cfg.shape, rng);
    let Some(g) = random_hom(&b2, &b, rng) else {
        return ("no map into the base".into(), Outcome::Pass);
    };
    let pb = match pullback(&g, &f, cfg.cap) {
        Ok(p) => p,
        Err(e) => return (describe_map(&f), from_err(e)),
    };
    let desc = format!("f: {}, g: {}", describe_map(&f), describe_map(&g));
    let cl = match classify_family(u, &f) {
        Ok(cl) => cl,
        Err(e) => return (desc, Outcome::Fail(e.to_string())),
    };
    let pulled = Classifier {
        codes: cat.objects().map(|c| g.component(c).iter().map(|&y| cl.codes[c][y].clone()).collect()).collect(),
        points: cat
            .objects()
            .map(|c| (0..pb.apex.size(c)).map(|p| cl.points[c][pb.right.apply(c, p)]).collect())
            .collect(),
    };
    let out = Outcome::check(in_class(u, &pb.left), || "pullback has a large fiber".into()).and(|| match pulled.verify(u, &pb.left) {
        Ok(()) => Outcome::Pass,
        Err(e) => Outcome::Fail(format!("restricted classifier is not cartesian: {e}")),
    });
    (desc, out)
}

fn u2_instance(u: &Universe, m: &PresheafMap) -> Outcome {
    if !m.is_mono() {
        return Outcome::Fail("generated subobject is not mono".into());
    }
    Outcome::check(in_class(u, m), || format!("a monomorphism has a fiber of size 1, need N ≥ 2 (N = {})", u.bound()))
}

fn u3(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let cat = u.category();
    let gamma = random_presheaf(cat, cfg.shape, rng);
    let fa = random_family(&gamma, u.bound(), cfg.shape, rng);
    let desc = format!("base {:?}", gamma.sizes());
    let run = || -> Result<Outcome, Error> {
        let a = classify_family(u, &fa)?.codes;
        let (ext, outer) = u.el_family(&gamma, &a, cfg.cap)?;
        let fb = random_family(ext.dom(), u.bound(), cfg.shape, &mut rng.clone());
        let b = classify_family(u, &fb)?.codes;
        let sig = code_sigma(u, &gamma, &a, &b)?;
        let composite = ext.after(&fb)?;
        if !in_class(u, &composite) {
            return Ok(Outcome::Fail("composite has a large fiber although its Σ-code fits".into()));
        }
        let inner = classify_family(u, &fb)?;
        let points = cat
            .objects()
            .map(|c| {
                (0..fb.dom().size(c))
                    .map(|q| {
                        let g = composite.apply(c, q);
                        let e = outer.points[c][fb.apply(c, q)];
                        let lookup = dependent_codes(u, &gamma, &a, &b, c, g);
                        let id = u.slice(c).identity_object();
                        (0..e).map(|k| u.el_size(lookup(id, k))).sum::<usize>() + inner.points[c][q]
                    })
                    .collect()
            })
            .collect();
        Ok(match (Classifier { codes: sig, points }).verify(u, &composite) {
            Ok(()) => Outcome::Pass,
            Err(e) => Outcome::Fail(format!("Σ-code does not classify the composite: {e}")),
        })
    };
    (desc, run().unwrap_or_else(from_err))
}

fn u4(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let cat = u.category();
    let gamma = random_presheaf(cat, cfg.shape, rng);
    let fa = random_family(&gamma, u.bound(), cfg.shape, rng);
    let desc = format!("base {:?}", gamma.sizes());
    let mut inner_rng = rng.clone();
    let mut run = || -> Result<Outcome, Error> {
        let a = classify_family(u, &fa)?.codes;
        let (ext, _) = u.el_family(&gamma, &a, cfg.cap)?;
        let fb = random_family(ext.dom(), u.bound(), cfg.shape, &mut inner_rng);
        let b = classify_family(u, &fb)?.codes;
        let pi = code_pi(u, &gamma, &a, &b, cfg.cap)?;
        let dp = dependent_product(&ext, &fb, cfg.cap)?;
        if !in_class(u, &dp.map) {
            return Ok(Outcome::Fail("dependent product has a large fiber although its Π-code fits".into()));
        }
        let canonical = classify_family(u, &dp.map)?.codes;
        for c in cat.objects() {
            for g in 0..gamma.size(c) {
                let (x, y) = (u.code_presheaf(&pi[c][g]), u.code_presheaf(&canonical[c][g]));
                if x.sizes() != y.sizes() || !enumerate_homs(&x, &y, cfg.cap)?.iter().any(PresheafMap::is_iso) {
                    return Ok(Outcome::Fail(format!(
                        "Π-code at `{}` is not isomorphic to the classifying code",
                        cat.object_name(c)
                    )));
                }
            }
        }
        Ok(Outcome::Pass)
    };
    (desc, run().unwrap_or_else(from_err))
}

fn u5(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let b = random_presheaf(u.category(), cfg.shape, rng);
    let f = random_family(&b, u.bound(), cfg.shape, rng);
    let desc = describe_map(&f);
    let run = || -> Result<Outcome, Error> {
        let cl = classify_family(u, &f)?;
        cl.verify(u, &f)?;
        let (pulled, iso) = cl.witness(u, &f)?;
        if !iso.is_iso() || pulled.after(&iso)? != f {
            return Ok(Outcome::Fail("pullback of El is not isomorphic to the family over the base".into()));
        }
        let via_empty = RealignmentProblem::from_total(u, PresheafMap::from_initial(&b), f.clone(), &cl)?;
        let re = realign_presheaf(u, &via_empty)?;
        Ok(Outcome::check(re == cl, || "realigning along the empty subobject differs from classification".into()))
    };
    (desc, run().unwrap_or_else(|e| Outcome::Fail(e.to_string())))
}

fn u7(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let cat = u.category();
    let b = random_inhabited(cat, cfg.shape, rng);
    // fibers up to N so that f is sometimes outside the class
    let f = random_family(&b, u.bound() + 1, cfg.shape, rng);
    let e = random_cover(&b, cfg.shape, rng);
    let desc = format!("f: {}, e: {}", describe_map(&f), describe_map(&e));
    let pb = match pullback(&e, &f, cfg.cap) {
        Ok(p) => p,
        Err(err) => return (desc, from_err(err)),
    };
    let out = if !e.is_epi() {
        Outcome::Fail("sampled cover is not epi".into())
    } else if in_class(u, &pb.left) {
        Outcome::check(in_class(u, &f), || "pullback along an epi is small but the family is not".into())
    } else {
        Outcome::check(!in_class(u, &f), || "pullback of a small family has a large fiber".into())
    };
    (desc, out)
}

fn u8(u: &Universe, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> (String, Outcome) {
    let problem = sample_problem(u, cfg.shape, rng);
    let desc = format!(
        "A {:?} ↣ B {:?}, family {}",
        problem.mono.dom().sizes(),
        problem.base().sizes(),
        describe_map(&problem.family)
    );
    let out = match realign_presheaf(u, &problem) {
        Ok(cl) => check_solution(u, &problem, &cl),
        Err(e) => Outcome::Fail(e.to_string()),
    };
    (desc, out)
}

fn u6(u: &Universe, cfg: &CheckConfig) -> (Option<usize>, Vec<InstanceReport>) {
    let cat = u.category();
    let omega = match Omega::new(cat, cfg.cap) {
        Ok(o) => o,
        Err(e) => {
            return (
                None,
                vec![InstanceReport {
                    index: 0,
                    description: "Ω → 1".into(),
                    outcome: from_err(e),
                }],
            )
        }
    };
    let largest = omega.presheaf.sizes().iter().copied().max().unwrap_or(0);
    let needed = largest + 1;
    let bang = PresheafMap::to_terminal(&omega.presheaf);
    let outcome = if needed > u.bound() {
        Outcome::Fail(format!(
            "|Ω| reaches {largest}, need N ≥ {needed} (N = {})",
            u.bound()
        ))
    } else {
        match classify_family(u, &bang).and_then(|cl| cl.verify(u, &bang)) {
            Ok(()) => Outcome::Pass,
            Err(e) => Outcome::Fail(e.to_string()),
        }
    };
    (
        Some(needed),
        vec![InstanceReport {
            index: 0,
            description: format!("Ω → 1 with |Ω| = {:?}", omega.presheaf.sizes()),
            outcome,
        }],
    )
}

/// Bases used by exhaustive checks: the representables and the terminal
/// presheaf.
fn small_bases(u: &Universe) -> Vec<Presheaf> {
    let cat = u.category();
    let mut v: Vec<Presheaf> = cat.objects().map(|c| Presheaf::yoneda(cat, c).expect("object")).collect();
    v.push(Presheaf::terminal(cat));
    v
}

fn exhaustive_instances(u: &Universe, axiom: Axiom, cfg: &CheckConfig) -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    for (i, b) in small_bases(u).into_iter().enumerate() {
        let subs = match enumerate_subobjects(&b, cfg.cap) {
            Ok(s) => s,
            Err(e) => {
                out.push((format!("subobjects of base {i}"), from_err(e)));
                continue;
            }
        };
        for (j, m) in subs.into_iter().enumerate() {
            let desc = format!("base {:?}, subobject {j}", b.sizes());
            match axiom {
                Axiom::U2 => out.push((desc, u2_instance(u, &m))),
                Axiom::U8 => {
                    let mut rng = instance_rng(cfg.seed, axiom.salt() << 8, i * 1000 + j);
                    for _ in 0..4 {
                        let f = random_family(&b, u.bound(), cfg.shape, &mut rng);
                        let p = relabeled_problem(u, m.clone(), f, &mut rng);
                        let o = match realign_presheaf(u, &p) {
                            Ok(cl) => check_solution(u, &p, &cl),
                            Err(e) => Outcome::Fail(e.to_string()),
                        };
                        out.push((desc.clone(), o));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

pub fn check_axiom(u: &Universe, axiom: Axiom, cfg: &CheckConfig) -> AxiomReport {
    let mut pairs: Vec<(String, Outcome)> = Vec::new();
    let mut needed_bound = None;
    match axiom {
        Axiom::U6 => {
            let (n, inst) = u6(u, cfg);
            needed_bound = n;
            pairs.extend(inst.into_iter().map(|r| (r.description, r.outcome)));
        }
        _ => {
            if cfg.exhaustive && matches!(axiom, Axiom::U2 | Axiom::U8) {
                pairs.extend(exhaustive_instances(u, axiom, cfg));
            }
            for i in 0..cfg.instances {
                let mut rng = instance_rng(cfg.seed, axiom.salt(), i);
                let r = match axiom {
                    Axiom::U1 => u1(u, cfg, &mut rng),
                    Axiom::U2 => {
                        let b = random_presheaf(u.category(), cfg.shape, &mut rng);
                        let m = random_subobject(&b, 0.5, &mut rng);
                        (describe_map(&m), u2_instance(u, &m))
                    }
                    Axiom::U3 => u3(u, cfg, &mut rng),
                    Axiom::U4 => u4(u, cfg, &mut rng),
                    Axiom::U5 => u5(u, cfg, &mut rng),
                    Axiom::U7 => u7(u, cfg, &mut rng),
                    Axiom::U8 => u8(u, cfg, &mut rng),
                    Axiom::U6 => unreachable!(),
                };
                pairs.push(r);
            }
            if axiom == Axiom::U2 && u.bound() < 2 && pairs.iter().any(|(_, o)| o.is_fail()) {
                needed_bound = Some(2);
            }
        }
    }
    let mut tally = Tally::default();
    let instances = pairs
        .into_iter()
        .enumerate()
        .map(|(index, (description, outcome))| {
            tally.record(&outcome);
            InstanceReport {
                index,
                description,
                outcome,
            }
        })
        .collect();
    AxiomReport {
        axiom,
        tally,
        needed_bound,
        instances,
    }
}

pub fn check_all(u: &Universe, cfg: &CheckConfig) -> Vec<AxiomReport> {
    Axiom::ALL.iter().map(|&a| check_axiom(u, a, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category};
    use std::sync::Arc;

    fn quick() -> CheckConfig {
        CheckConfig {
            instances: 25,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn omega_needs_bound_four_on_the_interval() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 2).unwrap();
        let r = check_axiom(&u, Axiom::U6, &quick());
        assert_eq!(r.needed_bound, Some(4));
        assert_eq!(r.tally.fail, 1);
        assert!(r.acceptable(2));
        let u = Universe::new(&cat, 4).unwrap();
        assert_eq!(check_axiom(&u, Axiom::U6, &quick()).tally.pass, 1);
    }

    #[test]
    fn monos_need_bound_two() {
        let cat = Arc::new(terminal_category());
        let u = Universe::new(&cat, 1).unwrap();
        let r = check_axiom(&u, Axiom::U2, &quick());
        assert_eq!(r.needed_bound, Some(2));
        assert!(r.acceptable(1));
    }

    #[test]
    fn all_axioms_on_the_interval() {
        let cat = Arc::new(interval_category());
        for n in [2, 3] {
            let u = Universe::new(&cat, n).unwrap();
            let cfg = CheckConfig {
                exhaustive: true,
                ..quick()
            };
            for r in check_all(&u, &cfg) {
                assert!(r.acceptable(n), "{} at N = {n}: {:?}", r.axiom, r.tally.first_failure);
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 3).unwrap();
        assert_eq!(check_axiom(&u, Axiom::U8, &quick()), check_axiom(&u, Axiom::U8, &quick()));
        assert_eq!(Axiom::parse("u7"), Some(Axiom::U7));
    }
}
