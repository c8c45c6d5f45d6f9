//! Grothendieck topologies on finite categories, the sheaf condition, and
//! sheafification by the plus construction.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Cap, Error, Result};
use crate::fincat::{FiniteCategory, Mor, Obj};
use crate::presheaf::{matching_families, restrict_family, sieves_on, Presheaf, PresheafMap, Sieve};

/// A validated Grothendieck topology. Covering sieves on each object are
/// sorted; `minimal[c]` is the intersection of all covers of `c`.
#[derive(Debug, Clone)]
pub struct Topology {
    cat: Arc<FiniteCategory>,
    covers: Vec<Vec<Sieve>>,
    minimal: Vec<Sieve>,
}

/// A finite category together with a topology.
#[derive(Debug, Clone)]
pub struct Site {
    pub category: Arc<FiniteCategory>,
    pub topology: Topology,
}

impl Site {
    pub fn trivial(cat: &Arc<FiniteCategory>) -> Self {
        Site {
            category: cat.clone(),
            topology: Topology::trivial(cat),
        }
    }

    pub fn new(topology: Topology) -> Self {
        Site {
            category: topology.cat.clone(),
            topology,
        }
    }
}

impl Topology {
    /// Only maximal sieves cover.
    pub fn trivial(cat: &Arc<FiniteCategory>) -> Self {
        let covers: Vec<Vec<Sieve>> = cat.objects().map(|c| vec![Sieve::maximal(cat, c)]).collect();
        let minimal = covers.iter().map(|v| v[0].clone()).collect();
        Topology {
            cat: cat.clone(),
            covers,
            minimal,
        }
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn covers(&self, c: Obj) -> &[Sieve] {
        &self.covers[c]
    }

    pub fn is_covering(&self, s: &Sieve) -> bool {
        self.covers[s.target].binary_search(s).is_ok()
    }

    /// The least covering sieve on `c`.
    pub fn minimal(&self, c: Obj) -> &Sieve {
        &self.minimal[c]
    }

    pub fn is_trivial(&self) -> bool {
        self.covers.iter().all(|v| v.len() == 1)
    }

    /// Covering sieves as member-name lists, for reports.
    pub fn describe(&self) -> Vec<(String, Vec<Vec<String>>)> {
        self.cat
            .objects()
            .map(|c| {
                let sieves = self.covers[c]
                    .iter()
                    .map(|s| s.members.iter().map(|&m| self.cat.morphism_name(m).to_string()).collect())
                    .collect();
                (self.cat.object_name(c).to_string(), sieves)
            })
            .collect()
    }
}

fn violation(axiom: &str, witness: String) -> Error {
    Error::TopologyAxiom {
        axiom: axiom.into(),
        witness,
    }
}

/// Validates a coverage given as generating members per object. Each list
/// generates a sieve; maximal sieves are always added. The axioms are
/// checked exhaustively in the order maximality, transitivity, stability.
pub fn validate_topology(cat: &Arc<FiniteCategory>, raw: &[Vec<Vec<Mor>>], cap: Cap) -> Result<Topology> {
    if raw.len() > cat.object_count() {
        return Err(Error::IllTypedDiagram("coverage lists more objects than the category has".into()));
    }
    let mut covers: Vec<Vec<Sieve>> = Vec::with_capacity(cat.object_count());
    for c in cat.objects() {
        let mut v = vec![Sieve::maximal(cat, c)];
        for gens in raw.get(c).map(|r| r.as_slice()).unwrap_or(&[]) {
            v.push(Sieve::generated(cat, c, gens)?);
        }
        v.sort();
        v.dedup();
        covers.push(v);
    }
    let is_cov = |s: &Sieve| covers[s.target].binary_search(s).is_ok();
    for c in cat.objects() {
        if !is_cov(&Sieve::maximal(cat, c)) {
            return Err(violation("maximality", format!("maximal sieve on `{}` is not covering", cat.object_name(c))));
        }
    }
    let all: Vec<Vec<Sieve>> = cat.objects().map(|c| sieves_on(cat, c, cap)).collect::<Result<_>>()?;
    for c in cat.objects() {
        for s in &covers[c] {
            for r in &all[c] {
                if !is_cov(r) && s.members.iter().all(|&m| is_cov(&r.pullback(cat, m))) {
                    return Err(violation(
                        "transitivity",
                        format!(
                            "{} pulls back to a cover along every member of the cover {}, but is not covering",
                            r.describe(cat),
                            s.describe(cat)
                        ),
                    ));
                }
            }
        }
    }
    for c in cat.objects() {
        for s in &covers[c] {
            for &u in cat.arrows_into(c) {
                let p = s.pullback(cat, u);
                if !is_cov(&p) {
                    return Err(violation(
                        "stability",
                        format!(
                            "pullback of the cover {} along `{}` is {}, which is not covering",
                            s.describe(cat),
                            cat.morphism_name(u),
                            p.describe(cat)
                        ),
                    ));
                }
            }
        }
    }
    let mut minimal = Vec::with_capacity(cat.object_count());
    for c in cat.objects() {
        for (i, a) in covers[c].iter().enumerate() {
            for b in &covers[c][i + 1..] {
                let m = a.intersection(b);
                if !is_cov(&m) {
                    return Err(violation(
                        "intersection",
                        format!("{} ∩ {} is not covering", a.describe(cat), b.describe(cat)),
                    ));
                }
            }
        }
        let least = covers[c][1..].iter().fold(covers[c][0].clone(), |acc, s| acc.intersection(s));
        minimal.push(least);
    }
    Ok(Topology {
        cat: cat.clone(),
        covers,
        minimal,
    })
}

/// Validates a coverage given by morphism names.
pub fn validate_named_topology(cat: &Arc<FiniteCategory>, raw: &[(&str, Vec<Vec<&str>>)], cap: Cap) -> Result<Topology> {
    let mut ids: Vec<Vec<Vec<Mor>>> = vec![Vec::new(); cat.object_count()];
    for (obj, sieves) in raw {
        let c = cat.object(obj)?;
        for gens in sieves {
            ids[c].push(gens.iter().map(|g| cat.morphism(g)).collect::<Result<_>>()?);
        }
    }
    validate_topology(cat, &ids, cap)
}

/// Why a presheaf fails to be a sheaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafWitness {
    pub object: Obj,
    pub sieve: Sieve,
    /// Number of elements of `X(c)`.
    pub elements: usize,
    /// Number of matching families for the sieve.
    pub families: usize,
    /// Two elements with the same family, if gluing is not unique.
    pub collision: Option<(usize, usize)>,
}

impl SheafWitness {
    pub fn describe(&self, cat: &FiniteCategory) -> String {
        match self.collision {
            Some((a, b)) => format!(
                "elements {a} and {b} of X({}) agree on the cover {}",
                cat.object_name(self.object),
                self.sieve.describe(cat)
            ),
            None => format!(
                "X({}) has {} elements but the cover {} has {} matching families",
                cat.object_name(self.object),
                self.elements,
                self.sieve.describe(cat),
                self.families
            ),
        }
    }
}

fn restrict_to(x: &Presheaf, sieve: &Sieve, e: usize) -> Vec<usize> {
    sieve.members.iter().map(|&m| x.restrict(m, e)).collect()
}

/// `None` if `x` is a sheaf; otherwise the first failing cover.
pub fn sheaf_witness(x: &Presheaf, top: &Topology, cap: Cap) -> Result<Option<SheafWitness>> {
    let cat = x.category();
    for c in cat.objects() {
        for s in top.covers(c) {
            if s.is_maximal() {
                continue;
            }
            let fams = matching_families(x, s, cap)?;
            let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
            for e in 0..x.size(c) {
                if let Some(&a) = seen.get(&restrict_to(x, s, e)) {
                    return Ok(Some(SheafWitness {
                        object: c,
                        sieve: s.clone(),
                        elements: x.size(c),
                        families: fams.len(),
                        collision: Some((a, e)),
                    }));
                }
                seen.insert(restrict_to(x, s, e), e);
            }
            if fams.len() != x.size(c) {
                return Ok(Some(SheafWitness {
                    object: c,
                    sieve: s.clone(),
                    elements: x.size(c),
                    families: fams.len(),
                    collision: None,
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_sheaf(x: &Presheaf, top: &Topology, cap: Cap) -> Result<bool> {
    Ok(sheaf_witness(x, top, cap)?.is_none())
}

/// One plus-construction stage: `X⁺(c)` is the set of matching families of
/// `X` for the least covering sieve on `c`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Plus {
    pub presheaf: Presheaf,
    pub unit: PresheafMap,
    families: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    sources: Vec<Vec<Obj>>,
}

impl Plus {
    pub fn family(&self, c: Obj, e: usize) -> &[usize] {
        &self.families[c][e]
    }

    pub fn lookup(&self, c: Obj, family: &[usize]) -> Option<usize> {
        self.index[c].get(family).copied()
    }
}

pub fn plus_construction(x: &Presheaf, top: &Topology, cap: Cap) -> Result<Plus> {
    let cat = x.category();
    let families: Vec<Vec<Vec<usize>>> = cat
        .objects()
        .map(|c| matching_families(x, top.minimal(c), cap))
        .collect::<Result<_>>()?;
    let index: Vec<HashMap<Vec<usize>, usize>> = families
        .iter()
        .map(|fs| fs.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect())
        .collect();
    let sizes: Vec<usize> = families.iter().map(|f| f.len()).collect();
    let tables: Vec<Vec<usize>> = cat
        .morphisms()
        .map(|u| {
            let (s, d) = (cat.src(u), cat.dst(u));
            families[d]
                .iter()
                .map(|fam| {
                    let r = restrict_family(cat, top.minimal(d), fam, u, top.minimal(s));
                    index[s][&r]
                })
                .collect()
        })
        .collect();
    let presheaf = Presheaf::from_parts(cat.clone(), sizes, tables);
    let comps = cat
        .objects()
        .map(|c| (0..x.size(c)).map(|e| index[c][&restrict_to(x, top.minimal(c), e)]).collect())
        .collect();
    let unit = PresheafMap::from_parts(x.clone(), presheaf.clone(), comps);
    let sources = cat
        .objects()
        .map(|c| top.minimal(c).members.iter().map(|&m| cat.src(m)).collect())
        .collect();
    Ok(Plus {
        presheaf,
        unit,
        families,
        index,
        sources,
    })
}

impl Plus {
    /// The induced map `X⁺ → Y⁺` of a map `α : X → Y`, where `target` is the
    /// plus construction of `Y` for the same topology.
    pub fn map_to(&self, target: &Plus, alpha: &PresheafMap) -> PresheafMap {
        let cat = alpha.category();
        let comps = cat
            .objects()
            .map(|c| {
                self.families[c]
                    .iter()
                    .map(|fam| {
                        let img: Vec<usize> =
                            fam.iter().zip(&self.sources[c]).map(|(&v, &d)| alpha.apply(d, v)).collect();
                        target.index[c][&img]
                    })
                    .collect()
            })
            .collect();
        PresheafMap::from_parts(self.presheaf.clone(), target.presheaf.clone(), comps)
    }
}

/// `X♯ = X⁺⁺` with its unit `η : X → X♯`.
#[derive(Debug, Clone)]
pub struct Sheafification {
    pub first: Plus,
    pub second: Plus,
    pub sheaf: Presheaf,
    pub unit: PresheafMap,
}

pub fn sheafify(x: &Presheaf, top: &Topology, cap: Cap) -> Result<Sheafification> {
    let first = plus_construction(x, top, cap)?;
    let second = plus_construction(&first.presheaf, top, cap)?;
    let unit = second.unit.after(&first.unit)?;
    Ok(Sheafification {
        sheaf: second.presheaf.clone(),
        first,
        second,
        unit,
    })
}

impl Sheafification {
    /// The induced map `X♯ → Y♯` for `α : X → Y`.
    pub fn map_to(&self, target: &Sheafification, alpha: &PresheafMap) -> PresheafMap {
        let a1 = self.first.map_to(&target.first, alpha);
        self.second.map_to(&target.second, &a1)
    }
}

pub fn sheafify_map(alpha: &PresheafMap, top: &Topology, cap: Cap) -> Result<(Sheafification, Sheafification, PresheafMap)> {
    let s = sheafify(alpha.dom(), top, cap)?;
    let t = sheafify(alpha.cod(), top, cap)?;
    let m = s.map_to(&t, alpha);
    Ok((s, t, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, RawCategory, validate_category};
    use crate::presheaf::{count_homs, enumerate_homs};
    use crate::sample::{random_family, random_presheaf, Shape};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn interval() -> Arc<FiniteCategory> {
        Arc::new(interval_category())
    }

    fn dense(cat: &Arc<FiniteCategory>) -> Topology {
        validate_named_topology(cat, &[("1", vec![vec!["u"]])], Cap::DEFAULT).unwrap()
    }

    fn span() -> Arc<FiniteCategory> {
        let raw = RawCategory::new(&["a", "b", "c"], &[("p", "c", "a"), ("q", "c", "b")], &[]);
        Arc::new(validate_category(&raw).unwrap())
    }

    #[test]
    fn trivial_topology_validates() {
        let cat = interval();
        let t = validate_topology(&cat, &[], Cap::DEFAULT).unwrap();
        assert!(t.is_trivial());
    }

    #[test]
    fn dense_topology_on_the_interval() {
        let cat = interval();
        let t = dense(&cat);
        let one = cat.object("1").unwrap();
        let u = cat.morphism("u").unwrap();
        assert_eq!(t.covers(one).len(), 2);
        assert_eq!(Sieve::maximal(&cat, 0), Sieve::generated(&cat, 1, &[u]).unwrap().pullback(&cat, u));
        assert_eq!(t.minimal(one).members, vec![u]);
    }

    #[test]
    fn empty_cover_of_the_top_only_breaks_transitivity() {
        let cat = interval();
        let err = validate_named_topology(&cat, &[("1", vec![vec![]])], Cap::DEFAULT).unwrap_err();
        match err {
            Error::TopologyAxiom { axiom, .. } => assert_eq!(axiom, "transitivity"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unstable_coverage_is_rejected() {
        let cat = span();
        let ok = validate_named_topology(&cat, &[("a", vec![vec![], vec!["p"]]), ("c", vec![vec![]])], Cap::DEFAULT);
        assert!(ok.is_ok());
        let err = validate_named_topology(&cat, &[("a", vec![vec![], vec!["p"]])], Cap::DEFAULT).unwrap_err();
        match err {
            Error::TopologyAxiom { axiom, .. } => assert_eq!(axiom, "stability"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn sheaves_for_the_dense_topology() {
        let cat = interval();
        let t = dense(&cat);
        let y1 = Presheaf::yoneda(&cat, 1).unwrap();
        let y0 = Presheaf::yoneda(&cat, 0).unwrap();
        assert!(is_sheaf(&y1, &t, Cap::DEFAULT).unwrap());
        let w = sheaf_witness(&y0, &t, Cap::DEFAULT).unwrap().unwrap();
        assert_eq!((w.object, w.elements, w.families), (1, 0, 1));
    }

    #[test]
    fn everything_is_a_sheaf_for_the_trivial_topology() {
        let cat = interval();
        let t = Topology::trivial(&cat);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let x = random_presheaf(&cat, Shape::default(), &mut rng);
            assert!(is_sheaf(&x, &t, Cap::DEFAULT).unwrap());
            assert!(sheafify(&x, &t, Cap::DEFAULT).unwrap().unit.is_iso());
        }
    }

    #[test]
    fn sheafifying_the_lower_representable() {
        let cat = interval();
        let t = dense(&cat);
        let y0 = Presheaf::yoneda(&cat, 0).unwrap();
        let s = sheafify(&y0, &t, Cap::DEFAULT).unwrap();
        assert_eq!(s.sheaf.sizes(), &[1, 1]);
        assert!(is_sheaf(&s.sheaf, &t, Cap::DEFAULT).unwrap());
        let y1 = Presheaf::yoneda(&cat, 1).unwrap();
        let inc = enumerate_homs(&y0, &y1, Cap::DEFAULT).unwrap().pop().unwrap();
        let (_, _, m) = sheafify_map(&inc, &t, Cap::DEFAULT).unwrap();
        assert!(m.is_iso());
        let empty = Presheaf::initial(&cat);
        assert!(sheafify(&empty, &t, Cap::DEFAULT).unwrap().sheaf.is_empty());
    }

    fn sites() -> Vec<Topology> {
        let cat = interval();
        let sp = span();
        vec![
            Topology::trivial(&cat),
            dense(&cat),
            validate_named_topology(&sp, &[("a", vec![vec![], vec!["p"]]), ("c", vec![vec![]])], Cap::DEFAULT).unwrap(),
            validate_named_topology(&sp, &[("a", vec![vec!["p"]])], Cap::DEFAULT).unwrap(),
        ]
    }

    #[test]
    fn covers_are_closed_under_intersection() {
        for t in sites() {
            for c in t.category().objects() {
                for a in t.covers(c) {
                    for b in t.covers(c) {
                        assert!(t.is_covering(&a.intersection(b)));
                    }
                }
                assert!(t.is_covering(t.minimal(c)));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sheafification_is_a_reflection(seed in any::<u64>(), site in 0usize..4) {
            let t = &sites()[site];
            let cat = t.category();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_presheaf(cat, Shape::default(), &mut rng);
            let s = sheafify(&x, t, Cap::DEFAULT).unwrap();
            prop_assert!(is_sheaf(&s.sheaf, t, Cap::DEFAULT).unwrap());
            let again = sheafify(&s.sheaf, t, Cap::DEFAULT).unwrap();
            prop_assert!(again.unit.is_iso());
            let f = sheafify(&random_presheaf(cat, Shape::default(), &mut rng), t, Cap::DEFAULT).unwrap().sheaf;
            let direct = count_homs(&x, &f, Cap::DEFAULT).unwrap();
            let through = count_homs(&s.sheaf, &f, Cap::DEFAULT).unwrap();
            prop_assert_eq!(direct, through);
            for h in enumerate_homs(&s.sheaf, &f, Cap::DEFAULT).unwrap() {
                let _ = h.after(&s.unit).unwrap();
            }
        }

        #[test]
        fn sheafification_is_functorial(seed in any::<u64>(), site in 0usize..4) {
            let t = &sites()[site];
            let cat = t.category();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = random_presheaf(cat, Shape::default(), &mut rng);
            let g = random_family(&z, 3, Shape::default(), &mut rng);
            let f = random_family(g.dom(), 3, Shape::default(), &mut rng);
            let (sf, sy, fs) = sheafify_map(&f, t, Cap::DEFAULT).unwrap();
            let sz = sheafify(&z, t, Cap::DEFAULT).unwrap();
            let gs = sy.map_to(&sz, &g);
            let gfs = sf.map_to(&sz, &g.after(&f).unwrap());
            prop_assert_eq!(gs.after(&fs).unwrap(), gfs);
            prop_assert_eq!(sy.map_to(&sy, &PresheafMap::identity(g.dom())), PresheafMap::identity(&sy.sheaf));
            prop_assert_eq!(fs.after(&sf.unit).unwrap(), sy.unit.after(&f).unwrap());
        }

        #[test]
        fn sheafification_preserves_small_fibers(seed in any::<u64>(), site in 0usize..4, bound in 2usize..4) {
            let t = &sites()[site];
            let cat = t.category();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_presheaf(cat, Shape::default(), &mut rng);
            let f = random_family(&b, bound, Shape::default(), &mut rng);
            let (_, _, fs) = sheafify_map(&f, t, Cap::DEFAULT).unwrap();
            prop_assert!(fs.oversized_fiber(bound).is_none());
        }

        #[test]
        fn sheafification_preserves_pullbacks(seed in any::<u64>(), site in 0usize..4) {
            let t = &sites()[site];
            let cat = t.category();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = random_presheaf(cat, Shape::default(), &mut rng);
            let f = random_family(&z, 3, Shape::default(), &mut rng);
            let g = random_family(&z, 3, Shape::default(), &mut rng);
            let pb = crate::presheaf::pullback(&f, &g, Cap::DEFAULT).unwrap();
            let sp = sheafify(&pb.apex, t, Cap::DEFAULT).unwrap();
            let (sx, sz, fs) = sheafify_map(&f, t, Cap::DEFAULT).unwrap();
            let (sy, _, gs) = sheafify_map(&g, t, Cap::DEFAULT).unwrap();
            let _ = sz;
            let l = sp.map_to(&sx, &pb.left);
            let r = sp.map_to(&sy, &pb.right);
            prop_assert!(crate::presheaf::is_cartesian_map(&l, &r, &fs, &gs).unwrap());
        }
    }
}
