//! The cumulative hierarchy: inclusions between universes of increasing
//! bound, and a Π-former at the upper level that agrees on the nose with
//! the lower one.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Cap, Error, Result};
use crate::fincat::Obj;
use crate::presheaf::{count_homs, dependent_product, enumerate_homs, is_cartesian_map, Presheaf, PresheafMap};

use super::{classify_family, realign_presheaf, Classifier, Materialized, PiDatum, RealignmentProblem, SmallCode, Universe};

fn ordered(lower: &Universe, upper: &Universe) -> Result<()> {
    if lower.bound() >= upper.bound() {
        return Err(Error::BoundsNotOrdered {
            lower: lower.bound(),
            upper: upper.bound(),
        });
    }
    if lower.category() != upper.category() {
        return Err(Error::InvalidCode("universes live over different categories".into()));
    }
    Ok(())
}

/// The inclusion `TY_N ↣ TY_M` together with `EL_N ↣ EL_M`, over
/// materialized universes.
#[derive(Debug, Clone)]
pub struct HierarchyInclusion {
    pub lower: Materialized,
    pub upper: Materialized,
    pub ty: PresheafMap,
    pub el: PresheafMap,
}

impl HierarchyInclusion {
    pub fn is_cartesian(&self) -> Result<bool> {
        is_cartesian_map(&self.el, &self.lower.generic, &self.upper.generic, &self.ty)
    }
}

pub fn hierarchy_include(lower: &Universe, upper: &Universe, cap: Cap) -> Result<HierarchyInclusion> {
    ordered(lower, upper)?;
    let lo = lower.materialize(cap)?;
    let hi = upper.materialize(cap)?;
    let cat = lower.category();
    let ty = PresheafMap::new(
        lo.ty.clone(),
        hi.ty.clone(),
        cat.objects()
            .map(|c| lo.codes[c].iter().map(|k| hi.code_index(c, k).expect("lower code is an upper code")).collect())
            .collect(),
    )?;
    let el = PresheafMap::new(
        lo.el.clone(),
        hi.el.clone(),
        cat.objects()
            .map(|c| {
                lo.el_pairs[c]
                    .iter()
                    .map(|&(i, e)| hi.el_element(c, ty.apply(c, i), e).expect("element of an included code"))
                    .collect()
            })
            .collect(),
    )?;
    Ok(HierarchyInclusion { lower: lo, upper: hi, ty, el })
}

/// Checks that a datum's `b` is natural in the slice variable.
pub fn validate_datum(u: &Universe, d: &PiDatum) -> Result<()> {
    u.validate(&d.a)?;
    let slice = u.slice(d.a.base);
    let scat = &slice.category;
    let bad = |s: String| Err(Error::InvalidCode(s));
    if d.b.len() != d.a.sizes.iter().sum::<usize>() {
        return bad("datum has the wrong number of dependent codes".into());
    }
    let pa = u.code_presheaf(&d.a);
    for z in scat.objects() {
        let dom = u.category().src(slice.object_morphism(z));
        for e in 0..d.a.sizes[z] {
            let k = d.slot(z, e);
            u.validate(k)?;
            if k.base != dom {
                return bad(format!("dependent code at slot ({z}, {e}) sits over the wrong object"));
            }
        }
    }
    for m in scat.morphisms() {
        let (w, z) = slice.morphism_pair(m);
        let src = scat.src(m);
        for e in 0..d.a.sizes[z] {
            if *d.slot(src, pa.restrict(m, e)) != u.restrict(d.slot(z, e), w) {
                return bad(format!("dependent codes are not natural along slice morphism {m}"));
            }
        }
    }
    Ok(())
}

/// Every formation datum at `c`, ordered by `a` and then lexicographically
/// by the dependent codes.
pub fn enumerate_data(u: &Universe, c: Obj, cap: Cap) -> Result<Vec<PiDatum>> {
    let cat = u.category();
    let slice = u.slice(c);
    let scat = &slice.category;
    let per_object: Vec<Vec<SmallCode>> = cat.objects().map(|d| u.enumerate_codes(d, cap)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for a in u.enumerate_codes(c, cap)? {
        let pa = u.code_presheaf(&a);
        let slots: Vec<(Obj, usize)> = scat.objects().flat_map(|z| (0..a.sizes[z]).map(move |e| (z, e))).collect();
        let pos: HashMap<(Obj, usize), usize> = slots.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        // constraints b[i] · w = b[j], checked once both are assigned
        let mut checks: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); slots.len()];
        for m in scat.morphisms() {
            let (w, z) = slice.morphism_pair(m);
            for e in 0..a.sizes[z] {
                let i = pos[&(z, e)];
                let j = pos[&(scat.src(m), pa.restrict(m, e))];
                checks[i.max(j)].push((i, w, j));
            }
        }
        let cands: Vec<&Vec<SmallCode>> = slots.iter().map(|&(z, _)| &per_object[cat.src(slice.object_morphism(z))]).collect();
        let mut choice = vec![0usize; slots.len()];
        let mut k = 0usize;
        if slots.is_empty() {
            out.push(PiDatum { a: a.clone(), b: vec![] });
            continue;
        }
        loop {
            if choice[k] == cands[k].len() {
                if k == 0 {
                    break;
                }
                choice[k] = 0;
                k -= 1;
                choice[k] += 1;
                continue;
            }
            let ok = checks[k]
                .iter()
                .all(|&(i, w, j)| u.restrict(&cands[i][choice[i]], w) == cands[j][choice[j]]);
            if !ok {
                choice[k] += 1;
            } else if k + 1 == slots.len() {
                out.push(PiDatum {
                    a: a.clone(),
                    b: (0..slots.len()).map(|i| cands[i][choice[i]].clone()).collect(),
                });
                cap.check(out.len(), || format!("enumerating formation data at `{}`", cat.object_name(c)))?;
                choice[k] += 1;
            } else {
                k += 1;
            }
        }
    }
    Ok(out)
}

/// The number of formation data at `c`, counted as natural maps from each
/// code's slice presheaf into `TY` precomposed with the domain functor.
pub fn count_data(u: &Universe, ty: &Materialized, c: Obj, cap: Cap) -> Result<usize> {
    let slice = u.slice(c);
    let scat = &slice.category;
    let cat = u.category();
    let target = Presheaf::from_fn(
        scat.clone(),
        scat.objects().map(|z| ty.ty.size(cat.src(slice.object_morphism(z)))).collect(),
        |m, i| ty.ty.restrict(slice.morphism_pair(m).0, i),
    )?;
    let mut total = 0;
    for a in u.enumerate_codes(c, cap)? {
        total += count_homs(&u.code_presheaf(&a), &target, cap)?;
    }
    Ok(total)
}

/// A sub-presheaf of formation data, closed under restriction.
#[derive(Debug, Clone)]
pub struct FormationData {
    pub presheaf: Presheaf,
    pub data: Vec<Vec<PiDatum>>,
    index: Vec<HashMap<PiDatum, usize>>,
}

impl FormationData {
    fn build(u: &Universe, data: Vec<Vec<PiDatum>>) -> Result<Self> {
        let cat = u.category().clone();
        let index: Vec<HashMap<PiDatum, usize>> = data
            .iter()
            .map(|v| v.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect())
            .collect();
        let presheaf = Presheaf::from_fn(cat.clone(), data.iter().map(Vec::len).collect(), |m, i| {
            index[cat.src(m)][&u.restrict_datum(&data[cat.dst(m)][i], m)]
        })?;
        Ok(FormationData { presheaf, data, index })
    }

    /// All data of the universe.
    pub fn enumerate(u: &Universe, cap: Cap) -> Result<Self> {
        let data = u.category().objects().map(|c| enumerate_data(u, c, cap)).collect::<Result<_>>()?;
        FormationData::build(u, data)
    }

    /// The data generated by `seeds` under restriction.
    pub fn generated(u: &Universe, seeds: &[(Obj, PiDatum)], cap: Cap) -> Result<Self> {
        let cat = u.category();
        let mut sets: Vec<BTreeSet<PiDatum>> = vec![BTreeSet::new(); cat.object_count()];
        for (c, d) in seeds {
            validate_datum(u, d)?;
            for &m in cat.arrows_into(*c) {
                sets[cat.src(m)].insert(u.restrict_datum(d, m));
            }
        }
        let data: Vec<Vec<PiDatum>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        cap.check(data.iter().map(Vec::len).sum(), || "generating formation data".into())?;
        FormationData::build(u, data)
    }

    pub fn lookup(&self, c: Obj, d: &PiDatum) -> Option<usize> {
        self.index[c].get(d).copied()
    }

    /// The Π-codes of every datum.
    pub fn pi_codes(&self, u: &Universe, cap: Cap) -> Result<Vec<Vec<SmallCode>>> {
        self.data.iter().map(|v| v.iter().map(|d| u.pi_datum(d, cap)).collect()).collect()
    }

    /// The dependent product of the generic two-level family over the data.
    pub fn pi_family(&self, u: &Universe, cap: Cap) -> Result<PresheafMap> {
        let cat = u.category();
        let a: Vec<Vec<SmallCode>> = self.data.iter().map(|v| v.iter().map(|d| d.a.clone()).collect()).collect();
        let (ext, _) = u.el_family(&self.presheaf, &a, cap)?;
        let b: Vec<Vec<SmallCode>> = cat
            .objects()
            .map(|c| {
                let id = u.slice(c).identity_object();
                self.data[c]
                    .iter()
                    .flat_map(|d| (0..u.el_size(&d.a)).map(move |e| d.slot(id, e).clone()))
                    .collect()
            })
            .collect();
        let (fam, _) = u.el_family(ext.dom(), &b, cap)?;
        Ok(dependent_product(&ext, &fam, cap)?.map)
    }
}

/// The strictified upper Π-former, defined on a sub-presheaf of upper
/// formation data that contains every lower datum.
#[derive(Debug, Clone)]
pub struct StrictPi {
    pub domain: FormationData,
    pub inclusion: PresheafMap,
    pub classifier: Classifier,
}

impl StrictPi {
    pub fn apply(&self, c: Obj, d: &PiDatum) -> Option<&SmallCode> {
        self.domain.lookup(c, d).map(|i| &self.classifier.codes[c][i])
    }
}

/// Realigns the upper Π-family along the inclusion of the lower data so
/// that the upper former restricts to the lower one exactly.
pub fn strictify_hierarchy_pi(
    lower: &Universe,
    upper: &Universe,
    lower_data: &FormationData,
    extra: &[(Obj, PiDatum)],
    cap: Cap,
) -> Result<StrictPi> {
    ordered(lower, upper)?;
    let cat = lower.category().clone();
    let mut seeds: Vec<(Obj, PiDatum)> = cat
        .objects()
        .flat_map(|c| lower_data.data[c].iter().map(move |d| (c, d.clone())))
        .collect();
    seeds.extend(extra.iter().cloned());
    let domain = FormationData::generated(upper, &seeds, cap)?;
    let inclusion = PresheafMap::new(
        lower_data.presheaf.clone(),
        domain.presheaf.clone(),
        cat.objects()
            .map(|c| lower_data.data[c].iter().map(|d| domain.lookup(c, d).expect("seeded")).collect())
            .collect(),
    )?;
    let mut codes = domain.pi_codes(upper, cap)?;
    let (family, tautological) = upper.el_family(&domain.presheaf, &codes, cap)?;
    let lower_codes = lower_data.pi_codes(lower, cap)?;
    for c in cat.objects() {
        for (i, k) in lower_codes[c].iter().enumerate() {
            codes[c][inclusion.apply(c, i)] = k.clone();
        }
    }
    let total = Classifier {
        codes,
        points: tautological.points,
    };
    let problem = RealignmentProblem::from_total(upper, inclusion.clone(), family, &total)?;
    let classifier = realign_presheaf(upper, &problem)?;
    Ok(StrictPi {
        domain,
        inclusion,
        classifier,
    })
}

/// Constant-size data of the upper level that no lower datum reaches.
pub fn boundary_data(lower: &Universe, upper: &Universe) -> Vec<(Obj, PiDatum)> {
    let n = lower.bound();
    let cat = upper.category();
    let constant = |c: Obj| upper.code_of(c, &Presheaf::constant(&upper.slice(c).category, n));
    let mut out = Vec::new();
    for c in cat.objects() {
        let slice = upper.slice(c);
        let wide = constant(c);
        let b = slice
            .category
            .objects()
            .flat_map(|z| {
                let d = cat.src(slice.object_morphism(z));
                std::iter::repeat_n(upper.unit_code(d), n)
            })
            .collect();
        out.push((c, PiDatum { a: wide, b }));
        let b = slice
            .category
            .objects()
            .map(|z| constant(cat.src(slice.object_morphism(z))))
            .collect();
        out.push((c, PiDatum { a: upper.unit_code(c), b }));
    }
    out
}

/// Whether two codes present isomorphic slice presheaves, with a witness.
pub fn code_iso(u: &Universe, x: &SmallCode, y: &SmallCode, cap: Cap) -> Result<Option<PresheafMap>> {
    if x.base != y.base || x.sizes != y.sizes {
        return Ok(None);
    }
    let (px, py) = (u.code_presheaf(x), u.code_presheaf(y));
    Ok(enumerate_homs(&px, &py, cap)?.into_iter().find(PresheafMap::is_iso))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub object: Obj,
    pub datum: usize,
}

/// Everything the hierarchy comparison found.
#[derive(Debug, Clone)]
pub struct HierarchyReport {
    pub lower_bound: usize,
    pub upper_bound: usize,
    /// Lower data scanned, per object.
    pub scanned: Vec<usize>,
    /// Lower data counted independently, per object.
    pub counted: Vec<usize>,
    pub inclusion_cartesian: bool,
    pub inclusion_commutes: bool,
    /// Lower data whose strictified upper code differs from the lower code.
    pub strict_mismatches: Vec<Mismatch>,
    /// Lower data where the upper Π obtained by classifying the dependent
    /// product differs from the included lower one.
    pub plain_mismatches: Vec<Mismatch>,
    /// Upper data outside the lower level, and whether the strictified code
    /// is isomorphic to the plain upper Π-code.
    pub off_level: Vec<(Obj, usize, bool)>,
}

impl HierarchyReport {
    pub fn exhaustive(&self) -> bool {
        self.scanned == self.counted
    }

    pub fn strict(&self) -> bool {
        self.strict_mismatches.is_empty()
    }

    /// Strictness holds on every lower datum, the scan is provably complete,
    /// and the plain comparison either exhibits a mismatch or was itself
    /// exhaustive.
    pub fn passed(&self) -> bool {
        self.strict()
            && self.exhaustive()
            && self.inclusion_cartesian
            && self.inclusion_commutes
            && self.off_level.iter().all(|t| t.2)
    }

    pub fn summary(&self) -> String {
        format!(
            "N = {}, M = {}: scanned {:?} data (independent count {:?}), strict mismatches {}, plain mismatches {}, off-level data {} ({} isomorphic)",
            self.lower_bound,
            self.upper_bound,
            self.scanned,
            self.counted,
            self.strict_mismatches.len(),
            self.plain_mismatches.len(),
            self.off_level.len(),
            self.off_level.iter().filter(|t| t.2).count()
        )
    }
}

/// Runs the full comparison between the bounds `lower < upper`.
pub fn compare_hierarchy(cat: &Arc<crate::fincat::FiniteCategory>, lower: usize, upper: usize, cap: Cap) -> Result<HierarchyReport> {
    let (un, um) = (Universe::new(cat, lower)?, Universe::new(cat, upper)?);
    ordered(&un, &um)?;
    let incl = hierarchy_include(&un, &um, cap)?;
    let inclusion_cartesian = incl.is_cartesian()?;
    let inclusion_commutes = cat.morphisms().all(|m| {
        (0..incl.lower.ty.size(cat.dst(m))).all(|i| {
            incl.ty.apply(cat.src(m), incl.lower.ty.restrict(m, i)) == incl.upper.ty.restrict(m, incl.ty.apply(cat.dst(m), i))
        })
    });
    let lower_data = FormationData::enumerate(&un, cap)?;
    let scanned: Vec<usize> = lower_data.data.iter().map(Vec::len).collect();
    let counted = cat.objects().map(|c| count_data(&un, &incl.lower, c, cap)).collect::<Result<Vec<_>>>()?;
    let strict = strictify_hierarchy_pi(&un, &um, &lower_data, &boundary_data(&un, &um), cap)?;

    let lower_pi = lower_data.pi_codes(&un, cap)?;
    let plain_lower = classify_family(&un, &lower_data.pi_family(&un, cap)?)?.codes;
    let plain_upper = classify_family(&um, &strict.domain.pi_family(&um, cap)?)?.codes;
    let mut strict_mismatches = Vec::new();
    let mut plain_mismatches = Vec::new();
    for c in cat.objects() {
        for i in 0..lower_data.data[c].len() {
            let j = strict.inclusion.apply(c, i);
            if strict.classifier.codes[c][j] != lower_pi[c][i] {
                strict_mismatches.push(Mismatch { object: c, datum: i });
            }
            if plain_upper[c][j] != plain_lower[c][i] {
                plain_mismatches.push(Mismatch { object: c, datum: i });
            }
        }
    }
    let upper_pi = strict.domain.pi_codes(&um, cap)?;
    let mut off_level = Vec::new();
    for c in cat.objects() {
        let hit: BTreeSet<usize> = strict.inclusion.component(c).iter().copied().collect();
        for j in (0..strict.domain.data[c].len()).filter(|j| !hit.contains(j)) {
            let iso = code_iso(&um, &strict.classifier.codes[c][j], &upper_pi[c][j], cap)?.is_some();
            off_level.push((c, j, iso));
        }
    }
    Ok(HierarchyReport {
        lower_bound: lower,
        upper_bound: upper,
        scanned,
        counted,
        inclusion_cartesian,
        inclusion_commutes,
        strict_mismatches,
        plain_mismatches,
        off_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::categories;
    use crate::fincat::{interval_category, terminal_category};

    #[test]
    fn equal_bounds_are_rejected() {
        let t = Arc::new(terminal_category());
        let u = Universe::new(&t, 2).unwrap();
        assert!(matches!(hierarchy_include(&u, &u, Cap::DEFAULT), Err(Error::BoundsNotOrdered { .. })));
    }

    #[test]
    fn inclusion_on_the_point_is_a_subset() {
        let t = Arc::new(terminal_category());
        let (a, b) = (Universe::new(&t, 2).unwrap(), Universe::new(&t, 3).unwrap());
        let incl = hierarchy_include(&a, &b, Cap::DEFAULT).unwrap();
        assert_eq!(incl.ty.component(0), &[0, 1]);
        assert_eq!(incl.upper.ty.size(0), 3);
        assert!(incl.is_cartesian().unwrap());
    }

    #[test]
    fn formation_data_on_the_interval() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 2).unwrap();
        let fd = FormationData::enumerate(&u, Cap::DEFAULT).unwrap();
        assert_eq!(fd.data.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 6]);
        let m = u.materialize(Cap::DEFAULT).unwrap();
        for c in cat.objects() {
            assert_eq!(count_data(&u, &m, c, Cap::DEFAULT).unwrap(), fd.data[c].len());
            for d in &fd.data[c] {
                validate_datum(&u, d).unwrap();
            }
        }
    }

    #[test]
    fn empty_base_gives_the_unit_code() {
        let cat = Arc::new(interval_category());
        let (un, um) = (Universe::new(&cat, 2).unwrap(), Universe::new(&cat, 6).unwrap());
        let fd = FormationData::enumerate(&un, Cap::DEFAULT).unwrap();
        let s = strictify_hierarchy_pi(&un, &um, &fd, &[], Cap::DEFAULT).unwrap();
        for c in cat.objects() {
            let d = PiDatum {
                a: un.empty_code(c),
                b: vec![],
            };
            assert_eq!(s.apply(c, &d), Some(&um.unit_code(c)));
            assert_eq!(un.pi_datum(&d, Cap::DEFAULT).unwrap(), un.unit_code(c));
        }
    }

    #[test]
    fn strictified_pi_commutes_with_inclusion() {
        let cat = Arc::new(interval_category());
        let r = compare_hierarchy(&cat, 2, 6, Cap::DEFAULT).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert!(!r.off_level.is_empty());
    }

    #[test]
    fn hierarchy_over_the_corpus() {
        for (name, cat) in categories() {
            let r = compare_hierarchy(&cat, 2, 3, Cap::DEFAULT).unwrap();
            assert!(r.passed(), "{name}: {}", r.summary());
        }
    }
}
