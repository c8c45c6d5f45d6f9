//! Hofmann–Streicher universes of bounded finite presheaves.
//!
//! A code at `c` is a presheaf on the slice `C/c` whose carriers have fewer
//! than `N` elements. Restricting a code along `u : c' → c` precomposes with
//! the functor `C/c' → C/c` given by postcomposition with `u`, which is an
//! exact operation on raw tables.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Cap, Error, Result};
use crate::fincat::{slice_category, FiniteCategory, Mor, Obj, Slice};
use crate::presheaf::{enumerate_bounded_presheaves, Presheaf, PresheafMap};

mod axioms;
mod classify;
mod formers;
mod hierarchy;
mod set;

pub use axioms::{
    check_all, check_axiom, check_solution, instance_rng, relabeled_problem, sample_problem, Axiom, AxiomReport, CheckConfig,
    InstanceReport,
};
pub use classify::{
    assemble, classify_family, realign_presheaf, Classifier, RealignmentProblem,
};
pub use hierarchy::{
    boundary_data, code_iso, compare_hierarchy, count_data, enumerate_data, hierarchy_include, strictify_hierarchy_pi, validate_datum,
    FormationData, HierarchyInclusion, HierarchyReport, Mismatch, StrictPi,
};
pub use formers::{code_pi, code_sigma, dependent_codes, PiDatum};
pub use set::{SetClassifier, SetPartial, SetUniverse};

/// A code at `base`: sizes per slice object and restriction tables per
/// slice morphism of `C/base`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallCode {
    pub base: Obj,
    pub sizes: Vec<usize>,
    pub tables: Vec<Vec<usize>>,
}

/// Postcomposition with `u : c' → c` as a functor `C/c' → C/c`.
#[derive(Debug, Clone)]
struct Restrictor {
    objects: Vec<Obj>,
    morphisms: Vec<Mor>,
}

/// The universe `TY`, `EL` of presheaves with fibers of size below a bound.
/// `TY` is virtual; see [`Universe::materialize`] for explicit presheaves.
#[derive(Debug, Clone)]
pub struct Universe {
    cat: Arc<FiniteCategory>,
    bound: usize,
    slices: Vec<Slice>,
    along: Vec<Restrictor>,
}

impl Universe {
    pub fn new(cat: &Arc<FiniteCategory>, bound: usize) -> Result<Self> {
        if bound == 0 {
            return Err(Error::Precondition("the bound must be at least 1".into()));
        }
        let slices: Vec<Slice> = cat.objects().map(|c| slice_category(cat, c)).collect::<Result<_>>()?;
        let along = cat
            .morphisms()
            .map(|u| {
                let (s, d) = (&slices[cat.src(u)], &slices[cat.dst(u)]);
                let objects: Vec<Obj> = s
                    .category
                    .objects()
                    .map(|z| d.object_of(cat.comp(u, s.object_morphism(z))))
                    .collect();
                let morphisms = s
                    .category
                    .morphisms()
                    .map(|m| {
                        let (w, z) = s.morphism_pair(m);
                        d.morphism_of(w, objects[z])
                    })
                    .collect();
                Restrictor { objects, morphisms }
            })
            .collect();
        Ok(Universe {
            cat: cat.clone(),
            bound,
            slices,
            along,
        })
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn slice(&self, c: Obj) -> &Slice {
        &self.slices[c]
    }

    /// The slice object `u ∘ z` of `C/c` for `z` in `C/c'`.
    pub fn push_object(&self, u: Mor, z: Obj) -> Obj {
        self.along[u].objects[z]
    }

    /// `code · u`.
    pub fn restrict(&self, code: &SmallCode, u: Mor) -> SmallCode {
        debug_assert_eq!(code.base, self.cat.dst(u));
        let r = &self.along[u];
        SmallCode {
            base: self.cat.src(u),
            sizes: r.objects.iter().map(|&z| code.sizes[z]).collect(),
            tables: r.morphisms.iter().map(|&m| code.tables[m].clone()).collect(),
        }
    }

    pub fn validate(&self, code: &SmallCode) -> Result<()> {
        if code.base >= self.cat.object_count() {
            return Err(Error::InvalidCode(format!("base #{} is not an object", code.base)));
        }
        let slice = &self.slices[code.base].category;
        if code.sizes.len() != slice.object_count() || code.tables.len() != slice.morphism_count() {
            return Err(Error::InvalidCode(format!(
                "code over `{}` has the wrong shape",
                self.cat.object_name(code.base)
            )));
        }
        if let Some((z, &k)) = code.sizes.iter().enumerate().find(|&(_, &k)| k >= self.bound) {
            return Err(Error::FiberTooLarge {
                element: format!("slice object `{}`", slice.object_name(z)),
                size: k,
                bound: self.bound,
            });
        }
        Presheaf::new(slice.clone(), code.sizes.clone(), code.tables.clone())
            .map(|_| ())
            .map_err(|e| Error::InvalidCode(e.to_string()))
    }

    pub fn code_presheaf(&self, code: &SmallCode) -> Presheaf {
        Presheaf::from_parts(self.slices[code.base].category.clone(), code.sizes.clone(), code.tables.clone())
    }

    pub fn code_of(&self, base: Obj, p: &Presheaf) -> SmallCode {
        SmallCode {
            base,
            sizes: p.sizes().to_vec(),
            tables: p.tables().to_vec(),
        }
    }

    /// `El(code)`, the carrier at the identity slice object, has this many
    /// elements.
    pub fn el_size(&self, code: &SmallCode) -> usize {
        code.sizes[self.slices[code.base].identity_object()]
    }

    /// `(code, e) · u` in `EL`, second component.
    pub fn el_restrict(&self, code: &SmallCode, e: usize, u: Mor) -> usize {
        let s = &self.slices[code.base];
        code.tables[s.morphism_of(u, s.identity_object())][e]
    }

    /// The code whose carriers are all empty.
    pub fn empty_code(&self, c: Obj) -> SmallCode {
        let slice = &self.slices[c].category;
        self.code_of(c, &Presheaf::initial(slice))
    }

    /// The code whose carriers are all singletons.
    pub fn unit_code(&self, c: Obj) -> SmallCode {
        let slice = &self.slices[c].category;
        self.code_of(c, &Presheaf::terminal(slice))
    }

    /// Every code at `c`, in increasing order.
    pub fn enumerate_codes(&self, c: Obj, cap: Cap) -> Result<Vec<SmallCode>> {
        let slice = &self.slices[c].category;
        Ok(enumerate_bounded_presheaves(slice, self.bound, cap)?
            .iter()
            .map(|p| self.code_of(c, p))
            .collect())
    }

    /// The explicit presheaves `TY`, `EL` and the generic map between them.
    pub fn materialize(&self, cap: Cap) -> Result<Materialized> {
        let cat = &self.cat;
        let mut codes = Vec::with_capacity(cat.object_count());
        for c in cat.objects() {
            let cs = self.enumerate_codes(c, cap)?;
            cap.check(cs.len(), || format!("materializing TY({})", cat.object_name(c)))?;
            codes.push(cs);
        }
        let index: Vec<HashMap<SmallCode, usize>> = codes
            .iter()
            .map(|cs| cs.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect())
            .collect();
        let sizes: Vec<usize> = codes.iter().map(Vec::len).collect();
        let ty = Presheaf::from_fn(cat.clone(), sizes, |u, i| index[cat.src(u)][&self.restrict(&codes[cat.dst(u)][i], u)])?;
        let mut el_pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(cat.object_count());
        for c in cat.objects() {
            let mut v = Vec::new();
            for (i, k) in codes[c].iter().enumerate() {
                v.extend((0..self.el_size(k)).map(|e| (i, e)));
            }
            cap.check(v.len(), || format!("materializing EL({})", cat.object_name(c)))?;
            el_pairs.push(v);
        }
        let el_index: Vec<HashMap<(usize, usize), usize>> = el_pairs
            .iter()
            .map(|v| v.iter().enumerate().map(|(j, &p)| (p, j)).collect())
            .collect();
        let el = Presheaf::from_fn(cat.clone(), el_pairs.iter().map(Vec::len).collect(), |u, j| {
            let (i, e) = el_pairs[cat.dst(u)][j];
            let k = &codes[cat.dst(u)][i];
            el_index[cat.src(u)][&(ty.restrict(u, i), self.el_restrict(k, e, u))]
        })?;
        let generic = PresheafMap::new(
            el.clone(),
            ty.clone(),
            el_pairs.iter().map(|v| v.iter().map(|&(i, _)| i).collect()).collect(),
        )?;
        Ok(Materialized {
            ty,
            el,
            generic,
            codes,
            index,
            el_pairs,
            el_index,
        })
    }

    /// The pullback of `EL` along a natural assignment of codes to the
    /// elements of `base`: elements `(γ, e)` with `e ∈ El(codes(γ))`, in
    /// lexicographic order. Returns the projection and its tautological
    /// classifier.
    pub fn el_family(&self, base: &Presheaf, codes: &[Vec<SmallCode>], cap: Cap) -> Result<(PresheafMap, Classifier)> {
        let cat = base.category();
        let mut pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(cat.object_count());
        for c in cat.objects() {
            let v: Vec<(usize, usize)> = (0..base.size(c))
                .flat_map(|g| (0..self.el_size(&codes[c][g])).map(move |e| (g, e)))
                .collect();
            cap.check(v.len(), || "building the pullback of EL".into())?;
            pairs.push(v);
        }
        let index: Vec<HashMap<(usize, usize), usize>> = pairs
            .iter()
            .map(|v| v.iter().enumerate().map(|(j, &p)| (p, j)).collect())
            .collect();
        let ext = Presheaf::from_fn(cat.clone(), pairs.iter().map(Vec::len).collect(), |u, j| {
            let (g, e) = pairs[cat.dst(u)][j];
            index[cat.src(u)][&(base.restrict(u, g), self.el_restrict(&codes[cat.dst(u)][g], e, u))]
        })?;
        let proj = PresheafMap::new(ext, base.clone(), pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect())?;
        let cl = Classifier {
            codes: codes.to_vec(),
            points: pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect(),
        };
        Ok((proj, cl))
    }
}

/// `TY`, `EL` and `El : EL → TY` as explicit presheaves.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub ty: Presheaf,
    pub el: Presheaf,
    pub generic: PresheafMap,
    pub codes: Vec<Vec<SmallCode>>,
    index: Vec<HashMap<SmallCode, usize>>,
    el_pairs: Vec<Vec<(usize, usize)>>,
    el_index: Vec<HashMap<(usize, usize), usize>>,
}

impl Materialized {
    pub fn code_index(&self, c: Obj, code: &SmallCode) -> Option<usize> {
        self.index[c].get(code).copied()
    }

    pub fn el_element(&self, c: Obj, code: usize, e: usize) -> Option<usize> {
        self.el_index[c].get(&(code, e)).copied()
    }

    pub fn el_pair(&self, c: Obj, j: usize) -> (usize, usize) {
        self.el_pairs[c][j]
    }

    /// The square `X → EL`, `Y → TY` of a classifier for `f : X → Y`.
    pub fn maps(&self, f: &PresheafMap, cl: &Classifier) -> Result<(PresheafMap, PresheafMap)> {
        let cat = f.category();
        let missing = || Error::InvalidClassifier("code outside the materialized universe".into());
        let chi = cat
            .objects()
            .map(|c| cl.codes[c].iter().map(|k| self.code_index(c, k).ok_or_else(missing)).collect())
            .collect::<Result<Vec<Vec<usize>>>>()?;
        let top = cat
            .objects()
            .map(|c| {
                (0..f.dom().size(c))
                    .map(|x| self.el_element(c, chi[c][f.apply(c, x)], cl.points[c][x]).ok_or_else(missing))
                    .collect()
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Ok((
            PresheafMap::new(f.dom().clone(), self.el.clone(), top)?,
            PresheafMap::new(f.cod().clone(), self.ty.clone(), chi)?,
        ))
    }

    /// Reads a classifier back from a map into `TY` and a map into `EL`.
    pub fn classifier(&self, top: &PresheafMap, chi: &PresheafMap) -> Classifier {
        let cat = chi.category();
        Classifier {
            codes: cat
                .objects()
                .map(|c| chi.component(c).iter().map(|&i| self.codes[c][i].clone()).collect())
                .collect(),
            points: cat
                .objects()
                .map(|c| top.component(c).iter().map(|&j| self.el_pairs[c][j].1).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category};
    use proptest::prelude::*;

    fn interval() -> Arc<FiniteCategory> {
        Arc::new(interval_category())
    }

    #[test]
    fn universe_sizes() {
        let t = Arc::new(terminal_category());
        let u = Universe::new(&t, 2).unwrap();
        assert_eq!(u.materialize(Cap::DEFAULT).unwrap().ty.sizes(), &[2]);
        let i = interval();
        let u = Universe::new(&i, 2).unwrap();
        let m = u.materialize(Cap::DEFAULT).unwrap();
        assert_eq!(m.ty.sizes(), &[2, 3]);
        // El over the code with both slice carriers singleton
        assert_eq!(m.el.sizes(), &[1, 1]);
    }

    #[test]
    fn restricting_the_all_singleton_code() {
        let i = interval();
        let u = Universe::new(&i, 2).unwrap();
        let top = u.unit_code(1);
        let along = u.restrict(&top, i.morphism("u").unwrap());
        assert_eq!(along, u.unit_code(0));
        assert_eq!(u.el_size(&u.empty_code(1)), 0);
        assert_eq!(u.el_size(&top), 1);
    }

    #[test]
    fn el_fiber_reads_the_identity_carrier() {
        let i = interval();
        let u = Universe::new(&i, 3).unwrap();
        let s = u.slice(1);
        let id = s.identity_object();
        let other = 1 - id;
        let mut sizes = vec![0; 2];
        sizes[id] = 2;
        sizes[other] = 1;
        let code = u
            .enumerate_codes(1, Cap::DEFAULT)
            .unwrap()
            .into_iter()
            .find(|k| k.sizes == sizes)
            .unwrap();
        assert_eq!(u.el_size(&code), 2);
    }

    #[test]
    fn generic_map_has_fibers_of_code_size() {
        let i = interval();
        let u = Universe::new(&i, 3).unwrap();
        let m = u.materialize(Cap::DEFAULT).unwrap();
        for c in i.objects() {
            for (k, code) in m.codes[c].iter().enumerate() {
                assert_eq!(m.generic.fiber(c, k).len(), u.el_size(code));
            }
        }
    }

    fn corpus() -> Vec<Arc<FiniteCategory>> {
        crate::corpus::categories().into_iter().map(|(_, c)| c).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn restriction_is_strictly_functorial(which in 0usize..5, bound in 1usize..4, pick in any::<usize>()) {
            let cat = &corpus()[which];
            let u = Universe::new(cat, bound).unwrap();
            for c in cat.objects() {
                let codes = u.enumerate_codes(c, Cap::DEFAULT).unwrap();
                let code = &codes[pick % codes.len()];
                prop_assert_eq!(&u.restrict(code, cat.identity(c)), code);
                for &v in cat.arrows_into(c) {
                    let once = u.restrict(code, v);
                    u.validate(&once).unwrap();
                    for &w in cat.arrows_into(cat.src(v)) {
                        prop_assert_eq!(u.restrict(&once, w), u.restrict(code, cat.comp(v, w)));
                    }
                }
            }
        }
    }
}
