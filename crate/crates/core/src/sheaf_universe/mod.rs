//! The sheafified Hofmann–Streicher universe, generating monomorphisms, and
//! a bounded small object argument producing a generic family with
//! realignment along generating monomorphisms.

use crate::error::{Cap, Error, Result};
use crate::presheaf::{enumerate_homs, is_cartesian_map, pullback, Presheaf, PresheafMap};
use crate::site::{is_sheaf, sheaf_witness, sheafify_map, Sheafification, Site, Topology};
use crate::universe::{classify_family, Materialized, SmallCode, Universe};

mod generating;
mod lifts;
mod saturation;
mod search;
mod soa;

pub use generating::{factor_mono, generating_monos, mono_iso, monos_isomorphic, Cell, GeneratingMono};
pub use lifts::{cartesian_lifts, no_constraints};
pub use saturation::{saturation_check, SaturationMode, SaturationReport};
pub use search::{u8_search, SearchReport, StuckProblem};
pub use soa::{Adjoined, Datum, SoaConfig, SoaProblem, SoaSolution, SoaState, Solve, Stage};

/// The sheafification `i*El : i*EL → i*TY` of the generic presheaf family.
#[derive(Debug, Clone)]
pub struct SheafUniverse {
    site: Site,
    universe: Universe,
    materialized: Materialized,
    ty: Sheafification,
    el: Sheafification,
    generic: PresheafMap,
}

impl SheafUniverse {
    pub fn new(site: &Site, bound: usize, cap: Cap) -> Result<Self> {
        let universe = Universe::new(&site.category, bound)?;
        let materialized = universe.materialize(cap)?;
        let (el, ty, generic) = sheafify_map(&materialized.generic, &site.topology, cap)?;
        Ok(SheafUniverse {
            site: site.clone(),
            universe,
            materialized,
            ty,
            el,
            generic,
        })
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn topology(&self) -> &Topology {
        &self.site.topology
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn bound(&self) -> usize {
        self.universe.bound()
    }

    pub fn materialized(&self) -> &Materialized {
        &self.materialized
    }

    pub fn generic(&self) -> &PresheafMap {
        &self.generic
    }

    pub fn ty(&self) -> &Sheafification {
        &self.ty
    }

    pub fn el(&self) -> &Sheafification {
        &self.el
    }

    pub fn in_class(&self, f: &PresheafMap) -> bool {
        f.oversized_fiber(self.bound()).is_none()
    }

    pub fn require_sheaf(&self, x: &Presheaf, what: &str, cap: Cap) -> Result<()> {
        match sheaf_witness(x, self.topology(), cap)? {
            None => Ok(()),
            Some(w) => Err(Error::NotASheaf(format!("{what}: {}", w.describe(x.category())))),
        }
    }

    /// Small families over `base` whose total space is a sheaf, one per
    /// isomorphism class over `base`, with their classifying codes.
    pub fn sheaf_families(&self, base: &Presheaf, cap: Cap) -> Result<Vec<(PresheafMap, Vec<Vec<SmallCode>>)>> {
        small_sheaf_families(&self.universe, &self.materialized, self.topology(), base, cap)
    }
}

pub(crate) fn small_sheaf_families(
    u: &Universe,
    ty: &Materialized,
    top: &Topology,
    base: &Presheaf,
    cap: Cap,
) -> Result<Vec<(PresheafMap, Vec<Vec<SmallCode>>)>> {
    let cat = base.category();
    let mut out = Vec::new();
    for chi in enumerate_homs(base, &ty.ty, cap)? {
        let codes: Vec<Vec<SmallCode>> = cat
            .objects()
            .map(|c| chi.component(c).iter().map(|&i| ty.codes[c][i].clone()).collect())
            .collect();
        let (f, _) = u.el_family(base, &codes, cap)?;
        if is_sheaf(f.dom(), top, cap)? {
            out.push((f, codes));
        }
    }
    Ok(out)
}

/// A cartesian square from a sheaf family into `i*El`, with the comparison
/// from the family into the pullback of `i*El` along `chi`.
#[derive(Debug, Clone)]
pub struct SheafClassification {
    pub chi: PresheafMap,
    pub top: PresheafMap,
    pub witness: PresheafMap,
}

/// Classifies `f` among presheaves and transports the square along the
/// units of sheafification.
pub fn classify_sheaf_family(h: &SheafUniverse, f: &PresheafMap, cap: Cap) -> Result<SheafClassification> {
    h.require_sheaf(f.dom(), "domain of the family", cap)?;
    h.require_sheaf(f.cod(), "base of the family", cap)?;
    let cl = classify_family(&h.universe, f)?;
    let (top, chi) = h.materialized.maps(f, &cl)?;
    let chi = h.ty.unit.after(&chi)?;
    let top = h.el.unit.after(&top)?;
    if !is_cartesian_map(&top, f, &h.generic, &chi)? {
        return Err(Error::InvalidClassifier("sheafified square is not cartesian".into()));
    }
    let pb = pullback(&chi, &h.generic, cap)?;
    let witness = pb.induced(f, &top, &chi.after(f)?)?;
    if !witness.is_iso() {
        return Err(Error::InvalidClassifier("comparison with the pullback of i*El is not invertible".into()));
    }
    Ok(SheafClassification { chi, top, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dense_interval, sites};
    use crate::sample::{random_family, random_presheaf, Shape};
    use crate::site::sheafify;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_topology_gives_the_presheaf_universe() {
        let (_, site) = &sites()[3];
        let h = SheafUniverse::new(site, 2, Cap::DEFAULT).unwrap();
        assert_eq!(h.ty.sheaf.sizes(), h.materialized.ty.sizes());
        assert!(h.ty.unit.is_iso() && h.el.unit.is_iso());
    }

    #[test]
    fn dense_interval_types() {
        let h = SheafUniverse::new(&dense_interval(), 2, Cap::DEFAULT).unwrap();
        assert_eq!(h.ty.sheaf.sizes(), &[2, 2]);
        assert!(is_sheaf(&h.ty.sheaf, h.topology(), Cap::DEFAULT).unwrap());
        assert!(is_sheaf(&h.el.sheaf, h.topology(), Cap::DEFAULT).unwrap());
    }

    #[test]
    fn identity_and_empty_families() {
        let site = dense_interval();
        let h = SheafUniverse::new(&site, 2, Cap::DEFAULT).unwrap();
        let one = Presheaf::terminal(&site.category);
        let cl = classify_sheaf_family(&h, &PresheafMap::identity(&one), Cap::DEFAULT).unwrap();
        assert!(cl.witness.is_iso());
        let empty = classify_sheaf_family(&h, &PresheafMap::from_initial(&one), Cap::DEFAULT).unwrap();
        assert_ne!(cl.chi, empty.chi);
    }

    #[test]
    fn non_sheaves_are_rejected() {
        let site = dense_interval();
        let h = SheafUniverse::new(&site, 2, Cap::DEFAULT).unwrap();
        let y0 = Presheaf::yoneda(&site.category, 0).unwrap();
        assert!(matches!(
            classify_sheaf_family(&h, &PresheafMap::identity(&y0), Cap::DEFAULT),
            Err(Error::NotASheaf(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sheaf_families_are_classified(which in 0usize..5, seed in any::<u64>()) {
            let (_, site) = &sites()[which];
            let h = SheafUniverse::new(site, 2, Cap::DEFAULT).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_presheaf(&site.category, Shape::default(), &mut rng);
            let f = random_family(&b, 2, Shape::default(), &mut rng);
            let (_, _, fs) = sheafify_map(&f, &site.topology, Cap::DEFAULT).unwrap();
            prop_assert!(h.in_class(&fs));
            let cl = classify_sheaf_family(&h, &fs, Cap::DEFAULT).unwrap();
            prop_assert!(cl.witness.is_iso());
            let s = sheafify(fs.cod(), &site.topology, Cap::DEFAULT).unwrap();
            prop_assert!(s.unit.is_iso());
        }
    }
}
