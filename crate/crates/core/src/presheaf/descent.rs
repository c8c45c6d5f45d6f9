//! Finite checks of the descent properties of presheaf colimits: disjoint
//! coproducts, adhesive pushouts, descent for colimits of cartesian
//! transformations, and the mono-preservation facts that follow from them.

use super::limits::{coproduct, finite_colimit, pullback, pushout, Diagram};
use super::{is_cartesian_square, Presheaf, PresheafMap, Square};
use crate::error::{Cap, Error, Result};
use crate::outcome::Outcome;

/// Distinct coproduct summands have an initial pullback, and every injection
/// is mono.
pub fn coproduct_disjointness(summands: &[Presheaf], cap: Cap) -> Result<Outcome> {
    let cat = match summands.first() {
        Some(s) => s.category().clone(),
        None => return Ok(Outcome::Pass),
    };
    let co = coproduct(&cat, summands)?;
    for (i, inj) in co.injections.iter().enumerate() {
        if !inj.is_mono() {
            return Ok(Outcome::fail(format!("injection {i} is not mono")));
        }
    }
    for i in 0..summands.len() {
        for j in 0..summands.len() {
            if i == j {
                continue;
            }
            let pb = pullback(&co.injections[i], &co.injections[j], cap)?;
            if !pb.apex.is_empty() {
                return Ok(Outcome::fail(format!(
                    "summands {i} and {j} meet in {} elements",
                    pb.apex.total_size()
                )));
            }
        }
    }
    Ok(Outcome::Pass)
}

/// For a mono `m : A ↣ X` and any `g : A → Y`, the pushout square is
/// cartesian and the injection `Y → X ⊔_A Y` is mono.
pub fn pushout_adhesivity(m: &PresheafMap, g: &PresheafMap) -> Result<Outcome> {
    if !m.is_mono() {
        return Err(Error::Precondition("pushout leg is not mono".into()));
    }
    let po = pushout(m, g)?;
    let sq = Square::new(m.clone(), g.clone(), po.left.clone(), po.right.clone())?;
    let cart = is_cartesian_square(&sq)?;
    if !cart.holds() {
        return Ok(Outcome::fail(format!("pushout square is not cartesian: {cart:?}")));
    }
    Ok(Outcome::check(po.right.is_mono(), || {
        "injection opposite the mono is not mono".into()
    }))
}

/// Checks that `legs[i] : total_i → base_i` form a cartesian transformation
/// between diagrams of the same shape.
fn is_cartesian_transformation(base: &Diagram, total: &Diagram, legs: &[PresheafMap]) -> Result<bool> {
    if base.vertices.len() != total.vertices.len() || base.edges.len() != total.edges.len() || legs.len() != base.vertices.len() {
        return Err(Error::IllTypedDiagram("diagrams have different shapes".into()));
    }
    for ((s, t, f), (s2, t2, g)) in base.edges.iter().zip(&total.edges) {
        if (s, t) != (s2, t2) {
            return Err(Error::IllTypedDiagram("diagrams have different shapes".into()));
        }
        let sq = Square::new(g.clone(), legs[*s].clone(), legs[*t].clone(), f.clone())?;
        if !is_cartesian_square(&sq)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For a cartesian transformation `total → base`, the colimit injections of
/// `total` lie over those of `base` by cartesian squares.
pub fn colimit_descent(base: &Diagram, total: &Diagram, legs: &[PresheafMap]) -> Result<Outcome> {
    if !is_cartesian_transformation(base, total, legs)? {
        return Err(Error::Precondition("transformation is not cartesian".into()));
    }
    let cb = finite_colimit(base);
    let ct = finite_colimit(total);
    let induced_legs: Vec<PresheafMap> = legs
        .iter()
        .zip(&cb.injections)
        .map(|(l, inj)| inj.after(l))
        .collect::<Result<_>>()?;
    let family = ct.induced(&induced_legs, &cb.apex)?;
    for (i, leg) in legs.iter().enumerate() {
        let sq = Square::new(ct.injections[i].clone(), leg.clone(), family.clone(), cb.injections[i].clone())?;
        let cart = is_cartesian_square(&sq)?;
        if !cart.holds() {
            return Ok(Outcome::fail(format!("injection square at vertex {i} is not cartesian: {cart:?}")));
        }
    }
    Ok(Outcome::Pass)
}

/// For a diagram whose edges are all mono, every colimit injection is mono.
pub fn colimit_injections_mono(diagram: &Diagram) -> Result<Outcome> {
    if diagram.edges.iter().any(|(_, _, f)| !f.is_mono()) {
        return Err(Error::Precondition("diagram has a non-mono edge".into()));
    }
    let co = finite_colimit(diagram);
    for (i, inj) in co.injections.iter().enumerate() {
        if let Some((c, a, b)) = inj.first_non_injective() {
            return Ok(Outcome::fail(format!(
                "injection {i} identifies {a} and {b} at `{}`",
                diagram.cat.object_name(c)
            )));
        }
    }
    Ok(Outcome::Pass)
}

/// For a cartesian mono `sub → base` of diagrams, with `base` satisfying
/// descent, the induced map of colimits is mono.
pub fn colimit_of_cartesian_mono(base: &Diagram, sub: &Diagram, legs: &[PresheafMap]) -> Result<Outcome> {
    if legs.iter().any(|l| !l.is_mono()) {
        return Err(Error::Precondition("transformation is not mono".into()));
    }
    if !is_cartesian_transformation(base, sub, legs)? {
        return Err(Error::Precondition("transformation is not cartesian".into()));
    }
    let cb = finite_colimit(base);
    let cs = finite_colimit(sub);
    let induced_legs: Vec<PresheafMap> = legs
        .iter()
        .zip(&cb.injections)
        .map(|(l, inj)| inj.after(l))
        .collect::<Result<_>>()?;
    let induced = cs.induced(&induced_legs, &cb.apex)?;
    Ok(match induced.first_non_injective() {
        None => Outcome::Pass,
        Some((c, a, b)) => Outcome::fail(format!(
            "induced map identifies {a} and {b} at `{}`",
            base.cat.object_name(c)
        )),
    })
}

/// For an epi `e : E ↠ B` and `b : B → C` with `b ∘ e` mono, `b` is mono.
/// Returns `Pass` vacuously when the composite is not mono.
pub fn cover_reflects_mono(e: &PresheafMap, b: &PresheafMap) -> Result<Outcome> {
    if !e.is_epi() {
        return Err(Error::Precondition("cover is not epi".into()));
    }
    let composite = b.after(e)?;
    if !composite.is_mono() {
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::check(b.is_mono() && e.is_iso(), || {
        "composite is mono but the second factor is not".into()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, FiniteCategory};
    use std::sync::Arc;

    fn interval() -> Arc<FiniteCategory> {
        Arc::new(interval_category())
    }

    #[test]
    fn representables_are_disjoint_summands() {
        let i = interval();
        let y0 = Presheaf::yoneda(&i, 0).unwrap();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        assert_eq!(coproduct_disjointness(&[y0.clone(), y1, y0], Cap::DEFAULT).unwrap(), Outcome::Pass);
    }

    #[test]
    fn pushout_along_subobject_of_representable() {
        let i = interval();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        let sub = Presheaf::yoneda(&i, 0).unwrap();
        let m = PresheafMap::new(sub.clone(), y1.clone(), vec![vec![0], vec![]]).unwrap();
        let g = PresheafMap::to_terminal(&sub);
        assert_eq!(pushout_adhesivity(&m, &g).unwrap(), Outcome::Pass);
    }

    #[test]
    fn cover_reflects_mono_examples() {
        let i = interval();
        let x = Presheaf::yoneda(&i, 1).unwrap();
        let id = PresheafMap::identity(&x);
        assert_eq!(cover_reflects_mono(&id, &id).unwrap(), Outcome::Pass);
        let two = Presheaf::constant(&i, 2);
        let collapse = PresheafMap::to_terminal(&two);
        assert_eq!(cover_reflects_mono(&collapse, &PresheafMap::identity(collapse.cod())).unwrap(), Outcome::Pass);
    }
}
