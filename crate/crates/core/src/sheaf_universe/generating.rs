//! Sheafified monomorphisms into quotients of representables, and the
//! factorization of sheaf monomorphisms into pushouts of them.

use crate::error::{Cap, Result};
use crate::fincat::Obj;
use crate::presheaf::{
    enumerate_congruences, enumerate_homs, enumerate_subobjects, generated_subobject, pushout, quotient, sub_presheaf,
    Presheaf, PresheafMap,
};
use crate::site::{sheafify, sheafify_map, Site};

/// `i*(A₀ ↣ B₀)` for `B₀` a quotient of `y(c)`, with where it came from.
#[derive(Debug, Clone)]
pub struct GeneratingMono {
    pub mono: PresheafMap,
    pub representable: Obj,
    pub congruence: usize,
    pub subobject: usize,
}

pub(crate) fn image_mask(m: &PresheafMap) -> Vec<Vec<bool>> {
    m.category()
        .objects()
        .map(|c| {
            let mut v = vec![false; m.cod().size(c)];
            for &b in m.component(c) {
                v[b] = true;
            }
            v
        })
        .collect()
}

/// An isomorphism of codomains carrying the image of `m` onto the image of
/// `n`, if one exists.
pub fn mono_iso(m: &PresheafMap, n: &PresheafMap, cap: Cap) -> Result<Option<PresheafMap>> {
    if m.dom().sizes() != n.dom().sizes() || m.cod().sizes() != n.cod().sizes() {
        return Ok(None);
    }
    let target = image_mask(n);
    let cat = m.category();
    for psi in enumerate_homs(m.cod(), n.cod(), cap)? {
        if psi.is_iso() && cat.objects().all(|c| m.component(c).iter().all(|&b| target[c][psi.apply(c, b)])) {
            return Ok(Some(psi));
        }
    }
    Ok(None)
}

pub fn monos_isomorphic(m: &PresheafMap, n: &PresheafMap, cap: Cap) -> Result<bool> {
    Ok(mono_iso(m, n, cap)?.is_some())
}

/// One representative per isomorphism class of sheafified sub-quotients of
/// representables, in order of representable, congruence and subobject.
pub fn generating_monos(site: &Site, cap: Cap) -> Result<Vec<GeneratingMono>> {
    let cat = &site.category;
    let mut out: Vec<GeneratingMono> = Vec::new();
    for c in cat.objects() {
        let y = Presheaf::yoneda(cat, c)?;
        for (ri, r) in enumerate_congruences(&y, cap)?.iter().enumerate() {
            let (q, _) = quotient(&y, r)?;
            for (si, m) in enumerate_subobjects(&q, cap)?.iter().enumerate() {
                let (_, _, mono) = sheafify_map(m, &site.topology, cap)?;
                let mut seen = false;
                for g in &out {
                    if monos_isomorphic(&g.mono, &mono, cap)? {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    out.push(GeneratingMono {
                        mono,
                        representable: c,
                        congruence: ri,
                        subobject: si,
                    });
                    cap.check(out.len(), || "enumerating generating monomorphisms".into())?;
                }
            }
        }
    }
    Ok(out)
}

/// One step of a factorization: the element adjoined, the generator whose
/// pushout adjoins it, and how many elements the step adds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub element: (Obj, usize),
    pub generator: usize,
    pub added: usize,
}

/// Factors a mono between sheaves as a finite composite of pushouts of
/// generating monos, each verified as a pushout of sheaves. `None` when a
/// step's mono is not among `gens`.
pub fn factor_mono(m: &PresheafMap, gens: &[GeneratingMono], site: &Site, cap: Cap) -> Result<Option<Vec<Cell>>> {
    let b = m.cod();
    let cat = b.category();
    let top = &site.topology;
    let b_sheaf = sheafify(b, top, cap)?;
    let back = b_sheaf.unit.inverse().ok_or_else(|| crate::error::Error::NotASheaf("codomain of the mono".into()))?;
    let mut mask = image_mask(m);
    let mut cells = Vec::new();
    while let Some((c, x)) = cat.objects().find_map(|c| mask[c].iter().position(|&v| !v).map(|x| (c, x))) {
        let g = generated_subobject(b, &[(c, x)]);
        let g_mask = image_mask(&g);
        let k_mask: Vec<Vec<bool>> = cat
            .objects()
            .map(|d| (0..g.dom().size(d)).map(|i| mask[d][g.apply(d, i)]).collect())
            .collect();
        let k_in_g = sub_presheaf(g.dom(), &k_mask)?;
        let s = sub_presheaf(b, &mask)?;
        // K → S through B
        let k_to_s = PresheafMap::from_fn(k_in_g.dom().clone(), s.dom().clone(), |d, i| {
            let e = g.apply(d, k_in_g.apply(d, i));
            s.component(d).iter().position(|&v| v == e).expect("K lies in S")
        })?;
        let po = pushout(&k_to_s, &k_in_g)?;
        let to_b = po.induced(&s, &g, b)?;
        let (_, _, into_b) = sheafify_map(&to_b, top, cap)?;
        let into_b = back.after(&into_b)?;
        if !into_b.is_mono() {
            return Ok(None);
        }
        let new_mask = image_mask(&into_b);
        let (_, _, gen) = sheafify_map(&k_in_g, top, cap)?;
        let mut found = None;
        for (i, cand) in gens.iter().enumerate() {
            if monos_isomorphic(&cand.mono, &gen, cap)? {
                found = Some(i);
                break;
            }
        }
        let Some(generator) = found else {
            return Ok(None);
        };
        let before: usize = mask.iter().flatten().filter(|&&v| v).count();
        let after: usize = new_mask.iter().flatten().filter(|&&v| v).count();
        debug_assert!(cat.objects().all(|d| (0..b.size(d)).all(|e| !g_mask[d][e] || new_mask[d][e])));
        cells.push(Cell {
            element: (c, x),
            generator,
            added: after - before,
        });
        mask = new_mask;
    }
    Ok(Some(cells))
}
