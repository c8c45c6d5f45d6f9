//! Σ- and Π-codes, computed on slices so that they commute strictly with
//! restriction.

use std::collections::HashMap;

use crate::error::{Cap, Error, Result};
use crate::fincat::Obj;
use crate::presheaf::{dependent_product, Presheaf, PresheafMap};

use super::{SmallCode, Universe};

/// A formation datum at `base`: a code `a` and, for every slice object `z`
/// and every `e` in `a(z)`, a code `b` at the domain of `z`, natural in
/// `(z, e)`. Entries of `b` are listed by `z` and then `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PiDatum {
    pub a: SmallCode,
    pub b: Vec<SmallCode>,
}

impl PiDatum {
    /// Offset of slot `(z, 0)` in `b`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.a
            .sizes
            .iter()
            .map(|&k| {
                let o = acc;
                acc += k;
                o
            })
            .collect()
    }

    pub fn slot(&self, z: Obj, e: usize) -> &SmallCode {
        &self.b[self.offsets()[z] + e]
    }
}

/// The slice presheaves `Σ → A` on `C/c` for a code `a` at `c` and codes
/// `b(z, e)` over its elements.
fn sigma_slice<'a>(
    u: &Universe,
    a: &SmallCode,
    b: &dyn Fn(Obj, usize) -> &'a SmallCode,
) -> Result<(PresheafMap, Vec<Vec<(usize, usize)>>)> {
    let slice = u.slice(a.base);
    let cat = u.category();
    let scat = &slice.category;
    let pa = u.code_presheaf(a);
    let pairs: Vec<Vec<(usize, usize)>> = scat
        .objects()
        .map(|z| (0..a.sizes[z]).flat_map(|e| (0..u.el_size(b(z, e))).map(move |e2| (e, e2))).collect())
        .collect();
    let index: Vec<HashMap<(usize, usize), usize>> = pairs
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, &p)| (p, i)).collect())
        .collect();
    let sigma = Presheaf::from_fn(scat.clone(), pairs.iter().map(Vec::len).collect(), |m, i| {
        let (w, z) = slice.morphism_pair(m);
        let (e, e2) = pairs[z][i];
        let src = scat.src(m);
        debug_assert_eq!(cat.src(w), cat.src(slice.object_morphism(src)));
        index[src][&(pa.restrict(m, e), u.el_restrict(b(z, e), e2, w))]
    })?;
    let proj = PresheafMap::new(sigma, pa, pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect())?;
    Ok((proj, pairs))
}

fn bounded(u: &Universe, base: Obj, p: &Presheaf, what: &str) -> Result<SmallCode> {
    let max = p.sizes().iter().copied().max().unwrap_or(0);
    if max >= u.bound() {
        return Err(Error::BoundOverflow {
            context: format!("{what} code at `{}`", u.category().object_name(base)),
            bound: u.bound(),
            required: max + 1,
        });
    }
    Ok(u.code_of(base, p))
}

/// The Σ-code of `a` and `b`: pairs `(e, e')` in lexicographic order.
pub fn sigma_of<'a>(u: &Universe, a: &SmallCode, b: &dyn Fn(Obj, usize) -> &'a SmallCode) -> Result<SmallCode> {
    let (proj, _) = sigma_slice(u, a, b)?;
    bounded(u, a.base, proj.dom(), "Σ")
}

/// The Π-code of `a` and `b`: sections of `Σ → A` over the slice.
pub fn pi_of<'a>(u: &Universe, a: &SmallCode, b: &dyn Fn(Obj, usize) -> &'a SmallCode, cap: Cap) -> Result<SmallCode> {
    let (proj, _) = sigma_slice(u, a, b)?;
    let bang = PresheafMap::to_terminal(proj.cod());
    let dp = dependent_product(&bang, &proj, cap)?;
    bounded(u, a.base, dp.presheaf(), "Π")
}

impl Universe {
    pub fn pi_datum(&self, d: &PiDatum, cap: Cap) -> Result<SmallCode> {
        let offs = d.offsets();
        pi_of(self, &d.a, &|z, e| &d.b[offs[z] + e], cap)
    }

    pub fn sigma_datum(&self, d: &PiDatum) -> Result<SmallCode> {
        let offs = d.offsets();
        sigma_of(self, &d.a, &|z, e| &d.b[offs[z] + e])
    }

    /// `datum · v`.
    pub fn restrict_datum(&self, d: &PiDatum, v: crate::fincat::Mor) -> PiDatum {
        let a = self.restrict(&d.a, v);
        let offs = d.offsets();
        let slice = self.slice(self.category().src(v));
        let b = slice
            .category
            .objects()
            .flat_map(|z| {
                let zz = self.push_object(v, z);
                (0..a.sizes[z]).map(move |e| (zz, e))
            })
            .map(|(zz, e)| d.b[offs[zz] + e].clone())
            .collect();
        PiDatum { a, b }
    }
}

/// Codes `b` over the context extension `Γ.a`, given for its elements in
/// the order of [`Universe::el_family`], read as slot lookups.
pub fn dependent_codes<'a>(
    u: &Universe,
    gamma: &Presheaf,
    a: &[Vec<SmallCode>],
    b: &'a [Vec<SmallCode>],
    c: Obj,
    g: usize,
) -> impl Fn(Obj, usize) -> &'a SmallCode {
    let cat = gamma.category().clone();
    let slice = u.slice(c).clone();
    let offsets: Vec<Vec<usize>> = cat
        .objects()
        .map(|d| {
            let mut acc = 0;
            a[d].iter()
                .map(|k| {
                    let o = acc;
                    acc += u.el_size(k);
                    o
                })
                .collect()
        })
        .collect();
    let gamma = gamma.clone();
    move |z, e| {
        let m = slice.object_morphism(z);
        let d = cat.src(m);
        &b[d][offsets[d][gamma.restrict(m, g)] + e]
    }
}

/// `Σ_a b` as a code per element of `Γ`.
pub fn code_sigma(u: &Universe, gamma: &Presheaf, a: &[Vec<SmallCode>], b: &[Vec<SmallCode>]) -> Result<Vec<Vec<SmallCode>>> {
    let cat = gamma.category();
    cat.objects()
        .map(|c| {
            (0..gamma.size(c))
                .map(|g| sigma_of(u, &a[c][g], &dependent_codes(u, gamma, a, b, c, g)))
                .collect()
        })
        .collect()
}

/// `Π_a b` as a code per element of `Γ`.
pub fn code_pi(u: &Universe, gamma: &Presheaf, a: &[Vec<SmallCode>], b: &[Vec<SmallCode>], cap: Cap) -> Result<Vec<Vec<SmallCode>>> {
    let cat = gamma.category();
    cat.objects()
        .map(|c| {
            (0..gamma.size(c))
                .map(|g| pi_of(u, &a[c][g], &dependent_codes(u, gamma, a, b, c, g), cap))
                .collect()
        })
        .collect()
}
