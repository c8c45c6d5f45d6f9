//! Dependent products `f_*g` of finite presheaves.

use std::collections::HashMap;

use super::{Presheaf, PresheafMap};
use crate::error::{Cap, Error, Result};
use crate::fincat::{FiniteCategory, Mor, Obj};

/// `f_*g → I` for `f : A → I` and `g : B → A`.
///
/// An element over `i ∈ I(c)` is a section `s` assigning to each slot
/// `(u : c' → c, a ∈ A(c'))` with `f(a) = i·u` an element of `B(c')` over `a`,
/// natural in the sense `s(u, a)·w = s(u∘w, a·w)`. Slots are ordered by `u`
/// (in `arrows_into(c)` order) and then `a`; elements are ordered by `i`, then
/// lexicographically by section.
#[derive(Debug, Clone)]
pub struct DependentProduct {
    pub map: PresheafMap,
    entries: Vec<Vec<(usize, Vec<usize>)>>,
}

impl DependentProduct {
    pub fn entry(&self, c: Obj, p: usize) -> (usize, &[usize]) {
        let (i, s) = &self.entries[c][p];
        (*i, s)
    }

    pub fn presheaf(&self) -> &Presheaf {
        self.map.dom()
    }
}

/// The slots of a section over `i ∈ I(c)`.
pub fn section_slots(f: &PresheafMap, c: Obj, i: usize) -> Vec<(Mor, usize)> {
    let cat = f.category();
    let iobj = f.cod();
    let mut slots = Vec::new();
    for &u in cat.arrows_into(c) {
        let target = iobj.restrict(u, i);
        for a in 0..f.dom().size(cat.src(u)) {
            if f.apply(cat.src(u), a) == target {
                slots.push((u, a));
            }
        }
    }
    slots
}

fn sections(
    cat: &FiniteCategory,
    f: &PresheafMap,
    g: &PresheafMap,
    slots: &[(Mor, usize)],
    cap: Cap,
    total: &mut usize,
) -> Result<Vec<Vec<usize>>> {
    let a_obj = f.dom();
    let b_obj = g.dom();
    let slot_index: HashMap<(Mor, usize), usize> = slots.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut constraints: Vec<Vec<(usize, Mor, usize)>> = vec![Vec::new(); slots.len()];
    for (p, &(u, a)) in slots.iter().enumerate() {
        for &w in cat.arrows_into(cat.src(u)) {
            if cat.is_identity(w) {
                continue;
            }
            let q = slot_index[&(cat.comp(u, w), a_obj.restrict(w, a))];
            constraints[p.max(q)].push((p, w, q));
        }
    }
    let domains: Vec<Vec<usize>> = slots.iter().map(|&(u, a)| g.fiber(cat.src(u), a)).collect();
    let mut out = Vec::new();
    let mut current = vec![0usize; slots.len()];
    #[allow(clippy::too_many_arguments)]
    fn go(
        b_obj: &Presheaf,
        domains: &[Vec<usize>],
        constraints: &[Vec<(usize, Mor, usize)>],
        p: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: Cap,
        total: &mut usize,
    ) -> Result<()> {
        if p == domains.len() {
            out.push(current.clone());
            *total += 1;
            return cap.check(*total, || "enumerating sections of a dependent product".into());
        }
        for &b in &domains[p] {
            current[p] = b;
            if constraints[p].iter().all(|&(x, w, y)| current[y] == b_obj.restrict(w, current[x])) {
                go(b_obj, domains, constraints, p + 1, current, out, cap, total)?;
            }
        }
        Ok(())
    }
    go(b_obj, &domains, &constraints, 0, &mut current, &mut out, cap, total)?;
    Ok(out)
}

pub fn dependent_product(f: &PresheafMap, g: &PresheafMap, cap: Cap) -> Result<DependentProduct> {
    if g.cod() != f.dom() {
        return Err(Error::IllTypedDiagram("dependent product of non-composable maps".into()));
    }
    let cat = f.category().clone();
    let iobj = f.cod();
    let mut entries: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut slot_tables: Vec<Vec<Vec<(Mor, usize)>>> = Vec::new();
    let mut total = 0;
    for c in cat.objects() {
        let mut row = Vec::new();
        let mut slots_c = Vec::new();
        for i in 0..iobj.size(c) {
            let slots = section_slots(f, c, i);
            for s in sections(&cat, f, g, &slots, cap, &mut total)? {
                row.push((i, s));
            }
            slots_c.push(slots);
        }
        entries.push(row);
        slot_tables.push(slots_c);
    }
    let index: Vec<HashMap<(usize, Vec<usize>), usize>> = entries
        .iter()
        .map(|row| row.iter().cloned().enumerate().map(|(k, e)| (e, k)).collect())
        .collect();
    let slot_pos: Vec<Vec<HashMap<(Mor, usize), usize>>> = slot_tables
        .iter()
        .map(|per_i| per_i.iter().map(|ss| ss.iter().enumerate().map(|(k, &s)| (s, k)).collect()).collect())
        .collect();
    let tables = cat
        .morphisms()
        .map(|v| {
            let (src, dst) = (cat.src(v), cat.dst(v));
            entries[dst]
                .iter()
                .map(|(i, s)| {
                    let i2 = iobj.restrict(v, *i);
                    let s2: Vec<usize> = slot_tables[src][i2]
                        .iter()
                        .map(|&(w, a)| s[slot_pos[dst][*i][&(cat.comp(v, w), a)]])
                        .collect();
                    index[src][&(i2, s2)]
                })
                .collect()
        })
        .collect();
    let p = Presheaf::from_parts(cat.clone(), entries.iter().map(Vec::len).collect(), tables);
    let comps = entries.iter().map(|row| row.iter().map(|(i, _)| *i).collect()).collect();
    let map = PresheafMap::from_parts(p, iobj.clone(), comps);
    Ok(DependentProduct { map, entries })
}
