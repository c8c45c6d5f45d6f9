//! Exhaustive enumeration of congruences, subobjects and natural maps.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Presheaf, PresheafMap};
use crate::error::{Cap, Error, Result};
use std::sync::Arc;

use crate::fincat::{FiniteCategory, Mor, Obj};

/// A restriction-closed equivalence relation, stored per object as a
/// restricted growth string (class labels in order of first appearance).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Congruence {
    pub labels: Vec<Vec<usize>>,
}

impl Congruence {
    pub fn discrete(x: &Presheaf) -> Self {
        Congruence {
            labels: x.category().objects().map(|c| (0..x.size(c)).collect()).collect(),
        }
    }

    pub fn class_count(&self, c: Obj) -> usize {
        self.labels[c].iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_closed(&self, x: &Presheaf) -> bool {
        let cat = x.category();
        cat.morphisms().all(|u| closed_along(x, &self.labels, u))
    }
}

fn closed_along(x: &Presheaf, labels: &[Vec<usize>], u: usize) -> bool {
    let cat = x.category();
    let (s, d) = (cat.src(u), cat.dst(u));
    let mut image: Vec<Option<usize>> = vec![None; labels[d].iter().max().map_or(0, |m| m + 1)];
    for (e, &l) in labels[d].iter().enumerate() {
        let target = labels[s][x.restrict(u, e)];
        match image[l] {
            Some(t) if t != target => return false,
            _ => image[l] = Some(target),
        }
    }
    true
}

fn growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max {
            cur.push(l);
            go(n, if l == max { max + 1 } else { max }, cur, out);
            cur.pop();
        }
    }
    go(n, 0, &mut cur, &mut out);
    out
}

pub fn enumerate_congruences(x: &Presheaf, cap: Cap) -> Result<Vec<Congruence>> {
    let cat = x.category().clone();
    let per_object: Vec<Vec<Vec<usize>>> = cat.objects().map(|c| growth_strings(x.size(c))).collect();
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); cat.object_count()];
    for u in cat.morphisms().filter(|&u| !cat.is_identity(u)) {
        by_last[cat.src(u).max(cat.dst(u))].push(u);
    }
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); cat.object_count()];
    let mut out = Vec::new();
    fn go(
        x: &Presheaf,
        per_object: &[Vec<Vec<usize>>],
        by_last: &[Vec<usize>],
        c: usize,
        labels: &mut Vec<Vec<usize>>,
        out: &mut Vec<Congruence>,
        cap: Cap,
    ) -> Result<()> {
        if c == per_object.len() {
            out.push(Congruence { labels: labels.clone() });
            return cap.check(out.len(), || "enumerating congruences".into());
        }
        for rgs in &per_object[c] {
            labels[c] = rgs.clone();
            if by_last[c].iter().all(|&u| closed_along(x, labels, u)) {
                go(x, per_object, by_last, c + 1, labels, out, cap)?;
            }
        }
        Ok(())
    }
    go(x, &per_object, &by_last, 0, &mut labels, &mut out, cap)?;
    Ok(out)
}

/// The least congruence relating the given pairs `(c, x, y)`.
pub fn generated_congruence(x: &Presheaf, pairs: &[(Obj, usize, usize)]) -> Congruence {
    let cat = x.category();
    let mut parent: Vec<Vec<usize>> = cat.objects().map(|c| (0..x.size(c)).collect()).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    fn union(p: &mut [usize], a: usize, b: usize) -> bool {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        p[hi] = lo;
        true
    }
    for &(c, a, b) in pairs {
        union(&mut parent[c], a, b);
    }
    loop {
        let mut changed = false;
        for u in cat.morphisms() {
            let (s, d) = (cat.src(u), cat.dst(u));
            for e in 0..x.size(d) {
                let r = find(&mut parent[d], e);
                if r != e {
                    let (a, b) = (x.restrict(u, e), x.restrict(u, r));
                    changed |= union(&mut parent[s], a, b);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let labels = cat
        .objects()
        .map(|c| {
            let mut label = vec![usize::MAX; x.size(c)];
            let mut next = 0;
            (0..x.size(c))
                .map(|e| {
                    let r = find(&mut parent[c], e);
                    if label[r] == usize::MAX {
                        label[r] = next;
                        next += 1;
                    }
                    label[r]
                })
                .collect()
        })
        .collect();
    Congruence { labels }
}

/// The quotient `X/R` with carriers the classes in label order, and the
/// quotient map.
pub fn quotient(x: &Presheaf, r: &Congruence) -> Result<(Presheaf, PresheafMap)> {
    if !r.is_closed(x) {
        return Err(Error::InvalidPresheaf("relation is not closed under restriction".into()));
    }
    let cat = x.category().clone();
    let reps: Vec<Vec<usize>> = cat
        .objects()
        .map(|c| {
            let mut rep = vec![0; r.class_count(c)];
            for (e, &l) in r.labels[c].iter().enumerate().rev() {
                rep[l] = e;
            }
            rep
        })
        .collect();
    let tables = cat
        .morphisms()
        .map(|u| reps[cat.dst(u)].iter().map(|&e| r.labels[cat.src(u)][x.restrict(u, e)]).collect())
        .collect();
    let q = Presheaf::from_parts(cat.clone(), reps.iter().map(Vec::len).collect(), tables);
    let epi = PresheafMap::from_parts(x.clone(), q.clone(), r.labels.clone());
    Ok((q, epi))
}

/// The sub-presheaf on the marked elements with its inclusion.
pub fn sub_presheaf(x: &Presheaf, mask: &[Vec<bool>]) -> Result<PresheafMap> {
    let cat = x.category().clone();
    let members: Vec<Vec<usize>> = mask
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e).collect())
        .collect();
    let mut pos: Vec<Vec<usize>> = cat.objects().map(|c| vec![usize::MAX; x.size(c)]).collect();
    for (c, m) in members.iter().enumerate() {
        for (i, &e) in m.iter().enumerate() {
            pos[c][e] = i;
        }
    }
    let mut tables = Vec::with_capacity(cat.morphism_count());
    for u in cat.morphisms() {
        let mut t = Vec::with_capacity(members[cat.dst(u)].len());
        for &e in &members[cat.dst(u)] {
            let p = pos[cat.src(u)][x.restrict(u, e)];
            if p == usize::MAX {
                return Err(Error::InvalidPresheaf("marked elements are not closed under restriction".into()));
            }
            t.push(p);
        }
        tables.push(t);
    }
    let sub = Presheaf::from_parts(cat.clone(), members.iter().map(Vec::len).collect(), tables);
    Ok(PresheafMap::from_parts(sub, x.clone(), members))
}

/// The sub-presheaf generated by the given elements.
pub fn generated_subobject(x: &Presheaf, gens: &[(Obj, usize)]) -> PresheafMap {
    let cat = x.category();
    let mut mask: Vec<Vec<bool>> = cat.objects().map(|c| vec![false; x.size(c)]).collect();
    for &(c, e) in gens {
        for &u in cat.arrows_into(c) {
            mask[cat.src(u)][x.restrict(u, e)] = true;
        }
    }
    sub_presheaf(x, &mask).expect("generated sub-presheaf is closed")
}

/// All sub-presheaves, as inclusions. Elements are decided object-major with
/// exclusion tried first, so the empty subobject comes first and the whole
/// presheaf last.
pub fn enumerate_subobjects(x: &Presheaf, cap: Cap) -> Result<Vec<PresheafMap>> {
    let cat = x.category().clone();
    let elems: Vec<(Obj, usize)> = x.elements().collect();
    let offset: Vec<usize> = cat
        .objects()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += x.size(c);
            Some(o)
        })
        .collect();
    let id = |c: Obj, e: usize| offset[c] + e;
    let mut down: Vec<Vec<usize>> = vec![Vec::new(); elems.len()];
    let mut up: Vec<Vec<usize>> = vec![Vec::new(); elems.len()];
    for (k, &(c, e)) in elems.iter().enumerate() {
        for &u in cat.arrows_into(c) {
            let t = id(cat.src(u), x.restrict(u, e));
            if t != k {
                down[k].push(t);
                up[t].push(k);
            }
        }
    }
    let mut state = vec![0u8; elems.len()];
    let mut out = Vec::new();
    fn set(state: &mut [u8], links: &[Vec<usize>], k: usize, v: u8, trail: &mut Vec<usize>) -> bool {
        if state[k] == v {
            return true;
        }
        if state[k] != 0 {
            return false;
        }
        state[k] = v;
        trail.push(k);
        links[k].iter().all(|&t| set(state, links, t, v, trail))
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        x: &Presheaf,
        elems: &[(Obj, usize)],
        down: &[Vec<usize>],
        up: &[Vec<usize>],
        k: usize,
        state: &mut Vec<u8>,
        out: &mut Vec<PresheafMap>,
        cap: Cap,
    ) -> Result<()> {
        if k == elems.len() {
            let mut mask: Vec<Vec<bool>> = x.category().objects().map(|c| vec![false; x.size(c)]).collect();
            for (j, &(c, e)) in elems.iter().enumerate() {
                mask[c][e] = state[j] == 1;
            }
            out.push(sub_presheaf(x, &mask)?);
            return cap.check(out.len(), || "enumerating subobjects".into());
        }
        if state[k] != 0 {
            return go(x, elems, down, up, k + 1, state, out, cap);
        }
        for (v, links) in [(2u8, up), (1u8, down)] {
            let mut trail = Vec::new();
            if set(state, links, k, v, &mut trail) {
                go(x, elems, down, up, k + 1, state, out, cap)?;
            }
            for t in trail {
                state[t] = 0;
            }
        }
        Ok(())
    }
    go(x, &elems, &down, &up, 0, &mut state, &mut out, cap)?;
    Ok(out)
}

/// Backtracking search for natural maps `X → Y`. `order` lists candidate
/// values for an element; `visit` receives each solution and returns whether
/// to keep searching.
fn hom_search(
    x: &Presheaf,
    y: &Presheaf,
    order: &mut dyn FnMut(Obj, usize) -> Vec<usize>,
    visit: &mut dyn FnMut(&[Vec<usize>]) -> Result<bool>,
) -> Result<()> {
    let cat = x.category().clone();
    let elems: Vec<(Obj, usize)> = x.elements().collect();
    let mut value: Vec<Vec<usize>> = cat.objects().map(|c| vec![usize::MAX; x.size(c)]).collect();
    fn go(
        x: &Presheaf,
        y: &Presheaf,
        elems: &[(Obj, usize)],
        k: usize,
        value: &mut Vec<Vec<usize>>,
        order: &mut dyn FnMut(Obj, usize) -> Vec<usize>,
        visit: &mut dyn FnMut(&[Vec<usize>]) -> Result<bool>,
    ) -> Result<bool> {
        if k == elems.len() {
            return visit(value);
        }
        let (c, e) = elems[k];
        if value[c][e] != usize::MAX {
            return go(x, y, elems, k + 1, value, order, visit);
        }
        let cat = x.category().clone();
        for v in order(c, y.size(c)) {
            let mut trail: Vec<(Obj, usize)> = Vec::new();
            let mut ok = true;
            for &u in cat.arrows_into(c) {
                let (s, t, w) = (cat.src(u), x.restrict(u, e), y.restrict(u, v));
                let slot = &mut value[s][t];
                if *slot == usize::MAX {
                    *slot = w;
                    trail.push((s, t));
                } else if *slot != w {
                    ok = false;
                    break;
                }
            }
            let keep_going = if ok { go(x, y, elems, k + 1, value, order, visit)? } else { true };
            for (s, t) in trail {
                value[s][t] = usize::MAX;
            }
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }
    go(x, y, &elems, 0, &mut value, order, visit)?;
    Ok(())
}

pub fn enumerate_homs(x: &Presheaf, y: &Presheaf, cap: Cap) -> Result<Vec<PresheafMap>> {
    if !x.same_category(y) {
        return Err(Error::CategoryMismatch);
    }
    let mut out = Vec::new();
    hom_search(x, y, &mut |_, n| (0..n).collect(), &mut |v| {
        out.push(PresheafMap::from_parts(x.clone(), y.clone(), v.to_vec()));
        cap.check(out.len(), || "enumerating natural maps".into())?;
        Ok(true)
    })?;
    Ok(out)
}

pub fn count_homs(x: &Presheaf, y: &Presheaf, cap: Cap) -> Result<usize> {
    if !x.same_category(y) {
        return Err(Error::CategoryMismatch);
    }
    let mut n = 0;
    hom_search(x, y, &mut |_, k| (0..k).collect(), &mut |_| {
        n += 1;
        cap.check(n, || "counting natural maps".into())?;
        Ok(true)
    })?;
    Ok(n)
}

/// A natural map `X → Y` found by randomized depth-first search, if any exists.
pub fn random_hom<R: Rng + ?Sized>(x: &Presheaf, y: &Presheaf, rng: &mut R) -> Option<PresheafMap> {
    if !x.same_category(y) {
        return None;
    }
    let mut found = None;
    hom_search(
        x,
        y,
        &mut |_, n| {
            let mut vs: Vec<usize> = (0..n).collect();
            vs.shuffle(rng);
            vs
        },
        &mut |v| {
            found = Some(v.to_vec());
            Ok(false)
        },
    )
    .ok()?;
    found.map(|comps| PresheafMap::from_parts(x.clone(), y.clone(), comps))
}

/// Every presheaf whose carriers all have fewer than `bound` elements, in
/// increasing order of carrier sizes and then restriction tables.
pub fn enumerate_bounded_presheaves(cat: &Arc<FiniteCategory>, bound: usize, cap: Cap) -> Result<Vec<Presheaf>> {
    let n = cat.object_count();
    let movers: Vec<Mor> = cat.morphisms().filter(|&u| !cat.is_identity(u)).collect();
    // composites g∘f = h among non-identities, checked once the last of them is assigned
    let mut checks: Vec<Vec<(Mor, Mor, Mor)>> = vec![Vec::new(); movers.len()];
    let slot = |u: Mor| movers.iter().position(|&v| v == u);
    for &g in &movers {
        for &f in &movers {
            if let Some(h) = cat.compose(g, f) {
                let last = [Some(g), Some(f), (!cat.is_identity(h)).then_some(h)]
                    .into_iter()
                    .flatten()
                    .filter_map(slot)
                    .max()
                    .expect("g is a mover");
                checks[last].push((g, f, h));
            }
        }
    }
    let mut out = Vec::new();
    if bound == 0 {
        return Ok(out);
    }
    let mut sizes = vec![0usize; n];
    loop {
        let mut tables: Vec<Vec<usize>> = cat
            .morphisms()
            .map(|u| if cat.is_identity(u) { (0..sizes[cat.src(u)]).collect() } else { Vec::new() })
            .collect();
        fill(cat, &sizes, &movers, &checks, 0, &mut tables, &mut out, cap)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            sizes[k] += 1;
            if sizes[k] < bound {
                break;
            }
            sizes[k] = 0;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fill(
    cat: &Arc<FiniteCategory>,
    sizes: &[usize],
    movers: &[Mor],
    checks: &[Vec<(Mor, Mor, Mor)>],
    p: usize,
    tables: &mut Vec<Vec<usize>>,
    out: &mut Vec<Presheaf>,
    cap: Cap,
) -> Result<()> {
    if p == movers.len() {
        out.push(Presheaf::from_parts(cat.clone(), sizes.to_vec(), tables.clone()));
        return cap.check(out.len(), || "enumerating bounded presheaves".into());
    }
    let u = movers[p];
    let (len, range) = (sizes[cat.dst(u)], sizes[cat.src(u)]);
    if len > 0 && range == 0 {
        return Ok(());
    }
    let mut f = vec![0usize; len];
    loop {
        tables[u] = f.clone();
        let ok = checks[p]
            .iter()
            .all(|&(g, h, gh)| (0..sizes[cat.dst(g)]).all(|x| tables[gh][x] == tables[h][tables[g][x]]));
        if ok {
            fill(cat, sizes, movers, checks, p + 1, tables, out, cap)?;
        }
        // next function in lexicographic order, last position fastest
        let mut k = len;
        loop {
            if k == 0 {
                tables[u].clear();
                return Ok(());
            }
            k -= 1;
            f[k] += 1;
            if f[k] < range {
                break;
            }
            f[k] = 0;
        }
    }
}
