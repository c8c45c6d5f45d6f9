//! Pointwise finite limits and colimits.
//!
//! A limit element at `c` is a tuple of vertex elements, listed in
//! lexicographic order. A colimit element is an equivalence class of vertex
//! elements; classes are ordered by their least member, vertices first.

use std::collections::HashMap;
use std::sync::Arc;

use super::{Presheaf, PresheafMap};
use crate::error::{Cap, Error, Result};
use crate::fincat::{FiniteCategory, Obj};

/// A finite diagram: vertices and edges `(source, target, map)`.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub cat: Arc<FiniteCategory>,
    pub vertices: Vec<Presheaf>,
    pub edges: Vec<(usize, usize, PresheafMap)>,
}

impl Diagram {
    pub fn new(cat: Arc<FiniteCategory>, vertices: Vec<Presheaf>, edges: Vec<(usize, usize, PresheafMap)>) -> Result<Self> {
        for v in &vertices {
            if !v.category().as_ref().eq(cat.as_ref()) {
                return Err(Error::CategoryMismatch);
            }
        }
        for (k, (s, t, f)) in edges.iter().enumerate() {
            if *s >= vertices.len() || *t >= vertices.len() {
                return Err(Error::IllTypedDiagram(format!("edge {k} references a missing vertex")));
            }
            if f.dom() != &vertices[*s] || f.cod() != &vertices[*t] {
                return Err(Error::IllTypedDiagram(format!("edge {k} does not match its endpoints")));
            }
        }
        Ok(Diagram { cat, vertices, edges })
    }
}

#[derive(Debug, Clone)]
pub struct Limit {
    pub apex: Presheaf,
    pub projections: Vec<PresheafMap>,
    tuples: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl Limit {
    pub fn tuple(&self, c: Obj, x: usize) -> &[usize] {
        &self.tuples[c][x]
    }

    pub fn lookup(&self, c: Obj, tuple: &[usize]) -> Option<usize> {
        self.index[c].get(tuple).copied()
    }

    /// The map `Z → lim` induced by a cone `legs[i] : Z → vertex i`.
    pub fn induced(&self, legs: &[PresheafMap]) -> Result<PresheafMap> {
        let z = legs
            .first()
            .map(|l| l.dom().clone())
            .ok_or_else(|| Error::IllTypedDiagram("empty cone; use the terminal map".into()))?;
        let comps = (0..self.tuples.len())
            .map(|c| {
                (0..z.size(c))
                    .map(|x| {
                        let t: Vec<usize> = legs.iter().map(|l| l.apply(c, x)).collect();
                        self.lookup(c, &t)
                            .ok_or_else(|| Error::IllTypedDiagram("legs do not form a cone".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PresheafMap::new(z, self.apex.clone(), comps)
    }
}

pub fn finite_limit(diagram: &Diagram, cap: Cap) -> Result<Limit> {
    let cat = &diagram.cat;
    let k = diagram.vertices.len();
    let mut by_last: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (e, (s, t, _)) in diagram.edges.iter().enumerate() {
        by_last[(*s).max(*t)].push(e);
    }
    let mut tuples = Vec::with_capacity(cat.object_count());
    let mut index = Vec::with_capacity(cat.object_count());
    let mut total = 0usize;
    for c in cat.objects() {
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut current = vec![0usize; k];
        enumerate_tuples(diagram, &by_last, c, 0, &mut current, &mut found, &mut total, cap)?;
        index.push(found.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect::<HashMap<_, _>>());
        tuples.push(found);
    }
    let sizes: Vec<usize> = tuples.iter().map(Vec::len).collect();
    let table = cat
        .morphisms()
        .map(|u| {
            let (s, d) = (cat.src(u), cat.dst(u));
            tuples[d]
                .iter()
                .map(|t| {
                    let r: Vec<usize> = t.iter().enumerate().map(|(i, &x)| diagram.vertices[i].restrict(u, x)).collect();
                    index[s][&r]
                })
                .collect()
        })
        .collect();
    let apex = Presheaf::from_parts(cat.clone(), sizes, table);
    let projections = (0..k)
        .map(|i| {
            let comps = tuples.iter().map(|ts| ts.iter().map(|t| t[i]).collect()).collect();
            PresheafMap::from_parts(apex.clone(), diagram.vertices[i].clone(), comps)
        })
        .collect();
    Ok(Limit {
        apex,
        projections,
        tuples,
        index,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_tuples(
    diagram: &Diagram,
    by_last: &[Vec<usize>],
    c: Obj,
    i: usize,
    current: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
    total: &mut usize,
    cap: Cap,
) -> Result<()> {
    if i == diagram.vertices.len() {
        *total += 1;
        cap.check(*total, || "enumerating a finite limit".into())?;
        found.push(current.clone());
        return Ok(());
    }
    for x in 0..diagram.vertices[i].size(c) {
        current[i] = x;
        let ok = by_last[i].iter().all(|&e| {
            let (s, t, f) = &diagram.edges[e];
            f.apply(c, current[*s]) == current[*t]
        });
        if ok {
            enumerate_tuples(diagram, by_last, c, i + 1, current, found, total, cap)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Colimit {
    pub apex: Presheaf,
    pub injections: Vec<PresheafMap>,
}

impl Colimit {
    /// The map `colim → Z` induced by a cocone `legs[i] : vertex i → Z`.
    pub fn induced(&self, legs: &[PresheafMap], target: &Presheaf) -> Result<PresheafMap> {
        let cat = self.apex.category();
        let mut comps: Vec<Vec<Option<usize>>> = cat.objects().map(|c| vec![None; self.apex.size(c)]).collect();
        for (inj, leg) in self.injections.iter().zip(legs) {
            for c in cat.objects() {
                for x in 0..inj.dom().size(c) {
                    let slot = &mut comps[c][inj.apply(c, x)];
                    let v = leg.apply(c, x);
                    match slot {
                        Some(prev) if *prev != v => {
                            return Err(Error::IllTypedDiagram("legs do not form a cocone".into()))
                        }
                        _ => *slot = Some(v),
                    }
                }
            }
        }
        let comps = comps
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.expect("injections are jointly surjective")).collect())
            .collect();
        PresheafMap::new(self.apex.clone(), target.clone(), comps)
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

pub fn finite_colimit(diagram: &Diagram) -> Colimit {
    let cat = &diagram.cat;
    let k = diagram.vertices.len();
    let mut classes: Vec<Vec<usize>> = Vec::with_capacity(cat.object_count());
    let mut reps: Vec<Vec<(usize, usize)>> = Vec::with_capacity(cat.object_count());
    for c in cat.objects() {
        let offsets: Vec<usize> = diagram
            .vertices
            .iter()
            .scan(0, |acc, v| {
                let o = *acc;
                *acc += v.size(c);
                Some(o)
            })
            .collect();
        let n: usize = diagram.vertices.iter().map(|v| v.size(c)).sum();
        let mut parent: Vec<usize> = (0..n).collect();
        for (s, t, f) in &diagram.edges {
            for x in 0..diagram.vertices[*s].size(c) {
                let a = find(&mut parent, offsets[*s] + x);
                let b = find(&mut parent, offsets[*t] + f.apply(c, x));
                if a != b {
                    let (lo, hi) = (a.min(b), a.max(b));
                    parent[hi] = lo;
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut class_of = vec![0; n];
        let mut rep = Vec::new();
        for (i, &o) in offsets.iter().enumerate() {
            for x in 0..diagram.vertices[i].size(c) {
                let r = find(&mut parent, o + x);
                if label[r] == usize::MAX {
                    label[r] = rep.len();
                    rep.push((i, x));
                }
                class_of[o + x] = label[r];
            }
        }
        classes.push(class_of);
        reps.push(rep);
    }
    let offsets_at = |c: Obj, i: usize| -> usize { diagram.vertices[..i].iter().map(|v| v.size(c)).sum() };
    let sizes: Vec<usize> = reps.iter().map(Vec::len).collect();
    let tables = cat
        .morphisms()
        .map(|u| {
            let s = cat.src(u);
            reps[cat.dst(u)]
                .iter()
                .map(|&(i, x)| classes[s][offsets_at(s, i) + diagram.vertices[i].restrict(u, x)])
                .collect()
        })
        .collect();
    let apex = Presheaf::from_parts(cat.clone(), sizes, tables);
    let injections = (0..k)
        .map(|i| {
            let comps = cat
                .objects()
                .map(|c| {
                    let o = offsets_at(c, i);
                    (0..diagram.vertices[i].size(c)).map(|x| classes[c][o + x]).collect()
                })
                .collect();
            PresheafMap::from_parts(diagram.vertices[i].clone(), apex.clone(), comps)
        })
        .collect();
    Colimit { apex, injections }
}

pub fn terminal(cat: &Arc<FiniteCategory>) -> Presheaf {
    Presheaf::terminal(cat)
}

pub fn initial(cat: &Arc<FiniteCategory>) -> Presheaf {
    Presheaf::initial(cat)
}

pub fn product(x: &Presheaf, y: &Presheaf, cap: Cap) -> Result<Limit> {
    let d = Diagram::new(x.category().clone(), vec![x.clone(), y.clone()], vec![])?;
    finite_limit(&d, cap)
}

#[derive(Debug, Clone)]
pub struct Pullback {
    pub apex: Presheaf,
    /// Projection to the domain of the first map.
    pub left: PresheafMap,
    /// Projection to the domain of the second map.
    pub right: PresheafMap,
    limit: Limit,
}

impl Pullback {
    /// Apex element over the pair `(x, y)`.
    pub fn lookup(&self, c: Obj, x: usize, y: usize, z: usize) -> Option<usize> {
        self.limit.lookup(c, &[x, y, z])
    }

    pub fn pair(&self, c: Obj, p: usize) -> (usize, usize) {
        let t = self.limit.tuple(c, p);
        (t[0], t[1])
    }

    pub fn induced(&self, to_x: &PresheafMap, to_y: &PresheafMap, to_z: &PresheafMap) -> Result<PresheafMap> {
        self.limit.induced(&[to_x.clone(), to_y.clone(), to_z.clone()])
    }
}

/// The pullback of `f : X → Z` and `g : Y → Z`; elements are pairs `(x, y)`
/// in lexicographic order.
pub fn pullback(f: &PresheafMap, g: &PresheafMap, cap: Cap) -> Result<Pullback> {
    if f.cod() != g.cod() {
        return Err(Error::IllTypedDiagram("pullback of maps with different codomains".into()));
    }
    let d = Diagram::new(
        f.category().clone(),
        vec![f.dom().clone(), g.dom().clone(), f.cod().clone()],
        vec![(0, 2, f.clone()), (1, 2, g.clone())],
    )?;
    let limit = finite_limit(&d, cap)?;
    Ok(Pullback {
        apex: limit.apex.clone(),
        left: limit.projections[0].clone(),
        right: limit.projections[1].clone(),
        limit,
    })
}

pub fn equalizer(f: &PresheafMap, g: &PresheafMap, cap: Cap) -> Result<(Presheaf, PresheafMap)> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(Error::IllTypedDiagram("equalizer of non-parallel maps".into()));
    }
    let d = Diagram::new(
        f.category().clone(),
        vec![f.dom().clone(), f.cod().clone()],
        vec![(0, 1, f.clone()), (0, 1, g.clone())],
    )?;
    let l = finite_limit(&d, cap)?;
    Ok((l.apex, l.projections[0].clone()))
}

pub fn coproduct(cat: &Arc<FiniteCategory>, summands: &[Presheaf]) -> Result<Colimit> {
    let d = Diagram::new(cat.clone(), summands.to_vec(), vec![])?;
    Ok(finite_colimit(&d))
}

#[derive(Debug, Clone)]
pub struct Pushout {
    pub apex: Presheaf,
    /// Injection of the codomain of the first map.
    pub left: PresheafMap,
    /// Injection of the codomain of the second map.
    pub right: PresheafMap,
    first: PresheafMap,
    colimit: Colimit,
}

impl Pushout {
    pub fn induced(&self, from_x: &PresheafMap, from_y: &PresheafMap, target: &Presheaf) -> Result<PresheafMap> {
        let from_a = from_x.after(&self.first)?;
        self.colimit.induced(&[from_a, from_x.clone(), from_y.clone()], target)
    }
}

/// The pushout of `f : A → X` and `g : A → Y`.
pub fn pushout(f: &PresheafMap, g: &PresheafMap) -> Result<Pushout> {
    if f.dom() != g.dom() {
        return Err(Error::IllTypedDiagram("pushout of maps with different domains".into()));
    }
    let d = Diagram::new(
        f.category().clone(),
        vec![f.dom().clone(), f.cod().clone(), g.cod().clone()],
        vec![(0, 1, f.clone()), (0, 2, g.clone())],
    )?;
    let colimit = finite_colimit(&d);
    Ok(Pushout {
        apex: colimit.apex.clone(),
        left: colimit.injections[1].clone(),
        right: colimit.injections[2].clone(),
        first: f.clone(),
        colimit,
    })
}

pub fn coequalizer(f: &PresheafMap, g: &PresheafMap) -> Result<(Presheaf, PresheafMap)> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(Error::IllTypedDiagram("coequalizer of non-parallel maps".into()));
    }
    let d = Diagram::new(
        f.category().clone(),
        vec![f.dom().clone(), f.cod().clone()],
        vec![(0, 1, f.clone()), (0, 1, g.clone())],
    )?;
    let c = finite_colimit(&d);
    Ok((c.apex, c.injections[1].clone()))
}

/// Factors `α` as a componentwise surjection onto its image followed by the
/// inclusion of the image (listed in increasing order).
pub fn image_factorization(alpha: &PresheafMap) -> (PresheafMap, PresheafMap) {
    let cat = alpha.category().clone();
    let image: Vec<Vec<usize>> = cat
        .objects()
        .map(|c| {
            let mut hit = vec![false; alpha.cod().size(c)];
            alpha.component(c).iter().for_each(|&y| hit[y] = true);
            (0..hit.len()).filter(|&y| hit[y]).collect()
        })
        .collect();
    let pos: Vec<HashMap<usize, usize>> = image
        .iter()
        .map(|im| im.iter().enumerate().map(|(i, &y)| (y, i)).collect())
        .collect();
    let tables = cat
        .morphisms()
        .map(|u| {
            image[cat.dst(u)]
                .iter()
                .map(|&y| pos[cat.src(u)][&alpha.cod().restrict(u, y)])
                .collect()
        })
        .collect();
    let im = Presheaf::from_parts(cat.clone(), image.iter().map(Vec::len).collect(), tables);
    let epi_comps = cat
        .objects()
        .map(|c| alpha.component(c).iter().map(|y| pos[c][y]).collect())
        .collect();
    let epi = PresheafMap::from_parts(alpha.dom().clone(), im.clone(), epi_comps);
    let mono = PresheafMap::from_parts(im, alpha.cod().clone(), image);
    (epi, mono)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category};

    fn interval() -> Arc<FiniteCategory> {
        Arc::new(interval_category())
    }

    #[test]
    fn pullback_over_terminal_is_product() {
        let i = interval();
        let x = Presheaf::new(i.clone(), vec![2, 3], vec![vec![0, 1], vec![0, 1, 2], vec![0, 0, 1]]).unwrap();
        let bang = PresheafMap::to_terminal(&x);
        let pb = pullback(&bang, &bang, Cap::DEFAULT).unwrap();
        let prod = product(&x, &x, Cap::DEFAULT).unwrap();
        assert_eq!(pb.apex, prod.apex);
        assert_eq!(pb.apex.sizes(), &[4, 9]);
    }

    #[test]
    fn pullback_of_representables_over_terminal() {
        let i = interval();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        let y0 = Presheaf::yoneda(&i, 0).unwrap();
        let pb = pullback(&PresheafMap::to_terminal(&y1), &PresheafMap::to_terminal(&y0), Cap::DEFAULT).unwrap();
        assert_eq!(pb.apex.sizes(), &[1, 0]);
    }

    #[test]
    fn equalizer_of_equal_maps_is_domain() {
        let i = interval();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        let f = PresheafMap::to_terminal(&y1);
        let (e, m) = equalizer(&f, &f, Cap::DEFAULT).unwrap();
        assert_eq!(e, y1);
        assert!(m.is_iso());
    }

    #[test]
    fn coproduct_with_initial_and_degenerate_pushout() {
        let i = interval();
        let x = Presheaf::yoneda(&i, 1).unwrap();
        let y = Presheaf::yoneda(&i, 0).unwrap();
        let empty = Presheaf::initial(&i);
        let c = coproduct(&i, &[empty.clone(), x.clone()]).unwrap();
        assert_eq!(c.apex, x);
        let po = pushout(&PresheafMap::from_initial(&x), &PresheafMap::from_initial(&y)).unwrap();
        assert_eq!(po.apex, coproduct(&i, &[x, y]).unwrap().apex);
    }

    #[test]
    fn coequalizer_of_projections() {
        // X × X ⇉ X collapses each inhabited carrier to a point
        let t = Arc::new(terminal_category());
        let x = Presheaf::constant(&t, 3);
        let p = product(&x, &x, Cap::DEFAULT).unwrap();
        let (q, _) = coequalizer(&p.projections[0], &p.projections[1]).unwrap();
        assert_eq!(q.sizes(), &[1]);

        let i = interval();
        let y0 = Presheaf::yoneda(&i, 0).unwrap();
        let p = product(&y0, &y0, Cap::DEFAULT).unwrap();
        let (q, _) = coequalizer(&p.projections[0], &p.projections[1]).unwrap();
        assert_eq!(q.sizes(), &[1, 0]);
    }

    #[test]
    fn image_factorization_recomposes() {
        let t = Arc::new(terminal_category());
        let two = Presheaf::constant(&t, 2);
        let constant = PresheafMap::new(two.clone(), two.clone(), vec![vec![1, 1]]).unwrap();
        let (e, m) = image_factorization(&constant);
        assert_eq!(e.cod().sizes(), &[1]);
        assert_eq!(m.after(&e).unwrap(), constant);
        let (e, m) = image_factorization(&PresheafMap::identity(&two));
        assert!(e.is_iso() && m.is_iso());
    }

    #[test]
    fn limit_cap_is_enforced() {
        let t = Arc::new(terminal_category());
        let x = Presheaf::constant(&t, 10);
        assert!(matches!(product(&x, &x, Cap(50)), Err(Error::CapExceeded { .. })));
    }
}
