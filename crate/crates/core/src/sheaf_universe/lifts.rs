//! Enumeration of cartesian maps between families over a fixed map of
//! bases.

use std::collections::HashSet;

use crate::error::{Cap, Error, Result};
use crate::fincat::Obj;
use crate::presheaf::PresheafMap;

struct Search<'a> {
    f: &'a PresheafMap,
    pi: &'a PresheafMap,
    base: &'a PresheafMap,
    order: Vec<(Obj, usize)>,
    assign: Vec<Vec<Option<usize>>>,
    used: HashSet<(Obj, usize, usize)>,
    trail: Vec<(Obj, usize)>,
    out: Vec<PresheafMap>,
    limit: usize,
    cap: Cap,
}

impl Search<'_> {
    /// Sets `q ↦ e` at `c` together with all restrictions; false on conflict.
    fn place(&mut self, c: Obj, q: usize, e: usize) -> bool {
        let cat = self.f.category().clone();
        let (x, y) = (self.f.dom(), self.pi.dom());
        for &m in cat.arrows_into(c) {
            let d = cat.src(m);
            let (q2, e2) = (x.restrict(m, q), y.restrict(m, e));
            match self.assign[d][q2] {
                Some(v) if v == e2 => {}
                Some(_) => return false,
                None => {
                    let b = self.f.apply(d, q2);
                    if !self.used.insert((d, b, e2)) {
                        return false;
                    }
                    self.assign[d][q2] = Some(e2);
                    self.trail.push((d, q2));
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (d, q) = self.trail.pop().expect("non-empty trail");
            let e = self.assign[d][q].take().expect("assigned");
            self.used.remove(&(d, self.f.apply(d, q), e));
        }
    }

    fn go(&mut self, k: usize) -> Result<()> {
        if self.out.len() >= self.limit {
            return Ok(());
        }
        let Some(pos) = (k..self.order.len()).find(|&i| {
            let (c, q) = self.order[i];
            self.assign[c][q].is_none()
        }) else {
            let comps = self.assign.iter().map(|v| v.iter().map(|e| e.expect("total")).collect()).collect();
            self.out.push(PresheafMap::new(self.f.dom().clone(), self.pi.dom().clone(), comps)?);
            return self.cap.check(self.out.len(), || "enumerating cartesian lifts".into());
        };
        let (c, q) = self.order[pos];
        let b = self.f.apply(c, q);
        for e in self.pi.fiber(c, self.base.apply(c, b)) {
            if self.used.contains(&(c, b, e)) {
                continue;
            }
            let mark = self.trail.len();
            if self.place(c, q, e) {
                self.go(pos + 1)?;
            }
            self.undo(mark);
            if self.out.len() >= self.limit {
                break;
            }
        }
        Ok(())
    }
}

/// Cartesian maps from `f : X → B` to `π : E → U` lying over
/// `base : B → U` and extending the partial assignment `fixed`, up to
/// `limit` of them.
pub fn cartesian_lifts(
    f: &PresheafMap,
    pi: &PresheafMap,
    base: &PresheafMap,
    fixed: &[Vec<Option<usize>>],
    limit: usize,
    cap: Cap,
) -> Result<Vec<PresheafMap>> {
    if f.cod() != base.dom() || pi.cod() != base.cod() {
        return Err(Error::IllTypedDiagram("lift does not lie over the given base map".into()));
    }
    let cat = f.category().clone();
    for c in cat.objects() {
        for b in 0..f.cod().size(c) {
            if f.fiber(c, b).len() != pi.fiber(c, base.apply(c, b)).len() {
                return Ok(vec![]);
            }
        }
    }
    let mut order: Vec<(Obj, usize)> = f.dom().elements().collect();
    order.sort_by_key(|&(c, _)| std::cmp::Reverse(cat.arrows_into(c).len()));
    let mut s = Search {
        f,
        pi,
        base,
        order,
        assign: cat.objects().map(|c| vec![None; f.dom().size(c)]).collect(),
        used: HashSet::new(),
        trail: Vec::new(),
        out: Vec::new(),
        limit,
        cap,
    };
    for c in cat.objects() {
        for (q, e) in fixed[c].iter().enumerate() {
            if let Some(e) = *e {
                if pi.apply(c, e) != base.apply(c, f.apply(c, q)) || !s.place(c, q, e) {
                    return Ok(vec![]);
                }
            }
        }
    }
    s.go(0)?;
    Ok(s.out)
}

/// The unconstrained partial assignment for `f`.
pub fn no_constraints(f: &PresheafMap) -> Vec<Vec<Option<usize>>> {
    f.category().objects().map(|c| vec![None; f.dom().size(c)]).collect()
}
