//! The Sierpiński cone `Psh(C⊤)` as the gluing of `Psh(C)` along global
//! sections: the open and closed parts, the recollement square, and a glued
//! universe that realigns strictly against the open part.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Cap, Error, Result};
use crate::fincat::{adjoin_terminal, FiniteCategory, FunctorData, Mor, Obj};
use crate::outcome::Outcome;
use crate::presheaf::{
    enumerate_homs, is_cartesian_map, product, pullback, pushout, Presheaf, PresheafMap, Pushout,
};
use crate::sample::{random_family, random_presheaf, shuffle_family, Shape};
use crate::universe::{classify_family, realign_presheaf, Classifier, Materialized, RealignmentProblem, Universe};

/// `j_*X`: a presheaf on the cone whose value at `⊤` is the set of global
/// sections of `X`, with the sections themselves.
#[derive(Debug, Clone)]
pub struct Pushforward {
    pub presheaf: Presheaf,
    pub sections: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl Pushforward {
    pub fn lookup(&self, section: &[usize]) -> Option<usize> {
        self.index.get(section).copied()
    }
}

/// The recollement square of an object of the cone.
#[derive(Debug, Clone)]
pub struct Fracture {
    pub unit: PresheafMap,
    pub closed: PresheafMap,
    pub closed_of_open: PresheafMap,
    pub closed_unit: PresheafMap,
    /// `E → j_*j^*E ×_{i_*i^*j_*j^*E} i_*i^*E`.
    pub comparison: PresheafMap,
}

impl Fracture {
    pub fn is_cartesian(&self) -> bool {
        self.comparison.is_iso()
    }
}

/// `C`, its cone `C⊤`, the embedding, and the subterminal `J` supported on
/// `C`.
#[derive(Debug, Clone)]
pub struct GluingContext {
    base: Arc<FiniteCategory>,
    cone: Arc<FiniteCategory>,
    embedding: FunctorData,
    top: Obj,
    j: Presheaf,
}

impl GluingContext {
    pub fn new(base: &Arc<FiniteCategory>) -> Result<Self> {
        let (cone, embedding) = adjoin_terminal(base);
        let top = base.object_count();
        let j = Presheaf::from_fn(cone.clone(), (0..=top).map(|c| usize::from(c != top)).collect(), |_, _| 0)?;
        Ok(GluingContext {
            base: base.clone(),
            cone,
            embedding,
            top,
            j,
        })
    }

    pub fn base(&self) -> &Arc<FiniteCategory> {
        &self.base
    }

    pub fn cone(&self) -> &Arc<FiniteCategory> {
        &self.cone
    }

    pub fn top(&self) -> Obj {
        self.top
    }

    /// The subterminal `J`.
    pub fn open(&self) -> &Presheaf {
        &self.j
    }

    fn embed(&self, m: Mor) -> Mor {
        self.embedding.morphisms[m]
    }

    /// The unique arrow `c → ⊤`.
    pub fn bang(&self, c: Obj) -> Mor {
        self.cone.hom(c, self.top)[0]
    }

    /// `j^*E`: the restriction to `C`.
    pub fn restrict(&self, e: &Presheaf) -> Presheaf {
        Presheaf::from_fn(self.base.clone(), e.sizes()[..self.top].to_vec(), |m, x| e.restrict(self.embed(m), x))
            .expect("restriction of a presheaf")
    }

    pub fn restrict_map(&self, a: &PresheafMap) -> PresheafMap {
        PresheafMap::new(
            self.restrict(a.dom()),
            self.restrict(a.cod()),
            a.components()[..self.top].to_vec(),
        )
        .expect("restriction of a natural map")
    }

    /// `j_!X`: extension by `∅` at `⊤`.
    pub fn extend_by_empty(&self, x: &Presheaf) -> Presheaf {
        let mut sizes = x.sizes().to_vec();
        sizes.push(0);
        Presheaf::from_fn(self.cone.clone(), sizes, |m, v| self.on_base(m).map_or(v, |b| x.restrict(b, v)))
            .expect("extension by the empty set")
    }

    pub fn extend_by_empty_map(&self, a: &PresheafMap) -> PresheafMap {
        let mut comps = a.components().to_vec();
        comps.push(Vec::new());
        PresheafMap::new(self.extend_by_empty(a.dom()), self.extend_by_empty(a.cod()), comps)
            .expect("extension of a natural map")
    }

    /// The `C`-morphism behind a cone morphism between objects of `C`.
    fn on_base(&self, m: Mor) -> Option<Mor> {
        self.embedding.morphisms.iter().position(|&x| x == m)
    }

    /// `j_*X`: global sections at `⊤`.
    pub fn push(&self, x: &Presheaf, cap: Cap) -> Result<Pushforward> {
        if x.category() != &self.base {
            return Err(Error::CategoryMismatch);
        }
        let one = Presheaf::terminal(&self.base);
        let sections: Vec<Vec<usize>> = enumerate_homs(&one, x, cap)?
            .into_iter()
            .map(|s| self.base.objects().map(|c| s.apply(c, 0)).collect())
            .collect();
        let index = sections.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut sizes = x.sizes().to_vec();
        sizes.push(sections.len());
        let cone = &self.cone;
        let presheaf = Presheaf::from_fn(cone.clone(), sizes, |m, v| {
            if cone.dst(m) != self.top {
                x.restrict(self.on_base(m).expect("arrow of C"), v)
            } else if cone.src(m) == self.top {
                v
            } else {
                sections[v][cone.src(m)]
            }
        })?;
        Ok(Pushforward {
            presheaf,
            sections,
            index,
        })
    }

    pub fn push_map(&self, a: &PresheafMap, dom: &Pushforward, cod: &Pushforward) -> Result<PresheafMap> {
        let mut comps = a.components().to_vec();
        comps.push(
            dom.sections
                .iter()
                .map(|s| {
                    let image: Vec<usize> = s.iter().enumerate().map(|(c, &v)| a.apply(c, v)).collect();
                    cod.lookup(&image).expect("image of a global section")
                })
                .collect(),
        );
        PresheafMap::new(dom.presheaf.clone(), cod.presheaf.clone(), comps)
    }

    /// `ε : j_!j^*E → E`.
    pub fn counit(&self, e: &Presheaf) -> PresheafMap {
        let d = self.extend_by_empty(&self.restrict(e));
        PresheafMap::from_fn(d, e.clone(), |_, v| v).expect("counit is natural")
    }

    /// `η : E → j_*j^*E`.
    pub fn unit(&self, e: &Presheaf, cap: Cap) -> Result<(Pushforward, PresheafMap)> {
        let pf = self.push(&self.restrict(e), cap)?;
        let map = PresheafMap::from_fn(e.clone(), pf.presheaf.clone(), |c, v| {
            if c != self.top {
                return v;
            }
            let s: Vec<usize> = self.base.objects().map(|d| e.restrict(self.bang(d), v)).collect();
            pf.lookup(&s).expect("restrictions of an element form a section")
        })?;
        Ok((pf, map))
    }

    /// `i^*E`, the join `E ⊔_{E×J} J`.
    pub fn closed_part(&self, e: &Presheaf, cap: Cap) -> Result<Pushout> {
        let ej = product(e, &self.j, cap)?;
        pushout(&ej.projections[0], &ej.projections[1])
    }

    /// Whether `X × J → J` is invertible, i.e. `X` is a singleton on `C`.
    pub fn is_connected(&self, x: &Presheaf) -> bool {
        self.base.objects().all(|c| x.size(c) == 1)
    }

    pub fn fracture(&self, e: &Presheaf, cap: Cap) -> Result<Fracture> {
        let (pf, unit) = self.unit(e, cap)?;
        let ie = self.closed_part(e, cap)?;
        let ijj = self.closed_part(&pf.presheaf, cap)?;
        let closed_unit = ie.induced(&ijj.left.after(&unit)?, &ijj.right, &ijj.apex)?;
        let pb = pullback(&ijj.left, &closed_unit, cap)?;
        let comparison = pb.induced(&unit, &ie.left, &ijj.left.after(&unit)?)?;
        Ok(Fracture {
            unit,
            closed: ie.left,
            closed_of_open: ijj.left,
            closed_unit,
            comparison,
        })
    }

    /// Hom-set bijections and triangle identities for `j_! ⊣ j^* ⊣ j_*`
    /// on the given objects of `Psh(C)` and of the cone.
    pub fn check_adjunctions(&self, xs: &[Presheaf], es: &[Presheaf], cap: Cap) -> Result<Outcome> {
        for x in xs {
            for e in es {
                let je = self.restrict(e);
                let left: Vec<PresheafMap> =
                    enumerate_homs(&self.extend_by_empty(x), e, cap)?.iter().map(|a| self.restrict_map(a)).collect();
                if left != enumerate_homs(x, &je, cap)? {
                    return Ok(Outcome::fail("Hom(j_!X, E) → Hom(X, j^*E) is not a bijection"));
                }
                let pf = self.push(x, cap)?;
                let mut right: Vec<PresheafMap> =
                    enumerate_homs(e, &pf.presheaf, cap)?.iter().map(|a| self.restrict_map(a)).collect();
                let mut expected = enumerate_homs(&je, x, cap)?;
                right.sort_by(|a, b| a.components().cmp(b.components()));
                expected.sort_by(|a, b| a.components().cmp(b.components()));
                if right.len() != expected.len() || right != expected {
                    return Ok(Outcome::fail("Hom(E, j_*X) → Hom(j^*E, X) is not a bijection"));
                }
            }
            if self.restrict(&self.extend_by_empty(x)) != *x {
                return Ok(Outcome::fail("j^*j_! is not the identity"));
            }
            let pf = self.push(x, cap)?;
            if self.restrict(&pf.presheaf) != *x {
                return Ok(Outcome::fail("j^*j_* is not the identity"));
            }
            let (_, eta) = self.unit(&pf.presheaf, cap)?;
            if !eta.components().iter().enumerate().all(|(_, v)| v.iter().enumerate().all(|(i, &y)| i == y)) {
                return Ok(Outcome::fail("η at j_*X is not the identity"));
            }
        }
        for e in es {
            let eps = self.counit(e);
            if !eps.is_mono() {
                return Ok(Outcome::fail("ε is not injective"));
            }
            let je = self.restrict(e);
            if self.restrict_map(&eps) != PresheafMap::identity(&je) {
                return Ok(Outcome::fail("j^*ε is not the identity"));
            }
            let (_, eta) = self.unit(e, cap)?;
            if self.restrict_map(&eta) != PresheafMap::identity(&je) {
                return Ok(Outcome::fail("j^*η is not the identity"));
            }
            for f in es {
                for a in enumerate_homs(e, f, cap)?.into_iter().take(8) {
                    if !counit_square_cartesian(self, &a, cap)? {
                        return Ok(Outcome::fail("ε is not a cartesian transformation"));
                    }
                }
            }
        }
        Ok(Outcome::Pass)
    }
}

fn counit_square_cartesian(ctx: &GluingContext, a: &PresheafMap, cap: Cap) -> Result<bool> {
    let (e, f) = (a.dom(), a.cod());
    let eps_f = ctx.counit(f);
    let pb = pullback(a, &eps_f, cap)?;
    let top = ctx.extend_by_empty_map(&ctx.restrict_map(a));
    let cmp = pb.induced(&ctx.counit(e), &top, &a.after(&ctx.counit(e))?)?;
    Ok(cmp.is_iso())
}

/// The glued universe: `T` on `C` with bound `N`, `S` on the cone with
/// bound `M`, and `π_U : E_U → U_U` with `j^*π_U = El_T` as raw data.
#[derive(Debug, Clone)]
pub struct GluedUniverse {
    pub ctx: GluingContext,
    pub inner: Universe,
    pub inner_ty: Materialized,
    pub outer: Universe,
    pub outer_ty: Materialized,
    pub pushed_ty: Pushforward,
    pub pushed_el: Pushforward,
    /// Classifying square of `j_*El_T` in `S`: total spaces, then bases.
    pub classify_top: PresheafMap,
    pub classify_base: PresheafMap,
    /// `q : TY_T → j^*TY_S`.
    pub q: PresheafMap,
    pub base: Presheaf,
    pub total: Presheaf,
    pub generic: PresheafMap,
    /// `q̄ : U_U → TY_S` and the cartesian map `E_U → EL_S` over it.
    pub qbar: PresheafMap,
    pub qbar_top: PresheafMap,
    top_pairs: Vec<(usize, usize)>,
    top_index: HashMap<(usize, usize), usize>,
    el_index: HashMap<(usize, usize), usize>,
}

pub fn glued_universe(ctx: &GluingContext, n: usize, m: usize, cap: Cap) -> Result<GluedUniverse> {
    if n > m {
        return Err(Error::BoundsNotOrdered { lower: n, upper: m });
    }
    let inner = Universe::new(ctx.base(), n)?;
    let inner_ty = inner.materialize(cap)?;
    let pushed_ty = ctx.push(&inner_ty.ty, cap)?;
    let pushed_el = ctx.push(&inner_ty.el, cap)?;
    let pushed = ctx.push_map(&inner_ty.generic, &pushed_el, &pushed_ty)?;
    let worst = pushed.max_fiber();
    if worst >= m {
        return Err(Error::BoundOverflow {
            bound: m,
            context: "classifying j_* of the inner generic family".into(),
            required: worst + 1,
        });
    }
    let outer = Universe::new(ctx.cone(), m)?;
    let outer_ty = outer.materialize(cap)?;
    let cl = classify_family(&outer, &pushed)?;
    let (classify_top, classify_base) = outer_ty.maps(&pushed, &cl)?;
    let q = ctx.restrict_map(&classify_base);
    let top = ctx.top();
    let cone = ctx.cone().clone();
    let ty_s = &outer_ty.ty;

    let mut by_image: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (t, s) in pushed_ty.sections.iter().enumerate() {
        let image: Vec<usize> = s.iter().enumerate().map(|(c, &v)| q.apply(c, v)).collect();
        by_image.entry(image).or_default().push(t);
    }
    let mut top_pairs = Vec::new();
    for s in 0..ty_s.size(top) {
        let r: Vec<usize> = ctx.base().objects().map(|c| ty_s.restrict(ctx.bang(c), s)).collect();
        for &t in by_image.get(&r).map(Vec::as_slice).unwrap_or(&[]) {
            top_pairs.push((s, t));
        }
    }
    cap.check(top_pairs.len(), || "building the glued universe at ⊤".into())?;
    let top_index: HashMap<(usize, usize), usize> = top_pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let ty_t = &inner_ty.ty;
    let mut sizes = ty_t.sizes().to_vec();
    sizes.push(top_pairs.len());
    let base = Presheaf::from_fn(cone.clone(), sizes, |mm, v| {
        if cone.dst(mm) != top {
            ty_t.restrict(ctx.on_base(mm).expect("arrow of C"), v)
        } else if cone.src(mm) == top {
            v
        } else {
            pushed_ty.sections[top_pairs[v].1][cone.src(mm)]
        }
    })?;

    let el_s = &outer_ty.el;
    let gen_s = &outer_ty.generic;
    let back: Vec<HashMap<usize, usize>> = ctx
        .base()
        .objects()
        .map(|c| classify_top.component(c).iter().enumerate().map(|(y, &x)| (x, y)).collect())
        .collect();
    let mut el_pairs = Vec::new();
    for (k, &(s, _)) in top_pairs.iter().enumerate() {
        for e in gen_s.fiber(top, s) {
            el_pairs.push((k, e));
        }
    }
    cap.check(el_pairs.len(), || "building the glued family at ⊤".into())?;
    let el_index: HashMap<(usize, usize), usize> = el_pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let el_t = &inner_ty.el;
    let mut sizes = el_t.sizes().to_vec();
    sizes.push(el_pairs.len());
    let total = Presheaf::from_fn(cone.clone(), sizes, |mm, v| {
        if cone.dst(mm) != top {
            el_t.restrict(ctx.on_base(mm).expect("arrow of C"), v)
        } else if cone.src(mm) == top {
            v
        } else {
            back[cone.src(mm)][&el_s.restrict(mm, el_pairs[v].1)]
        }
    })?;
    let generic = PresheafMap::from_fn(total.clone(), base.clone(), |c, v| {
        if c == top {
            el_pairs[v].0
        } else {
            inner_ty.generic.apply(c, v)
        }
    })?;
    let qbar = PresheafMap::from_fn(base.clone(), ty_s.clone(), |c, v| if c == top { top_pairs[v].0 } else { q.apply(c, v) })?;
    let qbar_top = PresheafMap::from_fn(total.clone(), el_s.clone(), |c, v| {
        if c == top {
            el_pairs[v].1
        } else {
            classify_top.apply(c, v)
        }
    })?;
    Ok(GluedUniverse {
        ctx: ctx.clone(),
        inner,
        inner_ty,
        outer,
        outer_ty,
        pushed_ty,
        pushed_el,
        classify_top,
        classify_base,
        q,
        base,
        total,
        generic,
        qbar,
        qbar_top,
        top_pairs,
        top_index,
        el_index,
    })
}

impl GluedUniverse {
    /// Elements of `U_U(⊤)` as pairs of an outer code and a global section
    /// of `TY_T`.
    pub fn top_pairs(&self) -> &[(usize, usize)] {
        &self.top_pairs
    }

    /// Raw equality of the open part of `π_U` with `El_T`.
    pub fn restricts_to_inner(&self) -> bool {
        let c = &self.ctx;
        c.restrict(&self.base) == self.inner_ty.ty
            && c.restrict(&self.total) == self.inner_ty.el
            && c.restrict_map(&self.generic) == self.inner_ty.generic
    }

    /// `π_U → π_S` is cartesian over `q̄` and the fibers of `π_U` are
    /// bounded by `N` on `C` and by `M` at `⊤`.
    pub fn check(&self) -> Result<Outcome> {
        if !is_cartesian_map(&self.qbar_top, &self.generic, &self.outer_ty.generic, &self.qbar)? {
            return Ok(Outcome::fail("π_U is not the pullback of π_S along q̄"));
        }
        let top = self.ctx.top();
        for c in self.ctx.cone().objects() {
            let bound = if c == top { self.outer.bound() } else { self.inner.bound() };
            for b in 0..self.base.size(c) {
                let n = self.generic.fiber(c, b).len();
                if n >= bound {
                    return Ok(Outcome::fail(format!("fiber of size {n} at object {c}")));
                }
            }
        }
        Ok(Outcome::check(self.restricts_to_inner(), || "j^*π_U differs from El_T".into()))
    }
}

/// A cartesian map `j^*f → El_T`: bases, then total spaces.
#[derive(Debug, Clone)]
pub struct OpenSquare {
    pub chi: PresheafMap,
    pub top: PresheafMap,
}

#[derive(Debug, Clone)]
pub struct SyntaxRealignment {
    pub chi: PresheafMap,
    pub top: PresheafMap,
    /// The realigned classifier of `f` in `S`.
    pub outer: Classifier,
}

fn require_class(gu: &GluedUniverse, f: &PresheafMap, x0: &OpenSquare) -> Result<PresheafMap> {
    let ctx = &gu.ctx;
    let jf = ctx.restrict_map(f);
    jf.check_fibers(gu.inner.bound())?;
    f.check_fibers(gu.outer.bound())?;
    if x0.chi.dom() != jf.cod() || x0.top.dom() != jf.dom() || !is_cartesian_map(&x0.top, &jf, &gu.inner_ty.generic, &x0.chi)? {
        return Err(Error::InvalidClassifier("x0 is not a cartesian map j^*f → El_T".into()));
    }
    Ok(jf)
}

/// Extends `x0` to a cartesian map `f → π_U` restricting to `x0` on the
/// nose, by realigning the transpose of `q ∘ x0` along `ε` in `S`.
pub fn realign_at_syntax(gu: &GluedUniverse, f: &PresheafMap, x0: &OpenSquare) -> Result<SyntaxRealignment> {
    let ctx = &gu.ctx;
    require_class(gu, f, x0)?;
    let top = ctx.top();
    let (b, q) = (f.cod(), f.dom());
    let s_ty = &gu.outer_ty;
    let eps = ctx.counit(b);
    let codes = ctx
        .cone()
        .objects()
        .map(|c| {
            if c == top {
                Vec::new()
            } else {
                (0..b.size(c)).map(|y| s_ty.codes[c][gu.q.apply(c, x0.chi.apply(c, y))].clone()).collect()
            }
        })
        .collect();
    let points = ctx
        .cone()
        .objects()
        .map(|c| {
            (0..q.size(c))
                .map(|x| (c != top).then(|| s_ty.el_pair(c, gu.classify_top.apply(c, x0.top.apply(c, x))).1))
                .collect()
        })
        .collect();
    let problem = RealignmentProblem::new(&gu.outer, eps, f.clone(), codes, points)?;
    let outer = realign_presheaf(&gu.outer, &problem)?;
    let (s_top, s_chi) = s_ty.maps(f, &outer)?;
    let chi = PresheafMap::from_fn(b.clone(), gu.base.clone(), |c, y| {
        if c != top {
            return x0.chi.apply(c, y);
        }
        let t: Vec<usize> = ctx.base().objects().map(|d| x0.chi.apply(d, b.restrict(ctx.bang(d), y))).collect();
        let t = gu.pushed_ty.lookup(&t).expect("restrictions form a global section");
        gu.top_index[&(s_chi.apply(c, y), t)]
    })
    .map_err(|e| Error::InvalidClassifier(format!("lift into U_U failed: {e}")))?;
    let lift = PresheafMap::from_fn(q.clone(), gu.total.clone(), |c, x| {
        if c != top {
            return x0.top.apply(c, x);
        }
        gu.el_index[&(chi.apply(c, f.apply(c, x)), s_top.apply(c, x))]
    })
    .map_err(|e| Error::InvalidClassifier(format!("lift into E_U failed: {e}")))?;
    if !is_cartesian_map(&lift, f, &gu.generic, &chi)? {
        return Err(Error::InvalidClassifier("realigned square is not cartesian".into()));
    }
    Ok(SyntaxRealignment { chi, top: lift, outer })
}

/// Strictness of a solution: `j^*x = x0` as raw data.
pub fn restricts_exactly(gu: &GluedUniverse, x: &SyntaxRealignment, x0: &OpenSquare) -> bool {
    gu.ctx.restrict_map(&x.chi) == x0.chi && gu.ctx.restrict_map(&x.top) == x0.top
}

/// The naive attempt: classify `f` in `S` directly and compare `j^*` of
/// the result with `q ∘ x0`. Returns the number of open elements where
/// the codes disagree.
pub fn naive_mismatches(gu: &GluedUniverse, f: &PresheafMap, x0: &OpenSquare) -> Result<usize> {
    let cl = classify_family(&gu.outer, f)?;
    let (_, chi) = gu.outer_ty.maps(f, &cl)?;
    let ctx = &gu.ctx;
    Ok(ctx
        .base()
        .objects()
        .map(|c| (0..f.cod().size(c)).filter(|&y| chi.apply(c, y) != gu.q.apply(c, x0.chi.apply(c, y))).count())
        .sum())
}

/// A family on the cone with `N`-small open part and a cartesian map from
/// its open part to `El_T` through a random relabeling of the fibers.
pub fn sample_syntax_problem<R: Rng + ?Sized>(gu: &GluedUniverse, shape: Shape, rng: &mut R) -> Result<(PresheafMap, OpenSquare)> {
    let ctx = &gu.ctx;
    let b = random_presheaf(ctx.cone(), shape, rng);
    let f = random_family(&b, gu.inner.bound(), shape, rng);
    let jf = ctx.restrict_map(&f);
    let (g, iso) = shuffle_family(&jf, rng);
    let cl = classify_family(&gu.inner, &g)?;
    let (top, chi) = gu.inner_ty.maps(&g, &cl)?;
    Ok((
        f,
        OpenSquare {
            chi,
            top: top.after(&iso)?,
        },
    ))
}

/// The canonical open square of `j^*f`.
pub fn canonical_open_square(gu: &GluedUniverse, f: &PresheafMap) -> Result<OpenSquare> {
    let jf = gu.ctx.restrict_map(f);
    let cl = classify_family(&gu.inner, &jf)?;
    let (top, chi) = gu.inner_ty.maps(&jf, &cl)?;
    Ok(OpenSquare { chi, top })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category, validate_category, RawCategory};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point() -> GluingContext {
        GluingContext::new(&Arc::new(terminal_category())).unwrap()
    }

    fn interval() -> GluingContext {
        GluingContext::new(&Arc::new(interval_category())).unwrap()
    }

    #[test]
    fn pushforward_on_the_point_copies_the_value() {
        let ctx = point();
        let x = Presheaf::constant(ctx.base(), 3);
        let pf = ctx.push(&x, Cap::DEFAULT).unwrap();
        assert_eq!(pf.presheaf.sizes(), &[3, 3]);
    }

    #[test]
    fn pushforward_on_the_interval_is_the_value_at_one() {
        let ctx = interval();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = random_presheaf(ctx.base(), Shape::default(), &mut rng);
            let pf = ctx.push(&x, Cap::DEFAULT).unwrap();
            assert_eq!(pf.presheaf.size(ctx.top()), x.size(1));
        }
    }

    #[test]
    fn counit_is_identity_on_the_open_part() {
        let ctx = interval();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_presheaf(ctx.cone(), Shape::default(), &mut rng);
        let eps = ctx.counit(&e);
        assert!(eps.is_mono());
        assert_eq!(eps.dom().size(ctx.top()), 0);
        assert_eq!(ctx.restrict_map(&eps), PresheafMap::identity(&ctx.restrict(&e)));
    }

    #[test]
    fn fracture_of_special_objects() {
        let ctx = interval();
        let x = Presheaf::yoneda(ctx.base(), 1).unwrap();
        let empty_top = ctx.extend_by_empty(&x);
        assert!(ctx.fracture(&empty_top, Cap::DEFAULT).unwrap().is_cartesian());
        let pushed = ctx.push(&x, Cap::DEFAULT).unwrap().presheaf;
        assert!(ctx.fracture(&pushed, Cap::DEFAULT).unwrap().is_cartesian());
    }

    #[test]
    fn glued_universe_on_the_point() {
        let gu = glued_universe(&point(), 2, 3, Cap::DEFAULT).unwrap();
        assert!(gu.restricts_to_inner());
        assert_eq!(gu.base.size(0), 2);
        assert!(gu.check().unwrap().is_pass());
    }

    #[test]
    fn small_outer_bound_is_reported() {
        let two = validate_category(&RawCategory::new(&["a", "b"], &[], &[])).unwrap();
        let ctx = GluingContext::new(&Arc::new(two)).unwrap();
        let err = glued_universe(&ctx, 3, 3, Cap::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::BoundOverflow { required: 5, .. }), "{err}");
        assert!(glued_universe(&ctx, 3, 5, Cap::DEFAULT).unwrap().check().unwrap().is_pass());
    }

    #[test]
    fn identity_on_the_terminal_object() {
        let ctx = point();
        let gu = glued_universe(&ctx, 2, 3, Cap::DEFAULT).unwrap();
        let one = Presheaf::terminal(ctx.cone());
        let f = PresheafMap::identity(&one);
        let x0 = canonical_open_square(&gu, &f).unwrap();
        let x = realign_at_syntax(&gu, &f, &x0).unwrap();
        assert!(restricts_exactly(&gu, &x, &x0));
    }

    #[test]
    fn naive_classifier_misses_some_relabeled_squares() {
        let ctx = interval();
        let gu = glued_universe(&ctx, 3, 3, Cap::DEFAULT).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = false;
        for _ in 0..60 {
            let (f, x0) = sample_syntax_problem(&gu, Shape::default(), &mut rng).unwrap();
            let x = realign_at_syntax(&gu, &f, &x0).unwrap();
            assert!(restricts_exactly(&gu, &x, &x0));
            seen |= naive_mismatches(&gu, &f, &x0).unwrap() > 0;
        }
        assert!(seen);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fracture_squares_are_cartesian(interval_base in any::<bool>(), seed in any::<u64>()) {
            let ctx = if interval_base { interval() } else { point() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = random_presheaf(ctx.cone(), Shape::default(), &mut rng);
            prop_assert!(ctx.fracture(&e, Cap::DEFAULT).unwrap().is_cartesian());
        }

        #[test]
        fn adjunctions_hold(interval_base in any::<bool>(), seed in any::<u64>()) {
            let ctx = if interval_base { interval() } else { point() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shape = Shape { generators: 2, relations: 1 };
            let xs: Vec<Presheaf> = (0..2).map(|_| random_presheaf(ctx.base(), shape, &mut rng)).collect();
            let es: Vec<Presheaf> = (0..2).map(|_| random_presheaf(ctx.cone(), shape, &mut rng)).collect();
            let o = ctx.check_adjunctions(&xs, &es, Cap::DEFAULT).unwrap();
            prop_assert!(o.is_pass(), "{}", o);
        }

        #[test]
        fn realignment_at_syntax_is_strict(interval_base in any::<bool>(), seed in any::<u64>()) {
            let ctx = if interval_base { interval() } else { point() };
            let gu = glued_universe(&ctx, 2, 3, Cap::DEFAULT).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (f, x0) = sample_syntax_problem(&gu, Shape::default(), &mut rng).unwrap();
            let x = realign_at_syntax(&gu, &f, &x0).unwrap();
            prop_assert!(restricts_exactly(&gu, &x, &x0));
        }
    }
}
