//! Finite presheaves `Cᵒᵖ → FinSet` and natural transformations between them.
//!
//! Every carrier is the initial segment `{0, …, n−1}`. For `u : c' → c` the
//! restriction table of `u` sends `x ∈ X(c)` to `x·u ∈ X(c')`.

mod dependent;
mod descent;
mod enumerate;
mod limits;
mod omega;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fincat::{FiniteCategory, Mor, Obj};

pub use dependent::{dependent_product, section_slots, DependentProduct};
pub use descent::{
    colimit_descent, colimit_injections_mono, colimit_of_cartesian_mono, coproduct_disjointness,
    cover_reflects_mono, pushout_adhesivity,
};
pub use enumerate::{
    count_homs, enumerate_congruences, enumerate_homs, enumerate_subobjects, generated_congruence,
    enumerate_bounded_presheaves, generated_subobject, quotient, random_hom, sub_presheaf, Congruence,
};
pub use limits::{
    coequalizer, coproduct, equalizer, finite_colimit, finite_limit, image_factorization, initial, product,
    pullback, pushout, terminal, Colimit, Diagram, Limit, Pullback, Pushout,
};
pub(crate) use omega::restrict_family;
pub use omega::{
    characteristic_map, matching_families, partial_map_classifier, sieves_on, Omega, PartialMapClassifier, Sieve,
};

#[derive(Clone)]
pub struct Presheaf {
    cat: Arc<FiniteCategory>,
    sizes: Vec<usize>,
    tables: Arc<Vec<Vec<usize>>>,
}

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes
            && self.tables == other.tables
            && (Arc::ptr_eq(&self.cat, &other.cat) || self.cat == other.cat)
    }
}

impl Eq for Presheaf {}

impl Hash for Presheaf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sizes.hash(state);
        self.tables.hash(state);
    }
}

impl fmt::Debug for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Presheaf")
            .field("sizes", &self.sizes)
            .field("tables", &self.tables)
            .finish()
    }
}

impl Presheaf {
    /// Builds and validates a presheaf from per-object sizes and one table per
    /// morphism of the category.
    pub fn new(cat: Arc<FiniteCategory>, sizes: Vec<usize>, tables: Vec<Vec<usize>>) -> Result<Self> {
        let p = Presheaf {
            cat,
            sizes,
            tables: Arc::new(tables),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_fn(cat: Arc<FiniteCategory>, sizes: Vec<usize>, f: impl Fn(Mor, usize) -> usize) -> Result<Self> {
        let tables = cat
            .morphisms()
            .map(|u| (0..sizes[cat.dst(u)]).map(|x| f(u, x)).collect())
            .collect();
        Presheaf::new(cat, sizes, tables)
    }

    pub(crate) fn from_parts(cat: Arc<FiniteCategory>, sizes: Vec<usize>, tables: Vec<Vec<usize>>) -> Self {
        let p = Presheaf {
            cat,
            sizes,
            tables: Arc::new(tables),
        };
        debug_assert_eq!(p.validate(), Ok(()));
        p
    }

    fn validate(&self) -> Result<()> {
        let cat = &self.cat;
        let bad = |msg: String| Err(Error::InvalidPresheaf(msg));
        if self.sizes.len() != cat.object_count() {
            return bad(format!("{} carriers for {} objects", self.sizes.len(), cat.object_count()));
        }
        if self.tables.len() != cat.morphism_count() {
            return bad(format!("{} tables for {} morphisms", self.tables.len(), cat.morphism_count()));
        }
        for u in cat.morphisms() {
            let t = &self.tables[u];
            let name = cat.morphism_name(u);
            if t.len() != self.sizes[cat.dst(u)] {
                return bad(format!("table of `{name}` has length {}", t.len()));
            }
            if let Some(&v) = t.iter().find(|&&v| v >= self.sizes[cat.src(u)]) {
                return bad(format!("table of `{name}` has out-of-range value {v}"));
            }
            if cat.is_identity(u) && t.iter().enumerate().any(|(i, &v)| i != v) {
                return bad(format!("identity `{name}` does not act trivially"));
            }
        }
        for g in cat.morphisms() {
            for f in cat.morphisms() {
                let Some(gf) = cat.compose(g, f) else { continue };
                for x in 0..self.sizes[cat.dst(g)] {
                    if self.tables[gf][x] != self.tables[f][self.tables[g][x]] {
                        return bad(format!(
                            "restriction along `{}` ∘ `{}` is not the composite of restrictions",
                            cat.morphism_name(g),
                            cat.morphism_name(f)
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn size(&self, c: Obj) -> usize {
        self.sizes[c]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.iter().all(|&n| n == 0)
    }

    /// `x·u` for `x ∈ X(dst u)`.
    pub fn restrict(&self, u: Mor, x: usize) -> usize {
        self.tables[u][x]
    }

    pub fn table(&self, u: Mor) -> &[usize] {
        &self.tables[u]
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    /// All elements `(c, x)`, object-major.
    pub fn elements(&self) -> impl Iterator<Item = (Obj, usize)> + '_ {
        self.cat.objects().flat_map(move |c| (0..self.sizes[c]).map(move |x| (c, x)))
    }

    pub fn same_category(&self, other: &Presheaf) -> bool {
        Arc::ptr_eq(&self.cat, &other.cat) || self.cat == other.cat
    }

    pub fn terminal(cat: &Arc<FiniteCategory>) -> Self {
        Presheaf::constant(cat, 1)
    }

    pub fn initial(cat: &Arc<FiniteCategory>) -> Self {
        Presheaf::constant(cat, 0)
    }

    /// The constant presheaf on `{0..n−1}` with identity restrictions.
    pub fn constant(cat: &Arc<FiniteCategory>, n: usize) -> Self {
        let tables = cat.morphisms().map(|_| (0..n).collect()).collect();
        Presheaf::from_parts(cat.clone(), vec![n; cat.object_count()], tables)
    }

    /// The representable `y(c) = Hom(−, c)`; the elements of `y(c)(d)` are the
    /// morphisms `d → c` in declaration order.
    pub fn yoneda(cat: &Arc<FiniteCategory>, c: Obj) -> Result<Self> {
        if c >= cat.object_count() {
            return Err(Error::UnknownObject(format!("#{c}")));
        }
        let sizes: Vec<usize> = cat.objects().map(|d| cat.hom(d, c).len()).collect();
        let position = |d: Obj, m: Mor| cat.hom(d, c).iter().position(|&h| h == m).expect("hom member");
        let tables = cat
            .morphisms()
            .map(|u| {
                cat.hom(cat.dst(u), c)
                    .iter()
                    .map(|&m| position(cat.src(u), cat.comp(m, u)))
                    .collect()
            })
            .collect();
        Ok(Presheaf::from_parts(cat.clone(), sizes, tables))
    }

    /// Element of `y(c)(d)` corresponding to a morphism `d → c`.
    pub fn yoneda_element(cat: &FiniteCategory, c: Obj, m: Mor) -> usize {
        cat.hom(cat.src(m), c).iter().position(|&h| h == m).expect("morphism into c")
    }

    /// Stable serialization used for canonical forms and hashing.
    pub fn encode(&self) -> Vec<usize> {
        let mut out = self.sizes.clone();
        for t in self.tables.iter() {
            out.extend_from_slice(t);
        }
        out
    }

    /// Relabels the carriers: element `x` of `X(c)` becomes `perm[c][x]`.
    pub fn relabel(&self, perm: &[Vec<usize>]) -> Presheaf {
        let inv: Vec<Vec<usize>> = perm.iter().map(|p| invert(p)).collect();
        let tables = self
            .cat
            .morphisms()
            .map(|u| {
                let (s, d) = (self.cat.src(u), self.cat.dst(u));
                (0..self.sizes[d]).map(|y| perm[s][self.tables[u][inv[d][y]]]).collect()
            })
            .collect();
        Presheaf::from_parts(self.cat.clone(), self.sizes.clone(), tables)
    }
}

pub(crate) fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// A natural transformation between presheaves on the same category.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PresheafMap {
    dom: Presheaf,
    cod: Presheaf,
    comps: Vec<Vec<usize>>,
}

impl fmt::Debug for PresheafMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PresheafMap")
            .field("dom", &self.dom.sizes)
            .field("cod", &self.cod.sizes)
            .field("components", &self.comps)
            .finish()
    }
}

impl PresheafMap {
    pub fn new(dom: Presheaf, cod: Presheaf, comps: Vec<Vec<usize>>) -> Result<Self> {
        if !dom.same_category(&cod) {
            return Err(Error::CategoryMismatch);
        }
        let cat = dom.cat.clone();
        if comps.len() != cat.object_count() {
            return Err(Error::IllTypedDiagram("wrong number of components".into()));
        }
        for c in cat.objects() {
            if comps[c].len() != dom.size(c) || comps[c].iter().any(|&v| v >= cod.size(c)) {
                return Err(Error::IllTypedDiagram(format!(
                    "component at `{}` is not a function between the carriers",
                    cat.object_name(c)
                )));
            }
        }
        for u in cat.morphisms() {
            let (s, d) = (cat.src(u), cat.dst(u));
            for x in 0..dom.size(d) {
                if comps[s][dom.restrict(u, x)] != cod.restrict(u, comps[d][x]) {
                    return Err(Error::NotNatural {
                        morphism: cat.morphism_name(u).to_string(),
                        element: x,
                    });
                }
            }
        }
        Ok(PresheafMap { dom, cod, comps })
    }

    pub fn from_fn(dom: Presheaf, cod: Presheaf, f: impl Fn(Obj, usize) -> usize) -> Result<Self> {
        let comps = dom.cat.objects().map(|c| (0..dom.size(c)).map(|x| f(c, x)).collect()).collect();
        PresheafMap::new(dom, cod, comps)
    }

    pub(crate) fn from_parts(dom: Presheaf, cod: Presheaf, comps: Vec<Vec<usize>>) -> Self {
        if cfg!(debug_assertions) {
            PresheafMap::new(dom, cod, comps).expect("well-formed natural transformation")
        } else {
            PresheafMap { dom, cod, comps }
        }
    }

    pub fn identity(x: &Presheaf) -> Self {
        let comps = x.cat.objects().map(|c| (0..x.size(c)).collect()).collect();
        PresheafMap {
            dom: x.clone(),
            cod: x.clone(),
            comps,
        }
    }

    pub fn to_terminal(x: &Presheaf) -> Self {
        let comps = x.cat.objects().map(|c| vec![0; x.size(c)]).collect();
        PresheafMap {
            dom: x.clone(),
            cod: Presheaf::terminal(&x.cat),
            comps,
        }
    }

    pub fn from_initial(x: &Presheaf) -> Self {
        PresheafMap {
            dom: Presheaf::initial(&x.cat),
            cod: x.clone(),
            comps: vec![Vec::new(); x.cat.object_count()],
        }
    }

    pub fn dom(&self) -> &Presheaf {
        &self.dom
    }

    pub fn cod(&self) -> &Presheaf {
        &self.cod
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.dom.cat
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.comps
    }

    pub fn component(&self, c: Obj) -> &[usize] {
        &self.comps[c]
    }

    pub fn apply(&self, c: Obj, x: usize) -> usize {
        self.comps[c][x]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMap) -> Result<PresheafMap> {
        if first.cod != self.dom {
            return Err(Error::IllTypedDiagram("composite of non-composable maps".into()));
        }
        let comps = first
            .comps
            .iter()
            .enumerate()
            .map(|(c, comp)| comp.iter().map(|&x| self.comps[c][x]).collect())
            .collect();
        Ok(PresheafMap {
            dom: first.dom.clone(),
            cod: self.cod.clone(),
            comps,
        })
    }

    pub fn is_mono(&self) -> bool {
        self.first_non_injective().is_none()
    }

    /// An object and two distinct elements with the same image, if any.
    pub fn first_non_injective(&self) -> Option<(Obj, usize, usize)> {
        for (c, comp) in self.comps.iter().enumerate() {
            let mut seen = vec![usize::MAX; self.cod.size(c)];
            for (x, &y) in comp.iter().enumerate() {
                if seen[y] != usize::MAX {
                    return Some((c, seen[y], x));
                }
                seen[y] = x;
            }
        }
        None
    }

    pub fn is_epi(&self) -> bool {
        self.comps.iter().enumerate().all(|(c, comp)| {
            let mut hit = vec![false; self.cod.size(c)];
            comp.iter().for_each(|&y| hit[y] = true);
            hit.into_iter().all(|h| h)
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono() && self.is_epi()
    }

    pub fn inverse(&self) -> Option<PresheafMap> {
        if !self.is_iso() {
            return None;
        }
        let comps = self.comps.iter().map(|comp| invert(comp)).collect();
        Some(PresheafMap {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            comps,
        })
    }

    /// Elements of `dom(c)` over `y ∈ cod(c)`, in carrier order.
    pub fn fiber(&self, c: Obj, y: usize) -> Vec<usize> {
        self.comps[c]
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == y)
            .map(|(x, _)| x)
            .collect()
    }

    /// `fibers(c)[y]` lists the fiber over `y`; `positions(c)[x]` is the
    /// position of `x` inside its fiber.
    pub fn fiber_index(&self) -> FiberIndex {
        let cat = self.category();
        let mut fibers = Vec::with_capacity(cat.object_count());
        let mut positions = Vec::with_capacity(cat.object_count());
        for c in cat.objects() {
            let mut fib = vec![Vec::new(); self.cod.size(c)];
            let mut pos = vec![0; self.dom.size(c)];
            for (x, &y) in self.comps[c].iter().enumerate() {
                pos[x] = fib[y].len();
                fib[y].push(x);
            }
            fibers.push(fib);
            positions.push(pos);
        }
        FiberIndex { fibers, positions }
    }

    pub fn max_fiber(&self) -> usize {
        let idx = self.fiber_index();
        idx.fibers.iter().flatten().map(Vec::len).max().unwrap_or(0)
    }

    /// First element of the codomain whose fiber has at least `bound` elements.
    pub fn oversized_fiber(&self, bound: usize) -> Option<(Obj, usize, usize)> {
        let idx = self.fiber_index();
        for (c, fib) in idx.fibers.iter().enumerate() {
            for (y, f) in fib.iter().enumerate() {
                if f.len() >= bound {
                    return Some((c, y, f.len()));
                }
            }
        }
        None
    }

    /// Fails with [`Error::FiberTooLarge`] unless every fiber has fewer than
    /// `bound` elements.
    pub fn check_fibers(&self, bound: usize) -> Result<()> {
        match self.oversized_fiber(bound) {
            None => Ok(()),
            Some((c, y, size)) => Err(Error::FiberTooLarge {
                element: format!("{} at `{}`", y, self.category().object_name(c)),
                size,
                bound,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberIndex {
    pub fibers: Vec<Vec<Vec<usize>>>,
    pub positions: Vec<Vec<usize>>,
}

/// A commuting square
///
/// ```text
///   P --top--> X
///   |          |
///  left      right
///   v          v
///   Y -bottom-> Z
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Square {
    pub top: PresheafMap,
    pub left: PresheafMap,
    pub right: PresheafMap,
    pub bottom: PresheafMap,
}

/// Outcome of comparing a square's apex with the pullback of its cospan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cartesianness {
    /// The comparison `P(c) → X(c) ×_{Z(c)} Y(c)` as pairs, at every object.
    Cartesian { comparison: Vec<Vec<(usize, usize)>> },
    /// Two apex elements hit the same pair.
    NotInjective { object: String, elements: (usize, usize) },
    /// A compatible pair `(x, y)` with no apex element over it.
    NotSurjective { object: String, pair: (usize, usize) },
}

impl Cartesianness {
    pub fn holds(&self) -> bool {
        matches!(self, Cartesianness::Cartesian { .. })
    }
}

impl Square {
    pub fn new(top: PresheafMap, left: PresheafMap, right: PresheafMap, bottom: PresheafMap) -> Result<Self> {
        if top.dom != left.dom || top.cod != right.dom || left.cod != bottom.dom || right.cod != bottom.cod {
            return Err(Error::IllTypedDiagram("square maps do not line up".into()));
        }
        let sq = Square {
            top,
            left,
            right,
            bottom,
        };
        if let Some(c) = sq.first_non_commuting() {
            return Err(Error::NotCommuting {
                object: sq.top.category().object_name(c).to_string(),
            });
        }
        Ok(sq)
    }

    fn first_non_commuting(&self) -> Option<Obj> {
        let cat = self.top.category();
        cat.objects().find(|&c| {
            (0..self.top.dom.size(c))
                .any(|p| self.right.apply(c, self.top.apply(c, p)) != self.bottom.apply(c, self.left.apply(c, p)))
        })
    }

    /// A square whose vertical maps are `f' : P → Y` and `f : X → Z` joined by
    /// `top : P → X` over `bottom : Y → Z`, i.e. a map of families `f' → f`.
    pub fn of_families(top: PresheafMap, left: PresheafMap, right: PresheafMap, bottom: PresheafMap) -> Result<Self> {
        Square::new(top, left, right, bottom)
    }
}

pub fn is_cartesian_square(sq: &Square) -> Result<Cartesianness> {
    let sq = Square::new(sq.top.clone(), sq.left.clone(), sq.right.clone(), sq.bottom.clone())?;
    let cat = sq.top.category().clone();
    let mut comparison = Vec::with_capacity(cat.object_count());
    for c in cat.objects() {
        let name = || cat.object_name(c).to_string();
        let mut hit = std::collections::HashMap::new();
        let mut row = Vec::with_capacity(sq.top.dom.size(c));
        for p in 0..sq.top.dom.size(c) {
            let pair = (sq.top.apply(c, p), sq.left.apply(c, p));
            if let Some(&q) = hit.get(&pair) {
                return Ok(Cartesianness::NotInjective {
                    object: name(),
                    elements: (q, p),
                });
            }
            hit.insert(pair, p);
            row.push(pair);
        }
        for x in 0..sq.right.dom.size(c) {
            for y in 0..sq.bottom.dom.size(c) {
                if sq.right.apply(c, x) == sq.bottom.apply(c, y) && !hit.contains_key(&(x, y)) {
                    return Ok(Cartesianness::NotSurjective {
                        object: name(),
                        pair: (x, y),
                    });
                }
            }
        }
        comparison.push(row);
    }
    Ok(Cartesianness::Cartesian { comparison })
}

/// A map of families `f' → f` is cartesian when each fiber of `f'` maps
/// bijectively onto the corresponding fiber of `f`.
pub fn is_cartesian_map(top: &PresheafMap, left: &PresheafMap, right: &PresheafMap, bottom: &PresheafMap) -> Result<bool> {
    let sq = Square::new(top.clone(), left.clone(), right.clone(), bottom.clone())?;
    Ok(is_cartesian_square(&sq)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category};

    fn interval() -> Arc<FiniteCategory> {
        Arc::new(interval_category())
    }

    #[test]
    fn yoneda_on_small_categories() {
        let t = Arc::new(terminal_category());
        assert_eq!(Presheaf::yoneda(&t, 0).unwrap(), Presheaf::terminal(&t));

        let i = interval();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        assert_eq!(y1.sizes(), &[1, 1]);
        let y0 = Presheaf::yoneda(&i, 0).unwrap();
        assert_eq!(y0.sizes(), &[1, 0]);
        // oracle: enumerate morphisms into each object
        for c in i.objects() {
            let y = Presheaf::yoneda(&i, c).unwrap();
            for d in i.objects() {
                let count = i.morphisms().filter(|&m| i.src(m) == d && i.dst(m) == c).count();
                assert_eq!(y.size(d), count);
            }
        }
        assert!(Presheaf::yoneda(&i, 2).is_err());
    }

    #[test]
    fn presheaf_validation_rejects_broken_tables() {
        let i = interval();
        assert!(Presheaf::new(i.clone(), vec![1, 2], vec![vec![0], vec![0, 1], vec![0, 0]]).is_ok());
        assert!(matches!(
            Presheaf::new(i.clone(), vec![1, 2], vec![vec![0], vec![1, 0], vec![0, 0]]),
            Err(Error::InvalidPresheaf(_))
        ));
        assert!(Presheaf::new(i, vec![1, 2], vec![vec![0], vec![0, 1], vec![0, 3]]).is_err());
    }

    #[test]
    fn naturality_is_checked() {
        let i = interval();
        let x = Presheaf::new(i.clone(), vec![2, 2], vec![vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap();
        assert!(PresheafMap::new(x.clone(), x.clone(), vec![vec![1, 0], vec![1, 0]]).is_ok());
        assert!(matches!(
            PresheafMap::new(x.clone(), x, vec![vec![1, 0], vec![0, 1]]),
            Err(Error::NotNatural { .. })
        ));
    }

    #[test]
    fn identity_square_is_cartesian() {
        let i = interval();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        let f = PresheafMap::to_terminal(&y1);
        let id = |p: &Presheaf| PresheafMap::identity(p);
        let sq = Square::new(id(&y1), f.clone(), f.clone(), id(f.cod())).unwrap();
        assert!(is_cartesian_square(&sq).unwrap().holds());
    }

    #[test]
    fn collapsing_square_is_not_cartesian() {
        let t = Arc::new(terminal_category());
        let two = Presheaf::constant(&t, 2);
        let one = Presheaf::terminal(&t);
        let collapse = PresheafMap::to_terminal(&two);
        let bang = PresheafMap::to_terminal(&one);
        // 2 → 1 over 1 = 1 collapses the two fiber elements
        let sq = Square::new(collapse, PresheafMap::to_terminal(&two), bang, PresheafMap::identity(&one)).unwrap();
        match is_cartesian_square(&sq).unwrap() {
            Cartesianness::NotInjective { elements, .. } => assert_eq!(elements, (0, 1)),
            other => panic!("expected a non-injective comparison, got {other:?}"),
        }
    }

    #[test]
    fn non_commuting_square_is_an_error() {
        let t = Arc::new(terminal_category());
        let two = Presheaf::constant(&t, 2);
        let swap = PresheafMap::new(two.clone(), two.clone(), vec![vec![1, 0]]).unwrap();
        let id = PresheafMap::identity(&two);
        assert!(matches!(
            Square::new(id.clone(), id.clone(), id, swap),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn relabel_is_an_isomorphic_copy() {
        let i = interval();
        let x = Presheaf::new(i.clone(), vec![2, 3], vec![vec![0, 1], vec![0, 1, 2], vec![0, 0, 1]]).unwrap();
        let perm = vec![vec![1, 0], vec![2, 0, 1]];
        let y = x.relabel(&perm);
        assert!(PresheafMap::new(x, y, perm).unwrap().is_iso());
    }
}
