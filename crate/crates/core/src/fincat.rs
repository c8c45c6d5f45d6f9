//! Finite categories, functors between them, slices, and the cone construction
//! that freely adjoins a terminal object.
//!
//! Objects and morphisms are dense indices. Every category keeps the identity
//! of object `c` at morphism index `c`, so identities always come first in the
//! morphism list; all other enumeration orders follow declaration order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Obj = usize;
pub type Mor = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: Obj,
    pub dst: Obj,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    compose: Vec<Option<Mor>>,
    into: Vec<Vec<Mor>>,
    homs: Vec<Vec<Mor>>,
    object_index: HashMap<String, Obj>,
    arrow_index: HashMap<String, Mor>,
}

/// A category as it appears in an input file: identities are implicit and
/// named `id_<object>`; composites involving an identity may be omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCategory {
    pub objects: Vec<String>,
    pub morphisms: Vec<(String, String, String)>,
    pub compose: Vec<(String, String, String)>,
}

impl RawCategory {
    pub fn new(objects: &[&str], morphisms: &[(&str, &str, &str)], compose: &[(&str, &str, &str)]) -> Self {
        let own = |t: &(&str, &str, &str)| (t.0.to_string(), t.1.to_string(), t.2.to_string());
        RawCategory {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            morphisms: morphisms.iter().map(own).collect(),
            compose: compose.iter().map(own).collect(),
        }
    }
}

pub fn identity_name(object: &str) -> String {
    format!("id_{object}")
}

/// Validates a raw description and checks the unit and associativity laws on
/// every composable pair and triple.
pub fn validate_category(raw: &RawCategory) -> Result<FiniteCategory> {
    let mut object_index = HashMap::new();
    for (i, name) in raw.objects.iter().enumerate() {
        if object_index.insert(name.clone(), i).is_some() {
            return Err(Error::DuplicateId(name.clone()));
        }
    }
    let lookup_obj = |name: &str| {
        object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    };

    let mut arrows: Vec<Arrow> = raw
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| Arrow {
            name: identity_name(o),
            src: i,
            dst: i,
        })
        .collect();
    let mut seen: HashMap<String, Mor> = arrows
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name.clone(), i))
        .collect();
    for name in raw.objects.iter() {
        if seen.contains_key(name) && !object_index.contains_key(name) {
            return Err(Error::DuplicateId(name.clone()));
        }
    }
    for (name, src, dst) in &raw.morphisms {
        if seen.contains_key(name) || object_index.contains_key(name) {
            return Err(Error::DuplicateId(name.clone()));
        }
        let arrow = Arrow {
            name: name.clone(),
            src: lookup_obj(src)?,
            dst: lookup_obj(dst)?,
        };
        seen.insert(name.clone(), arrows.len());
        arrows.push(arrow);
    }
    let lookup_mor = |name: &str| {
        seen.get(name)
            .copied()
            .ok_or_else(|| Error::UnknownMorphism(name.to_string()))
    };

    let n = arrows.len();
    let mut table: Vec<Option<Mor>> = vec![None; n * n];
    for (g, f, gf) in &raw.compose {
        let (gi, fi, gfi) = (lookup_mor(g)?, lookup_mor(f)?, lookup_mor(gf)?);
        if arrows[fi].dst != arrows[gi].src {
            return Err(Error::NotComposable {
                g: g.clone(),
                f: f.clone(),
            });
        }
        match table[gi * n + fi] {
            Some(prev) if prev != gfi => {
                return Err(Error::ConflictingComposite {
                    g: g.clone(),
                    f: f.clone(),
                })
            }
            _ => table[gi * n + fi] = Some(gfi),
        }
    }
    let objects = raw.objects.len();
    for g in 0..n {
        for f in 0..n {
            if arrows[f].dst != arrows[g].src || table[g * n + f].is_some() {
                continue;
            }
            if g < objects {
                table[g * n + f] = Some(f);
            } else if f < objects {
                table[g * n + f] = Some(g);
            } else {
                return Err(Error::MissingComposite {
                    g: arrows[g].name.clone(),
                    f: arrows[f].name.clone(),
                });
            }
        }
    }
    FiniteCategory::from_parts(raw.objects.clone(), arrows, table)
}

impl FiniteCategory {
    /// Builds a category from a full composition table (`table[g * n + f]`),
    /// checking typing, unit laws and associativity exhaustively. The first
    /// `objects.len()` arrows must be the identities in object order.
    pub fn from_parts(objects: Vec<String>, arrows: Vec<Arrow>, table: Vec<Option<Mor>>) -> Result<Self> {
        let n = arrows.len();
        if table.len() != n * n {
            return Err(Error::IllTypedDiagram("composition table has the wrong size".into()));
        }
        if arrows.len() < objects.len() {
            return Err(Error::IllTypedDiagram("missing identity arrows".into()));
        }
        for (c, a) in arrows.iter().take(objects.len()).enumerate() {
            if a.src != c || a.dst != c {
                return Err(Error::IdentityLaw { morphism: a.name.clone() });
            }
        }
        let mut object_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            if object_index.insert(o.clone(), i).is_some() {
                return Err(Error::DuplicateId(o.clone()));
            }
        }
        let mut arrow_index = HashMap::new();
        for (i, a) in arrows.iter().enumerate() {
            if a.src >= objects.len() || a.dst >= objects.len() {
                return Err(Error::UnknownObject(format!("#{}", a.src.max(a.dst))));
            }
            if arrow_index.insert(a.name.clone(), i).is_some() {
                return Err(Error::DuplicateId(a.name.clone()));
            }
        }
        let name = |m: Mor| arrows[m].name.clone();
        for g in 0..n {
            for f in 0..n {
                let composable = arrows[f].dst == arrows[g].src;
                match (composable, table[g * n + f]) {
                    (true, None) => return Err(Error::MissingComposite { g: name(g), f: name(f) }),
                    (false, Some(_)) => return Err(Error::NotComposable { g: name(g), f: name(f) }),
                    (true, Some(gf)) => {
                        if gf >= n || arrows[gf].src != arrows[f].src || arrows[gf].dst != arrows[g].dst {
                            return Err(Error::IllTypedComposite {
                                g: name(g),
                                f: name(f),
                                gf: if gf < n { name(gf) } else { format!("#{gf}") },
                            });
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for f in 0..n {
            let (s, d) = (arrows[f].src, arrows[f].dst);
            if table[f * n + s] != Some(f) || table[d * n + f] != Some(f) {
                return Err(Error::IdentityLaw { morphism: name(f) });
            }
        }
        for h in 0..n {
            for g in 0..n {
                let Some(hg) = table[h * n + g] else { continue };
                for f in 0..n {
                    let Some(gf) = table[g * n + f] else { continue };
                    let left = table[hg * n + f].expect("typed");
                    let right = table[h * n + gf].expect("typed");
                    if left != right {
                        return Err(Error::Associativity {
                            h: name(h),
                            g: name(g),
                            f: name(f),
                            left: name(left),
                            right: name(right),
                        });
                    }
                }
            }
        }
        let nobj = objects.len();
        let mut into = vec![Vec::new(); nobj];
        let mut homs = vec![Vec::new(); nobj * nobj];
        for (m, a) in arrows.iter().enumerate() {
            into[a.dst].push(m);
            homs[a.src * nobj + a.dst].push(m);
        }
        Ok(FiniteCategory {
            objects,
            arrows,
            compose: table,
            into,
            homs,
            object_index,
            arrow_index,
        })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> std::ops::Range<Obj> {
        0..self.objects.len()
    }

    pub fn morphisms(&self) -> std::ops::Range<Mor> {
        0..self.arrows.len()
    }

    pub fn object_name(&self, c: Obj) -> &str {
        &self.objects[c]
    }

    pub fn morphism_name(&self, m: Mor) -> &str {
        &self.arrows[m].name
    }

    pub fn object(&self, name: &str) -> Result<Obj> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn morphism(&self, name: &str) -> Result<Mor> {
        self.arrow_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownMorphism(name.to_string()))
    }

    pub fn arrow(&self, m: Mor) -> &Arrow {
        &self.arrows[m]
    }

    pub fn src(&self, m: Mor) -> Obj {
        self.arrows[m].src
    }

    pub fn dst(&self, m: Mor) -> Obj {
        self.arrows[m].dst
    }

    pub fn identity(&self, c: Obj) -> Mor {
        c
    }

    pub fn is_identity(&self, m: Mor) -> bool {
        m < self.objects.len()
    }

    /// `g ∘ f`, defined when `dst(f) = src(g)`.
    pub fn compose(&self, g: Mor, f: Mor) -> Option<Mor> {
        self.compose[g * self.arrows.len() + f]
    }

    /// Like [`compose`](Self::compose) but panics on a non-composable pair.
    pub fn comp(&self, g: Mor, f: Mor) -> Mor {
        self.compose(g, f).unwrap_or_else(|| {
            panic!(
                "`{}` ∘ `{}` is not composable",
                self.morphism_name(g),
                self.morphism_name(f)
            )
        })
    }

    /// Morphisms with codomain `c`, in declaration order (the identity first).
    pub fn arrows_into(&self, c: Obj) -> &[Mor] {
        &self.into[c]
    }

    pub fn hom(&self, a: Obj, b: Obj) -> &[Mor] {
        &self.homs[a * self.objects.len() + b]
    }

    pub fn to_raw(&self) -> RawCategory {
        let n = self.object_count();
        let mut compose = Vec::new();
        for g in n..self.morphism_count() {
            for f in n..self.morphism_count() {
                if let Some(gf) = self.compose(g, f) {
                    compose.push((
                        self.morphism_name(g).to_string(),
                        self.morphism_name(f).to_string(),
                        self.morphism_name(gf).to_string(),
                    ));
                }
            }
        }
        RawCategory {
            objects: self.objects.clone(),
            morphisms: self.arrows[n..]
                .iter()
                .map(|a| (a.name.clone(), self.objects[a.src].clone(), self.objects[a.dst].clone()))
                .collect(),
            compose,
        }
    }
}

/// The terminal category `1`.
pub fn terminal_category() -> FiniteCategory {
    validate_category(&RawCategory::new(&["*"], &[], &[])).expect("terminal category")
}

/// The interval `2 = {0 → 1}` with the single non-identity arrow `u`.
pub fn interval_category() -> FiniteCategory {
    validate_category(&RawCategory::new(&["0", "1"], &[("u", "0", "1")], &[])).expect("interval category")
}

pub fn empty_category() -> FiniteCategory {
    validate_category(&RawCategory::default()).expect("empty category")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorData {
    pub source: Arc<FiniteCategory>,
    pub target: Arc<FiniteCategory>,
    pub objects: Vec<Obj>,
    pub morphisms: Vec<Mor>,
}

impl FunctorData {
    pub fn new(
        source: Arc<FiniteCategory>,
        target: Arc<FiniteCategory>,
        objects: Vec<Obj>,
        morphisms: Vec<Mor>,
    ) -> Result<Self> {
        if objects.len() != source.object_count() || morphisms.len() != source.morphism_count() {
            return Err(Error::FunctorLaw("maps have the wrong length".into()));
        }
        for m in source.morphisms() {
            let fm = morphisms[m];
            if fm >= target.morphism_count() {
                return Err(Error::FunctorLaw(format!("`{}` maps out of range", source.morphism_name(m))));
            }
            if target.src(fm) != objects[source.src(m)] || target.dst(fm) != objects[source.dst(m)] {
                return Err(Error::FunctorLaw(format!(
                    "`{}` is sent to an arrow with the wrong endpoints",
                    source.morphism_name(m)
                )));
            }
        }
        for c in source.objects() {
            if morphisms[source.identity(c)] != target.identity(objects[c]) {
                return Err(Error::FunctorLaw(format!(
                    "identity of `{}` is not preserved",
                    source.object_name(c)
                )));
            }
        }
        for g in source.morphisms() {
            for f in source.morphisms() {
                if let Some(gf) = source.compose(g, f) {
                    if target.compose(morphisms[g], morphisms[f]) != Some(morphisms[gf]) {
                        return Err(Error::FunctorLaw(format!(
                            "composite `{}` ∘ `{}` is not preserved",
                            source.morphism_name(g),
                            source.morphism_name(f)
                        )));
                    }
                }
            }
        }
        Ok(FunctorData {
            source,
            target,
            objects,
            morphisms,
        })
    }
}

/// The slice category `C/c` together with its bookkeeping back into `C`.
///
/// Slice objects are the morphisms into `c` (in the order of
/// [`FiniteCategory::arrows_into`]); a slice morphism from `z ∘ w` to `z` is the pair
/// `(w, z)`. Identities come first, then the remaining pairs ordered by `w`
/// and then by `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub base: Arc<FiniteCategory>,
    pub over: Obj,
    pub category: Arc<FiniteCategory>,
    pub projection: FunctorData,
    objects: Vec<Mor>,
    object_index: HashMap<Mor, Obj>,
    pairs: Vec<(Mor, Obj)>,
    pair_index: HashMap<(Mor, Obj), Mor>,
}

impl Slice {
    /// Base morphism represented by slice object `z`.
    pub fn object_morphism(&self, z: Obj) -> Mor {
        self.objects[z]
    }

    /// Slice object for a base morphism into the base object.
    pub fn object_of(&self, m: Mor) -> Obj {
        self.object_index[&m]
    }

    pub fn identity_object(&self) -> Obj {
        self.object_of(self.base.identity(self.over))
    }

    /// The `(w, z)` pair of a slice morphism.
    pub fn morphism_pair(&self, m: Mor) -> (Mor, Obj) {
        self.pairs[m]
    }

    /// The slice morphism `w : z ∘ w → z`.
    pub fn morphism_of(&self, w: Mor, z: Obj) -> Mor {
        self.pair_index[&(w, z)]
    }
}

pub fn slice_category(base: &Arc<FiniteCategory>, over: Obj) -> Result<Slice> {
    if over >= base.object_count() {
        return Err(Error::UnknownObject(format!("#{over}")));
    }
    let objects: Vec<Mor> = base.arrows_into(over).to_vec();
    let object_index: HashMap<Mor, Obj> = objects.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut pairs: Vec<(Mor, Obj)> = objects.iter().enumerate().map(|(z, &m)| (base.identity(base.src(m)), z)).collect();
    for w in base.morphisms().filter(|&w| !base.is_identity(w)) {
        for (z, &zm) in objects.iter().enumerate() {
            if base.src(zm) == base.dst(w) {
                pairs.push((w, z));
            }
        }
    }
    let pair_index: HashMap<(Mor, Obj), Mor> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let source_of = |(w, z): (Mor, Obj)| object_index[&base.comp(objects[z], w)];
    let arrows: Vec<Arrow> = pairs
        .iter()
        .map(|&(w, z)| Arrow {
            name: format!("{}/{}", base.morphism_name(w), base.morphism_name(objects[z])),
            src: source_of((w, z)),
            dst: z,
        })
        .collect();
    let n = pairs.len();
    let mut table = vec![None; n * n];
    for (g, &(wg, zg)) in pairs.iter().enumerate() {
        for (f, &(wf, zf)) in pairs.iter().enumerate() {
            if arrows[f].dst == arrows[g].src {
                debug_assert_eq!(zf, source_of((wg, zg)));
                table[g * n + f] = Some(pair_index[&(base.comp(wg, wf), zg)]);
            }
        }
    }
    let names: Vec<String> = objects.iter().map(|&m| base.morphism_name(m).to_string()).collect();
    let category = Arc::new(FiniteCategory::from_parts(names, arrows, table)?);
    let projection = FunctorData::new(
        category.clone(),
        base.clone(),
        objects.iter().map(|&m| base.src(m)).collect(),
        pairs.iter().map(|&(w, _)| w).collect(),
    )?;
    Ok(Slice {
        base: base.clone(),
        over,
        category,
        projection,
        objects,
        object_index,
        pairs,
        pair_index,
    })
}

fn fresh_name(taken: &dyn Fn(&str) -> bool, wanted: &str) -> String {
    let mut name = wanted.to_string();
    while taken(&name) {
        name.push('\'');
    }
    name
}

/// `C` with a freely adjoined terminal object `⊤` (placed last), together with
/// the full embedding `C → C⊤`.
///
/// Morphism layout: identities of `C`, the identity of `⊤`, the non-identity
/// morphisms of `C` in order, then the unique `!_x : x → ⊤` for each object.
pub fn adjoin_terminal(base: &Arc<FiniteCategory>) -> (Arc<FiniteCategory>, FunctorData) {
    let n = base.object_count();
    let m = base.morphism_count();
    let taken_obj = |s: &str| base.object(s).is_ok();
    let top_name = fresh_name(&taken_obj, "⊤");
    let mut objects: Vec<String> = (0..n).map(|c| base.object_name(c).to_string()).collect();
    objects.push(top_name.clone());
    let embed_mor = |f: Mor| if f < n { f } else { f + 1 };
    let mut arrows: Vec<Arrow> = (0..n)
        .map(|c| base.arrow(c).clone())
        .chain(std::iter::once(Arrow {
            name: fresh_name(&|s: &str| base.morphism(s).is_ok(), &identity_name(&top_name)),
            src: n,
            dst: n,
        }))
        .collect();
    arrows.extend((n..m).map(|f| base.arrow(f).clone()));
    let bang = |x: Obj| m + 1 + x;
    let mut used: Vec<String> = arrows.iter().map(|a| a.name.clone()).collect();
    for x in 0..n {
        let name = fresh_name(&|s: &str| used.iter().any(|u| u == s), &format!("!_{}", base.object_name(x)));
        used.push(name.clone());
        arrows.push(Arrow { name, src: x, dst: n });
    }
    let total = arrows.len();
    let mut table = vec![None; total * total];
    for g in 0..total {
        for f in 0..total {
            if arrows[f].dst != arrows[g].src {
                continue;
            }
            let gf = if g == n {
                f
            } else if f == arrows[f].src && f <= n {
                g
            } else if arrows[g].dst == n {
                // g is !_y (f lands in y ∈ C) or id_⊤ handled above
                bang(arrows[f].src)
            } else {
                let unembed = |h: Mor| if h < n { h } else { h - 1 };
                embed_mor(base.comp(unembed(g), unembed(f)))
            };
            table[g * total + f] = Some(gf);
        }
    }
    let cone = Arc::new(FiniteCategory::from_parts(objects, arrows, table).expect("cone category is valid"));
    let embedding = FunctorData::new(
        base.clone(),
        cone.clone(),
        (0..n).collect(),
        (0..m).map(embed_mor).collect(),
    )
    .expect("embedding is a functor");
    (cone, embedding)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(c: FiniteCategory) -> Arc<FiniteCategory> {
        Arc::new(c)
    }

    #[test]
    fn terminal_and_interval_are_valid() {
        let t = terminal_category();
        assert_eq!((t.object_count(), t.morphism_count()), (1, 1));
        let i = interval_category();
        assert_eq!((i.object_count(), i.morphism_count()), (2, 3));
        let u = i.morphism("u").unwrap();
        assert_eq!(i.compose(i.identity(1), u), Some(u));
        assert_eq!(i.compose(u, i.identity(0)), Some(u));
        assert_eq!(i.compose(u, u), None);
    }

    #[test]
    fn non_associative_table_names_the_triple() {
        // one-object monoid table on {id, x, y} that is not associative
        let raw = RawCategory::new(
            &["a", "b"],
            &[("x", "a", "a"), ("y", "a", "a")],
            &[("x", "x", "y"), ("x", "y", "x"), ("y", "x", "y"), ("y", "y", "y")],
        );
        match validate_category(&raw) {
            Err(Error::Associativity { h, g, f, .. }) => {
                let triple = (h.as_str(), g.as_str(), f.as_str());
                // (h∘g)∘f ≠ h∘(g∘f) for the reported triple
                assert!(["x", "y"].contains(&triple.0));
                assert!(["x", "y"].contains(&triple.1));
                assert!(["x", "y"].contains(&triple.2));
            }
            other => panic!("expected an associativity error, got {other:?}"),
        }
    }

    #[test]
    fn missing_and_bad_composites_are_reported() {
        let raw = RawCategory::new(&["a", "b", "c"], &[("f", "a", "b"), ("g", "b", "c")], &[]);
        assert!(matches!(validate_category(&raw), Err(Error::MissingComposite { .. })));
        let raw = RawCategory::new(&["a", "b"], &[("f", "a", "b")], &[("f", "f", "f")]);
        assert!(matches!(validate_category(&raw), Err(Error::NotComposable { .. })));
        let raw = RawCategory::new(&["a", "a"], &[], &[]);
        assert!(matches!(validate_category(&raw), Err(Error::DuplicateId(_))));
        let raw = RawCategory::new(&["a"], &[("f", "a", "z")], &[]);
        assert!(matches!(validate_category(&raw), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn empty_category_is_legal() {
        let e = arc(empty_category());
        assert_eq!(e.object_count(), 0);
        let (cone, _) = adjoin_terminal(&e);
        assert_eq!((cone.object_count(), cone.morphism_count()), (1, 1));
    }

    #[test]
    fn slices_of_small_categories() {
        let t = arc(terminal_category());
        let s = slice_category(&t, 0).unwrap();
        assert_eq!((s.category.object_count(), s.category.morphism_count()), (1, 1));

        let i = arc(interval_category());
        let s1 = slice_category(&i, 1).unwrap();
        assert_eq!((s1.category.object_count(), s1.category.morphism_count()), (2, 3));
        // objects id1 and u, with one arrow u → id1
        let u = i.morphism("u").unwrap();
        let zu = s1.object_of(u);
        let zid = s1.identity_object();
        assert_eq!(s1.category.hom(zu, zid).len(), 1);
        assert_eq!(s1.projection.objects, vec![1, 0]);

        let s0 = slice_category(&i, 0).unwrap();
        assert_eq!((s0.category.object_count(), s0.category.morphism_count()), (1, 1));
        assert!(slice_category(&i, 7).is_err());
    }

    #[test]
    fn adjoining_terminal_objects() {
        let t = arc(terminal_category());
        let (two, emb) = adjoin_terminal(&t);
        assert_eq!((two.object_count(), two.morphism_count()), (2, 3));
        assert_eq!(emb.objects, vec![0]);

        let i = arc(interval_category());
        let (three, emb) = adjoin_terminal(&i);
        assert_eq!(three.object_count(), 3);
        assert_eq!(three.morphism_count(), i.morphism_count() + i.object_count() + 1);
        assert_eq!(three.morphism_count(), 6);
        let top = 2;
        for x in three.objects() {
            assert_eq!(three.hom(x, top).len(), 1);
        }
        let u = emb.morphisms[i.morphism("u").unwrap()];
        let b0 = three.hom(0, top)[0];
        let b1 = three.hom(1, top)[0];
        assert_eq!(three.compose(b1, u), Some(b0));
    }

    #[test]
    fn raw_round_trip() {
        let i = interval_category();
        assert_eq!(validate_category(&i.to_raw()).unwrap(), i);
    }
}
