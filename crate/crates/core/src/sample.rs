//! Seeded generators for random presheaves, subobjects, families and
//! diagrams. Every generator is a deterministic function of the RNG state.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::fincat::{FiniteCategory, Obj};
use crate::presheaf::{
    coproduct, generated_congruence, generated_subobject, quotient, random_hom, Congruence, Presheaf, PresheafMap,
};

/// Limits on the size of generated objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    /// Maximum number of representable generators.
    pub generators: usize,
    /// Maximum number of random identifications.
    pub relations: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            generators: 3,
            relations: 2,
        }
    }
}

/// A coproduct of representables on the given objects.
pub fn free_presheaf(cat: &Arc<FiniteCategory>, objects: &[Obj]) -> Presheaf {
    let summands: Vec<Presheaf> = objects
        .iter()
        .map(|&c| Presheaf::yoneda(cat, c).expect("object of the category"))
        .collect();
    coproduct(cat, &summands).expect("summands share the category").apex
}

fn random_pair<R: Rng + ?Sized>(x: &Presheaf, rng: &mut R) -> Option<(Obj, usize, usize)> {
    let live: Vec<Obj> = x.category().objects().filter(|&c| x.size(c) > 0).collect();
    let &c = live.choose(rng)?;
    Some((c, rng.gen_range(0..x.size(c)), rng.gen_range(0..x.size(c))))
}

/// A random quotient of a coproduct of representables.
pub fn random_presheaf<R: Rng + ?Sized>(cat: &Arc<FiniteCategory>, shape: Shape, rng: &mut R) -> Presheaf {
    if cat.object_count() == 0 {
        return Presheaf::initial(cat);
    }
    let k = rng.gen_range(0..=shape.generators);
    let objects: Vec<Obj> = (0..k).map(|_| rng.gen_range(0..cat.object_count())).collect();
    let free = free_presheaf(cat, &objects);
    let pairs: Vec<(Obj, usize, usize)> = (0..rng.gen_range(0..=shape.relations))
        .filter_map(|_| random_pair(&free, rng))
        .collect();
    let r = generated_congruence(&free, &pairs);
    quotient(&free, &r).expect("generated congruence is closed").0
}

/// A random non-empty presheaf, falling back to the terminal presheaf.
pub fn random_inhabited<R: Rng + ?Sized>(cat: &Arc<FiniteCategory>, shape: Shape, rng: &mut R) -> Presheaf {
    for _ in 0..8 {
        let x = random_presheaf(cat, shape, rng);
        if !x.is_empty() {
            return x;
        }
    }
    Presheaf::terminal(cat)
}

/// The inclusion of a random sub-presheaf, generated by each element
/// independently with probability `p`.
pub fn random_subobject<R: Rng + ?Sized>(x: &Presheaf, p: f64, rng: &mut R) -> PresheafMap {
    let gens: Vec<(Obj, usize)> = x.elements().filter(|_| rng.gen_bool(p)).collect();
    generated_subobject(x, &gens)
}

/// A random family `f : X → base` whose fibers all have fewer than `bound`
/// elements. `X` is a quotient of a coproduct of representables lying over
/// chosen elements of the base, with identifications inside fibers.
pub fn random_family<R: Rng + ?Sized>(base: &Presheaf, bound: usize, shape: Shape, rng: &mut R) -> PresheafMap {
    let cat = base.category().clone();
    let elements: Vec<(Obj, usize)> = base.elements().collect();
    if bound <= 1 || elements.is_empty() {
        return PresheafMap::from_initial(base);
    }
    let k = rng.gen_range(0..=shape.generators);
    let gens: Vec<(Obj, usize)> = (0..k).map(|_| *elements.choose(rng).expect("non-empty")).collect();
    let objects: Vec<Obj> = gens.iter().map(|&(c, _)| c).collect();
    let free = free_presheaf(&cat, &objects);
    // element j of y(c_k)(d) is the j-th morphism d → c_k
    let mut comps: Vec<Vec<usize>> = Vec::with_capacity(cat.object_count());
    for d in cat.objects() {
        let mut row = Vec::with_capacity(free.size(d));
        for &(c, b) in &gens {
            for &m in cat.hom(d, c) {
                row.push(base.restrict(m, b));
            }
        }
        comps.push(row);
    }
    let map = PresheafMap::new(free.clone(), base.clone(), comps).expect("Yoneda map is natural");
    let mut pairs: Vec<(Obj, usize, usize)> = Vec::new();
    for _ in 0..rng.gen_range(0..=shape.relations) {
        if let Some((c, x, _)) = random_pair(&free, rng) {
            let fiber = map.fiber(c, map.apply(c, x));
            pairs.push((c, x, *fiber.choose(rng).expect("x lies in its fiber")));
        }
    }
    loop {
        let r = generated_congruence(&free, &pairs);
        let (q, epi) = quotient(&free, &r).expect("generated congruence is closed");
        let f = descend(&map, &r, &q, &epi);
        match f.oversized_fiber(bound) {
            None => return f,
            Some((c, y, _)) => {
                let fib = f.fiber(c, y);
                let (a, b) = (fib[0], fib[1 + rng.gen_range(0..fib.len() - 1)]);
                let lift = |e: usize| (0..free.size(c)).find(|&x| epi.apply(c, x) == e).expect("epi");
                pairs.push((c, lift(a), lift(b)));
            }
        }
    }
}

/// The map out of a quotient induced by a map constant on classes.
fn descend(map: &PresheafMap, r: &Congruence, q: &Presheaf, epi: &PresheafMap) -> PresheafMap {
    let cat = q.category();
    let comps = cat
        .objects()
        .map(|c| {
            let mut row = vec![0; q.size(c)];
            for x in 0..epi.dom().size(c) {
                row[r.labels[c][x]] = map.apply(c, x);
            }
            row
        })
        .collect();
    PresheafMap::new(q.clone(), map.cod().clone(), comps).expect("descended map is natural")
}

/// A random permutation of every carrier.
pub fn random_permutation<R: Rng + ?Sized>(x: &Presheaf, rng: &mut R) -> Vec<Vec<usize>> {
    x.category()
        .objects()
        .map(|c| {
            let mut p: Vec<usize> = (0..x.size(c)).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

/// Relabels the domain of a family by a random permutation, returning the
/// relabeled family and the isomorphism from the old domain to the new one.
pub fn shuffle_family<R: Rng + ?Sized>(f: &PresheafMap, rng: &mut R) -> (PresheafMap, PresheafMap) {
    let perm = random_permutation(f.dom(), rng);
    let x2 = f.dom().relabel(&perm);
    let iso = PresheafMap::new(f.dom().clone(), x2.clone(), perm.clone()).expect("relabeling is natural");
    let comps = f
        .category()
        .objects()
        .map(|c| {
            let mut row = vec![0; f.dom().size(c)];
            for (x, &px) in perm[c].iter().enumerate() {
                row[px] = f.apply(c, x);
            }
            row
        })
        .collect();
    let g = PresheafMap::new(x2, f.cod().clone(), comps).expect("relabeled family is natural");
    (g, iso)
}

/// A random epimorphism onto `x` from a coproduct of representables together
/// with a random extra summand.
pub fn random_cover<R: Rng + ?Sized>(x: &Presheaf, shape: Shape, rng: &mut R) -> PresheafMap {
    let cat = x.category().clone();
    let mut gens: Vec<(Obj, usize)> = x.elements().filter(|_| rng.gen_bool(0.5)).collect();
    let covered = generated_subobject(x, &gens);
    for (c, e) in x.elements() {
        if !covered.component(c).contains(&e) && !gens.iter().any(|&(d, y)| d == c && y == e) {
            gens.push((c, e));
        }
    }
    let objects: Vec<Obj> = gens.iter().map(|&(c, _)| c).collect();
    let free = free_presheaf(&cat, &objects);
    let extra = random_presheaf(&cat, shape, rng);
    let extra_map = random_hom(&extra, x, rng);
    let (summands, extra_map) = match extra_map {
        Some(m) => (vec![free.clone(), extra.clone()], Some(m)),
        None => (vec![free.clone()], None),
    };
    let co = coproduct(&cat, &summands).expect("summands share the category");
    let comps = cat
        .objects()
        .map(|d| {
            let mut row = vec![0; co.apex.size(d)];
            let mut k = 0;
            for &(c, b) in &gens {
                for &m in cat.hom(d, c) {
                    row[co.injections[0].apply(d, k)] = x.restrict(m, b);
                    k += 1;
                }
            }
            if let Some(em) = &extra_map {
                for e in 0..extra.size(d) {
                    row[co.injections[1].apply(d, e)] = em.apply(d, e);
                }
            }
            row
        })
        .collect();
    PresheafMap::new(co.apex.clone(), x.clone(), comps).expect("cover is natural")
}
