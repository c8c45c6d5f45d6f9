//! Classifying maps into the universe and realignment along monomorphisms.

use crate::error::{Error, Result};
use crate::fincat::Obj;
use crate::presheaf::{Presheaf, PresheafMap};

use super::{SetPartial, SetUniverse, SmallCode, Universe};

/// A cartesian square from `f : X → Y` to the generic map, given by a code
/// per element of `Y` and, per element of `X`, its point in the `El` of the
/// code below it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Classifier {
    pub codes: Vec<Vec<SmallCode>>,
    pub points: Vec<Vec<usize>>,
}

impl Classifier {
    /// The classifier of `m^*f` obtained by restricting along a mono `m`
    /// into the base, with points reindexed by `pulled`, the elements of the
    /// pullback's domain inside `f`'s domain.
    pub fn restrict_along(&self, mono: &PresheafMap, pulled: &[Vec<usize>]) -> Classifier {
        let cat = mono.category();
        Classifier {
            codes: cat
                .objects()
                .map(|c| mono.component(c).iter().map(|&b| self.codes[c][b].clone()).collect())
                .collect(),
            points: cat
                .objects()
                .map(|c| pulled[c].iter().map(|&q| self.points[c][q]).collect())
                .collect(),
        }
    }

    /// Checks that the data is a cartesian square over `f`: codes natural and
    /// well formed, points natural, and each fiber sent bijectively onto
    /// the `El` of its code.
    pub fn verify(&self, u: &Universe, f: &PresheafMap) -> Result<()> {
        let cat = f.category();
        let bad = |s: String| Err(Error::InvalidClassifier(s));
        for c in cat.objects() {
            if self.codes[c].len() != f.cod().size(c) || self.points[c].len() != f.dom().size(c) {
                return bad(format!("wrong number of entries at `{}`", cat.object_name(c)));
            }
            for code in &self.codes[c] {
                if code.base != c {
                    return bad(format!("code at `{}` has the wrong base", cat.object_name(c)));
                }
                u.validate(code)?;
            }
        }
        for v in cat.morphisms() {
            let (s, d) = (cat.src(v), cat.dst(v));
            for y in 0..f.cod().size(d) {
                if self.codes[s][f.cod().restrict(v, y)] != u.restrict(&self.codes[d][y], v) {
                    return bad(format!("codes are not natural along `{}` at {y}", cat.morphism_name(v)));
                }
            }
            for x in 0..f.dom().size(d) {
                let want = u.el_restrict(&self.codes[d][f.apply(d, x)], self.points[d][x], v);
                if self.points[s][f.dom().restrict(v, x)] != want {
                    return bad(format!("points are not natural along `{}` at {x}", cat.morphism_name(v)));
                }
            }
        }
        let idx = f.fiber_index();
        for c in cat.objects() {
            for (y, fib) in idx.fibers[c].iter().enumerate() {
                let k = u.el_size(&self.codes[c][y]);
                let mut hit = vec![false; k];
                for &x in fib {
                    let p = self.points[c][x];
                    if p >= k || hit[p] {
                        return bad(format!("fiber over {y} at `{}` is not sent bijectively", cat.object_name(c)));
                    }
                    hit[p] = true;
                }
                if fib.len() != k {
                    return bad(format!("fiber over {y} at `{}` misses points", cat.object_name(c)));
                }
            }
        }
        Ok(())
    }

    /// The family `codes^*El` and an isomorphism from `f`'s domain onto it
    /// over the base, as produced by the classifier.
    pub fn witness(&self, u: &Universe, f: &PresheafMap) -> Result<(PresheafMap, PresheafMap)> {
        let cap = crate::error::Cap::DEFAULT;
        let (pulled, _) = u.el_family(f.cod(), &self.codes, cap)?;
        let cat = f.category();
        let mut offsets: Vec<Vec<usize>> = Vec::with_capacity(cat.object_count());
        for c in cat.objects() {
            let mut acc = 0;
            offsets.push(
                self.codes[c]
                    .iter()
                    .map(|k| {
                        let o = acc;
                        acc += u.el_size(k);
                        o
                    })
                    .collect(),
            );
        }
        let iso = PresheafMap::new(
            f.dom().clone(),
            pulled.dom().clone(),
            cat.objects()
                .map(|c| (0..f.dom().size(c)).map(|x| offsets[c][f.apply(c, x)] + self.points[c][x]).collect())
                .collect(),
        )?;
        Ok((pulled, iso))
    }
}

/// The classifier of `f` whose points are `points`, with every fiber aligned
/// by its points. The code at `(c, y)` has at slice object `u : d → c` the
/// carrier `{0..k-1}`, `k` the size of the fiber over `y·u`, and restriction
/// along `w` moves the element with point `i` over `y·u` to the point of its
/// restriction along `w`.
pub fn assemble(u: &Universe, f: &PresheafMap, points: Vec<Vec<usize>>) -> Result<Classifier> {
    let cat = f.category();
    f.check_fibers(u.bound())?;
    let idx = f.fiber_index();
    let mut aligned: Vec<Vec<Vec<usize>>> = Vec::with_capacity(cat.object_count());
    for c in cat.objects() {
        let mut per: Vec<Vec<usize>> = idx.fibers[c].iter().map(|fib| vec![usize::MAX; fib.len()]).collect();
        for (x, &p) in points[c].iter().enumerate() {
            let y = f.apply(c, x);
            if p >= per[y].len() || per[y][p] != usize::MAX {
                return Err(Error::InvalidClassifier(format!(
                    "points over {y} at `{}` are not a bijection",
                    cat.object_name(c)
                )));
            }
            per[y][p] = x;
        }
        aligned.push(per);
    }
    let y = f.cod();
    let codes = cat
        .objects()
        .map(|c| (0..y.size(c)).map(|b| aligned_code(u, f, &aligned, &points, c, b)).collect())
        .collect();
    Ok(Classifier { codes, points })
}

fn aligned_code(
    u: &Universe,
    f: &PresheafMap,
    aligned: &[Vec<Vec<usize>>],
    points: &[Vec<usize>],
    c: Obj,
    b: usize,
) -> SmallCode {
    let cat = f.category();
    let slice = u.slice(c);
    let (x, y) = (f.dom(), f.cod());
    let over = |z: Obj| {
        let m = slice.object_morphism(z);
        (cat.src(m), y.restrict(m, b))
    };
    let sizes = slice
        .category
        .objects()
        .map(|z| {
            let (d, bz) = over(z);
            aligned[d][bz].len()
        })
        .collect();
    let tables = slice
        .category
        .morphisms()
        .map(|m| {
            let (w, z) = slice.morphism_pair(m);
            let (d, bz) = over(z);
            debug_assert_eq!(d, cat.dst(w));
            aligned[d][bz].iter().map(|&q| points[cat.src(w)][x.restrict(w, q)]).collect()
        })
        .collect();
    SmallCode { base: c, sizes, tables }
}

/// The canonical classifier of `f`: every fiber in the carrier order of the
/// domain.
pub fn classify_family(u: &Universe, f: &PresheafMap) -> Result<Classifier> {
    f.check_fibers(u.bound())?;
    let idx = f.fiber_index();
    assemble(u, f, idx.positions)
}

/// A mono `A ↣ B`, a family `Q → B`, and a classifier of the restriction of
/// the family to `A`: a code per element of `A`, and a point for each
/// element of `Q` over the image of `A`.
#[derive(Debug, Clone)]
pub struct RealignmentProblem {
    pub mono: PresheafMap,
    pub family: PresheafMap,
    pub codes: Vec<Vec<SmallCode>>,
    pub points: Vec<Vec<Option<usize>>>,
}

impl RealignmentProblem {
    pub fn new(
        u: &Universe,
        mono: PresheafMap,
        family: PresheafMap,
        codes: Vec<Vec<SmallCode>>,
        points: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        let p = RealignmentProblem {
            mono,
            family,
            codes,
            points,
        };
        p.validate(u)?;
        Ok(p)
    }

    /// The problem of extending `partial`, a classifier of the whole family
    /// whose data is kept only over the image of `mono`.
    pub fn from_total(u: &Universe, mono: PresheafMap, family: PresheafMap, total: &Classifier) -> Result<Self> {
        let cat = mono.category().clone();
        let codes = cat
            .objects()
            .map(|c| mono.component(c).iter().map(|&b| total.codes[c][b].clone()).collect())
            .collect();
        let image = image_mask(&mono);
        let points = cat
            .objects()
            .map(|c| {
                (0..family.dom().size(c))
                    .map(|q| image[c][family.apply(c, q)].then(|| total.points[c][q]))
                    .collect()
            })
            .collect();
        RealignmentProblem::new(u, mono, family, codes, points)
    }

    pub fn base(&self) -> &Presheaf {
        self.mono.cod()
    }

    pub fn validate(&self, u: &Universe) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidProblem(s));
        let (m, f) = (&self.mono, &self.family);
        if m.cod() != f.cod() {
            return bad("the mono and the family have different codomains".into());
        }
        if let Some((c, a, b)) = m.first_non_injective() {
            return bad(format!(
                "the subobject map identifies {a} and {b} at `{}`",
                m.category().object_name(c)
            ));
        }
        f.check_fibers(u.bound())?;
        let cat = m.category();
        let a = m.dom();
        let image = image_mask(m);
        for c in cat.objects() {
            if self.codes[c].len() != a.size(c) || self.points[c].len() != f.dom().size(c) {
                return bad(format!("wrong number of entries at `{}`", cat.object_name(c)));
            }
            for code in &self.codes[c] {
                if code.base != c {
                    return bad(format!("code at `{}` has the wrong base", cat.object_name(c)));
                }
                u.validate(code)?;
            }
            for q in 0..f.dom().size(c) {
                if image[c][f.apply(c, q)] != self.points[c][q].is_some() {
                    return bad(format!(
                        "element {q} at `{}` has a point exactly when it lies over the subobject",
                        cat.object_name(c)
                    ));
                }
            }
        }
        for v in cat.morphisms() {
            let (s, d) = (cat.src(v), cat.dst(v));
            for e in 0..a.size(d) {
                if self.codes[s][a.restrict(v, e)] != u.restrict(&self.codes[d][e], v) {
                    return bad(format!("partial codes are not natural along `{}`", cat.morphism_name(v)));
                }
            }
        }
        let (mono_pulled, restricted) = self.restricted_family()?;
        let cl = Classifier {
            codes: self.codes.clone(),
            points: cat
                .objects()
                .map(|c| mono_pulled[c].iter().map(|&q| self.points[c][q].expect("over the image")).collect())
                .collect(),
        };
        cl.verify(u, &restricted).map_err(|e| Error::InvalidProblem(e.to_string()))
    }

    /// `m^*f : m^*Q → A` and the inclusion of its elements into `Q`.
    pub fn restricted_family(&self) -> Result<(Vec<Vec<usize>>, PresheafMap)> {
        let cat = self.mono.category();
        let (m, f) = (&self.mono, &self.family);
        let mut pre: Vec<Vec<Option<usize>>> = cat.objects().map(|c| vec![None; m.cod().size(c)]).collect();
        for c in cat.objects() {
            for (a, &b) in m.component(c).iter().enumerate() {
                pre[c][b] = Some(a);
            }
        }
        let elems: Vec<Vec<usize>> = cat
            .objects()
            .map(|c| (0..f.dom().size(c)).filter(|&q| pre[c][f.apply(c, q)].is_some()).collect())
            .collect();
        let pos: Vec<std::collections::HashMap<usize, usize>> =
            elems.iter().map(|v| v.iter().enumerate().map(|(i, &q)| (q, i)).collect()).collect();
        let dom = Presheaf::from_fn(cat.clone(), elems.iter().map(Vec::len).collect(), |v, i| {
            pos[cat.src(v)][&f.dom().restrict(v, elems[cat.dst(v)][i])]
        })?;
        let map = PresheafMap::new(
            dom,
            m.dom().clone(),
            cat.objects()
                .map(|c| elems[c].iter().map(|&q| pre[c][f.apply(c, q)].expect("over the image")).collect())
                .collect(),
        )?;
        Ok((elems, map))
    }

    /// Whether `cl` restricts along the mono to exactly the given partial
    /// classifier, comparing raw data.
    pub fn is_extended_by(&self, cl: &Classifier) -> bool {
        let cat = self.mono.category();
        cat.objects().all(|c| {
            self.mono
                .component(c)
                .iter()
                .enumerate()
                .all(|(a, &b)| cl.codes[c][b] == self.codes[c][a])
                && self.points[c]
                    .iter()
                    .zip(&cl.points[c])
                    .all(|(p, &q)| p.is_none_or(|p| p == q))
        })
    }
}

fn image_mask(m: &PresheafMap) -> Vec<Vec<bool>> {
    let cat = m.category();
    cat.objects()
        .map(|c| {
            let mut v = vec![false; m.cod().size(c)];
            for &b in m.component(c) {
                v[b] = true;
            }
            v
        })
        .collect()
}

/// Extends the partial classifier of `problem` to the whole base. At each
/// object the fiberwise alignment is chosen by set-level realignment: the
/// given points over the subobject, carrier order elsewhere. The codes are
/// then read off the aligned fibers, which makes them agree with the given
/// codes over the subobject as raw data.
pub fn realign_presheaf(u: &Universe, problem: &RealignmentProblem) -> Result<Classifier> {
    let (m, f) = (&problem.mono, &problem.family);
    let cat = m.category();
    let set = SetUniverse { bound: u.bound() };
    let mut points = Vec::with_capacity(cat.object_count());
    for d in cat.objects() {
        let partial = SetPartial {
            codes: problem.codes[d].iter().map(|k| u.el_size(k)).collect(),
            points: problem.points[d].clone(),
        };
        let beta = set.realign(f.component(d), f.cod().size(d), m.component(d), &partial)?;
        points.push(beta.points);
    }
    let cl = assemble(u, f, points)?;
    debug_assert!(problem.is_extended_by(&cl));
    Ok(cl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::categories;
    use crate::error::Cap;
    use crate::fincat::interval_category;
    use crate::presheaf::{generated_subobject, is_cartesian_map, pullback};
    use crate::sample::{random_family, random_inhabited, random_presheaf, random_subobject, shuffle_family, Shape};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn identity_is_classified_by_unit_codes() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 2).unwrap();
        let y = Presheaf::yoneda(&cat, 1).unwrap();
        let cl = classify_family(&u, &PresheafMap::identity(&y)).unwrap();
        assert_eq!(cl.codes[1][0], u.unit_code(1));
        assert_eq!(cl.codes[0][0], u.unit_code(0));
        let cl = classify_family(&u, &PresheafMap::from_initial(&y)).unwrap();
        assert!(cl.codes.iter().flatten().all(|k| *k == u.empty_code(k.base)));
    }

    #[test]
    fn oversized_family_is_rejected() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 2).unwrap();
        let two = Presheaf::constant(&cat, 2);
        let f = PresheafMap::to_terminal(&two);
        assert!(matches!(classify_family(&u, &f), Err(Error::FiberTooLarge { .. })));
    }

    /// The partial classifier of `m^*f` coming from a relabeled copy of `f`.
    fn noncanonical_problem(u: &Universe, m: PresheafMap, f: PresheafMap, rng: &mut ChaCha8Rng) -> RealignmentProblem {
        let (g, iso) = shuffle_family(&f, rng);
        let cl = classify_family(u, &g).unwrap();
        let points = f
            .category()
            .objects()
            .map(|c| (0..f.dom().size(c)).map(|q| cl.points[c][iso.apply(c, q)]).collect())
            .collect();
        let total = Classifier { codes: cl.codes, points };
        RealignmentProblem::from_total(u, m, f, &total).unwrap()
    }

    #[test]
    fn realigning_the_lower_point_of_the_interval() {
        let cat = Arc::new(interval_category());
        let u = Universe::new(&cat, 3).unwrap();
        let b = Presheaf::yoneda(&cat, 1).unwrap();
        let m = generated_subobject(&b, &[(0, 0)]);
        // two points over every element, relabeled over the subobject
        let q = Presheaf::constant(&cat, 2);
        let (f, _) = crate::presheaf::product(&b, &q, Cap::DEFAULT)
            .map(|l| (l.projections[0].clone(), l))
            .unwrap();
        let canonical = classify_family(&u, &f).unwrap();
        let swapped = Classifier {
            codes: canonical.codes.clone(),
            points: canonical.points.iter().map(|v| v.iter().map(|&p| 1 - p).collect()).collect(),
        };
        let swapped = assemble(&u, &f, swapped.points).unwrap();
        let problem = RealignmentProblem::from_total(&u, m, f.clone(), &swapped).unwrap();
        let cl = realign_presheaf(&u, &problem).unwrap();
        cl.verify(&u, &f).unwrap();
        assert!(problem.is_extended_by(&cl));
        assert_eq!(cl.codes[0][0], swapped.codes[0][0]);
        assert_eq!(cl.codes[0][0], canonical.codes[0][0]);
        assert_ne!(cl.codes[1][0], canonical.codes[1][0]);
    }

    #[test]
    fn empty_subobject_recovers_classification() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (_, cat) in categories() {
            let u = Universe::new(&cat, 3).unwrap();
            for _ in 0..20 {
                let b = random_presheaf(&cat, Shape::default(), &mut rng);
                let f = random_family(&b, 3, Shape::default(), &mut rng);
                let m = PresheafMap::from_initial(&b);
                let p = RealignmentProblem::from_total(&u, m, f.clone(), &classify_family(&u, &f).unwrap()).unwrap();
                assert_eq!(realign_presheaf(&u, &p).unwrap(), classify_family(&u, &f).unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn classification_is_sound(which in 0usize..5, bound in 2usize..4, seed in any::<u64>()) {
            let cat = &categories()[which].1;
            let u = Universe::new(cat, bound).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_presheaf(cat, Shape::default(), &mut rng);
            let f = random_family(&b, bound, Shape::default(), &mut rng);
            let cl = classify_family(&u, &f).unwrap();
            cl.verify(&u, &f).unwrap();
            let (pulled, iso) = cl.witness(&u, &f).unwrap();
            prop_assert!(iso.is_iso());
            prop_assert_eq!(pulled.after(&iso).unwrap(), f.clone());
            let m = u.materialize(Cap::DEFAULT).unwrap();
            let (top, chi) = m.maps(&f, &cl).unwrap();
            prop_assert!(is_cartesian_map(&top, &f, &m.generic, &chi).unwrap());
            prop_assert_eq!(m.classifier(&top, &chi), cl);
        }

        #[test]
        fn realignment_is_strict(which in 0usize..5, bound in 2usize..4, seed in any::<u64>()) {
            let cat = &categories()[which].1;
            let u = Universe::new(cat, bound).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_inhabited(cat, Shape::default(), &mut rng);
            let f = random_family(&b, bound, Shape::default(), &mut rng);
            let m = random_subobject(&b, 0.5, &mut rng);
            let problem = noncanonical_problem(&u, m, f.clone(), &mut rng);
            let cl = realign_presheaf(&u, &problem).unwrap();
            cl.verify(&u, &f).unwrap();
            prop_assert!(problem.is_extended_by(&cl));
        }

        #[test]
        fn classification_is_stable_under_pullback(which in 0usize..5, seed in any::<u64>()) {
            let cat = &categories()[which].1;
            let u = Universe::new(cat, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_presheaf(cat, Shape::default(), &mut rng);
            let f = random_family(&b, 3, Shape::default(), &mut rng);
            let g = random_family(&b, 4, Shape::default(), &mut rng);
            let pb = pullback(&g, &f, Cap::DEFAULT).unwrap();
            let cl = classify_family(&u, &f).unwrap();
            let pulled = Classifier {
                codes: cat.objects().map(|c| g.component(c).iter().map(|&y| cl.codes[c][y].clone()).collect()).collect(),
                points: cat.objects().map(|c| (0..pb.apex.size(c)).map(|p| cl.points[c][pb.right.apply(c, p)]).collect()).collect(),
            };
            pulled.verify(&u, &pb.left).unwrap();
        }
    }
}
