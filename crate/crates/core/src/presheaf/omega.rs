//! Sieves, the subobject classifier, matching families and the partial map
//! classifier.

use std::collections::HashMap;
use std::sync::Arc;

use super::{Presheaf, PresheafMap};
use crate::error::{Cap, Error, Result};
use crate::fincat::{FiniteCategory, Mor, Obj};

/// A sieve on `target`: a set of morphisms into it closed under
/// precomposition. Members are kept in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sieve {
    pub target: Obj,
    pub members: Vec<Mor>,
}

impl Sieve {
    /// The sieve generated by `gens`.
    pub fn generated(cat: &FiniteCategory, target: Obj, gens: &[Mor]) -> Result<Self> {
        let mut members = Vec::new();
        for &g in gens {
            if cat.dst(g) != target {
                return Err(Error::IllTypedDiagram(format!(
                    "`{}` does not land in `{}`",
                    cat.morphism_name(g),
                    cat.object_name(target)
                )));
            }
            for &w in cat.arrows_into(cat.src(g)) {
                members.push(cat.comp(g, w));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(Sieve { target, members })
    }

    pub fn maximal(cat: &FiniteCategory, target: Obj) -> Self {
        Sieve {
            target,
            members: cat.arrows_into(target).to_vec(),
        }
    }

    pub fn empty(target: Obj) -> Self {
        Sieve {
            target,
            members: Vec::new(),
        }
    }

    pub fn contains(&self, m: Mor) -> bool {
        self.members.binary_search(&m).is_ok()
    }

    pub fn is_maximal(&self) -> bool {
        self.contains(self.target)
    }

    pub fn is_closed(&self, cat: &FiniteCategory) -> bool {
        self.members
            .iter()
            .all(|&m| cat.dst(m) == self.target && cat.arrows_into(cat.src(m)).iter().all(|&w| self.contains(cat.comp(m, w))))
    }

    /// `u^*S = { w : u ∘ w ∈ S }` on the domain of `u`.
    pub fn pullback(&self, cat: &FiniteCategory, u: Mor) -> Sieve {
        let c = cat.src(u);
        Sieve {
            target: c,
            members: cat.arrows_into(c).iter().copied().filter(|&w| self.contains(cat.comp(u, w))).collect(),
        }
    }

    pub fn intersection(&self, other: &Sieve) -> Sieve {
        Sieve {
            target: self.target,
            members: self.members.iter().copied().filter(|&m| other.contains(m)).collect(),
        }
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn position(&self, m: Mor) -> Option<usize> {
        self.members.binary_search(&m).ok()
    }

    pub fn describe(&self, cat: &FiniteCategory) -> String {
        let names: Vec<&str> = self.members.iter().map(|&m| cat.morphism_name(m)).collect();
        format!("{{{}}} on `{}`", names.join(", "), cat.object_name(self.target))
    }
}

/// All sieves on `c`, deciding members of `into(c)` in order with exclusion
/// tried before inclusion.
pub fn sieves_on(cat: &FiniteCategory, c: Obj, cap: Cap) -> Result<Vec<Sieve>> {
    let into = cat.arrows_into(c);
    let mut chosen = vec![false; into.len()];
    let mut out = Vec::new();
    fn go(cat: &FiniteCategory, c: Obj, into: &[Mor], p: usize, chosen: &mut Vec<bool>, out: &mut Vec<Sieve>, cap: Cap) -> Result<()> {
        if p == into.len() {
            let s = Sieve {
                target: c,
                members: into.iter().zip(chosen.iter()).filter(|(_, &b)| b).map(|(&m, _)| m).collect(),
            };
            if s.is_closed(cat) {
                out.push(s);
                cap.check(out.len(), || "enumerating sieves".into())?;
            }
            return Ok(());
        }
        let m = into[p];
        let pos = |x: Mor| into.iter().position(|&y| y == x).expect("member of into(c)");
        // excluding m is impossible if an earlier chosen member restricts to it
        let excludable = (0..p).all(|q| !chosen[q] || cat.arrows_into(cat.src(into[q])).iter().all(|&w| cat.comp(into[q], w) != m));
        if excludable {
            chosen[p] = false;
            go(cat, c, into, p + 1, chosen, out, cap)?;
        }
        let includable = cat.arrows_into(cat.src(m)).iter().all(|&w| {
            let q = pos(cat.comp(m, w));
            q >= p || chosen[q]
        });
        if includable {
            chosen[p] = true;
            go(cat, c, into, p + 1, chosen, out, cap)?;
            chosen[p] = false;
        }
        Ok(())
    }
    go(cat, c, into, 0, &mut chosen, &mut out, cap)?;
    Ok(out)
}

/// The subobject classifier `Ω` with `Ω(c)` the sieves on `c`.
#[derive(Debug, Clone)]
pub struct Omega {
    pub presheaf: Presheaf,
    /// `1 → Ω` picking the maximal sieve.
    pub truth: PresheafMap,
    sieves: Vec<Vec<Sieve>>,
    index: Vec<HashMap<Vec<Mor>, usize>>,
}

impl Omega {
    pub fn new(cat: &Arc<FiniteCategory>, cap: Cap) -> Result<Self> {
        let sieves: Vec<Vec<Sieve>> = cat.objects().map(|c| sieves_on(cat, c, cap)).collect::<Result<_>>()?;
        let index: Vec<HashMap<Vec<Mor>, usize>> = sieves
            .iter()
            .map(|ss| ss.iter().enumerate().map(|(i, s)| (s.members.clone(), i)).collect())
            .collect();
        let tables = cat
            .morphisms()
            .map(|u| {
                sieves[cat.dst(u)]
                    .iter()
                    .map(|s| index[cat.src(u)][&s.pullback(cat, u).members])
                    .collect()
            })
            .collect();
        let presheaf = Presheaf::from_parts(cat.clone(), sieves.iter().map(Vec::len).collect(), tables);
        let truth_comps = cat
            .objects()
            .map(|c| vec![index[c][&Sieve::maximal(cat, c).members]])
            .collect();
        let truth = PresheafMap::from_parts(Presheaf::terminal(cat), presheaf.clone(), truth_comps);
        Ok(Omega {
            presheaf,
            truth,
            sieves,
            index,
        })
    }

    pub fn sieve(&self, c: Obj, i: usize) -> &Sieve {
        &self.sieves[c][i]
    }

    pub fn sieves(&self, c: Obj) -> &[Sieve] {
        &self.sieves[c]
    }

    pub fn index_of(&self, s: &Sieve) -> usize {
        self.index[s.target][&s.members]
    }

    pub fn maximal(&self, c: Obj) -> usize {
        self.truth.apply(c, 0)
    }

    pub fn bottom(&self, c: Obj) -> usize {
        self.index[c][&Vec::new()]
    }
}

/// `χ_m : X → Ω` sending `x ∈ X(c)` to `{ u : x·u ∈ A }`.
pub fn characteristic_map(omega: &Omega, m: &PresheafMap) -> Result<PresheafMap> {
    if let Some((c, _, _)) = m.first_non_injective() {
        return Err(Error::NotMono {
            object: m.category().object_name(c).to_string(),
        });
    }
    let cat = m.category().clone();
    let x = m.cod();
    let in_image: Vec<Vec<bool>> = cat
        .objects()
        .map(|c| {
            let mut hit = vec![false; x.size(c)];
            m.component(c).iter().for_each(|&y| hit[y] = true);
            hit
        })
        .collect();
    let comps = cat
        .objects()
        .map(|c| {
            (0..x.size(c))
                .map(|e| {
                    let members = cat
                        .arrows_into(c)
                        .iter()
                        .copied()
                        .filter(|&u| in_image[cat.src(u)][x.restrict(u, e)])
                        .collect();
                    omega.index_of(&Sieve { target: c, members })
                })
                .collect()
        })
        .collect();
    PresheafMap::new(x.clone(), omega.presheaf.clone(), comps)
}

/// Compatible families `(x_m)_{m ∈ S}` with `x_{m∘w} = x_m·w`, in
/// lexicographic order of the member-indexed tuples.
pub fn matching_families(x: &Presheaf, sieve: &Sieve, cap: Cap) -> Result<Vec<Vec<usize>>> {
    let cat = x.category();
    let members = &sieve.members;
    // (a, w, b): x_b = x_a · w
    let mut constraints: Vec<Vec<(usize, Mor, usize)>> = vec![Vec::new(); members.len()];
    for (a, &m) in members.iter().enumerate() {
        for &w in cat.arrows_into(cat.src(m)) {
            if cat.is_identity(w) {
                continue;
            }
            let b = sieve.position(cat.comp(m, w)).expect("sieve is closed");
            constraints[a.max(b)].push((a, w, b));
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; members.len()];
    #[allow(clippy::too_many_arguments)]
    fn go(
        x: &Presheaf,
        cat: &FiniteCategory,
        members: &[Mor],
        constraints: &[Vec<(usize, Mor, usize)>],
        p: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: Cap,
    ) -> Result<()> {
        if p == members.len() {
            out.push(current.clone());
            return cap.check(out.len(), || "enumerating matching families".into());
        }
        for v in 0..x.size(cat.src(members[p])) {
            current[p] = v;
            if constraints[p].iter().all(|&(a, w, b)| current[b] == x.restrict(w, current[a])) {
                go(x, cat, members, constraints, p + 1, current, out, cap)?;
            }
        }
        Ok(())
    }
    go(x, cat, members, &constraints, 0, &mut current, &mut out, cap)?;
    Ok(out)
}

/// Restricts a matching family for `S` on `c` along `u : c' → c` to a family
/// for `T` on `c'`, where `u ∘ w ∈ S` for every `w ∈ T`.
pub(crate) fn restrict_family(cat: &FiniteCategory, s: &Sieve, family: &[usize], u: Mor, t: &Sieve) -> Vec<usize> {
    t.members
        .iter()
        .map(|&w| family[s.position(cat.comp(u, w)).expect("restricted member lies in the sieve")])
        .collect()
}

/// The partial map classifier `X⁺`: elements at `c` are a sieve `S` on `c`
/// together with a matching family for `S`, ordered by sieve then family.
#[derive(Debug, Clone)]
pub struct PartialMapClassifier {
    pub presheaf: Presheaf,
    pub unit: PresheafMap,
    entries: Vec<Vec<(usize, Vec<usize>)>>,
}

impl PartialMapClassifier {
    /// The sieve index and family of an element.
    pub fn entry(&self, c: Obj, e: usize) -> (usize, &[usize]) {
        let (s, f) = &self.entries[c][e];
        (*s, f)
    }
}

pub fn partial_map_classifier(x: &Presheaf, omega: &Omega, cap: Cap) -> Result<PartialMapClassifier> {
    let cat = x.category().clone();
    let mut entries: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut total = 0;
    for c in cat.objects() {
        let mut row = Vec::new();
        for (i, s) in omega.sieves(c).iter().enumerate() {
            for fam in matching_families(x, s, cap)? {
                row.push((i, fam));
            }
        }
        total += row.len();
        cap.check(total, || "building a partial map classifier".into())?;
        entries.push(row);
    }
    let index: Vec<HashMap<(usize, Vec<usize>), usize>> = entries
        .iter()
        .map(|row| row.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect())
        .collect();
    let tables = cat
        .morphisms()
        .map(|u| {
            let (src, dst) = (cat.src(u), cat.dst(u));
            entries[dst]
                .iter()
                .map(|(si, fam)| {
                    let s = omega.sieve(dst, *si);
                    let t = s.pullback(&cat, u);
                    let fam2 = restrict_family(&cat, s, fam, u, &t);
                    index[src][&(omega.index_of(&t), fam2)]
                })
                .collect()
        })
        .collect();
    let presheaf = Presheaf::from_parts(cat.clone(), entries.iter().map(Vec::len).collect(), tables);
    let unit_comps = cat
        .objects()
        .map(|c| {
            let max = Sieve::maximal(&cat, c);
            let mi = omega.index_of(&max);
            (0..x.size(c))
                .map(|e| {
                    let fam = max.members.iter().map(|&m| x.restrict(m, e)).collect();
                    index[c][&(mi, fam)]
                })
                .collect()
        })
        .collect();
    let unit = PresheafMap::from_parts(x.clone(), presheaf.clone(), unit_comps);
    Ok(PartialMapClassifier {
        presheaf,
        unit,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{interval_category, terminal_category, validate_category, RawCategory};
    use crate::presheaf::{is_cartesian_square, pullback, Square};

    fn cat(c: crate::fincat::FiniteCategory) -> Arc<FiniteCategory> {
        Arc::new(c)
    }

    /// Brute-force sieve count: closed subsets of `into(c)`.
    fn brute_sieves(cat: &FiniteCategory, c: Obj) -> usize {
        let into = cat.arrows_into(c);
        (0u32..1 << into.len())
            .filter(|bits| {
                let s = Sieve {
                    target: c,
                    members: into.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &m)| m).collect(),
                };
                s.is_closed(cat)
            })
            .count()
    }

    #[test]
    fn omega_sizes() {
        let t = cat(terminal_category());
        assert_eq!(Omega::new(&t, Cap::DEFAULT).unwrap().presheaf.sizes(), &[2]);
        let i = cat(interval_category());
        let o = Omega::new(&i, Cap::DEFAULT).unwrap();
        assert_eq!(o.presheaf.sizes(), &[2, 3]);
        let pair = cat(validate_category(&RawCategory::new(&["a", "b"], &[("s", "a", "b"), ("t", "a", "b")], &[])).unwrap());
        let o = Omega::new(&pair, Cap::DEFAULT).unwrap();
        for c in pair.objects() {
            assert_eq!(o.presheaf.size(c), brute_sieves(&pair, c));
        }
        // empty sieve first, maximal last
        assert!(o.sieve(1, 0).members.is_empty());
        assert!(o.sieve(1, o.presheaf.size(1) - 1).is_maximal());
    }

    #[test]
    fn characteristic_map_classifies() {
        let i = cat(interval_category());
        let o = Omega::new(&i, Cap::DEFAULT).unwrap();
        let y1 = Presheaf::yoneda(&i, 1).unwrap();
        let id = PresheafMap::identity(&y1);
        let chi = characteristic_map(&o, &id).unwrap();
        for c in i.objects() {
            assert_eq!(chi.apply(c, 0), o.maximal(c));
        }
        // subobject of y(1) supported at 0
        let sub = Presheaf::new(i.clone(), vec![1, 0], vec![vec![0], vec![], vec![]]).unwrap();
        let m = PresheafMap::new(sub.clone(), y1.clone(), vec![vec![0], vec![]]).unwrap();
        let chi = characteristic_map(&o, &m).unwrap();
        let pb = pullback(&chi, &o.truth, Cap::DEFAULT).unwrap();
        assert_eq!(pb.apex.sizes(), sub.sizes());
        let sq = Square::new(
            PresheafMap::to_terminal(&sub),
            m.clone(),
            o.truth.clone(),
            chi.clone(),
        )
        .unwrap();
        assert!(is_cartesian_square(&sq).unwrap().holds());
        let collapse = PresheafMap::to_terminal(&Presheaf::constant(&i, 2));
        assert!(matches!(characteristic_map(&o, &collapse), Err(Error::NotMono { .. })));
    }

    #[test]
    fn partial_map_classifier_examples() {
        let t = cat(terminal_category());
        let o = Omega::new(&t, Cap::DEFAULT).unwrap();
        let one = Presheaf::terminal(&t);
        let plus = partial_map_classifier(&one, &o, Cap::DEFAULT).unwrap();
        assert_eq!(plus.presheaf.sizes(), &[2]);
        assert!(plus.unit.is_mono());

        let i = cat(interval_category());
        let o = Omega::new(&i, Cap::DEFAULT).unwrap();
        let empty = Presheaf::initial(&i);
        let plus = partial_map_classifier(&empty, &o, Cap::DEFAULT).unwrap();
        assert_eq!(plus.presheaf, Presheaf::terminal(&i));
        let one = Presheaf::terminal(&i);
        let plus = partial_map_classifier(&one, &o, Cap::DEFAULT).unwrap();
        assert_eq!(plus.presheaf, o.presheaf);
    }

    #[test]
    fn matching_families_of_maximal_sieve_are_elements() {
        let i = cat(interval_category());
        let x = Presheaf::new(i.clone(), vec![2, 3], vec![vec![0, 1], vec![0, 1, 2], vec![0, 0, 1]]).unwrap();
        let fams = matching_families(&x, &Sieve::maximal(&i, 1), Cap::DEFAULT).unwrap();
        // members are [id_1, u]; families list x_{id} then x_u
        let direct: Vec<Vec<usize>> = (0..3).map(|e| vec![e, x.restrict(2, e)]).collect();
        assert_eq!(fams, direct);
    }
}
