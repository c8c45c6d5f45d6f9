//! Realignment and the Glue connective stated pointwise: codes over a
//! context, propositions as subobjects, and the translations between the
//! external and the internal forms of a realignment problem.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Cap, Error, Result};
use crate::fincat::Obj;
use crate::outcome::{Outcome, Tally};
use crate::presheaf::{dependent_product, pullback, section_slots, sub_presheaf, DependentProduct, Presheaf, PresheafMap};
use crate::sample::{random_family, random_presheaf, random_subobject, shuffle_family, Shape};
use crate::universe::{classify_family, realign_presheaf, Classifier, RealignmentProblem, SmallCode, Universe};

fn mask_of(m: &PresheafMap) -> Vec<Vec<bool>> {
    m.category()
        .objects()
        .map(|c| {
            let mut v = vec![false; m.cod().size(c)];
            for &b in m.component(c) {
                v[b] = true;
            }
            v
        })
        .collect()
}

/// Position of each element of a total space `El(codes)` by its base
/// element and point.
fn el_lookup(proj: &PresheafMap, cl: &Classifier) -> Vec<HashMap<(usize, usize), usize>> {
    proj.category()
        .objects()
        .map(|c| (0..proj.dom().size(c)).map(|j| ((proj.apply(c, j), cl.points[c][j]), j)).collect())
        .collect()
}

/// A code `B` over `Γ`, a support `φ ⊆ Γ`, a code `A` over `Γ_φ`, and an
/// isomorphism `El(A) ≅ El(B)|φ` given per element of `El(A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialIsomorph {
    pub context: Presheaf,
    pub b: Vec<Vec<SmallCode>>,
    pub support: Vec<Vec<bool>>,
    pub a: Vec<Vec<SmallCode>>,
    pub iso: Vec<Vec<usize>>,
}

impl PartialIsomorph {
    /// `Γ_φ ↣ Γ`.
    pub fn mono(&self) -> Result<PresheafMap> {
        sub_presheaf(&self.context, &self.support)
    }

    pub fn el_b(&self, u: &Universe, cap: Cap) -> Result<(PresheafMap, Classifier)> {
        u.el_family(&self.context, &self.b, cap)
    }

    pub fn el_a(&self, u: &Universe, cap: Cap) -> Result<(PresheafMap, Classifier)> {
        u.el_family(self.mono()?.dom(), &self.a, cap)
    }

    pub fn validate(&self, u: &Universe, cap: Cap) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidProblem(s.into()));
        let m = self.mono()?;
        for (codes, base) in [(&self.b, &self.context), (&self.a, m.dom())] {
            let cat = base.category();
            for c in cat.objects() {
                if codes[c].len() != base.size(c) {
                    return bad("code table has the wrong length");
                }
                for code in &codes[c] {
                    u.validate(code)?;
                }
            }
            for v in cat.morphisms() {
                for y in 0..base.size(cat.dst(v)) {
                    if codes[cat.src(v)][base.restrict(v, y)] != u.restrict(&codes[cat.dst(v)][y], v) {
                        return bad("codes are not natural");
                    }
                }
            }
        }
        let (fb, _) = self.el_b(u, cap)?;
        let (fa, _) = self.el_a(u, cap)?;
        let iso = PresheafMap::new(fa.dom().clone(), fb.dom().clone(), self.iso.clone())
            .map_err(|e| Error::InvalidProblem(format!("the isomorphism is not natural: {e}")))?;
        if fb.after(&iso)? != m.after(&fa)? {
            return bad("the isomorphism does not lie over the support");
        }
        if !iso.is_mono() || !crate::presheaf::is_cartesian_map(&iso, &fa, &fb, &m)? {
            return bad("the map El(A) → El(B) is not an isomorphism over the support");
        }
        Ok(())
    }
}

/// The realignment problem along `Γ_φ ↣ Γ` for `El(B)`, with partial
/// classifier read off `A` and the isomorphism.
pub fn problem_of(u: &Universe, d: &PartialIsomorph, cap: Cap) -> Result<RealignmentProblem> {
    let m = d.mono()?;
    let (fb, _) = d.el_b(u, cap)?;
    let (_, cla) = d.el_a(u, cap)?;
    let cat = m.category();
    let mut points: Vec<Vec<Option<usize>>> = cat.objects().map(|c| vec![None; fb.dom().size(c)]).collect();
    for c in cat.objects() {
        for (e, &x) in d.iso[c].iter().enumerate() {
            points[c][x] = Some(cla.points[c][e]);
        }
    }
    RealignmentProblem::new(u, m, fb, d.a.clone(), points)
}

/// A code `G` over `Γ` with `G|φ = A` and an isomorphism `El(B) ≅ El(G)`
/// extending the given one, as a classifier of `El(B) → Γ`.
pub fn realignment_structure_apply(u: &Universe, d: &PartialIsomorph, cap: Cap) -> Result<Classifier> {
    d.validate(u, cap)?;
    realign_presheaf(u, &problem_of(u, d, cap)?)
}

/// The strictness law: `G` agrees with `A` on the support as raw codes and
/// the total isomorphism extends the partial one.
pub fn check_structure(u: &Universe, d: &PartialIsomorph, g: &Classifier, cap: Cap) -> Result<Outcome> {
    let (fb, _) = d.el_b(u, cap)?;
    if let Err(e) = g.verify(u, &fb) {
        return Ok(Outcome::fail(format!("not a classifier of El(B): {e}")));
    }
    let m = d.mono()?;
    let (_, cla) = d.el_a(u, cap)?;
    for c in m.category().objects() {
        for (s, &i) in m.component(c).iter().enumerate() {
            if g.codes[c][i] != d.a[c][s] {
                return Ok(Outcome::fail(format!("G differs from A at element {i} of object {c}")));
            }
        }
        for (e, &x) in d.iso[c].iter().enumerate() {
            if g.points[c][x] != cla.points[c][e] {
                return Ok(Outcome::fail(format!("isomorphism differs on El(A) element {e} of object {c}")));
            }
        }
    }
    Ok(Outcome::Pass)
}

/// The partial isomorphism of a realignment problem: the context is the
/// base, the support is the image of the mono, `B` classifies the family
/// canonically. Also returns where each element of the family's domain
/// lands in `El(B)`.
pub fn partial_isomorph_of(u: &Universe, p: &RealignmentProblem, cap: Cap) -> Result<(PartialIsomorph, Vec<Vec<usize>>)> {
    let (m, f) = (&p.mono, &p.family);
    let cat = m.category().clone();
    let gamma = p.base().clone();
    let support = mask_of(m);
    let sub = sub_presheaf(&gamma, &support)?;
    let clf = classify_family(u, f)?;
    let (fb, clb) = u.el_family(&gamma, &clf.codes, cap)?;
    let lb = el_lookup(&fb, &clb);
    let to_b: Vec<Vec<usize>> = cat
        .objects()
        .map(|c| (0..f.dom().size(c)).map(|q| lb[c][&(f.apply(c, q), clf.points[c][q])]).collect())
        .collect();
    let a: Vec<Vec<SmallCode>> = cat
        .objects()
        .map(|c| {
            let pre: HashMap<usize, usize> = m.component(c).iter().enumerate().map(|(a, &b)| (b, a)).collect();
            sub.component(c).iter().map(|b| p.codes[c][pre[b]].clone()).collect()
        })
        .collect();
    let (fa, cla) = u.el_family(sub.dom(), &a, cap)?;
    let iso = cat
        .objects()
        .map(|c| {
            let by_point: HashMap<(usize, usize), usize> = (0..f.dom().size(c))
                .filter_map(|q| p.points[c][q].map(|pt| ((f.apply(c, q), pt), q)))
                .collect();
            (0..fa.dom().size(c))
                .map(|j| to_b[c][by_point[&(sub.apply(c, fa.apply(c, j)), cla.points[c][j])]])
                .collect()
        })
        .collect();
    Ok((
        PartialIsomorph {
            context: gamma,
            b: clf.codes,
            support,
            a,
            iso,
        },
        to_b,
    ))
}

/// Carries a classifier of `El(B)` back to the family of the problem.
pub fn classifier_for_problem(to_b: &[Vec<usize>], g: &Classifier) -> Classifier {
    Classifier {
        codes: g.codes.clone(),
        points: to_b.iter().enumerate().map(|(c, row)| row.iter().map(|&x| g.points[c][x]).collect()).collect(),
    }
}

/// The proposition `J ⊆ Γ`, a code `O` over `Γ_J`, and a code `K` over the
/// total space of `J_*El(O)`.
#[derive(Debug, Clone)]
pub struct GlueInput {
    pub context: Presheaf,
    pub support: Vec<Vec<bool>>,
    pub o: Vec<Vec<SmallCode>>,
    pub k: Vec<Vec<SmallCode>>,
}

/// `J_*El(O) → Γ` with the pieces needed to evaluate its sections.
#[derive(Debug, Clone)]
pub struct Pushforward {
    pub mono: PresheafMap,
    pub o_family: PresheafMap,
    pub o_points: Classifier,
    pub product: DependentProduct,
}

impl Pushforward {
    pub fn presheaf(&self) -> &Presheaf {
        self.product.presheaf()
    }

    /// `x z`: the value of a section over a point of `J` at that point,
    /// as an element of `El(O)`.
    pub fn evaluate(&self, c: Obj, p: usize) -> Option<usize> {
        let (i, values) = self.product.entry(c, p);
        let id = self.mono.category().identity(c);
        section_slots(&self.mono, c, i).iter().position(|&(u, _)| u == id).map(|k| values[k])
    }
}

pub fn pushforward(u: &Universe, gamma: &Presheaf, support: &[Vec<bool>], o: &[Vec<SmallCode>], cap: Cap) -> Result<Pushforward> {
    let mono = sub_presheaf(gamma, support)?;
    let (o_family, o_points) = u.el_family(mono.dom(), o, cap)?;
    let product = dependent_product(&mono, &o_family, cap)?;
    Ok(Pushforward {
        mono,
        o_family,
        o_points,
        product,
    })
}

/// The glued code with `Glue|J = O`, the family `Σ K → Γ`, and the
/// isomorphism `Σ K ≅ El(Glue)` as the points of a classifier.
#[derive(Debug, Clone)]
pub struct Glued {
    pub pushforward: Pushforward,
    pub k_family: PresheafMap,
    pub sigma: PresheafMap,
    pub glue: Classifier,
}

impl Glued {
    pub fn codes(&self) -> &[Vec<SmallCode>] {
        &self.glue.codes
    }
}

/// Whether every fiber of `K` over the part of `J_*O` lying over `J` is a
/// singleton.
pub fn is_connected(u: &Universe, pf: &Pushforward, k: &[Vec<SmallCode>]) -> Option<(Obj, usize)> {
    let support = mask_of(&pf.mono);
    let pmap = &pf.product.map;
    pmap.category().objects().find_map(|c| {
        (0..pmap.dom().size(c))
            .find(|&p| support[c][pmap.apply(c, p)] && u.el_size(&k[c][p]) != 1)
            .map(|p| (c, p))
    })
}

pub fn glue_type(u: &Universe, input: &GlueInput, cap: Cap) -> Result<Glued> {
    let pf = pushforward(u, &input.context, &input.support, &input.o, cap)?;
    if let Some((c, p)) = is_connected(u, &pf, &input.k) {
        return Err(Error::Precondition(format!(
            "K is not J-connected: its fiber over section {p} at `{}` is not a singleton",
            input.context.category().object_name(c)
        )));
    }
    let (k_family, _) = u.el_family(pf.presheaf(), &input.k, cap)?;
    let sigma = pf.product.map.after(&k_family)?;
    if sigma.oversized_fiber(u.bound()).is_some() {
        return Err(Error::BoundOverflow {
            bound: u.bound(),
            context: "Σ of K over the pushforward".into(),
            required: sigma.max_fiber() + 1,
        });
    }
    let cat = sigma.category();
    let support = &input.support;
    let points = cat
        .objects()
        .map(|c| {
            (0..sigma.dom().size(c))
                .map(|e| {
                    support[c][sigma.apply(c, e)].then(|| {
                        let v = pf.evaluate(c, k_family.apply(c, e)).expect("section over J");
                        pf.o_points.points[c][v]
                    })
                })
                .collect()
        })
        .collect();
    let problem = RealignmentProblem::new(u, pf.mono.clone(), sigma.clone(), input.o.clone(), points)?;
    let glue = realign_presheaf(u, &problem)?;
    Ok(Glued {
        pushforward: pf,
        k_family,
        sigma,
        glue,
    })
}

/// `Glue = O z` as raw codes at every point of `J`, and `glue` restricts
/// over `J` to evaluation.
pub fn check_glue(u: &Universe, input: &GlueInput, g: &Glued) -> Outcome {
    if let Err(e) = g.glue.verify(u, &g.sigma) {
        return Outcome::fail(format!("glue is not an isomorphism onto El(Glue): {e}"));
    }
    let pf = &g.pushforward;
    for c in input.context.category().objects() {
        for (s, &i) in pf.mono.component(c).iter().enumerate() {
            if g.glue.codes[c][i] != input.o[c][s] {
                return Outcome::fail(format!("Glue differs from O at element {i} of object {c}"));
            }
        }
        for e in 0..g.sigma.dom().size(c) {
            if !input.support[c][g.sigma.apply(c, e)] {
                continue;
            }
            let v = pf.evaluate(c, g.k_family.apply(c, e)).expect("section over J");
            if g.glue.points[c][e] != pf.o_points.points[c][v] {
                return Outcome::fail(format!("glue is not evaluation at element {e} of object {c}"));
            }
        }
    }
    Outcome::Pass
}

/// A realignment structure built from Glue: `K(x)` is the set of elements
/// of `B` whose restrictions into `J` agree with `x` through the given
/// isomorphism.
pub fn realignment_via_glue(u: &Universe, d: &PartialIsomorph, cap: Cap) -> Result<Classifier> {
    d.validate(u, cap)?;
    let pf = pushforward(u, &d.context, &d.support, &d.a, cap)?;
    let (fb, _) = d.el_b(u, cap)?;
    let eb = fb.dom();
    let cat = d.context.category().clone();
    let pj = pf.presheaf();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::new();
    for c in cat.objects() {
        let mut row = Vec::new();
        for p in 0..pj.size(c) {
            let (i, values) = pf.product.entry(c, p);
            let slots = section_slots(&pf.mono, c, i);
            for b in 0..eb.size(c) {
                if fb.apply(c, b) == i
                    && slots.iter().zip(values).all(|(&(w, _), &v)| eb.restrict(w, b) == d.iso[cat.src(w)][v])
                {
                    row.push((p, b));
                }
            }
        }
        cap.check(row.len(), || "building the connected family".into())?;
        pairs.push(row);
    }
    let index: Vec<HashMap<(usize, usize), usize>> =
        pairs.iter().map(|r| r.iter().enumerate().map(|(j, &x)| (x, j)).collect()).collect();
    let kp = Presheaf::from_fn(cat.clone(), pairs.iter().map(Vec::len).collect(), |w, j| {
        let (p, b) = pairs[cat.dst(w)][j];
        index[cat.src(w)][&(pj.restrict(w, p), eb.restrict(w, b))]
    })?;
    let kmap = PresheafMap::new(kp, pj.clone(), pairs.iter().map(|r| r.iter().map(|x| x.0).collect()).collect())?;
    let clk = classify_family(u, &kmap)?;
    let input = GlueInput {
        context: d.context.clone(),
        support: d.support.clone(),
        o: d.a.clone(),
        k: clk.codes.clone(),
    };
    let glued = glue_type(u, &input, cap)?;
    let (_, clsig) = u.el_family(pj, &input.k, cap)?;
    let sig_index = el_lookup(&glued.k_family, &clsig);
    let by_b: Vec<HashMap<usize, usize>> = pairs.iter().map(|r| r.iter().enumerate().map(|(j, &(_, b))| (b, j)).collect()).collect();
    let points = cat
        .objects()
        .map(|c| {
            (0..eb.size(c))
                .map(|b| {
                    let j = *by_b[c].get(&b).ok_or_else(|| Error::InvalidClassifier("element of B outside Σ K".into()))?;
                    let e = sig_index[c][&(pairs[c][j].0, clk.points[c][j])];
                    Ok(glued.glue.points[c][e])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Classifier {
        codes: glued.glue.codes,
        points,
    })
}

/// Restriction of a classifier of a problem's family to the problem's
/// boundary: codes over the subobject and points over its image.
pub fn boundary(p: &RealignmentProblem, cl: &Classifier) -> (Vec<Vec<SmallCode>>, Vec<Vec<Option<usize>>>) {
    let cat = p.mono.category();
    let image = mask_of(&p.mono);
    let codes = cat
        .objects()
        .map(|c| p.mono.component(c).iter().map(|&b| cl.codes[c][b].clone()).collect())
        .collect();
    let points = cat
        .objects()
        .map(|c| {
            (0..p.family.dom().size(c))
                .map(|q| image[c][p.family.apply(c, q)].then(|| cl.points[c][q]))
                .collect()
        })
        .collect();
    (codes, points)
}

#[derive(Debug, Clone, Default)]
pub struct RoundtripReport {
    pub tally: Tally,
    pub instances: Vec<(String, Outcome)>,
}

/// Solves each problem directly, through its partial isomorphism, and
/// through Glue, and compares the strict boundaries of the three answers.
pub fn external_internal_roundtrip(u: &Universe, problems: &[RealignmentProblem], cap: Cap) -> RoundtripReport {
    let mut report = RoundtripReport::default();
    for (n, p) in problems.iter().enumerate() {
        let outcome = roundtrip_one(u, p, cap).unwrap_or_else(|e| match e {
            Error::CapExceeded { .. } | Error::BoundOverflow { .. } => Outcome::Inconclusive(e.to_string()),
            other => Outcome::Fail(other.to_string()),
        });
        report.tally.record(&outcome);
        report.instances.push((format!("problem {n} over {:?}", p.base().sizes()), outcome));
    }
    report
}

fn roundtrip_one(u: &Universe, p: &RealignmentProblem, cap: Cap) -> Result<Outcome> {
    let direct = realign_presheaf(u, p)?;
    let (d, to_b) = partial_isomorph_of(u, p, cap)?;
    let back = problem_of(u, &d, cap)?;
    let internal = realignment_structure_apply(u, &d, cap)?;
    let o = check_structure(u, &d, &internal, cap)?;
    if !o.is_pass() {
        return Ok(o);
    }
    let glued = realignment_via_glue(u, &d, cap)?;
    let o = check_structure(u, &d, &glued, cap)?;
    if !o.is_pass() {
        return Ok(Outcome::fail(format!("through Glue: {o}")));
    }
    let internal_ext = classifier_for_problem(&to_b, &internal);
    let glued_ext = classifier_for_problem(&to_b, &glued);
    for (name, cl) in [("direct", &direct), ("internal", &internal_ext), ("glue", &glued_ext)] {
        if let Err(e) = cl.verify(u, &p.family) {
            return Ok(Outcome::fail(format!("{name} answer is not cartesian: {e}")));
        }
        if !p.is_extended_by(cl) {
            return Ok(Outcome::fail(format!("{name} answer does not restrict to the partial classifier")));
        }
    }
    let b0 = boundary(p, &direct);
    if boundary(p, &internal_ext) != b0 || boundary(p, &glued_ext) != b0 {
        return Ok(Outcome::fail("boundaries of the three answers differ"));
    }
    let db = boundary(&back, &realign_presheaf(u, &back)?);
    Ok(Outcome::check(db == boundary(&back, &internal), || {
        "the problem recovered from the partial isomorphism is solved with a different boundary".into()
    }))
}

/// A partial isomorphism whose `A` comes from a relabeled copy of the
/// restriction of `El(B)`, so the isomorphism is usually not the identity.
pub fn sample_partial_isomorph<R: Rng + ?Sized>(u: &Universe, shape: Shape, rng: &mut R, cap: Cap) -> Result<PartialIsomorph> {
    let cat = u.category();
    let gamma = random_presheaf(cat, shape, rng);
    let f = random_family(&gamma, u.bound(), shape, rng);
    let b = classify_family(u, &f)?.codes;
    let support = mask_of(&random_subobject(&gamma, 0.5, rng));
    let sub = sub_presheaf(&gamma, &support)?;
    let (fb, _) = u.el_family(&gamma, &b, cap)?;
    let pb = pullback(&sub, &fb, cap)?;
    let (g, shuffle) = shuffle_family(&pb.left, rng);
    let unshuffle = shuffle.inverse().expect("relabeling is invertible");
    let cla = classify_family(u, &g)?;
    let a = cla.codes.clone();
    let (fa, cla_el) = u.el_family(sub.dom(), &a, cap)?;
    let iso = cat
        .objects()
        .map(|c| {
            let by_point: HashMap<(usize, usize), usize> =
                (0..g.dom().size(c)).map(|x| ((g.apply(c, x), cla.points[c][x]), x)).collect();
            (0..fa.dom().size(c))
                .map(|j| {
                    let x = by_point[&(fa.apply(c, j), cla_el.points[c][j])];
                    pb.right.apply(c, unshuffle.apply(c, x))
                })
                .collect()
        })
        .collect();
    let d = PartialIsomorph {
        context: gamma,
        b,
        support,
        a,
        iso,
    };
    d.validate(u, cap)?;
    Ok(d)
}

/// A Glue input whose `K` is the join of a random family over the
/// pushforward with singletons over `J`. Retries until `Σ K` is small.
pub fn sample_glue_input<R: Rng + ?Sized>(u: &Universe, shape: Shape, rng: &mut R, cap: Cap) -> Result<GlueInput> {
    let cat = u.category().clone();
    for _ in 0..64 {
        let gamma = random_presheaf(&cat, shape, rng);
        let support = mask_of(&random_subobject(&gamma, 0.5, rng));
        let sub = sub_presheaf(&gamma, &support)?;
        let of = random_family(sub.dom(), u.bound(), shape, rng);
        let o = classify_family(u, &of)?.codes;
        let pf = pushforward(u, &gamma, &support, &o, cap)?;
        let pj = pf.presheaf().clone();
        let over_j = |c: Obj, p: usize| support[c][pf.product.map.apply(c, p)];
        let h = random_family(&pj, u.bound(), shape, rng);
        let mut elems: Vec<Vec<(bool, usize)>> = Vec::new();
        for c in cat.objects() {
            let mut row: Vec<(bool, usize)> = (0..h.dom().size(c)).filter(|&x| !over_j(c, h.apply(c, x))).map(|x| (false, x)).collect();
            row.extend((0..pj.size(c)).filter(|&p| over_j(c, p)).map(|p| (true, p)));
            elems.push(row);
        }
        let index: Vec<HashMap<(bool, usize), usize>> =
            elems.iter().map(|r| r.iter().enumerate().map(|(j, &x)| (x, j)).collect()).collect();
        let kp = Presheaf::from_fn(cat.clone(), elems.iter().map(Vec::len).collect(), |w, j| {
            let s = cat.src(w);
            match elems[cat.dst(w)][j] {
                (true, p) => index[s][&(true, pj.restrict(w, p))],
                (false, x) => {
                    let p = pj.restrict(w, h.apply(cat.dst(w), x));
                    if over_j(s, p) {
                        index[s][&(true, p)]
                    } else {
                        index[s][&(false, h.dom().restrict(w, x))]
                    }
                }
            }
        })?;
        let kmap = PresheafMap::from_fn(kp, pj.clone(), |c, j| match elems[c][j] {
            (true, p) => p,
            (false, x) => h.apply(c, x),
        })?;
        let k = classify_family(u, &kmap)?.codes;
        let sigma = pf.product.map.after(&kmap)?;
        if sigma.oversized_fiber(u.bound()).is_none() {
            return Ok(GlueInput { context: gamma, support, o, k });
        }
    }
    Err(Error::BoundOverflow {
        bound: u.bound(),
        context: "sampling a Glue input with small Σ".into(),
        required: u.bound() + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::categories;
    use crate::fincat::{interval_category, terminal_category};
    use crate::universe::sample_problem;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn interval(bound: usize) -> Universe {
        Universe::new(&Arc::new(interval_category()), bound).unwrap()
    }

    fn full(x: &Presheaf) -> Vec<Vec<bool>> {
        x.sizes().iter().map(|&n| vec![true; n]).collect()
    }

    #[test]
    fn total_support_returns_a() {
        let u = interval(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = sample_partial_isomorph(&u, Shape::default(), &mut rng, Cap::DEFAULT).unwrap();
        let (fb, _) = d.el_b(&u, Cap::DEFAULT).unwrap();
        d.support = full(&d.context);
        d.a = d.b.clone();
        d.iso = fb.dom().sizes().iter().map(|&n| (0..n).collect()).collect();
        let g = realignment_structure_apply(&u, &d, Cap::DEFAULT).unwrap();
        assert_eq!(g.codes, d.a);
        assert!(check_structure(&u, &d, &g, Cap::DEFAULT).unwrap().is_pass());
    }

    #[test]
    fn empty_support_is_classification() {
        let u = interval(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = sample_partial_isomorph(&u, Shape::default(), &mut rng, Cap::DEFAULT).unwrap();
        d.support = d.context.sizes().iter().map(|&n| vec![false; n]).collect();
        d.a = vec![Vec::new(); 2];
        d.iso = vec![Vec::new(); 2];
        let g = realignment_structure_apply(&u, &d, Cap::DEFAULT).unwrap();
        let (fb, _) = d.el_b(&u, Cap::DEFAULT).unwrap();
        assert_eq!(g, classify_family(&u, &fb).unwrap());
    }

    #[test]
    fn glue_with_total_support_is_o() {
        let u = interval(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gamma = random_presheaf(u.category(), Shape::default(), &mut rng);
        let f = random_family(&gamma, 3, Shape::default(), &mut rng);
        let o = classify_family(&u, &f).unwrap().codes;
        let support = full(&gamma);
        let pf = pushforward(&u, &gamma, &support, &o, Cap::DEFAULT).unwrap();
        let k = u.category().objects().map(|c| vec![u.unit_code(c); pf.presheaf().size(c)]).collect();
        let input = GlueInput { context: gamma, support, o: o.clone(), k };
        let g = glue_type(&u, &input, Cap::DEFAULT).unwrap();
        assert_eq!(g.codes(), &o[..]);
        assert!(check_glue(&u, &input, &g).is_pass());
    }

    #[test]
    fn glue_with_empty_support_classifies_sigma() {
        let u = interval(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gamma = random_presheaf(u.category(), Shape::default(), &mut rng);
        let support: Vec<Vec<bool>> = gamma.sizes().iter().map(|&n| vec![false; n]).collect();
        let pf = pushforward(&u, &gamma, &support, &[vec![], vec![]], Cap::DEFAULT).unwrap();
        assert_eq!(pf.presheaf().sizes(), gamma.sizes());
        let k: Vec<Vec<SmallCode>> = u.category().objects().map(|c| vec![u.unit_code(c); gamma.size(c)]).collect();
        let input = GlueInput { context: gamma, support, o: vec![vec![], vec![]], k };
        let g = glue_type(&u, &input, Cap::DEFAULT).unwrap();
        assert_eq!(g.glue, classify_family(&u, &g.sigma).unwrap());
    }

    #[test]
    fn disconnected_k_is_rejected() {
        let u = Universe::new(&Arc::new(terminal_category()), 3).unwrap();
        let gamma = Presheaf::terminal(u.category());
        let support = vec![vec![true]];
        let o = vec![vec![u.unit_code(0)]];
        let k = vec![vec![u.empty_code(0)]];
        let input = GlueInput { context: gamma, support, o, k };
        assert!(matches!(glue_type(&u, &input, Cap::DEFAULT), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_mono_roundtrip() {
        let u = interval(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sample_problem(&u, Shape::default(), &mut rng);
        let cl = realign_presheaf(&u, &p).unwrap();
        let whole = PresheafMap::identity(p.base());
        let q = RealignmentProblem::from_total(&u, whole, p.family.clone(), &cl).unwrap();
        let r = external_internal_roundtrip(&u, &[q], Cap::DEFAULT);
        assert_eq!(r.tally.pass, 1, "{:?}", r.instances);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn structures_are_strict(which in 0usize..5, seed in any::<u64>()) {
            let (_, cat) = &categories()[which];
            let u = Universe::new(cat, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = sample_partial_isomorph(&u, Shape::default(), &mut rng, Cap::DEFAULT).unwrap();
            let g = realignment_structure_apply(&u, &d, Cap::DEFAULT).unwrap();
            prop_assert!(check_structure(&u, &d, &g, Cap::DEFAULT).unwrap().is_pass());
            let h = realignment_via_glue(&u, &d, Cap::DEFAULT).unwrap();
            prop_assert!(check_structure(&u, &d, &h, Cap::DEFAULT).unwrap().is_pass());
        }

        #[test]
        fn glue_is_strict(which in 0usize..5, seed in any::<u64>()) {
            let (_, cat) = &categories()[which];
            let u = Universe::new(cat, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let input = sample_glue_input(&u, Shape::default(), &mut rng, Cap::DEFAULT).unwrap();
            let g = glue_type(&u, &input, Cap::DEFAULT).unwrap();
            let o = check_glue(&u, &input, &g);
            prop_assert!(o.is_pass(), "{}", o);
        }

        #[test]
        fn roundtrips_agree(which in 0usize..5, seed in any::<u64>()) {
            let (_, cat) = &categories()[which];
            let u = Universe::new(cat, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = sample_problem(&u, Shape::default(), &mut rng);
            let r = external_internal_roundtrip(&u, &[p], Cap::DEFAULT);
            prop_assert_eq!(r.tally.pass, 1, "{:?}", r.instances);
        }
    }
}
