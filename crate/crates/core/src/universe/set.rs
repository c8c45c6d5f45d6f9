//! The universe of finite sets with fewer than `N` elements: the code `k`
//! names `{0..k-1}`.

use crate::error::{Error, Result};

/// `VEl : VEL → VTY` with `VTY = {0..N-1}` and `VEL = {(k, i) | i < k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetUniverse {
    pub bound: usize,
}

/// A classifying square for `f : Q → B`: a code per element of `B` and, per
/// element of `Q`, its point in `{0..code-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetClassifier {
    pub codes: Vec<usize>,
    pub points: Vec<usize>,
}

/// A classifier given only over a subset `A ↣ B`: a code per element of `A`
/// and points for the elements of `Q` lying over the image of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPartial {
    pub codes: Vec<usize>,
    pub points: Vec<Option<usize>>,
}

impl SetUniverse {
    /// `VEL` as a list of pairs `(k, i)`, ordered lexicographically.
    pub fn elements(&self) -> Vec<(usize, usize)> {
        (0..self.bound).flat_map(|k| (0..k).map(move |i| (k, i))).collect()
    }

    fn fibers(&self, family: &[usize], base: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut sizes = vec![0; base];
        let mut pos = vec![0; family.len()];
        for (q, &b) in family.iter().enumerate() {
            if b >= base {
                return Err(Error::InvalidProblem(format!("element {q} maps outside the base")));
            }
            pos[q] = sizes[b];
            sizes[b] += 1;
        }
        if let Some((b, &k)) = sizes.iter().enumerate().find(|&(_, &k)| k >= self.bound) {
            return Err(Error::FiberTooLarge {
                element: b.to_string(),
                size: k,
                bound: self.bound,
            });
        }
        Ok((sizes, pos))
    }

    /// The canonical classifier: each fiber in carrier order.
    pub fn classify(&self, family: &[usize], base: usize) -> Result<SetClassifier> {
        let (codes, points) = self.fibers(family, base)?;
        Ok(SetClassifier { codes, points })
    }

    /// Extends a partial classifier along `mono : A ↣ B`. Over the image of
    /// `mono` the given code and points are kept; elsewhere the canonical
    /// classifier is used.
    pub fn realign(&self, family: &[usize], base: usize, mono: &[usize], partial: &SetPartial) -> Result<SetClassifier> {
        let (sizes, canonical) = self.fibers(family, base)?;
        let mut preimage: Vec<Option<usize>> = vec![None; base];
        for (a, &b) in mono.iter().enumerate() {
            if b >= base || preimage[b].is_some() {
                return Err(Error::InvalidProblem(format!("element {a} of the subobject is not injectively mapped")));
            }
            preimage[b] = Some(a);
        }
        if partial.codes.len() != mono.len() || partial.points.len() != family.len() {
            return Err(Error::InvalidProblem("partial classifier has the wrong shape".into()));
        }
        let mut seen: Vec<Vec<bool>> = sizes.iter().map(|&k| vec![false; k]).collect();
        let mut points = Vec::with_capacity(family.len());
        for (q, &b) in family.iter().enumerate() {
            match (preimage[b], partial.points[q]) {
                (Some(a), Some(p)) => {
                    if partial.codes[a] != sizes[b] || p >= sizes[b] || seen[b][p] {
                        return Err(Error::InvalidProblem(format!(
                            "partial square over {b} is not a bijection onto its code"
                        )));
                    }
                    seen[b][p] = true;
                    points.push(p);
                }
                (None, None) => points.push(canonical[q]),
                _ => {
                    return Err(Error::InvalidProblem(format!(
                        "element {q} has a point exactly when it lies over the subobject"
                    )))
                }
            }
        }
        let codes = (0..base)
            .map(|b| preimage[b].map_or(sizes[b], |a| partial.codes[a]))
            .collect();
        Ok(SetClassifier { codes, points })
    }
}
