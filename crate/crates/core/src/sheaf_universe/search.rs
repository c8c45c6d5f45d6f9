//! Exhaustive search for realignment problems along generating monos that
//! the plain sheafified universe cannot solve strictly.

use crate::error::{Cap, Result};
use crate::presheaf::{enumerate_homs, pullback, PresheafMap};

use super::generating::generating_monos;
use super::lifts::{cartesian_lifts, no_constraints};
use super::SheafUniverse;

/// A problem with no strict extension: generator, family over its
/// codomain, partial classifier and partial lift.
#[derive(Debug, Clone)]
pub struct StuckProblem {
    pub generator: usize,
    pub mono: PresheafMap,
    pub family: PresheafMap,
    pub partial: PresheafMap,
    pub lift: PresheafMap,
    /// Classifying maps extending `partial` that were tried.
    pub candidates: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    pub generators: usize,
    pub scanned: usize,
    pub solved: usize,
    /// Problems with an empty boundary among those scanned.
    pub empty_boundary: usize,
    pub stuck: Vec<StuckProblem>,
    /// Whether `budget` stopped the scan early.
    pub truncated: bool,
}

impl SearchReport {
    pub fn summary(&self) -> String {
        let tail = if self.truncated { ", truncated by budget" } else { "" };
        if self.stuck.is_empty() {
            format!("{} problems over {} generators, none found{tail}", self.scanned, self.generators)
        } else {
            format!(
                "{} problems over {} generators, {} without a strict extension{tail}",
                self.scanned,
                self.generators,
                self.stuck.len()
            )
        }
    }
}

/// Scans problems along every generating mono against `i*El`, up to
/// `budget` problems, searching all classifying maps for a strict
/// extension of each.
pub fn u8_search(h: &SheafUniverse, budget: usize, cap: Cap) -> Result<SearchReport> {
    let gens = generating_monos(h.site(), cap)?;
    let ty = &h.ty().sheaf;
    let generic = h.generic();
    let mut report = SearchReport {
        generators: gens.len(),
        ..SearchReport::default()
    };
    'outer: for (g, gen) in gens.iter().enumerate() {
        let (a, b) = (gen.mono.dom(), gen.mono.cod());
        let extensions = enumerate_homs(b, ty, cap)?;
        for (f, _) in h.sheaf_families(b, cap)? {
            let pb = pullback(&gen.mono, &f, cap)?;
            for partial in enumerate_homs(a, ty, cap)? {
                let candidates: Vec<&PresheafMap> =
                    extensions.iter().filter(|chi| chi.after(&gen.mono).is_ok_and(|r| r == partial)).collect();
                for lift in cartesian_lifts(&pb.left, generic, &partial, &no_constraints(&pb.left), usize::MAX, cap)? {
                    if report.scanned >= budget {
                        report.truncated = true;
                        break 'outer;
                    }
                    report.scanned += 1;
                    if a.is_empty() {
                        report.empty_boundary += 1;
                    }
                    let mut fixed = no_constraints(&f);
                    for (c, x) in pb.apex.elements() {
                        fixed[c][pb.right.apply(c, x)] = Some(lift.apply(c, x));
                    }
                    let mut found = false;
                    for chi in &candidates {
                        if !cartesian_lifts(&f, generic, chi, &fixed, 1, cap)?.is_empty() {
                            found = true;
                            break;
                        }
                    }
                    if found {
                        report.solved += 1;
                    } else {
                        report.stuck.push(StuckProblem {
                            generator: g,
                            mono: gen.mono.clone(),
                            family: f.clone(),
                            partial: partial.clone(),
                            lift,
                            candidates: candidates.len(),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}
