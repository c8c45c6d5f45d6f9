//! Small categories used as standard test beds.

use std::sync::Arc;

use crate::error::Cap;
use crate::fincat::{interval_category, terminal_category, validate_category, FiniteCategory, RawCategory};
use crate::site::{validate_named_topology, Site};

/// `a ⇉ b` with arrows `s`, `t`.
pub fn parallel_pair() -> FiniteCategory {
    validate_category(&RawCategory::new(&["a", "b"], &[("s", "a", "b"), ("t", "a", "b")], &[])).expect("valid")
}

/// `a ← c → b` with arrows `p`, `q`.
pub fn span() -> FiniteCategory {
    validate_category(&RawCategory::new(&["a", "b", "c"], &[("p", "c", "a"), ("q", "c", "b")], &[])).expect("valid")
}

/// The commuting square `a → b → d`, `a → c → d` with diagonal `e`.
pub fn commuting_square() -> FiniteCategory {
    validate_category(&RawCategory::new(
        &["a", "b", "c", "d"],
        &[
            ("f", "a", "b"),
            ("g", "a", "c"),
            ("h", "b", "d"),
            ("k", "c", "d"),
            ("e", "a", "d"),
        ],
        &[("h", "f", "e"), ("k", "g", "e")],
    ))
    .expect("valid")
}

/// The five named test categories.
pub fn categories() -> Vec<(&'static str, Arc<FiniteCategory>)> {
    vec![
        ("terminal", Arc::new(terminal_category())),
        ("interval", Arc::new(interval_category())),
        ("parallel-pair", Arc::new(parallel_pair())),
        ("span", Arc::new(span())),
        ("commuting-square", Arc::new(commuting_square())),
    ]
}

/// The interval with `{u}` covering `1`.
pub fn dense_interval() -> Site {
    let cat = Arc::new(interval_category());
    Site::new(validate_named_topology(&cat, &[("1", vec![vec!["u"]])], Cap::DEFAULT).expect("valid topology"))
}

/// The parallel pair with `{s, t}` jointly covering `b`.
pub fn joint_parallel_pair() -> Site {
    let cat = Arc::new(parallel_pair());
    Site::new(validate_named_topology(&cat, &[("b", vec![vec!["s", "t"]])], Cap::DEFAULT).expect("valid topology"))
}

/// Named test sites: the two nontrivial ones and trivial topologies.
pub fn sites() -> Vec<(&'static str, Site)> {
    let cats = categories();
    vec![
        ("dense-interval", dense_interval()),
        ("joint-parallel-pair", joint_parallel_pair()),
        ("terminal-trivial", Site::trivial(&cats[0].1)),
        ("interval-trivial", Site::trivial(&cats[1].1)),
        ("parallel-pair-trivial", Site::trivial(&cats[2].1)),
    ]
}
