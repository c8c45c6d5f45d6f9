use std::fmt;

/// Result of checking one property on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail(String),
    /// The instance could not be decided within the configured bounds.
    Inconclusive(String),
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }

    pub fn fail(msg: impl Into<String>) -> Self {
        Outcome::Fail(msg.into())
    }

    /// `Pass` when `ok`, otherwise a failure built from `msg`.
    pub fn check(ok: bool, msg: impl FnOnce() -> String) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail(msg())
        }
    }

    /// Keeps the first non-passing outcome.
    pub fn and(self, next: impl FnOnce() -> Outcome) -> Outcome {
        match self {
            Outcome::Pass => next(),
            other => other,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail(_) => "fail",
            Outcome::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            Outcome::Pass => None,
            Outcome::Fail(s) | Outcome::Inconclusive(s) => Some(s),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.detail() {
            None => write!(f, "{}", self.label()),
            Some(d) => write!(f, "{}: {}", self.label(), d),
        }
    }
}

/// Tally of outcomes over a batch of instances.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub first_failure: Option<String>,
}

impl Tally {
    pub fn record(&mut self, o: &Outcome) {
        match o {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail(s) => {
                self.fail += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(s.clone());
                }
            }
            Outcome::Inconclusive(_) => self.inconclusive += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inconclusive
    }
}
