use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building or checking a construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("no composite declared for `{g}` ∘ `{f}`")]
    MissingComposite { g: String, f: String },
    #[error("composite declared for non-composable pair `{g}` ∘ `{f}`")]
    NotComposable { g: String, f: String },
    #[error("composite `{g}` ∘ `{f}` = `{gf}` has the wrong endpoints")]
    IllTypedComposite { g: String, f: String, gf: String },
    #[error("conflicting composites declared for `{g}` ∘ `{f}`")]
    ConflictingComposite { g: String, f: String },
    #[error("identity law fails for `{morphism}`")]
    IdentityLaw { morphism: String },
    #[error("associativity fails on (`{h}`, `{g}`, `{f}`): (h∘g)∘f = `{left}` but h∘(g∘f) = `{right}`")]
    Associativity {
        h: String,
        g: String,
        f: String,
        left: String,
        right: String,
    },
    #[error("functor law violated: {0}")]
    FunctorLaw(String),
    #[error("invalid presheaf: {0}")]
    InvalidPresheaf(String),
    #[error("map is not natural along `{morphism}` at element {element}")]
    NotNatural { morphism: String, element: usize },
    #[error("objects live over different categories")]
    CategoryMismatch,
    #[error("ill-typed diagram: {0}")]
    IllTypedDiagram(String),
    #[error("square does not commute at object `{object}`")]
    NotCommuting { object: String },
    #[error("map is not a monomorphism at object `{object}`")]
    NotMono { object: String },
    #[error("size cap {cap} exceeded while {context}")]
    CapExceeded { cap: usize, context: String },
    #[error("topology axiom `{axiom}` violated: {witness}")]
    TopologyAxiom { axiom: String, witness: String },
    #[error("fiber over {element} has {size} elements, bound is {bound}")]
    FiberTooLarge {
        element: String,
        size: usize,
        bound: usize,
    },
    #[error("bound {bound} too small for {context}: need at least {required}")]
    BoundOverflow {
        context: String,
        bound: usize,
        required: usize,
    },
    #[error("bounds must be strictly increasing, got {lower} and {upper}")]
    BoundsNotOrdered { lower: usize, upper: usize },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid classifying map: {0}")]
    InvalidClassifier(String),
    #[error("invalid realignment problem: {0}")]
    InvalidProblem(String),
    #[error("not a sheaf: {0}")]
    NotASheaf(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Upper bound on the number of elements an enumeration may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cap(pub usize);

impl Cap {
    pub const DEFAULT: Cap = Cap(1_000_000);

    pub fn check(self, count: usize, context: impl FnOnce() -> String) -> Result<()> {
        if count > self.0 {
            Err(Error::CapExceeded {
                cap: self.0,
                context: context(),
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Cap {
    fn default() -> Self {
        Cap::DEFAULT
    }
}
