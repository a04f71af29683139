//! Online hierarchical plan recognition.
//!
//! Explains an observed sequence of parameterized actions as the shortest
//! sequence of high-level intentions consistent with a cause-effect
//! knowledge base. Hypotheses are evoked bottom-up from each observation and
//! verified top-down against later ones; completed hypotheses become
//! observations themselves, so hierarchies are recognized in a single
//! left-to-right pass.
//!
//! Modules:
//! - [`kb`]: knowledge-base DSL, validation and first-effect index
//! - [`worldstate`]: initial environment plus chained change records
//! - [`timeline`]: timepoints, hypothesis stores, parsimony pointers
//! - [`engine`]: the online inference session
//! - [`oracle`]: exhaustive chart-based reference for minimal covers
//! - [`generator`]: random demonstrations with known ground truth
//! - [`metrics`]: memory-event recording, lifespans and living curves
//! - [`transcript`]: demonstration, ground-truth and explanation files

pub mod cli;
pub mod engine;
pub mod generator;
pub mod kb;
pub mod metrics;
pub mod oracle;
pub mod sexpr;
pub mod symbol;
pub mod timeline;
pub mod transcript;
pub mod worldstate;

pub use engine::{explain, EngineError, Session, SessionOptions};
pub use kb::{parse_kb, validate_kb, KnowledgeBase};
pub use symbol::Symbol;
pub use timeline::{Explanation, Intent};
pub use transcript::{Action, Step, Transcript};
pub use worldstate::{Change, EnvObject, WorldState};
