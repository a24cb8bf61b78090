//! Version space algebras, bottom-up tree automata, and the linear-time
//! embedding of the former into the latter.
//!
//! ```
//! use vsa_automata::{embed, io};
//!
//! let (mut store, root) =
//!     io::load_vsa("(J 1 f (U 2 (J 3 g (U 4 (J 5 a) (J 6 b) (J 7 c)))) (ref 2))").unwrap();
//! let normalized = store.normalize(root).unwrap();
//! let result = embed::embed(&normalized).unwrap();
//! assert_eq!(result.automaton.num_states(), 3);
//! assert_eq!(result.automaton.enumerate(100).unwrap().len(), 9);
//! ```

pub mod automaton;
pub mod cli;
mod denote;
pub mod embed;
pub mod error;
pub mod io;
pub mod par;
mod sexp;
pub mod term;
pub mod testgen;
pub mod verify;
pub mod vsa;

pub use automaton::{Acyclicity, StateId, TreeAutomaton};
pub use embed::{check_linearity, embed, EmbeddingResult};
pub use error::{Error, Result};
pub use par::Exec;
pub use term::{parse_term, print_term, term_ord, Signature, Symbol, Term};
pub use vsa::{NodeLabel, NormalizedVsa, VsaNode, VsaStore};
