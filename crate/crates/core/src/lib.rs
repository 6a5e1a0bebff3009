//! An interpreter for the Categorical Programming Language.
//!
//! Data types are declared as left objects (by their constructors) or right
//! objects (by their destructors). Morphism expressions are typed by
//! unification over functorial expressions and elements are evaluated by a
//! lazy and a full reduction machine.
//!
//! ```
//! use cpl_core::session::Session;
//!
//! let mut s = Session::new();
//! let (mut out, mut err) = (Vec::new(), Vec::new());
//! s.run_script(cpl_core::prelude::TRANSCRIPT, "prelude", &mut out, &mut err);
//! s.run_script("simp eval.pair(pr(curry(pi2),curry(s.eval)).pi1,pi2).pair(s.0,s.0)", "input", &mut out, &mut err);
//! assert!(String::from_utf8(out).unwrap().ends_with("s.s.0\n    :1 -> nat\n"));
//! assert!(err.is_empty());
//! ```

pub mod env;
pub mod expr;
pub mod fexpr;
pub mod infer;
pub mod prelude;
pub mod reduce;
pub mod session;
pub mod syntax;
pub mod variance;

/// Interned-by-sharing identifier.
pub type Name = std::sync::Arc<str>;
