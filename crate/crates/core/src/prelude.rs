//! Bundled declaration scripts.

/// The terminal object, products, exponentials, natural numbers, coproducts,
/// lists and infinite lists, with `0` and `s` as the constructors of `nat`.
pub const TRANSCRIPT: &str = include_str!("../prelude/transcript.cpl");

/// Ten example objects, including the initial object `0`, `conat` and the
/// automaton object `dyn'`. Here `nat` uses `zero` and `succ`.
pub const OBJECTS: &str = include_str!("../prelude/objects.cpl");

use crate::session::Session;

/// Runs a script in a fresh session, returning the collected diagnostics on
/// failure.
pub fn load(script: &str) -> Result<Session, String> {
    let mut session = Session::new();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    session.run_script(script, "prelude", &mut out, &mut err);
    if session.diagnostics() > 0 {
        return Err(String::from_utf8_lossy(&err).into_owned());
    }
    Ok(session)
}
