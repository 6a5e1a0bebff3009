//! Interactive session state and command execution.

use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::env::{DeclError, Environment};
use crate::expr::Expr;
use crate::fexpr::FExpr;
use crate::infer::{expand_functors, infer, MorphismType, TypeError};
use crate::reduce::{Canonical, ReduceError, Reducer, TraceLine, DEFAULT_FUEL};
use crate::syntax::{parse_command, resolve, Command, ParseError, ResolveError, SExpr};

/// Prompt shown when a new command is expected.
pub const PROMPT: &str = "cpl>";
/// Prompt shown inside an edit buffer.
pub const CONTINUATION_PROMPT: &str = "| ";

/// Any diagnostic the interpreter reports.
#[derive(Debug, Error)]
pub enum CplError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Decl(#[from] DeclError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("`{expr}` is not an element: its type {ty} does not start at the terminal object")]
    NotElement { expr: String, ty: String },
    #[error("no terminal object is declared; declare `right object 1 with !` first")]
    NoTerminal,
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("text after `;` in an edit buffer: `{0}`")]
    TrailingText(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
}

/// Whether the command loop should continue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Quit,
}

/// The interpreter state: environment, last result and settings.
#[derive(Clone, Debug)]
pub struct Session {
    env: Environment,
    it: Option<Expr>,
    trace: bool,
    fuel: u64,
    buffer: Option<String>,
    diagnostics: usize,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Session {
        Session {
            env: Environment::new(),
            it: None,
            trace: false,
            fuel: DEFAULT_FUEL,
            buffer: None,
            diagnostics: 0,
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Session {
        self.fuel = fuel;
        self
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// The result of the last successful `simp`.
    pub fn it(&self) -> Option<&Expr> {
        self.it.as_ref()
    }

    pub fn trace(&self) -> bool {
        self.trace
    }

    /// Number of diagnostics reported through [`Session::process_line`].
    pub fn diagnostics(&self) -> usize {
        self.diagnostics
    }

    pub fn prompt(&self) -> &'static str {
        if self.buffer.is_some() {
            CONTINUATION_PROMPT
        } else {
            PROMPT
        }
    }

    /// Feeds one input line, executing a command once one is complete.
    pub fn feed_line(
        &mut self,
        line: &str,
        out: &mut dyn Write,
        err: &mut dyn Write,
    ) -> Result<Flow, CplError> {
        if let Some(buf) = self.buffer.as_mut() {
            buf.push_str(line);
            buf.push('\n');
            return match line.find(';') {
                Some(_) => self.close_buffer(out, err),
                None => Ok(Flow::Continue),
            };
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return Ok(Flow::Continue);
        }
        let first = trimmed
            .split(|c: char| c.is_whitespace())
            .next()
            .unwrap_or("");
        if (first == "left" || first == "right") && !trimmed.contains(';') {
            self.buffer = Some(format!("{line}\n"));
            return Ok(Flow::Continue);
        }
        match parse_command(line)? {
            Command::Edit => {
                self.buffer = Some(String::new());
                Ok(Flow::Continue)
            }
            cmd => self.execute(cmd, out, err),
        }
    }

    fn close_buffer(&mut self, out: &mut dyn Write, err: &mut dyn Write) -> Result<Flow, CplError> {
        let text = self.buffer.take().expect("buffer open");
        let cut = text.find(';').expect("terminator present");
        let rest = text[cut + 1..].trim();
        if !rest.is_empty() {
            return Err(CplError::TrailingText(rest.to_string()));
        }
        let cmd = parse_command(&text[..cut])?;
        self.execute(cmd, out, err)
    }

    /// Feeds a line and reports any diagnostic on `err`, prefixed by `origin`.
    pub fn process_line(
        &mut self,
        line: &str,
        origin: Option<&str>,
        out: &mut dyn Write,
        err: &mut dyn Write,
    ) -> Flow {
        match self.feed_line(line, out, err) {
            Ok(flow) => flow,
            Err(e) => {
                self.diagnostics += 1;
                let _ = match origin {
                    Some(o) => writeln!(err, "{o}: error: {e}"),
                    None => writeln!(err, "error: {e}"),
                };
                Flow::Continue
            }
        }
    }

    /// Runs a whole script, one line at a time.
    pub fn run_script(
        &mut self,
        text: &str,
        name: &str,
        out: &mut dyn Write,
        err: &mut dyn Write,
    ) -> Flow {
        for (i, line) in text.lines().enumerate() {
            let origin = format!("{name}:{}", i + 1);
            if self.process_line(line, Some(&origin), out, err) == Flow::Quit {
                return Flow::Quit;
            }
        }
        if self.buffer.take().is_some() {
            self.diagnostics += 1;
            let _ = writeln!(err, "{name}: error: unterminated edit buffer (missing `;`)");
        }
        Flow::Continue
    }

    /// Loads a script file.
    pub fn load_file(
        &mut self,
        path: &Path,
        out: &mut dyn Write,
        err: &mut dyn Write,
    ) -> Result<Flow, CplError> {
        let text = std::fs::read_to_string(path).map_err(|source| CplError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(self.run_script(&text, &path.display().to_string(), out, err))
    }

    /// Executes a parsed command. The session is unchanged when an error is
    /// returned.
    pub fn execute(
        &mut self,
        cmd: Command,
        out: &mut dyn Write,
        err: &mut dyn Write,
    ) -> Result<Flow, CplError> {
        match cmd {
            Command::Edit => {
                self.buffer = Some(String::new());
            }
            Command::Declare(d) => {
                let env = self.env.declare_object(&d)?;
                let info = env.object(&d.name).expect("just declared");
                let _ = writeln!(out, "{}", info.defined_message());
                self.env = env;
            }
            Command::Let { name, expr } => {
                let e = resolve(&expr, &self.env, self.it.as_ref())?;
                let ty = infer(&e, &self.env)?.ty;
                let env = self.env.bind_let(&name, e, ty.clone())?;
                let _ = writeln!(out, "{name} : {ty} defined");
                self.env = env;
            }
            Command::Show(expr) => {
                let e = resolve(&expr, &self.env, self.it.as_ref())?;
                let ty = infer(&e, &self.env)?.ty;
                let _ = writeln!(out, "{e}\n    : {ty}");
            }
            Command::Simp { expr, full } => {
                let (result, ty) = self.simp(&expr, full, out)?;
                let _ = writeln!(out, "{result}\n    :{ty}");
                self.it = Some(result.to_expr());
            }
            Command::Set { option, value } => match option.as_str() {
                "trace" => self.trace = value,
                _ => return Err(CplError::UnknownOption(option)),
            },
            Command::Quit => return Ok(Flow::Quit),
            Command::Load(path) => return self.load_file(Path::new(&path), out, err),
        }
        Ok(Flow::Continue)
    }

    /// Type-checks and reduces an element, streaming trace lines to `out`.
    fn simp(
        &self,
        expr: &SExpr,
        full: bool,
        out: &mut dyn Write,
    ) -> Result<(Canonical, MorphismType), CplError> {
        let e = resolve(expr, &self.env, self.it.as_ref())?;
        let ty = element_type(&e, &self.env)?;
        let e = expand_functors(&e, &self.env)?;
        let mut reducer = Reducer::new(&self.env).with_fuel(self.fuel);
        if self.trace {
            reducer = reducer.with_trace(|l: &TraceLine| {
                let _ = writeln!(out, "{l}");
            });
        }
        let result = if full {
            reducer.full(&e, Canonical::id())?
        } else {
            reducer.lazy(&e, Canonical::id())?
        };
        Ok((result, ty))
    }
}

/// The type of an element: the inferred type with its domain unified with
/// the terminal object.
pub fn element_type(e: &Expr, env: &Environment) -> Result<MorphismType, CplError> {
    let terminal = env.terminal().ok_or(CplError::NoTerminal)?;
    let ty = infer(e, env)?.ty;
    ty.with_domain(&FExpr::App(terminal.name.clone(), Vec::new()))
        .map_err(|_| CplError::NotElement {
            expr: e.to_string(),
            ty: ty.to_string(),
        })
}
