//! Resolving models, contexts and search limits from command-line input.

use std::fs;
use std::path::Path;

use causet::corpus::{fixture_source, load_fixture, Fixture, NEGATIVE_SOURCES};
use causet::dsl::{parse_context, parse_model_bytes, DiagnosticKind, DslError, ModelDocument};
use causet::{Context, SearchLimits};

pub const MAX_VARS_ENV: &str = "CAUSET_MAX_VARS";
pub const BUILTIN_PREFIX: &str = "builtin:";

/// A failed command: what to print on standard error and the exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub message: String,
}

impl Failure {
    pub fn error(message: impl Into<String>) -> Self {
        Failure {
            status: 2,
            message: message.into(),
        }
    }
}

pub struct Loaded {
    /// Fixture name or file path, used in reports.
    pub label: String,
    pub document: ModelDocument,
    pub fixture: Option<Fixture>,
}

/// Model input that failed to parse, with its diagnostics.
pub struct Rejected {
    pub label: String,
    pub error: DslError,
}

pub enum Source<'a> {
    Builtin(&'a str),
    File(&'a Path),
}

impl<'a> Source<'a> {
    /// A positional `builtin:NAME` is the same as `--builtin NAME`.
    pub fn from_args(path: Option<&'a str>, builtin: Option<&'a str>) -> Result<Self, Failure> {
        match (path, builtin) {
            (Some(_), Some(_)) => Err(Failure::error("give either a model file or --builtin, not both")),
            (None, None) => Err(Failure::error("no model given; pass a file or --builtin NAME")),
            (None, Some(name)) => Ok(Source::Builtin(name)),
            (Some(p), None) => Ok(Source::from_positional(p)),
        }
    }

    pub fn from_positional(p: &'a str) -> Self {
        match p.strip_prefix(BUILTIN_PREFIX) {
            Some(name) => Source::Builtin(name),
            None => Source::File(Path::new(p)),
        }
    }
}

/// Loads a model. I/O problems and unknown fixtures are failures; parse and
/// validation diagnostics come back as [`Rejected`] so callers can decide
/// how to report them.
pub fn load(source: &Source) -> Result<Result<Loaded, Rejected>, Failure> {
    match source {
        Source::Builtin(name) => {
            let fixture = load_fixture(name).map_err(|e| Failure::error(e.to_string()))?;
            Ok(Ok(Loaded {
                label: fixture.name.clone(),
                document: fixture.document.clone(),
                fixture: Some(fixture),
            }))
        }
        Source::File(path) => {
            let label = path.display().to_string();
            let bytes = fs::read(path).map_err(|e| Failure::error(format!("cannot read {label}: {e}")))?;
            Ok(match parse_model_bytes(&bytes) {
                Ok(document) => Ok(Loaded {
                    label,
                    document,
                    fixture: None,
                }),
                Err(error) => Err(Rejected { label, error }),
            })
        }
    }
}

/// Loads a model that must be valid; any diagnostic is a failure.
pub fn load_valid(source: &Source) -> Result<Loaded, Failure> {
    load(source)?.map_err(|r| Failure::error(render_diagnostics(&r)))
}

pub fn render_diagnostics(r: &Rejected) -> String {
    r.error
        .diagnostics
        .iter()
        .map(|d| format!("{}:{d}", r.label))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn is_semantic(r: &Rejected) -> bool {
    r.error.kind() == DiagnosticKind::Semantic
}

/// Source text of a built-in fixture, including the deliberately broken
/// ones kept for validation demos.
pub fn builtin_source(name: &str) -> Result<String, Failure> {
    if let Some((_, text)) = NEGATIVE_SOURCES.iter().find(|(n, _)| *n == name) {
        return Ok((*text).to_owned());
    }
    fixture_source(name).map_err(|e| Failure::error(e.to_string()))
}

/// Builds the context from `--context` values. Each value is a list of
/// `NAME=VALUE` pairs and all values are joined; a single value without `=`
/// names a context of a built-in fixture. With no values, fixtures use their
/// first context and models without exogenous variables the empty one.
pub fn context(loaded: &Loaded, args: &[String]) -> Result<(Context, Option<String>), Failure> {
    let sig = loaded.document.signature();
    if args.is_empty() {
        if let Some(f) = &loaded.fixture {
            let nc = f.default_context();
            return Ok((nc.context.clone(), Some(nc.name.clone())));
        }
    }
    if let [name] = args {
        if !name.contains('=') && !name.trim().is_empty() {
            let named = loaded.fixture.as_ref().and_then(|f| f.context(name.trim()));
            return match named {
                Some(c) => Ok((c.clone(), Some(name.trim().to_owned()))),
                None => Err(Failure::error(format!(
                    "`{name}` is neither NAME=VALUE pairs nor a named context of {}{}",
                    loaded.label,
                    named_contexts(loaded)
                ))),
            };
        }
    }
    let text = args.join(",");
    parse_context(&text, sig)
        .map(|c| (c, None))
        .map_err(|e| Failure::error(format!("bad context for {}: {e}", loaded.label)))
}

fn named_contexts(loaded: &Loaded) -> String {
    match &loaded.fixture {
        Some(f) => format!(
            " (named contexts: {})",
            f.contexts.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
        ),
        None => String::new(),
    }
}

/// Search limits, with the endogenous cap taken from `CAUSET_MAX_VARS` when
/// set.
pub fn limits() -> Result<SearchLimits, Failure> {
    limits_from(std::env::var(MAX_VARS_ENV).ok().as_deref())
}

fn limits_from(value: Option<&str>) -> Result<SearchLimits, Failure> {
    let mut limits = SearchLimits::default();
    if let Some(v) = value {
        limits.max_endogenous = v
            .trim()
            .parse()
            .map_err(|_| Failure::error(format!("{MAX_VARS_ENV} must be a non-negative integer, got `{v}`")))?;
    }
    Ok(limits)
}
