//! `causet`: command-line front end for the actual-causation engine.
//!
//! Exit status is 0 for success or an affirmative answer, 1 for a negative
//! answer (not a cause, invalid model, unstable comparison) and 2 for errors.

mod input;
mod report;

use std::io::Write as _;
use std::process::ExitCode;

use causet::corpus::{load_fixture, FIXTURE_NAMES, NEGATIVE_SOURCES};
use causet::dsl::{parse_candidate, parse_effect, parse_formula};
use causet::normality::{enumerate_causes_extended, is_actual_cause_extended_with};
use causet::{
    causality::{enumerate_causes, is_actual_cause_with},
    compare_verdicts, satisfies, BoolFormula, CausalityError, EnumerateOptions, NormalitySemantics,
};
use clap::{Args, Parser, Subcommand};

use input::{Failure, Loaded, Source};
use report::{
    context_settings, json, settings, CauseResult, CauseRow, CausesResult, CompareResult, CompareRow, EvalResult,
    FixtureEntry, Located, Query, ValidateResult, WitnessJson,
};

#[derive(Parser)]
#[command(name = "causet", version, about = "Actual causation in finite structural causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a model parses and is acyclic and well-formed.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a formula such as `[L<-0, ML<-0](F=0)` in a context.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether a conjunction of events is an actual cause of an effect.
    Cause {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        context: ContextArgs,
        /// Candidate, e.g. `L=1` or `A=1 & B=0`.
        #[arg(long = "cause")]
        candidate: String,
        #[arg(long)]
        effect: String,
        #[command(flatten)]
        normality: NormalityArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List every actual cause of an effect up to a number of conjuncts.
    Causes {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        effect: String,
        #[arg(long, default_value_t = 1)]
        max_conjuncts: usize,
        /// Also consider candidates over the effect's own variables.
        #[arg(long)]
        include_effect_variables: bool,
        #[command(flatten)]
        normality: NormalityArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ask the same question of several models and report whether the
    /// verdict is stable.
    Compare {
        /// Model files or `builtin:NAME`, at least two.
        #[arg(required = true, num_args = 2..)]
        models: Vec<String>,
        /// One context per model, in order: `NAME=VALUE` pairs, a named
        /// fixture context, or `-` for the default.
        #[arg(long = "contexts", num_args = 1..)]
        contexts: Vec<String>,
        #[arg(long = "cause")]
        candidate: String,
        #[arg(long)]
        effect: String,
        #[arg(long)]
        json: bool,
    },
    /// Built-in example models.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    /// Names and summaries of the built-in models.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Print the source of a built-in model, e.g. `doctors(5)`.
    Extract { name: String },
}

#[derive(Args)]
struct ModelArgs {
    /// Model file, or `builtin:NAME`.
    path: Option<String>,
    /// Use a built-in model instead of a file.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
}

impl ModelArgs {
    fn source(&self) -> Result<Source<'_>, Failure> {
        Source::from_args(self.path.as_deref(), self.builtin.as_deref())
    }
}

#[derive(Args)]
struct ContextArgs {
    /// Exogenous values such as `U_L=1,U_ML=1`; may be repeated. A single
    /// value without `=` names a context of a built-in model.
    #[arg(long = "context", value_name = "SETTINGS")]
    context: Vec<String>,
}

#[derive(Args)]
struct NormalityArgs {
    /// Apply the normality condition of the model's ranking.
    #[arg(long)]
    extended: bool,
    #[arg(long, requires = "extended", default_value_t = NormalitySemantics::Literal)]
    semantics: NormalitySemantics,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    json: bool,
    /// Show Z and z*, search statistics and rejected attempts.
    #[arg(long, short)]
    verbose: bool,
}

/// What a command produced: text for standard output and the exit status.
struct Done {
    status: u8,
    stdout: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (status, stdout, stderr) = match run(cli.command) {
        Ok(d) => (d.status, d.stdout, None),
        Err(f) => (f.status, String::new(), Some(f.message)),
    };
    // A closed pipe is not worth a panic.
    let _ = std::io::stdout().write_all(stdout.as_bytes());
    if let Some(msg) = stderr {
        let _ = writeln!(std::io::stderr(), "causet: {msg}");
    }
    ExitCode::from(status)
}

fn run(command: Command) -> Result<Done, Failure> {
    match command {
        Command::Validate { model, json } => validate(&model, json),
        Command::Eval {
            model,
            context,
            formula,
            json,
        } => eval(&model, &context, &formula, json),
        Command::Cause {
            model,
            context,
            candidate,
            effect,
            normality,
            output,
        } => cause(&model, &context, &candidate, &effect, &normality, &output),
        Command::Causes {
            model,
            context,
            effect,
            max_conjuncts,
            include_effect_variables,
            normality,
            output,
        } => {
            let mut options = EnumerateOptions::new(max_conjuncts);
            options.exclude_effect_variables = !include_effect_variables;
            causes(&model, &context, &effect, options, &normality, &output)
        }
        Command::Compare {
            models,
            contexts,
            candidate,
            effect,
            json,
        } => compare(&models, &contexts, &candidate, &effect, json),
        Command::Fixtures { action } => fixtures(action),
    }
}

fn emit<T: serde::Serialize>(as_json: bool, value: &T, text: impl FnOnce(&T) -> String) -> String {
    if as_json {
        json(value)
    } else {
        text(value)
    }
}

fn causality_failure(e: CausalityError) -> Failure {
    let mut msg = e.to_string();
    if matches!(e, CausalityError::TooLarge { .. }) {
        msg.push_str(&format!("; set {} to raise the cap", input::MAX_VARS_ENV));
    }
    Failure::error(msg)
}

fn validate(model: &ModelArgs, as_json: bool) -> Result<Done, Failure> {
    let source = model.source()?;
    let (result, status) = match input::load(&source)? {
        Ok(loaded) => {
            let doc = &loaded.document;
            let sig = doc.signature();
            let name = |v| sig.name(v).to_owned();
            let result = ValidateResult {
                command: "validate",
                model: loaded.label.clone(),
                valid: true,
                name: Some(doc.name.clone()),
                exogenous: sig.exogenous_ids().map(name).collect(),
                endogenous: sig.endogenous_ids().map(name).collect(),
                topological_order: doc.model.topological_order().iter().map(|v| name(*v)).collect(),
                edges: doc
                    .model
                    .dependency_graph()
                    .edges
                    .iter()
                    .map(|(a, b)| [name(*a), name(*b)])
                    .collect(),
                ranked: doc.ranking.is_some(),
                violations: Vec::new(),
            };
            (result, 0)
        }
        Err(rejected) if input::is_semantic(&rejected) => {
            let result = ValidateResult {
                command: "validate",
                model: rejected.label.clone(),
                valid: false,
                name: None,
                exogenous: Vec::new(),
                endogenous: Vec::new(),
                topological_order: Vec::new(),
                edges: Vec::new(),
                ranked: false,
                violations: rejected
                    .error
                    .diagnostics
                    .iter()
                    .map(|d| Located {
                        line: d.line,
                        column: d.column,
                        message: d.message.clone(),
                    })
                    .collect(),
            };
            (result, 1)
        }
        Err(rejected) => return Err(Failure::error(input::render_diagnostics(&rejected))),
    };
    Ok(Done {
        status,
        stdout: emit(as_json, &result, report::render_validate),
    })
}

fn eval(model: &ModelArgs, context: &ContextArgs, formula: &str, as_json: bool) -> Result<Done, Failure> {
    let loaded = input::load_valid(&model.source()?)?;
    let (ctx, _) = input::context(&loaded, &context.context)?;
    let sig = loaded.document.signature();
    let f = parse_formula(formula, sig).map_err(|e| Failure::error(format!("bad formula: {e}")))?;
    let value = satisfies(&loaded.document.model, &ctx, &f).map_err(|e| Failure::error(e.to_string()))?;
    let result = EvalResult {
        command: "eval",
        model: loaded.label.clone(),
        context: context_settings(sig, &ctx),
        formula: f.display(sig).to_string(),
        value,
    };
    Ok(Done {
        status: 0,
        stdout: emit(as_json, &result, |r| format!("{}\n", r.value)),
    })
}

fn query(loaded: &Loaded, ctx: &causet::Context, normality: &NormalityArgs) -> Query {
    Query {
        model: loaded.label.clone(),
        context: context_settings(loaded.document.signature(), ctx),
        mode: if normality.extended { "extended" } else { "preliminary" },
        semantics: normality.extended.then(|| normality.semantics.to_string()),
    }
}

fn extended_model(loaded: &Loaded) -> Result<causet::ExtendedCausalModel, Failure> {
    loaded.document.extended().ok_or_else(|| {
        Failure::error(format!("{} has no ranking block, which --extended needs", loaded.label))
    })
}

fn cause(
    model: &ModelArgs,
    context: &ContextArgs,
    candidate: &str,
    effect: &str,
    normality: &NormalityArgs,
    output: &OutputArgs,
) -> Result<Done, Failure> {
    let loaded = input::load_valid(&model.source()?)?;
    let (ctx, _) = input::context(&loaded, &context.context)?;
    let sig = loaded.document.signature();
    let cand = parse_candidate(candidate, sig).map_err(|e| Failure::error(format!("bad candidate: {e}")))?;
    let phi = parse_effect(effect, sig).map_err(|e| Failure::error(format!("bad effect: {e}")))?;
    let limits = input::limits()?;
    let verdict = if normality.extended {
        let ext = extended_model(&loaded)?;
        is_actual_cause_extended_with(&ext, &ctx, &cand, &phi, normality.semantics, &limits)
    } else {
        is_actual_cause_with(&loaded.document.model, &ctx, &cand, &phi, &limits)
    }
    .map_err(causality_failure)?;
    let result = CauseResult::new(
        sig,
        query(&loaded, &ctx, normality),
        &cand,
        phi.display(sig).to_string(),
        &verdict,
    );
    Ok(Done {
        status: if verdict.is_cause { 0 } else { 1 },
        stdout: emit(output.json, &result, |r| report::render_cause(r, output.verbose)),
    })
}

fn causes(
    model: &ModelArgs,
    context: &ContextArgs,
    effect: &str,
    mut options: EnumerateOptions,
    normality: &NormalityArgs,
    output: &OutputArgs,
) -> Result<Done, Failure> {
    let loaded = input::load_valid(&model.source()?)?;
    let (ctx, _) = input::context(&loaded, &context.context)?;
    let sig = loaded.document.signature();
    let phi = parse_effect(effect, sig).map_err(|e| Failure::error(format!("bad effect: {e}")))?;
    options.limits = input::limits()?;
    let found = if normality.extended {
        let ext = extended_model(&loaded)?;
        enumerate_causes_extended(&ext, &ctx, &phi, normality.semantics, &options)
    } else {
        enumerate_causes(&loaded.document.model, &ctx, &phi, &options)
    }
    .map_err(causality_failure)?;
    let result = CausesResult {
        command: "causes",
        query: query(&loaded, &ctx, normality),
        effect: phi.display(sig).to_string(),
        max_conjuncts: options.max_conjuncts,
        causes: found
            .iter()
            .map(|(c, w)| CauseRow {
                candidate: settings(sig, c.conjuncts()),
                witness: WitnessJson::new(sig, w),
            })
            .collect(),
    };
    Ok(Done {
        status: if found.is_empty() { 1 } else { 0 },
        stdout: emit(output.json, &result, |r| report::render_causes(r, output.verbose)),
    })
}

fn compare(
    models: &[String],
    contexts: &[String],
    candidate: &str,
    effect: &str,
    as_json: bool,
) -> Result<Done, Failure> {
    if contexts.len() > models.len() {
        return Err(Failure::error(format!(
            "{} contexts given for {} models",
            contexts.len(),
            models.len()
        )));
    }
    let loaded = models
        .iter()
        .map(|m| input::load_valid(&Source::from_positional(m)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ctxs = Vec::new();
    for (i, l) in loaded.iter().enumerate() {
        let args: Vec<String> = match contexts.get(i).map(String::as_str) {
            None | Some("-") => Vec::new(),
            Some(c) => vec![c.to_owned()],
        };
        ctxs.push(input::context(l, &args)?.0);
    }

    // Read the query against the first model that knows its variables, then
    // keep it by name so each model resolves it against its own signature.
    let mut named = None;
    let mut first_error = None;
    for l in &loaded {
        let sig = l.document.signature();
        match parse_candidate(candidate, sig).and_then(|c| Ok((c, parse_effect(effect, sig)?))) {
            Ok((c, e)) => {
                let pairs: Vec<(String, i64)> =
                    c.conjuncts().iter().map(|(v, x)| (sig.name(*v).to_owned(), *x)).collect();
                let e: BoolFormula<String> = e
                    .try_map_vars(&mut |v| Ok::<_, ()>(sig.name(*v).to_owned()))
                    .expect("mapping names cannot fail");
                named = Some((pairs, e, c.display(sig).to_string(), l.document.signature()));
                break;
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let Some((pairs, phi, cand_text, sig)) = named else {
        return Err(Failure::error(format!(
            "the query fits none of the models: {}",
            first_error.map(|e| e.to_string()).unwrap_or_default()
        )));
    };
    let effect_text = phi
        .resolve(sig)
        .map(|f| f.display(sig).to_string())
        .unwrap_or_else(|_| effect.to_owned());

    let inputs: Vec<_> = loaded.iter().zip(&ctxs).map(|(l, c)| (&l.document.model, c)).collect();
    let table = compare_verdicts(&inputs, &pairs, &phi);
    let rows = table
        .rows
        .iter()
        .zip(&loaded)
        .zip(&ctxs)
        .map(|((row, l), c)| {
            let (is_cause, failed_clause, error) = match &row.verdict {
                Ok(v) => (Some(v.is_cause), v.failed_clause.map(|c| c.to_string()), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            CompareRow {
                model: l.label.clone(),
                context: context_settings(l.document.signature(), c),
                is_cause,
                failed_clause,
                error,
                paths: row.paths.iter().cloned().collect(),
            }
        })
        .collect();
    let result = CompareResult {
        command: "compare",
        candidate: cand_text,
        effect: effect_text,
        stable: table.stable,
        rows,
        topology_changed: table.topology_changed,
    };
    Ok(Done {
        status: if result.stable { 0 } else { 1 },
        stdout: emit(as_json, &result, report::render_compare),
    })
}

fn fixtures(action: FixturesAction) -> Result<Done, Failure> {
    match action {
        FixturesAction::List { json: as_json } => {
            let mut entries = Vec::new();
            for name in FIXTURE_NAMES {
                let f = load_fixture(name).map_err(|e| Failure::error(e.to_string()))?;
                let sig = f.document.signature();
                entries.push(FixtureEntry {
                    name: if *name == "doctors" { "doctors(n)".to_owned() } else { f.name.clone() },
                    summary: f.summary.to_owned(),
                    exogenous: sig.exogenous().len(),
                    endogenous: sig.endogenous().len(),
                    ranked: f.document.ranking.is_some(),
                    contexts: f.contexts.iter().map(|c| c.name.clone()).collect(),
                });
            }
            let text = |entries: &Vec<FixtureEntry>| {
                let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
                let mut out: String = entries
                    .iter()
                    .map(|e| format!("{:<width$}  {}\n", e.name, e.summary))
                    .collect();
                for (name, _) in NEGATIVE_SOURCES {
                    out.push_str(&format!("{name:<width$}  (invalid on purpose; extract only)\n"));
                }
                out
            };
            Ok(Done {
                status: 0,
                stdout: emit(as_json, &entries, text),
            })
        }
        FixturesAction::Extract { name } => Ok(Done {
            status: 0,
            stdout: input::builtin_source(&name)?,
        }),
    }
}
