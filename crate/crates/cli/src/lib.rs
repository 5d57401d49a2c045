//! Command-line orchestration: load → match → rank → report.
//!
//! Exit codes: 0 success with results, 1 success with an empty result,
//! 2 input error (parse, validation, usage), 3 I/O error.

mod explain;
mod render;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qosmatch_core::{
    analyze_component, load_requests, match_all, rank_all, run_eval, Catalog, CatalogError, Error,
    Mode, Ontology, RelevanceJudgments, Request, Warning,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    #[value(name = "match_only")]
    MatchOnly,
    #[value(name = "match_and_rank")]
    MatchAndRank,
}

impl From<EvalMode> for Mode {
    fn from(m: EvalMode) -> Mode {
        match m {
            EvalMode::MatchOnly => Mode::MatchOnly,
            EvalMode::MatchAndRank => Mode::MatchAndRank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Load and validate the given documents, printing diagnostics
    Validate,
    /// Run subsumption matching and print the admitted candidates
    Match,
    /// Match, rank and print the ranked candidates
    Select,
    /// Show the rule evaluation and distance terms for one component
    Explain {
        /// Component name
        component: String,
    },
    /// Compute precision and recall against relevance judgments
    Eval,
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "qosmatch",
    version,
    about = "QoS-aware component matching and ranking"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Ontology document (JSON)
    #[arg(long, global = true)]
    pub ontology: Option<PathBuf>,
    /// Catalog document (JSON)
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Request document (JSON); for `eval`, a single request or an array
    #[arg(long, global = true)]
    pub request: Option<PathBuf>,
    /// Override the request's mu (minimum matched interfaces)
    #[arg(long, global = true)]
    pub mu: Option<u64>,
    /// Override the request's rank threshold
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Relevance judgments document (JSON), for `eval`
    #[arg(long, global = true)]
    pub judgments: Option<PathBuf>,
    /// Evaluation mode for `eval`; both are reported when omitted
    #[arg(long, global = true, value_enum)]
    pub mode: Option<EvalMode>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Error::from(e).into()
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref()
        .ok_or_else(|| Failure::Input(format!("missing required --{flag}")))
}

fn with_path<T, E: Into<Error>>(path: &Path, r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| match Failure::from(e.into()) {
        Failure::Io(msg) => Failure::Io(format!("{}: {msg}", path.display())),
        Failure::Input(msg) => Failure::Input(format!("{}: {msg}", path.display())),
    })
}

struct Session {
    ontology: Ontology,
    warnings: Vec<Warning>,
}

impl Session {
    fn open(config: &RunConfig) -> Result<Self, Failure> {
        let path = required(&config.ontology, "ontology")?;
        Ok(Session {
            ontology: with_path(path, Ontology::from_path(path))?,
            warnings: Vec::new(),
        })
    }

    fn catalog(&mut self, config: &RunConfig) -> Result<Catalog, Failure> {
        let path = required(&config.catalog, "catalog")?;
        let loaded = with_path(path, Catalog::from_path(path, &self.ontology))?;
        self.warnings.extend(loaded.warnings);
        Ok(loaded.value)
    }

    fn apply_overrides(config: &RunConfig, mut request: Request) -> Result<Request, Failure> {
        if let Some(mu) = config.mu {
            request = request.with_mu(mu)?;
        }
        if config.threshold.is_some() {
            request = request.with_threshold(config.threshold)?;
        }
        Ok(request)
    }

    fn request(&mut self, config: &RunConfig) -> Result<Request, Failure> {
        let path = required(&config.request, "request")?;
        let loaded = with_path(path, Request::from_path(path, &self.ontology))?;
        self.warnings.extend(loaded.warnings);
        Self::apply_overrides(config, loaded.value)
    }

    fn requests(&mut self, config: &RunConfig) -> Result<Vec<Request>, Failure> {
        let path = required(&config.request, "request")?;
        let src = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let loaded = with_path(path, load_requests(&src, &self.ontology))?;
        self.warnings.extend(loaded.warnings);
        loaded
            .value
            .into_iter()
            .map(|r| Self::apply_overrides(config, r))
            .collect()
    }
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut warnings = Vec::new();
    let result = dispatch(config, out, &mut warnings);
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
    }
}

fn dispatch(
    config: &RunConfig,
    out: &mut dyn Write,
    warnings: &mut Vec<Warning>,
) -> Result<i32, Failure> {
    let mut session = Session::open(config)?;
    let result = match &config.command {
        Command::Validate => validate(config, &mut session, out),
        Command::Match => cmd_match(config, &mut session, out),
        Command::Select => select(config, &mut session, out),
        Command::Explain { component } => explain(config, &mut session, component, out),
        Command::Eval => eval(config, &mut session, out),
    };
    warnings.append(&mut session.warnings);
    result
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("cannot write output: {e}")))
}

fn validate(
    config: &RunConfig,
    session: &mut Session,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let o = &session.ontology;
    let mut summary = format!(
        "ontology: {} concepts, {} units, {} functions\n",
        o.concepts().count(),
        o.units().units().len(),
        o.functions().len()
    );
    if config.catalog.is_some() {
        let cat = session.catalog(config)?;
        let interfaces: usize = cat.components.iter().map(|c| c.interfaces().count()).sum();
        summary += &format!(
            "catalog: {} components, {} interfaces\n",
            cat.components.len(),
            interfaces
        );
    }
    if config.request.is_some() {
        for r in session.requests(config)? {
            summary += &format!(
                "request {}: {} interfaces, mu {}\n",
                r.name,
                r.interface_count(),
                r.mu
            );
        }
    }
    summary += &format!("OK ({} warnings)\n", session.warnings.len());
    emit(out, &summary)?;
    Ok(EXIT_OK)
}

fn cmd_match(
    config: &RunConfig,
    session: &mut Session,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let catalog = session.catalog(config)?;
    let request = session.request(config)?;
    let sigma = match_all(&session.ontology, &request, &catalog);
    let text = match config.format {
        OutputFormat::Table => render::match_table(&request, &sigma),
        OutputFormat::Json => render::match_json(&request, &sigma),
    };
    emit(out, &text)?;
    Ok(if sigma.is_empty() {
        EXIT_EMPTY
    } else {
        EXIT_OK
    })
}

fn select(config: &RunConfig, session: &mut Session, out: &mut dyn Write) -> Result<i32, Failure> {
    let catalog = session.catalog(config)?;
    let request = session.request(config)?;
    let o = &session.ontology;
    let sigma = match_all(o, &request, &catalog);
    let ranked = rank_all(o, &request, &sigma);
    let text = match config.format {
        OutputFormat::Table => render::select_table(&request, sigma.len(), &ranked),
        OutputFormat::Json => render::select_json(&request, sigma.len(), &ranked),
    };
    emit(out, &text)?;
    Ok(if ranked.is_empty() {
        EXIT_EMPTY
    } else {
        EXIT_OK
    })
}

fn explain(
    config: &RunConfig,
    session: &mut Session,
    component: &str,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let catalog = session.catalog(config)?;
    let request = session.request(config)?;
    let o = &session.ontology;
    let c = catalog
        .component(component)
        .ok_or_else(|| Failure::Input(format!("unknown component '{component}'")))?;
    let analysis = analyze_component(o, &request, c);
    let text = match config.format {
        OutputFormat::Table => explain::text(o, &request, c, &analysis),
        OutputFormat::Json => explain::json(o, &request, c, &analysis),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn eval(config: &RunConfig, session: &mut Session, out: &mut dyn Write) -> Result<i32, Failure> {
    let catalog = session.catalog(config)?;
    let requests = session.requests(config)?;
    let path = required(&config.judgments, "judgments")?;
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let judgments = with_path(path, RelevanceJudgments::from_json(&src))?;
    let modes: Vec<Mode> = match config.mode {
        Some(m) => vec![m.into()],
        None => vec![Mode::MatchOnly, Mode::MatchAndRank],
    };
    let reports = modes
        .into_iter()
        .map(|m| run_eval(&session.ontology, &catalog, &requests, &judgments, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let text = match config.format {
        OutputFormat::Table => render::eval_table(&reports),
        OutputFormat::Json => render::eval_json(&reports),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}
