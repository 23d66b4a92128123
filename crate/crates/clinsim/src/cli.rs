//! `clinsim` command line.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use clinsim_core::case_model::{load_case, parse_case};
use clinsim_core::re_toolkit::{
    parse_user_story, prioritize_stories, validate_traceability, Corpus, PriorityWeights, XaiUserStory,
};
use clinsim_core::reference::{cases_dir, re_corpus_dir};
use clinsim_core::supervisor::{parse_action_script, replay, SessionExport};
use clinsim_core::validate_case;

use crate::backend::BackendSpec;
use crate::store::SessionStore;
use crate::wire::WireEnvelope;

#[derive(Debug, Parser)]
#[command(name = "clinsim", version, about = "Clinical scenario simulator with explainable agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clinical case documents.
    #[command(subcommand)]
    Case(CaseCommand),
    /// Offline simulation.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Sessions held by a running server.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Requirements-engineering toolkit.
    #[command(subcommand)]
    Re(ReCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum CaseCommand {
    /// Parse and validate a case file; exits 1 on any error.
    Validate {
        file: PathBuf,
        /// Print diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Run an action script against a case and print the session export.
    Run {
        #[arg(long)]
        case: PathBuf,
        /// Session export, `{"actions": [...]}` or a bare action array.
        #[arg(long)]
        script: PathBuf,
        /// Write the export here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Session id; defaults to the script's, then `sess-0001`.
        #[arg(long)]
        session_id: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SessionCommand {
    /// Fetch a session export from a running server.
    Export {
        session_id: String,
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReCommand {
    /// Run the traceability lint; exits 1 when it reports anything.
    Lint {
        /// Corpus directory; defaults to the bundled corpus.
        dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Rank the corpus stories by weighted priority.
    Prioritize {
        dir: Option<PathBuf>,
        /// JSON file with `clinical_risk`, `learning_value`, `complexity`.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// User-story sentences.
    #[command(subcommand)]
    Story(StoryCommand),
}

#[derive(Debug, Subcommand)]
pub enum StoryCommand {
    /// Parse one sentence against the corpus personas.
    Parse {
        text: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory of case files; defaults to the bundled cases.
    #[arg(long)]
    pub cases: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Case(CaseCommand::Validate { file, json }) => case_validate(&file, json),
        Command::Simulate(SimulateCommand::Run {
            case,
            script,
            out,
            session_id,
        }) => simulate_run(&case, &script, out.as_deref(), session_id),
        Command::Session(SessionCommand::Export { session_id, server, out }) => {
            session_export(&session_id, &server, out.as_deref())
        }
        Command::Re(ReCommand::Lint { dir, json }) => re_lint(dir, json),
        Command::Re(ReCommand::Prioritize { dir, weights, json }) => re_prioritize(dir, weights.as_deref(), json),
        Command::Re(ReCommand::Story(StoryCommand::Parse { text, corpus })) => story_parse(&text, corpus),
        Command::Serve(args) => serve(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn case_validate(file: &Path, json: bool) -> Result<ExitCode> {
    let text = read(file)?;
    let case = match parse_case(&text) {
        Ok(case) => case,
        Err(e) => {
            println!("error: {}: {e}", file.display());
            return Ok(ExitCode::FAILURE);
        }
    };
    let diagnostics = validate_case(&case);
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    if json {
        println!("{}", serde_json::to_string_pretty(&diagnostics)?);
    } else {
        for d in &diagnostics {
            println!("{d}");
        }
        println!(
            "{}: {} error(s), {} warning(s)",
            case.case_id,
            errors,
            diagnostics.len() - errors
        );
    }
    Ok(if errors == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn simulate_run(case_path: &Path, script_path: &Path, out: Option<&Path>, session_id: Option<String>) -> Result<ExitCode> {
    let case = load_case(&read(case_path)?).with_context(|| format!("invalid case {}", case_path.display()))?;
    let script = parse_action_script(&read(script_path)?).with_context(|| format!("invalid script {}", script_path.display()))?;
    if let Some(id) = script.case_id.as_deref() {
        if id != case.case_id {
            bail!("script is for case '{id}', not '{}'", case.case_id);
        }
    }
    let session_id = session_id.or(script.session_id).unwrap_or_else(|| "sess-0001".to_owned());
    let backend = BackendSpec::from_env()?.build();
    let session = replay(session_id, Arc::new(case), backend, &script.actions)?;
    let export = session.export();
    emit(&serde_json::to_string_pretty(&export)?, out)?;
    let score = export
        .report
        .as_ref()
        .map_or_else(|| "no report".to_owned(), |r| format!("score {:.4}", r.total_score));
    eprintln!(
        "{}: {} entries, state {}, {score}",
        export.session_id,
        export.log.len(),
        export.state.as_str()
    );
    Ok(ExitCode::SUCCESS)
}

fn session_export(session_id: &str, server: &str, out: Option<&Path>) -> Result<ExitCode> {
    let url = format!("{}/sessions/{session_id}/export", server.trim_end_matches('/'));
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut resp = agent.get(&url).call().with_context(|| format!("cannot reach {url}"))?;
    let envelope: WireEnvelope<SessionExport> = resp.body_mut().read_json().context("unexpected response body")?;
    match envelope.into_result() {
        Ok(export) => {
            emit(&serde_json::to_string_pretty(&export)?, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => bail!("{}: {}", e.code, e.message),
    }
}

fn load_corpus(dir: Option<PathBuf>) -> Result<Corpus> {
    let dir = dir.unwrap_or_else(re_corpus_dir);
    Corpus::load(&dir).with_context(|| format!("cannot load corpus {}", dir.display()))
}

fn re_lint(dir: Option<PathBuf>, json: bool) -> Result<ExitCode> {
    let corpus = load_corpus(dir)?;
    let diagnostics = validate_traceability(&corpus);
    if json {
        println!("{}", serde_json::to_string_pretty(&diagnostics)?);
    } else {
        for d in &diagnostics {
            println!("{d}");
        }
        println!("{} finding(s)", diagnostics.len());
    }
    Ok(if diagnostics.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn re_prioritize(dir: Option<PathBuf>, weights: Option<&Path>, json: bool) -> Result<ExitCode> {
    let corpus = load_corpus(dir)?;
    let weights: PriorityWeights = match weights {
        Some(path) => serde_json::from_str(&read(path)?).with_context(|| format!("invalid weights {}", path.display()))?,
        None => PriorityWeights::default(),
    };
    let stories = corpus
        .stories
        .iter()
        .map(|s| s.resolve(&corpus).with_context(|| format!("story {}", s.story_id)))
        .collect::<Result<Vec<XaiUserStory>>>()?;
    let ranked = prioritize_stories(&stories, &weights);
    if json {
        println!("{}", serde_json::to_string_pretty(&ranked)?);
    } else {
        for r in &ranked {
            println!("{}\t{}\t{:.2}", r.rank, r.story_id, r.priority);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn story_parse(text: &str, corpus: Option<PathBuf>) -> Result<ExitCode> {
    let corpus = load_corpus(corpus)?;
    match parse_user_story(text, &corpus) {
        Ok(clauses) => {
            println!("{}", serde_json::to_string_pretty(&clauses)?);
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            println!("error[{}]: {e}", e.slot());
            Ok(ExitCode::FAILURE)
        }
    }
}

fn serve(args: ServeArgs) -> Result<ExitCode> {
    let backend = BackendSpec::from_env()?.build();
    let dir = args.cases.unwrap_or_else(cases_dir);
    let store = Arc::new(SessionStore::from_dir(backend, &dir)?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("invalid address {}:{}", args.host, args.port))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!(
            "serving {} case(s) on http://{}",
            store.cases().count(),
            listener.local_addr()?
        );
        crate::api::serve(listener, store, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
