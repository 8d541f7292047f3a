use std::fs;
use std::io::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bcfuse_core::align::AlignmentParams;
use bcfuse_core::isocheck::{brute_force_isomorphic, non_iso_check, SubComponent};
use bcfuse_core::pipeline::{parse_decisions, ComponentSource, PipelineInput, Prepared};
use bcfuse_core::resolve::{ActionHistory, HistoryStore, DEFAULT_THRESHOLD};
use bcfuse_core::{parse_bcm, ComponentModel};
use bcfuse_service::{AppState, DEFAULT_PORT};
use chrono::Utc;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bcfuse",
    version,
    about = "Semantic integration of business-component models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align, resolve every conflict and write the merged component.
    Integrate(IntegrateArgs),
    /// Stop after alignment and write the alignment document.
    Align(AlignArgs),
    /// Run the non-isomorphism pre-filter over sub-component pairs.
    Precheck(PrecheckArgs),
    /// Serve the review API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Component model file (.bcm); repeat for each component.
    #[arg(long = "component", value_name = "FILE", required = true)]
    components: Vec<PathBuf>,
    /// Domain ontology (.onto).
    #[arg(long, value_name = "FILE")]
    domain: PathBuf,
    /// Synonym lexicon (.syn).
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Minimum score for anchoring a concept in the domain ontology.
    #[arg(long, default_value_t = AlignmentParams::default().anchor_threshold)]
    anchor_threshold: f64,
    /// Attribute overlap below which equal labels are homonyms.
    #[arg(long, default_value_t = AlignmentParams::default().homonym_attr_jaccard_max)]
    homonym_jaccard: f64,
    /// Weight of lexical similarity in blended scores.
    #[arg(long, default_value_t = AlignmentParams::default().lexical_weight)]
    lexical_weight: f64,
}

#[derive(Args)]
struct HistoryArgs {
    /// Action history file; created on first decision.
    #[arg(long, value_name = "FILE")]
    history: Option<PathBuf>,
    /// Times an action must be chosen in a context before it is recommended.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, value_parser = clap::value_parser!(u32).range(1..))]
    threshold: u32,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    history: HistoryArgs,
    /// Explicit decisions, one `<conflictIndex>\t<action>` per line.
    #[arg(long, value_name = "FILE")]
    decisions: Option<PathBuf>,
    /// Merged component output; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    alignment_out: Option<PathBuf>,
    /// Applied decisions, one `<index>\t<relation>\t<contextKey>\t<action>` per line.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Alignment document output; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrecheckArgs {
    /// Component model file (.bcm); repeat for each component.
    #[arg(long = "component", value_name = "FILE", required = true)]
    components: Vec<PathBuf>,
    /// Sub-component as `Component=ConceptA,ConceptB`; repeatable. Whole
    /// components are compared when omitted.
    #[arg(long = "subset", value_name = "SPEC")]
    subsets: Vec<String>,
    /// Also run the exhaustive isomorphism search.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    #[command(flatten)]
    history: HistoryArgs,
    /// Component model file to open a session with at startup.
    #[arg(long = "component", value_name = "FILE", requires = "domain")]
    components: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    domain: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_input(
    components: &[PathBuf],
    domain: &Path,
    lexicon: Option<&Path>,
    params: AlignmentParams,
) -> Result<PipelineInput> {
    Ok(PipelineInput {
        components: components
            .iter()
            .map(|p| {
                Ok(ComponentSource {
                    origin: p.display().to_string(),
                    text: read(p)?,
                })
            })
            .collect::<Result<_>>()?,
        domain: read(domain)?,
        lexicon: lexicon.map(read).transpose()?,
        params,
    })
}

impl InputArgs {
    fn load(&self) -> Result<PipelineInput> {
        let params = AlignmentParams::new(
            self.anchor_threshold,
            self.homonym_jaccard,
            self.lexical_weight,
        )?;
        load_input(
            &self.components,
            &self.domain,
            self.lexicon.as_deref(),
            params,
        )
    }
}

impl HistoryArgs {
    fn open(&self) -> Result<HistoryStore> {
        Ok(match &self.history {
            Some(path) => HistoryStore::open(path, self.threshold)?,
            None => HistoryStore::in_memory(ActionHistory::new(self.threshold)?),
        })
    }
}

fn integrate(args: &IntegrateArgs) -> Result<()> {
    let input = args.input.load()?;
    let mut store = args.history.open()?;
    let decisions = match &args.decisions {
        Some(p) => parse_decisions(&read(p)?)?,
        None => Vec::new(),
    };
    let mut prepared = Prepared::new(&input, store.history())?;
    if let Some(p) = &args.alignment_out {
        write_output(Some(p), &prepared.alignment_export())?;
    }
    prepared.resolve_batch(&decisions, &mut store, Utc::now)?;
    let done = prepared.finalize()?;
    if let Some(p) = &args.report {
        write_output(Some(p), &done.report_text())?;
    }
    write_output(args.out.as_deref(), &done.bcm)
}

fn align(args: &AlignArgs) -> Result<()> {
    let prepared = Prepared::new(&args.input.load()?, &ActionHistory::default())?;
    write_output(args.out.as_deref(), &prepared.alignment_export())
}

fn precheck(args: &PrecheckArgs) -> Result<()> {
    let models: Vec<ComponentModel> = args
        .components
        .iter()
        .map(|p| parse_bcm(&read(p)?).with_context(|| p.display().to_string()))
        .collect::<Result<_>>()?;
    let find = |name: &str| {
        models
            .iter()
            .find(|m| m.name == name)
            .with_context(|| format!("no component named `{name}`"))
    };
    let mut subs: Vec<(String, SubComponent)> = Vec::new();
    if args.subsets.is_empty() {
        for m in &models {
            subs.push((m.name.clone(), SubComponent::whole(m)?));
        }
    } else {
        for spec in &args.subsets {
            let Some((component, members)) = spec.split_once('=') else {
                bail!("subset `{spec}` must look like Component=ConceptA,ConceptB");
            };
            let members: Vec<&str> = members.split(',').map(str::trim).collect();
            subs.push((spec.clone(), SubComponent::new(find(component)?, members)?));
        }
    }
    let mut out = String::new();
    for i in 0..subs.len() {
        for j in i + 1..subs.len() {
            let (a, sa) = &subs[i];
            let (b, sb) = &subs[j];
            out.push_str(&format!("{a}\t{b}\t{}", non_iso_check(sa, sb)));
            if args.exhaustive {
                let iso = brute_force_isomorphic(sa, sb)?;
                out.push_str(if iso {
                    "\tisomorphic"
                } else {
                    "\tnotIsomorphic"
                });
            }
            out.push('\n');
        }
    }
    write_output(None, &out)
}

fn serve(args: &ServeArgs) -> Result<()> {
    let state = AppState::new(args.history.open()?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        if let Some(domain) = &args.domain {
            let input = load_input(
                &args.components,
                domain,
                args.lexicon.as_deref(),
                AlignmentParams::default(),
            )?;
            let view = state
                .create_session(&input)
                .await
                .map_err(|e| anyhow::anyhow!("{}: {}", e.code, e.message))?;
            println!("session {}", view.id);
        }
        let addr = SocketAddr::new(args.host, args.port);
        println!("listening on http://{addr}");
        bcfuse_service::serve(addr, state).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Integrate(a) => integrate(a),
        Command::Align(a) => align(a),
        Command::Precheck(a) => precheck(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
