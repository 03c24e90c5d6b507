use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use psdef::guard;
use psdef::workbench::cache::{canonical, sha256_hex, ARTIFACT_VERSION};
use psdef::workbench::run::pretty_canonical;
use psdef::workbench::{
    default_conditions, generate_corpus, parse_session, resolve, run_session, verify_theorems_timed, Corpus, CorpusSpec, RunOptions,
};
use psdef::Error;

#[derive(Parser)]
#[command(name = "psdef", version, about = "Exact finite-level workbench for pseudodeformations, Cayley-Hamilton algebras and GMAs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a session and resolve every declaration without running commands.
    Validate,
    /// Run a session and write results.json, summary.txt, provenance.json and timings.json.
    Run,
    /// Generate the pseudo-random test corpus for a seed.
    Corpus,
    /// Run every theorem suite on a corpus (generated from --seed, or read from --input).
    Verify,
    /// Describe what each command of a session computes.
    Explain,
}

#[derive(Args)]
struct Opts {
    /// Session file (validate, run, explain) or corpus file (verify).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Size guard on constructed objects.
    #[arg(long, global = true)]
    max_order: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Allow the dimension-2 census at p = 2.
    #[arg(long, global = true)]
    allow_p2: bool,
    /// Test every representative of each Ext¹ class.
    #[arg(long, global = true)]
    paranoid: bool,
}

impl Opts {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out_dir.clone(),
            cache_dir: self.cache_dir.clone(),
            max_order: self.max_order,
            jobs: self.jobs,
            allow_p2: self.allow_p2.then_some(true),
            paranoid: self.paranoid.then_some(true),
        }
    }

    fn input(&self) -> Result<&Path, Error> {
        self.input.as_deref().ok_or_else(|| Error::Invalid("--input is required".into()))
    }

    /// Guards and thread pool for the commands that do not go through a session.
    fn apply_globals(&self) {
        guard::set_max_order(self.max_order.unwrap_or(guard::DEFAULT_MAX_ORDER));
        guard::set_allow_p2(self.allow_p2);
        guard::set_paranoid(self.paranoid);
        if let Some(n) = self.jobs {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    fn limits(&self) -> serde_json::Value {
        json!({ "max_order": guard::max_order(), "allow_p2": guard::allow_p2(), "paranoid": guard::paranoid() })
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn validate(opts: &Opts) -> Result<(), Error> {
    let text = std::fs::read_to_string(opts.input()?)?;
    let s = parse_session(&text)?;
    resolve(&s)?;
    println!("ok: {} commands, session {}", s.commands.len(), sha256_hex(canonical(&s).as_bytes()));
    Ok(())
}

fn run(opts: &Opts) -> Result<(), Error> {
    let bundle = run_session(opts.input()?, &opts.run_options())?;
    print!("{}", bundle.summary);
    Ok(())
}

fn corpus(opts: &Opts) -> Result<(), Error> {
    opts.apply_globals();
    let corpus = generate_corpus(&CorpusSpec::default_for(opts.seed))?;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    let text = pretty_canonical(&serde_json::to_value(&corpus).expect("corpus serialises"));
    match &opts.out_dir {
        Some(dir) => {
            write(dir, "corpus.json", &text)?;
            println!(
                "{} modules, {} GMAs, {} representations, {} saturated pairs -> {}",
                corpus.modules.len(),
                corpus.gmas.len(),
                corpus.reps.len(),
                corpus.saturated.len(),
                dir.join("corpus.json").display()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Returns whether every suite passed.
fn verify(opts: &Opts) -> Result<bool, Error> {
    opts.apply_globals();
    let corpus: Corpus = match &opts.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::ParseError { line: e.line(), column: e.column(), msg: e.to_string() })?
        }
        None => generate_corpus(&CorpusSpec::default_for(opts.seed))?,
    };
    let conditions = default_conditions();
    let (report, timings) = verify_theorems_timed(&corpus, &conditions);
    let summary = report.summary();
    print!("{summary}");
    if let Some(dir) = &opts.out_dir {
        write(dir, "results.json", &pretty_canonical(&serde_json::to_value(&report).expect("report serialises")))?;
        write(dir, "summary.txt", &summary)?;
        let provenance = json!({
            "artifact_version": ARTIFACT_VERSION,
            "corpus_hash": sha256_hex(canonical(&corpus).as_bytes()),
            "corpus_spec": corpus.spec,
            "corpus_warnings": corpus.warnings,
            "limits": opts.limits(),
        });
        write(dir, "provenance.json", &pretty_canonical(&provenance))?;
        let timings: serde_json::Map<String, serde_json::Value> = timings.into_iter().map(|(k, v)| (k, json!(v))).collect();
        write(dir, "timings.json", &pretty_canonical(&json!({ "suites": timings })))?;
    }
    Ok(report.all_pass)
}

fn explain(opts: &Opts) -> Result<(), Error> {
    let text = std::fs::read_to_string(opts.input()?)?;
    let s = parse_session(&text)?;
    resolve(&s)?;
    println!("session over p = {} with {} commands", s.prime, s.commands.len());
    for (i, cmd) in s.commands.iter().enumerate() {
        println!("[{i}] {}: {}", cmd.name(), cmd.describe());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Validate => validate(&cli.opts).map(|_| true),
        Cmd::Run => run(&cli.opts).map(|_| true),
        Cmd::Corpus => corpus(&cli.opts).map(|_| true),
        Cmd::Verify => verify(&cli.opts),
        Cmd::Explain => explain(&cli.opts).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failures present");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
