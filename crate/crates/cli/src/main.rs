mod render;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use yogyata_core::analyzer::{AnalysisError, SentenceInput};
use yogyata_core::{seed, transliterate, KarakaRole, Mode, Resources, RuleDraft, RuleId, RuleStore, Scheme, StoreError};
use yogyata_service::{Account, Accounts, ServiceConfig};

#[derive(Parser)]
#[command(name = "yogyata", version, about = "Kāraka-yogyatā rules, analysis and annotation service")]
struct Cli {
    /// Directory holding the ontology, lexicon, rule journal and accounts.
    #[arg(long, global = true, env = "YOGYATA_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Permissive)]
    mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Permissive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Permissive => Mode::Permissive,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Write any missing seed files into the data directory and load the seed rules.
    Seed,
    /// Analyze a sentence document (`-` reads stdin).
    Analyze { input: PathBuf },
    /// List, add or delete yogyatā rules.
    #[command(subcommand)]
    Rules(RulesCmd),
    /// Aggregated views: relations of a lexeme, dhātus admitting a kāraka.
    #[command(subcommand)]
    Query(QueryCmd),
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Transliterate text between iast, slp1 and devanagari.
    Translit {
        #[arg(long, default_value = "iast")]
        from: String,
        #[arg(long, default_value = "slp1")]
        to: String,
        text: String,
    },
    /// Export the active rules as JSON lines.
    Export,
    /// Import rules from a JSON-lines file, all or nothing.
    Import { input: PathBuf },
    /// Manage annotator accounts for the HTTP service.
    #[command(subcommand)]
    Account(AccountCmd),
}

#[derive(Subcommand)]
enum RulesCmd {
    List {
        /// L-word surface form.
        #[arg(long)]
        l: Option<String>,
        /// R-word headword.
        #[arg(long)]
        r: Option<String>,
    },
    Add(AddRule),
    Del {
        id: String,
        #[arg(long, env = "YOGYATA_ANNOTATOR", default_value = "cli")]
        annotator: String,
    },
}

#[derive(Args)]
struct AddRule {
    #[arg(long)]
    dhatu: String,
    #[arg(long)]
    prefix: Option<String>,
    #[arg(long)]
    sandhi: Option<String>,
    #[arg(long)]
    artha: Option<String>,
    #[arg(long)]
    headword: String,
    #[arg(long)]
    sense: u32,
    /// Comma-separated, IAST or ASCII (kartā,apādāna or karta,apadana).
    #[arg(long, value_delimiter = ',', required = true)]
    roles: Vec<String>,
    #[arg(long)]
    comment: Option<String>,
    #[arg(long, env = "YOGYATA_ANNOTATOR", default_value = "cli")]
    annotator: String,
}

#[derive(Subcommand)]
enum QueryCmd {
    /// Every kāraka relation recorded for a headword, per L-word and sense.
    Lexeme { headword: String },
    /// Every L-word with a rule granting the role.
    Karaka { role: String },
}

#[derive(Subcommand)]
enum AccountCmd {
    /// Add or replace an annotator; the password is read from stdin.
    Add { name: String },
}

enum Failure {
    Domain(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e.root_cause() {
            StoreError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<yogyata_core::ResourceError> for Failure {
    fn from(e: yogyata_core::ResourceError) -> Self {
        match e {
            yogyata_core::ResourceError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

fn io_err(context: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", context.display()))
}

struct Env {
    resources: Resources,
    store: RuleStore,
}

fn open(dir: &Path) -> Result<Env, Failure> {
    let resources = Resources::load_dir(dir)?;
    let store = resources.open_store(dir)?;
    Ok(Env { resources, store })
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io_err(path))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err(path))
    }
}

struct Out {
    text: String,
}

impl Out {
    fn emit<T: Serialize>(format: Format, value: &T, human: impl FnOnce() -> String) -> Out {
        let text = match format {
            Format::Machine => serde_json::to_string_pretty(value).expect("serializes") + "\n",
            Format::Human => human(),
        };
        Out { text }
    }
}

fn run(cli: Cli) -> Result<Out, Failure> {
    let dir = cli.data_dir.as_path();
    let format = cli.format;
    match cli.command {
        Command::Seed => {
            let written = seed::install(dir).map_err(io_err(dir))?;
            let env = open(dir)?;
            let rules_path = dir.join("rules.jsonl");
            let added = env.store.import_new(&read_input(&rules_path)?)?;
            #[derive(Serialize)]
            struct Report {
                files_written: Vec<&'static str>,
                ontology_tags: usize,
                dhatus: usize,
                prefixes: usize,
                headwords: usize,
                senses: usize,
                rules_added: usize,
                rules_active: usize,
            }
            let lex = &env.resources.lexicon;
            let report = Report {
                files_written: written,
                ontology_tags: env.resources.ontology.len(),
                dhatus: lex.dhatus().count(),
                prefixes: lex.prefixes().len(),
                headwords: lex.lexemes().count(),
                senses: lex.lexemes().map(|l| l.senses.len()).sum(),
                rules_added: added,
                rules_active: env.store.active_count(),
            };
            Ok(Out::emit(format, &report, || {
                format!(
                    "ontology tags {}\ndhātus {}\nprefixes {}\nheadwords {} ({} senses)\nrules {} active ({} added)\n",
                    report.ontology_tags,
                    report.dhatus,
                    report.prefixes,
                    report.headwords,
                    report.senses,
                    report.rules_active,
                    report.rules_added
                )
            }))
        }
        Command::Analyze { input } => {
            let text = read_input(&input)?;
            let sentence: SentenceInput = serde_json::from_str(&text)
                .map_err(|e| Failure::Domain(format!("{}: {e}", input.display())))?;
            let env = open(dir)?;
            let result = env.resources.analyzer().disambiguate(&sentence, &env.store.snapshot(), cli.mode.into());
            match result {
                Ok(d) => Ok(Out::emit(format, &d, || render::analysis(&d, &sentence))),
                Err(AnalysisError::NoAnalysis(report)) if format == Format::Machine => {
                    // The report is the useful part of this failure; print it, then fail.
                    let text = serde_json::to_string_pretty(&serde_json::json!({
                        "error": "no_analysis",
                        "report": report,
                    }))
                    .expect("serializes");
                    println!("{text}");
                    Err(Failure::Domain("every candidate analysis was pruned".into()))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Rules(RulesCmd::List { l, r }) => {
            let env = open(dir)?;
            let rules = env.store.get_rules(l.as_deref(), r.as_deref());
            Ok(Out::emit(format, &rules, || render::rules(&rules)))
        }
        Command::Rules(RulesCmd::Add(add)) => {
            let roles = add
                .roles
                .iter()
                .map(|r| r.parse::<KarakaRole>().map_err(|e| Failure::Usage(e.to_string())))
                .collect::<Result<_, _>>()?;
            let draft = RuleDraft {
                prefix: add.prefix,
                dhatu: add.dhatu,
                sandhi_form: add.sandhi,
                changed_artha: add.artha,
                headword: add.headword,
                sense_id: add.sense,
                roles,
                comment: add.comment,
            };
            let env = open(dir)?;
            let rule = env.store.create_rule(draft, &add.annotator)?;
            Ok(Out::emit(format, &rule, || render::rules(std::slice::from_ref(&rule))))
        }
        Command::Rules(RulesCmd::Del { id, annotator }) => {
            let env = open(dir)?;
            let tomb = env.store.delete_rule(&RuleId(id.clone()), &annotator)?;
            Ok(Out::emit(format, &tomb, || format!("deleted {id} by {}\n", tomb.deleted_by)))
        }
        Command::Query(QueryCmd::Lexeme { headword }) => {
            let env = open(dir)?;
            let rel = env.store.relations_for_lexeme(&headword)?;
            Ok(Out::emit(format, &rel, || render::relations(&headword, &rel, &env.resources.lexicon)))
        }
        Command::Query(QueryCmd::Karaka { role }) => {
            let role: KarakaRole = role.parse().map_err(|e: yogyata_core::karaka::UnknownRole| Failure::Usage(e.to_string()))?;
            let env = open(dir)?;
            let words = env.store.dhatus_for_karaka(role);
            Ok(Out::emit(format, &words, || render::lwords(&words)))
        }
        Command::Serve { config, bind } => {
            let mut cfg = ServiceConfig::load(config.as_deref()).map_err(|e| Failure::Usage(e.to_string()))?;
            cfg.data_dir = dir.to_path_buf();
            if let Some(b) = bind {
                cfg.bind = b;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            rt.block_on(yogyata_service::serve(cfg)).map_err(|e| match e {
                yogyata_service::StartError::Io(_) => Failure::Io(e.to_string()),
                other => Failure::Domain(other.to_string()),
            })?;
            Ok(Out { text: String::new() })
        }
        Command::Translit { from, to, text } => {
            let from: Scheme = from.parse().map_err(|e: yogyata_core::translit::UnknownScheme| Failure::Usage(e.to_string()))?;
            let to: Scheme = to.parse().map_err(|e: yogyata_core::translit::UnknownScheme| Failure::Usage(e.to_string()))?;
            let t = transliterate(&text, from, to);
            Ok(Out::emit(format, &t, || {
                let mut s = format!("{}\n", t.text);
                for f in &t.flags {
                    s.push_str(&format!("passed through {:?} at {}\n", f.ch, f.index));
                }
                s
            }))
        }
        Command::Export => {
            let env = open(dir)?;
            // The export format is already machine-readable in both modes.
            Ok(Out { text: env.store.export_rules() })
        }
        Command::Import { input } => {
            let text = read_input(&input)?;
            let env = open(dir)?;
            let n = env.store.import_rules(&text)?;
            Ok(Out::emit(format, &serde_json::json!({ "imported": n }), || format!("imported {n} rule(s)\n")))
        }
        Command::Account(AccountCmd::Add { name }) => {
            let mut password = String::new();
            std::io::stdin().read_line(&mut password).map_err(io_err(Path::new("stdin")))?;
            let password = password.trim_end_matches(['\r', '\n']);
            if password.is_empty() || name.trim().is_empty() {
                return Err(Failure::Usage("name and password must not be empty".into()));
            }
            let path = ServiceConfig { data_dir: dir.to_path_buf(), ..ServiceConfig::default() }.accounts_path();
            let mut accounts = Accounts::load(&path).map_err(Failure::Domain)?;
            accounts.accounts.retain(|a| a.name != name);
            let salt: String = rand::random::<[u8; 16]>().iter().map(|b| format!("{b:02x}")).collect();
            accounts.accounts.push(Account::new(&name, &salt, password));
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            std::fs::write(&path, accounts.to_toml()).map_err(io_err(&path))?;
            Ok(Out::emit(format, &serde_json::json!({ "account": name }), || format!("account {name} saved\n")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let output = cli.output.clone();
    match run(cli) {
        Ok(out) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &out.text).map_err(io_err(path)),
                None => std::io::stdout().write_all(out.text.as_bytes()).map_err(io_err(Path::new("stdout"))),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(f) => {
                    eprintln!("error: {}", f.message());
                    ExitCode::from(f.code())
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
