use std::io::{ErrorKind, Read as _, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modelcc::binder::{apply_semantics, instantiate, resolve_references};
use modelcc::disambiguation::unique_tree;
use modelcc::gallery::{self, constant, eval_semantics};
use modelcc::text::read_model;
use modelcc::{Error, Language, Mode};

#[derive(Parser)]
#[command(name = "modelcc", version, about = "Parsers derived from annotated abstract syntax models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse input and print its abstract syntax graph.
    Parse(ParseArgs),
    /// Print the derived grammar.
    Grammar(ModelArgs),
    /// Print the token graph of an input.
    Tokens {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Run the built-in example corpora.
    Gallery {
        /// Only this entry.
        name: Option<String>,
    },
    /// Check a model and report every problem.
    Validate(ModelArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Model file (.mcc).
    #[arg(long, short = 'm')]
    model: Option<PathBuf>,
    /// One of the gallery models.
    #[arg(long, short = 'b')]
    builtin: Option<String>,
}

#[derive(Args)]
struct InputArgs {
    /// Inline input text.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    text: Option<String>,
    /// Input file; standard input when neither this nor -e is given.
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    AsgJson,
    TreeText,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Off,
    Post,
    Inline,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "asg-json")]
    format: Format,
    /// Print every interpretation instead of failing on ambiguity.
    #[arg(long)]
    all: bool,
    /// Most interpretations printed with --all.
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// How disambiguation rules are applied.
    #[arg(long, value_enum, default_value = "inline")]
    mode: ModeArg,
    #[arg(long)]
    dump_forest: bool,
    #[arg(long)]
    dump_tokens: bool,
    /// Evaluate the result with the named semantics (`eval`).
    #[arg(long)]
    eval: Option<String>,
    /// Register a constant `name=value` before parsing.
    #[arg(long, value_name = "NAME=VALUE")]
    define: Vec<String>,
}

enum Failure {
    Usage(String),
    Model(String),
    Pipeline(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e)
    }
}

/// Writes to standard output; a closed pipe ends the process quietly.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: standard output: {e}");
        std::process::exit(1);
    }
}

fn load(args: &ModelArgs) -> Result<Language, Failure> {
    match (&args.model, &args.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Model(format!("{}: {e}", path.display())))?;
            let doc = read_model(&text).map_err(|e| Failure::Model(e.diagnostics(&path.display().to_string())))?;
            Ok(Language::new(doc.model)?)
        }
        (None, Some(name)) => {
            let entry = gallery::entry(name).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown builtin `{name}`; available: {}",
                    gallery::names().collect::<Vec<_>>().join(", ")
                ))
            })?;
            Ok(entry.language()?)
        }
        (None, None) => Err(Failure::Usage("one of --model or --builtin is required".into())),
    }
}

fn read_input(args: &InputArgs) -> Result<String, Failure> {
    match (&args.text, &args.file) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(path)) => {
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        (None, None) => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn parse_cmd(args: &ParseArgs) -> Result<(), Failure> {
    let language = load(&args.model)?;
    let input = read_input(&args.input)?;
    let mut table = language.symbol_table();
    for d in &args.define {
        let (name, value) = d
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--define expects NAME=VALUE, got `{d}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--define {name}: `{value}` is not a number")))?;
        table.register(constant(name.trim(), value)).map_err(Error::from)?;
    }
    let semantics = match args.eval.as_deref() {
        None => None,
        Some("eval") => Some(eval_semantics()),
        Some(other) => return Err(Failure::Usage(format!("unknown semantics `{other}`; available: eval"))),
    };
    if args.dump_tokens {
        let tokens = language.tokenize(&input).map_err(Error::from)?;
        emit(&tokens.dump(language.grammar()));
    }
    let mode = match args.mode {
        ModeArg::Off => Mode::Off,
        ModeArg::Post => Mode::Post,
        ModeArg::Inline => Mode::Inline,
    };
    let parsed = language.parse_forest(&input, mode)?;
    if args.dump_forest {
        emit(&parsed.forest.dump(language.grammar()));
    }
    let trees = if args.all {
        let list = parsed.forest.enumerate_trees(args.limit);
        if list.more {
            eprintln!("note: showing the first {} interpretations", args.limit);
        }
        list.trees
    } else {
        vec![unique_tree(&parsed.forest, language.grammar(), &parsed.tokens).map_err(Error::from)?]
    };
    let grammar = language.grammar();
    for tree in &trees {
        if matches!(args.format, Format::TreeText) && semantics.is_none() {
            emit(&format!("{}\n", tree.render(grammar, &parsed.tokens)));
            continue;
        }
        let asg = instantiate(tree, grammar, &parsed.tokens, language.model()).map_err(Error::from)?;
        let asg = resolve_references(asg, &table).map_err(Error::from)?;
        match &semantics {
            Some(s) => emit(&format!("{}\n", apply_semantics(&asg, s).map_err(Error::from)?)),
            None => emit(&format!("{asg}\n")),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Parse(args) => parse_cmd(&args).map(|_| true),
        Command::Grammar(m) => {
            emit(&load(&m)?.grammar().dump());
            Ok(true)
        }
        Command::Tokens { model, input } => {
            let language = load(&model)?;
            let text = read_input(&input)?;
            let tokens = language.tokenize(&text).map_err(Error::from)?;
            emit(&tokens.dump(language.grammar()));
            Ok(true)
        }
        Command::Gallery { name } => {
            let entries: Vec<_> = match name {
                Some(n) => vec![gallery::entry(&n).ok_or_else(|| Failure::Usage(format!("unknown gallery entry `{n}`")))?],
                None => gallery::ENTRIES.iter().collect(),
            };
            let mut ok = true;
            for e in entries {
                let report = gallery::run_gallery(e);
                ok &= report.passed();
                emit(&report.to_string());
            }
            Ok(ok)
        }
        Command::Validate(m) => {
            let language = load(&m)?;
            emit(&format!("ok: {} elements, {} productions\n", language.model().elements.len(), language.grammar().productions.len()));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(6),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Model(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
