//! `mealy`: command-line front end for the mealy library.
//!
//! Exit codes: 0 on success, 1 when an analysis hits its budget or cannot
//! conclude, 2 on input errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mealy::connectivity::{
    components, degree_report, ComponentReport, ConnectionDegree, DEFAULT_MAX_POWER,
};
use mealy::decide::{check_certificate, decide, DecideError, Evidence, Verdict};
use mealy::harness::{
    classify_family, random_machine, Analysis, CensusError, CensusOptions, FamilySpec, Filters,
    Symmetry,
};
use mealy::mdreduce::{md_reduce, ReductionTrace, Side};
use mealy::minimize::{is_minimal, minimize};
use mealy::portrait::portrait_of;
use mealy::semigroup::{
    enumerate_semigroup, tensor_closure_with_alphabet, ClosureError, SemigroupBudget,
};
use mealy::{dot, format, parse_document, MealyMachine, PowerBudget};

#[derive(Parser)]
#[command(
    name = "mealy",
    version,
    about = "Analyze Mealy automata and the semigroups they generate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    budgets: Budgets,
    /// Also write a DOT rendering of the result to this file.
    #[arg(long, global = true, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Print machines and reports as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct Budgets {
    /// Highest power scanned for disconnection.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_POWER)]
    max_power: usize,
    /// Semigroup enumeration stops past this many elements.
    #[arg(long, global = true, default_value_t = SemigroupBudget::default().max_elements)]
    max_elements: usize,
    /// Longest generator word explored by semigroup enumeration.
    #[arg(long, global = true, default_value_t = SemigroupBudget::default().max_depth)]
    max_depth: usize,
}

impl Budgets {
    fn semigroup(&self) -> SemigroupBudget {
        SemigroupBudget {
            max_elements: self.max_elements,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sizes and structural predicates.
    Info { file: PathBuf },
    /// Nerode-minimal quotient.
    Minimize { file: PathBuf },
    /// Dual machine: states and letters swap roles.
    Dual { file: PathBuf },
    /// Power machine on state words of length N.
    Power { file: PathBuf, n: usize },
    /// md-reduction trace.
    Reduce { file: PathBuf },
    /// Connection degree, with the powers that certify it.
    Degree {
        file: PathBuf,
        /// Highest power scanned; defaults to --max-power.
        #[arg(long)]
        max: Option<usize>,
    },
    /// Portrait of a state word to depth K.
    Portrait {
        file: PathBuf,
        /// State word, names concatenated or separated by spaces.
        word: String,
        #[arg(short, long, default_value_t = 3)]
        k: usize,
    },
    /// Tensor closure over the dual semigroup.
    Closure { file: PathBuf },
    /// Order of the generated semigroup.
    Order {
        file: PathBuf,
        /// List the elements by shortest word.
        #[arg(long)]
        elements: bool,
    },
    /// Finiteness or freeness verdict with a checked certificate.
    Decide {
        file: PathBuf,
        /// Write the verdict with its certificate as JSON.
        #[arg(long, value_name = "PATH")]
        certificate: Option<PathBuf>,
    },
    /// Classify a whole family of machines.
    Census(CensusArgs),
    /// Random machine from a seed.
    Random {
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        letters: usize,
        #[arg(long = "filter", value_enum)]
        filters: Vec<FilterArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    states: usize,
    #[arg(long)]
    letters: usize,
    #[arg(long = "filter", value_enum)]
    filters: Vec<FilterArg>,
    #[arg(long, value_enum, default_value_t = SymmetryArg::Labeled)]
    symmetry: SymmetryArg,
    /// Analyses per machine; md-triviality when none is given.
    #[arg(long = "analysis", value_enum)]
    analyses: Vec<AnalysisArg>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Journal of completed rows, reused when the census is rerun.
    #[arg(long, value_name = "PATH")]
    journal: Option<PathBuf>,
    /// One CSV row per machine.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// JSON summary.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
    /// Count to look for among the symmetry modes.
    #[arg(long)]
    target: Option<usize>,
    #[arg(long, default_value_t = mealy::harness::DEFAULT_MAX_UNIVERSE)]
    max_universe: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Invertible,
    Reversible,
    Bireversible,
    Connected,
    Minimal,
}

fn filters_of(args: &[FilterArg]) -> Filters {
    let mut f = Filters::default();
    for a in args {
        match a {
            FilterArg::Invertible => f.invertible = true,
            FilterArg::Reversible => f.reversible = true,
            FilterArg::Bireversible => f.bireversible = true,
            FilterArg::Connected => f.connected = true,
            FilterArg::Minimal => f.minimal = true,
        }
    }
    f.normalized()
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    Labeled,
    UpToIso,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisArg {
    Md,
    Verdict,
    Degree,
    Order,
}

/// Why a command failed; decides the exit code.
enum Failure {
    /// The analysis ran out of budget or cannot conclude.
    Inconclusive(String),
    /// A partial report for stdout and the reason it is not conclusive.
    Partial {
        report: String,
        reason: String,
    },
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Inconclusive(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Partial { report, reason }) => {
            print!("{report}");
            eprintln!("{reason}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

struct Loaded {
    name: String,
    machine: MealyMachine,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read_input(path)?;
    let doc = parse_document(&text).with_context(|| format!("parsing {}", path.display()))?;
    let name = doc.name.unwrap_or_else(|| {
        path.file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| *s != "-")
            .unwrap_or("machine")
            .to_string()
    });
    Ok(Loaded {
        name,
        machine: doc.machine,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl Cli {
    /// Prints a machine in the selected format and writes its DOT file.
    fn emit_machine(&self, machine: &MealyMachine, name: &str, comments: &str) -> Outcome {
        if let Some(path) = &self.dot {
            write_file(path, &dot::to_dot(machine, name))?;
        }
        Ok(if self.json {
            format::to_json(machine, Some(name)) + "\n"
        } else {
            comments.to_string() + &format::to_text(machine, Some(name))
        })
    }

    fn emit_json(&self, value: &impl serde::Serialize) -> String {
        serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Info { file } => info(cli, &load(file)?),
        Command::Minimize { file } => {
            let m = load(file)?;
            cli.emit_machine(&minimize(&m.machine), &format!("{}_min", m.name), "")
        }
        Command::Dual { file } => {
            let m = load(file)?;
            cli.emit_machine(&m.machine.dual(), &format!("{}_dual", m.name), "")
        }
        Command::Power { file, n } => {
            let m = load(file)?;
            if *n == 0 {
                return Err(Failure::Input(anyhow::anyhow!(
                    "power exponent must be positive"
                )));
            }
            let p = m
                .machine
                .power(*n, &PowerBudget::default())
                .map_err(|e| Failure::Inconclusive(e.to_string()))?;
            cli.emit_machine(&p, &format!("{}_pow{n}", m.name), "")
        }
        Command::Reduce { file } => reduce(cli, &load(file)?),
        Command::Degree { file, max } => {
            degree(cli, &load(file)?, max.unwrap_or(cli.budgets.max_power))
        }
        Command::Portrait { file, word, k } => portrait(cli, &load(file)?, word, *k),
        Command::Closure { file } => closure(cli, &load(file)?),
        Command::Order { file, elements } => order(cli, &load(file)?, *elements),
        Command::Decide { file, certificate } => {
            run_decide(cli, &load(file)?, certificate.as_deref())
        }
        Command::Census(args) => census(cli, args),
        Command::Random {
            states,
            letters,
            filters,
            seed,
        } => {
            if *states == 0 || *letters == 0 {
                return Err(Failure::Input(anyhow::anyhow!(
                    "a machine needs at least one state and one letter"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let m = random_machine(&mut rng, *states, *letters, filters_of(filters));
            cli.emit_machine(&m, &format!("random_{seed}"), "")
        }
    }
}

fn info(cli: &Cli, m: &Loaded) -> Outcome {
    let a = &m.machine;
    let comps = components(a);
    let md_trivial = md_reduce(a).is_trivial();
    if cli.json {
        return Ok(cli.emit_json(&serde_json::json!({
            "name": m.name,
            "states": a.n_states(),
            "letters": a.n_letters(),
            "invertible": a.is_invertible(),
            "reversible": a.is_reversible(),
            "bireversible": a.is_bireversible(),
            "minimal": is_minimal(a),
            "dual_minimal": is_minimal(&a.dual()),
            "components": comps.components,
            "md_trivial": md_trivial,
        })));
    }
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", m.name);
    let _ = writeln!(
        out,
        "states: {} ({})",
        a.n_states(),
        a.state_names().join(" ")
    );
    let _ = writeln!(
        out,
        "letters: {} ({})",
        a.n_letters(),
        a.letter_names().join(" ")
    );
    let _ = writeln!(out, "invertible: {}", yes(a.is_invertible()));
    let _ = writeln!(out, "reversible: {}", yes(a.is_reversible()));
    let _ = writeln!(out, "bireversible: {}", yes(a.is_bireversible()));
    let _ = writeln!(out, "minimal: {}", yes(is_minimal(a)));
    let _ = writeln!(out, "dual minimal: {}", yes(is_minimal(&a.dual())));
    let _ = writeln!(
        out,
        "connected: {} ({} component{})",
        yes(comps.connected),
        comps.components,
        if comps.components == 1 { "" } else { "s" }
    );
    let _ = writeln!(out, "md-trivial: {}", yes(md_trivial));
    if let Some(path) = &cli.dot {
        write_file(path, &dot::to_dot(a, &m.name))?;
    }
    Ok(out)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Primal => "minimize",
        Side::Dual => "minimize dual",
    }
}

fn trace_lines(trace: &ReductionTrace) -> String {
    let mut out = String::new();
    let (n, l) = trace.initial;
    let _ = write!(out, "{n}x{l}");
    for step in &trace.steps {
        let (n, l) = step.after;
        let _ = write!(out, " -[{}]-> {n}x{l}", side_name(step.side));
    }
    out
}

fn reduce(cli: &Cli, m: &Loaded) -> Outcome {
    let trace = md_reduce(&m.machine);
    if cli.json {
        return Ok(cli.emit_json(&trace));
    }
    if let Some(path) = &cli.dot {
        write_file(
            path,
            &dot::to_dot(&trace.result, &format!("{}_reduced", m.name)),
        )?;
    }
    let mut out = String::new();
    for (k, step) in trace.steps.iter().enumerate() {
        let (b0, b1) = step.before;
        let (a0, a1) = step.after;
        let _ = writeln!(
            out,
            "step {}: {}: {b0}x{b1} -> {a0}x{a1}",
            k + 1,
            side_name(step.side)
        );
    }
    let _ = writeln!(out, "path: {}", trace_lines(&trace));
    let _ = writeln!(out, "md-trivial: {}", yes(trace.is_trivial()));
    out.push_str(&format::to_text(
        &trace.result,
        Some(&format!("{}_reduced", m.name)),
    ));
    Ok(out)
}

fn describe_power(r: &ComponentReport) -> String {
    let state = if r.connected {
        "connected"
    } else {
        "disconnected"
    };
    let sizes: Vec<String> = r.sizes.iter().map(|s| s.to_string()).collect();
    let plural = if r.components == 1 {
        "component, size"
    } else {
        "components, sizes"
    };
    format!(
        "power {}: {state}, {} {plural} {}",
        r.exponent,
        r.components,
        sizes.join(", ")
    )
}

fn degree(cli: &Cli, m: &Loaded, max: usize) -> Outcome {
    if max == 0 {
        return Err(Failure::Input(anyhow::anyhow!("--max must be positive")));
    }
    let report = degree_report(&m.machine, max, &PowerBudget::default())
        .map_err(|e| Failure::Inconclusive(e.to_string()))?;
    let out = if cli.json {
        cli.emit_json(&report)
    } else {
        let mut out = String::new();
        match report.degree {
            ConnectionDegree::Finite(n) => {
                let _ = writeln!(out, "connection degree: {n}");
            }
            ConnectionDegree::AtLeast(n) => {
                let _ = writeln!(out, "connection degree: at least {n}");
            }
        }
        for r in report.connected.iter().chain(&report.disconnected) {
            let _ = writeln!(out, "{}", describe_power(r));
        }
        out
    };
    if let ConnectionDegree::AtLeast(n) = report.degree {
        return Err(Failure::Partial {
            report: out,
            reason: format!("every power up to {n} is connected; raise --max to continue"),
        });
    }
    Ok(out)
}

fn portrait(cli: &Cli, m: &Loaded, word: &str, k: usize) -> Outcome {
    let u = m
        .machine
        .parse_state_word(word)
        .with_context(|| format!("state word {word:?}"))?;
    let p = portrait_of(&m.machine, &u.0, k).map_err(|e| Failure::Input(e.into()))?;
    let names = m.machine.letter_names();
    if let Some(path) = &cli.dot {
        write_file(path, &p.to_dot(names))?;
    }
    if cli.json {
        let levels: Vec<Vec<String>> = (0..p.depth())
            .map(|l| p.level(l).iter().map(|q| q.render(names)).collect())
            .collect();
        return Ok(
            cli.emit_json(&serde_json::json!({ "word": word, "depth": k, "levels": levels }))
        );
    }
    Ok(p.render_levels(names) + &p.render_tree(names))
}

fn closure(cli: &Cli, m: &Loaded) -> Outcome {
    match tensor_closure_with_alphabet(&m.machine, &cli.budgets.semigroup()) {
        Ok((c, alphabet)) => {
            let mut comments = String::new();
            for (k, w) in alphabet.letters.iter().enumerate() {
                let _ = writeln!(
                    comments,
                    "# {} = {}",
                    c.letter_name(k as u32),
                    m.machine.format_letter_word(&w.0)
                );
            }
            cli.emit_machine(&c, &format!("{}_closure", m.name), &comments)
        }
        Err(ClosureError::DualNotFinite(n)) => Err(Failure::Inconclusive(format!(
            "the dual semigroup has more than {n} elements within the budget; no closure"
        ))),
        Err(e) => Err(Failure::Inconclusive(e.to_string())),
    }
}

fn order(cli: &Cli, m: &Loaded, list: bool) -> Outcome {
    let t = enumerate_semigroup(&m.machine, &cli.budgets.semigroup());
    let out = if cli.json {
        cli.emit_json(&t)
    } else {
        let mut out = String::new();
        if t.is_finite() {
            let _ = writeln!(out, "order: {}", t.order());
            if let Some(d) = t.certificate_depth {
                let _ = writeln!(out, "elements distinct on words of length {d}");
            }
        } else {
            let _ = writeln!(out, "order: at least {}", t.order());
        }
        if list {
            for e in &t.elements {
                let _ = writeln!(out, "{}", e.word);
            }
        }
        out
    };
    if !t.is_finite() {
        return Err(Failure::Partial {
            report: out,
            reason: "enumeration budget exceeded; raise --max-elements or --max-depth".into(),
        });
    }
    Ok(out)
}

fn describe_evidence(e: &Evidence) -> String {
    match e {
        Evidence::DisconnectedPower { exponent } => format!("power {exponent} is disconnected"),
        Evidence::Reduction { on_dual, trace } => format!(
            "md-reduction of the {}: {} ({})",
            if *on_dual { "dual" } else { "machine" },
            trace_lines(trace),
            if trace.is_trivial() {
                "trivial"
            } else {
                "not trivial"
            }
        ),
    }
}

fn run_decide(cli: &Cli, m: &Loaded, certificate: Option<&Path>) -> Outcome {
    let verdict = match decide(&m.machine, cli.budgets.max_power) {
        Ok(v) => v,
        Err(DecideError::Precondition(msg)) => return Err(Failure::Inconclusive(msg)),
        Err(DecideError::Budget(e)) => return Err(Failure::Inconclusive(e.to_string())),
    };
    check_certificate(&m.machine, &verdict)
        .map_err(|e| Failure::Inconclusive(format!("certificate rejected by the checker: {e}")))?;
    if let Some(path) = certificate {
        write_file(path, &cli.emit_json(&verdict))?;
    }
    let out = if cli.json {
        cli.emit_json(&verdict)
    } else {
        let mut out = format!("{}\n", verdict.label());
        if let Verdict::FiniteSemigroup { order: Some(n), .. } = &verdict {
            let _ = writeln!(out, "order: {n}");
        }
        if let Some(e) = verdict.evidence() {
            let _ = writeln!(out, "certificate: {}", describe_evidence(e));
            let _ = writeln!(out, "certificate checked");
        }
        out
    };
    if let Verdict::Unknown { bound } = verdict {
        return Err(Failure::Partial {
            report: out,
            reason: format!(
                "semi-decision only: every power up to {bound} is connected and the machine is not invertible"
            ),
        });
    }
    Ok(out)
}

fn census(cli: &Cli, args: &CensusArgs) -> Outcome {
    if args.states == 0 || args.letters == 0 {
        return Err(Failure::Input(anyhow::anyhow!(
            "a family needs at least one state and one letter"
        )));
    }
    let symmetry = match args.symmetry {
        SymmetryArg::Labeled => Symmetry::Labeled,
        SymmetryArg::UpToIso => Symmetry::UpToIso,
    };
    let spec = FamilySpec::new(
        args.states,
        args.letters,
        filters_of(&args.filters),
        symmetry,
    );
    let mut analyses: Vec<Analysis> = args
        .analyses
        .iter()
        .map(|a| match a {
            AnalysisArg::Md => Analysis::MdTriviality,
            AnalysisArg::Verdict => Analysis::Verdict,
            AnalysisArg::Degree => Analysis::ConnectionDegree,
            AnalysisArg::Order => Analysis::SemigroupOrder,
        })
        .collect();
    if analyses.is_empty() {
        analyses.push(Analysis::MdTriviality);
    }
    let options = CensusOptions {
        jobs: args.jobs,
        journal: args.journal.clone(),
        max_universe: args.max_universe,
        max_power: cli.budgets.max_power,
        semigroup_budget: cli.budgets.semigroup(),
        target: args.target,
    };
    let report = match classify_family(spec, &analyses, &options) {
        Ok(r) => r,
        Err(e @ (CensusError::Budget(_) | CensusError::TooLarge(_))) => {
            return Err(Failure::Inconclusive(e.to_string()))
        }
        Err(e) => return Err(Failure::Input(e.into())),
    };
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        report
            .write_csv(file)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let summary = cli.emit_json(&report.summary_json());
    if let Some(path) = &args.summary {
        write_file(path, &summary)?;
    }
    Ok(summary)
}
