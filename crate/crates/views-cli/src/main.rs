//! Command-line front end: load and save databases, run raw instruction
//! set operations and queries, execute the bundled demos, dump stats.
//!
//! Exit codes: 0 success, 1 query found nothing, 2 usage error, 3 data
//! error (unreadable file, bad format, failing operation).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use views_core::check::check_invariants;
use views_core::fixtures;
use views_core::model::{Addr, ArrayId, Ref, RefKind};
use views_core::query::SyllogismStage;
use views_core::slipnet;
use views_core::textio::{load_image, parse, save_image, SymbolTable};
use views_core::{TraceLog, ViewsDb};

const EXIT_OK: u8 = 0;
const EXIT_NOT_FOUND: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(
    name = "views",
    about = "Storage engine and simulator for chain-structured graph databases",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .views text file, report its size, optionally save a .vimg image
    Load {
        /// Input .views file
        file: PathBuf,
        /// Write the parsed database as a binary image
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Run the structural invariant checker over a database
    Check {
        /// Database file (.views or .vimg)
        db: PathBuf,
    },
    /// Run one instruction set operation verbatim
    #[command(long_about = "Run one instruction set operation verbatim.\n\n\
        Operations: prog <addr> <array> <value>, aar <addr> <array>,\n\
        car <array> <value>, car2 <arrayA> <valueA> <arrayB> <valueB>,\n\
        head <addr>, tail <addr>. Search results are drained match by\n\
        match through carnext. Writes made by prog live only for this\n\
        invocation.")]
    Isa {
        /// Database file (.views or .vimg)
        db: PathBuf,
        /// Operation name
        op: String,
        /// Operation arguments
        args: Vec<String>,
        /// Print the instruction trace instead of bare results
        #[arg(long)]
        trace: bool,
    },
    /// Run a query against a database
    Query {
        /// Database file (.views or .vimg)
        db: PathBuf,
        #[command(subcommand)]
        query: QueryCommand,
    },
    /// Run a bundled demonstration database
    Demo {
        #[command(subcommand)]
        demo: DemoCommand,
    },
    /// Print headnode/linknode counts and the chain-length histogram
    Stats {
        /// Database file (.views or .vimg)
        db: PathBuf,
    },
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Find every linknode where two cued concepts meet
    TwoCue { cue_a: String, cue_b: String },
    /// List the values a subject holds under an attribute
    Attr { subject: String, attribute: String },
    /// Two-stage search for an (attribute, target) pairing
    Syllogism {
        subject: String,
        attribute: String,
        target: String,
        /// Attribute to hop through when the subject's own chain misses
        #[arg(long)]
        via: String,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// "Who won 2 Oscars?" on the film database
    Tomhanks,
    /// Two-stage syllogistic search on the taxonomy database
    Felidae,
    /// Activation propagation and slippage on the three-concept net
    Slipnet(SlipnetArgs),
}

#[derive(Args)]
struct SlipnetArgs {
    /// Propagation sweeps to run
    #[arg(long, default_value_t = 1)]
    steps: u32,
    /// Slippage threshold
    #[arg(long, default_value_t = 80.0)]
    threshold: f64,
}

fn main() -> ExitCode {
    // die quietly when the consumer of our stdout goes away (e.g. `| head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Anything that stops a command, with its exit code.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<views_core::Error> for CliError {
    fn from(e: views_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult = Result<u8, CliError>;

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Load { file, save } => cmd_load(&file, save.as_deref()),
        Command::Check { db } => cmd_check(&db),
        Command::Isa {
            db,
            op,
            args,
            trace,
        } => cmd_isa(&db, &op, &args, trace),
        Command::Query { db, query } => cmd_query(&db, &query),
        Command::Demo { demo } => match demo {
            DemoCommand::Tomhanks => demo_tomhanks(),
            DemoCommand::Felidae => demo_felidae(),
            DemoCommand::Slipnet(args) => demo_slipnet(&args),
        },
        Command::Stats { db } => cmd_stats(&db),
    }
}

/// Load a database by extension: `.views` text (with names) or `.vimg`
/// binary (no names).
fn open_db(path: &Path) -> Result<(ViewsDb, SymbolTable), CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("views") => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let (db, symbols) = parse(&text)?;
            Ok((db, symbols))
        }
        Some("vimg") => {
            let db =
                load_image(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Ok((db, SymbolTable::new()))
        }
        _ => Err(CliError::Usage(format!(
            "{}: expected a .views or .vimg file",
            path.display()
        ))),
    }
}

fn cmd_load(file: &Path, save: Option<&Path>) -> CliResult {
    let (db, _) = open_db(file)?;
    let heads = db.headnodes().len() as u64;
    println!(
        "loaded {}: {} headnodes, {} linknodes, {} literals",
        file.display(),
        heads,
        db.allocated_rows() - heads,
        db.literals().len()
    );
    if let Some(out) = save {
        save_image(&db, out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
        println!("saved {}", out.display());
    }
    Ok(EXIT_OK)
}

fn cmd_check(path: &Path) -> CliResult {
    let (db, _) = open_db(path)?;
    let report = check_invariants(&db);
    if report.is_empty() {
        println!("ok: {} rows, no violations", db.allocated_rows());
        Ok(EXIT_OK)
    } else {
        for v in &report {
            println!("violation: {v}");
        }
        Ok(EXIT_DATA)
    }
}

fn parse_word(s: &str) -> Result<u64, CliError> {
    let parsed = if let Some(hex) = s.strip_prefix("0x") {
        u64::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| CliError::Usage(format!("{s:?} is not a 64-bit word")))
}

fn parse_array(s: &str) -> Result<ArrayId, CliError> {
    ArrayId::parse(s).ok_or_else(|| CliError::Usage(format!("{s:?} is not an array id")))
}

/// An address argument: a number, or a headnode name from a .views file.
fn parse_addr(s: &str, symbols: &SymbolTable) -> Result<Addr, CliError> {
    if let Some(a) = symbols.head(s) {
        return Ok(a);
    }
    parse_word(s)
        .map(Addr)
        .map_err(|_| CliError::Usage(format!("{s:?} is neither a headnode name nor an address")))
}

/// A ref argument: `_` for NULL, `lit:<string>` for a literal present in
/// the database, a headnode name, or a numeric address.
fn parse_ref(s: &str, db: &ViewsDb, symbols: &SymbolTable) -> Result<Ref, CliError> {
    if s == "_" {
        return Ok(Ref::NULL);
    }
    if let Some(text) = s.strip_prefix("lit:") {
        let ix = db
            .literals()
            .lookup(text)
            .ok_or_else(|| CliError::Data(format!("literal {text:?} is not in the database")))?;
        return Ok(Ref::literal(ix)?);
    }
    let addr = parse_addr(s, symbols)?;
    Ok(Ref::addr(addr)?)
}

/// Render a stored ref for output: headnode name when known, literal in
/// quotes, `_` for NULL, address otherwise.
fn render_ref(r: Ref, db: &ViewsDb, symbols: &SymbolTable) -> String {
    match r.kind() {
        RefKind::Null => "_".to_owned(),
        RefKind::Eoc => "EOC".to_owned(),
        RefKind::Literal(i) => match db.literals().get(i) {
            Some(s) => format!("{s:?}"),
            None => format!("lit#{i}"),
        },
        RefKind::Addr(a) => render_addr(a, symbols),
    }
}

fn render_addr(a: Addr, symbols: &SymbolTable) -> String {
    match symbols.name_of(a) {
        Some(name) => name.to_owned(),
        None => format!("{a}"),
    }
}

fn cmd_isa(path: &Path, op: &str, args: &[String], trace: bool) -> CliResult {
    let (mut db, symbols) = open_db(path)?;
    let mut log = TraceLog::new();
    let arg = |i: usize| -> Result<&str, CliError> {
        args.get(i)
            .map(String::as_str)
            .ok_or_else(|| CliError::Usage(format!("{op}: missing argument {i}")))
    };
    let expect_len = |n: usize| -> Result<(), CliError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "{op}: expected {n} arguments, got {}",
                args.len()
            )))
        }
    };

    let mut plain: Vec<String> = Vec::new();
    match op {
        "prog" => {
            expect_len(3)?;
            let a = parse_addr(arg(0)?, &symbols)?;
            let array = parse_array(arg(1)?)?;
            let value = parse_word(arg(2)?)?;
            db.fabric_mut().prog(a, array, value)?;
            log.prog(a, array, value);
            plain.push("ok".to_owned());
        }
        "aar" => {
            expect_len(2)?;
            let a = parse_addr(arg(0)?, &symbols)?;
            let array = parse_array(arg(1)?)?;
            let word = db.fabric().aar(a, array)?;
            log.aar(a, array, word);
            plain.push(format!("0x{word:x}"));
        }
        "car" => {
            expect_len(2)?;
            let array = parse_array(arg(0)?)?;
            let value = parse_word(arg(1)?)?;
            let mut cur = db.fabric().car(array, value)?;
            log.car(array, value, cur.remaining());
            loop {
                let hit = db.fabric().carnext(&mut cur)?;
                log.carnext(hit);
                match hit {
                    Some(a) => plain.push(format!("{a}")),
                    None => break,
                }
            }
        }
        "car2" => {
            expect_len(4)?;
            let a1 = parse_array(arg(0)?)?;
            let v1 = parse_word(arg(1)?)?;
            let a2 = parse_array(arg(2)?)?;
            let v2 = parse_word(arg(3)?)?;
            let mut cur = db.fabric().car2(a1, v1, a2, v2)?;
            log.car2(a1, v1, a2, v2, cur.remaining());
            loop {
                let hit = db.fabric().carnext(&mut cur)?;
                log.carnext(hit);
                match hit {
                    Some(a) => plain.push(format!("{a}")),
                    None => break,
                }
            }
        }
        "head" => {
            expect_len(1)?;
            let a = parse_addr(arg(0)?, &symbols)?;
            let h = db.fabric().head(a)?;
            log.head(a, h);
            plain.push(format!("{h}"));
        }
        "tail" => {
            expect_len(1)?;
            let a = parse_addr(arg(0)?, &symbols)?;
            let t = db.fabric().tail(a)?;
            log.tail(a, t);
            plain.push(format!("{t}"));
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown isa operation {other:?} (prog, aar, car, car2, head, tail)"
            )))
        }
    }

    if trace {
        for line in log.lines() {
            println!("{line}");
        }
    } else {
        for line in plain {
            println!("{line}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_query(path: &Path, query: &QueryCommand) -> CliResult {
    let (db, symbols) = open_db(path)?;
    match query {
        QueryCommand::TwoCue { cue_a, cue_b } => {
            let a = parse_ref(cue_a, &db, &symbols)?;
            let b = parse_ref(cue_b, &db, &symbols)?;
            let hits = db.two_cue(a, b)?;
            if hits.is_empty() {
                println!("no hits");
                return Ok(EXIT_NOT_FOUND);
            }
            for hit in hits {
                println!(
                    "link={} owner={}",
                    hit.link,
                    render_addr(hit.owner, &symbols)
                );
            }
            Ok(EXIT_OK)
        }
        QueryCommand::Attr { subject, attribute } => {
            let subj = parse_addr(subject, &symbols)?;
            let attr = parse_ref(attribute, &db, &symbols)?;
            let hits = db.attribute_of(subj, attr)?;
            if hits.is_empty() {
                println!("no hits");
                return Ok(EXIT_NOT_FOUND);
            }
            for (link, value) in hits {
                println!("link={link} value={}", render_ref(value, &db, &symbols));
            }
            Ok(EXIT_OK)
        }
        QueryCommand::Syllogism {
            subject,
            attribute,
            target,
            via,
        } => {
            let subj = parse_addr(subject, &symbols)?;
            let attr = parse_ref(attribute, &db, &symbols)?;
            let tgt = parse_ref(target, &db, &symbols)?;
            let via = parse_ref(via, &db, &symbols)?;
            match db.syllogism_search(subj, attr, tgt, via)? {
                Some(hit) => {
                    match hit.stage {
                        SyllogismStage::Direct => {
                            println!("found: link={} stage=1", hit.link);
                        }
                        SyllogismStage::ViaHop { via_value } => {
                            println!(
                                "found: link={} stage=2 via={}",
                                hit.link,
                                render_addr(via_value, &symbols)
                            );
                        }
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    println!("not found");
                    Ok(EXIT_NOT_FOUND)
                }
            }
        }
    }
}

fn cmd_stats(path: &Path) -> CliResult {
    let (db, _) = open_db(path)?;
    let heads = db.headnodes();
    println!("scheme: {}", db.scheme());
    println!(
        "geometry: {}x{} ({} rows)",
        db.geometry().superclusters,
        db.geometry().rows_per_supercluster,
        db.capacity()
    );
    println!("headnodes: {}", heads.len());
    println!("linknodes: {}", db.allocated_rows() - heads.len() as u64);
    println!("literals: {}", db.literals().len());
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    for h in &heads {
        *histogram.entry(db.chain_length(*h)?).or_default() += 1;
    }
    println!("chain lengths:");
    for (length, count) in histogram {
        println!("  {length}: {count}");
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// demos
// ---------------------------------------------------------------------------

fn demo_tomhanks() -> CliResult {
    let (db, symbols) = parse(fixtures::TOM_HANKS).expect("bundled fixture parses");
    println!("question: who won 2 Oscars?");
    let won = Ref::addr(symbols.head("Won").unwrap()).unwrap();
    let oscars = Ref::addr(symbols.head("TwoOscars").unwrap()).unwrap();
    println!("cue: Won");
    println!("cue: TwoOscars");
    let hits = db.two_cue(won, oscars)?;
    for hit in &hits {
        println!(
            "hit: link={} owner={}",
            hit.link,
            render_addr(hit.owner, &symbols)
        );
    }
    match hits.as_slice() {
        [] => {
            println!("answer: none");
            Ok(EXIT_NOT_FOUND)
        }
        [hit, ..] => {
            println!("answer: {}", render_addr(hit.owner, &symbols));
            Ok(EXIT_OK)
        }
    }
}

fn demo_felidae() -> CliResult {
    let (db, symbols) = parse(fixtures::FELIDAE).expect("bundled fixture parses");
    println!("question: does This belong to family Felidae?");
    let this = symbols.head("This").unwrap();
    let family = Ref::addr(symbols.head("Family").unwrap()).unwrap();
    let felidae = Ref::addr(symbols.head("Felidae").unwrap()).unwrap();
    let species = Ref::addr(symbols.head("Species").unwrap()).unwrap();
    match db.syllogism_search(this, family, felidae, species)? {
        Some(hit) => match hit.stage {
            SyllogismStage::Direct => {
                println!("stage 1: (family, Felidae) found in the This chain");
                println!("found: link={} stage=1", hit.link);
                Ok(EXIT_OK)
            }
            SyllogismStage::ViaHop { via_value } => {
                println!("stage 1: no (family, Felidae) pairing in the This chain");
                println!(
                    "stage 2: via Species -> {}",
                    render_addr(via_value, &symbols)
                );
                println!(
                    "found: link={} stage=2 in chain {}",
                    hit.link,
                    render_addr(via_value, &symbols)
                );
                Ok(EXIT_OK)
            }
        },
        None => {
            println!("not found");
            Ok(EXIT_NOT_FOUND)
        }
    }
}

fn demo_slipnet(args: &SlipnetArgs) -> CliResult {
    let (mut db, symbols) = parse(fixtures::SLIPNET_FIG9).expect("bundled fixture parses");
    println!("threshold: {}", args.threshold);
    let print_activations = |db: &ViewsDb, step: u32| {
        for h in db.headnodes() {
            let u = slipnet::head_universals(db, h).expect("m arrays present");
            println!(
                "step={step} head={} activ={}",
                render_addr(h, &symbols),
                u.activ
            );
        }
    };
    print_activations(&db, 0);
    for step in 1..=args.steps {
        slipnet::propagate_all(&mut db)?;
        print_activations(&db, step);
    }
    let mut state = slipnet::SlipnetState::new(args.threshold);
    slipnet::slippage_scan(&db, &mut state)?;
    if state.all_candidates().is_empty() {
        println!("slippage candidates: none");
    } else {
        println!("slippage candidates:");
        for (owner, list) in state.all_candidates() {
            let names: Vec<String> = list.iter().map(|a| render_addr(*a, &symbols)).collect();
            println!("  {}: {}", render_addr(*owner, &symbols), names.join(", "));
        }
    }
    Ok(EXIT_OK)
}
