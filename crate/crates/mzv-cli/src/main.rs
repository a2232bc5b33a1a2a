//! Command-line interface for the period-algebra engine.
//!
//! One verb per library operation:
//!   mzv eval|reduce|coaction|decompose|ud|conjugates EXPR
//!   mzv relations datamine --weight W [--out FILE]
//!   mzv pm sv|sv-twisted|invariants|monodromy ...
//!   mzv symbol check|smb|cmb|li|at-point ...
//!
//! Exit codes: 0 success, 2 parse/admissibility error, 3 relation-table
//! error (dimension mismatch, missing or corrupt table), 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use periods::exact::Rat;
use periods::expr;
use periods::falphabet;
use periods::motivic::{self, MotivicError, MotivicExpr};
use periods::numerics;
use periods::permatrix::{Builder, PeriodMatrix, poly_to_string};
use periods::relations::{RelationError, RelationTable};
use periods::symbol::{self, BasePoint, Integrability};
use periods::words::Word;

#[derive(Parser)]
#[command(name = "mzv", version, about = "Exact computer algebra for mixed Tate periods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Working precision in decimal digits for numerical output.
    #[arg(long, global = true, default_value_t = 40)]
    prec: usize,
    /// Maximal weight of the relation table built on demand.
    #[arg(long, global = true, default_value_t = 8)]
    weight_limit: u32,
    /// Relation-table cache directory (overrides PERIODS_TABLE_DIR).
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression numerically.
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Reduce an expression to the relation basis.
    Reduce {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Print the coaction of an expression.
    Coaction {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Decompose into the model ring Q[f2]⊗Q⟨f3,f5,...⟩.
    Decompose {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Unipotency degree.
    Ud {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Galois conjugates (basis of the generated comodule) and rank.
    Conjugates {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Relation-table commands.
    Relations {
        #[command(subcommand)]
        cmd: RelationsCmd,
    },
    /// Period-matrix commands.
    Pm {
        #[command(subcommand)]
        cmd: PmCmd,
    },
    /// Symbol commands.
    Symbol {
        #[command(subcommand)]
        cmd: SymbolCmd,
    },
}

#[derive(Subcommand)]
enum RelationsCmd {
    /// Generate the relation table up to a weight and print the basis sizes.
    Datamine {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MatrixSource {
    /// Builder kind: lefschetz | kummer | zeta | polylog.
    #[arg(long)]
    builder: Option<String>,
    /// Parameter for the kummer builder.
    #[arg(long)]
    alpha: Option<String>,
    /// Odd parameter for the zeta builder.
    #[arg(long)]
    n: Option<u32>,
    /// Depth for the polylog builder (1 or 2).
    #[arg(long)]
    depth: Option<usize>,
    /// Matrix file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PmCmd {
    /// Single-valued matrix (F∞C)⁻¹C.
    Sv(MatrixSource),
    /// Single-valued matrix with the twisted involution.
    SvTwisted(MatrixSource),
    /// Hodge polynomial, rank, determinant class.
    Invariants(MatrixSource),
    /// Left multiplication by a standard monodromy matrix.
    Monodromy {
        #[command(flatten)]
        source: MatrixSource,
        /// Which loop: 0 or 1.
        #[arg(long)]
        gamma: u8,
    },
}

#[derive(Subcommand)]
enum SymbolCmd {
    /// Integrability check dN + N∧N = 0.
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    /// Symbol of the (row, col) matrix coefficient.
    Smb {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
    },
    /// Cohomological symbol of the (row, col) coefficient at a length.
    Cmb {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
        #[arg(long)]
        length: usize,
    },
    /// Symbol of the classical polylogarithm Li_n.
    Li { n: usize },
    /// Symbol of a polylogarithm family element based at a tangential point.
    AtPoint {
        /// Family element, e.g. "li2" or "w:10".
        target: String,
        /// Base point: 0 or 1.
        #[arg(long)]
        base: String,
    },
}

enum CliError {
    Parse(String),
    Table(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Parse(_) => ExitCode::from(2),
            CliError::Table(_) => ExitCode::from(3),
            CliError::Other(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Table(m) | CliError::Other(m) => m,
        }
    }
}

impl From<expr::ParseError> for CliError {
    fn from(e: expr::ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::DimensionMismatch { .. }
            | RelationError::CacheCorrupt(_)
            | RelationError::WeightTooLarge(_) => CliError::Table(e.to_string()),
            RelationError::NotMzv(_) => CliError::Parse(e.to_string()),
        }
    }
}

impl From<MotivicError> for CliError {
    fn from(e: MotivicError) -> Self {
        match e {
            MotivicError::MissingRelationTable(_) => CliError::Table(e.to_string()),
            MotivicError::Divergent(_)
            | MotivicError::UnsupportedLetter(_)
            | MotivicError::NotPrime(_) => CliError::Parse(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<symbol::SymbolError> for CliError {
    fn from(e: symbol::SymbolError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<periods::permatrix::MatrixError> for CliError {
    fn from(e: periods::permatrix::MatrixError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<numerics::EvalError> for CliError {
    fn from(e: numerics::EvalError) -> Self {
        CliError::Parse(e.to_string())
    }
}

fn table_dir(cli: &Cli) -> PathBuf {
    if let Some(p) = &cli.table {
        return p.clone();
    }
    if let Ok(p) = std::env::var("PERIODS_TABLE_DIR") {
        return PathBuf::from(p);
    }
    PathBuf::from(".periods-tables")
}

/// Loads the cached table at the requested weight, datamining and caching it
/// when absent.
fn load_table(cli: &Cli, weight: u32) -> Result<RelationTable, CliError> {
    let dir = table_dir(cli);
    let path = dir.join(format!("relations-w{}.json", weight));
    if path.exists() {
        match RelationTable::load(&path) {
            Ok(t) => return Ok(t),
            Err(e) => return Err(CliError::Table(format!("{}: {}", path.display(), e))),
        }
    }
    let t = RelationTable::datamine(weight)?;
    if let Err(e) = t.save(&path) {
        eprintln!("warning: could not cache table at {}: {}", path.display(), e);
    }
    Ok(t)
}

fn required_weight(cli: &Cli, x: &MotivicExpr) -> Result<u32, CliError> {
    let needed = x.max_weight().max(2);
    if needed > cli.weight_limit {
        return Err(CliError::Table(format!(
            "expression weight {} exceeds --weight-limit {}",
            needed, cli.weight_limit
        )));
    }
    Ok(needed)
}

fn build_matrix(src: &MatrixSource) -> Result<PeriodMatrix, CliError> {
    if let Some(file) = &src.file {
        let text = std::fs::read_to_string(file)
            .map_err(|e| CliError::Other(format!("{}: {}", file.display(), e)))?;
        return Ok(PeriodMatrix::from_json(&text)?);
    }
    let kind = src
        .builder
        .as_deref()
        .ok_or_else(|| CliError::Parse("either --builder or --file is required".into()))?;
    let b = match kind {
        "lefschetz" => Builder::Lefschetz,
        "kummer" => {
            let alpha = src
                .alpha
                .as_deref()
                .ok_or_else(|| CliError::Parse("kummer builder needs --alpha".into()))?;
            let alpha: Rat =
                alpha.parse().map_err(|e| CliError::Parse(format!("bad --alpha: {}", e)))?;
            Builder::Kummer(alpha)
        }
        "zeta" => {
            let n = src.n.ok_or_else(|| CliError::Parse("zeta builder needs --n".into()))?;
            Builder::Zeta(n)
        }
        "polylog" => Builder::PolylogTower(src.depth.unwrap_or(2)),
        other => return Err(CliError::Parse(format!("unknown builder {:?}", other))),
    };
    Ok(PeriodMatrix::build(&b)?)
}

fn print_matrix(m: &PeriodMatrix, json: bool) {
    if json {
        println!("{}", m.to_json());
        return;
    }
    for row in &m.entries {
        let cells: Vec<String> = row.iter().map(poly_to_string).collect();
        println!("[ {} ]", cells.join(" , "));
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Eval { expr: s } => {
            let x = expr::parse(s)?;
            let v = numerics::per_eval(&x, cli.prec)?;
            let digits = cli.prec.saturating_sub(5).max(10);
            let bound = format!("1e-{}", digits);
            if cli.json {
                println!(
                    "{{\"re\": \"{}\", \"im\": \"{}\", \"prec\": {}, \"tail_bound\": \"{}\"}}",
                    v.re.to_decimal(digits),
                    v.im.to_decimal(digits),
                    cli.prec,
                    bound
                );
            } else {
                println!(
                    "{} + {}*i  (± {})",
                    v.re.to_decimal(digits),
                    v.im.to_decimal(digits),
                    bound
                );
            }
        }
        Command::Reduce { expr: s } => {
            let x = expr::parse(s)?;
            let t = load_table(cli, required_weight(cli, &x)?)?;
            let red = t.reduce_to_basis(&x)?;
            if cli.json {
                let coords: Vec<String> =
                    red.iter().map(|(m, c)| format!("[\"{}\", \"{}\"]", m, c)).collect();
                println!("{{\"coords\": [{}]}}", coords.join(", "));
            } else if red.is_zero() {
                println!("0");
            } else {
                let mut out = String::new();
                let mut first = true;
                for (m, c) in red.iter() {
                    let neg = c.is_negative();
                    let mag = c.abs();
                    if first {
                        if neg {
                            out.push('-');
                        }
                    } else {
                        out.push_str(if neg { " - " } else { " + " });
                    }
                    first = false;
                    if mag.is_one() {
                        out.push_str(&format!("{}", m));
                    } else {
                        out.push_str(&format!("{}*{}", mag, m));
                    }
                }
                println!("{}", out);
            }
        }
        Command::Coaction { expr: s } => {
            let x = expr::parse(s)?;
            println!("{}", expr::print_coaction(&motivic::coaction(&x)));
        }
        Command::Decompose { expr: s } => {
            let x = expr::parse(s)?;
            let t = load_table(cli, required_weight(cli, &x)?)?;
            let d = falphabet::decompose(&x, &t)?;
            if cli.json {
                println!("{{\"fpoly\": \"{}\"}}", d);
            } else {
                println!("{}", d);
            }
        }
        Command::Ud { expr: s } => {
            let x = expr::parse(s)?;
            let t = load_table(cli, required_weight(cli, &x)?)?;
            let d = motivic::unipotency_degree(&x, &t)?;
            if cli.json {
                println!("{{\"degree\": {}}}", d);
            } else {
                println!("{}", d);
            }
        }
        Command::Conjugates { expr: s } => {
            let x = expr::parse(s)?;
            let t = load_table(cli, required_weight(cli, &x)?)?;
            let conj = motivic::galois_conjugates(&x, &t)?;
            if cli.json {
                let basis: Vec<String> =
                    conj.iter().map(|e| format!("\"{}\"", expr::print(e))).collect();
                println!("{{\"rank\": {}, \"basis\": [{}]}}", conj.len(), basis.join(", "));
            } else {
                for e in &conj {
                    println!("{}", expr::print(e));
                }
                println!("rank {}", conj.len());
            }
        }
        Command::Relations { cmd } => match cmd {
            RelationsCmd::Datamine { weight, out } => {
                let t = RelationTable::datamine(*weight)?;
                let path = match out {
                    Some(p) => p.clone(),
                    None => table_dir(cli).join(format!("relations-w{}.json", weight)),
                };
                t.save(&path)
                    .map_err(|e| CliError::Other(format!("{}: {}", path.display(), e)))?;
                let dims: Vec<String> = t.dims().iter().map(|d| d.to_string()).collect();
                if cli.json {
                    println!(
                        "{{\"max_weight\": {}, \"dims\": [{}], \"checksum\": \"{}\"}}",
                        weight,
                        dims.join(", "),
                        t.checksum()
                    );
                } else {
                    println!("dims (weights 2..{}): ({})", weight, dims.join(","));
                }
            }
        },
        Command::Pm { cmd } => match cmd {
            PmCmd::Sv(src) => {
                let m = build_matrix(src)?;
                print_matrix(&m.single_valued()?, cli.json);
            }
            PmCmd::SvTwisted(src) => {
                let m = build_matrix(src)?;
                print_matrix(&m.single_valued_twisted()?, cli.json);
            }
            PmCmd::Invariants(src) => {
                let m = build_matrix(src)?;
                let inv = m.invariants()?;
                if cli.json {
                    println!(
                        "{{\"hodge\": \"{}\", \"rank\": {}, \"det\": \"{}\"}}",
                        inv.hodge_string(),
                        inv.rank,
                        inv.det
                    );
                } else {
                    println!("hodge polynomial: {}", inv.hodge_string());
                    println!("rank: {}", inv.rank);
                    println!("det (mod rational scalars): {}", inv.det);
                }
            }
            PmCmd::Monodromy { source, gamma } => {
                let m = build_matrix(source)?;
                let n = m.size();
                if n != 3 {
                    return Err(CliError::Parse(
                        "standard monodromy matrices act on the rank-3 polylog tower".into(),
                    ));
                }
                let mut g: Vec<Vec<Rat>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                            .collect()
                    })
                    .collect();
                match gamma {
                    0 => g[0][1] = Rat::one(),
                    1 => g[1][2] = Rat::one(),
                    other => {
                        return Err(CliError::Parse(format!(
                            "--gamma must be 0 or 1, got {}",
                            other
                        )));
                    }
                }
                print_matrix(&m.monodromy_apply(&g)?, cli.json);
            }
        },
        Command::Symbol { cmd } => match cmd {
            SymbolCmd::Check { file } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Other(format!("{}: {}", file.display(), e)))?;
                let conn = symbol::ConnectionData::from_json(&text)?;
                match conn.check_integrability() {
                    Integrability::Pass => println!("integrable"),
                    Integrability::Fail { row, col, entry } => {
                        println!("NOT integrable at ({}, {}): {}", row, col, entry);
                        return Err(CliError::Other("integrability failed".into()));
                    }
                }
            }
            SymbolCmd::Smb { file, row, col } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Other(format!("{}: {}", file.display(), e)))?;
                let conn = symbol::ConnectionData::from_json(&text)?;
                let n = conn.size();
                if *row >= n || *col >= n {
                    return Err(CliError::Parse(format!("row/col out of range for size {}", n)));
                }
                let mut f = vec![Rat::zero(); n];
                f[*row] = Rat::one();
                let mut omega = vec![Rat::zero(); n];
                omega[*col] = Rat::one();
                let s = symbol::smb(&conn, &f, &omega)?;
                println!("{}", symbol::bar_to_string(&s));
            }
            SymbolCmd::Cmb { file, row, col, length } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Other(format!("{}: {}", file.display(), e)))?;
                let conn = symbol::ConnectionData::from_json(&text)?;
                let n = conn.size();
                if *row >= n || *col >= n {
                    return Err(CliError::Parse(format!("row/col out of range for size {}", n)));
                }
                let mut f = vec![Rat::zero(); n];
                f[*row] = Rat::one();
                let mut omega = vec![Rat::zero(); n];
                omega[*col] = Rat::one();
                let result = symbol::cmb(&conn, &f, &omega, *length)?;
                let classes: Vec<String> = result
                    .classes
                    .iter()
                    .map(|(w, c)| {
                        let parts: Vec<String> = w.iter().map(|b| b.to_string()).collect();
                        format!("{}*{}", c, parts.join("|"))
                    })
                    .collect();
                println!("{}", classes.join(" + "));
                println!("kernel check: {}", if result.kernel_ok { "pass" } else { "FAIL" });
            }
            SymbolCmd::Li { n } => {
                if *n == 0 {
                    return Err(CliError::Parse("Li index must be at least 1".into()));
                }
                let s = symbol::li_symbol(*n)?;
                println!("{}", symbol::bar_to_string(&s));
            }
            SymbolCmd::AtPoint { target, base } => {
                let base = BasePoint::parse(base).map_err(|e| CliError::Parse(e.to_string()))?;
                let family = parse_family(target)?;
                let out = symbol::smb_at_point(&family, base)?;
                for (constant, word) in &out {
                    println!("{} (x) {}", expr::print(constant), symbol::bar_to_string(word));
                }
                if out.is_empty() {
                    println!("0");
                }
            }
        },
    }
    Ok(())
}

/// Parses a family name: "liN" for the classical polylogarithm, or a word
/// "w:110" over the letters {0,1}.
fn parse_family(s: &str) -> Result<symbol::FamilyExpr, CliError> {
    if let Some(rest) = s.strip_prefix("li") {
        let n: usize = rest
            .parse()
            .map_err(|_| CliError::Parse(format!("bad polylogarithm index {:?}", rest)))?;
        if n == 0 {
            return Err(CliError::Parse("Li index must be at least 1".into()));
        }
        return Ok(symbol::family_li_n(n));
    }
    if let Some(rest) = s.strip_prefix("w:") {
        let mut letters = Vec::new();
        for ch in rest.chars() {
            match ch {
                '0' => letters.push(0i8),
                '1' => letters.push(1i8),
                other => {
                    return Err(CliError::Parse(format!("bad letter {:?} in family word", other)));
                }
            }
        }
        return Ok(symbol::family_li(&Word(letters)));
    }
    Err(CliError::Parse(format!("unknown family {:?} (expected liN or w:...)", s)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
