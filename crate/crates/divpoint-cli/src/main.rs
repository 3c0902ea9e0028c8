//! Command-line surface for the divpoint library.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use divpoint::bratteli;
use divpoint::measures::{
    self, BoundaryPolicy, ConvergenceReport, DiscreteMeasure, EdgeRef, MeasureKind,
};
use divpoint::spectral::{self, spectral_data};
use divpoint::substitution::TileAddress;
use divpoint::sysfile;
use divpoint::System64;

#[derive(Parser)]
#[command(
    name = "divpoint",
    version,
    about = "Polygon substitution systems and their division-point measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Xi,
    Rho,
    Sigma,
}

impl From<KindArg> for MeasureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Xi => MeasureKind::Xi,
            KindArg::Rho => MeasureKind::Rho,
            KindArg::Sigma => MeasureKind::Sigma,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Include,
    Exclude,
}

impl From<BoundaryArg> for BoundaryPolicy {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Include => BoundaryPolicy::Include,
            BoundaryArg::Exclude => BoundaryPolicy::Exclude,
        }
    }
}

#[derive(Args)]
struct CommonOpts {
    /// System definition file.
    file: PathBuf,
    /// Override the per-level tile cap.
    #[arg(long)]
    max_tiles: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a system file and print its geometric validation report.
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the substitution matrix and its Perron-Frobenius eigendata.
    Spectral {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate level k and print a summary.
    Generate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(short)]
        k: usize,
        /// Render the level to an SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Build a division-point measure at level k.
    Measure {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        kind: KindArg,
        /// Dump the atoms to a CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Render the level with the measure overlaid to an SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Evaluate a measure on a tile (`--tile label/d1.d2`) or on a tile
    /// edge (`--edge label/d1.d2:IDX`).
    Eval {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        kind: KindArg,
        #[arg(long, conflicts_with = "edge", required_unless_present = "edge")]
        tile: Option<String>,
        #[arg(long)]
        edge: Option<String>,
        #[arg(long, default_value = "include")]
        boundary: BoundaryArg,
    },
    /// Tabulate ξ_k, ρ_k, σ_k against the area measure on chosen tiles and
    /// edges for k = 0..=kmax.
    Converge {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated tile addresses.
        #[arg(long, value_delimiter = ',', required = true)]
        tiles: Vec<String>,
        /// Comma-separated edge references `ADDRESS:IDX`.
        #[arg(long, value_delimiter = ',')]
        edges: Vec<String>,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the stationary diagram induced by the substitution.
    Bratteli {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        depth: usize,
        /// Verify cylinder weights against tile areas up to the depth.
        #[arg(long)]
        check_pushforward: bool,
    },
}

/// Invocation-shape problems discovered after clap parsing (exit code 2).
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn load_system(common: &CommonOpts) -> Result<System64> {
    let text = fs::read_to_string(&common.file)
        .with_context(|| format!("cannot read {}", common.file.display()))?;
    let mut sys = sysfile::parse_system::<f64>(&text)
        .with_context(|| format!("cannot load {}", common.file.display()))?;
    if let Some(cap) = common.max_tiles {
        sys = sys.with_max_tiles(cap);
    }
    Ok(sys)
}

fn parse_address(sys: &System64, text: &str) -> Result<TileAddress> {
    TileAddress::parse(sys, text).map_err(|e| usage(format!("bad tile address {text:?}: {e}")))
}

fn parse_edge(sys: &System64, text: &str) -> Result<EdgeRef<f64>> {
    let (addr_text, idx_text) = text
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("edge reference {text:?} must look like ADDRESS:IDX")))?;
    let address = parse_address(sys, addr_text)?;
    let index: usize = idx_text
        .parse()
        .map_err(|_| usage(format!("bad edge index {idx_text:?}")))?;
    EdgeRef::resolve(sys, address, index).map_err(|e| anyhow!("cannot resolve edge: {e}"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_measure(sys: &System64, k: usize, kind: MeasureKind) -> Result<DiscreteMeasure<f64>> {
    let level = sys.generate_level(k)?;
    Ok(measures::build(kind, sys, &level))
}

fn cmd_validate(common: CommonOpts) -> Result<()> {
    let text = fs::read_to_string(&common.file)
        .with_context(|| format!("cannot read {}", common.file.display()))?;
    let (sys, report) = sysfile::parse_system_with_report::<f64>(&text)
        .with_context(|| format!("cannot load {}", common.file.display()))?;
    println!(
        "system {:?}: {} prototiles, lambda = {:.12}",
        sys.name(),
        sys.prototiles().len(),
        sys.lambda()
    );
    match sys.primitivity_exponent() {
        Some(m) => println!("primitive with exponent M = {m}"),
        None => println!("NOT primitive"),
    }
    print!("{report}");
    if !report.passed() {
        return Err(anyhow!("system failed geometric validation"));
    }
    Ok(())
}

fn cmd_spectral(common: CommonOpts) -> Result<()> {
    let sys = load_system(&common)?;
    let a = spectral::build_matrix(&sys);
    println!("substitution matrix A (A[i][j] = copies of i in the rule of j):");
    print!("{a}");
    match spectral::primitivity_exponent(&a) {
        Some(m) => println!("primitive with exponent M = {m}"),
        None => return Err(anyhow!("matrix is not primitive")),
    }
    let sd = spectral_data(&sys)?;
    println!(
        "gamma   = {:.15}  (lambda^2 = {:.15})",
        sd.gamma,
        sys.lambda() * sys.lambda()
    );
    let labels: Vec<&str> = sys.prototiles().iter().map(|p| p.label.as_str()).collect();
    println!(
        "{:>10} {:>20} {:>20} {:>8}",
        "prototile", "v_L (area)", "v_R", "vertices"
    );
    for (i, label) in labels.iter().enumerate() {
        println!(
            "{:>10} {:>20.15} {:>20.15} {:>8}",
            label, sd.v_left[i], sd.v_right[i], sd.vertex_counts[i]
        );
    }
    println!(
        "residuals: eigen {:.3e}, biorthogonality {:.3e}",
        sd.eig_residual, sd.biorth_residual
    );
    Ok(())
}

fn cmd_generate(common: CommonOpts, k: usize, svg: Option<PathBuf>) -> Result<()> {
    let sys = load_system(&common)?;
    let level = sys.generate_level(k)?;
    println!("level {k}: {} tiles", level.len());
    let histogram = level.type_histogram(sys.prototiles().len());
    for (p, count) in sys.prototiles().iter().zip(&histogram) {
        println!("  {:>8}: {count}", p.label);
    }
    let total_area: f64 = level.tiles.iter().map(|t| t.area(&sys)).sum();
    println!("total area: {total_area:.12}");
    if let Some(path) = svg {
        let mut buf = Vec::new();
        divpoint::export::render_svg(&sys, &level, &[], &mut buf)?;
        write_file(&path, &buf)?;
    }
    Ok(())
}

fn cmd_measure(
    common: CommonOpts,
    k: usize,
    kind: MeasureKind,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<()> {
    let sys = load_system(&common)?;
    let level = sys.generate_level(k)?;
    let mu = measures::build(kind, &sys, &level);
    println!(
        "{kind}_{k}: {} atoms, common denominator {}, total mass {}",
        mu.atoms.len(),
        mu.denominator,
        mu.total_exact()
    );
    if let Some(path) = csv {
        let mut buf = Vec::new();
        divpoint::export::export_csv(&mu, &mut buf)?;
        write_file(&path, &buf)?;
    }
    if let Some(path) = svg {
        let mut buf = Vec::new();
        divpoint::export::render_svg(&sys, &level, &[&mu], &mut buf)?;
        write_file(&path, &buf)?;
    }
    Ok(())
}

fn cmd_eval(
    common: CommonOpts,
    k: usize,
    kind: MeasureKind,
    tile: Option<String>,
    edge: Option<String>,
    boundary: BoundaryPolicy,
) -> Result<()> {
    let sys = load_system(&common)?;
    let mu = build_measure(&sys, k, kind)?;
    match (tile, edge) {
        (Some(addr_text), None) => {
            let address = parse_address(&sys, &addr_text)?;
            let tile = sys.tile_at(&address)?;
            let poly = tile.polygon(&sys);
            let exact = mu.evaluate_exact(&poly, boundary);
            println!(
                "{kind}_{k}({addr_text}) = {exact} = {:.12}",
                *exact.numer() as f64 / *exact.denom() as f64
            );
        }
        (None, Some(edge_text)) => {
            let edge = parse_edge(&sys, &edge_text)?;
            let exact = mu.evaluate_on_edge_exact(&edge);
            println!(
                "{kind}_{k}({edge_text}) = {exact} = {:.12}",
                *exact.numer() as f64 / *exact.denom() as f64
            );
        }
        _ => return Err(usage("exactly one of --tile or --edge is required")),
    }
    Ok(())
}

fn cmd_converge(
    common: CommonOpts,
    tiles: Vec<String>,
    edges: Vec<String>,
    kmax: usize,
    csv: Option<PathBuf>,
) -> Result<()> {
    let sys = load_system(&common)?;
    let sd = spectral_data(&sys)?;
    let mut addresses = Vec::new();
    for t in &tiles {
        addresses.push(parse_address(&sys, t)?);
    }
    let mut edge_refs = Vec::new();
    for e in &edges {
        edge_refs.push(parse_edge(&sys, e)?);
    }
    let report: ConvergenceReport<f64> = measures::convergence_report(
        &sys,
        &sd,
        &addresses,
        &edge_refs,
        kmax,
        BoundaryPolicy::Include,
    )?;
    print!("{report}");
    if let Some(path) = csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(&path, &buf)?;
    }
    Ok(())
}

fn cmd_bratteli(common: CommonOpts, depth: usize, check: bool) -> Result<()> {
    let sys = load_system(&common)?;
    let diag = bratteli::diagram_from_system(&sys);
    print!("{diag}");
    let a = diag.multiplicities().clone();
    println!("{:>5} {:>12}", "depth", "paths");
    for n in 0..=depth {
        println!("{:>5} {:>12}", n, spectral::count_tiles(&a, n));
    }
    if check {
        let sd = spectral_data(&sys)?;
        let report = bratteli::pushforward_check(&sys, &sd, depth)?;
        print!("{report}");
        if report.max_deviation > 1e-9 {
            return Err(anyhow!(
                "pushforward deviation {:.3e} exceeds 1e-9",
                report.max_deviation
            ));
        }
        println!("pushforward matches tile areas within 1e-9");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { common } => cmd_validate(common),
        Command::Spectral { common } => cmd_spectral(common),
        Command::Generate { common, k, svg } => cmd_generate(common, k, svg),
        Command::Measure {
            common,
            k,
            kind,
            csv,
            svg,
        } => cmd_measure(common, k, kind.into(), csv, svg),
        Command::Eval {
            common,
            k,
            kind,
            tile,
            edge,
            boundary,
        } => cmd_eval(common, k, kind.into(), tile, edge, boundary.into()),
        Command::Converge {
            common,
            tiles,
            edges,
            kmax,
            csv,
        } => cmd_converge(common, tiles, edges, kmax, csv),
        Command::Bratteli {
            common,
            depth,
            check_pushforward,
        } => cmd_bratteli(common, depth, check_pushforward),
    }
}

fn main() -> ExitCode {
    // die quietly when stdout is a closed pipe (e.g. `divpoint ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
