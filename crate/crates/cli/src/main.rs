//! `seshadri`: Seshadri constants, curves and Seshadri-function plots from an
//! intersection matrix.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use seshadri::elliptic::enumerate_elliptic;
use seshadri::envelope::{build_envelope, uniform_grid};
use seshadri::plot::{emit_plot, PlotFormat};
use seshadri::quad::{fmt_rational, parse_rational};
use seshadri::survey::{gap_centres, parse_range, run_survey, Family};
use seshadri::{Engine, ExecMode, IntersectionMatrix, LatticeBox, LatticeClass, Rational, SeshadriCurve, Surface};

#[derive(Parser)]
#[command(name = "seshadri", version, about = "Seshadri constants on abelian surfaces from the intersection matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The Seshadri constant of a nef class.
    Epsilon(ClassArgs),
    /// The curves computing the Seshadri constant of a class.
    Curves(ClassArgs),
    /// Elliptic classes in a coordinate box.
    Elliptic(EllipticArgs),
    /// Certified plot of the Seshadri function (Picard number two).
    Plot(PlotArgs),
    /// Gap reports over a family of matrices.
    Survey(SurveyArgs),
    /// Whether the Pell bound of a class is realized by a Seshadri curve.
    Verify(ClassArgs),
}

#[derive(Args)]
struct MatrixArg {
    /// Intersection matrix: inline JSON (`[[0,4],[4,0]]` or
    /// `{"matrix": ...}`) or a path to a JSON file.
    #[arg(short, long)]
    matrix: String,
}

#[derive(Args)]
struct ClassArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Class coordinates, comma separated; rationals such as `1/2` allowed.
    #[arg(short, long, allow_hyphen_values = true)]
    class: String,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EllipticArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Box radius in lattice coordinates.
    #[arg(long, default_value_t = 3)]
    radius: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Resolution below which uncertified intervals are reported as gaps.
    #[arg(long, default_value = "1/100")]
    delta: String,
    /// Initial grid: `n` equal steps of `[-1, 1]`.
    #[arg(long, default_value_t = 16)]
    grid: u32,
    #[arg(long, default_value = "csv,svg,tikz", value_delimiter = ',')]
    formats: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SurveyArgs {
    /// Matrix template such as `[[0,n],[n,0]]` or `[[2a,b],[b,0]]`.
    #[arg(long)]
    family: String,
    /// Variable range such as `n=1..6`; repeat for several variables.
    #[arg(long = "range", required = true)]
    ranges: Vec<String>,
    #[arg(long, default_value = "1/50")]
    delta: String,
    #[arg(long)]
    json: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<seshadri::Error> for Failure {
    fn from(e: seshadri::Error) -> Self {
        Failure { code: if e.is_validation() { 2 } else { 3 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|mode| run(cli.command, mode));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Sizes the global pool from `SESHADRI_THREADS`; one thread means
/// sequential execution.
fn configure_threads() -> Result<ExecMode, Failure> {
    let Ok(raw) = std::env::var("SESHADRI_THREADS") else {
        return Ok(ExecMode::default());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure { code: 2, message: format!("SESHADRI_THREADS must be a positive integer, got {raw:?}") })?;
    if n == 1 {
        return Ok(ExecMode::Sequential);
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: e.to_string() })?;
    Ok(ExecMode::default())
}

fn run(command: Command, mode: ExecMode) -> Outcome {
    match command {
        Command::Epsilon(a) => epsilon(a, mode),
        Command::Curves(a) => curves(a, mode),
        Command::Elliptic(a) => elliptic(a, mode),
        Command::Plot(a) => plot(a, mode),
        Command::Survey(a) => survey(a, mode),
        Command::Verify(a) => verify(a, mode),
    }
}

fn load_surface(arg: &MatrixArg, mode: ExecMode) -> Result<Surface, Failure> {
    let text = arg.matrix.trim();
    let json = if text.starts_with('[') || text.starts_with('{') { text.to_string() } else { fs::read_to_string(text)? };
    Ok(Surface::new(IntersectionMatrix::from_json(&json)?).with_exec(mode))
}

fn parse_class(s: &str) -> Result<Vec<Rational>, Failure> {
    let inner = s.trim().trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
    Ok(inner.split(',').map(|x| parse_rational(x.trim())).collect::<seshadri::Result<Vec<_>>>()?)
}

fn integer_class(v: &[Rational]) -> Result<LatticeClass, Failure> {
    v.iter()
        .map(|x| {
            x.is_integer()
                .then(|| x.to_integer().try_into().ok())
                .flatten()
                .ok_or_else(|| Failure { code: 2, message: format!("expected integer coordinates, got {}", fmt_rational(x)) })
        })
        .collect::<Result<Vec<i64>, _>>()
        .map(LatticeClass)
}

fn check_rho(surface: &Surface, v: &[Rational]) -> Result<(), Failure> {
    if v.len() != surface.rho() {
        return Err(seshadri::Error::DimensionMismatch { expected: surface.rho(), got: v.len() }.into());
    }
    Ok(())
}

fn pretty(value: serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"))
}

fn curve_line(c: &SeshadriCurve, at: &[Rational]) -> String {
    let mut line = format!("{:?} {} value {}", c.kind, c.cls, fmt_rational(&c.eval(at)));
    if let (Some(l), Some(k)) = (&c.ell, &c.k) {
        line += &format!(" ell {l} k {k}");
    }
    if let Some(v) = c.verified {
        line += &format!(" verified {v}");
    }
    line
}

fn epsilon(a: ClassArgs, mode: ExecMode) -> Outcome {
    let surface = load_surface(&a.matrix, mode)?;
    let v = parse_class(&a.class)?;
    check_rho(&surface, &v)?;
    let r = Engine::new(surface).seshadri_rational(&v)?;
    if a.json {
        return Ok(format!("{}\n", r.to_json()));
    }
    let mut out = format!("epsilon {} ~ {:.12}\nattained_by {:?}\n", r.value, r.value.to_f64(), r.attained_by);
    for c in &r.curves {
        out += &format!("curve {}\n", curve_line(c, &v));
    }
    Ok(out)
}

fn curves(a: ClassArgs, mode: ExecMode) -> Outcome {
    let surface = load_surface(&a.matrix, mode)?;
    let v = parse_class(&a.class)?;
    check_rho(&surface, &v)?;
    let r = Engine::new(surface).seshadri_rational(&v)?;
    if a.json {
        return Ok(pretty(json!({ "value": r.value, "curves": r.curves })));
    }
    Ok(r.curves.iter().map(|c| format!("{}\n", curve_line(c, &v))).collect())
}

fn elliptic(a: EllipticArgs, mode: ExecMode) -> Outcome {
    let surface = load_surface(&a.matrix, mode)?;
    let classes = enumerate_elliptic(&surface, LatticeBox::new(a.radius))?;
    if a.json {
        return Ok(pretty(json!(classes.iter().map(|e| e.0.coords().to_vec()).collect::<Vec<_>>())));
    }
    Ok(classes.iter().map(|e| format!("{}\n", e.0)).collect())
}

fn verify(a: ClassArgs, mode: ExecMode) -> Outcome {
    let surface = load_surface(&a.matrix, mode)?;
    let v = parse_class(&a.class)?;
    check_rho(&surface, &v)?;
    let p = integer_class(&v)?;
    let ok = Engine::new(surface).verify_ample_curve(&p)?;
    Ok(if a.json { pretty(json!({ "class": p, "verified": ok })) } else { format!("{ok}\n") })
}

fn plot(a: PlotArgs, mode: ExecMode) -> Outcome {
    let surface = load_surface(&a.matrix, mode)?;
    let delta = parse_rational(&a.delta)?;
    let formats = a.formats.iter().map(|f| f.parse::<PlotFormat>()).collect::<seshadri::Result<Vec<_>>>()?;
    let engine = Engine::new(surface).with_verification(false);
    let env = build_envelope(&engine, &uniform_grid(a.grid.max(1)), &delta)?;
    fs::create_dir_all(&a.out)?;
    let mut written = Vec::new();
    for f in formats {
        let path = a.out.join(format!("seshadri.{}", f.extension()));
        fs::write(&path, emit_plot(&env.segments, &env.gaps.uncovered, f.extension())?)?;
        written.push(path);
    }
    let gaps_path = a.out.join("gaps.json");
    fs::write(&gaps_path, pretty(json!(env.gaps)))?;
    written.push(gaps_path);
    if a.json {
        return Ok(pretty(json!({
            "segments": env.segments.len(),
            "gaps": env.gaps,
            "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        })));
    }
    let mut out = format!("segments {}\ngaps {}\n", env.segments.len(), env.gaps.uncovered.len());
    for g in &env.gaps.uncovered {
        out += &format!("gap {} {}\n", fmt_rational(&g.lo), fmt_rational(&g.hi));
    }
    for p in &written {
        out += &format!("wrote {}\n", p.display());
    }
    Ok(out)
}

fn survey(a: SurveyArgs, mode: ExecMode) -> Outcome {
    let ranges = a.ranges.iter().map(|r| parse_range(r)).collect::<seshadri::Result<Vec<_>>>()?;
    let family = Family::new(&a.family, &ranges)?;
    let delta = parse_rational(&a.delta)?;
    let rows = run_survey(&family, &delta, mode)?;
    if a.json {
        return Ok(pretty(json!(rows)));
    }
    Ok(rows
        .iter()
        .map(|row| {
            let params: Vec<String> = row.params.iter().map(|(v, x)| format!("{v}={x}")).collect();
            let status = match (&row.piecewise_linear, &row.error) {
                (Some(p), _) => format!("piecewise_linear {p} segments {}", row.segment_count),
                (None, Some(e)) => format!("error {e}"),
                (None, None) => "error".to_string(),
            };
            let centres: Vec<String> = gap_centres(row).iter().map(fmt_rational).collect();
            format!("{} {:?} {} gaps [{}]\n", params.join(" "), row.matrix, status, centres.join(", "))
        })
        .collect())
}
