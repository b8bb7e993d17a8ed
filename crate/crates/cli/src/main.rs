use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use contour_volume::mesh::{
    write_ele, write_field_values, write_node, FieldSource, GridDims, TetMesh,
};
use contour_volume::pipeline::{
    bench, load_mesh, run, with_threads, write_bench_csv, write_tet_coefficients, MeshInput,
    PipelineConfig, WeightMethod,
};
use contour_volume::synth;
use contour_volume::verify::{verify, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "ct",
    version,
    about = "Contour trees with exact superarc volumes on tetrahedral meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the tree, weigh and decompose it, and extract the top branches.
    Run(RunArgs),
    /// Check the analytic volumes against brute-force references.
    Verify(VerifyArgs),
    /// Time tree construction, weights and branch decomposition as CSV.
    Bench(BenchArgs),
    /// Dump the per-tet volume spline coefficients as CSV.
    Coeffs(CoeffsArgs),
    /// Write a synthetic mesh as TetGen files.
    Gen(GenArgs),
}

#[derive(Args, Clone, Debug, Default)]
struct InputArgs {
    /// TetGen .node file.
    #[arg(long, requires = "ele")]
    node: Option<PathBuf>,
    /// TetGen .ele file.
    #[arg(long, requires = "node")]
    ele: Option<PathBuf>,
    /// Scalar field file with one value per vertex.
    #[arg(long, conflicts_with = "field_attr")]
    field: Option<PathBuf>,
    /// Use .node attribute column K (0-based) as the field.
    #[arg(long, value_name = "K")]
    field_attr: Option<usize>,
    /// Grid dimensions for a raw input.
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], requires = "raw")]
    dims: Option<Vec<usize>>,
    /// Little-endian f64 grid values, x fastest.
    #[arg(long, requires = "dims")]
    raw: Option<PathBuf>,
    /// Grid spacing.
    #[arg(long, num_args = 3, value_names = ["SX", "SY", "SZ"], default_values_t = [1.0, 1.0, 1.0])]
    spacing: Vec<f64>,
}

impl InputArgs {
    fn is_given(&self) -> bool {
        self.node.is_some() || self.raw.is_some()
    }

    fn to_input(&self) -> Result<MeshInput> {
        match (&self.node, &self.ele, &self.raw, &self.dims) {
            (Some(_), _, Some(_), _) => bail!("give either --node/--ele or --dims/--raw, not both"),
            (Some(node), Some(ele), None, _) => {
                let field = match (&self.field, self.field_attr) {
                    (Some(p), _) => FieldSource::ValuesFile(p.clone()),
                    (None, Some(k)) => FieldSource::Attribute(k),
                    (None, None) => bail!("TetGen input needs --field or --field-attr"),
                };
                Ok(MeshInput::Tetgen {
                    node: node.clone(),
                    ele: ele.clone(),
                    field,
                })
            }
            (None, _, Some(raw), Some(d)) => {
                if self.field.is_some() || self.field_attr.is_some() {
                    bail!("--field and --field-attr apply to TetGen input only");
                }
                Ok(MeshInput::Grid {
                    dims: GridDims::new(d[0], d[1], d[2]),
                    raw: raw.clone(),
                    spacing: [self.spacing[0], self.spacing[1], self.spacing[2]],
                })
            }
            _ => bail!("no input: give --node/--ele with a field, or --dims/--raw"),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Weights {
    Count,
    Volume,
}

impl From<Weights> for WeightMethod {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Count => WeightMethod::Count,
            Weights::Volume => WeightMethod::Volume,
        }
    }
}

fn parse_isovalue(s: &str) -> Result<(u32, f64), String> {
    let (arc, h) = s
        .split_once('=')
        .ok_or_else(|| format!("expected SUPERARC=H, got {s:?}"))?;
    let arc = arc
        .trim()
        .parse()
        .map_err(|_| format!("bad superarc id {arc:?}"))?;
    let h: f64 = h
        .trim()
        .parse()
        .map_err(|_| format!("bad isovalue {h:?}"))?;
    if !h.is_finite() {
        return Err(format!("isovalue must be finite, got {h}"));
    }
    Ok((arc, h))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "volume")]
    weights: Weights,
    /// Number of branches to extract.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    top: u32,
    /// Extract the branch containing SUPERARC at isovalue H instead of its default.
    #[arg(long, value_name = "SUPERARC=H", value_parser = parse_isovalue)]
    isovalue: Vec<(u32, f64)>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Accepted for symmetry with the generators; the pipeline is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Random tets for the spline checks.
    #[arg(long, default_value_t = 1000)]
    tets: usize,
    /// Random grids for the tree and sweep checks.
    #[arg(long, default_value_t = 10)]
    grids: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Mesh to time; without one, seeded synthetic meshes of each --sizes edge length are used.
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [16, 24, 32])]
    sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "volume")]
    weights: Weights,
    /// Repetitions per mesh; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    /// Uniform random values on an N^3 grid.
    RandomGrid,
    /// Smooth random field on an N^3 grid with displaced vertices.
    Jittered,
    /// Distance from the centre of an N^3 grid.
    Sphere,
    /// Two Gaussian peaks on an N^3 grid.
    TwoPeak,
    /// Two peaks, one in a few large tets and one in many small tets.
    Contrast,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Grid edge length in vertices.
    #[arg(long, default_value_t = 16)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "mesh")]
    out: PathBuf,
}

fn generate(kind: Kind, size: usize, seed: u64) -> Result<TetMesh> {
    if size < 2 && !matches!(kind, Kind::Contrast) {
        bail!("--size must be at least 2");
    }
    Ok(match kind {
        Kind::RandomGrid => synth::random_grid(size, seed),
        Kind::Jittered => synth::jittered_mesh(size, seed),
        Kind::Sphere => synth::sphere_grid(size),
        Kind::TwoPeak => synth::two_peak_grid(size),
        Kind::Contrast => synth::contrast_mesh(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            f(&mut out)
                .and_then(|_| out.flush())
                .with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            f(&mut out)
                .and_then(|_| out.flush())
                .context("writing stdout")
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let _ = args.seed;
    let config = PipelineConfig {
        input: args.input.to_input()?,
        weights: args.weights.into(),
        top_k: args.top as usize,
        isovalues: args.isovalue,
        out_dir: args.out,
        threads: args.threads,
    };
    let summary = run(&config)?;
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let cfg = VerifyConfig {
        seed: args.seed,
        tets: args.tets,
        grids: args.grids,
    };
    let checks = with_threads(args.threads, || verify(&cfg))?;
    for c in &checks {
        println!("{c}");
    }
    Ok(if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let method: WeightMethod = args.weights.into();
    let rows = with_threads(args.threads, || -> Result<_> {
        if args.input.is_given() {
            let input = args.input.to_input()?;
            let mesh = load_mesh(&input)?;
            Ok(vec![bench("input", &mesh, method, args.repeat)?])
        } else {
            args.sizes
                .iter()
                .map(|&n| {
                    let mesh = generate(Kind::Jittered, n, args.seed)?;
                    Ok(bench(&format!("jittered_{n}"), &mesh, method, args.repeat)?)
                })
                .collect()
        }
    })??;
    with_output(args.out.as_deref(), |out| write_bench_csv(&rows, out))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_coeffs(args: CoeffsArgs) -> Result<ExitCode> {
    let mesh = load_mesh(&args.input.to_input()?)?;
    with_output(args.out.as_deref(), |out| {
        write_tet_coefficients(&mesh, out)
    })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let mesh = generate(args.kind, args.size, args.seed)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let node = args.out.join("mesh.node");
    let ele = args.out.join("mesh.ele");
    let field = args.out.join("mesh.field");
    with_output(Some(&node), |out| write_node(&mesh, true, out))?;
    with_output(Some(&ele), |out| write_ele(&mesh, out))?;
    with_output(Some(&field), |out| write_field_values(mesh.values(), out))?;
    println!(
        "{} vertices, {} tets -> {}, {}, {}",
        mesh.vertex_count(),
        mesh.tet_count(),
        node.display(),
        ele.display(),
        field.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isovalue_flag_parsing() {
        assert_eq!(parse_isovalue("3=0.25"), Ok((3, 0.25)));
        assert_eq!(parse_isovalue(" 7 = -1e3"), Ok((7, -1000.0)));
        assert!(parse_isovalue("3").is_err());
        assert!(parse_isovalue("x=1").is_err());
        assert!(parse_isovalue("1=nan").is_err());
    }

    #[test]
    fn input_specs_are_exclusive() {
        let tetgen = InputArgs {
            node: Some("a.node".into()),
            ele: Some("a.ele".into()),
            field_attr: Some(0),
            spacing: vec![1.0; 3],
            ..Default::default()
        };
        assert!(matches!(
            tetgen.to_input().unwrap(),
            MeshInput::Tetgen { .. }
        ));
        let both = InputArgs {
            raw: Some("f.f64".into()),
            dims: Some(vec![2, 2, 2]),
            ..tetgen.clone()
        };
        assert!(both.to_input().is_err());
        let no_field = InputArgs {
            field_attr: None,
            ..tetgen
        };
        assert!(no_field.to_input().is_err());
        assert!(InputArgs {
            spacing: vec![1.0; 3],
            ..Default::default()
        }
        .to_input()
        .is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
