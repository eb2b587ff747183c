//! `pswf3d`: basis construction, Born data generation, processing,
//! reconstruction and volume export.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pswf3d::borndata::{add_noise_records, farfield_from_born, Aabb, ContrastSpec};
use pswf3d::config::{RunConfig, Wave};
use pswf3d::io::{self, FarFieldSet, VolumeFormat, VolumeMeta};
use pswf3d::pipeline::{born_to_processed, extract_processed_with, ProcessedData, Search};
use pswf3d::pswf::{build_basis_with, BasisOptions, PswfBasis, RadialProfile, Truncation, DEFAULT_TRUNCATION};
use pswf3d::quadrature::{ball_grid, fibonacci_sphere};
use pswf3d::reconstruct::{
    evaluate_volume, evaluate_volume_extended, localized_reconstruct, lowrank_reconstruct, project,
    tikhonov_reconstruct, CoefficientField, CutoffPolicy,
};
use pswf3d::{Error, Result};

#[derive(Parser)]
#[command(name = "pswf3d", version, about = "3D prolate spheroidal wave functions for Born inverse scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect a basis cache.
    #[command(subcommand)]
    Basis(BasisCmd),
    /// Generate synthetic Born data.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Turn a far-field file into processed data on the ball grid.
    Process(ProcessArgs),
    /// Reconstruct contrast coefficients from processed data.
    Reconstruct {
        #[command(subcommand)]
        method: ReconstructCmd,
    },
    /// Evaluate a coefficient field on a voxel grid and write it out.
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct WaveArgs {
    /// Wave number (c = 2k).
    #[arg(long, short = 'k', conflicts_with = "c")]
    k: Option<f64>,
    /// Bandwidth.
    #[arg(long, short = 'c')]
    c: Option<f64>,
}

impl WaveArgs {
    fn wave(&self) -> Result<Wave> {
        Wave::from_options(self.k, self.c)
    }
}

#[derive(Args, Clone)]
struct TruncationArgs {
    /// Fixed truncation order K of the Jacobi expansion.
    #[arg(long = "order", short = 'K', default_value_t = DEFAULT_TRUNCATION, conflicts_with = "per_degree")]
    order: usize,
    /// Per-degree truncation: K_m = ceil((M - m) / 2).
    #[arg(long)]
    per_degree: Option<usize>,
}

impl TruncationArgs {
    fn truncation(&self) -> Truncation {
        match self.per_degree {
            Some(total) => Truncation::PerDegree(total),
            None => Truncation::Fixed(self.order),
        }
    }
}

#[derive(Args, Clone)]
struct CutoffArgs {
    /// Absolute cutoff on |alpha|.
    #[arg(long, conflicts_with = "sigma_rel")]
    sigma: Option<f64>,
    /// Cutoff as a fraction of |alpha_00|.
    #[arg(long)]
    sigma_rel: Option<f64>,
    /// Automatic cutoff for a contrast that may extend outside the ball (0.9 |alpha_00|).
    #[arg(long)]
    outside_support: bool,
}

impl CutoffArgs {
    /// `delta` is the noise level recorded with the data, if any.
    fn policy(&self, delta: f64, alpha00: f64) -> CutoffPolicy {
        match (self.sigma, self.sigma_rel) {
            (Some(s), _) => CutoffPolicy::Explicit(s),
            (None, Some(r)) => CutoffPolicy::Explicit(r * alpha00),
            (None, None) => CutoffPolicy::Auto { delta, outside_support: self.outside_support },
        }
    }
}

#[derive(Subcommand)]
enum BasisCmd {
    /// Compute the basis and write a cache file.
    Build {
        #[command(flatten)]
        wave: WaveArgs,
        #[command(flatten)]
        truncation: TruncationArgs,
        #[command(flatten)]
        cutoff: CutoffArgs,
        /// Output file; defaults to the standard cache name in the current directory.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Summarize a cache file.
    Info {
        basis: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ContrastName {
    Ball,
    Cube,
    ThreeCubes,
    Oscillatory,
}

#[derive(Args, Clone)]
struct ContrastArgs {
    #[arg(long, value_enum, default_value_t = ContrastName::Ball)]
    contrast: ContrastName,
    /// Ball radius.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Cube lower corner, "x,y,z".
    #[arg(long, value_parser = parse_vec3, default_value = "-0.5,-0.5,-0.5")]
    lower: [f64; 3],
    /// Cube upper corner, "x,y,z".
    #[arg(long, value_parser = parse_vec3, default_value = "0.5,0.5,0.5")]
    upper: [f64; 3],
    /// Oscillation index of the oscillatory contrast.
    #[arg(long = "osc-m", default_value_t = 8)]
    osc_m: i32,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

impl ContrastArgs {
    fn spec(&self) -> Result<ContrastSpec> {
        let spec = match self.contrast {
            ContrastName::Ball => {
                if !(self.radius > 0.0) {
                    return Err(Error::Validation(format!("radius must be positive, got {}", self.radius)));
                }
                ContrastSpec::ball(self.radius)
            }
            ContrastName::Cube => ContrastSpec::cube(self.lower, self.upper)?,
            ContrastName::ThreeCubes => ContrastSpec::three_cubes(),
            ContrastName::Oscillatory => ContrastSpec::oscillatory(self.osc_m),
        };
        Ok(spec.with_amplitude(self.amplitude))
    }

    fn label(&self) -> &'static str {
        match self.contrast {
            ContrastName::Ball => "ball",
            ContrastName::Cube => "cube",
            ContrastName::ThreeCubes => "three-cubes",
            ContrastName::Oscillatory => "oscillatory",
        }
    }
}

#[derive(Args, Clone)]
struct NoiseArgs {
    /// Relative noise level.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Sample the Born transform directly on the ball grid (processed data).
    Born {
        #[command(flatten)]
        wave: WaveArgs,
        #[command(flatten)]
        contrast: ContrastArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Ball grid node counts "T,M_theta,M_phi".
        #[arg(long, value_parser = parse_grid, default_value = "23,31,61")]
        grid: (usize, usize, usize),
        #[arg(long, short = 'o')]
        out: PathBuf,
    },
    /// Far-field data on Fibonacci direction sets.
    Farfield {
        #[command(flatten)]
        wave: WaveArgs,
        #[command(flatten)]
        contrast: ContrastArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Number of observation directions.
        #[arg(long, default_value_t = 201)]
        n1: usize,
        /// Number of incident directions.
        #[arg(long, default_value_t = 201)]
        n2: usize,
        #[arg(long, short = 'o')]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ProcessArgs {
    /// Far-field file.
    input: PathBuf,
    #[arg(long, value_parser = parse_grid, default_value = "23,31,61")]
    grid: (usize, usize, usize),
    /// Use the brute-force nearest-neighbour search.
    #[arg(long)]
    brute_force: bool,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct BasisSource {
    /// Basis cache file.
    #[arg(long, conflicts_with = "cache_dir")]
    basis: Option<PathBuf>,
    /// Directory of cache files, built on demand.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    truncation: TruncationArgs,
}

#[derive(Args, Clone)]
struct ReconstructArgs {
    /// Processed data file.
    data: PathBuf,
    #[command(flatten)]
    source: BasisSource,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ReconstructCmd {
    /// Spectral cutoff inversion.
    Lowrank(ReconstructArgs),
    /// Tikhonov regularization with a Sobolev-type penalty.
    Tikhonov {
        #[command(flatten)]
        common: ReconstructArgs,
        #[arg(long, default_value_t = 1e-4)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
    },
    /// Cutoff inversion for contrasts with support outside the ball.
    Localized(ReconstructArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatName {
    Raw,
    Vtk,
}

#[derive(Args)]
struct ExportArgs {
    /// Coefficient file.
    coeffs: PathBuf,
    #[command(flatten)]
    source: BasisSource,
    /// Cells per axis, "n" or "nx,ny,nz".
    #[arg(long, value_parser = parse_resolution, default_value = "64")]
    resolution: [usize; 3],
    /// Box lower corner.
    #[arg(long, value_parser = parse_vec3, default_value = "-1,-1,-1")]
    lower: [f64; 3],
    /// Box upper corner.
    #[arg(long, value_parser = parse_vec3, default_value = "1,1,1")]
    upper: [f64; 3],
    /// Evaluate outside the unit ball through the extended functions.
    #[arg(long)]
    extended: bool,
    #[arg(long, value_parser = parse_grid, default_value = "23,31,61")]
    grid: (usize, usize, usize),
    #[arg(long, value_enum, default_value_t = FormatName::Vtk)]
    format: FormatName,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("invalid value {p:?}")))
        .collect()
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = parse_list(s)?;
    v.try_into().map_err(|_| "expected three comma-separated numbers".to_string())
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let v: Vec<usize> = parse_list(s)?;
    match v[..] {
        [t, a, b] => Ok((t, a, b)),
        _ => Err("expected T,M_theta,M_phi".into()),
    }
}

fn parse_resolution(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = parse_list(s)?;
    match v[..] {
        [n] => Ok([n; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err("expected n or nx,ny,nz".into()),
    }
}

fn alpha00(c: f64, truncation: Truncation) -> Result<f64> {
    Ok(RadialProfile::compute(0, 0, c, truncation.order_for(0))?.alpha_abs())
}

/// Loads the basis for `c`, restricted to `sigma` when given.
fn load_basis(src: &BasisSource, c: f64, sigma: Option<f64>) -> Result<PswfBasis> {
    let truncation = src.truncation.truncation();
    let basis = match (&src.basis, &src.cache_dir) {
        (Some(path), _) => io::read_basis_cache_for(path, c)?,
        (None, Some(dir)) => match sigma {
            Some(sigma) => {
                let opts = BasisOptions { truncation, sigma, ..Default::default() };
                return io::load_or_build_basis(dir, c, &opts);
            }
            None => io::read_basis_cache_for(&dir.join(io::basis_cache_name(c, truncation)), c)?,
        },
        (None, None) => return Err(Error::Validation("give --basis or --cache-dir".into())),
    };
    match sigma {
        Some(s) if s < basis.sigma() => Err(Error::Validation(format!(
            "cache was built with cutoff {:e}, above the requested {s:e}",
            basis.sigma()
        ))),
        Some(s) if s > basis.sigma() => basis.restrict(s),
        _ => Ok(basis),
    }
}

fn run_basis(cmd: BasisCmd) -> Result<()> {
    match cmd {
        BasisCmd::Build { wave, truncation, cutoff, out } => {
            let mut cfg = RunConfig::new(wave.wave()?);
            cfg.truncation = truncation.truncation();
            let c = cfg.wave.c();
            cfg.cutoff = cutoff.policy(0.0, alpha00(c, cfg.truncation)?);
            cfg.validate()?;
            let sigma = cfg.cutoff.sigma(alpha00(c, cfg.truncation)?);
            let start = Instant::now();
            let basis = build_basis_with(c, &BasisOptions { truncation: cfg.truncation, sigma, ..Default::default() })?;
            let out = out.unwrap_or_else(|| PathBuf::from(io::basis_cache_name(c, cfg.truncation)));
            io::write_basis_cache(&basis, &out)?;
            eprintln!(
                "built {} modes (c = {c}, sigma = {sigma:e}) in {:.2?}; wrote {}",
                basis.len(),
                start.elapsed(),
                out.display()
            );
        }
        BasisCmd::Info { basis } => {
            let b = io::read_basis_cache(&basis)?;
            let min_alpha = b.modes().last().map_or(0.0, |md| md.alpha_abs());
            println!("c = {}", b.c());
            println!("truncation = {:?}", b.truncation());
            println!("sigma = {:e}", b.sigma());
            println!("modes = {}", b.len());
            println!("radial profiles = {}", b.profiles().len());
            println!("max degree = {}", b.max_m());
            println!("|alpha| range = [{min_alpha:e}, {:e}]", b.alpha_max());
        }
    }
    Ok(())
}

fn run_gen(cmd: GenCmd) -> Result<()> {
    match cmd {
        GenCmd::Born { wave, contrast, noise, grid, out } => {
            let mut cfg = RunConfig::new(wave.wave()?);
            cfg.grid = grid;
            cfg.delta = noise.delta;
            cfg.seed = noise.seed;
            cfg.validate()?;
            let spec = contrast.spec()?;
            let (t, mt, mp) = cfg.grid;
            let grid = Arc::new(ball_grid(t, mt, mp)?);
            let mut data = born_to_processed(|p, c| spec.born(p, c), grid, cfg.wave.c(), contrast.label())?;
            if cfg.delta > 0.0 {
                data.add_noise(cfg.delta, cfg.seed)?;
            }
            io::write_processed(&data, &out)?;
        }
        GenCmd::Farfield { wave, contrast, noise, n1, n2, out } => {
            let mut cfg = RunConfig::new(wave.wave()?);
            cfg.delta = noise.delta;
            cfg.seed = noise.seed;
            cfg.validate()?;
            if n1 == 0 || n2 == 0 {
                return Err(Error::Validation("direction counts must be at least 1".into()));
            }
            let spec = contrast.spec()?;
            let k = cfg.wave.k();
            let mut records =
                farfield_from_born(|p, c| spec.born(p, c), k, &fibonacci_sphere(n2)?, &fibonacci_sphere(n1)?)?;
            if cfg.delta > 0.0 {
                add_noise_records(&mut records, cfg.delta, cfg.seed)?;
            }
            let set = FarFieldSet { k, n1, n2, source: contrast.label().to_string(), records };
            io::write_farfield(&out, &set)?;
        }
    }
    Ok(())
}

fn run_process(args: ProcessArgs) -> Result<()> {
    let set = io::read_farfield(&args.input)?;
    let mut cfg = RunConfig::new(Wave::K(set.k));
    cfg.grid = args.grid;
    cfg.validate()?;
    let (t, mt, mp) = cfg.grid;
    let grid = Arc::new(ball_grid(t, mt, mp)?);
    let search = if args.brute_force { Search::BruteForce } else { Search::Indexed };
    let mut data = extract_processed_with(&set.records, grid, set.k, search)?;
    data.meta.source = set.source;
    eprintln!("largest matching distance {:.3e}", data.max_matching_distance());
    io::write_processed(&data, &args.out)?;
    Ok(())
}

fn prepare(args: &ReconstructArgs) -> Result<(ProcessedData, Arc<PswfBasis>)> {
    let data = io::read_processed(&args.data)?;
    let truncation = args.source.truncation.truncation();
    let a00 = alpha00(data.c, truncation)?;
    let mut cfg = RunConfig::new(Wave::C(data.c));
    cfg.truncation = truncation;
    cfg.cutoff = args.cutoff.policy(data.meta.delta.unwrap_or(0.0), a00);
    cfg.validate()?;
    let sigma = cfg.cutoff.sigma(a00);
    let basis = load_basis(&args.source, data.c, Some(sigma))?;
    Ok((data, Arc::new(basis)))
}

fn run_reconstruct(cmd: ReconstructCmd) -> Result<()> {
    let (args, field) = match cmd {
        ReconstructCmd::Lowrank(args) => {
            let (data, basis) = prepare(&args)?;
            let field = lowrank_reconstruct(&project(&data, basis)?)?;
            (args, field)
        }
        ReconstructCmd::Tikhonov { common, eta, s } => {
            let (data, basis) = prepare(&common)?;
            let mut cfg = RunConfig::new(Wave::C(data.c));
            cfg.eta = eta;
            cfg.s = s;
            cfg.validate()?;
            let field = tikhonov_reconstruct(&project(&data, basis)?, cfg.eta, cfg.s)?;
            (common, field)
        }
        ReconstructCmd::Localized(args) => {
            let (data, basis) = prepare(&args)?;
            let sigma = basis.sigma();
            let field = localized_reconstruct(&project(&data, basis)?, sigma)?;
            (args, field)
        }
    };
    eprintln!("{} coefficients, norm {:.6e}", field.len(), field.l2_norm());
    io::write_coefficients(&field, &args.out)
}

fn coefficient_bandwidth(path: &Path) -> Result<f64> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 13 || &bytes[..4] != io::FIELD_MAGIC {
        return Err(Error::Format(format!("{} is not a coefficient file", path.display())));
    }
    Ok(f64::from_le_bytes(bytes[5..13].try_into().expect("eight bytes")))
}

fn run_export(args: ExportArgs) -> Result<()> {
    let c = coefficient_bandwidth(&args.coeffs)?;
    let basis = Arc::new(load_basis(&args.source, c, None)?);
    let field: CoefficientField = io::read_coefficients(&args.coeffs, basis.clone())?;
    let mut cfg = RunConfig::new(Wave::C(c));
    cfg.resolution = args.resolution;
    cfg.extent = Aabb::new(args.lower, args.upper)?;
    cfg.grid = args.grid;
    cfg.validate()?;
    let spec = cfg.volume_spec();
    let volume = if args.extended {
        let (t, mt, mp) = cfg.grid;
        evaluate_volume_extended(&field, spec, Arc::new(ball_grid(t, mt, mp)?))?
    } else {
        evaluate_volume(&field, spec)?
    };
    let format = match args.format {
        FormatName::Raw => VolumeFormat::Raw,
        FormatName::Vtk => VolumeFormat::Vtk,
    };
    let meta = VolumeMeta { c, cutoff: basis.sigma(), provenance: args.coeffs.display().to_string() };
    io::write_volume(&volume, &args.out, format, &meta)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis(cmd) => run_basis(cmd),
        Command::Gen(cmd) => run_gen(cmd),
        Command::Process(args) => run_process(args),
        Command::Reconstruct { method } => run_reconstruct(method),
        Command::Export(args) => run_export(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
