use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcwave::checks::{self, CheckReport};
use mcwave::config::ExperimentConfig;
use mcwave::error::{AppError, AppResult};
use mcwave::experiment::{population_errors, run_convergence, summarize, Setup};
use mcwave::{io, plot};
use mcwave_core::graph::{
    build_laplacian, graph_fourier, graph_frame_atoms, laplacian_pinv_kernel, DEFAULT_PINV_TOL,
};
use mcwave_core::{
    build_frame, EmpiricalFrame, FilterFamily, GraphFrame, KernelSpec, LaplacianKind, PointSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "mcwave",
    version,
    about = "Monte Carlo wavelet frames from reproducing kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a frame or dump its atoms.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Wavelet coefficients of sampled data.
    Transform(TransformArgs),
    /// Reconstruct f̂ = g_τ(T̂)T̂f from samples.
    Reconstruct(ReconstructArgs),
    /// Randomized identity checks.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Convergence-rate experiments.
    #[command(subcommand)]
    Rates(RatesCmd),
    /// Graph Laplacians and graph frames.
    #[command(subcommand)]
    Graph(GraphCmd),
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// `heat:t,M`, `gaussian:sigma,dim` or `matrix:path`.
    #[arg(long, default_value = "heat:0.1,16")]
    kernel: String,
    /// Points file: one point per line (angle for heat, coordinates for gaussian).
    #[arg(long, conflicts_with = "random")]
    points: Option<PathBuf>,
    /// Draw this many uniform points instead of reading a file.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Filter family, e.g. `dyadic`, `tikhonov`, `landweber:0.5`.
    #[arg(long, default_value = "dyadic")]
    filter: String,
    /// Eigenvalue drop threshold (default 1e-12 of the largest).
    #[arg(long)]
    drop: Option<f64>,
}

#[derive(Subcommand)]
enum FrameCmd {
    /// Build the frame and report its spectrum.
    Build {
        #[command(flatten)]
        k: KernelArgs,
        /// Write the empirical eigenvalues, one per line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the atom coefficients of one scale; row k holds ψ̂_{j,k}.
    Dump {
        #[command(flatten)]
        k: KernelArgs,
        #[arg(long)]
        scale: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    k: KernelArgs,
    /// Samples y, one value per line.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    tau: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    k: KernelArgs,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    tau: u32,
    /// Kernel-expansion coefficients of f̂.
    #[arg(long)]
    out: PathBuf,
    /// Evaluate f̂ at these points as well.
    #[arg(long, requires = "values")]
    eval: Option<PathBuf>,
    #[arg(long)]
    values: Option<PathBuf>,
}

#[derive(Args)]
struct CheckCommon {
    #[arg(long, default_value = "heat:0.1,16")]
    kernel: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Dyadic frames are Parseval on the sample span.
    Parseval {
        #[command(flatten)]
        c: CheckCommon,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Frame operators telescope to the resolution of identity.
    Telescope {
        #[command(flatten)]
        c: CheckCommon,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        tau_max: u32,
    },
    /// Tikhonov reconstruction equals kernel ridge regression.
    Krr {
        #[command(flatten)]
        c: CheckCommon,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
        taus: Vec<u32>,
    },
    /// Population-only approximation error over a range of τ.
    Approx {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
        taus: Vec<u32>,
    },
}

#[derive(Subcommand)]
enum RatesCmd {
    /// Run the sweep described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        rows: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit rates to an existing rows file.
    Fit {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.25)]
        theory_h: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.3)]
        theory_rho: f64,
        #[arg(long, default_value_t = 0.8)]
        confidence: f64,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LapKind {
    Unnormalized,
    Normalized,
}

#[derive(Args)]
struct GraphInput {
    /// Edge list with `i k w` per line.
    #[arg(long)]
    edges: PathBuf,
    /// Vertex count (default: largest index + 1).
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long, value_enum, default_value_t = LapKind::Unnormalized)]
    laplacian: LapKind,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Write the Laplacian, or its pseudoinverse kernel.
    Laplacian {
        #[command(flatten)]
        g: GraphInput,
        #[arg(long)]
        pinv: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dyadic graph-frame coefficients of a vertex signal, as `j,k,value`.
    Frame {
        #[command(flatten)]
        g: GraphInput,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parseval identity on f ⊥ 1 and the pseudoinverse spectrum flip.
    Check {
        #[command(flatten)]
        g: GraphInput,
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Command) -> AppResult<()> {
    match cmd {
        Command::Frame(FrameCmd::Build { k, out }) => {
            let frame = frame_from(&k)?;
            let vals = &frame.eigensystem().values;
            println!("points         {}", frame.len());
            println!("filter         {}", frame.filters().name());
            println!("retained       {}", frame.retained());
            println!("lambda_max     {}", vals[0]);
            println!("lambda_min     {}", frame.lambda_min());
            println!("drop_threshold {}", frame.drop_threshold());
            if frame.filters().localized() {
                println!("parseval_scale {}", frame.parseval_scale());
                println!("scale_cap      {}", frame.scale_cap());
            }
            if let Some(p) = out {
                io::write_vector(&p, vals)?;
            }
            Ok(())
        }
        Command::Frame(FrameCmd::Dump { k, scale, out }) => {
            let frame = frame_from(&k)?;
            let rows = (0..frame.len())
                .map(|i| frame.atom_coefficients(scale, i))
                .collect::<Result<Vec<_>, _>>()?;
            let m = mcwave_core::Matrix::from_rows(&rows)?;
            io::write_matrix(&out, &m)
        }
        Command::Transform(a) => {
            let frame = frame_from(&a.k)?;
            let y = read_samples(&a.signal, frame.len())?;
            let c = frame.analyze(&y, a.tau)?;
            println!("energy {}", c.energy());
            println!("norm   {}", frame.sample_hilbert_norm_sq(&y)?);
            io::write_coefficients(&a.out, &c)
        }
        Command::Reconstruct(a) => {
            let frame = frame_from(&a.k)?;
            let y = read_samples(&a.signal, frame.len())?;
            let f = frame.reconstruct(&y, a.tau)?;
            io::write_vector(&a.out, &f.coeffs)?;
            if let (Some(at), Some(values)) = (a.eval, a.values) {
                let pts = read_points(&a.k.kernel_spec()?, &at)?;
                io::write_vector(&values, &f.eval_on(&pts)?)?;
            }
            Ok(())
        }
        Command::Check(c) => run_check(c),
        Command::Rates(r) => run_rates(r),
        Command::Graph(g) => run_graph(g),
    }
}

impl KernelArgs {
    fn kernel_spec(&self) -> AppResult<KernelSpec> {
        parse_kernel(&self.kernel)
    }
}

fn parse_kernel(s: &str) -> AppResult<KernelSpec> {
    let bad = || AppError::Config(format!("cannot parse kernel `{s}`"));
    let (head, arg) = s.split_once(':').ok_or_else(bad)?;
    let nums = |n: usize| -> AppResult<Vec<&str>> {
        let v: Vec<&str> = arg.split(',').map(str::trim).collect();
        if v.len() == n {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    match head.trim() {
        "heat" => {
            let v = nums(2)?;
            let t = v[0].parse().map_err(|_| bad())?;
            let m = v[1].parse().map_err(|_| bad())?;
            Ok(KernelSpec::circle_heat(t, m).map_err(|e| AppError::Config(e.to_string()))?)
        }
        "gaussian" => {
            let v = nums(2)?;
            let sigma = v[0].parse().map_err(|_| bad())?;
            let d = v[1].parse().map_err(|_| bad())?;
            Ok(KernelSpec::gaussian(sigma, d).map_err(|e| AppError::Config(e.to_string()))?)
        }
        "matrix" => {
            let m = io::read_matrix(Path::new(arg.trim()))?;
            Ok(KernelSpec::matrix_backed(m)?)
        }
        _ => Err(bad()),
    }
}

fn read_points(kernel: &KernelSpec, path: &Path) -> AppResult<PointSet> {
    use mcwave_core::kernels::Kernel;
    let rows = io::read_numeric_rows(path)?;
    let width = |w: usize| {
        if rows.iter().all(|r| r.len() == w) {
            Ok(())
        } else {
            Err(AppError::parse(
                path,
                format!("expected {w} column(s) per point"),
            ))
        }
    };
    Ok(match kernel.kernel() {
        Kernel::CircleHeat { .. } => {
            width(1)?;
            PointSet::circle(rows.into_iter().map(|r| r[0]).collect())?
        }
        Kernel::Gaussian { dim, .. } => {
            width(*dim)?;
            PointSet::euclidean(*dim, rows.concat())?
        }
        Kernel::Matrix(_) => {
            width(1)?;
            let idx = rows
                .iter()
                .map(|r| {
                    let v = r[0];
                    if v >= 0.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(AppError::parse(
                            path,
                            format!("`{v}` is not a vertex index"),
                        ))
                    }
                })
                .collect::<AppResult<Vec<_>>>()?;
            PointSet::vertices(idx)?
        }
    })
}

fn frame_from(k: &KernelArgs) -> AppResult<EmpiricalFrame> {
    let kernel = k.kernel_spec()?;
    let pts = match (&k.points, k.random) {
        (Some(p), _) => read_points(&kernel, p)?,
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(k.seed);
            checks::random_points(&kernel, n, &mut rng)?
        }
        (None, None) => match kernel.kernel() {
            mcwave_core::kernels::Kernel::Matrix(m) => PointSet::vertices((0..m.rows()).collect())?,
            _ => return Err(AppError::Config("give --points or --random".into())),
        },
    };
    let fam = FilterFamily::parse(&k.filter, kernel.kappa_sq())
        .map_err(|e| AppError::Config(e.to_string()))?;
    Ok(build_frame(&kernel, &pts, fam, k.drop)?)
}

fn read_samples(path: &Path, n: usize) -> AppResult<Vec<f64>> {
    let y = io::read_vector(path)?;
    if y.len() != n {
        return Err(AppError::parse(
            path,
            format!("{} samples for {n} points", y.len()),
        ));
    }
    Ok(y)
}

fn report(r: &CheckReport) -> AppResult<()> {
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {}: {} cases, worst {:.3e} (tolerance {:.0e})",
        r.name, r.cases, r.worst, r.tolerance
    );
    if r.passed() {
        Ok(())
    } else {
        Err(AppError::CheckFailed(r.name.clone()))
    }
}

fn run_check(c: CheckCmd) -> AppResult<()> {
    match c {
        CheckCmd::Parseval { c, sizes, trials } => report(&checks::parseval(
            &parse_kernel(&c.kernel)?,
            &sizes,
            trials,
            c.seed,
        )?),
        CheckCmd::Telescope { c, n, tau_max } => report(&checks::telescope(
            &parse_kernel(&c.kernel)?,
            n,
            tau_max,
            c.seed,
        )?),
        CheckCmd::Krr { c, sizes, taus } => report(&checks::krr(
            &parse_kernel(&c.kernel)?,
            &sizes,
            &taus,
            c.seed,
        )?),
        CheckCmd::Approx { config, taus } => {
            let cfg = ExperimentConfig::load(&config)?;
            let beta = Setup::from_config(&cfg)?.beta();
            let errs = population_errors(&cfg, &taus)?;
            println!("tau,err_h,approx,err_h*tau^beta");
            for (t, e) in taus.iter().zip(&errs) {
                let scaled = e.err_h * (*t as f64).powf(beta);
                println!("{t},{},{},{scaled}", e.err_h, e.approx);
            }
            let scaled: Vec<f64> = taus
                .iter()
                .zip(&errs)
                .map(|(t, e)| e.err_h * (*t as f64).powf(beta))
                .collect();
            let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
            println!("constant spread max/min = {}", max / min);
            if errs.windows(2).all(|w| w[1].err_h <= w[0].err_h) {
                println!("PASS approx: error nonincreasing in tau");
                Ok(())
            } else {
                Err(AppError::CheckFailed(
                    "approximation error increased with tau".into(),
                ))
            }
        }
    }
}

fn run_rates(r: RatesCmd) -> AppResult<()> {
    match r {
        RatesCmd::Run {
            config,
            rows,
            summary,
            plot,
            metadata,
            threads,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            let o = &mut cfg.output;
            o.rows = rows.or(o.rows.take());
            o.summary = summary.or(o.summary.take());
            o.plot = plot.or(o.plot.take());
            o.metadata = metadata.or(o.metadata.take());
            if let Some(t) = threads {
                cfg.sweep.threads = t;
            }
            let out = run_convergence(&cfg)?;
            print_result(&out.result);
            if let Some(p) = &cfg.output.rows {
                io::write_rows(p, &out.rows)?;
            }
            if let Some(p) = &cfg.output.summary {
                io::write_summary(p, &out.result)?;
            }
            if let Some(p) = &cfg.output.plot {
                std::fs::write(p, plot::render_svg(&out.result)).map_err(|e| AppError::io(p, e))?;
            }
            if let Some(p) = &cfg.output.metadata {
                io::write_metadata(p, &out.metadata)?;
            }
            Ok(())
        }
        RatesCmd::Fit {
            rows,
            theory_h,
            theory_rho,
            confidence,
            summary,
            plot,
        } => {
            let data = io::read_rows(&rows)?;
            let res = summarize(&data, confidence, theory_h, theory_rho)?;
            print_result(&res);
            if let Some(p) = &summary {
                io::write_summary(p, &res)?;
            }
            if let Some(p) = &plot {
                std::fs::write(p, plot::render_svg(&res)).map_err(|e| AppError::io(p, e))?;
            }
            Ok(())
        }
    }
}

fn print_result(res: &mcwave::RateResult) {
    println!("N,tau,median_h,median_rho");
    for s in &res.summary {
        println!("{},{},{:.6e},{:.6e}", s.n, s.tau, s.median_h, s.median_rho);
    }
    println!(
        "slope_h {:.4} (theory {:.4}), slope_rho {:.4} (theory {:.4})",
        res.fit_h.slope, res.fit_h.theoretical, res.fit_rho.slope, res.fit_rho.theoretical
    );
}

fn laplacian_of(g: &GraphInput) -> AppResult<mcwave_core::Matrix> {
    let graph = io::read_edge_list(&g.edges, g.vertices)?;
    let kind = match g.laplacian {
        LapKind::Unnormalized => LaplacianKind::Unnormalized,
        LapKind::Normalized => LaplacianKind::SymmetricNormalized,
    };
    Ok(build_laplacian(&graph, kind)?)
}

fn graph_coefficients(frame: &GraphFrame, f: &[f64]) -> AppResult<Vec<Vec<f64>>> {
    let fam = FilterFamily::dyadic(1.0)?;
    let h = frame.dyadic_filters(&fam)?;
    let atoms = graph_frame_atoms(frame, &h)?;
    Ok(atoms
        .iter()
        .map(|scale| {
            scale
                .iter()
                .map(|phi| phi.iter().zip(f).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

fn run_graph(g: GraphCmd) -> AppResult<()> {
    match g {
        GraphCmd::Laplacian { g, pinv, out } => {
            let l = laplacian_of(&g)?;
            if pinv {
                let k = laplacian_pinv_kernel(&l, DEFAULT_PINV_TOL)?;
                println!("null dimension {}", k.null_dim);
                io::write_matrix(&out, &k.kernel)
            } else {
                io::write_matrix(&out, &l)
            }
        }
        GraphCmd::Frame { g, signal, out } => {
            let l = laplacian_of(&g)?;
            let frame = GraphFrame::new(&l)?;
            let f = read_samples(&signal, frame.len())?;
            let c = graph_coefficients(&frame, &f)?;
            let energy: f64 = c.iter().flatten().map(|v| v * v).sum();
            println!("energy {energy}");
            println!("norm   {}", f.iter().map(|v| v * v).sum::<f64>());
            let tau = c.len().saturating_sub(1) as u32;
            io::write_coefficients(&out, &mcwave_core::WaveletCoefficients { tau, coeffs: c })
        }
        GraphCmd::Check { g, signal, seed } => {
            let l = laplacian_of(&g)?;
            let frame = GraphFrame::new(&l)?;
            let n = frame.len();
            let mut f = match signal {
                Some(p) => read_samples(&p, n)?,
                None => {
                    use rand::Rng;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..n)
                        .map(|_| rng.sample(rand_distr::StandardNormal))
                        .collect()
                }
            };
            // Remove the null-space part so that f ⊥ ker L.
            let hat = graph_fourier(&frame, &f)?;
            let u = &frame.eigensystem().vectors;
            for (i, &xi) in frame.xi().iter().enumerate() {
                if frame.is_null(xi) {
                    for (r, v) in f.iter_mut().enumerate() {
                        *v -= hat[i] * u[(r, i)];
                    }
                }
            }
            let c = graph_coefficients(&frame, &f)?;
            let energy: f64 = c.iter().flatten().map(|v| v * v).sum();
            let norm: f64 = f.iter().map(|v| v * v).sum();
            let parseval = CheckReport {
                name: "graph parseval".into(),
                cases: 1,
                worst: (energy - norm).abs() / norm.max(f64::MIN_POSITIVE),
                tolerance: 1e-10,
            };
            let k = laplacian_pinv_kernel(&l, DEFAULT_PINV_TOL)?;
            let mut flip: f64 = 0.0;
            for (xi, lam) in k.laplacian.values.iter().zip(&k.lambdas) {
                if *lam > 0.0 {
                    flip = flip.max((lam * xi - 1.0).abs());
                }
            }
            let flip = CheckReport {
                name: "pseudoinverse flip".into(),
                cases: n - k.null_dim,
                worst: flip,
                tolerance: 1e-10,
            };
            let a = report(&parseval);
            let b = report(&flip);
            a.and(b)
        }
    }
}
