use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use alphacomp::alpha_fit::{self, AlphaBounds};
use alphacomp::asymptotics::{self, AsymptoticFit, CoalescingParams};
use alphacomp::io::{self, Closure, Dataset, LoadOptions, RunReport, Study, ZeroPolicy};
use alphacomp::{rng, sim, simplex, Error, ErrorCategory, LogData, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

#[derive(Parser)]
#[command(name = "alphacomp", version, about = "α-transformations of compositional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply u_α, its inverse or clr to every row.
    Transform(TransformArgs),
    /// Joint maximum likelihood in (α, γ).
    Fit(FitArgs),
    /// Profile log-likelihood on the α grid, as CSV.
    Profile(ProfileArgs),
    /// Closed-form and reparameterized fits at a fixed α.
    Asymptotic(AsymptoticArgs),
    /// Run a simulation study described by a key = value file.
    Simulate(SimulateArgs),
    /// Direct MLE, Asymptotic 1 and Asymptotic 2 shapes side by side.
    Compare(CompareArgs),
    /// Check the small-α expansions and covariance identities.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroMode {
    Error,
    Replace,
}

#[derive(Args)]
struct InputArgs {
    /// CSV file, one composition per row.
    #[arg(long, short)]
    input: PathBuf,
    /// The first row holds data, not column labels.
    #[arg(long)]
    no_header: bool,
    /// What to do with zero cells.
    #[arg(long, value_enum, default_value = "error")]
    zero_policy: ZeroMode,
    /// Replacement value for zeros under `--zero-policy replace`.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Divide rows by their sums instead of requiring closure.
    #[arg(long)]
    renormalize: bool,
    /// Check the columns against a registered dataset (mammals, clams, oecd, grta).
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha_max: f64,
    /// Half-width of the excluded neighbourhood of 0.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Total number of grid points.
    #[arg(long, default_value_t = 82)]
    grid: usize,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "clr")]
    alpha: Option<f64>,
    /// Apply the inverse transformation.
    #[arg(long, conflicts_with = "clr")]
    inverse: bool,
    /// Centred log-ratio instead of u_α.
    #[arg(long)]
    clr: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Run report destination; defaults to `<out>.report`, or stderr without `--out`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Record wall time in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "both")]
    variant: Variant,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study description (key = value lines).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Common α; estimated jointly when absent.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `body` to `out`, or stdout when absent.
fn emit(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(io_err(p))?;
            let mut w = BufWriter::new(f);
            body(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|_| w.flush()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

impl ReportArgs {
    /// Write the report for a command whose main output is a table.
    fn write(&self, out: Option<&Path>, mut report: RunReport) -> Result<()> {
        if let Some(o) = out {
            report.config("out", o.display());
        }
        let text = report.render();
        let dest = self.report.clone().or_else(|| {
            out.map(|o| {
                let mut name = o.as_os_str().to_owned();
                name.push(".report");
                PathBuf::from(name)
            })
        });
        match dest {
            Some(p) => std::fs::write(&p, text).map_err(io_err(&p)),
            None => {
                eprint!("{text}");
                Ok(())
            }
        }
    }
}

impl InputArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            has_header: !self.no_header,
            zero_policy: match self.zero_policy {
                ZeroMode::Error => ZeroPolicy::Error,
                ZeroMode::Replace => ZeroPolicy::EpsilonReplace(self.epsilon),
            },
            closure: if self.renormalize { Closure::Renormalize } else { Closure::Strict },
        }
    }

    fn load(&self) -> Result<(Dataset, LogData)> {
        let mut data = io::load_csv(&self.input, &self.options())?;
        if let Some(name) = &self.dataset {
            let entry = io::lookup(name)
                .ok_or_else(|| Error::Config(format!("unknown dataset {name:?}")))?;
            entry.validate(&data)?;
            data.name = entry.name.to_string();
            data.provenance = entry.provenance.to_string();
        }
        let logs = data.log_data()?;
        Ok((data, logs))
    }

    fn echo(&self, report: &mut RunReport) -> Result<()> {
        report.input_digest = Some(io::sha256_hex(&self.input)?);
        report
            .config("input", self.input.display())
            .config("header", !self.no_header)
            .config("closure", if self.renormalize { "renormalize" } else { "strict" });
        match self.zero_policy {
            ZeroMode::Error => report.config("zero_policy", "error"),
            ZeroMode::Replace => report.config("zero_policy", format!("replace({})", self.epsilon)),
        };
        if let Some(d) = &self.dataset {
            report.config("dataset", d);
        }
        Ok(())
    }
}

impl BoundsArgs {
    fn bounds(&self) -> Result<AlphaBounds> {
        AlphaBounds::new(self.alpha_min, self.alpha_max, self.delta)
    }

    fn echo(&self, report: &mut RunReport) {
        report
            .config("alpha_min", self.alpha_min)
            .config("alpha_max", self.alpha_max)
            .config("delta", self.delta)
            .config("grid", self.grid);
    }
}

fn transform(args: TransformArgs) -> Result<()> {
    let (data, _) = args.input.load()?;
    let mut rows = Vec::with_capacity(data.rows.len());
    let labels: Vec<String> = if args.clr {
        data.component_labels.iter().map(|l| format!("clr_{l}")).collect()
    } else {
        data.component_labels.clone()
    };
    for x in &data.rows {
        let row = if args.clr {
            simplex::clr(x).w
        } else {
            let alpha = args.alpha.expect("clap requires --alpha without --clr");
            let out = if args.inverse {
                simplex::alpha_inverse(x, alpha)?
            } else {
                simplex::alpha_transform(x, alpha)?
            };
            out.into_vec()
        };
        rows.push(row);
    }
    emit(args.out.as_deref(), |w| io::write_compositions(w, &labels, &rows))?;
    let mut report = RunReport::new("transform");
    args.input.echo(&mut report)?;
    match (args.clr, args.alpha) {
        (true, _) => report.config("transform", "clr"),
        (false, Some(a)) => report
            .config("transform", if args.inverse { "inverse" } else { "forward" })
            .config("alpha", io::format_real(a)),
        (false, None) => unreachable!(),
    };
    report.result("n_obs", rows.len()).result("n_parts", labels.len());
    args.report.write(args.out.as_deref(), report)
}

fn push_shapes(report: &mut RunReport, prefix: &str, labels: &[String], values: &[f64]) {
    for (l, v) in labels.iter().zip(values) {
        report.result(&format!("{prefix}{l}"), io::format_real(*v));
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let start = Instant::now();
    let (data, logs) = args.input.load()?;
    let mut report = RunReport::new("fit");
    args.input.echo(&mut report)?;
    args.bounds.echo(&mut report);
    let fit = alpha_fit::fit_direct(&logs, args.bounds.bounds()?, args.bounds.grid)?;
    report
        .result("n_obs", logs.n_obs())
        .result("n_parts", logs.n_parts())
        .result("alpha_hat", io::format_real(fit.alpha_hat))
        .result("loglik", io::format_real(fit.loglik))
        .result("golden_iterations", fit.iterations)
        .result("converged", fit.converged)
        .result("on_boundary", fit.on_boundary);
    push_shapes(&mut report, "gamma_", &data.component_labels, fit.gamma_hat.shapes());
    if args.timing {
        report.wall_time_secs = Some(start.elapsed().as_secs_f64());
    }
    emit(args.out.as_deref(), |w| w.write_all(report.render().as_bytes()))
}

fn profile(args: ProfileArgs) -> Result<()> {
    let (data, logs) = args.input.load()?;
    let curve = alpha_fit::profile_curve(&logs, args.bounds.bounds()?, args.bounds.grid)?;
    emit(args.out.as_deref(), |w| io::write_profile(w, &data.component_labels, &curve))?;
    let mut report = RunReport::new("profile");
    args.input.echo(&mut report)?;
    args.bounds.echo(&mut report);
    let failed = curve.values.iter().filter(|v| v.is_none()).count();
    report.result("points", curve.alphas.len()).result("failed_points", failed);
    if let Some(i) = curve.argmax() {
        report
            .result("grid_argmax_alpha", io::format_real(curve.alphas[i]))
            .result("grid_max_loglik", io::format_real(curve.values[i].unwrap_or(f64::NAN)));
    }
    args.report.write(args.out.as_deref(), report)
}

fn push_asymptotic(report: &mut RunReport, tag: &str, labels: &[String], f: &AsymptoticFit) {
    report.result(&format!("{tag}.b_hat"), io::format_real(f.b_hat));
    push_shapes(report, &format!("{tag}.c_hat_"), labels, &f.c_hat);
    push_shapes(report, &format!("{tag}.gamma_"), labels, f.implied_gamma.shapes());
}

fn asymptotic(args: AsymptoticArgs) -> Result<()> {
    let start = Instant::now();
    let (data, logs) = args.input.load()?;
    let mut report = RunReport::new("asymptotic");
    args.input.echo(&mut report)?;
    report.config("alpha", io::format_real(args.alpha));
    let labels = &data.component_labels;
    if args.variant != Variant::Two {
        let f = asymptotics::fit_asymptotic1(&logs, args.alpha)?;
        push_asymptotic(&mut report, "asymptotic1", labels, &f);
    }
    if args.variant != Variant::One {
        let f = asymptotics::fit_asymptotic2(&logs, args.alpha)?;
        push_asymptotic(&mut report, "asymptotic2", labels, &f);
        push_shapes(&mut report, "asymptotic2.b_vec_", labels, f.b_vec.as_deref().unwrap_or(&[]));
    }
    if args.timing {
        report.wall_time_secs = Some(start.elapsed().as_secs_f64());
    }
    emit(args.out.as_deref(), |w| w.write_all(report.render().as_bytes()))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(io_err(&args.config))?;
    let mut study = io::parse_study_config(&text)?;
    if let Some(s) = args.seed {
        study.set_seed(s);
    }
    let mut report = RunReport::new("simulate");
    report.seed = Some(study.seed());
    report.input_digest = Some(io::sha256_hex(&args.config)?);
    report.config("config", args.config.display());
    match study {
        Study::Curve(cfg) => {
            let curve = sim::mean_logratio_curve(&cfg)?;
            let labels: Vec<String> = (1..=cfg.n_parts()).map(|j| format!("x{j}")).collect();
            emit(args.out.as_deref(), |w| io::write_mean_curve(w, &labels, &curve))?;
            report
                .config("study", "curve")
                .config("n", cfg.n)
                .result("alpha_points", cfg.alpha_grid.len());
            if let (Some(a), Some(norm)) = (curve.alphas.last(), curve.norms().last()) {
                report
                    .result("last_alpha", io::format_real(*a))
                    .result("last_mean_norm", io::format_real(*norm));
            }
        }
        Study::Order(cfg) => {
            let rows = sim::order_study(&cfg)?;
            emit(args.out.as_deref(), |w| io::write_order_study(w, &rows))?;
            report.config("study", "order").config("n", cfg.n);
            for w in rows.windows(2) {
                report.result(
                    &format!("gap_ratio_{}_{}", w[0].alpha, w[1].alpha),
                    io::format_real(w[0].gap / w[1].gap),
                );
            }
        }
    }
    args.report.write(args.out.as_deref(), report)
}

fn compare(args: CompareArgs) -> Result<()> {
    let (data, logs) = args.input.load()?;
    let table = sim::estimator_comparison(
        &logs,
        &data.component_labels,
        args.alpha,
        args.bounds.bounds()?,
        args.bounds.grid,
    )?;
    emit(args.out.as_deref(), |w| io::write_comparison(w, &table))?;
    let mut report = RunReport::new("compare");
    args.input.echo(&mut report)?;
    args.bounds.echo(&mut report);
    if let Some(a) = args.alpha {
        report.config("alpha", io::format_real(a));
    }
    report.result("alpha_used", io::format_real(table.alpha_used));
    for row in &table.rows {
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("failed ({e})"),
        };
        report.result(row.estimator.label(), status);
    }
    args.report.write(args.out.as_deref(), report)
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn ratio_check(name: &'static str, gaps: &[f64]) -> Check {
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    Check {
        name,
        pass: ratios.iter().all(|r| (3.2..=4.8).contains(r)),
        detail: format!(
            "gaps [{}], ratios [{}]",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", "),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn verify(args: VerifyArgs) -> Result<bool> {
    const ALPHAS: [f64; 3] = [0.04, 0.02, 0.01];
    let c = vec![0.1, 0.3, -0.4];
    let mut checks = Vec::new();

    let mut normalizer = Vec::new();
    let mut kernel = Vec::new();
    let y = [0.2f64.ln(), 0.3f64.ln(), 0.5f64.ln()];
    for a in ALPHAS {
        let p = CoalescingParams::new(a, 1.0, c.clone())?;
        normalizer.push((asymptotics::normalizer_exact(&p)? - asymptotics::normalizer_expansion(&p)).abs());
        kernel.push((asymptotics::kernel_exact(&p, &y)? - asymptotics::kernel_expansion(&p, &y)).abs());
    }
    checks.push(ratio_check("normalizer expansion O(α²) remainder", &normalizer));
    checks.push(ratio_check("kernel expansion O(α²) remainder", &kernel));

    let rows = sim::order_study(&sim::OrderConfig {
        b: 1.0,
        c: c.clone(),
        alphas: ALPHAS.to_vec(),
        n: 200,
        seed: args.seed,
    })?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    checks.push(ratio_check("expanded likelihood O(α²) remainder", &gaps));

    let mut stream = rng::stream(rng::derive(args.seed, 3));
    let mut worst3 = 0.0f64;
    let mut worst4 = 0.0f64;
    for _ in 0..100 {
        let d = stream.random_range(2..8);
        let z: Vec<f64> = (0..d).map(|_| stream.random_range(-3.0..3.0)).collect();
        let raw: Vec<f64> = (0..d).map(|_| stream.random_range(-1.0..1.0)).collect();
        let m = raw.iter().sum::<f64>() / d as f64;
        let mu: Vec<f64> = raw.iter().map(|v| v - m).collect();
        let s2: f64 = stream.random_range(0.2..5.0);
        let a = asymptotics::centered_quadratic_form(&z, &mu, s2);
        let b = asymptotics::centered_quadratic_reduced(&z, &mu, 1.0 / s2);
        worst3 = worst3.max((a - b).abs());

        let alpha: f64 = stream.random_range(0.01..0.5) * if stream.random::<bool>() { 1.0 } else { -1.0 };
        let bb: f64 = stream.random_range(0.1..10.0);
        let (bs, cs) = asymptotics::normalize_params(alpha, bb, &raw)?;
        for (cj, csj) in raw.iter().zip(&cs) {
            let lhs = bb / (alpha * alpha) * (1.0 + alpha * cj);
            let rhs = bs / (alpha * alpha) * (1.0 + alpha * csj);
            worst4 = worst4.max((lhs - rhs).abs() / lhs.abs());
        }
    }
    checks.push(Check {
        name: "centered quadratic form identity",
        pass: worst3 <= 1e-10,
        detail: format!("max abs residual {worst3:.3e} over 100 instances"),
    });
    checks.push(Check {
        name: "reparameterization identity",
        pass: worst4 <= 1e-12,
        detail: format!("max rel residual {worst4:.3e} over 100 instances"),
    });

    for ch in &checks {
        println!("[{}] {}: {}", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.detail);
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Io => 2,
        ErrorCategory::Domain => 3,
        ErrorCategory::Convergence => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transform(a) => transform(a).map(|_| true),
        Command::Fit(a) => fit(a).map(|_| true),
        Command::Profile(a) => profile(a).map(|_| true),
        Command::Asymptotic(a) => asymptotic(a).map(|_| true),
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Compare(a) => compare(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("alphacomp: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
