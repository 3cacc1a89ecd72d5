use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use stable_ecf::{
    build_log_design, build_poly_design, emit_report, Error, Estimate, Estimator, GridMeta, GridOls, InfiniteLs,
    IntervalDesign, Method, ReportFormat, Sample, SimConfig, SimReport, StableParams, StableSampler,
};

use crate::{Command, DesignArgs, DesignModel, EstimateArgs, KsweepArgs, SampleArgs, SimOverrides, SimulateArgs};

const DEFAULT_SWEEP: [usize; 3] = [100, 300, 500];

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownConfigKey { .. } => Self::usage(e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Estimate(a) => estimate(a),
        Command::Sample(a) => sample(a),
        Command::Design(a) => design(a),
        Command::Simulate(a) => simulate(a),
        Command::Ksweep(a) => ksweep(a),
    }
}

/// Four decimals, switching to scientific notation where that would hide the value.
fn fmt4(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) || !v.is_finite() {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::data(format!("cannot write to stdout: {e}")))
        }
    }
}

fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| CliError::data(format!("line {}: `{line}` is not a number", i + 1)))?;
        if !v.is_finite() {
            return Err(CliError::data(format!("line {}: `{line}` is not finite", i + 1)));
        }
        values.push(v);
    }
    Ok(Sample::new(values)?)
}

fn estimate(args: EstimateArgs) -> CliResult {
    let sample = read_sample(&args.input)?;
    let estimator: Box<dyn Estimator> = match args.method {
        Method::InfiniteLs => Box::new(InfiniteLs::new(IntervalDesign::new(args.grid.x0, args.grid.d)?, args.grid.k)?),
        Method::KogonWilliams => Box::new(GridOls::kogon_williams()),
        Method::Koutrouvelis => Box::new(GridOls::koutrouvelis(args.points)?),
    };
    let est = estimator.fit(&sample)?;
    emit(&estimate_report(&est, sample.len()), args.out.as_deref())
}

fn estimate_report(est: &Estimate, n: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method          {}", est.method);
    let _ = writeln!(out, "n               {n}");
    let _ = writeln!(out, "alpha_hat       {}", fmt4(est.alpha_hat));
    let _ = writeln!(out, "sigma_hat       {}", fmt4(est.sigma_hat));
    let _ = writeln!(out, "se(alpha_hat)   {}", fmt4(est.alpha_std_error()));
    let _ = writeln!(out, "s_squared       {}", fmt4(est.s_squared));
    let points = match &est.grid {
        GridMeta::Interval { x0, d, k } => {
            let _ = writeln!(out, "grid            [{}, {}], K = {k}", fmt4(*x0), fmt4(x0 + d));
            k + 1
        }
        GridMeta::Points(ts) => {
            let _ =
                writeln!(out, "grid            {} points in [{}, {}]", ts.len(), fmt4(ts[0]), fmt4(ts[ts.len() - 1]));
            ts.len()
        }
    };
    let _ = writeln!(out, "clamped points  {} of {points}", est.clamp_count);
    let _ = writeln!(
        out,
        "slope clamped   {}",
        if est.slope_clamped { format!("yes (raw slope {})", fmt4(est.slope)) } else { "no".into() }
    );
    out
}

fn sample(args: SampleArgs) -> CliResult {
    let params = StableParams::symmetric(args.alpha, args.sigma)?;
    let draws = StableSampler::new(params, args.seed, args.stream)?.draw(args.n)?;
    let mut text = String::with_capacity(draws.len() * 24);
    for v in draws {
        let _ = writeln!(text, "{v}");
    }
    emit(&text, args.out.as_deref())
}

fn design(args: DesignArgs) -> CliResult {
    let interval = IntervalDesign::new(args.x0, args.d)?;
    let (moments, label) = match args.model {
        DesignModel::Log => (build_log_design(&interval)?, "log".to_string()),
        DesignModel::Linear => (build_poly_design(&interval, 1)?, "linear".to_string()),
        DesignModel::Poly => (build_poly_design(&interval, args.degree)?, format!("poly (degree {})", args.degree)),
    };
    let mut out = String::new();
    let _ = writeln!(out, "model           {label}");
    let _ = writeln!(out, "interval        [{}, {}]", fmt4(interval.x0()), fmt4(interval.end()));
    let _ = writeln!(out, "moment matrix");
    let m = &moments.matrix;
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{:>12}", fmt4(*v))).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
    let _ = writeln!(out, "determinant     {}", fmt4(moments.determinant()));
    let _ = writeln!(out, "condition (1)   {}", fmt4(moments.condition_estimate()));
    emit(&out, None)
}

fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
    Ok(SimConfig::from_kv_str(&text)?)
}

fn apply_overrides(cfg: &mut SimConfig, o: &SimOverrides) -> CliResult {
    for entry in &o.set {
        let (key, value) =
            entry.split_once('=').ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got `{entry}`")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(v) = &o.alphas {
        cfg.alphas = v.clone();
    }
    if let Some(v) = &o.ns {
        cfg.sample_sizes = v.clone();
    }
    if let Some(v) = o.reps {
        cfg.replications = v;
    }
    if let Some(v) = &o.methods {
        cfg.methods = v.clone();
    }
    if let Some(v) = o.x0 {
        cfg.x0 = v;
    }
    if let Some(v) = o.d {
        cfg.d = v;
    }
    if let Some(v) = o.k {
        cfg.k = v;
    }
    if let Some(v) = o.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = o.target {
        cfg.target = v;
    }
    if let Some(v) = o.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = o.response {
        cfg.response = v;
    }
    if let Some(v) = &o.out {
        cfg.out = Some(v.clone());
    }
    if o.markdown {
        cfg.markdown = true;
    }
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::data(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_reports(report: &SimReport) -> CliResult {
    let csv = emit_report(report, ReportFormat::Csv);
    let md = emit_report(report, ReportFormat::Markdown);
    match &report.config.out {
        Some(path) => {
            emit(&csv, Some(path))?;
            let mut written = vec![path.clone()];
            if report.config.markdown {
                let md_path: PathBuf = path.with_extension("md");
                emit(&md, Some(&md_path))?;
                written.push(md_path);
            }
            emit(&md, None)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        None => emit(&csv, None),
    }
}

fn run_config(mut cfg: SimConfig, k_values: Option<Vec<usize>>, overrides: &SimOverrides, sweep: bool) -> CliResult {
    apply_overrides(&mut cfg, overrides)?;
    if let Some(k) = k_values {
        cfg.k_values = k;
    }
    if sweep && cfg.k_values.is_empty() {
        cfg.k_values = DEFAULT_SWEEP.to_vec();
    }
    cfg.validate()?;
    let start = Instant::now();
    let report = with_threads(overrides.threads, || {
        if cfg.k_values.is_empty() {
            stable_ecf::run_simulation(&cfg)
        } else {
            stable_ecf::k_sweep(&cfg, &cfg.k_values)
        }
    })??;
    write_reports(&report)?;
    eprintln!("{} rows in {:.1} s", report.rows.len(), start.elapsed().as_secs_f64());
    Ok(())
}

fn simulate(args: SimulateArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    run_config(cfg, args.k_values, &args.overrides, false)
}

fn ksweep(args: KsweepArgs) -> CliResult {
    let cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    run_config(cfg, args.k_values, &args.overrides, true)
}
