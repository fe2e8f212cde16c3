//! `logdmo`: log-stretch f-k DMO from the command line.
//!
//! Exit status is 0 on success, 1 when reading or writing a file fails and 2
//! for usage or validation errors.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logdmo_core::analysis::{self, PickWindow};
use logdmo_core::fk::{Geometry, Section};
use logdmo_core::gridio::{Cell, Table};
use logdmo_core::kernel::{self, FkPoint, OperatorKind};
use logdmo_core::oracle::{self, DirectMethod, DirectSpectrum};
use logdmo_core::pipeline::{self, DmoConfig, Wavelet};
use logdmo_core::{DmoError, SingularPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use output::Failure;

#[derive(Parser, Debug)]
#[command(name = "logdmo", version, about = "Log-stretch f-k dip moveout toolkit")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Seed for generated test data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate one operator's phase and gain against the dip variable.
    Phase(PhaseArgs),
    /// Impulse response of one operator, written as FKG1.
    Impulse(ImpulseArgs),
    /// Run DMO on a stored FKG1 section.
    Apply(ApplyArgs),
    /// Split operator phases into midpoint and log-time parts.
    Decompose(DecomposeArgs),
    /// Small- and large-dip diagnostic ratios.
    Asymptote(AsymptoteArgs),
    /// Direct Hale/Black integrals and the analytic ellipse.
    Oracle(OracleArgs),
    /// Pick an impulse response and compare it with the analytic ellipse.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Zero,
    Hold,
}

impl From<Policy> for SingularPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Zero => SingularPolicy::Zero,
            Policy::Hold => SingularPolicy::HoldMagnitudeZeroPhase,
        }
    }
}

#[derive(Args, Debug)]
struct DmoFlags {
    /// bale, notfors, liner or exact.
    #[arg(long, default_value = "exact")]
    operator: OperatorKind,
    /// Log-stretch cutoff time (s). Default: first sample time.
    #[arg(long)]
    tc: Option<f64>,
    /// Log-time samples per trace. Default: next power of two >= 2 n_t.
    #[arg(long)]
    n_tau: Option<usize>,
    #[arg(long, value_enum, default_value = "zero")]
    singular_policy: Policy,
    /// Zero traces added before the spatial FFT. Default: ceil(h/dx).
    #[arg(long)]
    pad_x: Option<usize>,
    /// Zero log-time rows added before the temporal FFT. Default: n_tau/2.
    #[arg(long)]
    pad_tau: Option<usize>,
}

impl DmoFlags {
    fn config(&self) -> DmoConfig {
        DmoConfig {
            operator: self.operator,
            t_c: self.tc,
            n_tau: self.n_tau,
            singular_policy: self.singular_policy.into(),
            pad_x: self.pad_x,
            pad_tau: self.pad_tau,
        }
    }
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[arg(long, default_value = "exact")]
    operator: OperatorKind,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    xi_max: f64,
    /// Rows, evenly spaced on [0, xi-max].
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// CSV output. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridFlags {
    #[arg(long, default_value_t = 512)]
    nt: usize,
    #[arg(long, default_value_t = 256)]
    nx: usize,
    /// Sample interval (s).
    #[arg(long, default_value_t = 0.004)]
    dt: f64,
    /// Midpoint interval (m).
    #[arg(long, default_value_t = 12.5)]
    dx: f64,
    /// First sample time (s). Default: dt.
    #[arg(long)]
    t_start: Option<f64>,
    /// First midpoint (m). Default: centres the grid on x = 0.
    #[arg(long)]
    x_start: Option<f64>,
    /// Half-offset (m).
    #[arg(long, default_value_t = 500.0)]
    h: f64,
}

impl GridFlags {
    fn geometry(&self) -> Geometry {
        Geometry {
            n_t: self.nt,
            n_x: self.nx,
            dt: self.dt,
            dx: self.dx,
            t_start: self.t_start.unwrap_or(self.dt),
            x_start: self.x_start.unwrap_or(-((self.nx / 2) as f64) * self.dx),
            h: self.h,
        }
    }
}

#[derive(Args, Debug)]
struct ImpulseArgs {
    #[command(flatten)]
    dmo: DmoFlags,
    #[command(flatten)]
    grid: GridFlags,
    /// Impulse time (s).
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Impulse midpoint (m).
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Ricker peak frequency (Hz).
    #[arg(long, default_value_t = 30.0)]
    freq: f64,
    /// FKG1 output. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[command(flatten)]
    dmo: DmoFlags,
    /// FKG1 input section.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, default_value = "exact")]
    operator: OperatorKind,
    /// Comma-separated dips.
    #[arg(long, value_delimiter = ',', required = true)]
    xi_list: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AsymptoteArgs {
    /// Comma-separated operators.
    #[arg(long, value_delimiter = ',', default_value = "bale,notfors,liner,exact")]
    operators: Vec<OperatorKind>,
    #[arg(long, default_value_t = 1e-3)]
    xi_min: f64,
    #[arg(long, default_value_t = 1e4)]
    xi_max: f64,
    /// Log-spaced grid points.
    #[arg(long, default_value_t = 61)]
    samples: usize,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleMethod {
    Hale,
    Black,
    /// Bin-wise Hale/Black phase comparison.
    Compare,
    Ellipse,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    method: OracleMethod,
    /// FKG1 input. Default: a generated section with --live random samples.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    nt: usize,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 0.008)]
    dt: f64,
    #[arg(long, default_value_t = 12.5)]
    dx: f64,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    x_start: Option<f64>,
    #[arg(long, default_value_t = 300.0)]
    h: f64,
    /// Live samples in the generated section.
    #[arg(long, default_value_t = 5)]
    live: usize,
    /// Magnitude floor for the phase comparison.
    #[arg(long, default_value_t = 1e-12)]
    floor: f64,
    /// Ellipse apex time (s).
    #[arg(long, default_value_t = 1.0)]
    tn: f64,
    /// Ellipse centre midpoint (m).
    #[arg(long, default_value_t = 0.0)]
    xn: f64,
    /// Ellipse points.
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// FKG1 impulse response.
    #[arg(long)]
    response: PathBuf,
    /// Impulse time (s).
    #[arg(long)]
    tn: f64,
    /// Impulse midpoint (m).
    #[arg(long, default_value_t = 0.0)]
    xn: f64,
    /// Half-offset (m). Default: the section's.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return output::report(Failure::Usage(format!("thread pool: {e}"))),
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => output::report(f),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Phase(a) => cmd_phase(a),
        Command::Impulse(a) => cmd_impulse(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Asymptote(a) => cmd_asymptote(a),
        Command::Oracle(a) => cmd_oracle(a, cli.seed),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite and > 0, got {v}")))
    }
}

fn cmd_phase(a: &PhaseArgs) -> Result<(), Failure> {
    if a.samples < 2 {
        return Err(usage(format!("--samples must be at least 2, got {}", a.samples)));
    }
    positive("omega", a.omega)?;
    if !(a.xi_max >= 0.0 && a.xi_max.is_finite()) {
        return Err(usage(format!("--xi-max must be finite and >= 0, got {}", a.xi_max)));
    }
    let mut table = Table::new(["xi", "phase", "amplitude", "validity"]);
    for i in 0..a.samples {
        let xi = a.xi_max * i as f64 / (a.samples - 1) as f64;
        let r = kernel::evaluate(a.operator, FkPoint { omega: a.omega, k: xi * a.omega, h: 1.0 });
        table.push(vec![xi.into(), r.phase.into(), r.amplitude.into(), r.validity.to_string().into()])?;
    }
    output::csv(&table, a.out.as_deref())
}

fn cmd_impulse(a: &ImpulseArgs) -> Result<(), Failure> {
    let geom = a.grid.geometry();
    positive("freq", a.freq)?;
    let wavelet = Wavelet::ricker(a.freq, geom.dt)?;
    let response = pipeline::impulse_response(&a.dmo.config(), a.t, a.x, &wavelet, geom)?;
    output::section(&response, a.out.as_deref())
}

fn cmd_apply(a: &ApplyArgs) -> Result<(), Failure> {
    let input = output::read_section(&a.input)?;
    let out = pipeline::run_dmo(&input, &a.dmo.config())?;
    output::section(&out, a.out.as_deref())
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<(), Failure> {
    positive("omega", a.omega)?;
    if !(a.h >= 0.0 && a.h.is_finite()) {
        return Err(usage(format!("--h must be finite and >= 0, got {}", a.h)));
    }
    let mut table = Table::new(["xi", "space_shift", "time_shift", "space_phase", "time_phase", "total", "validity"]);
    for &xi in &a.xi_list {
        if !xi.is_finite() {
            return Err(usage(format!("--xi-list entries must be finite, got {xi}")));
        }
        let k = if a.h == 0.0 { 0.0 } else { xi * a.omega / a.h };
        let row: Vec<Cell> = match analysis::decompose(a.operator, FkPoint::new(a.omega, k, a.h)?) {
            Ok(d) => vec![
                xi.into(),
                d.space_shift.into(),
                d.time_shift.into(),
                d.space_phase.into(),
                d.time_phase.into(),
                d.total.into(),
                "Valid".into(),
            ],
            Err(DmoError::Singular { .. }) => {
                let mut r = vec![Cell::Num(xi)];
                r.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 5));
                r.push("Singular".into());
                r
            }
            Err(e) => return Err(e.into()),
        };
        table.push(row)?;
    }
    output::csv(&table, a.out.as_deref())
}

fn cmd_asymptote(a: &AsymptoteArgs) -> Result<(), Failure> {
    if a.samples < 2 {
        return Err(usage(format!("--samples must be at least 2, got {}", a.samples)));
    }
    positive("xi-min", a.xi_min)?;
    positive("xi-max", a.xi_max)?;
    if a.xi_max <= a.xi_min {
        return Err(usage("--xi-max must exceed --xi-min"));
    }
    let (lo, hi) = (a.xi_min.ln(), a.xi_max.ln());
    let grid: Vec<f64> = (0..a.samples).map(|i| (lo + (hi - lo) * i as f64 / (a.samples - 1) as f64).exp()).collect();
    let report = analysis::asymptotic_report(&a.operators, &grid, a.omega)?;
    let mut table = Table::new(["operator", "xi", "phase", "small_ratio", "large_ratio", "correction"]);
    let num = |v: Option<f64>| Cell::Num(v.unwrap_or(f64::NAN));
    for op in &report.operators {
        for (i, &xi) in report.xi_grid.iter().enumerate() {
            table.push(vec![
                op.op.name().into(),
                xi.into(),
                num(op.phase[i]),
                num(op.small_ratio[i]),
                num(op.large_ratio[i]),
                report.correction[i].into(),
            ])?;
        }
    }
    output::csv(&table, a.out.as_deref())
}

fn oracle_input(a: &OracleArgs, seed: u64) -> Result<Section, Failure> {
    if let Some(path) = &a.input {
        return output::read_section(path);
    }
    let geom = Geometry {
        n_t: a.nt,
        n_x: a.nx,
        dt: a.dt,
        dx: a.dx,
        t_start: a.t_start.unwrap_or(25.0 * a.dt),
        x_start: a.x_start.unwrap_or(-((a.nx / 2) as f64) * a.dx),
        h: a.h,
    };
    let mut sec = Section::zeros(geom)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..a.live {
        let (it, ix) = (rng.random_range(0..geom.n_t), rng.random_range(0..geom.n_x));
        sec.trace_mut(ix)[it] = rng.random_range(0.5..1.5);
    }
    Ok(sec)
}

fn spectrum_table(sp: &DirectSpectrum) -> Result<Table, Failure> {
    let mut table = Table::new(["omega", "k", "re", "im", "magnitude", "phase"]);
    for (ik, &k) in sp.ks.iter().enumerate() {
        for (iw, &omega) in sp.omegas.iter().enumerate() {
            let c = sp.get(iw, ik);
            table.push(vec![omega.into(), k.into(), c.re.into(), c.im.into(), c.norm().into(), c.arg().into()])?;
        }
    }
    Ok(table)
}

fn cmd_oracle(a: &OracleArgs, seed: u64) -> Result<(), Failure> {
    if let OracleMethod::Ellipse = a.method {
        let curve = oracle::ellipse(a.tn, a.xn, a.h, a.points)?;
        let mut table = Table::new(["x0", "t0"]);
        for &(x, t) in &curve.points {
            table.push(vec![x.into(), t.into()])?;
        }
        return output::csv(&table, a.out.as_deref());
    }
    for (name, n) in [("nt", a.nt), ("nx", a.nx)] {
        if n > oracle::DIRECT_LIMIT {
            return Err(usage(format!("--{name} {n} exceeds the direct-integral limit {}", oracle::DIRECT_LIMIT)));
        }
    }
    let sec = oracle_input(a, seed)?;
    let g = sec.geom;
    let omegas = oracle::fft_frequencies(g.n_t, g.dt);
    let ks = oracle::fft_frequencies(g.n_x, g.dx);
    let table = match a.method {
        OracleMethod::Hale => spectrum_table(&oracle::direct_dmo(&sec, DirectMethod::Hale, &omegas, &ks)?)?,
        OracleMethod::Black => spectrum_table(&oracle::direct_dmo(&sec, DirectMethod::Black, &omegas, &ks)?)?,
        OracleMethod::Compare => {
            let hale = oracle::direct_dmo(&sec, DirectMethod::Hale, &omegas, &ks)?;
            let black = oracle::direct_dmo(&sec, DirectMethod::Black, &omegas, &ks)?;
            let c = oracle::compare_phases(&hale, &black, a.floor);
            let mut t = Table::new(["bins_compared", "max_phase_diff", "floor"]);
            t.push(vec![(c.bins_compared as f64).into(), c.max_phase_diff.into(), a.floor.into()])?;
            t
        }
        OracleMethod::Ellipse => unreachable!(),
    };
    output::csv(&table, a.out.as_deref())
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Failure> {
    let response = output::read_section(&a.response)?;
    let h = a.h.unwrap_or(response.geom.h);
    let curve = oracle::ellipse(a.tn, a.xn, h, 401)?;
    let report = analysis::ridge_metrics(&response, &curve, PickWindow::around_impulse(a.xn, h))?;
    let mut table = Table::new(["x", "pick_t", "oracle_t", "residual_samples"]);
    let num = |v: Option<f64>| Cell::Num(v.unwrap_or(f64::NAN));
    for p in &report.picks {
        table.push(vec![p.x.into(), num(p.pick_t), p.oracle_t.into(), num(p.residual_samples)])?;
    }
    eprintln!(
        "picks {} missing {} max |residual| {:.3} mean |residual| {:.3} samples",
        report.picks.len(),
        report.missing,
        report.max_abs_residual,
        report.mean_abs_residual
    );
    output::csv(&table, a.out.as_deref())
}
