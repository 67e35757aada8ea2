//! Command-line front end.

use crate::algebra::frobenius_distance;
use crate::controllability::{is_controllable, ControllabilityVerdict};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::propagate::{baseline, propagate_with, ConstantLaw, ControlLaw, Scheme, Trajectory};
use crate::shoot::{solve, Candidate, CandidateSummary};
use crate::synthesis::{costate_init, synthesize, Costate};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNCONTROLLABLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_NO_CANDIDATES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "su11ctl", version, about = "Energy-optimal controls on SU(1,1)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Controllability verdict for a problem file.
    Check { file: PathBuf },
    /// Synthesize the extremal law for an explicit costate.
    Synth(SynthArgs),
    /// Multistart shooting for candidate extremals.
    Solve(SolveArgs),
    /// Propagate an extremal or constant control and write the trajectory.
    Propagate(PropagateArgs),
    /// Piecewise-constant comparison law.
    Baseline(BaselineArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub file: PathBuf,
    /// Costate coefficients sx,sy,sz.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub s: Vec<f64>,
    /// Sample u on [0, T] at 10 points.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Write a ℘ grid over the period parallelogram as CSV.
    #[arg(long)]
    pub dump_wp: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long = "max-T")]
    pub max_t: Option<f64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Costate box half-width.
    #[arg(long)]
    pub bound: Option<f64>,
    /// Fixed final times (comma separated); T is free otherwise.
    #[arg(long = "at-T", value_delimiter = ',')]
    pub at_t: Vec<f64>,
    /// Directory for per-candidate trajectory CSVs.
    #[arg(long)]
    pub emit_traj: Option<PathBuf>,
    /// Write the machine summary as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Rows printed.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    pub file: PathBuf,
    #[arg(long = "T")]
    pub t_final: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "u")]
    pub s: Vec<f64>,
    /// Constant control value.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub magnus: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub n1: u32,
    #[arg(long, default_value_t = 1)]
    pub n2: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Six significant digits, trailing zeros trimmed.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let e = x.abs().log10().floor() as i32;
    let s = if (-5..6).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    };
    trim(s)
}

fn trim(s: String) -> String {
    let (mant, exp) = match s.find('e') {
        Some(i) => (s[..i].to_string(), s[i..].to_string()),
        None => (s, String::new()),
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        mant
    };
    let mant = if mant == "-0" { "0".to_string() } else { mant };
    format!("{mant}{exp}")
}

/// Like `fmt6` with a typographic minus sign.
fn fmt6m(x: f64) -> String {
    fmt6(x).replace('-', "−")
}

fn costate_arg(s: &[f64]) -> Result<Costate> {
    match s {
        [x, y, z] => Ok(Costate::normal(*x, *y, *z)),
        _ => Err(Error::Parse("--s needs three comma-separated numbers".into())),
    }
}

pub fn verdict_line(p: &Problem, v: &ControllabilityVerdict) -> String {
    let sys = &p.system;
    format!(
        "{}; α={} β={} γ={}; row: {}",
        if v.controllable { "controllable" } else { "not controllable" },
        fmt6m(sys.alpha),
        fmt6m(sys.beta),
        fmt6m(sys.gamma),
        v.reason.label()
    )
}

fn check_report(p: &Problem, out: &mut dyn Write) -> Result<bool> {
    let v = is_controllable(p.a(), p.b());
    writeln!(out, "{}", verdict_line(p, &v))?;
    match v.witness_u {
        Some(u) => writeln!(out, "witness u = {}", fmt6(u))?,
        None => writeln!(out, "witness u = none")?,
    }
    if v.near_boundary {
        writeln!(out, "warning: invariants are within tolerance of a table boundary")?;
    }
    Ok(v.controllable)
}

fn write_traj(tr: &Trajectory, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    tr.write_csv(std::io::BufWriter::new(f))
}

fn candidate_row(k: usize, c: &Candidate) -> String {
    let g = |x: Option<f64>| x.map(fmt6).unwrap_or_else(|| "-".into());
    let inv = c.control.invariants();
    format!(
        "{:>3}  {:>10}  {:>10}  {:>10}  {:<20} {:>10} {:>10}  S=({}, {}, {})",
        k + 1,
        fmt6(c.t_final),
        fmt6(c.cost),
        fmt6(c.residual),
        c.tag().as_str(),
        g(inv.map(|v| v.0)),
        g(inv.map(|v| v.1)),
        fmt6(c.costate.sx),
        fmt6(c.costate.sy),
        fmt6(c.costate.sz),
    )
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let mut p = Problem::load(&a.file)?;
    if let Some(t) = a.max_t {
        p.search.max_t = t;
    }
    if let Some(n) = a.starts {
        p.search.starts = n;
    }
    if let Some(t) = a.tol {
        p.search.tol = t;
    }
    if let Some(s) = a.seed {
        p.search.seed = s;
    }
    if let Some(b) = a.bound {
        p.search.costate_bound = b;
    }
    if !a.at_t.is_empty() {
        p.search.final_times = a.at_t.clone();
    }
    let cands = match solve(&p) {
        Err(Error::Uncontrollable(_)) => {
            check_report(&p, out)?;
            return Ok(EXIT_UNCONTROLLABLE);
        }
        r => r?,
    };
    writeln!(out, "{} candidate(s)", cands.len())?;
    if !cands.is_empty() {
        writeln!(
            out,
            "{:>3}  {:>10}  {:>10}  {:>10}  {:<20} {:>10} {:>10}  costate",
            "#", "T", "J", "residual", "law", "g2", "g3"
        )?;
    }
    for (k, c) in cands.iter().take(a.top).enumerate() {
        writeln!(out, "{}", candidate_row(k, c))?;
    }
    if let Some(path) = &a.json {
        let s: Vec<CandidateSummary> = cands.iter().map(Candidate::summary).collect();
        let txt = serde_json::to_string_pretty(&s).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, txt).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(dir) = &a.emit_traj {
        std::fs::create_dir_all(dir)?;
        for (k, c) in cands.iter().enumerate() {
            let tr = propagate_with(p.a(), p.b(), &c.control, c.t_final, p.search.prop_step, Scheme::Magnus4)?
                .with_distance(&p.target);
            write_traj(&tr, &dir.join(format!("candidate_{:03}.csv", k + 1)))?;
        }
    }
    Ok(if cands.is_empty() { EXIT_NO_CANDIDATES } else { EXIT_OK })
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&a.file)?;
    let s = costate_arg(&a.s)?;
    let sys = &p.system;
    let st = costate_init(&s, sys.a, sys.b);
    let law = synthesize(&st, sys.alpha, sys.beta, sys.gamma)?;
    let sum = law.summary();
    if a.json {
        writeln!(out, "{}", serde_json::to_string(&sum).map_err(|e| Error::Io(e.to_string()))?)?;
    } else {
        writeln!(out, "law: {}", sum.tag)?;
        writeln!(out, "(uA, uB, uC)(0) = ({}, {}, {})", fmt6(st.ua), fmt6(st.ub), fmt6(st.uc))?;
        if let (Some(g2), Some(g3)) = (sum.g2, sum.g3) {
            writeln!(out, "g2 = {}  g3 = {}", fmt6(g2), fmt6(g3))?;
        }
        if let (Some(r), Some(i)) = (sum.a_re, sum.a_im) {
            writeln!(out, "shift a = {} + {}i", fmt6(r), fmt6(i))?;
        }
        writeln!(out, "u(0) = {}", fmt6(law.u0()))?;
    }
    if let Some(t) = a.t_final {
        let poles = law.poles_in(0.0, t);
        if !poles.is_empty() {
            writeln!(out, "poles in [0, T]: {}", poles.iter().map(|x| fmt6(*x)).collect::<Vec<_>>().join(", "))?;
        }
        for k in 0..=10 {
            let tk = t * k as f64 / 10.0;
            match law.evaluate(tk) {
                Ok(u) => writeln!(out, "u({}) = {}", fmt6(tk), fmt6(u))?,
                Err(_) => writeln!(out, "u({}) = pole", fmt6(tk))?,
            }
        }
    }
    if let Some(path) = &a.dump_wp {
        let w = law
            .weierstrass()
            .ok_or_else(|| Error::Domain(format!("law {} has no Weierstrass form", sum.tag)))?;
        let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        crate::elliptic::write_wp_csv(std::io::BufWriter::new(f), w, 64)?;
    }
    Ok(EXIT_OK)
}

fn cmd_propagate(a: &PropagateArgs, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&a.file)?;
    let scheme = if a.magnus { Scheme::Magnus4 } else { Scheme::Midpoint };
    let law: Box<dyn ControlLaw> = match (a.u, a.s.is_empty()) {
        (Some(u), _) => Box::new(ConstantLaw(u)),
        (None, false) => {
            let s = costate_arg(&a.s)?;
            let sys = &p.system;
            Box::new(synthesize(&costate_init(&s, sys.a, sys.b), sys.alpha, sys.beta, sys.gamma)?)
        }
        (None, true) => return Err(Error::Parse("propagate needs --s or --u".into())),
    };
    let tr = propagate_with(p.a(), p.b(), law.as_ref(), a.t_final, a.step, scheme)?.with_distance(&p.target);
    writeln!(out, "T = {}", fmt6(a.t_final))?;
    writeln!(out, "J = {}", fmt6(tr.cost()))?;
    writeln!(out, "terminal residual = {}", fmt6(frobenius_distance(tr.final_state(), &p.target)))?;
    writeln!(out, "group invariant drift = {}", fmt6(tr.invariant_drift()))?;
    if let Some(path) = &a.out {
        write_traj(&tr, path)?;
    }
    Ok(EXIT_OK)
}

fn cmd_baseline(a: &BaselineArgs, out: &mut dyn Write) -> Result<i32> {
    let p = Problem::load(&a.file)?;
    let (law, j) = baseline(a.c, a.n1, a.n2)?;
    let tr = propagate_with(p.a(), p.b(), &law, law.total_time(), a.step, Scheme::Magnus4)?.with_distance(&p.target);
    writeln!(out, "t1 = {}", fmt6(law.t1))?;
    writeln!(out, "t2 = {}", fmt6(law.t2))?;
    writeln!(out, "T = {}", fmt6(law.total_time()))?;
    writeln!(out, "J closed form = {}", fmt6(j))?;
    writeln!(out, "J numeric = {}", fmt6(tr.cost()))?;
    writeln!(out, "terminal residual = {}", fmt6(frobenius_distance(tr.final_state(), &p.target)))?;
    if let Some(path) = &a.out {
        write_traj(&tr, path)?;
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command; returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let r = match &cli.command {
        Command::Check { file } => Problem::load(file).and_then(|p| {
            check_report(&p, out).map(|ok| if ok { EXIT_OK } else { EXIT_UNCONTROLLABLE })
        }),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Propagate(a) => cmd_propagate(a, out),
        Command::Baseline(a) => cmd_baseline(a, out),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
