//! Batch front-end: configuration, dispatch, CSV/JSON emission and exit codes.

mod args;
mod config;
mod table;

pub use args::{main_with_args, parse_args};
pub use config::{
    parse_grid, CohomologyParams, Command, ContractParams, GreenParams, HolderParams, InvarianceParams,
    LyapunovParams, OrbitParams, RunConfig, SaddleParams, Subcommand, SurfaceParams, SurfaceSpec,
};
pub use table::{emit_table, format_float, orbit_table, read_orbit_csv, Cell, Table};

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::currents::{
    green_value, holder_estimate, l1_contraction_test, panel, ClassWeights, CurrentsError, TestFunction,
};
use crate::dynamics::{
    dim_plus, lyapunov, lyapunov_periodic, orbit, orbit_exact, periodic_search, task_seed, DynamicsError, Mode,
};
use crate::lattice::{contraction_report, CurveConfigFile, IntersectionForm, LatticeError};
use crate::picard::{automorphism_action, involution_isometry, spectral_data, Composition, Factor, PicardError};
use crate::surface::{
    fiber_quadratic, fiber_roots, random_point, random_wehler_screened, rational_points, SurfaceError,
    SurfacePoint, WehlerCoefficients, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Dynamics(DynamicsError),
    #[error(transparent)]
    Currents(CurrentsError),
    #[error("invariant failure: {0}")]
    Invariant(String),
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Surface(s) => CliError::Surface(s),
            other => CliError::Dynamics(other),
        }
    }
}

impl From<CurrentsError> for CliError {
    fn from(e: CurrentsError) -> Self {
        match e {
            CurrentsError::Surface(s) => CliError::Surface(s),
            CurrentsError::Dynamics(d) => d.into(),
            CurrentsError::Picard(p) => CliError::Picard(p),
            other => CliError::Currents(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Lattice(_) => 10,
            CliError::Picard(_) => 11,
            CliError::Surface(_) => 12,
            CliError::Dynamics(_) => 13,
            CliError::Currents(_) => 14,
            CliError::Invariant(_) => 20,
        }
    }
}

/// Result of a run before anything is written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    /// One line per reported quantity.
    pub summary: Vec<String>,
    /// CSV or JSON bytes for `--output`.
    pub artifact: Vec<u8>,
    /// Hard invariant failures; the run still produces its artifact.
    pub failures: Vec<String>,
}

impl RunOutput {
    fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn load_surface(spec: &SurfaceSpec) -> Result<WehlerCoefficients, CliError> {
    match &spec.file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let w = WehlerCoefficients::from_json(&text)?;
            Ok(if w.screen().is_some() { w } else { w.with_screen(spec.screen_samples, spec.seed) })
        }
        None => Ok(random_wehler_screened(spec.seed, spec.bound, spec.screen_samples)?),
    }
}

fn require_smooth(w: &WehlerCoefficients) -> Result<(), CliError> {
    match w.screen() {
        Some(s) if !s.pass => Err(CliError::Surface(SurfaceError::SingularPoint)),
        _ => Ok(()),
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(task_seed(seed, index))
}

/// Dispatches a validated config. Pure apart from reading input files.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let mut out = RunOutput::default();
    match &cfg.command {
        Command::Cohomology(p) => run_cohomology(p, &mut out)?,
        Command::Surface(_) => {
            let w = load_surface(&cfg.surface)?;
            let s = w.screen().expect("screened");
            out.line(format!("surface seed = {:?}, bound = {}", w.seed(), cfg.surface.bound));
            out.line(format!(
                "smoothness screen: {} ({} samples, {} probes, min relative gradient {})",
                if s.pass { "pass" } else { "FAIL" },
                s.n_samples,
                s.probes,
                format_float(s.min_relative_gradient)
            ));
            if let Some(warn) = &s.warning {
                out.line(format!("warning: {warn}"));
            }
            out.artifact = w.to_json().into_bytes();
            out.artifact.push(b'\n');
            if !s.pass {
                out.failures.push(format!("smoothness screen found {} witnesses", s.witnesses.len()));
            }
        }
        Command::Orbit(p) => run_orbit(cfg, p, &mut out)?,
        Command::Lyapunov(p) => run_lyapunov(cfg, p, &mut out)?,
        Command::Saddles(p) => run_saddles(cfg, p, &mut out)?,
        Command::Green(p) => run_green(cfg, p, &mut out)?,
        Command::Holder(p) => run_holder(cfg, p, &mut out)?,
        Command::Invariance(p) => run_invariance(cfg, p, &mut out)?,
        Command::Contract(p) => {
            let text = std::fs::read_to_string(&p.input)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.input.display())))?;
            let file = CurveConfigFile::from_json(&text)?;
            let rep = contraction_report(&file.alpha()?, &file.to_config()?, p.rmax)?;
            out.line(format!("alpha^2 = {}, null curves {:?}", rep.alpha_square, rep.null_curves));
            for c in &rep.components {
                out.line(format!("component {:?}: {:?}", c.curves, c.verdict));
            }
            out.artifact = json_bytes(&rep);
        }
    }
    Ok(out)
}

fn run_cohomology(p: &CohomologyParams, out: &mut RunOutput) -> Result<(), CliError> {
    let mut comp: Composition = p.order.parse()?;
    if p.inverse {
        comp = comp.inverted();
    }
    let g = IntersectionForm::wehler();
    for f in Factor::ALL {
        let m = involution_isometry(f.number())?;
        out.line(format!("M{} = {:?} (isometry, det {})", f.number(), m.entries(), m.det()));
    }
    let m = automorphism_action(comp);
    let eig = spectral_data(&m)?;
    let pairing_raw = g.pair(&eig.e_plus, &eig.e_minus_raw);
    let pairing = g.pair(&eig.e_plus, &eig.e_minus);
    out.line(comp.describe());
    out.line(format!("action = {:?}", m.entries()));
    out.line(format!("char poly = {}", eig.char_poly));
    out.line(format!("lambda = {} = {}", eig.lambda, format_float(eig.lambda_f64())));
    out.line(format!("lambda^-1 = {}, third eigenvalue = {}", eig.lambda_inv, eig.third_eigenvalue));
    out.line(format!("e_plus = {:?}", eig.e_plus.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    out.line(format!("e_minus = {:?}", eig.e_minus.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    out.line(format!("<e_plus, e_minus_raw> = {pairing_raw}, <e_plus, e_minus> = {pairing}"));
    out.line(format!("entropy = {} nats", format_float(eig.entropy)));
    #[derive(Serialize)]
    struct Report<'a> {
        composition: String,
        action: [[i64; 3]; 3],
        spectral: &'a crate::picard::EigenData,
        pairing_raw: String,
        pairing: String,
    }
    out.artifact = json_bytes(&Report {
        composition: comp.describe(),
        action: *m.entries(),
        spectral: &eig,
        pairing_raw: pairing_raw.to_string(),
        pairing: pairing.to_string(),
    });
    Ok(())
}

fn run_orbit(cfg: &RunConfig, p: &OrbitParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let rec = match p.mode {
        Mode::Float => {
            let start = random_point(&w, &mut rng_for(cfg.seed, 0));
            orbit(&w, &start, p.n, p.direction)?
        }
        Mode::Exact => {
            let pts = rational_points(&w, 6, p.point_index + 1);
            let start = pts.get(p.point_index).ok_or_else(|| {
                CliError::Dynamics(DynamicsError::Invalid(format!(
                    "only {} rational points of small height found",
                    pts.len()
                )))
            })?;
            orbit_exact(&w, start, p.n, p.direction)?
        }
    };
    out.line(format!("orbit: {} points, composition {}", rec.len(), rec.composition.describe()));
    let k = rec.lift_log_scales();
    if let Some(last) = k.last().filter(|_| k.len() > 1) {
        let m = last.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        out.line(format!("lift log-scale growth per step = {} (log lambda = {})", format_float(m.ln() / (k.len() - 1) as f64), format_float(crate::currents::lambda().ln())));
    }
    for h in crate::dynamics::exact_heights(&rec) {
        out.line(format!("step {}: log height {}, {} digits", h.step, format_float(h.log_height), h.digits));
    }
    out.artifact = orbit_table(&rec).to_csv()?;
    if let Some((step, e)) = &rec.abort {
        out.failures.push(format!("orbit aborted at step {step}: {e}"));
    }
    Ok(())
}

fn run_lyapunov(cfg: &RunConfig, p: &LyapunovParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let est: Vec<_> = (0..p.seeds as u64)
        .into_par_iter()
        .map(|i| {
            let start = random_point(&w, &mut rng_for(cfg.seed, i));
            lyapunov(&w, &start, p.n, task_seed(cfg.seed, i))
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(["seed_index", "n", "estimate", "half_width"]);
    for (i, e) in est.iter().enumerate() {
        t.push(vec![Cell::Int(i as i64), Cell::Int(e.n as i64), Cell::Float(e.lambda_plus), Cell::Float(e.half_width)]);
    }
    let mean = est.iter().map(|e| e.lambda_plus).sum::<f64>() / est.len() as f64;
    out.line(format!("Lyapunov exponent along dVol-random orbits: mean {} over {} seeds", format_float(mean), est.len()));
    let h = crate::currents::lambda().ln();
    if let Ok(d) = dim_plus(h, mean) {
        out.line(format!("h / lambda_hat = {}{}", format_float(d.value), if d.flagged { " (above 2: not a mu-typical estimate)" } else { "" }));
    }
    out.artifact = t.to_csv()?;
    Ok(())
}

fn point_cells(p: &SurfacePoint) -> Vec<Cell> {
    p.pairs().iter().flat_map(|w| w.iter().flat_map(|z| [Cell::Float(z.re), Cell::Float(z.im)])).collect()
}

fn point_header(prefix: &str) -> Vec<String> {
    let mut h = Vec::new();
    for f in ["x", "y", "z"] {
        for k in 0..2 {
            h.push(format!("{prefix}{f}{k}_re"));
            h.push(format!("{prefix}{f}{k}_im"));
        }
    }
    h
}

fn run_saddles(cfg: &RunConfig, p: &SaddleParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let rep = periodic_search(&w, p.period, p.seeds, p.tol, cfg.seed)?;
    let mut header: Vec<String> = ["orbit", "period", "index"].map(String::from).to_vec();
    header.extend(point_header(""));
    header.extend(["m1_re", "m1_im", "m2_re", "m2_im", "abs_m1m2", "residual", "lyapunov", "lyapunov_half_width"].map(String::from));
    let mut t = Table::new(header);
    let mut exps = Vec::new();
    for (o, s) in rep.saddles.iter().enumerate() {
        let l = lyapunov_periodic(&w, s, p.lyapunov_n.max(10), task_seed(cfg.seed, o as u64))?;
        let prod = (s.multipliers[0] * s.multipliers[1]).norm();
        if (prod - 1.0).abs() > 1e-6 {
            out.failures.push(format!("orbit {o}: |m1 m2| = {prod}"));
        }
        exps.push(l.lambda_plus);
        for (i, q) in s.orbit.iter().enumerate() {
            let mut row = vec![Cell::Int(o as i64), Cell::Int(s.period as i64), Cell::Int(i as i64)];
            row.extend(point_cells(q));
            let m = s.multipliers;
            row.extend([
                Cell::Float(m[0].re),
                Cell::Float(m[0].im),
                Cell::Float(m[1].re),
                Cell::Float(m[1].im),
                Cell::Float(prod),
                Cell::Float(s.residual),
                Cell::Float(l.lambda_plus),
                Cell::Float(l.half_width),
            ]);
            t.push(row);
        }
    }
    out.line(format!(
        "period {}: {} saddle orbits from {} seeds ({} converged, {} duplicates, {} lower period, {} not saddles)",
        p.period, rep.saddles.len(), rep.seeds, rep.converged, rep.duplicates, rep.lower_period, rep.not_saddle
    ));
    if !exps.is_empty() {
        let mean = exps.iter().sum::<f64>() / exps.len() as f64;
        let h = crate::currents::lambda().ln();
        out.line(format!("saddle Lyapunov exponents: mean {}, h/2 = {}", format_float(mean), format_float(h / 2.0)));
        if let Ok(d) = dim_plus(h, mean) {
            out.line(format!("dim_plus = {}{}", format_float(d.value), if d.flagged { " (flagged: above 2)" } else { "" }));
        }
    }
    out.artifact = t.to_csv()?;
    Ok(())
}

fn run_green(cfg: &RunConfig, p: &GreenParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let xs = parse_grid(&p.grid)?;
    let weights = ClassWeights::canonical(p.sign);
    let mut t = Table::new([
        "x_re", "x_im", "y_re", "y_im", "z_re", "z_im", "sheet", "g", "n_terms", "tail_bound", "flag",
    ]);
    let one = C64::new(1.0, 0.0);
    let (mut evaluated, mut flagged, mut over, mut worst) = (0, 0, 0, 0.0f64);
    for &x in &xs {
        for &y in &xs {
            let base = SurfacePoint::new([[one, C64::new(x, 0.0)], [one, C64::new(y, 0.0)], [one, C64::new(0.0, 0.0)]])?;
            let fq = fiber_quadratic(&w, Factor::Z, &base);
            let Some(roots) = fiber_roots(&fq.abc()).filter(|_| !fq.degenerate) else { continue };
            for (sheet, root) in roots.iter().enumerate() {
                let q = base.with_pair(2, *root)?;
                let g = green_value(&w, &q, &weights, p.sign, p.n_terms)?;
                evaluated += 1;
                let flag = if let Some(s) = g.aborted_at {
                    format!("aborted@{s}")
                } else if let Some(s) = g.diverged_at {
                    format!("diverged@{s}")
                } else {
                    String::new()
                };
                if g.flagged() {
                    flagged += 1;
                } else if g.tail_bound > p.tol {
                    over += 1;
                    worst = worst.max(g.tail_bound);
                }
                let z = q.affine(2);
                t.push(vec![
                    Cell::Float(x),
                    Cell::Float(0.0),
                    Cell::Float(y),
                    Cell::Float(0.0),
                    Cell::Float(z.re),
                    Cell::Float(z.im),
                    Cell::Int(sheet as i64),
                    Cell::Float(g.value),
                    Cell::Int(g.n_terms as i64),
                    Cell::Float(g.tail_bound),
                    Cell::Text(flag),
                ]);
            }
        }
    }
    out.line(format!(
        "green {:?}: {} points, {} flagged, N = {}, tolerance {}",
        p.sign,
        evaluated,
        flagged,
        p.n_terms,
        format_float(p.tol)
    ));
    if over > 0 {
        out.failures.push(format!(
            "{over} points have a tail bound above {}, worst {}; raise N",
            format_float(p.tol),
            format_float(worst)
        ));
    }
    out.artifact = t.to_csv()?;
    Ok(())
}

fn run_holder(cfg: &RunConfig, p: &HolderParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let points: Vec<SurfacePoint> = match p.saddle_period {
        Some(k) => {
            let rep = periodic_search(&w, k, 200, 1e-10, cfg.seed)?;
            rep.saddles.into_iter().map(|s| s.point).take(p.points).collect()
        }
        None => {
            let mut rng = rng_for(cfg.seed, 0);
            (0..p.points).map(|_| random_point(&w, &mut rng)).collect()
        }
    };
    if points.is_empty() {
        return Err(CliError::Currents(CurrentsError::EmptySaddleSet(p.saddle_period.unwrap_or(0))));
    }
    let rep = holder_estimate(&w, &points, &ClassWeights::canonical(p.sign), p.sign, p.n_terms, &p.scales, cfg.seed)?;
    out.line(format!(
        "Holder exponent of g{:?}: beta = {}, R^2 = {} ({}), {} points, {} excluded",
        p.sign,
        format_float(rep.beta),
        format_float(rep.r2),
        if rep.reliable { "reliable" } else { "unreliable" },
        points.len(),
        rep.excluded
    ));
    out.artifact = json_bytes(&rep);
    Ok(())
}

fn run_invariance(cfg: &RunConfig, p: &InvarianceParams, out: &mut RunOutput) -> Result<(), CliError> {
    let w = load_surface(&cfg.surface)?;
    require_smooth(&w)?;
    let funcs = if p.u.trim() == "panel" { panel() } else { vec![TestFunction::parse(&p.u)?] };
    let mut t = Table::new([
        "function", "centered", "n_mc", "mean", "norm", "norm_pushed", "diff", "se", "pass", "contraction",
    ]);
    for f in &funcs {
        let r = l1_contraction_test(&w, f, p.mc, cfg.seed, p.centered)?;
        out.line(format!(
            "{}: ||u|| = {}, ||u o T|| = {}, diff = {} (se {}), {}",
            r.function,
            format_float(r.norm),
            format_float(r.norm_pushed),
            format_float(r.diff),
            format_float(r.se),
            if r.pass { "pass" } else { "FAIL" }
        ));
        if !r.pass {
            out.failures.push(format!("{}: norms differ by {} > 3 se", r.function, r.diff));
        }
        t.push(vec![
            Cell::Text(r.function.clone()),
            Cell::Text(r.centered.to_string()),
            Cell::Int(r.n_mc as i64),
            Cell::Float(r.mean),
            Cell::Float(r.norm),
            Cell::Float(r.norm_pushed),
            Cell::Float(r.diff),
            Cell::Float(r.se),
            Cell::Text(r.pass.to_string()),
            Cell::Float(r.contraction),
        ]);
    }
    out.artifact = t.to_csv()?;
    Ok(())
}

/// Runs `cfg`, writes the artifact to `cfg.output` when set and the summary to
/// `stdout`, and maps hard invariant failures to an error.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let res = run(cfg)?;
    for line in &res.summary {
        writeln!(stdout, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    if let Some(path) = &cfg.output {
        write_file(path, &res.artifact)?;
    }
    if !res.failures.is_empty() {
        return Err(CliError::Invariant(res.failures.join("; ")));
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
