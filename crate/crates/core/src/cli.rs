//! Command-line front end: configuration in SI units, one subcommand per
//! library operation, CSV output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dissipator::{build_coeffs_with, AtomParams, Geometry, LambShiftPolicy, ALPHA_SUM_TOL};
use crate::dynamics::evolve_numeric;
use crate::error::Error;
use crate::phase::{
    first_order_environment, gp_closed_form, gp_first_order, nonradiative_ratio, sweep_z,
};
use crate::spectral;
use crate::units;
use crate::verify::{run_checks, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Largest number of RK4 steps `evolve` accepts.
pub const MAX_EVOLVE_STEPS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Duration {
    Seconds(f64),
    Cycles(f64),
}

impl Duration {
    pub fn phi(&self, omega0: f64) -> f64 {
        match *self {
            Duration::Seconds(t) => units::time_to_phi(t, omega0),
            Duration::Cycles(n) => units::cycles_to_phi(n),
        }
    }

    pub fn seconds(&self, omega0: f64) -> f64 {
        match *self {
            Duration::Seconds(t) => t,
            Duration::Cycles(n) => units::phi_to_time(units::cycles_to_phi(n), omega0),
        }
    }
}

/// Full run configuration. [`Default`] is the reference profile: an atom at
/// 1 um from the plate compared with one further out, `omega0 = 3e9 rad/s`,
/// `gamma0/omega0 = 1e-6`, `theta = pi/2`, isotropic dipole, `T = 1 ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0_si: f64,
    pub gamma_ratio: f64,
    pub theta_rad: f64,
    pub alpha: [f64; 3],
    /// Atom distance for `evolve` and `phase`; infinite means free space.
    pub z_m: f64,
    /// Reference distance for `sweep`.
    pub z0_m: f64,
    pub duration: Duration,
    pub beta_cm3: Option<f64>,
    pub out_path: Option<PathBuf>,
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
    pub grid: GridKind,
    pub policy: LambShiftPolicy,
    pub steps_per_cycle: usize,
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega0_si: 3e9,
            gamma_ratio: 1e-6,
            theta_rad: std::f64::consts::FRAC_PI_2,
            alpha: [1.0 / 3.0; 3],
            z_m: 1e-5,
            z0_m: 1e-6,
            duration: Duration::Seconds(1e-3),
            beta_cm3: None,
            out_path: None,
            z_min: 1e-6,
            z_max: 1e-4,
            points: 60,
            grid: GridKind::Log,
            policy: LambShiftPolicy::Bare,
            steps_per_cycle: 2000,
            stride: 1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_f64(key: &str, value: &str) -> Result<f64, Error> {
    let v = value.trim();
    let parsed = match v.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse::<f64>(),
    };
    parsed.map_err(|_| config_err(format!("{key}: cannot parse '{v}' as a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, Error> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| config_err(format!("{key}: cannot parse '{}' as a count", value.trim())))
}

/// Parses `ax,ay,az`.
pub fn parse_alpha(value: &str) -> Result<[f64; 3], Error> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err(config_err(format!(
            "alpha needs three comma-separated values, got '{value}'"
        )));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_f64("alpha", p)?;
    }
    Ok(out)
}

/// Parses `key = value` lines; `#` starts a comment. Keys are returned with
/// `-` normalized to `_`.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(format!(
                "line {}: expected 'key = value', got '{line}'",
                n + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(config_err(format!("line {}: missing key", n + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one layer of settings on top of `self`. Setting both `time_s`
    /// and `cycles` in the same layer is an error; either one replaces the
    /// duration of the layers below.
    pub fn apply(&mut self, entries: &[(String, String)]) -> Result<(), Error> {
        let mut duration_set = None;
        for (key, value) in entries {
            match key.as_str() {
                "omega0_si" => self.omega0_si = parse_f64(key, value)?,
                "gamma_ratio" => self.gamma_ratio = parse_f64(key, value)?,
                "theta_rad" => self.theta_rad = parse_f64(key, value)?,
                "alpha" => self.alpha = parse_alpha(value)?,
                "z_m" => self.z_m = parse_f64(key, value)?,
                "z0_m" => self.z0_m = parse_f64(key, value)?,
                "time_s" | "cycles" => {
                    if let Some(prev) = duration_set {
                        if prev != key.as_str() {
                            return Err(config_err("give exactly one of time_s and cycles"));
                        }
                    }
                    let v = parse_f64(key, value)?;
                    self.duration = if key == "time_s" {
                        duration_set = Some("time_s");
                        Duration::Seconds(v)
                    } else {
                        duration_set = Some("cycles");
                        Duration::Cycles(v)
                    };
                }
                "beta_cm3" => self.beta_cm3 = Some(parse_f64(key, value)?),
                "out_path" => self.out_path = Some(PathBuf::from(value)),
                "z_min" => self.z_min = parse_f64(key, value)?,
                "z_max" => self.z_max = parse_f64(key, value)?,
                "points" => self.points = parse_usize(key, value)?,
                "grid" => {
                    self.grid = match value.trim().to_ascii_lowercase().as_str() {
                        "log" => GridKind::Log,
                        "linear" => GridKind::Linear,
                        other => {
                            return Err(config_err(format!(
                                "grid must be 'log' or 'linear', got '{other}'"
                            )))
                        }
                    }
                }
                "policy" => self.policy = value.parse()?,
                "steps_per_cycle" => self.steps_per_cycle = parse_usize(key, value)?,
                "stride" => self.stride = parse_usize(key, value)?,
                other => return Err(config_err(format!("unknown configuration key '{other}'"))),
            }
        }
        Ok(())
    }

    /// Checks positivity of physical values and normalizes `alpha`. Returns
    /// the warnings to show the user.
    pub fn validate(&mut self) -> Result<Vec<String>, Error> {
        let mut warnings = Vec::new();
        let positive = [
            ("omega0_si", self.omega0_si),
            ("gamma_ratio", self.gamma_ratio),
            ("z_m", self.z_m),
            ("z0_m", self.z0_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(config_err(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.omega0_si.is_finite() || !self.z0_m.is_finite() {
            return Err(config_err("omega0_si and z0_m must be finite"));
        }
        match self.duration {
            Duration::Seconds(t) | Duration::Cycles(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(config_err(format!(
                    "duration must be positive and finite, got {t}"
                )));
            }
            _ => {}
        }
        if let Some(b) = self.beta_cm3 {
            if !(b >= 0.0) {
                return Err(config_err(format!("beta_cm3 must be >= 0, got {b}")));
            }
        }
        if self.alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(config_err(format!(
                "alpha components must be >= 0, got {:?}",
                self.alpha
            )));
        }
        let sum: f64 = self.alpha.iter().sum();
        if !(sum > 0.0) {
            return Err(config_err("alpha must have a positive component"));
        }
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            warnings.push(format!("alpha sums to {sum}; renormalized to 1"));
            for a in &mut self.alpha {
                *a /= sum;
            }
        }
        if self.stride == 0 {
            return Err(config_err("stride must be >= 1"));
        }
        Ok(warnings)
    }

    pub fn atom(&self) -> Result<AtomParams, Error> {
        AtomParams::new(self.omega0_si, self.gamma_ratio, self.theta_rad, self.alpha)
    }

    pub fn geometry(&self) -> Result<Geometry, Error> {
        if self.z_m.is_infinite() {
            Ok(Geometry::free_space())
        } else {
            Geometry::at_distance(self.z_m, self.omega0_si)
        }
    }

    /// The `z` grid from `z_min`, `z_max`, `points` and `grid`.
    pub fn z_grid(&self) -> Result<Vec<f64>, Error> {
        let (lo, hi, n) = (self.z_min, self.z_max, self.points);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(config_err(format!(
                "need 0 < z_min <= z_max < inf, got [{lo}, {hi}]"
            )));
        }
        if n == 0 || (n == 1 && hi != lo) {
            return Err(config_err(format!(
                "a grid over [{lo}, {hi}] needs at least 2 points, got {n}"
            )));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let last = (n - 1) as f64;
        let mut grid: Vec<f64> = match self.grid {
            GridKind::Linear => (0..n).map(|k| lo + (hi - lo) * k as f64 / last).collect(),
            GridKind::Log => {
                let (l0, l1) = (lo.ln(), hi.ln());
                (0..n)
                    .map(|k| (l0 + (l1 - l0) * k as f64 / last).exp())
                    .collect()
            }
        };
        grid[0] = lo;
        grid[n - 1] = hi;
        Ok(grid)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "boundary-gp",
    version,
    about = "Geometric phase of a two-level atom near a reflecting plane"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the boundary modulation functions over the z grid (z_m,u,fx,fz).
    Modfuncs(ConfigArgs),
    /// Integrate the master equation with RK4 and print the trajectory.
    Evolve(ConfigArgs),
    /// Geometric phase accumulated by the atom at z_m.
    Phase(ConfigArgs),
    /// Phase difference between atoms at z0_m and at each z of the grid.
    Sweep(ConfigArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bare transition frequency in rad/s.
    #[arg(long)]
    pub omega0_si: Option<String>,
    /// Vacuum decay rate over transition frequency.
    #[arg(long)]
    pub gamma_ratio: Option<String>,
    /// Initial superposition angle in [0, pi].
    #[arg(long)]
    pub theta_rad: Option<String>,
    /// Dipole weights "ax,ay,az" (z normal to the plane).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Atom-plate distance in metres ("inf" for free space).
    #[arg(long)]
    pub z_m: Option<String>,
    /// Reference distance for sweeps, in metres.
    #[arg(long)]
    pub z0_m: Option<String>,
    /// Evolution time in seconds.
    #[arg(long, conflicts_with = "cycles")]
    pub time_s: Option<String>,
    /// Evolution time in periods 2 pi / omega0.
    #[arg(long)]
    pub cycles: Option<String>,
    /// Nonradiative coefficient of an absorbing plate, in cm^3.
    #[arg(long)]
    pub beta_cm3: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out_path: Option<String>,
    /// Smallest grid distance, in metres.
    #[arg(long)]
    pub z_min: Option<String>,
    /// Largest grid distance, in metres.
    #[arg(long)]
    pub z_max: Option<String>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub points: Option<String>,
    /// Grid spacing: log or linear.
    #[arg(long)]
    pub grid: Option<String>,
    /// Lamb-shift treatment (only "bare").
    #[arg(long)]
    pub policy: Option<String>,
    /// RK4 steps per period for evolve.
    #[arg(long)]
    pub steps_per_cycle: Option<String>,
    /// Keep every n-th evolve row (the last row is always kept).
    #[arg(long)]
    pub stride: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Inject this relative error into the reference side of each check.
    #[arg(long, hide = true, default_value = "0")]
    pub perturb: f64,
}

impl ConfigArgs {
    fn flag_entries(&self) -> Vec<(String, String)> {
        let fields: [(&str, &Option<String>); 17] = [
            ("omega0_si", &self.omega0_si),
            ("gamma_ratio", &self.gamma_ratio),
            ("theta_rad", &self.theta_rad),
            ("alpha", &self.alpha),
            ("z_m", &self.z_m),
            ("z0_m", &self.z0_m),
            ("time_s", &self.time_s),
            ("cycles", &self.cycles),
            ("beta_cm3", &self.beta_cm3),
            ("out_path", &self.out_path),
            ("z_min", &self.z_min),
            ("z_max", &self.z_max),
            ("points", &self.points),
            ("grid", &self.grid),
            ("policy", &self.policy),
            ("steps_per_cycle", &self.steps_per_cycle),
            ("stride", &self.stride),
        ];
        fields
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<(RunConfig, Vec<String>), Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply(&parse_config_text(&text)?)?;
        }
        cfg.apply(&self.flag_entries())?;
        let warnings = cfg.validate()?;
        Ok((cfg, warnings))
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::Numerical { .. } | Error::Degenerate { .. } | Error::Precondition(_) => {
            EXIT_NUMERICAL
        }
    }
}

pub fn cmd_modfuncs(cfg: &RunConfig) -> Result<String, Error> {
    let mut out = String::from("z_m,u,fx,fz\n");
    for z in cfg.z_grid()? {
        let u = units::distance_to_u(z, cfg.omega0_si);
        let f = spectral::modulation(u)?;
        writeln!(
            out,
            "{},{},{},{}",
            fmt_num(z),
            fmt_num(u),
            fmt_num(f.fx),
            fmt_num(f.fz)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<String, Error> {
    let params = cfg.atom()?;
    let coeffs = build_coeffs_with(&params, &cfg.geometry()?, cfg.policy);
    let phi_end = cfg.duration.phi(cfg.omega0_si);
    let steps = (phi_end / std::f64::consts::TAU * cfg.steps_per_cycle as f64).ceil();
    if !(steps <= MAX_EVOLVE_STEPS as f64) {
        return Err(config_err(format!(
            "evolve would need {steps:e} RK4 steps (limit {MAX_EVOLVE_STEPS}); shorten the duration"
        )));
    }
    let traj =
        evolve_numeric(&params, &coeffs, phi_end, (steps as usize).max(10))?.decimate(cfg.stride);
    let mut out = String::from("phi,ee,re_eg,im_eg,gg,purity\n");
    for (phi, s) in traj.iter() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_num(phi),
            fmt_num(s.ee),
            fmt_num(s.eg.re),
            fmt_num(s.eg.im),
            fmt_num(s.gg),
            fmt_num(s.purity())
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_phase(cfg: &RunConfig) -> Result<String, Error> {
    let params = cfg.atom()?;
    let geom = cfg.geometry()?;
    let coeffs = build_coeffs_with(&params, &geom, cfg.policy);
    let phi_end = cfg.duration.phi(cfg.omega0_si);
    let exact = gp_closed_form(&params, &coeffs, phi_end)?;
    let cycle = gp_first_order(&params, &geom)?;
    let first_env = first_order_environment(&params, &geom, phi_end)?;

    let mut out = String::new();
    let mut line = |k: &str, v: f64| writeln!(out, "{k} = {}", fmt_num(v)).unwrap();
    line("phi_end", phi_end);
    line("u", geom.u());
    line("decay_a", coeffs.a);
    line("total", exact.total);
    line("geometric_part", exact.geometric_part);
    line("environment_part", exact.environment_part);
    line("first_order_environment", first_env);
    line("first_order_total", exact.geometric_part + first_env);
    line("first_order_cycle_total", cycle.total);
    line("first_order_cycle_environment", cycle.environment_part);
    if let Some(beta) = cfg.beta_cm3 {
        if geom.is_free_space() {
            line("nonradiative_ratio", 0.0);
        } else {
            line("nonradiative_ratio", nonradiative_ratio(cfg.z_m, beta)?);
        }
    }
    writeln!(
        out,
        "alpha = {},{},{}",
        cfg.alpha[0], cfg.alpha[1], cfg.alpha[2]
    )
    .unwrap();
    writeln!(out, "policy = {}", cfg.policy).unwrap();
    Ok(out)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, Error> {
    let params = cfg.atom()?;
    let t = cfg.duration.seconds(cfg.omega0_si);
    let rows = sweep_z(&cfg.z_grid()?, cfg.z0_m, &params, t)?;
    let mut out = String::from("z_m,delta_rad\n");
    for r in rows {
        writeln!(out, "{},{}", fmt_num(r.z), fmt_num(r.delta)).unwrap();
    }
    Ok(out)
}

/// Returns the report and whether every check passed.
pub fn cmd_verify(cfg: &RunConfig, perturbation: f64) -> Result<(String, bool), Error> {
    let params = cfg.atom()?;
    let geom = cfg.geometry()?;
    let checks = run_checks(&params, &geom, &VerifyOptions { perturbation })?;
    let mut out = String::new();
    for c in &checks {
        writeln!(out, "{c}").unwrap();
    }
    let ok = checks.iter().all(|c| c.passed());
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(out, "{} checks, {} failed", checks.len(), failed).unwrap();
    Ok((out, ok))
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| config_err(format!("cannot write {}: {e}", p.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| config_err(format!("cannot write output: {e}"))),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };

    let (args, perturb) = match &cli.command {
        Command::Modfuncs(a) | Command::Evolve(a) | Command::Phase(a) | Command::Sweep(a) => {
            (a, 0.0)
        }
        Command::Verify(v) => (&v.config, v.perturb),
    };
    let (cfg, warnings) = match args.resolve() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    for w in warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }

    let result = match &cli.command {
        Command::Modfuncs(_) => cmd_modfuncs(&cfg).map(|s| (s, true)),
        Command::Evolve(_) => cmd_evolve(&cfg).map(|s| (s, true)),
        Command::Phase(_) => cmd_phase(&cfg).map(|s| (s, true)),
        Command::Sweep(_) => {
            let _ = writeln!(
                stderr,
                "note: z0_m = {:e}, alpha = {},{},{}, t = {:e} s",
                cfg.z0_m,
                cfg.alpha[0],
                cfg.alpha[1],
                cfg.alpha[2],
                cfg.duration.seconds(cfg.omega0_si)
            );
            cmd_sweep(&cfg).map(|s| (s, true))
        }
        Command::Verify(_) => cmd_verify(&cfg, perturb),
    };

    match result {
        Ok((text, ok)) => {
            if let Err(e) = emit(&text, cfg.out_path.as_deref(), stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_CONFIG;
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
