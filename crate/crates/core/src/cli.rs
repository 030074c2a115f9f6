//! Batch front end: JSON configuration, command dispatch, and artifacts.
//!
//! Every command writes its CSV/JSON outputs into the output directory plus
//! `manifest.json`, which records the validated configuration, the crate
//! version and a SHA-256 per artifact. Nothing time-dependent is written, so
//! identical configurations give byte-identical directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{moment_bound_check, omega0_threshold, tm_probe, MoserFamily};
use crate::chern_simons::gauge_profile;
use crate::error::{invalid, Error, Result};
use crate::functional::{probe_geometry_seeded, ProblemSpec, Tolerances};
use crate::grid::{make_grid, GridParams, RadialFunction};
use crate::nonlinearity::{
    compute_Sp, cp_bound, validate_model, NonlinearityKind, NonlinearityModel, SpResult,
};
use crate::solvers::{
    mountain_pass_from, parameter_sweep, two_solution_experiment, verify_solution, Solution,
    SolutionRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NONCONVERGENCE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    TwoSolutions,
    Sweep,
    Geometry,
    Sp,
    TmProbe,
    Omega0,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::TwoSolutions => "two-solutions",
            Command::Sweep => "sweep",
            Command::Geometry => "geometry",
            Command::Sp => "sp",
            Command::TmProbe => "tm-probe",
            Command::Omega0 => "omega0",
            Command::Verify => "verify",
        }
    }
}

/// `C_p` either fixed or derived from the computed `S_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CpSetting {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: NonlinearityKind,
    pub p: f64,
    #[serde(rename = "C_p")]
    pub c_p: CpSetting,
    /// Multiple of the required bound used when `C_p` is `"auto"`.
    pub cp_factor: f64,
    pub sigma: f64,
    pub kappa: f64,
}

/// Perturbation `k(r) = amplitude · e^{−(r/width)²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KConfig {
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_dirs: usize,
    /// Extra seeded random directions on top of the fixed family.
    pub random_dirs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmConfig {
    pub alphas: Vec<f64>,
    pub k_list: Vec<f64>,
    pub n: Option<usize>,
    /// Moment check `(β, M, q)`; skipped when absent.
    pub moment: Option<MomentConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentConfig {
    pub beta: f64,
    #[serde(rename = "M")]
    pub m_norm: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Omega0Config {
    pub p: f64,
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Path prefix of a stored solution: `<prefix>.csv` and `<prefix>.json`.
    pub solution: Option<PathBuf>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub grid: GridParams,
    pub lambda: f64,
    pub epsilon: f64,
    pub model: ModelConfig,
    pub k: KConfig,
    pub tol: Tolerances,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub sweep: SweepConfig,
    pub geometry: GeometryConfig,
    pub tm_probe: TmConfig,
    pub omega0: Omega0Config,
    pub verify: VerifyConfig,
}

// Raw documents: every key optional, unknown keys rejected.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    #[serde(rename = "R")]
    radius: Option<f64>,
    #[serde(rename = "N")]
    n: Option<usize>,
    r_min: Option<f64>,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    model: Option<RawModel>,
    k: Option<RawK>,
    tol: Option<RawTol>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    sweep: Option<RawSweep>,
    geometry: Option<RawGeometry>,
    tm_probe: Option<RawTm>,
    omega0: Option<RawOmega0>,
    verify: Option<VerifyConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Option<NonlinearityKind>,
    p: Option<f64>,
    #[serde(rename = "C_p")]
    c_p: Option<CpSetting>,
    cp_factor: Option<f64>,
    sigma: Option<f64>,
    kappa: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawK {
    amplitude: Option<f64>,
    width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTol {
    grad_tol: Option<f64>,
    max_iter: Option<usize>,
    path_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    lambdas: Option<Vec<f64>>,
    epsilons: Option<Vec<f64>>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    n_dirs: Option<usize>,
    random_dirs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTm {
    alphas: Option<Vec<f64>>,
    k_list: Option<Vec<f64>>,
    n: Option<usize>,
    moment: Option<MomentConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOmega0 {
    p: Option<f64>,
    window: Option<f64>,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be positive, got {v}")))
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be nonnegative, got {v}")))
    }
}

/// Parses and validates a JSON configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| invalid("config", format!("malformed configuration: {e}")))?;

    let radius = raw.radius.unwrap_or(20.0);
    let n = raw.n.unwrap_or(2048);
    let r_min = raw.r_min.unwrap_or(radius / (10.0 * n as f64));
    let grid = GridParams { radius, n, r_min };
    // Constructing the grid checks every grid invariant.
    make_grid(radius, n, r_min)?;

    let lambda = positive("lambda", raw.lambda.unwrap_or(1e-2))?;
    let epsilon = nonnegative("epsilon", raw.epsilon.unwrap_or(0.0))?;

    let rm = raw.model.unwrap_or_default();
    let kind = rm.kind.unwrap_or(NonlinearityKind::Power);
    let default_kappa = match kind {
        NonlinearityKind::Power => 0.0,
        NonlinearityKind::ExpCritical => 1e-2,
    };
    let model = ModelConfig {
        kind,
        p: rm.p.unwrap_or(8.0),
        c_p: rm.c_p.unwrap_or(CpSetting::Auto(AutoTag::Auto)),
        cp_factor: rm.cp_factor.unwrap_or(1.5),
        sigma: rm.sigma.unwrap_or(0.0),
        kappa: rm.kappa.unwrap_or(default_kappa),
    };
    let c_p_probe = match model.c_p {
        CpSetting::Fixed(v) => v,
        CpSetting::Auto(_) => 1.0,
    };
    NonlinearityModel::new(model.kind, model.p, c_p_probe, model.sigma, model.kappa)?;
    positive("cp_factor", model.cp_factor)?;

    let rk = raw.k.unwrap_or_default();
    let k = KConfig {
        amplitude: nonnegative("k.amplitude", rk.amplitude.unwrap_or(1.0))?,
        width: positive("k.width", rk.width.unwrap_or(1.0))?,
    };

    let rt = raw.tol.unwrap_or_default();
    let defaults = Tolerances::default();
    let tol = Tolerances {
        grad_tol: positive("tol.grad_tol", rt.grad_tol.unwrap_or(defaults.grad_tol))?,
        max_iter: rt.max_iter.unwrap_or(defaults.max_iter),
        path_points: rt.path_points.unwrap_or(defaults.path_points),
    };
    if tol.max_iter == 0 {
        return Err(invalid("tol.max_iter", "must be at least 1"));
    }
    if tol.path_points < 3 {
        return Err(invalid("tol.path_points", "need at least 3 path nodes"));
    }

    let rs = raw.sweep.unwrap_or_default();
    let sweep = SweepConfig {
        lambdas: rs.lambdas.unwrap_or_else(|| vec![1e-3, 1e-2]),
        epsilons: rs.epsilons.unwrap_or_else(|| vec![0.0, 1e-2]),
        workers: rs.workers,
    };
    if sweep.lambdas.is_empty() || sweep.epsilons.is_empty() {
        return Err(invalid("sweep", "lambda and epsilon lists must be nonempty"));
    }
    for &l in &sweep.lambdas {
        positive("sweep.lambdas", l)?;
    }
    for &e in &sweep.epsilons {
        nonnegative("sweep.epsilons", e)?;
    }
    if sweep.workers == Some(0) {
        return Err(invalid("sweep.workers", "must be at least 1"));
    }

    let rg = raw.geometry.unwrap_or_default();
    let geometry = GeometryConfig {
        n_dirs: rg.n_dirs.unwrap_or(crate::functional::DEFAULT_N_DIRS),
        random_dirs: rg.random_dirs.unwrap_or(0),
    };
    if geometry.n_dirs < 8 {
        return Err(invalid("geometry.n_dirs", "need at least 8 directions"));
    }

    let rtm = raw.tm_probe.unwrap_or_default();
    let tm = TmConfig {
        alphas: rtm
            .alphas
            .unwrap_or_else(|| vec![2.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI]),
        k_list: rtm.k_list.unwrap_or_else(|| vec![4.0, 16.0, 64.0, 256.0]),
        n: rtm.n,
        moment: rtm.moment,
    };
    if tm.alphas.is_empty() || tm.k_list.is_empty() {
        return Err(invalid("tm_probe", "alpha and k lists must be nonempty"));
    }
    for &a in &tm.alphas {
        positive("tm_probe.alphas", a)?;
    }
    if tm.k_list.iter().any(|&k| !(k > 1.0) || !k.is_finite()) {
        return Err(invalid("tm_probe.k_list", "Moser indices must exceed 1"));
    }
    if let Some(m) = tm.moment {
        positive("tm_probe.moment.beta", m.beta)?;
        positive("tm_probe.moment.M", m.m_norm)?;
        positive("tm_probe.moment.q", m.q)?;
    }

    let ro = raw.omega0.unwrap_or_default();
    let omega0 = Omega0Config { p: ro.p.unwrap_or(2.0), window: ro.window.unwrap_or(10.0) };
    if !(omega0.p > 1.0 && omega0.p < 3.0) {
        return Err(invalid("omega0.p", format!("must lie in (1, 3), got {}", omega0.p)));
    }
    positive("omega0.window", omega0.window)?;

    Ok(RunConfig {
        command: raw.command.unwrap_or(Command::Solve),
        grid,
        lambda,
        epsilon,
        model,
        k,
        tol,
        seed: raw.seed.unwrap_or(42),
        output_dir: raw.output_dir,
        sweep,
        geometry,
        tm_probe: tm,
        omega0,
        verify: raw.verify.unwrap_or(VerifyConfig { solution: None }),
    })
}

impl RunConfig {
    /// Builds the problem instance, computing `S_p` on the working grid when
    /// `C_p` is `"auto"`.
    pub fn build_spec(&self) -> Result<(ProblemSpec, SpResult)> {
        let grid = make_grid(self.grid.radius, self.grid.n, self.grid.r_min)?;
        let sp = compute_Sp(self.model.p, &grid)?;
        let c_p = match self.model.c_p {
            CpSetting::Fixed(v) => v,
            CpSetting::Auto(_) => self.model.cp_factor * cp_bound(self.model.p, self.model.sigma, sp.value),
        };
        let model = NonlinearityModel::new(self.model.kind, self.model.p, c_p, self.model.sigma, self.model.kappa)?;
        let KConfig { amplitude, width } = self.k;
        let k = RadialFunction::from_fn(grid, |r| amplitude * (-(r / width).powi(2)).exp())?;
        let spec = ProblemSpec::new(self.lambda, self.epsilon, k, model, self.tol)?;
        Ok((spec, sp))
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::Inconclusive(_) | Error::Geometry(_) => EXIT_NONCONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub exit_code: i32,
    pub config: RunConfig,
    pub files: Vec<ManifestEntry>,
}

/// Collects artifacts in memory and writes them with their checksums.
struct Artifacts {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| invalid("output_dir", e.to_string()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents).map_err(|e| invalid("output_dir", e.to_string()))?;
        self.files.push(ManifestEntry {
            path: name.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(mut self, config: &RunConfig, exit_code: i32) -> Result<()> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.command,
            exit_code,
            config: config.clone(),
            files: std::mem::take(&mut self.files),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text).map_err(|e| invalid("output_dir", e.to_string()))
    }
}

/// Outcome of [`run`]: exit status plus a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: String,
}

fn write_solution(out: &mut Artifacts, name: &str, spec: &ProblemSpec, sol: &Solution) -> Result<()> {
    out.write(&format!("{name}.csv"), &sol.to_csv())?;
    out.json(&format!("{name}.json"), &sol.record(spec))
}

fn write_common(out: &mut Artifacts, spec: &ProblemSpec) -> Result<()> {
    out.json("grid.json", &spec.grid.params())?;
    out.json("model.json", &spec.model)
}

/// Runs the configured command, writing artifacts to `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> RunOutcome {
    let mut out = match Artifacts::new(out_dir) {
        Ok(a) => a,
        Err(e) => return RunOutcome { exit_code: EXIT_VALIDATION, summary: e.to_string() },
    };
    let result = dispatch(config, &mut out);
    let (exit_code, summary) = match result {
        Ok((code, s)) => (code, s),
        Err(e) => {
            let code = exit_code(&e);
            let _ = out.json("error.json", &serde_json::json!({ "error": e.to_string(), "exit_code": code }));
            (code, e.to_string())
        }
    };
    if let Err(e) = out.finish(config, exit_code) {
        return RunOutcome { exit_code: EXIT_VALIDATION, summary: e.to_string() };
    }
    RunOutcome { exit_code, summary }
}

fn dispatch(config: &RunConfig, out: &mut Artifacts) -> Result<(i32, String)> {
    match config.command {
        Command::Solve => {
            let (spec, sp) = config.build_spec()?;
            write_common(out, &spec)?;
            out.json("validation.json", &validate_model(&spec.model, &sp))?;
            let geo = probe_geometry_seeded(&spec, config.geometry.n_dirs, config.geometry.random_dirs, config.seed)?;
            out.json("geometry.json", &geo.to_json())?;
            let mp = mountain_pass_from(&spec, &geo)?;
            write_solution(out, "mp", &spec, &mp)?;
            out.write("gauge.csv", &gauge_profile(&mp.u).to_csv())?;
            Ok((EXIT_OK, format!("mountain pass: energy {:.10e}, grad {:.2e}", mp.energy, mp.grad_norm)))
        }
        Command::TwoSolutions => {
            let (spec, _) = config.build_spec()?;
            write_common(out, &spec)?;
            let rep = two_solution_experiment(&spec)?;
            out.write("scan.csv", &rep.geometry.scan_csv())?;
            if let Some(mp) = &rep.mp {
                write_solution(out, "mp", &spec, mp)?;
            }
            if let Some(lm) = &rep.lm {
                write_solution(out, "lm", &spec, lm)?;
            }
            out.json("report.json", &rep.to_json())?;
            if !rep.geometry.geometry_holds {
                return Ok((EXIT_NONCONVERGENCE, "geometry failed; no solutions claimed".into()));
            }
            Ok((EXIT_OK, format!("c_eps = {:?}, c1 = {:?}", rep.c_eps(), rep.c1())))
        }
        Command::Sweep => {
            let (spec, _) = config.build_spec()?;
            write_common(out, &spec)?;
            let table = parameter_sweep(&spec, &config.sweep.lambdas, &config.sweep.epsilons, config.sweep.workers)?;
            out.write("sweep.csv", &table.to_csv())?;
            out.json("sweep.json", &table)?;
            Ok((EXIT_OK, format!("{} sweep rows", table.rows.len())))
        }
        Command::Geometry => {
            let (spec, _) = config.build_spec()?;
            write_common(out, &spec)?;
            let geo = probe_geometry_seeded(&spec, config.geometry.n_dirs, config.geometry.random_dirs, config.seed)?;
            out.json("geometry.json", &geo.to_json())?;
            out.write("scan.csv", &geo.scan_csv())?;
            let code = if geo.geometry_holds { EXIT_OK } else { EXIT_NONCONVERGENCE };
            Ok((code, format!("geometry holds: {}, rho = {:.4e}, d = {:.4e}", geo.geometry_holds, geo.rho, geo.d)))
        }
        Command::Sp => {
            let (spec, sp) = config.build_spec()?;
            write_common(out, &spec)?;
            let report = validate_model(&spec.model, &sp);
            out.json(
                "sp.json",
                &serde_json::json!({
                    "p": config.model.p,
                    "S_p": sp.value,
                    "grad_norm": sp.grad_norm,
                    "iterations": sp.rayleigh_history.len(),
                    "required_C_p": report.required_cp,
                }),
            )?;
            out.write("sp_minimizer.csv", &sp.minimizer.to_csv())?;
            out.json("validation.json", &report)?;
            Ok((EXIT_OK, format!("S_{} = {:.12}", config.model.p, sp.value)))
        }
        Command::TmProbe => {
            let family = match config.tm_probe.n {
                Some(n) => MoserFamily::new(&config.tm_probe.k_list, n)?,
                None => MoserFamily::standard(&config.tm_probe.k_list)?,
            };
            let mut reports = Vec::new();
            for (i, &alpha) in config.tm_probe.alphas.iter().enumerate() {
                let rep = tm_probe(alpha, &family)?;
                out.write(&format!("tm_probe_{i}.csv"), &rep.to_csv())?;
                reports.push(rep);
            }
            let moment = match config.tm_probe.moment {
                Some(m) => Some(moment_bound_check(m.beta, m.m_norm, m.q, &family)?),
                None => None,
            };
            out.json("tm_probe.json", &serde_json::json!({ "probes": reports, "moment": moment }))?;
            let verdicts: Vec<String> = reports
                .iter()
                .map(|r| format!("alpha={:.4}: {:?}", r.alpha, r.verdict))
                .collect();
            Ok((EXIT_OK, verdicts.join("; ")))
        }
        Command::Omega0 => {
            let rep = omega0_threshold(config.omega0.p, config.omega0.window)?;
            out.json("omega0.json", &rep)?;
            Ok((EXIT_OK, format!("rules agree: {}, divergent: {}", rep.rules_agree, rep.divergent)))
        }
        Command::Verify => {
            let prefix = config
                .verify
                .solution
                .as_ref()
                .ok_or_else(|| invalid("verify.solution", "path prefix of the stored solution is required"))?;
            let read = |ext: &str| -> Result<String> {
                let path = prefix.with_extension(ext);
                fs::read_to_string(&path).map_err(|e| invalid("verify.solution", format!("{}: {e}", path.display())))
            };
            let record: SolutionRecord = serde_json::from_str(&read("json")?)
                .map_err(|e| invalid("verify.solution", format!("bad sidecar: {e}")))?;
            let (spec, _) = config.build_spec()?;
            let u = RadialFunction::from_csv(spec.grid.clone(), &read("csv")?)?;
            let report = verify_solution(&spec, &u, &record)?;
            out.json("verify.json", &report)?;
            let code = if report.passed { EXIT_OK } else { EXIT_NONCONVERGENCE };
            Ok((code, format!("verification passed: {}", report.passed)))
        }
    }
}
