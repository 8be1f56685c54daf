//! Subcommand implementations and the machine-readable report.
//!
//! Exit codes: 0 success / completely positive, 2 non-positivity certified
//! (or conversion refused for that reason), 1 usage or configuration error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::{matrix_json, vector_json, ConfigError, ProblemConfig, ScanVectors};
use crate::dynamics::{
    evolution_map, evolve_superoperator, is_completely_positive_with_tol, tensor_extension, CPVerdict,
    DensityMatrix, DynamicsError, DEFAULT_CP_TIMES,
};
use crate::generator::{gks_to_lindblad_with_tol, lindblad_to_gks, GKSGenerator, GeneratorError, LindbladGenerator};
use crate::linalg::{
    self, c, coefficients_to_vector, hermitian_deviation, similarity_to_transpose, trace, ComplexMatrix,
    ComplexVector, C64, POSITIVITY_TOL,
};
use crate::witness::{
    construct_witness_with_tol, default_grid, linear_grid, log_grid, negativity_scan_with_tol, singlet_phi,
    NegativityScan, WitnessCandidate, WitnessError, WitnessOutcome,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_POSITIVE: i32 = 2;

/// Environment variable overriding the default relative tolerance.
pub const TOL_ENV: &str = "CPLAB_TOL";

const ROUNDTRIP_SAMPLES: usize = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// d = 2, singlet initial state, coefficients from the config.
    MesonD2,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "meson-d2" => Ok(Preset::MesonD2),
            other => Err(format!("unknown preset `{other}` (available: meson-d2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Matrix(ComplexMatrix),
    /// The `|ψ⟩` of the constructed witness.
    Witness,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub env_tol: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<Vec<f64>>,
    pub preset: Option<Preset>,
    pub explicit_w: Option<ComplexMatrix>,
    pub state: Option<StateSource>,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub direction: Vec<[f64; 2]>,
    pub value: f64,
    pub quadratic_form: f64,
    pub w_matrix: Vec<Vec<[f64; 2]>>,
    pub phi_matrix: Vec<Vec<[f64; 2]>>,
    pub psi_dagger: Vec<Vec<[f64; 2]>>,
    pub phi: Vec<[f64; 2]>,
    pub psi: Vec<[f64; 2]>,
    /// `+1` for `Ψ†Φ = Wᵀ`, `−1` for `Ψ†Φ = −Wᵀ`.
    pub transpose_sign: Option<f64>,
}

impl WitnessSummary {
    fn new(w: &WitnessCandidate) -> Self {
        Self {
            direction: vector_json(&w.direction),
            value: w.value,
            quadratic_form: w.quadratic_form,
            w_matrix: matrix_json(&w.w_matrix),
            phi_matrix: matrix_json(&w.phi_matrix),
            psi_dagger: matrix_json(&w.psi_matrix.adjoint()),
            phi: vector_json(&w.phi),
            psi: vector_json(&w.psi),
            transpose_sign: w.transpose_sign(1e-8 * linalg::scale(&w.w_matrix)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoDirection {
    pub min_c_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConversionSummary {
    pub from: &'static str,
    pub to: &'static str,
    pub refused: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Config-compatible document for the converted generator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Value>,
    /// Max `‖L₁[ρ] − L₂[ρ]‖_F` over seeded random `ρ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roundtrip_max_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionSummary {
    pub time: f64,
    pub tensor_extended: bool,
    pub state: Vec<Vec<[f64; 2]>>,
    pub trace: [f64; 2],
    pub hermiticity_deviation: f64,
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanInput {
    pub source: &'static str,
    pub psi: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<&'static str>,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<CPVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_negative_direction: Option<NoDirection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<WitnessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_input: Option<ScanInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<NegativityScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conversion: Option<ConversionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSummary>,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: AnalysisReport,
    pub exit_code: i32,
}

impl CommandOutput {
    pub fn render(&self) -> String {
        render(&self.report)
    }
}

pub fn render(report: &AnalysisReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report values are finite");
    s.push('\n');
    s
}

/// Parses `start:stop:points[:log|:lin]`; spacing defaults to log.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |msg: &str| CliError::Usage(format!("--grid `{spec}`: {msg}"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad("expected start:stop:points[:log|lin]"));
    }
    let start: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("stop is not a number"))?;
    let points: usize = parts[2].parse().map_err(|_| bad("points is not a positive integer"))?;
    if points == 0 {
        return Err(bad("points must be positive"));
    }
    if !(start.is_finite() && stop.is_finite()) || start < 0.0 || (points > 1 && stop <= start) {
        return Err(bad("need 0 <= start < stop"));
    }
    match parts.get(3).copied().unwrap_or("log") {
        "log" if start > 0.0 => Ok(log_grid(start, stop, points)),
        "log" => Err(bad("log spacing needs start > 0")),
        "lin" => Ok(linear_grid(start, stop, points)),
        other => Err(bad(&format!("unknown spacing `{other}`"))),
    }
}

/// Reads `CPLAB_TOL`, ignoring it when unset.
pub fn env_tolerance() -> Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(Some(x)),
            _ => Err(CliError::Usage(format!("{TOL_ENV}=`{s}` is not a positive number"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn load_config(text: &str, preset: Option<Preset>) -> Result<ProblemConfig> {
    let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let forced = preset.map(|Preset::MesonD2| 2);
    Ok(ProblemConfig::from_value(raw, forced)?)
}

struct Context<'a> {
    cfg: &'a ProblemConfig,
    opts: &'a RunOptions,
    tol: f64,
    seed: u64,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ProblemConfig, opts: &'a RunOptions) -> Self {
        // flag > config > environment > default
        let tol = opts.tol.or(cfg.tolerance).or(opts.env_tol).unwrap_or(POSITIVITY_TOL);
        let seed = opts.seed.unwrap_or(cfg.seed);
        Self { cfg, opts, tol, seed }
    }

    fn report(&self, command: &'static str) -> AnalysisReport {
        AnalysisReport {
            tool: "cplab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            tolerance: self.tol,
            preset: self.opts.preset.map(|Preset::MesonD2| "meson-d2"),
            config: self.cfg.raw.clone(),
            verdict: None,
            witness: None,
            no_negative_direction: None,
            fixture: None,
            scan_input: None,
            scan: None,
            conversion: None,
            evolution: None,
        }
    }

    fn cp_times(&self) -> Vec<f64> {
        self.cfg.cp_times.clone().unwrap_or_else(|| DEFAULT_CP_TIMES.to_vec())
    }

    fn grid(&self) -> Vec<f64> {
        self.opts.grid.clone().or_else(|| self.cfg.time_grid.clone()).unwrap_or_else(default_grid)
    }

    fn verdict(&self, g: &GKSGenerator) -> Result<CPVerdict> {
        Ok(is_completely_positive_with_tol(g, &self.cp_times(), self.tol)?)
    }

    /// Witness for the configured generator. The meson preset pins `Φ` to the singlet.
    fn witness(&self, g: &GKSGenerator) -> Result<WitnessOutcome> {
        let outcome = construct_witness_with_tol(g, self.tol)?;
        match (self.opts.preset, outcome) {
            (Some(Preset::MesonD2), WitnessOutcome::Found(w)) => {
                let singlet = WitnessCandidate::from_parts(g, w.w_matrix.clone(), singlet_phi())?;
                Ok(WitnessOutcome::Found(Box::new(singlet)))
            }
            (_, outcome) => Ok(outcome),
        }
    }
}

fn attach_witness(report: &mut AnalysisReport, outcome: &WitnessOutcome) {
    match outcome {
        WitnessOutcome::Found(w) => report.witness = Some(WitnessSummary::new(w)),
        WitnessOutcome::NoNegativeDirection { min_c_eigenvalue } => {
            report.no_negative_direction = Some(NoDirection { min_c_eigenvalue: *min_c_eigenvalue })
        }
    }
}

pub fn cmd_check_cp(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let ctx = Context::new(cfg, opts);
    let g = cfg.gks_generator()?;
    let verdict = ctx.verdict(&g)?;
    let mut report = ctx.report("check-cp");
    let exit_code = if verdict.is_cp {
        EXIT_OK
    } else {
        attach_witness(&mut report, &ctx.witness(&g)?);
        EXIT_NOT_POSITIVE
    };
    report.verdict = Some(verdict);
    Ok(CommandOutput { report, exit_code })
}

/// `|Ω⟩ = Σ_i |ii⟩/√d` and the antisymmetric `(|01⟩ − |10⟩)/√2`, which are orthogonal.
fn fallback_scan_vectors(d: usize) -> (ComplexVector, ComplexVector) {
    let mut omega = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        omega[(i, i)] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    let mut singlet = ComplexMatrix::zeros(d, d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    singlet[(0, 1)] = c(h, 0.0);
    singlet[(1, 0)] = c(-h, 0.0);
    (coefficients_to_vector(&omega), coefficients_to_vector(&singlet))
}

fn scan_vectors(ctx: &Context, outcome: &WitnessOutcome) -> (&'static str, ComplexVector, ComplexVector) {
    if let Some(ScanVectors { psi, phi }) = &ctx.cfg.scan_vectors {
        return ("config", psi.clone(), phi.clone());
    }
    if let Some(w) = outcome.candidate() {
        return ("witness", w.psi.clone(), w.phi.clone());
    }
    let (psi, phi) = fallback_scan_vectors(ctx.cfg.dim);
    match ctx.opts.preset {
        Some(Preset::MesonD2) => {
            // singlet as the initial state, symmetric triplet as the probe
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let triplet = ComplexVector::from_vec(vec![c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]);
            ("preset", phi, triplet)
        }
        None => ("maximally-entangled", psi, phi),
    }
}

fn run_scan(ctx: &Context, g: &GKSGenerator, outcome: &WitnessOutcome, report: &mut AnalysisReport) -> Result<NegativityScan> {
    let (source, psi, phi) = scan_vectors(ctx, outcome);
    let scan = negativity_scan_with_tol(g, &psi, &phi, &ctx.grid(), ctx.tol)?;
    report.scan_input = Some(ScanInput { source, psi: vector_json(&psi), phi: vector_json(&phi) });
    Ok(scan)
}

pub fn cmd_witness(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let ctx = Context::new(cfg, opts);
    let g = cfg.gks_generator()?;
    let verdict = ctx.verdict(&g)?;
    let outcome = ctx.witness(&g)?;
    let mut report = ctx.report("witness");
    attach_witness(&mut report, &outcome);

    if let Some(w) = &opts.explicit_w {
        if w.shape() != (cfg.dim, cfg.dim) {
            return Err(CliError::Usage(format!("--explicit-w must be {0}x{0}", cfg.dim)));
        }
        let phi = if cfg.dim == 2 { singlet_phi() } else { similarity_to_transpose(w).map_err(WitnessError::from)? };
        let fixture = WitnessCandidate::from_parts(&g, w.clone(), phi)?;
        report.fixture = Some(WitnessSummary::new(&fixture));
    }

    let scan = run_scan(&ctx, &g, &outcome, &mut report)?;
    let exit_code = if outcome.candidate().is_some() || scan.first_negative_time.is_some() {
        EXIT_NOT_POSITIVE
    } else {
        EXIT_OK
    };
    report.verdict = Some(verdict);
    report.scan = Some(scan);
    Ok(CommandOutput { report, exit_code })
}

pub fn cmd_scan(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let ctx = Context::new(cfg, opts);
    let g = cfg.gks_generator()?;
    let outcome = ctx.witness(&g)?;
    let mut report = ctx.report("scan");
    let scan = run_scan(&ctx, &g, &outcome, &mut report)?;
    let exit_code = if scan.first_negative_time.is_some() { EXIT_NOT_POSITIVE } else { EXIT_OK };
    report.scan = Some(scan);
    Ok(CommandOutput { report, exit_code })
}

fn generator_document(dim: usize, key: &str, body: Value) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("dim".into(), Value::from(dim));
    doc.insert(key.into(), body);
    Value::Object(doc)
}

fn max_action_deviation(
    dim: usize,
    seed: u64,
    a: impl Fn(&ComplexMatrix) -> std::result::Result<ComplexMatrix, GeneratorError>,
    b: impl Fn(&ComplexMatrix) -> std::result::Result<ComplexMatrix, GeneratorError>,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..ROUNDTRIP_SAMPLES {
        let rho = DensityMatrix::from_pure(&linalg::random_unit_vector(&mut rng, dim))?.into_matrix();
        worst = worst.max((a(&rho)? - b(&rho)?).norm());
    }
    Ok(worst)
}

pub fn cmd_convert(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let ctx = Context::new(cfg, opts);
    let mut report = ctx.report("convert");
    let d = cfg.dim;
    if let Some(l) = cfg.lindblad_generator()? {
        let g = lindblad_to_gks(&l, &cfg.basis_for_conversion()?)?;
        let deviation = max_action_deviation(d, ctx.seed, |r| l.apply(r), |r| g.apply(r))?;
        let body = serde_json::json!({
            "hamiltonian": matrix_json(g.hamiltonian()),
            "coeff": matrix_json(g.coeff()),
            "basis": g.basis().elements().iter().map(matrix_json).collect::<Vec<_>>(),
        });
        report.conversion = Some(ConversionSummary {
            from: "lindblad",
            to: "gks",
            refused: false,
            reason: None,
            generator: Some(generator_document(d, "gks", body)),
            roundtrip_max_deviation: Some(deviation),
        });
        return Ok(CommandOutput { report, exit_code: EXIT_OK });
    }

    let g = cfg.gks_generator()?;
    match gks_to_lindblad_with_tol(&g, ctx.tol) {
        Ok(l) => {
            let deviation = max_action_deviation(d, ctx.seed, |r| g.apply(r), |r| l.apply(r))?;
            let body = serde_json::json!({
                "hamiltonian": matrix_json(l.hamiltonian()),
                "jump_operators": l.jump_ops().iter().map(matrix_json).collect::<Vec<_>>(),
            });
            report.conversion = Some(ConversionSummary {
                from: "gks",
                to: "lindblad",
                refused: false,
                reason: None,
                generator: Some(generator_document(d, "lindblad", body)),
                roundtrip_max_deviation: Some(deviation),
            });
            Ok(CommandOutput { report, exit_code: EXIT_OK })
        }
        Err(e @ GeneratorError::NotCompletelyPositive { .. }) => {
            report.conversion = Some(ConversionSummary {
                from: "gks",
                to: "lindblad",
                refused: true,
                reason: Some(e.to_string()),
                generator: None,
                roundtrip_max_deviation: None,
            });
            Ok(CommandOutput { report, exit_code: EXIT_NOT_POSITIVE })
        }
        Err(e) => Err(e.into()),
    }
}

fn singlet_state() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    linalg::outer(&ComplexVector::from_vec(vec![c(0., 0.), c(h, 0.), c(-h, 0.), c(0., 0.)]))
}

pub fn cmd_evolve(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let ctx = Context::new(cfg, opts);
    let g = cfg.gks_generator()?;
    let d = cfg.dim;
    let t = opts.time.or(cfg.time).ok_or_else(|| CliError::Usage("evolve needs --time or a `time` field".into()))?;

    let state = match (&opts.state, &cfg.state, opts.preset) {
        (Some(StateSource::Matrix(m)), _, _) => m.clone(),
        (Some(StateSource::Witness), _, _) => match ctx.witness(&g)? {
            WitnessOutcome::Found(w) => linalg::outer(&w.normalized_psi()),
            WitnessOutcome::NoNegativeDirection { .. } => {
                return Err(CliError::Usage("no witness state: the coefficient matrix is positive semidefinite".into()))
            }
        },
        (None, Some(m), _) => m.clone(),
        (None, None, Some(Preset::MesonD2)) => singlet_state(),
        (None, None, None) => return Err(CliError::Usage("evolve needs --state or a `state` field".into())),
    };
    let rho = DensityMatrix::new(state)?;
    let n = rho.dim();
    let map = if n == d {
        evolution_map(&g, t)?
    } else if n == d * d {
        evolve_superoperator(&tensor_extension(&g), t)?
    } else {
        return Err(DynamicsError::DimensionMismatch { expected: d, found: n }.into());
    };
    let out = map.apply(rho.matrix())?;
    let eigenvalues = linalg::eigenvalues(&linalg::hermitian_part(&out)).map_err(DynamicsError::from)?;
    let min_eigenvalue = eigenvalues[0];
    let positive = min_eigenvalue >= -ctx.tol * linalg::scale(&out);
    let tr: C64 = trace(&out);
    let mut report = ctx.report("evolve");
    report.evolution = Some(EvolutionSummary {
        time: t,
        tensor_extended: n != d,
        state: matrix_json(&out),
        trace: [tr.re, tr.im],
        hermiticity_deviation: hermitian_deviation(&out),
        eigenvalues,
        min_eigenvalue,
        positive,
    });
    Ok(CommandOutput { report, exit_code: if positive { EXIT_OK } else { EXIT_NOT_POSITIVE } })
}

/// Converts a Lindblad generator into config-ready JSON; used by callers that
/// assemble configs programmatically.
pub fn lindblad_json(l: &LindbladGenerator) -> Value {
    generator_document(
        l.dim(),
        "lindblad",
        serde_json::json!({
            "hamiltonian": matrix_json(l.hamiltonian()),
            "jump_operators": l.jump_ops().iter().map(matrix_json).collect::<Vec<_>>(),
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckCp,
    Witness,
    Convert,
    Evolve,
    Scan,
}

pub fn run(command: Command, cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput> {
    match command {
        Command::CheckCp => cmd_check_cp(cfg, opts),
        Command::Witness => cmd_witness(cfg, opts),
        Command::Convert => cmd_convert(cfg, opts),
        Command::Evolve => cmd_evolve(cfg, opts),
        Command::Scan => cmd_scan(cfg, opts),
    }
}
