//! One function per subcommand. Each validates, computes, then writes the
//! CSV and its `.meta.json` sidecar.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use decosim::analysis::{self, BoseHubbardRecipe, CriticalScanResult, FitOptions, IsingRecipe};
use decosim::bose_hubbard::{self, BoseHubbardParams};
use decosim::decoherence::{self, DecoherenceSeries, TimeGrid};
use decosim::oracle;
use decosim::spectrum::{self, IsingParams, MomentumConvention};
use decosim::Error;

use crate::output::{ldos_path, write_metadata, Csv};
use crate::{BoseHubbardArgs, EchoArgs, IsingArgs, Model, OracleArgs, ScanArgs, Window};

pub const EXIT_TOLERANCE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Default window ends where the Gaussian envelope reaches this level.
const WINDOW_LEVEL: f64 = 1e-4;
const MIN_DEFAULT_STEPS: usize = 2001;
const ORACLE_MIN_LAMBDA0: f64 = 0.1;
const ORACLE_ANTIPERIODIC_BOUND: f64 = 1e-8;
const LDOS_HISTOGRAM_BINS: usize = 50;

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
    Tolerance(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Tolerance(_) => EXIT_TOLERANCE,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Numerical(m) | Failure::Tolerance(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("cannot write output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    eprintln!("warning: {msg}");
    warnings.push(msg);
}

/// Grid from the flags, falling back to `default_t_max` and to the finest of
/// [`MIN_DEFAULT_STEPS`] and the resolution bound for `max_energy`.
/// `time_scale` converts grid time into the time the phases advance by.
fn build_grid(
    window: &Window,
    default_t_max: f64,
    max_energy: f64,
    time_scale: f64,
    warnings: &mut Vec<String>,
) -> Result<TimeGrid, Failure> {
    let t_max = window.t_max.unwrap_or(default_t_max);
    let dt_needed = TimeGrid::max_resolving_dt(max_energy) / time_scale;
    let steps = match window.steps {
        Some(s) => s,
        None if max_energy > 0.0 && t_max.is_finite() => {
            let needed = (t_max / dt_needed).ceil() + 1.0;
            if needed > 1e8 {
                return Err(invalid(format!(
                    "t-max {t_max} needs more than 1e8 grid points; pass --steps"
                )));
            }
            (needed as usize).max(MIN_DEFAULT_STEPS)
        }
        None => MIN_DEFAULT_STEPS,
    };
    let grid = TimeGrid::from_zero(t_max, steps)?;
    if max_energy > 0.0 && grid.dt() > dt_needed {
        warn(
            warnings,
            format!(
                "time step {:.3e} is coarser than {:.3e}, the fastest oscillation is not resolved",
                grid.dt(),
                dt_needed
            ),
        );
    }
    Ok(grid)
}

fn grid_json(grid: &TimeGrid) -> Value {
    json!({ "t_start": grid.t_start, "t_end": grid.t_end, "n_points": grid.n_points, "dt": grid.dt() })
}

fn ising_params(spins: usize, j: f64, l0: f64, l1: f64, conv: MomentumConvention) -> Result<IsingParams, Failure> {
    Ok(IsingParams::new(spins, l0, l1)?.with_coupling(j)?.with_convention(conv))
}

fn spectrum_json(s: &spectrum::BogoliubovSpectrum) -> Value {
    let env = decoherence::cumulative_variance(s);
    json!({
        "variance_s2": env.variance,
        "mean_energy": env.mean_energy,
        "n_modes": env.n_modes,
        "excluded_momenta": s.excluded,
        "max_energy": s.max_energy(),
        "lindenberg": decoherence::lindenberg_check(s),
    })
}

fn fit_json(fit: &decosim::Result<analysis::GaussianFit>) -> Value {
    match fit {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn ising(a: IsingArgs) -> Outcome {
    let started = Instant::now();
    let mut warnings = Vec::new();
    let c = &a.chain;
    let params = ising_params(c.spins, c.j, c.lambda0, a.lambda1, c.convention.into())?;
    let s = spectrum::build_spectrum(&params)?;
    let env = decoherence::cumulative_variance(&s);
    let default_t = env.decay_time(WINDOW_LEVEL).unwrap_or(4.0);
    let grid = build_grid(&a.window, default_t, s.max_energy(), 1.0, &mut warnings)?;
    let series = decoherence::decoherence_series(&s, grid, a.envelope);

    let mut header = vec!["t", "re_r", "im_r", "abs2"];
    if a.envelope {
        header.push("envelope");
    }
    let mut csv = Csv::new(&header);
    for (i, r) in series.r.iter().enumerate() {
        let mut row = vec![Some(grid.time(i)), Some(r.re), Some(r.im), Some(series.abs2[i])];
        if let Some(e) = &series.envelope {
            row.push(Some(e[i]));
        }
        csv.row(&row);
    }
    csv.write(&a.out)?;
    write_metadata(
        &a.out,
        "ising",
        json!({
            "spins": c.spins, "j": c.j, "lambda0": c.lambda0, "lambda1": a.lambda1,
            "convention": params.convention.to_string(), "envelope": a.envelope, "grid": grid_json(&grid),
        }),
        spectrum_json(&s),
        &warnings,
        started,
    )?;
    Ok(())
}

pub fn ising_echo(a: EchoArgs) -> Outcome {
    let started = Instant::now();
    let mut warnings = Vec::new();
    let c = &a.chain;
    let params = ising_params(c.spins, c.j, c.lambda0, a.lambda1, c.convention.into())?;
    let s = spectrum::build_spectrum(&params)?;
    let echo = spectrum::build_echo_spectrum(&params)?;
    let env = decoherence::cumulative_variance(&s);
    // the echo Gaussian is exp(−4s̃²t²) in segment time t, i.e. exp(−s̃²T²) in total time T = 2t
    let default_t = env.decay_time(WINDOW_LEVEL).unwrap_or(4.0);
    let fastest = echo
        .modes
        .iter()
        .map(|m| m.epsilon_plus.abs().max(m.epsilon_minus.abs()))
        .fold(0.0, f64::max);
    let total = build_grid(&a.window, default_t, fastest, 0.5, &mut warnings)?;
    let segment = TimeGrid::new(total.t_start / 2.0, total.t_end / 2.0, total.n_points)?;
    let series = decoherence::echo_series(&echo, segment);

    let approx_ok = a.approx && a.lambda1 != 0.0;
    if a.approx && !approx_ok {
        warn(
            &mut warnings,
            "the large-field approximation is undefined at lambda1 = 0; approx column left empty".into(),
        );
    }
    let mut header = vec!["t_total", "re_r", "im_r", "abs2"];
    if a.approx {
        header.push("approx");
    }
    let mut csv = Csv::new(&header);
    for (i, r) in series.r.iter().enumerate() {
        let mut row = vec![Some(total.time(i)), Some(r.re), Some(r.im), Some(series.abs2[i])];
        if a.approx {
            let value = if approx_ok {
                Some(decoherence::echo_approximation(&s, &echo, segment.time(i))?)
            } else {
                None
            };
            row.push(value);
        }
        csv.row(&row);
    }
    csv.write(&a.out)?;

    let approx_residual = approx_ok.then(|| {
        let approx: Vec<f64> = (0..segment.n_points)
            .map(|i| decoherence::echo_approximation(&s, &echo, segment.time(i)).unwrap_or(f64::NAN))
            .collect();
        analysis::oscillation_residual(&series.abs2, &approx, WINDOW_LEVEL)
    });
    let mut derived = spectrum_json(&s);
    derived["echo_variance"] = json!(4.0 * env.variance);
    derived["approx_rms_log_residual"] = json!(approx_residual.flatten());
    write_metadata(
        &a.out,
        "ising-echo",
        json!({
            "spins": c.spins, "j": c.j, "lambda0": c.lambda0, "lambda1": a.lambda1,
            "convention": params.convention.to_string(), "approx": a.approx,
            "grid_total_time": grid_json(&total),
        }),
        derived,
        &warnings,
        started,
    )?;
    Ok(())
}

fn max_dim() -> Result<usize, Failure> {
    match std::env::var("DECOSIM_MAX_DIM") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| invalid(format!("DECOSIM_MAX_DIM must be a positive integer, got `{v}`"))),
        Err(_) => Ok(bose_hubbard::DEFAULT_MAX_DIM),
    }
}

fn bose_hubbard_params(
    sites: usize,
    bosons: usize,
    u: f64,
    boundary: crate::BoundaryArg,
) -> Result<BoseHubbardParams, Failure> {
    Ok(BoseHubbardParams::new(sites, bosons, 0.0, u)?
        .with_boundary(boundary.into())
        .with_max_dim(max_dim()?)
        .validated()?)
}

fn default_bh_window(u: f64) -> f64 {
    if u > 0.0 {
        3.0 / u
    } else {
        3.0
    }
}

pub fn bose_hubbard(a: BoseHubbardArgs) -> Outcome {
    let started = Instant::now();
    let mut warnings = Vec::new();
    let l = &a.lattice;
    let params = bose_hubbard_params(l.sites, l.bosons, l.u, l.boundary)?;
    let q = bose_hubbard::quench(&params, l.lambda0, a.lambda1)?;
    if let Some(e) = q.ground.degeneracy() {
        warn(
            &mut warnings,
            format!("initial state is not unique ({e}); using the solver's choice"),
        );
    }
    let d = &q.decomposition;
    let e_min = d.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = d.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = build_grid(&a.window, default_bh_window(l.u), e_max - e_min, 1.0, &mut warnings)?;
    let series = decoherence::survival_from_spectrum(d, grid)?;
    write_series(&series, &a.out)?;

    let mut ldos = Csv::new(&["E", "weight"]);
    for (e, w) in d.energies.iter().zip(&d.weights) {
        ldos.row(&[Some(*e), Some(*w)]);
    }
    ldos.write(&ldos_path(&a.out))?;

    let (mean, variance) = analysis::ldos_moments(d)?;
    let fit = analysis::fit_peak_envelope(&series, &FitOptions::default());
    write_metadata(
        &a.out,
        "bose-hubbard",
        json!({
            "sites": l.sites, "bosons": l.bosons, "u": l.u, "lambda0": l.lambda0, "lambda1": a.lambda1,
            "boundary": params.boundary.to_string(), "max_dim": params.max_dim, "grid": grid_json(&grid),
        }),
        json!({
            "dimension": q.basis.len(),
            "ldos_mean": mean,
            "ldos_variance": variance,
            "ldos_histogram": analysis::ldos_histogram(d, LDOS_HISTOGRAM_BINS)?,
            "ground_energy": q.ground.energy,
            "ground_gap": q.ground.gap,
            "eigen_residual": q.residual,
            "fit": fit_json(&fit),
        }),
        &warnings,
        started,
    )?;
    Ok(())
}

fn write_series(series: &DecoherenceSeries, out: &Path) -> std::io::Result<()> {
    let mut csv = Csv::new(&["t", "re_r", "im_r", "abs2"]);
    for (i, r) in series.r.iter().enumerate() {
        csv.row(&[Some(series.grid.time(i)), Some(r.re), Some(r.im), Some(series.abs2[i])]);
    }
    csv.write(out)
}

fn scan_lambdas(a: &ScanArgs) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = (a.lambda_min, a.lambda_max, a.lambda_steps);
    if n < analysis::MIN_SCAN_POINTS {
        return Err(invalid(format!(
            "a scan needs at least {} coupling values, got {n}",
            analysis::MIN_SCAN_POINTS
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(invalid(format!("need lambda-min < lambda-max, got [{lo}, {hi}]")));
    }
    if a.log && lo <= 0.0 {
        return Err(invalid("a logarithmic grid needs lambda-min > 0"));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ if a.log => lo * (hi / lo).powf(step(i)),
            _ => lo + (hi - lo) * step(i),
        })
        .collect())
}

pub fn scan(a: ScanArgs) -> Outcome {
    let started = Instant::now();
    let mut warnings = Vec::new();
    let lambdas = scan_lambdas(&a)?;
    let l_max = lambdas.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let (result, parameters): (CriticalScanResult, Value) = match a.model {
        Model::Ising => {
            let convention: MomentumConvention = a.convention.into();
            let fastest =
                spectrum::build_spectrum(&ising_params(a.spins, a.j, a.lambda0, l_max, convention)?)?.max_energy();
            let window = Window {
                t_max: a.window.t_max.or(Some(10.0)),
                steps: a.window.steps.or(Some(20001)),
            };
            let grid = build_grid(&window, 10.0, fastest, 1.0, &mut warnings)?;
            let recipe = IsingRecipe {
                coupling: a.j,
                lambda0: a.lambda0,
                convention,
                ..IsingRecipe::new(a.spins)
            };
            let result = analysis::critical_scan(&recipe, &lambdas, grid, a.probe_time)?;
            let p = json!({
                "model": "ising", "spins": a.spins, "j": a.j, "lambda0": a.lambda0,
                "convention": convention.to_string(), "grid": grid_json(&grid),
            });
            (result, p)
        }
        Model::BoseHubbard => {
            let params = bose_hubbard_params(a.sites, a.bosons, a.u, a.boundary)?;
            let basis = bose_hubbard::enumerate_basis(params.n_sites, params.n_bosons, params.max_dim)?;
            let fastest = bose_hubbard::build_hamiltonian(&params.with_hopping(l_max)?, &basis)?.norm_bound();
            let grid = build_grid(&a.window, default_bh_window(a.u), 2.0 * fastest, 1.0, &mut warnings)?;
            let recipe = BoseHubbardRecipe {
                lambda0: a.lambda0,
                ..BoseHubbardRecipe::new(params)
            };
            let result = analysis::critical_scan(&recipe, &lambdas, grid, a.probe_time)?;
            let p = json!({
                "model": "bose-hubbard", "sites": a.sites, "bosons": a.bosons, "u": a.u,
                "lambda0": a.lambda0, "boundary": params.boundary.to_string(), "max_dim": params.max_dim,
                "grid": grid_json(&grid),
            });
            (result, p)
        }
    };
    for (l, msg) in &result.failures {
        warn(&mut warnings, format!("no width at lambda = {l}: {msg}"));
    }
    if result.low_confidence {
        warn(
            &mut warnings,
            "steepest width rise lies at the edge of the grid or most fits failed; lambda_c estimate is unreliable"
                .into(),
        );
    }

    let mut csv = Csv::new(&["lambda", "width2", "probe_abs2"]);
    for ((l, w), p) in result.lambdas.iter().zip(&result.widths).zip(&result.probe_decay) {
        csv.row(&[Some(*l), *w, *p]);
    }
    csv.write(&a.out)?;
    let mut parameters = parameters;
    parameters["lambda_min"] = json!(a.lambda_min);
    parameters["lambda_max"] = json!(a.lambda_max);
    parameters["lambda_steps"] = json!(a.lambda_steps);
    parameters["log"] = json!(a.log);
    parameters["probe_time"] = json!(a.probe_time);
    write_metadata(
        &a.out,
        "scan",
        parameters,
        json!({
            "lambda_c_estimate": result.lambda_c_estimate,
            "low_confidence": result.low_confidence,
            "probe_min_lambda": result.probe_min_lambda,
            "failures": result.failures,
        }),
        &warnings,
        started,
    )?;
    eprintln!("lambda_c estimate: {}", result.lambda_c_estimate);
    Ok(())
}

/// Accepted `max |r_product − r_oracle|` for the momentum convention used.
///
/// The antiperiodic set is exact for the even-parity ground state, so only
/// rounding remains. The periodic set misses one or two modes, an O(1)
/// error at small `N` that fades like `1/√N`; the constant 6 covers every
/// `N ≤ 12`, `λ ∈ [0.1, 40]` combination checked.
pub fn oracle_bound(convention: MomentumConvention, spins: usize) -> f64 {
    match convention {
        MomentumConvention::Antiperiodic => ORACLE_ANTIPERIODIC_BOUND,
        MomentumConvention::Paper => 6.0 / (spins as f64).sqrt(),
    }
}

fn max_deviation(a: &DecoherenceSeries, b: &DecoherenceSeries) -> f64 {
    a.r.iter().zip(&b.r).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn oracle_check(a: OracleArgs) -> Outcome {
    let started = Instant::now();
    if a.spins > oracle::MAX_SPINS {
        return Err(invalid(format!(
            "oracle-check supports at most {} spins, got {}",
            oracle::MAX_SPINS,
            a.spins
        )));
    }
    if a.lambda0.is_nan() || a.lambda0 < ORACLE_MIN_LAMBDA0 {
        return Err(invalid(format!(
            "lambda0 = {} is below {ORACLE_MIN_LAMBDA0}: the spin-chain ground state is (nearly) degenerate \
             between parity sectors and the reference evolution is ill-defined",
            a.lambda0
        )));
    }
    let convention: MomentumConvention = a.convention.into();
    let params = ising_params(a.spins, a.j, a.lambda0, a.lambda1, convention)?;
    let grid = TimeGrid::from_zero(a.t_max, a.steps)?;

    let s = spectrum::build_spectrum(&params)?;
    let echo = spectrum::build_echo_spectrum(&params)?;
    let product = decoherence::decoherence_series(&s, grid, false);
    let product_echo = decoherence::echo_series(&echo, grid);
    let exact = oracle::oracle_survival(a.spins, a.j, a.lambda0, a.lambda1, grid)?;
    let exact_echo = oracle::oracle_echo(a.spins, a.j, a.lambda0, a.lambda1, grid)?;

    let survival_dev = max_deviation(&product, &exact);
    let echo_dev = max_deviation(&product_echo, &exact_echo);
    let bound = oracle_bound(convention, a.spins);
    let pass = survival_dev <= bound && echo_dev <= bound;
    let report = json!({
        "spins": a.spins, "j": a.j, "lambda0": a.lambda0, "lambda1": a.lambda1,
        "convention": convention.to_string(), "grid": grid_json(&grid),
        "max_survival_deviation": survival_dev,
        "max_echo_deviation": echo_dev,
        "bound": bound,
        "pass": pass,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| invalid(e.to_string()))?
    );
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| invalid(e.to_string()))?;
        text.push('\n');
        crate::output::write_atomic(out, text.as_bytes())?;
        write_metadata(out, "oracle-check", report.clone(), spectrum_json(&s), &[], started)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "deviation exceeds {bound:e}: survival {survival_dev:e}, echo {echo_dev:e}"
        )))
    }
}
