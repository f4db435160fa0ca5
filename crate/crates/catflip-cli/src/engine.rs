//! Row computation: dispatches each α² grid point to the requested routes
//! and folds per-point numerical trouble into the reliability flag.

use rayon::prelude::*;

use catflip_core::analytic_rates::{
    detuning_rate, leaking_dissipator_rate, photon_loss_rate, zgate_rate,
};
use catflip_core::error::CoreError;
use catflip_core::fock_core::{outer, recommended_dim, FockSpace};
use catflip_core::kerr_spectrum::{s1_s2_with_dim, S12Method};
use catflip_core::liouville::{invariants, l0_superop, leakage, PerturbationSpec};
use catflip_core::spectral_extraction::{
    assemble_generator, converged_bitflip_eigenvalue, evolve, fit_bitflip_decay, RATE_FLOOR,
};

use crate::config::{Method, PerturbationConfig, RunConfig};
use crate::error::CliError;
use crate::rows::{Reliability, SweepRow};

/// Relative band for the closed-form vs eigensum kernel cross-check.
pub const EIGENSUM_BAND: f64 = 1e-4;
/// Relative band for the decay-fit vs eigenvalue cross-check.
pub const FIT_BAND: f64 = 0.25;
/// Below this rate a decay fit has no resolvable signal inside the horizon.
pub const FIT_MIN_RATE: f64 = 1e-9;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Reliability classification of a per-row engine failure.
fn flag_for(err: &CoreError) -> Reliability {
    match err {
        CoreError::AmbiguousSelection { .. } => Reliability::Ambiguous,
        CoreError::SignalTooSmall { .. } => Reliability::Floor,
        _ => Reliability::Truncation,
    }
}

/// Closed-form columns `(first, second, total)` for one perturbation.
/// Hamiltonian and loss channels have both orders; leaking dissipators are
/// first-order dominated and leave the second-order cell null.
fn analytic_columns(
    spec: &PerturbationSpec,
    alpha: f64,
) -> Result<(Option<f64>, Option<f64>, f64), CoreError> {
    let from_rate = |r: catflip_core::analytic_rates::RateResult| {
        (
            Some((-r.lambda_first.re / 2.0).max(0.0)),
            Some((-r.lambda_second.re / 2.0).max(0.0)),
            r.gamma_bitflip,
        )
    };
    match spec {
        PerturbationSpec::PhotonLoss { kappa1 } => {
            Ok(from_rate(photon_loss_rate(alpha, *kappa1, 1.0)?))
        }
        PerturbationSpec::ZGate { epsilon_z } => Ok(from_rate(zgate_rate(alpha, *epsilon_z, 1.0)?)),
        PerturbationSpec::Detuning { delta } => Ok(from_rate(detuning_rate(alpha, *delta, 1.0)?)),
        PerturbationSpec::PhotonGain { kappa } => {
            let g = leaking_dissipator_rate(alpha, 1, 0, *kappa)?;
            Ok((Some(g), None, g))
        }
        PerturbationSpec::Dephasing { kappa_phi } => {
            let g = leaking_dissipator_rate(alpha, 1, 1, *kappa_phi)?;
            Ok((Some(g), None, g))
        }
        PerturbationSpec::GenericDissipator { m, n, kappa } => {
            let g = leaking_dissipator_rate(alpha, *m, *n, *kappa)?;
            Ok((Some(g), None, g))
        }
        PerturbationSpec::GenericHamiltonian { .. } => Err(CoreError::PreconditionViolated {
            context: "generic Hamiltonian perturbations are not reachable from a run config".into(),
        }),
    }
}

/// A rate scale for sizing the decay-fit horizon.
fn estimate_gamma(spec: &PerturbationSpec, alpha: f64) -> Result<f64, CoreError> {
    analytic_columns(spec, alpha).map(|(_, _, total)| total)
}

/// Worst relative disagreement between the closed-form and eigensum kernel
/// routes at one cutoff.
fn eigensum_deviation(alpha: f64, dim: usize) -> Result<f64, CoreError> {
    let closed = s1_s2_with_dim(alpha, dim, S12Method::ClosedForm)?;
    let summed = s1_s2_with_dim(alpha, dim, S12Method::Eigensum)?;
    Ok(rel(summed.s1, closed.s1).max(rel(summed.s2, closed.s2)))
}

/// Decay-rate fit on a freshly assembled generator.
fn fit_gamma(
    spec: &PerturbationSpec,
    alpha: f64,
    dim: usize,
    horizon: f64,
) -> Result<f64, CoreError> {
    let space = FockSpace::new(dim)?;
    let basis = invariants(&space, alpha)?;
    let l_total = assemble_generator(&space, alpha, spec)?;
    fit_bitflip_decay(&l_total, &basis, horizon)
}

/// Compute one sweep row.  In strict mode engine errors abort with their
/// exit code; in lenient mode they degrade `reliability_flag` and leave
/// the affected cells null, so a sweep continues past bad points.
pub fn compute_row(
    spec: &PerturbationSpec,
    alpha2: f64,
    methods: &[Method],
    dim_override: Option<usize>,
    strict: bool,
) -> Result<SweepRow, CliError> {
    let alpha = alpha2.sqrt();
    let ctx = |what: &str| format!("{what} at alpha2 = {alpha2}");
    let has = |m: Method| methods.contains(&m);
    let mut flag = Reliability::Ok;
    let mut row = SweepRow {
        alpha2,
        gamma_analytic_first: None,
        gamma_analytic_second: None,
        gamma_analytic_total: None,
        gamma_spectral: None,
        overlap_score: None,
        dim_used: None,
        reliability_flag: Reliability::Ok,
    };
    let dim = dim_override.unwrap_or_else(|| recommended_dim(alpha2));

    if has(Method::Analytic) {
        match analytic_columns(spec, alpha) {
            Ok((first, second, total)) => {
                row.gamma_analytic_first = first;
                row.gamma_analytic_second = second;
                row.gamma_analytic_total = Some(total);
            }
            Err(e) if strict => return Err(CliError::from_core(&e, ctx("analytic rate"))),
            Err(e) => flag.degrade(flag_for(&e)),
        }
    }

    if has(Method::Eigensum) {
        match eigensum_deviation(alpha, dim) {
            Ok(dev) => {
                row.dim_used.get_or_insert(dim);
                if dev > EIGENSUM_BAND {
                    flag.degrade(Reliability::Ambiguous);
                }
            }
            Err(e) if strict => return Err(CliError::from_core(&e, ctx("eigensum kernel check"))),
            Err(e) => flag.degrade(flag_for(&e)),
        }
    }

    if has(Method::Spectral) {
        match converged_bitflip_eigenvalue(alpha, spec, dim) {
            Ok(r) => {
                let gamma = (-r.lambda_z.re / 2.0).max(0.0);
                row.gamma_spectral = Some(gamma);
                row.overlap_score = Some(r.overlap_score);
                row.dim_used = Some(r.dim_used);
                if !r.converged {
                    if strict {
                        return Err(CliError::numerical(
                            "spectral eigenvalue did not converge between successive cutoffs",
                            ctx("spectral extraction"),
                        ));
                    }
                    flag.degrade(Reliability::Truncation);
                }
                if gamma < RATE_FLOOR {
                    flag.degrade(Reliability::Floor);
                }
            }
            Err(e) if strict => return Err(CliError::from_core(&e, ctx("spectral extraction"))),
            Err(e) => flag.degrade(flag_for(&e)),
        }
    }

    if has(Method::DecayFit) {
        let estimate = match row.gamma_analytic_total {
            Some(total) => Ok(total),
            None => estimate_gamma(spec, alpha),
        };
        match estimate {
            Ok(est) if est < FIT_MIN_RATE => flag.degrade(Reliability::Floor),
            Ok(est) => match fit_gamma(spec, alpha, dim, 10.0 / est) {
                Ok(g) => {
                    row.dim_used.get_or_insert(dim);
                    match row.gamma_spectral {
                        // Eigenvalue route already filled the column: the
                        // fit only corroborates it.
                        Some(ge) if ge >= RATE_FLOOR => {
                            if (g - ge).abs() > FIT_BAND * ge {
                                flag.degrade(Reliability::Ambiguous);
                            }
                        }
                        Some(_) => {}
                        None => {
                            row.gamma_spectral = Some(g.max(0.0));
                            if g < RATE_FLOOR {
                                flag.degrade(Reliability::Floor);
                            }
                        }
                    }
                }
                Err(e) if strict => return Err(CliError::from_core(&e, ctx("decay fit"))),
                Err(e) => flag.degrade(flag_for(&e)),
            },
            Err(e) if strict => return Err(CliError::from_core(&e, ctx("decay fit horizon"))),
            Err(e) => flag.degrade(flag_for(&e)),
        }
    }

    row.reliability_flag = flag;
    Ok(row)
}

/// Work-pool size: `CATFLIP_THREADS` if set, else the logical core count.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("CATFLIP_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::config(
                    format!("CATFLIP_THREADS must be a positive integer, got `{raw}`"),
                    "work-pool sizing",
                )
            }),
        Err(_) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}

fn require_spec(cfg: &RunConfig, what: &str) -> Result<PerturbationSpec, CliError> {
    cfg.perturbation.to_spec().ok_or_else(|| {
        CliError::config(
            format!("{what} requires a perturbation; kind `none` is only for leakage probes"),
            "config validation",
        )
    })
}

/// Single-point rate (strict error surfacing).
pub fn run_rate(cfg: &RunConfig) -> Result<SweepRow, CliError> {
    if cfg.alpha2_grid.len() != 1 {
        return Err(CliError::config(
            format!(
                "rate takes exactly one alpha2 value, got {}",
                cfg.alpha2_grid.len()
            ),
            "config validation",
        ));
    }
    let spec = require_spec(cfg, "rate")?;
    compute_row(
        &spec,
        cfg.alpha2_grid[0],
        &cfg.methods,
        cfg.dim_override,
        true,
    )
}

/// Full sweep over the grid: rows computed by a work pool, collected in
/// grid order, per-row trouble recorded in the reliability flag.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let spec = require_spec(cfg, "sweep")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::internal(format!("cannot build work pool: {e}"), "sweep setup"))?;
    pool.install(|| {
        cfg.alpha2_grid
            .par_iter()
            .map(|&a2| compute_row(&spec, a2, &cfg.methods, cfg.dim_override, false))
            .collect()
    })
}

/// Leakage trace of `|0c⟩⟨0c|` on a uniform time grid, `t = 0` included.
pub fn leakage_trace(
    pert: &PerturbationConfig,
    alpha2: f64,
    dim_override: Option<usize>,
    t_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>, CliError> {
    let ctx = format!("leakage trace at alpha2 = {alpha2}");
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(CliError::config(
            format!("--t-max must be positive, got {t_max}"),
            ctx.clone(),
        ));
    }
    if samples == 0 {
        return Err(CliError::config("--samples must be at least 1", ctx.clone()));
    }
    let alpha = alpha2.sqrt();
    let dim = dim_override.unwrap_or_else(|| recommended_dim(alpha2));
    let wrap = |e: CoreError| CliError::from_core(&e, ctx.clone());
    let space = FockSpace::new(dim).map_err(wrap)?;
    let basis = invariants(&space, alpha).map_err(wrap)?;
    let generator = match pert.to_spec() {
        Some(spec) => assemble_generator(&space, alpha, &spec).map_err(wrap)?,
        None => l0_superop(&space, alpha, 1.0).map_err(wrap)?,
    };
    let rho0 = outer(&basis.zero_c, &basis.zero_c);
    let grid: Vec<f64> = (0..=samples)
        .map(|i| t_max * i as f64 / samples as f64)
        .collect();
    let states = evolve(&generator, &rho0, &grid).map_err(wrap)?;
    grid.iter()
        .zip(states.iter())
        .map(|(&t, state)| Ok((t, leakage(state, &basis).map_err(wrap)?)))
        .collect()
}
