//! Validation suites: structural invariants, sweep/figure reproductions,
//! and the closed-form rate tables, reported as pass/fail JSON.

use catflip_core::analytic_rates::{
    detuning_rate, leaking_dissipator_rate_closed, leaking_dissipator_rate_numeric,
    photon_loss_rate, zgate_rate,
};
use catflip_core::error::CoreError;
use catflip_core::fock_core::{inner, FockSpace, Parity};
use catflip_core::kerr_spectrum::{eigensystem, inverse_kerr_element, s1_s2, S12Method};
use catflip_core::liouville::{invariants, l0_superop, trace_prod};
use catflip_core::special_functions::{chin, ein, shi};
use catflip_core::spectral_extraction::{bitflip_eigenvalue, RATE_FLOOR};
use catflip_core::C64;

use crate::config::figure_configs;
use crate::engine::run_sweep;
use crate::error::CliError;
use crate::rows::{fmt17, Reliability};

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Fast structural invariants of every module.
    Invariants,
    /// The three shipped sweep recipes, with dual-route agreement bands.
    Figures,
    /// Closed-form rate tables against independent numerical routes.
    Tables,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Invariants => "invariants",
            Self::Figures => "figures",
            Self::Tables => "tables",
        }
    }
}

/// One check: the measured value, the tolerance it was held to, and the
/// verdict.  For `*_reliable_points` checks the tolerance field holds the
/// minimum acceptable count.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

impl Check {
    /// Pass iff `measured` is finite and does not exceed `tolerance`.
    fn bounded(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            measured,
            pass: measured.is_finite() && measured <= tolerance,
        }
    }

    /// Pass iff a count reaches a minimum.
    fn at_least(name: impl Into<String>, count: usize, min: usize) -> Self {
        Self {
            name: name.into(),
            tolerance: min as f64,
            measured: count as f64,
            pass: count >= min,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn to_json(&self) -> String {
        let body: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let measured = if c.measured.is_finite() {
                    fmt17(c.measured)
                } else {
                    "null".into()
                };
                format!(
                    "{{\"name\":\"{}\",\"tolerance\":{},\"measured\":{},\"pass\":{}}}",
                    c.name,
                    fmt17(c.tolerance),
                    measured,
                    c.pass
                )
            })
            .collect();
        format!(
            "{{\"suite\":\"{}\",\"checks\":[\n{}\n],\"passed\":{},\"failed\":{}}}\n",
            self.suite,
            body.join(",\n"),
            self.passed(),
            self.failed()
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn wrap(suite: Suite) -> impl Fn(CoreError) -> CliError + Copy {
    move |e| CliError::from_core(&e, format!("validate suite {}", suite.name()))
}

pub fn run_suite(suite: Suite) -> Result<Report, CliError> {
    let checks = match suite {
        Suite::Invariants => invariants_suite()?,
        Suite::Figures => figures_suite()?,
        Suite::Tables => tables_suite()?,
    };
    Ok(Report {
        suite: suite.name(),
        checks,
    })
}

/// Structural invariants: special-function identity, cat-basis structure,
/// stabilizer null space, Kerr inversion, and the kernel dual route.
fn invariants_suite() -> Result<Vec<Check>, CliError> {
    let w = wrap(Suite::Invariants);
    let mut checks = Vec::new();

    // Sinh/cosh-integral identity, measured on the operand scale.
    let mut worst = 0.0f64;
    for &x in &[1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let s = shi(2.0 * x).map_err(w)?.value;
        let c = chin(2.0 * x).map_err(w)?.value;
        let e = ein(x).map_err(w)?.value;
        let scale = s.abs().max(c.abs()).max(e.abs());
        worst = worst.max((s - c - e).abs() / scale);
    }
    checks.push(Check::bounded("special_function_identity_residual", worst, 1e-12));

    let alpha2 = 2.0f64;
    let alpha = alpha2.sqrt();
    let space = FockSpace::for_alpha2(alpha2).map_err(w)?;
    let basis = invariants(&space, alpha).map_err(w)?;

    // Cat-state normalization.
    let mut worst = 0.0f64;
    for parity in [Parity::Even, Parity::Odd] {
        let cat = space.cat_state(alpha, parity).map_err(w)?;
        worst = worst.max((inner(&cat, &cat).re - 1.0).abs());
    }
    checks.push(Check::bounded("cat_state_normalization", worst, 1e-10));

    // Biorthonormal pairing of the invariants against the cat dyads.
    let parities = [
        (Parity::Even, Parity::Even),
        (Parity::Odd, Parity::Odd),
        (Parity::Even, Parity::Odd),
        (Parity::Odd, Parity::Even),
    ];
    let mut worst = 0.0f64;
    for (i, &(s, sp)) in parities.iter().enumerate() {
        for (j, &(r, rp)) in parities.iter().enumerate() {
            let t = trace_prod(basis.invariant(s, sp), &basis.cat_dyad(r, rp));
            let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((t - want).norm());
        }
    }
    checks.push(Check::bounded("invariant_dyad_pairing", worst, 1e-8));

    // The stabilizer annihilates all four cat dyads.
    let l0 = l0_superop(&space, alpha, 1.0).map_err(w)?;
    let mut worst = 0.0f64;
    for &(s, sp) in &parities {
        let image = l0.apply(&basis.cat_dyad(s, sp)).map_err(w)?;
        worst = worst.max(image.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    checks.push(Check::bounded("stabilizer_annihilates_cat_dyads", worst, 1e-8));

    // Kerr pseudo-inverse: closed coherent-basis kernel vs the eigensum.
    let eig = eigensystem(&space, alpha).map_err(w)?;
    let (chi_bar, phi) = (0.45 * alpha, -0.45 * alpha);
    let ket_chi = space.coherent_state(C64::new(chi_bar, 0.0), false).map_err(w)?;
    let ket_phi = space.coherent_state(C64::new(phi, 0.0), false).map_err(w)?;
    let summed = inner(&ket_chi, &eig.inverse_perp_apply(&ket_phi)).re;
    let closed = inverse_kerr_element(alpha, chi_bar, phi).map_err(w)?;
    checks.push(Check::bounded("kerr_inverse_closed_vs_eigensum", rel(closed, summed), 1e-6));

    // S kernels by both routes.
    let mut worst = 0.0f64;
    for &a2 in &[1.0f64, 2.0, 4.0] {
        let cf = s1_s2(a2.sqrt(), S12Method::ClosedForm).map_err(w)?;
        let es = s1_s2(a2.sqrt(), S12Method::Eigensum).map_err(w)?;
        worst = worst.max(rel(es.s1, cf.s1)).max(rel(es.s2, cf.s2));
    }
    checks.push(Check::bounded("s_kernel_dual_route", worst, 1e-6));

    // The unperturbed generator has a numerically null bit-flip eigenvalue.
    let null = bitflip_eigenvalue(&l0, &basis).map_err(w)?;
    checks.push(Check::bounded(
        "stabilizer_bitflip_eigenvalue_null",
        null.lambda_z.norm(),
        1e-10,
    ));

    Ok(checks)
}

/// Closed-form tables: monomial dissipator rates against the invariant
/// trace, and large-`α²` asymptotics of the three rate mechanisms.
fn tables_suite() -> Result<Vec<Check>, CliError> {
    let w = wrap(Suite::Tables);
    let mut checks = Vec::new();

    // Monomial dissipators D[a†^m a^n] at α² = 3: closed row vs trace.
    let a2 = 3.0f64;
    let alpha = a2.sqrt();
    let space = FockSpace::for_alpha2(a2).map_err(w)?;
    let basis = invariants(&space, alpha).map_err(w)?;
    for m in 1..=3u32 {
        for n in 0..=2u32 {
            let closed = leaking_dissipator_rate_closed(alpha, m, n, 1.0).map_err(w)?;
            let numeric = leaking_dissipator_rate_numeric(&basis, m, n, 1.0).map_err(w)?;
            checks.push(Check::bounded(
                format!("monomial_rate_m{m}_n{n}_closed_vs_trace"),
                rel(closed, numeric),
                5e-3,
            ));
        }
    }

    // Leading-exponential asymptotics deep in the suppressed regime.
    for &(name, a2) in &[
        ("photon_loss_asymptote_a2_12", 12.0f64),
        ("photon_loss_asymptote_a2_16", 16.0),
    ] {
        let r = photon_loss_rate(a2.sqrt(), 0.01, 1.0).map_err(w)?;
        checks.push(Check::bounded(
            name,
            (r.gamma_bitflip / r.asymptotic_gamma - 1.0).abs(),
            0.05,
        ));
    }
    let r = detuning_rate(16.0f64.sqrt(), 0.1, 1.0).map_err(w)?;
    checks.push(Check::bounded(
        "detuning_asymptote_a2_16",
        (r.gamma_bitflip / r.asymptotic_gamma - 1.0).abs(),
        0.05,
    ));
    let r = zgate_rate(16.0f64.sqrt(), 0.1, 1.0).map_err(w)?;
    checks.push(Check::bounded(
        "zgate_asymptote_a2_16",
        (r.gamma_bitflip / r.asymptotic_gamma - 1.0).abs(),
        0.05,
    ));

    Ok(checks)
}

/// Run the three shipped sweep recipes and hold the spectral route to the
/// closed forms wherever the row is fully reliable.
fn figures_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (name, cfg) in figure_configs() {
        let rows = run_sweep(&cfg)?;
        let min_ok = rows.len() - 2;
        let ok_rows: Vec<_> = rows
            .iter()
            .filter(|r| r.reliability_flag == Reliability::Ok)
            .collect();
        checks.push(Check::at_least(
            format!("{name}_reliable_points"),
            ok_rows.len(),
            min_ok,
        ));
        let mut worst = 0.0f64;
        let mut compared = 0usize;
        for row in &ok_rows {
            if let (Some(spectral), Some(analytic)) = (row.gamma_spectral, row.gamma_analytic_total)
            {
                if analytic >= RATE_FLOOR {
                    worst = worst.max((spectral / analytic - 1.0).abs());
                    compared += 1;
                }
            }
        }
        if compared == 0 {
            worst = f64::NAN;
        }
        checks.push(Check::bounded(format!("{name}_route_agreement"), worst, 0.15));
    }
    Ok(checks)
}
