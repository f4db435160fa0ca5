//! Run configuration: a single JSON document plus command-line overrides.
//!
//! All strengths and rates are expressed in units of the two-photon
//! dissipation rate `κ2`; it is a normalization, never a knob.

use serde::{Deserialize, Serialize};

use catflip_core::fock_core::MIN_ALPHA2;
use catflip_core::liouville::PerturbationSpec;

use crate::error::CliError;

/// The perturbation acting on top of the two-photon stabilizer, as it
/// appears in config files.  `None` keeps the unperturbed generator and is
/// only meaningful for leakage probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    /// No perturbation: evolve under the stabilizer alone.
    None,
    /// `κ1 D[a]` — single-photon loss.
    PhotonLoss { kappa1: f64 },
    /// `κ D[a†]` — single-photon gain.
    PhotonGain { kappa: f64 },
    /// `κφ D[a†a]` — dephasing.
    Dephasing { kappa_phi: f64 },
    /// `−iΔ[a†a, ·]` — frequency detuning.
    Detuning { delta: f64 },
    /// `−iεZ[a† + a, ·]` — Z-gate drive.
    Zgate { epsilon_z: f64 },
    /// `κ D[a†^m a^n]` — generic monomial dissipator.
    GenericDissipator { m: u32, n: u32, kappa: f64 },
}

impl PerturbationConfig {
    /// Convert to the engine spec; `None` has no spec.
    pub fn to_spec(&self) -> Option<PerturbationSpec> {
        match *self {
            Self::None => None,
            Self::PhotonLoss { kappa1 } => Some(PerturbationSpec::PhotonLoss { kappa1 }),
            Self::PhotonGain { kappa } => Some(PerturbationSpec::PhotonGain { kappa }),
            Self::Dephasing { kappa_phi } => Some(PerturbationSpec::Dephasing { kappa_phi }),
            Self::Detuning { delta } => Some(PerturbationSpec::Detuning { delta }),
            Self::Zgate { epsilon_z } => Some(PerturbationSpec::ZGate { epsilon_z }),
            Self::GenericDissipator { m, n, kappa } => {
                Some(PerturbationSpec::GenericDissipator { m, n, kappa })
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::PhotonLoss { .. } => "photon_loss",
            Self::PhotonGain { .. } => "photon_gain",
            Self::Dephasing { .. } => "dephasing",
            Self::Detuning { .. } => "detuning",
            Self::Zgate { .. } => "zgate",
            Self::GenericDissipator { .. } => "generic_dissipator",
        }
    }
}

/// A rate-computation route.  `Analytic` and `Eigensum` feed the
/// `gamma_analytic_*` columns; `Spectral` and `DecayFit` feed
/// `gamma_spectral`.  When two routes target the same column, the
/// closed-form/eigenvalue route fills it and the other acts as a
/// cross-check that can degrade `reliability_flag` to `ambiguous`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form first- and second-order rates.
    Analytic,
    /// Dual-route check of the `S1`, `S2` kernels behind the closed forms.
    Eigensum,
    /// Slowest parity-odd eigenvalue of the truncated generator, with a
    /// convergence check at a padded cutoff.
    Spectral,
    /// Log-linear fit of the `⟨ς0^z, ρ(t)⟩` decay trace.
    DecayFit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Eigensum => "eigensum",
            Self::Spectral => "spectral",
            Self::DecayFit => "decay_fit",
        }
    }
}

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Analytic]
}

/// One complete run description.  Rates are reported in units of `κ2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub perturbation: PerturbationConfig,
    /// Mean photon numbers `α²` to evaluate; nonempty, strictly increasing,
    /// all at least 0.05.
    pub alpha2_grid: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Fock-space cutoff override; default is the `α²`-dependent
    /// recommendation.
    #[serde(default)]
    pub dim_override: Option<usize>,
    /// Output file; absent means stdout.
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    /// Structural validation shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let ctx = "config validation";
        if self.alpha2_grid.is_empty() {
            return Err(CliError::config("alpha2_grid must be nonempty", ctx));
        }
        for &a2 in &self.alpha2_grid {
            if !a2.is_finite() || a2 < MIN_ALPHA2 {
                return Err(CliError::config(
                    format!("alpha2 values must be finite and >= {MIN_ALPHA2}, got {a2}"),
                    ctx,
                ));
            }
        }
        if self.alpha2_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config(
                "alpha2_grid must be strictly increasing",
                ctx,
            ));
        }
        if self.methods.is_empty() {
            return Err(CliError::config("methods must be nonempty", ctx));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(CliError::config(
                    format!("duplicate method `{}`", m.name()),
                    ctx,
                ));
            }
        }
        if let Some(d) = self.dim_override {
            if d < 4 {
                return Err(CliError::config(
                    format!("dim_override must be at least 4, got {d}"),
                    ctx,
                ));
            }
        }
        if let Some(spec) = self.perturbation.to_spec() {
            spec.validate()
                .map_err(|e| CliError::from_core(&e, ctx))?;
        }
        Ok(())
    }

    pub fn has_method(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

/// Parse a config file; I/O and JSON failures are config errors.
pub fn parse_config_file(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let ctx = format!("reading config {}", path.display());
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config file: {e}"), ctx.clone()))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config JSON: {e}"), ctx))
}

/// Command-line overrides; flags win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub perturbation: Option<&'static str>,
    pub kappa1: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_phi: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon_z: Option<f64>,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub alpha2: Vec<f64>,
    pub methods: Vec<Method>,
    pub dim: Option<usize>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    fn strength_flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.kappa1.is_some() {
            out.push("--kappa1");
        }
        if self.kappa.is_some() {
            out.push("--kappa");
        }
        if self.kappa_phi.is_some() {
            out.push("--kappa-phi");
        }
        if self.delta.is_some() {
            out.push("--delta");
        }
        if self.epsilon_z.is_some() {
            out.push("--epsilon-z");
        }
        out
    }

    /// Build a perturbation from an explicit `--perturbation` kind.
    fn perturbation_from_kind(&self, kind: &str) -> Result<PerturbationConfig, CliError> {
        let ctx = "resolving --perturbation";
        let need = |flag: &str, v: Option<f64>| {
            v.ok_or_else(|| {
                CliError::config(format!("--perturbation {kind} requires {flag}"), ctx)
            })
        };
        let built = match kind {
            "none" => PerturbationConfig::None,
            "photon_loss" => PerturbationConfig::PhotonLoss {
                kappa1: need("--kappa1", self.kappa1)?,
            },
            "photon_gain" => PerturbationConfig::PhotonGain {
                kappa: need("--kappa", self.kappa)?,
            },
            "dephasing" => PerturbationConfig::Dephasing {
                kappa_phi: need("--kappa-phi", self.kappa_phi)?,
            },
            "detuning" => PerturbationConfig::Detuning {
                delta: need("--delta", self.delta)?,
            },
            "zgate" => PerturbationConfig::Zgate {
                epsilon_z: need("--epsilon-z", self.epsilon_z)?,
            },
            "generic_dissipator" => PerturbationConfig::GenericDissipator {
                m: self.m.ok_or_else(|| {
                    CliError::config("--perturbation generic_dissipator requires --m", ctx)
                })?,
                n: self.n.ok_or_else(|| {
                    CliError::config("--perturbation generic_dissipator requires --n", ctx)
                })?,
                kappa: need("--kappa", self.kappa)?,
            },
            other => {
                return Err(CliError::config(
                    format!("unknown perturbation kind `{other}`"),
                    ctx,
                ))
            }
        };
        // Reject strength flags that do not belong to the chosen kind.
        for flag in self.strength_flags() {
            let fits = matches!(
                (&built, flag),
                (PerturbationConfig::PhotonLoss { .. }, "--kappa1")
                    | (PerturbationConfig::PhotonGain { .. }, "--kappa")
                    | (PerturbationConfig::Dephasing { .. }, "--kappa-phi")
                    | (PerturbationConfig::Detuning { .. }, "--delta")
                    | (PerturbationConfig::Zgate { .. }, "--epsilon-z")
                    | (PerturbationConfig::GenericDissipator { .. }, "--kappa")
            );
            if !fits {
                return Err(CliError::config(
                    format!("{flag} does not apply to perturbation kind `{kind}`"),
                    ctx,
                ));
            }
        }
        Ok(built)
    }

    /// Infer the perturbation when neither a config file nor
    /// `--perturbation` names it; requires exactly one strength flag.
    fn perturbation_inferred(&self) -> Result<PerturbationConfig, CliError> {
        let ctx = "inferring perturbation from strength flags";
        let flags = self.strength_flags();
        match flags.as_slice() {
            [] => Err(CliError::config(
                "no perturbation given: pass --config, --perturbation, or a strength flag",
                ctx,
            )),
            ["--kappa1"] => Ok(PerturbationConfig::PhotonLoss {
                kappa1: self.kappa1.unwrap(),
            }),
            ["--kappa"] => match (self.m, self.n) {
                (None, None) => Ok(PerturbationConfig::PhotonGain {
                    kappa: self.kappa.unwrap(),
                }),
                (Some(m), Some(n)) => Ok(PerturbationConfig::GenericDissipator {
                    m,
                    n,
                    kappa: self.kappa.unwrap(),
                }),
                _ => Err(CliError::config(
                    "generic dissipator needs both --m and --n",
                    ctx,
                )),
            },
            ["--kappa-phi"] => Ok(PerturbationConfig::Dephasing {
                kappa_phi: self.kappa_phi.unwrap(),
            }),
            ["--delta"] => Ok(PerturbationConfig::Detuning {
                delta: self.delta.unwrap(),
            }),
            ["--epsilon-z"] => Ok(PerturbationConfig::Zgate {
                epsilon_z: self.epsilon_z.unwrap(),
            }),
            many => Err(CliError::config(
                format!("ambiguous perturbation: {} given together", many.join(", ")),
                ctx,
            )),
        }
    }

    /// Override strength fields of an existing perturbation in place; a
    /// strength flag for a different kind is a config error.
    fn apply_strengths(&self, pert: &mut PerturbationConfig) -> Result<(), CliError> {
        let ctx = "applying strength overrides";
        let kind = pert.kind_name();
        for flag in self.strength_flags() {
            match (&mut *pert, flag) {
                (PerturbationConfig::PhotonLoss { kappa1 }, "--kappa1") => {
                    *kappa1 = self.kappa1.unwrap()
                }
                (PerturbationConfig::PhotonGain { kappa }, "--kappa") => {
                    *kappa = self.kappa.unwrap()
                }
                (PerturbationConfig::Dephasing { kappa_phi }, "--kappa-phi") => {
                    *kappa_phi = self.kappa_phi.unwrap()
                }
                (PerturbationConfig::Detuning { delta }, "--delta") => {
                    *delta = self.delta.unwrap()
                }
                (PerturbationConfig::Zgate { epsilon_z }, "--epsilon-z") => {
                    *epsilon_z = self.epsilon_z.unwrap()
                }
                (PerturbationConfig::GenericDissipator { kappa, .. }, "--kappa") => {
                    *kappa = self.kappa.unwrap()
                }
                _ => {
                    return Err(CliError::config(
                        format!("{flag} does not apply to perturbation kind `{kind}`"),
                        ctx,
                    ))
                }
            }
        }
        if let PerturbationConfig::GenericDissipator { m, n, .. } = pert {
            if let Some(mv) = self.m {
                *m = mv;
            }
            if let Some(nv) = self.n {
                *n = nv;
            }
        }
        Ok(())
    }
}

/// Merge a config file (if any) with command-line overrides and validate.
pub fn resolve(base: Option<RunConfig>, over: &Overrides) -> Result<RunConfig, CliError> {
    let perturbation = match (&base, over.perturbation) {
        (_, Some(kind)) => over.perturbation_from_kind(kind)?,
        (Some(cfg), None) => {
            let mut pert = cfg.perturbation.clone();
            over.apply_strengths(&mut pert)?;
            pert
        }
        (None, None) => over.perturbation_inferred()?,
    };
    let alpha2_grid = if !over.alpha2.is_empty() {
        over.alpha2.clone()
    } else {
        base.as_ref()
            .map(|c| c.alpha2_grid.clone())
            .unwrap_or_default()
    };
    let methods = if !over.methods.is_empty() {
        over.methods.clone()
    } else {
        base.as_ref()
            .map(|c| c.methods.clone())
            .unwrap_or_else(default_methods)
    };
    let cfg = RunConfig {
        perturbation,
        alpha2_grid,
        methods,
        dim_override: over.dim.or(base.as_ref().and_then(|c| c.dim_override)),
        output_path: over
            .out
            .clone()
            .or(base.as_ref().and_then(|c| c.output_path.clone())),
        format: over
            .format
            .unwrap_or_else(|| base.as_ref().map(|c| c.format).unwrap_or_default()),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// The three sweep recipes shipped in `configs/`; the validation suite
/// `figures` runs exactly these.
pub fn figure_configs() -> Vec<(&'static str, RunConfig)> {
    let grid = |from: usize, to: usize| -> Vec<f64> {
        (from..=to).map(|k| k as f64 * 0.5).collect()
    };
    let all_methods = vec![
        Method::Analytic,
        Method::Eigensum,
        Method::Spectral,
        Method::DecayFit,
    ];
    let two_routes = vec![Method::Analytic, Method::Spectral];
    vec![
        (
            "photon_loss_sweep",
            RunConfig {
                perturbation: PerturbationConfig::PhotonLoss { kappa1: 0.01 },
                alpha2_grid: grid(1, 12),
                methods: all_methods,
                dim_override: None,
                output_path: Some("photon_loss_sweep.csv".into()),
                format: OutputFormat::Csv,
            },
        ),
        (
            "zgate_sweep",
            RunConfig {
                perturbation: PerturbationConfig::Zgate { epsilon_z: 0.1 },
                alpha2_grid: grid(2, 12),
                methods: two_routes.clone(),
                dim_override: None,
                output_path: Some("zgate_sweep.csv".into()),
                format: OutputFormat::Csv,
            },
        ),
        (
            "detuning_sweep",
            RunConfig {
                perturbation: PerturbationConfig::Detuning { delta: 0.1 },
                alpha2_grid: grid(2, 12),
                methods: two_routes,
                dim_override: None,
                output_path: Some("detuning_sweep.csv".into()),
                format: OutputFormat::Csv,
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "perturbation": {"kind": "photon_loss", "kappa1": 0.01},
        "alpha2_grid": [0.5, 1.0, 2.5],
        "methods": ["analytic", "spectral"],
        "dim_override": 30,
        "output_path": "rows.csv",
        "format": "csv"
    }"#;

    #[test]
    fn config_json_round_trips_identically() {
        let first: RunConfig = serde_json::from_str(EXAMPLE).unwrap();
        let text = serde_json::to_string(&first).unwrap();
        let second: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(first, second);
        // A second serialization pass is byte-stable as well.
        assert_eq!(text, serde_json::to_string(&second).unwrap());
        first.validate().unwrap();
    }

    #[test]
    fn defaults_fill_in_optional_fields() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"perturbation": {"kind": "detuning", "delta": 0.1}, "alpha2_grid": [1.0]}"#,
        )
        .unwrap();
        assert_eq!(cfg.methods, vec![Method::Analytic]);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert!(cfg.dim_override.is_none() && cfg.output_path.is_none());
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_grids_and_methods() {
        let mut cfg: RunConfig = serde_json::from_str(EXAMPLE).unwrap();
        cfg.alpha2_grid = vec![];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        cfg.alpha2_grid = vec![1.0, 0.5];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        cfg.alpha2_grid = vec![0.01];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        cfg.alpha2_grid = vec![1.0];
        cfg.methods = vec![Method::Analytic, Method::Analytic];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
        cfg.methods = vec![];
        assert_eq!(cfg.validate().unwrap_err().code, 2);
    }

    #[test]
    fn unknown_keys_and_kinds_are_rejected() {
        let bad_key = r#"{"perturbation": {"kind": "photon_loss", "kappa1": 0.01},
                          "alpha2_grid": [1.0], "extra": 3}"#;
        assert!(serde_json::from_str::<RunConfig>(bad_key).is_err());
        let bad_kind = r#"{"perturbation": {"kind": "mystery"}, "alpha2_grid": [1.0]}"#;
        assert!(serde_json::from_str::<RunConfig>(bad_kind).is_err());
        let bad_method = r#"{"perturbation": {"kind": "photon_loss", "kappa1": 0.01},
                             "alpha2_grid": [1.0], "methods": ["magic"]}"#;
        assert!(serde_json::from_str::<RunConfig>(bad_method).is_err());
    }

    #[test]
    fn flags_win_over_file_values() {
        let base: RunConfig = serde_json::from_str(EXAMPLE).unwrap();
        let over = Overrides {
            kappa1: Some(0.02),
            alpha2: vec![2.0],
            methods: vec![Method::Analytic],
            dim: Some(40),
            out: Some("other.csv".into()),
            format: Some(OutputFormat::Json),
            ..Default::default()
        };
        let cfg = resolve(Some(base), &over).unwrap();
        assert_eq!(
            cfg.perturbation,
            PerturbationConfig::PhotonLoss { kappa1: 0.02 }
        );
        assert_eq!(cfg.alpha2_grid, vec![2.0]);
        assert_eq!(cfg.methods, vec![Method::Analytic]);
        assert_eq!(cfg.dim_override, Some(40));
        assert_eq!(cfg.output_path.as_deref(), Some("other.csv"));
        assert_eq!(cfg.format, OutputFormat::Json);
    }

    #[test]
    fn mismatched_strength_flag_is_a_config_error() {
        let base: RunConfig = serde_json::from_str(EXAMPLE).unwrap();
        let over = Overrides {
            delta: Some(0.1),
            ..Default::default()
        };
        assert_eq!(resolve(Some(base), &over).unwrap_err().code, 2);
    }

    #[test]
    fn inference_needs_exactly_one_strength_flag() {
        let over = Overrides {
            kappa1: Some(0.01),
            delta: Some(0.1),
            alpha2: vec![1.0],
            ..Default::default()
        };
        assert_eq!(resolve(None, &over).unwrap_err().code, 2);
        let over = Overrides {
            delta: Some(0.1),
            alpha2: vec![1.0],
            ..Default::default()
        };
        let cfg = resolve(None, &over).unwrap();
        assert_eq!(cfg.perturbation, PerturbationConfig::Detuning { delta: 0.1 });
    }
}
