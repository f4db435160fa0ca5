//! Superoperator algebra on the truncated Fock space.
//!
//! The unperturbed generator is the two-photon dissipator
//! `L0 = κ2 D[a² − α²]` with `D[L]ρ = LρL† − ½{L†L, ρ}`.  Its stationary
//! manifold is spanned by the four cat dyads `|C^σ⟩⟨C^σ'|`; the matching
//! left null vectors — the *invariants* `ς0^{σσ'}` — are what every rate
//! computation in this crate projects onto.  This module provides:
//!
//! * dense superoperators (dissipators, Hamiltonian commutators, the
//!   perturbation dispatch) in a fixed column-stacked vectorization,
//! * the invariants, built entrywise in log space, plus their closed-form
//!   coherent-basis matrix element as an independent cross-check,
//! * the slow-manifold projector `P∥` and its complement,
//! * leakage diagnostics: the population outside the cat subspace and its
//!   first/second time derivatives under a perturbation.

use ndarray::{linalg::kron, Array1, Array2};

use crate::error::{CoreError, Result};
use crate::fock_core::{dagger, outer, FockSpace, Ket, OperatorMatrix, Parity};
use crate::special_functions::{adaptive_simpson_complex, bessel_i_scaled, inv_sinh, log_factorial};
use crate::C64;

/// Tolerance for Hermiticity and unit-trace validation of density-matrix
/// inputs; violations are errors, never warnings.
pub const DENSITY_TOL: f64 = 1e-10;

/// Threshold below which a leakage rate counts as zero for classification.
pub const LEAKAGE_THRESHOLD: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Vectorization and superoperators.

/// Column-stacked vectorization: `vec(X)[i + j·dim] = X[i,j]`, so
/// `vec(|i⟩⟨j|)` lives at index `i + j·dim`.
pub fn vec_op(x: &OperatorMatrix) -> Array1<C64> {
    Array1::from_iter(x.t().iter().cloned())
}

/// Inverse of [`vec_op`].
pub fn unvec(v: &Array1<C64>, dim: usize) -> Result<OperatorMatrix> {
    if v.len() != dim * dim {
        return Err(CoreError::DimensionMismatch {
            context: format!("unvec expected length {}, got {}", dim * dim, v.len()),
        });
    }
    Ok(Array2::from_shape_fn((dim, dim), |(i, j)| v[i + j * dim]))
}

/// Dense superoperator acting on column-stacked operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub entries: Array2<C64>,
    pub dim: usize,
}

impl Superoperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            entries: Array2::zeros((dim * dim, dim * dim)),
            dim,
        }
    }

    /// Apply to an operator: `unvec(S · vec(ρ))`.
    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(CoreError::DimensionMismatch {
                context: format!(
                    "superoperator dim {} applied to {}x{} operator",
                    self.dim,
                    rho.nrows(),
                    rho.ncols()
                ),
            });
        }
        unvec(&self.entries.dot(&vec_op(rho)), self.dim)
    }

    /// Elementwise sum of two generators on the same space.
    pub fn plus(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch {
                context: format!("superoperator sum of dims {} and {}", self.dim, other.dim),
            });
        }
        Ok(Superoperator {
            entries: &self.entries + &other.entries,
            dim: self.dim,
        })
    }

    pub fn scaled(&self, c: f64) -> Superoperator {
        Superoperator {
            entries: self.entries.mapv(|x| x * c),
            dim: self.dim,
        }
    }
}

/// The map `X ↦ A·X·B` as a superoperator: `kron(Bᵀ, A)` in the
/// column-stacked convention.
pub fn sandwich(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Superoperator> {
    let dim = a.nrows();
    if a.ncols() != dim || b.nrows() != dim || b.ncols() != dim {
        return Err(CoreError::DimensionMismatch {
            context: format!(
                "sandwich needs equal square factors, got {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            ),
        });
    }
    let bt = b.t().to_owned();
    Ok(Superoperator {
        entries: kron(&bt, a),
        dim,
    })
}

/// Lindblad dissipator `D[L]ρ = LρL† − ½{L†L, ρ}` as a superoperator.
pub fn dissipator_superop(l: &OperatorMatrix) -> Result<Superoperator> {
    let ld = dagger(l);
    let ldl = ld.dot(l);
    let eye = Array2::<C64>::eye(l.nrows());
    let s = sandwich(l, &ld)?
        .plus(&sandwich(&ldl, &eye)?.scaled(-0.5))?
        .plus(&sandwich(&eye, &ldl)?.scaled(-0.5))?;
    Ok(s)
}

/// Hamiltonian commutator `ρ ↦ −i·strength·[V, ρ]`; `V` must be Hermitian.
pub fn hamiltonian_superop(v: &OperatorMatrix, strength: f64) -> Result<Superoperator> {
    let deviation = (v - &dagger(v)).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if deviation > 1e-12 {
        return Err(CoreError::NotHermitian { deviation });
    }
    let eye = Array2::<C64>::eye(v.nrows());
    let comm = sandwich(v, &eye)?.plus(&sandwich(&eye, v)?.scaled(-1.0))?;
    Ok(Superoperator {
        entries: comm.entries.mapv(|x| x * C64::new(0.0, -strength)),
        dim: comm.dim,
    })
}

/// The unperturbed cat-qubit generator `κ2 · D[a² − α²]`.
pub fn l0_superop(space: &FockSpace, alpha: f64, kappa2: f64) -> Result<Superoperator> {
    let a = space.annihilation();
    let mut l = a.dot(&a);
    let a2 = C64::new(alpha * alpha, 0.0);
    for n in 0..space.dim {
        l[[n, n]] -= a2;
    }
    Ok(dissipator_superop(&l)?.scaled(kappa2))
}

// ---------------------------------------------------------------------------
// Perturbations.

/// A perturbation of the cat qubit; all strengths are in units of `κ2`.
#[derive(Debug, Clone)]
pub enum PerturbationSpec {
    /// `κ1 D[a]` — single-photon loss.
    PhotonLoss { kappa1: f64 },
    /// `κ D[a†]` — single-photon gain.
    PhotonGain { kappa: f64 },
    /// `κφ D[a†a]` — dephasing.
    Dephasing { kappa_phi: f64 },
    /// `−iΔ[a†a, ·]` — frequency detuning.
    Detuning { delta: f64 },
    /// `−iεZ[a† + a, ·]` — Z-gate drive.
    ZGate { epsilon_z: f64 },
    /// `κ D[a†^m a^n]` — generic monomial dissipator.
    GenericDissipator { m: u32, n: u32, kappa: f64 },
    /// `−i·strength·[V, ·]` — arbitrary Hermitian perturbation.
    GenericHamiltonian { v: OperatorMatrix, strength: f64 },
}

impl PerturbationSpec {
    /// Validate strengths and exponents.
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, k: f64| -> Result<()> {
            if k < 0.0 || !k.is_finite() {
                return Err(CoreError::DomainError {
                    context: format!("dissipator strength {name} must be >= 0, got {k}"),
                });
            }
            Ok(())
        };
        match self {
            Self::PhotonLoss { kappa1 } => nonneg("kappa1", *kappa1),
            Self::PhotonGain { kappa } => nonneg("kappa", *kappa),
            Self::Dephasing { kappa_phi } => nonneg("kappa_phi", *kappa_phi),
            Self::Detuning { delta } => {
                if !delta.is_finite() {
                    return Err(CoreError::DomainError {
                        context: "detuning must be finite".into(),
                    });
                }
                Ok(())
            }
            Self::ZGate { epsilon_z } => nonneg("epsilon_z", *epsilon_z),
            Self::GenericDissipator { m, n, kappa } => {
                if *m == 0 && *n == 0 {
                    return Err(CoreError::DomainError {
                        context: "generic dissipator needs (m, n) != (0, 0)".into(),
                    });
                }
                nonneg("kappa", *kappa)
            }
            Self::GenericHamiltonian { strength, .. } => {
                if !strength.is_finite() {
                    return Err(CoreError::DomainError {
                        context: "Hamiltonian strength must be finite".into(),
                    });
                }
                Ok(())
            }
        }
    }
}

fn matrix_power(m: &OperatorMatrix, p: u32) -> OperatorMatrix {
    let mut out = Array2::eye(m.nrows());
    for _ in 0..p {
        out = out.dot(m);
    }
    out
}

/// Assemble the perturbation generator `L1` for a spec.
pub fn perturbation_superop(
    space: &FockSpace,
    _alpha: f64,
    spec: &PerturbationSpec,
) -> Result<Superoperator> {
    spec.validate()?;
    let a = space.annihilation();
    let adag = space.creation();
    match spec {
        PerturbationSpec::PhotonLoss { kappa1 } => Ok(dissipator_superop(&a)?.scaled(*kappa1)),
        PerturbationSpec::PhotonGain { kappa } => Ok(dissipator_superop(&adag)?.scaled(*kappa)),
        PerturbationSpec::Dephasing { kappa_phi } => {
            Ok(dissipator_superop(&space.number())?.scaled(*kappa_phi))
        }
        PerturbationSpec::Detuning { delta } => hamiltonian_superop(&space.number(), *delta),
        PerturbationSpec::ZGate { epsilon_z } => {
            hamiltonian_superop(&(&a + &adag), *epsilon_z)
        }
        PerturbationSpec::GenericDissipator { m, n, kappa } => {
            let l = matrix_power(&adag, *m).dot(&matrix_power(&a, *n));
            Ok(dissipator_superop(&l)?.scaled(*kappa))
        }
        PerturbationSpec::GenericHamiltonian { v, strength } => hamiltonian_superop(v, *strength),
    }
}

// ---------------------------------------------------------------------------
// Cat basis: right family, invariants, projector.

/// Everything attached to the cat manifold at one `(α, dim)`: the cat and
/// computational kets, the Bloch-axis operators, and the invariants
/// (left null vectors of `L0`) `ς0^{σσ'}` with their normalization
/// `N0 = √(2α²/sinh 2α²)`.
#[derive(Debug, Clone)]
pub struct CatBasis {
    pub space: FockSpace,
    pub alpha: f64,
    pub cat_even: Ket,
    pub cat_odd: Ket,
    pub zero_c: Ket,
    pub one_c: Ket,
    pub bloch: crate::fock_core::BlochOperators,
    pub sigma_pp: OperatorMatrix,
    pub sigma_mm: OperatorMatrix,
    pub sigma_pm: OperatorMatrix,
    pub sigma_mp: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub n0: f64,
}

impl CatBasis {
    /// The right stationary family member `|C^σ⟩⟨C^σ'|`.
    pub fn cat_dyad(&self, sigma: Parity, sigma_prime: Parity) -> OperatorMatrix {
        let bra = match sigma_prime {
            Parity::Even => &self.cat_even,
            Parity::Odd => &self.cat_odd,
        };
        let ket = match sigma {
            Parity::Even => &self.cat_even,
            Parity::Odd => &self.cat_odd,
        };
        outer(ket, bra)
    }

    /// The invariant `ς0^{σσ'}` paired with [`CatBasis::cat_dyad`] under
    /// `Tr(ς0^{σσ'} |C^σ1⟩⟨C^σ1'|) = δ_{σσ1} δ_{σ'σ1'}`.
    pub fn invariant(&self, sigma: Parity, sigma_prime: Parity) -> &OperatorMatrix {
        match (sigma, sigma_prime) {
            (Parity::Even, Parity::Even) => &self.sigma_pp,
            (Parity::Odd, Parity::Odd) => &self.sigma_mm,
            (Parity::Even, Parity::Odd) => &self.sigma_pm,
            (Parity::Odd, Parity::Even) => &self.sigma_mp,
        }
    }
}

/// `Tr(A·B)` without forming the product.
pub fn trace_prod(a: &OperatorMatrix, b: &OperatorMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[[i, j]] * b[[j, i]];
        }
    }
    acc
}

/// Build the invariants of `L0` at the given space.
///
/// `ς0^{++}` and `ς0^{−−}` are the even/odd Fock projectors.  `ς0^{+−}`
/// is assembled entrywise: the operator is a double sum of
/// `a†^{2n+1}|0⟩⟨0|a^{2m}` terms, and each such term touches exactly one
/// matrix entry `(2n+1, 2m)`, so the truncated matrix is *entrywise exact*
/// — extending the sum ranges only adds entries outside the cutoff.  Each
/// entry combines the normalization, a scaled Bessel factor
/// `e^{−α²} I_{n−m}(α²)`, and factorial weights, all in log space:
///
/// `ς0^{+−}[2n+1, 2m] = N0 (−1)^{n−m}/(2n+1−2m) ·
///    exp[α² + ln(e^{−α²}I_{n−m}(α²)) + ½lnΓ(2n+2) + ½lnΓ(2m+1)
///        − n ln2 − lnΓ(n+1) − m ln2 − lnΓ(m+1)]`.
pub fn invariants(space: &FockSpace, alpha: f64) -> Result<CatBasis> {
    let d = space.dim;
    let a2 = alpha * alpha;
    let n0 = (2.0 * a2 * inv_sinh(2.0 * a2)?).sqrt();
    let ln_n0 = n0.ln();

    let mut spm = Array2::<C64>::zeros((d, d));
    let ln2 = std::f64::consts::LN_2;
    for n in 0..=(d.saturating_sub(2)) / 2 {
        for m in 0..=(d - 1) / 2 {
            if 2 * m >= d || 2 * n + 1 >= d {
                continue;
            }
            let k = n as i64 - m as i64;
            let biv = bessel_i_scaled(k, a2)?;
            if biv <= 0.0 {
                continue;
            }
            let ln_mag = ln_n0
                + a2
                + biv.ln()
                + 0.5 * log_factorial(2 * n as u64 + 1)
                + 0.5 * log_factorial(2 * m as u64)
                - (n as f64 * ln2 + log_factorial(n as u64))
                - (m as f64 * ln2 + log_factorial(m as u64));
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let denom = (2 * n + 1) as f64 - (2 * m) as f64;
            spm[[2 * n + 1, 2 * m]] = C64::new(sign / denom * ln_mag.exp(), 0.0);
        }
    }
    let smp = dagger(&spm);
    let sigma_z = (&spm + &smp).mapv(|c| c * 0.5);

    let sigma_pp = Array2::from_diag(&Array1::from_iter(
        (0..d).map(|i| C64::new(if i % 2 == 0 { 1.0 } else { 0.0 }, 0.0)),
    ));
    let sigma_mm = Array2::from_diag(&Array1::from_iter(
        (0..d).map(|i| C64::new(if i % 2 == 1 { 1.0 } else { 0.0 }, 0.0)),
    ));

    let cat_even = space.cat_state(alpha, Parity::Even)?;
    let cat_odd = space.cat_state(alpha, Parity::Odd)?;
    let (zero_c, one_c) = space.computational_states(alpha)?;
    let bloch = space.bloch_operators(alpha)?;

    Ok(CatBasis {
        space: *space,
        alpha,
        cat_even,
        cat_odd,
        zero_c,
        one_c,
        bloch,
        sigma_pp,
        sigma_mm,
        sigma_pm: spm,
        sigma_mp: smp,
        sigma_z,
        n0,
    })
}

/// Closed-form coherent-basis matrix element of the invariant:
/// `⟨χ| ς0^{+−} |φ⟩ = (−i N0 χ̄ / 2) ∫₀^π dθ e^{iθ}
///   I₀(√((α² − φ² e^{−2iθ})(α² − χ̄² e^{2iθ})))`
/// in the unnormalized coherent basis, by adaptive quadrature.  The Bessel
/// factor is evaluated as the entire series in the product under the root,
/// so no branch choice is involved.
pub fn invariant_coherent_element(alpha: f64, chi_bar: f64, phi: f64) -> Result<C64> {
    let a2 = alpha * alpha;
    if (alpha * chi_bar).abs() > crate::kerr_spectrum::ELEMENT_ARG_LIMIT
        || (alpha * phi).abs() > crate::kerr_spectrum::ELEMENT_ARG_LIMIT
    {
        return Err(CoreError::OverflowGuard {
            what: "invariant_coherent_element argument",
            value: (alpha * chi_bar).abs().max((alpha * phi).abs()),
        });
    }
    let n0 = (2.0 * a2 * inv_sinh(2.0 * a2)?).sqrt();
    let f = |theta: f64| -> C64 {
        let e_m = C64::from_polar(1.0, -2.0 * theta);
        let e_p = C64::from_polar(1.0, 2.0 * theta);
        let u = (C64::new(a2, 0.0) - phi * phi * e_m) * (C64::new(a2, 0.0) - chi_bar * chi_bar * e_p);
        C64::from_polar(1.0, theta) * bessel_i0_of_square(u)
    };
    let integral = adaptive_simpson_complex(&f, 0.0, std::f64::consts::PI, 1e-12, 1e-12, 20)?;
    Ok(C64::new(0.0, -1.0) * n0 * chi_bar / 2.0 * integral)
}

/// `I₀(√u)` as the entire series `Σ_k (u/4)^k / (k!)²`.
fn bessel_i0_of_square(u: C64) -> C64 {
    let q = u / 4.0;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..=400u32 {
        term = term * q / ((k * k) as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// Project onto the slow manifold:
/// `P∥ρ = Σ_{σσ'} |C^σ⟩⟨C^σ'| · Tr(ς0^{σσ'} ρ)`.
pub fn project_parallel(rho: &OperatorMatrix, basis: &CatBasis) -> Result<OperatorMatrix> {
    let d = basis.space.dim;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(CoreError::DimensionMismatch {
            context: format!("project_parallel: operator is {}x{}, basis dim {d}", rho.nrows(), rho.ncols()),
        });
    }
    let mut out = Array2::<C64>::zeros((d, d));
    for sigma in [Parity::Even, Parity::Odd] {
        for sigma_prime in [Parity::Even, Parity::Odd] {
            let weight = trace_prod(basis.invariant(sigma, sigma_prime), rho);
            let dyad = basis.cat_dyad(sigma, sigma_prime);
            out.zip_mut_with(&dyad, |o, &dd| *o += weight * dd);
        }
    }
    Ok(out)
}

/// Complement of [`project_parallel`].
pub fn project_perp(rho: &OperatorMatrix, basis: &CatBasis) -> Result<OperatorMatrix> {
    Ok(rho - &project_parallel(rho, basis)?)
}

// ---------------------------------------------------------------------------
// Leakage diagnostics.

/// Leakage of a state: population outside the two-dimensional cat
/// subspace, `l = 1 − Σ_σ ⟨C^σ|ρ|C^σ⟩`.
#[derive(Debug, Clone, Copy)]
pub struct LeakageReport {
    pub l_value: f64,
    pub first_order_rate: f64,
    pub second_order_curvature: f64,
}

pub(crate) fn validate_density(rho: &OperatorMatrix) -> Result<()> {
    let dev = (rho - &dagger(rho)).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dev > DENSITY_TOL {
        return Err(CoreError::NotHermitian { deviation: dev });
    }
    let tr: C64 = (0..rho.nrows()).map(|i| rho[[i, i]]).sum();
    if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(CoreError::DomainError {
            context: format!("density matrix trace {tr} is not 1 within {DENSITY_TOL:e}"),
        });
    }
    Ok(())
}

/// `Σ_σ ⟨C^σ|X|C^σ⟩` — the trace restricted to the cat subspace.
pub fn cat_subspace_trace(x: &OperatorMatrix, basis: &CatBasis) -> f64 {
    let mut acc = 0.0;
    for cat in [&basis.cat_even, &basis.cat_odd] {
        let mut val = C64::new(0.0, 0.0);
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                val += cat[i].conj() * x[[i, j]] * cat[j];
            }
        }
        acc += val.re;
    }
    acc
}

/// Leakage `l(ρ) = 1 − Σ_σ ⟨C^σ|ρ|C^σ⟩` of a validated density matrix.
pub fn leakage(rho: &OperatorMatrix, basis: &CatBasis) -> Result<f64> {
    validate_density(rho)?;
    Ok(1.0 - cat_subspace_trace(rho, basis))
}

fn check_computational(rho0: &OperatorMatrix, basis: &CatBasis) -> Result<()> {
    for ket in [&basis.zero_c, &basis.one_c] {
        let proj = outer(ket, ket);
        let dev = (rho0 - &proj).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if dev < 1e-9 {
            return Ok(());
        }
    }
    Err(CoreError::PreconditionViolated {
        context: "leakage-rate formulas require the initial state |0c⟩⟨0c| or |1c⟩⟨1c|".into(),
    })
}

/// First-order leakage rate `−Σ_σ ⟨C^σ| (L1 ρ0) |C^σ⟩` out of a
/// computational pure state.  Vanishes for every Hamiltonian perturbation
/// and for photon loss; strictly positive for photon gain.
pub fn first_order_leakage_rate(
    spec: &PerturbationSpec,
    rho0: &OperatorMatrix,
    basis: &CatBasis,
) -> Result<f64> {
    check_computational(rho0, basis)?;
    let l1 = perturbation_superop(&basis.space, basis.alpha, spec)?;
    Ok(-cat_subspace_trace(&l1.apply(rho0)?, basis))
}

/// Second-order leakage coefficient `−Σ_σ ⟨C^σ| (L1² ρ0) |C^σ⟩`; the
/// early-time leakage grows as this value times `δt²/2`.  Only defined
/// when the first-order rate vanishes.
pub fn second_order_leakage_curvature(
    spec: &PerturbationSpec,
    rho0: &OperatorMatrix,
    basis: &CatBasis,
) -> Result<f64> {
    let first = first_order_leakage_rate(spec, rho0, basis)?;
    if first.abs() > LEAKAGE_THRESHOLD {
        return Err(CoreError::PreconditionViolated {
            context: format!(
                "second-order leakage formula needs vanishing first-order rate, got {first:.3e}"
            ),
        });
    }
    let l1 = perturbation_superop(&basis.space, basis.alpha, spec)?;
    let once = l1.apply(rho0)?;
    let twice = l1.apply(&once)?;
    Ok(-cat_subspace_trace(&twice, basis))
}
