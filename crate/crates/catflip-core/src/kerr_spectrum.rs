//! The auxiliary Kerr Hamiltonian `H = (a†² − α²)(a² − α²)` and its inverse
//! off the cat manifold.
//!
//! `H` is Hermitian, positive semidefinite, and commutes with photon-number
//! parity; its two zero modes are exactly the cat states.  Every
//! second-order rate in this crate reduces to matrix elements of the
//! pseudo-inverse `H⊥^{−1}` (the inverse restricted off the zero modes).
//! Two independent routes to those elements are kept side by side:
//!
//! * **Eigensum** — diagonalize `H` per parity sector and sum
//!   `Σ_{l>0} |ψ_l⟩⟨ψ_l| / μ_l`;
//! * **Closed form** — the analytic kernel `⟨χ| H⊥^{−1} |φ⟩` in the basis
//!   of unnormalized coherent states, built from the complementary
//!   exponential integral, together with the Green's function it solves.
//!
//! The scalar kernels `S1`, `S2` through which all second-order rates are
//! expressed are provided by both routes as well.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{CoreError, Result};
use crate::fock_core::{recommended_dim, FockSpace, Ket, OperatorMatrix, Parity};
use crate::special_functions::{
    chin, coth_minus_one, ein, ein_derivative, inv_sinh, inv_sinh_sq, shi,
};
use crate::C64;

/// Eigenvalues below this are treated as zero modes (the cat states);
/// exactly one is expected per parity sector.
pub const ZERO_MODE_FLOOR: f64 = 1e-8;

/// Guard on `|α·χ̄|` and `|α·φ|` in the closed-form kernel; beyond this the
/// intermediate exponentials leave double range.
pub const ELEMENT_ARG_LIMIT: f64 = 170.0;

/// `H = (a†² − α²)(a² − α²)` as a dense operator.
pub fn kerr_hamiltonian(space: &FockSpace, alpha: f64) -> OperatorMatrix {
    kerr_hamiltonian_real(space, alpha).mapv(|x| C64::new(x, 0.0))
}

/// Real symmetric representation of `H` (all Fock-basis entries are real
/// for real `α`); the eigensolver works on this form sector by sector.
fn kerr_hamiltonian_real(space: &FockSpace, alpha: f64) -> Array2<f64> {
    let d = space.dim;
    let a2 = alpha * alpha;
    // b = a² − α², dense real.
    let mut b = Array2::<f64>::zeros((d, d));
    for n in 2..d {
        b[[n - 2, n]] = ((n * (n - 1)) as f64).sqrt();
    }
    for n in 0..d {
        b[[n, n]] -= a2;
    }
    let bt = b.t().to_owned();
    bt.dot(&b)
}

/// One parity sector of the Kerr eigensystem: ascending eigenvalues and
/// the corresponding eigenkets embedded in the full Fock space (their
/// entries are real; the sector parity fixes their sparsity pattern).
#[derive(Debug, Clone)]
pub struct SectorEigensystem {
    pub parity: Parity,
    pub eigenvalues: Array1<f64>,
    /// `dim × n_sector`; column `l` is `ψ_l` embedded in the full space.
    pub eigenkets: Array2<f64>,
}

/// Parity-resolved eigensystem of the Kerr Hamiltonian.
#[derive(Debug, Clone)]
pub struct KerrEigensystem {
    pub alpha: f64,
    pub dim: usize,
    pub even: SectorEigensystem,
    pub odd: SectorEigensystem,
}

/// Diagonalize `H` on the even and odd Fock sub-blocks separately.
///
/// Fails with `EigensolverFailure` if the dense solver does not converge or
/// if a sector does not contain exactly one zero mode below
/// [`ZERO_MODE_FLOOR`].
pub fn eigensystem(space: &FockSpace, alpha: f64) -> Result<KerrEigensystem> {
    let h = kerr_hamiltonian_real(space, alpha);
    let even = sector_eigensystem(&h, space.dim, Parity::Even)?;
    let odd = sector_eigensystem(&h, space.dim, Parity::Odd)?;
    Ok(KerrEigensystem {
        alpha,
        dim: space.dim,
        even,
        odd,
    })
}

fn sector_eigensystem(
    h: &Array2<f64>,
    dim: usize,
    parity: Parity,
) -> Result<SectorEigensystem> {
    let start = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let idx: Vec<usize> = (start..dim).step_by(2).collect();
    let k = idx.len();
    let block = Array2::from_shape_fn((k, k), |(i, j)| h[[idx[i], idx[j]]]);
    let (w, u) = block.eigh(UPLO::Lower).map_err(|e| CoreError::EigensolverFailure {
        context: format!("Kerr sector diagonalization failed: {e}"),
    })?;
    let zero_modes = w.iter().filter(|&&mu| mu.abs() < ZERO_MODE_FLOOR).count();
    if zero_modes != 1 {
        return Err(CoreError::EigensolverFailure {
            context: format!(
                "expected exactly one Kerr zero mode per parity sector, found {zero_modes} \
                 (parity {parity:?}, dim {dim})"
            ),
        });
    }
    let mut eigenkets = Array2::<f64>::zeros((dim, k));
    for (i, &fock_index) in idx.iter().enumerate() {
        for l in 0..k {
            eigenkets[[fock_index, l]] = u[[i, l]];
        }
    }
    Ok(SectorEigensystem {
        parity,
        eigenvalues: w,
        eigenkets,
    })
}

impl SectorEigensystem {
    /// Eigenket `ψ_l` as a complex vector in the full space.
    pub fn ket(&self, l: usize) -> Ket {
        self.eigenkets.column(l).mapv(|x| C64::new(x, 0.0))
    }
}

impl KerrEigensystem {
    pub fn sector(&self, parity: Parity) -> &SectorEigensystem {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// Apply `H⊥^{−1} = Σ_{l>0,σ} |ψ_lσ⟩⟨ψ_lσ| / μ_lσ`: project out the
    /// zero modes, weight everything else by the inverse eigenvalue.
    pub fn inverse_perp_apply(&self, v: &Ket) -> Ket {
        let mut out: Ket = Array1::zeros(self.dim);
        for sector in [&self.even, &self.odd] {
            for l in 1..sector.eigenvalues.len() {
                let psi = sector.eigenkets.column(l);
                let amp: C64 = psi.iter().zip(v.iter()).map(|(&p, &vi)| vi * p).sum();
                let weight = amp / sector.eigenvalues[l];
                for (o, &p) in out.iter_mut().zip(psi.iter()) {
                    *o += weight * p;
                }
            }
        }
        out
    }
}

/// Green's function of the one-dimensional boundary-value problem solved by
/// the inverse Kerr kernel:
/// `g(χ,t) = [cosh(α(t+χ)) − cosh(α(|t−χ| − 2α))] / (2α sinh 2α²)`,
/// defined on the square `−α ≤ χ, t ≤ α` and vanishing on its boundary.
pub fn greens_function(alpha: f64, chi: f64, t: f64) -> Result<f64> {
    let a2 = alpha * alpha;
    if a2 > ELEMENT_ARG_LIMIT {
        return Err(CoreError::OverflowGuard {
            what: "greens_function alpha^2",
            value: a2,
        });
    }
    let slack = 1e-12 * (1.0 + alpha);
    if chi < -alpha - slack || chi > alpha + slack || t < -alpha - slack || t > alpha + slack {
        return Err(CoreError::DomainError {
            context: format!("greens_function needs -alpha <= chi,t <= alpha; got chi={chi}, t={t}, alpha={alpha}"),
        });
    }
    let num = (alpha * (t + chi)).cosh() - (alpha * ((t - chi).abs() - 2.0 * alpha)).cosh();
    Ok(num / (2.0 * alpha * (2.0 * a2).sinh()))
}

// ---------------------------------------------------------------------------
// Closed-form kernel, evaluated generically so the same transcription yields
// values and analytic derivatives.

/// Scalar abstraction over which the closed-form kernel is written once:
/// instantiated at `f64` for plain values and at [`Dual2`] for first and
/// mixed second derivatives in `(χ̄, φ)`.
trait KernelScalar: Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn constant(x: f64) -> Self;
    fn scale(self, c: f64) -> Self;
    fn exp(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
    fn ein(self) -> Result<Self>;
}

impl KernelScalar for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn ein(self) -> Result<Self> {
        Ok(ein(self)?.value)
    }
}

/// Second-order truncated dual number carrying two first-order directions
/// (`dx` along `χ̄`, `dy` along `φ`) and the mixed second component `dxy`.
#[derive(Debug, Clone, Copy)]
struct Dual2 {
    v: f64,
    dx: f64,
    dy: f64,
    dxy: f64,
}

impl Dual2 {
    fn seed_x(x: f64) -> Self {
        Self { v: x, dx: 1.0, dy: 0.0, dxy: 0.0 }
    }
    fn seed_y(y: f64) -> Self {
        Self { v: y, dx: 0.0, dy: 1.0, dxy: 0.0 }
    }
    /// Chain rule through a scalar function with derivatives `f'`, `f''`.
    fn lift(self, f: f64, fp: f64, fpp: f64) -> Self {
        Self {
            v: f,
            dx: fp * self.dx,
            dy: fp * self.dy,
            dxy: fpp * self.dx * self.dy + fp * self.dxy,
        }
    }
}

impl std::ops::Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxy: self.dxy + o.dxy,
        }
    }
}

impl std::ops::Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxy: self.dxy - o.dxy,
        }
    }
}

impl std::ops::Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.v * o.dx + self.dx * o.v,
            dy: self.v * o.dy + self.dy * o.v,
            dxy: self.v * o.dxy + self.dx * o.dy + self.dy * o.dx + self.dxy * o.v,
        }
    }
}

impl KernelScalar for Dual2 {
    fn constant(x: f64) -> Self {
        Self { v: x, dx: 0.0, dy: 0.0, dxy: 0.0 }
    }
    fn scale(self, c: f64) -> Self {
        Self { v: self.v * c, dx: self.dx * c, dy: self.dy * c, dxy: self.dxy * c }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.lift(e, e, e)
    }
    fn cosh(self) -> Self {
        self.lift(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }
    fn sinh(self) -> Self {
        self.lift(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }
    fn ein(self) -> Result<Self> {
        let f = ein(self.v)?.value;
        Ok(self.lift(f, ein_derivative(self.v), ein_second_derivative(self.v)))
    }
}

/// `d²/dx² Ein(x) = (e^{−x}(1+x) − 1)/x²`, with a series branch near 0.
fn ein_second_derivative(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        -0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0
    } else {
        ((-x).exp() * (1.0 + x) - 1.0) / (x * x)
    }
}

/// The closed-form kernel `F(χ̄, φ) = ⟨χ| H⊥^{−1} |φ⟩` in the unnormalized
/// coherent basis, written once over [`KernelScalar`].  Three groups of
/// terms: `t_a` carries `Ein(±4α²)` with the `1/sinh²(2α²)` weight, `t_b`
/// the single-variable `Ein` terms with `4/sinh(2α²)`, and `t_c` the
/// mixed-argument `Ein` terms; the whole sum is divided by `16α²`.
fn kernel_expression<S: KernelScalar>(alpha: f64, cb: S, ph: S) -> Result<S> {
    let a2 = alpha * alpha;
    let sh = (2.0 * a2).sinh();
    let ein_m4 = ein(-4.0 * a2)?.value;
    let ein_p4 = ein(4.0 * a2)?.value;

    let acb = cb.scale(alpha);
    let aph = ph.scale(alpha);
    let diff_cosh = (aph - acb).cosh();
    let sum_cosh = (acb + aph).cosh();

    let t_a = (diff_cosh.scale(4.0 * (-3.0 * a2).exp())
        - sum_cosh.scale(2.0 * (-5.0 * a2).exp() + 2.0 * (-a2).exp()))
    .scale(ein_m4)
        + (diff_cosh.scale(2.0 * a2.exp() + 2.0 * (5.0 * a2).exp())
            - sum_cosh.scale(4.0 * (3.0 * a2).exp()))
        .scale(ein_p4);
    let t_a = t_a.scale(1.0 / (sh * sh));

    let c_a2 = S::constant(a2);
    let e_m2 = (-2.0 * a2).exp();
    let e_p2 = (2.0 * a2).exp();
    // One addend per (±χ̄, ±φ) corner of the same structure.
    let pair = |sign_var: S, sinh_arg: S, shift: f64| -> Result<S> {
        let two_var = sign_var.scale(2.0);
        let low = ((S::constant(-shift) - two_var).ein()?).scale(e_m2);
        let high = ((S::constant(shift) - two_var).ein()?).scale(e_p2);
        let neg_var = S::constant(0.0) - sign_var;
        Ok(neg_var.exp() * sinh_arg.sinh() * (low - high))
    };
    let shift = 2.0 * a2;
    let t_b = (pair(acb, c_a2 + aph, shift)?
        + pair(S::constant(0.0) - acb, c_a2 - aph, shift)?
        + pair(aph, c_a2 + acb, shift)?
        + pair(S::constant(0.0) - aph, c_a2 - acb, shift)?)
    .scale(4.0 / sh);

    let cbph = cb * ph;
    let t_c = ((acb - aph).exp() * ((c_a2 + acb - aph - cbph).ein()?)
        + (aph - acb).exp() * ((c_a2 - acb + aph - cbph).ein()?))
    .scale(4.0 * a2.exp())
        - ((acb + aph).exp() * ((c_a2.scale(-1.0) + acb + aph - cbph).ein()?)
            + (S::constant(0.0) - acb - aph).exp()
                * ((c_a2.scale(-1.0) - acb - aph - cbph).ein()?))
        .scale(4.0 * (-a2).exp());

    Ok((t_a + t_b + t_c).scale(1.0 / (16.0 * a2)))
}

fn element_guard(alpha: f64, chi_bar: f64, phi: f64) -> Result<()> {
    if (alpha * chi_bar).abs() > ELEMENT_ARG_LIMIT {
        return Err(CoreError::OverflowGuard {
            what: "inverse_kerr_element alpha*chi_bar",
            value: alpha * chi_bar,
        });
    }
    if (alpha * phi).abs() > ELEMENT_ARG_LIMIT {
        return Err(CoreError::OverflowGuard {
            what: "inverse_kerr_element alpha*phi",
            value: alpha * phi,
        });
    }
    if 5.0 * alpha * alpha > 700.0 {
        return Err(CoreError::OverflowGuard {
            what: "inverse_kerr_element alpha^2",
            value: alpha * alpha,
        });
    }
    Ok(())
}

/// Closed-form `⟨χ| H⊥^{−1} |φ⟩` in the unnormalized coherent basis.
/// Symmetric under `χ̄ ↔ φ` and under joint sign flip; vanishes at
/// `χ̄ = ±α`.
pub fn inverse_kerr_element(alpha: f64, chi_bar: f64, phi: f64) -> Result<f64> {
    element_guard(alpha, chi_bar, phi)?;
    kernel_expression(alpha, chi_bar, phi)
}

/// Value and analytic derivatives of [`inverse_kerr_element`] with respect
/// to `χ̄`, `φ`, and both (the mixed second derivative carries the
/// `a†`-on-coherent-ket matrix elements).
#[derive(Debug, Clone, Copy)]
pub struct InverseKerrGrad {
    pub value: f64,
    pub d_chi_bar: f64,
    pub d_phi: f64,
    pub d_chi_bar_phi: f64,
}

/// Differentiate the closed-form kernel analytically (dual-number chain
/// rule through every term; no finite differences).
pub fn inverse_kerr_element_grad(alpha: f64, chi_bar: f64, phi: f64) -> Result<InverseKerrGrad> {
    element_guard(alpha, chi_bar, phi)?;
    let r = kernel_expression(alpha, Dual2::seed_x(chi_bar), Dual2::seed_y(phi))?;
    Ok(InverseKerrGrad {
        value: r.v,
        d_chi_bar: r.dx,
        d_phi: r.dy,
        d_chi_bar_phi: r.dxy,
    })
}

// ---------------------------------------------------------------------------
// S1 / S2 kernels.

/// Which route produced an [`S12Pair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S12Method {
    /// Sum over the Kerr eigensystem at finite truncation.
    Eigensum,
    /// Stabilized closed form in terms of `Shi`, `Chin`, `Ein`.
    ClosedForm,
}

/// The two scalar kernels through which every second-order rate in this
/// crate is expressed; both are negative for `α² ≳ 0.5`.
#[derive(Debug, Clone, Copy)]
pub struct S12Pair {
    pub s1: f64,
    pub s2: f64,
    pub method: S12Method,
}

/// Compute `S1`, `S2` by the requested route at the recommended truncation.
pub fn s1_s2(alpha: f64, method: S12Method) -> Result<S12Pair> {
    s1_s2_with_dim(alpha, recommended_dim(alpha * alpha), method)
}

/// Compute `S1`, `S2` at an explicit truncation (the closed form ignores
/// `dim`; the eigensum uses it, which is what convergence checks vary).
pub fn s1_s2_with_dim(alpha: f64, dim: usize, method: S12Method) -> Result<S12Pair> {
    let a2 = alpha * alpha;
    if a2 < crate::fock_core::MIN_ALPHA2 {
        return Err(CoreError::DegenerateCat { alpha2: a2 });
    }
    match method {
        S12Method::ClosedForm => s1_s2_closed_form(a2),
        S12Method::Eigensum => s1_s2_eigensum(alpha, dim),
    }
}

/// Stabilized closed forms.  Written with `c = coth(2α²) − 1` and
/// `Ein = Shi − Chin` so that no two exponentially large quantities are
/// ever subtracted:
///
/// * `S1 = α²/sinh²(2α²) · [Ein(4α²) − Shi(2α²) − c·Chin(4α²)]`
/// * `S2 = α²/sinh²(2α²) · [2c·Chin(4α²) − Ein(4α²)]`
///
/// The brackets each contain a single dominant term (`Shi(2α²)` resp. the
/// `O(1/α²)` pair), and the exponential smallness enters only through the
/// exact log-space prefactor.
fn s1_s2_closed_form(a2: f64) -> Result<S12Pair> {
    let c = coth_minus_one(2.0 * a2)?;
    let inv_sh2 = inv_sinh_sq(2.0 * a2)?;
    let ein4 = ein(4.0 * a2)?.value;
    let shi2 = shi(2.0 * a2)?.value;
    let chin4 = chin(4.0 * a2)?.value;
    let s1 = a2 * inv_sh2 * (ein4 - shi2 - c * chin4);
    let s2 = a2 * inv_sh2 * (2.0 * c * chin4 - ein4);
    Ok(S12Pair {
        s1,
        s2,
        method: S12Method::ClosedForm,
    })
}

/// Eigensum route: with `|v⟩ = H⊥^{−1} a†|α⟩` (normalized coherent state),
///
/// * `S1 = −α² e^{α²/2}/sinh(2α²) · Re(v₁ − α v₀)`
/// * `S2 = 2α²/sinh(2α²) · Re⟨−α| a |v⟩`
///
/// The Fock components `v₀`, `v₁` implement the `⟨0|…` and `⟨0|(a−α)…`
/// contractions of the analytic derivation exactly.
fn s1_s2_eigensum(alpha: f64, dim: usize) -> Result<S12Pair> {
    let space = FockSpace::new(dim)?;
    let a2 = alpha * alpha;
    let eig = eigensystem(&space, alpha)?;
    let a_op = space.annihilation();
    let adag = space.creation();
    let coh_p = space.coherent_state(C64::new(alpha, 0.0), true)?;
    let coh_m = space.coherent_state(C64::new(-alpha, 0.0), true)?;
    let v = eig.inverse_perp_apply(&adag.dot(&coh_p));
    let ish = inv_sinh(2.0 * a2)?;
    let s1 = (-a2) * (a2 / 2.0).exp() * ish * (v[1] - alpha * v[0]).re;
    let av = a_op.dot(&v);
    let s2 = 2.0 * a2 * ish * crate::fock_core::inner(&coh_m, &av).re;
    Ok(S12Pair {
        s1,
        s2,
        method: S12Method::Eigensum,
    })
}
