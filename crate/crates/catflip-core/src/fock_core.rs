//! Truncated Fock-space linear algebra.
//!
//! Everything downstream works in the number basis `|0⟩ … |dim−1⟩` of a
//! single bosonic mode: ladder operators, coherent states (normalized and
//! unnormalized), even/odd cat states, the computational basis built from
//! them, and the Bloch-axis operators of the cat manifold.  Amplitudes are
//! assembled in log space so that large photon numbers never overflow.

use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};
use crate::special_functions::log_factorial;
use crate::C64;

/// State vector on the truncated Fock space.
pub type Ket = Array1<C64>;
/// Dense operator on the truncated Fock space.
pub type OperatorMatrix = Array2<C64>;

/// Photon-number parity label (eigenvalue of `(−1)^{a†a}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even, `−1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Cat-state size below which the encoding is rejected everywhere: the
/// normalization `1 − e^{−2α²}` becomes ill-conditioned and the two coherent
/// components are no longer meaningfully separated.
pub const MIN_ALPHA2: f64 = 0.05;

/// Photon-number cutoff sufficient for cat-qubit computations at mean
/// photon number `alpha2`: `max(20, ⌈α² + 8√(α²+1) + 8⌉)`.  The margin of
/// eight Poisson standard deviations pushes truncation-tail effects far
/// below every tolerance used in this crate; top-level results are
/// additionally re-run at `dim + 10` to confirm convergence.
pub fn recommended_dim(alpha2: f64) -> usize {
    let d = (alpha2 + 8.0 * (alpha2 + 1.0).sqrt() + 8.0).ceil() as usize;
    d.max(20)
}

/// Truncated oscillator Hilbert space with basis `|0⟩ … |dim−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub dim: usize,
}

impl FockSpace {
    /// A space with explicit cutoff; at least four levels are required for
    /// the operators built here to make sense.
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 4 {
            return Err(CoreError::PreconditionViolated {
                context: format!("FockSpace requires dim >= 4, got {dim}"),
            });
        }
        Ok(Self { dim })
    }

    /// A space sized by [`recommended_dim`] for the given cat size.
    pub fn for_alpha2(alpha2: f64) -> Result<Self> {
        if alpha2 < MIN_ALPHA2 {
            return Err(CoreError::DegenerateCat { alpha2 });
        }
        Self::new(recommended_dim(alpha2))
    }

    /// Annihilation operator, `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(&self) -> OperatorMatrix {
        let mut a = Array2::zeros((self.dim, self.dim));
        for n in 1..self.dim {
            a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// Creation operator `a†`.
    pub fn creation(&self) -> OperatorMatrix {
        dagger(&self.annihilation())
    }

    /// The pair `(a, a†)`.  The top-left `(dim−1)×(dim−1)` block of their
    /// commutator is the identity; only the last diagonal entry feels the
    /// truncation.
    pub fn ladder_ops(&self) -> (OperatorMatrix, OperatorMatrix) {
        let a = self.annihilation();
        let adag = dagger(&a);
        (a, adag)
    }

    /// Number operator `a†a = diag(0, 1, …)`.
    pub fn number(&self) -> OperatorMatrix {
        Array2::from_diag(&Array1::from_iter(
            (0..self.dim).map(|n| C64::new(n as f64, 0.0)),
        ))
    }

    /// Identity operator.
    pub fn identity(&self) -> OperatorMatrix {
        Array2::eye(self.dim)
    }

    /// Photon-number parity operator `(−1)^{a†a} = diag(+1, −1, +1, …)`.
    pub fn parity_op(&self) -> OperatorMatrix {
        Array2::from_diag(&Array1::from_iter((0..self.dim).map(|n| {
            C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })))
    }

    /// Coherent state with amplitude `beta`.
    ///
    /// * `normalized`: amplitudes `e^{−|β|²/2} βⁿ/√(n!)`; the truncated
    ///   vector must carry all but `1e−12` of the probability mass.
    /// * unnormalized: amplitudes `βⁿ/√(n!)`, the analytic basis in which
    ///   the closed-form matrix elements of [`crate::kerr_spectrum`] live
    ///   (overlaps `⟨χ|φ⟩ = e^{χ̄φ}`).
    pub fn coherent_state(&self, beta: C64, normalized: bool) -> Result<Ket> {
        let beta2 = beta.norm_sqr();
        if beta2 > self.dim as f64 / 4.0 {
            return Err(CoreError::TruncationError {
                context: format!(
                    "coherent amplitude |beta|^2 = {beta2:.3} exceeds dim/4 = {}",
                    self.dim as f64 / 4.0
                ),
            });
        }
        let mut v: Ket = Array1::zeros(self.dim);
        if beta.norm() == 0.0 {
            v[0] = C64::new(1.0, 0.0);
            return Ok(v);
        }
        let log_r = beta.norm().ln();
        let theta = beta.arg();
        let offset = if normalized { -0.5 * beta2 } else { 0.0 };
        for n in 0..self.dim {
            let log_mag = offset + n as f64 * log_r - 0.5 * log_factorial(n as u64);
            v[n] = C64::from_polar(log_mag.exp(), n as f64 * theta);
        }
        if normalized {
            let tail = 1.0 - v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            if tail > 1e-12 {
                return Err(CoreError::TruncationError {
                    context: format!(
                        "coherent-state tail mass {tail:.3e} beyond dim = {} exceeds 1e-12",
                        self.dim
                    ),
                });
            }
        }
        Ok(v)
    }

    /// Normalized cat state `(|α⟩ ± |−α⟩)/√(2(1 ± e^{−2α²}))`.
    ///
    /// The even (`+`) cat has support only on even Fock levels and the odd
    /// (`−`) cat only on odd levels.  Since `|−α⟩` differs from `|α⟩` only
    /// by signs `(−1)^n`, the superposition is computed as a parity
    /// projection of `|α⟩`, which makes that sparsity exact in floating
    /// point (no `cos(nπ)` round-off).
    pub fn cat_state(&self, alpha: f64, parity: Parity) -> Result<Ket> {
        if alpha * alpha < MIN_ALPHA2 {
            return Err(CoreError::DegenerateCat {
                alpha2: alpha * alpha,
            });
        }
        let mut v = self.coherent_state(C64::new(alpha, 0.0), true)?;
        let kill_from = match parity {
            Parity::Even => 1,
            Parity::Odd => 0,
        };
        for n in (kill_from..self.dim).step_by(2) {
            v[n] = C64::new(0.0, 0.0);
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.mapv_inplace(|c| c / norm);
        Ok(v)
    }

    /// Computational basis `|0c⟩ = (|C+⟩+|C−⟩)/√2`, `|1c⟩ = (|C+⟩−|C−⟩)/√2`;
    /// for large cats these approach `|±α⟩`.
    pub fn computational_states(&self, alpha: f64) -> Result<(Ket, Ket)> {
        let even = self.cat_state(alpha, Parity::Even)?;
        let odd = self.cat_state(alpha, Parity::Odd)?;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let zero = (&even + &odd).mapv(|c| c * inv_sqrt2);
        let one = (&even - &odd).mapv(|c| c * inv_sqrt2);
        Ok((zero, one))
    }

    /// Bloch-axis operators of the cat manifold, expressed through the
    /// parity cats:
    ///
    /// * `i = |C+⟩⟨C+| + |C−⟩⟨C−|` (manifold identity, trace 2),
    /// * `x = |C+⟩⟨C+| − |C−⟩⟨C−|`,
    /// * `y = i(|C+⟩⟨C−| − |C−⟩⟨C+|)`,
    /// * `z = |C+⟩⟨C−| + |C−⟩⟨C+| = |0c⟩⟨0c| − |1c⟩⟨1c|`.
    pub fn bloch_operators(&self, alpha: f64) -> Result<BlochOperators> {
        let even = self.cat_state(alpha, Parity::Even)?;
        let odd = self.cat_state(alpha, Parity::Odd)?;
        let pp = outer(&even, &even);
        let mm = outer(&odd, &odd);
        let pm = outer(&even, &odd);
        let mp = outer(&odd, &even);
        let i_unit = C64::new(0.0, 1.0);
        Ok(BlochOperators {
            i: &pp + &mm,
            x: &pp - &mm,
            y: (&pm - &mp).mapv(|c| c * i_unit),
            z: &pm + &mp,
        })
    }
}

/// The four Bloch-axis operators spanning the cat manifold (all Hermitian).
#[derive(Debug, Clone)]
pub struct BlochOperators {
    pub i: OperatorMatrix,
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

/// Conjugate transpose.
pub fn dagger(m: &OperatorMatrix) -> OperatorMatrix {
    m.t().mapv(|c| c.conj())
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &Ket, v: &Ket) -> OperatorMatrix {
    let n = u.len();
    Array2::from_shape_fn((n, n), |(i, j)| u[i] * v[j].conj())
}

/// Inner product `⟨u|v⟩`.
pub fn inner(u: &Ket, v: &Ket) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_spaces() {
        assert!(FockSpace::new(3).is_err());
        assert!(FockSpace::new(4).is_ok());
    }

    #[test]
    fn recommended_dim_floor() {
        assert_eq!(recommended_dim(0.1), 20);
        assert!(recommended_dim(6.0) >= 36);
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let space = FockSpace::new(8).unwrap();
        let v = space.coherent_state(C64::new(0.0, 0.0), true).unwrap();
        assert_eq!(v[0], C64::new(1.0, 0.0));
        assert!(v.iter().skip(1).all(|c| c.norm() == 0.0));
    }
}
