//! Cancellation-stable scalar kernels.
//!
//! The rate formulas in this crate combine hyperbolic integrals of
//! exponentially large arguments with prefactors that are exponentially
//! small.  Evaluated naively, those combinations lose every significant
//! digit above `alpha^2 ~ 8`.  This module provides the building blocks in
//! forms that never subtract large quantities:
//!
//! * `shi(x)`  — hyperbolic sine integral `∫₀ˣ sinh t / t dt`,
//! * `chin(x)` — entire part of the hyperbolic cosine integral,
//!   `∫₀ˣ (cosh t − 1)/t dt = Chi(x) − ln x − γ`,
//! * `ein(x)`  — complementary exponential integral `∫₀ˣ (1 − e^{−t})/t dt`,
//!   with `shi(x) − chin(x) = ein(x)` exactly,
//! * `coth_minus_one(w) = coth w − 1 = 2e^{−2w}/(1 − e^{−2w})`,
//! * `bessel_i_scaled(n, x) = e^{−x} I_n(x)` by two independent routes,
//! * log-factorials for log-space amplitude accounting.
//!
//! Functions report which evaluation branch produced the value so that
//! tolerance claims stay reproducible.

use crate::error::{CoreError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments beyond this trip the overflow guard (`sinh`/`exp` leave the
/// double-precision range around `x ~ 709`).
pub const OVERFLOW_LIMIT: f64 = 700.0;

/// Branch switchover between the small-argument series and the
/// large-argument evaluation.
pub const SERIES_LIMIT: f64 = 30.0;

/// Which evaluation branch produced a scalar value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    /// Convergent power series around the origin.
    Series,
    /// Large-argument branch (exponentially dominated regime).
    Asymptotic,
    /// Adaptive quadrature of an integral representation.
    Quadrature,
}

/// A scalar result together with the branch that produced it.
#[derive(Debug, Clone, Copy)]
pub struct SpecialValue {
    pub value: f64,
    pub method: MethodTag,
}

fn guard(what: &'static str, x: f64, limit: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > limit {
        return Err(CoreError::OverflowGuard { what, value: x });
    }
    Ok(())
}

/// Kahan-compensated accumulator; the series below add up to ~1000 terms of
/// the same sign and we promise 1e-12 relative accuracy.
#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Hyperbolic sine integral `Shi(x) = ∫₀ˣ sinh t / t dt`, `x ≥ 0`.
pub fn shi(x: f64) -> Result<SpecialValue> {
    guard("shi argument", x, OVERFLOW_LIMIT)?;
    if x < 0.0 {
        return Err(CoreError::DomainError {
            context: format!("shi requires x >= 0, got {x}"),
        });
    }
    if x < SERIES_LIMIT {
        Ok(SpecialValue {
            value: shi_series(x),
            method: MethodTag::Series,
        })
    } else {
        Ok(SpecialValue {
            value: shi_large(x),
            method: MethodTag::Asymptotic,
        })
    }
}

/// Small-argument branch of [`shi`]: `Σ_{k≥0} x^{2k+1} / ((2k+1)·(2k+1)!)`.
/// All terms are positive, so there is no cancellation.  Public so the
/// branch-continuity battery can compare both branches on both sides of the
/// switchover.
pub fn shi_series(x: f64) -> f64 {
    let mut acc = Kahan::default();
    // p = x^{2k+1} / (2k+1)!
    let mut p = x;
    let mut k = 0u32;
    loop {
        let term = p / (2 * k + 1) as f64;
        acc.add(term);
        if term < acc.sum * 1e-17 || term == 0.0 {
            break;
        }
        p *= x * x / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
        k += 1;
        if k > 1000 {
            break;
        }
    }
    acc.sum
}

/// Large-argument branch of [`shi`]: `(Ei(x) + E1(x)) / 2`, with `Ei` from
/// its positive-term series and `E1` from a continued fraction.
pub fn shi_large(x: f64) -> f64 {
    0.5 * (ei_positive(x) + e1_continued_fraction(x))
}

/// Entire hyperbolic cosine integral `Chin(x) = ∫₀ˣ (cosh t − 1)/t dt`,
/// `x ≥ 0`.  Equals `Chi(x) − ln x − γ` but has no logarithmic singularity.
pub fn chin(x: f64) -> Result<SpecialValue> {
    guard("chin argument", x, OVERFLOW_LIMIT)?;
    if x < 0.0 {
        return Err(CoreError::DomainError {
            context: format!("chin requires x >= 0, got {x}"),
        });
    }
    if x < SERIES_LIMIT {
        Ok(SpecialValue {
            value: chin_series(x),
            method: MethodTag::Series,
        })
    } else {
        Ok(SpecialValue {
            value: chin_large(x),
            method: MethodTag::Asymptotic,
        })
    }
}

/// Small-argument branch of [`chin`]: `Σ_{k≥1} x^{2k} / (2k·(2k)!)`.
pub fn chin_series(x: f64) -> f64 {
    let mut acc = Kahan::default();
    // q = x^{2k} / (2k)!
    let mut q = 0.5 * x * x;
    let mut k = 1u32;
    loop {
        let term = q / (2 * k) as f64;
        acc.add(term);
        if term < acc.sum * 1e-17 || term == 0.0 {
            break;
        }
        q *= x * x / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
        k += 1;
        if k > 1000 {
            break;
        }
    }
    acc.sum
}

/// Large-argument branch of [`chin`]: `(Ei(x) − E1(x))/2 − γ − ln x`.
pub fn chin_large(x: f64) -> f64 {
    0.5 * (ei_positive(x) - e1_continued_fraction(x)) - EULER_GAMMA - x.ln()
}

/// Complementary exponential integral
/// `Ein(x) = ∫₀ˣ (1 − e^{−t})/t dt = Σ_{k≥1} (−1)^{k+1} x^k/(k·k!)`.
///
/// Defined for both signs of the argument.  The alternating series above is
/// used only as the definition: for `x > 20` its peak term is larger than
/// the result by `~e^x`, which destroys the 1e−12 accuracy contract, so the
/// positive-`x` branch sums the cancellation-free rearrangement
/// `Ein(x) = e^{−x} Σ_{k≥1} H_k x^k/k!` (`H_k` the harmonic numbers), and
/// the negative-`x` branch uses `Ein(−a) = −Σ_{k≥1} a^k/(k·k!)`, which is
/// sign-definite term by term.
pub fn ein(x: f64) -> Result<SpecialValue> {
    guard("ein argument", x, OVERFLOW_LIMIT)?;
    if x.abs() < SERIES_LIMIT {
        Ok(SpecialValue {
            value: ein_series(x),
            method: MethodTag::Series,
        })
    } else {
        Ok(SpecialValue {
            value: ein_large(x),
            method: MethodTag::Asymptotic,
        })
    }
}

/// Small-argument branch of [`ein`] (cancellation-free series, either sign).
pub fn ein_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x > 0.0 {
        // e^{-x} * sum_k H_k x^k / k!
        let mut acc = Kahan::default();
        let mut h = 0.0; // harmonic number H_k
        let mut p = 1.0; // x^k / k!
        for k in 1..=1000u32 {
            h += 1.0 / k as f64;
            p *= x / k as f64;
            let term = h * p;
            acc.add(term);
            if term < acc.sum * 1e-17 || term == 0.0 {
                break;
            }
        }
        (-x).exp() * acc.sum
    } else {
        // Ein(-a) = -sum_k a^k / (k k!), all terms the same sign.
        let a = -x;
        let mut acc = Kahan::default();
        let mut p = 1.0; // a^k / k!
        for k in 1..=1000u32 {
            p *= a / k as f64;
            let term = p / k as f64;
            acc.add(term);
            if term < acc.sum * 1e-17 || term == 0.0 {
                break;
            }
        }
        -acc.sum
    }
}

/// Large-argument branch of [`ein`]:
/// `Ein(x) = γ + ln|x| + E1(x)` for `x > 0` and
/// `Ein(−a) = γ + ln a − Ei(a)` for `x = −a < 0`.
pub fn ein_large(x: f64) -> f64 {
    if x > 0.0 {
        EULER_GAMMA + x.ln() + e1_continued_fraction(x)
    } else {
        let a = -x;
        EULER_GAMMA + a.ln() - ei_positive(a)
    }
}

/// Derivative `d/dx Ein(x) = (1 − e^{−x})/x`, continuous through 0.
pub fn ein_derivative(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor expansion: 1 - x/2 + x^2/6 - x^3/24
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    } else {
        -f64::exp_m1(-x) / x
    }
}

/// `coth(w) − 1 = 2 e^{−2w} / (1 − e^{−2w})`, computed without forming
/// `coth(w)` (which is `1 + O(e^{−2w})` and would round the difference away
/// for `w ≳ 18`).
pub fn coth_minus_one(w: f64) -> Result<f64> {
    guard("coth_minus_one argument", w, OVERFLOW_LIMIT)?;
    if w <= 0.0 {
        return Err(CoreError::DomainError {
            context: format!("coth_minus_one requires w > 0, got {w}"),
        });
    }
    Ok(2.0 * (-2.0 * w).exp() / (-f64::exp_m1(-2.0 * w)))
}

/// `1/sinh(w) = 2 e^{−w} / (1 − e^{−2w})` for `w > 0`; exponentially small
/// values come out as an exact product instead of a reciprocal of a huge
/// number.
pub fn inv_sinh(w: f64) -> Result<f64> {
    guard("inv_sinh argument", w, OVERFLOW_LIMIT)?;
    if w <= 0.0 {
        return Err(CoreError::DomainError {
            context: format!("inv_sinh requires w > 0, got {w}"),
        });
    }
    Ok(2.0 * (-w).exp() / (-f64::exp_m1(-2.0 * w)))
}

/// `1/sinh²(w)` for `w > 0`, assembled in log space as
/// `exp(ln 4 − 2w − 2 ln(1 − e^{−2w}))`.
pub fn inv_sinh_sq(w: f64) -> Result<f64> {
    guard("inv_sinh_sq argument", w, OVERFLOW_LIMIT)?;
    if w <= 0.0 {
        return Err(CoreError::DomainError {
            context: format!("inv_sinh_sq requires w > 0, got {w}"),
        });
    }
    Ok((4f64.ln() - 2.0 * w - 2.0 * f64::ln_1p(-(-2.0 * w).exp())).exp())
}

/// `Ei(x)` for `x > 0` from the everywhere-convergent positive-term series
/// `Ei(x) = γ + ln x + Σ_{k≥1} x^k/(k·k!)`.
fn ei_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = Kahan::default();
    let mut p = 1.0; // x^k / k!
    for k in 1..=2000u32 {
        p *= x / k as f64;
        let term = p / k as f64;
        acc.add(term);
        if term < acc.sum * 1e-17 {
            break;
        }
    }
    EULER_GAMMA + x.ln() + acc.sum
}

/// `E1(x)` for `x > 0` by the modified-Lentz continued fraction
/// `E1(x) = e^{−x} / (x + 1 − 1²/(x + 3 − 2²/(x + 5 − …)))`.
fn e1_continued_fraction(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for k in 1..=300u32 {
        let a = -((k * k) as f64);
        b += 2.0;
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x).exp() * h
}

/// Scaled modified Bessel function `e^{−x} I_n(x)` for integer order,
/// evaluated by Miller's downward recurrence with sum normalization
/// (`I_0 + 2 Σ_{k≥1} I_k = e^x` fixes the overall scale).
///
/// `|order| ≤ 500`, `x ≥ 0`; relative accuracy 1e−10 or better.
pub fn bessel_i_scaled(order: i64, x: f64) -> Result<f64> {
    let n = order.unsigned_abs() as usize;
    if n > 500 {
        return Err(CoreError::DomainError {
            context: format!("bessel_i_scaled supports |order| <= 500, got {order}"),
        });
    }
    if x < 0.0 || !x.is_finite() {
        return Err(CoreError::DomainError {
            context: format!("bessel_i_scaled requires x >= 0, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x < 1e-6 {
        // Leading series terms; the recurrence normalization becomes
        // ill-scaled when every I_n is astronomically small.
        let half = 0.5 * x;
        let mut t = (-x).exp();
        for j in 1..=n {
            t *= half / j as f64;
        }
        return Ok(t * (1.0 + half * half / (n as f64 + 1.0)));
    }

    // Start the downward recurrence high enough that the unwanted solution
    // has decayed by far more than the accuracy target.
    let start = n.max(x.ceil() as usize) + 2 * (x.sqrt() as usize + 10) + 30;
    let mut i_above = 0.0f64;
    let mut i_here = 1e-280f64;
    let mut norm = 0.0f64; // accumulates i_0 + 2 sum_{k>=1} i_k
    let mut wanted = 0.0f64;
    for k in (0..=start).rev() {
        let i_below = i_above + (2.0 * (k as f64 + 1.0) / x) * i_here;
        i_above = i_here;
        i_here = i_below;
        // i_here now holds the candidate for I_k.
        if k == n {
            wanted = i_here;
        }
        if k > 0 {
            norm += 2.0 * i_here;
        } else {
            norm += i_here;
        }
        if i_here > 1e270 {
            i_here *= 1e-270;
            i_above *= 1e-270;
            norm *= 1e-270;
            wanted *= 1e-270;
        }
    }
    // norm approximates e^x times the arbitrary starting scale, so the
    // ratio is e^{-x} I_n(x) directly.
    Ok(wanted / norm)
}

/// Independent quadrature route for `e^{−x} I_n(x)` from the integral
/// representation `I_n(x) = (1/π) ∫₀^π e^{x cos φ} cos(nφ) dφ`, evaluated as
/// `(1/π) ∫₀^π e^{x (cos φ − 1)} cos(nφ) dφ` so the integrand stays in
/// `[−1, 1]`.  Used to cross-validate the recurrence route.
pub fn bessel_i_scaled_quadrature(order: i64, x: f64) -> Result<f64> {
    let n = order.unsigned_abs() as i64;
    if x < 0.0 || !x.is_finite() {
        return Err(CoreError::DomainError {
            context: format!("bessel_i_scaled_quadrature requires x >= 0, got {x}"),
        });
    }
    let f = |phi: f64| (x * (phi.cos() - 1.0)).exp() * (n as f64 * phi).cos();
    let integral = adaptive_simpson(&f, 0.0, std::f64::consts::PI, 1e-12, 1e-12, 20)?;
    Ok(integral / std::f64::consts::PI)
}

/// `ln(n!)` via the log-gamma function (`exp` of it overflows past `n = 170`,
/// so callers combine values in log space).
pub fn log_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 20 {
        // Exact in integer arithmetic, then one correctly-rounded ln.
        let mut f: u64 = 1;
        for k in 2..=n {
            f *= k;
        }
        (f as f64).ln()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `ln(n!!)` with the conventions `0!! = 1!! = 1`;
/// even `n = 2k`: `n!! = 2^k k!`; odd `n = 2k+1`: `n!! = (2k+1)!/(2^k k!)`.
pub fn log_double_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let k = n / 2;
    let log2 = std::f64::consts::LN_2;
    if n % 2 == 0 {
        k as f64 * log2 + log_factorial(k)
    } else {
        log_factorial(n) - (k as f64 * log2 + log_factorial(k))
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Recursion depth 20 corresponds to at most 2^20 subdivisions of the
/// original interval; exceeding it reports `QuadratureFailure`.
pub(crate) fn adaptive_simpson<F>(
    f: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    max_depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fb, fm, whole, tol_abs, tol_rel, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol_abs: f64,
    tol_rel: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol_abs.max(tol_rel * (left + right).abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(CoreError::QuadratureFailure {
            context: format!("subdivision budget exhausted on [{a}, {b}]"),
        });
    }
    let lv = simpson_recurse(f, a, m, fa, fm, flm, left, 0.5 * tol_abs, tol_rel, depth - 1)?;
    let rv = simpson_recurse(f, m, b, fm, fb, frm, right, 0.5 * tol_abs, tol_rel, depth - 1)?;
    Ok(lv + rv)
}

/// Complex-valued adaptive Simpson quadrature (real and imaginary parts
/// share the subdivision so the result is a single consistent estimate).
pub(crate) fn adaptive_simpson_complex<F>(
    f: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    max_depth: u32,
) -> Result<num_complex::Complex64>
where
    F: Fn(f64) -> num_complex::Complex64,
{
    use num_complex::Complex64;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    fn recurse<F>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fb: Complex64,
        fm: Complex64,
        whole: Complex64,
        tol_abs: f64,
        tol_rel: f64,
        depth: u32,
    ) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.norm() <= 15.0 * tol_abs.max(tol_rel * (left + right).norm()) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(CoreError::QuadratureFailure {
                context: format!("subdivision budget exhausted on [{a}, {b}]"),
            });
        }
        let lv = recurse(f, a, m, fa, fm, flm, left, 0.5 * tol_abs, tol_rel, depth - 1)?;
        let rv = recurse(f, m, b, fm, fb, frm, right, 0.5 * tol_abs, tol_rel, depth - 1)?;
        Ok(lv + rv)
    }

    recurse(f, a, b, fa, fb, fm, whole, tol_abs, tol_rel, max_depth)
}
