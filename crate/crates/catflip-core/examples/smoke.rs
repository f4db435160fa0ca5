//! Scratch harness: print key quantities for cross-checking.

use catflip_core::analytic_rates::{
    leaking_dissipator_rate_closed, leaking_dissipator_rate_numeric, photon_loss_rate,
    photon_loss_second_order_eigensum, zgate_rate, detuning_rate,
};
use catflip_core::fock_core::{recommended_dim, FockSpace};
use catflip_core::kerr_spectrum::{
    eigensystem, greens_function, inverse_kerr_element, s1_s2, S12Method,
};
use catflip_core::liouville::{invariants, PerturbationSpec};
use catflip_core::special_functions::{chin, ein, shi};
use catflip_core::spectral_extraction::converged_bitflip_eigenvalue;

fn main() {
    for x in [1.0, 2.0, 4.0, 8.0, 16.0, 25.0, 30.0, 35.0] {
        let s = shi(x).unwrap().value;
        let c = chin(x).unwrap().value;
        let e = ein(x).unwrap().value;
        println!("x={x}: shi={s:.16e} chin={c:.16e} ein={e:.16e} (s-c-e)={:.3e}", s - c - e);
    }
    println!();
    for a2 in [0.5f64, 1.0, 2.0, 4.0, 8.0] {
        let alpha = a2.sqrt();
        let cf = s1_s2(alpha, S12Method::ClosedForm).unwrap();
        let es = s1_s2(alpha, S12Method::Eigensum).unwrap();
        println!(
            "a2={a2}: S1 closed={:.12e} eig={:.12e}  S2 closed={:.12e} eig={:.12e}",
            cf.s1, es.s1, cf.s2, es.s2
        );
    }
    println!();
    // Green's function and inverse-Kerr kernel anchors at alpha = 1.
    println!("g(0,0)@alpha=1 = {:.15}", greens_function(1.0, 0.0, 0.0).unwrap());
    let alpha = 2.0f64.sqrt();
    println!(
        "E2(0.3,-0.2)@a2=2 = {:.15e}",
        inverse_kerr_element(alpha, 0.3, -0.2).unwrap()
    );
    println!(
        "E2(0.9a,0.4a)@a2=2 = {:.15e}",
        inverse_kerr_element(alpha, 0.9 * alpha, 0.4 * alpha).unwrap()
    );
    println!();
    // Rates at alpha^2 = 1.
    let r = photon_loss_rate(1.0, 0.01, 1.0).unwrap();
    println!(
        "loss a2=1: l1={:.10e} l2={:.10e} gamma={:.10e} asym={:.10e}",
        r.lambda_first, r.lambda_second, r.gamma_bitflip, r.asymptotic_gamma
    );
    let r = zgate_rate(1.0, 0.1, 1.0).unwrap();
    println!(
        "zgate a2=1: l1={:.10e} l2={:.10e} gamma={:.10e}",
        r.lambda_first, r.lambda_second, r.gamma_bitflip
    );
    let r = detuning_rate(1.0, 0.1, 1.0).unwrap();
    println!(
        "detuning a2=1: l1={:.10e} l2={:.10e} gamma={:.10e}",
        r.lambda_first, r.lambda_second, r.gamma_bitflip
    );
    println!();
    // Kerr eigensum route for the second-order photon-loss rate.
    for a2 in [1.0, 4.0] {
        let alpha = (a2 as f64).sqrt();
        let space = FockSpace::for_alpha2(a2).unwrap();
        let eig = eigensystem(&space, alpha).unwrap();
        let basis = invariants(&space, alpha).unwrap();
        let l2 = photon_loss_second_order_eigensum(alpha, 1.0, 1.0, &eig, &basis).unwrap();
        let cf = s1_s2(alpha, S12Method::ClosedForm).unwrap();
        println!(
            "a2={a2}: eigensum l2={:.12e} closed={:.12e}",
            l2,
            cf.s1 + cf.s2
        );
    }
    println!();
    // Table anchors at alpha^2 = 3.
    for (m, n) in [(1u32, 0u32), (1, 1), (2, 0), (2, 1), (3, 0), (3, 2)] {
        let alpha = 3.0f64.sqrt();
        let closed = leaking_dissipator_rate_closed(alpha, m, n, 1.0).unwrap();
        let space = FockSpace::for_alpha2(3.0).unwrap();
        let basis = invariants(&space, alpha).unwrap();
        let numeric = leaking_dissipator_rate_numeric(&basis, m, n, 1.0).unwrap();
        println!(
            "m={m} n={n}: closed={closed:.10e} numeric={numeric:.10e} rel={:.2e}",
            (closed - numeric).abs() / numeric.abs()
        );
    }
    println!();
    // Spectral route, photon loss at kappa1 = 0.01.
    for a2 in [1.0, 2.0, 3.0] {
        let alpha = (a2 as f64).sqrt();
        let spec = PerturbationSpec::PhotonLoss { kappa1: 0.01 };
        let res = converged_bitflip_eigenvalue(alpha, &spec, recommended_dim(a2)).unwrap();
        let cf = photon_loss_rate(alpha, 0.01, 1.0).unwrap();
        println!(
            "a2={a2}: spectral Re={:.10e} gamma={:.10e} analytic={:.10e} score={:.6} conv={} sector={:?}",
            res.lambda_z.re,
            -res.lambda_z.re / 2.0,
            cf.gamma_bitflip,
            res.overlap_score,
            res.converged,
            res.sector
        );
    }
}
