// Scratch probe: fit-vs-eigenvalue deviations after the estimator rework (not shipped).
use catflip_core::analytic_rates::{detuning_rate, photon_loss_rate, zgate_rate};
use catflip_core::fock_core::FockSpace;
use catflip_core::liouville::{invariants, PerturbationSpec};
use catflip_core::spectral_extraction::{
    assemble_generator, bitflip_eigenvalue, fit_bitflip_decay,
};

fn main() {
    for a2 in [1.0f64, 2.0, 3.0] {
        let alpha = a2.sqrt();
        let space = FockSpace::for_alpha2(a2).unwrap();
        let basis = invariants(&space, alpha).unwrap();
        for (name, spec, gan) in [
            (
                "loss",
                PerturbationSpec::PhotonLoss { kappa1: 0.01 },
                photon_loss_rate(alpha, 0.01, 1.0).unwrap().gamma_bitflip,
            ),
            (
                "det ",
                PerturbationSpec::Detuning { delta: 0.1 },
                detuning_rate(alpha, 0.1, 1.0).unwrap().gamma_bitflip,
            ),
        ] {
            let g = assemble_generator(&space, alpha, &spec).unwrap();
            let ge = -0.5 * bitflip_eigenvalue(&g, &basis).unwrap().lambda_z.re;
            let gf = fit_bitflip_decay(&g, &basis, 10.0 / gan).unwrap();
            println!(
                "{name} a2={a2}: eig={ge:.6e} fit={gf:.6e} dev={:+.3}%",
                100.0 * (gf / ge - 1.0)
            );
        }
    }
    let alpha = 2.0f64.sqrt();
    let space = FockSpace::for_alpha2(2.0).unwrap();
    let basis = invariants(&space, alpha).unwrap();
    let gz = assemble_generator(&space, alpha, &PerturbationSpec::ZGate { epsilon_z: 0.1 })
        .unwrap();
    let gan = zgate_rate(alpha, 0.1, 1.0).unwrap().gamma_bitflip;
    let gf = fit_bitflip_decay(&gz, &basis, 10.0 / gan).unwrap();
    println!("zgate a2=2: analytic={gan:.6e} fit={gf:.6e} dev={:+.3}%", 100.0 * (gf / gan - 1.0));
}
