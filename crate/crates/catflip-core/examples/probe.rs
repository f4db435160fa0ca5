// Scratch probe for spectral battery calibration (not shipped).
use catflip_core::fock_core::{outer, recommended_dim, FockSpace, Parity};
use catflip_core::kerr_spectrum::eigensystem;
use catflip_core::liouville::{invariants, l0_superop, leakage, PerturbationSpec};
use catflip_core::spectral_extraction::{
    assemble_generator, bitflip_eigenvalue, converged_bitflip_eigenvalue, evolve,
    fit_bitflip_decay,
};

fn main() {
    // L0 alone at a2=2.
    let a2 = 2.0f64;
    let alpha = a2.sqrt();
    let space = FockSpace::for_alpha2(a2).unwrap();
    let basis = invariants(&space, alpha).unwrap();
    let l0 = l0_superop(&space, alpha, 1.0).unwrap();
    match bitflip_eigenvalue(&l0, &basis) {
        Ok(r) => println!(
            "L0 a2=2: lambda={:e} score={:.6} sector={:?}",
            r.lambda_z, r.overlap_score, r.sector
        ),
        Err(e) => println!("L0 a2=2: ERR {e:?}"),
    }

    // PhotonLoss a2=1.
    let spec = PerturbationSpec::PhotonLoss { kappa1: 0.01 };
    let space1 = FockSpace::for_alpha2(1.0).unwrap();
    let basis1 = invariants(&space1, 1.0).unwrap();
    let g = assemble_generator(&space1, 1.0, &spec).unwrap();
    let r = bitflip_eigenvalue(&g, &basis1).unwrap();
    println!(
        "loss a2=1: Re={:.12e} Im={:.3e} score={:.6} sector={:?}",
        r.lambda_z.re, r.lambda_z.im, r.overlap_score, r.sector
    );

    // Convergence flag at small dims, a2=2 photon loss.
    for dim in [12usize, 14, 18, recommended_dim(2.0)] {
        match converged_bitflip_eigenvalue(2.0f64.sqrt(), &spec, dim) {
            Ok(r) => println!(
                "conv dim={dim}: Re={:.6e} converged={} score={:.4}",
                r.lambda_z.re, r.converged, r.overlap_score
            ),
            Err(e) => println!("conv dim={dim}: ERR {e:?}"),
        }
    }

    // Detuning a2=2.
    let spec_d = PerturbationSpec::Detuning { delta: 0.1 };
    let gd = assemble_generator(&space, alpha, &spec_d).unwrap();
    match bitflip_eigenvalue(&gd, &basis) {
        Ok(r) => println!(
            "det a2=2: Re={:.6e} Im={:.6e} score={:.4} sector={:?}",
            r.lambda_z.re, r.lambda_z.im, r.overlap_score, r.sector
        ),
        Err(e) => println!("det a2=2: ERR {e:?}"),
    }

    // ZGate a2=2 (full sector).
    let spec_z = PerturbationSpec::ZGate { epsilon_z: 0.1 };
    let gz = assemble_generator(&space, alpha, &spec_z).unwrap();
    match bitflip_eigenvalue(&gz, &basis) {
        Ok(r) => println!(
            "zgate a2=2: Re={:.6e} score={:.4} sector={:?}",
            r.lambda_z.re, r.overlap_score, r.sector
        ),
        Err(e) => println!("zgate a2=2: ERR {e:?}"),
    }

    // Relaxation of the excited dyad under L0 alone.
    let eig = eigensystem(&space, alpha).unwrap();
    let mu1 = eig.even.eigenvalues[1];
    let psi = eig.even.ket(1);
    let rho_exc = outer(&psi, &psi);
    let ts = [0.0, 5.0 / mu1, 10.0 / mu1, 20.0 / mu1];
    let traj = evolve(&l0, &rho_exc, &ts).unwrap();
    for (t, rho) in ts.iter().zip(traj.iter()) {
        println!("  relax t={:.3}: leakage={:.3e}", t, leakage(rho, &basis).unwrap());
    }

    // Fit probes.
    let gamma_est = 1.9496886716e-4;
    let fit = fit_bitflip_decay(&g, &basis1, 10.0 / gamma_est).unwrap();
    println!("fit loss a2=1: {fit:.6e} vs eig {:.6e}", -0.5 * r.lambda_z.re);

    let _ = Parity::Even;
}
