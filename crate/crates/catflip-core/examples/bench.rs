//! Scratch timing harness for the dense eigensolves that dominate sweeps.

use std::time::Instant;

use catflip_core::fock_core::FockSpace;
use catflip_core::liouville::{invariants, PerturbationSpec};
use catflip_core::spectral_extraction::{assemble_generator, bitflip_eigenvalue, parity_sector_blocks};
use ndarray_linalg::Eig;

fn main() {
    for (a2, dim) in [(6.0f64, 36usize), (6.0, 46)] {
        let alpha = a2.sqrt();
        let space = FockSpace::new(dim).unwrap();
        let basis = invariants(&space, alpha).unwrap();

        let t0 = Instant::now();
        let l_loss = assemble_generator(&space, alpha, &PerturbationSpec::PhotonLoss { kappa1: 0.01 }).unwrap();
        let asm = t0.elapsed();

        let t0 = Instant::now();
        let blocks = parity_sector_blocks(&l_loss).unwrap();
        let n_odd = blocks.odd_indices.len();
        let split = t0.elapsed();

        let t0 = Instant::now();
        let res = bitflip_eigenvalue(&l_loss, &basis).unwrap();
        let odd_eig = t0.elapsed();
        println!(
            "a2={a2} dim={dim}: assemble {asm:?}, split {split:?}, odd-sector ({n_odd}) extract {odd_eig:?}, Re={:.3e}",
            res.lambda_z.re
        );

        let t0 = Instant::now();
        let l_z = assemble_generator(&space, alpha, &PerturbationSpec::ZGate { epsilon_z: 0.1 }).unwrap();
        let _ = l_z.entries.eig().unwrap();
        let full_eig = t0.elapsed();
        println!("  full ({}) assemble+eig {full_eig:?}", dim * dim);
    }
}
