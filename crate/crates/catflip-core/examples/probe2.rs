// Scratch probe: late-window signal quality of the decay fit at a2=3 (not shipped).
use catflip_core::fock_core::{outer, FockSpace};
use catflip_core::liouville::{invariants, vec_op, PerturbationSpec};
use catflip_core::spectral_extraction::{assemble_generator, bitflip_eigenvalue};
use catflip_core::C64;
use ndarray_linalg::{Eig, Inverse};

fn main() {
    let a2 = 3.0f64;
    let alpha = a2.sqrt();
    let space = FockSpace::for_alpha2(a2).unwrap();
    println!("dim = {}", space.dim);
    let basis = invariants(&space, alpha).unwrap();
    let spec = PerturbationSpec::PhotonLoss { kappa1: 0.01 };
    let g = assemble_generator(&space, alpha, &spec).unwrap();
    let r = bitflip_eigenvalue(&g, &basis).unwrap();
    let gamma_eig = -0.5 * r.lambda_z.re;
    println!("gamma_eig = {gamma_eig:.9e}");

    let (w, v) = g.entries.eig().unwrap();
    let vinv = v.inv().unwrap();
    let rho0 = outer(&basis.zero_c, &basis.zero_c);
    let sz_row = vec_op(&basis.sigma_z.t().to_owned());
    let c0 = vinv.dot(&vec_op(&rho0));
    let gvec: Vec<C64> = (0..w.len())
        .map(|k| {
            let col = v.column(k);
            let overlap: C64 = sz_row.iter().zip(col.iter()).map(|(&s, &vv)| s * vv).sum();
            overlap * c0[k]
        })
        .collect();
    let g1: f64 = gvec.iter().map(|c| c.norm()).sum();
    println!("sum |g_k| = {g1:.3e}  (cancellation noise ~ this x 1e-16)");
    let z_at = |t: f64| -> f64 {
        gvec.iter()
            .zip(w.iter())
            .map(|(&gk, &wk)| gk * (wk * t).exp())
            .sum::<C64>()
            .norm()
    };
    let horizon = 10.0 / gamma_eig;
    for frac in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let t = 5.0 + (horizon - 5.0) * frac;
        let z = z_at(t);
        let ideal = 0.5 * (-2.0 * gamma_eig * t).exp();
        println!(
            "t = {t:10.3e}  z = {z:.6e}  ideal = {ideal:.6e}  ratio = {:.4}",
            z / ideal
        );
    }
}
