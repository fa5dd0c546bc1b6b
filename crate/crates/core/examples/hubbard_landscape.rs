//! The two-site Hubbard VQE landscape: exact ground energy, the ansatz
//! energy over a grid of angles, and the larger registry problems.

use noisy_seed_opt::objectives::hubbard::{ground_energy, hubbard_hamiltonian};
use noisy_seed_opt::objectives::{lookup, HubbardSpec, HvaModel};

fn main() -> noisy_seed_opt::error::Result<()> {
    let spec = HubbardSpec::new(2, 1, 1, 1, 1);
    let h = hubbard_hamiltonian(&spec)?.to_dense();
    println!("2x1 half filling, sector Hamiltonian:\n{h:.3}");
    let exact = ground_energy(&spec)?;
    println!("exact ground energy {exact:.7} (1 - sqrt 5 = {:.7})", 1.0 - 5f64.sqrt());

    let model = HvaModel::new(&spec)?;
    let n = 200;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let t = [
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64,
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64,
            ];
            let e = model.energy(&t)?;
            if e < best.0 {
                best = (e, t[0], t[1]);
            }
        }
    }
    println!("ansatz grid minimum {:.6} at ({:.4}, {:.4})", best.0, best.1, best.2);

    for id in ["H1", "H3", "H4", "H5"] {
        let p = lookup(id)?;
        println!("{id}: {} | ground {:.6} | spectrum {:?}", p.description, p.reference_min, p.value_range);
    }
    Ok(())
}
