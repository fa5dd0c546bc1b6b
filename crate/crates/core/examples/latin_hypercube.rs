//! Space-filling initial designs and local search boxes.

use noisy_seed_opt::design::{clip_to_domain, latin_hypercube, sub_box, SearchDomain};

fn main() -> noisy_seed_opt::error::Result<()> {
    let domain = SearchDomain::new(vec![-2.0, 0.0], vec![2.0, 10.0])?;
    let points = latin_hypercube(&domain, 8, 3)?;

    // One point per bin along every axis.
    for (j, name) in ["x", "y"].iter().enumerate() {
        let mut bins: Vec<usize> = points
            .iter()
            .map(|p| ((p[j] - domain.lower()[j]) / domain.width(j) * 8.0).floor().min(7.0) as usize)
            .collect();
        bins.sort_unstable();
        println!("{name} bins: {bins:?}");
    }
    for p in &points {
        println!("  [{:7.3}, {:7.3}]", p[0], p[1]);
    }

    println!("clipped: {:?}", clip_to_domain(&[-3.0, 12.0], &domain)?);

    // Boxes near the boundary are intersected with the domain, not shifted.
    let unit = SearchDomain::unit(2)?;
    let b = sub_box(&[0.02, 0.5], 0.05, &unit)?;
    println!("sub-box around [0.02, 0.5]: {:?} .. {:?}", b.lower(), b.upper());
    Ok(())
}
