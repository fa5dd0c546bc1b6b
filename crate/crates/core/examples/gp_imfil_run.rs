//! A complete GP+ImFil run on a user-supplied objective, next to the two
//! baseline modes.

use noisy_seed_opt::design::SearchDomain;
use noisy_seed_opt::objectives::from_fn;
use noisy_seed_opt::orchestrator::{run, BudgetPlan, Mode, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Branin, rescaled; three global minima of value 0.397887.
    let branin = from_fn(2, |x: &[f64]| {
        let (a, b) = (15.0 * x[0] - 5.0, 15.0 * x[1]);
        let pi = std::f64::consts::PI;
        (b - 5.1 / (4.0 * pi * pi) * a * a + 5.0 / pi * a - 6.0).powi(2)
            + 10.0 * (1.0 - 1.0 / (8.0 * pi)) * a.cos()
            + 10.0
    });
    let domain = SearchDomain::unit(2)?;
    let budgets = BudgetPlan::standard(2, 200);
    println!(
        "budgets: n0 {} / GP through {} / local {} in {} starts of half-width {}",
        budgets.n0, budgets.b_gp, budgets.b_loc, budgets.b_start, budgets.local_half_width
    );

    for mode in Mode::ALL {
        let record = run(&branin, &domain, &RunConfig::new(mode, budgets.clone()), 42)?;
        println!(
            "{mode:<10} best {:.6} at [{:.4}, {:.4}], {} evals, {} local searches, after 50 evals {:.4}",
            record.best_value,
            record.best_theta[0],
            record.best_theta[1],
            record.samples.len(),
            record.restarts(),
            record.best_after(50).unwrap_or(f64::NAN),
        );
        for w in &record.warnings {
            println!("           warning: {w}");
        }
    }
    Ok(())
}
