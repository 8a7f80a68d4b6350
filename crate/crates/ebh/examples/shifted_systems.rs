//! Solve (A + σI)X = C for 200 shifts at once on a convection-diffusion
//! operator, auditing a few shifts against the true residual.

use ebh::harness::sample_indices;
use ebh::operators::{gallery, GallerySpec};
use ebh::random::{rng, uniform_block};
use ebh::shifted::{residual_direct, solve_shifted_with, ShiftedOptions, ShiftedProblem};
use ebh::Result;

fn main() -> Result<()> {
    let a = gallery(&GallerySpec::ConvDiffL2 { grid: 40 })?;
    let c = uniform_block(a.n(), 4, &mut rng(1));
    let shifts: Vec<f64> = (0..200).map(|i| 5.0 * i as f64 / 199.0).collect();
    let problem = ShiftedProblem {
        a: &a,
        c: c.clone(),
        shifts: shifts.clone(),
        eps: 1e-10,
        m: 8,
        max_restarts: 20,
    };
    let audit = sample_indices(shifts.len(), 5);
    let state = solve_shifted_with(
        &problem,
        &ShiftedOptions {
            audit: audit.clone(),
            ..Default::default()
        },
    )?;
    println!(
        "{}: n={} cycles={} converged={}/{}",
        a.label(),
        a.n(),
        state.restart_count,
        state.shifts.iter().filter(|s| s.converged).count(),
        shifts.len()
    );
    for &i in &audit {
        let s = &state.shifts[i];
        let hist: Vec<String> = s.residual_history.iter().map(|r| format!("{r:.2e}")).collect();
        println!(
            "sigma={:<6.3} formula [{}] direct {:.2e}",
            s.sigma,
            hist.join(", "),
            residual_direct(&a, &c, s.sigma, &s.x)?
        );
    }
    Ok(())
}
