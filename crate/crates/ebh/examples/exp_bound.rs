//! Error of the exp approximation against the a posteriori bound for a
//! matrix with negative semidefinite symmetric part.

use ebh::approx::{exact_reference, exp_error_bound, mf_ebh_with};
use ebh::dense::spectral_norm_exact;
use ebh::matfun::FunctionSpec;
use ebh::operators::FactorizedOperator;
use ebh::process::EbhaOptions;
use ebh::random::{random_dissipative, rng, uniform_block};
use ebh::Result;

fn main() -> Result<()> {
    let mut r = rng(2024);
    let a = FactorizedOperator::from_dense(random_dissipative(80, 3, &mut r).to_dense())?;
    let v = uniform_block(80, 2, &mut r);
    let exact = exact_reference(&a, &v, &FunctionSpec::Exp)?;
    println!("{:>3} {:>11} {:>11} {:>11} {:>9}", "m", "error", "bound", "sampled", "mu2");
    for m in 1..=6 {
        let (res, basis, proj) = mf_ebh_with(&a, &v, m, &FunctionSpec::Exp, &EbhaOptions::default())?;
        let b = exp_error_bound(&a, &basis, &proj)?;
        let err = spectral_norm_exact(&(&res.approximation - &exact));
        println!("{m:>3} {err:>11.3e} {:>11.3e} {:>11.3e} {:>9.4}", b.bound, b.sampled_bound, b.mu2);
    }
    Ok(())
}
