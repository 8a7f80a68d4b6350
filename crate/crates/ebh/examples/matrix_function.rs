//! Approximate f(A)V for the five standard functions on the rotation-block
//! test matrix and compare with the closed-form reference.

use ebh::approx::{exact_reference, mf_ebh};
use ebh::matfun::FunctionSpec;
use ebh::operators::{gallery, GallerySpec};
use ebh::random::{rng, uniform_block};
use ebh::Result;

fn main() -> Result<()> {
    let a = gallery(&GallerySpec::Rot2BlockDiag { n: 2000 })?;
    let v = uniform_block(a.n(), 5, &mut rng(7));
    println!("{:<12} {:>4} {:>12} {:>10}", "function", "m", "rel_err", "time_s");
    for spec in FunctionSpec::standard_set() {
        let exact = exact_reference(&a, &v, &spec)?;
        for m in [5, 10, 15] {
            let mut r = mf_ebh(&a, &v, m, &spec)?;
            let err = r.compare(&exact);
            println!("{:<12} {:>4} {:>12.3e} {:>10.4}", spec.name(), m, err, r.wall_time);
        }
    }
    Ok(())
}
