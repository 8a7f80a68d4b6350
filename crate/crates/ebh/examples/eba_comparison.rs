//! Oblique (pivoted) and orthogonal extended bases side by side.

use ebh::approx::{exact_reference, mf_eba, mf_ebh};
use ebh::dense::rel_diff;
use ebh::matfun::FunctionSpec;
use ebh::operators::{gallery, GallerySpec};
use ebh::random::{rng, uniform_block};
use ebh::Result;

fn main() -> Result<()> {
    let a = gallery(&GallerySpec::ToeplitzInvDist { n: 1000 })?;
    let v = uniform_block(a.n(), 5, &mut rng(11));
    println!("{:<12} {:>3} {:>11} {:>11} {:>11} {:>9} {:>9}", "function", "m", "EBH err", "EBA err", "EBH-EBA", "EBH s", "EBA s");
    for spec in FunctionSpec::standard_set() {
        let exact = exact_reference(&a, &v, &spec)?;
        for m in [6, 10] {
            // the oblique projection need not keep the spectrum of A, so
            // sqrt and log can hit the branch cut where EBA does not
            let (mut h, mut o) = match (mf_ebh(&a, &v, m, &spec), mf_eba(&a, &v, m, &spec)) {
                (Ok(h), Ok(o)) => (h, o),
                (h, o) => {
                    let show = |r: &ebh::Result<_>| match r {
                        Ok(_) => "ok".to_string(),
                        Err(e) => e.to_string(),
                    };
                    println!("{:<12} {:>3} EBH: {}  EBA: {}", spec.name(), m, show(&h), show(&o));
                    continue;
                }
            };
            println!(
                "{:<12} {:>3} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.4} {:>9.4}",
                spec.name(),
                m,
                h.compare(&exact),
                o.compare(&exact),
                rel_diff(&h.approximation, &o.approximation),
                h.wall_time,
                o.wall_time
            );
        }
    }
    Ok(())
}
