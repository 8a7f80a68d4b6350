//! Write a small operator to a Matrix Market file, read it back through the
//! gallery loader and run one approximation on it.
//!
//! With an argument, that file is used instead.

use std::path::PathBuf;

use ebh::approx::{exact_reference, mf_ebh};
use ebh::matfun::FunctionSpec;
use ebh::operators::{gallery, write_matrix_market, GallerySpec, SparseCsr};
use ebh::random::{rng, uniform_block};
use ebh::Result;

fn main() -> Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let n = 400;
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, 3.0));
                if i + 1 < n {
                    t.push((i, i + 1, -1.0));
                    t.push((i + 1, i, -0.8));
                }
            }
            let path = std::env::temp_dir().join("ebh_example.mtx");
            write_matrix_market(&path, &SparseCsr::from_triplets(n, &t)?, &["tridiagonal example"])?;
            path
        }
    };
    let a = gallery(&GallerySpec::MatrixMarket { path: path.clone() })?;
    println!("{}: n={} nnz={}", path.display(), a.n(), a.nnz());
    let v = uniform_block(a.n(), 2, &mut rng(3));
    let spec = FunctionSpec::Sqrt;
    let exact = exact_reference(&a, &v, &spec)?;
    for m in [2, 4, 6, 8] {
        let mut r = mf_ebh(&a, &v, m, &spec)?;
        println!("m={m:<2} sqrt rel_err {:.3e}", r.compare(&exact));
    }
    Ok(())
}
