//! Build an extended block basis for a random sparse matrix and check the
//! identities that tie it to the projected matrix.

use ebh::dense::{cond2, rel_diff};
use ebh::process::{build_t, build_t_direct, ebha_run, left_apply, EbhaOptions};
use ebh::random::{factorize, random_sparse, rng, uniform_block};
use ebh::Result;

fn main() -> Result<()> {
    let (n, p, m) = (150, 2, 4);
    let mut r = rng(42);
    let a = factorize(random_sparse(n, 4, &mut r), "random_sparse")?;
    let v = uniform_block(n, p, &mut r);

    let basis = ebha_run(&a, &v, m, &EbhaOptions::default())?;
    let k = 2 * m;
    let vv = basis.basis_matrix(k);
    let proj = build_t(&basis)?;

    let li = left_apply(&basis, &vv, k)?;
    let av = a.apply(&vv)?;
    let mut decomposition = &av - &vv * &proj.t;
    let mut tail = decomposition.columns_mut((k - 2) * p, 2 * p);
    tail -= basis.block(k + 1) * &proj.tau;

    println!("n={n} p={p} m={m}, basis {}x{}", vv.nrows(), vv.ncols());
    println!("|V^L V - I|_F          {:.3e}", (li - nalgebra::DMatrix::identity(k * p, k * p)).norm());
    println!("decomposition residual {:.3e}", decomposition.norm() / av.norm());
    println!("T vs V^L A V           {:.3e}", rel_diff(&proj.t, &build_t_direct(&basis, &a)?));
    println!("cond2(V)               {:.3e}", cond2(&vv));

    // block upper Hessenberg with 2p x 2p blocks
    let b = 2 * p;
    let mut below = 0.0f64;
    for bj in 0..m {
        for bi in (bj + 2)..m {
            below = below.max(proj.t.view((bi * b, bj * b), (b, b)).amax());
        }
    }
    println!("largest entry below the block subdiagonal: {below:e}");
    Ok(())
}
