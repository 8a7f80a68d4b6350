//! Exact operation counts for the process, term by term and collapsed.

use ebh::operators::flop_estimate;

fn main() {
    println!("{:>6} {:>3} {:>3} {:>8} {:>14} {:>14} {:>12}", "n", "p", "m", "nnz", "summed", "closed", "difference");
    for &(n, p, m, nnz) in &[(5000, 5, 10, 24995), (5000, 5, 15, 24995), (2500, 5, 10, 12300), (100, 1, 3, 298)] {
        let e = flop_estimate(n, p, m, nnz);
        println!(
            "{n:>6} {p:>3} {m:>3} {nnz:>8} {:>14} {:>14} {:>12}",
            e.summed.to_integer(),
            e.closed_form.to_integer(),
            e.discrepancy().to_string()
        );
    }
}
