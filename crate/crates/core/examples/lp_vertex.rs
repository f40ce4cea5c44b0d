//! Solve a partition matroid program with extra packing rows to a vertex and
//! compare its support with the rank plus the number of extra rows.

use fairclust::gen::partition_matroid_lp;
use fairclust::lp::{solve_with, Backend, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (seed, k, m) in [(1, 4, 0), (2, 5, 2), (3, 6, 3)] {
        let (lp, sizes) = partition_matroid_lp(seed, k, m);
        for backend in [Backend::Dense, Backend::Highs] {
            let opts = SolveOptions {
                backend,
                ..Default::default()
            };
            let sol = solve_with(&lp, &opts)?;
            println!(
                "k={k} m={m} parts {sizes:?} {backend:?}: objective {:.6}, support {} (bound {})",
                sol.objective_value,
                sol.support.len(),
                k + m
            );
        }
    }
    Ok(())
}
