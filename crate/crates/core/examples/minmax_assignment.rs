//! Pick one item per part so that the worst of two group totals is small.

use fairclust::convert::{brute_force_minmax, minmax_assign, MinMaxAssignmentProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // costs[group][part][item]
    let prob = MinMaxAssignmentProblem {
        costs: vec![
            vec![vec![1.0, 4.0], vec![3.0, 0.5, 2.0], vec![2.0, 2.0]],
            vec![vec![4.0, 1.0], vec![0.5, 3.0, 2.0], vec![1.0, 3.0]],
        ],
        epsilon: 0.5,
    };
    let sol = minmax_assign(&prob)?;
    let (best, theta) = brute_force_minmax(&prob);
    println!("selection {:?} value {} ({} LP solves)", sol.selection, sol.value, sol.lp_solves);
    println!("exhaustive {best:?} value {theta}");
    Ok(())
}
