//! Build a small instance by hand, score a center set and find the optimum.

use fairclust::{brute_force_opt, evaluate, CenterSet, Instance, OracleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // six points on a line; the first four are clients in two groups,
    // every point may host a center.
    let coords: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 9.0, 4.0, 8.0].iter().map(|&x| vec![x]).collect();
    let groups = vec![vec![(0, None), (1, None)], vec![(2, None), (3, None)]];
    let inst = Instance::euclidean(coords, vec![0, 1, 2, 3], (0..6).collect(), groups, 2, 1.0)?;

    let guess = CenterSet::new(vec![1, 5])?;
    let cost = evaluate(&inst, &guess)?;
    println!("centers {guess}: per group {:?}, objective {}", cost.per_group, cost.objective);

    let (best, opt) = brute_force_opt(&inst, &OracleOptions::default())?;
    println!("optimum {best}: per group {:?}, objective {}", opt.per_group, opt.objective);

    // the same instance as JSON, as read by `fairclust oracle`.
    println!("{}", inst.to_json_string()?);
    Ok(())
}
