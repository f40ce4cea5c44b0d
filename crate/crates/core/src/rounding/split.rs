//! Facility splitting: every facility becomes one copy per distinct positive
//! assignment level, so each client uses a copy either fully or not at all.

use super::lp1::Lp1Solution;

const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFacility {
    /// Facility index of the original.
    pub original: usize,
    pub copy_index: usize,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub copies: Vec<SplitFacility>,
    /// `F_i`: copies used by each client, ascending.
    pub client_copies: Vec<Vec<usize>>,
}

pub fn split_facilities(sol: &Lp1Solution, num_facilities: usize) -> Split {
    // Distinct positive levels per facility.
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); num_facilities];
    for xi in &sol.x {
        for &(j, v) in xi {
            if v > LEVEL_TOL {
                levels[j].push(v);
            }
        }
    }
    let mut copies = Vec::new();
    let mut first_copy = vec![0usize; num_facilities];
    for (j, lv) in levels.iter_mut().enumerate() {
        lv.sort_by(f64::total_cmp);
        lv.dedup_by(|b, a| (*b - *a).abs() <= LEVEL_TOL);
        first_copy[j] = copies.len();
        let mut prev = 0.0;
        for (q, &v) in lv.iter().enumerate() {
            copies.push(SplitFacility {
                original: j,
                copy_index: q,
                capacity: v - prev,
            });
            prev = v;
        }
        let rest = sol.y[j] - prev;
        if rest > LEVEL_TOL {
            copies.push(SplitFacility {
                original: j,
                copy_index: lv.len(),
                capacity: rest,
            });
        }
    }
    let client_copies = sol
        .x
        .iter()
        .map(|xi| {
            let mut fi = Vec::new();
            for &(j, v) in xi {
                if v <= LEVEL_TOL {
                    continue;
                }
                // Copies of j up to and including the level of v.
                let lv = &levels[j];
                let upto = lv.partition_point(|&l| l < v - LEVEL_TOL) + 1;
                fi.extend(first_copy[j]..first_copy[j] + upto.min(lv.len()));
            }
            fi
        })
        .collect();
    Split {
        copies,
        client_copies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(x: Vec<Vec<(usize, f64)>>, y: Vec<f64>) -> Lp1Solution {
        Lp1Solution {
            x,
            y,
            z: 0.0,
            columns: 0,
            pricing_rounds: 0,
        }
    }

    #[test]
    fn integral_assignment_has_one_copy_per_facility() {
        let s = split_facilities(&sol(vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)]], vec![1.0, 1.0]), 2);
        assert_eq!(s.copies.len(), 2);
        assert!(s.copies.iter().all(|c| c.capacity == 1.0));
        assert_eq!(s.client_copies, vec![vec![0], vec![1], vec![1]]);
    }

    #[test]
    fn two_levels_give_incremental_capacities() {
        let s = split_facilities(
            &sol(vec![vec![(0, 0.3), (1, 0.7)], vec![(0, 0.7), (1, 0.3)]], vec![0.7, 0.7]),
            2,
        );
        let caps: Vec<f64> = s.copies.iter().filter(|c| c.original == 0).map(|c| c.capacity).collect();
        assert_eq!(caps.len(), 2);
        assert!((caps[0] - 0.3).abs() < 1e-12 && (caps[1] - 0.4).abs() < 1e-12);
        for fi in &s.client_copies {
            let total: f64 = fi.iter().map(|&c| s.copies[c].capacity).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unused_opening_becomes_a_leftover_copy() {
        let s = split_facilities(&sol(vec![vec![(0, 0.5), (1, 0.5)]], vec![0.5, 1.5]), 2);
        let total: f64 = s.copies.iter().filter(|c| c.original == 1).map(|c| c.capacity).sum();
        assert!((total - 1.5).abs() < 1e-12);
        assert_eq!(s.client_copies[0].len(), 2);
    }
}
