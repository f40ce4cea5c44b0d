//! Distances rounded to the nearest power of `1+λ`, kept as integer exponents
//! so that comparisons against `D_i/(1+λ)` are exact.

use crate::model::Instance;

/// Exponent of the nearest power of `base` to `d`; `None` for `d = 0`.
pub fn rounded_exponent(d: f64, base: f64) -> Option<i32> {
    if d <= 0.0 {
        return None;
    }
    let e = (d.ln() / base.ln()).round();
    let mut e = e as i32;
    // Guard against ln rounding when d sits exactly on a grid point.
    let fit = |e: i32| (base.powi(e) - d).abs();
    if fit(e - 1) < fit(e) {
        e -= 1;
    } else if fit(e + 1) < fit(e) {
        e += 1;
    }
    Some(e)
}

/// `d` rounded to the nearest power of `1+λ`.
pub fn round_distance(d: f64, lambda: f64) -> f64 {
    match rounded_exponent(d, 1.0 + lambda) {
        None => 0.0,
        Some(e) => (1.0 + lambda).powi(e),
    }
}

/// Rounded client-facility distances as exponents of `1+λ`.
#[derive(Debug, Clone)]
pub struct RoundedDistances {
    base: f64,
    p: f64,
    f: usize,
    exp: Vec<Option<i32>>,
}

impl RoundedDistances {
    pub fn new(inst: &Instance, lambda: f64) -> Self {
        let base = 1.0 + lambda;
        let f = inst.num_facilities();
        let mut exp = Vec::with_capacity(inst.num_clients() * f);
        for i in 0..inst.num_clients() {
            for j in 0..f {
                exp.push(rounded_exponent(inst.dist_cf(i, j), base));
            }
        }
        Self {
            base,
            p: inst.p(),
            f,
            exp,
        }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Exponent for client index `i` and facility index `j`.
    #[inline]
    pub fn exponent(&self, i: usize, j: usize) -> Option<i32> {
        self.exp[i * self.f + j]
    }

    /// Value of a grid level.
    #[inline]
    pub fn level(&self, e: Option<i32>) -> f64 {
        e.map_or(0.0, |e| self.base.powi(e))
    }

    /// `level^p`.
    #[inline]
    pub fn level_pow(&self, e: Option<i32>) -> f64 {
        e.map_or(0.0, |e| self.base.powf(e as f64 * self.p))
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.level(self.exponent(i, j))
    }

    /// All-pairs shortest paths over the bipartite client-facility graph with
    /// rounded edge lengths: the metric completion restricted to clients x
    /// facilities. Row-major `clients x facilities`.
    pub fn completion(&self, clients: usize) -> Vec<f64> {
        let f = self.f;
        let v = clients + f;
        let mut d = vec![f64::INFINITY; v * v];
        for a in 0..v {
            d[a * v + a] = 0.0;
        }
        for i in 0..clients {
            for j in 0..f {
                let w = self.value(i, j);
                d[i * v + clients + j] = w;
                d[(clients + j) * v + i] = w;
            }
        }
        for mid in 0..v {
            for a in 0..v {
                let am = d[a * v + mid];
                if am.is_infinite() {
                    continue;
                }
                for b in 0..v {
                    let cand = am + d[mid * v + b];
                    if cand < d[a * v + b] {
                        d[a * v + b] = cand;
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(clients * f);
        for i in 0..clients {
            for j in 0..f {
                out.push(d[i * v + clients + j]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_power_rounding() {
        assert_eq!(round_distance(3.0, 1.0), 4.0);
        assert_eq!(round_distance(0.0, 0.5), 0.0);
        assert_eq!(round_distance(8.0, 1.0), 8.0);
        let l = (2.0f64 / 3.0).sqrt();
        let g = (1.0 + l).powi(5);
        assert_eq!(rounded_exponent(g, 1.0 + l), Some(5));
        assert_eq!(rounded_exponent(0.25, 2.0), Some(-2));
    }

    #[test]
    fn rounding_distortion_is_bounded() {
        for lambda in [0.1, 0.3, (2.0f64 / 3.0).sqrt(), 1.0] {
            for q in 1..400 {
                let d = q as f64 * 0.037;
                let r = round_distance(d, lambda);
                assert!(r <= d * (1.0 + lambda) && r >= d / (1.0 + lambda));
            }
        }
    }
}
