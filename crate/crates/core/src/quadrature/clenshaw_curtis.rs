//! Clenshaw-Curtis nodes and weights on [-1, 1], uniform probability weight.
//!
//! Level m >= 2 uses p = 2^(m-1) + 1 points x_k = cos(pi k / n) with
//! n = p - 1; level 1 is the midpoint rule. The cosine arguments k/n are
//! computed so that a level-m node and its level-(m+1) counterpart (index 2k)
//! divide to the identical f64 quotient, which makes the nesting bitwise.
//! Nodes are mirrored around zero by construction and the midpoint is exactly
//! 0.0.

/// Weights via the standard cosine sum, for the unit-mass weight. `n` is
/// even; `k <= n/2`.
fn weight_halved(n: usize, k: usize) -> f64 {
    let half = n / 2;
    let mut sum = 0.0;
    for j in 1..=half {
        let b = if j == half { 1.0 } else { 2.0 };
        let angle = std::f64::consts::PI * (2.0 * j as f64 * k as f64 / n as f64);
        sum += b * angle.cos() / ((4 * j * j - 1) as f64);
    }
    let c = if k == 0 || k == n { 1.0 } else { 2.0 };
    // division by 2 converts the classical mass-2 weights to probability
    c * (1.0 - sum) / n as f64 / 2.0
}

pub(super) fn rule(m: u32) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let n = 1usize << (m - 1); // p - 1, even
    let p = n + 1;
    let half = n / 2;

    // Upper half of the descending node list: x_k = cos(pi k/n), k = 0..=half.
    let mut upper = Vec::with_capacity(half + 1);
    for k in 0..=half {
        if k == half {
            upper.push(0.0);
        } else {
            let ratio = k as f64 / n as f64;
            upper.push((std::f64::consts::PI * ratio).cos());
        }
    }
    let mut half_weights = Vec::with_capacity(half + 1);
    for k in 0..=half {
        half_weights.push(weight_halved(n, k));
    }

    // Ascending points with exact mirror symmetry.
    let mut points = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    for k in (1..=half).rev() {
        points.push(-upper[half - k]);
        weights.push(half_weights[half - k]);
    }
    points.push(0.0);
    weights.push(half_weights[half]);
    for k in 1..=half {
        points.push(upper[half - k]);
        weights.push(half_weights[half - k]);
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_rule() {
        let (x, w) = rule(2);
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[2] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_rule_weights() {
        let (x, w) = rule(3);
        assert_eq!(x.len(), 5);
        assert!((w[0] - 1.0 / 30.0).abs() < 1e-15);
        assert!((w[1] - 4.0 / 15.0).abs() < 1e-15);
        assert!((w[2] - 2.0 / 5.0).abs() < 1e-15);
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nesting_is_bitwise() {
        let (one, _) = rule(1);
        let (three, _) = rule(2);
        assert_eq!(one[0].to_bits(), three[1].to_bits());
        for m in 2..=8u32 {
            let (coarse, _) = rule(m);
            let (fine, _) = rule(m + 1);
            for (i, &x) in coarse.iter().enumerate() {
                assert_eq!(x.to_bits(), fine[i * 2].to_bits(), "m={m} i={i}");
            }
        }
    }

    #[test]
    fn symmetry_is_exact() {
        let (x, w) = rule(5);
        let p = x.len();
        for i in 0..p {
            // value equality; the midpoint pairs 0.0 with -0.0
            assert!(x[i] == -x[p - 1 - i]);
            assert_eq!(w[i].to_bits(), w[p - 1 - i].to_bits());
        }
    }
}
