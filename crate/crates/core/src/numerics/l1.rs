use super::matrix::norm1;

/// Euclidean projection of `v` onto `{w : ‖w‖₁ ≤ radius}` by sort-based thresholding.
pub fn l1_ball_project(v: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius >= 0.0, "radius must be non-negative");
    if radius == 0.0 {
        return vec![0.0; v.len()];
    }
    if norm1(v) <= radius {
        return v.to_vec();
    }
    let theta = l1_threshold(v, radius);
    v.iter()
        .map(|&x| x.signum() * (x.abs() - theta).max(0.0))
        .collect()
}

/// Soft-threshold level θ with `Σ max(|v_i| − θ, 0) = radius`, for `‖v‖₁ > radius > 0`.
fn l1_threshold(v: &[f64], radius: f64) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (k as f64 + 1.0);
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_point_unchanged() {
        assert_eq!(l1_ball_project(&[0.3, -0.2], 1.0), vec![0.3, -0.2]);
    }

    #[test]
    fn zero_radius() {
        assert_eq!(l1_ball_project(&[3.0, -1.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn threshold_examples() {
        // θ = 2 for (3, 1) onto radius 1
        let w = l1_ball_project(&[3.0, 1.0], 1.0);
        assert!((w[0] - 1.0).abs() < 1e-15 && w[1] == 0.0);
        // brute-force oracle: minimize distance over a fine grid of the boundary
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=200_000 {
            let a = -1.0 + 2.0 * k as f64 / 200_000.0;
            let b = 1.0 - a.abs();
            for bb in [b, -b] {
                let d = (3.0 - a).powi(2) + (1.0 - bb).powi(2);
                if d < best.0 {
                    best = (d, a);
                }
            }
        }
        assert!((best.1 - w[0]).abs() < 1e-4);

        let w = l1_ball_project(&[2.0, 2.0], 2.0);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signs_preserved() {
        let w = l1_ball_project(&[-3.0, 1.0, 0.5], 1.0);
        assert!(w[0] < 0.0);
        assert!((norm1(&w) - 1.0).abs() < 1e-12);
    }
}
