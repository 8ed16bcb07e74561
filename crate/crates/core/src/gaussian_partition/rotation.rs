use nalgebra::DMatrix;

use super::PartitionError;

/// Axis pairs `(i, j)`, `i < j`, in lexicographic order. One rotation angle
/// per pair.
pub fn axis_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

pub fn angle_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Planar rotation by `theta` in the `(i, j)` plane:
/// `R_ii = R_jj = cos θ`, `R_ij = sin θ`, `R_ji = −sin θ`.
pub fn plane_rotation(m: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(m, m);
    let (s, c) = theta.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = s;
    r[(j, i)] = -s;
    r
}

/// `m`-dimensional rotation as the ordered product of one planar rotation
/// per axis pair, left to right in [`axis_pairs`] order.
pub fn build_rotation(angles: &[f64], m: usize) -> Result<DMatrix<f64>, PartitionError> {
    if angles.len() != angle_count(m) {
        return Err(PartitionError::InvalidArgument(format!(
            "a {m}-dimensional rotation takes {} angles, got {}",
            angle_count(m),
            angles.len()
        )));
    }
    Ok(axis_pairs(m)
        .into_iter()
        .zip(angles)
        .fold(DMatrix::identity(m, m), |acc, ((i, j), &t)| {
            acc * plane_rotation(m, i, j, t)
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_angles_identity() {
        for m in 2..=4 {
            let r = build_rotation(&vec![0.0; angle_count(m)], m).unwrap();
            assert_eq!(r, DMatrix::identity(m, m));
        }
    }

    #[test]
    fn quarter_turn_in_plane() {
        let r = build_rotation(&[FRAC_PI_2], 2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((r - expected).abs().max() < 1e-15);
    }

    #[test]
    fn angle_counts() {
        assert_eq!(angle_count(3), 3);
        assert_eq!(angle_count(4), 6);
        assert!(build_rotation(&[0.1, 0.2], 3).is_err());
        assert!(build_rotation(&[0.1; 5], 4).is_err());
    }
}
