use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rotation::{angle_count, axis_pairs, build_rotation};
use super::PartitionError;
use crate::diffcore::tape::{log_sigmoid, sigmoid};
use crate::diffcore::{DiffError, ParameterStore, Tape, Var};

/// One ellipsoidal region of preference space.
///
/// `G(p) = σ(α) · exp(−½ (p−μ)ᵀ Σ⁻¹ (p−μ))` with `Σ = R S Sᵀ Rᵀ`,
/// `S = diag(exp(log_scales))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSubspace {
    pub id: u64,
    pub birth: usize,
    pub center: Vec<f64>,
    pub angles: Vec<f64>,
    pub log_scales: Vec<f64>,
    pub opacity_logit: f64,
}

impl GaussianSubspace {
    pub fn new(
        id: u64,
        birth: usize,
        center: Vec<f64>,
        scale: f64,
        opacity: f64,
    ) -> Result<Self, PartitionError> {
        let m = center.len();
        if m < 2 || !(scale > 0.0) || !(opacity > 0.0 && opacity < 1.0) {
            return Err(PartitionError::InvalidArgument(format!(
                "subspace needs dimension >= 2, scale > 0 and opacity in (0,1); got {m}, {scale}, {opacity}"
            )));
        }
        Ok(Self {
            id,
            birth,
            angles: vec![0.0; angle_count(m)],
            log_scales: vec![scale.ln(); m],
            opacity_logit: (opacity / (1.0 - opacity)).ln(),
            center,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn scales(&self) -> Vec<f64> {
        self.log_scales.iter().map(|s| s.exp()).collect()
    }

    pub fn max_scale(&self) -> f64 {
        self.scales().into_iter().fold(f64::MIN, f64::max)
    }

    pub fn mean_scale(&self) -> f64 {
        self.scales().iter().sum::<f64>() / self.dim() as f64
    }

    /// `σ(α)`
    pub fn opacity(&self) -> f64 {
        sigmoid(self.opacity_logit)
    }

    pub fn rotation(&self) -> Result<DMatrix<f64>, PartitionError> {
        build_rotation(&self.angles, self.dim())
    }

    /// `R S Sᵀ Rᵀ`
    pub fn covariance(&self) -> Result<DMatrix<f64>, PartitionError> {
        let r = self.rotation()?;
        let s2 = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.log_scales.iter().map(|l| (2.0 * l).exp()),
        ));
        Ok(&r * s2 * r.transpose())
    }

    /// Squared Mahalanobis distance through a Cholesky solve of the
    /// covariance.
    pub fn mahalanobis_sq(&self, p: &[f64]) -> Result<f64, PartitionError> {
        if p.len() != self.dim() {
            return Err(PartitionError::InvalidArgument(format!(
                "point of dimension {} for a {}-dimensional subspace",
                p.len(),
                self.dim()
            )));
        }
        let cov = self.covariance()?;
        let chol = cov.cholesky().ok_or_else(|| {
            PartitionError::Internal(format!("covariance of subspace {} is not SPD", self.id))
        })?;
        let diff = DVector::from_iterator(self.dim(), p.iter().zip(&self.center).map(|(a, b)| a - b));
        let solved = chol.solve(&diff);
        Ok(diff.dot(&solved))
    }

    pub fn log_density(&self, p: &[f64]) -> Result<f64, PartitionError> {
        let d2 = self.mahalanobis_sq(p)?;
        Ok(log_sigmoid(self.opacity_logit) - 0.5 * d2)
    }

    pub fn density(&self, p: &[f64]) -> Result<f64, PartitionError> {
        Ok(self.log_density(p)?.exp())
    }

    pub fn param_prefix(id: u64) -> String {
        format!("gauss.{id:05}.")
    }

    fn names(id: u64) -> [String; 4] {
        let p = Self::param_prefix(id);
        [
            format!("{p}angles"),
            format!("{p}log_scales"),
            format!("{p}mu"),
            format!("{p}opacity"),
        ]
    }

    pub fn center_param_name(id: u64) -> String {
        format!("{}mu", Self::param_prefix(id))
    }

    pub fn write_params(&self, store: &mut ParameterStore) -> Result<(), DiffError> {
        let [a, s, m, o] = Self::names(self.id);
        let k = self.dim();
        store.insert(a, vec![self.angles.len()], self.angles.clone())?;
        store.insert(s, vec![k], self.log_scales.clone())?;
        store.insert(m, vec![k], self.center.clone())?;
        store.insert(o, vec![1], vec![self.opacity_logit])?;
        Ok(())
    }

    pub fn read_params(&mut self, store: &ParameterStore) -> Result<(), DiffError> {
        let [a, s, m, o] = Self::names(self.id);
        let get = |n: &String| {
            store
                .values(n)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| DiffError::UnknownParameter(n.clone()))
        };
        self.angles = get(&a)?;
        self.log_scales = get(&s)?;
        self.center = get(&m)?;
        self.opacity_logit = get(&o)?[0];
        Ok(())
    }

    /// Binds this subspace's parameters on `tape`.
    pub fn bind<'t>(&self, tape: &'t Tape, store: &ParameterStore) -> Result<BoundSubspace<'t>, DiffError> {
        let [a, s, m, o] = Self::names(self.id);
        let angles = tape.param(store, &a)?;
        let log_scales = tape.param(store, &s)?;
        let center = tape.param(store, &m)?;
        let alpha = tape.param(store, &o)?;
        Ok(BoundSubspace {
            center,
            angles,
            inv_scales: (-log_scales).exp(),
            log_opacity: alpha.log_sigmoid(),
            pairs: axis_pairs(self.dim()),
        })
    }
}

/// A subspace whose parameters live on a tape.
#[derive(Debug, Clone)]
pub struct BoundSubspace<'t> {
    center: Var<'t>,
    angles: Var<'t>,
    inv_scales: Var<'t>,
    log_opacity: Var<'t>,
    pairs: Vec<(usize, usize)>,
}

impl<'t> BoundSubspace<'t> {
    /// `ln σ(α) − ½ ‖S⁻¹ Rᵀ (p − μ)‖²`, with `Rᵀ` applied as the sequence of
    /// transposed planar rotations.
    pub fn log_density(&self, pref: Var<'t>) -> Result<Var<'t>, DiffError> {
        let tape = pref.tape();
        let mut v = pref - self.center;
        for (slot, &(i, j)) in self.pairs.iter().enumerate() {
            v = tape.plane_rotate_t(v, self.angles, slot, i, j)?;
        }
        let u = v * self.inv_scales;
        Ok(self.log_opacity - u.square().sum() * 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_at_center_is_opacity() {
        let g = GaussianSubspace::new(0, 0, vec![0.3, 0.7], 0.3, 0.9).unwrap();
        assert!((g.density(&[0.3, 0.7]).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn unit_covariance_distance_two() {
        let mut g = GaussianSubspace::new(0, 0, vec![0.0, 0.0, 0.0], 1.0, 0.5).unwrap();
        g.opacity_logit = 800.0; // σ(α) = 1 to machine precision
        let d = g.density(&[1.0, 1.0, 0.0]).unwrap();
        assert!((d - (-1.0f64).exp()).abs() < 1e-15);
        assert!((d - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn tape_route_matches_cholesky_route() {
        let g = GaussianSubspace {
            id: 3,
            birth: 0,
            center: vec![0.2, 0.5, 0.3],
            angles: vec![0.4, -1.1, 2.0],
            log_scales: vec![-1.0, -0.3, 0.2],
            opacity_logit: 0.7,
        };
        let mut store = ParameterStore::new();
        g.write_params(&mut store).unwrap();
        let p = [0.6, 0.1, 0.3];
        let tape = Tape::new();
        let bound = g.bind(&tape, &store).unwrap();
        let via_tape = bound.log_density(tape.constant(&p)).unwrap().scalar();
        let via_matrix = g.log_density(&p).unwrap();
        assert!(
            (via_tape - via_matrix).abs() < 1e-12,
            "{via_tape} vs {via_matrix}"
        );
    }

    #[test]
    fn params_round_trip_through_store() {
        let g = GaussianSubspace::new(7, 0, vec![0.2, 0.8], 0.3, 0.9).unwrap();
        let mut store = ParameterStore::new();
        g.write_params(&mut store).unwrap();
        let mut h = g.clone();
        h.center = vec![0.0, 0.0];
        h.read_params(&store).unwrap();
        assert_eq!(g, h);
    }
}
