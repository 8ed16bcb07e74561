use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::ParameterStore;
use super::DiffError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Moments {
    steps: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

/// Adaptive-moment optimizer state.
///
/// Moments are keyed by parameter name and created lazily, so parameters
/// added mid-run (densification) start from zero moments and their own bias
/// correction clock. Moments of parameters no longer in the store are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    moments: BTreeMap<String, Moments>,
}

impl Default for OptimState {
    fn default() -> Self {
        Self::new(1e-3)
    }
}

impl OptimState {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            moments: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Forgets the moments of one parameter.
    pub fn reset(&mut self, name: &str) {
        self.moments.remove(name);
    }
}

/// One bias-corrected adaptive-moment update of every parameter in `params`.
///
/// Gradients are checked before anything is modified; a non-finite entry
/// aborts with the offending parameter's name and leaves the store untouched.
pub fn adam_step(params: &mut ParameterStore, state: &mut OptimState) -> Result<(), DiffError> {
    for (name, p) in params.iter() {
        if p.grad.iter().any(|g| !g.is_finite()) {
            return Err(DiffError::NonFinite {
                parameter: name.to_string(),
                what: "gradient",
            });
        }
    }
    state.moments.retain(|k, _| params.get(k).is_some());
    state.step += 1;
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.eps, state.lr);
    for (name, p) in params.iter_mut() {
        let m = state.moments.entry(name.to_string()).or_insert_with(|| Moments {
            steps: 0,
            first: vec![0.0; p.value.len()],
            second: vec![0.0; p.value.len()],
        });
        if m.first.len() != p.value.len() {
            *m = Moments {
                steps: 0,
                first: vec![0.0; p.value.len()],
                second: vec![0.0; p.value.len()],
            };
        }
        m.steps += 1;
        let c1 = 1.0 - b1.powi(m.steps as i32);
        let c2 = 1.0 - b2.powi(m.steps as i32);
        for i in 0..p.value.len() {
            let g = p.grad[i];
            m.first[i] = b1 * m.first[i] + (1.0 - b1) * g;
            m.second[i] = b2 * m.second[i] + (1.0 - b2) * g * g;
            let mh = m.first[i] / c1;
            let vh = m.second[i] / c2;
            p.value[i] -= lr * mh / (vh.sqrt() + eps);
        }
        if p.value.iter().any(|v| !v.is_finite()) {
            return Err(DiffError::NonFinite {
                parameter: name.to_string(),
                what: "value",
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(v: f64, g: f64) -> ParameterStore {
        let mut s = ParameterStore::new();
        s.insert("p", vec![1], vec![v]).unwrap();
        s.grad_mut("p").unwrap()[0] = g;
        s
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = store(0.7, 0.0);
        let mut st = OptimState::default();
        adam_step(&mut s, &mut st).unwrap();
        assert_eq!(s.values("p").unwrap()[0], 0.7);
        assert_eq!(st.step_count(), 1);
    }

    #[test]
    fn first_step_with_unit_gradient() {
        // m̂ = 1, v̂ = 1, so the update is lr / (1 + eps).
        let mut s = store(0.0, 1.0);
        let mut st = OptimState::new(1e-3);
        adam_step(&mut s, &mut st).unwrap();
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((s.values("p").unwrap()[0] - expected).abs() < 1e-18);
    }

    #[test]
    fn identical_inputs_identical_outputs() {
        let (mut a, mut b) = (store(0.3, -0.4), store(0.3, -0.4));
        let (mut sa, mut sb) = (OptimState::default(), OptimState::default());
        for _ in 0..5 {
            adam_step(&mut a, &mut sa).unwrap();
            adam_step(&mut b, &mut sb).unwrap();
        }
        assert_eq!(
            a.values("p").unwrap()[0].to_bits(),
            b.values("p").unwrap()[0].to_bits()
        );
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut s = store(0.3, f64::NAN);
        let err = adam_step(&mut s, &mut OptimState::default()).unwrap_err();
        match err {
            DiffError::NonFinite { parameter, .. } => assert_eq!(parameter, "p"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(s.values("p").unwrap()[0], 0.3);
    }
}
