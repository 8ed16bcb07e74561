use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::ParameterStore;
use super::tape::{sigmoid, Tape, Var};
use super::DiffError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Logistic,
}

/// Dense network layout. Hidden layers use the rectifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub output: OutputActivation,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, output: OutputActivation) -> Result<Self, DiffError> {
        if widths.len() < 3 {
            return Err(DiffError::InvalidArgument(format!(
                "an MLP needs input, at least one hidden layer and output; got widths {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(DiffError::InvalidArgument(format!(
                "zero-width layer in {widths:?}"
            )));
        }
        Ok(Self { widths, output })
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// Weights plus biases across all layers.
    pub fn parameter_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn weight_name(prefix: &str, layer: usize) -> String {
        format!("{prefix}.w{layer}")
    }

    pub fn bias_name(prefix: &str, layer: usize) -> String {
        format!("{prefix}.b{layer}")
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_params<R: Rng + ?Sized>(
        &self,
        store: &mut ParameterStore,
        prefix: &str,
        rng: &mut R,
    ) -> Result<(), DiffError> {
        for (l, w) in self.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_in * fan_out).map(|_| rng.random_range(-a..=a)).collect();
            store.insert(Self::weight_name(prefix, l), vec![fan_out, fan_in], weights)?;
            store.insert(Self::bias_name(prefix, l), vec![fan_out], vec![0.0; fan_out])?;
        }
        Ok(())
    }

    /// All-zero weights and biases.
    pub fn zero_params(&self, store: &mut ParameterStore, prefix: &str) -> Result<(), DiffError> {
        for (l, w) in self.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            store.insert(
                Self::weight_name(prefix, l),
                vec![fan_out, fan_in],
                vec![0.0; fan_in * fan_out],
            )?;
            store.insert(Self::bias_name(prefix, l), vec![fan_out], vec![0.0; fan_out])?;
        }
        Ok(())
    }

    fn layer<'a>(
        &self,
        params: &'a ParameterStore,
        prefix: &str,
        l: usize,
    ) -> Result<(&'a [f64], &'a [f64]), DiffError> {
        let wn = Self::weight_name(prefix, l);
        let bn = Self::bias_name(prefix, l);
        let w = params.values(&wn).ok_or(DiffError::UnknownParameter(wn))?;
        let b = params.values(&bn).ok_or(DiffError::UnknownParameter(bn))?;
        let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
        if w.len() != fan_in * fan_out || b.len() != fan_out {
            return Err(DiffError::Shape(format!(
                "layer {l} of {prefix} does not match widths {:?}",
                self.widths
            )));
        }
        Ok((w, b))
    }

    /// Plain evaluation without recording.
    pub fn forward(
        &self,
        params: &ParameterStore,
        prefix: &str,
        input: &[f64],
    ) -> Result<Vec<f64>, DiffError> {
        if input.len() != self.input_width() {
            return Err(DiffError::InvalidArgument(format!(
                "MLP input has length {}, expected {}",
                input.len(),
                self.input_width()
            )));
        }
        let mut h = input.to_vec();
        for l in 0..self.layer_count() {
            let (w, b) = self.layer(params, prefix, l)?;
            let cols = h.len();
            let mut next: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(r, &bias)| {
                    w[r * cols..(r + 1) * cols]
                        .iter()
                        .zip(&h)
                        .fold(bias, |acc, (a, x)| acc + a * x)
                })
                .collect();
            if l + 1 < self.layer_count() {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            } else if self.output == OutputActivation::Logistic {
                next.iter_mut().for_each(|v| *v = sigmoid(*v));
            }
            h = next;
        }
        Ok(h)
    }

    /// Binds this network's parameters on `tape`.
    pub fn bind<'t>(
        &self,
        tape: &'t Tape,
        params: &ParameterStore,
        prefix: &str,
    ) -> Result<BoundMlp<'t>, DiffError> {
        let mut layers = Vec::with_capacity(self.layer_count());
        for l in 0..self.layer_count() {
            self.layer(params, prefix, l)?;
            let w = tape.param(params, &Self::weight_name(prefix, l))?;
            let b = tape.param(params, &Self::bias_name(prefix, l))?;
            layers.push((w, b));
        }
        Ok(BoundMlp {
            layers,
            input_width: self.input_width(),
            output: self.output,
        })
    }
}

/// An [`MlpSpec`] whose parameters live on a tape.
#[derive(Debug, Clone)]
pub struct BoundMlp<'t> {
    layers: Vec<(Var<'t>, Var<'t>)>,
    input_width: usize,
    output: OutputActivation,
}

impl<'t> BoundMlp<'t> {
    pub fn forward(&self, input: Var<'t>) -> Result<Var<'t>, DiffError> {
        if input.len() != self.input_width {
            return Err(DiffError::InvalidArgument(format!(
                "MLP input has length {}, expected {}",
                input.len(),
                self.input_width
            )));
        }
        let tape = input.tape();
        let mut h = input;
        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            h = tape.affine(w, b, h)?;
            if l < last {
                h = h.relu();
            } else if self.output == OutputActivation::Logistic {
                h = h.sigmoid();
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_gives_zero() {
        let spec = MlpSpec::new(vec![3, 4, 2], OutputActivation::Identity).unwrap();
        let mut s = ParameterStore::new();
        spec.zero_params(&mut s, "m").unwrap();
        assert_eq!(spec.forward(&s, "m", &[1.0, -2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rectifier_clamps_negative_hidden() {
        let spec = MlpSpec::new(vec![1, 1, 1], OutputActivation::Identity).unwrap();
        let mut s = ParameterStore::new();
        s.insert("m.w0", vec![1, 1], vec![1.0]).unwrap();
        s.insert("m.b0", vec![1], vec![0.0]).unwrap();
        s.insert("m.w1", vec![1, 1], vec![1.0]).unwrap();
        s.insert("m.b1", vec![1], vec![0.0]).unwrap();
        assert_eq!(spec.forward(&s, "m", &[-2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = MlpSpec::new(vec![2, 3, 1], OutputActivation::Identity).unwrap();
        let mut s = ParameterStore::new();
        spec.zero_params(&mut s, "m").unwrap();
        assert!(matches!(
            spec.forward(&s, "m", &[1.0]),
            Err(DiffError::InvalidArgument(_))
        ));
    }

    #[test]
    fn needs_a_hidden_layer() {
        assert!(MlpSpec::new(vec![2, 1], OutputActivation::Identity).is_err());
        assert!(MlpSpec::new(vec![2, 0, 1], OutputActivation::Identity).is_err());
    }

    #[test]
    fn glorot_bounds_and_counts() {
        let spec = MlpSpec::new(vec![3, 8, 2], OutputActivation::Identity).unwrap();
        let mut s = ParameterStore::new();
        spec.init_params(&mut s, "m", &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        assert_eq!(s.scalar_count(), spec.parameter_count());
        assert_eq!(spec.parameter_count(), 3 * 8 + 8 + 8 * 2 + 2);
        let a = (6.0f64 / 11.0).sqrt();
        assert!(s.values("m.w0").unwrap().iter().all(|w| w.abs() <= a));
        assert!(s.values("m.b0").unwrap().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn recorded_forward_matches_plain() {
        let spec = MlpSpec::new(vec![3, 8, 2], OutputActivation::Logistic).unwrap();
        let mut s = ParameterStore::new();
        spec.init_params(&mut s, "m", &mut ChaCha8Rng::seed_from_u64(2))
            .unwrap();
        let x = [0.2, -0.7, 1.3];
        let tape = Tape::new();
        let net = spec.bind(&tape, &s, "m").unwrap();
        let y = net.forward(tape.constant(&x)).unwrap().value();
        assert_eq!(y, spec.forward(&s, "m", &x).unwrap());
    }
}
