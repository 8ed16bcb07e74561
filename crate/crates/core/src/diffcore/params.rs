use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DiffError;

/// One named parameter tensor with its gradient slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
}

/// Named parameters, iterated in lexicographic name order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterStore {
    entries: BTreeMap<String, Parameter>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        name: impl Into<String>,
        shape: Vec<usize>,
        value: Vec<f64>,
    ) -> Result<(), DiffError> {
        let name = name.into();
        let expected: usize = shape.iter().product();
        if expected != value.len() {
            return Err(DiffError::Shape(format!(
                "parameter {name}: shape {shape:?} holds {expected} values, got {}",
                value.len()
            )));
        }
        let grad = vec![0.0; value.len()];
        self.entries.insert(name, Parameter { shape, value, grad });
        Ok(())
    }

    pub fn remove(&mut self, name: &str) -> Option<Parameter> {
        self.entries.remove(name)
    }

    /// Removes every parameter whose name starts with `prefix`.
    pub fn remove_prefix(&mut self, prefix: &str) -> usize {
        let before = self.entries.len();
        self.entries.retain(|k, _| !k.starts_with(prefix));
        before - self.entries.len()
    }

    /// Copies every parameter under `from` to the same suffix under `to`.
    pub fn copy_prefix(&mut self, from: &str, to: &str) {
        let copies: Vec<(String, Parameter)> = self
            .entries
            .range(from.to_string()..)
            .take_while(|(k, _)| k.starts_with(from))
            .map(|(k, p)| {
                let mut p = p.clone();
                p.grad.iter_mut().for_each(|g| *g = 0.0);
                (format!("{to}{}", &k[from.len()..]), p)
            })
            .collect();
        self.entries.extend(copies);
    }

    pub fn get(&self, name: &str) -> Option<&Parameter> {
        self.entries.get(name)
    }

    pub fn values(&self, name: &str) -> Option<&[f64]> {
        self.entries.get(name).map(|p| p.value.as_slice())
    }

    pub fn values_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        self.entries.get_mut(name).map(|p| p.value.as_mut_slice())
    }

    pub fn grad(&self, name: &str) -> Option<&[f64]> {
        self.entries.get(name).map(|p| p.grad.as_slice())
    }

    pub fn grad_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        self.entries.get_mut(name).map(|p| p.grad.as_mut_slice())
    }

    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            p.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Parameter)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Parameter)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.values().map(|p| p.value.len()).sum()
    }

    /// Scalar count of the entries whose name starts with `prefix`.
    pub fn scalar_count_with_prefix(&self, prefix: &str) -> usize {
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, p)| p.value.len())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_slot_matches_shape_and_zeroes() {
        let mut s = ParameterStore::new();
        s.insert("w", vec![2, 3], vec![1.0; 6]).unwrap();
        s.grad_mut("w").unwrap()[4] = 7.0;
        assert_eq!(s.grad("w").unwrap().len(), 6);
        s.zero_grads();
        assert!(s.grad("w").unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut s = ParameterStore::new();
        assert!(s.insert("w", vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn copy_and_remove_prefix() {
        let mut s = ParameterStore::new();
        s.insert("a.w", vec![1], vec![1.0]).unwrap();
        s.insert("a.b", vec![1], vec![2.0]).unwrap();
        s.insert("ab.w", vec![1], vec![3.0]).unwrap();
        s.copy_prefix("a.", "c.");
        assert_eq!(s.values("c.w"), Some(&[1.0][..]));
        assert_eq!(s.values("c.b"), Some(&[2.0][..]));
        assert_eq!(s.remove_prefix("a."), 2);
        assert_eq!(s.len(), 3);
    }
}
