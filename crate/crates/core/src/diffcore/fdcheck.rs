use super::params::ParameterStore;
use super::tape::{Tape, Var};
use super::DiffError;

/// Compares tape gradients against central differences.
///
/// `build` records a scalar loss from the given parameters. It is run once
/// on the unperturbed store for the analytic gradient and twice per scalar
/// parameter for `(L(p+h) - L(p-h)) / 2h`. Returns the largest
/// `|analytic - numeric| / max(1, |numeric|)` over all entries.
pub fn finite_diff_check<F>(params: &ParameterStore, step: f64, build: F) -> Result<f64, DiffError>
where
    F: for<'t> Fn(&'t Tape, &ParameterStore) -> Result<Var<'t>, DiffError>,
{
    let mut analytic = params.clone();
    analytic.zero_grads();
    {
        let tape = Tape::new();
        let loss = build(&tape, params)?;
        tape.backward(loss)?.accumulate_into(&mut analytic)?;
    }

    let eval = |store: &ParameterStore| -> Result<f64, DiffError> {
        let tape = Tape::new();
        Ok(build(&tape, store)?.scalar())
    };

    let mut worst = 0.0f64;
    let mut probe = params.clone();
    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in &names {
        let len = params.values(name).map_or(0, <[f64]>::len);
        for i in 0..len {
            let base = params.values(name).unwrap()[i];
            probe.values_mut(name).unwrap()[i] = base + step;
            let up = eval(&probe)?;
            probe.values_mut(name).unwrap()[i] = base - step;
            let down = eval(&probe)?;
            probe.values_mut(name).unwrap()[i] = base;
            let numeric = (up - down) / (2.0 * step);
            let exact = analytic.grad(name).unwrap()[i];
            let err = (exact - numeric).abs() / numeric.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
