//! Central finite-difference oracle for the analytic gradients.

use super::graph::{Graph, NodeId};
use super::params::ParamStore;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// `(parameter name, relative error)` for every trainable parameter.
    pub per_param: Vec<(String, f64)>,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.per_param.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }
}

/// `‖a − n‖ / max(‖a‖ + ‖n‖, floor)` over the entries of one parameter.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / (na + nn).max(1e-12)
}

/// Compares backward-pass gradients of the scalar built by `loss` against
/// central differences with the given `step`, for every trainable parameter.
///
/// `loss` must be deterministic: any randomness (dropout masks) has to be
/// re-seeded inside it.
pub fn gradient_check<F>(store: &mut ParamStore, step: f64, loss: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<'_>) -> Result<NodeId>,
{
    let analytic: Vec<_> = {
        let mut g = Graph::new(store);
        let l = loss(&mut g)?;
        let grads = g.backward(l)?;
        store
            .ids()
            .filter(|&id| store.is_trainable(id))
            .map(|id| {
                let a = grads
                    .param(id)
                    .map(|t| t.data().to_vec())
                    .unwrap_or_else(|| vec![0.0; store.get(id).len()]);
                (id, a)
            })
            .collect()
    };

    let eval = |store: &ParamStore| -> Result<f64> {
        let mut g = Graph::new(store);
        let l = loss(&mut g)?;
        Ok(g.value(l).data()[0])
    };

    let mut per_param = Vec::new();
    for (id, a) in analytic {
        let mut numeric = vec![0.0; a.len()];
        for (k, slot) in numeric.iter_mut().enumerate() {
            let orig = store.get(id).data()[k];
            store.get_mut(id).data_mut()[k] = orig + step;
            let plus = eval(store)?;
            store.get_mut(id).data_mut()[k] = orig - step;
            let minus = eval(store)?;
            store.get_mut(id).data_mut()[k] = orig;
            *slot = (plus - minus) / (2.0 * step);
        }
        per_param.push((store.name(id).to_string(), relative_error(&a, &numeric)));
    }
    Ok(GradCheckReport { per_param })
}
