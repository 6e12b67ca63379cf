//! The renormalization-group operator on flow maps, the model-A fixed point,
//! and convergence diagnostics in Cantor coordinates.

mod fixed_point;
mod metric;

pub use fixed_point::{fixed_point_a, fixed_point_a_map, random_bit_map};
pub use metric::{convergence_metric, map_table_export, Convergence, MapRow};

use crate::lattice::ModelSpec;
use crate::solver::{xi, FlowMap, Provenance};

/// `a -> sigma_-(psi(psi(sigma_+(a)))) + xi(a)`.
///
/// The result reads one more input component than `psi` and keeps its own
/// memo table, so iterating shares work across levels.
pub fn rg_apply(psi: &FlowMap, model: ModelSpec) -> FlowMap {
    let inner = psi.clone();
    let provenance = Provenance::Renormalized {
        model,
        base: Box::new(psi.provenance().clone()),
    };
    FlowMap::new(psi.space(), psi.depth().map(|d| d + 1), provenance, move |a| {
        let once = inner.apply(&a.shift_up())?;
        let twice = inner.apply(&once)?;
        twice.shift_down().add(&xi(&model, a)?)
    })
}

/// `k`-fold application of [`rg_apply`].
pub fn rg_iterate(initial: &FlowMap, model: ModelSpec, k: u32) -> FlowMap {
    (0..k).fold(initial.clone(), |psi, _| rg_apply(&psi, model))
}
