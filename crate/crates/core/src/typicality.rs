//! Typical-set membership, i.i.d. sampling, convergence diagnostics, and
//! projection of typicality onto coordinates.

use crate::classes::{FunctionClass, ProductSplit};
use crate::error::{Error, Result};
use crate::measure::{empirical_measure, ModelMeasure, SignedDifference};
use crate::point::Point;
use crate::rng::SplitMix64;
use crate::seminorm::seminorm;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct TypicalityQuery {
    pub tuple: Vec<Point>,
    pub model: ModelMeasure,
    pub class: FunctionClass,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityResult {
    pub typical: bool,
    pub deviation: f64,
}

/// Membership test: deviation strictly below epsilon.
pub fn is_typical(q: &TypicalityQuery) -> Result<TypicalityResult> {
    if !(q.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let emp = empirical_measure(&q.tuple)?;
    let diff = SignedDifference::against_model(emp, q.model.clone())?;
    let dev = seminorm(&q.class, &diff)?;
    Ok(TypicalityResult {
        typical: dev.value < q.epsilon,
        deviation: dev.value,
    })
}

/// Draws an i.i.d. n-tuple. Deterministic given the seed.
pub fn sample_iid(model: &ModelMeasure, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(model.sample_point(&mut rng)?);
    }
    Ok(out)
}

/// One Monte Carlo draw of the deviation statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRecord {
    pub class_id: String,
    pub model_id: String,
    pub n: usize,
    pub trial: usize,
    pub deviation: f64,
}

pub fn model_id(model: &ModelMeasure) -> String {
    use crate::measure::ModelKind::*;
    match &model.kind {
        FinitePmf(w) => alloc::format!("finite_pmf({})", w.len()),
        UniformBox { lo, .. } => alloc::format!("uniform_box({})", lo.len()),
        ReferenceSample(s) => alloc::format!("reference_sample({})", s.len()),
    }
}

/// Seed of the stream used for (grid index, trial); exposed so callers can
/// re-run a single trial in isolation.
pub fn trial_seed(base_seed: u64, grid_index: usize, trial: usize) -> u64 {
    let mut s = SplitMix64::new(base_seed).split2(grid_index as u64, trial as u64);
    s.next_u64()
}

/// Samples `trials` tuples per grid point and records the deviation
/// ||P_{Z^n} - P||_F. Each record's stream depends only on (seed, grid
/// index, trial), so any execution order gives identical output.
pub fn convergence_curve(
    model: &ModelMeasure,
    class: &FunctionClass,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<DeviationRecord>> {
    if n_grid.is_empty() || trials == 0 {
        return Err(Error::InvalidArgument("empty grid or zero trials".into()));
    }
    if n_grid.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(n_grid.len() * trials);
    for (gi, &n) in n_grid.iter().enumerate() {
        for trial in 0..trials {
            records.push(deviation_trial(model, class, n, gi, trial, seed)?);
        }
    }
    Ok(records)
}

/// A single (grid point, trial) record; the unit of parallelism.
pub fn deviation_trial(
    model: &ModelMeasure,
    class: &FunctionClass,
    n: usize,
    grid_index: usize,
    trial: usize,
    seed: u64,
) -> Result<DeviationRecord> {
    let tuple = sample_iid(model, n, trial_seed(seed, grid_index, trial))?;
    let emp = empirical_measure(&tuple)?;
    let diff = SignedDifference::against_model(emp, model.clone())?;
    let dev = seminorm(class, &diff)?;
    Ok(DeviationRecord {
        class_id: class.id(),
        model_id: model_id(model),
        n,
        trial,
        deviation: dev.value,
    })
}

/// Per-n mean deviations, in grid order.
pub fn mean_by_n(records: &[DeviationRecord], n_grid: &[usize]) -> Vec<(usize, f64)> {
    n_grid
        .iter()
        .map(|&n| {
            let (mut s, mut c) = (0.0, 0usize);
            for r in records.iter().filter(|r| r.n == n) {
                s += r.deviation;
                c += 1;
            }
            (n, if c == 0 { 0.0 } else { s / c as f64 })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub joint: bool,
    pub marginal: bool,
    pub joint_deviation: f64,
    pub marginal_deviation: f64,
}

/// Checks that the descriptor pair (F on X x Y, F_X on X) satisfies
/// F_X o pi_X being a subset of F, structurally. Only pairs with a proof are
/// accepted: anything else is rejected rather than heuristically allowed.
pub fn projection_pair_supported(
    class: &FunctionClass,
    class_x: &FunctionClass,
    split: &ProductSplit,
) -> bool {
    use FunctionClass::*;
    match (class, class_x, split) {
        // f on X lifts to f o pi with the same bound.
        (AllFunctions { alphabet }, AllFunctions { alphabet: ax }, ProductSplit::SymbolPair { x_card, y_card }) => {
            *alphabet == x_card * y_card && ax == x_card
        }
        // <w, x> + b = <(w, 0), (x, y)> + b.
        (Halfspaces { dim }, Halfspaces { dim: dx }, ProductSplit::VectorPrefix { x_dim }) => {
            dx == x_dim && *dim > *x_dim
        }
        (Halfspaces { dim }, HalfLines, ProductSplit::VectorPrefix { x_dim }) => {
            *x_dim == 1 && *dim > 1
        }
        // A box on X times the full Y range is a box on the product.
        (Rectangles { dim }, Rectangles { dim: dx }, ProductSplit::VectorPrefix { x_dim }) => {
            dx == x_dim && *dim > *x_dim
        }
        (Rectangles { dim }, HalfLines, ProductSplit::VectorPrefix { x_dim }) => {
            *x_dim == 1 && *dim > 1
        }
        // |f(x) - f(x')| <= |x - x'| <= |z - z'| under the Euclidean metric.
        (BoundedLipschitz, BoundedLipschitz, ProductSplit::VectorPrefix { .. }) => true,
        _ => false,
    }
}

/// Joint and marginal typicality flags for a product tuple. Joint typicality
/// implies marginal typicality whenever the pair hypothesis holds; the
/// converse is not claimed.
pub fn project_typical(
    tuple: &[Point],
    model: &ModelMeasure,
    class: &FunctionClass,
    class_x: &FunctionClass,
    split: &ProductSplit,
    epsilon: f64,
) -> Result<ProjectionResult> {
    if !projection_pair_supported(class, class_x, split) {
        return Err(Error::UnsupportedProjectionPair);
    }
    let joint = is_typical(&TypicalityQuery {
        tuple: tuple.to_vec(),
        model: model.clone(),
        class: class.clone(),
        epsilon,
    })?;
    // Marginal side: project the tuple and the model.
    let x_tuple: Vec<Point> = tuple
        .iter()
        .map(|p| split.project_x(p))
        .collect::<Result<_>>()?;
    let x_model = marginal_model(model, split)?;
    let marginal = is_typical(&TypicalityQuery {
        tuple: x_tuple,
        model: x_model,
        class: class_x.clone(),
        epsilon,
    })?;
    Ok(ProjectionResult {
        joint: joint.typical,
        marginal: marginal.typical,
        joint_deviation: joint.deviation,
        marginal_deviation: marginal.deviation,
    })
}

fn marginal_model(model: &ModelMeasure, split: &ProductSplit) -> Result<ModelMeasure> {
    use crate::measure::ModelKind::*;
    Ok(match (&model.kind, split) {
        (FinitePmf(w), ProductSplit::SymbolPair { x_card, y_card }) => {
            if w.len() != x_card * y_card {
                return Err(Error::DimensionMismatch {
                    expected: x_card * y_card,
                    got: w.len(),
                });
            }
            let mut m = alloc::vec![0.0; *x_card];
            for (s, &p) in w.iter().enumerate() {
                m[s / y_card] += p;
            }
            ModelMeasure::finite_pmf(m)?
        }
        (UniformBox { lo, hi }, ProductSplit::VectorPrefix { x_dim }) => {
            ModelMeasure::uniform_box(lo[..*x_dim].to_vec(), hi[..*x_dim].to_vec())?
        }
        (ReferenceSample(s), _) => {
            for p in s.support() {
                split.project_x(p)?;
            }
            ModelMeasure::reference_sample(
                s.pushforward(|p| split.project_x(p).expect("validated")),
                model.nonatomic,
            )
        }
        _ => return Err(Error::MixedPointKinds),
    })
}
