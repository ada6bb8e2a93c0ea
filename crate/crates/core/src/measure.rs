//! Finitely supported measures, model laws, and signed differences.
//!
//! `DiscreteMeasure` canonicalizes its support (sorted, deduplicated), so two
//! measures over the same atoms compare cell by cell regardless of input
//! order. The empirical measure of a tuple is the uniform special case.

use crate::error::{Error, Result};
use crate::point::{common_kind, Point, PointKind};
use crate::rng::SplitMix64;
use alloc::format;
use alloc::vec::Vec;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a probability measure. Weights must be nonnegative and sum to 1
    /// within 1e-12; support points must be pairwise distinct and share one
    /// kind. Atoms of weight zero are dropped.
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        common_kind(&support)?;
        let mut total = 0.0;
        for &w in &weights {
            if !(w >= 0.0) {
                return Err(Error::InvalidWeights(format!("negative or NaN weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        let mut idx: Vec<usize> = (0..support.len()).collect();
        idx.sort_by(|&a, &b| support[a].total_order(&support[b]));
        let mut s = Vec::with_capacity(support.len());
        let mut w = Vec::with_capacity(support.len());
        for i in idx {
            if let Some(last) = s.last() {
                if support[i].same_point(last) {
                    return Err(Error::InvalidWeights(
                        "support points are not pairwise distinct".into(),
                    ));
                }
            }
            if weights[i] > 0.0 {
                s.push(support[i].clone());
                w.push(weights[i]);
            }
        }
        if s.is_empty() {
            return Err(Error::EmptyTuple);
        }
        Ok(DiscreteMeasure {
            support: s,
            weights: w,
        })
    }

    pub fn dirac(p: Point) -> Self {
        DiscreteMeasure {
            support: alloc::vec![p],
            weights: alloc::vec![1.0],
        }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn kind(&self) -> PointKind {
        self.support[0].kind()
    }

    /// Mass of a single atom (0 if not in the support).
    pub fn mass(&self, p: &Point) -> f64 {
        match self
            .support
            .binary_search_by(|q| q.total_order(p))
        {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    /// Pushforward under a point map, aggregating collided atoms.
    pub fn pushforward(&self, f: impl Fn(&Point) -> Point) -> DiscreteMeasure {
        let mut pairs: Vec<(Point, f64)> = self
            .support
            .iter()
            .zip(self.weights.iter())
            .map(|(p, &w)| (f(p), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_order(&b.0));
        let mut s: Vec<Point> = Vec::new();
        let mut w: Vec<f64> = Vec::new();
        for (p, wt) in pairs {
            if let Some(last) = s.last() {
                if p.same_point(last) {
                    *w.last_mut().unwrap() += wt;
                    continue;
                }
            }
            s.push(p);
            w.push(wt);
        }
        DiscreteMeasure {
            support: s,
            weights: w,
        }
    }
}

/// The empirical measure of a tuple: distinct points weighted by
/// multiplicity / n.
pub fn empirical_measure(tuple: &[Point]) -> Result<DiscreteMeasure> {
    common_kind(tuple)?;
    let n = tuple.len() as f64;
    let mut idx: Vec<usize> = (0..tuple.len()).collect();
    idx.sort_by(|&a, &b| tuple[a].total_order(&tuple[b]));
    let mut support: Vec<Point> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for i in idx {
        if let Some(last) = support.last() {
            if tuple[i].same_point(last) {
                *counts.last_mut().unwrap() += 1;
                continue;
            }
        }
        support.push(tuple[i].clone());
        counts.push(1);
    }
    // Multiplicity over n, computed once per atom, so a full-mass atom is
    // exactly 1.
    let weights = counts.into_iter().map(|c| c as f64 / n).collect();
    Ok(DiscreteMeasure { support, weights })
}

/// A model law P: either a finite PMF over an alphabet, a product-uniform box
/// in R^d, or a large reference sample standing in for a nonatomic law.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    FinitePmf(Vec<f64>),
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    ReferenceSample(DiscreteMeasure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeasure {
    pub kind: ModelKind,
    pub nonatomic: bool,
}

impl ModelMeasure {
    pub fn finite_pmf(weights: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for &w in &weights {
            if !(w >= 0.0) {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("pmf sums to {total}")));
        }
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(ModelMeasure {
            kind: ModelKind::FinitePmf(weights),
            nonatomic: false,
        })
    }

    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidDistribution("box bounds of unequal dimension".into()));
        }
        for (l, h) in lo.iter().zip(hi.iter()) {
            if !(l < h) {
                return Err(Error::InvalidDistribution(format!("degenerate box side [{l}, {h}]")));
            }
        }
        Ok(ModelMeasure {
            kind: ModelKind::UniformBox { lo, hi },
            nonatomic: true,
        })
    }

    /// A reference sample standing in for a law; `nonatomic` records whether
    /// the law it approximates assigns zero mass to singletons.
    pub fn reference_sample(sample: DiscreteMeasure, nonatomic: bool) -> Self {
        ModelMeasure {
            kind: ModelKind::ReferenceSample(sample),
            nonatomic,
        }
    }

    pub fn point_kind(&self) -> PointKind {
        match &self.kind {
            ModelKind::FinitePmf(_) => PointKind::Symbol,
            ModelKind::UniformBox { lo, .. } => PointKind::Vector(lo.len()),
            ModelKind::ReferenceSample(s) => s.kind(),
        }
    }

    /// The model as a discrete measure, when it is one.
    pub fn as_discrete(&self) -> Option<DiscreteMeasure> {
        match &self.kind {
            ModelKind::FinitePmf(w) => {
                let support: Vec<Point> = (0..w.len()).map(Point::Symbol).collect();
                Some(DiscreteMeasure::new(support, w.clone()).expect("validated pmf"))
            }
            ModelKind::ReferenceSample(s) => Some(s.clone()),
            ModelKind::UniformBox { .. } => None,
        }
    }

    /// Draws one point. Only finite PMFs and uniform boxes are samplable.
    pub fn sample_point(&self, rng: &mut SplitMix64) -> Result<Point> {
        match &self.kind {
            ModelKind::FinitePmf(w) => {
                let u = rng.next_f64();
                let mut acc = 0.0;
                for (i, &wi) in w.iter().enumerate() {
                    acc += wi;
                    if u < acc {
                        return Ok(Point::Symbol(i));
                    }
                }
                Ok(Point::Symbol(w.len() - 1))
            }
            ModelKind::UniformBox { lo, hi } => {
                let coords: Vec<f64> = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(&l, &h)| l + rng.next_f64() * (h - l))
                    .collect();
                Ok(Point::Vector(coords))
            }
            ModelKind::ReferenceSample(_) => Err(Error::UnsamplableModel),
        }
    }
}

/// The signed measure nu = lhs - rhs whose F-seminorm the engines compute.
#[derive(Debug, Clone)]
pub struct SignedDifference {
    pub lhs: DiscreteMeasure,
    pub rhs: RhsMeasure,
}

#[derive(Debug, Clone)]
pub enum RhsMeasure {
    Discrete(DiscreteMeasure),
    Model(ModelMeasure),
}

impl SignedDifference {
    pub fn discrete(lhs: DiscreteMeasure, rhs: DiscreteMeasure) -> Result<Self> {
        if lhs.kind() != rhs.kind() {
            return Err(Error::MixedPointKinds);
        }
        Ok(SignedDifference {
            lhs,
            rhs: RhsMeasure::Discrete(rhs),
        })
    }

    pub fn against_model(lhs: DiscreteMeasure, rhs: ModelMeasure) -> Result<Self> {
        if lhs.kind() != rhs.point_kind() {
            return Err(Error::MixedPointKinds);
        }
        Ok(SignedDifference {
            lhs,
            rhs: RhsMeasure::Model(rhs),
        })
    }

    pub fn kind(&self) -> PointKind {
        self.lhs.kind()
    }

    /// For discrete-vs-discrete differences: merged support with signed
    /// weights, in canonical order.
    pub fn merged_signed(&self) -> Option<(Vec<Point>, Vec<f64>)> {
        let rhs = match &self.rhs {
            RhsMeasure::Discrete(m) => m.clone(),
            RhsMeasure::Model(m) => m.as_discrete()?,
        };
        Some(merge_signed(&self.lhs, &rhs))
    }
}

/// Merged support of lhs and rhs with weights w_lhs - w_rhs. Both inputs are
/// canonically sorted, so this is a linear merge.
pub fn merge_signed(lhs: &DiscreteMeasure, rhs: &DiscreteMeasure) -> (Vec<Point>, Vec<f64>) {
    let mut points = Vec::with_capacity(lhs.len() + rhs.len());
    let mut signed = Vec::with_capacity(lhs.len() + rhs.len());
    let (ls, lw) = (lhs.support(), lhs.weights());
    let (rs, rw) = (rhs.support(), rhs.weights());
    let (mut i, mut j) = (0, 0);
    while i < ls.len() || j < rs.len() {
        if i < ls.len() && j < rs.len() {
            match ls[i].total_order(&rs[j]) {
                core::cmp::Ordering::Less => {
                    points.push(ls[i].clone());
                    signed.push(lw[i]);
                    i += 1;
                }
                core::cmp::Ordering::Greater => {
                    points.push(rs[j].clone());
                    signed.push(-rw[j]);
                    j += 1;
                }
                core::cmp::Ordering::Equal => {
                    points.push(ls[i].clone());
                    signed.push(lw[i] - rw[j]);
                    i += 1;
                    j += 1;
                }
            }
        } else if i < ls.len() {
            points.push(ls[i].clone());
            signed.push(lw[i]);
            i += 1;
        } else {
            points.push(rs[j].clone());
            signed.push(-rw[j]);
            j += 1;
        }
    }
    (points, signed)
}
