//! VC-dimension tooling, covering numbers, and finite-blocklength scaling
//! diagnostics for the deviation statistic.

use crate::brute::labeling_feasible;
use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::measure::{DiscreteMeasure, ModelMeasure};
use crate::point::Point;
use crate::rng::SplitMix64;
use crate::typicality::{convergence_curve, DeviationRecord};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct ShatterResult {
    pub points: Vec<Point>,
    pub class_id: String,
    /// Number of labelings of the point set the class achieves.
    pub achieved: usize,
    pub shattered: bool,
}

/// Exact count of achievable labelings, by per-labeling feasibility.
pub fn shatter_check(class: &FunctionClass, points: &[Point]) -> Result<ShatterResult> {
    if points.len() > 20 {
        return Err(Error::SupportTooLarge {
            limit: 20,
            got: points.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyTuple);
    }
    class.check_kind(crate::point::common_kind(points)?)?;
    let pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.coords().expect("vector points").to_vec())
        .collect();
    let k = pts.len();
    let mut achieved = 0usize;
    let mut in_set = vec![false; k];
    for mask in 0u32..(1u32 << k) {
        for (i, b) in in_set.iter_mut().enumerate() {
            *b = mask & (1 << i) != 0;
        }
        if labeling_feasible(class, &pts, &in_set)? {
            achieved += 1;
        }
    }
    Ok(ShatterResult {
        points: points.to_vec(),
        class_id: class.id(),
        achieved,
        shattered: achieved == 1usize << k,
    })
}

/// The dimension the theory assigns to each implemented class.
pub fn reference_vc_dimension(class: &FunctionClass) -> Option<usize> {
    match class {
        FunctionClass::HalfLines => Some(1),
        FunctionClass::Halfspaces { dim } => Some(dim + 1),
        FunctionClass::Balls { dim } => Some(dim + 1),
        FunctionClass::Rectangles { dim } => Some(2 * dim),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct VcProbe {
    /// Largest k for which a shattered k-set was found.
    pub lower_bound: usize,
    /// A witness set of that size.
    pub witness: Vec<Point>,
    /// Number of random (reference dimension + 1)-sets tested and found
    /// unshattered. Evidence, not proof.
    pub counterexample_evidence: usize,
}

fn random_point(dim: usize, rng: &mut SplitMix64) -> Point {
    Point::Vector((0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
}

/// Structured candidate sets that shatter the implemented classes at their
/// reference dimension.
fn structured_candidates(class: &FunctionClass, k: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    match class {
        FunctionClass::Rectangles { dim: 2 } if k == 4 => {
            // Axis diamond.
            out.push(vec![
                Point::Vector(vec![0.0, 1.0]),
                Point::Vector(vec![1.0, 0.0]),
                Point::Vector(vec![0.0, -1.0]),
                Point::Vector(vec![-1.0, 0.0]),
            ]);
        }
        FunctionClass::Halfspaces { dim: 2 } | FunctionClass::Balls { dim: 2 } if k == 3 => {
            out.push(vec![
                Point::Vector(vec![0.0, 0.0]),
                Point::Vector(vec![1.0, 0.0]),
                Point::Vector(vec![0.4, 0.9]),
            ]);
        }
        FunctionClass::HalfLines if k == 1 => {
            out.push(vec![Point::Vector(vec![0.5])]);
        }
        _ => {}
    }
    out
}

/// Searches for shattered sets of growing size (structured candidates first,
/// then random sets), and tests random sets one past the reference dimension
/// for non-shattering evidence.
pub fn vc_probe(class: &FunctionClass, budget: usize, seed: u64) -> Result<VcProbe> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be >= 1".into()));
    }
    let dim = match class.expected_kind() {
        Some(crate::point::PointKind::Vector(d)) => d,
        _ => {
            return Err(Error::UnsupportedExact(
                "vc_probe needs a geometric indicator class".into(),
            ))
        }
    };
    let v_ref = reference_vc_dimension(class).ok_or_else(|| {
        Error::UnsupportedExact("no reference dimension for this class".into())
    })?;
    let root = SplitMix64::new(seed);
    let mut lower_bound = 0usize;
    let mut witness: Vec<Point> = Vec::new();
    for k in 1..=v_ref {
        let mut found = false;
        for cand in structured_candidates(class, k) {
            if shatter_check(class, &cand)?.shattered {
                lower_bound = k;
                witness = cand;
                found = true;
                break;
            }
        }
        if !found {
            let tries = budget.min(2000);
            for t in 0..tries {
                let mut rng = root.split2(k as u64, t as u64);
                let pts: Vec<Point> = (0..k).map(|_| random_point(dim, &mut rng)).collect();
                if shatter_check(class, &pts)?.shattered {
                    lower_bound = k;
                    witness = pts;
                    found = true;
                    break;
                }
            }
        }
        if !found {
            break;
        }
    }
    // Non-shattering evidence one past the reference dimension.
    let mut evidence = 0usize;
    for t in 0..budget {
        let mut rng = root.split2(0xE51Du64, t as u64);
        let pts: Vec<Point> = (0..v_ref + 1).map(|_| random_point(dim, &mut rng)).collect();
        if shatter_check(class, &pts)?.shattered {
            break; // a shattered set past the reference dimension is a finding
        }
        evidence += 1;
    }
    Ok(VcProbe {
        lower_bound,
        witness,
        counterexample_evidence: evidence,
    })
}

// ---------------------------------------------------------------------------
// covering numbers
// ---------------------------------------------------------------------------

/// Tabulates a finite family of member functions on the support of Q.
/// Only classes with a finite trace come out: convex-hull bases and
/// half-line dichotomies.
fn tabulate_on_support(class: &FunctionClass, q: &DiscreteMeasure) -> Result<Vec<Vec<f64>>> {
    match class {
        FunctionClass::ConvexHull { table } => {
            let mut rows = Vec::with_capacity(table.len());
            for base in table {
                let mut row = Vec::with_capacity(q.len());
                for p in q.support() {
                    let s = p
                        .symbol()
                        .ok_or_else(|| Error::ClassKindMismatch("expected symbols".into()))?;
                    row.push(*base.get(s).ok_or_else(|| {
                        Error::InvalidArgument("symbol outside tabulated base".into())
                    })?);
                }
                rows.push(row);
            }
            Ok(rows)
        }
        FunctionClass::HalfLines => {
            // Distinct dichotomies on the (sorted) support: prefixes.
            let k = q.len();
            let mut rows = Vec::with_capacity(k + 1);
            for cut in 0..=k {
                rows.push((0..k).map(|i| if i < cut { 1.0 } else { 0.0 }).collect());
            }
            Ok(rows)
        }
        _ => Err(Error::UnsupportedExact(
            "covering numbers need a class tabulated on the support".into(),
        )),
    }
}

fn l1_distance(q: &DiscreteMeasure, a: &[f64], b: &[f64]) -> f64 {
    q.weights()
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(w, (x, y))| w * (x - y).abs())
        .sum()
}

/// Greedy cover count with centers restricted to the family itself; exact
/// minimum cover by exhaustion when the family has at most 16 members.
pub fn covering_number(class: &FunctionClass, q: &DiscreteMeasure, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let rows = tabulate_on_support(class, q)?;
    let m = rows.len();
    if m == 0 {
        return Ok(0);
    }
    // Pairwise coverage bitmap.
    let covers: Vec<u32> = (0..m)
        .map(|i| {
            let mut mask = 0u32;
            for j in 0..m {
                if l1_distance(q, &rows[i], &rows[j]) <= eps {
                    mask |= 1 << j;
                }
            }
            mask
        })
        .collect();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    if m <= 16 {
        // Exact minimum cover (centers from the family) by subset search.
        for size in 1..=m {
            if min_cover_exists(&covers, full, 0, size, 0) {
                return Ok(size);
            }
        }
        return Ok(m);
    }
    // Greedy: repeatedly take the center covering the most uncovered.
    let mut uncovered = full;
    let mut count = 0usize;
    while uncovered != 0 {
        let mut best = 0usize;
        let mut best_gain = 0u32;
        for (i, &c) in covers.iter().enumerate() {
            let gain = (c & uncovered).count_ones();
            if gain > best_gain {
                best_gain = gain;
                best = i;
            }
        }
        uncovered &= !covers[best];
        count += 1;
    }
    Ok(count)
}

fn min_cover_exists(covers: &[u32], target: u32, chosen: u32, size: usize, start: usize) -> bool {
    if chosen & target == target {
        return true;
    }
    if size == 0 {
        return false;
    }
    for i in start..covers.len() {
        if min_cover_exists(covers, target, chosen | covers[i], size - 1, i + 1) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// scaling diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ScalingTable {
    /// Rows of (n, mean deviation, mean * sqrt n), n strictly increasing.
    pub rows: Vec<(usize, f64, f64)>,
    pub records: Vec<DeviationRecord>,
}

/// Monte Carlo means of the deviation statistic over an n-grid, with the
/// sqrt-n-scaled column for boundedness inspection.
pub fn deviation_scaling(
    class: &FunctionClass,
    model: &ModelMeasure,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ScalingTable> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n grid must be strictly increasing".into()));
    }
    let records = convergence_curve(model, class, n_grid, trials, seed)?;
    let rows = n_grid
        .iter()
        .map(|&n| {
            let (mut s, mut c) = (0.0, 0usize);
            for r in records.iter().filter(|r| r.n == n) {
                s += r.deviation;
                c += 1;
            }
            let mean = s / c.max(1) as f64;
            (n, mean, mean * sqrt(n as f64))
        })
        .collect();
    Ok(ScalingTable { rows, records })
}

/// Raw Monte Carlo exceedance frequencies P(deviation >= eps) per n. No
/// constants are fitted.
pub fn tail_frequencies(records: &[DeviationRecord], n_grid: &[usize], eps: f64) -> Vec<(usize, f64)> {
    n_grid
        .iter()
        .map(|&n| {
            let (mut hit, mut c) = (0usize, 0usize);
            for r in records.iter().filter(|r| r.n == n) {
                c += 1;
                if r.deviation >= eps {
                    hit += 1;
                }
            }
            (n, hit as f64 / c.max(1) as f64)
        })
        .collect()
}
