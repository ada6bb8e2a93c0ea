//! Brute-force oracle: enumerate every dichotomy of the combined support the
//! class can achieve and take the best |nu|. Achievability of a labeling is
//! decided by exact geometric feasibility (ordering for half-lines, bounding
//! boxes for rectangles, margin LPs for halfspaces and balls), not by the
//! candidate enumeration the seminorm engines use — that independence is the
//! point of the oracle.

use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::lp::{self, Lp, LpOutcome, LpRow, Sense};
use crate::measure::SignedDifference;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub const BRUTE_SUPPORT_LIMIT: usize = 22;
const MARGIN_TOL: f64 = 1e-7;

/// Max over achievable labelings S of |nu(S)|, for indicator classes on
/// discrete-vs-discrete differences with combined support <= 22.
pub fn brute_force_sup(class: &FunctionClass, diff: &SignedDifference) -> Result<f64> {
    if !class.is_indicator() {
        return Err(Error::NonIndicatorClass);
    }
    class.check_kind(diff.kind())?;
    let (points, signed) = diff
        .merged_signed()
        .ok_or_else(|| Error::UnsupportedExact("both sides must be discrete".into()))?;
    let k = points.len();
    if k > BRUTE_SUPPORT_LIMIT {
        return Err(Error::SupportTooLarge {
            limit: BRUTE_SUPPORT_LIMIT,
            got: k,
        });
    }
    let pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.coords().expect("indicator classes act on vectors").to_vec())
        .collect();
    let mut best = 0.0f64;
    let mut mask_in = vec![false; k];
    for mask in 0u32..(1u32 << k) {
        for (i, b) in mask_in.iter_mut().enumerate() {
            *b = mask & (1 << i) != 0;
        }
        if labeling_feasible(class, &pts, &mask_in)? {
            let s: f64 = signed
                .iter()
                .zip(mask_in.iter())
                .filter(|(_, &b)| b)
                .map(|(c, _)| c)
                .sum();
            best = best.max(s.abs());
        }
    }
    Ok(best)
}

/// Whether some member set of `class` contains exactly the points flagged in
/// `in_set`.
pub fn labeling_feasible(
    class: &FunctionClass,
    pts: &[Vec<f64>],
    in_set: &[bool],
) -> Result<bool> {
    debug_assert_eq!(pts.len(), in_set.len());
    match class {
        FunctionClass::HalfLines => Ok(half_line_feasible(pts, in_set, false)),
        FunctionClass::Rectangles { dim } => Ok(rectangle_feasible(pts, in_set, *dim)),
        FunctionClass::Halfspaces { dim } => halfspace_feasible(pts, in_set, *dim),
        FunctionClass::Balls { dim } => ball_feasible(pts, in_set, *dim),
        FunctionClass::VoronoiCells { sites, dim } => match (*sites, *dim) {
            (1, _) => Ok(in_set.iter().all(|&b| b)),
            // Two-site cells are half-lines of either orientation.
            (2, 1) => Ok(half_line_feasible(pts, in_set, true)),
            (_, 1) => Ok(rectangle_feasible(pts, in_set, 1)),
            _ => Err(Error::UnsupportedExact(
                "no exact feasibility decision for Voronoi cells in d >= 2".into(),
            )),
        },
        _ => Err(Error::NonIndicatorClass),
    }
}

/// The class of half-lines (-inf, z]: the in-set must be an order prefix.
/// With `both_orientations`, suffixes [z, inf) are allowed too. Mirror events
/// carry the same |nu|, so the one-sided class suffices for the supremum,
/// but shattering tells the two families apart.
fn half_line_feasible(pts: &[Vec<f64>], in_set: &[bool], both_orientations: bool) -> bool {
    let mut max_in = f64::NEG_INFINITY;
    let mut min_in = f64::INFINITY;
    let mut max_out = f64::NEG_INFINITY;
    let mut min_out = f64::INFINITY;
    let mut any_in = false;
    let mut any_out = false;
    for (p, &b) in pts.iter().zip(in_set.iter()) {
        let x = p[0];
        if b {
            any_in = true;
            max_in = max_in.max(x);
            min_in = min_in.min(x);
        } else {
            any_out = true;
            max_out = max_out.max(x);
            min_out = min_out.min(x);
        }
    }
    if !any_in || !any_out {
        return true;
    }
    max_in < min_out || (both_orientations && min_in > max_out)
}

/// Closed rectangles: feasible iff the bounding box of the in-set contains no
/// out-point.
fn rectangle_feasible(pts: &[Vec<f64>], in_set: &[bool], dim: usize) -> bool {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut any = false;
    for (p, &b) in pts.iter().zip(in_set.iter()) {
        if b {
            any = true;
            for d in 0..dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
    }
    if !any {
        return true;
    }
    'points: for (p, &b) in pts.iter().zip(in_set.iter()) {
        if b {
            continue;
        }
        for d in 0..dim {
            if p[d] < lo[d] || p[d] > hi[d] {
                continue 'points;
            }
        }
        return false; // out-point inside the box
    }
    true
}

/// Closed halfspace containing the in-set and strictly excluding the rest:
/// maximize the exclusion margin under box-normalized coefficients.
fn halfspace_feasible(pts: &[Vec<f64>], in_set: &[bool], dim: usize) -> Result<bool> {
    if in_set.iter().all(|&b| b) || in_set.iter().all(|&b| !b) {
        return Ok(true);
    }
    let maxc = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let b_bound = dim as f64 * maxc + 2.0;
    // Variables: u = w + 1 in [0,2]^dim, v = b + B in [0,2B], m in [0,1].
    let nvars = dim + 2;
    let mut rows: Vec<LpRow> = Vec::new();
    for (p, &inside) in pts.iter().zip(in_set.iter()) {
        let mut coeffs = vec![0.0; nvars];
        if inside {
            // -(w.p + b) <= 0  ->  -u.p - v <= -(sum p) - B
            for d in 0..dim {
                coeffs[d] = -p[d];
            }
            coeffs[dim] = -1.0;
            rows.push(LpRow {
                coeffs,
                sense: Sense::Le,
                rhs: -p.iter().sum::<f64>() - b_bound,
            });
        } else {
            // w.p + b + m <= 0  ->  u.p + v + m <= (sum p) + B
            for d in 0..dim {
                coeffs[d] = p[d];
            }
            coeffs[dim] = 1.0;
            coeffs[dim + 1] = 1.0;
            rows.push(LpRow {
                coeffs,
                sense: Sense::Le,
                rhs: p.iter().sum::<f64>() + b_bound,
            });
        }
    }
    push_upper_bounds(&mut rows, nvars, dim, 2.0, 2.0 * b_bound);
    maximize_margin(rows, nvars)
}

/// Closed ball containing the in-set, strictly excluding the rest. In the
/// paraboloid lift a ball interior is {a |z|^2 + w.z + g <= 0} with a >= 0;
/// a = 0 recovers halfspaces, which on finite sets are also ball dichotomies.
fn ball_feasible(pts: &[Vec<f64>], in_set: &[bool], dim: usize) -> Result<bool> {
    if in_set.iter().all(|&b| b) || in_set.iter().all(|&b| !b) {
        return Ok(true);
    }
    let maxc = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, &x| m.max(x.abs()));
    let g_bound = dim as f64 * maxc * maxc + dim as f64 * maxc + 2.0;
    // Variables: a in [0,1], u = w + 1 in [0,2]^dim, v = g + G in [0,2G], m in [0,1].
    let nvars = 1 + dim + 2;
    let mut rows: Vec<LpRow> = Vec::new();
    for (p, &inside) in pts.iter().zip(in_set.iter()) {
        let sq: f64 = p.iter().map(|x| x * x).sum();
        let shift: f64 = p.iter().sum::<f64>() + g_bound;
        let mut coeffs = vec![0.0; nvars];
        if inside {
            // a sq + w.p + g <= 0  ->  a sq + u.p + v <= shift
            coeffs[0] = sq;
            for d in 0..dim {
                coeffs[1 + d] = p[d];
            }
            coeffs[1 + dim] = 1.0;
            rows.push(LpRow {
                coeffs,
                sense: Sense::Le,
                rhs: shift,
            });
        } else {
            // a sq + w.p + g >= m  ->  -a sq - u.p - v + m <= -shift
            coeffs[0] = -sq;
            for d in 0..dim {
                coeffs[1 + d] = -p[d];
            }
            coeffs[1 + dim] = -1.0;
            coeffs[1 + dim + 1] = 1.0;
            rows.push(LpRow {
                coeffs,
                sense: Sense::Le,
                rhs: -shift,
            });
        }
    }
    // a <= 1 plus the shifted bounds.
    let mut a_row = vec![0.0; nvars];
    a_row[0] = 1.0;
    rows.push(LpRow {
        coeffs: a_row,
        sense: Sense::Le,
        rhs: 1.0,
    });
    for d in 0..dim {
        let mut r = vec![0.0; nvars];
        r[1 + d] = 1.0;
        rows.push(LpRow {
            coeffs: r,
            sense: Sense::Le,
            rhs: 2.0,
        });
    }
    let mut v_row = vec![0.0; nvars];
    v_row[1 + dim] = 1.0;
    rows.push(LpRow {
        coeffs: v_row,
        sense: Sense::Le,
        rhs: 2.0 * g_bound,
    });
    let mut m_row = vec![0.0; nvars];
    m_row[nvars - 1] = 1.0;
    rows.push(LpRow {
        coeffs: m_row,
        sense: Sense::Le,
        rhs: 1.0,
    });
    maximize_margin(rows, nvars)
}

fn push_upper_bounds(rows: &mut Vec<LpRow>, nvars: usize, dim: usize, w_hi: f64, b_hi: f64) {
    for d in 0..dim {
        let mut r = vec![0.0; nvars];
        r[d] = 1.0;
        rows.push(LpRow {
            coeffs: r,
            sense: Sense::Le,
            rhs: w_hi,
        });
    }
    let mut r = vec![0.0; nvars];
    r[dim] = 1.0;
    rows.push(LpRow {
        coeffs: r,
        sense: Sense::Le,
        rhs: b_hi,
    });
    let mut r = vec![0.0; nvars];
    r[dim + 1] = 1.0;
    rows.push(LpRow {
        coeffs: r,
        sense: Sense::Le,
        rhs: 1.0,
    });
}

fn maximize_margin(rows: Vec<LpRow>, nvars: usize) -> Result<bool> {
    let mut cost = vec![0.0; nvars];
    cost[nvars - 1] = -1.0;
    match lp::solve(&Lp { cost, rows })? {
        LpOutcome::Optimal(sol) => Ok(-sol.value > MARGIN_TOL),
        LpOutcome::Infeasible => Ok(false),
        LpOutcome::Unbounded => Err(Error::Numerical(format!(
            "margin LP unbounded with {nvars} vars"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{empirical_measure, DiscreteMeasure};
    use crate::point::{vec1, vec2};

    #[test]
    fn identical_measures_give_zero() {
        let p = empirical_measure(&[vec1(0.2), vec1(0.9)]).unwrap();
        let d = SignedDifference::discrete(p.clone(), p).unwrap();
        let v = brute_force_sup(&FunctionClass::HalfLines, &d).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn interval_catches_isolated_dirac() {
        let p = DiscreteMeasure::dirac(vec1(0.0));
        let q = DiscreteMeasure::dirac(vec1(1.0));
        let d = SignedDifference::discrete(p, q).unwrap();
        let v = brute_force_sup(&FunctionClass::Rectangles { dim: 1 }, &d).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn rejects_non_indicator_and_large_support() {
        let p = empirical_measure(&[vec1(0.0)]).unwrap();
        let d = SignedDifference::discrete(p.clone(), p.clone()).unwrap();
        assert!(matches!(
            brute_force_sup(&FunctionClass::BoundedLipschitz, &d),
            Err(Error::NonIndicatorClass)
        ));
        let many: alloc::vec::Vec<_> = (0..30).map(|i| vec1(i as f64)).collect();
        let big = empirical_measure(&many).unwrap();
        let d2 = SignedDifference::discrete(big, p).unwrap();
        assert!(matches!(
            brute_force_sup(&FunctionClass::HalfLines, &d2),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn collinear_alternating_labeling_is_infeasible_for_halfplanes() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        let fea = labeling_feasible(
            &FunctionClass::Halfspaces { dim: 2 },
            &pts,
            &[true, false, true],
        )
        .unwrap();
        assert!(!fea);
        let fea2 = labeling_feasible(
            &FunctionClass::Halfspaces { dim: 2 },
            &pts,
            &[true, true, false],
        )
        .unwrap();
        assert!(fea2);
    }

    #[test]
    fn ball_can_cut_middle_point_out() {
        // Unlike a halfplane, a ball CAN pick the two outer collinear points?
        // No: a convex set containing both outer points contains the middle.
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        let fea = labeling_feasible(
            &FunctionClass::Balls { dim: 2 },
            &pts,
            &[true, false, true],
        )
        .unwrap();
        assert!(!fea);
        // But it can isolate the middle one, which a halfplane cannot.
        let fea_mid = labeling_feasible(
            &FunctionClass::Balls { dim: 2 },
            &pts,
            &[false, true, false],
        )
        .unwrap();
        assert!(fea_mid);
        let hp_mid = labeling_feasible(
            &FunctionClass::Halfspaces { dim: 2 },
            &pts,
            &[false, true, false],
        )
        .unwrap();
        assert!(!hp_mid);
    }

    #[test]
    fn halfspace_oracle_matches_engine_on_small_case() {
        let p = empirical_measure(&[vec2(0.0, 0.0), vec2(1.0, 0.2), vec2(0.3, 0.9)]).unwrap();
        let q = empirical_measure(&[vec2(0.5, 0.5), vec2(0.1, 0.8)]).unwrap();
        let d = SignedDifference::discrete(p, q).unwrap();
        let oracle = brute_force_sup(&FunctionClass::Halfspaces { dim: 2 }, &d).unwrap();
        let engine = crate::seminorm::seminorm(&FunctionClass::Halfspaces { dim: 2 }, &d)
            .unwrap()
            .value;
        assert!((oracle - engine).abs() < 1e-12, "oracle {oracle} engine {engine}");
    }
}
