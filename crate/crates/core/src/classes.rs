//! Test-function classes and pointwise evaluation of individual members.
//!
//! A `FunctionClass` is a descriptor; the supremum machinery lives in
//! `seminorm`. Every member of every class maps into [-1, 1], indicator
//! classes into {0, 1}.

use crate::error::{Error, Result};
use crate::math::euclidean;
use crate::point::{Point, PointKind};
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// How a product space splits into an X part and a Y part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductSplit {
    /// Vectors in R^(k+m); the X part is the first `x_dim` coordinates.
    VectorPrefix { x_dim: usize },
    /// Symbols paired row-major: s = x * y_card + y.
    SymbolPair { x_card: usize, y_card: usize },
}

impl ProductSplit {
    pub fn project_x(&self, p: &Point) -> Result<Point> {
        match (self, p) {
            (ProductSplit::VectorPrefix { x_dim }, Point::Vector(v)) => {
                if v.len() <= *x_dim {
                    return Err(Error::DimensionMismatch {
                        expected: x_dim + 1,
                        got: v.len(),
                    });
                }
                Ok(Point::Vector(v[..*x_dim].to_vec()))
            }
            (ProductSplit::SymbolPair { x_card, y_card }, Point::Symbol(s)) => {
                if *s >= x_card * y_card {
                    return Err(Error::InvalidArgument(format!(
                        "symbol {s} outside product alphabet of size {}",
                        x_card * y_card
                    )));
                }
                Ok(Point::Symbol(s / y_card))
            }
            _ => Err(Error::MixedPointKinds),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionClass {
    /// All measurable functions into [-1, 1] on a finite alphabet.
    AllFunctions { alphabet: usize },
    /// Indicators of half-lines (-inf, z] on the real line (and their
    /// mirror images for supremum purposes).
    HalfLines,
    /// Indicators of closed linear halfspaces {z : <w, z> + b >= 0} in R^d.
    Halfspaces { dim: usize },
    /// Indicators of closed axis-aligned rectangles in R^d.
    Rectangles { dim: usize },
    /// Indicators of closed Euclidean balls in R^d.
    Balls { dim: usize },
    /// Indicators of single cells of Voronoi partitions induced by any
    /// `sites`-point set in R^d.
    VoronoiCells { sites: usize, dim: usize },
    /// Functions with sup norm <= 1 and Euclidean Lipschitz constant <= 1.
    BoundedLipschitz,
    /// Symmetric convex hull of explicitly tabulated base functions on a
    /// finite alphabet; `table[i][z]` is the i-th base function at symbol z.
    ConvexHull { table: Vec<Vec<f64>> },
    /// A class F_X on the X part of a product, composed with the projection.
    Composed {
        base: Box<FunctionClass>,
        split: ProductSplit,
    },
}

impl FunctionClass {
    /// Whether every member is an indicator function.
    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            FunctionClass::HalfLines
                | FunctionClass::Halfspaces { .. }
                | FunctionClass::Rectangles { .. }
                | FunctionClass::Balls { .. }
                | FunctionClass::VoronoiCells { .. }
        )
    }

    /// Range of member values: {0,1} for indicator classes, [-1,1] otherwise.
    pub fn range(&self) -> (f64, f64) {
        if self.is_indicator() {
            (0.0, 1.0)
        } else {
            (-1.0, 1.0)
        }
    }

    /// The point kind this class evaluates on, when fixed by the descriptor.
    pub fn expected_kind(&self) -> Option<PointKind> {
        match self {
            FunctionClass::AllFunctions { .. } | FunctionClass::ConvexHull { .. } => {
                Some(PointKind::Symbol)
            }
            FunctionClass::HalfLines => Some(PointKind::Vector(1)),
            FunctionClass::Halfspaces { dim }
            | FunctionClass::Rectangles { dim }
            | FunctionClass::Balls { dim }
            | FunctionClass::VoronoiCells { dim, .. } => Some(PointKind::Vector(*dim)),
            FunctionClass::BoundedLipschitz => None,
            FunctionClass::Composed { .. } => None,
        }
    }

    pub fn check_kind(&self, kind: PointKind) -> Result<()> {
        match self.expected_kind() {
            Some(k) if k != kind => Err(Error::ClassKindMismatch(format!(
                "{} expects {:?}, got {:?}",
                self.id(),
                k,
                kind
            ))),
            _ => {
                if matches!(self, FunctionClass::BoundedLipschitz)
                    && matches!(kind, PointKind::Symbol)
                {
                    return Err(Error::ClassKindMismatch(
                        "bounded-Lipschitz class needs vector points with a Euclidean metric"
                            .into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Short stable identifier used in CSV output and reports.
    pub fn id(&self) -> String {
        match self {
            FunctionClass::AllFunctions { alphabet } => format!("all_functions({alphabet})"),
            FunctionClass::HalfLines => "half_lines".into(),
            FunctionClass::Halfspaces { dim } => format!("halfspaces({dim})"),
            FunctionClass::Rectangles { dim } => format!("rectangles({dim})"),
            FunctionClass::Balls { dim } => format!("balls({dim})"),
            FunctionClass::VoronoiCells { sites, dim } => format!("voronoi({sites},{dim})"),
            FunctionClass::BoundedLipschitz => "bounded_lipschitz".into(),
            FunctionClass::ConvexHull { table } => format!("convex_hull({})", table.len()),
            FunctionClass::Composed { base, .. } => format!("composed({})", base.id()),
        }
    }
}

/// Parameters selecting one member of a class.
#[derive(Debug, Clone, PartialEq)]
pub enum MemberParams {
    /// f(z) = table[z] on a finite alphabet, values in [-1, 1].
    Tabulated { values: Vec<f64> },
    /// Indicator of (-inf, threshold] when `upper` is false, [threshold, inf)
    /// when true.
    HalfLine { threshold: f64, upper: bool },
    /// Indicator of {z : <w, z> + b >= 0}.
    Halfspace { w: Vec<f64>, b: f64 },
    /// Indicator of the closed box [lo, hi].
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
    /// Indicator of the closed ball of radius r around `center`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Indicator of the cell of `sites[cell]` in the Voronoi partition of
    /// `sites` (ties belong to every nearest cell, so membership is closed).
    VoronoiCell { sites: Vec<Vec<f64>>, cell: usize },
    /// Convex combination sum_i coeffs[i] * base_i with sum |coeffs| <= 1.
    HullCoefficients { coeffs: Vec<f64> },
    /// A 1-Lipschitz function tabulated on anchor points, extended by
    /// the tightest Lipschitz interpolation max_i (values[i] - d(z, anchor_i)).
    LipschitzAnchors { anchors: Vec<Vec<f64>>, values: Vec<f64> },
}

/// Evaluates one member of `class` at `z`. Fails on parameters that do not
/// belong to the class.
pub fn eval_member(class: &FunctionClass, params: &MemberParams, z: &Point) -> Result<f64> {
    match (class, params) {
        (FunctionClass::AllFunctions { alphabet }, MemberParams::Tabulated { values }) => {
            if values.len() != *alphabet {
                return Err(Error::InvalidParams(format!(
                    "table of length {} on alphabet of size {alphabet}",
                    values.len()
                )));
            }
            if values.iter().any(|v| v.abs() > 1.0 + 1e-12) {
                return Err(Error::InvalidParams("table value outside [-1, 1]".into()));
            }
            let s = z
                .symbol()
                .ok_or(Error::ClassKindMismatch("expected a symbol".into()))?;
            values
                .get(s)
                .copied()
                .ok_or(Error::InvalidParams(format!("symbol {s} outside alphabet")))
        }
        (FunctionClass::HalfLines, MemberParams::HalfLine { threshold, upper }) => {
            let c = coords1(z)?;
            Ok(indicator(if *upper { c >= *threshold } else { c <= *threshold }))
        }
        (FunctionClass::Halfspaces { dim }, MemberParams::Halfspace { w, b }) => {
            let c = coords_checked(z, *dim)?;
            if w.len() != *dim {
                return Err(Error::InvalidParams("normal of wrong dimension".into()));
            }
            let v: f64 = w.iter().zip(c.iter()).map(|(a, x)| a * x).sum::<f64>() + b;
            Ok(indicator(v >= 0.0))
        }
        (FunctionClass::Rectangles { dim }, MemberParams::Rectangle { lo, hi }) => {
            let c = coords_checked(z, *dim)?;
            if lo.len() != *dim || hi.len() != *dim {
                return Err(Error::InvalidParams("rectangle bounds of wrong dimension".into()));
            }
            if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                return Err(Error::InvalidParams("rectangle with lo > hi".into()));
            }
            Ok(indicator(
                c.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(x, (l, h))| *x >= *l && *x <= *h),
            ))
        }
        (FunctionClass::Balls { dim }, MemberParams::Ball { center, radius }) => {
            let c = coords_checked(z, *dim)?;
            if center.len() != *dim {
                return Err(Error::InvalidParams("center of wrong dimension".into()));
            }
            if !(*radius >= 0.0) {
                return Err(Error::InvalidParams("negative radius".into()));
            }
            Ok(indicator(euclidean(c, center) <= *radius))
        }
        (FunctionClass::VoronoiCells { sites, dim }, MemberParams::VoronoiCell { sites: ss, cell }) => {
            if ss.len() != *sites || *cell >= ss.len() {
                return Err(Error::InvalidParams("site list or cell index invalid".into()));
            }
            let c = coords_checked(z, *dim)?;
            let own = euclidean(c, &ss[*cell]);
            Ok(indicator(ss.iter().all(|s| own <= euclidean(c, s))))
        }
        (FunctionClass::ConvexHull { table }, MemberParams::HullCoefficients { coeffs }) => {
            if coeffs.len() != table.len() {
                return Err(Error::InvalidParams("one coefficient per base function".into()));
            }
            let l1: f64 = coeffs.iter().map(|c| c.abs()).sum();
            if l1 > 1.0 + 1e-12 {
                return Err(Error::InvalidParams("coefficients exceed the unit l1 ball".into()));
            }
            let s = z
                .symbol()
                .ok_or(Error::ClassKindMismatch("expected a symbol".into()))?;
            let mut v = 0.0;
            for (c, row) in coeffs.iter().zip(table.iter()) {
                let fz = row
                    .get(s)
                    .ok_or(Error::InvalidParams(format!("symbol {s} outside table")))?;
                v += c * fz;
            }
            Ok(v)
        }
        (FunctionClass::BoundedLipschitz, MemberParams::LipschitzAnchors { anchors, values }) => {
            if anchors.len() != values.len() || anchors.is_empty() {
                return Err(Error::InvalidParams("one value per anchor".into()));
            }
            if values.iter().any(|v| v.abs() > 1.0 + 1e-12) {
                return Err(Error::InvalidParams("anchor value outside [-1, 1]".into()));
            }
            for (i, a) in anchors.iter().enumerate() {
                for (j, b) in anchors.iter().enumerate().skip(i + 1) {
                    if (values[i] - values[j]).abs() > euclidean(a, b) + 1e-9 {
                        return Err(Error::InvalidParams(
                            "anchor values violate the Lipschitz constraint".into(),
                        ));
                    }
                }
            }
            let c = z
                .coords()
                .ok_or(Error::ClassKindMismatch("expected a vector".into()))?;
            let mut v = f64::NEG_INFINITY;
            for (a, val) in anchors.iter().zip(values.iter()) {
                if a.len() != c.len() {
                    return Err(Error::DimensionMismatch {
                        expected: c.len(),
                        got: a.len(),
                    });
                }
                let cand = val - euclidean(c, a);
                if cand > v {
                    v = cand;
                }
            }
            Ok(v.clamp(-1.0, 1.0))
        }
        (FunctionClass::Composed { base, split }, p) => {
            let x = split.project_x(z)?;
            eval_member(base, p, &x)
        }
        _ => Err(Error::InvalidParams(format!(
            "parameters do not match class {}",
            class.id()
        ))),
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn coords1(z: &Point) -> Result<f64> {
    let c = z
        .coords()
        .ok_or(Error::ClassKindMismatch("expected a vector".into()))?;
    if c.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: c.len(),
        });
    }
    Ok(c[0])
}

fn coords_checked(z: &Point, dim: usize) -> Result<&[f64]> {
    let c = z
        .coords()
        .ok_or(Error::ClassKindMismatch("expected a vector".into()))?;
    if c.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: c.len(),
        });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{sym, vec1, vec2};

    #[test]
    fn halfspace_sign_check() {
        let f = eval_member(
            &FunctionClass::Halfspaces { dim: 2 },
            &MemberParams::Halfspace {
                w: alloc::vec![1.0, 0.0],
                b: 0.0,
            },
            &vec2(2.0, 5.0),
        )
        .unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn half_line_excludes_right_of_threshold() {
        let f = eval_member(
            &FunctionClass::HalfLines,
            &MemberParams::HalfLine {
                threshold: 0.5,
                upper: false,
            },
            &vec1(0.7),
        )
        .unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn closed_ball_contains_boundary() {
        let f = eval_member(
            &FunctionClass::Balls { dim: 2 },
            &MemberParams::Ball {
                center: alloc::vec![0.0, 0.0],
                radius: 1.0,
            },
            &vec2(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(eval_member(
            &FunctionClass::Balls { dim: 2 },
            &MemberParams::Ball {
                center: alloc::vec![0.0],
                radius: 1.0
            },
            &vec2(1.0, 0.0),
        )
        .is_err());
        assert!(eval_member(
            &FunctionClass::AllFunctions { alphabet: 2 },
            &MemberParams::Tabulated {
                values: alloc::vec![2.0, 0.0]
            },
            &sym(0),
        )
        .is_err());
    }

    #[test]
    fn composed_projects_before_evaluating() {
        let class = FunctionClass::Composed {
            base: Box::new(FunctionClass::HalfLines),
            split: ProductSplit::VectorPrefix { x_dim: 1 },
        };
        let f = eval_member(
            &class,
            &MemberParams::HalfLine {
                threshold: 0.5,
                upper: false,
            },
            &vec2(0.3, 9.0),
        )
        .unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn voronoi_cell_membership_is_closed() {
        let sites = alloc::vec![alloc::vec![0.0, 0.0], alloc::vec![2.0, 0.0]];
        let on_bisector = vec2(1.0, 3.0);
        for cell in 0..2 {
            let f = eval_member(
                &FunctionClass::VoronoiCells { sites: 2, dim: 2 },
                &MemberParams::VoronoiCell {
                    sites: sites.clone(),
                    cell,
                },
                &on_bisector,
            )
            .unwrap();
            assert_eq!(f, 1.0);
        }
    }
}
