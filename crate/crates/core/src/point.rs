use crate::error::{Error, Result};
use alloc::vec::Vec;
use core::cmp::Ordering;

/// A sample-space element: either a symbol of a finite alphabet or a point
/// in R^d. All points of one measure or tuple share a single kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Symbol(usize),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Symbol,
    Vector(usize),
}

impl Point {
    pub fn kind(&self) -> PointKind {
        match self {
            Point::Symbol(_) => PointKind::Symbol,
            Point::Vector(v) => PointKind::Vector(v.len()),
        }
    }

    pub fn symbol(&self) -> Option<usize> {
        match self {
            Point::Symbol(s) => Some(*s),
            Point::Vector(_) => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Symbol(_) => None,
            Point::Vector(v) => Some(v),
        }
    }

    /// Total order used for canonicalization and deduplication. Vectors are
    /// compared lexicographically under `f64::total_cmp`.
    pub fn total_order(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Symbol(a), Point::Symbol(b)) => a.cmp(b),
            (Point::Vector(a), Point::Vector(b)) => {
                match a.len().cmp(&b.len()) {
                    Ordering::Equal => {}
                    o => return o,
                }
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.total_cmp(y) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                Ordering::Equal
            }
            (Point::Symbol(_), Point::Vector(_)) => Ordering::Less,
            (Point::Vector(_), Point::Symbol(_)) => Ordering::Greater,
        }
    }

    pub fn same_point(&self, other: &Point) -> bool {
        self.total_order(other) == Ordering::Equal
    }
}

/// Convenience constructors used throughout the tests.
pub fn sym(s: usize) -> Point {
    Point::Symbol(s)
}

pub fn vec1(x: f64) -> Point {
    Point::Vector(alloc::vec![x])
}

pub fn vec2(x: f64, y: f64) -> Point {
    Point::Vector(alloc::vec![x, y])
}

/// Checks that a tuple is nonempty and kind-homogeneous, returning the kind.
pub fn common_kind(points: &[Point]) -> Result<PointKind> {
    let first = points.first().ok_or(Error::EmptyTuple)?;
    let kind = first.kind();
    for p in &points[1..] {
        if p.kind() != kind {
            return Err(Error::MixedPointKinds);
        }
    }
    Ok(kind)
}
