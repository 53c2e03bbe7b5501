//! Carriers for modulars: finite metric spaces, Euclidean space and the
//! landmass grid, plus the three built-in modulars over a base metric.

mod builtin;
mod finite;
mod landmass;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extreal::ExtReal;

pub use builtin::{builtin_modular, BuiltinKind};
pub use finite::FiniteMetric;
pub use landmass::{Cell, LandmassGrid, LoadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("distance matrix is empty")]
    Empty,
    #[error("entry d({i},{j}) = {value} is not a finite nonnegative real")]
    BadEntry { i: usize, j: usize, value: f64 },
    #[error("diagonal entry d({i},{i}) = {value} is not zero")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("asymmetric: d({i},{j}) = {dij} but d({j},{i}) = {dji}")]
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("distinct points {i} and {j} are at distance zero")]
    ZeroDistance { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) = {dik} > d({i},{j}) + d({j},{k}) = {sum}")]
    Triangle { i: usize, j: usize, k: usize, dik: f64, sum: f64 },
    #[error("euclidean dimension must be at least 1")]
    ZeroDimension,
    #[error("sampling box [{lo}, {hi}] is not a finite nonempty interval")]
    BadBox { lo: f64, hi: f64 },
    #[error("map row {row} has {len} cells, expected {expected}")]
    RaggedRows { row: usize, len: usize, expected: usize },
    #[error("illegal map character {ch:?} at row {row}, column {col}")]
    IllegalChar { ch: char, row: usize, col: usize },
    #[error("map has no land cells")]
    NoLand,
    #[error("cell size must be finite and strictly positive, got {0}")]
    BadCellSize(f64),
    #[error("cell ({row},{col}) is out of bounds")]
    OutOfBounds { row: usize, col: usize },
    #[error("cell ({row},{col}) is water")]
    Water { row: usize, col: usize },
    #[error("point {0} is not in the carrier")]
    NotInCarrier(Point),
    #[error("cannot read point from {0}")]
    BadPointLiteral(String),
}

/// A carrier element. Which variant is valid depends on the space kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Vector(Vec<f64>),
    Cell(Cell),
}

impl Point {
    pub fn real(x: f64) -> Point {
        Point::Vector(vec![x])
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "#{i}"),
            Point::Vector(v) if v.len() == 1 => write!(f, "{}", v[0]),
            Point::Vector(v) => {
                f.write_str("(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Point::Cell(c) => write!(f, "({},{})", c.row, c.col),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Finite,
    Euclidean,
    Landmass,
}

#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
    lo: f64,
    hi: f64,
}

#[derive(Debug)]
enum Inner {
    Finite(FiniteMetric),
    Euclidean(Euclidean),
    Landmass(LandmassGrid),
}

/// A carrier set with a base metric and a sampler. Cheap to clone.
#[derive(Debug, Clone)]
pub struct PointSpace {
    inner: Arc<Inner>,
}

pub const DEFAULT_BOX: (f64, f64) = (-10.0, 10.0);

/// Validates a distance matrix and wraps it as a space on `0..n`.
pub fn build_finite(matrix: Vec<Vec<f64>>) -> Result<PointSpace, SpaceError> {
    Ok(PointSpace::from_finite(FiniteMetric::new(matrix)?))
}

/// `R^dim` with the Euclidean norm, sampled from `[-10, 10]^dim`.
pub fn build_euclidean(dim: usize) -> Result<PointSpace, SpaceError> {
    PointSpace::euclidean_in_box(dim, DEFAULT_BOX.0, DEFAULT_BOX.1)
}

/// Parses a `#`/`.` map with unit cell size.
pub fn load_landmass(map_text: &str) -> Result<LandmassGrid, SpaceError> {
    LandmassGrid::parse(map_text)
}

/// Geodesic distance between two land cells.
pub fn geodesic(grid: &LandmassGrid, a: Cell, b: Cell) -> Result<ExtReal, SpaceError> {
    grid.geodesic(a, b)
}

impl PointSpace {
    pub fn from_finite(metric: FiniteMetric) -> Self {
        Self {
            inner: Arc::new(Inner::Finite(metric)),
        }
    }

    pub fn euclidean_in_box(dim: usize, lo: f64, hi: f64) -> Result<Self, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpaceError::BadBox { lo, hi });
        }
        Ok(Self {
            inner: Arc::new(Inner::Euclidean(Euclidean { dim, lo, hi })),
        })
    }

    pub fn from_landmass(grid: LandmassGrid) -> Self {
        Self {
            inner: Arc::new(Inner::Landmass(grid)),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        match &*self.inner {
            Inner::Finite(_) => SpaceKind::Finite,
            Inner::Euclidean(_) => SpaceKind::Euclidean,
            Inner::Landmass(_) => SpaceKind::Landmass,
        }
    }

    /// Whether `self` and `other` are the same space object.
    pub fn same_as(&self, other: &PointSpace) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn landmass(&self) -> Option<&LandmassGrid> {
        match &*self.inner {
            Inner::Landmass(g) => Some(g),
            _ => None,
        }
    }

    pub fn finite_metric(&self) -> Option<&FiniteMetric> {
        match &*self.inner {
            Inner::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &*self.inner {
            Inner::Euclidean(e) => Some(e.dim),
            _ => None,
        }
    }

    pub fn sampling_box(&self) -> Option<(f64, f64)> {
        match &*self.inner {
            Inner::Euclidean(e) => Some((e.lo, e.hi)),
            _ => None,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&*self.inner, p) {
            (Inner::Finite(m), Point::Index(i)) => *i < m.len(),
            (Inner::Euclidean(e), Point::Vector(v)) => {
                v.len() == e.dim && v.iter().all(|c| c.is_finite())
            }
            (Inner::Landmass(g), Point::Cell(c)) => g.is_land(*c),
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<(), SpaceError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(SpaceError::NotInCarrier(p.clone()))
        }
    }

    /// The base metric `d(x, y)`. Infinite only between landmass components.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<ExtReal, SpaceError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> ExtReal {
        match (&*self.inner, x, y) {
            (Inner::Finite(m), Point::Index(i), Point::Index(j)) => ExtReal::of(m.get(*i, *j)),
            (Inner::Euclidean(_), Point::Vector(a), Point::Vector(b)) => {
                let sq: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                ExtReal::of(sq.sqrt())
            }
            (Inner::Landmass(g), Point::Cell(a), Point::Cell(b)) => g
                .geodesic(*a, *b)
                .expect("cells validated before distance lookup"),
            _ => unreachable!("points validated against the carrier"),
        }
    }

    /// True when the base metric never takes the value infinity.
    pub fn metric_is_finite(&self) -> bool {
        match &*self.inner {
            Inner::Landmass(g) => g.component_count() == 1,
            _ => true,
        }
    }

    /// Number of carrier points, for finite carriers.
    pub fn len(&self) -> Option<usize> {
        match &*self.inner {
            Inner::Finite(m) => Some(m.len()),
            Inner::Euclidean(_) => None,
            Inner::Landmass(g) => Some(g.land_cells().len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn has_distinct_points(&self) -> bool {
        self.len().is_none_or(|n| n > 1)
    }

    /// All carrier points in a fixed order, for finite carriers.
    pub fn points(&self) -> Option<Vec<Point>> {
        match &*self.inner {
            Inner::Finite(m) => Some((0..m.len()).map(Point::Index).collect()),
            Inner::Euclidean(_) => None,
            Inner::Landmass(g) => Some(g.land_cells().iter().copied().map(Point::Cell).collect()),
        }
    }

    /// Draws one carrier point. Euclidean coordinates are uniform in the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &*self.inner {
            Inner::Finite(m) => Point::Index(rng.random_range(0..m.len())),
            Inner::Euclidean(e) => {
                Point::Vector((0..e.dim).map(|_| rng.random_range(e.lo..e.hi)).collect())
            }
            Inner::Landmass(g) => {
                let cells = g.land_cells();
                Point::Cell(cells[rng.random_range(0..cells.len())])
            }
        }
    }

    /// Reads a point from JSON, relative to this space: an index for finite
    /// spaces, a number or array for Euclidean space, `[row, col]` or
    /// `{"row":..,"col":..}` for the landmass grid.
    pub fn parse_point(&self, value: &serde_json::Value) -> Result<Point, SpaceError> {
        use serde_json::Value;
        let bad = || SpaceError::BadPointLiteral(value.to_string());
        let point = match (self.kind(), value) {
            (SpaceKind::Finite, Value::Number(n)) => {
                Point::Index(n.as_u64().ok_or_else(bad)? as usize)
            }
            (SpaceKind::Euclidean, Value::Number(n)) => Point::real(n.as_f64().ok_or_else(bad)?),
            (SpaceKind::Euclidean, Value::Array(items)) => Point::Vector(
                items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(bad))
                    .collect::<Result<_, _>>()?,
            ),
            (SpaceKind::Landmass, Value::Array(items)) if items.len() == 2 => {
                let coord = |v: &Value| v.as_u64().map(|c| c as usize).ok_or_else(bad);
                Point::Cell(Cell::new(coord(&items[0])?, coord(&items[1])?))
            }
            (SpaceKind::Landmass, Value::Object(_)) => {
                Point::Cell(serde_json::from_value(value.clone()).map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        self.check(&point)?;
        Ok(point)
    }
}
