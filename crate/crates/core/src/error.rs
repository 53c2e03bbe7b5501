use thiserror::Error;

use crate::extreal::ExtRealError;
use crate::spaces::{Point, SpaceError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    ExtReal(#[from] ExtRealError),
    #[error("lambda must be finite and strictly positive, got {0}")]
    BadLambda(f64),
    #[error("point {0} is not in the carrier")]
    OutsideCarrier(Point),
    #[error("{operation} requires a modular claimed convex, but {modular} is not")]
    RequiresConvex { operation: &'static str, modular: String },
    #[error("{0} needs two distinct points, but the carrier has only one")]
    NeedsDistinctPoints(&'static str),
    #[error("{0} needs a finite carrier")]
    NeedsFiniteCarrier(&'static str),
    #[error("the modular and the {0} live on different spaces")]
    SpaceMismatch(&'static str),
    #[error("self-map {map} sent {from} to {to}, which is outside the carrier")]
    MapLeftCarrier { map: String, from: Point, to: Point },
    #[error(
        "modular-set relation is not transitive on the grid: {a} ~ {b} and {b} ~ {c} but not {a} ~ {c}"
    )]
    NotTransitive { a: Point, b: Point, c: Point },
    #[error("hypothesis of {check} failed on the sample set: {violations} violation(s) of {hypothesis}")]
    Hypothesis {
        check: &'static str,
        hypothesis: &'static str,
        violations: usize,
        report: Box<crate::report::CheckReport>,
    },
    #[error("invalid parameter {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        name,
        reason: reason.into(),
    }
}
