//! The modular abstraction `w : (0, ∞) × X × X → [0, ∞]`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::spaces::{Point, PointSpace, SpaceKind};

/// Properties a modular is claimed to have. Checks verify them by sampling;
/// operations that depend on a flag (such as `d_w_star` on convexity) refuse
/// to run without it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularFlags {
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub finite: bool,
}

/// Evaluation rule. Called only with `λ > 0` and carrier points.
pub type Rule = dyn Fn(f64, &Point, &Point) -> ExtReal + Send + Sync;

#[derive(Clone)]
pub struct Modular {
    name: String,
    space: PointSpace,
    flags: ModularFlags,
    rule: Arc<Rule>,
}

impl fmt::Debug for Modular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modular")
            .field("name", &self.name)
            .field("space", &self.space.kind())
            .field("flags", &self.flags)
            .finish()
    }
}

impl Modular {
    /// Wraps a rule. The rule must be deterministic.
    pub fn new<F>(name: impl Into<String>, space: PointSpace, flags: ModularFlags, rule: F) -> Self
    where
        F: Fn(f64, &Point, &Point) -> ExtReal + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            space,
            flags,
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn flags(&self) -> ModularFlags {
        self.flags
    }

    pub fn is_convex(&self) -> bool {
        self.flags.convex
    }

    /// `w_λ(x, y)`.
    pub fn eval(&self, lambda: f64, x: &Point, y: &Point) -> Result<ExtReal> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::BadLambda(lambda));
        }
        for p in [x, y] {
            if !self.space.contains(p) {
                return Err(Error::OutsideCarrier(p.clone()));
            }
        }
        Ok((self.rule)(lambda, x, y))
    }

    pub(crate) fn require_convex(&self, operation: &'static str) -> Result<()> {
        if self.flags.convex {
            Ok(())
        } else {
            Err(Error::RequiresConvex {
                operation,
                modular: self.name.clone(),
            })
        }
    }

    /// `v_λ(x, y) = w_λ(x, y) / λ`, a modular whenever `w` is convex.
    ///
    /// Inherits the strict and finite claims; convexity is not claimed.
    pub fn scaled(&self) -> Modular {
        let inner = Arc::clone(&self.rule);
        Modular {
            name: format!("scaled({})", self.name),
            space: self.space.clone(),
            flags: ModularFlags {
                convex: false,
                ..self.flags
            },
            rule: Arc::new(move |lambda, x, y| divide(inner(lambda, x, y), lambda)),
        }
    }

    /// Piecewise-constant modular on a finite carrier.
    ///
    /// `knots` are ascending λ breakpoints and `tables[k]` is the value
    /// matrix used for `knots[k] <= λ < knots[k+1]`; below the first knot
    /// `tables[0]` applies.
    pub fn tabulated(
        name: impl Into<String>,
        space: PointSpace,
        flags: ModularFlags,
        knots: Vec<f64>,
        tables: Vec<Vec<Vec<ExtReal>>>,
    ) -> Result<Modular> {
        if space.kind() == SpaceKind::Euclidean {
            return Err(Error::NeedsFiniteCarrier("a tabulated modular"));
        }
        let n = space.len().expect("non-euclidean carriers are finite");
        if knots.is_empty() || knots.len() != tables.len() {
            return Err(invalid(
                "tables",
                format!("{} knots but {} tables", knots.len(), tables.len()),
            ));
        }
        if knots.iter().any(|k| !(k.is_finite() && *k > 0.0)) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("knots", "must be strictly ascending positive reals"));
        }
        for (k, table) in tables.iter().enumerate() {
            if table.len() != n || table.iter().any(|r| r.len() != n) {
                return Err(invalid("tables", format!("table {k} is not {n}x{n}")));
            }
            if let Some(i) = (0..n).find(|&i| !table[i][i].is_zero()) {
                return Err(invalid("tables", format!("table {k} has nonzero diagonal at {i}")));
            }
        }
        let points = space.points().expect("finite carrier");
        let index = move |p: &Point| points.iter().position(|q| q == p).expect("carrier point");
        Ok(Modular::new(name, space, flags, move |lambda, x, y| {
            let k = knots.partition_point(|&knot| knot <= lambda).saturating_sub(1);
            tables[k][index(x)][index(y)]
        }))
    }
}

// w / λ with infinity absorbing; division (not multiplication by 1/λ) so the
// result is bit-identical to rules written as d / λ.
pub(crate) fn divide(value: ExtReal, lambda: f64) -> ExtReal {
    match value.finite() {
        Some(v) => ExtReal::of(v / lambda),
        None => ExtReal::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_euclidean, build_finite};

    fn constant_modular() -> Modular {
        let line = build_euclidean(1).unwrap();
        let space = line.clone();
        Modular::new("d", line, ModularFlags::default(), move |_, x, y| {
            space.distance(x, y).unwrap()
        })
    }

    #[test]
    fn eval_rejects_bad_lambda_and_points() {
        let w = constant_modular();
        let x = Point::real(0.0);
        for lambda in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(w.eval(lambda, &x, &x), Err(Error::BadLambda(_))));
        }
        assert!(matches!(
            w.eval(1.0, &x, &Point::Index(0)),
            Err(Error::OutsideCarrier(_))
        ));
    }

    #[test]
    fn scaled_divides_by_lambda() {
        let v = constant_modular().scaled();
        let val = v.eval(4.0, &Point::real(1.0), &Point::real(3.0)).unwrap();
        assert_eq!(val, ExtReal::of(0.5));
        assert_eq!(v.eval(4.0, &Point::real(1.0), &Point::real(1.0)).unwrap(), ExtReal::ZERO);
        assert!(v.name().starts_with("scaled("));
    }

    #[test]
    fn scaled_inherits_strict_and_finite_only() {
        let line = build_euclidean(1).unwrap();
        let flags = ModularFlags {
            convex: true,
            strict: true,
            finite: false,
        };
        let w = Modular::new("w", line, flags, |_, _, _| ExtReal::INFINITY);
        let v = w.scaled();
        assert_eq!(
            v.flags(),
            ModularFlags {
                convex: false,
                strict: true,
                finite: false
            }
        );
        let p = Point::real(1.0);
        assert_eq!(v.eval(2.0, &p, &p).unwrap(), ExtReal::INFINITY);
    }

    #[test]
    fn tabulated_lookup() {
        let space = build_finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let z = ExtReal::ZERO;
        let w = Modular::tabulated(
            "t",
            space,
            ModularFlags::default(),
            vec![1.0, 2.0],
            vec![
                vec![vec![z, ExtReal::INFINITY], vec![ExtReal::INFINITY, z]],
                vec![vec![z, ExtReal::of(3.0)], vec![ExtReal::of(3.0), z]],
            ],
        )
        .unwrap();
        let (a, b) = (Point::Index(0), Point::Index(1));
        assert_eq!(w.eval(0.5, &a, &b).unwrap(), ExtReal::INFINITY);
        assert_eq!(w.eval(1.0, &a, &b).unwrap(), ExtReal::INFINITY);
        assert_eq!(w.eval(1.999, &a, &b).unwrap(), ExtReal::INFINITY);
        assert_eq!(w.eval(2.0, &a, &b).unwrap(), ExtReal::of(3.0));
        assert_eq!(w.eval(1e9, &b, &a).unwrap(), ExtReal::of(3.0));
    }

    #[test]
    fn tabulated_validation() {
        let space = build_finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let z = ExtReal::ZERO;
        let ok = vec![vec![z, z], vec![z, z]];
        let flags = ModularFlags::default();
        assert!(Modular::tabulated("t", space.clone(), flags, vec![], vec![]).is_err());
        assert!(Modular::tabulated("t", space.clone(), flags, vec![2.0, 1.0], vec![ok.clone(), ok.clone()]).is_err());
        assert!(Modular::tabulated("t", space.clone(), flags, vec![1.0], vec![vec![vec![z]]]).is_err());
        let diag = vec![vec![ExtReal::of(1.0), z], vec![z, z]];
        assert!(Modular::tabulated("t", space.clone(), flags, vec![1.0], vec![diag]).is_err());
        assert!(Modular::tabulated("t", build_euclidean(1).unwrap(), flags, vec![1.0], vec![ok]).is_err());
    }
}
