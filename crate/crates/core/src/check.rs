//! Sampling checks of the modular axioms and their first consequences.
//!
//! Each property is evaluated on samples drawn from a [`SamplingPlan`]; λ and
//! μ come from the plan's grid. Finite comparisons use the plan's relative
//! slack, comparisons with an infinite side are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::modular::Modular;
use crate::report::{sweep, CheckReport, Inputs, SampleLog, Slack};
use crate::sampling::SamplingPlan;
use crate::spaces::{Point, PointSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// `w_λ(x,x) = 0` for every grid λ, and `w_λ(x,y)` exceeds the slack for
    /// some grid λ when `x != y`.
    Axiom1,
    Symmetry,
    /// `w_{λ+μ}(x,y) <= w_λ(x,z) + w_μ(y,z)`.
    Triangle3,
    /// `w_{λ+μ}(x,y) <= λ/(λ+μ) w_λ(x,z) + μ/(λ+μ) w_μ(z,y)`.
    Convexity,
    /// `w_λ(x,y) > 0` for every grid λ when `x != y`.
    Strictness,
    MonotoneLambda,
    /// For convex modulars: decay to 0 as λ grows and blow-up as λ shrinks.
    ConvexLimits,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Axiom1,
        Property::Symmetry,
        Property::Triangle3,
        Property::Convexity,
        Property::Strictness,
        Property::MonotoneLambda,
        Property::ConvexLimits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Axiom1 => "axiom1",
            Property::Symmetry => "symmetry",
            Property::Triangle3 => "triangle3",
            Property::Convexity => "convexity",
            Property::Strictness => "strictness",
            Property::MonotoneLambda => "monotone_lambda",
            Property::ConvexLimits => "convex_limits",
        }
    }
}

// Factor of slack on the limit thresholds: the convexity bound gives
// w_{λ'} <= (λ/λ') w_λ exactly, the checks allow a decade either way.
const LIMIT_FACTOR: f64 = 10.0;

struct PairSample {
    x: Point,
    y: Point,
    lambda: f64,
}

struct TripleSample {
    x: Point,
    y: Point,
    z: Point,
    lambda: f64,
    mu: f64,
}

pub fn check_property(w: &Modular, space: &PointSpace, property: Property, plan: &SamplingPlan) -> Result<CheckReport> {
    plan.validate()?;
    let name = property.name();
    let needs_distinct = matches!(property, Property::Strictness | Property::ConvexLimits);
    if needs_distinct && !space.has_distinct_points() {
        return Err(Error::NeedsDistinctPoints(name));
    }
    if property == Property::ConvexLimits {
        w.require_convex(name)?;
    }
    let slack = Slack::Relative(plan.slack_tol);
    let grid = &plan.lambda_grid;
    let mut stream = plan.stream();

    match property {
        Property::Triangle3 | Property::Convexity => {
            let samples: Vec<TripleSample> = (0..plan.n_samples)
                .map(|_| {
                    let (x, y, z) = stream.triple(space);
                    let (lambda, mu) = stream.lambda_pair(grid);
                    TripleSample { x, y, z, lambda, mu }
                })
                .collect();
            sweep(name, &samples, |s, log| {
                let inputs = || {
                    Inputs::new()
                        .point("x", &s.x)
                        .point("y", &s.y)
                        .point("z", &s.z)
                        .real("lambda", s.lambda)
                        .real("mu", s.mu)
                };
                let total = s.lambda + s.mu;
                let lhs = w.eval(total, &s.x, &s.y)?;
                let rhs = if property == Property::Triangle3 {
                    w.eval(s.lambda, &s.x, &s.z)? + w.eval(s.mu, &s.y, &s.z)?
                } else {
                    w.eval(s.lambda, &s.x, &s.z)?.scale(s.lambda / total)?
                        + w.eval(s.mu, &s.z, &s.y)?.scale(s.mu / total)?
                };
                log.leq(name, lhs, rhs, slack, inputs);
                Ok(())
            })
        }
        _ => {
            let samples: Vec<PairSample> = (0..plan.n_samples)
                .map(|_| {
                    let (x, y) = stream.pair(space);
                    let lambda = stream.grid_lambda(grid);
                    PairSample { x, y, lambda }
                })
                .collect();
            let report = sweep(name, &samples, |s, log| match property {
                Property::Axiom1 => axiom1(w, s, grid, plan.slack_tol, log),
                Property::Symmetry => {
                    let lambda = s.lambda;
                    let a = w.eval(lambda, &s.x, &s.y)?;
                    let b = w.eval(lambda, &s.y, &s.x)?;
                    log.eq(name, a, b, slack, || {
                        Inputs::new().point("x", &s.x).point("y", &s.y).real("lambda", lambda)
                    });
                    Ok(())
                }
                Property::Strictness => strictness(w, s, grid, log),
                Property::MonotoneLambda => monotone(w, s, grid, slack, log),
                Property::ConvexLimits => convex_limits(w, s, grid, slack, log),
                Property::Triangle3 | Property::Convexity => unreachable!(),
            })?;
            Ok(if property == Property::ConvexLimits && report.skipped > 0 {
                let skipped = report.skipped;
                report.note(format!(
                    "{skipped} sample(s) skipped: x = y, or no finite positive value on the grid"
                ))
            } else {
                report
            })
        }
    }
}

fn axiom1(w: &Modular, s: &PairSample, grid: &[f64], slack_tol: f64, log: &mut SampleLog) -> Result<()> {
    for p in [&s.x, &s.y] {
        for &lambda in grid {
            let v = w.eval(lambda, p, p)?;
            log.leq("identity", v, ExtReal::ZERO, Slack::Exact, || {
                Inputs::new().point("x", p).point("y", p).real("lambda", lambda)
            });
        }
    }
    if s.x != s.y {
        let mut best = ExtReal::ZERO;
        for &lambda in grid {
            best = best.max(w.eval(lambda, &s.x, &s.y)?);
        }
        log.lt("separation", ExtReal::of(slack_tol), best, || {
            Inputs::new().point("x", &s.x).point("y", &s.y)
        });
    }
    Ok(())
}

fn strictness(w: &Modular, s: &PairSample, grid: &[f64], log: &mut SampleLog) -> Result<()> {
    if s.x == s.y {
        log.skip();
        return Ok(());
    }
    for &lambda in grid {
        let v = w.eval(lambda, &s.x, &s.y)?;
        log.lt("strictness", ExtReal::ZERO, v, || {
            Inputs::new().point("x", &s.x).point("y", &s.y).real("lambda", lambda)
        });
    }
    Ok(())
}

fn monotone(w: &Modular, s: &PairSample, grid: &[f64], slack: Slack, log: &mut SampleLog) -> Result<()> {
    let values = grid
        .iter()
        .map(|&l| w.eval(l, &s.x, &s.y))
        .collect::<Result<Vec<_>>>()?;
    for i in 1..grid.len() {
        let (small, large) = (grid[i - 1], grid[i]);
        log.leq("monotone_lambda", values[i], values[i - 1], slack, || {
            Inputs::new()
                .point("x", &s.x)
                .point("y", &s.y)
                .real("lambda_small", small)
                .real("lambda_large", large)
        });
    }
    Ok(())
}

fn convex_limits(w: &Modular, s: &PairSample, grid: &[f64], slack: Slack, log: &mut SampleLog) -> Result<()> {
    if s.x == s.y {
        log.skip();
        return Ok(());
    }
    let values = grid
        .iter()
        .map(|&l| w.eval(l, &s.x, &s.y))
        .collect::<Result<Vec<_>>>()?;
    // decay is measured from the smallest grid λ with a finite positive
    // value, growth from the largest; both bounds come from
    // w_{λ'} <= (λ/λ') w_λ for λ < λ'
    let finite_positive = |v: &ExtReal| v.is_finite() && !v.is_zero();
    let (Some(a), Some(b)) = (
        values.iter().position(finite_positive),
        values.iter().rposition(finite_positive),
    ) else {
        log.skip();
        return Ok(());
    };
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let inputs = |which: &str, lambda: f64, ref_lambda: f64, ref_value: f64| {
        Inputs::new()
            .point("x", &s.x)
            .point("y", &s.y)
            .text("limit", which)
            .real("lambda", lambda)
            .real("lambda_ref", ref_lambda)
            .real("w_ref", ref_value)
    };
    let (ref_lambda, ref_value) = (grid[a], values[a].to_f64());
    let decay_bound = ExtReal::of(LIMIT_FACTOR * ref_value * (ref_lambda / hi));
    log.leq("decay", values[grid.len() - 1], decay_bound, slack, || {
        inputs("lambda_to_infinity", hi, ref_lambda, ref_value)
    });
    let (ref_lambda, ref_value) = (grid[b], values[b].to_f64());
    let growth_bound = ExtReal::of((ref_lambda / lo) * ref_value / LIMIT_FACTOR);
    log.leq("growth", growth_bound, values[0], slack, || {
        inputs("lambda_to_zero", lo, ref_lambda, ref_value)
    });
    Ok(())
}
