//! Modular sets and modular convergence.
//!
//! Quantifiers over λ are read on finite grids: "some λ" means some grid
//! entry, "λ → ∞" means the tail of an increasing schedule. A negative
//! membership verdict therefore means no finite value was seen on the grid.
//!
//! Sequence limits are read on the last quarter of a finite sequence: the
//! tail window must sit below the tolerance, and unless it is identically
//! zero it must also be strictly below the window just before it, so a
//! residual that is small but not shrinking (such as `1/λ` for large λ) is
//! not mistaken for convergence.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::induced::{d_w_star, BisectionConfig};
use crate::modular::Modular;
use crate::report::{sweep, CheckReport, Inputs, Slack};
use crate::sampling::SamplingPlan;
use crate::spaces::{Point, PointSpace};

/// Default λ → ∞ schedule: `10^1, ..., 10^8`.
pub fn default_schedule() -> Vec<f64> {
    (1..=8).map(|e| 10f64.powi(e)).collect()
}

pub const DEFAULT_ZERO_TOL: f64 = 1e-3;

// member_zero looks at this many trailing schedule entries
const ZERO_TAIL: usize = 3;

/// `x ∈ X*_w(x0)`: `w_λ(x, x0)` is finite for some grid λ.
pub fn member_star(w: &Modular, x0: &Point, x: &Point, grid: &[f64]) -> Result<bool> {
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    for &lambda in grid {
        if w.eval(lambda, x, x0)?.is_finite() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `x ∈ X_w(x0)`: `w_λ(x, x0)` is at most `tol` on the last three schedule
/// entries.
pub fn member_zero(w: &Modular, x0: &Point, x: &Point, schedule: &[f64], tol: f64) -> Result<bool> {
    if schedule.is_empty() || schedule.windows(2).any(|s| s[0] >= s[1]) {
        return Err(invalid("schedule", "must be nonempty and increasing"));
    }
    let bound = ExtReal::new(tol)?;
    let start = schedule.len().saturating_sub(ZERO_TAIL);
    for &lambda in &schedule[start..] {
        if w.eval(lambda, x, x0)? > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Grids used by the membership tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipConfig {
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
}

fn default_zero_tol() -> f64 {
    DEFAULT_ZERO_TOL
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            schedule: default_schedule(),
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<Vec<Point>>,
}

/// Partitions a finite carrier into the classes of `x ~ y ⇔ x ∈ X*_w(y)`.
///
/// Fails with [`Error::NotTransitive`] if the relation read on this grid is
/// not an equivalence.
pub fn partition_star(w: &Modular, space: &PointSpace, grid: &[f64]) -> Result<Partition> {
    let points = space.points().ok_or(Error::NeedsFiniteCarrier("partition_star"))?;
    let n = points.len();
    let mut related = vec![false; n * n];
    for i in 0..n {
        for j in i..n {
            let r = member_star(w, &points[i], &points[j], grid)? && member_star(w, &points[j], &points[i], grid)?;
            related[i * n + j] = r;
            related[j * n + i] = r;
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| related[i * n + j]).collect();
        for &j in &members {
            if class_of[j] != usize::MAX {
                // j already sits in an earlier class that does not contain i
                let k = classes[class_of[j]][0];
                return Err(Error::NotTransitive {
                    a: points[i].clone(),
                    b: points[j].clone(),
                    c: points[k].clone(),
                });
            }
            class_of[j] = classes.len();
        }
        classes.push(members);
    }
    // every member of a class must be related to every other member
    for members in &classes {
        for &a in members {
            for &b in members {
                if !related[a * n + b] {
                    return Err(Error::NotTransitive {
                        a: points[a].clone(),
                        b: points[members[0]].clone(),
                        c: points[b].clone(),
                    });
                }
            }
        }
    }
    Ok(Partition {
        classes: classes
            .into_iter()
            .map(|c| c.into_iter().map(|i| points[i].clone()).collect())
            .collect(),
    })
}

/// Checks `X_w(x0) = X*_w(x0)` on sampled `(x0, x)`. Requires a convex modular.
pub fn check_prop2(w: &Modular, space: &PointSpace, plan: &SamplingPlan, cfg: &MembershipConfig) -> Result<CheckReport> {
    w.require_convex("check_prop2")?;
    check_prop2_unchecked(w, space, plan, cfg)
}

/// [`check_prop2`] without the convexity precondition, for contrast runs.
pub fn check_prop2_unchecked(
    w: &Modular,
    space: &PointSpace,
    plan: &SamplingPlan,
    cfg: &MembershipConfig,
) -> Result<CheckReport> {
    plan.validate()?;
    let mut stream = plan.stream();
    let pairs: Vec<(Point, Point)> = (0..plan.n_samples).map(|_| stream.pair(space)).collect();
    sweep("prop2", &pairs, |(x0, x), log| {
        let star = member_star(w, x0, x, &plan.lambda_grid)?;
        let zero = member_zero(w, x0, x, &cfg.schedule, cfg.zero_tol)?;
        let as_ext = |b: bool| if b { ExtReal::of(1.0) } else { ExtReal::ZERO };
        log.eq("member_zero == member_star", as_ext(zero), as_ext(star), Slack::Exact, || {
            Inputs::new()
                .point("x0", x0)
                .point("x", x)
                .text("member_star", if star { "true" } else { "false" })
                .text("member_zero", if zero { "true" } else { "false" })
        });
        Ok(())
    })
}

/// A finite sequence `x_1, ..., x_N` of carrier points.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    points: Vec<Point>,
}

impl SequenceSpec {
    /// Builds `x_n = generator(n)` for `n = 1..=len`, checking each term
    /// against the carrier.
    pub fn from_fn(space: &PointSpace, len: usize, generator: impl Fn(usize) -> Point) -> Result<Self> {
        Self::from_points(space, (1..=len).map(generator).collect())
    }

    pub fn from_points(space: &PointSpace, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("sequence", "must have at least one term"));
        }
        for p in &points {
            space.check(p)?;
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `(start, end)` of the tail window, the last `ceil(N/4)` terms.
    fn tail(&self) -> (usize, usize) {
        let n = self.points.len();
        (n - n.div_ceil(4), n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub converged: bool,
    pub witness_lambda: Option<f64>,
    /// `(n, value)` with `n` counted from 1.
    #[serde(rename = "trace")]
    pub residual_trace: Vec<(usize, ExtReal)>,
}

/// Whether the tail of `values` has settled below `tol`.
pub(crate) fn settles(values: &[ExtReal], tol: f64) -> bool {
    let n = values.len();
    if n == 0 {
        return false;
    }
    let window = n.div_ceil(4);
    let bound = ExtReal::of(tol);
    let window_max = |slice: &[ExtReal]| slice.iter().copied().max().unwrap_or(ExtReal::ZERO);
    let tail = window_max(&values[n - window..]);
    if tail > bound {
        return false;
    }
    if tail.is_zero() || n < 2 * window {
        return true;
    }
    tail < window_max(&values[n - 2 * window..n - window])
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(invalid("tol", "must be finite and > 0"))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        Err(invalid("grid", "must be nonempty with finite positive entries"))
    } else {
        Ok(())
    }
}

/// Searches the grid (ascending) for λ with `w_λ(x_n, limit) → 0`.
pub fn is_w_convergent(w: &Modular, seq: &SequenceSpec, limit: &Point, grid: &[f64], tol: f64) -> Result<ConvergenceVerdict> {
    check_tol(tol)?;
    check_grid(grid)?;
    let mut traces = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let values = residuals_to(w, seq, limit, lambda)?;
        if settles(&values, tol) {
            return Ok(ConvergenceVerdict {
                converged: true,
                witness_lambda: Some(lambda),
                residual_trace: numbered(&values, 1),
            });
        }
        traces.push(values);
    }
    // most lenient λ is the largest: w is non-increasing in λ
    let last = traces.pop().expect("grid nonempty");
    Ok(ConvergenceVerdict {
        converged: false,
        witness_lambda: None,
        residual_trace: numbered(&last, 1),
    })
}

/// Searches the grid for λ with `w_λ(x_m, x_n) → 0` over tail pairs.
///
/// The trace lists, for each tail index `n`, the largest `w_λ(x_m, x_n)`
/// with `m` also in the tail.
pub fn is_w_cauchy(w: &Modular, seq: &SequenceSpec, grid: &[f64], tol: f64) -> Result<ConvergenceVerdict> {
    check_tol(tol)?;
    check_grid(grid)?;
    let (start, end) = seq.tail();
    let window = end - start;
    let prev_start = start.saturating_sub(window);
    let bound = ExtReal::of(tol);
    let mut last_trace = Vec::new();
    for &lambda in grid {
        let tail = window_spread(w, seq, start, end, lambda)?;
        let tail_max = tail.iter().copied().max().unwrap_or(ExtReal::ZERO);
        let mut ok = tail_max <= bound;
        if ok && !tail_max.is_zero() && prev_start < start && start - prev_start == window {
            let prev = window_spread(w, seq, prev_start, start, lambda)?;
            ok = tail_max < prev.into_iter().max().unwrap_or(ExtReal::ZERO);
        }
        last_trace = numbered(&tail, start + 1);
        if ok {
            return Ok(ConvergenceVerdict {
                converged: true,
                witness_lambda: Some(lambda),
                residual_trace: last_trace,
            });
        }
    }
    Ok(ConvergenceVerdict {
        converged: false,
        witness_lambda: None,
        residual_trace: last_trace,
    })
}

/// Compares `d_w*(x_n, limit) → 0` against `w_λ(x_n, limit) → 0` for every
/// grid λ. A disagreement between the two verdicts is a violation.
pub fn check_prop3(
    w: &Modular,
    seq: &SequenceSpec,
    limit: &Point,
    grid: &[f64],
    cfg: &BisectionConfig,
    tol: f64,
) -> Result<CheckReport> {
    w.require_convex("check_prop3")?;
    check_tol(tol)?;
    check_grid(grid)?;
    cfg.validate()?;
    let metric: Vec<ExtReal> = seq
        .points()
        .iter()
        .map(|p| d_w_star(w, p, limit, cfg).map(|d| d.value))
        .collect::<Result<_>>()?;
    let metric_verdict = settles(&metric, tol);
    let (start, end) = seq.tail();
    let metric_tail = metric[start..end].iter().copied().max().unwrap_or(ExtReal::ZERO);

    let mut modular_verdict = true;
    let mut failing = None;
    for &lambda in grid {
        let values = residuals_to(w, seq, limit, lambda)?;
        if !settles(&values, tol) {
            modular_verdict = false;
            let tail_max = values[start..end].iter().copied().max().unwrap_or(ExtReal::ZERO);
            failing = Some((lambda, tail_max));
            break;
        }
    }
    let verdicts = [(metric_verdict, modular_verdict)];
    let report = sweep("prop3", &verdicts, |&(metric_ok, modular_ok), log| {
        if metric_ok != modular_ok {
            let (lambda, tail) = failing.unwrap_or((f64::NAN, ExtReal::ZERO));
            log.fail("d_w_star -> 0 <=> w_lambda -> 0 for all lambda", metric_tail, tail, || {
                let inputs = Inputs::new()
                    .int("terms", seq.len())
                    .point("limit", limit)
                    .text("metric_verdict", if metric_ok { "true" } else { "false" })
                    .text("modular_verdict", if modular_ok { "true" } else { "false" });
                if lambda.is_nan() {
                    inputs
                } else {
                    inputs.real("failing_lambda", lambda)
                }
            });
        } else {
            log.pass();
        }
        Ok(())
    })?;
    Ok(report
        .note(format!("metric verdict (d_w* -> 0): {metric_verdict}"))
        .note(format!("modular verdict (w_lambda -> 0 for every grid lambda): {modular_verdict}")))
}

fn residuals_to(w: &Modular, seq: &SequenceSpec, limit: &Point, lambda: f64) -> Result<Vec<ExtReal>> {
    seq.points().iter().map(|p| w.eval(lambda, p, limit)).collect()
}

// for each n in start..end, max over m in start..end of w_λ(x_m, x_n)
fn window_spread(w: &Modular, seq: &SequenceSpec, start: usize, end: usize, lambda: f64) -> Result<Vec<ExtReal>> {
    let pts = seq.points();
    (start..end)
        .map(|n| {
            let mut worst = ExtReal::ZERO;
            for m in start..end {
                worst = worst.max(w.eval(lambda, &pts[m], &pts[n])?);
            }
            Ok(worst)
        })
        .collect()
}

fn numbered(values: &[ExtReal], first: usize) -> Vec<(usize, ExtReal)> {
    values.iter().enumerate().map(|(i, v)| (first + i, *v)).collect()
}
