//! Modular contractions, the fundamental contraction inequalities and
//! fixed-point iteration.
//!
//! A map `T` is a w-contraction with constants `(k, λ0)` when
//! `w_{kλ}(Tx, Ty) <= w_λ(x, y)` for `0 < λ <= λ0`, and a strong one when the
//! right side carries an extra factor `k`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::induced::{d_w_star, BisectionConfig};
use crate::modular::{divide, Modular, ModularFlags};
use crate::report::{sweep, CheckReport, Inputs, Slack};
use crate::sampling::SamplingPlan;
use crate::sets::member_star;
use crate::spaces::{Point, PointSpace, SpaceKind};

/// Stand-in for `λ = 0` in the fundamental inequalities.
pub const LAMBDA_FLOOR: f64 = 1e-9;

/// Sampled λ lies in `[λ0 · 10^-6, λ0)`.
const LAMBDA_DECADES: f64 = 6.0;

/// Orbit length followed from each sampled point when looking for `x(λ)`.
const ORBIT_LEN: usize = 64;

/// Iterates kept in a [`SolveReport`]; half from the start, half from the end.
pub const ITERATE_CAP: usize = 10_000;

pub type MapRule = dyn Fn(&Point) -> Point + Send + Sync;

/// A map from a carrier to itself. Every application checks that the image
/// stays in the carrier.
#[derive(Clone)]
pub struct SelfMap {
    name: String,
    space: PointSpace,
    rule: Arc<MapRule>,
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap")
            .field("name", &self.name)
            .field("space", &self.space.kind())
            .finish()
    }
}

impl SelfMap {
    /// The rule must be pure.
    pub fn new<F>(name: impl Into<String>, space: PointSpace, rule: F) -> Self
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            space,
            rule: Arc::new(rule),
        }
    }

    pub fn halving(space: &PointSpace) -> Result<Self> {
        Self::coordinatewise("halving", space, |v| v / 2.0)
    }

    pub fn shift(space: &PointSpace) -> Result<Self> {
        Self::coordinatewise("shift", space, |v| v + 1.0)
    }

    /// `x ↦ a·x + b`, coordinatewise.
    pub fn affine(space: &PointSpace, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("affine", "a and b must be finite"));
        }
        Self::coordinatewise(&format!("affine({a}, {b})"), space, move |v| a * v + b)
    }

    pub fn identity(space: &PointSpace) -> Self {
        Self::new("identity", space.clone(), Point::clone)
    }

    /// `i ↦ table[i]` on a finite carrier.
    pub fn table(space: &PointSpace, table: Vec<usize>) -> Result<Self> {
        let n = space.finite_metric().map(|m| m.len()).ok_or(Error::NeedsFiniteCarrier("table map"))?;
        if table.len() != n {
            return Err(invalid("table", format!("needs {n} entries, got {}", table.len())));
        }
        if let Some(bad) = table.iter().find(|&&j| j >= n) {
            return Err(invalid("table", format!("entry {bad} is not a point index below {n}")));
        }
        Ok(Self::new("table", space.clone(), move |p| match p {
            Point::Index(i) => Point::Index(table[*i]),
            other => other.clone(),
        }))
    }

    fn coordinatewise(name: &str, space: &PointSpace, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if space.kind() != SpaceKind::Euclidean {
            return Err(invalid("map", format!("{name} needs a euclidean carrier")));
        }
        Ok(Self::new(name, space.clone(), move |p| match p {
            Point::Vector(v) => Point::Vector(v.iter().map(|&c| f(c)).collect()),
            other => other.clone(),
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        if !self.space.contains(x) {
            return Err(Error::OutsideCarrier(x.clone()));
        }
        let y = (self.rule)(x);
        if !self.space.contains(&y) {
            return Err(Error::MapLeftCarrier {
                map: self.name.clone(),
                from: x.clone(),
                to: y,
            });
        }
        Ok(y)
    }
}

/// Named self-maps, as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Halving,
    Shift,
    Identity,
    Affine { a: f64, b: f64 },
    Table(Vec<usize>),
}

impl MapSpec {
    pub fn build(&self, space: &PointSpace) -> Result<SelfMap> {
        match self {
            MapSpec::Halving => SelfMap::halving(space),
            MapSpec::Shift => SelfMap::shift(space),
            MapSpec::Identity => Ok(SelfMap::identity(space)),
            MapSpec::Affine { a, b } => SelfMap::affine(space, *a, *b),
            MapSpec::Table(t) => SelfMap::table(space, t.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionParams {
    pub k: f64,
    pub lambda0: f64,
}

impl ContractionParams {
    pub fn new(k: f64, lambda0: f64) -> Result<Self> {
        let p = Self { k, lambda0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(invalid("k", format!("must lie in (0, 1), got {}", self.k)));
        }
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(invalid("lambda0", format!("must be positive, got {}", self.lambda0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionMode {
    Plain,
    Strong,
}

// how λ1 splits (1 - k)λ in the fundamental inequalities
#[derive(Debug, Clone, Copy)]
enum Split {
    Zero,
    Full,
    Fraction(f64),
}

struct PairDraw {
    x: Point,
    y: Point,
    tx: Point,
    ty: Point,
    common: bool,
    u: f64,
    split: Split,
}

impl PairDraw {
    fn lambda(&self, lambda0: f64) -> f64 {
        lambda0 * 10f64.powf(-LAMBDA_DECADES * (1.0 - self.u))
    }

    fn lambda1(&self, total: f64) -> f64 {
        match self.split {
            Split::Zero => 0.0,
            Split::Full => total,
            Split::Fraction(f) => f * total,
        }
    }
}

fn same_space(w: &Modular, t: &SelfMap) -> Result<()> {
    if w.space().same_as(t.space()) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch("self-map"))
    }
}

fn draw_pairs(w: &Modular, t: &SelfMap, plan: &SamplingPlan) -> Result<Vec<PairDraw>> {
    plan.validate()?;
    same_space(w, t)?;
    let space = w.space();
    let mut stream = plan.stream();
    let raw: Vec<_> = (0..plan.n_samples)
        .map(|_| {
            let (x, y) = stream.pair(space);
            let u = stream.unit();
            let s = stream.unit();
            let split = if s < 0.125 {
                Split::Zero
            } else if s < 0.25 {
                Split::Full
            } else {
                Split::Fraction(stream.unit())
            };
            (x, y, u, split)
        })
        .collect();
    raw.into_par_iter()
        .map(|(x, y, u, split)| {
            Ok(PairDraw {
                tx: t.apply(&x)?,
                ty: t.apply(&y)?,
                common: member_star(w, &x, &y, &plan.lambda_grid)?,
                x,
                y,
                u,
                split,
            })
        })
        .collect()
}

fn skip_note(report: CheckReport, skipped: usize, tag: &str) -> CheckReport {
    if skipped == 0 {
        report
    } else {
        report.note(format!("{skipped} sample(s) skipped: {tag}"))
    }
}

fn contraction_report(
    w: &Modular,
    draws: &[PairDraw],
    k: f64,
    lambda0: f64,
    mode: ContractionMode,
    plan: &SamplingPlan,
) -> Result<CheckReport> {
    let (property, check) = match mode {
        ContractionMode::Plain => ("contraction", "w_{k lambda}(Tx,Ty) <= w_lambda(x,y)"),
        ContractionMode::Strong => ("strong_contraction", "w_{k lambda}(Tx,Ty) <= k w_lambda(x,y)"),
    };
    let report = sweep(property, draws, |d, log| {
        if !d.common {
            log.skip();
            return Ok(());
        }
        let lambda = d.lambda(lambda0);
        let lhs = w.eval(k * lambda, &d.tx, &d.ty)?;
        let base = w.eval(lambda, &d.x, &d.y)?;
        let rhs = match mode {
            ContractionMode::Plain => base,
            ContractionMode::Strong => base.scale(k)?,
        };
        log.leq(check, lhs, rhs, Slack::Relative(plan.slack_tol), || {
            Inputs::new()
                .point("x", &d.x)
                .point("y", &d.y)
                .real("lambda", lambda)
                .real("k", k)
        });
        Ok(())
    })?;
    let skipped = report.skipped;
    Ok(skip_note(report, skipped, "no common modular set"))
}

fn verify(w: &Modular, t: &SelfMap, p: ContractionParams, mode: ContractionMode, plan: &SamplingPlan) -> Result<CheckReport> {
    p.validate()?;
    let draws = draw_pairs(w, t, plan)?;
    contraction_report(w, &draws, p.k, p.lambda0, mode, plan)
}

/// Samples `w_{kλ}(Tx, Ty) <= w_λ(x, y)` over `λ ∈ (0, λ0]`.
pub fn verify_contraction(w: &Modular, t: &SelfMap, p: ContractionParams, plan: &SamplingPlan) -> Result<CheckReport> {
    verify(w, t, p, ContractionMode::Plain, plan)
}

/// Samples `w_{kλ}(Tx, Ty) <= k · w_λ(x, y)` over `λ ∈ (0, λ0]`.
pub fn verify_strong_contraction(w: &Modular, t: &SelfMap, p: ContractionParams, plan: &SamplingPlan) -> Result<CheckReport> {
    verify(w, t, p, ContractionMode::Strong, plan)
}

/// Smallest `k` (within `tol`) passing the sampled contraction check, by
/// bisection on one fixed sample set. `None` if even `k = 1 - tol` fails.
pub fn estimate_min_k(
    w: &Modular,
    t: &SelfMap,
    lambda0: f64,
    mode: ContractionMode,
    plan: &SamplingPlan,
    tol: f64,
) -> Result<Option<f64>> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(invalid("tol", "must lie in (0, 0.5)"));
    }
    ContractionParams::new(0.5, lambda0)?;
    let draws = draw_pairs(w, t, plan)?;
    let passes = |k: f64| -> Result<bool> { Ok(contraction_report(w, &draws, k, lambda0, mode, plan)?.passed()) };
    let mut hi = 1.0 - tol;
    if !passes(hi)? {
        return Ok(None);
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = lo + (hi - lo) / 2.0;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `w_{λi}(p, Tp)`, optionally weighted by `λi`. At `λi = 0` the value at
/// [`LAMBDA_FLOOR`] stands in for the limit; `None` if that is infinite.
fn displacement_term(w: &Modular, lambda_i: f64, p: &Point, tp: &Point, weighted: bool) -> Result<Option<ExtReal>> {
    let at = if lambda_i > 0.0 { lambda_i } else { LAMBDA_FLOOR };
    let v = w.eval(at, p, tp)?;
    if lambda_i <= 0.0 && v.is_infinite() {
        return Ok(None);
    }
    Ok(Some(if weighted { v.scale(at)? } else { v }))
}

/// Both sides of a fundamental inequality at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: ExtReal,
    pub rhs: ExtReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fundamental {
    Modular,
    Strong,
}

impl Fundamental {
    fn check(self) -> &'static str {
        match self {
            Fundamental::Modular => "w_lambda(x,y) <= (l1 w_l1(x,Tx) + l2 w_l2(y,Ty)) / (lambda (1-k))",
            Fundamental::Strong => "w_lambda(x,y) <= (w_l1(x,Tx) + w_l2(y,Ty)) / (1-k)",
        }
    }
}

// Ok(None): boundary term indeterminate
#[allow(clippy::too_many_arguments)]
fn fundamental_sides(
    kind: Fundamental,
    w: &Modular,
    k: f64,
    x: &Point,
    y: &Point,
    tx: &Point,
    ty: &Point,
    lambda: f64,
    lambda1: f64,
) -> Result<Option<Sides>> {
    let total = (1.0 - k) * lambda;
    let lambda2 = (total - lambda1).max(0.0);
    let weighted = kind == Fundamental::Modular;
    let (Some(a), Some(b)) = (
        displacement_term(w, lambda1, x, tx, weighted)?,
        displacement_term(w, lambda2, y, ty, weighted)?,
    ) else {
        return Ok(None);
    };
    let denominator = match kind {
        Fundamental::Modular => lambda * (1.0 - k),
        Fundamental::Strong => 1.0 - k,
    };
    Ok(Some(Sides {
        lhs: w.eval(lambda, x, y)?,
        rhs: divide(a + b, denominator),
    }))
}

fn check_sides_args(k: f64, lambda: f64, lambda1: f64) -> Result<()> {
    if !(k > 0.0 && k < 1.0) {
        return Err(invalid("k", "must lie in (0, 1)"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::BadLambda(lambda));
    }
    if !(lambda1 >= 0.0 && lambda1 <= (1.0 - k) * lambda) {
        return Err(invalid("lambda1", "must lie in [0, (1 - k) lambda]"));
    }
    Ok(())
}

/// Both sides of the fundamental modular contraction inequality at
/// `(x, y, λ, λ1)`, with `λ2 = (1 - k)λ - λ1`. `None` when a `λi = 0` term
/// has no finite stand-in.
pub fn fund1_sides(w: &Modular, t: &SelfMap, k: f64, x: &Point, y: &Point, lambda: f64, lambda1: f64) -> Result<Option<Sides>> {
    w.require_convex("check_fund1")?;
    same_space(w, t)?;
    check_sides_args(k, lambda, lambda1)?;
    fundamental_sides(Fundamental::Modular, w, k, x, y, &t.apply(x)?, &t.apply(y)?, lambda, lambda1)
}

/// As [`fund1_sides`] for the strong inequality.
pub fn fund2_sides(w: &Modular, t: &SelfMap, k: f64, x: &Point, y: &Point, lambda: f64, lambda1: f64) -> Result<Option<Sides>> {
    same_space(w, t)?;
    check_sides_args(k, lambda, lambda1)?;
    fundamental_sides(Fundamental::Strong, w, k, x, y, &t.apply(x)?, &t.apply(y)?, lambda, lambda1)
}

fn check_fundamental(
    kind: Fundamental,
    w: &Modular,
    t: &SelfMap,
    p: ContractionParams,
    plan: &SamplingPlan,
) -> Result<CheckReport> {
    p.validate()?;
    let draws = draw_pairs(w, t, plan)?;
    let (name, mode, hypothesis) = match kind {
        Fundamental::Modular => ("fund1", ContractionMode::Plain, "modular contraction"),
        Fundamental::Strong => ("fund2", ContractionMode::Strong, "strong modular contraction"),
    };
    let premise = contraction_report(w, &draws, p.k, p.lambda0, mode, plan)?;
    if !premise.passed() {
        return Err(Error::Hypothesis {
            check: name,
            hypothesis,
            violations: premise.violations.len(),
            report: Box::new(premise),
        });
    }
    let infinite = AtomicUsize::new(0);
    let indeterminate = AtomicUsize::new(0);
    let report = sweep(name, &draws, |d, log| {
        let lambda = d.lambda(p.lambda0);
        let lambda1 = d.lambda1((1.0 - p.k) * lambda);
        let Some(sides) = fundamental_sides(kind, w, p.k, &d.x, &d.y, &d.tx, &d.ty, lambda, lambda1)? else {
            indeterminate.fetch_add(1, Ordering::Relaxed);
            log.skip();
            return Ok(());
        };
        if sides.lhs.is_infinite() {
            infinite.fetch_add(1, Ordering::Relaxed);
            log.skip();
            return Ok(());
        }
        log.leq(kind.check(), sides.lhs, sides.rhs, Slack::Relative(plan.slack_tol), || {
            Inputs::new()
                .point("x", &d.x)
                .point("y", &d.y)
                .real("lambda", lambda)
                .real("lambda1", lambda1)
                .real("k", p.k)
        });
        Ok(())
    })?;
    let report = skip_note(report, infinite.into_inner(), "w_lambda(x,y) infinite");
    Ok(skip_note(report, indeterminate.into_inner(), "boundary-indeterminate"))
}

/// Samples the fundamental modular contraction inequality. The map must
/// pass [`verify_contraction`] on the same samples first.
pub fn check_fund1(w: &Modular, t: &SelfMap, p: ContractionParams, plan: &SamplingPlan) -> Result<CheckReport> {
    w.require_convex("check_fund1")?;
    check_fundamental(Fundamental::Modular, w, t, p, plan)
}

/// Samples the fundamental strong contraction inequality. The map must pass
/// [`verify_strong_contraction`] on the same samples first.
pub fn check_fund2(w: &Modular, t: &SelfMap, p: ContractionParams, plan: &SamplingPlan) -> Result<CheckReport> {
    check_fundamental(Fundamental::Strong, w, t, p, plan)
}

/// Samples `d(x, y) <= (d(x, Tx) + d(y, Ty)) / (1 - k)` for a metric
/// contraction `T`, after checking `d(Tx, Ty) <= k d(x, y)` on the same pairs.
pub fn check_palais(space: &PointSpace, t: &SelfMap, k: f64, plan: &SamplingPlan) -> Result<CheckReport> {
    plan.validate()?;
    if !(k > 0.0 && k < 1.0) {
        return Err(invalid("k", "must lie in (0, 1)"));
    }
    if !space.same_as(t.space()) {
        return Err(Error::SpaceMismatch("self-map"));
    }
    let mut stream = plan.stream();
    let pairs: Vec<(Point, Point)> = (0..plan.n_samples).map(|_| stream.pair(space)).collect();
    let draws = pairs
        .into_par_iter()
        .map(|(x, y)| Ok((t.apply(&x)?, t.apply(&y)?, x, y)))
        .collect::<Result<Vec<_>>>()?;
    let slack = Slack::Relative(plan.slack_tol);
    let inputs = |x: &Point, y: &Point| Inputs::new().point("x", x).point("y", y).real("k", k);
    let premise = sweep("metric_contraction", &draws, |(tx, ty, x, y), log| {
        let rhs = space.distance(x, y)?.scale(k)?;
        log.leq("d(Tx,Ty) <= k d(x,y)", space.distance(tx, ty)?, rhs, slack, || inputs(x, y));
        Ok(())
    })?;
    if !premise.passed() {
        return Err(Error::Hypothesis {
            check: "palais",
            hypothesis: "metric contraction",
            violations: premise.violations.len(),
            report: Box::new(premise),
        });
    }
    let report = sweep("palais", &draws, |(tx, ty, x, y), log| {
        let lhs = space.distance(x, y)?;
        if lhs.is_infinite() {
            log.skip();
            return Ok(());
        }
        let rhs = divide(space.distance(x, tx)? + space.distance(y, ty)?, 1.0 - k);
        log.leq("d(x,y) <= (d(x,Tx) + d(y,Ty)) / (1-k)", lhs, rhs, slack, || inputs(x, y));
        Ok(())
    })?;
    let skipped = report.skipped;
    Ok(skip_note(report, skipped, "d(x,y) infinite"))
}

/// The point found for one grid λ, or the smallest value seen if none works.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionWitness {
    pub lambda: f64,
    pub point: Option<Point>,
    /// `w_λ(x, Tx)` at `point`.
    pub value: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremConditions {
    pub report: CheckReport,
    /// Every sampled value `w_λ(x, y)` was finite.
    pub finite_valued: bool,
    pub flags: ModularFlags,
    pub witnesses: Vec<ConditionWitness>,
}

/// For each grid λ, looks for `x` with `w_λ(x, Tx) < ∞` among sampled points
/// and their orbits under `T`.
pub fn verify_theorem_conditions(w: &Modular, t: &SelfMap, grid: &[f64], plan: &SamplingPlan) -> Result<TheoremConditions> {
    plan.validate()?;
    same_space(w, t)?;
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    if let Some(&bad) = grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::BadLambda(bad));
    }
    let space = w.space();
    let mut stream = plan.stream();
    let starts: Vec<Point> = (0..plan.n_samples).map(|_| stream.point(space)).collect();
    let pairs: Vec<(Point, Point)> = (0..plan.n_samples).map(|_| stream.pair(space)).collect();

    let orbits = starts
        .into_par_iter()
        .map(|x| {
            let mut steps = Vec::with_capacity(ORBIT_LEN);
            let mut p = x;
            for _ in 0..ORBIT_LEN {
                let tp = t.apply(&p)?;
                steps.push((p, tp.clone()));
                p = tp;
            }
            Ok(steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let candidates: Vec<(Point, Point)> = orbits.into_iter().flatten().collect();

    let witnesses = grid
        .par_iter()
        .map(|&lambda| {
            let mut best = ConditionWitness {
                lambda,
                point: None,
                value: ExtReal::INFINITY,
            };
            for (p, tp) in &candidates {
                let v = w.eval(lambda, p, tp)?;
                if v.is_finite() {
                    best.point = Some(p.clone());
                    best.value = v;
                    break;
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    let finite_valued = pairs
        .par_iter()
        .map(|(x, y)| {
            for &lambda in grid {
                if w.eval(lambda, x, y)?.is_infinite() {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);

    let mut report = sweep("theorem_conditions", &witnesses, |c, log| {
        log.lt("exists x: w_lambda(x,Tx) < inf", c.value, ExtReal::INFINITY, || {
            Inputs::new().real("lambda", c.lambda)
        });
        Ok(())
    })?;
    report = report.note(if finite_valued {
        "finite-valued: condition redundant"
    } else {
        "not finite-valued on samples: condition required"
    });
    let flags = w.flags();
    report = report
        .note(format!("strict: {}", flags.strict))
        .note(format!("convex: {}", flags.convex));
    Ok(TheoremConditions {
        report,
        finite_valued,
        flags,
        witnesses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualMet,
    MaxIter,
    NonfiniteResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Number of applications of `T`.
    pub n_iters: usize,
    pub stop_reason: StopReason,
    /// `w_{λ*}(x_n, x_{n+1})` for `n = 0, 1, ...`.
    #[serde(rename = "residuals")]
    pub residual_trace: Vec<ExtReal>,
    #[serde(rename = "fixed_point")]
    pub approx_fixed_point: Option<Point>,
    /// `x_0, x_1, ...`, with the middle dropped past [`ITERATE_CAP`].
    pub iterates: Vec<Point>,
    pub iterates_dropped: usize,
    pub lambda_star: f64,
    pub tol: f64,
    /// `d_w*(x_n, x_{n+1})` at the last step, for convex modulars.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dw_star_residual: Option<ExtReal>,
    /// Whether the returned point lies in `X*_w(x_0)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub in_modular_set_of_x0: Option<bool>,
}

struct IterateTrace {
    head: Vec<Point>,
    tail: VecDeque<Point>,
    dropped: usize,
}

impl IterateTrace {
    const HALF: usize = ITERATE_CAP / 2;

    fn new() -> Self {
        Self {
            head: Vec::new(),
            tail: VecDeque::new(),
            dropped: 0,
        }
    }

    fn push(&mut self, p: Point) {
        if self.head.len() < Self::HALF {
            self.head.push(p);
            return;
        }
        if self.tail.len() == Self::HALF {
            self.tail.pop_front();
            self.dropped += 1;
        }
        self.tail.push_back(p);
    }

    fn finish(self) -> (Vec<Point>, usize) {
        let mut all = self.head;
        all.extend(self.tail);
        (all, self.dropped)
    }
}

/// Iterates `x_{n+1} = T x_n` until `w_{λ*}(x_n, x_{n+1}) <= tol` or
/// `max_iter` applications of `T`.
pub fn solve(w: &Modular, t: &SelfMap, x0: &Point, lambda_star: f64, tol: f64, max_iter: usize) -> Result<SolveReport> {
    same_space(w, t)?;
    if !(lambda_star.is_finite() && lambda_star > 0.0) {
        return Err(Error::BadLambda(lambda_star));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", "must be finite and > 0"));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    let bound = ExtReal::of(tol);
    let mut trace = IterateTrace::new();
    let mut residuals = Vec::new();
    let mut x = x0.clone();
    trace.push(x.clone());
    let mut fixed_point = None;
    let mut last_step = None;
    while residuals.len() < max_iter {
        let next = t.apply(&x)?;
        let r = w.eval(lambda_star, &x, &next)?;
        residuals.push(r);
        trace.push(next.clone());
        last_step = Some((x, next.clone()));
        x = next;
        if r <= bound {
            fixed_point = Some(x.clone());
            break;
        }
    }
    let stop_reason = if fixed_point.is_some() {
        StopReason::ResidualMet
    } else if residuals.iter().all(|r| r.is_infinite()) {
        StopReason::NonfiniteResidual
    } else {
        StopReason::MaxIter
    };
    let dw_star_residual = match (&last_step, w.is_convex()) {
        (Some((a, b)), true) => Some(d_w_star(w, a, b, &BisectionConfig::default())?.value),
        _ => None,
    };
    let in_modular_set_of_x0 = match &fixed_point {
        Some(p) => Some(member_star(w, x0, p, &SamplingPlan::default().lambda_grid)?),
        None => None,
    };
    let (iterates, iterates_dropped) = trace.finish();
    Ok(SolveReport {
        n_iters: residuals.len(),
        stop_reason,
        residual_trace: residuals,
        approx_fixed_point: fixed_point,
        iterates,
        iterates_dropped,
        lambda_star,
        tol,
        dw_star_residual,
        in_modular_set_of_x0,
    })
}
