//! Metrics induced by a modular on a modular set:
//!
//! ```text
//! d_w(x, y)  = inf { λ > 0 : w_λ(x, y) <= λ }
//! d_w*(x, y) = inf { λ > 0 : w_λ(x, y) <= 1 }     (convex w)
//! ```
//!
//! Both threshold predicates are monotone in λ because `λ ↦ w_λ(x, y)` is
//! non-increasing, so the infima are found by bisection on a bracket.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::modular::Modular;
use crate::report::{sweep, CheckReport, Inputs, Slack};
use crate::sampling::SamplingPlan;
use crate::sets::member_star;
use crate::spaces::{Point, PointSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectionConfig {
    #[serde(default = "default_lambda_min")]
    pub lambda_min: f64,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    /// Absolute tolerance on λ.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_lambda_min() -> f64 {
    1e-9
}

fn default_lambda_max() -> f64 {
    1e12
}

fn default_tol() -> f64 {
    1e-6
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            lambda_min: default_lambda_min(),
            lambda_max: default_lambda_max(),
            tol: default_tol(),
        }
    }
}

impl BisectionConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min.is_finite() && self.lambda_min > 0.0) {
            return Err(invalid("lambda_min", "must be finite and > 0"));
        }
        if !(self.lambda_max.is_finite() && self.lambda_max > self.lambda_min) {
            return Err(invalid("lambda_max", "must be finite and > lambda_min"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Slack used for metric-axiom comparisons between bisection results.
    pub fn metric_slack(&self) -> Slack {
        Slack::Absolute(3.0 * self.tol)
    }
}

/// Result of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Infimum {
    /// A λ where the predicate holds, within `tol` above the infimum; or
    /// infinity when the predicate fails on the whole bracket.
    pub value: ExtReal,
    /// The predicate already held at `lambda_min`; the true infimum may be
    /// anywhere in `[0, lambda_min]`.
    pub at_floor: bool,
}

/// Locates `inf { λ : predicate(λ) }` for a predicate that is false then true.
pub fn infimum_of_threshold<F>(mut predicate: F, cfg: &BisectionConfig) -> Infimum
where
    F: FnMut(f64) -> bool,
{
    match try_infimum_of_threshold(|l| Ok::<_, std::convert::Infallible>(predicate(l)), cfg) {
        Ok(inf) => inf,
        Err(never) => match never {},
    }
}

pub fn try_infimum_of_threshold<F, E>(mut predicate: F, cfg: &BisectionConfig) -> Result<Infimum, E>
where
    F: FnMut(f64) -> Result<bool, E>,
{
    if !predicate(cfg.lambda_max)? {
        return Ok(Infimum {
            value: ExtReal::INFINITY,
            at_floor: false,
        });
    }
    if predicate(cfg.lambda_min)? {
        return Ok(Infimum {
            value: ExtReal::of(cfg.lambda_min),
            at_floor: true,
        });
    }
    // invariant: predicate(lo) false, predicate(hi) true
    let (mut lo, mut hi) = (cfg.lambda_min, cfg.lambda_max);
    while hi - lo > cfg.tol {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            // bracket narrower than float spacing
            break;
        }
        if predicate(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Infimum {
        value: ExtReal::of(hi),
        at_floor: false,
    })
}

/// Distance under an induced metric. At-floor results read as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedDistance {
    pub value: ExtReal,
    pub at_floor: bool,
}

impl From<Infimum> for InducedDistance {
    fn from(inf: Infimum) -> Self {
        Self {
            value: if inf.at_floor { ExtReal::ZERO } else { inf.value },
            at_floor: inf.at_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InducedMetric {
    #[serde(rename = "d_w")]
    Dw,
    #[serde(rename = "d_w_star")]
    DwStar,
}

impl InducedMetric {
    pub fn name(self) -> &'static str {
        match self {
            InducedMetric::Dw => "d_w",
            InducedMetric::DwStar => "d_w_star",
        }
    }

    pub fn distance(self, w: &Modular, x: &Point, y: &Point, cfg: &BisectionConfig) -> Result<InducedDistance> {
        match self {
            InducedMetric::Dw => d_w(w, x, y, cfg),
            InducedMetric::DwStar => d_w_star(w, x, y, cfg),
        }
    }
}

pub fn d_w(w: &Modular, x: &Point, y: &Point, cfg: &BisectionConfig) -> Result<InducedDistance> {
    cfg.validate()?;
    let inf = try_infimum_of_threshold(|l| Ok::<_, crate::Error>(w.eval(l, x, y)? <= ExtReal::of(l)), cfg)?;
    Ok(inf.into())
}

pub fn d_w_star(w: &Modular, x: &Point, y: &Point, cfg: &BisectionConfig) -> Result<InducedDistance> {
    w.require_convex("d_w_star")?;
    cfg.validate()?;
    let one = ExtReal::of(1.0);
    let inf = try_infimum_of_threshold(|l| Ok::<_, crate::Error>(w.eval(l, x, y)? <= one), cfg)?;
    Ok(inf.into())
}

/// One metric query as it appears in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricQuery {
    pub metric: InducedMetric,
    pub pair: [Point; 2],
    pub value: ExtReal,
    pub flags: Vec<String>,
    pub tol: f64,
}

impl MetricQuery {
    pub fn run(metric: InducedMetric, w: &Modular, x: &Point, y: &Point, cfg: &BisectionConfig) -> Result<Self> {
        let d = metric.distance(w, x, y, cfg)?;
        let mut flags = Vec::new();
        if d.at_floor {
            flags.push("at_floor".to_owned());
        }
        if d.value.is_infinite() {
            flags.push("beyond_bracket".to_owned());
        }
        Ok(Self {
            metric,
            pair: [x.clone(), y.clone()],
            value: d.value,
            flags,
            tol: cfg.tol,
        })
    }
}

/// Samples triples inside one modular set (anchored at `x`) and checks
/// identity, symmetry and the triangle inequality for the induced metric.
pub fn check_metric_axioms(
    metric: InducedMetric,
    w: &Modular,
    space: &PointSpace,
    plan: &SamplingPlan,
    cfg: &BisectionConfig,
) -> Result<CheckReport> {
    plan.validate()?;
    cfg.validate()?;
    if metric == InducedMetric::DwStar {
        w.require_convex("d_w_star")?;
    }
    let mut stream = plan.stream();
    let samples: Vec<(Point, Point, Point)> = (0..plan.n_samples).map(|_| stream.triple(space)).collect();
    let slack = cfg.metric_slack();
    let strict = w.flags().strict;
    let property = format!("metric_axioms:{}", metric.name());
    let report = sweep(&property, &samples, |(x, y, z), log| {
        let grid = &plan.lambda_grid;
        if !member_star(w, x, y, grid)? || !member_star(w, x, z, grid)? {
            log.skip();
            return Ok(());
        }
        let dist = |a: &Point, b: &Point| metric.distance(w, a, b, cfg).map(|d| d.value);
        let inputs = || Inputs::new().point("x", x).point("y", y).point("z", z);

        log.leq("identity", dist(x, x)?, ExtReal::ZERO, Slack::Exact, inputs);
        let dxy = dist(x, y)?;
        if strict && x != y {
            log.lt("separation", ExtReal::of(cfg.tol), dxy, inputs);
        }
        log.eq("symmetry", dxy, dist(y, x)?, Slack::Exact, inputs);
        let rhs = dist(x, z)? + dist(z, y)?;
        log.leq("triangle", dxy, rhs, slack, inputs);
        Ok(())
    })?;
    Ok(if report.skipped > 0 {
        let skipped = report.skipped;
        report.note(format!("{skipped} sample(s) skipped: points outside the anchor's modular set"))
    } else {
        report
    })
}

/// Checks `d_w <= d_w* <= 2 d_w` on sampled pairs. The chain is reported,
/// not assumed: it is known to fail for the average-speed modular on
/// pairs closer than distance 1.
pub fn check_equivalence_claim(
    w: &Modular,
    space: &PointSpace,
    plan: &SamplingPlan,
    cfg: &BisectionConfig,
) -> Result<CheckReport> {
    plan.validate()?;
    let mut stream = plan.stream();
    let pairs: Vec<(Point, Point)> = (0..plan.n_samples).map(|_| stream.pair(space)).collect();
    check_equivalence_pairs(w, &pairs, cfg)
}

/// [`check_equivalence_claim`] on explicit pairs.
pub fn check_equivalence_pairs(w: &Modular, pairs: &[(Point, Point)], cfg: &BisectionConfig) -> Result<CheckReport> {
    w.require_convex("check_equivalence_claim")?;
    cfg.validate()?;
    let slack = cfg.metric_slack();
    sweep("equivalence_claim", pairs, |(x, y), log| {
        let dw = d_w(w, x, y, cfg)?.value;
        let dws = d_w_star(w, x, y, cfg)?.value;
        let inputs = || {
            Inputs::new()
                .point("x", x)
                .point("y", y)
                .real("d_w", dw.to_f64())
                .real("d_w_star", dws.to_f64())
        };
        log.leq("d_w <= d_w_star", dw, dws, slack, inputs);
        log.leq("d_w_star <= 2 d_w", dws, dw.scale(2.0)?, slack, inputs);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::spaces::{build_euclidean, builtin_modular, BuiltinKind};

    fn real(x: f64) -> Point {
        Point::real(x)
    }

    #[test]
    fn threshold_at_two() {
        let cfg = BisectionConfig::default();
        let inf = infimum_of_threshold(|l| l >= 2.0, &cfg);
        assert!(!inf.at_floor);
        let v = inf.value.to_f64();
        assert!(v >= 2.0 && v - 2.0 <= 1e-6, "{v}");
    }

    #[test]
    fn threshold_never_and_always() {
        let cfg = BisectionConfig::default();
        assert_eq!(infimum_of_threshold(|_| false, &cfg).value, ExtReal::INFINITY);
        let inf = infimum_of_threshold(|_| true, &cfg);
        assert!(inf.at_floor);
        assert_eq!(inf.value, ExtReal::of(1e-9));
    }

    #[test]
    fn threshold_near_upper_bracket_terminates() {
        // float spacing near 1e12 exceeds the tolerance
        let cfg = BisectionConfig::default();
        let inf = infimum_of_threshold(|l| l >= 9.9e11, &cfg);
        assert!(inf.value.to_f64() >= 9.9e11);
        assert!(inf.value.to_f64() - 9.9e11 < 1e-3);
    }

    #[test]
    fn bisection_config_validation() {
        assert!(BisectionConfig::default().validate().is_ok());
        assert!(BisectionConfig { lambda_min: 0.0, ..Default::default() }.validate().is_err());
        assert!(BisectionConfig { lambda_max: 1e-10, ..Default::default() }.validate().is_err());
        assert!(BisectionConfig::with_tol(0.0).validate().is_err());
    }

    #[test]
    fn induced_distances_average_speed() {
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::AverageSpeed);
        let cfg = BisectionConfig::default();
        let dw = d_w(&w, &real(0.0), &real(4.0), &cfg).unwrap().value.to_f64();
        assert!((dw - 2.0).abs() <= 1e-6, "{dw}");
        let dws = d_w_star(&w, &real(0.0), &real(4.0), &cfg).unwrap().value.to_f64();
        assert!((dws - 4.0).abs() <= 1e-6, "{dws}");
        let same = d_w(&w, &real(1.0), &real(1.0), &cfg).unwrap();
        assert!(same.at_floor);
        assert_eq!(same.value, ExtReal::ZERO);
        assert_eq!(d_w_star(&w, &real(1.0), &real(1.0), &cfg).unwrap().value, ExtReal::ZERO);
    }

    #[test]
    fn induced_distances_step() {
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::Step);
        let cfg = BisectionConfig::default();
        for metric in [InducedMetric::Dw, InducedMetric::DwStar] {
            let v = metric.distance(&w, &real(0.0), &real(3.0), &cfg).unwrap().value.to_f64();
            assert!((v - 3.0).abs() <= 1e-6, "{metric:?} {v}");
        }
    }

    #[test]
    fn d_w_star_rejects_nonconvex() {
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::MetricAsModular);
        assert!(matches!(
            d_w_star(&w, &real(0.0), &real(1.0), &BisectionConfig::default()),
            Err(Error::RequiresConvex { .. })
        ));
    }

    #[test]
    fn metric_as_modular_d_w_is_constant_threshold() {
        // w ≡ d, so w_λ <= λ flips at λ = d
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::MetricAsModular);
        let v = d_w(&w, &real(0.0), &real(5.0), &BisectionConfig::default()).unwrap().value.to_f64();
        assert!((v - 5.0).abs() <= 1e-6);
    }

    #[test]
    fn equivalence_claim_examples() {
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::AverageSpeed);
        let cfg = BisectionConfig::default();
        let ok = check_equivalence_pairs(&w, &[(real(0.0), real(4.0)), (real(2.0), real(2.0))], &cfg).unwrap();
        assert!(ok.passed());
        let bad = check_equivalence_pairs(&w, &[(real(0.0), real(0.25))], &cfg).unwrap();
        assert_eq!(bad.violations.len(), 1);
        let v = &bad.violations[0];
        assert_eq!(v.check, "d_w <= d_w_star");
        assert!((v.lhs.to_f64() - 0.5).abs() <= 1e-6);
        assert!((v.rhs.to_f64() - 0.25).abs() <= 1e-6);
    }

    #[test]
    fn metric_query_flags() {
        let w = builtin_modular(&build_euclidean(1).unwrap(), BuiltinKind::AverageSpeed);
        let cfg = BisectionConfig::default();
        let q = MetricQuery::run(InducedMetric::Dw, &w, &real(1.0), &real(1.0), &cfg).unwrap();
        assert_eq!(q.flags, vec!["at_floor"]);
        let json = serde_json::to_value(&q).unwrap();
        assert_eq!(json["metric"], "d_w");
        assert_eq!(json["value"], 0.0);
    }
}
