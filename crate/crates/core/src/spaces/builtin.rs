use serde::{Deserialize, Serialize};

use super::PointSpace;
use crate::extreal::ExtReal;
use crate::modular::{divide, Modular, ModularFlags};

/// The three modulars every metric space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    /// `w_λ(x, y) = d(x, y)`, independent of λ.
    MetricAsModular,
    /// `w_λ(x, y) = d(x, y) / λ`: the speed needed to cover `d` in time λ.
    AverageSpeed,
    /// `∞` when `λ < d(x, y)`, else `0`.
    Step,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 3] = [
        BuiltinKind::MetricAsModular,
        BuiltinKind::AverageSpeed,
        BuiltinKind::Step,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::MetricAsModular => "metric_as_modular",
            BuiltinKind::AverageSpeed => "average_speed",
            BuiltinKind::Step => "step",
        }
    }
}

pub fn builtin_modular(space: &PointSpace, kind: BuiltinKind) -> Modular {
    let finite_metric = space.metric_is_finite();
    let d = space.clone();
    match kind {
        BuiltinKind::MetricAsModular => Modular::new(
            kind.name(),
            space.clone(),
            ModularFlags {
                convex: false,
                strict: true,
                finite: finite_metric,
            },
            move |_, x, y| d.distance_unchecked(x, y),
        ),
        BuiltinKind::AverageSpeed => Modular::new(
            kind.name(),
            space.clone(),
            ModularFlags {
                convex: true,
                strict: true,
                finite: finite_metric,
            },
            move |lambda, x, y| divide(d.distance_unchecked(x, y), lambda),
        ),
        BuiltinKind::Step => Modular::new(
            kind.name(),
            space.clone(),
            ModularFlags {
                convex: true,
                strict: false,
                finite: false,
            },
            move |lambda, x, y| {
                if ExtReal::of(lambda) < d.distance_unchecked(x, y) {
                    ExtReal::INFINITY
                } else {
                    ExtReal::ZERO
                }
            },
        ),
    }
}
