//! Task dispatch.

use modmetric::fixedpoint::{
    check_fund1, check_fund2, check_palais, estimate_min_k, solve, verify_contraction, verify_strong_contraction,
    verify_theorem_conditions, ContractionMode, StopReason,
};
use modmetric::induced::{check_equivalence_claim, check_equivalence_pairs, check_metric_axioms, MetricQuery};
use modmetric::sets::{check_prop2, check_prop3, is_w_cauchy, is_w_convergent, partition_star};
use modmetric::{check_property, CheckReport, SpaceKind};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ContractCheck, Prepared, Task};
use crate::report::{Entry, EntryStatus, ErrorRecord, Header, Report};

#[derive(Default)]
struct Collector {
    results: Vec<Entry>,
    errors: Vec<ErrorRecord>,
}

impl Collector {
    fn error(&mut self, name: &str, err: modmetric::Error) {
        self.errors.push(ErrorRecord {
            entry: name.to_owned(),
            message: err.to_string(),
        });
    }

    fn check(&mut self, name: &str, report: modmetric::Result<CheckReport>) {
        match report {
            Ok(r) => self.results.push(Entry {
                name: name.to_owned(),
                status: if r.passed() { EntryStatus::Pass } else { EntryStatus::Fail },
                violations: r.violations.len(),
                detail: to_value(&r),
            }),
            Err(e) => self.error(name, e),
        }
    }

    fn info<T: Serialize>(&mut self, name: &str, detail: modmetric::Result<T>) {
        self.graded(name, detail, |_| None);
    }

    /// `grade` returns `None` for informational results.
    fn graded<T: Serialize>(&mut self, name: &str, detail: modmetric::Result<T>, grade: impl Fn(&T) -> Option<bool>) {
        match detail {
            Ok(d) => {
                let status = match grade(&d) {
                    None => EntryStatus::Info,
                    Some(true) => EntryStatus::Pass,
                    Some(false) => EntryStatus::Fail,
                };
                self.results.push(Entry {
                    name: name.to_owned(),
                    status,
                    violations: 0,
                    detail: to_value(&d),
                });
            }
            Err(e) => self.error(name, e),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

/// Runs the prepared task. Errors inside individual checks become error
/// records in the report.
pub fn run(prepared: &Prepared) -> Report {
    let Prepared {
        config,
        command,
        space,
        modular: w,
        task,
    } = prepared;
    let plan = &config.plan;
    let mut out = Collector::default();
    match task {
        Task::Check { properties } => {
            for &p in properties {
                out.check(p.name(), check_property(w, space, p, plan));
            }
        }
        Task::Metric {
            metrics,
            pairs,
            axioms,
            equivalence,
            bisection,
        } => {
            for &m in metrics {
                for (i, (x, y)) in pairs.iter().enumerate() {
                    out.info(&format!("{}[{i}]", m.name()), MetricQuery::run(m, w, x, y, bisection));
                }
            }
            if *axioms {
                for &m in metrics {
                    out.check(
                        &format!("metric_axioms:{}", m.name()),
                        check_metric_axioms(m, w, space, plan, bisection),
                    );
                }
            }
            if *equivalence {
                let report = if pairs.is_empty() {
                    check_equivalence_claim(w, space, plan, bisection)
                } else {
                    check_equivalence_pairs(w, pairs, bisection)
                };
                out.check("equivalence_claim", report);
            }
        }
        Task::Partition { grid, prop2, membership } => {
            if space.kind() != SpaceKind::Euclidean {
                out.info(
                    "partition_star",
                    partition_star(w, space, grid).map(|p| json!({ "count": p.classes.len(), "classes": p.classes })),
                );
            }
            if *prop2 {
                out.check("prop2", check_prop2(w, space, plan, membership));
            }
        }
        Task::Converge {
            sequences,
            grid,
            tol,
            prop3,
            bisection,
        } => {
            for s in sequences {
                if let Some(limit) = &s.limit {
                    let expected = s.expect.and_then(|e| e.convergent);
                    out.graded(
                        &format!("convergent:{}", s.name),
                        is_w_convergent(w, &s.spec, limit, grid, *tol),
                        |v| expected.map(|want| v.converged == want),
                    );
                }
                let expected = s.expect.and_then(|e| e.cauchy);
                out.graded(
                    &format!("cauchy:{}", s.name),
                    is_w_cauchy(w, &s.spec, grid, *tol),
                    |v| expected.map(|want| v.converged == want),
                );
                if let (true, Some(limit)) = (*prop3, &s.limit) {
                    out.check(
                        &format!("prop3:{}", s.name),
                        check_prop3(w, &s.spec, limit, grid, bisection, *tol),
                    );
                }
            }
        }
        Task::Contract {
            map,
            params,
            checks,
            min_k_tol,
            grid,
        } => {
            for check in checks {
                match check {
                    ContractCheck::Contraction => out.check("contraction", verify_contraction(w, map, *params, plan)),
                    ContractCheck::StrongContraction => {
                        out.check("strong_contraction", verify_strong_contraction(w, map, *params, plan))
                    }
                    ContractCheck::Fund1 => out.check("fund1", check_fund1(w, map, *params, plan)),
                    ContractCheck::Fund2 => out.check("fund2", check_fund2(w, map, *params, plan)),
                    ContractCheck::Palais => out.check("palais", check_palais(space, map, params.k, plan)),
                    ContractCheck::MinK | ContractCheck::MinKStrong => {
                        let (name, mode) = if *check == ContractCheck::MinK {
                            ("min_k", ContractionMode::Plain)
                        } else {
                            ("min_k_strong", ContractionMode::Strong)
                        };
                        out.info(
                            name,
                            estimate_min_k(w, map, params.lambda0, mode, plan, *min_k_tol)
                                .map(|k| json!({ "mode": mode, "k": k, "tol": min_k_tol })),
                        );
                    }
                    ContractCheck::Conditions => match verify_theorem_conditions(w, map, grid, plan) {
                        Ok(c) => out.results.push(Entry {
                            name: "theorem_conditions".into(),
                            status: if c.report.passed() { EntryStatus::Pass } else { EntryStatus::Fail },
                            violations: c.report.violations.len(),
                            detail: to_value(&c),
                        }),
                        Err(e) => out.error("theorem_conditions", e),
                    },
                }
            }
        }
        Task::Fixpoint {
            map,
            x0,
            lambda,
            tol,
            max_iter,
        } => {
            out.graded("fixpoint", solve(w, map, x0, *lambda, *tol, *max_iter), |s| {
                Some(s.stop_reason == StopReason::ResidualMet)
            });
        }
    }
    Report::new(Header::new(command.name(), config.clone()), out.results, out.errors)
}
