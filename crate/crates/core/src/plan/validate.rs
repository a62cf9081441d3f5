use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{ArmHint, Plan, PlanStep, Primitive};

/// Name of the rule a plan document broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    MalformedJson,
    SchemaVersion,
    WrongType,
    MissingField,
    UnknownField,
    UnknownPrimitive,
    UnknownArm,
    BadTarget,
    TargetCount,
    MissingParameter,
    IllegalArm,
    BadDependency,
    IdOrder,
    BadNumber,
    BadDirection,
    BadRegion,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::MalformedJson => "malformed_json",
            Rule::SchemaVersion => "schema_version",
            Rule::WrongType => "wrong_type",
            Rule::MissingField => "missing_field",
            Rule::UnknownField => "unknown_field",
            Rule::UnknownPrimitive => "unknown_primitive",
            Rule::UnknownArm => "unknown_arm",
            Rule::BadTarget => "bad_target",
            Rule::TargetCount => "target_count",
            Rule::MissingParameter => "missing_parameter",
            Rule::IllegalArm => "illegal_arm",
            Rule::BadDependency => "bad_dependency",
            Rule::IdOrder => "id_order",
            Rule::BadNumber => "bad_number",
            Rule::BadDirection => "bad_direction",
            Rule::BadRegion => "bad_region",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step_id: Option<u32>,
    /// JSON path, e.g. `steps[2].primitive`.
    pub path: String,
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    pub fn new(step_id: Option<u32>, path: impl Into<String>, rule: Rule, message: impl Into<String>) -> Self {
        Self {
            step_id,
            path: path.into(),
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step_id {
            Some(id) => write!(f, "{} (step {}): {}: {}", self.path, id, self.rule, self.message),
            None => write!(f, "{}: {}: {}", self.path, self.rule, self.message),
        }
    }
}

/// Every violation found in a rejected document.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationErrors(pub Vec<Violation>);

impl ValidationErrors {
    pub fn rules(&self) -> BTreeSet<Rule> {
        self.0.iter().map(|v| v.rule).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.0.iter()
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[allow(clippy::approx_constant)]
pub(crate) const THETA_LIMIT: f64 = 3.1416;

fn check_step(step: &PlanStep, idx: usize, out: &mut Vec<Violation>) {
    let at = |field: &str| format!("steps[{idx}].{field}");
    let sid = Some(step.id);
    let n = step.targets.len();
    match step.primitive {
        Primitive::Pick | Primitive::Place if n != 1 => out.push(Violation::new(
            sid,
            at("targets"),
            Rule::TargetCount,
            format!("{} takes exactly one target, got {n}", step.primitive),
        )),
        Primitive::Wipe if n != 0 => out.push(Violation::new(
            sid,
            at("targets"),
            Rule::TargetCount,
            "wipe operates on a region and takes no targets",
        )),
        _ => {}
    }
    let mut need = |present: bool, field: &str| {
        if !present {
            out.push(Violation::new(
                sid,
                at(field),
                Rule::MissingParameter,
                format!("{} requires {field}", step.primitive),
            ));
        }
    };
    match step.primitive {
        Primitive::Place => need(step.target_pose.is_some(), "target_pose"),
        Primitive::Wipe => {
            need(step.region.is_some(), "region");
            need(step.direction.is_some(), "direction");
        }
        Primitive::Consolidate => {
            need(step.region.is_some(), "region");
            need(step.gather_point.is_some(), "gather_point");
        }
        Primitive::Inspect => need(step.region.is_some() || n > 0, "region"),
        Primitive::Pick => {}
    }
    if step.arm == ArmHint::Both && !step.primitive.allows_bimanual() {
        out.push(Violation::new(
            sid,
            at("arm"),
            Rule::IllegalArm,
            format!("arm \"both\" is only legal for consolidate and wipe, not {}", step.primitive),
        ));
    }
    let mut seen = BTreeSet::new();
    for t in &step.targets {
        if !seen.insert(*t) {
            out.push(Violation::new(sid, at("targets"), Rule::BadTarget, format!("duplicate target {t}")));
        }
    }
    let mut deps = BTreeSet::new();
    for (j, d) in step.depends_on.iter().enumerate() {
        if *d >= step.id {
            out.push(Violation::new(
                sid,
                format!("steps[{idx}].depends_on[{j}]"),
                Rule::BadDependency,
                format!("step {} may only depend on earlier steps, not {d}", step.id),
            ));
        }
        if !deps.insert(*d) {
            out.push(Violation::new(
                sid,
                format!("steps[{idx}].depends_on[{j}]"),
                Rule::BadDependency,
                format!("duplicate dependency {d}"),
            ));
        }
    }
    if let Some(f) = step.force_threshold {
        if !(f > 0.0 && f.is_finite()) {
            out.push(Violation::new(sid, at("force_threshold"), Rule::BadNumber, "force_threshold must be positive newtons"));
        }
    }
    if let Some(d) = step.direction {
        if (d.norm() - 1.0).abs() > 1e-3 {
            out.push(Violation::new(sid, at("direction"), Rule::BadDirection, format!("direction must be a unit vector, norm is {:.4}", d.norm())));
        }
    }
    if let Some(r) = step.region {
        if !(r.x_min < r.x_max && r.y_min < r.y_max) {
            out.push(Violation::new(sid, at("region"), Rule::BadRegion, "region needs x_min < x_max and y_min < y_max"));
        }
    }
    for (field, pose) in [("target_pose", step.target_pose), ("gather_point", step.gather_point)] {
        if let Some(p) = pose {
            if p.theta.abs() > THETA_LIMIT {
                out.push(Violation::new(sid, format!("steps[{idx}].{field}.theta"), Rule::BadNumber, "theta must lie in [-pi, pi]"));
            }
        }
    }
}

/// Semantic invariants of a typed plan; empty when the plan is valid.
pub fn validate_plan(plan: &Plan) -> Vec<Violation> {
    let mut out = Vec::new();
    if plan.plan_id.is_empty() {
        out.push(Violation::new(None, "plan_id", Rule::MissingField, "plan_id must be non-empty"));
    }
    let ids: BTreeSet<u32> = plan.steps.iter().map(|s| s.id).collect();
    let mut prev: Option<u32> = None;
    for (idx, step) in plan.steps.iter().enumerate() {
        if let Some(p) = prev {
            if step.id <= p {
                out.push(Violation::new(
                    Some(step.id),
                    format!("steps[{idx}].id"),
                    Rule::IdOrder,
                    format!("step ids must be strictly increasing ({} after {p})", step.id),
                ));
            }
        }
        prev = Some(step.id);
        check_step(step, idx, &mut out);
        for (j, d) in step.depends_on.iter().enumerate() {
            if *d < step.id && !ids.contains(d) {
                out.push(Violation::new(
                    Some(step.id),
                    format!("steps[{idx}].depends_on[{j}]"),
                    Rule::BadDependency,
                    format!("step {d} does not exist"),
                ));
            }
        }
    }
    out
}
