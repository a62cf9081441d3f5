//! JSON wire format of plans, schema "v1".
//!
//! Serialization is canonical: fixed key order, four-decimal numbers,
//! optional fields omitted when absent. Parsing quantizes numbers to the same
//! precision so `parse ∘ serialize` is the identity on valid plans.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::geom::{Pose2D, Rect, Vec2};
use crate::world::ObjectId;

use super::validate::{validate_plan, Rule, ValidationErrors, Violation};
use super::{ArmHint, Plan, PlanStep, Primitive};

pub const SCHEMA_VERSION: &str = "v1";

/// Human-readable schema reference, embedded in planner prompts.
pub const SCHEMA_REFERENCE: &str = r#"Plan JSON schema v1 (units: meters, radians, newtons; numbers are decimals, 4 places significant)
{
  "schema_version": "v1",            optional; must be "v1" when present
  "plan_id": string,                 required, non-empty
  "created_at": integer >= 0,        optional, replanning cycle (default 0)
  "steps": [                         required, ids strictly increasing
    {
      "id": integer >= 0,            required
      "primitive": "pick" | "place" | "consolidate" | "wipe" | "inspect",
      "arm": "left" | "right" | "any" | "both",   default "any"; "both" only for consolidate/wipe
      "targets": ["o<n>", ...],      pick/place: exactly one; wipe: none; inspect: targets or region
      "target_pose": {"x","y","theta"},              required for place
      "region": {"x_min","y_min","x_max","y_max"},   required for wipe/consolidate
      "direction": {"x","y"},                        unit vector, required for wipe
      "gather_point": {"x","y","theta"},             required for consolidate
      "force_threshold": number > 0,                 optional
      "verify": boolean,                             default false
      "depends_on": [id, ...],                       earlier step ids only
      "comment": string                              optional, ignored
    }
  ]
}"#;

/// Rounds to the canonical four decimals (and folds -0 into 0).
pub fn quantize(x: f64) -> f64 {
    (x * 1e4).round() / 1e4 + 0.0
}

fn num(x: f64) -> String {
    format!("{:.4}", quantize(x))
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn pose_json(p: &Pose2D) -> String {
    format!("{{\"x\":{},\"y\":{},\"theta\":{}}}", num(p.x), num(p.y), num(p.theta))
}

/// Canonical JSON text of a plan.
pub fn serialize_plan(plan: &Plan) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\"schema_version\":\"{SCHEMA_VERSION}\",\"plan_id\":{},\"created_at\":{},\"steps\":[",
        json_str(&plan.plan_id),
        plan.created_at
    );
    for (i, st) in plan.steps.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"id\":{},\"primitive\":\"{}\",\"arm\":\"{}\",\"targets\":[",
            st.id,
            st.primitive.as_str(),
            st.arm.as_str()
        );
        let targets: Vec<String> = st.targets.iter().map(|t| format!("\"{t}\"")).collect();
        s.push_str(&targets.join(","));
        s.push(']');
        if let Some(p) = &st.target_pose {
            let _ = write!(s, ",\"target_pose\":{}", pose_json(p));
        }
        if let Some(r) = &st.region {
            let _ = write!(
                s,
                ",\"region\":{{\"x_min\":{},\"y_min\":{},\"x_max\":{},\"y_max\":{}}}",
                num(r.x_min),
                num(r.y_min),
                num(r.x_max),
                num(r.y_max)
            );
        }
        if let Some(d) = &st.direction {
            let _ = write!(s, ",\"direction\":{{\"x\":{},\"y\":{}}}", num(d.x), num(d.y));
        }
        if let Some(g) = &st.gather_point {
            let _ = write!(s, ",\"gather_point\":{}", pose_json(g));
        }
        if let Some(f) = st.force_threshold {
            let _ = write!(s, ",\"force_threshold\":{}", num(f));
        }
        let deps: Vec<String> = st.depends_on.iter().map(|d| d.to_string()).collect();
        let _ = write!(s, ",\"verify\":{},\"depends_on\":[{}]}}", st.verify, deps.join(","));
    }
    s.push_str("]}");
    s
}

struct Cursor<'a> {
    out: &'a mut Vec<Violation>,
    step_id: Option<u32>,
}

impl Cursor<'_> {
    fn err(&mut self, path: impl Into<String>, rule: Rule, msg: impl Into<String>) {
        self.out.push(Violation::new(self.step_id, path, rule, msg));
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(quantize(x)),
            _ => {
                self.err(path, Rule::WrongType, format!("expected a number, got {}", type_name(v)));
                None
            }
        }
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.err(path, Rule::WrongType, format!("expected an object, got {}", type_name(v)));
        }
        o
    }

    fn fields(&mut self, obj: &Map<String, Value>, path: &str, names: &[&str]) -> Option<Vec<f64>> {
        for k in obj.keys() {
            if !names.contains(&k.as_str()) {
                self.err(format!("{path}.{k}"), Rule::UnknownField, format!("unexpected field {k:?}"));
            }
        }
        let mut vals = Vec::with_capacity(names.len());
        let mut ok = true;
        for n in names {
            match obj.get(*n) {
                Some(v) => match self.number(v, &format!("{path}.{n}")) {
                    Some(x) => vals.push(x),
                    None => ok = false,
                },
                None => {
                    self.err(format!("{path}.{n}"), Rule::MissingField, format!("missing field {n:?}"));
                    ok = false;
                }
            }
        }
        ok.then_some(vals)
    }

    fn pose(&mut self, v: &Value, path: &str) -> Option<Pose2D> {
        let obj = self.object(v, path)?;
        let f = self.fields(obj, path, &["x", "y", "theta"])?;
        // theta is range-checked, not wrapped, so round trips stay exact
        Some(Pose2D { x: f[0], y: f[1], theta: f[2] })
    }

    fn id(&mut self, v: &Value, path: &str) -> Option<u32> {
        match v.as_u64() {
            Some(n) if n <= u32::MAX as u64 => Some(n as u32),
            _ => {
                self.err(path, Rule::WrongType, format!("expected a non-negative integer id, got {v}"));
                None
            }
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

const STEP_FIELDS: &[&str] = &[
    "id",
    "primitive",
    "arm",
    "targets",
    "target_pose",
    "region",
    "direction",
    "gather_point",
    "force_threshold",
    "verify",
    "depends_on",
    "comment",
];

fn parse_step(v: &Value, idx: usize, out: &mut Vec<Violation>) -> Option<PlanStep> {
    let base = format!("steps[{idx}]");
    let mut c = Cursor { out, step_id: None };
    let obj = c.object(v, &base)?;
    let id = match obj.get("id") {
        Some(v) => c.id(v, &format!("{base}.id")),
        None => {
            c.err(format!("{base}.id"), Rule::MissingField, "missing field \"id\"");
            None
        }
    };
    c.step_id = id;
    for k in obj.keys() {
        if !STEP_FIELDS.contains(&k.as_str()) {
            c.err(format!("{base}.{k}"), Rule::UnknownField, format!("unexpected field {k:?}"));
        }
    }
    let primitive = match obj.get("primitive") {
        None => {
            c.err(format!("{base}.primitive"), Rule::MissingField, "missing field \"primitive\"");
            None
        }
        Some(Value::String(s)) => {
            let p = Primitive::parse(s);
            if p.is_none() {
                c.err(
                    format!("{base}.primitive"),
                    Rule::UnknownPrimitive,
                    format!("unknown primitive {s:?}; expected pick, place, consolidate, wipe or inspect"),
                );
            }
            p
        }
        Some(other) => {
            c.err(format!("{base}.primitive"), Rule::WrongType, format!("expected a string, got {}", type_name(other)));
            None
        }
    };
    let arm = match obj.get("arm") {
        None => Some(ArmHint::Any),
        Some(Value::String(s)) => {
            let a = ArmHint::parse(s);
            if a.is_none() {
                c.err(format!("{base}.arm"), Rule::UnknownArm, format!("unknown arm {s:?}; expected left, right, any or both"));
            }
            a
        }
        Some(other) => {
            c.err(format!("{base}.arm"), Rule::WrongType, format!("expected a string, got {}", type_name(other)));
            None
        }
    };
    let mut ok = true;
    let mut targets = Vec::new();
    match obj.get("targets") {
        None => {}
        Some(Value::Array(items)) => {
            for (j, t) in items.iter().enumerate() {
                let p = format!("{base}.targets[{j}]");
                match t.as_str().map(str::parse::<ObjectId>) {
                    Some(Ok(id)) => targets.push(id),
                    Some(Err(e)) => {
                        c.err(p, Rule::BadTarget, e);
                        ok = false;
                    }
                    None => {
                        c.err(p, Rule::WrongType, format!("expected a string object id, got {}", type_name(t)));
                        ok = false;
                    }
                }
            }
        }
        Some(other) => {
            c.err(format!("{base}.targets"), Rule::WrongType, format!("expected an array, got {}", type_name(other)));
            ok = false;
        }
    }
    let mut opt = |key: &str, c: &mut Cursor, f: &mut dyn FnMut(&mut Cursor, &Value, &str) -> bool| {
        if let Some(v) = obj.get(key) {
            if !f(c, v, &format!("{base}.{key}")) {
                ok = false;
            }
        }
    };
    let mut target_pose = None;
    opt("target_pose", &mut c, &mut |c, v, p| {
        target_pose = c.pose(v, p);
        target_pose.is_some()
    });
    let mut gather_point = None;
    opt("gather_point", &mut c, &mut |c, v, p| {
        gather_point = c.pose(v, p);
        gather_point.is_some()
    });
    let mut region = None;
    opt("region", &mut c, &mut |c, v, p| {
        let Some(o) = c.object(v, p) else { return false };
        let Some(f) = c.fields(o, p, &["x_min", "y_min", "x_max", "y_max"]) else { return false };
        region = Some(Rect { x_min: f[0], y_min: f[1], x_max: f[2], y_max: f[3] });
        true
    });
    let mut direction = None;
    opt("direction", &mut c, &mut |c, v, p| {
        let Some(o) = c.object(v, p) else { return false };
        let Some(f) = c.fields(o, p, &["x", "y"]) else { return false };
        direction = Some(Vec2::new(f[0], f[1]));
        true
    });
    let mut force_threshold = None;
    opt("force_threshold", &mut c, &mut |c, v, p| {
        force_threshold = c.number(v, p);
        force_threshold.is_some()
    });
    let mut verify = false;
    opt("verify", &mut c, &mut |c, v, p| match v.as_bool() {
        Some(b) => {
            verify = b;
            true
        }
        None => {
            c.err(p, Rule::WrongType, format!("expected a boolean, got {}", type_name(v)));
            false
        }
    });
    let mut depends_on = Vec::new();
    opt("depends_on", &mut c, &mut |c, v, p| match v.as_array() {
        Some(items) => {
            let mut good = true;
            for (j, d) in items.iter().enumerate() {
                match c.id(d, &format!("{p}[{j}]")) {
                    Some(n) => depends_on.push(n),
                    None => good = false,
                }
            }
            good
        }
        None => {
            c.err(p, Rule::WrongType, format!("expected an array, got {}", type_name(v)));
            false
        }
    });
    opt("comment", &mut c, &mut |c, v, p| {
        if v.is_string() {
            true
        } else {
            c.err(p, Rule::WrongType, "comment must be a string");
            false
        }
    });
    if !ok {
        return None;
    }
    Some(PlanStep {
        id: id?,
        primitive: primitive?,
        arm: arm?,
        targets,
        target_pose,
        region,
        direction,
        gather_point,
        force_threshold,
        verify,
        depends_on,
    })
}

/// Parses and validates a plan document. Either the whole plan is valid or
/// every violation found is returned; partial plans are never produced.
pub fn parse_plan(text: &str) -> Result<Plan, ValidationErrors> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        ValidationErrors(vec![Violation::new(None, "$", Rule::MalformedJson, e.to_string())])
    })?;
    let mut out = Vec::new();
    let Some(obj) = root.as_object() else {
        out.push(Violation::new(None, "$", Rule::WrongType, format!("expected a plan object, got {}", type_name(&root))));
        return Err(ValidationErrors(out));
    };
    for k in obj.keys() {
        if !["schema_version", "plan_id", "created_at", "steps"].contains(&k.as_str()) {
            out.push(Violation::new(None, k.clone(), Rule::UnknownField, format!("unexpected field {k:?}")));
        }
    }
    match obj.get("schema_version") {
        None => {}
        Some(Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(v) => out.push(Violation::new(None, "schema_version", Rule::SchemaVersion, format!("unsupported schema version {v}"))),
    }
    let plan_id = match obj.get("plan_id") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(v) => {
            out.push(Violation::new(None, "plan_id", Rule::WrongType, format!("expected a string, got {}", type_name(v))));
            None
        }
        None => {
            out.push(Violation::new(None, "plan_id", Rule::MissingField, "missing field \"plan_id\""));
            None
        }
    };
    let created_at = match obj.get("created_at") {
        None => Some(0),
        Some(v) => {
            let mut c = Cursor { out: &mut out, step_id: None };
            c.id(v, "created_at")
        }
    };
    let mut steps = Vec::new();
    let mut steps_ok = true;
    match obj.get("steps") {
        Some(Value::Array(items)) => {
            for (i, s) in items.iter().enumerate() {
                match parse_step(s, i, &mut out) {
                    Some(step) => steps.push(step),
                    None => steps_ok = false,
                }
            }
        }
        Some(v) => {
            out.push(Violation::new(None, "steps", Rule::WrongType, format!("expected an array, got {}", type_name(v))));
            steps_ok = false;
        }
        None => {
            out.push(Violation::new(None, "steps", Rule::MissingField, "missing field \"steps\""));
            steps_ok = false;
        }
    }
    if let (Some(plan_id), Some(created_at)) = (plan_id, created_at) {
        let plan = Plan { plan_id, steps, created_at };
        if steps_ok {
            out.extend(validate_plan(&plan));
        } else {
            // semantic checks still run on the steps that did parse
            let partial: Vec<Violation> = validate_plan(&plan)
                .into_iter()
                .filter(|v| v.rule != Rule::IdOrder && v.rule != Rule::BadDependency)
                .collect();
            out.extend(partial);
        }
        if out.is_empty() {
            return Ok(plan);
        }
    }
    Err(ValidationErrors(out))
}
