use std::fmt::Write as _;

use crate::plan::{serialize_plan, SCHEMA_REFERENCE};
use crate::world::StepOutcome;

use super::{MemoryEntry, ReflectionContext};

/// Default task statement shared by every planner.
pub const TASK_SPEC: &str = "Clean the desk with one or two robot arms. \
(1) Move every rigid and fragile object into the tray zone. \
(2) Sweep all loose debris into the collection zone. \
(3) Do not damage any fragile object. \
Plans are sequences of the primitives pick, place, consolidate, wipe and inspect.";

fn outcome_line(o: &StepOutcome) -> String {
    let kind = o.failure_kind.map_or("-", |k| k.as_str());
    format!(
        "step={} status={} kind={} err={:.4} dur={:.4}",
        o.step_id,
        o.status.as_str(),
        kind,
        o.measured_pose_error,
        o.duration
    )
}

fn history_block(out: &mut String, e: &MemoryEntry) {
    let _ = writeln!(out, "--- cycle {} plan {} ---", e.cycle, e.plan.plan_id);
    let _ = writeln!(out, "plan: {}", serialize_plan(&e.plan));
    let _ = writeln!(out, "outcomes:");
    for o in &e.outcomes {
        let _ = writeln!(out, "  {}", outcome_line(o));
    }
    match e.failure {
        Some((kind, step)) => {
            let _ = writeln!(out, "failure: {kind} at step {step}");
        }
        None => {
            let _ = writeln!(out, "failure: none");
        }
    }
    let _ = writeln!(out, "scene:");
    for line in e.scene_digest.lines() {
        let _ = writeln!(out, "  {line}");
    }
}

fn section(out: &mut String, name: &str) {
    let _ = writeln!(out, "## {name}");
}

/// Initial-planning prompt: task, scene and schema only.
pub fn build_initial_prompt(task_spec: &str, scene_text: &str) -> String {
    let mut out = String::new();
    section(&mut out, "TASK");
    let _ = writeln!(out, "{task_spec}");
    section(&mut out, "CURRENT SCENE");
    out.push_str(scene_text);
    section(&mut out, "OUTPUT SCHEMA");
    let _ = writeln!(out, "{SCHEMA_REFERENCE}");
    let _ = writeln!(out, "Respond with a single JSON plan document.");
    out
}

/// Reflection prompt with fixed sections in fixed order.
pub fn build_prompt(ctx: &ReflectionContext) -> String {
    let mut out = String::new();
    section(&mut out, "TASK");
    let _ = writeln!(out, "{}", ctx.task_spec);

    section(&mut out, "CURRENT SCENE");
    out.push_str(&ctx.scene_text);

    section(&mut out, "HISTORY");
    for e in ctx.memory.iter() {
        history_block(&mut out, e);
    }

    section(&mut out, "FAILURE");
    let f = &ctx.failure;
    let _ = writeln!(out, "kind: {}", f.kind);
    let _ = writeln!(out, "step: {}", serialize_step(&f.step));
    let _ = writeln!(out, "measured: {}", outcome_line(&f.outcome));
    if let Some(force) = f.outcome.peak_force {
        let _ = writeln!(out, "peak_force: {force:.2} N");
    }

    section(&mut out, "REMAINING GOALS");
    let r = &ctx.remaining;
    let ids = |v: &[crate::world::ObjectId]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "valuables: {}", ids(&r.valuables));
    let clusters: Vec<String> = r.debris_clusters.iter().map(|i| format!("d{}", i + 1)).collect();
    let _ = writeln!(out, "debris: {}", clusters.join(" "));
    let failed: Vec<String> = r.failed_steps.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(out, "failed_steps: {}", failed.join(" "));
    let abandoned: Vec<crate::world::ObjectId> = ctx.abandoned.iter().copied().collect();
    let _ = writeln!(out, "abandoned: {}", ids(&abandoned));

    section(&mut out, "OUTPUT SCHEMA");
    let _ = writeln!(out, "{SCHEMA_REFERENCE}");
    let _ = writeln!(out, "Respond with a single JSON plan document covering only the remaining goals.");
    out
}

fn serialize_step(step: &crate::plan::PlanStep) -> String {
    let one = crate::plan::Plan {
        plan_id: "failed".into(),
        steps: vec![step.clone()],
        created_at: 0,
    };
    let text = serialize_plan(&one);
    // strip the envelope, keep the step object
    let start = text.find("\"steps\":[").map(|i| i + 9).unwrap_or(0);
    text[start..text.len().saturating_sub(2)].to_string()
}
