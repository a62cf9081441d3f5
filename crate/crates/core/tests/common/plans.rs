#![allow(clippy::approx_constant)]

use std::collections::BTreeSet;
use std::path::Path;

use deskclean::geom::{Pose2D, Rect, Vec2};
use deskclean::plan::{parse_plan, serialize_plan, validate_plan, ArmHint, Plan, PlanStep, Primitive, Rule};
use deskclean::world::ObjectId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const ALL_RULES: [Rule; 16] = [
    Rule::MalformedJson,
    Rule::SchemaVersion,
    Rule::WrongType,
    Rule::MissingField,
    Rule::UnknownField,
    Rule::UnknownPrimitive,
    Rule::UnknownArm,
    Rule::BadTarget,
    Rule::TargetCount,
    Rule::MissingParameter,
    Rule::IllegalArm,
    Rule::BadDependency,
    Rule::IdOrder,
    Rule::BadNumber,
    Rule::BadDirection,
    Rule::BadRegion,
];

/// A value already on the four-decimal grid.
fn grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let k = rng.random_range((lo * 1e4).ceil() as i64..=(hi * 1e4).floor() as i64);
    k as f64 / 1e4
}

fn pose(rng: &mut ChaCha8Rng) -> Pose2D {
    Pose2D {
        x: grid(rng, 0.0, 0.9),
        y: grid(rng, 0.0, 0.6),
        theta: grid(rng, -3.1416, 3.1416),
    }
}

fn region(rng: &mut ChaCha8Rng) -> Rect {
    let x = rng.random_range(0..8000i64);
    let y = rng.random_range(0..5000i64);
    let w = rng.random_range(1..3000i64);
    let h = rng.random_range(1..3000i64);
    Rect {
        x_min: x as f64 / 1e4,
        y_min: y as f64 / 1e4,
        x_max: (x + w) as f64 / 1e4,
        y_max: (y + h) as f64 / 1e4,
    }
}

pub fn random_valid_plan(rng: &mut ChaCha8Rng) -> Plan {
    let n = rng.random_range(0..12);
    let mut steps = Vec::new();
    let mut id = rng.random_range(0..3);
    for _ in 0..n {
        let primitive = Primitive::ALL[rng.random_range(0..5)];
        let obj = |rng: &mut ChaCha8Rng| ObjectId(rng.random_range(0..40));
        let mut s = match primitive {
            Primitive::Pick => PlanStep::pick(id, obj(rng)),
            Primitive::Place => PlanStep::place(id, obj(rng), pose(rng)),
            Primitive::Wipe => {
                let a: f64 = rng.random_range(-3.14..3.14);
                let d = Vec2::new((a.cos() * 1e4).round() / 1e4, (a.sin() * 1e4).round() / 1e4);
                PlanStep::wipe(id, region(rng), d)
            }
            Primitive::Consolidate => {
                let mut s = PlanStep::consolidate(id, region(rng), pose(rng));
                if rng.random_bool(0.3) {
                    s.targets = vec![obj(rng)];
                }
                s
            }
            Primitive::Inspect => {
                if rng.random_bool(0.5) {
                    let mut t: Vec<ObjectId> = (0..rng.random_range(1..4)).map(|_| obj(rng)).collect();
                    t.sort();
                    t.dedup();
                    PlanStep::inspect_objects(id, t)
                } else {
                    PlanStep::inspect_region(id, region(rng))
                }
            }
        };
        let hints: &[ArmHint] = if primitive.allows_bimanual() { &ArmHint::ALL } else { &ArmHint::ALL[..3] };
        s.arm = hints[rng.random_range(0..hints.len())];
        s.verify = rng.random_bool(0.5);
        if rng.random_bool(0.3) {
            s.force_threshold = Some(grid(rng, 0.0001, 50.0));
        }
        let earlier: Vec<u32> = steps.iter().map(|p: &PlanStep| p.id).collect();
        for e in earlier {
            if rng.random_bool(0.2) {
                s.depends_on.push(e);
            }
        }
        steps.push(s);
        id += rng.random_range(1..4);
    }
    Plan {
        plan_id: format!("plan-{}", rng.random_range(0..1000)),
        steps,
        created_at: rng.random_range(0..20),
    }
}

fn steps_mut(doc: &mut Value) -> &mut Vec<Value> {
    doc["steps"].as_array_mut().unwrap()
}

fn step_with(doc: &Value, rng: &mut ChaCha8Rng, pred: impl Fn(&Value) -> bool) -> Option<usize> {
    let idx: Vec<usize> = doc["steps"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(_, s)| pred(s))
        .map(|(i, _)| i)
        .collect();
    (!idx.is_empty()).then(|| idx[rng.random_range(0..idx.len())])
}

fn prim(s: &Value) -> &str {
    s["primitive"].as_str().unwrap()
}

/// Applies mutation `kind` to a serialized valid plan. Returns the mutated
/// document and the rule it breaks, or `None` for an invariant-preserving
/// edit; `Err` when the plan has nothing the mutation can act on.
fn mutate(text: &str, kind: usize, rng: &mut ChaCha8Rng) -> Result<(String, Option<Rule>), ()> {
    let mut doc: Value = serde_json::from_str(text).unwrap();
    let any_step = |doc: &Value, rng: &mut ChaCha8Rng| step_with(doc, rng, |_| true).ok_or(());
    let rule = match kind {
        0 => return Ok((text[..rng.random_range(0..text.len())].to_string(), Some(Rule::MalformedJson))),
        1 => {
            doc["schema_version"] = json!("v2");
            Some(Rule::SchemaVersion)
        }
        2 => {
            doc["plan_id"] = json!(17);
            Some(Rule::WrongType)
        }
        3 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["verify"] = json!("yes");
            Some(Rule::WrongType)
        }
        4 => {
            doc.as_object_mut().unwrap().remove(["plan_id", "steps"][rng.random_range(0..2)]);
            Some(Rule::MissingField)
        }
        5 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i].as_object_mut().unwrap().remove(["id", "primitive"][rng.random_range(0..2)]);
            Some(Rule::MissingField)
        }
        6 => {
            doc["plan_id"] = json!("");
            Some(Rule::MissingField)
        }
        7 => {
            doc["priority"] = json!(1);
            Some(Rule::UnknownField)
        }
        8 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["speed"] = json!(0.5);
            Some(Rule::UnknownField)
        }
        9 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["primitive"] = json!(["grab", "push", "Pick", ""][rng.random_range(0..4)]);
            Some(Rule::UnknownPrimitive)
        }
        10 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["arm"] = json!(["middle", "LEFT", "none"][rng.random_range(0..3)]);
            Some(Rule::UnknownArm)
        }
        11 => {
            let i = step_with(&doc, rng, |s| !s["targets"].as_array().unwrap().is_empty()).ok_or(())?;
            steps_mut(&mut doc)[i]["targets"][0] = json!(["x3", "o", "o-1", "3"][rng.random_range(0..4)]);
            Some(Rule::BadTarget)
        }
        12 => {
            let i = step_with(&doc, rng, |s| prim(s) == "inspect" && !s["targets"].as_array().unwrap().is_empty())
                .ok_or(())?;
            let t = steps_mut(&mut doc)[i]["targets"][0].clone();
            steps_mut(&mut doc)[i]["targets"].as_array_mut().unwrap().push(t);
            Some(Rule::BadTarget)
        }
        13 => {
            let i = step_with(&doc, rng, |s| matches!(prim(s), "pick" | "place" | "wipe")).ok_or(())?;
            steps_mut(&mut doc)[i]["targets"].as_array_mut().unwrap().push(json!("o999"));
            Some(Rule::TargetCount)
        }
        14 => {
            let i = step_with(&doc, rng, |s| matches!(prim(s), "pick" | "place")).ok_or(())?;
            steps_mut(&mut doc)[i]["targets"] = json!([]);
            Some(Rule::TargetCount)
        }
        15 => {
            let i = step_with(&doc, rng, |s| matches!(prim(s), "place" | "wipe" | "consolidate")).ok_or(())?;
            let s = &mut steps_mut(&mut doc)[i];
            let field = match prim(s) {
                "place" => "target_pose",
                "wipe" => ["region", "direction"][rng.random_range(0..2)],
                _ => ["region", "gather_point"][rng.random_range(0..2)],
            };
            s.as_object_mut().unwrap().remove(field);
            Some(Rule::MissingParameter)
        }
        16 => {
            let i = step_with(&doc, rng, |s| matches!(prim(s), "pick" | "place" | "inspect")).ok_or(())?;
            steps_mut(&mut doc)[i]["arm"] = json!("both");
            Some(Rule::IllegalArm)
        }
        17 => {
            let i = any_step(&doc, rng)?;
            let s = &mut steps_mut(&mut doc)[i];
            let own = s["id"].as_u64().unwrap();
            s["depends_on"].as_array_mut().unwrap().push(json!(own + rng.random_range(0..3)));
            Some(Rule::BadDependency)
        }
        18 => {
            let i = step_with(&doc, rng, |s| !s["depends_on"].as_array().unwrap().is_empty()).ok_or(())?;
            let d = steps_mut(&mut doc)[i]["depends_on"][0].clone();
            steps_mut(&mut doc)[i]["depends_on"].as_array_mut().unwrap().push(d);
            Some(Rule::BadDependency)
        }
        19 => {
            let i = step_with(&doc, rng, |s| s["id"].as_u64().unwrap() > 0).ok_or(())?;
            let s = &mut steps_mut(&mut doc)[i];
            let own = s["id"].as_u64().unwrap();
            let ids: Vec<u64> = doc["steps"].as_array().unwrap().iter().map(|s| s["id"].as_u64().unwrap()).collect();
            let Some(missing) = (0..own).find(|k| !ids.contains(k)) else { return Err(()) };
            steps_mut(&mut doc)[i]["depends_on"].as_array_mut().unwrap().push(json!(missing));
            Some(Rule::BadDependency)
        }
        20 => {
            let n = doc["steps"].as_array().unwrap().len();
            if n < 2 {
                return Err(());
            }
            let i = rng.random_range(1..n);
            let prev = steps_mut(&mut doc)[i - 1]["id"].clone();
            steps_mut(&mut doc)[i]["id"] = prev;
            Some(Rule::IdOrder)
        }
        21 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["force_threshold"] = json!([0.0, -1.5, -100.0][rng.random_range(0..3)]);
            Some(Rule::BadNumber)
        }
        22 => {
            let i = step_with(&doc, rng, |s| matches!(prim(s), "place" | "consolidate")).ok_or(())?;
            let key = if prim(&doc["steps"][i]) == "place" { "target_pose" } else { "gather_point" };
            steps_mut(&mut doc)[i][key]["theta"] = json!([3.2, -4.0, 7.0][rng.random_range(0..3)]);
            Some(Rule::BadNumber)
        }
        23 => {
            let i = step_with(&doc, rng, |s| prim(s) == "wipe").ok_or(())?;
            let k = [0.5, 2.0, 0.0][rng.random_range(0..3)];
            let d = &mut steps_mut(&mut doc)[i]["direction"];
            d["x"] = json!(d["x"].as_f64().unwrap() * k);
            d["y"] = json!(d["y"].as_f64().unwrap() * k);
            Some(Rule::BadDirection)
        }
        24 => {
            let i = step_with(&doc, rng, |s| s.get("region").is_some()).ok_or(())?;
            let r = &mut steps_mut(&mut doc)[i]["region"];
            let (lo, hi) = if rng.random_bool(0.5) { ("x_min", "x_max") } else { ("y_min", "y_max") };
            let (a, b) = (r[lo].clone(), r[hi].clone());
            r[lo] = b.clone();
            r[hi] = if rng.random_bool(0.5) { a } else { b };
            Some(Rule::BadRegion)
        }
        25 => {
            let i = step_with(&doc, rng, |s| s.get("region").is_some()).ok_or(())?;
            steps_mut(&mut doc)[i]["region"]["x_min"] = json!("0.1");
            Some(Rule::WrongType)
        }
        // Invariant-preserving edits.
        26 => {
            let i = any_step(&doc, rng)?;
            steps_mut(&mut doc)[i]["comment"] = json!("because");
            None
        }
        27 => {
            doc.as_object_mut().unwrap().remove("schema_version");
            None
        }
        28 => {
            let i = step_with(&doc, rng, |s| s["arm"] == "any" && s["verify"] == false).ok_or(())?;
            let s = steps_mut(&mut doc)[i].as_object_mut().unwrap();
            s.remove("arm");
            s.remove("verify");
            s.remove("depends_on");
            None
        }
        29 => {
            let i = step_with(&doc, rng, |s| s.get("target_pose").is_some()).ok_or(())?;
            let p = &mut steps_mut(&mut doc)[i]["target_pose"];
            p["x"] = json!(p["x"].as_f64().unwrap() + rng.random_range(-0.001..0.001));
            None
        }
        _ => unreachable!(),
    };
    Ok((doc.to_string(), rule))
}

const MUTATIONS: usize = 30;

pub fn check_round_trip(seed: u64) -> Result<(), String> {
    let plan = random_valid_plan(&mut ChaCha8Rng::seed_from_u64(seed));
    let v = validate_plan(&plan);
    if !v.is_empty() {
        return Err(format!("generator produced an invalid plan: {v:?}"));
    }
    let text = serialize_plan(&plan);
    let back = parse_plan(&text).map_err(|e| e.to_string())?;
    if back != plan {
        return Err(format!("parse(serialize(p)) != p for\n{text}"));
    }
    if serialize_plan(&back) != text {
        return Err(format!("serialization not stable for\n{text}"));
    }
    Ok(())
}

pub struct Corpus {
    pub rejected: usize,
    pub accepted: usize,
    pub rules_hit: BTreeSet<Rule>,
}

/// Mutates `total` serialized valid plans. Rule-breaking mutations must be
/// rejected with that rule; benign ones must parse and stay canonical.
pub fn mutation_corpus(total: usize, seed: u64) -> Result<Corpus, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus {
        rejected: 0,
        accepted: 0,
        rules_hit: BTreeSet::new(),
    };
    while corpus.rejected + corpus.accepted < total {
        let plan = random_valid_plan(&mut rng);
        let text = serialize_plan(&plan);
        let kind = rng.random_range(0..MUTATIONS);
        let Ok((doc, rule)) = mutate(&text, kind, &mut rng) else { continue };
        match (parse_plan(&doc), rule) {
            (Err(e), Some(rule)) => {
                if !e.rules().contains(&rule) {
                    return Err(format!("mutation {kind} expected {rule:?}, got {e}\n{doc}"));
                }
                corpus.rules_hit.insert(rule);
                corpus.rejected += 1;
            }
            (Ok(p), None) => {
                let canon = serialize_plan(&p);
                let again = parse_plan(&canon).map_err(|e| e.to_string())?;
                if again != p || serialize_plan(&again) != canon {
                    return Err(format!("accepted document not canonical after a round trip:\n{doc}"));
                }
                corpus.accepted += 1;
            }
            (Ok(_), Some(rule)) => return Err(format!("mutation {kind} breaking {rule:?} was accepted:\n{doc}")),
            (Err(e), None) => return Err(format!("benign mutation {kind} rejected: {e}\n{doc}")),
        }
    }
    Ok(corpus)
}

pub fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/plans"))
}

/// Every `invalid_<rule>.json` fixture breaks exactly `<rule>`, every other
/// fixture is valid, and each rule has a fixture.
pub fn check_fixtures() -> Result<usize, String> {
    let mut covered = BTreeSet::new();
    let mut n = 0;
    for entry in std::fs::read_dir(fixture_dir()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        n += 1;
        if let Some(rule_name) = name.strip_prefix("invalid_") {
            let e = match parse_plan(&text) {
                Ok(_) => return Err(format!("{name} was accepted")),
                Err(e) => e,
            };
            let rules: Vec<&str> = e.rules().into_iter().map(Rule::as_str).collect();
            if rules != [rule_name] {
                return Err(format!("{name}: {e}"));
            }
            covered.insert(rule_name.to_string());
        } else {
            let p = parse_plan(&text).map_err(|e| format!("{name}: {e}"))?;
            if parse_plan(&serialize_plan(&p)).ok() != Some(p) {
                return Err(format!("{name} does not round-trip"));
            }
        }
    }
    let all: BTreeSet<String> = ALL_RULES.iter().map(|r| r.as_str().to_string()).collect();
    if covered != all {
        return Err(format!("rules without a fixture: {:?}", all.difference(&covered).collect::<Vec<_>>()));
    }
    Ok(n)
}
