mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vesseleval::{
    direct_content_of, labels, parse_scene, serialize_scene, validate_scene, BinaryMask, Instance, InstanceKind,
    ParseError, SceneAnnotation,
};

#[test]
fn round_trip_random_scenes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let scene = common::random_scene(&mut rng);
        assert_eq!(validate_scene(&scene), vec![]);
        let bytes = serialize_scene(&scene);
        let back = parse_scene(&bytes).unwrap();
        assert_eq!(back, scene);
        assert_eq!(serialize_scene(&back), bytes);
    }
}

#[test]
fn instance_order_does_not_change_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scene = common::random_scene(&mut rng);
    let mut shuffled = scene.clone();
    shuffled.instances.reverse();
    shuffled.relations.reverse();
    assert_eq!(serialize_scene(&shuffled), serialize_scene(&scene));
}

fn required_field_paths(doc: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match doc {
        Value::Object(map) => {
            for (k, v) in map {
                path.push(k.clone());
                // optional keys: the image file name and the free-standing flag
                if k != "file" && k != "free_standing" {
                    out.push(path.clone());
                }
                required_field_paths(v, path, out);
                path.pop();
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                path.push(i.to_string());
                required_field_paths(v, path, out);
                path.pop();
            }
        }
        _ => {}
    }
}

fn parent_mut<'a>(doc: &'a mut Value, path: &[String]) -> &'a mut Value {
    let mut cur = doc;
    for p in &path[..path.len() - 1] {
        cur = match cur {
            Value::Object(m) => m.get_mut(p).unwrap(),
            Value::Array(a) => &mut a[p.parse::<usize>().unwrap()],
            _ => unreachable!(),
        };
    }
    cur
}

fn corrupt(v: &Value) -> Value {
    match v {
        Value::String(_) => Value::from(17),
        Value::Number(_) => Value::from("17"),
        Value::Array(_) => Value::from(true),
        Value::Object(_) => Value::from("object"),
        Value::Bool(_) => Value::Null,
        Value::Null => Value::from(0),
    }
}

#[test]
fn single_field_mutations_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for _ in 0..40 {
        let scene = common::random_scene(&mut rng);
        let doc: Value = serde_json::from_slice(&serialize_scene(&scene)).unwrap();
        let mut paths = Vec::new();
        required_field_paths(&doc, &mut Vec::new(), &mut paths);
        for path in paths {
            let key = path.last().unwrap().clone();

            let mut deleted = doc.clone();
            parent_mut(&mut deleted, &path).as_object_mut().unwrap().remove(&key);
            let bytes = serde_json::to_vec(&deleted).unwrap();
            assert!(parse_scene(&bytes).is_err(), "deleting {path:?} was accepted");

            let mut typed = doc.clone();
            let slot = parent_mut(&mut typed, &path).as_object_mut().unwrap().get_mut(&key).unwrap();
            *slot = corrupt(slot);
            let bytes = serde_json::to_vec(&typed).unwrap();
            assert!(parse_scene(&bytes).is_err(), "corrupting {path:?} was accepted");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn error_categories() {
    assert!(matches!(parse_scene(b"{\"image\": "), Err(ParseError::Syntax { line: 1, .. })));
    let unknown = br#"{"image":{"height":2,"width":2},"instances":[],"relations":[],"version":"1.0","extra":1}"#;
    assert!(matches!(parse_scene(unknown), Err(ParseError::Schema(_))));
    let minimal = br#"{"image":{"height":2,"width":2},"instances":[],"relations":[],"version":"1.0"}"#;
    assert_eq!(parse_scene(minimal).unwrap(), SceneAnnotation::new(2, 2));
}

fn nested_scene() -> SceneAnnotation {
    let r = |x0, y0, x1, y1| BinaryMask::rect(30, 30, x0, y0, x1, y1).unwrap();
    let mut s = SceneAnnotation::new(30, 30);
    s.push(Instance::new("tube", InstanceKind::Vessel, r(0, 0, 20, 30), labels(["vessel", "tube"])))
        .push(Instance::new("pipette", InstanceKind::Vessel, r(8, 0, 12, 25), labels(["vessel", "pipette"])))
        .push(Instance::new("blood", InstanceKind::Material, r(8, 15, 12, 25), labels(["filled", "liquid", "blood"])))
        .push(Instance::new("water", InstanceKind::Material, r(0, 20, 8, 30), labels(["filled", "liquid"])))
        .place_inside("pipette", "tube")
        .place_inside("blood", "pipette")
        .place_inside("blood", "tube")
        .place_inside("water", "tube");
    s
}

#[test]
fn nested_content_partitions_materials() {
    let s = nested_scene();
    assert_eq!(validate_scene(&s), vec![]);
    let tube = direct_content_of(&s, "tube").unwrap();
    let pipette = direct_content_of(&s, "pipette").unwrap();
    assert_eq!(tube, ["pipette", "water"].map(String::from).into());
    assert_eq!(pipette, ["blood"].map(String::from).into());
    for m in ["blood", "water"] {
        let holders = s.vessels().filter(|v| direct_content_of(&s, &v.id).unwrap().contains(m)).count();
        assert_eq!(holders, 1, "{m}");
    }
}

#[test]
fn random_scenes_partition_materials() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let s = common::random_scene(&mut rng);
        for m in s.instances.iter().filter(|i| i.kind == InstanceKind::Material) {
            let holders = s
                .vessels()
                .filter(|v| direct_content_of(&s, &v.id).unwrap().contains(&m.id))
                .count();
            assert_eq!(holders, 1);
        }
    }
}
