#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use vesseleval::{labels, BinaryMask, Instance, InstanceKind, SceneAnnotation};

pub const VESSEL_CLASSES: &[&str] = &["tube", "jar", "cup", "bottle", "flask", "syringe"];
pub const MATERIAL_CLASSES: &[&[&str]] = &[
    &["filled", "liquid"],
    &["filled", "liquid", "blood"],
    &["filled", "foam"],
    &["filled", "solid"],
    &["filled", "solid", "powder"],
    &["filled", "suspension"],
];

/// Valid scene with vessels side by side and materials stacked inside them.
pub fn random_scene<R: Rng>(rng: &mut R) -> SceneAnnotation {
    let width = rng.gen_range(8..48u32);
    let height = rng.gen_range(8..48u32);
    let mut scene = SceneAnnotation::new(width, height);
    let vessels = rng.gen_range(0..=(width / 8).min(4));
    let strip = width.checked_div(vessels).unwrap_or(0);
    for v in 0..vessels {
        let id = format!("v{v}");
        let x0 = v * strip;
        let mask = BinaryMask::rect(width, height, x0, 0, x0 + strip.max(1), height).unwrap();
        let class = VESSEL_CLASSES.choose(rng).unwrap();
        let mut vessel = Instance::new(id.clone(), InstanceKind::Vessel, mask, labels(["vessel", class]));
        if rng.gen_bool(0.5) {
            vessel = vessel.with_properties(labels(["transparent"]));
        }
        scene.push(vessel);

        let layers = rng.gen_range(0..=3u32);
        let mut y = height;
        for m in 0..layers {
            let depth = rng.gen_range(1..=(height / 4).max(1));
            if depth > y {
                break;
            }
            let mid = format!("v{v}m{m}");
            let mask = BinaryMask::rect(width, height, x0, y - depth, x0 + strip, y).unwrap();
            y -= depth;
            let classes = MATERIAL_CLASSES.choose(rng).unwrap();
            let mut mat = Instance::new(mid.clone(), InstanceKind::Material, mask, labels(classes.iter().copied()));
            if rng.gen_bool(0.3) {
                mat = mat.with_properties(labels(["scattered"]));
            }
            scene.push(mat);
            scene.place_inside(&mid, &id);
        }
        if v > 0 && rng.gen_bool(0.4) {
            scene.link(&format!("v{}", v - 1), &id);
        }
    }
    if rng.gen_bool(0.2) {
        scene.source = Some(format!("img_{}.jpg", rng.gen_range(0..1000)));
    }
    scene.canonicalize();
    scene
}

/// Random mask of the given size with density in (0, 1).
pub fn random_mask<R: Rng>(rng: &mut R, width: u32, height: u32) -> BinaryMask {
    let density: f64 = rng.gen_range(0.05..0.95);
    let bits: Vec<bool> = (0..width * height).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::encode(&bits, width, height).unwrap()
}

/// Copy of `gt` with some instances dropped, some masks replaced by noise and
/// some material classes swapped. Relations of dropped instances go too.
pub fn perturb<R: Rng>(rng: &mut R, gt: &SceneAnnotation) -> SceneAnnotation {
    let mut pred = gt.clone();
    let mut dropped = Vec::new();
    pred.instances.retain(|i| {
        let keep = rng.gen_bool(0.8);
        if !keep {
            dropped.push(i.id.clone());
        }
        keep
    });
    pred.relations
        .retain(|r| !dropped.contains(&r.subject) && !dropped.contains(&r.object));
    for inst in &mut pred.instances {
        if rng.gen_bool(0.15) {
            inst.mask = random_mask(rng, gt.width, gt.height);
        }
        if inst.kind == InstanceKind::Material && rng.gen_bool(0.2) {
            inst.classes = labels(MATERIAL_CLASSES.choose(rng).unwrap().iter().copied());
        }
    }
    pred
}
