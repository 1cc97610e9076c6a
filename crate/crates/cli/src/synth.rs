//! Synthetic scenes with planned prediction errors and the panoptic
//! counters those errors must produce.
//!
//! Vessels sit in distinct cells of a grid, so they never overlap; their
//! content is stacked inside them and kept small enough that no content
//! segment can reach IOU 1/2 with its vessel. Every predicted segment keeps
//! the id of the ground-truth segment it was derived from, and a scene is
//! redrawn if any prediction would exceed IOU 1/2 with a segment other than
//! its own source. Under that condition greedy matching pairs exactly the
//! known correspondences, so the expected counters follow from the
//! perturbations alone.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vesseleval::metrics::{AgnosticCounters, ClassCounts, PanopticCounters};
use vesseleval::{labels, BinaryMask, Instance, InstanceKind, LabelSet, SceneAnnotation};

use crate::dataset::{write_bytes, write_scene};
use crate::CliError;

const VESSEL_CLASSES: &[&str] = &[
    "tube", "iv_bag", "iv_bottle", "drip_chamber", "bottle", "syringe", "beaker", "bowl", "cup", "plate",
    "flask", "jar",
];
const MATERIAL_CLASSES: &[&[&str]] = &[
    &["filled", "liquid"],
    &["filled", "liquid", "blood"],
    &["filled", "liquid", "urine"],
    &["filled", "suspension"],
    &["filled", "solid"],
    &["filled", "solid", "powder"],
    &["filled", "solid", "granular"],
    &["filled", "foam"],
    &["filled", "gel"],
];
const PART_CLASSES: &[&str] = &["label", "cork", "spike"];
const VESSEL_PROPERTIES: &[&str] = &["transparent", "semi_transparent", "opaque"];
const MATERIAL_PROPERTIES: &[&str] = &["scattered", "on_surface"];

/// Smallest grid cell a vessel is drawn in.
const MIN_CELL: u32 = 12;
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Perturbation {
    /// Chance that a ground-truth segment is missing from the prediction.
    pub drop: f64,
    /// Chance, per vessel, of one extra predicted segment in empty space.
    pub spurious: f64,
    /// Chance that a kept segment's classes are replaced.
    pub class_flip: f64,
    /// Chance that a kept segment is eroded or dilated.
    pub resize: f64,
    /// Largest erosion or dilation radius in pixels.
    pub max_radius: u32,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            drop: 0.0,
            spurious: 0.0,
            class_flip: 0.0,
            resize: 0.0,
            max_radius: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticPlan {
    pub scenes: usize,
    pub width: u32,
    pub height: u32,
    /// Inclusive range of vessels per scene.
    pub vessels: [usize; 2],
    /// Inclusive range of material layers per vessel.
    pub materials: [usize; 2],
    /// Chance that a vessel carries a part (label, cork or spike).
    pub parts: f64,
    /// Chance that a vessel holds a pipette with blood in it.
    pub nested: f64,
    /// Chance that two neighbouring vessels are linked.
    pub links: f64,
    pub perturbation: Perturbation,
    /// Let spurious segments land anywhere, including on top of ground
    /// truth. The expected counters are then no longer guaranteed.
    pub overlap: bool,
    pub seed: u64,
}

impl Default for SyntheticPlan {
    fn default() -> Self {
        Self {
            scenes: 10,
            width: 256,
            height: 256,
            vessels: [1, 4],
            materials: [0, 3],
            parts: 0.3,
            nested: 0.0,
            links: 0.3,
            perturbation: Perturbation::default(),
            overlap: false,
            seed: 0,
        }
    }
}

impl SyntheticPlan {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Invalid(format!("invalid plan: {msg}")));
        let p = &self.perturbation;
        for (name, v) in [
            ("parts", self.parts),
            ("nested", self.nested),
            ("links", self.links),
            ("perturbation.drop", p.drop),
            ("perturbation.spurious", p.spurious),
            ("perturbation.class_flip", p.class_flip),
            ("perturbation.resize", p.resize),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is not a probability"));
            }
        }
        if self.width == 0 || self.height == 0 {
            return bad("image dimensions must be positive".into());
        }
        if self.vessels[0] > self.vessels[1] || self.materials[0] > self.materials[1] {
            return bad("count ranges must have min <= max".into());
        }
        if self.vessels[1] > 0 {
            let (cols, rows) = grid(self.vessels[1]);
            let margin = p.max_radius + 1;
            if self.width / cols < MIN_CELL + 2 * margin || self.height / rows < MIN_CELL + 2 * margin {
                return bad(format!(
                    "{}x{} is too small for {} vessels with radius {}",
                    self.width, self.height, self.vessels[1], p.max_radius
                ));
            }
        }
        Ok(())
    }
}

/// Counters the evaluation must reproduce on a generated pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounters {
    pub scenes: u64,
    /// False when the plan allowed overlapping spurious segments.
    pub exact: bool,
    pub with_class: PanopticCounters,
    pub agnostic: AgnosticCounters,
}

impl ExpectedCounters {
    fn merge(&mut self, other: &ExpectedCounters) {
        self.scenes += other.scenes;
        for (l, c) in &other.with_class {
            self.with_class.entry(l.clone()).or_default().merge(c);
        }
        self.agnostic.merge(&other.agnostic);
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub name: String,
    pub gt: SceneAnnotation,
    pub pred: SceneAnnotation,
    pub expected: ExpectedCounters,
}

#[derive(Debug, Clone)]
pub struct GeneratedSet {
    pub scenes: Vec<GeneratedScene>,
    pub expected: ExpectedCounters,
}

/// Generates every scene of the plan. Same plan, same output.
pub fn generate(plan: &SyntheticPlan) -> Result<GeneratedSet, CliError> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut expected = ExpectedCounters {
        exact: !plan.overlap,
        ..Default::default()
    };
    let mut scenes = Vec::with_capacity(plan.scenes);
    for index in 0..plan.scenes {
        let scene = generate_scene(plan, &mut rng, index)?;
        expected.merge(&scene.expected);
        scenes.push(scene);
    }
    Ok(GeneratedSet { scenes, expected })
}

/// Writes `gt/`, `pred/`, `expected.json` and a copy of the plan under `out`.
pub fn write_set(out: &Path, plan: &SyntheticPlan, set: &GeneratedSet) -> Result<(), CliError> {
    for s in &set.scenes {
        write_scene(&out.join("gt"), &s.name, &s.gt)?;
        write_scene(&out.join("pred"), &s.name, &s.pred)?;
    }
    let mut expected = serde_json::to_vec_pretty(&set.expected).expect("counters serialize");
    expected.push(b'\n');
    write_bytes(&out.join("expected.json"), &expected)?;
    let mut plan_bytes = serde_json::to_vec_pretty(plan).expect("plan serializes");
    plan_bytes.push(b'\n');
    write_bytes(&out.join("plan.json"), &plan_bytes)
}

fn grid(cells: usize) -> (u32, u32) {
    // twice as many cells as vessels leaves room for spurious segments
    let cells = (cells * 2).max(1);
    let cols = (cells as f64).sqrt().ceil() as u32;
    let rows = (cells as u32).div_ceil(cols);
    (cols, rows)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

fn cells(plan: &SyntheticPlan) -> Vec<Cell> {
    let (cols, rows) = grid(plan.vessels[1]);
    let (cw, ch) = (plan.width / cols, plan.height / rows);
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            out.push(Cell {
                x0: c * cw,
                y0: r * ch,
                x1: (c + 1) * cw,
                y1: (r + 1) * ch,
            });
        }
    }
    out
}

/// A vessel's outline within its bounding box.
#[derive(Debug, Clone, Copy)]
struct VesselShape {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
    ellipse: bool,
}

impl VesselShape {
    fn band(&self, w: u32, h: u32, y0: u32, y1: u32) -> BinaryMask {
        if self.ellipse {
            let (cx, cy) = ((self.x0 + self.x1) as f64 / 2.0, (self.y0 + self.y1) as f64 / 2.0);
            let (rx, ry) = ((self.x1 - self.x0) as f64 / 2.0, (self.y1 - self.y0) as f64 / 2.0);
            BinaryMask::ellipse_band(w, h, cx, cy, rx, ry, y0, y1).expect("positive dimensions")
        } else {
            BinaryMask::rect(w, h, self.x0, y0, self.x1, y1).expect("positive dimensions")
        }
    }

    fn mask(&self, w: u32, h: u32) -> BinaryMask {
        self.band(w, h, self.y0, self.y1)
    }

    /// Columns `[fx0, fx1)` and rows `[fy0, fy1)` as fractions of the box,
    /// clipped to the outline.
    fn sub(&self, w: u32, h: u32, fx0: f64, fx1: f64, fy0: f64, fy1: f64) -> BinaryMask {
        let bw = (self.x1 - self.x0) as f64;
        let bh = (self.y1 - self.y0) as f64;
        let at = |base: u32, len: f64, f: f64| base + (len * f).round() as u32;
        let r = BinaryMask::rect(
            w,
            h,
            at(self.x0, bw, fx0),
            at(self.y0, bh, fy0),
            at(self.x0, bw, fx1),
            at(self.y0, bh, fy1),
        )
        .expect("positive dimensions");
        r.intersection(&self.mask(w, h)).expect("same dimensions")
    }
}

/// Blood inside a pipette that stands in a tube.
pub fn nested_tube_scene(width: u32, height: u32) -> Result<SceneAnnotation, CliError> {
    let margin = 2;
    if width < MIN_CELL + 2 * margin || height < MIN_CELL + 2 * margin {
        return Err(CliError::Invalid(format!("{width}x{height} is too small for a nested scene")));
    }
    let shape = VesselShape {
        x0: margin,
        y0: margin,
        x1: width - margin,
        y1: height - margin,
        ellipse: false,
    };
    let mut scene = SceneAnnotation::new(width, height);
    scene.push(Instance::new("tube", InstanceKind::Vessel, shape.mask(width, height), labels(["vessel", "tube"])));
    add_pipette(&mut scene, &shape, "tube", "pipette", "blood");
    scene.canonicalize();
    Ok(scene)
}

fn add_pipette(scene: &mut SceneAnnotation, outer: &VesselShape, outer_id: &str, pipette_id: &str, blood_id: &str) {
    let (w, h) = (scene.width, scene.height);
    let pipette = outer.sub(w, h, 0.55, 0.75, 0.1, 0.55);
    let blood = outer.sub(w, h, 0.55, 0.75, 0.4, 0.55);
    scene.push(Instance::new(pipette_id, InstanceKind::Vessel, pipette, labels(["vessel", "pipette"])));
    scene.push(Instance::new(blood_id, InstanceKind::Material, blood, labels(["filled", "liquid", "blood"])));
    scene.place_inside(pipette_id, outer_id);
    scene.place_inside(blood_id, pipette_id);
    scene.place_inside(blood_id, outer_id);
}

fn pick<R: Rng>(rng: &mut R, range: [usize; 2]) -> usize {
    rng.gen_range(range[0]..=range[1])
}

fn ground_truth<R: Rng>(plan: &SyntheticPlan, rng: &mut R, free: &mut Vec<Cell>) -> SceneAnnotation {
    let (w, h) = (plan.width, plan.height);
    let mut scene = SceneAnnotation::new(w, h);
    let margin = plan.perturbation.max_radius + 1;
    free.shuffle(rng);
    let count = pick(rng, plan.vessels);
    let mut previous: Option<String> = None;
    for v in 0..count {
        let cell = free.pop().expect("grid has a cell per vessel");
        let (cw, ch) = (cell.x1 - cell.x0 - 2 * margin, cell.y1 - cell.y0 - 2 * margin);
        let bw = rng.gen_range((cw / 2).max(MIN_CELL / 2)..=cw);
        let bh = rng.gen_range((ch / 2).max(MIN_CELL / 2)..=ch);
        let x0 = cell.x0 + margin + rng.gen_range(0..=cw - bw);
        let y0 = cell.y0 + margin + rng.gen_range(0..=ch - bh);
        let shape = VesselShape {
            x0,
            y0,
            x1: x0 + bw,
            y1: y0 + bh,
            ellipse: rng.gen_bool(0.3),
        };
        let id = format!("v{v}");
        let class = VESSEL_CLASSES.choose(rng).expect("non-empty");
        let mut vessel = Instance::new(id.clone(), InstanceKind::Vessel, shape.mask(w, h), labels(["vessel", class]));
        if rng.gen_bool(0.5) {
            vessel = vessel.with_properties(labels([*VESSEL_PROPERTIES.choose(rng).expect("non-empty")]));
        }
        scene.push(vessel);

        // material layers from the bottom up, at most 40% of the height
        let layers = pick(rng, plan.materials);
        let mut bottom = 1.0;
        for m in 0..layers {
            let depth = rng.gen_range(0.05..=0.4 / layers.max(1) as f64);
            let top = bottom - depth;
            let mask = shape.sub(w, h, 0.0, 1.0, top, bottom);
            bottom = top;
            if mask.is_empty() {
                continue;
            }
            let mid = format!("v{v}m{m}");
            let classes = MATERIAL_CLASSES.choose(rng).expect("non-empty");
            let mut mat = Instance::new(mid.clone(), InstanceKind::Material, mask, labels(classes.iter().copied()));
            if rng.gen_bool(0.2) {
                mat = mat.with_properties(labels([*MATERIAL_PROPERTIES.choose(rng).expect("non-empty")]));
            }
            scene.push(mat);
            scene.place_inside(&mid, &id);
        }
        if rng.gen_bool(plan.parts) {
            let mask = shape.sub(w, h, 0.1, 0.35, 0.15, 0.35);
            if !mask.is_empty() {
                let pid = format!("v{v}p");
                let class = PART_CLASSES.choose(rng).expect("non-empty");
                scene.push(Instance::new(pid.clone(), InstanceKind::Part, mask, labels([*class])));
                scene.place_inside(&pid, &id);
            }
        }
        if rng.gen_bool(plan.nested) && !shape.sub(w, h, 0.55, 0.75, 0.4, 0.55).is_empty() {
            add_pipette(&mut scene, &shape, &id, &format!("v{v}n"), &format!("v{v}nb"));
        }
        if let Some(prev) = &previous {
            if rng.gen_bool(plan.links) {
                scene.link(prev, &id);
            }
        }
        previous = Some(id);
    }
    scene.canonicalize();
    scene
}

/// Square-window dilation (`grow`) or erosion of a mask by `radius`.
fn morph(mask: &BinaryMask, radius: u32, grow: bool) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let r = radius as usize;
    let bits = mask.decode();
    let pass = |src: &[bool], len: usize, lines: usize, at: &dyn Fn(usize, usize) -> usize| {
        let mut out = src.to_vec();
        for line in 0..lines {
            let mut set = 0usize;
            // window [i - r, i + r], counting set pixels
            for i in 0..len.min(r) {
                set += src[at(line, i)] as usize;
            }
            for i in 0..len {
                if i + r < len {
                    set += src[at(line, i + r)] as usize;
                }
                if i > r {
                    set -= src[at(line, i - r - 1)] as usize;
                }
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(len - 1);
                let window = hi - lo + 1;
                out[at(line, i)] = if grow { set > 0 } else { set == window };
            }
        }
        out
    };
    let rows = pass(&bits, w, h, &|y, x| y * w + x);
    let both = pass(&rows, h, w, &|x, y| y * w + x);
    BinaryMask::encode(&both, mask.width(), mask.height()).expect("same dimensions")
}

fn flip_classes<R: Rng>(rng: &mut R, inst: &Instance) -> LabelSet {
    let pool: Vec<LabelSet> = match inst.kind {
        InstanceKind::Vessel => VESSEL_CLASSES.iter().map(|c| labels(["vessel", c])).collect(),
        InstanceKind::Material => MATERIAL_CLASSES.iter().map(|c| labels(c.iter().copied())).collect(),
        InstanceKind::Part => PART_CLASSES.iter().map(|c| labels([*c])).collect(),
    };
    let others: Vec<&LabelSet> = pool.iter().filter(|s| **s != inst.classes).collect();
    others.choose(rng).map_or_else(|| inst.classes.clone(), |s| (*s).clone())
}

/// Perturbed prediction. Returns the prediction and, per ground-truth
/// instance, whether it survived.
fn predict<R: Rng>(plan: &SyntheticPlan, rng: &mut R, gt: &SceneAnnotation, free: &[Cell]) -> SceneAnnotation {
    let p = &plan.perturbation;
    let mut pred = SceneAnnotation::new(gt.width, gt.height);
    pred.source = gt.source.clone();
    for inst in &gt.instances {
        if rng.gen_bool(p.drop) {
            continue;
        }
        let mut out = inst.clone();
        if rng.gen_bool(p.class_flip) {
            out.classes = flip_classes(rng, inst);
        }
        if p.max_radius > 0 && rng.gen_bool(p.resize) {
            let radius = rng.gen_range(1..=p.max_radius);
            out.mask = morph(&inst.mask, radius, rng.gen_bool(0.5));
            if out.mask.is_empty() {
                continue;
            }
        }
        pred.instances.push(out);
    }
    let kept: BTreeSet<&str> = pred.instances.iter().map(|i| i.id.as_str()).collect();
    pred.relations = gt
        .relations
        .iter()
        .filter(|r| kept.contains(r.subject.as_str()) && kept.contains(r.object.as_str()))
        .cloned()
        .collect();
    let anchored: BTreeSet<String> = pred
        .relations
        .iter()
        .filter(|r| r.kind == vesseleval::RelationKind::Inside)
        .map(|r| r.subject.clone())
        .collect();
    for inst in &mut pred.instances {
        if inst.kind != InstanceKind::Vessel && !anchored.contains(&inst.id) {
            inst.free_standing = true;
        }
    }

    let mut free = free.to_vec();
    free.shuffle(rng);
    let vessels = gt.vessels().count().max(1);
    for k in 0..vessels {
        if !rng.gen_bool(p.spurious) {
            continue;
        }
        let (x0, y0, x1, y1) = if plan.overlap {
            let x0 = rng.gen_range(0..gt.width.saturating_sub(4).max(1));
            let y0 = rng.gen_range(0..gt.height.saturating_sub(4).max(1));
            (x0, y0, (x0 + rng.gen_range(2..=gt.width / 3 + 2)), (y0 + rng.gen_range(2..=gt.height / 3 + 2)))
        } else {
            let Some(cell) = free.pop() else { break };
            let mx = (cell.x1 - cell.x0) / 4;
            let my = (cell.y1 - cell.y0) / 4;
            (cell.x0 + mx, cell.y0 + my, cell.x1 - mx, cell.y1 - my)
        };
        let mask = BinaryMask::rect(gt.width, gt.height, x0, y0, x1, y1).expect("positive dimensions");
        let id = format!("s{k}");
        let spurious = if rng.gen_bool(0.5) {
            Instance::new(id, InstanceKind::Vessel, mask, labels(["vessel", VESSEL_CLASSES.choose(rng).expect("non-empty")]))
        } else {
            let classes = MATERIAL_CLASSES.choose(rng).expect("non-empty");
            Instance::new(id, InstanceKind::Material, mask, labels(classes.iter().copied())).with_free_standing(true)
        };
        pred.instances.push(spurious);
    }
    pred.canonicalize();
    pred
}

/// True when some prediction reaches IOU above 1/2 with a ground-truth
/// segment other than its own source.
fn has_foreign_match(gt: &SceneAnnotation, pred: &SceneAnnotation) -> bool {
    pred.instances.iter().any(|p| {
        gt.instances
            .iter()
            .filter(|g| g.id != p.id)
            .any(|g| p.mask.overlap_counts(&g.mask).expect("same dimensions").iou_above_half())
    })
}

/// Counters implied by the known correspondences between `gt` and `pred`.
fn expected_counters(gt: &SceneAnnotation, pred: &SceneAnnotation, exact: bool) -> ExpectedCounters {
    let mut with_class = PanopticCounters::new();
    let mut agnostic = AgnosticCounters::default();
    for inst in gt.instances.iter().chain(&pred.instances) {
        for l in inst.eval_labels() {
            with_class.entry(l).or_default();
        }
    }
    for g in &gt.instances {
        for l in g.eval_labels() {
            agnostic.classes.entry(l).or_default();
        }
    }
    let fp = |c: &mut ClassCounts| c.fp += 1.0;
    for g in &gt.instances {
        let gl = g.eval_labels();
        let source = pred.instance(&g.id);
        let overlap = source.map(|p| p.mask.overlap_counts(&g.mask).expect("same dimensions"));
        match (source, overlap) {
            (Some(p), Some(o)) if o.iou_above_half() => {
                let iou = o.iou().expect("non-empty union");
                let pl = p.eval_labels();
                for l in gl.union(&pl) {
                    let c = with_class.get_mut(l).expect("label registered");
                    match (gl.contains(l), pl.contains(l)) {
                        (true, true) => {
                            c.tp += 1;
                            c.iou_sum.add(iou);
                        }
                        (true, false) => c.fn_ += 1,
                        _ => fp(c),
                    }
                }
                for l in &gl {
                    let a = agnostic.classes.get_mut(l).expect("label registered");
                    a.tp += 1;
                    a.iou_sum.add(iou);
                }
            }
            (source, _) => {
                for l in &gl {
                    with_class.get_mut(l).expect("label registered").fn_ += 1;
                    agnostic.classes.get_mut(l).expect("label registered").fn_ += 1;
                }
                if let Some(p) = source {
                    for l in p.eval_labels() {
                        fp(with_class.get_mut(&l).expect("label registered"));
                    }
                    agnostic.unmatched_pred += 1;
                }
            }
        }
    }
    for p in pred.instances.iter().filter(|p| gt.instance(&p.id).is_none()) {
        for l in p.eval_labels() {
            fp(with_class.get_mut(&l).expect("label registered"));
        }
        agnostic.unmatched_pred += 1;
    }
    ExpectedCounters {
        scenes: 1,
        exact,
        with_class,
        agnostic,
    }
}

fn generate_scene<R: Rng>(plan: &SyntheticPlan, rng: &mut R, index: usize) -> Result<GeneratedScene, CliError> {
    for _ in 0..MAX_ATTEMPTS {
        let mut free = cells(plan);
        let mut gt = ground_truth(plan, rng, &mut free);
        gt.source = Some(format!("synthetic_{index:05}.png"));
        let pred = predict(plan, rng, &gt, &free);
        if !plan.overlap && has_foreign_match(&gt, &pred) {
            continue;
        }
        let expected = expected_counters(&gt, &pred, !plan.overlap);
        return Ok(GeneratedScene {
            name: format!("scene_{index:05}.json"),
            gt,
            pred,
            expected,
        });
    }
    Err(CliError::Invalid(format!(
        "scene {index}: could not place predictions without ambiguous overlaps; reduce perturbation.max_radius"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vesseleval::validate_scene;

    #[test]
    fn morph_square_window() {
        let m = BinaryMask::rect(9, 9, 3, 3, 6, 6).unwrap();
        assert_eq!(morph(&m, 1, true), BinaryMask::rect(9, 9, 2, 2, 7, 7).unwrap());
        assert_eq!(morph(&m, 1, false), BinaryMask::rect(9, 9, 4, 4, 5, 5).unwrap());
        assert!(morph(&m, 2, false).is_empty());
    }

    #[test]
    fn generated_scenes_are_valid() {
        let plan = SyntheticPlan {
            scenes: 30,
            nested: 0.5,
            perturbation: Perturbation {
                drop: 0.3,
                spurious: 0.3,
                class_flip: 0.3,
                resize: 0.3,
                max_radius: 2,
            },
            ..Default::default()
        };
        for s in generate(&plan).unwrap().scenes {
            assert_eq!(validate_scene(&s.gt), vec![], "{}", s.name);
            assert_eq!(validate_scene(&s.pred), vec![], "{}", s.name);
        }
    }

    #[test]
    fn content_stays_below_half_of_its_vessel() {
        let plan = SyntheticPlan {
            scenes: 20,
            parts: 1.0,
            nested: 1.0,
            materials: [1, 3],
            ..Default::default()
        };
        for s in generate(&plan).unwrap().scenes {
            for a in &s.gt.instances {
                for b in &s.gt.instances {
                    if a.id != b.id {
                        assert!(!a.mask.overlap_counts(&b.mask).unwrap().iou_above_half(), "{} {}", a.id, b.id);
                    }
                }
            }
        }
    }

    #[test]
    fn plan_checks() {
        let mut plan = SyntheticPlan::default();
        plan.perturbation.drop = 1.5;
        assert!(plan.validate().is_err());
        let plan = SyntheticPlan {
            width: 10,
            ..Default::default()
        };
        assert!(plan.validate().is_err());
        let plan = SyntheticPlan {
            vessels: [3, 1],
            ..Default::default()
        };
        assert!(plan.validate().is_err());
    }
}
