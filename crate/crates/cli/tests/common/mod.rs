#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use vesseleval::metrics::ReportSummary;
use vesseleval_cli::synth::{self, SyntheticPlan};

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line in-process.
pub fn cli(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = vesseleval_cli::run(std::iter::once("vesseleval").chain(args.iter().copied()), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates `plan` into `dir` and returns `(gt, pred)` directories.
pub fn generate_into(dir: &Path, plan: &SyntheticPlan) -> (PathBuf, PathBuf) {
    let set = synth::generate(plan).unwrap();
    synth::write_set(dir, plan, &set).unwrap();
    (dir.join("gt"), dir.join("pred"))
}

pub fn write_plan(dir: &Path, plan: &SyntheticPlan) -> PathBuf {
    let path = dir.join("plan.json");
    fs::write(&path, serde_json::to_vec(plan).unwrap()).unwrap();
    path
}

/// Every defined score whose class has support, paired with a name for
/// error messages.
pub fn supported_scores(summary: &ReportSummary) -> Vec<(String, Option<f64>)> {
    let mut out = Vec::new();
    for r in summary.semantic.iter().filter(|r| r.gt_px > 0) {
        for (k, v) in [("iou", r.iou), ("precision", r.precision), ("recall", r.recall)] {
            out.push((format!("semantic {} {k}", r.label), v));
        }
    }
    for r in summary.panoptic.iter().filter(|r| r.support > 0) {
        for (mode, sc) in [("with_class", r.with_class), ("agnostic", r.agnostic)] {
            for (k, v) in [("pq", sc.pq), ("sq", sc.sq), ("rq", sc.rq)] {
                out.push((format!("panoptic {} {mode} {k}", r.label), v));
            }
        }
    }
    for r in summary.relations.iter().flatten().filter(|r| r.counts.tp + r.counts.fn_ > 0) {
        for (k, v) in [("precision", r.precision), ("recall", r.recall), ("iou", r.iou)] {
            out.push((format!("relation {} {k}", r.class.as_str()), v));
        }
    }
    if let Some(pv) = &summary.per_vessel {
        for r in pv.semantic.iter().filter(|r| r.support > 0) {
            for (k, v) in [("iou", r.macro_avg.iou), ("recall", r.macro_avg.recall)] {
                out.push((format!("per-vessel semantic {} {k}", r.label), v));
            }
        }
        for r in pv.panoptic.iter().filter(|r| r.support > 0) {
            for (mode, sc) in [("with_class", r.with_class), ("agnostic", r.agnostic)] {
                out.push((format!("per-vessel panoptic {} {mode} pq", r.label), sc.pq));
            }
        }
    }
    out
}

/// Recursively collects `(relative path, bytes)` for every file under `root`.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_owned(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
