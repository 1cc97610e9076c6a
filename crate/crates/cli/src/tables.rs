//! Tabular views of a metrics summary, as markdown or CSV.
//!
//! Undefined values are printed as "—"; every table carries a support
//! column so an empty cell can be told apart from a zero score.

use std::fmt::Write as _;

use vesseleval::metrics::{PanopticScores, ReportSummary, SemanticScores, VesselSummary};
use vesseleval::{ClassLabel, InstanceKind, Taxonomy};

use crate::CliError;

pub const ABSENT: &str = "—";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, header: &[&str]) -> Self {
        Self {
            title: title.to_owned(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("### {}\n\n", self.title);
        let _ = writeln!(out, "| {} |", self.header.join(" | "));
        let _ = writeln!(
            out,
            "|{}|",
            self.header.iter().map(|_| "---").collect::<Vec<_>>().join("|")
        );
        for row in &self.rows {
            let _ = writeln!(out, "| {} |", row.join(" | "));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Shape {
    /// Content instance segmentation: material and part labels.
    Table1,
    /// Semantic segmentation.
    Table2,
    /// Vessel relationships.
    Table3,
    /// Vessel instance segmentation.
    Table4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

pub fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_owned(), |v| format!("{v:.2}"))
}

fn exact(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// "drip_chamber" → "Drip chamber".
pub fn display_label(label: &str) -> String {
    let spaced = label.replace('_', " ");
    let mut chars = spaced.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pq_cells(s: &PanopticScores) -> [String; 3] {
    [cell(s.pq), cell(s.sq), cell(s.rq)]
}

fn sem_cells(s: &SemanticScores) -> [String; 3] {
    [cell(s.iou), cell(s.precision), cell(s.recall)]
}

/// Taxonomy labels of the given kinds, in taxonomy order.
fn ordered<'a, T>(
    tax: &Taxonomy,
    rows: &'a [T],
    label: impl Fn(&T) -> &ClassLabel,
    kinds: &[InstanceKind],
) -> Vec<&'a T> {
    let mut out: Vec<&T> = rows
        .iter()
        .filter(|r| {
            tax.group(label(r).as_str())
                .is_some_and(|g| kinds.contains(&g.kind()))
        })
        .collect();
    out.sort_by(|a, b| {
        let (la, lb) = (label(a), label(b));
        (tax.rank(la.as_str()), la).cmp(&(tax.rank(lb.as_str()), lb))
    });
    out
}

const CONTENT: &[InstanceKind] = &[InstanceKind::Material, InstanceKind::Part];

/// Renders one of the fixed table layouts.
pub fn shaped_table(summary: &ReportSummary, shape: Shape, tax: &Taxonomy) -> Result<Table, CliError> {
    let header = [
        "Class",
        "Support",
        "Class-agnostic PQ",
        "Class-agnostic SQ",
        "Class-agnostic RQ",
        "With class PQ",
        "With class SQ",
        "With class RQ",
    ];
    match shape {
        Shape::Table1 => {
            let mut t;
            if let Some(pv) = &summary.per_vessel {
                t = Table::new("Instance segmentation of vessel content (mean over vessels)", &header);
                for r in ordered(tax, &pv.panoptic, |r| &r.label, CONTENT) {
                    let mut row = vec![display_label(r.label.as_str()), r.support.to_string()];
                    row.extend(pq_cells(&r.agnostic));
                    row.extend(pq_cells(&r.with_class));
                    t.rows.push(row);
                }
            } else {
                t = Table::new("Instance segmentation of vessel content (whole scene)", &header);
                for r in ordered(tax, &summary.panoptic, |r| &r.label, CONTENT) {
                    let mut row = vec![display_label(r.label.as_str()), r.support.to_string()];
                    row.extend(pq_cells(&r.agnostic));
                    row.extend(pq_cells(&r.with_class));
                    t.rows.push(row);
                }
            }
            Ok(t)
        }
        Shape::Table2 => {
            let kinds = [InstanceKind::Material, InstanceKind::Part];
            let rows = ordered(tax, &summary.semantic, |r| &r.label, &kinds);
            if let Some(pv) = &summary.per_vessel {
                let mut t = Table::new(
                    "Semantic segmentation",
                    &[
                        "Class",
                        "Vessels",
                        "Per vessel mIOU",
                        "Per vessel precision",
                        "Per vessel recall",
                        "Full image IOU",
                        "Full image precision",
                        "Full image recall",
                    ],
                );
                for r in rows {
                    let v = pv.semantic.iter().find(|v| v.label == r.label);
                    let mut row = vec![
                        display_label(r.label.as_str()),
                        v.map_or(0, |v| v.support).to_string(),
                    ];
                    row.extend(sem_cells(&v.map(|v| v.macro_avg).unwrap_or_default()));
                    row.extend([cell(r.iou), cell(r.precision), cell(r.recall)]);
                    t.rows.push(row);
                }
                Ok(t)
            } else {
                let mut t = Table::new(
                    "Semantic segmentation (full image)",
                    &["Class", "GT pixels", "IOU", "Precision", "Recall"],
                );
                for r in rows {
                    t.rows.push(vec![
                        display_label(r.label.as_str()),
                        r.gt_px.to_string(),
                        cell(r.iou),
                        cell(r.precision),
                        cell(r.recall),
                    ]);
                }
                Ok(t)
            }
        }
        Shape::Table3 => relations_table(summary)
            .ok_or_else(|| CliError::Invalid("the metrics file has no relation counters; evaluate with --relations".into())),
        Shape::Table4 => {
            let mut t = Table::new("Instance segmentation of vessels", &header);
            for r in ordered(tax, &summary.panoptic, |r| &r.label, &[InstanceKind::Vessel]) {
                let mut row = vec![display_label(r.label.as_str()), r.support.to_string()];
                row.extend(pq_cells(&r.agnostic));
                row.extend(pq_cells(&r.with_class));
                t.rows.push(row);
            }
            Ok(t)
        }
    }
}

/// Every label with both panoptic modes and the raw counters.
pub fn panoptic_table(summary: &ReportSummary) -> Table {
    let mut t = Table::new(
        "Panoptic quality",
        &[
            "label",
            "support",
            "agnostic_pq",
            "agnostic_sq",
            "agnostic_rq",
            "agnostic_tp",
            "agnostic_fp",
            "agnostic_fn",
            "with_class_pq",
            "with_class_sq",
            "with_class_rq",
            "with_class_tp",
            "with_class_fp",
            "with_class_fn",
        ],
    );
    for r in &summary.panoptic {
        let (a, w) = (&r.agnostic_counts, &r.with_class_counts);
        t.rows.push(vec![
            r.label.to_string(),
            r.support.to_string(),
            exact(r.agnostic.pq),
            exact(r.agnostic.sq),
            exact(r.agnostic.rq),
            a.tp.to_string(),
            a.fp.to_string(),
            a.fn_.to_string(),
            exact(r.with_class.pq),
            exact(r.with_class.sq),
            exact(r.with_class.rq),
            w.tp.to_string(),
            w.fp.to_string(),
            w.fn_.to_string(),
        ]);
    }
    t
}

pub fn semantic_table(summary: &ReportSummary) -> Table {
    let mut t = Table::new(
        "Semantic segmentation",
        &["label", "iou", "precision", "recall", "gt_px", "pred_px"],
    );
    for r in &summary.semantic {
        t.rows.push(vec![
            r.label.to_string(),
            exact(r.iou),
            exact(r.precision),
            exact(r.recall),
            r.gt_px.to_string(),
            r.pred_px.to_string(),
        ]);
    }
    t
}

pub fn relations_table(summary: &ReportSummary) -> Option<Table> {
    let rows = summary.relations.as_ref()?;
    let mut t = Table::new(
        "Relationships between vessels",
        &["Relationship", "Precision", "Recall", "IOU", "TP", "FP", "FN"],
    );
    for r in rows {
        t.rows.push(vec![
            display_label(r.class.as_str()),
            cell(r.precision),
            cell(r.recall),
            cell(r.iou),
            r.counts.tp.to_string(),
            r.counts.fp.to_string(),
            r.counts.fn_.to_string(),
        ]);
    }
    Some(t)
}

pub fn vessel_panoptic_table(pv: &VesselSummary) -> Table {
    let mut t = Table::new(
        "Panoptic quality per vessel (macro)",
        &[
            "label",
            "support",
            "agnostic_pq",
            "agnostic_sq",
            "agnostic_rq",
            "with_class_pq",
            "with_class_sq",
            "with_class_rq",
        ],
    );
    for r in &pv.panoptic {
        t.rows.push(vec![
            r.label.to_string(),
            r.support.to_string(),
            exact(r.agnostic.pq),
            exact(r.agnostic.sq),
            exact(r.agnostic.rq),
            exact(r.with_class.pq),
            exact(r.with_class.sq),
            exact(r.with_class.rq),
        ]);
    }
    t
}

pub fn vessel_semantic_table(pv: &VesselSummary) -> Table {
    let mut t = Table::new(
        "Semantic segmentation per vessel",
        &[
            "label",
            "support",
            "macro_iou",
            "macro_precision",
            "macro_recall",
            "micro_iou",
            "micro_precision",
            "micro_recall",
        ],
    );
    for r in &pv.semantic {
        t.rows.push(vec![
            r.label.to_string(),
            r.support.to_string(),
            exact(r.macro_avg.iou),
            exact(r.macro_avg.precision),
            exact(r.macro_avg.recall),
            exact(r.micro.iou),
            exact(r.micro.precision),
            exact(r.micro.recall),
        ]);
    }
    t
}
