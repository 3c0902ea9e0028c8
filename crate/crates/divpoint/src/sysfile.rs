//! System definition files: JSON documents whose numeric fields are
//! expression strings (see [`crate::expr`]), so golden-ratio coordinates can
//! be written exactly.
//!
//! Parsing pipeline: evaluate expressions → build file-frame prototiles and
//! rules → translate prototiles apart along +x if the file placed them
//! overlapping → uniformly rescale so the total area is 1 → conjugate the
//! rule isometries into the new frame → assemble and geometrically validate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval_expr, ExprError};
use crate::geometry::{GeometryError, Isometry, Point, Polygon};
use crate::scalar::{cast, Real};
use crate::substitution::{
    ChildPlacement, Prototile, SubstitutionSystem, SystemError, ValidationReport,
};

/// A numeric field: either an expression string or a plain JSON number.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOrExpr {
    Number(f64),
    Expr(String),
}

impl NumberOrExpr {
    fn eval<R: Real>(&self, context: &str) -> Result<R, ParseError> {
        let v: R = match self {
            NumberOrExpr::Number(x) => cast(*x),
            NumberOrExpr::Expr(src) => {
                eval_expr(src).map_err(|source| ParseError::Expr {
                    context: context.to_string(),
                    source,
                })?
            }
        };
        if !v.is_finite() {
            return Err(ParseError::NonFinite {
                context: context.to_string(),
            });
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrototileDoc {
    pub label: String,
    pub vertices: Vec<[NumberOrExpr; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub puncture: Option<[NumberOrExpr; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChildDoc {
    pub child: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<NumberOrExpr>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reflect: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<[NumberOrExpr; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleDoc {
    pub parent: String,
    pub children: Vec<ChildDoc>,
}

/// On-disk schema of a substitution system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub name: String,
    pub lambda: NumberOrExpr,
    pub prototiles: Vec<PrototileDoc>,
    pub rules: Vec<RuleDoc>,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad expression in {context}: {source}")]
    Expr {
        context: String,
        source: ExprError,
    },
    #[error("{context} does not evaluate to a finite number")]
    NonFinite { context: String },
    #[error("bad polygon for prototile {label:?}: {source}")]
    Shape {
        label: String,
        source: GeometryError,
    },
    #[error("bad isometry in rule {parent:?} child {index}: {source}")]
    Placement {
        parent: String,
        index: usize,
        source: GeometryError,
    },
    #[error("rule references unknown label {label:?}")]
    UnknownLabel { label: String },
    #[error("more than one rule for prototile {label:?}")]
    DuplicateRule { label: String },
    #[error("no rule for prototile {label:?}")]
    MissingRule { label: String },
    #[error("structural error: {0}")]
    System(#[from] SystemError),
    #[error("system failed geometric validation:\n{0}")]
    Validation(Box<ValidationReport>),
}

fn eval_pair<R: Real>(pair: &[NumberOrExpr; 2], context: &str) -> Result<Point<R>, ParseError> {
    Ok(Point::new(
        pair[0].eval(&format!("{context}[0]"))?,
        pair[1].eval(&format!("{context}[1]"))?,
    ))
}

/// Parses a system document, returning the normalized system together with
/// its validation report (which may be failing; callers that need a
/// guaranteed-good system should use [`parse_system`]).
pub fn parse_system_with_report<R: Real>(
    text: &str,
) -> Result<(SubstitutionSystem<R>, ValidationReport), ParseError> {
    let doc: SystemDoc = serde_json::from_str(text)?;
    let lambda: R = doc.lambda.eval("lambda")?;

    // file-frame shapes and punctures
    let mut shapes: Vec<Polygon<R>> = Vec::with_capacity(doc.prototiles.len());
    let mut punctures: Vec<Point<R>> = Vec::with_capacity(doc.prototiles.len());
    for (i, proto) in doc.prototiles.iter().enumerate() {
        let mut verts = Vec::with_capacity(proto.vertices.len());
        for (vi, pair) in proto.vertices.iter().enumerate() {
            verts.push(eval_pair(
                pair,
                &format!("prototiles[{i}].vertices[{vi}]"),
            )?);
        }
        let shape = Polygon::new(verts).map_err(|source| ParseError::Shape {
            label: proto.label.clone(),
            source,
        })?;
        let puncture = match &proto.puncture {
            Some(pair) => eval_pair(pair, &format!("prototiles[{i}].puncture"))?,
            None => shape.centroid(),
        };
        shapes.push(shape);
        punctures.push(puncture);
    }

    let label_index = |label: &str| -> Result<usize, ParseError> {
        doc.prototiles
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| ParseError::UnknownLabel {
                label: label.to_string(),
            })
    };

    // file-frame rules, ordered by prototile
    let mut file_rules: Vec<Option<Vec<ChildPlacement<R>>>> = vec![None; doc.prototiles.len()];
    for rule in &doc.rules {
        let parent = label_index(&rule.parent)?;
        if file_rules[parent].is_some() {
            return Err(ParseError::DuplicateRule {
                label: rule.parent.clone(),
            });
        }
        let mut placements = Vec::with_capacity(rule.children.len());
        for (ci, child_doc) in rule.children.iter().enumerate() {
            let child = label_index(&child_doc.child)?;
            let context = format!("rules[{}].children[{ci}]", rule.parent);
            let angle: R = match &child_doc.angle {
                Some(e) => e.eval(&format!("{context}.angle"))?,
                None => R::zero(),
            };
            let translate: Point<R> = match &child_doc.translate {
                Some(pair) => eval_pair(pair, &format!("{context}.translate"))?,
                None => Point::zero(),
            };
            let base = if child_doc.reflect {
                Isometry::reflection(angle)
            } else {
                Isometry::rotation(angle)
            };
            let placement = Isometry::new(base.linear, translate).map_err(|source| {
                ParseError::Placement {
                    parent: rule.parent.clone(),
                    index: ci,
                    source,
                }
            })?;
            placements.push(ChildPlacement { child, placement });
        }
        file_rules[parent] = Some(placements);
    }
    let mut rules: Vec<Vec<ChildPlacement<R>>> = Vec::with_capacity(file_rules.len());
    for (i, slot) in file_rules.into_iter().enumerate() {
        rules.push(slot.ok_or_else(|| ParseError::MissingRule {
            label: doc.prototiles[i].label.clone(),
        })?);
    }

    // translate prototiles apart when the file placed them overlapping
    let mut offsets = vec![Point::<R>::zero(); shapes.len()];
    let overlapping = shapes.iter().enumerate().any(|(i, p)| {
        shapes[i + 1..].iter().any(|q| {
            let tol = cast::<R>(1e-12) * p.area().min(q.area());
            p.intersection_area(q) > tol
        })
    });
    if overlapping {
        let mut cursor = R::zero();
        for (i, shape) in shapes.iter().enumerate() {
            let (lo, hi) = shape.bounding_box();
            offsets[i] = Point::new(cursor - lo.x, R::zero());
            cursor = hi.x + offsets[i].x + shape.diameter();
        }
    }

    // uniform rescale so the total area is 1
    let total: R = shapes.iter().map(|s| s.area()).sum();
    let scale = R::one() / total.sqrt();

    let prototiles: Vec<Prototile<R>> = doc
        .prototiles
        .iter()
        .enumerate()
        .map(|(i, proto)| {
            let verts = shapes[i]
                .vertices()
                .iter()
                .map(|&v| (v + offsets[i]) * scale)
                .collect();
            Prototile {
                label: proto.label.clone(),
                shape: Polygon::new(verts).expect("translated and scaled polygon stays valid"),
                puncture: (punctures[i] + offsets[i]) * scale,
            }
        })
        .collect();

    // conjugate each placement into the translated and rescaled frame:
    // t' = s·(t + λ·T_parent − Q·T_child)
    for (parent, rule) in rules.iter_mut().enumerate() {
        for cp in rule.iter_mut() {
            let g = &cp.placement;
            let t = g.translation + offsets[parent] * lambda - g.apply_linear(offsets[cp.child]);
            cp.placement = Isometry {
                linear: g.linear,
                translation: t * scale,
                orientation_reversing: g.orientation_reversing,
            };
        }
    }

    let sys = SubstitutionSystem::assemble(doc.name, prototiles, lambda, rules)?;
    let report = sys.validate();
    Ok((sys, report))
}

/// Parses a system document and insists on a passing validation report.
pub fn parse_system<R: Real>(text: &str) -> Result<SubstitutionSystem<R>, ParseError> {
    let (sys, report) = parse_system_with_report(text)?;
    if !report.passed() {
        return Err(ParseError::Validation(Box::new(report)));
    }
    Ok(sys)
}

/// Serializes a system back to the document format. Coordinates are written
/// as plain numbers (shortest round-trip representation), so
/// `parse → serialize → parse` reproduces the system.
pub fn serialize_system<R: Real>(sys: &SubstitutionSystem<R>) -> String {
    let num = |v: R| NumberOrExpr::Number(v.to_f64().expect("coordinate fits in f64"));
    let pair = |p: Point<R>| [num(p.x), num(p.y)];
    let doc = SystemDoc {
        name: sys.name().to_string(),
        lambda: num(sys.lambda()),
        prototiles: sys
            .prototiles()
            .iter()
            .map(|p| PrototileDoc {
                label: p.label.clone(),
                vertices: p.shape.vertices().iter().map(|&v| pair(v)).collect(),
                puncture: Some(pair(p.puncture)),
            })
            .collect(),
        rules: sys
            .prototiles()
            .iter()
            .zip(sys.rules())
            .map(|(p, rule)| RuleDoc {
                parent: p.label.clone(),
                children: rule
                    .iter()
                    .map(|cp| ChildDoc {
                        child: sys.prototiles()[cp.child].label.clone(),
                        angle: Some(num(cp.placement.angle())),
                        reflect: cp.placement.orientation_reversing,
                        translate: Some(pair(cp.placement.translation)),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

/// Tolerant structural equality, used by round-trip tests.
pub fn systems_structurally_equal<R: Real>(
    a: &SubstitutionSystem<R>,
    b: &SubstitutionSystem<R>,
    tol: R,
) -> bool {
    if a.prototiles().len() != b.prototiles().len() {
        return false;
    }
    if (a.lambda() - b.lambda()).abs() > tol {
        return false;
    }
    let close = |p: Point<R>, q: Point<R>| p.distance(q) <= tol;
    for (pa, pb) in a.prototiles().iter().zip(b.prototiles()) {
        if pa.label != pb.label
            || pa.shape.vertices().len() != pb.shape.vertices().len()
            || !close(pa.puncture, pb.puncture)
        {
            return false;
        }
        if !pa
            .shape
            .vertices()
            .iter()
            .zip(pb.shape.vertices())
            .all(|(&u, &v)| close(u, v))
        {
            return false;
        }
    }
    for (ra, rb) in a.rules().iter().zip(b.rules()) {
        if ra.len() != rb.len() {
            return false;
        }
        for (ca, cb) in ra.iter().zip(rb) {
            if ca.child != cb.child
                || ca.placement.orientation_reversing != cb.placement.orientation_reversing
                || !close(ca.placement.translation, cb.placement.translation)
            {
                return false;
            }
            for r in 0..2 {
                for c in 0..2 {
                    if (ca.placement.linear[r][c] - cb.placement.linear[r][c]).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}
