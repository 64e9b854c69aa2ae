//! JSON documents for measures, couplings and lifted couplings.
//!
//! Scalars are written as strings (`"3/16"`); on input both strings and plain
//! JSON numbers are accepted.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coupling::{DiscreteCoupling, LiftedCoupling, Segment};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct AtomDoc {
    pub x: Value,
    pub w: Value,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct MeasureDoc {
    pub atoms: Vec<AtomDoc>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct PointDoc {
    pub x: Value,
    pub y: Value,
    pub w: Value,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CouplingDoc {
    pub points: Vec<PointDoc>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SegmentDoc {
    pub a: Value,
    pub b: Value,
    pub x: Value,
    pub kernel: MeasureDoc,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LiftedDoc {
    pub segments: Vec<SegmentDoc>,
}

fn scalar<S: Scalar>(v: &Value, what: &str) -> Result<S> {
    match v {
        Value::String(s) => S::parse(s),
        Value::Number(n) => S::parse(&n.to_string()),
        other => Err(Error::Parse(format!("{what}: expected a number or string, got {other}"))),
    }
    .map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{what}: {m}")),
        e => e,
    })
}

fn text<S: Scalar>(s: &S) -> Value {
    Value::String(s.to_string())
}

fn parse_doc<T: for<'de> Deserialize<'de>>(src: &str) -> Result<T> {
    serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))
}

fn measure_from_doc<S: Scalar>(doc: &MeasureDoc) -> Result<DiscreteMeasure<S>> {
    let pairs = doc
        .atoms
        .iter()
        .enumerate()
        .map(|(i, a)| Ok((scalar(&a.x, &format!("atoms[{i}].x"))?, scalar(&a.w, &format!("atoms[{i}].w"))?)))
        .collect::<Result<Vec<(S, S)>>>()?;
    DiscreteMeasure::from_pairs(pairs)
}

fn measure_to_doc<S: Scalar>(m: &DiscreteMeasure<S>) -> MeasureDoc {
    MeasureDoc { atoms: m.iter().map(|(x, w)| AtomDoc { x: text(x), w: text(w) }).collect() }
}

pub fn parse_measure<S: Scalar>(src: &str) -> Result<DiscreteMeasure<S>> {
    measure_from_doc(&parse_doc::<MeasureDoc>(src)?)
}

pub fn measure_json<S: Scalar>(m: &DiscreteMeasure<S>) -> String {
    serde_json::to_string_pretty(&measure_to_doc(m)).expect("plain data")
}

pub fn parse_coupling<S: Scalar>(src: &str) -> Result<DiscreteCoupling<S>> {
    let doc: CouplingDoc = parse_doc(src)?;
    let pts = doc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok((
                scalar(&p.x, &format!("points[{i}].x"))?,
                scalar(&p.y, &format!("points[{i}].y"))?,
                scalar(&p.w, &format!("points[{i}].w"))?,
            ))
        })
        .collect::<Result<Vec<(S, S, S)>>>()?;
    DiscreteCoupling::new(pts)
}

pub fn coupling_json<S: Scalar>(c: &DiscreteCoupling<S>) -> String {
    let doc = CouplingDoc { points: c.points().iter().map(|(x, y, w)| PointDoc { x: text(x), y: text(y), w: text(w) }).collect() };
    serde_json::to_string_pretty(&doc).expect("plain data")
}

pub fn parse_lifted<S: Scalar>(src: &str) -> Result<LiftedCoupling<S>> {
    let doc: LiftedDoc = parse_doc(src)?;
    let segments = doc
        .segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(Segment {
                a: scalar(&s.a, &format!("segments[{i}].a"))?,
                b: scalar(&s.b, &format!("segments[{i}].b"))?,
                x: scalar(&s.x, &format!("segments[{i}].x"))?,
                kernel: measure_from_doc(&s.kernel)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LiftedCoupling::new(segments)
}

pub fn lifted_json<S: Scalar>(l: &LiftedCoupling<S>) -> String {
    let doc = LiftedDoc {
        segments: l
            .segments()
            .iter()
            .map(|s| SegmentDoc { a: text(&s.a), b: text(&s.b), x: text(&s.x), kernel: measure_to_doc(&s.kernel) })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data")
}
