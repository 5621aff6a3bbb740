//! Signed, weighted diagrams on a polyhedral pair and their input formats.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PolyhedralPair;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub coords: Vec<f64>,
    pub weight: f64,
}

/// A finite weighted sum of points of `X`, modulo `A`.
///
/// Points of `A` and zero weights are dropped on insertion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedDiagram {
    pair: PolyhedralPair,
    points: Vec<DiagramPoint>,
}

/// Supported diagram file formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramFormat {
    /// `weight,c1,...,cd` rows.
    Csv,
    /// `{"w": weight, "x": [c1, ..., cd]}` lines.
    Jsonl,
}

impl SignedDiagram {
    pub fn new(pair: PolyhedralPair) -> Self {
        Self {
            pair,
            points: Vec::new(),
        }
    }

    pub fn from_points(pair: PolyhedralPair, points: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Result<Self> {
        let mut d = Self::new(pair);
        for (x, w) in points {
            d.push(x, w)?;
        }
        Ok(d)
    }

    /// Adds `weight * delta_x`; returns whether the point was kept.
    pub fn push(&mut self, coords: Vec<f64>, weight: f64) -> Result<bool> {
        if !weight.is_finite() {
            return Err(Error::InvalidConfig(format!("weight {weight} is not finite")));
        }
        if !self.pair.contains(&coords)? {
            return Err(Error::OutsideX(coords));
        }
        if weight == 0.0 || self.pair.distance_to_a_unchecked(&coords) == 0.0 {
            return Ok(false);
        }
        self.points.push(DiagramPoint { coords, weight });
        Ok(true)
    }

    pub fn pair(&self) -> &PolyhedralPair {
        &self.pair
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum |w| d(x, A)`.
    pub fn mass(&self) -> f64 {
        self.points.iter().fold(0.0, |s, p| {
            s + p.weight.abs() * self.pair.distance_to_a_unchecked(&p.coords)
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().fold(0.0, |s, p| s + p.weight.abs())
    }

    fn filtered(&self, keep: impl Fn(f64) -> Option<f64>) -> Self {
        Self {
            pair: self.pair.clone(),
            points: self
                .points
                .iter()
                .filter_map(|p| {
                    keep(p.weight).map(|weight| DiagramPoint {
                        coords: p.coords.clone(),
                        weight,
                    })
                })
                .collect(),
        }
    }

    /// Points with positive weight.
    pub fn positive_part(&self) -> Self {
        self.filtered(|w| (w > 0.0).then_some(w))
    }

    /// Points with negative weight, as a positive diagram.
    pub fn negative_part(&self) -> Self {
        self.filtered(|w| (w < 0.0).then_some(-w))
    }

    pub fn negated(&self) -> Self {
        self.filtered(|w| Some(-w))
    }

    /// Formal sum of two diagrams on the same pair.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.pair != other.pair {
            return Err(Error::PairMismatch);
        }
        let mut out = self.clone();
        out.points.extend(other.points.iter().cloned());
        Ok(out)
    }

    /// Each point repeated `|w|` times; weights must be integers.
    pub fn expand(&self) -> Result<Vec<&[f64]>> {
        let mut out = Vec::new();
        for p in &self.points {
            let w = p.weight.abs();
            if w.fract() != 0.0 {
                return Err(Error::NonIntegerWeight(p.weight));
            }
            for _ in 0..w as usize {
                out.push(p.coords.as_slice());
            }
        }
        Ok(out)
    }

    /// Reads a diagram, reporting 1-based line numbers on failure.
    pub fn parse(reader: impl Read, format: DiagramFormat, pair: &PolyhedralPair) -> Result<Self> {
        match format {
            DiagramFormat::Csv => parse_csv(reader, pair),
            DiagramFormat::Jsonl => parse_jsonl(reader, pair),
        }
    }
}

fn located(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            message: other.to_string(),
        },
    }
}

/// Non-empty, non-comment lines with their 1-based numbers, split on commas.
fn csv_rows(mut reader: impl Read) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let vals = raw
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("cannot parse {s:?} as a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

fn parse_csv(reader: impl Read, pair: &PolyhedralPair) -> Result<SignedDiagram> {
    let mut out = SignedDiagram::new(pair.clone());
    for (line, vals) in csv_rows(reader)? {
        if vals.len() != pair.dim() + 1 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected weight and {} coordinates, found {} fields",
                    pair.dim(),
                    vals.len()
                ),
            });
        }
        out.push(vals[1..].to_vec(), vals[0]).map_err(|e| located(line, e))?;
    }
    Ok(out)
}

#[derive(Deserialize)]
struct JsonPoint {
    w: f64,
    x: Vec<f64>,
}

fn parse_jsonl(mut reader: impl Read, pair: &PolyhedralPair) -> Result<SignedDiagram> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut out = SignedDiagram::new(pair.clone());
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let p: JsonPoint = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(p.x, p.w).map_err(|e| located(line, e))?;
    }
    Ok(out)
}

/// Which interval family produced a multiparameter barcode. Both map to the
/// same point `(a, b)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    #[default]
    Rectangle,
    Hook,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub sign: i32,
}

/// A signed multiparameter barcode, `{"d": params, "bars": [{"a", "b", "sign"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedBarcode {
    pub d: usize,
    #[serde(default)]
    pub kind: IntervalKind,
    pub bars: Vec<Bar>,
}

impl SignedBarcode {
    pub fn from_json(reader: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    /// Maps each bar to `(a_1..a_d, b_1..b_d)` on the barcode space; flat bars vanish.
    pub fn to_diagram(&self) -> Result<SignedDiagram> {
        from_rectangles(self.d, &self.bars)
    }
}

/// Signed rectangles (or hooks) as a diagram on the `params`-parameter barcode space.
pub fn from_rectangles(params: usize, bars: &[Bar]) -> Result<SignedDiagram> {
    let pair = PolyhedralPair::barcode_space(params)?;
    let mut out = SignedDiagram::new(pair);
    for (i, bar) in bars.iter().enumerate() {
        if bar.a.len() != params || bar.b.len() != params {
            return Err(Error::InvalidBarcode(format!(
                "bar {i} has endpoints of length {} and {}, expected {params}",
                bar.a.len(),
                bar.b.len()
            )));
        }
        if bar.sign != 1 && bar.sign != -1 {
            return Err(Error::InvalidBarcode(format!(
                "bar {i} has sign {}, expected +1 or -1",
                bar.sign
            )));
        }
        if let Some(j) = (0..params).find(|&j| bar.a[j].is_nan() || bar.b[j].is_nan() || bar.a[j] > bar.b[j]) {
            return Err(Error::InvalidBarcode(format!(
                "bar {i} has a_{} = {} > b_{} = {}",
                j + 1,
                bar.a[j],
                j + 1,
                bar.b[j]
            )));
        }
        let mut x = bar.a.clone();
        x.extend_from_slice(&bar.b);
        out.push(x, bar.sign as f64)?;
    }
    Ok(out)
}

/// Mixup triples `(b, d', d)` with `b <= d' <= d`; triples with `d' = d` vanish.
pub fn from_mixup(triples: &[[f64; 3]]) -> Result<SignedDiagram> {
    let mut out = SignedDiagram::new(PolyhedralPair::mixup());
    for (i, t) in triples.iter().enumerate() {
        if !(t[0] <= t[1] && t[1] <= t[2]) {
            return Err(Error::InvalidBarcode(format!(
                "mixup triple {i} {t:?} violates b <= d' <= d"
            )));
        }
        out.push(t.to_vec(), 1.0)?;
    }
    Ok(out)
}

/// Reads `b,dprime,d` rows.
pub fn parse_mixup_csv(reader: impl Read) -> Result<SignedDiagram> {
    let mut out = SignedDiagram::new(PolyhedralPair::mixup());
    for (line, vals) in csv_rows(reader)? {
        let t: [f64; 3] = vals.as_slice().try_into().map_err(|_| Error::Parse {
            line,
            message: format!("expected 3 fields b,dprime,d, found {}", vals.len()),
        })?;
        let one = from_mixup(&[t]).map_err(|e| located(line, e))?;
        out.points.extend(one.points);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> PolyhedralPair {
        PolyhedralPair::persistence_plane()
    }

    #[test]
    fn csv_examples() {
        let d = SignedDiagram::parse("1,0,2\n".as_bytes(), DiagramFormat::Csv, &plane()).unwrap();
        assert_eq!(
            d.points(),
            &[DiagramPoint {
                coords: vec![0.0, 2.0],
                weight: 1.0
            }]
        );
        let p4 = PolyhedralPair::barcode_space(2).unwrap();
        let d = SignedDiagram::parse("-1,1,1,2,3".as_bytes(), DiagramFormat::Csv, &p4).unwrap();
        assert_eq!(d.points()[0].coords, vec![1.0, 1.0, 2.0, 3.0]);
        assert_eq!(d.points()[0].weight, -1.0);
        let err = SignedDiagram::parse("1,0,2\n1,3,1\n".as_bytes(), DiagramFormat::Csv, &plane()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = SignedDiagram::parse("1,0,2\n\n1,x,1\n".as_bytes(), DiagramFormat::Csv, &plane()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = SignedDiagram::parse("1,0\n".as_bytes(), DiagramFormat::Csv, &plane()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn jsonl_and_a_points() {
        let text = "{\"w\": 2, \"x\": [0, 1]}\n{\"w\": 1, \"x\": [3, 3]}\n";
        let d = SignedDiagram::parse(text.as_bytes(), DiagramFormat::Jsonl, &plane()).unwrap();
        assert_eq!(d.len(), 1);
        let err = SignedDiagram::parse("{\"w\": 1}\n".as_bytes(), DiagramFormat::Jsonl, &plane()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rectangles() {
        let bar = |a: &[f64], b: &[f64], sign| Bar {
            a: a.to_vec(),
            b: b.to_vec(),
            sign,
        };
        let d = from_rectangles(2, &[bar(&[0.0, 0.0], &[1.0, 2.0], 1)]).unwrap();
        assert_eq!(d.points()[0].coords, vec![0.0, 0.0, 1.0, 2.0]);
        let d = from_rectangles(2, &[bar(&[0.0, 1.0], &[0.0, 3.0], 1)]).unwrap();
        assert!(d.is_empty());
        let d = from_rectangles(1, &[bar(&[1.0], &[3.0], 1), bar(&[2.0], &[4.0], 1)]).unwrap();
        assert_eq!(d.pair(), &plane());
        assert_eq!(d.len(), 2);
        assert!(from_rectangles(1, &[bar(&[2.0], &[1.0], 1)]).is_err());
        assert!(from_rectangles(1, &[bar(&[1.0], &[2.0], 2)]).is_err());
        let json = r#"{"d": 1, "kind": "hook", "bars": [{"a": [0], "b": [2], "sign": -1}]}"#;
        let bc = SignedBarcode::from_json(json.as_bytes()).unwrap();
        assert_eq!(bc.kind, IntervalKind::Hook);
        assert_eq!(bc.to_diagram().unwrap().points()[0].weight, -1.0);
    }

    #[test]
    fn mixup() {
        let d = from_mixup(&[[0.2, 1.0, 3f64.sqrt()]]).unwrap();
        assert_eq!(d.points()[0].coords, vec![0.2, 1.0, 3f64.sqrt()]);
        assert!(from_mixup(&[[0.2, 1.5, 1.5]]).unwrap().is_empty());
        assert!(from_mixup(&[[1.0, 0.5, 2.0]]).is_err());
        let d = parse_mixup_csv("0,1,2\n0.2,1.5,1.5\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        let err = parse_mixup_csv("0,1,2\n1,0.5,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn parts_and_expansion() {
        let d = SignedDiagram::from_points(plane(), [(vec![0.0, 2.0], 2.0), (vec![1.0, 2.0], -1.0)]).unwrap();
        assert_eq!(d.positive_part().len(), 1);
        assert_eq!(d.negative_part().points()[0].weight, 1.0);
        assert_eq!(d.expand().unwrap().len(), 3);
        let half = SignedDiagram::from_points(plane(), [(vec![0.0, 2.0], 0.5)]).unwrap();
        assert!(matches!(half.expand(), Err(Error::NonIntegerWeight(_))));
        assert!((d.mass() - (2.0 * 2f64.sqrt() + 1.0 / 2f64.sqrt())).abs() < 1e-12);
    }
}
