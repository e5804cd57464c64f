//! Curve serialization: CSV with header `param,x,y` and a JSON record with
//! nodes, boundary tangents and free-form metadata.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp2::{DiscreteCurve, HPoint};

/// Writes the nodes as CSV. Rust's `{}` float formatting is the shortest
/// representation that round-trips, so reading back is exact.
pub fn write_curve_csv<W: Write>(curve: &DiscreteCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "x", "y"])?;
    for (t, p) in curve.params().iter().zip(curve.nodes()) {
        w.write_record([t.to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed rows of a curve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRows {
    pub params: Vec<f64>,
    pub nodes: Vec<HPoint>,
}

#[derive(Deserialize)]
struct Row {
    param: f64,
    x: f64,
    y: f64,
}

pub fn read_curve_rows<R: Read>(input: R) -> Result<CurveRows> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["param", "x", "y"] {
        return Err(Error::Io(format!("expected header param,x,y, found {headers:?}")));
    }
    let mut params = Vec::new();
    let mut nodes = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        params.push(row.param);
        nodes.push(HPoint::new(row.x, row.y)?);
    }
    Ok(CurveRows { params, nodes })
}

/// Reads a curve CSV; boundary tangents are taken from the finite-difference stencil.
pub fn read_curve_csv<R: Read>(input: R) -> Result<DiscreteCurve> {
    let rows = read_curve_rows(input)?;
    DiscreteCurve::new(rows.params, rows.nodes)
}

pub fn save_curve_csv(curve: &DiscreteCurve, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_curve_csv(curve, std::io::BufWriter::new(f))
}

pub fn load_curve_csv(path: &Path) -> Result<DiscreteCurve> {
    read_curve_csv(std::fs::File::open(path)?)
}

/// JSON form of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub params: Vec<f64>,
    pub nodes: Vec<[f64; 2]>,
    pub start_tangent: [f64; 2],
    pub end_tangent: [f64; 2],
    pub closed: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl CurveRecord {
    pub fn from_curve(curve: &DiscreteCurve, metadata: BTreeMap<String, serde_json::Value>) -> Self {
        let (a, b) = curve.boundary_tangents();
        CurveRecord {
            params: curve.params().to_vec(),
            nodes: curve.nodes().iter().map(|p| [p.x, p.y]).collect(),
            start_tangent: [a.vx, a.vy],
            end_tangent: [b.vx, b.vy],
            closed: curve.is_closed(),
            metadata,
        }
    }

    pub fn to_curve(&self) -> Result<DiscreteCurve> {
        let nodes = self.nodes.iter().map(|p| HPoint::new(p[0], p[1])).collect::<Result<Vec<_>>>()?;
        if self.closed {
            DiscreteCurve::closed(self.params.clone(), nodes)
        } else {
            DiscreteCurve::with_tangents(self.params.clone(), nodes, self.start_tangent, self.end_tangent)
        }
    }
}
