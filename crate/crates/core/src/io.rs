//! JSON file formats shared by the command line and the fixtures.
//!
//! Numbers are written by `serde_json`, whose shortest round-trip float
//! formatting re-parses to the identical `f64`.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{Frame, Quaternion, UnitImaginary};
use crate::series::{EvalPoint, MultiSeries};

/// `{"q": [w, x, y, z], "z": [[x, y], …]}`.
///
/// With `q` present, `z` lists the variables other than the quaternionic
/// slot. Without it, `z` is a full grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Quaternion>,
    #[serde(default)]
    pub z: Vec<[f64; 2]>,
}

impl PointFile {
    pub fn zs(&self) -> Vec<Complex64> {
        self.z.iter().map(|&[x, y]| Complex64::new(x, y)).collect()
    }

    /// Evaluation point with the quaternionic value in `slot`.
    pub fn eval_point(&self, slot: usize, axis: UnitImaginary) -> Result<EvalPoint> {
        let q = self.q.ok_or_else(|| Error::Schema("point file needs \"q\" for a quaternionic slot".into()))?;
        if !q.is_finite() || self.z.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Schema("point coordinates must be finite".into()));
        }
        Ok(EvalPoint::new(slot, q, self.zs(), axis))
    }

    /// Full grid point `(x_1 + √-1 y_1, …)`; a `q` entry, if present, must
    /// lie in the `axis` slice and is inserted at `slot`.
    pub fn grid_point(&self, slot: usize, axis: UnitImaginary) -> Result<Vec<Complex64>> {
        let mut zs = self.zs();
        if let Some(q) = self.q {
            let (z, off) = axis.coordinates(q);
            if off > 1e-12 {
                return Err(Error::Schema(format!("q leaves the frame slice by {off:e}")));
            }
            if slot > zs.len() {
                return Err(Error::SlotOutOfRange { slot, n: zs.len() + 1 });
            }
            zs.insert(slot, z);
        }
        Ok(zs)
    }
}

/// Reads and parses a JSON file; I/O and parse failures are schema errors.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses JSON text, surfacing library errors raised during validation.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("in-memory values serialize")
}

pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value) + "\n").map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

pub fn load_series(path: &Path) -> Result<MultiSeries> {
    load(path)
}

pub fn load_frame(path: &Path) -> Result<Frame> {
    load(path)
}
