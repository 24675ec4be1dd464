use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    #[default]
    None,
    MinMax,
    UnitNorm,
    Robust,
    Standard,
}

impl ScalerKind {
    pub const ALL: [ScalerKind; 5] = [
        ScalerKind::None,
        ScalerKind::MinMax,
        ScalerKind::UnitNorm,
        ScalerKind::Robust,
        ScalerKind::Standard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScalerKind::None => "none",
            ScalerKind::MinMax => "min_max",
            ScalerKind::UnitNorm => "unit_norm",
            ScalerKind::Robust => "robust",
            ScalerKind::Standard => "standard",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown scaler '{s}'")))
    }
}

/// Fitted per-feature affine transform `(x - shift) / scale`, or per-row
/// unit-norm scaling which needs no statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub kind: ScalerKind,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

fn nonzero(s: f64) -> f64 {
    if s.abs() < 1e-12 {
        1.0
    } else {
        s
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Scaler {
    pub fn fit(kind: ScalerKind, rows: &[&[f64]]) -> Scaler {
        let dims = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut shift = vec![0.0; dims];
        let mut scale = vec![1.0; dims];
        if matches!(kind, ScalerKind::None | ScalerKind::UnitNorm) || rows.is_empty() {
            return Scaler { kind, shift, scale };
        }
        let n = rows.len() as f64;
        for j in 0..dims {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            match kind {
                ScalerKind::MinMax => {
                    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    shift[j] = min;
                    scale[j] = nonzero(max - min);
                }
                ScalerKind::Standard => {
                    let mean = col.iter().sum::<f64>() / n;
                    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    shift[j] = mean;
                    scale[j] = nonzero(var.sqrt());
                }
                ScalerKind::Robust => {
                    let mut sorted = col;
                    sorted.sort_by(f64::total_cmp);
                    shift[j] = quantile(&sorted, 0.5);
                    scale[j] = nonzero(quantile(&sorted, 0.75) - quantile(&sorted, 0.25));
                }
                ScalerKind::None | ScalerKind::UnitNorm => unreachable!(),
            }
        }
        Scaler { kind, shift, scale }
    }

    pub fn transform_into(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.kind {
            ScalerKind::None => out.extend_from_slice(row),
            ScalerKind::UnitNorm => {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                let norm = if norm == 0.0 { 1.0 } else { norm };
                out.extend(row.iter().map(|v| v / norm));
            }
            _ => out.extend(
                row.iter()
                    .zip(self.shift.iter().zip(&self.scale))
                    .map(|(v, (s, k))| (v - s) / k),
            ),
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(row.len());
        self.transform_into(row, &mut out);
        out
    }
}
