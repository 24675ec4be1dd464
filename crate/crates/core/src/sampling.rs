//! Class balancing for training data: random under-sampling and SMOTE.

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::java::MethodId;
use crate::metrics::schema::is_one_hot_slot;
use crate::metrics::FeatureVector;
use crate::rng::rng_for;

pub const SYNTHETIC_PATH: &str = "<synthetic>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    None,
    Rus,
    Smote,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::None, SamplerKind::Rus, SamplerKind::Smote];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Rus => "rus",
            SamplerKind::Smote => "smote",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub seed: u64,
    pub smote_k: usize,
    /// Minority:majority ratio after balancing.
    pub target_ratio: f64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            kind: SamplerKind::None,
            seed: 0,
            smote_k: 5,
            target_ratio: 1.0,
        }
    }
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, seed: u64) -> Self {
        SamplerSpec {
            kind,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.smote_k < 1 {
            return Err(Error::config("smote_k must be at least 1"));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::config(format!(
                "target_ratio must be in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }

    pub fn apply(&self, train: &Dataset) -> Result<Dataset> {
        self.validate()?;
        match self.kind {
            SamplerKind::None => Ok(train.clone()),
            SamplerKind::Rus => random_undersample(train, self),
            SamplerKind::Smote => smote(train, self).map(|(d, _)| d),
        }
    }
}

/// (minority label, minority indices, majority indices).
fn split_classes(d: &Dataset) -> (bool, Vec<usize>, Vec<usize>) {
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| d.rows()[i].label);
    if pos.len() <= neg.len() {
        (true, pos, neg)
    } else {
        (false, neg, pos)
    }
}

pub fn random_undersample(train: &Dataset, spec: &SamplerSpec) -> Result<Dataset> {
    let (_, minority, majority) = split_classes(train);
    let keep = ((minority.len() as f64 / spec.target_ratio).round() as usize).min(majority.len());
    if keep == majority.len() {
        return Ok(train.clone());
    }
    let mut rng = rng_for(spec.seed, "rus", 0);
    let mut kept: Vec<usize> = sample(&mut rng, majority.len(), keep)
        .into_iter()
        .map(|j| majority[j])
        .collect();
    kept.extend(minority);
    kept.sort_unstable();
    Ok(train.subset(&kept))
}

/// Parentage of one synthetic row: indices into the input dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact k nearest neighbours of every point among `points` (self excluded),
/// ties broken by index.
pub fn nearest_neighbors(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(points[i], points[j]), j))
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dists.truncate(k);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// SMOTE over-sampling; returns the balanced set (input rows first, then
/// synthetics) and the parentage of each synthetic row.
pub fn smote(train: &Dataset, spec: &SamplerSpec) -> Result<(Dataset, Vec<SyntheticOrigin>)> {
    let (label, minority, majority) = split_classes(train);
    if minority.len() < 2 {
        return Err(Error::data(format!(
            "SMOTE needs at least 2 minority rows, found {}",
            minority.len()
        )));
    }
    let target = (majority.len() as f64 * spec.target_ratio).round() as usize;
    let needed = target.saturating_sub(minority.len());
    if needed == 0 {
        return Ok((train.clone(), Vec::new()));
    }
    let k = spec.smote_k.min(minority.len() - 1);
    let rows = train.rows();
    let points: Vec<&[f64]> = minority.iter().map(|&i| rows[i].values.as_slice()).collect();
    let neighbors = nearest_neighbors(&points, k);

    let mut rng = rng_for(spec.seed, "smote", 0);
    let mut out: Vec<FeatureVector> = rows.to_vec();
    let mut origins = Vec::with_capacity(needed);
    for s in 0..needed {
        let b = rng.gen_range(0..minority.len());
        let z = neighbors[b][rng.gen_range(0..k)];
        let gap: f64 = rng.gen();
        let x = &rows[minority[b]];
        let values = x
            .values
            .iter()
            .zip(points[z])
            .enumerate()
            .map(|(slot, (xv, zv))| {
                if is_one_hot_slot(slot) {
                    *xv
                } else {
                    xv + gap * (zv - xv)
                }
            })
            .collect();
        out.push(FeatureVector {
            id: MethodId {
                file_path: SYNTHETIC_PATH.to_string(),
                class_fqn: x.id.class_fqn.clone(),
                signature: format!("smote#{s}"),
            },
            values,
            label,
        });
        origins.push(SyntheticOrigin {
            base: minority[b],
            neighbor: minority[z],
            gap,
        });
    }
    Ok((Dataset::new(train.provenance.clone(), out)?, origins))
}
