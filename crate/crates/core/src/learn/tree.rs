//! CART classification trees with sample weights.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity of a node with weighted class totals `neg`, `pos`.
    pub fn impurity(self, neg: f64, pos: f64) -> f64 {
        let total = neg + pos;
        if total <= 0.0 {
            return 0.0;
        }
        let p = pos / total;
        let q = neg / total;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Log2,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Log2 => (n_features as f64).log2().floor() as usize,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Exhaustive midpoint thresholds.
    Best,
    /// One uniform threshold per candidate feature.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub splitter: Splitter,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            splitter: Splitter::Best,
        }
    }
}

/// Minimum weighted impurity decrease for a split to count.
pub const MIN_GAIN: f64 = 1e-12;

/// Flat tree: node `i` is a leaf when `feature[i] < 0`; otherwise rows with
/// `x[feature] <= threshold` go to `left[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    /// Weighted positive fraction at the node.
    pub value: Vec<f64>,
    /// Weighted impurity decrease credited to the split feature.
    pub gain: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// `W·I(parent) − W_L·I(left) − W_R·I(right)` with weighted totals.
    pub gain: f64,
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [bool],
    w: &'a [f64],
    params: &'a TreeParams,
    n_features: usize,
    tree: Tree,
}

fn class_totals(y: &[bool], w: &[f64], rows: &[usize]) -> (f64, f64) {
    let mut neg = 0.0;
    let mut pos = 0.0;
    for &i in rows {
        if y[i] {
            pos += w[i];
        } else {
            neg += w[i];
        }
    }
    (neg, pos)
}

/// Best midpoint split of `rows` on `feature`. Candidates are scanned in
/// ascending threshold order and only a strictly larger gain replaces the
/// incumbent.
pub fn best_threshold(
    x: &[&[f64]],
    y: &[bool],
    w: &[f64],
    rows: &[usize],
    feature: usize,
    criterion: Criterion,
    min_leaf: usize,
) -> Option<SplitChoice> {
    let mut order: Vec<usize> = rows.to_vec();
    order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let (neg, pos) = class_totals(y, w, rows);
    let parent = (neg + pos) * criterion.impurity(neg, pos);
    let (mut ln, mut lp) = (0.0, 0.0);
    let mut best: Option<SplitChoice> = None;
    for k in 0..order.len() - 1 {
        let i = order[k];
        if y[i] {
            lp += w[i];
        } else {
            ln += w[i];
        }
        let here = x[i][feature];
        let next = x[order[k + 1]][feature];
        if here == next {
            continue;
        }
        let left_count = k + 1;
        if left_count < min_leaf || order.len() - left_count < min_leaf {
            continue;
        }
        let (rn, rp) = (neg - ln, pos - lp);
        let gain = parent
            - (ln + lp) * criterion.impurity(ln, lp)
            - (rn + rp) * criterion.impurity(rn, rp);
        if best.map_or(true, |b| gain > b.gain) {
            let mut threshold = here + (next - here) / 2.0;
            if threshold >= next {
                threshold = here;
            }
            best = Some(SplitChoice {
                feature,
                threshold,
                gain,
            });
        }
    }
    best
}

/// Gain of splitting `rows` at a fixed threshold, if both sides satisfy
/// `min_leaf`.
pub fn threshold_gain(
    x: &[&[f64]],
    y: &[bool],
    w: &[f64],
    rows: &[usize],
    feature: usize,
    threshold: f64,
    criterion: Criterion,
    min_leaf: usize,
) -> Option<f64> {
    let (neg, pos) = class_totals(y, w, rows);
    let (mut ln, mut lp, mut count) = (0.0, 0.0, 0usize);
    for &i in rows {
        if x[i][feature] <= threshold {
            count += 1;
            if y[i] {
                lp += w[i];
            } else {
                ln += w[i];
            }
        }
    }
    if count < min_leaf || rows.len() - count < min_leaf || count == 0 || count == rows.len() {
        return None;
    }
    let (rn, rp) = (neg - ln, pos - lp);
    Some(
        (neg + pos) * criterion.impurity(neg, pos)
            - (ln + lp) * criterion.impurity(ln, lp)
            - (rn + rp) * criterion.impurity(rn, rp),
    )
}

impl Builder<'_> {
    fn push_leaf(&mut self, value: f64) -> usize {
        let t = &mut self.tree;
        t.feature.push(-1);
        t.threshold.push(0.0);
        t.left.push(0);
        t.right.push(0);
        t.value.push(value);
        t.gain.push(0.0);
        t.feature.len() - 1
    }

    /// Features in visiting order: all of them in index order, or a random
    /// permutation when only a subset is evaluated per node.
    fn visiting_order(&self, rng: &mut Rng) -> (Vec<usize>, usize) {
        let k = self.params.max_features.count(self.n_features);
        if k >= self.n_features {
            return ((0..self.n_features).collect(), self.n_features);
        }
        (sample(rng, self.n_features, self.n_features).into_vec(), k)
    }

    /// Evaluates features until `max_features` non-constant ones have been
    /// seen, continuing past that budget while no valid split exists. Equal
    /// gains resolve to the lower feature index.
    fn find_split(&self, rows: &[usize], rng: &mut Rng) -> Option<SplitChoice> {
        let min_leaf = self.params.min_samples_leaf;
        let (order, budget) = self.visiting_order(rng);
        let mut best: Option<SplitChoice> = None;
        let mut visited = 0;
        for f in order {
            if visited >= budget && best.is_some_and(|b| b.gain > MIN_GAIN) {
                break;
            }
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &i| {
                (a.0.min(self.x[i][f]), a.1.max(self.x[i][f]))
            });
            if lo >= hi {
                continue;
            }
            visited += 1;
            let choice = match self.params.splitter {
                Splitter::Best => best_threshold(
                    self.x,
                    self.y,
                    self.w,
                    rows,
                    f,
                    self.params.criterion,
                    min_leaf,
                ),
                Splitter::Random => {
                    let t = rng.gen_range(lo..hi);
                    threshold_gain(self.x, self.y, self.w, rows, f, t, self.params.criterion, min_leaf)
                        .map(|gain| SplitChoice {
                            feature: f,
                            threshold: t,
                            gain,
                        })
                }
            };
            if let Some(c) = choice {
                let better = match best {
                    None => true,
                    Some(b) => c.gain > b.gain || (c.gain == b.gain && c.feature < b.feature),
                };
                if better {
                    best = Some(c);
                }
            }
        }
        best.filter(|b| b.gain > MIN_GAIN)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let (neg, pos) = class_totals(self.y, self.w, &rows);
        let value = if neg + pos > 0.0 { pos / (neg + pos) } else { 0.0 };
        let stop = neg <= 0.0
            || pos <= 0.0
            || rows.len() < self.params.min_samples_split
            || rows.len() < 2 * self.params.min_samples_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return self.push_leaf(value);
        }
        let Some(split) = self.find_split(&rows, rng) else {
            return self.push_leaf(value);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let id = self.push_leaf(value);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        let t = &mut self.tree;
        t.feature[id] = split.feature as i32;
        t.threshold[id] = split.threshold;
        t.left[id] = left as u32;
        t.right[id] = right as u32;
        t.gain[id] = split.gain;
        id
    }
}

impl Tree {
    /// Grow a tree on the rows with positive weight.
    pub fn fit(x: &[&[f64]], y: &[bool], w: &[f64], params: &TreeParams, rng: &mut Rng) -> Tree {
        let n_features = x.first().map(|r| r.len()).unwrap_or(0);
        let mut b = Builder {
            x,
            y,
            w,
            params,
            n_features,
            tree: Tree {
                feature: Vec::new(),
                threshold: Vec::new(),
                left: Vec::new(),
                right: Vec::new(),
                value: Vec::new(),
                gain: Vec::new(),
            },
        };
        let rows: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
        b.grow(rows, 0, rng);
        b.tree
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        while self.feature[i] >= 0 {
            i = if row[self.feature[i] as usize] <= self.threshold[i] {
                self.left[i]
            } else {
                self.right[i]
            } as usize;
        }
        self.value[i]
    }

    pub fn node_count(&self) -> usize {
        self.feature.len()
    }

    pub fn depth(&self) -> usize {
        fn d(t: &Tree, i: usize) -> usize {
            if t.feature[i] < 0 {
                0
            } else {
                1 + d(t, t.left[i] as usize).max(d(t, t.right[i] as usize))
            }
        }
        d(self, 0)
    }

    /// Impurity decrease per feature, normalised to sum to 1 (all zeros when
    /// the tree is a single leaf).
    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut imp = vec![0.0; n_features];
        for (i, &f) in self.feature.iter().enumerate() {
            if f >= 0 {
                imp[f as usize] += self.gain[i];
            }
        }
        normalize(&mut imp);
        imp
    }
}

pub fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
}
