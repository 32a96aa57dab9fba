//! Seeded k-means over encoded profiles, cluster characterization and
//! exemplar selection.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::profile::{decode_toxicity, Block, EncodedProfile, FeatureProfile, ToxicityLevel};
use super::vocab::KeywordVocabulary;
use super::FeatureError;
use crate::lang::LanguageTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    /// Largest centroid movement still counted as converged.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 3,
            seed: 0,
            tolerance: 1e-4,
            max_iter: 300,
        }
    }
}

/// The member of a cluster nearest its centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub id: String,
    pub toxicity_level: Option<ToxicityLevel>,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedKeyword {
    pub keyword: String,
    pub cluster_freq: f64,
    pub global_freq: f64,
    pub lift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFeatures {
    pub cluster: usize,
    pub size: usize,
    pub toxicity: BTreeMap<ToxicityLevel, usize>,
    pub tone: Vec<RankedKeyword>,
    pub language: Vec<RankedKeyword>,
    pub implied_sentiment: Vec<RankedKeyword>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub lang: LanguageTag,
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub inertia: f64,
    /// Within-cluster sum of squares after each centroid update.
    pub objective_history: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    pub exemplars: Vec<Exemplar>,
    #[serde(default)]
    pub top_features: Vec<ClusterFeatures>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid, lowest index on ties.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn plus_plus_init(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            rng.gen_range(0..n)
        };
        let c = points[pick].to_vec();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Gives every empty cluster the point farthest from its own centroid,
/// taken from a cluster that can spare it, and recenters on that point.
fn repair_empty(points: &[&[f64]], assign: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assign.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if sizes[assign[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assign[i]]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let i = far.expect("n >= k leaves a cluster with two members");
        assign[i] = empty;
        centroids[empty] = points[i].to_vec();
    }
}

fn means(points: &[&[f64]], assign: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assign) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        for x in s.iter_mut() {
            *x /= c as f64;
        }
    }
    sums
}

fn objective(points: &[&[f64]], assign: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points.iter().zip(assign).map(|(p, &a)| sq_dist(p, &centroids[a])).sum()
}

/// Fits k-means with k-means++ seeding and Lloyd iterations.
///
/// Iteration stops once an assignment pass changes nothing and the last
/// centroid update moved no centroid by `tolerance` or more, or after
/// `max_iter` updates.
pub fn fit_kmeans(lang: LanguageTag, encoded: &[EncodedProfile], cfg: &KMeansConfig) -> Result<ClusterModel, FeatureError> {
    if cfg.k == 0 {
        return Err(FeatureError::InvalidK(0));
    }
    if encoded.len() < cfg.k {
        return Err(FeatureError::TooFewPoints {
            points: encoded.len(),
            k: cfg.k,
        });
    }
    let dim = encoded[0].vector.len();
    let mut ids = HashSet::new();
    for e in encoded {
        if e.vector.len() != dim {
            return Err(FeatureError::Dimension {
                expected: dim,
                got: e.vector.len(),
            });
        }
        if !ids.insert(e.id.as_str()) {
            return Err(FeatureError::DuplicateId(e.id.clone()));
        }
    }

    let points: Vec<&[f64]> = encoded.iter().map(|e| e.vector.as_slice()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centroids = plus_plus_init(&points, cfg.k, &mut rng);
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    repair_empty(&points, &mut assign, &mut centroids);

    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let updated = means(&points, &assign, cfg.k, dim);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        history.push(objective(&points, &assign, &centroids));

        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        repair_empty(&points, &mut next, &mut centroids);
        let changed = next != assign;
        assign = next;
        if !changed && shift < cfg.tolerance {
            break;
        }
    }

    let inertia = objective(&points, &assign, &centroids);
    let exemplars = (0..cfg.k)
        .map(|c| {
            let mut best: Option<(&EncodedProfile, f64)> = None;
            for (e, &a) in encoded.iter().zip(&assign) {
                if a != c {
                    continue;
                }
                let d = sq_dist(&e.vector, &centroids[c]);
                let better = match best {
                    None => true,
                    Some((b, bd)) => d < bd || (d == bd && e.id < b.id),
                };
                if better {
                    best = Some((e, d));
                }
            }
            let (e, _) = best.expect("no cluster is empty after repair");
            Exemplar {
                id: e.id.clone(),
                toxicity_level: decode_toxicity(&e.vector),
                vector: e.vector.clone(),
            }
        })
        .collect();

    Ok(ClusterModel {
        lang,
        k: cfg.k,
        seed: cfg.seed,
        iterations,
        inertia,
        objective_history: history,
        centroids,
        assignments: encoded.iter().zip(&assign).map(|(e, &a)| (e.id.clone(), a)).collect(),
        exemplars,
        top_features: Vec::new(),
    })
}

impl ClusterModel {
    /// Nearest centroid, lowest index on ties.
    pub fn assign(&self, vector: &[f64]) -> Result<usize, FeatureError> {
        let dim = self.centroids[0].len();
        if vector.len() != dim {
            return Err(FeatureError::Dimension {
                expected: dim,
                got: vector.len(),
            });
        }
        Ok(nearest(vector, &self.centroids))
    }

    pub fn exemplar(&self, cluster: usize) -> Result<&Exemplar, FeatureError> {
        self.exemplars.get(cluster).ok_or(FeatureError::UnknownCluster {
            cluster,
            k: self.k,
        })
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in self.assignments.values() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Renumbers clusters: old cluster `c` becomes `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<ClusterModel, FeatureError> {
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..self.k).collect::<Vec<_>>() {
            return Err(FeatureError::Record {
                line: 0,
                message: format!("{perm:?} is not a permutation of 0..{}", self.k),
            });
        }
        let mut m = self.clone();
        for (old, &new) in perm.iter().enumerate() {
            m.centroids[new] = self.centroids[old].clone();
            m.exemplars[new] = self.exemplars[old].clone();
        }
        for c in m.assignments.values_mut() {
            *c = perm[*c];
        }
        for f in m.top_features.iter_mut() {
            f.cluster = perm[f.cluster];
        }
        m.top_features.sort_by_key(|f| f.cluster);
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let m: ClusterModel = serde_json::from_str(text).map_err(|e| FeatureError::Record {
            line: e.line(),
            message: e.to_string(),
        })?;
        if m.k == 0 || m.centroids.len() != m.k || m.exemplars.len() != m.k {
            return Err(FeatureError::Record {
                line: 0,
                message: "cluster model needs k centroids and k exemplars".into(),
            });
        }
        Ok(m)
    }
}

pub fn assign_cluster(model: &ClusterModel, encoded: &EncodedProfile) -> Result<usize, FeatureError> {
    model.assign(&encoded.vector)
}

const TOP_PER_BLOCK: usize = 4;

/// Per-cluster keywords ranked by how much more often they occur inside the
/// cluster than overall. Ties go to the higher within-cluster frequency,
/// then to vocabulary order. Only keywords present in the cluster are kept.
pub fn characterize_clusters(
    model: &ClusterModel,
    profiles: &[FeatureProfile],
    vocab: &KeywordVocabulary,
) -> Result<Vec<ClusterFeatures>, FeatureError> {
    let members: Vec<(&FeatureProfile, usize)> = profiles
        .iter()
        .filter_map(|p| model.assignments.get(&p.sentence_id).map(|&c| (p, c)))
        .collect();
    let total = members.len();
    // presence[block][p] = keyword indices of profile p in block
    let mut presence: Vec<Vec<Vec<usize>>> = Vec::new();
    for block in Block::ALL {
        let mut rows = Vec::with_capacity(total);
        for (p, _) in &members {
            let mut idx = p.block_indices(block, vocab)?;
            idx.sort_unstable();
            idx.dedup();
            rows.push(idx);
        }
        presence.push(rows);
    }

    let freq = |rows: &[&Vec<usize>]| -> Vec<f64> {
        let mut counts = vec![0usize; vocab.len()];
        for r in rows {
            for &i in r.iter() {
                counts[i] += 1;
            }
        }
        let n = rows.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    };

    let mut out = Vec::with_capacity(model.k);
    for c in 0..model.k {
        let in_cluster: Vec<usize> = (0..total).filter(|&i| members[i].1 == c).collect();
        let mut toxicity = BTreeMap::new();
        for &i in &in_cluster {
            *toxicity.entry(members[i].0.toxicity_level).or_insert(0) += 1;
        }
        let mut blocks = Vec::new();
        for rows in &presence {
            let global = freq(&rows.iter().collect::<Vec<_>>());
            let local = freq(&in_cluster.iter().map(|&i| &rows[i]).collect::<Vec<_>>());
            let mut ranked: Vec<usize> = (0..vocab.len()).filter(|&t| local[t] > 0.0).collect();
            ranked.sort_by(|&a, &b| {
                let la = local[a] - global[a];
                let lb = local[b] - global[b];
                lb.total_cmp(&la).then(local[b].total_cmp(&local[a])).then(a.cmp(&b))
            });
            blocks.push(
                ranked
                    .into_iter()
                    .take(TOP_PER_BLOCK)
                    .map(|t| RankedKeyword {
                        keyword: vocab.term(t).to_string(),
                        cluster_freq: local[t],
                        global_freq: global[t],
                        lift: local[t] - global[t],
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let implied_sentiment = blocks.pop().unwrap_or_default();
        let language = blocks.pop().unwrap_or_default();
        let tone = blocks.pop().unwrap_or_default();
        out.push(ClusterFeatures {
            cluster: c,
            size: in_cluster.len(),
            toxicity,
            tone,
            language,
            implied_sentiment,
        });
    }
    Ok(out)
}

/// Inertia of a fit for each k, same seed throughout.
pub fn sweep(
    lang: LanguageTag,
    encoded: &[EncodedProfile],
    ks: impl IntoIterator<Item = usize>,
    base: &KMeansConfig,
) -> Result<Vec<(usize, f64)>, FeatureError> {
    ks.into_iter()
        .map(|k| {
            let cfg = KMeansConfig { k, ..*base };
            fit_kmeans(lang, encoded, &cfg).map(|m| (k, m.inertia))
        })
        .collect()
}

/// Top-two principal axes by power iteration with deflation, for plotting.
/// Returns one `(pc1, pc2)` per input vector. Each axis is signed so that
/// its largest-magnitude coordinate is positive.
pub fn project_2d(vectors: &[Vec<f64>]) -> Vec<(f64, f64)> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors.len() as f64;
    let dim = vectors[0].len();
    let mean: Vec<f64> = (0..dim).map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for v in &centered {
        for a in 0..dim {
            if v[a] == 0.0 {
                continue;
            }
            for b in 0..dim {
                cov[a][b] += v[a] * v[b] / n;
            }
        }
    }
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for _ in 0..2 {
        let mut v: Vec<f64> = (0..dim).map(|j| 1.0 + j as f64 / dim as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let mut w: Vec<f64> = (0..dim).map(|a| cov[a].iter().zip(&v).map(|(c, x)| c * x).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                v = vec![0.0; dim];
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = w;
            lambda = norm;
            if delta < 1e-12 {
                break;
            }
        }
        if let Some(big) = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                cov[a][b] -= lambda * v[a] * v[b];
            }
        }
        axes.push(v);
    }
    centered
        .iter()
        .map(|v| {
            let dot = |axis: &Vec<f64>| v.iter().zip(axis).map(|(x, y)| x * y).sum::<f64>();
            (dot(&axes[0]), dot(&axes[1]))
        })
        .collect()
}
