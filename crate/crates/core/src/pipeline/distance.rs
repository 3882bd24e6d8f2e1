//! Multi-view topic representations and the stance-gated integration
//! distance.
//!
//! The overall distance between topics i and j is
//!
//! ```text
//! d[i][j] = d_meaning[i][j] - (1 - s_stance[i][j]) * H[i][j]
//! H[i][j] = 1  iff  d_meaning[i][j] <= tau_meaning
//! ```
//!
//! where `s_stance` is the judge's stance-distinctness score normalized to
//! [0, 1]: 1 means the pair expresses clearly opposing positions, 0 means
//! the stances coincide. Inside the tau gate, stance-aligned pairs (s near
//! 0) are pulled closer by up to 1 while opposing pairs keep their semantic
//! distance, so merges order as: close-and-aligned, then
//! close-but-opposing, then semantically distant.

use super::PipelineError;
use crate::embedding::cosine_distance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrationDistance {
    pub d_meaning: Vec<Vec<f64>>,
    /// Stance distinctness in [0, 1]; symmetric; 1 = clearly opposing.
    pub s_stance: Vec<Vec<f64>>,
    /// False where the judge was skipped (H = 0) and s defaulted to 1.
    pub stance_evaluated: Vec<Vec<bool>>,
    pub tau_meaning: f64,
    pub d_overall: Vec<Vec<f64>>,
}

/// Weighted multi-view representation: name, description, and mean member
/// embedding, all in the same (reduced) space.
pub fn topic_representation(
    name_vec: &[f64],
    description_vec: &[f64],
    member_vecs: &[Vec<f64>],
    weights: (f64, f64, f64),
) -> Result<Vec<f64>, PipelineError> {
    let (w_name, w_desc, w_docs) = weights;
    if w_name < 0.0 || w_desc < 0.0 || w_docs < 0.0 {
        return Err(PipelineError::BadWeights);
    }
    if ((w_name + w_desc + w_docs) - 1.0).abs() > 1e-9 {
        return Err(PipelineError::BadWeights);
    }
    if member_vecs.is_empty() {
        return Err(PipelineError::EmptyTopic(-1));
    }
    let d = name_vec.len();
    let mut member_mean = vec![0.0; d];
    for m in member_vecs {
        for (acc, v) in member_mean.iter_mut().zip(m) {
            *acc += v;
        }
    }
    for v in &mut member_mean {
        *v /= member_vecs.len() as f64;
    }
    Ok((0..d)
        .map(|i| w_name * name_vec[i] + w_desc * description_vec[i] + w_docs * member_mean[i])
        .collect())
}

/// Empirical lower quantile with linear interpolation between order
/// statistics (the common "linear" convention).
fn lower_quantile(values: &[f64], q: f64) -> Result<f64, PipelineError> {
    if values.is_empty() {
        return Err(PipelineError::QuantileOfEmpty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return Ok(sorted[lo]);
    }
    let frac = pos - lo as f64;
    Ok(sorted[lo] * (1.0 - frac) + sorted[hi] * frac)
}

/// Builds the full integration distance. `stance_judge(i, j)` returns the
/// normalized stance-distinctness score for the ordered pair; it is invoked
/// only for pairs inside the tau gate, in both orders, and averaged.
pub fn integration_distance(
    representations: &[Vec<f64>],
    tau_quantile: f64,
    mut stance_judge: impl FnMut(usize, usize) -> Result<f64, PipelineError>,
) -> Result<IntegrationDistance, PipelineError> {
    let k = representations.len();
    if k < 2 {
        return Err(PipelineError::TooFewTopicsForDistance(k));
    }
    assert!(
        tau_quantile > 0.0 && tau_quantile < 1.0,
        "tau_quantile must be in (0, 1)"
    );

    let mut d_meaning = vec![vec![0.0; k]; k];
    let mut off_diagonal = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let d = cosine_distance(&representations[i], &representations[j])?;
            d_meaning[i][j] = d;
            d_meaning[j][i] = d;
            off_diagonal.push(d);
        }
    }
    let tau_meaning = lower_quantile(&off_diagonal, tau_quantile)?;

    let mut s_stance = vec![vec![1.0; k]; k];
    let mut stance_evaluated = vec![vec![false; k]; k];
    let mut d_overall = vec![vec![0.0; k]; k];
    for i in 0..k {
        s_stance[i][i] = 0.0;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let gated = d_meaning[i][j] <= tau_meaning;
            let s = if gated {
                let forward = stance_judge(i, j)?;
                let backward = stance_judge(j, i)?;
                let s = (forward + backward) / 2.0;
                stance_evaluated[i][j] = true;
                stance_evaluated[j][i] = true;
                s
            } else {
                1.0
            };
            s_stance[i][j] = s;
            s_stance[j][i] = s;
            let h = if gated { 1.0 } else { 0.0 };
            let d = d_meaning[i][j] - (1.0 - s) * h;
            d_overall[i][j] = d;
            d_overall[j][i] = d;
        }
    }

    Ok(IntegrationDistance {
        d_meaning,
        s_stance,
        stance_evaluated,
        tau_meaning,
        d_overall,
    })
}

impl IntegrationDistance {
    /// Ward input must be non-negative; the gate can push adjusted
    /// distances below zero, so shift all off-diagonal entries up by the
    /// most negative one. Rank order is preserved.
    pub fn shifted_for_linkage(&self) -> Vec<Vec<f64>> {
        let k = self.d_overall.len();
        let mut min_entry: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i != j && self.d_overall[i][j] < min_entry {
                    min_entry = self.d_overall[i][j];
                }
            }
        }
        let shift = -min_entry;
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    out[i][j] = self.d_overall[i][j] + shift;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCountGrid {
    pub t_min: usize,
    pub t_mid: usize,
    pub t_max: usize,
}

/// Integration granularities from five equal bins of [1, k]: the upper
/// edges of bins 1 and 3 (rounded down) plus the original count.
pub fn topic_count_grid(k_original: usize) -> Result<TopicCountGrid, PipelineError> {
    if k_original < 5 {
        return Err(PipelineError::TooFewTopics(k_original));
    }
    Ok(TopicCountGrid {
        t_min: (k_original / 5).max(1),
        t_mid: (3 * k_original) / 5,
        t_max: k_original,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representation_weight_anchors() {
        let name = vec![1.0, 0.0];
        let desc = vec![0.0, 1.0];
        let members = vec![vec![0.5, 0.5], vec![1.5, 0.5]];
        // (1,0,0): exactly the name embedding.
        assert_eq!(
            topic_representation(&name, &desc, &members, (1.0, 0.0, 0.0)).unwrap(),
            name
        );
        // (0,0,1) with a single member: that member's embedding.
        assert_eq!(
            topic_representation(&name, &desc, &members[..1], (0.0, 0.0, 1.0)).unwrap(),
            members[0]
        );
        // Equal thirds: hand-computed average.
        let r = topic_representation(&name, &desc, &members, (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))
            .unwrap();
        assert!((r[0] - (1.0 + 0.0 + 1.0) / 3.0).abs() < 1e-12);
        assert!((r[1] - (0.0 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bad_weights_rejected() {
        let v = vec![1.0, 0.0];
        let members = vec![vec![1.0, 0.0]];
        assert!(matches!(
            topic_representation(&v, &v, &members, (0.5, 0.6, 0.1)),
            Err(PipelineError::BadWeights)
        ));
        assert!(matches!(
            topic_representation(&v, &v, &members, (-0.5, 1.0, 0.5)),
            Err(PipelineError::BadWeights)
        ));
    }

    #[test]
    fn grid_anchors() {
        let g = topic_count_grid(100).unwrap();
        assert_eq!((g.t_min, g.t_mid, g.t_max), (20, 60, 100));
        let g = topic_count_grid(5).unwrap();
        assert_eq!((g.t_min, g.t_mid, g.t_max), (1, 3, 5));
        assert!(matches!(
            topic_count_grid(4),
            Err(PipelineError::TooFewTopics(4))
        ));
    }

    #[test]
    fn formula_cases() {
        // Three well-separated directions plus one close pair.
        let reps = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.999, 0.01, 0.0], // close to topic 0
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        // Stance judge: pair (0,1) clearly opposing.
        let dist = integration_distance(&reps, 0.2, |i, j| {
            Ok(if (i, j) == (0, 1) || (i, j) == (1, 0) { 1.0 } else { 0.5 })
        })
        .unwrap();
        // Gated pair with s = 1: unchanged distance.
        assert!(dist.d_meaning[0][1] <= dist.tau_meaning);
        assert!((dist.d_overall[0][1] - dist.d_meaning[0][1]).abs() < 1e-15);
        // Ungated pairs: H = 0, distance unchanged, s defaulted to 1.
        assert!(dist.d_meaning[0][2] > dist.tau_meaning);
        assert_eq!(dist.d_overall[0][2], dist.d_meaning[0][2]);
        assert!(!dist.stance_evaluated[0][2]);
        assert_eq!(dist.s_stance[0][2], 1.0);
    }

    #[test]
    fn aligned_gated_pair_pulled_closer() {
        let reps = vec![
            vec![1.0, 0.0],
            vec![0.999, 0.01],
            vec![0.0, 1.0],
        ];
        let dist = integration_distance(&reps, 0.4, |_, _| Ok(0.0)).unwrap();
        // s = 0 (same stance): d_overall = d_meaning - 1.
        assert!((dist.d_overall[0][1] - (dist.d_meaning[0][1] - 1.0)).abs() < 1e-15);
        assert!(dist.d_overall[0][1] < 0.0, "adjustment can go negative");
        // The shift restores non-negativity and keeps the diagonal at zero.
        let shifted = dist.shifted_for_linkage();
        assert!(shifted.iter().flatten().all(|&v| v >= 0.0));
        assert_eq!(shifted[0][0], 0.0);
    }

    #[test]
    fn stance_judge_symmetrized_by_averaging() {
        let reps = vec![vec![1.0, 0.0], vec![0.999, 0.01], vec![0.0, 1.0]];
        let dist = integration_distance(&reps, 0.4, |i, j| {
            Ok(if i < j { 0.2 } else { 0.6 })
        })
        .unwrap();
        assert!((dist.s_stance[0][1] - 0.4).abs() < 1e-15);
        assert_eq!(dist.s_stance[0][1], dist.s_stance[1][0]);
    }
}
