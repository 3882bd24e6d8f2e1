//! Maximal Marginal Relevance selection.
//!
//! Greedy trade-off between relevance to a centroid and redundancy among the
//! already-selected set: `lambda * sim(c, centroid) - (1 - lambda) * max_s
//! sim(c, s)`. The first pick is always the candidate most similar to the
//! centroid; ties break toward the lowest index.

use ndarray::Array2;

fn cosine_sim(a: &[f64], b: &[f64]) -> f64 {
    let na = crate::numeric::norm(a);
    let nb = crate::numeric::norm(b);
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    crate::numeric::dot(a, b) / (na * nb)
}

/// Selects `k` row indices from `candidates` (m x d). Panics if `k > m` or
/// `lambda` is outside [0, 1]; callers validate their inputs.
pub fn mmr_select(candidates: &Array2<f64>, centroid: &[f64], lambda: f64, k: usize) -> Vec<usize> {
    let m = candidates.nrows();
    assert!(m >= 1, "mmr_select requires at least one candidate");
    assert!(k <= m, "cannot select {} of {} candidates", k, m);
    assert!((0.0..=1.0).contains(&lambda), "lambda must be in [0, 1]");
    if k == 0 {
        return Vec::new();
    }

    let relevance: Vec<f64> = (0..m)
        .map(|i| cosine_sim(&candidates.row(i).to_vec(), centroid))
        .collect();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..m).collect();
    // max similarity of each remaining candidate to the selected set
    let mut max_sim_selected: Vec<f64> = vec![0.0; m];

    // First pick: pure relevance regardless of lambda.
    let first = *remaining
        .iter()
        .max_by(|&&a, &&b| {
            relevance[a]
                .partial_cmp(&relevance[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.cmp(&a)) // lower index wins ties
        })
        .unwrap();
    selected.push(first);
    remaining.retain(|&i| i != first);

    while selected.len() < k {
        let last = *selected.last().unwrap();
        let last_row = candidates.row(last).to_vec();
        for &i in &remaining {
            let s = cosine_sim(&candidates.row(i).to_vec(), &last_row);
            if s > max_sim_selected[i] {
                max_sim_selected[i] = s;
            }
        }
        let best = *remaining
            .iter()
            .max_by(|&&a, &&b| {
                let score_a = lambda * relevance[a] - (1.0 - lambda) * max_sim_selected[a];
                let score_b = lambda * relevance[b] - (1.0 - lambda) * max_sim_selected[b];
                score_a
                    .partial_cmp(&score_b)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a))
            })
            .unwrap();
        selected.push(best);
        remaining.retain(|&i| i != best);
    }
    selected
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> Array2<f64> {
        let n = rows.len();
        let d = rows[0].len();
        Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn lambda_one_is_pure_relevance_ranking() {
        let candidates = mat(vec![
            vec![1.0, 0.0],
            vec![0.9, 0.1],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ]);
        let centroid = [1.0, 0.0];
        let picked = mmr_select(&candidates, &centroid, 1.0, 3);
        // Pure relevance: rows sorted by cosine to centroid.
        assert_eq!(picked, vec![0, 1, 3]);
    }

    #[test]
    fn k_one_is_most_similar_regardless_of_lambda() {
        let candidates = mat(vec![vec![0.2, 0.8], vec![1.0, 0.1], vec![0.3, 0.3]]);
        let centroid = [1.0, 0.0];
        for lambda in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(mmr_select(&candidates, &centroid, lambda, 1), vec![1]);
        }
    }

    #[test]
    fn prefix_monotone_greedy_trace() {
        let candidates = mat(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.9, 0.1, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.1, 0.9, 0.2],
            vec![0.0, 0.0, 1.0],
            vec![0.4, 0.4, 0.4],
        ]);
        let centroid = [0.6, 0.5, 0.3];
        let two = mmr_select(&candidates, &centroid, 0.5, 2);
        let three = mmr_select(&candidates, &centroid, 0.5, 3);
        assert_eq!(three[..2], two[..]);
        let mut dedup = three.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), 3, "no repeated indices");
    }

    #[test]
    fn diversity_term_avoids_near_duplicates() {
        let candidates = mat(vec![
            vec![1.0, 0.0],
            vec![0.95, 0.05],
            vec![0.7, 0.7],
        ]);
        let centroid = [0.9, 0.3];
        let picked = mmr_select(&candidates, &centroid, 0.5, 2);
        assert_eq!(
            picked,
            vec![1, 2],
            "the near-duplicate of the first pick is skipped"
        );
    }
}
