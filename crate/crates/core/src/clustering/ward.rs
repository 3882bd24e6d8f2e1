//! Agglomerative clustering with the Ward criterion over a precomputed
//! dissimilarity matrix.
//!
//! Distances between merged clusters follow the Lance-Williams recurrence in
//! its square-combined form, which tolerates non-Euclidean inputs. Each step
//! merges the globally closest active pair; ties break toward the smallest
//! (i, j) in lexicographic order, which pins the dendrogram for testing.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WardError {
    #[error("distance matrix is not square")]
    NotSquare,
    #[error("distance matrix invalid at ({i}, {j}): {reason}")]
    InvalidMatrix { i: usize, j: usize, reason: String },
    #[error("n_clusters {requested} out of range [1, {max}]")]
    BadClusterCount { requested: usize, max: usize },
}

/// One merge step: cluster ids follow the scipy convention, where original
/// observations are 0..k and step `s` creates cluster id `k + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct Linkage {
    pub steps: Vec<MergeStep>,
    pub n_observations: usize,
}

fn validate_matrix(d: &[Vec<f64>]) -> Result<usize, WardError> {
    let k = d.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != k {
            return Err(WardError::NotSquare);
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(WardError::InvalidMatrix {
                    i,
                    j,
                    reason: "non-finite entry".to_string(),
                });
            }
            if i == j && v != 0.0 {
                return Err(WardError::InvalidMatrix {
                    i,
                    j,
                    reason: "non-zero diagonal".to_string(),
                });
            }
            if (v - d[j][i]).abs() > 1e-9 {
                return Err(WardError::InvalidMatrix {
                    i,
                    j,
                    reason: "asymmetric entry".to_string(),
                });
            }
        }
    }
    Ok(k)
}

/// Builds the full Ward linkage for a k x k dissimilarity matrix.
pub fn ward_linkage(d: &[Vec<f64>]) -> Result<Linkage, WardError> {
    let k = validate_matrix(d)?;
    let mut dist: Vec<Vec<f64>> = d.to_vec();
    // active[i] = Some(cluster id, size); matrix rows stay in place.
    let mut cluster_id: Vec<usize> = (0..k).collect();
    let mut size: Vec<usize> = vec![1; k];
    let mut active: Vec<bool> = vec![true; k];
    let mut steps = Vec::with_capacity(k.saturating_sub(1));

    for step in 0..k.saturating_sub(1) {
        // Globally closest active pair, smallest (i, j) on ties.
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..k {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..k {
                if !active[j] {
                    continue;
                }
                let v = dist[i][j];
                match best {
                    None => best = Some((i, j, v)),
                    Some((_, _, bv)) if v < bv => best = Some((i, j, v)),
                    _ => {}
                }
            }
        }
        let (i, j, merge_dist) = best.expect("at least two active clusters remain");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        let merged_size = size[i] + size[j];

        // Lance-Williams (Ward): distances combine on squares.
        for h in 0..k {
            if !active[h] || h == i || h == j {
                continue;
            }
            let nh = size[h] as f64;
            let total = ni + nj + nh;
            let combined = ((ni + nh) * dist[h][i] * dist[h][i]
                + (nj + nh) * dist[h][j] * dist[h][j]
                - nh * merge_dist * merge_dist)
                / total;
            let new_dist = combined.max(0.0).sqrt();
            dist[h][i] = new_dist;
            dist[i][h] = new_dist;
        }

        steps.push(MergeStep {
            left: cluster_id[i].min(cluster_id[j]),
            right: cluster_id[i].max(cluster_id[j]),
            distance: merge_dist,
            size: merged_size,
        });
        // Row i carries the merged cluster; row j retires.
        cluster_id[i] = k + step;
        size[i] = merged_size;
        active[j] = false;
    }

    Ok(Linkage {
        steps,
        n_observations: k,
    })
}

impl Linkage {
    /// Merge distances are non-decreasing for the (reducible) Ward criterion.
    pub fn is_monotone(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].distance >= w[0].distance - 1e-12)
    }

    /// Cuts the dendrogram into `n_clusters` flat groups. Labels are
    /// contiguous 0..n_clusters-1, ordered by each group's smallest member.
    pub fn cut(&self, n_clusters: usize) -> Result<Vec<usize>, WardError> {
        let k = self.n_observations;
        if n_clusters < 1 || n_clusters > k {
            return Err(WardError::BadClusterCount {
                requested: n_clusters,
                max: k,
            });
        }
        let mut parent: Vec<usize> = (0..(k + self.steps.len())).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for (s, step) in self.steps.iter().take(k - n_clusters).enumerate() {
            let new_id = k + s;
            let a = find(&mut parent, step.left);
            let b = find(&mut parent, step.right);
            parent[a] = new_id;
            parent[b] = new_id;
        }
        let mut roots: Vec<usize> = (0..k).map(|i| find(&mut parent, i)).collect();
        let mut label_of_root = std::collections::BTreeMap::new();
        let mut next = 0usize;
        for r in &roots {
            label_of_root.entry(*r).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
        }
        for r in &mut roots {
            *r = label_of_root[r];
        }
        Ok(roots)
    }
}

/// Ward clustering of a dissimilarity matrix cut at `n_clusters` groups.
pub fn ward_cluster(d: &[Vec<f64>], n_clusters: usize) -> Result<Vec<usize>, WardError> {
    let linkage = ward_linkage(d)?;
    linkage.cut(n_clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(entries: &[(usize, usize, f64)], k: usize) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; k]; k];
        for &(i, j, v) in entries {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }

    #[test]
    fn close_pair_merges_first() {
        let d = matrix(&[(0, 1, 0.1), (0, 2, 5.0), (1, 2, 5.0)], 3);
        let labels = ward_cluster(&d, 2).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[0], labels[2]);
    }

    #[test]
    fn n_clusters_equal_k_is_identity() {
        let d = matrix(&[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)], 3);
        let labels = ward_cluster(&d, 3).unwrap();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn n_clusters_one_is_single_group() {
        let d = matrix(&[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)], 3);
        let labels = ward_cluster(&d, 1).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn asymmetry_rejected() {
        let mut d = matrix(&[(0, 1, 1.0)], 2);
        d[0][1] = 2.0;
        assert!(matches!(
            ward_cluster(&d, 1),
            Err(WardError::InvalidMatrix { .. })
        ));
    }

    #[test]
    fn nan_rejected() {
        let mut d = matrix(&[(0, 1, 1.0)], 2);
        d[0][1] = f64::NAN;
        d[1][0] = f64::NAN;
        assert!(matches!(
            ward_cluster(&d, 1),
            Err(WardError::InvalidMatrix { .. })
        ));
    }

    #[test]
    fn out_of_range_cluster_count_rejected() {
        let d = matrix(&[(0, 1, 1.0)], 2);
        assert!(matches!(
            ward_cluster(&d, 3),
            Err(WardError::BadClusterCount { .. })
        ));
        assert!(matches!(
            ward_cluster(&d, 0),
            Err(WardError::BadClusterCount { .. })
        ));
    }

    #[test]
    fn linkage_is_monotone_and_sizes_telescope() {
        let d = matrix(
            &[
                (0, 1, 0.5),
                (0, 2, 1.5),
                (0, 3, 4.0),
                (1, 2, 1.2),
                (1, 3, 3.5),
                (2, 3, 2.0),
            ],
            4,
        );
        let linkage = ward_linkage(&d).unwrap();
        assert!(linkage.is_monotone());
        assert_eq!(linkage.steps.last().unwrap().size, 4);
    }
}
