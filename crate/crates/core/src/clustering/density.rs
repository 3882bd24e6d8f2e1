//! Hierarchical density-based clustering with an outlier label.
//!
//! The classic pipeline: core distances -> mutual reachability -> minimum
//! spanning tree -> single-linkage hierarchy -> condensed tree (minimum
//! cluster size) -> excess-of-mass cluster selection. Points that never
//! join a selected cluster are labeled -1.
//!
//! Selection semantics are pinned for reproducibility: the root competes
//! only when no split ever produces two eligible sides, so a single tight
//! blob yields one cluster instead of all-noise. All tie-breaks favor lower
//! indices, making the labeling deterministic in the input order.

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("need at least min_cluster_size={min} points, got {got}")]
    InsufficientData { min: usize, got: usize },
    #[error("min_cluster_size must be at least 2, got {0}")]
    BadMinClusterSize(usize),
}

/// Flat labeling: `labels[i] >= 0` is a cluster id, -1 marks an outlier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabeling {
    pub labels: Vec<i64>,
    pub k: usize,
}

impl ClusterLabeling {
    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == -1).count()
    }

    pub fn cluster_members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster as i64)
            .map(|(i, _)| i)
            .collect()
    }
}

const LAMBDA_CAP: f64 = 1e12;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Density clustering with `min_samples` defaulting to `min_cluster_size`.
pub fn density_cluster(
    x: &Array2<f64>,
    min_cluster_size: usize,
) -> Result<ClusterLabeling, DensityError> {
    density_cluster_with(x, min_cluster_size, min_cluster_size)
}

pub fn density_cluster_with(
    x: &Array2<f64>,
    min_cluster_size: usize,
    min_samples: usize,
) -> Result<ClusterLabeling, DensityError> {
    if min_cluster_size < 2 {
        return Err(DensityError::BadMinClusterSize(min_cluster_size));
    }
    let n = x.nrows();
    if n < min_cluster_size {
        return Err(DensityError::InsufficientData {
            min: min_cluster_size,
            got: n,
        });
    }
    let min_samples = min_samples.clamp(1, n);

    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&rows[i], &rows[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    // Core distance: radius containing min_samples points including self.
    let kth = min_samples.saturating_sub(1);
    let mut core = vec![0.0f64; n];
    for i in 0..n {
        if kth == 0 {
            continue;
        }
        let mut neighbor_dists: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i][j]).collect();
        neighbor_dists.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        core[i] = neighbor_dists[(kth - 1).min(neighbor_dists.len() - 1)];
    }

    let mreach = |i: usize, j: usize| dist[i][j].max(core[i]).max(core[j]);

    // Prim's MST over mutual reachability.
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    in_tree[0] = true;
    for j in 1..n {
        best_dist[j] = mreach(0, j);
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_dist = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && best_dist[j] < pick_dist {
                pick = j;
                pick_dist = best_dist[j];
            }
        }
        edges.push((pick_dist, best_from[pick].min(pick), best_from[pick].max(pick)));
        in_tree[pick] = true;
        for j in 0..n {
            if !in_tree[j] {
                let d = mreach(pick, j);
                if d < best_dist[j] {
                    best_dist[j] = d;
                    best_from[j] = pick;
                }
            }
        }
    }
    edges.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    // Single-linkage tree: leaves 0..n, internal node n+t for edge t.
    let total_nodes = 2 * n - 1;
    let mut sl_children: Vec<Option<(usize, usize)>> = vec![None; total_nodes];
    let mut sl_dist = vec![0.0f64; total_nodes];
    let mut sl_size = vec![1usize; total_nodes];
    let mut uf_parent: Vec<usize> = (0..n).collect();
    let mut comp_node: Vec<usize> = (0..n).collect();
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
    for (t, &(w, u, v)) in edges.iter().enumerate() {
        let node = n + t;
        let ru = find(&mut uf_parent, u);
        let rv = find(&mut uf_parent, v);
        let (nu, nv) = (comp_node[ru], comp_node[rv]);
        sl_children[node] = Some((nu.min(nv), nu.max(nv)));
        sl_dist[node] = w;
        sl_size[node] = sl_size[nu] + sl_size[nv];
        uf_parent[rv] = ru;
        comp_node[ru] = node;
    }
    let sl_root = total_nodes - 1;

    // Condensed tree.
    struct Condensed {
        parent: Option<usize>,
        children: Vec<usize>,
        birth_lambda: f64,
        stability: f64,
        remaining: usize,
    }
    let lambda_of = |d: f64| if d <= 1.0 / LAMBDA_CAP { LAMBDA_CAP } else { 1.0 / d };
    let collect_points = |start: usize, sl_children: &Vec<Option<(usize, usize)>>| -> Vec<usize> {
        let mut points = Vec::new();
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            match sl_children[node] {
                None => points.push(node),
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        points
    };

    let mut clusters: Vec<Condensed> = vec![Condensed {
        parent: None,
        children: Vec::new(),
        birth_lambda: 0.0,
        stability: 0.0,
        remaining: n,
    }];
    let mut exit_node = vec![0usize; n];
    let mut exit_recorded = vec![false; n];

    // (single-linkage node, condensed cluster id)
    let mut stack: Vec<(usize, usize)> = vec![(sl_root, 0)];
    while let Some((node, cluster)) = stack.pop() {
        let Some((l, r)) = sl_children[node] else {
            // A bare leaf can only be the root when n == 1; excluded above.
            continue;
        };
        let lambda = lambda_of(sl_dist[node]);
        let l_big = sl_size[l] >= min_cluster_size;
        let r_big = sl_size[r] >= min_cluster_size;
        if l_big && r_big {
            let fall = clusters[cluster].remaining;
            let birth = clusters[cluster].birth_lambda;
            clusters[cluster].stability += fall as f64 * (lambda - birth);
            clusters[cluster].remaining = 0;
            for side in [l, r] {
                let child_id = clusters.len();
                clusters.push(Condensed {
                    parent: Some(cluster),
                    children: Vec::new(),
                    birth_lambda: lambda,
                    stability: 0.0,
                    remaining: sl_size[side],
                });
                clusters[cluster].children.push(child_id);
                stack.push((side, child_id));
            }
        } else if l_big || r_big {
            let (keep, drop) = if l_big { (l, r) } else { (r, l) };
            let dropped = collect_points(drop, &sl_children);
            let birth = clusters[cluster].birth_lambda;
            clusters[cluster].stability += dropped.len() as f64 * (lambda - birth);
            clusters[cluster].remaining -= dropped.len();
            for p in dropped {
                exit_node[p] = cluster;
                exit_recorded[p] = true;
            }
            stack.push((keep, cluster));
        } else {
            let birth = clusters[cluster].birth_lambda;
            let fall = clusters[cluster].remaining;
            clusters[cluster].stability += fall as f64 * (lambda - birth);
            clusters[cluster].remaining = 0;
            for p in collect_points(node, &sl_children) {
                exit_node[p] = cluster;
                exit_recorded[p] = true;
            }
        }
    }
    debug_assert!(exit_recorded.iter().all(|&r| r));

    // Excess-of-mass selection over non-root clusters, processed bottom-up.
    let m = clusters.len();
    let mut selected = vec![false; m];
    let mut score = vec![0.0f64; m];
    for id in (1..m).rev() {
        // Children have larger ids than their parent by construction.
        if clusters[id].children.is_empty() {
            score[id] = clusters[id].stability;
            selected[id] = true;
        } else {
            let child_sum: f64 = clusters[id].children.iter().map(|&c| score[c]).sum();
            if clusters[id].stability >= child_sum {
                score[id] = clusters[id].stability;
                selected[id] = true;
                let mut to_clear: Vec<usize> = clusters[id].children.clone();
                while let Some(c) = to_clear.pop() {
                    selected[c] = false;
                    to_clear.extend(clusters[c].children.iter().copied());
                }
            } else {
                score[id] = child_sum;
            }
        }
    }
    if m == 1 {
        // No eligible split anywhere: the whole input is one cluster.
        selected[0] = true;
    }

    // Label each point by the nearest selected ancestor of its exit cluster.
    let mut raw_labels = vec![-1i64; n];
    for p in 0..n {
        let mut cur = Some(exit_node[p]);
        while let Some(c) = cur {
            if selected[c] {
                raw_labels[p] = c as i64;
                break;
            }
            cur = clusters[c].parent;
        }
    }

    // Contiguous ids ordered by each cluster's smallest member index.
    let mut label_order: Vec<i64> = Vec::new();
    for p in 0..n {
        let l = raw_labels[p];
        if l >= 0 && !label_order.contains(&l) {
            label_order.push(l);
        }
    }
    let mut labels = vec![-1i64; n];
    for p in 0..n {
        if raw_labels[p] >= 0 {
            let idx = label_order.iter().position(|&l| l == raw_labels[p]).unwrap();
            labels[p] = idx as i64;
        }
    }
    Ok(ClusterLabeling {
        labels,
        k: label_order.len(),
    })
}
