//! Firm-year aggregation of topic assignments and year-industry demeaning.

use super::{FrequencyMatrix, OutcomeError, OutcomeKind, OutcomeVector};
use crate::corpus::PanelRow;
use ndarray::Array2;
use std::collections::{BTreeMap, BTreeSet};

/// Builds the f_{i,t,k} matrix. `assignments` maps topic id to its member
/// passage ids; `passage_firm_years` maps every slice passage (assigned or
/// not) to its firm-year, defining the denominators. Rows whose post count
/// falls below `threshold` are flagged excluded.
pub fn aggregate_frequencies(
    assignments: &BTreeMap<i64, BTreeSet<String>>,
    passage_firm_years: &BTreeMap<String, (String, i32)>,
    threshold: usize,
) -> Result<FrequencyMatrix, OutcomeError> {
    let mut post_count_of: BTreeMap<(String, i32), usize> = BTreeMap::new();
    for (firm, year) in passage_firm_years.values() {
        *post_count_of.entry((firm.clone(), *year)).or_insert(0) += 1;
    }
    let rows: Vec<(String, i32)> = post_count_of.keys().cloned().collect();
    let row_index: BTreeMap<(String, i32), usize> = rows
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let topic_ids: Vec<i64> = assignments.keys().copied().collect();

    let mut counts = Array2::<f64>::zeros((rows.len(), topic_ids.len()));
    for (col, topic_id) in topic_ids.iter().enumerate() {
        for passage_id in &assignments[topic_id] {
            let key = passage_firm_years
                .get(passage_id)
                .ok_or_else(|| OutcomeError::UnmappedPassage(passage_id.clone()))?;
            let row = row_index[&(key.0.clone(), key.1)];
            counts[[row, col]] += 1.0;
        }
    }

    let post_counts: Vec<usize> = rows.iter().map(|k| post_count_of[k]).collect();
    for (i, &total) in post_counts.iter().enumerate() {
        for j in 0..topic_ids.len() {
            counts[[i, j]] /= total as f64;
        }
    }
    let included: Vec<bool> = post_counts.iter().map(|&c| c >= threshold).collect();
    Ok(FrequencyMatrix {
        rows,
        topic_ids,
        values: counts,
        post_counts,
        threshold,
        included,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemeanDiagnostics {
    pub groups: usize,
    pub singleton_groups: usize,
}

/// Deviation of the outcome from its (year, industry) group mean; singleton
/// groups deviate by exactly zero and are counted in the diagnostics.
pub fn demean_by_year_industry(
    panel: &[PanelRow],
    kind: OutcomeKind,
) -> (OutcomeVector, DemeanDiagnostics) {
    let value_of = |r: &PanelRow| match kind {
        OutcomeKind::Roa => r.roa,
        OutcomeKind::Morale => r.morale,
    };
    let mut group_sums: BTreeMap<(i32, String), (f64, usize)> = BTreeMap::new();
    for row in panel {
        let entry = group_sums
            .entry((row.year, row.industry.clone()))
            .or_insert((0.0, 0));
        entry.0 += value_of(row);
        entry.1 += 1;
    }
    let values: Vec<f64> = panel
        .iter()
        .map(|row| {
            let (sum, count) = group_sums[&(row.year, row.industry.clone())];
            value_of(row) - sum / count as f64
        })
        .collect();
    let singleton_groups = group_sums.values().filter(|(_, c)| *c == 1).count();
    (
        OutcomeVector {
            values,
            kind,
            demeaned: true,
        },
        DemeanDiagnostics {
            groups: group_sums.len(),
            singleton_groups,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel_row(firm: &str, year: i32, industry: &str, roa: f64) -> PanelRow {
        PanelRow {
            firm_id: firm.to_string(),
            year,
            industry: industry.to_string(),
            roa,
            morale: 3.0,
            employees: 100,
        }
    }

    #[test]
    fn frequencies_from_counts() {
        // Firm f1/2020 has 10 posts, 4 in topic 0.
        let mut firm_years = BTreeMap::new();
        for i in 0..10 {
            firm_years.insert(format!("p{}", i), ("f1".to_string(), 2020));
        }
        let assignments = BTreeMap::from([(
            0i64,
            (0..4).map(|i| format!("p{}", i)).collect::<BTreeSet<_>>(),
        )]);
        let m = aggregate_frequencies(&assignments, &firm_years, 5).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert!((m.values[[0, 0]] - 0.4).abs() < 1e-12);
        assert!(m.included[0]);
    }

    #[test]
    fn soft_assignment_counts_once_per_topic() {
        let mut firm_years = BTreeMap::new();
        firm_years.insert("p0".to_string(), ("f1".to_string(), 2020));
        firm_years.insert("p1".to_string(), ("f1".to_string(), 2020));
        let both: BTreeSet<String> = BTreeSet::from(["p0".to_string()]);
        let assignments = BTreeMap::from([(0i64, both.clone()), (1i64, both)]);
        let m = aggregate_frequencies(&assignments, &firm_years, 1).unwrap();
        // p0 contributes 1 to each topic numerator over a denominator of 2.
        assert!((m.values[[0, 0]] - 0.5).abs() < 1e-12);
        assert!((m.values[[0, 1]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unmapped_member_is_an_error() {
        let firm_years = BTreeMap::from([("p0".to_string(), ("f1".to_string(), 2020))]);
        let assignments =
            BTreeMap::from([(0i64, BTreeSet::from(["ghost".to_string()]))]);
        assert!(matches!(
            aggregate_frequencies(&assignments, &firm_years, 1),
            Err(OutcomeError::UnmappedPassage(id)) if id == "ghost"
        ));
    }

    #[test]
    fn threshold_flags_rows() {
        let mut firm_years = BTreeMap::new();
        for i in 0..3 {
            firm_years.insert(format!("a{}", i), ("f1".to_string(), 2020));
        }
        firm_years.insert("b0".to_string(), ("f2".to_string(), 2020));
        let assignments = BTreeMap::from([(0i64, BTreeSet::new())]);
        let m = aggregate_frequencies(&assignments, &firm_years, 2).unwrap();
        assert_eq!(m.included, vec![true, false]);
    }

    #[test]
    fn demean_two_member_group() {
        let panel = vec![
            panel_row("a", 2020, "tech", 3.0),
            panel_row("b", 2020, "tech", 5.0),
        ];
        let (out, diag) = demean_by_year_industry(&panel, OutcomeKind::Roa);
        assert_eq!(out.values, vec![-1.0, 1.0]);
        assert_eq!(diag.singleton_groups, 0);
    }

    #[test]
    fn demean_singleton_is_zero() {
        let panel = vec![panel_row("a", 2020, "tech", 7.0)];
        let (out, diag) = demean_by_year_industry(&panel, OutcomeKind::Roa);
        assert_eq!(out.values, vec![0.0]);
        assert_eq!(diag.singleton_groups, 1);
    }

    #[test]
    fn demeaned_group_means_are_zero() {
        let mut panel = Vec::new();
        for (i, industry) in ["tech", "retail", "tech", "retail", "tech"].iter().enumerate() {
            panel.push(panel_row(&format!("f{}", i), 2020 + (i as i32 % 2), industry, i as f64 * 1.3));
        }
        let (out, _) = demean_by_year_industry(&panel, OutcomeKind::Roa);
        let mut group_sums: BTreeMap<(i32, &str), (f64, usize)> = BTreeMap::new();
        for (row, v) in panel.iter().zip(&out.values) {
            let e = group_sums.entry((row.year, row.industry.as_str())).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        for (sum, _) in group_sums.values() {
            assert!(sum.abs() < 1e-10);
        }
    }

    #[test]
    fn demean_invariant_to_group_constant() {
        let base = vec![
            panel_row("a", 2020, "tech", 1.0),
            panel_row("b", 2020, "tech", 4.0),
            panel_row("c", 2021, "tech", 2.0),
        ];
        let mut shifted = base.clone();
        for r in shifted.iter_mut().filter(|r| r.year == 2020) {
            r.roa += 100.0;
        }
        let (a, _) = demean_by_year_industry(&base, OutcomeKind::Roa);
        let (b, _) = demean_by_year_industry(&shifted, OutcomeKind::Roa);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
