//! CSV emitters for the outcome analyses: the per-topic coefficient table
//! (name, description, both outcomes with SEs and significance stars, N,
//! significant-threshold list) and JSON serialization handled by callers.

use super::TopicOutcomeRegressions;

/// Conventional stars: * 10%, ** 5%, *** 1%.
pub fn significance_stars(p_value: f64) -> &'static str {
    if p_value < 0.01 {
        "***"
    } else if p_value < 0.05 {
        "**"
    } else if p_value < 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone)]
pub struct PerTopicRow {
    pub topic_id: i64,
    pub topic_name: String,
    pub topic_description: String,
    pub regressions: TopicOutcomeRegressions,
    /// Coefficients reported at this threshold.
    pub report_threshold: usize,
}

impl PerTopicRow {
    /// Thresholds where both outcomes are jointly significant at 5%.
    pub fn joint_sig_thresholds(&self) -> Vec<usize> {
        self.regressions
            .by_threshold
            .iter()
            .filter(|(_, (roa, morale))| roa.p_value < 0.05 && morale.p_value < 0.05)
            .map(|(&thr, _)| thr)
            .collect()
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Emits the per-topic table. One row per topic; coefficient cells follow
/// the "beta (se)stars" convention.
pub fn per_topic_table_csv(rows: &[PerTopicRow]) -> String {
    let mut out = String::from(
        "topic_id,topic_name,topic_description,roa_beta,roa_se,roa_stars,\
         morale_beta,morale_se,morale_stars,n_posts,sig_thresholds_5pct\n",
    );
    for row in rows {
        let Some((roa, morale)) = row.regressions.by_threshold.get(&row.report_threshold) else {
            continue;
        };
        let joint = row
            .joint_sig_thresholds()
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4},{},{:.4},{:.4},{},{},{}\n",
            row.topic_id,
            csv_escape(&row.topic_name),
            csv_escape(&row.topic_description),
            roa.beta,
            roa.se,
            significance_stars(roa.p_value),
            morale.beta,
            morale.se,
            significance_stars(morale.p_value),
            row.regressions.n_posts,
            csv_escape(&joint),
        ));
    }
    out
}
