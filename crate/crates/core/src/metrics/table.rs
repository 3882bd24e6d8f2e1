//! Grid emitter for evaluation reports: metrics x models over the
//! Tmin/Tmid/Tmax granularities, as CSV and as Markdown with per-column
//! maxima bolded.

use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct GridTable {
    pub title: String,
    metrics: Vec<String>,
    models: Vec<String>,
    // (metric, model) -> [Tmin, Tmid, Tmax]
    cells: BTreeMap<(usize, usize), [Option<f64>; 3]>,
}

impl GridTable {
    pub fn new(title: &str, metrics: Vec<String>, models: Vec<String>) -> GridTable {
        GridTable {
            title: title.to_string(),
            metrics,
            models,
            cells: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, metric: usize, model: usize, column: usize, value: f64) {
        assert!(metric < self.metrics.len() && model < self.models.len() && column < 3);
        self.cells.entry((metric, model)).or_insert([None; 3])[column] = Some(value);
    }

    fn cell(&self, metric: usize, model: usize, column: usize) -> Option<f64> {
        self.cells.get(&(metric, model)).and_then(|row| row[column])
    }

    /// Maximum per (metric, column) across models; these cells get marked.
    fn is_max(&self, metric: usize, model: usize, column: usize) -> bool {
        let Some(v) = self.cell(metric, model, column) else {
            return false;
        };
        self.models.iter().enumerate().all(|(other, _)| {
            self.cell(metric, other, column).map_or(true, |o| v >= o)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,model,Tmin,Tmid,Tmax\n");
        for (mi, metric) in self.metrics.iter().enumerate() {
            for (di, model) in self.models.iter().enumerate() {
                let cols: Vec<String> = (0..3)
                    .map(|c| {
                        self.cell(mi, di, c)
                            .map(|v| format!("{:.4}", v))
                            .unwrap_or_default()
                    })
                    .collect();
                out.push_str(&format!("{},{},{}\n", metric, model, cols.join(",")));
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (mi, metric) in self.metrics.iter().enumerate() {
            out.push_str(&format!("\n## {}\n\n", metric));
            out.push_str("| Model | Tmin | Tmid | Tmax |\n|---|---|---|---|\n");
            for (di, model) in self.models.iter().enumerate() {
                let cols: Vec<String> = (0..3)
                    .map(|c| match self.cell(mi, di, c) {
                        Some(v) if self.is_max(mi, di, c) => format!("**{:.4}**", v),
                        Some(v) => format!("{:.4}", v),
                        None => "–".to_string(),
                    })
                    .collect();
                out.push_str(&format!("| {} | {} |\n", model, cols.join(" | ")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_grid_structure() {
        let mut t = GridTable::new(
            "Eval",
            vec!["npmi".to_string()],
            vec!["baseline".to_string(), "proposed".to_string()],
        );
        t.set(0, 0, 0, 0.1);
        t.set(0, 1, 0, 0.3);
        t.set(0, 1, 2, 0.5);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "metric,model,Tmin,Tmid,Tmax");
        assert_eq!(lines.next().unwrap(), "npmi,baseline,0.1000,,");
        assert_eq!(lines.next().unwrap(), "npmi,proposed,0.3000,,0.5000");
    }

    #[test]
    fn markdown_bolds_column_maxima() {
        let mut t = GridTable::new(
            "Eval",
            vec!["alignment".to_string()],
            vec!["a".to_string(), "b".to_string()],
        );
        t.set(0, 0, 0, 0.2);
        t.set(0, 1, 0, 0.7);
        let md = t.to_markdown();
        assert!(md.contains("**0.7000**"));
        assert!(!md.contains("**0.2000**"));
    }
}
