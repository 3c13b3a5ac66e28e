//! Summary tables: method rows, condition columns, mean metric cells.
//!
//! Each table renders to machine CSV and to an aligned text block whose
//! numeric values match the CSV digit for digit; the text version
//! additionally stars the best cell of every column.

#[derive(Debug, Clone)]
pub struct TableRow {
    pub label: String,
    /// Mean metric value per column; `None` when no utterance scored.
    pub cells: Vec<Option<f64>>,
    /// Mean over every scored utterance across all columns.
    pub average: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ResultsTable {
    pub metric: String,
    pub higher_is_better: bool,
    pub column_labels: Vec<String>,
    pub rows: Vec<TableRow>,
}

const AVERAGE_LABEL: &str = "average";

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

impl ResultsTable {
    /// Aggregates per-utterance scores. `cell_scores[row][col]` holds the
    /// individual utterance values for that cell.
    pub fn aggregate(
        metric: &str,
        higher_is_better: bool,
        row_labels: &[String],
        column_labels: &[String],
        cell_scores: &[Vec<Vec<f64>>],
    ) -> Self {
        assert_eq!(row_labels.len(), cell_scores.len());
        let rows = row_labels
            .iter()
            .zip(cell_scores)
            .map(|(label, cols)| {
                assert_eq!(cols.len(), column_labels.len());
                let cells = cols.iter().map(|v| mean(v)).collect();
                let pooled: Vec<f64> = cols.iter().flatten().copied().collect();
                TableRow {
                    label: label.clone(),
                    cells,
                    average: mean(&pooled),
                }
            })
            .collect();
        ResultsTable {
            metric: metric.to_string(),
            higher_is_better,
            column_labels: column_labels.to_vec(),
            rows,
        }
    }

    /// Winning row index per column (data columns first, average last).
    pub fn best_per_column(&self) -> Vec<Option<usize>> {
        let num_cols = self.column_labels.len() + 1;
        (0..num_cols)
            .map(|c| {
                let mut best: Option<(usize, f64)> = None;
                for (r, row) in self.rows.iter().enumerate() {
                    let value = if c < self.column_labels.len() {
                        row.cells[c]
                    } else {
                        row.average
                    };
                    if let Some(v) = value {
                        let wins = match best {
                            None => true,
                            Some((_, b)) => {
                                if self.higher_is_better {
                                    v > b
                                } else {
                                    v < b
                                }
                            }
                        };
                        if wins {
                            best = Some((r, v));
                        }
                    }
                }
                best.map(|(r, _)| r)
            })
            .collect()
    }

    fn cell_text(value: Option<f64>) -> String {
        match value {
            Some(v) => format!("{v:.4}"),
            None => "-".to_string(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("method");
        for label in &self.column_labels {
            out.push(',');
            out.push_str(label);
        }
        out.push(',');
        out.push_str(AVERAGE_LABEL);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.label);
            for &cell in &row.cells {
                out.push(',');
                out.push_str(&Self::cell_text(cell));
            }
            out.push(',');
            out.push_str(&Self::cell_text(row.average));
            out.push('\n');
        }
        out
    }

    /// Aligned text rendering; the best value in each column is starred.
    pub fn to_text(&self) -> String {
        let best = self.best_per_column();
        let headers: Vec<String> = std::iter::once("method".to_string())
            .chain(self.column_labels.iter().cloned())
            .chain(std::iter::once(AVERAGE_LABEL.to_string()))
            .collect();
        let mut grid: Vec<Vec<String>> = vec![headers];
        for (r, row) in self.rows.iter().enumerate() {
            let mut line = vec![row.label.clone()];
            for (c, &cell) in row.cells.iter().chain(std::iter::once(&row.average)).enumerate() {
                let mut text = Self::cell_text(cell);
                if best[c] == Some(r) {
                    text.push('*');
                }
                line.push(text);
            }
            grid.push(line);
        }
        let num_cols = grid[0].len();
        let widths: Vec<usize> = (0..num_cols)
            .map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!(
            "{} ({}er is better; * marks the best per column)\n",
            self.metric,
            if self.higher_is_better { "high" } else { "low" }
        );
        for line in &grid {
            for (c, cell) in line.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:>width$}", cell, width = widths[c]));
            }
            out.push('\n');
        }
        out
    }
}
