use std::io::Write;

use anyhow::Result;

/// One row per `λ`: the metric followed by one sensitivity index per term.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    /// Name of the second column, `L2error` or `accuracy`.
    pub metric: String,
    pub term_labels: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub lambda: f64,
    pub metric: f64,
    pub gsi: Vec<f64>,
}

impl ResultTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["lambda".to_string(), self.metric.clone()];
        h.extend(self.term_labels.iter().cloned());
        h
    }

    /// Row minimizing (`L2error`) or maximizing (`accuracy`) the metric.
    pub fn best(&self) -> Option<&TableRow> {
        let better = |a: &TableRow, b: &TableRow| {
            if self.metric == "accuracy" {
                a.metric.total_cmp(&b.metric)
            } else {
                b.metric.total_cmp(&a.metric)
            }
        };
        self.rows.iter().max_by(|a, b| better(a, b))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = vec![row.lambda.to_string(), row.metric.to_string()];
            rec.extend(row.gsi.iter().map(f64::to_string));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}
