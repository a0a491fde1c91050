use std::collections::HashMap;
use std::collections::HashSet;
use std::io::Read;

use super::ScoreError;

/// Metadata for one categorical variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMeta {
    pub id: usize,
    pub name: String,
    /// Number of distinct values the variable takes.
    pub arity: usize,
    /// Original labels, indexed by category.
    pub labels: Vec<String>,
}

/// Fully observed categorical data, stored row-major as category indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<VariableMeta>,
    rows: Vec<u32>,
}

impl Dataset {
    /// Builds a dataset from already-encoded rows.
    ///
    /// Every cell must be below the arity of its column and every arity must be at least 2.
    pub fn from_rows(
        variables: Vec<VariableMeta>,
        rows: Vec<Vec<u32>>,
    ) -> Result<Self, ScoreError> {
        let mut seen = HashSet::new();
        for (id, var) in variables.iter().enumerate() {
            if var.id != id {
                return Err(ScoreError::InvalidDataset(format!(
                    "variable {} has id {}, expected {id}",
                    var.name, var.id
                )));
            }
            if !seen.insert(var.name.as_str()) {
                return Err(ScoreError::DuplicateVariable(var.name.clone()));
            }
            if var.arity < 2 {
                return Err(ScoreError::SingleValuedColumn(var.name.clone()));
            }
        }
        let width = variables.len();
        let mut flat = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(ScoreError::RaggedRow {
                    line: r + 2,
                    expected: width,
                    found: row.len(),
                });
            }
            for (var, &cell) in variables.iter().zip(row) {
                if cell as usize >= var.arity {
                    return Err(ScoreError::InvalidDataset(format!(
                        "row {r}: value {cell} out of range for {} (arity {})",
                        var.name, var.arity
                    )));
                }
            }
            flat.extend_from_slice(row);
        }
        Ok(Dataset { variables, rows: flat })
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn instance_count(&self) -> usize {
        if self.variables.is_empty() {
            0
        } else {
            self.rows.len() / self.variables.len()
        }
    }

    pub fn arity(&self, var: usize) -> usize {
        self.variables[var].arity
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// One instance as a slice of category indices.
    pub fn row(&self, i: usize) -> &[u32] {
        let w = self.variables.len();
        &self.rows[i * w..(i + 1) * w]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u32]> {
        self.rows.chunks_exact(self.variables.len().max(1))
    }

    /// Writes the dataset back out as CSV using the original labels.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), ScoreError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(self.variables.iter().map(|v| v.name.as_str()))?;
        for row in self.iter_rows() {
            writer.write_record(
                row.iter()
                    .zip(&self.variables)
                    .map(|(&c, v)| v.labels[c as usize].as_str()),
            )?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Reads a header line of variable names followed by one instance per line.
///
/// Labels are mapped to category indices in order of first appearance.
pub fn load_csv<R: Read>(stream: R) -> Result<Dataset, ScoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(stream);

    let header = reader.headers()?.clone();
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    if names.is_empty() || (names.len() == 1 && names[0].is_empty()) {
        return Err(ScoreError::EmptyDataset);
    }
    let width = names.len();
    let mut lookup: Vec<HashMap<String, u32>> = vec![HashMap::new(); width];
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); width];
    let mut rows = Vec::new();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(ScoreError::RaggedRow {
                line,
                expected: width,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (col, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(ScoreError::MissingValue {
                    line,
                    column: names[col].clone(),
                });
            }
            let next = lookup[col].len() as u32;
            let code = *lookup[col].entry(field.to_owned()).or_insert_with(|| {
                labels[col].push(field.to_owned());
                next
            });
            row.push(code);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ScoreError::EmptyDataset);
    }

    let variables = names
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(id, (name, labels))| VariableMeta {
            id,
            name,
            arity: labels.len(),
            labels,
        })
        .collect();
    Dataset::from_rows(variables, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let data = load_csv("A,B\n0,1\n1,0\n".as_bytes()).unwrap();
        assert_eq!(data.num_variables(), 2);
        assert_eq!(data.instance_count(), 2);
        assert_eq!(data.arity(0), 2);
        assert_eq!(data.arity(1), 2);
        // first appearance order
        assert_eq!(data.row(0), &[0, 0]);
        assert_eq!(data.row(1), &[1, 1]);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(
            load_csv("A,B\n".as_bytes()),
            Err(ScoreError::EmptyDataset)
        ));
        assert!(matches!(load_csv("".as_bytes()), Err(ScoreError::EmptyDataset)));
    }

    #[test]
    fn constant_column_rejected() {
        let err = load_csv("A,B\nx,1\ny,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ScoreError::SingleValuedColumn(ref n) if n == "B"));
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = load_csv("A,B\n0,1\n1\n".as_bytes()).unwrap_err();
        match err {
            ScoreError::RaggedRow { line, expected, found } => {
                assert_eq!((line, expected, found), (3, 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_value_rejected() {
        assert!(matches!(
            load_csv("A,B\n0,\n1,0\n".as_bytes()),
            Err(ScoreError::MissingValue { line: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let data = load_csv("X,Y,Z\na,b,c\nb,b,a\na,c,c\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        assert_eq!(load_csv(buf.as_slice()).unwrap(), data);
    }
}
