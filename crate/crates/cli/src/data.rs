//! Delimited input and output of observation tables.

use std::io::{Read, Write};

use binmed::model::{Dataset, ModelSpec};
use binmed::MediationError;

use crate::error::CliResult;

/// Which input columns play which role.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Bindings {
    pub outcome: String,
    pub mediator: String,
    pub exposure: String,
}

fn schema(msg: String) -> MediationError {
    MediationError::Schema(msg)
}

fn parse_number(field: &str, column: &str, row: usize) -> CliResult<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| schema(format!("column '{column}' row {row}: cannot read '{field}' as a number")))?;
    if !v.is_finite() {
        return Err(schema(format!("column '{column}' row {row}: value '{field}' is not finite")).into());
    }
    Ok(v)
}

fn parse_binary(field: &str, column: &str, row: usize) -> CliResult<bool> {
    let v = parse_number(field, column, row)?;
    if v == 0.0 || v == 1.0 {
        Ok(v == 1.0)
    } else {
        Err(schema(format!("column '{column}' row {row}: '{field}' is not 0 or 1")).into())
    }
}

/// Reads a comma-delimited table with a header row. Only the bound
/// columns and the model's confounders are read.
pub fn read_dataset<R: Read>(reader: R, bindings: &Bindings, spec: &ModelSpec) -> CliResult<Dataset<f64>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers()?.clone();
    let index = |name: &str| -> CliResult<usize> {
        header.iter().position(|h| h == name).ok_or_else(|| schema(format!("missing column '{name}'")).into())
    };
    let (iy, iw, ix) = (index(&bindings.outcome)?, index(&bindings.mediator)?, index(&bindings.exposure)?);
    let covariates = spec.covariate_names();
    let icov = covariates.iter().map(|n| index(n)).collect::<CliResult<Vec<_>>>()?;

    let (mut y, mut w, mut x) = (Vec::new(), Vec::new(), Vec::new());
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); covariates.len()];
    for (r, record) in csv.records().enumerate() {
        let record = record?;
        let row = r + 1;
        y.push(parse_binary(&record[iy], &bindings.outcome, row)?);
        w.push(parse_binary(&record[iw], &bindings.mediator, row)?);
        x.push(parse_number(&record[ix], &bindings.exposure, row)?);
        for ((col, &i), name) in cols.iter_mut().zip(&icov).zip(&covariates) {
            col.push(parse_number(&record[i], name, row)?);
        }
    }
    Ok(Dataset::new(y, w, x, covariates.into_iter().zip(cols).collect())?)
}

/// Writes `outcome, mediator, exposure, covariates...` with a header.
pub fn write_dataset<W: Write>(writer: W, data: &Dataset<f64>, bindings: &Bindings) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec![bindings.outcome.as_str(), bindings.mediator.as_str(), bindings.exposure.as_str()];
    header.extend(data.columns().iter().map(|(n, _)| n.as_str()));
    out.write_record(&header)?;
    let bit = |b: bool| if b { "1" } else { "0" };
    for i in 0..data.len() {
        let mut rec = vec![bit(data.y()[i]).to_owned(), bit(data.w()[i]).to_owned(), data.x()[i].to_string()];
        rec.extend(data.columns().iter().map(|(_, c)| c[i].to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| crate::error::CliError::io("output", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bindings() -> Bindings {
        Bindings { outcome: "bank".into(), mediator: "biz".into(), exposure: "loan".into() }
    }

    fn spec() -> ModelSpec {
        ModelSpec::new(vec!["age".into()], vec![], Default::default(), Default::default()).unwrap()
    }

    #[test]
    fn reads_bound_columns() {
        let text = "loan,biz,bank,age,extra\n1,0,1,30,x\n0,1,0,41.5,y\n";
        let d = read_dataset(text.as_bytes(), &bindings(), &spec()).unwrap();
        assert_eq!(d.y(), &[true, false]);
        assert_eq!(d.w(), &[false, true]);
        assert_eq!(d.x(), &[1.0, 0.0]);
        assert_eq!(d.column("age").unwrap(), &[30.0, 41.5]);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "loan,biz,bank\n1,0,1\n";
        let err = read_dataset(text.as_bytes(), &bindings(), &spec()).unwrap_err();
        assert!(err.to_string().contains("missing column 'age'"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_binary_outcome_is_rejected() {
        let text = "loan,biz,bank,age\n1,0,2,30\n";
        assert!(read_dataset(text.as_bytes(), &bindings(), &spec()).is_err());
    }

    #[test]
    fn write_then_read() {
        let d = Dataset::new(vec![true, false], vec![false, false], vec![1.0, 0.0], vec![("age".into(), vec![0.1 + 0.2, 7.0])])
            .unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d, &bindings()).unwrap();
        let back = read_dataset(buf.as_slice(), &bindings(), &spec()).unwrap();
        assert_eq!(back, d);
    }
}
