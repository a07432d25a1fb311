//! On-disk formats: CSV tables and JSON documents.

use std::io::{Read, Write};

use nmqrc_core::esp::EspRecord;
use nmqrc_core::hamiltonian::{CouplingSet, HamiltonianRealization, ReservoirParams};
use nmqrc_core::readout::ReadoutWeights;
use nmqrc_core::reservoir::FeatureMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// Feature rows as `step, v1_Z0, …, bias`.
pub fn write_features_csv<W: Write>(out: W, features: &FeatureMatrix) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend(features.labels().iter().cloned());
    w.write_record(&header)?;
    for k in 0..features.steps() {
        let mut rec = vec![k.to_string()];
        rec.extend(features.row(k).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a dataset file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub step: usize,
    /// Raw input before scaling; equal to `s` for tasks without scaling.
    pub u: f64,
    pub s: f64,
    pub y: f64,
}

/// Writes `step, u, s, y`.
pub fn write_dataset_csv<W: Write>(out: W, u: &[f64], s: &[f64], y: &[f64]) -> Result<(), FormatError> {
    if u.len() != s.len() || s.len() != y.len() {
        return Err(FormatError::Invalid(format!(
            "column lengths differ: u {}, s {}, y {}",
            u.len(),
            s.len(),
            y.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    for step in 0..s.len() {
        w.serialize(DatasetRow {
            step,
            u: u[step],
            s: s[step],
            y: y[step],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `step, u, s, y`, requiring consecutive steps from 0.
pub fn read_dataset_csv<R: Read>(input: R) -> Result<Vec<DatasetRow>, FormatError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows = Vec::new();
    for (k, rec) in r.deserialize::<DatasetRow>().enumerate() {
        let row = rec?;
        if row.step != k {
            return Err(FormatError::Invalid(format!("expected step {k}, found {}", row.step)));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsDoc {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

/// Readout weights as `{"labels": [...], "weights": [...]}`.
pub fn write_weights_json<W: Write>(out: W, labels: &[String], weights: &ReadoutWeights) -> Result<(), FormatError> {
    if labels.len() != weights.len() {
        return Err(FormatError::Invalid(format!(
            "{} labels for {} weights",
            labels.len(),
            weights.len()
        )));
    }
    let doc = WeightsDoc {
        labels: labels.to_vec(),
        weights: weights.as_slice().to_vec(),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

pub fn read_weights_json<R: Read>(input: R) -> Result<(Vec<String>, ReadoutWeights), FormatError> {
    let doc: WeightsDoc = serde_json::from_reader(input)?;
    if doc.labels.len() != doc.weights.len() {
        return Err(FormatError::Invalid("labels and weights differ in length".into()));
    }
    let w = ReadoutWeights::new(doc.weights).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok((doc.labels, w))
}

/// A realization's parameters and sampled couplings, enough to rebuild it
/// with `build_hamiltonian`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingsDoc {
    pub params: ReservoirParams,
    pub j_sys: Vec<f64>,
    pub j_env: Vec<f64>,
    pub g: Vec<f64>,
}

impl CouplingsDoc {
    pub fn from_realization(real: &HamiltonianRealization) -> Self {
        let c = real.couplings();
        Self {
            params: real.params().clone(),
            j_sys: c.j_sys.clone(),
            j_env: c.j_env.clone(),
            g: c.g.clone(),
        }
    }

    pub fn couplings(&self) -> CouplingSet {
        CouplingSet {
            j_sys: self.j_sys.clone(),
            j_env: self.j_env.clone(),
            g: self.g.clone(),
        }
    }
}

pub fn write_couplings_json<W: Write>(out: W, real: &HamiltonianRealization) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(out, &CouplingsDoc::from_realization(real))?;
    Ok(())
}

pub fn read_couplings_json<R: Read>(input: R) -> Result<CouplingsDoc, FormatError> {
    Ok(serde_json::from_reader(input)?)
}

/// ESP records as `step, sqnorm_diff, trace_distance_full, trace_distance_sys`.
pub fn write_esp_csv<W: Write>(out: W, records: &[EspRecord]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "sqnorm_diff", "trace_distance_full", "trace_distance_sys"])?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.sqnorm_diff.to_string(),
            r.trace_distance.to_string(),
            r.trace_distance_sys.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StmSummaryRow {
    pub tau_d: usize,
    pub regime: String,
    pub mean_cstm: f64,
    pub std_cstm: f64,
    pub n_seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarmaSummaryRow {
    pub order: usize,
    pub tau: f64,
    pub regime: String,
    pub mean_r2: f64,
    pub std_r2: f64,
    pub n_seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspSummaryRow {
    pub seed: u64,
    pub regime: String,
    pub window_mean_sqnorm: f64,
    pub window_max_sqnorm: f64,
    pub backflow_count_sys: usize,
}

/// Writes serializable rows with a header derived from the field names.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>, FormatError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nmqrc_core::hamiltonian::build_hamiltonian;
    use nmqrc_core::RealMatrix;

    #[test]
    fn features_header_and_rows() {
        let values = RealMatrix::from_fn(2, 3, |i, j| if j == 2 { 1.0 } else { (i * 2 + j) as f64 / 4.0 });
        let labels = vec!["v1_Z0".to_string(), "v2_Z0".to_string(), "bias".to_string()];
        let fm = FeatureMatrix::new(values, labels).unwrap();
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &fm).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "step,v1_Z0,v2_Z0,bias\n0,0,0.25,1\n1,0.5,0.75,1\n");
    }

    #[test]
    fn dataset_round_trip() {
        let u = [0.1, 0.25, 0.5];
        let s = [0.2, 0.5, 1.0];
        let y = [0.0, 0.13, 0.1234567890123];
        let mut buf = Vec::new();
        write_dataset_csv(&mut buf, &u, &s, &y).unwrap();
        assert!(buf.starts_with(b"step,u,s,y\n"));
        let rows = read_dataset_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].y, 0.1234567890123);
        assert_eq!(rows[1].u, 0.25);
        assert!(read_dataset_csv("step,u,s,y\n1,0,0,0\n".as_bytes()).is_err());
        assert!(write_dataset_csv(Vec::new(), &u, &s, &y[..2]).is_err());
    }

    #[test]
    fn weights_round_trip() {
        let labels = vec!["v1_Z0".to_string(), "bias".to_string()];
        let w = ReadoutWeights::new(vec![0.5, -1.25]).unwrap();
        let mut buf = Vec::new();
        write_weights_json(&mut buf, &labels, &w).unwrap();
        let (l, back) = read_weights_json(buf.as_slice()).unwrap();
        assert_eq!((l, back), (labels.clone(), w.clone()));
        assert!(write_weights_json(Vec::new(), &labels[..1], &w).is_err());
    }

    #[test]
    fn couplings_rebuild_identical_hamiltonian() {
        let params = ReservoirParams::new(2, 2).with_regime(0.01, 10.0).with_seed(12);
        let real = HamiltonianRealization::sample(&params).unwrap();
        let mut buf = Vec::new();
        write_couplings_json(&mut buf, &real).unwrap();
        let doc = read_couplings_json(buf.as_slice()).unwrap();
        let again = build_hamiltonian(&doc.params, doc.couplings()).unwrap();
        assert_eq!(again.hamiltonian(), real.hamiltonian());
    }

    #[test]
    fn summary_headers() {
        let mut buf = Vec::new();
        let rows = [StmSummaryRow {
            tau_d: 3,
            regime: "markov".into(),
            mean_cstm: 0.5,
            std_cstm: 0.1,
            n_seeds: 2,
        }];
        write_rows(&mut buf, &rows).unwrap();
        assert!(buf.starts_with(b"tau_d,regime,mean_cstm,std_cstm,n_seeds\n"));
        let back: Vec<StmSummaryRow> = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, rows);

        let mut buf = Vec::new();
        write_rows::<_, NarmaSummaryRow>(&mut buf, &[]).unwrap();
        let mut buf = Vec::new();
        write_rows(
            &mut buf,
            &[EspSummaryRow {
                seed: 1,
                regime: "markov".into(),
                window_mean_sqnorm: 0.0,
                window_max_sqnorm: 0.0,
                backflow_count_sys: 0,
            }],
        )
        .unwrap();
        assert!(buf.starts_with(b"seed,regime,window_mean_sqnorm,window_max_sqnorm,backflow_count_sys\n"));
    }

    #[test]
    fn esp_header() {
        let mut buf = Vec::new();
        write_esp_csv(
            &mut buf,
            &[EspRecord {
                step: 0,
                sqnorm_diff: 1.5,
                trace_distance: 2.0,
                trace_distance_sys: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,sqnorm_diff,trace_distance_full,trace_distance_sys\n0,1.5,2,1\n"
        );
    }
}
