//! JSON files for phases and signals.
//!
//! Floats in a phase file are decimal strings with 17 significant digits,
//! which round-trip every finite `f64` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{SignalSamples, SynthesisReport};
use crate::qsp::PhaseSequence;
use crate::spectral::CircleGrid;

pub const PHASE_SCHEMA_VERSION: u32 = 1;

/// `{:.16e}`: one leading digit and sixteen after the point.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("{field}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!("{field}: '{s}' is not finite")));
    }
    Ok(v)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseFileRaw {
    schema_version: u32,
    epsilon: String,
    grid: usize,
    degree: usize,
    phases: Vec<String>,
    plancherel_lhs: String,
    plancherel_rhs: String,
    residual: String,
}

/// Synthesised phases with the numbers needed to re-check them.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFile {
    pub epsilon: f64,
    pub grid: usize,
    pub phases: PhaseSequence,
    pub plancherel_lhs: f64,
    pub plancherel_rhs: f64,
    pub residual: f64,
}

impl PhaseFile {
    pub fn from_report(report: &SynthesisReport) -> Self {
        Self {
            epsilon: report.epsilon,
            grid: report.grid_size,
            phases: report.phases.clone(),
            plancherel_lhs: report.plancherel_lhs,
            plancherel_rhs: report.plancherel_rhs,
            residual: report.hs_residual,
        }
    }

    pub fn degree(&self) -> usize {
        self.phases.max_degree()
    }

    pub fn to_json(&self) -> String {
        let raw = PhaseFileRaw {
            schema_version: PHASE_SCHEMA_VERSION,
            epsilon: format_f64(self.epsilon),
            grid: self.grid,
            degree: self.degree(),
            phases: self.phases.as_slice().iter().map(|&p| format_f64(p)).collect(),
            plancherel_lhs: format_f64(self.plancherel_lhs),
            plancherel_rhs: format_f64(self.plancherel_rhs),
            residual: format_f64(self.residual),
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("plain struct serialises");
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: PhaseFileRaw =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("phase file: {e}")))?;
        if raw.schema_version != PHASE_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema version {} (expected {PHASE_SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if raw.phases.len() != raw.degree + 1 {
            return Err(Error::Format(format!(
                "degree {} does not match {} phases",
                raw.degree,
                raw.phases.len()
            )));
        }
        let values = raw
            .phases
            .iter()
            .enumerate()
            .map(|(k, s)| parse_f64(&format!("phases[{k}]"), s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            epsilon: parse_f64("epsilon", &raw.epsilon)?,
            grid: raw.grid,
            phases: PhaseSequence::new(values)?,
            plancherel_lhs: parse_f64("plancherel_lhs", &raw.plancherel_lhs)?,
            plancherel_rhs: parse_f64("plancherel_rhs", &raw.plancherel_rhs)?,
            residual: parse_f64("residual", &raw.residual)?,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalFileRaw {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chebyshev: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignalPayload {
    /// Values at `x_j = cos(pi j / N)` for all `N` nodes.
    Samples(Vec<f64>),
    /// Coefficients of `sum_k c_k T_k(x)`.
    Chebyshev(Vec<f64>),
}

/// Target signal as read from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalFile {
    pub payload: SignalPayload,
    pub epsilon: Option<f64>,
}

impl SignalFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: SignalFileRaw =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("signal file: {e}")))?;
        let payload = match (raw.samples, raw.chebyshev) {
            (Some(s), None) => SignalPayload::Samples(s),
            (None, Some(c)) => SignalPayload::Chebyshev(c),
            _ => {
                return Err(Error::Format(
                    "signal file needs exactly one of 'samples' or 'chebyshev'".into(),
                ))
            }
        };
        Ok(Self {
            payload,
            epsilon: raw.epsilon,
        })
    }

    pub fn to_json(&self) -> String {
        let (samples, chebyshev) = match &self.payload {
            SignalPayload::Samples(s) => (Some(s.clone()), None),
            SignalPayload::Chebyshev(c) => (None, Some(c.clone())),
        };
        let raw = SignalFileRaw {
            samples,
            chebyshev,
            epsilon: self.epsilon,
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("plain struct serialises");
        out.push('\n');
        out
    }

    /// Grid implied by the payload: the sample count, or `default` for
    /// Chebyshev input. A sample count that disagrees with an explicit
    /// `requested` size is an error.
    pub fn grid_size(&self, requested: Option<usize>, default: usize) -> Result<usize> {
        match (&self.payload, requested) {
            (SignalPayload::Samples(s), Some(n)) if s.len() != n => Err(Error::Format(format!(
                "file holds {} samples but grid {n} was requested",
                s.len()
            ))),
            (SignalPayload::Samples(s), _) => Ok(s.len()),
            (SignalPayload::Chebyshev(_), n) => Ok(n.unwrap_or(default)),
        }
    }

    /// Samples on `grid`. An explicit `epsilon` overrides the file's.
    pub fn to_samples(&self, grid: &CircleGrid, epsilon: Option<f64>) -> Result<SignalSamples> {
        let epsilon = epsilon.or(self.epsilon);
        match &self.payload {
            SignalPayload::Samples(s) => SignalSamples::from_samples(grid, s, epsilon),
            SignalPayload::Chebyshev(c) => SignalSamples::from_chebyshev(grid, c, epsilon),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_file(phases: Vec<f64>) -> PhaseFile {
        PhaseFile {
            epsilon: 0.1,
            grid: 64,
            phases: PhaseSequence::new(phases).unwrap(),
            plancherel_lhs: 0.25,
            plancherel_rhs: 0.25 + 1e-15,
            residual: 3e-9,
        }
    }

    #[test]
    fn phase_file_layout() {
        let text = sample_file(vec![0.1, -0.2]).to_json();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(text.contains("\"1.0000000000000001e-1\""));
        assert!(text.contains("\"degree\": 1"));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn phase_file_rejections() {
        let good = sample_file(vec![0.1]).to_json();
        let v2 = good.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(PhaseFile::parse(&v2), Err(Error::Format(_))));
        let bad_degree = good.replace("\"degree\": 0", "\"degree\": 3");
        assert!(matches!(PhaseFile::parse(&bad_degree), Err(Error::Format(_))));
        let half_pi = good.replace("\"1.0000000000000001e-1\"", "\"1.5707963267948966e0\"");
        assert!(matches!(PhaseFile::parse(&half_pi), Err(Error::PhaseOutOfDomain { .. })));
        let junk = good.replace("\"1.0000000000000001e-1\"", "\"abc\"");
        assert!(matches!(PhaseFile::parse(&junk), Err(Error::Format(_))));
        assert!(matches!(PhaseFile::parse("{"), Err(Error::Format(_))));
    }

    #[test]
    fn signal_file_variants() {
        let s = SignalFile::parse(r#"{"samples": [0.1, 0.2], "epsilon": 0.3}"#).unwrap();
        assert_eq!(s.payload, SignalPayload::Samples(vec![0.1, 0.2]));
        assert_eq!(s.epsilon, Some(0.3));
        let c = SignalFile::parse(r#"{"chebyshev": [0.0, 0.4]}"#).unwrap();
        assert_eq!(c.payload, SignalPayload::Chebyshev(vec![0.0, 0.4]));
        assert_eq!(SignalFile::parse(&c.to_json()).unwrap(), c);
        assert!(SignalFile::parse(r#"{"samples": [0.1], "chebyshev": [0.1]}"#).is_err());
        assert!(SignalFile::parse(r#"{"epsilon": 0.1}"#).is_err());
        assert!(SignalFile::parse(r#"{"samples": [0.1], "extra": 1}"#).is_err());
    }

    #[test]
    fn signal_grid_resolution() {
        let s = SignalFile::parse(r#"{"samples": [0,0,0,0,0,0,0,0]}"#).unwrap();
        assert_eq!(s.grid_size(None, 4096).unwrap(), 8);
        assert!(s.grid_size(Some(16), 4096).is_err());
        let c = SignalFile::parse(r#"{"chebyshev": [0.1]}"#).unwrap();
        assert_eq!(c.grid_size(None, 4096).unwrap(), 4096);
        assert_eq!(c.grid_size(Some(256), 4096).unwrap(), 256);
        let grid = CircleGrid::new(16).unwrap();
        let samples = c.to_samples(&grid, None).unwrap();
        assert!(samples.values().iter().all(|&v| v == 0.1));
    }

    #[test]
    fn synthesis_report_round_trip() {
        let grid = CircleGrid::new(512).unwrap();
        let f = SignalSamples::from_fn(&grid, |x| 0.25 * (2.0 * x * x - 1.0) + 0.1, None).unwrap();
        let report = crate::pipeline::synthesize(&f, 1e-10, 128).unwrap();
        let file = PhaseFile::from_report(&report);
        let back = PhaseFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.phases, report.phases);
        assert_eq!(back.degree(), report.degree);
    }

    proptest! {
        #[test]
        fn phases_round_trip_bit_exactly(raw in proptest::collection::vec(-1.57f64..1.57, 1..40)) {
            let file = sample_file(raw);
            let back = PhaseFile::parse(&file.to_json()).unwrap();
            for (a, b) in file.phases.as_slice().iter().zip(back.phases.as_slice()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back, file);
        }

        #[test]
        fn format_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(parse_f64("v", &format_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }
}
