use serde::{Deserialize, Serialize};

use rsdp_witness::format::MatrixFile;
use rsdp_witness::multipartite::CutOutcome;
use rsdp_witness::witness::{classify, SolveSummary, VerdictKind};

/// Everything `solve` knows about a run. Only `wall_time_s` varies between
/// runs with the same inputs, flags and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub method: String,
    pub verdict: VerdictKind,
    /// Relaxation optimum; `null` when the relaxation is infeasible.
    pub value: Option<f64>,
    pub detect_eps: f64,
    pub certificates: Option<SolveSummary>,
    pub witness: Option<MatrixFile>,
    /// Best product-state value of the witness found by see-saw.
    pub seesaw_value: Option<f64>,
    /// Most negative eigenvalue seen while checking a user multiplier.
    pub multiplier_worst: Option<f64>,
    pub cuts: Option<Vec<CutOutcome>>,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl ReportFile {
    pub fn is_consistent(&self) -> bool {
        match self.value {
            Some(v) => classify(v, self.detect_eps) == self.verdict,
            None => self.verdict == VerdictKind::Inconclusive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(verdict: VerdictKind, value: Option<f64>) -> ReportFile {
        ReportFile {
            method: "theorem2".into(),
            verdict,
            value,
            detect_eps: 1e-6,
            certificates: None,
            witness: None,
            seesaw_value: None,
            multiplier_worst: None,
            cuts: None,
            seed: 0,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn consistency() {
        assert!(report(VerdictKind::Entangled, Some(-0.1)).is_consistent());
        assert!(!report(VerdictKind::Entangled, Some(-1e-7)).is_consistent());
        assert!(report(VerdictKind::Inconclusive, None).is_consistent());
        assert!(!report(VerdictKind::Entangled, None).is_consistent());
    }

    #[test]
    fn json_round_trip() {
        let r = report(VerdictKind::Inconclusive, Some(2.733e-5));
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ReportFile>(&text).unwrap(), r);
    }
}
