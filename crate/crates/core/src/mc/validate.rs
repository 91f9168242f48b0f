use serde::Serialize;

use super::{csv_number, NormKind, SmallBallEstimate};
use crate::bounds::{Certificate, Regime};
use crate::error::{Error, Result};

const EPS_MATCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub epsilon: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: f64,
    /// `bound − ci_hi`.
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub confidence: f64,
    pub n_paths: usize,
    pub spec_digest: String,
}

impl ValidationReport {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .count()
    }

    /// Columns `epsilon,p_hat,ci_lo,ci_hi,bound,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,p_hat,ci_lo,ci_hi,bound,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_number(r.epsilon),
                csv_number(r.p_hat),
                csv_number(r.ci_lo),
                csv_number(r.ci_hi),
                csv_number(r.bound),
                r.verdict.as_str()
            ));
        }
        out
    }
}

fn comparable(norm: NormKind, regime: Regime) -> bool {
    match (norm, regime) {
        (NormKind::Sup, Regime::Sup | Regime::L1) => true,
        (NormKind::Holder { beta: a }, Regime::Holder { beta: b }) => a == b,
        _ => false,
    }
}

/// Compare certificates with an estimate, one row per estimated `ε`.
///
/// Each `ε` needs a certificate for the same norm and horizon whose
/// partition is a sub-grid of the simulation grid. A row passes iff the
/// upper confidence limit does not exceed the bound; vacuous certificates
/// always pass and are flagged.
pub fn validate(
    certificates: &[Certificate],
    estimate: &SmallBallEstimate,
) -> Result<ValidationReport> {
    let grid = estimate.grid();
    let mut rows = Vec::with_capacity(estimate.epsilon.len());
    for (k, &eps) in estimate.epsilon.iter().enumerate() {
        let cert = certificates
            .iter()
            .find(|c| (c.epsilon - eps).abs() <= EPS_MATCH * eps)
            .ok_or_else(|| Error::InvalidComparison(format!("no certificate for epsilon {eps}")))?;
        if !comparable(estimate.norm, cert.regime) {
            return Err(Error::InvalidComparison(format!(
                "certificate regime {:?} does not bound the {:?} norm",
                cert.regime, estimate.norm
            )));
        }
        if (cert.horizon - estimate.horizon).abs() > EPS_MATCH * estimate.horizon {
            return Err(Error::InvalidComparison(format!(
                "certificate horizon {} differs from simulation horizon {}",
                cert.horizon, estimate.horizon
            )));
        }
        let verdict = if cert.vacuous {
            Verdict::Vacuous
        } else {
            if grid.nests(cert.delta, cert.steps).is_none() {
                return Err(Error::InvalidComparison(format!(
                    "partition of {} steps of {} is not a sub-grid of the simulation grid",
                    cert.steps, cert.delta
                )));
            }
            if estimate.ci_hi[k] <= cert.total {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        };
        rows.push(ValidationRow {
            epsilon: eps,
            p_hat: estimate.p_hat[k],
            ci_lo: estimate.ci_lo[k],
            ci_hi: estimate.ci_hi[k],
            bound: cert.total,
            margin: cert.total - estimate.ci_hi[k],
            verdict,
        });
    }
    Ok(ValidationReport {
        rows,
        confidence: estimate.confidence,
        n_paths: estimate.n_paths,
        spec_digest: estimate.spec_digest.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ConstantsMode;
    use crate::grid::UniformGrid;
    use crate::mc::estimate_from_norms;

    fn estimate(norms: &[f64], eps: &[f64]) -> SmallBallEstimate {
        let grid = UniformGrid::new(1.0, 64).unwrap();
        estimate_from_norms(norms, eps, 0.99, NormKind::Sup, "d".into(), grid, 0).unwrap()
    }

    fn cert(eps: f64, total: f64, steps: usize) -> Certificate {
        let mut c = Certificate::trivial(Regime::Sup, eps, 1.0, "test");
        c.steps = steps;
        c.delta = 1.0 / steps as f64;
        c.constants_mode = ConstantsMode::Explicit;
        c.set_terms(total, 0.0);
        c
    }

    #[test]
    fn vacuous_always_passes() {
        let e = estimate(&[0.0; 1000], &[1.0]);
        let r = validate(&[Certificate::trivial(Regime::Sup, 1.0, 1.0, "none")], &e).unwrap();
        assert_eq!(r.rows[0].verdict, Verdict::Vacuous);
        assert_eq!(r.failures(), 0);
    }

    #[test]
    fn zero_hits_pass() {
        let e = estimate(&[10.0; 1000], &[0.5]);
        let r = validate(&[cert(0.5, 0.01, 16)], &e).unwrap();
        assert_eq!(r.rows[0].p_hat, 0.0);
        assert_eq!(r.rows[0].verdict, Verdict::Pass);
        assert!(r.rows[0].margin > 0.0);
    }

    #[test]
    fn fail_when_upper_exceeds() {
        let e = estimate(&[0.0; 1000], &[0.5]);
        let r = validate(&[cert(0.5, 0.5, 16)], &e).unwrap();
        assert_eq!(r.rows[0].verdict, Verdict::Fail);
        assert_eq!(r.failures(), 1);
        assert!(r.to_csv().ends_with("FAIL\n"));
    }

    #[test]
    fn nesting_enforced() {
        let e = estimate(&[10.0; 1000], &[0.5]);
        assert!(matches!(
            validate(&[cert(0.5, 0.01, 48)], &e),
            Err(Error::InvalidComparison(_))
        ));
        assert!(matches!(
            validate(&[cert(0.4, 0.01, 16)], &e),
            Err(Error::InvalidComparison(_))
        ));
        let mut holder = cert(0.5, 0.01, 16);
        holder.regime = Regime::Holder { beta: 0.2 };
        assert!(matches!(
            validate(&[holder], &e),
            Err(Error::InvalidComparison(_))
        ));
    }
}
