//! Self-contained certificates: everything needed to re-derive and re-check a
//! construction from `B` alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cyclo::{Cyc8, ScaledCyc8};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::pauli::partition_report_bounded;
use crate::search::ansatz_b;
use crate::symplectic::{check_conditions, ConditionReport};
use crate::unitary::{
    global_phase, global_phase_trace, phase_vector, spectrum_check, unitary_from_phases, verify_cyclic_mub,
    Cyc8Matrix, PhaseVector, DENSE_MAX_M, SWEEP_MAX_M,
};

pub const SCHEMA: &str = "mubcert/1";

/// Partition enumeration in certificates stops here; above it the algebraic check is used.
pub const PARTITION_CERT_MAX_M: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Conditions i–iii, the order of `C` and the Pauli partition.
    Symplectic,
    /// Adds the exact unitary: phases, global phase, unitarity, cyclicity, unbiasedness.
    Dense,
    /// Adds `tr U^t = -1` for every `t = 1..d`.
    Spectrum,
}

impl Level {
    /// The highest level that can actually run at this `m`.
    pub fn clamp_for(self, m: usize) -> Level {
        if m > DENSE_MAX_M {
            Level::Symplectic
        } else {
            self
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Symplectic => "symplectic",
            Level::Dense => "dense",
            Level::Spectrum => "spectrum",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symplectic" => Ok(Level::Symplectic),
            "dense" => Ok(Level::Dense),
            "spectrum" => Ok(Level::Spectrum),
            other => Err(Error::Parse(format!("unknown level {other:?}"))),
        }
    }
}

/// `None` means the check was not run at this level or exceeded its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub level: Level,
    /// Largest `m` for which the `d`-power sweeps run.
    pub dense_bound_m: usize,
    pub partition_ok: Option<bool>,
    pub global_phase_match: Option<bool>,
    pub unitary_ok: Option<bool>,
    pub cyclic_ok: Option<bool>,
    pub unbiased_ok: Option<bool>,
    pub trace_ok: Option<bool>,
    pub spectrum_ok: Option<bool>,
}

impl Verification {
    fn checks(&self) -> [(&'static str, Option<bool>); 7] {
        [
            ("partition", self.partition_ok),
            ("global phase", self.global_phase_match),
            ("unitarity", self.unitary_ok),
            ("cyclicity", self.cyclic_ok),
            ("unbiasedness", self.unbiased_ok),
            ("trace", self.trace_ok),
            ("spectrum", self.spectrum_ok),
        ]
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.checks().into_iter().find(|(_, v)| *v == Some(false)).map(|(name, _)| name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Metadata {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MubCertificate {
    pub schema: String,
    pub m: usize,
    pub b: BitMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<BitMatrix>,
    pub condition_report: ConditionReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_exps: Option<PhaseVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_phase: Option<ScaledCyc8>,
    /// `None` when the trace-derived phase is not unimodular or was not computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_phase_trace: Option<ScaledCyc8>,
    pub verification: Verification,
    pub fully_verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Cyc8Matrix>,
    pub metadata: Metadata,
}

impl MubCertificate {
    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cert: MubCertificate = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if cert.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported schema {:?}", cert.schema)));
        }
        Ok(cert)
    }

    /// The dense unitary these phases describe, if they were computed.
    pub fn unitary_matrix(&self) -> Result<Option<Cyc8Matrix>> {
        match (&self.phase_exps, &self.global_phase) {
            (Some(p), Some(g)) => Ok(Some(unitary_from_phases(p, g)?)),
            _ => Ok(None),
        }
    }
}

/// Runs every check available at `level` (clamped to the dense bound) for `B`.
///
/// Dense work is skipped when the conditions fail, since there is no unitary to speak of.
pub fn certify(b: &BitMatrix, corner: Option<&BitMatrix>, level: Level) -> Result<MubCertificate> {
    if !b.is_square() {
        return Err(Error::shape("B must be square"));
    }
    let m = b.n_rows();
    if let Some(c) = corner {
        if &ansatz_b(m, c)? != b {
            return Err(Error::arg("corner does not reproduce B"));
        }
    }
    let level = level.clamp_for(m);
    let condition_report = check_conditions(b)?;
    let conditions_ok = condition_report.all_ok();

    let mut verification = Verification {
        level,
        dense_bound_m: SWEEP_MAX_M,
        partition_ok: None,
        global_phase_match: None,
        unitary_ok: None,
        cyclic_ok: None,
        unbiased_ok: None,
        trace_ok: None,
        spectrum_ok: None,
    };
    if conditions_ok && m <= 31 {
        verification.partition_ok = Some(partition_report_bounded(b, PARTITION_CERT_MAX_M)?.ok());
    }

    let (mut phase_exps, mut gp, mut gpt) = (None, None, None);
    if conditions_ok && level >= Level::Dense {
        let p = phase_vector(b)?;
        let g = global_phase(m);
        let traced = match global_phase_trace(&p) {
            Ok(t) => Some(t),
            Err(Error::NotUnimodular) => None,
            Err(e) => return Err(e),
        };
        verification.global_phase_match = Some(traced == Some(g));
        let u = unitary_from_phases(&p, &g)?;
        verification.trace_ok = Some(u.trace()? == ScaledCyc8::integral(Cyc8::from_int(-1)));
        if m <= SWEEP_MAX_M {
            let r = verify_cyclic_mub(&u)?;
            verification.unitary_ok = Some(r.unitary_ok);
            verification.cyclic_ok = Some(r.cyclic_ok);
            verification.unbiased_ok = Some(r.unbiased_ok);
            if level >= Level::Spectrum {
                verification.spectrum_ok = Some(spectrum_check(&u)?.spectrum_ok);
            }
        } else {
            verification.unbiased_ok = Some(u.is_flat()?);
        }
        phase_exps = Some(p);
        gp = Some(g);
        gpt = traced;
    }

    let fully_verified = conditions_ok && condition_report.consistent && verification.first_failure().is_none();
    Ok(MubCertificate {
        schema: SCHEMA.to_string(),
        m,
        b: b.clone(),
        corner: corner.cloned(),
        condition_report,
        phase_exps,
        global_phase: gp,
        global_phase_trace: gpt,
        verification,
        fully_verified,
        unitary: None,
        metadata: Metadata { tool_version: env!("CARGO_PKG_VERSION").to_string(), created_unix: None },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub m: usize,
    pub level: Level,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub recomputed: Verification,
    pub condition_report: ConditionReport,
}

/// Recomputes everything from `cert.b` and compares against every claim in the file.
pub fn verify_certificate(cert: &MubCertificate, level: Level) -> Result<VerifyReport> {
    let fail = |first: String, fresh: Option<&MubCertificate>| {
        let (recomputed, condition_report) = match fresh {
            Some(f) => (f.verification, f.condition_report),
            None => (cert.verification, cert.condition_report),
        };
        VerifyReport { m: cert.m, level, passed: false, first_failure: Some(first), recomputed, condition_report }
    };
    if cert.schema != SCHEMA {
        return Ok(fail(format!("schema {:?}", cert.schema), None));
    }
    if cert.b.n_rows() != cert.m || !cert.b.is_square() {
        return Ok(fail("B does not match m".into(), None));
    }
    if let Some(c) = &cert.corner {
        match ansatz_b(cert.m, c) {
            Ok(expected) if expected == cert.b => {}
            _ => return Ok(fail("corner does not reproduce B".into(), None)),
        }
    }
    let fresh = certify(&cert.b, None, level)?;
    let checks: [(&str, bool); 5] = [
        ("condition report", fresh.condition_report == cert.condition_report),
        ("conditions", fresh.condition_report.all_ok()),
        ("consistency", fresh.condition_report.consistent),
        ("phase vector", claim_matches(&cert.phase_exps, &fresh.phase_exps)),
        ("global phase", claim_matches(&cert.global_phase, &fresh.global_phase)),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Ok(fail(name.to_string(), Some(&fresh)));
    }
    if let Some(name) = fresh.verification.first_failure() {
        return Ok(fail(name.to_string(), Some(&fresh)));
    }
    // Claims recorded at a different level are compared only where both sides ran.
    let claims_agree = cert.verification.checks().iter().zip(fresh.verification.checks()).all(
        |((_, claimed), (_, recomputed))| match (claimed, recomputed) {
            (Some(c), Some(r)) => *c == r,
            _ => true,
        },
    );
    if !claims_agree {
        return Ok(fail("verification claims".into(), Some(&fresh)));
    }
    if !cert.fully_verified {
        return Ok(fail("fully_verified claim".into(), Some(&fresh)));
    }
    if let Some(u) = &cert.unitary {
        if fresh.unitary_matrix()?.as_ref() != Some(u) {
            return Ok(fail("unitary".into(), Some(&fresh)));
        }
    }
    Ok(VerifyReport {
        m: cert.m,
        level: fresh.verification.level,
        passed: true,
        first_failure: None,
        recomputed: fresh.verification,
        condition_report: fresh.condition_report,
    })
}

/// A claim that is present must equal the recomputed value; a missing claim is not checked
/// against, but the recomputation still runs.
fn claim_matches<T: PartialEq>(claimed: &Option<T>, fresh: &Option<T>) -> bool {
    match claimed {
        None => true,
        Some(c) => fresh.as_ref() == Some(c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{known_corner, staircase};

    #[test]
    fn small_certificates_verify() {
        for m in 1..=3 {
            let cert = certify(&staircase(m), None, Level::Spectrum).unwrap();
            assert!(cert.fully_verified, "m = {m}: {:?}", cert.verification);
            assert_eq!(cert.verification.spectrum_ok, Some(true));
            let r = verify_certificate(&cert, Level::Spectrum).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let corner = known_corner(4).unwrap();
        let b = ansatz_b(4, &corner).unwrap();
        let mut cert = certify(&b, Some(&corner), Level::Dense).unwrap();
        cert.unitary = cert.unitary_matrix().unwrap();
        cert.metadata.created_unix = Some(1);
        let text = cert.to_json_pretty().unwrap();
        assert!(text.contains("\"schema\": \"mubcert/1\""));
        let back = MubCertificate::from_json(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_json_pretty().unwrap(), text);
        assert!(verify_certificate(&back, Level::Dense).unwrap().passed);
    }

    #[test]
    fn flipped_bit_fails() {
        let cert = certify(&staircase(3), None, Level::Dense).unwrap();
        for (i, j) in [(0, 0), (0, 1), (2, 2)] {
            let mut bad = cert.clone();
            let v = bad.b.get(i, j);
            bad.b.set(i, j, !v);
            let r = verify_certificate(&bad, Level::Symplectic).unwrap();
            assert!(!r.passed);
            assert_eq!(r.first_failure.as_deref(), Some("condition report"));
        }
    }

    #[test]
    fn tampered_claims_fail() {
        let cert = certify(&staircase(2), None, Level::Dense).unwrap();
        let mut bad = cert.clone();
        bad.phase_exps = Some(bad.phase_exps.unwrap().negate(2));
        assert_eq!(verify_certificate(&bad, Level::Dense).unwrap().first_failure.as_deref(), Some("phase vector"));
        let mut bad = cert.clone();
        bad.global_phase = Some(global_phase(1));
        assert_eq!(verify_certificate(&bad, Level::Dense).unwrap().first_failure.as_deref(), Some("global phase"));
        let mut bad = cert.clone();
        bad.verification.trace_ok = Some(false);
        assert_eq!(
            verify_certificate(&bad, Level::Dense).unwrap().first_failure.as_deref(),
            Some("verification claims")
        );
        let mut bad = cert.clone();
        bad.fully_verified = false;
        assert_eq!(
            verify_certificate(&bad, Level::Dense).unwrap().first_failure.as_deref(),
            Some("fully_verified claim")
        );
        let mut bad = cert;
        bad.schema = "mubcert/0".into();
        assert!(!verify_certificate(&bad, Level::Dense).unwrap().passed);
    }

    #[test]
    fn failing_b_is_not_verified() {
        let cert = certify(&BitMatrix::identity(3), None, Level::Spectrum).unwrap();
        assert!(!cert.fully_verified);
        assert!(cert.phase_exps.is_none());
        assert!(!verify_certificate(&cert, Level::Dense).unwrap().passed);
    }

    #[test]
    fn large_m_is_symplectic_only() {
        let corner = known_corner(11).unwrap();
        let b = ansatz_b(11, &corner).unwrap();
        let cert = certify(&b, Some(&corner), Level::Spectrum).unwrap();
        assert_eq!(cert.verification.level, Level::Symplectic);
        assert!(cert.phase_exps.is_none());
        assert_eq!(cert.verification.partition_ok, Some(true));
        assert!(cert.fully_verified);
    }

    #[test]
    fn corner_must_match() {
        let b = staircase(4);
        assert!(certify(&b, Some(&known_corner(4).unwrap()), Level::Symplectic).is_err());
    }

    #[test]
    fn levels_parse_and_order() {
        assert_eq!("dense".parse::<Level>().unwrap(), Level::Dense);
        assert!("full".parse::<Level>().is_err());
        assert!(Level::Symplectic < Level::Spectrum);
        assert_eq!(Level::Spectrum.clamp_for(11), Level::Symplectic);
    }
}
