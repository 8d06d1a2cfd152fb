//! The `proq-report/1` JSON run report.

use proq_core::fmt::{round_sig, SIG_DIGITS};
use proq_core::lang::{Executable, Mode};
use proq_core::stats::{cp_interval, theorem1_intervals, theorem2_report, AssertionCounts};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::campaign::CampaignResult;

pub const SCHEMA: &str = "proq-report/1";

/// A number written with [`SIG_DIGITS`] significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig(pub f64);

impl Serialize for Sig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(round_sig(self.0, SIG_DIGITS))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteRecord {
    pub id: String,
    /// `line:column` of the assertion in the source.
    pub location: String,
    pub reached: u64,
    pub visits: u64,
    pub failures: u64,
    /// Clopper–Pearson interval of the per-visit failure rate.
    pub cp_interval: Option<[Sig; 2]>,
    pub w_minus: Option<Sig>,
    pub w_center: Option<Sig>,
    pub w_plus: Option<Sig>,
    pub epsilon: Option<Sig>,
    pub verdict: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Record {
    pub d_interval: [Sig; 2],
    pub f_interval: [Sig; 2],
    pub well_sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalRecord {
    pub l: u64,
    pub theorem1: Option<Theorem1Record>,
    pub delta: Option<Sig>,
    /// Why the segment intervals could not be formed, when they could not.
    pub theorem2_error: Option<String>,
    pub completed: u64,
    pub loop_cap_exceeded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    /// SHA-256 of the program source.
    pub program_digest: String,
    pub mode: &'static str,
    pub shots: u64,
    pub seed: u64,
    pub alpha: Sig,
    pub loop_cap: Option<usize>,
    pub sites: Vec<SiteRecord>,
    pub global: GlobalRecord,
}

pub struct ReportInputs<'a> {
    pub source: &'a str,
    pub exe: &'a Executable,
    pub seed: u64,
    pub alpha: f64,
    pub epsilons: Option<&'a [f64]>,
    pub loop_cap: Option<usize>,
}

pub fn digest(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Direct => "direct",
        Mode::Lowered => "lowered",
    }
}

impl RunReport {
    pub fn build(inputs: &ReportInputs<'_>, result: &CampaignResult) -> anyhow::Result<RunReport> {
        let exe = inputs.exe;
        let program = exe.program();
        let l = result.sites.len() as u64;
        if let Some(e) = inputs.epsilons {
            anyhow::ensure!(e.len() as u64 == l, "{} tolerances given for {l} assertion sites", e.len());
            anyhow::ensure!(e.iter().all(|x| (0.0..=1.0).contains(x)), "tolerances must lie in [0, 1]");
        }
        let shots = result.shots;
        let t2 = if l == 0 || shots == 0 {
            Err(String::from("no assertion sites or no shots"))
        } else {
            let counts = AssertionCounts { failures: result.sites.iter().map(|s| s.failures).collect(), shots };
            theorem2_report(&counts, inputs.epsilons, inputs.alpha).map_err(|e| e.to_string())
        };
        let mut sites = Vec::with_capacity(result.sites.len());
        for (m, (id, tally)) in exe.site_ids().iter().zip(&result.sites).enumerate() {
            let site = program.site(id).expect("site of the program");
            let cp = if tally.visits > 0 {
                let (lo, hi) = cp_interval(tally.failures.min(tally.visits), tally.visits, inputs.alpha)?;
                Some([Sig(lo), Sig(hi)])
            } else {
                None
            };
            let seg = t2.as_ref().ok().map(|r| r.segments[m]);
            sites.push(SiteRecord {
                id: id.clone(),
                location: site.location.to_string(),
                reached: tally.reached,
                visits: tally.visits,
                failures: tally.failures,
                cp_interval: cp,
                w_minus: seg.map(|s| Sig(s.w_minus)),
                w_center: seg.map(|s| Sig(s.w_center)),
                w_plus: seg.map(|s| Sig(s.w_plus)),
                epsilon: inputs.epsilons.map(|e| Sig(e[m])),
                verdict: seg.and_then(|s| s.verdict).map(|v| v.as_str()),
            });
        }
        let theorem1 = theorem1_intervals(l, shots).ok().map(|t| Theorem1Record {
            d_interval: [Sig(0.0), Sig(t.d_hi)],
            f_interval: [Sig(t.f_lo), Sig(1.0)],
            well_sampled: t.well_sampled,
        });
        let (delta, theorem2_error) = match &t2 {
            Ok(r) => (Some(Sig(r.delta)), None),
            Err(e) => (None, Some(e.clone())),
        };
        Ok(RunReport {
            schema: SCHEMA,
            program_digest: digest(inputs.source),
            mode: mode_name(exe.mode()),
            shots,
            seed: inputs.seed,
            alpha: Sig(inputs.alpha),
            loop_cap: inputs.loop_cap,
            sites,
            global: GlobalRecord {
                l,
                theorem1,
                delta,
                theorem2_error,
                completed: result.completed,
                loop_cap_exceeded: result.loop_cap_exceeded,
            },
        })
    }

    pub fn any_incorrect(&self) -> bool {
        self.sites.iter().any(|s| s.verdict == Some("incorrect"))
    }

    pub fn total_failures(&self) -> u64 {
        self.sites.iter().map(|s| s.failures).sum()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_rounded() {
        assert_eq!(serde_json::to_string(&Sig(0.1 + 0.2)).unwrap(), "0.3");
        assert_eq!(serde_json::to_string(&Sig(1.0 / 3.0)).unwrap(), "0.333333333333");
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(digest(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
