//! Seeded shot campaigns.

use proq_core::lang::{run_trajectory_with, Executable, TrajectoryStatus};
use proq_core::rng::shot_rng;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CampaignConfig {
    pub shots: u64,
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    pub jobs: usize,
}

/// Per-site counts over a campaign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SiteTally {
    /// Shots that executed the site at least once.
    pub reached: u64,
    /// Executions of the site over all shots.
    pub visits: u64,
    /// Shots that aborted at the site.
    pub failures: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CampaignResult {
    pub shots: u64,
    pub sites: Vec<SiteTally>,
    pub completed: u64,
    pub loop_cap_exceeded: u64,
}

impl CampaignResult {
    fn empty(sites: usize) -> Self {
        CampaignResult { sites: vec![SiteTally::default(); sites], ..Default::default() }
    }

    fn merge(mut self, other: CampaignResult) -> Self {
        self.shots += other.shots;
        self.completed += other.completed;
        self.loop_cap_exceeded += other.loop_cap_exceeded;
        for (a, b) in self.sites.iter_mut().zip(other.sites) {
            a.reached += b.reached;
            a.visits += b.visits;
            a.failures += b.failures;
        }
        self
    }

    pub fn total_failures(&self) -> u64 {
        self.sites.iter().map(|s| s.failures).sum()
    }
}

fn one_shot(exe: &Executable, seed: u64, index: u64) -> CampaignResult {
    let mut rng = shot_rng(seed, index);
    let r = run_trajectory_with(exe, &mut rng);
    let mut out = CampaignResult::empty(exe.site_ids().len());
    out.shots = 1;
    for (tally, &v) in out.sites.iter_mut().zip(&r.site_visits) {
        tally.visits = v;
        tally.reached = u64::from(v > 0);
    }
    match &r.status {
        TrajectoryStatus::Completed => out.completed = 1,
        TrajectoryStatus::LoopCapExceeded => out.loop_cap_exceeded = 1,
        TrajectoryStatus::Aborted(_) => {
            if let Some(i) = r.aborted_site(exe) {
                out.sites[i].failures = 1;
            }
        }
    }
    out
}

/// Runs shots `0..shots`, shot `i` drawing from `shot_rng(seed, i)`.
pub fn run_campaign(exe: &Executable, config: &CampaignConfig) -> anyhow::Result<CampaignResult> {
    let sites = exe.site_ids().len();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs.max(1)).build()?;
    Ok(pool.install(|| {
        (0..config.shots)
            .into_par_iter()
            .map(|i| one_shot(exe, config.seed, i))
            .reduce(|| CampaignResult::empty(sites), CampaignResult::merge)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proq_core::lang::{parse_program, Mode};

    #[test]
    fn tallies_do_not_depend_on_jobs() {
        let p = parse_program("qubits 2; H q0; CNOT q0, q1; assert A: span{|00>} on q0, q1; assert B: I[2] on q0, q1;")
            .unwrap();
        let exe = Executable::new(p, Mode::Lowered).unwrap();
        let one = run_campaign(&exe, &CampaignConfig { shots: 400, seed: 3, jobs: 1 }).unwrap();
        let many = run_campaign(&exe, &CampaignConfig { shots: 400, seed: 3, jobs: 8 }).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.sites[0].reached, 400);
        assert_eq!(one.sites[0].failures + one.completed, 400);
        assert_eq!(one.sites[1].reached, one.completed);
        let rate = one.sites[0].failures as f64 / 400.0;
        assert!((rate - 0.5).abs() < 0.1, "{rate}");
    }
}
