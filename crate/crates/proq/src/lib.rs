//! Command-line front end for `proq-core`: seeded debugging campaigns, the
//! `proq-report/1` JSON report, assertion compilation and the case-study
//! program files.

pub mod campaign;
pub mod cli;
pub mod report;

pub use campaign::{run_campaign, CampaignConfig, CampaignResult, SiteTally};
pub use report::{RunReport, SCHEMA};
