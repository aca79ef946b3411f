//! From raw replicate data to scores, p-values, BH decisions and lfdr reports.

mod bh;
mod ingest;
pub mod io;
mod panel;
mod report;

pub use bh::{bh_reject, two_sided_pvalues};
pub use ingest::{ingest_one_sample, ingest_two_sample, Ingested};
pub use panel::ScorePanel;
pub use report::{build_report, LfdrReport, LfdrSummary, SiteRecord};
