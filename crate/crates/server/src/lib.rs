//! HTTP service and crawler plumbing around `sentisearch-core`.

pub mod api;
pub mod fetch;
pub mod snapshot;

pub use api::{router, AppState};
pub use snapshot::SnapshotPaths;
