//! Workforce knowledge profiling against the CyBOK taxonomy.
//!
//! The library models the full pipeline from raw knowledge claims to
//! organisation-level reports:
//!
//! - [`taxonomy`]: versioned CyBOK structure (broad categories, knowledge
//!   areas, topic trees) loaded from data files and used to validate every
//!   mapping triplet.
//! - [`mapping`]: concept normalisation, the concept → ⟨KA, topic, depth⟩
//!   mapping reference, the pre-mapped credential catalog and the
//!   manual-review queue for unresolved concepts.
//! - [`profile`]: per-source validity intervals, employee profile
//!   composition (set union with provenance), currency filtering at a time
//!   point, and organisational union with per-triplet headcounts.
//! - [`analytics`]: broad-category shares, per-KA coverage, practiced-vs-total
//!   tree annotation, source-composition statistics, gap reports and snapshot
//!   diffs.
//! - [`render`]: deterministic SVG spider charts, histograms and annotated
//!   topic trees (plus DOT output for trees).
//! - [`formats`]: the on-disk text formats — employee records, profile files,
//!   snapshots and report files.
//!
//! All aggregation is plain set algebra over immutable values; every output
//! is deterministic given identical inputs.

pub mod analytics;
pub mod formats;
pub mod mapping;
pub mod profile;
pub mod render;
pub mod taxonomy;

#[cfg(test)]
pub(crate) mod testutil;
