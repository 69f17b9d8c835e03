//! `kprofile` — build, filter, analyse and render workforce knowledge
//! profiles against a versioned taxonomy of cyber-security knowledge areas.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure (including
//! usage errors), 3 unresolved concepts written to the review queue,
//! 4 diff found changes.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use kprofile::analytics::AnalyticsError;
use kprofile::formats::FormatError;
use kprofile::mapping::MappingError;
use kprofile::profile::ProfileError;
use kprofile::render::RenderError;
use kprofile::taxonomy::TaxonomyError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kprofile",
    version,
    about = "Knowledge profiling for cyber-security workforces",
    propagate_version = true
)]
pub struct Cli {
    /// Configuration file (TOML); defaults to ./kprofile.toml when present.
    #[arg(long, global = true, env = "KPROFILE_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Taxonomy release to load, e.g. 1.0.0 or 1.1.0.
    #[arg(long, global = true, value_name = "VERSION")]
    pub taxonomy_version: Option<String>,

    /// Directory holding taxonomy data files named <version>.tax.
    #[arg(long, global = true, value_name = "DIR")]
    pub taxonomy_dir: Option<PathBuf>,

    /// Mapping reference CSV (concept and credential rows).
    #[arg(long, global = true, value_name = "FILE")]
    pub reference: Option<PathBuf>,

    /// Directory for generated files.
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Map a concept list onto taxonomy triplets.
    ///
    /// Writes mapped.csv (one row per concept-triplet pair) and
    /// review-queue.txt (unresolved concepts, one per line).
    Map {
        /// CSV file with one concept per row.
        concepts: PathBuf,
    },

    /// Build per-employee profiles, optionally unioned into an org snapshot.
    Profile {
        /// Employee record files (TOML).
        #[arg(required = true, value_name = "RECORD")]
        records: Vec<PathBuf>,

        /// Also write an organisational snapshot under this name.
        #[arg(long, value_name = "NAME")]
        org: Option<String>,

        /// Keep only knowledge current at this date (ISO-8601).
        #[arg(long, value_name = "DATE")]
        as_of: Option<NaiveDate>,
    },

    /// Produce an analytic report (machine- and human-readable).
    Report {
        #[command(subcommand)]
        view: ReportView,
    },

    /// Render a report file as SVG (trees also get a DOT file).
    Render(RenderArgs),

    /// Compare two organisational snapshots.
    ///
    /// Exits 0 when identical, 4 when the profiles differ.
    Diff {
        /// Snapshot taken earlier.
        before: PathBuf,
        /// Snapshot taken later.
        after: PathBuf,
    },

    /// Show the knowledge areas of the configured taxonomy release.
    Taxonomy,
}

#[derive(Subcommand)]
pub enum ReportView {
    /// Share of knowledge per broad category.
    Broad {
        /// Organisational snapshot file.
        snapshot: PathBuf,
    },

    /// Topic coverage per knowledge area.
    Ka {
        /// Organisational snapshot file.
        snapshot: PathBuf,

        /// Count topics down to this tree level.
        #[arg(long, value_name = "LEVEL")]
        depth: Option<u32>,
    },

    /// Knowledge areas and level-2 topics with no coverage.
    Gaps {
        /// Organisational snapshot file.
        snapshot: PathBuf,

        /// Report topic gaps down to this tree level.
        #[arg(long, value_name = "LEVEL")]
        depth: Option<u32>,
    },

    /// Split of knowledge claimed from taught versus applied sources.
    Composition {
        /// Employee profile files (source provenance is required).
        #[arg(required = true, value_name = "PROFILE")]
        profiles: Vec<PathBuf>,

        /// Name the report subject.
        #[arg(long, default_value = "org")]
        subject: String,
    },

    /// Covered/uncovered topic tree of one knowledge area.
    Tree {
        /// Employee profile files (unfiltered; validity drives the overlay).
        #[arg(required = true, value_name = "PROFILE")]
        profiles: Vec<PathBuf>,

        /// Knowledge-area code, e.g. SOIM.
        #[arg(long, value_name = "CODE")]
        ka: String,

        /// Distinguish knowledge still current at the cut-off from the total.
        #[arg(long)]
        practiced: bool,

        /// Currency cut-off for the practiced overlay; defaults to today.
        #[arg(long, value_name = "DATE")]
        as_of: Option<NaiveDate>,

        /// Name the report subject.
        #[arg(long, default_value = "org")]
        subject: String,
    },
}

#[derive(Args)]
pub struct RenderArgs {
    /// Report file produced by `kprofile report`.
    pub report: PathBuf,

    /// Image title; derived from the report when omitted.
    #[arg(long)]
    pub title: Option<String>,

    /// Image width in pixels.
    #[arg(long)]
    pub width: Option<u32>,

    /// Image height in pixels.
    #[arg(long)]
    pub height: Option<u32>,

    /// Colour palette: default or mono.
    #[arg(long, value_name = "NAME")]
    pub palette: Option<String>,

    /// Drop uncovered subtrees below level 2 in tree renders.
    #[arg(long)]
    pub prune: bool,
}

/// A command failure with its exit-code class: I/O (1) or validation (2).
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Validation(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(msg) | Failure::Validation(msg) => f.write_str(msg),
        }
    }
}

impl From<TaxonomyError> for Failure {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<MappingError> for Failure {
    fn from(e: MappingError) -> Self {
        match e {
            MappingError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ProfileError> for Failure {
    fn from(e: ProfileError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        Failure::Validation(e.to_string())
    }
}
