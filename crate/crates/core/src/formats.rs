//! On-disk formats: employee records, profile files, snapshots, report
//! files and diffs as TOML, plus aligned plain-text renderings and the
//! mapped-CSV / review-queue outputs.
//!
//! Every structured file carries `schema = 1` and a `kind` discriminator so
//! readers fail fast on the wrong input. DTOs keep scalar fields ahead of
//! table arrays, matching TOML's emission rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{
    BroadCategoryShare, BroadShares, CompositionStats, GapReport, KACoverage, MissingKa, NodeFlags,
    Pct, ProfileDiff, TopicGap, TreeAnnotation,
};
use crate::mapping::{Concept, MappingOutcome, MappingTriplet};
use crate::profile::{
    validate_source, EmployeeProfile, KnowledgeSource, OrgProfile, ProvenancedTriplet, Snapshot,
    SourceKind, TimePoint, ValidityInterval,
};
use crate::taxonomy::{KnowledgeArea, TaxonomyVersion};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot parse {what}: {source}")]
    Parse {
        what: &'static str,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("cannot serialize {what}: {source}")]
    Serialize {
        what: &'static str,
        #[source]
        source: toml::ser::Error,
    },
    #[error("{what} declares schema {found}, this build reads schema {SCHEMA}")]
    Schema { what: &'static str, found: u32 },
    #[error("expected a {expected} file, found kind `{found}`")]
    Kind {
        expected: &'static str,
        found: String,
    },
    #[error("expected a {expected} report, found view `{found}`")]
    View { expected: String, found: String },
    #[error("{0}")]
    Invalid(String),
}

fn parse<T: DeserializeOwned>(what: &'static str, text: &str) -> Result<T, FormatError> {
    toml::from_str(text).map_err(|source| FormatError::Parse {
        what,
        source: Box::new(source),
    })
}

fn emit<T: Serialize>(what: &'static str, value: &T) -> Result<String, FormatError> {
    toml::to_string(value).map_err(|source| FormatError::Serialize { what, source })
}

fn check_schema(what: &'static str, found: u32) -> Result<(), FormatError> {
    if found != SCHEMA {
        return Err(FormatError::Schema { what, found });
    }
    Ok(())
}

fn check_kind(expected: &'static str, found: &str) -> Result<(), FormatError> {
    if found != expected {
        return Err(FormatError::Kind {
            expected,
            found: found.to_string(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Employee records
// ---------------------------------------------------------------------------

/// One employee's declared knowledge sources, as read from a record file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmployeeRecord {
    pub employee_id: String,
    pub sources: Vec<KnowledgeSource>,
}

#[derive(Serialize, Deserialize)]
struct EmployeeRecordDto {
    employee_id: String,
    #[serde(default, rename = "source")]
    sources: Vec<SourceDto>,
}

#[derive(Serialize, Deserialize)]
struct SourceDto {
    kind: String,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    credential: Option<String>,
    acquired: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valid_until: Option<NaiveDate>,
    #[serde(default)]
    concepts: Vec<String>,
}

pub fn employee_record_to_string(record: &EmployeeRecord) -> Result<String, FormatError> {
    let dto = EmployeeRecordDto {
        employee_id: record.employee_id.clone(),
        sources: record
            .sources
            .iter()
            .map(|s| SourceDto {
                kind: s.kind.code().to_string(),
                label: s.label.clone(),
                credential: s.credential.clone(),
                acquired: s.acquired,
                valid_until: s.valid_until,
                concepts: s.concepts.clone(),
            })
            .collect(),
    };
    emit("employee record", &dto)
}

pub fn employee_record_from_str(text: &str) -> Result<EmployeeRecord, FormatError> {
    let dto: EmployeeRecordDto = parse("employee record", text)?;
    if dto.employee_id.trim().is_empty() {
        return Err(FormatError::Invalid("employee_id must be non-empty".into()));
    }
    let mut sources = Vec::with_capacity(dto.sources.len());
    for s in dto.sources {
        if s.label.trim().is_empty() {
            return Err(FormatError::Invalid(format!(
                "employee {}: source labels must be non-empty",
                dto.employee_id
            )));
        }
        let kind: SourceKind = s
            .kind
            .parse()
            .map_err(|e: String| FormatError::Invalid(format!("source `{}`: {e}", s.label)))?;
        let source = KnowledgeSource {
            kind,
            label: s.label,
            acquired: s.acquired,
            valid_until: s.valid_until,
            concepts: s.concepts,
            credential: s.credential,
        };
        validate_source(&source).map_err(|e| FormatError::Invalid(e.to_string()))?;
        sources.push(source);
    }
    Ok(EmployeeRecord {
        employee_id: dto.employee_id,
        sources,
    })
}

// ---------------------------------------------------------------------------
// Profile files (per-employee, provenance kept)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProfileFileDto {
    schema: u32,
    kind: String,
    employee: String,
    taxonomy_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    as_of: Option<NaiveDate>,
    #[serde(default, rename = "triplet")]
    triplets: Vec<ProfileTripletDto>,
}

#[derive(Serialize, Deserialize)]
struct ProfileTripletDto {
    ka: String,
    topic: String,
    depth: u32,
    source_kind: String,
    source_label: String,
    valid_from: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valid_until: Option<NaiveDate>,
}

pub fn profile_to_string(
    profile: &EmployeeProfile,
    version: &TaxonomyVersion,
) -> Result<String, FormatError> {
    let dto = ProfileFileDto {
        schema: SCHEMA,
        kind: "employee-profile".to_string(),
        employee: profile.employee.clone(),
        taxonomy_version: version.to_string(),
        as_of: profile.as_of,
        triplets: profile
            .triplets
            .iter()
            .map(|p| ProfileTripletDto {
                ka: p.triplet.ka.clone(),
                topic: p.triplet.topic.clone(),
                depth: p.triplet.depth,
                source_kind: p.kind.code().to_string(),
                source_label: p.source_label.clone(),
                valid_from: p.validity.start,
                valid_until: p.validity.end,
            })
            .collect(),
    };
    emit("employee profile", &dto)
}

pub fn profile_from_str(text: &str) -> Result<(EmployeeProfile, TaxonomyVersion), FormatError> {
    let dto: ProfileFileDto = parse("employee profile", text)?;
    check_schema("employee profile", dto.schema)?;
    check_kind("employee-profile", &dto.kind)?;

    let mut triplets = BTreeSet::new();
    for row in dto.triplets {
        let kind: SourceKind = row
            .source_kind
            .parse()
            .map_err(|e: String| FormatError::Invalid(e))?;
        if row.valid_until.is_some_and(|end| end < row.valid_from) {
            return Err(FormatError::Invalid(format!(
                "triplet {}/{}: validity ends before it starts",
                row.ka, row.topic
            )));
        }
        let validity = ValidityInterval {
            start: row.valid_from,
            end: row.valid_until,
        };
        if let Some(at) = dto.as_of {
            if !validity.contains(at) {
                return Err(FormatError::Invalid(format!(
                    "profile is filtered at {at} but triplet {}/{} is not valid then",
                    row.ka, row.topic
                )));
            }
        }
        triplets.insert(ProvenancedTriplet {
            triplet: MappingTriplet::new(row.ka, row.topic, row.depth),
            kind,
            source_label: row.source_label,
            validity,
        });
    }
    Ok((
        EmployeeProfile {
            employee: dto.employee,
            triplets,
            as_of: dto.as_of,
        },
        TaxonomyVersion::new(dto.taxonomy_version),
    ))
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SnapshotDto {
    schema: u32,
    kind: String,
    org: String,
    taxonomy_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    as_of: Option<NaiveDate>,
    employees: u32,
    #[serde(default, rename = "triplet")]
    triplets: Vec<SnapshotTripletDto>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotTripletDto {
    ka: String,
    topic: String,
    depth: u32,
    headcount: u32,
}

pub fn snapshot_to_string(snapshot: &Snapshot) -> Result<String, FormatError> {
    let p = &snapshot.profile;
    let dto = SnapshotDto {
        schema: SCHEMA,
        kind: "org-snapshot".to_string(),
        org: p.org.clone(),
        taxonomy_version: snapshot.taxonomy_version.to_string(),
        as_of: p.as_of,
        employees: p.employees,
        triplets: p
            .triplets
            .iter()
            .map(|t| SnapshotTripletDto {
                ka: t.ka.clone(),
                topic: t.topic.clone(),
                depth: t.depth,
                headcount: p.headcount.get(t).copied().unwrap_or(1),
            })
            .collect(),
    };
    emit("snapshot", &dto)
}

pub fn snapshot_from_str(text: &str) -> Result<Snapshot, FormatError> {
    let dto: SnapshotDto = parse("snapshot", text)?;
    check_schema("snapshot", dto.schema)?;
    check_kind("org-snapshot", &dto.kind)?;

    let mut triplets = BTreeSet::new();
    let mut headcount = BTreeMap::new();
    for row in dto.triplets {
        if row.headcount < 1 || row.headcount > dto.employees {
            return Err(FormatError::Invalid(format!(
                "triplet {}/{}: headcount {} outside 1..={}",
                row.ka, row.topic, row.headcount, dto.employees
            )));
        }
        let t = MappingTriplet::new(row.ka, row.topic, row.depth);
        if !triplets.insert(t.clone()) {
            return Err(FormatError::Invalid(format!(
                "duplicate triplet {}/{}",
                t.ka, t.topic
            )));
        }
        headcount.insert(t, row.headcount);
    }
    Ok(Snapshot {
        taxonomy_version: TaxonomyVersion::new(dto.taxonomy_version),
        profile: OrgProfile {
            org: dto.org,
            triplets,
            headcount,
            employees: dto.employees,
            as_of: dto.as_of,
        },
    })
}

// ---------------------------------------------------------------------------
// Report envelope and bodies
// ---------------------------------------------------------------------------

/// Machine-readable report file: a fixed header plus a view-specific body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<B> {
    pub schema: u32,
    pub kind: String,
    pub view: String,
    pub subject: String,
    pub taxonomy_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub as_of: Option<NaiveDate>,
    pub body: B,
}

pub fn report_to_string<B: Serialize>(report: &Report<B>) -> Result<String, FormatError> {
    emit("report", report)
}

/// Parse a report file, checking schema, kind and the expected view.
pub fn report_from_str<B: DeserializeOwned>(
    text: &str,
    view: &str,
) -> Result<Report<B>, FormatError> {
    let found = peek_view(text)?;
    if found != view {
        return Err(FormatError::View {
            expected: view.to_string(),
            found,
        });
    }
    parse("report", text)
}

/// Read just the header of a report file to learn its view.
pub fn peek_view(text: &str) -> Result<String, FormatError> {
    #[derive(Deserialize)]
    struct Header {
        schema: u32,
        kind: String,
        view: String,
    }
    let header: Header = parse("report", text)?;
    check_schema("report", header.schema)?;
    check_kind("report", &header.kind)?;
    Ok(header.view)
}

fn envelope<B>(
    view: &str,
    subject: &str,
    version: &TaxonomyVersion,
    as_of: Option<TimePoint>,
    body: B,
) -> Report<B> {
    Report {
        schema: SCHEMA,
        kind: "report".to_string(),
        view: view.to_string(),
        subject: subject.to_string(),
        taxonomy_version: version.to_string(),
        as_of,
        body,
    }
}

// -- broad-category shares --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadBody {
    pub basis: usize,
    pub unattributed_count: usize,
    pub unattributed_share: Pct,
    #[serde(default, rename = "category")]
    pub categories: Vec<BroadRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadRow {
    pub code: String,
    pub name: String,
    pub count: usize,
    pub share: Pct,
}

pub fn broad_report(
    subject: &str,
    version: &TaxonomyVersion,
    as_of: Option<TimePoint>,
    shares: &BroadShares,
) -> Report<BroadBody> {
    envelope(
        "broad",
        subject,
        version,
        as_of,
        BroadBody {
            basis: shares.basis,
            unattributed_count: shares.unattributed_count,
            unattributed_share: shares.unattributed,
            categories: shares
                .shares
                .iter()
                .map(|s| BroadRow {
                    code: s.category.clone(),
                    name: s.name.clone(),
                    count: s.count,
                    share: s.share,
                })
                .collect(),
        },
    )
}

/// Rebuild the analytics value from a parsed broad report body.
pub fn broad_shares_of(body: &BroadBody) -> BroadShares {
    BroadShares {
        shares: body
            .categories
            .iter()
            .map(|r| BroadCategoryShare {
                category: r.code.clone(),
                name: r.name.clone(),
                count: r.count,
                share: r.share,
            })
            .collect(),
        unattributed_count: body.unattributed_count,
        unattributed: body.unattributed_share,
        basis: body.basis,
    }
}

// -- per-KA coverage ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaBody {
    pub depth: u32,
    #[serde(default, rename = "ka")]
    pub rows: Vec<KaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaRow {
    pub code: String,
    pub name: String,
    pub covered: usize,
    pub total: usize,
    pub share: Pct,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_headcount: Option<u32>,
}

pub fn ka_report(
    subject: &str,
    version: &TaxonomyVersion,
    as_of: Option<TimePoint>,
    depth: u32,
    rows: &[KACoverage],
) -> Report<KaBody> {
    envelope(
        "ka",
        subject,
        version,
        as_of,
        KaBody {
            depth,
            rows: rows
                .iter()
                .map(|r| KaRow {
                    code: r.ka.clone(),
                    name: r.name.clone(),
                    covered: r.covered,
                    total: r.total,
                    share: r.share,
                    max_headcount: r.max_headcount,
                })
                .collect(),
        },
    )
}

pub fn ka_coverage_of(body: &KaBody) -> Vec<KACoverage> {
    body.rows
        .iter()
        .map(|r| KACoverage {
            ka: r.code.clone(),
            name: r.name.clone(),
            covered: r.covered,
            total: r.total,
            share: r.share,
            max_headcount: r.max_headcount,
        })
        .collect()
}

// -- tree annotation ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBody {
    pub ka: String,
    #[serde(default, rename = "node")]
    pub nodes: Vec<TreeNodeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeRow {
    pub id: String,
    pub covered_total: bool,
    pub covered_practiced: bool,
}

pub fn tree_report(
    subject: &str,
    version: &TaxonomyVersion,
    ann: &TreeAnnotation,
) -> Report<TreeBody> {
    envelope(
        "tree",
        subject,
        version,
        Some(ann.as_of),
        TreeBody {
            ka: ann.ka.clone(),
            nodes: ann
                .nodes
                .iter()
                .map(|(id, flags)| TreeNodeRow {
                    id: id.clone(),
                    covered_total: flags.covered_total,
                    covered_practiced: flags.covered_practiced,
                })
                .collect(),
        },
    )
}

pub fn tree_annotation_of(report: &Report<TreeBody>) -> Result<TreeAnnotation, FormatError> {
    let as_of = report
        .as_of
        .ok_or_else(|| FormatError::Invalid("tree report is missing its as_of date".to_string()))?;
    Ok(TreeAnnotation {
        ka: report.body.ka.clone(),
        as_of,
        nodes: report
            .body
            .nodes
            .iter()
            .map(|row| {
                (
                    row.id.clone(),
                    NodeFlags {
                        covered_total: row.covered_total,
                        covered_practiced: row.covered_practiced,
                    },
                )
            })
            .collect(),
    })
}

// -- composition ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionBody {
    pub basis: usize,
    pub tra_cer_count: usize,
    pub exp_res_count: usize,
    pub tra_cer_exclusive: usize,
    pub exp_res_exclusive: usize,
    pub overlap: usize,
    pub tra_cer_share: Pct,
    pub exp_res_share: Pct,
    pub overlap_share: Pct,
}

pub fn composition_report(
    subject: &str,
    version: &TaxonomyVersion,
    as_of: Option<TimePoint>,
    stats: &CompositionStats,
) -> Report<CompositionBody> {
    envelope(
        "composition",
        subject,
        version,
        as_of,
        CompositionBody {
            basis: stats.basis,
            tra_cer_count: stats.tra_cer_count,
            exp_res_count: stats.exp_res_count,
            tra_cer_exclusive: stats.tra_cer_exclusive,
            exp_res_exclusive: stats.exp_res_exclusive,
            overlap: stats.overlap,
            tra_cer_share: stats.tra_cer_pct,
            exp_res_share: stats.exp_res_pct,
            overlap_share: stats.overlap_pct,
        },
    )
}

// -- gaps -------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapsBody {
    pub depth: u32,
    #[serde(default, rename = "missing_ka")]
    pub missing: Vec<MissingKaRow>,
    #[serde(default, rename = "topic_gap")]
    pub topics: Vec<TopicGapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingKaRow {
    pub ka: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicGapRow {
    pub ka: String,
    pub topic: String,
    pub label: String,
}

pub fn gaps_report(
    subject: &str,
    version: &TaxonomyVersion,
    as_of: Option<TimePoint>,
    report: &GapReport,
) -> Report<GapsBody> {
    envelope(
        "gaps",
        subject,
        version,
        as_of,
        GapsBody {
            depth: report.depth,
            missing: report
                .missing_kas
                .iter()
                .map(|m| MissingKaRow {
                    ka: m.ka.clone(),
                    name: m.name.clone(),
                    category: m.category.clone(),
                })
                .collect(),
            topics: report
                .topic_gaps
                .iter()
                .map(|g| TopicGapRow {
                    ka: g.ka.clone(),
                    topic: g.topic.clone(),
                    label: g.label.clone(),
                })
                .collect(),
        },
    )
}

pub fn gap_report_of(body: &GapsBody) -> GapReport {
    GapReport {
        depth: body.depth,
        missing_kas: body
            .missing
            .iter()
            .map(|m| MissingKa {
                ka: m.ka.clone(),
                name: m.name.clone(),
                category: m.category.clone(),
            })
            .collect(),
        topic_gaps: body
            .topics
            .iter()
            .map(|g| TopicGap {
                ka: g.ka.clone(),
                topic: g.topic.clone(),
                label: g.label.clone(),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Diff files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DiffDto {
    schema: u32,
    kind: String,
    taxonomy_version: String,
    employees_before: u32,
    employees_after: u32,
    #[serde(default, rename = "added")]
    added: Vec<MappingTriplet>,
    #[serde(default, rename = "removed")]
    removed: Vec<MappingTriplet>,
    #[serde(default, rename = "headcount")]
    headcount: Vec<HeadcountRow>,
}

#[derive(Serialize, Deserialize)]
struct HeadcountRow {
    ka: String,
    topic: String,
    depth: u32,
    before: u32,
    after: u32,
}

pub fn diff_to_string(
    diff: &ProfileDiff,
    version: &TaxonomyVersion,
) -> Result<String, FormatError> {
    let dto = DiffDto {
        schema: SCHEMA,
        kind: "diff".to_string(),
        taxonomy_version: version.to_string(),
        employees_before: diff.employees_before,
        employees_after: diff.employees_after,
        added: diff.added.iter().cloned().collect(),
        removed: diff.removed.iter().cloned().collect(),
        headcount: diff
            .headcount_deltas
            .iter()
            .map(|d| HeadcountRow {
                ka: d.triplet.ka.clone(),
                topic: d.triplet.topic.clone(),
                depth: d.triplet.depth,
                before: d.before,
                after: d.after,
            })
            .collect(),
    };
    emit("diff", &dto)
}

// ---------------------------------------------------------------------------
// Mapping outputs
// ---------------------------------------------------------------------------

/// One CSV row per resolved (concept, triplet) pair:
/// `concept,ka,topic,depth`.
pub fn mapped_csv(outcomes: &[MappingOutcome]) -> String {
    let mut out = String::from("concept,ka,topic,depth\n");
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    for outcome in outcomes {
        for t in &outcome.triplets {
            writer
                .write_record([
                    outcome.concept.norm(),
                    &t.ka,
                    &t.topic,
                    &t.depth.to_string(),
                ])
                .expect("writing csv to memory");
        }
    }
    let body = writer.into_inner().expect("flushing csv to memory");
    out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
    out
}

/// One normalized concept per line, as produced by the review queue.
pub fn review_queue_text(queue: &[Concept]) -> String {
    let mut out = String::new();
    for concept in queue {
        out.push_str(concept.norm());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Human-readable text
// ---------------------------------------------------------------------------

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

pub fn broad_shares_text(shares: &BroadShares) -> String {
    let mut rows: Vec<(String, usize, Pct)> = shares
        .shares
        .iter()
        .map(|s| (s.name.clone(), s.count, s.share))
        .collect();
    rows.push((
        "Introduction (unattributed)".to_string(),
        shares.unattributed_count,
        shares.unattributed,
    ));
    let name_w = rows
        .iter()
        .map(|(n, _, _)| n.len())
        .max()
        .unwrap_or(8)
        .max(8);

    let mut out = String::new();
    let _ = writeln!(out, "{}  Triplets   Share", pad("Category", name_w));
    for (name, count, share) in rows {
        let _ = writeln!(
            out,
            "{}  {count:>8}  {:>6}%",
            pad(&name, name_w),
            share.to_string()
        );
    }
    if shares.basis == 0 {
        let _ = writeln!(out, "Basis: 0 distinct triplets (empty profile)");
    } else {
        let _ = writeln!(out, "Basis: {} distinct triplets", shares.basis);
    }
    out
}

pub fn ka_coverage_text(rows: &[KACoverage]) -> String {
    let name_w = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let with_headcount = rows.iter().any(|r| r.max_headcount.is_some());

    let mut out = String::new();
    let header = format!(
        "{:<6} {}  Covered  Total   Share",
        "KA",
        pad("Name", name_w)
    );
    if with_headcount {
        let _ = writeln!(out, "{header}  Peak headcount");
    } else {
        let _ = writeln!(out, "{header}");
    }
    for r in rows {
        let line = format!(
            "{:<6} {}  {:>7}  {:>5}  {:>6}%",
            r.ka,
            pad(&r.name, name_w),
            r.covered,
            r.total,
            r.share.to_string()
        );
        match r.max_headcount {
            Some(h) if with_headcount => {
                let _ = writeln!(out, "{line}  {h:>14}");
            }
            _ => {
                let _ = writeln!(out, "{line}");
            }
        }
    }
    out
}

pub fn composition_text(stats: &CompositionStats) -> String {
    let mut out = String::new();
    if stats.basis == 0 {
        let _ = writeln!(out, "No mapped triplets (empty profile).");
        return out;
    }
    let _ = writeln!(out, "Distinct triplets (basis): {}", stats.basis);
    let _ = writeln!(
        out,
        "Taught (TRA+CER):  {:>4} distinct, {:>4} exclusive  {:>6}%",
        stats.tra_cer_count,
        stats.tra_cer_exclusive,
        stats.tra_cer_pct.to_string()
    );
    let _ = writeln!(
        out,
        "Applied (EXP+RES): {:>4} distinct, {:>4} exclusive  {:>6}%",
        stats.exp_res_count,
        stats.exp_res_exclusive,
        stats.exp_res_pct.to_string()
    );
    let _ = writeln!(
        out,
        "Claimed by both:   {:>4}                   {:>6}%",
        stats.overlap,
        stats.overlap_pct.to_string()
    );
    out
}

pub fn gaps_text(report: &GapReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Knowledge areas with no coverage:");
    if report.missing_kas.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for m in &report.missing_kas {
        let bucket = m.category.as_deref().unwrap_or("Introduction");
        let _ = writeln!(out, "  [{bucket}] {} ({})", m.name, m.ka);
    }
    if report.depth >= 2 {
        let _ = writeln!(out, "Uncovered level-2 topics in covered areas:");
        if report.topic_gaps.is_empty() {
            let _ = writeln!(out, "  none");
        }
        for g in &report.topic_gaps {
            let _ = writeln!(out, "  {}: {} ({})", g.ka, g.label, g.topic);
        }
    }
    out
}

/// Indented tree view with one marker per node: `[x]` practiced, `[-]` total
/// only, `[ ]` uncovered.
pub fn tree_text(area: &KnowledgeArea, ann: &TreeAnnotation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} — {} (as of {})", area.code, area.name, ann.as_of);
    for node in area.topics() {
        let flags = ann.nodes.get(&node.id).copied().unwrap_or_default();
        let marker = if flags.covered_practiced {
            "[x]"
        } else if flags.covered_total {
            "[-]"
        } else {
            "[ ]"
        };
        let indent = "    ".repeat((node.level - 1) as usize);
        let _ = writeln!(out, "{indent}{marker} {}", node.label);
    }
    let _ = writeln!(out, "legend: [x] practiced  [-] total only  [ ] uncovered");
    out
}

pub fn diff_text(diff: &ProfileDiff) -> String {
    let mut out = String::new();
    if diff.is_empty() {
        let _ = writeln!(out, "No changes.");
        return out;
    }
    let _ = writeln!(out, "Added triplets ({}):", diff.added.len());
    for t in &diff.added {
        let _ = writeln!(out, "  + {} {} (level {})", t.ka, t.topic, t.depth);
    }
    let _ = writeln!(out, "Removed triplets ({}):", diff.removed.len());
    for t in &diff.removed {
        let _ = writeln!(out, "  - {} {} (level {})", t.ka, t.topic, t.depth);
    }
    if !diff.headcount_deltas.is_empty() {
        let _ = writeln!(out, "Headcount changes:");
        for d in &diff.headcount_deltas {
            let _ = writeln!(
                out,
                "  {} {}: {} -> {}",
                d.triplet.ka, d.triplet.topic, d.before, d.after
            );
        }
    }
    let _ = writeln!(
        out,
        "Employees: {} -> {}",
        diff.employees_before, diff.employees_after
    );
    out
}
