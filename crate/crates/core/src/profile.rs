//! Profile composition: knowledge sources → per-employee profiles → the
//! organisational union, with validity windows and the currency filter.
//!
//! A source contributes triplets stamped with provenance (kind, label) and a
//! validity interval. An employee profile is the union over their sources;
//! the organisational profile is the union over employees, with per-triplet
//! headcounts carried as auxiliary metadata. Filtering a profile to a point
//! in time keeps exactly the triplets whose validity contains that date —
//! interval ends are inclusive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{self, Concept, MappingError, MappingReference, MappingTriplet};
use crate::taxonomy::{Taxonomy, TaxonomyVersion};

/// A calendar date used as a currency cut-off.
pub type TimePoint = NaiveDate;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// The four kinds of knowledge source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SourceKind {
    /// Certification.
    Cer,
    /// Training.
    Tra,
    /// Experience.
    Exp,
    /// Responsibility — always current while held.
    Res,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::Cer,
        SourceKind::Tra,
        SourceKind::Exp,
        SourceKind::Res,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SourceKind::Cer => "CER",
            SourceKind::Tra => "TRA",
            SourceKind::Exp => "EXP",
            SourceKind::Res => "RES",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "CER" => Ok(SourceKind::Cer),
            "TRA" => Ok(SourceKind::Tra),
            "EXP" => Ok(SourceKind::Exp),
            "RES" => Ok(SourceKind::Res),
            other => Err(format!(
                "unknown source kind `{other}` (expected CER, TRA, EXP or RES)"
            )),
        }
    }
}

/// A validity window. `end = None` means open-ended. Both bounds are
/// inclusive: a triplet valid until `E` is still present at `E` and gone the
/// day after.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValidityInterval {
    pub start: NaiveDate,
    pub end: Option<NaiveDate>,
}

impl ValidityInterval {
    pub fn open_from(start: NaiveDate) -> Self {
        Self { start, end: None }
    }

    pub fn closed(start: NaiveDate, end: NaiveDate) -> Self {
        debug_assert!(end >= start);
        Self {
            start,
            end: Some(end),
        }
    }

    pub fn is_open(&self) -> bool {
        self.end.is_none()
    }

    /// Membership test for the currency cut-off: `start ≤ at ≤ end`.
    pub fn contains(&self, at: TimePoint) -> bool {
        self.start <= at && self.end.is_none_or(|end| at <= end)
    }

    /// Smallest interval covering both, used when merging duplicate sources.
    pub fn widen(&self, other: &ValidityInterval) -> ValidityInterval {
        ValidityInterval {
            start: self.start.min(other.start),
            end: match (self.end, other.end) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            },
        }
    }
}

/// Length of a default validity window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Years(u32),
    Days(u32),
}

impl Window {
    /// The window's end date counted from `start`. Calendar-year windows
    /// clamp to the end of the month when the anniversary does not exist
    /// (29 February).
    pub fn end_from(self, start: NaiveDate) -> NaiveDate {
        match self {
            Window::Years(y) => start
                .checked_add_months(Months::new(y * 12))
                .unwrap_or(NaiveDate::MAX),
            Window::Days(d) => start
                .checked_add_days(Days::new(u64::from(d)))
                .unwrap_or(NaiveDate::MAX),
        }
    }
}

/// Default validity windows per source kind, applied when a source carries
/// no explicit expiry. Responsibilities take no window: they stay current
/// while held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityPolicy {
    pub cer: Window,
    pub tra: Window,
    pub exp: Window,
}

impl Default for ValidityPolicy {
    fn default() -> Self {
        Self {
            cer: Window::Years(3),
            tra: Window::Years(5),
            exp: Window::Years(10),
        }
    }
}

impl ValidityPolicy {
    fn window(&self, kind: SourceKind) -> Option<Window> {
        match kind {
            SourceKind::Cer => Some(self.cer),
            SourceKind::Tra => Some(self.tra),
            SourceKind::Exp => Some(self.exp),
            SourceKind::Res => None,
        }
    }
}

/// One declared knowledge source of an employee. `valid_until` overrides the
/// policy window; it is rejected on RES sources, which are open-ended by
/// definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeSource {
    pub kind: SourceKind,
    pub label: String,
    pub acquired: NaiveDate,
    pub valid_until: Option<NaiveDate>,
    pub concepts: Vec<String>,
    pub credential: Option<String>,
}

/// A mapped triplet that remembers where it came from and how long it holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProvenancedTriplet {
    pub triplet: MappingTriplet,
    pub kind: SourceKind,
    pub source_label: String,
    pub validity: ValidityInterval,
}

/// An employee's knowledge profile. `as_of` present means the currency
/// filter ran at that date and every triplet's validity contains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmployeeProfile {
    pub employee: String,
    pub triplets: BTreeSet<ProvenancedTriplet>,
    pub as_of: Option<TimePoint>,
}

impl EmployeeProfile {
    /// The bare triplet set, provenance stripped.
    pub fn triplet_set(&self) -> BTreeSet<MappingTriplet> {
        self.triplets.iter().map(|p| p.triplet.clone()).collect()
    }

    /// Apply the currency filter at `at`. Contractive and idempotent.
    pub fn filtered(&self, at: TimePoint) -> EmployeeProfile {
        EmployeeProfile {
            employee: self.employee.clone(),
            triplets: self
                .triplets
                .iter()
                .filter(|p| p.validity.contains(at))
                .cloned()
                .collect(),
            as_of: Some(at),
        }
    }
}

/// The organisational profile: the union of employee triplet sets, with the
/// number of contributing employees kept per triplet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgProfile {
    pub org: String,
    pub triplets: BTreeSet<MappingTriplet>,
    pub headcount: BTreeMap<MappingTriplet, u32>,
    pub employees: u32,
    pub as_of: Option<TimePoint>,
}

/// Triplets contributed by one source, plus the concepts the reference could
/// not resolve.
#[derive(Debug, Clone)]
pub struct SourceProfile {
    pub triplets: BTreeSet<ProvenancedTriplet>,
    pub review: Vec<Concept>,
}

/// A persistable point-in-time record of an organisational profile, pinned
/// to the taxonomy version its triplets were validated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub taxonomy_version: TaxonomyVersion,
    pub profile: OrgProfile,
}

/// Pin an organisational profile to a taxonomy version for persistence.
pub fn snapshot(profile: &OrgProfile, version: &TaxonomyVersion) -> Snapshot {
    Snapshot {
        taxonomy_version: version.clone(),
        profile: profile.clone(),
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("mapping reference targets taxonomy {reference}, loaded taxonomy is {taxonomy}")]
    VersionMismatch { reference: String, taxonomy: String },
    #[error("source `{label}`: valid_until {valid_until} precedes acquisition date {acquired}")]
    InvalidValidity {
        label: String,
        acquired: NaiveDate,
        valid_until: NaiveDate,
    },
    #[error("source `{label}`: RES sources are open-ended and take no valid_until")]
    ResWithEnd { label: String },
    #[error(transparent)]
    Concept(#[from] MappingError),
    #[error("profiles carry mixed as_of dates; filter all inputs to the same point first")]
    MixedAsOf,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Validity window of a source: an explicit expiry wins, otherwise the
/// policy window runs from acquisition. RES is open-ended regardless.
pub fn validity_of(src: &KnowledgeSource, policy: &ValidityPolicy) -> ValidityInterval {
    match policy.window(src.kind) {
        None => ValidityInterval::open_from(src.acquired),
        Some(window) => {
            let end = src
                .valid_until
                .unwrap_or_else(|| window.end_from(src.acquired));
            ValidityInterval::closed(src.acquired, end.max(src.acquired))
        }
    }
}

/// Reject malformed sources: RES with an expiry, or an expiry before the
/// acquisition date.
pub fn validate_source(src: &KnowledgeSource) -> Result<(), ProfileError> {
    if let Some(until) = src.valid_until {
        if src.kind == SourceKind::Res {
            return Err(ProfileError::ResWithEnd {
                label: src.label.clone(),
            });
        }
        if until < src.acquired {
            return Err(ProfileError::InvalidValidity {
                label: src.label.clone(),
                acquired: src.acquired,
                valid_until: until,
            });
        }
    }
    Ok(())
}

fn ensure_versions(reference: &MappingReference, tax: &Taxonomy) -> Result<(), ProfileError> {
    if reference.version() != tax.version() {
        return Err(ProfileError::VersionMismatch {
            reference: reference.version().to_string(),
            taxonomy: tax.version().to_string(),
        });
    }
    Ok(())
}

/// Map one source's credential and concepts into provenanced triplets.
pub fn build_source_profile(
    src: &KnowledgeSource,
    reference: &MappingReference,
    tax: &Taxonomy,
    policy: &ValidityPolicy,
) -> Result<SourceProfile, ProfileError> {
    ensure_versions(reference, tax)?;
    validate_source(src)?;
    let validity = validity_of(src, policy);
    let stamp = |triplet: MappingTriplet| ProvenancedTriplet {
        triplet,
        kind: src.kind,
        source_label: src.label.clone(),
        validity,
    };

    let mut triplets = BTreeSet::new();
    if let Some(name) = &src.credential {
        triplets.extend(
            mapping::catalog_lookup(name, reference)
                .into_iter()
                .map(stamp),
        );
    }
    let concepts = src
        .concepts
        .iter()
        .map(|s| mapping::normalize(s))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = mapping::map_concept_set(&concepts, reference);
    for outcome in &outcomes {
        triplets.extend(outcome.triplets.iter().cloned().map(stamp));
    }
    Ok(SourceProfile {
        triplets,
        review: mapping::review_queue(&outcomes),
    })
}

/// Collapse duplicate sources (same kind and label) into one: widest
/// validity, concepts unioned in first-appearance order, first credential.
fn merge_duplicate_sources(
    sources: &[KnowledgeSource],
    policy: &ValidityPolicy,
) -> Vec<KnowledgeSource> {
    let mut order: Vec<(SourceKind, &str)> = Vec::new();
    let mut groups: BTreeMap<(SourceKind, &str), Vec<&KnowledgeSource>> = BTreeMap::new();
    for src in sources {
        let key = (src.kind, src.label.as_str());
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(src);
    }

    order
        .into_iter()
        .map(|key| {
            let copies = &groups[&key];
            if copies.len() == 1 {
                return copies[0].clone();
            }
            let merged = copies
                .iter()
                .map(|s| validity_of(s, policy))
                .reduce(|a, b| a.widen(&b))
                .expect("group is non-empty");
            let mut concepts: Vec<String> = Vec::new();
            for src in copies {
                for c in &src.concepts {
                    if !concepts.contains(c) {
                        concepts.push(c.clone());
                    }
                }
            }
            KnowledgeSource {
                kind: key.0,
                label: key.1.to_string(),
                acquired: merged.start,
                // The merged window is re-expressed as an explicit expiry so
                // validity_of reproduces it; RES stays open-ended.
                valid_until: merged.end,
                concepts,
                credential: copies.iter().find_map(|s| s.credential.clone()),
            }
        })
        .collect()
}

/// Union all sources into one employee profile, optionally currency-filtered
/// at `as_of`. Returns the profile and the deduplicated review queue.
pub fn compose_employee(
    employee: &str,
    sources: &[KnowledgeSource],
    reference: &MappingReference,
    tax: &Taxonomy,
    policy: &ValidityPolicy,
    as_of: Option<TimePoint>,
) -> Result<(EmployeeProfile, Vec<Concept>), ProfileError> {
    ensure_versions(reference, tax)?;
    for src in sources {
        validate_source(src)?;
    }

    let mut triplets: BTreeSet<ProvenancedTriplet> = BTreeSet::new();
    let mut review: BTreeMap<String, Concept> = BTreeMap::new();
    for src in &merge_duplicate_sources(sources, policy) {
        let sp = build_source_profile(src, reference, tax, policy)?;
        triplets.extend(sp.triplets);
        for concept in sp.review {
            review.entry(concept.norm().to_string()).or_insert(concept);
        }
    }
    if let Some(at) = as_of {
        triplets.retain(|p| p.validity.contains(at));
    }
    Ok((
        EmployeeProfile {
            employee: employee.to_string(),
            triplets,
            as_of,
        },
        review.into_values().collect(),
    ))
}

/// Union employee profiles into the organisational profile. All inputs must
/// agree on `as_of`; headcount counts distinct contributing employees.
pub fn compose_org(org: &str, profiles: &[EmployeeProfile]) -> Result<OrgProfile, ProfileError> {
    let mut as_of_values: BTreeSet<Option<TimePoint>> = profiles.iter().map(|p| p.as_of).collect();
    let as_of = match as_of_values.len() {
        0 => None,
        1 => as_of_values.pop_first().unwrap(),
        _ => return Err(ProfileError::MixedAsOf),
    };

    let mut contributors: BTreeMap<MappingTriplet, BTreeSet<&str>> = BTreeMap::new();
    for profile in profiles {
        for p in &profile.triplets {
            contributors
                .entry(p.triplet.clone())
                .or_default()
                .insert(profile.employee.as_str());
        }
    }
    let headcount: BTreeMap<MappingTriplet, u32> = contributors
        .iter()
        .map(|(t, ids)| (t.clone(), ids.len() as u32))
        .collect();
    Ok(OrgProfile {
        org: org.to_string(),
        triplets: contributors.into_keys().collect(),
        headcount,
        employees: profiles.len() as u32,
        as_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{self, date};
    use proptest::prelude::*;

    fn src(kind: SourceKind, label: &str, acquired: &str) -> KnowledgeSource {
        KnowledgeSource {
            kind,
            label: label.to_string(),
            acquired: date(acquired),
            valid_until: None,
            concepts: Vec::new(),
            credential: None,
        }
    }

    fn with_concepts(mut s: KnowledgeSource, concepts: &[&str]) -> KnowledgeSource {
        s.concepts = concepts.iter().map(|c| c.to_string()).collect();
        s
    }

    #[test]
    fn explicit_expiry_wins() {
        let mut cer = src(SourceKind::Cer, "Cert A", "2020-01-01");
        cer.valid_until = Some(date("2023-01-01"));
        let v = validity_of(&cer, &ValidityPolicy::default());
        assert_eq!(
            v,
            ValidityInterval::closed(date("2020-01-01"), date("2023-01-01"))
        );
    }

    #[test]
    fn policy_windows_run_from_acquisition() {
        let policy = ValidityPolicy::default();
        let tra = src(SourceKind::Tra, "Course", "2020-01-01");
        assert_eq!(validity_of(&tra, &policy).end, Some(date("2025-01-01")));
        let cer = src(SourceKind::Cer, "Cert", "2020-01-01");
        assert_eq!(validity_of(&cer, &policy).end, Some(date("2023-01-01")));
        let exp = src(SourceKind::Exp, "Role", "2020-01-01");
        assert_eq!(validity_of(&exp, &policy).end, Some(date("2030-01-01")));
    }

    #[test]
    fn leap_day_anniversary_clamps() {
        let cer = src(SourceKind::Cer, "Cert", "2020-02-29");
        let v = validity_of(&cer, &ValidityPolicy::default());
        assert_eq!(v.end, Some(date("2023-02-28")));
    }

    #[test]
    fn day_windows_supported() {
        let policy = ValidityPolicy {
            cer: Window::Days(90),
            ..ValidityPolicy::default()
        };
        let cer = src(SourceKind::Cer, "Cert", "2020-01-01");
        assert_eq!(validity_of(&cer, &policy).end, Some(date("2020-03-31")));
    }

    #[test]
    fn res_is_always_open_ended() {
        let res = src(SourceKind::Res, "Duty", "2011-07-04");
        let v = validity_of(&res, &ValidityPolicy::default());
        assert!(v.is_open());
        assert!(v.contains(date("2099-12-31")));
    }

    #[test]
    fn interval_end_is_inclusive() {
        let v = ValidityInterval::closed(date("2020-01-01"), date("2023-06-15"));
        assert!(v.contains(date("2023-06-15")));
        assert!(!v.contains(date("2023-06-16")));
        assert!(!v.contains(date("2019-12-31")));
        assert!(v.contains(date("2020-01-01")));
    }

    #[test]
    fn credential_source_takes_catalog_set() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let mut cer = src(SourceKind::Cer, "Cert X", "2022-03-01");
        cer.credential = Some("cert-x".to_string());
        let sp = build_source_profile(&cer, &reference, &tax, &ValidityPolicy::default()).unwrap();
        assert_eq!(sp.triplets.len(), 2);
        assert!(sp.triplets.iter().all(|p| p.kind == SourceKind::Cer));
        assert!(sp.review.is_empty());
    }

    #[test]
    fn concept_source_maps_through_reference() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let tra = with_concepts(
            src(SourceKind::Tra, "IDS course", "2023-01-01"),
            &["Intrusion Detection"],
        );
        let sp = build_source_profile(&tra, &reference, &tax, &ValidityPolicy::default()).unwrap();
        assert_eq!(sp.triplets.len(), 1);
        let p = sp.triplets.iter().next().unwrap();
        assert_eq!((p.kind, p.triplet.ka.as_str()), (SourceKind::Tra, "ONE"));
    }

    #[test]
    fn unknown_concepts_fill_review_queue() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let tra = with_concepts(
            src(SourceKind::Tra, "Mystery course", "2023-01-01"),
            &["warp drives", "flux capacitors"],
        );
        let sp = build_source_profile(&tra, &reference, &tax, &ValidityPolicy::default()).unwrap();
        assert!(sp.triplets.is_empty());
        assert_eq!(sp.review.len(), 2);
    }

    #[test]
    fn version_mismatch_rejected() {
        let tax = testutil::tax();
        let other = crate::taxonomy::parse_taxonomy(
            "8.8.8",
            &testutil::TAX_FIXTURE.replace("9.9.9", "8.8.8"),
        )
        .unwrap();
        let reference = testutil::reference();
        let s = src(SourceKind::Cer, "Cert", "2020-01-01");
        assert!(build_source_profile(&s, &reference, &other, &ValidityPolicy::default()).is_err());
        assert!(build_source_profile(&s, &reference, &tax, &ValidityPolicy::default()).is_ok());
    }

    #[test]
    fn res_with_expiry_rejected() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let mut res = src(SourceKind::Res, "Duty", "2020-01-01");
        res.valid_until = Some(date("2021-01-01"));
        assert!(matches!(
            build_source_profile(&res, &reference, &tax, &ValidityPolicy::default()),
            Err(ProfileError::ResWithEnd { .. })
        ));
    }

    #[test]
    fn backwards_expiry_rejected() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let mut cer = src(SourceKind::Cer, "Cert", "2020-06-01");
        cer.valid_until = Some(date("2020-01-01"));
        assert!(matches!(
            build_source_profile(&cer, &reference, &tax, &ValidityPolicy::default()),
            Err(ProfileError::InvalidValidity { .. })
        ));
    }

    #[test]
    fn zero_sources_compose_to_empty_profile() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let (profile, review) = compose_employee(
            "e1",
            &[],
            &reference,
            &tax,
            &ValidityPolicy::default(),
            None,
        )
        .unwrap();
        assert!(profile.triplets.is_empty());
        assert!(review.is_empty());
    }

    #[test]
    fn currency_filter_keeps_only_live_sources() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let policy = ValidityPolicy::default();
        // CER expires 2022 (explicit); RES stays open.
        let mut cer = with_concepts(src(SourceKind::Cer, "Cert", "2019-01-01"), &["risk"]);
        cer.valid_until = Some(date("2022-01-01"));
        let res = with_concepts(
            src(SourceKind::Res, "Duty", "2019-01-01"),
            &["intrusion detection"],
        );
        let sources = [cer, res];

        let (at_2023, _) = compose_employee(
            "e1",
            &sources,
            &reference,
            &tax,
            &policy,
            Some(date("2023-06-01")),
        )
        .unwrap();
        let kinds: Vec<SourceKind> = at_2023.triplets.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, [SourceKind::Res]);

        // At the inclusive boundary the CER is still present.
        let (at_boundary, _) = compose_employee(
            "e1",
            &sources,
            &reference,
            &tax,
            &policy,
            Some(date("2022-01-01")),
        )
        .unwrap();
        assert_eq!(at_boundary.triplets.len(), 2);
        let (past_boundary, _) = compose_employee(
            "e1",
            &sources,
            &reference,
            &tax,
            &policy,
            Some(date("2022-01-02")),
        )
        .unwrap();
        assert_eq!(past_boundary.triplets.len(), 1);
    }

    #[test]
    fn filter_after_equals_filter_during() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let policy = ValidityPolicy::default();
        let sources = [
            with_concepts(src(SourceKind::Tra, "T", "2018-01-01"), &["risk"]),
            with_concepts(src(SourceKind::Res, "R", "2018-01-01"), &["basics"]),
        ];
        let at = date("2024-05-05");
        let (unfiltered, _) =
            compose_employee("e1", &sources, &reference, &tax, &policy, None).unwrap();
        let (during, _) =
            compose_employee("e1", &sources, &reference, &tax, &policy, Some(at)).unwrap();
        assert_eq!(unfiltered.filtered(at), during);
        assert_eq!(during.filtered(at), during);
    }

    #[test]
    fn duplicate_sources_merge_widest() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let policy = ValidityPolicy::default();
        // Same certification renewed: two copies, three-year default windows.
        let first = with_concepts(src(SourceKind::Cer, "Cert A", "2016-05-01"), &["risk"]);
        let second = with_concepts(
            src(SourceKind::Cer, "Cert A", "2021-05-01"),
            &["intrusion detection"],
        );
        let (profile, _) =
            compose_employee("e1", &[first, second], &reference, &tax, &policy, None).unwrap();
        // Concepts from both copies, all under the merged interval.
        assert_eq!(profile.triplets.len(), 2);
        for p in &profile.triplets {
            assert_eq!(
                p.validity,
                ValidityInterval::closed(date("2016-05-01"), date("2024-05-01"))
            );
        }
        // The merged window bridges the gap between the two copies.
        let (mid_gap, _) = compose_employee(
            "e1",
            &[
                with_concepts(src(SourceKind::Cer, "Cert A", "2016-05-01"), &["risk"]),
                with_concepts(src(SourceKind::Cer, "Cert A", "2021-05-01"), &["risk"]),
            ],
            &reference,
            &tax,
            &policy,
            Some(date("2020-01-01")),
        )
        .unwrap();
        assert_eq!(mid_gap.triplets.len(), 1);
    }

    #[test]
    fn org_union_and_headcounts() {
        let tax = testutil::tax();
        let reference = testutil::reference();
        let policy = ValidityPolicy::default();
        let (a, _) = compose_employee(
            "a",
            &[with_concepts(
                src(SourceKind::Tra, "T", "2020-01-01"),
                &["risk", "basics"],
            )],
            &reference,
            &tax,
            &policy,
            None,
        )
        .unwrap();
        let (b, _) = compose_employee(
            "b",
            &[with_concepts(
                src(SourceKind::Tra, "T", "2020-01-01"),
                &["risk"],
            )],
            &reference,
            &tax,
            &policy,
            None,
        )
        .unwrap();

        let single = compose_org("org", std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.triplets, a.triplet_set());
        assert!(single.headcount.values().all(|&c| c == 1));
        assert_eq!(single.employees, 1);

        let both = compose_org("org", &[a.clone(), b.clone()]).unwrap();
        assert_eq!(both.triplets, a.triplet_set());
        assert_eq!(both.employees, 2);
        let risk = reference_triplet(&reference, "risk");
        assert_eq!(both.headcount[&risk], 2);
        let basics = reference_triplet(&reference, "basics");
        assert_eq!(both.headcount[&basics], 1);

        // Same triplet set from two profiles of the same shape.
        let twin = EmployeeProfile {
            employee: "c".into(),
            ..a.clone()
        };
        let doubled = compose_org("org", &[a.clone(), twin]).unwrap();
        assert_eq!(doubled.triplets, a.triplet_set());
        assert!(doubled.headcount.values().all(|&c| c == 2));
    }

    fn reference_triplet(reference: &MappingReference, concept: &str) -> MappingTriplet {
        mapping::map_concept(&mapping::normalize(concept).unwrap(), reference)
            .triplets
            .into_iter()
            .next()
            .unwrap()
    }

    #[test]
    fn disjoint_profiles_union_additively() {
        let tax = testutil::tax();
        let all: Vec<MappingTriplet> = all_triplets(&tax);
        let a = profile_from("a", &all[0..3]);
        let b = profile_from("b", &all[3..7]);
        let org = compose_org("org", &[a, b]).unwrap();
        assert_eq!(org.triplets.len(), 7);
        assert!(org.headcount.values().all(|&c| c == 1));
    }

    #[test]
    fn mixed_as_of_rejected() {
        let tax = testutil::tax();
        let all = all_triplets(&tax);
        let mut a = profile_from("a", &all[0..2]);
        let mut b = profile_from("b", &all[2..4]);
        a.as_of = Some(date("2024-01-01"));
        b.as_of = Some(date("2024-06-01"));
        assert!(matches!(
            compose_org("org", &[a.clone(), b]),
            Err(ProfileError::MixedAsOf)
        ));
        let c = EmployeeProfile {
            as_of: None,
            ..a.clone()
        };
        assert!(matches!(
            compose_org("org", &[a, c]),
            Err(ProfileError::MixedAsOf)
        ));
    }

    // -- helpers for set-algebra properties ---------------------------------

    fn all_triplets(tax: &Taxonomy) -> Vec<MappingTriplet> {
        tax.kas()
            .iter()
            .flat_map(|ka| {
                ka.topics()
                    .map(|n| MappingTriplet::new(&ka.code, &n.id, n.level))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn profile_from(id: &str, triplets: &[MappingTriplet]) -> EmployeeProfile {
        EmployeeProfile {
            employee: id.to_string(),
            triplets: triplets
                .iter()
                .map(|t| ProvenancedTriplet {
                    triplet: t.clone(),
                    kind: SourceKind::Res,
                    source_label: "seed".to_string(),
                    validity: ValidityInterval::open_from(date("2015-01-01")),
                })
                .collect(),
            as_of: None,
        }
    }

    proptest! {
        #[test]
        fn org_matches_brute_force_union(
            picks in prop::collection::vec(
                prop::collection::btree_set(0usize..12, 0..8), 0..6
            )
        ) {
            let tax = testutil::tax();
            let all = all_triplets(&tax);
            let profiles: Vec<EmployeeProfile> = picks
                .iter()
                .enumerate()
                .map(|(i, set)| {
                    let ts: Vec<MappingTriplet> =
                        set.iter().map(|&x| all[x % all.len()].clone()).collect();
                    profile_from(&format!("e{i}"), &ts)
                })
                .collect();
            let org = compose_org("org", &profiles).unwrap();

            let mut expected: BTreeSet<MappingTriplet> = BTreeSet::new();
            for p in &profiles {
                expected.extend(p.triplet_set());
            }
            prop_assert_eq!(&org.triplets, &expected);
            for (t, &count) in &org.headcount {
                let brute = profiles.iter().filter(|p| p.triplet_set().contains(t)).count();
                prop_assert_eq!(count as usize, brute);
                prop_assert!(count >= 1 && count <= org.employees);
            }
        }

        #[test]
        fn org_union_is_order_independent(
            picks in prop::collection::vec(
                prop::collection::btree_set(0usize..12, 1..6), 1..5
            ),
            seed in 0u64..1000
        ) {
            let tax = testutil::tax();
            let all = all_triplets(&tax);
            let mut profiles: Vec<EmployeeProfile> = picks
                .iter()
                .enumerate()
                .map(|(i, set)| {
                    let ts: Vec<MappingTriplet> =
                        set.iter().map(|&x| all[x % all.len()].clone()).collect();
                    profile_from(&format!("e{i}"), &ts)
                })
                .collect();
            let forward = compose_org("org", &profiles).unwrap();
            // Deterministic shuffle driven by the seed.
            let n = profiles.len();
            for i in 0..n {
                let j = (seed as usize + i * 7) % n;
                profiles.swap(i, j);
            }
            let shuffled = compose_org("org", &profiles).unwrap();
            prop_assert_eq!(forward.triplets, shuffled.triplets);
            prop_assert_eq!(forward.headcount, shuffled.headcount);
        }

        #[test]
        fn adding_a_source_never_shrinks_profile(
            base in prop::collection::vec(0usize..5, 0..4),
            extra in 0usize..5
        ) {
            let tax = testutil::tax();
            let reference = testutil::reference();
            let policy = ValidityPolicy::default();
            let known = ["intrusion detection", "packet filtering", "risk", "cross cutting", "basics"];
            let mut sources: Vec<KnowledgeSource> = base
                .iter()
                .enumerate()
                .map(|(i, &k)| with_concepts(
                    src(SourceKind::Tra, &format!("t{i}"), "2020-01-01"),
                    &[known[k]],
                ))
                .collect();
            let (before, _) =
                compose_employee("e", &sources, &reference, &tax, &policy, None).unwrap();
            sources.push(with_concepts(
                src(SourceKind::Res, "r-extra", "2020-01-01"),
                &[known[extra]],
            ));
            let (after, _) =
                compose_employee("e", &sources, &reference, &tax, &policy, None).unwrap();
            prop_assert!(after.triplet_set().is_superset(&before.triplet_set()));
        }

        #[test]
        fn filter_is_contractive_and_idempotent(
            year in 2015i32..2035,
            month in 1u32..13,
            day in 1u32..29
        ) {
            let tax = testutil::tax();
            let reference = testutil::reference();
            let policy = ValidityPolicy::default();
            let sources = [
                with_concepts(src(SourceKind::Cer, "c", "2019-03-01"), &["risk"]),
                with_concepts(src(SourceKind::Tra, "t", "2021-07-01"), &["packet filtering"]),
                with_concepts(src(SourceKind::Res, "r", "2022-01-01"), &["basics"]),
            ];
            let at = NaiveDate::from_ymd_opt(year, month, day).unwrap();
            let (unfiltered, _) =
                compose_employee("e", &sources, &reference, &tax, &policy, None).unwrap();
            let filtered = unfiltered.filtered(at);
            prop_assert!(filtered.triplet_set().is_subset(&unfiltered.triplet_set()));
            prop_assert_eq!(filtered.filtered(at), filtered.clone());
            let (direct, _) =
                compose_employee("e", &sources, &reference, &tax, &policy, Some(at)).unwrap();
            prop_assert_eq!(filtered, direct);
        }
    }
}
