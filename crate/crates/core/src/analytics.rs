//! Analytics over knowledge profiles: broad-category shares, per-KA
//! coverage, topic-tree annotation, source-composition statistics, gap
//! reports and snapshot diffs.
//!
//! Percentages truncate (never round) to two decimals, so bucketed shares
//! may undershoot 100 by at most 0.01 per bucket. All operations are pure
//! and return rows in the taxonomy's reporting order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::mapping::MappingTriplet;
use crate::profile::{EmployeeProfile, OrgProfile, Snapshot, SourceKind, TimePoint};
use crate::taxonomy::Taxonomy;

// ---------------------------------------------------------------------------
// Percentages
// ---------------------------------------------------------------------------

/// A percentage held as integer hundredths (7352 ⇒ "73.52"), so arithmetic
/// is exact and truncation is explicit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pct(u32);

impl Pct {
    pub const ZERO: Pct = Pct(0);
    pub const HUNDRED: Pct = Pct(10_000);

    /// Truncated percentage of `num / den`; zero when `den` is zero.
    pub fn ratio(num: u64, den: u64) -> Pct {
        match (num * 10_000).checked_div(den) {
            Some(h) => Pct(h as u32),
            None => Pct(0),
        }
    }

    pub fn from_hundredths(h: u32) -> Pct {
        Pct(h)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Pct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl fmt::Debug for Pct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pct({self})")
    }
}

impl FromStr for Pct {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid percentage `{s}` (expected e.g. 73.52)");
        let (whole, frac) = s.split_once('.').unwrap_or((s, "00"));
        if frac.len() != 2 {
            return Err(bad());
        }
        let whole: u32 = whole.parse().map_err(|_| bad())?;
        let frac: u32 = frac.parse().map_err(|_| bad())?;
        Ok(Pct(whole * 100 + frac))
    }
}

impl Serialize for Pct {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pct {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Profile views
// ---------------------------------------------------------------------------

/// Common read-only view over employee and organisational profiles: the
/// distinct triplet set, plus headcounts where the profile carries them.
pub trait ProfileLike {
    fn distinct_triplets(&self) -> BTreeSet<&MappingTriplet>;
    fn headcount_of(&self, triplet: &MappingTriplet) -> Option<u32>;
    fn carries_headcount(&self) -> bool;
}

impl ProfileLike for EmployeeProfile {
    fn distinct_triplets(&self) -> BTreeSet<&MappingTriplet> {
        self.triplets.iter().map(|p| &p.triplet).collect()
    }

    fn headcount_of(&self, _triplet: &MappingTriplet) -> Option<u32> {
        None
    }

    fn carries_headcount(&self) -> bool {
        false
    }
}

impl ProfileLike for OrgProfile {
    fn distinct_triplets(&self) -> BTreeSet<&MappingTriplet> {
        self.triplets.iter().collect()
    }

    fn headcount_of(&self, triplet: &MappingTriplet) -> Option<u32> {
        self.headcount.get(triplet).copied()
    }

    fn carries_headcount(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// Share of one broad category in a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadCategoryShare {
    pub category: String,
    pub name: String,
    pub count: usize,
    pub share: Pct,
}

/// Broad-category breakdown of a profile. `unattributed` holds triplets
/// outside the five categories (the Introduction pseudo-area).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadShares {
    pub shares: Vec<BroadCategoryShare>,
    pub unattributed_count: usize,
    pub unattributed: Pct,
    pub basis: usize,
}

impl BroadShares {
    /// True when the profile contributed nothing — all-zero shares then mean
    /// "no data", not "zero coverage of everything".
    pub fn is_empty_basis(&self) -> bool {
        self.basis == 0
    }
}

/// Per-KA coverage row. `covered` counts distinct directly-referenced topic
/// nodes at the reporting depth; `max_headcount` is carried for
/// organisational profiles only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KACoverage {
    pub ka: String,
    pub name: String,
    pub covered: usize,
    pub total: usize,
    pub share: Pct,
    pub max_headcount: Option<u32>,
}

/// Coverage flags for one topic node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeFlags {
    pub covered_total: bool,
    pub covered_practiced: bool,
}

/// Total-vs-practiced annotation of one KA's topic tree. Every node of the
/// tree is present; both flag sets are ancestor-closed and practiced implies
/// total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAnnotation {
    pub ka: String,
    pub as_of: TimePoint,
    pub nodes: BTreeMap<String, NodeFlags>,
}

/// How a profile's distinct triplets split between taught knowledge
/// (TRA∪CER) and applied knowledge (EXP∪RES). Percentages attribute
/// exclusively; triplets claimed by both groups are reported as overlap, so
/// the three percentages sum to 100 up to truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionStats {
    pub basis: usize,
    pub tra_cer_count: usize,
    pub exp_res_count: usize,
    pub tra_cer_exclusive: usize,
    pub exp_res_exclusive: usize,
    pub overlap: usize,
    pub tra_cer_pct: Pct,
    pub exp_res_pct: Pct,
    pub overlap_pct: Pct,
}

/// A knowledge area with no coverage at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingKa {
    pub ka: String,
    pub name: String,
    pub category: Option<String>,
}

/// An uncovered level-2 topic inside an otherwise covered KA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicGap {
    pub ka: String,
    pub topic: String,
    pub label: String,
}

/// Zero-coverage areas of a profile, in reporting order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub depth: u32,
    pub missing_kas: Vec<MissingKa>,
    pub topic_gaps: Vec<TopicGap>,
}

/// Headcount movement on a triplet present in both snapshots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadcountDelta {
    pub triplet: MappingTriplet,
    pub before: u32,
    pub after: u32,
}

/// What changed between two snapshots of the same organisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileDiff {
    pub added: BTreeSet<MappingTriplet>,
    pub removed: BTreeSet<MappingTriplet>,
    pub headcount_deltas: Vec<HeadcountDelta>,
    pub employees_before: u32,
    pub employees_after: u32,
}

impl ProfileDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty()
            && self.removed.is_empty()
            && self.headcount_deltas.is_empty()
            && self.employees_before == self.employees_after
    }
}

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("unknown knowledge area `{0}`")]
    UnknownKa(String),
    #[error("tree annotation needs unfiltered profiles; input was already filtered at {0}")]
    FilteredInput(TimePoint),
    #[error("snapshots target different taxonomy versions ({a} vs {b})")]
    VersionMismatch { a: String, b: String },
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Split a profile's distinct triplets across the five broad categories.
/// An empty profile yields zero shares on a zero basis.
pub fn broad_shares<P: ProfileLike + ?Sized>(profile: &P, tax: &Taxonomy) -> BroadShares {
    let set = profile.distinct_triplets();
    let basis = set.len() as u64;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unattributed_count = 0usize;
    for t in &set {
        match tax.ka(&t.ka).and_then(|ka| ka.category.as_deref()) {
            Some(cat) => *counts.entry(cat).or_default() += 1,
            None => unattributed_count += 1,
        }
    }

    let shares = tax
        .categories()
        .iter()
        .map(|cat| {
            let count = counts.get(cat.code.as_str()).copied().unwrap_or(0);
            BroadCategoryShare {
                category: cat.code.clone(),
                name: cat.name.clone(),
                count,
                share: Pct::ratio(count as u64, basis),
            }
        })
        .collect();

    BroadShares {
        shares,
        unattributed_count,
        unattributed: Pct::ratio(unattributed_count as u64, basis),
        basis: basis as usize,
    }
}

/// Distinct covered topic nodes per KA at `depth` (levels ≤ depth), one row
/// per knowledge area in reporting order — zero rows included.
pub fn ka_coverage<P: ProfileLike + ?Sized>(
    profile: &P,
    tax: &Taxonomy,
    depth: u32,
) -> Vec<KACoverage> {
    debug_assert!(depth >= 1, "reporting depth starts at 1");
    let set = profile.distinct_triplets();

    tax.kas()
        .iter()
        .map(|ka| {
            let in_scope: Vec<&&MappingTriplet> = set
                .iter()
                .filter(|t| t.ka == ka.code && t.depth <= depth)
                .collect();
            let covered = in_scope
                .iter()
                .map(|t| t.topic.as_str())
                .collect::<BTreeSet<_>>()
                .len();
            let total = ka.topic_count_at(depth);
            let max_headcount = if profile.carries_headcount() {
                Some(
                    in_scope
                        .iter()
                        .filter_map(|t| profile.headcount_of(t))
                        .max()
                        .unwrap_or(0),
                )
            } else {
                None
            };
            KACoverage {
                ka: ka.code.clone(),
                name: ka.name.clone(),
                covered,
                total,
                share: Pct::ratio(covered as u64, total as u64),
                max_headcount,
            }
        })
        .collect()
}

/// Annotate one KA's topic tree with total and practiced coverage. Total
/// flags come from the profiles as given (which must be unfiltered);
/// practiced flags keep only sources whose validity contains `as_of`. Both
/// flag sets are closed over ancestors.
pub fn annotate_tree(
    profiles: &[EmployeeProfile],
    tax: &Taxonomy,
    ka: &str,
    as_of: TimePoint,
) -> Result<TreeAnnotation, AnalyticsError> {
    let area = tax
        .ka(ka)
        .ok_or_else(|| AnalyticsError::UnknownKa(ka.to_string()))?;
    for p in profiles {
        if let Some(at) = p.as_of {
            return Err(AnalyticsError::FilteredInput(at));
        }
    }

    let mut nodes: BTreeMap<String, NodeFlags> = area
        .topics()
        .map(|n| (n.id.clone(), NodeFlags::default()))
        .collect();

    for profile in profiles {
        for p in profile.triplets.iter().filter(|p| p.triplet.ka == ka) {
            let practiced = p.validity.contains(as_of);
            let mut id = p.triplet.topic.as_str();
            loop {
                if let Some(flags) = nodes.get_mut(id) {
                    flags.covered_total = true;
                    flags.covered_practiced |= practiced;
                }
                match id.rsplit_once('/') {
                    Some((parent, _)) => id = parent,
                    None => break,
                }
            }
        }
    }

    Ok(TreeAnnotation {
        ka: ka.to_string(),
        as_of,
        nodes,
    })
}

/// Attribute each distinct triplet to taught (TRA∪CER) and/or applied
/// (EXP∪RES) sources across the given employee profiles.
pub fn composition_stats(profiles: &[EmployeeProfile]) -> CompositionStats {
    let mut taught: BTreeSet<&MappingTriplet> = BTreeSet::new();
    let mut applied: BTreeSet<&MappingTriplet> = BTreeSet::new();
    for profile in profiles {
        for p in &profile.triplets {
            match p.kind {
                SourceKind::Tra | SourceKind::Cer => taught.insert(&p.triplet),
                SourceKind::Exp | SourceKind::Res => applied.insert(&p.triplet),
            };
        }
    }

    let overlap = taught.intersection(&applied).count();
    let basis = taught.union(&applied).count();
    let tra_cer_exclusive = taught.len() - overlap;
    let exp_res_exclusive = applied.len() - overlap;
    CompositionStats {
        basis,
        tra_cer_count: taught.len(),
        exp_res_count: applied.len(),
        tra_cer_exclusive,
        exp_res_exclusive,
        overlap,
        tra_cer_pct: Pct::ratio(tra_cer_exclusive as u64, basis as u64),
        exp_res_pct: Pct::ratio(exp_res_exclusive as u64, basis as u64),
        overlap_pct: Pct::ratio(overlap as u64, basis as u64),
    }
}

/// List knowledge areas with zero coverage and, when `depth ≥ 2`, the
/// uncovered level-2 topics of covered KAs. A level-2 topic counts as
/// covered when it or any of its descendants is referenced.
pub fn gaps<P: ProfileLike + ?Sized>(profile: &P, tax: &Taxonomy, depth: u32) -> GapReport {
    debug_assert!(depth >= 1, "reporting depth starts at 1");
    let set = profile.distinct_triplets();

    let mut missing_kas = Vec::new();
    let mut topic_gaps = Vec::new();
    for ka in tax.kas() {
        let in_ka: Vec<&&MappingTriplet> = set.iter().filter(|t| t.ka == ka.code).collect();
        if in_ka.is_empty() {
            missing_kas.push(MissingKa {
                ka: ka.code.clone(),
                name: ka.name.clone(),
                category: ka.category.clone(),
            });
            continue;
        }
        if depth >= 2 {
            let mut covered: BTreeSet<&str> = BTreeSet::new();
            for t in &in_ka {
                let mut id = t.topic.as_str();
                loop {
                    covered.insert(id);
                    match id.rsplit_once('/') {
                        Some((parent, _)) => id = parent,
                        None => break,
                    }
                }
            }
            for node in &ka.root.children {
                if !covered.contains(node.id.as_str()) {
                    topic_gaps.push(TopicGap {
                        ka: ka.code.clone(),
                        topic: node.id.clone(),
                        label: node.label.clone(),
                    });
                }
            }
        }
    }

    GapReport {
        depth,
        missing_kas,
        topic_gaps,
    }
}

/// Set difference between two snapshots of the same organisation, plus
/// headcount movement on the triplets they share.
pub fn diff(a: &Snapshot, b: &Snapshot) -> Result<ProfileDiff, AnalyticsError> {
    if a.taxonomy_version != b.taxonomy_version {
        return Err(AnalyticsError::VersionMismatch {
            a: a.taxonomy_version.to_string(),
            b: b.taxonomy_version.to_string(),
        });
    }

    let before = &a.profile.triplets;
    let after = &b.profile.triplets;
    let added = after.difference(before).cloned().collect();
    let removed = before.difference(after).cloned().collect();
    let headcount_deltas = before
        .intersection(after)
        .filter_map(|t| {
            let before_count = a.profile.headcount.get(t).copied().unwrap_or(0);
            let after_count = b.profile.headcount.get(t).copied().unwrap_or(0);
            (before_count != after_count).then(|| HeadcountDelta {
                triplet: t.clone(),
                before: before_count,
                after: after_count,
            })
        })
        .collect();

    Ok(ProfileDiff {
        added,
        removed,
        headcount_deltas,
        employees_before: a.profile.employees,
        employees_after: b.profile.employees,
    })
}
