//! Concept → taxonomy mapping: the reference table, the lookup procedure
//! and the manual-review queue for anything the table cannot resolve.
//!
//! Mapping is a pure lookup. Unresolved concepts are reported, never
//! guessed — there is deliberately no fuzzy matching here.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{Taxonomy, TaxonomyVersion, TripletRejection};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A phrase naming a piece of knowledge, kept alongside its normalized form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Concept {
    raw: String,
    norm: String,
}

impl Concept {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn norm(&self) -> &str {
        &self.norm
    }
}

/// A ⟨knowledge area, topic, depth⟩ coordinate into the taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MappingTriplet {
    pub ka: String,
    pub topic: String,
    pub depth: u32,
}

impl MappingTriplet {
    pub fn new(ka: impl Into<String>, topic: impl Into<String>, depth: u32) -> Self {
        Self {
            ka: ka.into(),
            topic: topic.into(),
            depth,
        }
    }
}

/// The loaded mapping reference: concept entries plus a credential catalog,
/// both validated against one taxonomy version. Immutable after load.
#[derive(Debug, Clone)]
pub struct MappingReference {
    version: TaxonomyVersion,
    entries: BTreeMap<String, BTreeSet<MappingTriplet>>,
    /// Keyed by lowercased credential name; value keeps the display name.
    catalog: BTreeMap<String, (String, BTreeSet<MappingTriplet>)>,
}

impl MappingReference {
    pub fn version(&self) -> &TaxonomyVersion {
        &self.version
    }

    /// Normalized concepts with entries, in lexicographic order.
    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Credential display names in the catalog.
    pub fn credentials(&self) -> impl Iterator<Item = &str> {
        self.catalog.values().map(|(name, _)| name.as_str())
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }
}

/// Whether a concept found a home in the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingStatus {
    Resolved,
    Unresolved,
}

/// Result of mapping one concept. `status` is resolved exactly when
/// `triplets` is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingOutcome {
    pub concept: Concept,
    pub triplets: BTreeSet<MappingTriplet>,
    pub status: MappingStatus,
}

impl MappingOutcome {
    fn new(concept: Concept, triplets: BTreeSet<MappingTriplet>) -> Self {
        let status = if triplets.is_empty() {
            MappingStatus::Unresolved
        } else {
            MappingStatus::Resolved
        };
        Self {
            concept,
            triplets,
            status,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.status == MappingStatus::Resolved
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("concept `{raw}` is empty after normalization")]
    EmptyConcept { raw: String },
    #[error("cannot read mapping reference {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("mapping reference line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("mapping reference line {line}, key `{key}`: {source}")]
    InvalidTriplet {
        line: u64,
        key: String,
        #[source]
        source: TripletRejection,
    },
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Canonicalize a phrase: Unicode lowercase, punctuation → space, whitespace
/// collapsed and trimmed. Errors when nothing survives.
pub fn normalize(raw: &str) -> Result<Concept, MappingError> {
    let folded: String = raw
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    let norm = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    if norm.is_empty() {
        return Err(MappingError::EmptyConcept {
            raw: raw.to_string(),
        });
    }
    Ok(Concept {
        raw: raw.to_string(),
        norm,
    })
}

/// Look one concept up in the reference. Resolved outcomes carry the full
/// triplet set, including multi-KA mappings; unknown concepts come back
/// unresolved with an empty set.
pub fn map_concept(concept: &Concept, reference: &MappingReference) -> MappingOutcome {
    let triplets = reference
        .entries
        .get(&concept.norm)
        .cloned()
        .unwrap_or_default();
    MappingOutcome::new(concept.clone(), triplets)
}

/// Map a batch of concepts. Output preserves input order; concepts that
/// normalize identically collapse into a single outcome at first position.
pub fn map_concept_set(concepts: &[Concept], reference: &MappingReference) -> Vec<MappingOutcome> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for concept in concepts {
        if seen.insert(concept.norm.as_str()) {
            out.push(map_concept(concept, reference));
        }
    }
    out
}

/// Triplets pre-mapped for a named credential; empty for unknown names.
/// Lookup is case-insensitive.
pub fn catalog_lookup(name: &str, reference: &MappingReference) -> BTreeSet<MappingTriplet> {
    reference
        .catalog
        .get(&name.to_lowercase())
        .map(|(_, t)| t.clone())
        .unwrap_or_default()
}

/// Concepts left for a human: the unresolved outcomes, deduplicated and
/// sorted by normalized form.
pub fn review_queue(outcomes: &[MappingOutcome]) -> Vec<Concept> {
    let mut queue: BTreeMap<&str, &Concept> = BTreeMap::new();
    for outcome in outcomes {
        if !outcome.is_resolved() {
            queue
                .entry(outcome.concept.norm())
                .or_insert(&outcome.concept);
        }
    }
    queue.into_values().cloned().collect()
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Load a mapping reference CSV and validate every triplet against `tax`.
pub fn load_reference(path: &Path, tax: &Taxonomy) -> Result<MappingReference, MappingError> {
    let text = fs::read_to_string(path).map_err(|source| MappingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_reference(&text, tax)
}

/// Parse reference rows (`kind,key,ka,topic,depth`; kind is `concept` or
/// `credential`). Concept keys are normalized on load.
pub fn parse_reference(text: &str, tax: &Taxonomy) -> Result<MappingReference, MappingError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut entries: BTreeMap<String, BTreeSet<MappingTriplet>> = BTreeMap::new();
    let mut catalog: BTreeMap<String, (String, BTreeSet<MappingTriplet>)> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| MappingError::Malformed {
            line: e.position().map_or(0, csv::Position::line),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let field = |i: usize, what: &str| -> Result<&str, MappingError> {
            match record.get(i) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(MappingError::Malformed {
                    line,
                    reason: format!("missing {what}"),
                }),
            }
        };

        let kind = field(0, "record kind")?;
        let key = field(1, "key")?;
        let ka = field(2, "KA code")?;
        let topic = field(3, "topic id")?;
        let depth: u32 = field(4, "depth")?
            .parse()
            .map_err(|_| MappingError::Malformed {
                line,
                reason: format!("invalid depth for `{key}`"),
            })?;

        let triplet = MappingTriplet::new(ka, topic, depth);
        tax.validate_triplet(&triplet.ka, &triplet.topic, triplet.depth)
            .map_err(|source| MappingError::InvalidTriplet {
                line,
                key: key.to_string(),
                source,
            })?;

        match kind {
            "concept" => {
                let norm = normalize(key)?.norm;
                entries.entry(norm).or_default().insert(triplet);
            }
            "credential" => {
                catalog
                    .entry(key.to_lowercase())
                    .or_insert_with(|| (key.to_string(), BTreeSet::new()))
                    .1
                    .insert(triplet);
            }
            other => {
                return Err(MappingError::Malformed {
                    line,
                    reason: format!("unknown record kind `{other}`"),
                });
            }
        }
    }

    Ok(MappingReference {
        version: tax.version().clone(),
        entries,
        catalog,
    })
}
