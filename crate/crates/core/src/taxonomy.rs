//! Versioned CyBOK structure: broad categories, knowledge areas and topic
//! trees.
//!
//! Taxonomies ship as line-oriented data files (one per version) so new CyBOK
//! releases are additive drops next to the historical ones. A loaded
//! [`Taxonomy`] is immutable and safe to share across threads.
//!
//! Topic node ids are slash-delimited paths of slugified labels, so a node's
//! id prefix-encodes its path from the knowledge-area root.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Code of the Introduction pseudo-area. It is addressable like any KA but
/// belongs to no broad category and is excluded from KA counts.
pub const INTRO_CODE: &str = "INTRO";

/// Published KA counts for the released CyBOK versions (Introduction
/// excluded). Versions not listed here skip the count check.
const PUBLISHED_KA_COUNTS: &[(&str, usize)] = &[("1.0.0", 19), ("1.1.0", 21)];

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A CyBOK version identifier, e.g. `1.0.0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaxonomyVersion(String);

impl TaxonomyVersion {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TaxonomyVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One of the five CyBOK broad categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadCategory {
    pub code: String,
    pub name: String,
}

/// A node in a knowledge-area topic tree. The root sits at level 1 and each
/// child is exactly one level below its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicNode {
    pub id: String,
    pub label: String,
    pub level: u32,
    pub children: Vec<TopicNode>,
}

impl TopicNode {
    /// Pre-order traversal of this node and all its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &TopicNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// Find a descendant (or this node) by id.
    pub fn find(&self, id: &str) -> Option<&TopicNode> {
        self.walk().find(|n| n.id == id)
    }
}

/// A knowledge area with its topic tree. `category` is `None` only for the
/// Introduction pseudo-area.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeArea {
    pub code: String,
    pub name: String,
    pub category: Option<String>,
    pub root: TopicNode,
}

impl KnowledgeArea {
    /// All nodes of the topic tree in pre-order.
    pub fn topics(&self) -> impl Iterator<Item = &TopicNode> {
        self.root.walk()
    }

    /// Number of tree nodes with level ≤ `depth`.
    pub fn topic_count_at(&self, depth: u32) -> usize {
        self.topics().filter(|n| n.level <= depth).count()
    }
}

/// A loaded CyBOK version. Knowledge areas are kept in reporting order:
/// categories in file order, KAs in file order within their category, and the
/// Introduction pseudo-area last.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    version: TaxonomyVersion,
    categories: Vec<BroadCategory>,
    kas: Vec<KnowledgeArea>,
    by_code: BTreeMap<String, usize>,
}

impl Taxonomy {
    pub fn version(&self) -> &TaxonomyVersion {
        &self.version
    }

    pub fn categories(&self) -> &[BroadCategory] {
        &self.categories
    }

    /// All knowledge areas in reporting order, Introduction included (last).
    pub fn kas(&self) -> &[KnowledgeArea] {
        &self.kas
    }

    /// Number of knowledge areas, Introduction excluded.
    pub fn ka_count(&self) -> usize {
        self.kas.iter().filter(|ka| ka.code != INTRO_CODE).count()
    }

    pub fn ka(&self, code: &str) -> Option<&KnowledgeArea> {
        self.by_code.get(code).map(|&i| &self.kas[i])
    }

    /// Look up a topic node by id under a knowledge area. `Ok(None)` means
    /// the KA exists but the topic does not.
    pub fn topic_lookup(&self, ka: &str, id: &str) -> Result<Option<&TopicNode>, TripletRejection> {
        let area = self
            .ka(ka)
            .ok_or_else(|| TripletRejection::UnknownKa(ka.to_string()))?;
        Ok(area.root.find(id))
    }

    /// Check a ⟨KA, topic, depth⟩ claim against this taxonomy. Never panics;
    /// rejections carry the reason.
    pub fn validate_triplet(
        &self,
        ka: &str,
        topic: &str,
        depth: u32,
    ) -> Result<(), TripletRejection> {
        match self.topic_lookup(ka, topic)? {
            None => Err(TripletRejection::UnknownTopic {
                ka: ka.to_string(),
                topic: topic.to_string(),
            }),
            Some(node) if node.level != depth => Err(TripletRejection::DepthMismatch {
                topic: topic.to_string(),
                claimed: depth,
                actual: node.level,
            }),
            Some(_) => Ok(()),
        }
    }
}

/// Why a ⟨KA, topic, depth⟩ claim was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripletRejection {
    #[error("unknown knowledge area `{0}`")]
    UnknownKa(String),
    #[error("unknown topic `{topic}` under {ka}")]
    UnknownTopic { ka: String, topic: String },
    #[error("depth {claimed} does not match level {actual} of topic `{topic}`")]
    DepthMismatch {
        topic: String,
        claimed: u32,
        actual: u32,
    },
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("taxonomy file line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("taxonomy file declares version {declared}, requested {requested}")]
    VersionMismatch { requested: String, declared: String },
    #[error("knowledge area {ka} references unknown category `{category}`")]
    UnknownCategory { ka: String, category: String },
    #[error("duplicate knowledge area `{0}`")]
    DuplicateKa(String),
    #[error("duplicate topic id `{id}` in {ka}")]
    DuplicateTopicId { ka: String, id: String },
    #[error("topic record references undeclared knowledge area `{ka}`")]
    TopicForUnknownKa { ka: String, id: String },
    #[error("topic `{id}` in {ka} has no parent node in the file")]
    OrphanTopic { ka: String, id: String },
    #[error("topic `{id}` in {ka} declares level {found}, expected {expected}")]
    LevelMismatch {
        ka: String,
        id: String,
        expected: u32,
        found: u32,
    },
    #[error("knowledge area {0} has no root topic")]
    MissingRoot(String),
    #[error("expected exactly 5 broad categories, found {0}")]
    CategoryCount(usize),
    #[error("version {version} publishes {expected} knowledge areas, file defines {found}")]
    KaCount {
        version: String,
        expected: usize,
        found: usize,
    },
    #[error("taxonomy file defines no Introduction pseudo-area (code INTRO, category `-`)")]
    MissingIntro,
    #[error("only the INTRO pseudo-area may omit its category (offending KA: {0})")]
    UncategorisedKa(String),
}

/// Load a taxonomy file and check it against the requested version.
pub fn load_taxonomy(version: &str, path: &Path) -> Result<Taxonomy, TaxonomyError> {
    let text = fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_taxonomy(version, &text)
}

/// Parse taxonomy data from a string. See the data files for the record
/// grammar: `VERSION,<id>` / `CAT,..` / `KA,..` / `TOPIC,..`, `#` comments.
pub fn parse_taxonomy(version: &str, text: &str) -> Result<Taxonomy, TaxonomyError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut declared_version: Option<String> = None;
    let mut categories: Vec<BroadCategory> = Vec::new();
    let mut kas: Vec<(String, String, Option<String>)> = Vec::new();
    // Per KA: root plus an id → node map used to attach children in file order.
    struct TreeBuilder {
        root: Option<TopicNode>,
        order: Vec<String>,
        parents: BTreeMap<String, String>,
        nodes: BTreeMap<String, TopicNode>,
    }
    let mut trees: BTreeMap<String, TreeBuilder> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| TaxonomyError::Malformed {
            line: e.position().map_or(0, csv::Position::line),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let malformed = |reason: String| TaxonomyError::Malformed { line, reason };
        let field = |i: usize, what: &str| -> Result<&str, TaxonomyError> {
            match record.get(i) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(TaxonomyError::Malformed {
                    line,
                    reason: format!("missing {what}"),
                }),
            }
        };

        match record.get(0) {
            Some("VERSION") => {
                let id = field(1, "version id")?;
                if declared_version.is_some() {
                    return Err(malformed("duplicate VERSION record".into()));
                }
                declared_version = Some(id.to_string());
            }
            Some("CAT") => {
                let code = field(1, "category code")?;
                let name = field(2, "category name")?;
                if categories.iter().any(|c| c.code == code) {
                    return Err(malformed(format!("duplicate category `{code}`")));
                }
                categories.push(BroadCategory {
                    code: code.to_string(),
                    name: name.to_string(),
                });
            }
            Some("KA") => {
                let code = field(1, "KA code")?;
                let name = field(2, "KA name")?;
                let category = field(3, "KA category")?;
                if kas.iter().any(|(c, _, _)| c == code) {
                    return Err(TaxonomyError::DuplicateKa(code.to_string()));
                }
                let category = if category == "-" {
                    if code != INTRO_CODE {
                        return Err(TaxonomyError::UncategorisedKa(code.to_string()));
                    }
                    None
                } else {
                    if !categories.iter().any(|c| c.code == category) {
                        return Err(TaxonomyError::UnknownCategory {
                            ka: code.to_string(),
                            category: category.to_string(),
                        });
                    }
                    Some(category.to_string())
                };
                kas.push((code.to_string(), name.to_string(), category));
                trees.insert(
                    code.to_string(),
                    TreeBuilder {
                        root: None,
                        order: Vec::new(),
                        parents: BTreeMap::new(),
                        nodes: BTreeMap::new(),
                    },
                );
            }
            Some("TOPIC") => {
                let ka = field(1, "topic KA code")?;
                let id = field(2, "topic id")?;
                let level: u32 = field(3, "topic level")?
                    .parse()
                    .map_err(|_| malformed(format!("invalid topic level for `{id}`")))?;
                let label = field(4, "topic label")?;
                let tree = trees
                    .get_mut(ka)
                    .ok_or_else(|| TaxonomyError::TopicForUnknownKa {
                        ka: ka.to_string(),
                        id: id.to_string(),
                    })?;
                if tree.nodes.contains_key(id) || tree.root.as_ref().is_some_and(|r| r.id == id) {
                    return Err(TaxonomyError::DuplicateTopicId {
                        ka: ka.to_string(),
                        id: id.to_string(),
                    });
                }
                let node = TopicNode {
                    id: id.to_string(),
                    label: label.to_string(),
                    level,
                    children: Vec::new(),
                };
                if level == 1 {
                    if tree.root.is_some() {
                        return Err(malformed(format!("second level-1 topic `{id}` in {ka}")));
                    }
                    tree.root = Some(node);
                } else {
                    let parent_id = match id.rsplit_once('/') {
                        Some((prefix, seg)) if !prefix.is_empty() && !seg.is_empty() => prefix,
                        _ => {
                            return Err(TaxonomyError::OrphanTopic {
                                ka: ka.to_string(),
                                id: id.to_string(),
                            })
                        }
                    };
                    let parent_level = if tree.root.as_ref().is_some_and(|r| r.id == parent_id) {
                        1
                    } else if let Some(parent) = tree.nodes.get(parent_id) {
                        parent.level
                    } else {
                        return Err(TaxonomyError::OrphanTopic {
                            ka: ka.to_string(),
                            id: id.to_string(),
                        });
                    };
                    if level != parent_level + 1 {
                        return Err(TaxonomyError::LevelMismatch {
                            ka: ka.to_string(),
                            id: id.to_string(),
                            expected: parent_level + 1,
                            found: level,
                        });
                    }
                    tree.order.push(id.to_string());
                    tree.parents.insert(id.to_string(), parent_id.to_string());
                    tree.nodes.insert(id.to_string(), node);
                }
            }
            Some(kind) => {
                return Err(malformed(format!("unknown record kind `{kind}`")));
            }
            None => {}
        }
    }

    let declared = declared_version.ok_or(TaxonomyError::Malformed {
        line: 0,
        reason: "no VERSION record".into(),
    })?;
    if declared != version {
        return Err(TaxonomyError::VersionMismatch {
            requested: version.to_string(),
            declared,
        });
    }
    if categories.len() != 5 {
        return Err(TaxonomyError::CategoryCount(categories.len()));
    }
    if !kas.iter().any(|(code, _, _)| code == INTRO_CODE) {
        return Err(TaxonomyError::MissingIntro);
    }

    // Assemble trees: attach children to parents in file order, deepest first
    // so each node is complete before its own parent absorbs it.
    let mut assembled = Vec::with_capacity(kas.len());
    for (code, name, category) in kas {
        let mut tree = trees.remove(&code).expect("tree builder exists per KA");
        let mut root = tree
            .root
            .take()
            .ok_or(TaxonomyError::MissingRoot(code.clone()))?;
        for id in tree.order.iter().rev() {
            let node = tree.nodes.remove(id).expect("node pending attachment");
            let parent_id = &tree.parents[id];
            if parent_id == &root.id {
                root.children.insert(0, node);
            } else {
                let parent = tree
                    .nodes
                    .get_mut(parent_id)
                    .expect("parent still pending, attached later");
                parent.children.insert(0, node);
            }
        }
        assembled.push(KnowledgeArea {
            code,
            name,
            category,
            root,
        });
    }

    // Reporting order: category file order, then KA file order; INTRO last.
    let rank = |ka: &KnowledgeArea| match &ka.category {
        Some(cat) => categories
            .iter()
            .position(|c| &c.code == cat)
            .unwrap_or(usize::MAX),
        None => usize::MAX,
    };
    assembled.sort_by_key(rank);

    if let Some(&(_, expected)) = PUBLISHED_KA_COUNTS.iter().find(|(v, _)| *v == version) {
        let found = assembled.iter().filter(|ka| ka.code != INTRO_CODE).count();
        if found != expected {
            return Err(TaxonomyError::KaCount {
                version: version.to_string(),
                expected,
                found,
            });
        }
    }

    let by_code = assembled
        .iter()
        .enumerate()
        .map(|(i, ka)| (ka.code.clone(), i))
        .collect();
    Ok(Taxonomy {
        version: TaxonomyVersion::new(version),
        categories,
        kas: assembled,
        by_code,
    })
}
