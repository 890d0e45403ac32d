//! Ontological tag-set: a DAG of semantic categories with subsumption.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{parse_records, write_records, ParseError};

/// ASCII slug identifying a tag. Labels carry the diacritics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagId(pub String);

impl TagId {
    pub fn new(id: impl Into<String>) -> Self {
        TagId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TagId {
    fn from(s: &str) -> Self {
        TagId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyTag {
    pub id: TagId,
    pub label: String,
    pub parents: Vec<TagId>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: duplicate tag id `{id}`")]
    DuplicateTag { line: usize, id: TagId },
    #[error("tag `{tag}` lists unknown parent `{parent}`")]
    DanglingParent { tag: TagId, parent: TagId },
    #[error("tag `{tag}` is part of a parent cycle")]
    Cycle { tag: TagId },
    #[error("unknown tag `{0}`")]
    UnknownTag(TagId),
}

/// A validated tag DAG.
///
/// Tags keep their document order for export; the ancestor closure of every
/// tag is computed once at load time so subsumption is a set lookup.
#[derive(Debug, Clone, Default)]
pub struct Ontology {
    tags: Vec<OntologyTag>,
    index: HashMap<TagId, usize>,
    // ancestors[i] includes i itself.
    ancestors: Vec<BTreeSet<usize>>,
}

impl Ontology {
    pub fn load(document: &str) -> Result<Self, OntologyError> {
        let records: Vec<(usize, OntologyTag)> = parse_records(document)?;
        let mut index = HashMap::with_capacity(records.len());
        let mut tags = Vec::with_capacity(records.len());
        for (line, tag) in records {
            if index.insert(tag.id.clone(), tags.len()).is_some() {
                return Err(OntologyError::DuplicateTag { line, id: tag.id });
            }
            tags.push(tag);
        }
        for tag in &tags {
            if let Some(parent) = tag.parents.iter().find(|p| !index.contains_key(*p)) {
                return Err(OntologyError::DanglingParent {
                    tag: tag.id.clone(),
                    parent: parent.clone(),
                });
            }
        }
        let ancestors = ancestor_closure(&tags, &index)?;
        Ok(Ontology { tags, index, ancestors })
    }

    /// Writes the ontology back in the same record format it was loaded from.
    pub fn export(&self) -> String {
        write_records(&self.tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> impl Iterator<Item = &OntologyTag> {
        self.tags.iter()
    }

    pub fn get(&self, id: &TagId) -> Option<&OntologyTag> {
        self.index.get(id).map(|&i| &self.tags[i])
    }

    pub fn contains(&self, id: &TagId) -> bool {
        self.index.contains_key(id)
    }

    pub fn roots(&self) -> BTreeSet<TagId> {
        self.tags
            .iter()
            .filter(|t| t.parents.is_empty())
            .map(|t| t.id.clone())
            .collect()
    }

    /// Human-readable label, falling back to the id for unknown tags.
    pub fn label<'a>(&'a self, id: &'a TagId) -> &'a str {
        self.get(id).map(|t| t.label.as_str()).unwrap_or(id.as_str())
    }

    fn position(&self, id: &TagId) -> Result<usize, OntologyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| OntologyError::UnknownTag(id.clone()))
    }

    /// True iff `descendant` equals `ancestor` or reaches it through parent edges.
    pub fn subsumes(&self, ancestor: &TagId, descendant: &TagId) -> Result<bool, OntologyError> {
        let a = self.position(ancestor)?;
        let d = self.position(descendant)?;
        Ok(self.ancestors[d].contains(&a))
    }

    /// Any-of requirement check. An empty requirement places no constraint.
    pub fn compatible<'a, I>(&self, tag: &TagId, requirement: I) -> Result<bool, OntologyError>
    where
        I: IntoIterator<Item = &'a TagId>,
    {
        let d = self.position(tag)?;
        let mut empty = true;
        let mut hit = false;
        for r in requirement {
            empty = false;
            let a = self.position(r)?;
            hit |= self.ancestors[d].contains(&a);
        }
        Ok(empty || hit)
    }

    pub fn format_tags<'a, I: IntoIterator<Item = &'a TagId>>(&self, ids: I) -> String {
        let labels: Vec<&str> = ids.into_iter().map(|id| self.label(id)).collect();
        format!("{{{}}}", labels.join(", "))
    }
}

fn ancestor_closure(
    tags: &[OntologyTag],
    index: &HashMap<TagId, usize>,
) -> Result<Vec<BTreeSet<usize>>, OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }

    fn visit(
        node: usize,
        tags: &[OntologyTag],
        index: &HashMap<TagId, usize>,
        marks: &mut [Mark],
        closure: &mut [BTreeSet<usize>],
    ) -> Result<(), OntologyError> {
        match marks[node] {
            Mark::Done => return Ok(()),
            Mark::Open => return Err(OntologyError::Cycle { tag: tags[node].id.clone() }),
            Mark::New => {}
        }
        marks[node] = Mark::Open;
        let mut acc = BTreeSet::from([node]);
        for parent in &tags[node].parents {
            let p = index[parent];
            visit(p, tags, index, marks, closure)?;
            acc.extend(closure[p].iter().copied());
        }
        closure[node] = acc;
        marks[node] = Mark::Done;
        Ok(())
    }

    let mut marks = vec![Mark::New; tags.len()];
    let mut closure = vec![BTreeSet::new(); tags.len()];
    for node in 0..tags.len() {
        visit(node, tags, index, &mut marks, &mut closure)?;
    }
    Ok(closure)
}
