//! Identifier newtypes shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact identifier `PREFIX:LOCAL`, e.g. `HP:0000365`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TermId(String);

/// Prefix reserved for the synthetic top node joining several ontologies.
pub const VIRTUAL_ROOT_PREFIX: &str = "VR";

impl TermId {
    pub fn new(curie: &str) -> Result<Self> {
        if is_curie(curie) {
            Ok(TermId(curie.to_string()))
        } else {
            Err(Error::InvalidInput(format!("malformed term id `{curie}`")))
        }
    }

    /// The `VR:ROOT` node.
    pub fn virtual_root() -> Self {
        TermId("VR:ROOT".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn prefix(&self) -> &str {
        self.0.split_once(':').map(|(p, _)| p).unwrap_or(&self.0)
    }

    pub fn is_virtual_root(&self) -> bool {
        self.prefix() == VIRTUAL_ROOT_PREFIX
    }
}

/// `[A-Za-z]+:[A-Za-z0-9_]+`
pub fn is_curie(s: &str) -> bool {
    match s.split_once(':') {
        Some((prefix, local)) => {
            !prefix.is_empty()
                && !local.is_empty()
                && prefix.bytes().all(|b| b.is_ascii_alphabetic())
                && local.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
        }
        None => false,
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TermId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TermId::new(s)
    }
}

impl TryFrom<String> for TermId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        TermId::new(&s)
    }
}

impl From<TermId> for String {
    fn from(t: TermId) -> String {
        t.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Gene,
    Disease,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Gene => "gene",
            EntityKind::Disease => "disease",
        }
    }
}

/// A gene or a disease, keyed by the association source's identifier.
///
/// Renders as `gene/<id>` or `disease/<id>` so that entity node tokens can
/// never collide with ontology CURIEs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    kind: EntityKind,
    id: String,
}

impl EntityId {
    pub fn new(kind: EntityKind, id: &str) -> Result<Self> {
        let id = id.trim();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidInput(format!(
                "entity id `{id}` is empty or contains whitespace"
            )));
        }
        Ok(EntityId {
            kind,
            id: id.to_string(),
        })
    }

    pub fn gene(id: &str) -> Result<Self> {
        Self::new(EntityKind::Gene, id)
    }

    pub fn disease(id: &str) -> Result<Self> {
        Self::new(EntityKind::Disease, id)
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Parse the `gene/<id>` / `disease/<id>` token form.
    pub fn parse_token(token: &str) -> Option<Self> {
        let (kind, id) = token.split_once('/')?;
        let kind = match kind {
            "gene" => EntityKind::Gene,
            "disease" => EntityKind::Disease,
            _ => return None,
        };
        EntityId::new(kind, id).ok()
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind.as_str(), self.id)
    }
}

/// Binary association label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "1" => Ok(Label::Positive),
            "negative" | "0" => Ok(Label::Negative),
            other => Err(Error::InvalidInput(format!("unknown label `{other}`"))),
        }
    }
}
