//! The API tool library: descriptor types, loading with schema and semantic
//! validation, lookup, and the canonical instruction rendering used for
//! embedding and prompting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{TypedValue, ValueKind};

/// Upper bound on parameters per descriptor; larger counts indicate a corrupted file.
pub const MAX_PARAMETERS: usize = 16;

const SCHEMA_TEXT: &str = include_str!("../data/library.schema.json");
const SHIPPED_LIBRARY: &str = include_str!("../data/library.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Perception,
    Configuration,
    Transmission,
    AiFunction,
    Reporting,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Perception,
        Category::Configuration,
        Category::Transmission,
        Category::AiFunction,
        Category::Reporting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Perception => "perception",
            Category::Configuration => "configuration",
            Category::Transmission => "transmission",
            Category::AiFunction => "ai_function",
            Category::Reporting => "reporting",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    /// Semantic meaning of the parameter, e.g. "requires the estimated CSI matrix".
    pub description: String,
    pub value_kind: ValueKind,
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<TypedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

/// A named result an API stores for later steps, e.g. `CSI_matrix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    pub description: String,
    pub value_kind: ValueKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiDescriptor {
    pub id: String,
    pub name: String,
    pub category: Category,
    pub instruction: String,
    pub parameters: Vec<ParameterSpec>,
    pub outputs: Vec<OutputSpec>,
}

impl ApiDescriptor {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&OutputSpec> {
        self.outputs.iter().find(|o| o.name == name)
    }

    /// Canonical text block for this descriptor. See [`render_instruction`].
    pub fn render_instruction(&self) -> String {
        render_instruction(self)
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |msg: String| out.push(format!("{}: {msg}", self.id));
        if self.id.trim().is_empty() {
            push("id is empty".into());
        }
        if self.name.trim().is_empty() {
            push("name is empty".into());
        }
        if self.instruction.trim().is_empty() {
            push("instruction is empty".into());
        }
        if self.parameters.len() > MAX_PARAMETERS {
            push(format!(
                "{} parameters exceeds the limit of {MAX_PARAMETERS}",
                self.parameters.len()
            ));
        }
        let mut seen = BTreeSet::new();
        for p in &self.parameters {
            if p.name.trim().is_empty() {
                push("parameter with empty name".into());
            } else if !seen.insert(p.name.as_str()) {
                push(format!("duplicate parameter name `{}`", p.name));
            }
            if let Some(default) = &p.default {
                if default.kind() != p.value_kind {
                    push(format!(
                        "parameter `{}` is {} but its default is {}",
                        p.name,
                        p.value_kind,
                        default.kind()
                    ));
                } else if !default.is_well_formed() {
                    push(format!("parameter `{}` has a malformed default", p.name));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for o in &self.outputs {
            if o.name.trim().is_empty() {
                push("output with empty name".into());
            } else if !seen.insert(o.name.as_str()) {
                push(format!("duplicate output name `{}`", o.name));
            }
            if o.description.trim().is_empty() {
                push(format!("output `{}` has an empty description", o.name));
            }
        }
        out
    }
}

/// Renders a descriptor as the deterministic text block used for embedding and prompts:
///
/// ```text
/// <name>
/// <instruction>
/// Parameters:
/// - <name> (<kind>, required|optional): <description> [default: <v>]
/// Outputs:
/// - <name> (<kind>): <description>
/// ```
///
/// Sections with no entries are omitted.
pub fn render_instruction(descriptor: &ApiDescriptor) -> String {
    let mut out = String::new();
    out.push_str(&descriptor.name);
    out.push('\n');
    out.push_str(&descriptor.instruction);
    if !descriptor.parameters.is_empty() {
        out.push_str("\nParameters:");
        for p in &descriptor.parameters {
            let need = if p.required { "required" } else { "optional" };
            let _ = write!(out, "\n- {} ({}, {need}): {}", p.name, p.value_kind, p.description);
            if let Some(d) = &p.default {
                let _ = write!(out, " [default: {d}]");
            }
        }
    }
    if !descriptor.outputs.is_empty() {
        out.push_str("\nOutputs:");
        for o in &descriptor.outputs {
            let _ = write!(out, "\n- {} ({}): {}", o.name, o.value_kind, o.description);
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("duplicate API id `{0}`")]
    DuplicateId(String),
    #[error("library validation failed with {} violation(s):\n  {}", .0.len(), .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("unknown API id `{0}`")]
    UnknownId(String),
}

/// On-disk document shape.
#[derive(Debug, Serialize, Deserialize)]
struct LibraryDocument {
    library_version: String,
    descriptors: Vec<ApiDescriptor>,
}

/// Immutable, id-ordered collection of validated descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct Registry {
    library_version: String,
    descriptors: BTreeMap<String, ApiDescriptor>,
}

fn schema_validator() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let schema: serde_json::Value =
            serde_json::from_str(SCHEMA_TEXT).expect("bundled schema is valid JSON");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

/// Reads and validates a tool-library file.
pub fn load_library(path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_library(&text)
}

/// Parses a tool-library document. A whitespace-only document is an empty library.
pub fn parse_library(text: &str) -> Result<Registry, RegistryError> {
    if text.trim().is_empty() {
        return Ok(Registry::empty(""));
    }
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| RegistryError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let schema_errors: Vec<String> = schema_validator()
        .iter_errors(&raw)
        .map(|e| format!("{}: {}", e.instance_path(), e))
        .collect();
    if !schema_errors.is_empty() {
        return Err(RegistryError::Validation(schema_errors));
    }
    let doc: LibraryDocument = serde_json::from_value(raw).map_err(|e| RegistryError::Parse {
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    Registry::from_descriptors(doc.library_version, doc.descriptors)
}

impl Registry {
    pub fn empty(library_version: impl Into<String>) -> Self {
        Registry {
            library_version: library_version.into(),
            descriptors: BTreeMap::new(),
        }
    }

    /// Builds a registry from descriptors, checking id uniqueness first and then
    /// reporting every per-descriptor violation at once.
    pub fn from_descriptors(
        library_version: impl Into<String>,
        descriptors: Vec<ApiDescriptor>,
    ) -> Result<Self, RegistryError> {
        let mut map = BTreeMap::new();
        for d in descriptors {
            if map.contains_key(&d.id) {
                return Err(RegistryError::DuplicateId(d.id));
            }
            map.insert(d.id.clone(), d);
        }
        let violations: Vec<String> = map.values().flat_map(ApiDescriptor::violations).collect();
        if !violations.is_empty() {
            return Err(RegistryError::Validation(violations));
        }
        Ok(Registry {
            library_version: library_version.into(),
            descriptors: map,
        })
    }

    /// The 200-entry library bundled with the crate.
    pub fn shipped() -> Self {
        parse_library(SHIPPED_LIBRARY).expect("bundled library is valid")
    }

    pub fn library_version(&self) -> &str {
        &self.library_version
    }

    pub fn get(&self, id: &str) -> Result<&ApiDescriptor, RegistryError> {
        self.descriptors
            .get(id)
            .ok_or_else(|| RegistryError::UnknownId(id.to_owned()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.descriptors.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Descriptors in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &ApiDescriptor> + '_ {
        self.descriptors.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.descriptors.keys().map(String::as_str)
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &ApiDescriptor> + '_ {
        self.iter().filter(move |d| d.category == category)
    }

    /// Restricts the library to the given categories, for roles that only see
    /// their own slice of the toolkit.
    pub fn filter_categories(&self, categories: &[Category]) -> Registry {
        Registry {
            library_version: self.library_version.clone(),
            descriptors: self
                .descriptors
                .iter()
                .filter(|(_, d)| categories.contains(&d.category))
                .map(|(k, d)| (k.clone(), d.clone()))
                .collect(),
        }
    }

    /// The first `n` descriptors in id order.
    pub fn first_n(&self, n: usize) -> Registry {
        Registry {
            library_version: self.library_version.clone(),
            descriptors: self
                .descriptors
                .iter()
                .take(n)
                .map(|(k, d)| (k.clone(), d.clone()))
                .collect(),
        }
    }

    /// Serializes to the library file format; [`parse_library`] reverses it.
    pub fn to_json(&self) -> String {
        let doc = LibraryDocument {
            library_version: self.library_version.clone(),
            descriptors: self.descriptors.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("registry serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn descriptor(id: &str) -> ApiDescriptor {
        ApiDescriptor {
            id: id.into(),
            name: "Estimate CSI".into(),
            category: Category::Perception,
            instruction: "Estimate the channel.".into(),
            parameters: vec![],
            outputs: vec![],
        }
    }

    fn doc(descriptors: &[ApiDescriptor]) -> String {
        serde_json::to_string(&LibraryDocument {
            library_version: "t".into(),
            descriptors: descriptors.to_vec(),
        })
        .unwrap()
    }

    #[test]
    fn shipped_library_has_200_entries() {
        let r = Registry::shipped();
        assert_eq!(r.len(), 200);
        assert!(Category::ALL.iter().all(|c| r.in_category(*c).count() > 0));
    }

    #[test]
    fn empty_library() {
        assert_eq!(parse_library(&doc(&[])).unwrap().len(), 0);
        assert!(parse_library("  \n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = doc(&[descriptor("est_csi_01"), descriptor("est_csi_01")]);
        match parse_library(&text) {
            Err(RegistryError::DuplicateId(id)) => assert_eq!(id, "est_csi_01"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_library("{\n  \"library_version\": \"x\",\n  \"descriptors\": [,]\n}").unwrap_err();
        match err {
            RegistryError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_rejects_unknown_category_and_fields() {
        let text = r#"{"library_version":"x","descriptors":[{"id":"a","name":"A","category":"magic",
            "instruction":"do","parameters":[],"outputs":[],"extra":1}]}"#;
        match parse_library(text) {
            Err(RegistryError::Validation(v)) => assert!(v.len() >= 2, "{v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn violations_are_aggregated() {
        let mut a = descriptor("a");
        a.instruction = "   ".into();
        let mut b = descriptor("b");
        b.parameters = vec![
            ParameterSpec {
                name: "p".into(),
                description: "d".into(),
                value_kind: ValueKind::Scalar,
                required: false,
                default: Some(TypedValue::text("oops")),
                units: None,
            };
            2
        ];
        match Registry::from_descriptors("t", vec![a, b]) {
            Err(RegistryError::Validation(v)) => {
                assert_eq!(v.len(), 4, "{v:?}");
                assert!(v[0].starts_with("a: instruction is empty"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parameter_bound() {
        let mut a = descriptor("a");
        a.parameters = (0..17)
            .map(|i| ParameterSpec {
                name: format!("p{i}"),
                description: "d".into(),
                value_kind: ValueKind::Scalar,
                required: true,
                default: None,
                units: None,
            })
            .collect();
        assert!(matches!(
            Registry::from_descriptors("t", vec![a]),
            Err(RegistryError::Validation(_))
        ));
    }

    #[test]
    fn lookup() {
        let r = Registry::from_descriptors("t", vec![descriptor("est_csi_01")]).unwrap();
        assert_eq!(r.get("est_csi_01").unwrap().id, "est_csi_01");
        assert!(matches!(r.get("missing"), Err(RegistryError::UnknownId(_))));
        assert!(matches!(Registry::empty("x").get("any"), Err(RegistryError::UnknownId(_))));
    }

    #[test]
    fn iteration_is_ascending() {
        let r = Registry::from_descriptors("t", vec![descriptor("b"), descriptor("a"), descriptor("c")])
            .unwrap();
        assert_eq!(r.ids().collect::<Vec<_>>(), ["a", "b", "c"]);
    }

    #[test]
    fn render_degenerate_and_default() {
        let d = descriptor("a");
        assert_eq!(render_instruction(&d), "Estimate CSI\nEstimate the channel.");
        assert_eq!(render_instruction(&d), render_instruction(&d.clone()));

        let mut d = descriptor("p");
        d.parameters.push(ParameterSpec {
            name: "power".into(),
            description: "transmit power".into(),
            value_kind: ValueKind::Scalar,
            required: false,
            default: Some(TypedValue::scalar(0.5)),
            units: None,
        });
        d.outputs.push(OutputSpec {
            name: "status".into(),
            description: "result".into(),
            value_kind: ValueKind::Enum,
        });
        let text = render_instruction(&d);
        assert!(text.contains("[default: 0.5]"), "{text}");
        assert!(text.contains("- power (scalar, optional): transmit power"));
        assert!(text.ends_with("Outputs:\n- status (enum): result"));
    }

    #[test]
    fn category_filter() {
        let r = Registry::shipped();
        let perception = r.filter_categories(&[Category::Perception]);
        assert!(perception.iter().all(|d| d.category == Category::Perception));
        assert_eq!(perception.len(), r.in_category(Category::Perception).count());
    }
}
