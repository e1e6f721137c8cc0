use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Location, Result};

pub const HEALTHY_APPLE: &str = "healthy-apple";
pub const APPLE_WITH_DEFECT: &str = "apple-with-defect";

/// Ordered class names; a class id is the index into this list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    names: Vec<String>,
}

impl Default for ClassMap {
    fn default() -> Self {
        ClassMap { names: vec![HEALTHY_APPLE.to_string(), APPLE_WITH_DEFECT.to_string()] }
    }
}

impl ClassMap {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::data("class map is empty"));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.trim().is_empty() {
                return Err(Error::data("class map contains an empty name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("duplicate class name `{name}`")));
            }
        }
        Ok(ClassMap { names })
    }

    /// Generic `class0`, `class1`, ... names for models without a names file.
    pub fn numbered(count: usize) -> Result<Self> {
        ClassMap::new((0..count).map(|i| format!("class{i}")))
    }

    /// Darknet `.names` convention: one class per line, blank lines ignored.
    pub fn parse_names(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let name = line.trim();
            if name.is_empty() {
                continue;
            }
            if !seen.insert(name) {
                return Err(Error::data_at(
                    Location::line(None, idx + 1),
                    format!("duplicate class name `{name}`"),
                ));
            }
            names.push(name.to_string());
        }
        ClassMap::new(names)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ClassMap::parse_names(&text).map_err(|e| e.with_path(path))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, class_id: usize) -> bool {
        class_id < self.names.len()
    }

    pub fn name(&self, class_id: usize) -> Option<&str> {
        self.names.get(class_id).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}
