use crate::error::{Error, Result};

/// Named factories, looked up at runtime from config or CLI strings.
///
/// Registration order is preserved so `names()` is stable.
pub struct Registry<T> {
    kind: &'static str,
    entries: Vec<(&'static str, T)>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Re-registering a name replaces the previous entry.
    pub fn register(&mut self, name: &'static str, item: T) -> &mut Self {
        if let Some(slot) = self.entries.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = item;
        } else {
            self.entries.push((name, item));
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| *n == name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}
