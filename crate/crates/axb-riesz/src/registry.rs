//! Name-keyed registries of strategy objects.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Anything that can be stored in a [`Registry`].
pub trait Named {
    fn name(&self) -> &str;
}

pub struct Registry<T: ?Sized + Named> {
    entries: HashMap<String, Box<T>>,
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: HashMap::new() }
    }
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry under its own name, replacing any previous one.
    pub fn register(&mut self, entry: Box<T>) {
        self.entries.insert(entry.name().to_string(), entry);
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownEntry(name.to_string()))
    }

    /// Registered names in sorted order.
    pub fn list(&self) -> Vec<String> {
        let mut names: Vec<String> = self.entries.keys().cloned().collect();
        names.sort();
        names
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(&'static str);
    impl Named for Fixed {
        fn name(&self) -> &str {
            self.0
        }
    }

    #[test]
    fn register_get_list() {
        let mut r: Registry<Fixed> = Registry::new();
        r.register(Box::new(Fixed("b")));
        r.register(Box::new(Fixed("a")));
        assert_eq!(r.list(), vec!["a", "b"]);
        assert_eq!(r.get("a").unwrap().name(), "a");
        assert!(matches!(r.get("c"), Err(Error::UnknownEntry(_))));
    }
}
