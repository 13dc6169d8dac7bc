use std::collections::HashMap;

use crate::error::{Error, Result};

/// Sorted, de-duplicated list of ISO 3166 alpha-3 codes. Every vector and
/// matrix in the crate is indexed by the position of a code in a registry.
#[derive(Debug, Clone, Default)]
pub struct CountryRegistry {
    codes: Vec<String>,
    index: HashMap<String, usize>,
}

/// Three upper-case ASCII letters.
pub fn is_valid_code(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

impl CountryRegistry {
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut codes: Vec<String> = codes.into_iter().map(Into::into).collect();
        if let Some(bad) = codes.iter().find(|c| !is_valid_code(c)) {
            return Err(Error::InvalidCountryCode(bad.clone()));
        }
        codes.sort();
        codes.dedup();
        let index = codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(Self { codes, index })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &str {
        &self.codes[i]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    /// Like [`index_of`](Self::index_of), but unknown codes are an error.
    pub fn require(&self, code: &str) -> Result<usize> {
        self.index_of(code)
            .ok_or_else(|| Error::UnknownCountry(code.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.codes.iter().map(String::as_str)
    }
}

impl PartialEq for CountryRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.codes == other.codes
    }
}

impl Eq for CountryRegistry {}
