//! JSON structure files.
//!
//! ```json
//! {
//!   "language": "graph",
//!   "carriers": { "vertex": 3 },
//!   "relations": { "E": [[0, 1], [1, 2], [2, 0]] }
//! }
//! ```
//!
//! `language` names a built-in language; alternatively `signature` holds a
//! signature in the text format. Function tables are flat lists of values in
//! row-major order of the argument tuples; relations list the tuples that
//! hold; `literal_modulus` interprets rational literals modulo `m`.

use super::{tuples, FiniteStructure, Interp, ModelError};
use crate::signature::{builtin, Language};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    pub carriers: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, Vec<u32>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal_modulus: Option<u64>,
}

impl StructureFile {
    pub fn language(&self) -> Result<Language, ModelError> {
        match (&self.language, &self.signature) {
            (_, Some(text)) => Language::from_text(text).map_err(|e| ModelError::Invalid(e.to_string())),
            (Some(name), None) => {
                builtin(name).ok_or_else(|| ModelError::Invalid(format!("unknown language `{name}`")))
            }
            (None, None) => Err(ModelError::Invalid("either `language` or `signature` is required".into())),
        }
    }

    pub fn to_structure(&self) -> Result<FiniteStructure, ModelError> {
        let lang = self.language()?;
        let mut sizes = Vec::new();
        for s in lang.sorts() {
            sizes.push(
                *self
                    .carriers
                    .get(s.name())
                    .ok_or_else(|| ModelError::Invalid(format!("no carrier for sort `{s}`")))?,
            );
        }
        if let Some(extra) = self.carriers.keys().find(|k| !lang.sorts().iter().any(|s| s.name() == k.as_str())) {
            return Err(ModelError::Invalid(format!("carrier for undeclared sort `{extra}`")));
        }
        let mut s = FiniteStructure::new(&lang, sizes)?;
        for (name, table) in &self.functions {
            let (_, dims, _) = s.symbol_dims(name)?;
            let expected: usize = dims.iter().product();
            if table.len() != expected {
                return Err(ModelError::Invalid(format!(
                    "table of `{name}` has {} entries, expected {expected}",
                    table.len()
                )));
            }
            let offset = |args: &[u32]| args.iter().zip(&dims).fold(0, |acc, (a, d)| acc * d + *a as usize);
            s.set_function(name, |args| table[offset(args)])?;
        }
        for (name, holds) in &self.relations {
            let (_, dims, _) = s.symbol_dims(name)?;
            for t in holds {
                if t.len() != dims.len() || t.iter().zip(&dims).any(|(a, d)| *a as usize >= *d) {
                    return Err(ModelError::Invalid(format!("bad tuple {t:?} for `{name}`")));
                }
            }
            s.set_relation(name, |args| holds.iter().any(|t| t == args))?;
        }
        for (name, v) in &self.constants {
            s.set_constant(name, *v)?;
        }
        if let Some(m) = self.literal_modulus {
            s.set_literal_modulus(m);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn from_structure(s: &FiniteStructure) -> Self {
        let lang = s.language();
        let (language, signature) = match builtin(lang.name()) {
            Some(b) if &b == lang => (Some(lang.name().to_string()), None),
            _ => (None, Some(lang.to_text())),
        };
        let mut out = StructureFile {
            language,
            signature,
            carriers: lang.sorts().iter().zip(&s.sizes).map(|(so, &n)| (so.name().to_string(), n)).collect(),
            functions: BTreeMap::new(),
            relations: BTreeMap::new(),
            constants: BTreeMap::new(),
            literal_modulus: s.literal_modulus,
        };
        for (i, sym) in lang.symbols().iter().enumerate() {
            match &s.interp[i] {
                Some(Interp::Function(t)) => {
                    out.functions.insert(sym.name.clone(), t.clone());
                }
                Some(Interp::Constant(c)) => {
                    out.constants.insert(sym.name.clone(), *c);
                }
                Some(Interp::Relation(t)) => {
                    let dims = s.symbol_dims(&sym.name).expect("declared").1;
                    let holds = tuples(&dims).zip(t).filter(|(_, &b)| b).map(|(a, _)| a).collect();
                    out.relations.insert(sym.name.clone(), holds);
                }
                None => {}
            }
        }
        out
    }
}

impl FiniteStructure {
    pub fn from_json(src: &str) -> Result<Self, ModelError> {
        let file: StructureFile = serde_json::from_str(src).map_err(|e| ModelError::Invalid(e.to_string()))?;
        file.to_structure()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StructureFile::from_structure(self)).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{embeddings, finite_field, gamma3, trivially_valued_field};
    use super::*;

    #[test]
    fn graph_file() {
        let s = FiniteStructure::from_json(
            r#"{"language":"graph","carriers":{"vertex":3},"relations":{"E":[[0,1],[1,2],[2,0]]}}"#,
        )
        .unwrap();
        assert_eq!(embeddings(&s, &gamma3()).unwrap().len(), 3);
    }

    #[test]
    fn round_trip() {
        for s in [gamma3(), finite_field(4).unwrap(), trivially_valued_field(3).unwrap()] {
            let back = FiniteStructure::from_json(&s.to_json()).unwrap();
            assert_eq!(StructureFile::from_structure(&back), StructureFile::from_structure(&s));
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(FiniteStructure::from_json(r#"{"language":"ring","carriers":{"field":2}}"#).is_err());
        assert!(FiniteStructure::from_json(
            r#"{"language":"graph","carriers":{"vertex":2},"relations":{"E":[[0,5]]}}"#
        )
        .is_err());
        assert!(FiniteStructure::from_json(r#"{"language":"nope","carriers":{}}"#).is_err());
    }
}
