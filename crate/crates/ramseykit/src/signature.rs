//! Relational signatures.

use std::fmt;

use thiserror::Error;

/// Name of the distinguished order symbol.
pub const ORDER_SYMBOL: &str = "<";

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("duplicate relation name `{0}`")]
    DuplicateName(String),
    #[error("relation `{0}` has arity 0; arities must be at least 1")]
    ZeroArity(String),
    #[error("relation `{0}` has arity {1}, maximum supported is 8")]
    ArityTooLarge(String, u8),
    #[error("the symbol `<` must be binary and flagged as an order")]
    BadOrderSymbol,
    #[error("empty relation name")]
    EmptyName,
}

/// One relation symbol: a name, an arity and the order flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationDecl {
    pub name: String,
    pub arity: u8,
    pub is_order: bool,
}

/// A finite relational signature. Names are unique, arities are >= 1, and the
/// designated symbol `<`, if present, is binary and carries the order flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    rels: Vec<RelationDecl>,
}

impl Signature {
    pub fn new(rels: Vec<RelationDecl>) -> Result<Self, SignatureError> {
        for (i, r) in rels.iter().enumerate() {
            if r.name.is_empty() {
                return Err(SignatureError::EmptyName);
            }
            if r.arity == 0 {
                return Err(SignatureError::ZeroArity(r.name.clone()));
            }
            if r.arity > 8 {
                return Err(SignatureError::ArityTooLarge(r.name.clone(), r.arity));
            }
            if rels[..i].iter().any(|s| s.name == r.name) {
                return Err(SignatureError::DuplicateName(r.name.clone()));
            }
            if r.name == ORDER_SYMBOL && !(r.arity == 2 && r.is_order) {
                return Err(SignatureError::BadOrderSymbol);
            }
        }
        Ok(Signature { rels })
    }

    /// The empty signature (pure sets).
    pub fn empty() -> Self {
        Signature { rels: Vec::new() }
    }

    /// Convenience constructor from `(name, arity)` pairs; `<` gets the order flag.
    pub fn of(pairs: &[(&str, u8)]) -> Self {
        let rels = pairs
            .iter()
            .map(|&(name, arity)| RelationDecl {
                name: name.to_string(),
                arity,
                is_order: name == ORDER_SYMBOL,
            })
            .collect();
        Signature::new(rels).expect("invalid signature literal")
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.rels
    }

    pub fn len(&self) -> usize {
        self.rels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.rels.iter().position(|r| r.name == name)
    }

    pub fn arity(&self, idx: usize) -> usize {
        self.rels[idx].arity as usize
    }

    /// This signature extended by the order symbol `<`. Returns `None` if `<`
    /// is already present.
    pub fn with_order(&self) -> Option<Signature> {
        if self.index_of(ORDER_SYMBOL).is_some() {
            return None;
        }
        let mut rels = self.rels.clone();
        rels.push(RelationDecl {
            name: ORDER_SYMBOL.to_string(),
            arity: 2,
            is_order: true,
        });
        Some(Signature { rels })
    }

    /// This signature with the order symbol removed, together with the index
    /// the symbol had. `None` if there is no order symbol.
    pub fn without_order(&self) -> Option<(Signature, usize)> {
        let idx = self.index_of(ORDER_SYMBOL)?;
        let mut rels = self.rels.clone();
        rels.remove(idx);
        Some((Signature { rels }, idx))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rels.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}/{}", r.name, r.arity)?;
            if r.is_order {
                write!(f, ",order")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let rels = vec![
            RelationDecl { name: "E".into(), arity: 2, is_order: false },
            RelationDecl { name: "E".into(), arity: 3, is_order: false },
        ];
        assert!(matches!(Signature::new(rels), Err(SignatureError::DuplicateName(_))));
    }

    #[test]
    fn rejects_non_order_less_than() {
        let rels = vec![RelationDecl { name: "<".into(), arity: 2, is_order: false }];
        assert!(matches!(Signature::new(rels), Err(SignatureError::BadOrderSymbol)));
        let rels = vec![RelationDecl { name: "<".into(), arity: 3, is_order: true }];
        assert!(matches!(Signature::new(rels), Err(SignatureError::BadOrderSymbol)));
    }

    #[test]
    fn order_extension_round_trip() {
        let sig = Signature::of(&[("E", 2)]);
        let ordered = sig.with_order().unwrap();
        assert_eq!(ordered.len(), 2);
        assert!(ordered.with_order().is_none());
        let (back, idx) = ordered.without_order().unwrap();
        assert_eq!(back, sig);
        assert_eq!(idx, 1);
    }
}
