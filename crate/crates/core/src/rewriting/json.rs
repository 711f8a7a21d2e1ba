//! JSON form of a rewriting system:
//! `{"alphabet": [tokens], "window": k, "rules": [[[lhs], [rhs]], ...]}`.
//!
//! Rules are written once per related pair and closed symmetrically on
//! load. Compiled systems carry millions of rules, so the reader interns
//! tokens as it goes instead of materializing nested string vectors.

use std::cell::RefCell;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::de::{self, DeserializeSeed, SeqAccess, Visitor};
use serde::ser::{self, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::system::{encode, Alphabet, RewritingSystem, Symbol};

struct Tokens<'a> {
    alphabet: &'a Alphabet,
    symbols: &'a [Symbol],
}

impl Serialize for Tokens<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.symbols.len()))?;
        for &s in self.symbols {
            seq.serialize_element(self.alphabet.token(s))?;
        }
        seq.end()
    }
}

struct RulesView<'a>(&'a RewritingSystem);

impl Serialize for RulesView<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let alphabet = self.0.alphabet();
        let mut seq = serializer.serialize_seq(Some(self.0.rule_count() / 2))?;
        let mut failure = None;
        self.0.for_each_pair(|lhs, rhs| {
            if failure.is_some() {
                return;
            }
            let pair = (
                Tokens {
                    alphabet,
                    symbols: lhs,
                },
                Tokens {
                    alphabet,
                    symbols: rhs,
                },
            );
            if let Err(e) = seq.serialize_element(&pair) {
                failure = Some(e);
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        seq.end()
    }
}

impl Serialize for RewritingSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.alphabet().is_empty() {
            return Err(ser::Error::custom("empty alphabet"));
        }
        let mut st = serializer.serialize_struct("RewritingSystem", 3)?;
        st.serialize_field("alphabet", self.alphabet().tokens())?;
        st.serialize_field("window", &self.window())?;
        st.serialize_field("rules", &RulesView(self))?;
        st.end()
    }
}

/// Rules as read from JSON, with tokens replaced by provisional ids in
/// order of first appearance.
#[derive(Default)]
struct RawRules {
    names: Vec<String>,
    ids: FxHashMap<String, u32>,
    flat: Vec<u32>,
    shapes: Vec<(u32, u32)>,
}

impl RawRules {
    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }
}

struct TokenSeed<'a>(&'a RefCell<RawRules>);

impl<'de> DeserializeSeed<'de> for TokenSeed<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_str(self)
    }
}

impl Visitor<'_> for TokenSeed<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a token string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<(), E> {
        let mut raw = self.0.borrow_mut();
        let id = raw.intern(v);
        raw.flat.push(id);
        Ok(())
    }
}

/// One side of a rule; yields its length.
struct SideSeed<'a>(&'a RefCell<RawRules>);

impl<'de> DeserializeSeed<'de> for SideSeed<'_> {
    type Value = u32;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<u32, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for SideSeed<'_> {
    type Value = u32;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of tokens")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<u32, A::Error> {
        let mut n = 0;
        while seq.next_element_seed(TokenSeed(self.0))?.is_some() {
            n += 1;
        }
        Ok(n)
    }
}

struct RuleSeed<'a>(&'a RefCell<RawRules>);

impl<'de> DeserializeSeed<'de> for RuleSeed<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RuleSeed<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a [lhs, rhs] pair")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<(), A::Error> {
        let lhs = seq
            .next_element_seed(SideSeed(self.0))?
            .ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let rhs = seq
            .next_element_seed(SideSeed(self.0))?
            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<de::IgnoredAny>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        self.0.borrow_mut().shapes.push((lhs, rhs));
        Ok(())
    }
}

impl<'de> Deserialize<'de> for RawRules {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ListVisitor;

        impl<'de> Visitor<'de> for ListVisitor {
            type Value = RawRules;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of rules")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RawRules, A::Error> {
                let raw = RefCell::new(RawRules::default());
                while seq.next_element_seed(RuleSeed(&raw))?.is_some() {}
                Ok(raw.into_inner())
            }
        }

        d.deserialize_seq(ListVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    alphabet: Vec<String>,
    window: usize,
    rules: RawRules,
}

impl<'de> Deserialize<'de> for RewritingSystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = SystemDoc::deserialize(d)?;
        let alphabet = Alphabet::new(doc.alphabet).map_err(de::Error::custom)?;
        let raw = doc.rules;
        let symbols = raw
            .names
            .iter()
            .map(|t| {
                alphabet
                    .symbol(t)
                    .ok_or_else(|| de::Error::custom(format!("unknown token {t:?} in rules")))
            })
            .collect::<Result<Vec<Symbol>, D::Error>>()?;
        if doc.window == 0 {
            return Err(de::Error::custom("window must be at least 1"));
        }
        let radix = alphabet.len() as u64;
        let mut pairs: Vec<Vec<(u64, u64)>> = vec![Vec::new(); doc.window];
        let mut window_buf: Vec<Symbol> = Vec::new();
        let mut pos = 0usize;
        for &(l, r) in &raw.shapes {
            if l != r {
                return Err(de::Error::custom(format!(
                    "rule sides have different lengths {l} and {r}"
                )));
            }
            let w = l as usize;
            if w == 0 || w > doc.window {
                return Err(de::Error::custom(format!(
                    "rule width {w} outside 1..={}",
                    doc.window
                )));
            }
            let mut code = |start: usize| {
                window_buf.clear();
                window_buf.extend(raw.flat[start..start + w].iter().map(|&i| symbols[i as usize]));
                encode(&window_buf, radix)
            };
            let lhs = code(pos);
            let rhs = code(pos + w);
            pos += 2 * w;
            pairs[w - 1].push((lhs, rhs));
        }
        drop(raw);
        RewritingSystem::assemble(alphabet, doc.window, pairs).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::super::system::Rule;
    use super::*;

    fn sample() -> RewritingSystem {
        let a = Alphabet::new(["a", "b", "c"]).unwrap();
        RewritingSystem::new(
            a,
            2,
            [
                Rule::new(vec![0], vec![1]).unwrap(),
                Rule::new(vec![1, 2], vec![2, 1]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_preserves_rules() {
        let sys = sample();
        let text = serde_json::to_string(&sys).unwrap();
        assert_eq!(
            text,
            r#"{"alphabet":["a","b","c"],"window":2,"rules":[[["a"],["b"]],[["b","c"],["c","b"]]]}"#
        );
        let back: RewritingSystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rules(), sys.rules());
        assert_eq!(back.window(), 2);
    }

    #[test]
    fn load_applies_symmetric_closure() {
        let text = r#"{"alphabet":["a","b"],"window":1,"rules":[[["a"],["b"]],[["b"],["a"]]]}"#;
        let sys: RewritingSystem = serde_json::from_str(text).unwrap();
        assert_eq!(sys.rule_count(), 2);
    }

    #[test]
    fn malformed_documents_rejected() {
        let cases = [
            r#"{"alphabet":["a","b"],"window":1,"rules":[[["a"],["z"]]]}"#,
            r#"{"alphabet":["a","b"],"window":1,"rules":[[["a"],["a"]]]}"#,
            r#"{"alphabet":["a","b"],"window":1,"rules":[[["a","b"],["b","a"]]]}"#,
            r#"{"alphabet":["a","b"],"window":2,"rules":[[["a","b"],["b"]]]}"#,
            r#"{"alphabet":["a","a"],"window":1,"rules":[]}"#,
            r#"{"alphabet":["a","b"],"window":0,"rules":[]}"#,
        ];
        for c in cases {
            assert!(serde_json::from_str::<RewritingSystem>(c).is_err(), "{c}");
        }
    }
}
