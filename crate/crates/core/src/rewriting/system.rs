use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use rustc_hash::FxHashMap;

use super::RewriteError;

/// Index of a token inside an [`Alphabet`].
pub type Symbol = u16;

/// Tables with at most this many possible window codes use a dense
/// offset array instead of a sorted key list.
const DENSE_TABLE_LIMIT: u64 = 1 << 25;

/// Ordered list of distinct printable tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    index: FxHashMap<String, Symbol>,
}

impl Alphabet {
    pub fn new<I, S>(tokens: I) -> Result<Self, RewriteError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err(RewriteError::EmptyAlphabet);
        }
        if tokens.len() > usize::from(Symbol::MAX) + 1 {
            return Err(RewriteError::AlphabetTooLarge(tokens.len()));
        }
        let mut index = FxHashMap::default();
        for (i, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), i as Symbol).is_some() {
                return Err(RewriteError::DuplicateToken(token.clone()));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, symbol: Symbol) -> &str {
        &self.tokens[usize::from(symbol)]
    }

    pub fn symbol(&self, token: &str) -> Option<Symbol> {
        self.index.get(token).copied()
    }

    /// Converts a token sequence into a string over this alphabet.
    pub fn parse<S: AsRef<str>>(&self, tokens: &[S]) -> Result<StringLabel, RewriteError> {
        tokens
            .iter()
            .map(|t| {
                self.symbol(t.as_ref())
                    .ok_or_else(|| RewriteError::UnknownToken(t.as_ref().to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(StringLabel::from)
    }

    pub fn render(&self, symbols: &[Symbol]) -> Vec<String> {
        symbols.iter().map(|&s| self.token(s).to_owned()).collect()
    }
}

/// One ordered pair of the rewriting relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    lhs: Vec<Symbol>,
    rhs: Vec<Symbol>,
}

impl Rule {
    pub fn new(lhs: Vec<Symbol>, rhs: Vec<Symbol>) -> Result<Self, RewriteError> {
        if lhs.len() != rhs.len() {
            return Err(RewriteError::UnequalRuleLengths {
                lhs: lhs.len(),
                rhs: rhs.len(),
            });
        }
        if lhs.is_empty() {
            return Err(RewriteError::EmptyRule);
        }
        if lhs == rhs {
            return Err(RewriteError::SelfLoop);
        }
        Ok(Self { lhs, rhs })
    }

    pub fn lhs(&self) -> &[Symbol] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[Symbol] {
        &self.rhs
    }

    pub fn width(&self) -> usize {
        self.lhs.len()
    }

    pub fn reversed(&self) -> Self {
        Self {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }
}

/// Adds the reverse of every rule. Idempotent.
pub fn symmetric_close<I: IntoIterator<Item = Rule>>(rules: I) -> BTreeSet<Rule> {
    let mut closed = BTreeSet::new();
    for rule in rules {
        closed.insert(rule.reversed());
        closed.insert(rule);
    }
    closed
}

/// Immutable string of alphabet indices, a vertex of the rewriting graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StringLabel(Box<[Symbol]>);

impl StringLabel {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

impl Deref for StringLabel {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl std::borrow::Borrow<[Symbol]> for StringLabel {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for StringLabel {
    fn from(v: Vec<Symbol>) -> Self {
        Self(v.into_boxed_slice())
    }
}

impl From<&[Symbol]> for StringLabel {
    fn from(v: &[Symbol]) -> Self {
        Self(v.into())
    }
}

impl fmt::Debug for StringLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Rule lookup for one window width. Window contents are encoded as
/// base-|A| integers, most significant symbol first.
#[derive(Debug, Clone)]
struct RuleTable {
    width: usize,
    index: TableIndex,
}

#[derive(Debug, Clone)]
enum TableIndex {
    Dense {
        offsets: Vec<u32>,
        targets: Vec<u32>,
    },
    Sparse {
        keys: Vec<u64>,
        offsets: Vec<u32>,
        targets: Vec<u64>,
    },
}

/// Right-hand sides stored for one left-hand side.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Narrow(&'a [u32]),
    Wide(&'a [u64]),
}

impl Targets<'_> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Narrow(t) => t.len(),
            Targets::Wide(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> u64 {
        match self {
            Targets::Narrow(t) => u64::from(t[i]),
            Targets::Wide(t) => t[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

impl RuleTable {
    /// `pairs` must be sorted and deduplicated.
    fn build(width: usize, radix: u64, pairs: &[(u64, u64)]) -> Self {
        let space = radix.checked_pow(width as u32);
        let index = match space {
            Some(space) if space <= DENSE_TABLE_LIMIT => {
                let mut offsets = vec![0u32; space as usize + 1];
                for &(lhs, _) in pairs {
                    offsets[lhs as usize + 1] += 1;
                }
                for i in 0..space as usize {
                    offsets[i + 1] += offsets[i];
                }
                let targets = pairs.iter().map(|&(_, rhs)| rhs as u32).collect();
                TableIndex::Dense { offsets, targets }
            }
            _ => {
                let mut keys = Vec::new();
                let mut offsets = vec![0u32];
                let mut targets = Vec::with_capacity(pairs.len());
                for &(lhs, rhs) in pairs {
                    if keys.last() != Some(&lhs) {
                        if !keys.is_empty() {
                            offsets.push(targets.len() as u32);
                        }
                        keys.push(lhs);
                    }
                    targets.push(rhs);
                }
                offsets.push(targets.len() as u32);
                if keys.is_empty() {
                    offsets = vec![0];
                }
                TableIndex::Sparse {
                    keys,
                    offsets,
                    targets,
                }
            }
        };
        Self { width, index }
    }

    fn targets(&self, code: u64) -> Targets<'_> {
        match &self.index {
            TableIndex::Dense { offsets, targets } => {
                let i = code as usize;
                if i + 1 >= offsets.len() {
                    return Targets::Narrow(&[]);
                }
                Targets::Narrow(&targets[offsets[i] as usize..offsets[i + 1] as usize])
            }
            TableIndex::Sparse {
                keys,
                offsets,
                targets,
            } => match keys.binary_search(&code) {
                Ok(i) => Targets::Wide(&targets[offsets[i] as usize..offsets[i + 1] as usize]),
                Err(_) => Targets::Wide(&[]),
            },
        }
    }

    fn len(&self) -> usize {
        match &self.index {
            TableIndex::Dense { targets, .. } => targets.len(),
            TableIndex::Sparse { targets, .. } => targets.len(),
        }
    }

    fn for_each_pair(&self, mut f: impl FnMut(u64, u64)) {
        match &self.index {
            TableIndex::Dense { offsets, targets } => {
                for lhs in 0..offsets.len() - 1 {
                    for &rhs in &targets[offsets[lhs] as usize..offsets[lhs + 1] as usize] {
                        f(lhs as u64, u64::from(rhs));
                    }
                }
            }
            TableIndex::Sparse {
                keys,
                offsets,
                targets,
            } => {
                for (i, &lhs) in keys.iter().enumerate() {
                    for &rhs in &targets[offsets[i] as usize..offsets[i + 1] as usize] {
                        f(lhs, rhs);
                    }
                }
            }
        }
    }
}

/// Alphabet, window bound and a symmetric relation on equal-length
/// substrings. Immutable once built.
#[derive(Debug, Clone)]
pub struct RewritingSystem {
    alphabet: Alphabet,
    window: usize,
    tables: Vec<RuleTable>,
}

impl RewritingSystem {
    /// Builds a system from rules given in either or both directions.
    pub fn new<I>(alphabet: Alphabet, window: usize, rules: I) -> Result<Self, RewriteError>
    where
        I: IntoIterator<Item = Rule>,
    {
        Self::check_window(&alphabet, window)?;
        let radix = alphabet.len() as u64;
        let mut pairs: Vec<Vec<(u64, u64)>> = vec![Vec::new(); window];
        for rule in rules {
            if rule.width() > window {
                return Err(RewriteError::RuleTooWide {
                    width: rule.width(),
                    window,
                });
            }
            for &s in rule.lhs().iter().chain(rule.rhs()) {
                if usize::from(s) >= alphabet.len() {
                    return Err(RewriteError::SymbolOutOfRange(s));
                }
            }
            pairs[rule.width() - 1].push((encode(rule.lhs(), radix), encode(rule.rhs(), radix)));
        }
        Self::assemble(alphabet, window, pairs)
    }

    /// Builds a system from window codes of a single width. Each pair is
    /// added in both directions.
    pub fn from_code_pairs(
        alphabet: Alphabet,
        window: usize,
        width: usize,
        pairs: Vec<(u64, u64)>,
    ) -> Result<Self, RewriteError> {
        Self::check_window(&alphabet, window)?;
        if width == 0 || width > window {
            return Err(RewriteError::RuleTooWide { width, window });
        }
        let mut by_width = vec![Vec::new(); window];
        by_width[width - 1] = pairs;
        Self::assemble(alphabet, window, by_width)
    }

    /// `pairs[w - 1]` holds window codes of width `w`, in any direction.
    pub(crate) fn assemble(
        alphabet: Alphabet,
        window: usize,
        pairs: Vec<Vec<(u64, u64)>>,
    ) -> Result<Self, RewriteError> {
        Self::check_window(&alphabet, window)?;
        let radix = alphabet.len() as u64;
        let mut system = Self {
            alphabet,
            window,
            tables: Vec::new(),
        };
        for (i, p) in pairs.into_iter().enumerate() {
            let width = i + 1;
            if width > window && !p.is_empty() {
                return Err(RewriteError::RuleTooWide { width, window });
            }
            let space = radix.pow(width.min(window) as u32);
            for &(lhs, rhs) in &p {
                if lhs == rhs {
                    return Err(RewriteError::SelfLoop);
                }
                if lhs >= space || rhs >= space {
                    return Err(RewriteError::CodeOutOfRange(lhs.max(rhs)));
                }
            }
            system.add_table(width, p)?;
        }
        Ok(system)
    }

    fn check_window(alphabet: &Alphabet, window: usize) -> Result<(), RewriteError> {
        if window == 0 {
            return Err(RewriteError::ZeroWindow);
        }
        if (alphabet.len() as u64).checked_pow(window as u32).is_none() {
            return Err(RewriteError::WindowTooLarge(window));
        }
        Ok(())
    }

    fn add_table(&mut self, width: usize, mut pairs: Vec<(u64, u64)>) -> Result<(), RewriteError> {
        if pairs.is_empty() {
            return Ok(());
        }
        let n = pairs.len();
        pairs.reserve(n);
        for i in 0..n {
            let (a, b) = pairs[i];
            pairs.push((b, a));
        }
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.len() > u32::MAX as usize {
            return Err(RewriteError::TooManyRules(pairs.len()));
        }
        self.tables
            .push(RuleTable::build(width, self.alphabet.len() as u64, &pairs));
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of directed rules, i.e. twice the number of related pairs.
    pub fn rule_count(&self) -> usize {
        self.tables.iter().map(RuleTable::len).sum()
    }

    /// All directed rules, sorted by width, then lhs code, then rhs code.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = Vec::with_capacity(self.rule_count());
        self.for_each_pair(|lhs, rhs| {
            out.push(Rule {
                lhs: lhs.to_vec(),
                rhs: rhs.to_vec(),
            })
        });
        out
    }

    /// Visits every related pair once, with the smaller window code on
    /// the left. This is the direction used for serialization.
    pub fn for_each_pair(&self, mut f: impl FnMut(&[Symbol], &[Symbol])) {
        let radix = self.alphabet.len() as u64;
        for table in &self.tables {
            let mut lhs = vec![0; table.width];
            let mut rhs = vec![0; table.width];
            table.for_each_pair(|a, b| {
                if a < b {
                    decode(a, radix, &mut lhs);
                    decode(b, radix, &mut rhs);
                    f(&lhs, &rhs);
                }
            });
        }
    }

    /// Right-hand sides for a window code of the given width.
    pub fn targets(&self, width: usize, code: u64) -> Targets<'_> {
        self.tables
            .iter()
            .find(|t| t.width == width)
            .map_or(Targets::Narrow(&[]), |t| t.targets(code))
    }

    pub fn contains(&self, lhs: &[Symbol], rhs: &[Symbol]) -> bool {
        if lhs.len() != rhs.len() {
            return false;
        }
        let radix = self.alphabet.len() as u64;
        let target = encode(rhs, radix);
        self.targets(lhs.len(), encode(lhs, radix))
            .iter()
            .any(|t| t == target)
    }

    fn check_string(&self, s: &[Symbol]) -> Result<(), RewriteError> {
        if let Some(&bad) = s.iter().find(|&&x| usize::from(x) >= self.alphabet.len()) {
            return Err(RewriteError::SymbolOutOfRange(bad));
        }
        Ok(())
    }

    /// Calls `f` once per derivation: every window position and every
    /// rule whose lhs matches there. The same neighbor may be reported
    /// several times.
    pub fn for_each_derivation(&self, s: &[Symbol], mut f: impl FnMut(&[Symbol])) {
        let radix = self.alphabet.len() as u64;
        let mut buf = s.to_vec();
        for table in &self.tables {
            let w = table.width;
            if s.len() < w {
                continue;
            }
            let high = radix.pow(w as u32 - 1);
            let mut code = encode(&s[..w], radix);
            for p in 0..=s.len() - w {
                if p > 0 {
                    code = (code - u64::from(s[p - 1]) * high) * radix + u64::from(s[p + w - 1]);
                }
                let targets = table.targets(code);
                for t in targets.iter() {
                    decode(t, radix, &mut buf[p..p + w]);
                    f(&buf);
                }
                buf[p..p + w].copy_from_slice(&s[p..p + w]);
            }
        }
    }

    /// Distinct strings reachable by one rewrite, sorted.
    pub fn neighbors(&self, s: &[Symbol]) -> Result<Vec<StringLabel>, RewriteError> {
        self.check_string(s)?;
        let mut out: Vec<StringLabel> = Vec::new();
        self.for_each_derivation(s, |t| out.push(StringLabel::from(t)));
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Neighbors together with the number of distinct derivations
    /// producing each, sorted by neighbor.
    pub fn neighbors_with_multiplicity(
        &self,
        s: &[Symbol],
    ) -> Result<Vec<(StringLabel, u32)>, RewriteError> {
        self.check_string(s)?;
        let mut all: Vec<StringLabel> = Vec::new();
        self.for_each_derivation(s, |t| all.push(StringLabel::from(t)));
        all.sort_unstable();
        let mut out: Vec<(StringLabel, u32)> = Vec::new();
        for t in all {
            match out.last_mut() {
                Some((last, k)) if *last == t => *k += 1,
                _ => out.push((t, 1)),
            }
        }
        Ok(out)
    }
}

/// Base-`radix` code of a window, first symbol most significant.
pub fn encode(window: &[Symbol], radix: u64) -> u64 {
    window
        .iter()
        .fold(0u64, |acc, &s| acc * radix + u64::from(s))
}

/// Inverse of [`encode`], writing into `out`.
pub fn decode(mut code: u64, radix: u64, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % radix) as Symbol;
        code /= radix;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn label(a: &Alphabet, s: &str) -> StringLabel {
        let tokens: Vec<String> = s.chars().map(String::from).collect();
        a.parse(&tokens).unwrap()
    }

    fn rule(a: &Alphabet, l: &str, r: &str) -> Rule {
        Rule::new(label(a, l).to_vec(), label(a, r).to_vec()).unwrap()
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(matches!(
            Alphabet::new(["a", "a"]),
            Err(RewriteError::DuplicateToken(_))
        ));
        assert!(matches!(
            Alphabet::new(Vec::<String>::new()),
            Err(RewriteError::EmptyAlphabet)
        ));
    }

    #[test]
    fn rule_validation() {
        assert!(matches!(
            Rule::new(vec![0, 1], vec![1]),
            Err(RewriteError::UnequalRuleLengths { .. })
        ));
        assert!(matches!(
            Rule::new(vec![0], vec![0]),
            Err(RewriteError::SelfLoop)
        ));
    }

    #[test]
    fn symmetric_closure_examples() {
        let a = ab();
        let closed = symmetric_close([rule(&a, "a", "b")]);
        assert_eq!(closed.len(), 2);
        assert!(closed.contains(&rule(&a, "b", "a")));
        let again = symmetric_close(closed.clone());
        assert_eq!(again, closed);
        let swap = symmetric_close([rule(&a, "ab", "ba")]);
        assert_eq!(
            swap,
            [rule(&a, "ab", "ba"), rule(&a, "ba", "ab")].into_iter().collect()
        );
    }

    #[test]
    fn neighbor_examples() {
        let a = ab();
        let sys = RewritingSystem::new(a.clone(), 1, [rule(&a, "a", "b")]).unwrap();
        let n = sys.neighbors(&label(&a, "ab")).unwrap();
        assert_eq!(n, vec![label(&a, "aa"), label(&a, "bb")]);
        let n = sys.neighbors(&label(&a, "aa")).unwrap();
        assert_eq!(n, vec![label(&a, "ab"), label(&a, "ba")]);

        let sys2 =
            RewritingSystem::new(a.clone(), 2, [rule(&a, "a", "b"), rule(&a, "ab", "ba")]).unwrap();
        let n = sys2.neighbors(&label(&a, "ab")).unwrap();
        assert_eq!(n, vec![label(&a, "aa"), label(&a, "ba"), label(&a, "bb")]);
    }

    #[test]
    fn duplicate_derivations_collapse() {
        let a = ab();
        // "aa" -> "bb" through the width-2 rule, and "ab"/"ba" through width 1.
        let sys = RewritingSystem::new(
            a.clone(),
            2,
            [rule(&a, "a", "b"), rule(&a, "aa", "ab"), rule(&a, "ab", "bb")],
        )
        .unwrap();
        let s = label(&a, "aa");
        let plain = sys.neighbors(&s).unwrap();
        let weighted = sys.neighbors_with_multiplicity(&s).unwrap();
        assert_eq!(plain.len(), weighted.len());
        let ab_entry = weighted.iter().find(|(t, _)| *t == label(&a, "ab")).unwrap();
        assert_eq!(ab_entry.1, 2);
    }

    #[test]
    fn rule_too_wide_rejected() {
        let a = ab();
        assert!(matches!(
            RewritingSystem::new(a.clone(), 1, [rule(&a, "ab", "ba")]),
            Err(RewriteError::RuleTooWide { .. })
        ));
    }

    #[test]
    fn sparse_and_dense_tables_agree() {
        let tokens: Vec<String> = (0..40).map(|i| format!("t{i}")).collect();
        let a = Alphabet::new(tokens).unwrap();
        // 40^5 exceeds the dense limit, 40^3 does not.
        let rules: Vec<Rule> = (0..30u16)
            .map(|i| Rule::new(vec![i, i + 1, 3, 4, 5], vec![i + 2, i, 3, 4, 5]).unwrap())
            .collect();
        let wide = RewritingSystem::new(a.clone(), 5, rules.clone()).unwrap();
        let narrow_rules: Vec<Rule> = rules
            .iter()
            .map(|r| Rule::new(r.lhs()[..3].to_vec(), r.rhs()[..3].to_vec()).unwrap())
            .collect();
        let narrow = RewritingSystem::new(a.clone(), 3, narrow_rules).unwrap();
        let s: Vec<Symbol> = vec![7, 8, 3, 4, 5];
        let w: Vec<Vec<Symbol>> = wide
            .neighbors(&s)
            .unwrap()
            .into_iter()
            .map(|t| t.to_vec())
            .collect();
        let n: Vec<Vec<Symbol>> = narrow
            .neighbors(&s)
            .unwrap()
            .into_iter()
            .map(|t| t.to_vec())
            .collect();
        assert_eq!(w, n);
        assert_eq!(wide.rule_count(), narrow.rule_count());
    }

    #[test]
    fn code_pairs_constructor_closes_symmetrically() {
        let a = ab();
        let sys = RewritingSystem::from_code_pairs(a, 2, 2, vec![(1, 2)]).unwrap();
        assert_eq!(sys.rule_count(), 2);
        assert!(sys.contains(&[0, 1], &[1, 0]));
        assert!(sys.contains(&[1, 0], &[0, 1]));
    }

    #[test]
    fn encode_roundtrip() {
        let mut out = [0u16; 3];
        let code = encode(&[5, 0, 223], 224);
        decode(code, 224, &mut out);
        assert_eq!(out, [5, 0, 223]);
    }
}
