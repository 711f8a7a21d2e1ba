use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use super::system::{RewritingSystem, StringLabel, Symbol};
use super::RewriteError;

/// Compact identifier of an interned string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StringId(pub u32);

/// Assigns identifiers to strings on first sight.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    ids: FxHashMap<StringLabel, StringId>,
    labels: Vec<StringLabel>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, s: &[Symbol]) -> StringId {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = StringId(self.labels.len() as u32);
        let label = StringLabel::from(s);
        self.labels.push(label.clone());
        self.ids.insert(label, id);
        id
    }

    pub fn get(&self, s: &[Symbol]) -> Option<StringId> {
        self.ids.get(s).copied()
    }

    pub fn label(&self, id: StringId) -> &StringLabel {
        &self.labels[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Sparse column of Aⁿ: interned string to nonzero walk count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkVector {
    entries: FxHashMap<StringId, BigInt>,
    step_index: usize,
}

impl WalkVector {
    pub fn unit(id: StringId) -> Self {
        let mut entries = FxHashMap::default();
        entries.insert(id, BigInt::one());
        Self {
            entries,
            step_index: 0,
        }
    }

    pub fn get(&self, id: StringId) -> BigInt {
        self.entries.get(&id).cloned().unwrap_or_default()
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StringId, &BigInt)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }
}

/// Walk counter over the implicit graph of a rewriting system. Interns
/// strings and caches neighbor lists, so repeated steps over the same
/// region of the graph only generate each neighborhood once.
pub struct Walker<'a> {
    system: &'a RewritingSystem,
    interner: Interner,
    adjacency: Vec<Option<Box<[StringId]>>>,
    vertex_budget: Option<usize>,
}

impl<'a> Walker<'a> {
    pub fn new(system: &'a RewritingSystem) -> Self {
        Self {
            system,
            interner: Interner::new(),
            adjacency: Vec::new(),
            vertex_budget: None,
        }
    }

    /// Fails any expansion that would intern more than `budget` strings.
    pub fn with_vertex_budget(mut self, budget: usize) -> Self {
        self.vertex_budget = Some(budget);
        self
    }

    pub fn system(&self) -> &RewritingSystem {
        self.system
    }

    pub fn interner(&self) -> &Interner {
        &self.interner
    }

    pub fn intern(&mut self, s: &[Symbol]) -> Result<StringId, RewriteError> {
        if let Some(&bad) = s
            .iter()
            .find(|&&x| usize::from(x) >= self.system.alphabet().len())
        {
            return Err(RewriteError::SymbolOutOfRange(bad));
        }
        let id = self.interner.intern(s);
        self.check_budget()?;
        Ok(id)
    }

    fn check_budget(&self) -> Result<(), RewriteError> {
        match self.vertex_budget {
            Some(b) if self.interner.len() > b => Err(RewriteError::VertexBudget(b)),
            _ => Ok(()),
        }
    }

    fn expand(&mut self, id: StringId) -> Result<(), RewriteError> {
        let i = id.0 as usize;
        if self.adjacency.len() <= i {
            self.adjacency.resize(i + 1, None);
        }
        if self.adjacency[i].is_some() {
            return Ok(());
        }
        let label = self.interner.label(id).clone();
        let mut out: Vec<StringId> = Vec::new();
        let interner = &mut self.interner;
        self.system
            .for_each_derivation(&label, |t| out.push(interner.intern(t)));
        out.sort_unstable();
        out.dedup();
        self.adjacency[i] = Some(out.into_boxed_slice());
        self.check_budget()
    }

    /// Distinct neighbors of an interned string.
    pub fn neighbors(&mut self, id: StringId) -> Result<&[StringId], RewriteError> {
        self.expand(id)?;
        Ok(self.adjacency[id.0 as usize].as_deref().unwrap_or(&[]))
    }

    fn cached(&self, id: StringId) -> &[StringId] {
        self.adjacency[id.0 as usize].as_deref().unwrap_or(&[])
    }

    /// One multiplication by the adjacency matrix.
    pub fn step(&mut self, v: &WalkVector) -> Result<WalkVector, RewriteError> {
        let mut keys: Vec<StringId> = v.entries.keys().copied().collect();
        keys.sort_unstable();
        for &k in &keys {
            self.expand(k)?;
        }
        let mut out: FxHashMap<StringId, BigInt> = FxHashMap::default();
        for &k in &keys {
            let value = &v.entries[&k];
            for &t in self.cached(k) {
                *out.entry(t).or_default() += value;
            }
        }
        out.retain(|_, x| !x.is_zero());
        Ok(WalkVector {
            entries: out,
            step_index: v.step_index + 1,
        })
    }

    /// One multiplication by A/c in floating point.
    pub fn step_scaled(
        &mut self,
        v: &FxHashMap<StringId, f64>,
        c: f64,
    ) -> Result<FxHashMap<StringId, f64>, RewriteError> {
        let mut keys: Vec<StringId> = v.keys().copied().collect();
        keys.sort_unstable();
        for &k in &keys {
            self.expand(k)?;
        }
        let mut out: FxHashMap<StringId, f64> = FxHashMap::default();
        for &k in &keys {
            let value = v[&k] / c;
            for &t in self.cached(k) {
                *out.entry(t).or_default() += value;
            }
        }
        for &x in out.values() {
            if !x.is_finite() {
                return Err(RewriteError::Overflow);
            }
            if x != 0.0 && x.abs() < f64::MIN_POSITIVE {
                return Err(RewriteError::Underflow);
            }
        }
        out.retain(|_, x| *x != 0.0);
        Ok(out)
    }

    /// Column Aⁿ e_s.
    pub fn walk_from(&mut self, s: &[Symbol], n: usize) -> Result<(StringId, WalkVector), RewriteError> {
        let sid = self.intern(s)?;
        let mut v = WalkVector::unit(sid);
        for _ in 0..n {
            v = self.step(&v)?;
        }
        Ok((sid, v))
    }
}

fn check_lengths(s: &[Symbol], others: &[&[Symbol]]) -> Result<(), RewriteError> {
    for o in others {
        if o.len() != s.len() {
            return Err(RewriteError::LengthMismatch {
                left: s.len(),
                right: o.len(),
            });
        }
    }
    Ok(())
}

/// Exact (Aⁿ)_{s,t}.
pub fn count_walks(
    sys: &RewritingSystem,
    s: &[Symbol],
    t: &[Symbol],
    n: usize,
) -> Result<BigInt, RewriteError> {
    check_lengths(s, &[t])?;
    let mut walker = Walker::new(sys);
    let (_, v) = walker.walk_from(s, n)?;
    Ok(walker.interner().get(t).map(|id| v.get(id)).unwrap_or_default())
}

/// Exact Δ(n) = (Aⁿ)_{s,t} − (Aⁿ)_{s,t′} from a single expansion.
pub fn delta(
    sys: &RewritingSystem,
    s: &[Symbol],
    t: &[Symbol],
    t_prime: &[Symbol],
    n: usize,
) -> Result<BigInt, RewriteError> {
    check_lengths(s, &[t, t_prime])?;
    let mut walker = Walker::new(sys);
    delta_with(&mut walker, s, t, t_prime, n)
}

/// [`delta`] on a caller-provided walker (for budgets and cache reuse).
pub fn delta_with(
    walker: &mut Walker<'_>,
    s: &[Symbol],
    t: &[Symbol],
    t_prime: &[Symbol],
    n: usize,
) -> Result<BigInt, RewriteError> {
    check_lengths(s, &[t, t_prime])?;
    let (_, v) = walker.walk_from(s, n)?;
    let at = |x: &[Symbol]| {
        walker
            .interner()
            .get(x)
            .map(|id| v.get(id))
            .unwrap_or_default()
    };
    Ok(at(t) - at(t_prime))
}

/// Δ(k) for every k in 0..=n, from a single expansion.
pub fn delta_series(
    walker: &mut Walker<'_>,
    s: &[Symbol],
    t: &[Symbol],
    t_prime: &[Symbol],
    n: usize,
) -> Result<Vec<BigInt>, RewriteError> {
    check_lengths(s, &[t, t_prime])?;
    let sid = walker.intern(s)?;
    let tid = walker.intern(t)?;
    let tpid = walker.intern(t_prime)?;
    let mut v = WalkVector::unit(sid);
    let mut out = Vec::with_capacity(n + 1);
    out.push(v.get(tid) - v.get(tpid));
    for _ in 0..n {
        v = walker.step(&v)?;
        out.push(v.get(tid) - v.get(tpid));
    }
    Ok(out)
}

/// Approximates Δ(n)/cⁿ with a floating vector rescaled by 1/c per step.
///
/// Entries are sums of nonnegative terms, so each step adds at most
/// `deg` rounding errors of relative size ε_mach to every entry. The
/// relative error of each count is therefore at most n·deg·ε_mach,
/// where deg bounds the in-degree on the frontier. The final
/// difference inherits this bound relative to the larger of the two
/// counts, not relative to Δ itself.
pub fn delta_scaled(
    sys: &RewritingSystem,
    s: &[Symbol],
    t: &[Symbol],
    t_prime: &[Symbol],
    n: usize,
    c: f64,
) -> Result<f64, RewriteError> {
    let mut walker = Walker::new(sys);
    delta_scaled_with(&mut walker, s, t, t_prime, n, c)
}

/// [`delta_scaled`] on a caller-provided walker.
pub fn delta_scaled_with(
    walker: &mut Walker<'_>,
    s: &[Symbol],
    t: &[Symbol],
    t_prime: &[Symbol],
    n: usize,
    c: f64,
) -> Result<f64, RewriteError> {
    check_lengths(s, &[t, t_prime])?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(RewriteError::InvalidScale(c));
    }
    if t == t_prime {
        return Ok(0.0);
    }
    let sid = walker.intern(s)?;
    let mut v: FxHashMap<StringId, f64> = FxHashMap::default();
    v.insert(sid, 1.0);
    for _ in 0..n {
        v = walker.step_scaled(&v, c)?;
    }
    let at = |x: &[Symbol]| {
        walker
            .interner()
            .get(x)
            .and_then(|id| v.get(&id).copied())
            .unwrap_or(0.0)
    };
    Ok(at(t) - at(t_prime))
}

/// Reference count by depth-first enumeration of every length-n walk.
/// Fails once more than `limit` walk prefixes have been visited.
pub fn brute_force_count(
    sys: &RewritingSystem,
    s: &[Symbol],
    t: &[Symbol],
    n: usize,
    limit: u64,
) -> Result<BigInt, RewriteError> {
    check_lengths(s, &[t])?;
    let mut visited = 0u64;
    let mut count = BigInt::zero();
    let mut stack: Vec<(StringLabel, usize)> = vec![(StringLabel::from(s), 0)];
    while let Some((u, depth)) = stack.pop() {
        visited += 1;
        if visited > limit {
            return Err(RewriteError::EnumerationLimit(limit));
        }
        if depth == n {
            if u.symbols() == t {
                count += 1;
            }
            continue;
        }
        for v in sys.neighbors(&u)? {
            stack.push((v, depth + 1));
        }
    }
    Ok(count)
}

/// Exact (Aᵐ)_{s,t}/dᵐ when every string within distance m of s has
/// the same degree d.
pub fn walk_probability(
    sys: &RewritingSystem,
    s: &[Symbol],
    t: &[Symbol],
    m: usize,
) -> Result<BigRational, RewriteError> {
    check_lengths(s, &[t])?;
    let mut walker = Walker::new(sys);
    let sid = walker.intern(s)?;
    let mut degree: Option<usize> = None;
    let mut queue = VecDeque::from([(sid, 0usize)]);
    let mut marked: rustc_hash::FxHashSet<StringId> = [sid].into_iter().collect();
    while let Some((u, depth)) = queue.pop_front() {
        let nb = walker.neighbors(u)?.to_vec();
        match degree {
            None => degree = Some(nb.len()),
            Some(d) if d != nb.len() => {
                return Err(RewriteError::NonRegular {
                    expected: d,
                    found: nb.len(),
                })
            }
            _ => {}
        }
        if depth < m {
            for v in nb {
                if marked.insert(v) {
                    queue.push_back((v, depth + 1));
                }
            }
        }
    }
    let d = degree.unwrap_or(0);
    if m == 0 {
        let hit = if s == t { 1 } else { 0 };
        return Ok(BigRational::from_integer(BigInt::from(hit)));
    }
    if d == 0 {
        return Err(RewriteError::NonRegular {
            expected: 1,
            found: 0,
        });
    }
    let count = count_walks(sys, s, t, m)?;
    let denom = num_traits::pow(BigInt::from(d), m);
    Ok(BigRational::new(count, denom))
}
