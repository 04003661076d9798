use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest supported history.
pub const MAX_LEVEL: usize = 63;

/// A non-empty bit sequence, most recent entry first.
///
/// Bit `i` of `bits` holds entry `a_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    len: u8,
    bits: u64,
}

impl History {
    pub fn new(entries: &[u8]) -> Result<Self> {
        if entries.is_empty() || entries.len() > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!(
                "a history needs between 1 and {MAX_LEVEL} entries, got {}",
                entries.len()
            )));
        }
        let mut bits = 0u64;
        for (i, &e) in entries.iter().enumerate() {
            match e {
                0 => {}
                1 => bits |= 1 << i,
                other => return Err(Error::InvalidArgument(format!("history entries are bits, got {other}"))),
            }
        }
        Ok(Self {
            len: entries.len() as u8,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entry(&self, i: usize) -> u8 {
        (self.bits >> i & 1) as u8
    }

    pub fn entries(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.entry(i)).collect()
    }

    /// Overwrites the most recent entry.
    pub fn assign(self, bit: u8) -> Self {
        Self {
            len: self.len,
            bits: (self.bits & !1) | u64::from(bit & 1),
        }
    }

    /// Shifts right duplicating the first entry, keeping at most `level` entries.
    pub fn dup(self, level: usize) -> Self {
        let len = (self.len() + 1).min(level);
        let mask = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self {
            len: len as u8,
            bits: ((self.bits << 1) | (self.bits & 1)) & mask,
        }
    }

    /// Every history of exactly `len` entries.
    pub fn all_of_length(len: usize) -> Vec<History> {
        assert!((1..=20).contains(&len), "enumeration limited to short histories");
        (0..1u64 << len)
            .map(|bits| History { len: len as u8, bits })
            .collect()
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries().iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for History {
    type Err = Error;

    /// Accepts `(1,0,1)` and the compact `(101)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse history literal {s:?}"));
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let digits: Vec<&str> = if inner.contains(',') {
            inner.split(',').map(str::trim).collect()
        } else {
            inner.trim().split("").filter(|c| !c.is_empty()).collect()
        };
        let entries = digits
            .iter()
            .map(|d| match *d {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<u8>>>()?;
        History::new(&entries)
    }
}

/// A program state: a finite set of histories.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketSet(BTreeSet<History>);

impl PacketSet {
    pub fn new(histories: impl IntoIterator<Item = History>) -> Self {
        Self(histories.into_iter().collect())
    }

    pub fn singleton(h: History) -> Self {
        Self::new([h])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, h: &History) -> bool {
        self.0.contains(h)
    }

    pub fn is_superset(&self, other: &PacketSet) -> bool {
        self.0.is_superset(&other.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &History> {
        self.0.iter()
    }

    pub fn union(&self, other: &PacketSet) -> PacketSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn extend(&mut self, other: &PacketSet) {
        self.0.extend(other.0.iter().copied());
    }

    /// Direct image under a map on histories.
    pub fn map(&self, f: impl Fn(History) -> History) -> PacketSet {
        Self(self.0.iter().map(|&h| f(h)).collect())
    }

    pub fn max_len(&self) -> usize {
        self.0.iter().map(History::len).max().unwrap_or(0)
    }

    pub fn ensure_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!(
                "truncation level must be in 1..={MAX_LEVEL}, got {level}"
            )));
        }
        if self.max_len() > level {
            return Err(Error::InvalidArgument(format!(
                "state {self} has a history longer than the truncation level {level}"
            )));
        }
        Ok(())
    }
}

impl FromIterator<History> for PacketSet {
    fn from_iter<I: IntoIterator<Item = History>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl fmt::Display for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for PacketSet {
    type Err = Error;

    /// Accepts `{(0),(1,0)}`, `{}` and a bare history such as `(0)`.
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let inner = match text.strip_prefix('{') {
            Some(rest) => rest
                .strip_suffix('}')
                .ok_or_else(|| Error::InvalidArgument(format!("unterminated set literal {s:?}")))?,
            None => text,
        };
        let mut out = PacketSet::empty();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let end = rest
                .find(')')
                .ok_or_else(|| Error::InvalidArgument(format!("cannot parse set literal {s:?}")))?;
            out.0.insert(rest[..=end].parse()?);
            rest = rest[end + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        }
        Ok(out)
    }
}
