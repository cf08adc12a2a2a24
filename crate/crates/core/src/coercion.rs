//! Security label coercions and coercion sequences.
//!
//! A sequence starts with `id(g)` or a failure `⊥^p g1 g2` and continues with
//! single coercions. Normal forms have the shape `id(g)` followed by an
//! optional projection, an optional `↑`, and an optional injection.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lattice::{Label, Level};

/// A blame label `p<n>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlameLabel(pub u32);

impl fmt::Display for BlameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl FromStr for BlameLabel {
    type Err = SeqParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('p')
            .and_then(|n| n.parse().ok())
            .map(BlameLabel)
            .ok_or_else(|| SeqParseError(format!("bad blame label `{s}`")))
    }
}

/// A single coercion appearing after the head of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Single {
    Id(Label),
    Up,
    Inj(Level),
    Proj(Level, BlameLabel),
}

impl Single {
    pub fn source(self) -> Label {
        match self {
            Single::Id(g) => g,
            Single::Up => Label::LOW,
            Single::Inj(l) => l.into(),
            Single::Proj(..) => Label::Star,
        }
    }

    pub fn target(self) -> Label {
        match self {
            Single::Id(g) => g,
            Single::Up => Label::HIGH,
            Single::Inj(_) => Label::Star,
            Single::Proj(l, _) => l.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Id(Label),
    Fail { blame: BlameLabel, source: Label, target: Label },
}

/// A coercion sequence `c̄`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seq {
    pub head: Head,
    pub tail: Vec<Single>,
}

/// Names of the reduction rules on sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Xi,
    XiFail,
    Id,
    ProjId,
    ProjUp,
    ProjFail,
}

/// Outcome of normalizing a well-typed sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Value(Seq),
    Blame(BlameLabel),
}

impl Seq {
    pub fn id(g: impl Into<Label>) -> Seq {
        Seq { head: Head::Id(g.into()), tail: vec![] }
    }

    pub fn fail(blame: BlameLabel, source: Label, target: Label) -> Seq {
        Seq { head: Head::Fail { blame, source, target }, tail: vec![] }
    }

    pub fn then(mut self, c: Single) -> Seq {
        self.tail.push(c);
        self
    }

    pub fn source(&self) -> Label {
        match self.head {
            Head::Id(g) => g,
            Head::Fail { source, .. } => source,
        }
    }

    pub fn target(&self) -> Label {
        match (self.tail.last(), self.head) {
            (Some(c), _) => c.target(),
            (None, Head::Id(g)) => g,
            (None, Head::Fail { target, .. }) => target,
        }
    }

    pub fn len(&self) -> usize {
        1 + self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn well_typed(&self) -> bool {
        let mut at = match self.head {
            Head::Id(g) => g,
            Head::Fail { target, .. } => target,
        };
        for c in &self.tail {
            if c.source() != at {
                return false;
            }
            at = c.target();
        }
        true
    }

    pub fn is_fail(&self) -> bool {
        matches!(self.head, Head::Fail { .. }) && self.tail.is_empty()
    }

    /// Normal form: identity head, no identities in the tail, no injection followed by a projection.
    pub fn is_normal(&self) -> bool {
        matches!(self.head, Head::Id(_))
            && self.tail.iter().all(|c| !matches!(c, Single::Id(_)))
            && self.tail.windows(2).all(|w| !matches!((w[0], w[1]), (Single::Inj(_), Single::Proj(..))))
    }

    /// A normal form that is not the identity.
    pub fn is_irreducible(&self) -> bool {
        self.is_normal() && !self.tail.is_empty()
    }

    /// Every sequence reachable in one step, with the rule used.
    pub fn steps(&self) -> Vec<(Rule, Seq)> {
        let Some((&c, init)) = self.tail.split_last() else {
            return vec![];
        };
        let prefix = Seq { head: self.head, tail: init.to_vec() };
        let mut out: Vec<(Rule, Seq)> = prefix.steps().into_iter().map(|(_, p)| (Rule::Xi, p.then(c))).collect();
        if let (Head::Fail { blame, source, .. }, true) = (prefix.head, prefix.tail.is_empty()) {
            out.push((Rule::XiFail, Seq::fail(blame, source, c.target())));
        }
        if prefix.is_normal() {
            if let Single::Id(_) = c {
                out.push((Rule::Id, prefix.clone()));
            }
            if let (Single::Proj(l2, p), Some((&Single::Inj(l1), rest))) = (c, init.split_last()) {
                let base = Seq { head: prefix.head, tail: rest.to_vec() };
                match (l1, l2) {
                    (a, b) if a == b => out.push((Rule::ProjId, base)),
                    (Level::Low, Level::High) => out.push((Rule::ProjUp, base.then(Single::Up))),
                    _ => out.push((Rule::ProjFail, Seq::fail(p, self.source(), Label::LOW))),
                }
            }
        }
        out
    }

    /// Normalizes by folding the tail left to right. Returns the result and the number of steps taken.
    pub fn normalize_counted(&self) -> (Seq, usize) {
        let mut steps = 0;
        let mut acc = Seq { head: self.head, tail: Vec::with_capacity(self.tail.len()) };
        for &c in &self.tail {
            if let Head::Fail { target, .. } = &mut acc.head {
                *target = c.target();
                steps += 1;
                continue;
            }
            match (acc.tail.last().copied(), c) {
                (_, Single::Id(_)) => steps += 1,
                (Some(Single::Inj(l1)), Single::Proj(l2, p)) => {
                    steps += 1;
                    acc.tail.pop();
                    match (l1, l2) {
                        (a, b) if a == b => {}
                        (Level::Low, Level::High) => acc.tail.push(Single::Up),
                        _ => acc = Seq::fail(p, self.source(), Label::LOW),
                    }
                }
                _ => acc.tail.push(c),
            }
        }
        (acc, steps)
    }

    pub fn normalize(&self) -> Normalized {
        let (s, _) = self.normalize_counted();
        match s.head {
            Head::Fail { blame, .. } => Normalized::Blame(blame),
            Head::Id(_) => Normalized::Value(s),
        }
    }

    /// `self ⨟ other`; the result is not normalized.
    pub fn compose(&self, other: &Seq) -> Seq {
        match other.head {
            Head::Fail { blame, target, .. } => {
                Seq { head: Head::Fail { blame, source: self.source(), target }, tail: other.tail.clone() }
            }
            Head::Id(g) => {
                let mut tail = self.tail.clone();
                tail.push(Single::Id(g));
                tail.extend_from_slice(&other.tail);
                Seq { head: self.head, tail }
            }
        }
    }

    fn specific_source(&self) -> Level {
        self.source().level().expect("sequence with a specific source")
    }

    /// Security level of a normal form with a specific source.
    pub fn security(&self) -> Level {
        debug_assert!(self.is_normal());
        if self.tail.contains(&Single::Up) {
            Level::High
        } else {
            self.specific_source()
        }
    }

    /// Stamps a normal form (with a specific source) by `l`.
    pub fn stamp(&self, l: Level) -> Seq {
        debug_assert!(self.is_normal());
        let src = self.specific_source();
        match (l, src, self.tail.as_slice()) {
            (Level::Low, ..) => self.clone(),
            (Level::High, Level::Low, []) => Seq::id(Level::Low).then(Single::Up),
            (Level::High, Level::Low, [Single::Inj(Level::Low)]) => {
                Seq::id(Level::Low).then(Single::Up).then(Single::Inj(Level::High))
            }
            _ => self.clone(),
        }
    }

    /// Stamps a normal form and injects the result into `*`.
    pub fn stamp_bang(&self, l: Level) -> Seq {
        debug_assert!(self.is_normal());
        match l {
            Level::Low => {
                if self.target().is_star() {
                    self.clone()
                } else {
                    let t = self.target().level().expect("specific target");
                    self.clone().then(Single::Inj(t))
                }
            }
            Level::High => match self.specific_source() {
                Level::Low => Seq::id(Level::Low).then(Single::Up).then(Single::Inj(Level::High)),
                Level::High => Seq::id(Level::High).then(Single::Inj(Level::High)),
            },
        }
    }

    /// Precision `self ⊑ other` on sequences.
    pub fn precise_leq(&self, other: &Seq) -> bool {
        let n = self.tail.len();
        let m = other.tail.len();
        let tgt = |s: &Seq, k: usize| -> Label {
            if k == 0 {
                match s.head {
                    Head::Id(g) => g,
                    Head::Fail { target, .. } => target,
                }
            } else {
                s.tail[k - 1].target()
            }
        };
        // rel[i][j]: prefix of self with i tail items ⊑ prefix of other with j tail items
        let mut rel = vec![vec![false; m + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=m {
                let mut ok = false;
                if j == 0 {
                    if let Head::Fail { source, target, .. } = other.head {
                        ok = self.source().precise_leq(source) && tgt(self, i).precise_leq(target);
                    }
                }
                if i == 0 && j == 0 {
                    if let (Head::Id(g), Head::Id(h)) = (self.head, other.head) {
                        ok |= g.precise_leq(h);
                    }
                }
                if !ok && i > 0 && j > 0 {
                    let (c, d) = (self.tail[i - 1], other.tail[j - 1]);
                    ok = rel[i - 1][j - 1] && c.source().precise_leq(d.source()) && c.target().precise_leq(d.target());
                }
                if !ok && i > 0 {
                    let c = self.tail[i - 1];
                    let g = tgt(other, j);
                    ok = rel[i - 1][j] && c.source().precise_leq(g) && c.target().precise_leq(g);
                }
                if !ok && j > 0 {
                    let d = other.tail[j - 1];
                    let g = tgt(self, i);
                    ok = rel[i][j - 1] && g.precise_leq(d.source()) && g.precise_leq(d.target());
                }
                rel[i][j] = ok;
            }
        }
        rel[n][m]
    }
}

/// The coercion `g1 ⇒^p g2`. Panics if `g1 ≲ g2` does not hold.
pub fn coerce_label(g1: Label, g2: Label, p: BlameLabel) -> Seq {
    use Label::{Known, Star};
    match (g1, g2) {
        (Known(a), Known(b)) if a == b => Seq::id(a),
        (Known(Level::Low), Known(Level::High)) => Seq::id(Level::Low).then(Single::Up),
        (Known(a), Star) => Seq::id(a).then(Single::Inj(a)),
        (Star, Known(b)) => Seq::id(Star).then(Single::Proj(b, p)),
        (Star, Star) => Seq::id(Star),
        _ => panic!("no coercion from {g1} to {g2}"),
    }
}

/// Every well-typed sequence with at most `max_tail` coercions after the head.
/// Projections and failures carry a blame label equal to their position.
pub fn enumerate(max_tail: usize) -> Vec<Seq> {
    let mut heads: Vec<Seq> = Label::ALL.iter().map(|&g| Seq::id(g)).collect();
    for &s in &Label::ALL {
        for &t in &Label::ALL {
            heads.push(Seq::fail(BlameLabel(0), s, t));
        }
    }
    let mut out = heads.clone();
    let mut frontier = heads;
    for k in 1..=max_tail {
        let mut next = vec![];
        for s in &frontier {
            for c in singles_from(s.target(), BlameLabel(k as u32)) {
                next.push(s.clone().then(c));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn singles_from(g: Label, p: BlameLabel) -> Vec<Single> {
    let mut v = vec![Single::Id(g)];
    match g {
        Label::Known(Level::Low) => v.extend([Single::Up, Single::Inj(Level::Low)]),
        Label::Known(Level::High) => v.push(Single::Inj(Level::High)),
        Label::Star => v.extend([Single::Proj(Level::Low, p), Single::Proj(Level::High, p)]),
    }
    v
}

impl fmt::Display for Single {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Single::Id(g) => write!(f, "id({g})"),
            Single::Up => f.write_str("up"),
            Single::Inj(l) => write!(f, "{l}!"),
            Single::Proj(l, p) => write!(f, "{l}?{p}"),
        }
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.head {
            Head::Id(g) => write!(f, "id({g})")?,
            Head::Fail { blame, source, target } => write!(f, "bot({blame},{source},{target})")?,
        }
        for c in &self.tail {
            write!(f, ";{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse coercion: {0}")]
pub struct SeqParseError(String);

fn parse_label(s: &str) -> Result<Label, SeqParseError> {
    match s {
        "low" => Ok(Label::LOW),
        "high" => Ok(Label::HIGH),
        "*" => Ok(Label::Star),
        _ => Err(SeqParseError(format!("bad label `{s}`"))),
    }
}

fn parse_level(s: &str) -> Result<Level, SeqParseError> {
    parse_label(s)?.level().ok_or_else(|| SeqParseError(format!("expected a level, got `{s}`")))
}

impl FromStr for Single {
    type Err = SeqParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "up" {
            return Ok(Single::Up);
        }
        if let Some(inner) = s.strip_prefix("id(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Single::Id(parse_label(inner)?));
        }
        if let Some(l) = s.strip_suffix('!') {
            return Ok(Single::Inj(parse_level(l)?));
        }
        if let Some((l, p)) = s.split_once('?') {
            return Ok(Single::Proj(parse_level(l)?, p.parse()?));
        }
        Err(SeqParseError(format!("bad coercion `{s}`")))
    }
}

impl FromStr for Seq {
    type Err = SeqParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(';');
        let first = parts.next().unwrap_or("").trim();
        let head = if let Some(inner) = first.strip_prefix("bot(").and_then(|r| r.strip_suffix(')')) {
            let f: Vec<&str> = inner.split(',').map(str::trim).collect();
            let [p, a, b] = f.as_slice() else {
                return Err(SeqParseError(format!("bad failure `{first}`")));
            };
            Head::Fail { blame: p.parse()?, source: parse_label(a)?, target: parse_label(b)? }
        } else {
            match first.parse::<Single>()? {
                Single::Id(g) => Head::Id(g),
                _ => return Err(SeqParseError(format!("sequence must start with id or bot: `{first}`"))),
            }
        };
        let tail = parts.map(str::parse).collect::<Result<Vec<_>, _>>()?;
        let seq = Seq { head, tail };
        if seq.well_typed() {
            Ok(seq)
        } else {
            Err(SeqParseError(format!("ill-typed sequence `{s}`")))
        }
    }
}
