//! Resource inequalities over qubit channels `[q->q]`, cbit channels `[c->c]`, ebits `[qq]`
//! and opaque state resources `<tag>`.
//!
//! Text grammar (whitespace is free):
//!
//! ```text
//! inequality := side ( ">=" | ">=!" ) side        ">=!" is exact, ">=" asymptotic
//! side       := term ( "+" term )*
//! term       := rate? ( "[q->q]" | "[c->c]" | "[qq]" | "<" tag ">" ) | "0"
//! ```
//!
//! A missing rate means 1. Tags may contain anything except `<` and `>`.

use std::fmt;

use crate::entropy::mutual_information;
use crate::error::{Error, Result};
use crate::states::{from_pure, PureState};

/// Net rates at or below this are dropped after cancellation.
pub const CANCEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    QubitChannel,
    CbitChannel,
    Ebit,
    State(String),
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::QubitChannel => f.write_str("[q->q]"),
            Self::CbitChannel => f.write_str("[c->c]"),
            Self::Ebit => f.write_str("[qq]"),
            Self::State(tag) => write!(f, "<{tag}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceTerm {
    kind: ResourceKind,
    rate: f64,
}

impl ResourceTerm {
    pub fn new(kind: ResourceKind, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate {
                what: kind.to_string(),
                rate,
            });
        }
        if let ResourceKind::State(tag) = &kind {
            if tag.trim().is_empty() || tag.contains(['<', '>']) {
                return Err(Error::InvalidParameter(format!("bad state tag `{tag}`")));
            }
        }
        Ok(Self { kind, rate })
    }

    pub fn qubits(rate: f64) -> Result<Self> {
        Self::new(ResourceKind::QubitChannel, rate)
    }

    pub fn cbits(rate: f64) -> Result<Self> {
        Self::new(ResourceKind::CbitChannel, rate)
    }

    pub fn ebits(rate: f64) -> Result<Self> {
        Self::new(ResourceKind::Ebit, rate)
    }

    pub fn state(tag: &str) -> Result<Self> {
        Self::new(ResourceKind::State(tag.to_string()), 1.0)
    }

    pub fn kind(&self) -> &ResourceKind {
        &self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn state_tag(&self) -> Option<&str> {
        match &self.kind {
            ResourceKind::State(tag) => Some(tag),
            _ => None,
        }
    }
}

impl fmt::Display for ResourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ResourceKind::State(_) if self.rate == 1.0 => write!(f, "{}", self.kind),
            _ => write!(f, "{} {}", self.rate, self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    Asymptotic,
    Exact,
}

impl Strength {
    pub fn combine(self, other: Self) -> Self {
        if self == Self::Exact && other == Self::Exact {
            Self::Exact
        } else {
            Self::Asymptotic
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Self::Asymptotic => ">=",
            Self::Exact => ">=!",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceInequality {
    pub lhs: Vec<ResourceTerm>,
    pub rhs: Vec<ResourceTerm>,
    pub strength: Strength,
}

impl ResourceInequality {
    pub fn new(lhs: Vec<ResourceTerm>, rhs: Vec<ResourceTerm>, strength: Strength) -> Self {
        Self { lhs, rhs, strength }
    }

    /// `0 >=! 0`, the identity for [`compose`].
    pub fn vacuous() -> Self {
        Self::new(vec![], vec![], Strength::Exact)
    }

    /// `1 [qq] + 2 [c->c] >=! 1 [q->q]`
    pub fn teleportation() -> Self {
        Self::new(
            vec![
                ResourceTerm { kind: ResourceKind::Ebit, rate: 1.0 },
                ResourceTerm { kind: ResourceKind::CbitChannel, rate: 2.0 },
            ],
            vec![ResourceTerm { kind: ResourceKind::QubitChannel, rate: 1.0 }],
            Strength::Exact,
        )
    }

    /// FQSW with rates bound to a pure state on `A, B, R`:
    /// `<W^{S→AB}> + ½I(A:R) [q->q] >= ½I(A:B) [qq] + <id^{S→B̂}>`.
    pub fn fqsw(psi: &PureState) -> Result<Self> {
        let mut labels = psi.layout().labels();
        labels.sort_unstable();
        if labels != ["A", "B", "R"] {
            return Err(Error::InvalidLayout(format!(
                "expected a pure state on A, B, R; got {}",
                psi.layout()
            )));
        }
        let rho = from_pure(psi);
        let i_ar = mutual_information(&rho, &["A"], &["R"])?;
        let i_ab = mutual_information(&rho, &["A"], &["B"])?;
        Ok(Self::new(
            vec![
                ResourceTerm::state("W^{S→AB}")?,
                ResourceTerm::qubits(0.5 * i_ar.max(0.0))?,
            ],
            vec![
                ResourceTerm::ebits(0.5 * i_ab.max(0.0))?,
                ResourceTerm::state("id^{S→B̂}")?,
            ],
            Strength::Asymptotic,
        ))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let scale = |side: &[ResourceTerm]| {
            side.iter()
                .map(|t| ResourceTerm::new(t.kind.clone(), t.rate * factor))
                .collect::<Result<Vec<_>>>()
        };
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(Error::NegativeRate {
                what: "scale factor".into(),
                rate: factor,
            });
        }
        Ok(Self::new(scale(&self.lhs)?, scale(&self.rhs)?, self.strength))
    }

    /// Left-side rate minus right-side rate of one kind.
    pub fn net_rate(&self, kind: &ResourceKind) -> f64 {
        let total = |side: &[ResourceTerm]| -> f64 {
            side.iter().filter(|t| &t.kind == kind).map(|t| t.rate).sum()
        };
        total(&self.lhs) - total(&self.rhs)
    }

    pub fn kinds(&self) -> Vec<ResourceKind> {
        let mut kinds: Vec<ResourceKind> =
            self.lhs.iter().chain(&self.rhs).map(|t| t.kind.clone()).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    /// Merges repeated kinds on each side and cancels kinds present on both sides.
    pub fn netted(&self) -> Self {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut seen: Vec<ResourceKind> = Vec::new();
        for t in self.lhs.iter().chain(&self.rhs) {
            if seen.contains(&t.kind) {
                continue;
            }
            seen.push(t.kind.clone());
            let net = self.net_rate(&t.kind);
            if net > CANCEL_TOL {
                lhs.push(ResourceTerm { kind: t.kind.clone(), rate: net });
            } else if net < -CANCEL_TOL {
                rhs.push(ResourceTerm { kind: t.kind.clone(), rate: -net });
            }
        }
        Self::new(lhs, rhs, self.strength)
    }
}

impl fmt::Display for ResourceInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, terms: &[ResourceTerm]| -> fmt::Result {
            if terms.is_empty() {
                return f.write_str("0");
            }
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        };
        side(f, &self.lhs)?;
        write!(f, " {} ", self.strength.symbol())?;
        side(f, &self.rhs)
    }
}

/// `a + b`, netted.
pub fn compose(a: &ResourceInequality, b: &ResourceInequality) -> Result<ResourceInequality> {
    compose_scaled(a, b, 1.0)
}

/// `a + scale·b`, netted.
pub fn compose_scaled(
    a: &ResourceInequality,
    b: &ResourceInequality,
    scale: f64,
) -> Result<ResourceInequality> {
    let b = b.scaled(scale)?;
    let mut lhs = a.lhs.clone();
    lhs.extend(b.lhs);
    let mut rhs = a.rhs.clone();
    rhs.extend(b.rhs);
    Ok(ResourceInequality::new(lhs, rhs, a.strength.combine(b.strength)).netted())
}

/// State merging from FQSW followed by teleporting with all of its ebits. The net qubit
/// rate is `½I(A:R) - ½I(A:B) = S(A|B)` and the cbit rate is `I(A:B)`.
pub fn derive_qsm(psi: &PureState) -> Result<ResourceInequality> {
    let fqsw = ResourceInequality::fqsw(psi)?;
    let ebits = fqsw.rhs.iter().find(|t| t.kind == ResourceKind::Ebit).map_or(0.0, |t| t.rate);
    compose_scaled(&fqsw, &ResourceInequality::teleportation(), ebits)
}

pub fn parse_inequality(text: &str) -> Result<ResourceInequality> {
    Parser { text, pos: 0 }.inequality()
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn inequality(mut self) -> Result<ResourceInequality> {
        let lhs = self.side()?;
        self.skip_ws();
        let strength = if self.eat(">=!") {
            Strength::Exact
        } else if self.eat(">=") {
            Strength::Asymptotic
        } else if self.rest().is_empty() {
            return self.err(self.pos, "expected `>=` or `>=!`; not an inequality");
        } else {
            return self.err(self.pos, "expected `+`, `>=` or `>=!`");
        };
        let rhs = self.side()?;
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.err(self.pos, "unexpected trailing input");
        }
        Ok(ResourceInequality::new(lhs, rhs, strength))
    }

    fn side(&mut self) -> Result<Vec<ResourceTerm>> {
        let mut terms = Vec::new();
        loop {
            if let Some(t) = self.term()? {
                terms.push(t);
            }
            if !self.eat("+") {
                return Ok(terms);
            }
        }
    }

    /// `None` for a bare `0`.
    fn term(&mut self) -> Result<Option<ResourceTerm>> {
        self.skip_ws();
        let start = self.pos;
        let rate = self.number()?;
        self.skip_ws();
        let kind_pos = self.pos;
        let kind = if self.eat("[") {
            let close = match self.rest().find(']') {
                Some(i) => i,
                None => return self.err(kind_pos, "unclosed `[`"),
            };
            let body: String = self.rest()[..close].chars().filter(|c| !c.is_whitespace()).collect();
            self.pos += close + 1;
            match body.as_str() {
                "q->q" | "q→q" => ResourceKind::QubitChannel,
                "c->c" | "c→c" => ResourceKind::CbitChannel,
                "qq" => ResourceKind::Ebit,
                other => return self.err(kind_pos, format!("unknown resource `[{other}]`")),
            }
        } else if self.eat("<") {
            let close = match self.rest().find(['<', '>']) {
                Some(i) if self.rest()[i..].starts_with('>') => i,
                _ => return self.err(kind_pos, "unclosed `<`"),
            };
            let tag = self.rest()[..close].trim().to_string();
            self.pos += close + 1;
            if tag.is_empty() {
                return self.err(kind_pos, "empty state tag");
            }
            ResourceKind::State(tag)
        } else {
            return match rate {
                Some(0.0) => Ok(None),
                Some(_) => self.err(kind_pos, "expected a resource after the rate"),
                None => self.err(start, "expected a term"),
            };
        };
        ResourceTerm::new(kind, rate.unwrap_or(1.0)).map(Some)
    }

    fn number(&mut self) -> Result<Option<f64>> {
        let start = self.pos;
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        if matches!(bytes.first(), Some(b'-')) {
            end = 1;
        }
        while end < bytes.len() {
            let b = bytes[end];
            let exp_sign = matches!(b, b'+' | b'-') && end > 0 && matches!(bytes[end - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || matches!(b, b'e' | b'E') || exp_sign {
                end += 1;
            } else {
                break;
            }
        }
        if end == 0 {
            return Ok(None);
        }
        let token = &self.rest()[..end];
        let value: f64 = match token.parse() {
            Ok(v) => v,
            Err(_) => return self.err(start, format!("bad number `{token}`")),
        };
        self.pos += end;
        if value < 0.0 {
            return Err(Error::NegativeRate {
                what: format!("term at position {start}"),
                rate: value,
            });
        }
        Ok(Some(value))
    }
}
