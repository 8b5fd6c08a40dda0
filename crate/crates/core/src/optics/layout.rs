use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Spatial;
use crate::error::{Error, Result};
use crate::state::{c, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    #[serde(rename = "QWP45")]
    Qwp45,
    #[serde(rename = "HWP")]
    Hwp,
    #[serde(rename = "PBS")]
    Pbs,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Qwp45 => "QWP45",
            ElementKind::Hwp => "HWP",
            ElementKind::Pbs => "PBS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Qwp45(Spatial),
    Hwp(Spatial),
    Pbs(Spatial, Spatial),
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Qwp45(_) => ElementKind::Qwp45,
            Element::Hwp(_) => ElementKind::Hwp,
            Element::Pbs(..) => ElementKind::Pbs,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Qwp45(t) | Element::Hwp(t) => {
                write!(f, "element {} {}", self.kind().name(), t)
            }
            Element::Pbs(a, b) => write!(f, "element PBS {a} {b}"),
        }
    }
}

/// Phase picked up by a vertically polarized photon on reflection at the PBS.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum PbsPhase {
    #[serde(rename = "+1")]
    One,
    #[default]
    #[serde(rename = "i")]
    I,
    #[serde(rename = "-i")]
    MinusI,
}

impl PbsPhase {
    pub const ALL: [PbsPhase; 3] = [PbsPhase::One, PbsPhase::I, PbsPhase::MinusI];

    pub fn value(self) -> C64 {
        match self {
            PbsPhase::One => c(1.0, 0.0),
            PbsPhase::I => c(0.0, 1.0),
            PbsPhase::MinusI => c(0.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PbsPhase::One => "+1",
            PbsPhase::I => "i",
            PbsPhase::MinusI => "-i",
        }
    }
}

impl FromStr for PbsPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" => Ok(PbsPhase::One),
            "i" | "+i" => Ok(PbsPhase::I),
            "-i" => Ok(PbsPhase::MinusI),
            other => Err(Error::InvalidLayout(format!("unknown PBS phase `{other}`"))),
        }
    }
}

impl fmt::Display for PbsPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Available element counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub qwp45: usize,
    pub hwp: usize,
    pub pbs: usize,
}

impl Default for Inventory {
    fn default() -> Self {
        Self {
            qwp45: 4,
            hwp: 2,
            pbs: 1,
        }
    }
}

/// An ordered list of optical elements, applied first to last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layout {
    elements: Vec<Element>,
    pbs_phase: PbsPhase,
}

impl Layout {
    pub fn new(elements: Vec<Element>, pbs_phase: PbsPhase) -> Result<Self> {
        let layout = Self {
            elements,
            pbs_phase,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn pbs_phase(&self) -> PbsPhase {
        self.pbs_phase
    }

    pub fn with_phase(mut self, pbs_phase: PbsPhase) -> Self {
        self.pbs_phase = pbs_phase;
        self
    }

    pub fn count(&self, kind: ElementKind) -> usize {
        self.elements.iter().filter(|e| e.kind() == kind).count()
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_against(Inventory::default())
    }

    pub fn validate_against(&self, inv: Inventory) -> Result<()> {
        for (kind, limit) in [
            (ElementKind::Qwp45, inv.qwp45),
            (ElementKind::Hwp, inv.hwp),
            (ElementKind::Pbs, inv.pbs),
        ] {
            let n = self.count(kind);
            if n > limit {
                return Err(Error::InvalidLayout(format!(
                    "{n} x {} exceeds the inventory of {limit}",
                    kind.name()
                )));
            }
        }
        for e in &self.elements {
            if let Element::Pbs(a, b) = *e {
                let ok = matches!(
                    (a, b),
                    (Spatial::In2, Spatial::In3) | (Spatial::In3, Spatial::In2)
                );
                if !ok {
                    return Err(Error::InvalidLayout(format!(
                        "PBS must join in2 and in3, got {a} and {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the line format `element KIND target [target2]`.
    pub fn to_text(&self) -> String {
        self.elements.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Parses the line format. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str, pbs_phase: PbsPhase) -> Result<Self> {
        let mut elements = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::LayoutParse {
                line: n + 1,
                message,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] != "element" {
                return Err(err(format!("expected `element`, found `{}`", tokens[0])));
            }
            let target = |i: usize| -> Result<Spatial> {
                let t = tokens
                    .get(i)
                    .ok_or_else(|| err("missing target mode".into()))?;
                Spatial::parse(t).ok_or_else(|| err(format!("unknown mode `{t}`")))
            };
            let (element, arity) = match tokens.get(1).copied() {
                Some("QWP45") => (Element::Qwp45(target(2)?), 3),
                Some("HWP") => (Element::Hwp(target(2)?), 3),
                Some("PBS") => (Element::Pbs(target(2)?, target(3)?), 4),
                Some(k) => return Err(err(format!("unknown element kind `{k}`"))),
                None => return Err(err("missing element kind".into())),
            };
            if tokens.len() != arity {
                return Err(err(format!(
                    "expected {} tokens, found {}",
                    arity,
                    tokens.len()
                )));
            }
            elements.push(element);
        }
        Self::new(elements, pbs_phase)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
