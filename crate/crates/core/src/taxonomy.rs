//! Flaw taxonomy for benchmark cases.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MajorCategory {
    Syntax,
    Functional,
    Diagram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MinorCategory {
    UndefinedModuleName,
    UnclearPortType,
    SyntaxErrorInExample,
    RegisterInitialization,
    TriggerCondition,
    MissingImplementation,
    Kmap,
    Fsm,
    Other,
}

impl MinorCategory {
    pub const ALL: [MinorCategory; 9] = [
        MinorCategory::UndefinedModuleName,
        MinorCategory::UnclearPortType,
        MinorCategory::SyntaxErrorInExample,
        MinorCategory::RegisterInitialization,
        MinorCategory::TriggerCondition,
        MinorCategory::MissingImplementation,
        MinorCategory::Kmap,
        MinorCategory::Fsm,
        MinorCategory::Other,
    ];

    /// The major category a named minor belongs to; `None` for `Other`,
    /// which may pair with any major.
    pub fn implied_major(self) -> Option<MajorCategory> {
        use MinorCategory::*;
        match self {
            UndefinedModuleName | UnclearPortType | SyntaxErrorInExample => Some(MajorCategory::Syntax),
            RegisterInitialization | TriggerCondition | MissingImplementation => Some(MajorCategory::Functional),
            Kmap | Fsm => Some(MajorCategory::Diagram),
            Other => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        use MinorCategory::*;
        match self {
            UndefinedModuleName => "UNDEFINED_MODULE_NAME",
            UnclearPortType => "UNCLEAR_PORT_TYPE",
            SyntaxErrorInExample => "SYNTAX_ERROR_IN_EXAMPLE",
            RegisterInitialization => "REGISTER_INITIALIZATION",
            TriggerCondition => "TRIGGER_CONDITION",
            MissingImplementation => "MISSING_IMPLEMENTATION",
            Kmap => "KMAP",
            Fsm => "FSM",
            Other => "OTHER",
        }
    }
}

impl MajorCategory {
    pub const ALL: [MajorCategory; 3] = [MajorCategory::Syntax, MajorCategory::Functional, MajorCategory::Diagram];

    pub fn as_str(self) -> &'static str {
        match self {
            MajorCategory::Syntax => "SYNTAX",
            MajorCategory::Functional => "FUNCTIONAL",
            MajorCategory::Diagram => "DIAGRAM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("unknown flaw category `{0}`")]
    Unknown(alloc::string::String),
    #[error("{minor} is not a {major} flaw")]
    Inconsistent { major: &'static str, minor: &'static str },
}

impl FromStr for MinorCategory {
    type Err = TaxonomyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        MinorCategory::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TaxonomyError::Unknown(s.into()))
    }
}

impl FromStr for MajorCategory {
    type Err = TaxonomyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        MajorCategory::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TaxonomyError::Unknown(s.into()))
    }
}

/// A `(major, minor)` pair whose minor is consistent with its major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCategory", into = "RawCategory")]
pub struct FlawCategory {
    major: MajorCategory,
    minor: MinorCategory,
}

#[derive(Serialize, Deserialize)]
struct RawCategory {
    major: MajorCategory,
    minor: MinorCategory,
}

impl TryFrom<RawCategory> for FlawCategory {
    type Error = TaxonomyError;
    fn try_from(r: RawCategory) -> Result<Self, Self::Error> {
        FlawCategory::new(r.major, r.minor)
    }
}

impl From<FlawCategory> for RawCategory {
    fn from(c: FlawCategory) -> Self {
        RawCategory { major: c.major, minor: c.minor }
    }
}

impl FlawCategory {
    pub fn new(major: MajorCategory, minor: MinorCategory) -> Result<Self, TaxonomyError> {
        match minor.implied_major() {
            Some(m) if m != major => Err(TaxonomyError::Inconsistent { major: major.as_str(), minor: minor.as_str() }),
            _ => Ok(FlawCategory { major, minor }),
        }
    }

    /// Category for a named minor; `Other` defaults to the functional major.
    pub fn from_minor(minor: MinorCategory) -> Self {
        FlawCategory { major: minor.implied_major().unwrap_or(MajorCategory::Functional), minor }
    }

    /// Category recorded on verdicts that found no flaw.
    pub fn unclassified() -> Self {
        Self::from_minor(MinorCategory::Other)
    }

    pub fn major(&self) -> MajorCategory {
        self.major
    }

    pub fn minor(&self) -> MinorCategory {
        self.minor
    }
}

impl fmt::Display for FlawCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.major.as_str(), self.minor.as_str())
    }
}

impl FromStr for FlawCategory {
    type Err = TaxonomyError;
    /// Accepts `MINOR` or `MAJOR/MINOR`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((major, minor)) => FlawCategory::new(major.parse()?, minor.parse()?),
            None => Ok(FlawCategory::from_minor(s.parse()?)),
        }
    }
}
