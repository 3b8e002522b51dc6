use std::fmt;
use std::str::FromStr;

use bo_core::acquisition::AcquisitionKind;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const DEFAULT_NM_STARTS: usize = 10;

/// An optimizer run by the harness: BO with one acquisition function, or the
/// Nelder-Mead multistart baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Bo(AcquisitionKind),
    NelderMeadMultistart { starts: usize },
}

impl Method {
    /// File-name-safe label.
    pub fn slug(&self) -> String {
        self.to_string().replace([':', '/', ' '], "-")
    }

    pub fn is_bo(&self) -> bool {
        matches!(self, Method::Bo(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Bo(kind) => kind.fmt(f),
            Method::NelderMeadMultistart { starts } if *starts == DEFAULT_NM_STARTS => f.write_str("NM-multistart"),
            Method::NelderMeadMultistart { starts } => write!(f, "NM-multistart:{starts}"),
        }
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let nm = ["nm-multistart", "nm_multistart", "nm"];
        for prefix in nm {
            if lower == prefix {
                return Ok(Method::NelderMeadMultistart { starts: DEFAULT_NM_STARTS });
            }
            if let Some(rest) = lower.strip_prefix(prefix).and_then(|r| r.strip_prefix([':', '-'])) {
                let starts: usize = rest.parse().map_err(|_| HarnessError::UnknownMethod(s.to_string()))?;
                if starts == 0 {
                    return Err(HarnessError::UnknownMethod(s.to_string()));
                }
                return Ok(Method::NelderMeadMultistart { starts });
            }
        }
        AcquisitionKind::from_str(s).map(Method::Bo).map_err(|_| HarnessError::UnknownMethod(s.to_string()))
    }
}

impl TryFrom<String> for Method {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}
