use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Binary diagnosis; melanoma is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Benign,
    Melanoma,
}

impl Label {
    /// `+1` for melanoma, `-1` for benign.
    pub fn sign(self) -> i8 {
        match self {
            Label::Melanoma => 1,
            Label::Benign => -1,
        }
    }

    /// Decision value to class; exactly zero is melanoma.
    pub fn from_decision(f: f64) -> Self {
        if f >= 0.0 {
            Label::Melanoma
        } else {
            Label::Benign
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Melanoma
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Melanoma => "melanoma",
            Label::Benign => "benign",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Accepts the two class names plus the nevus subtypes, which are benign.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "melanoma" | "+1" | "1" => Ok(Label::Melanoma),
            "benign" | "common_nevus" | "atypical_nevus" | "-1" => Ok(Label::Benign),
            other => Err(Error::InvalidParameter(format!("unknown label `{other}`"))),
        }
    }
}
