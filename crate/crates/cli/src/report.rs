use std::fmt;

use selfsim::{Budgets, Error};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Answer of one command. `holds == false` marks a check that came out
/// negative; `undecided` an answer the budget could not settle.
pub struct Report {
    pub text: String,
    pub value: Value,
    pub holds: bool,
    pub undecided: bool,
}

impl Report {
    pub fn new(text: impl Into<String>, value: Value) -> Self {
        Report {
            text: text.into(),
            value,
            holds: true,
            undecided: false,
        }
    }

    pub fn check(holds: bool, text: impl Into<String>, value: Value) -> Self {
        Report {
            holds,
            ..Report::new(text, value)
        }
    }

    pub fn undecided(text: impl Into<String>, value: Value) -> Self {
        Report {
            undecided: true,
            ..Report::new(text, value)
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.undecided {
            EXIT_UNDECIDED
        } else if self.holds {
            EXIT_OK
        } else {
            EXIT_FALSE
        }
    }

    fn status(&self) -> &'static str {
        if self.undecided {
            "undecided"
        } else if self.holds {
            "ok"
        } else {
            "false"
        }
    }
}

/// Run metadata stamped on every JSON report.
pub struct Envelope<'a> {
    pub command: &'a str,
    pub preset: &'a str,
    pub fingerprint: &'a str,
    pub seed: u64,
    pub budgets: &'a Budgets,
    pub verification_level: usize,
}

pub fn render(format: Format, env: &Envelope<'_>, rep: &Report) -> String {
    match format {
        Format::Text => rep.text.clone(),
        Format::Json => {
            let doc = json!({
                "command": env.command,
                "preset": env.preset,
                "fingerprint": env.fingerprint,
                "seed": env.seed,
                "budgets": env.budgets,
                "verification_level": env.verification_level,
                "status": rep.status(),
                "result": rep.value,
            });
            serde_json::to_string_pretty(&doc).expect("reports serialize")
        }
    }
}

/// A failure that ends the command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Undecided { .. } => EXIT_UNDECIDED,
            Error::StageFailure { .. } | Error::NotInLevelStabilizer { .. } | Error::Inconsistency(_) => EXIT_FALSE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("malformed JSON: {e}"))
    }
}
