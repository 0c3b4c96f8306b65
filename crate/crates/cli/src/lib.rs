pub mod commands;
pub mod config;

use std::fmt;

use greedy_predict::GreedyError;

/// Exit status for malformed input or configuration.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for a regressor with zero empirical norm.
pub const EXIT_DEGENERATE: i32 = 3;
/// Exit status when a table cell lost more than 10% of its replications.
pub const EXIT_TABLE_FAILURES: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    /// Maps a library error, naming the column for degenerate regressors.
    pub fn from_lib(e: GreedyError, features: Option<&[String]>) -> Self {
        match e {
            GreedyError::DegenerateColumn(k) => {
                let name = features
                    .and_then(|f| f.get(k))
                    .cloned()
                    .unwrap_or_else(|| format!("#{k}"));
                Self {
                    code: EXIT_DEGENERATE,
                    message: format!("column `{name}` has zero empirical norm"),
                }
            }
            GreedyError::Parse { .. }
            | GreedyError::MissingColumn(_)
            | GreedyError::InvalidConfig(_)
            | GreedyError::NonFinite { .. }
            | GreedyError::EmptyDesign
            | GreedyError::EmptyFold(_)
            | GreedyError::AiccUndefined { .. }
            | GreedyError::DimensionMismatch { .. }
            | GreedyError::Io(_) => Self::input(e.to_string()),
            other => Self {
                code: 1,
                message: other.to_string(),
            },
        }
    }
}

impl From<GreedyError> for CliError {
    fn from(e: GreedyError) -> Self {
        Self::from_lib(e, None)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parses arguments and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = config::command().try_get_matches_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
        let text = e.to_string();
        CliError {
            code,
            message: text.strip_prefix("error: ").unwrap_or(&text).to_string(),
        }
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = config::RunConfig::from_matches(sub)?;
    let data = sub.try_get_one::<String>("data").ok().flatten().map(String::as_str);
    match name {
        "fit" => commands::cmd_fit(data.expect("required"), &cfg),
        "cv" => commands::cmd_cv(data.expect("required"), &cfg),
        "table" => commands::cmd_table(&cfg),
        _ => unreachable!("unknown subcommand"),
    }
}
