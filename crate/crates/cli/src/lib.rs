//! The `hems` command line.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration or usage error,
//! 3 unparsable input data, 4 infeasible problem, 5 generation backend
//! failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod providers;

use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use hems_agent::AgentType;
use hems_simuser::DifficultyMode;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hems",
    version,
    about = "Household energy scheduling with a conversational front end"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, env = "HEMS_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize heating and EV charging for a household.
    Solve(SolveArgs),
    /// Collect the household parameters in a dialogue, then optimize.
    Chat(ChatArgs),
    /// Run the dialogue against simulated users and write accuracy reports.
    Evaluate(EvaluateArgs),
    /// Serve the dialogue over HTTP.
    Serve(ServeArgs),
    /// Write a synthetic scenario CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Household parameters (TOML, or JSON with a .json extension).
    /// Defaults to the demo household.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Scenario CSV. Synthesized from the tariff when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Seed of the synthetic scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the optimized schedule CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the naive schedule CSV here.
    #[arg(long)]
    pub naive_out: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ChatArgs {
    /// Answer with a simulated user instead of reading stdin.
    #[arg(long, value_name = "MODE")]
    pub scripted_user: Option<DifficultyMode>,
    /// Draw the simulated user's household from this seed instead of the demo household.
    #[arg(long)]
    pub persona_seed: Option<u64>,
    #[arg(long)]
    pub agent_type: Option<AgentType>,
    /// Write the agent traces as JSON lines.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// Write the optimized schedule CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stop after the parameters are collected.
    #[arg(long)]
    pub no_solve: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Use the rule-based agent, canned users and the toy embedding,
    /// whatever the configuration says.
    #[arg(long)]
    pub scripted: bool,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub agent_types: Option<Vec<AgentType>>,
    #[arg(long, value_delimiter = ',')]
    pub difficulties: Option<Vec<DifficultyMode>>,
    /// Compare raw stored strings instead of canonical values.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Personas for the answer-precision table; 0 skips it.
    #[arg(long)]
    pub precision_trials: Option<u32>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bind: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 7)]
    pub days: u32,
    #[arg(long, default_value = "2024-09-16")]
    pub start: NaiveDate,
    #[arg(long, default_value = "London")]
    pub city: String,
    /// Step length in hours; defaults to the configured one.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli.config.as_deref())?;
    match cli.command {
        Command::Solve(a) => commands::solve(&config, &a, out),
        Command::Chat(a) => commands::chat(&config, &a, out),
        Command::Evaluate(a) => commands::evaluate(&config, &a, out),
        Command::Serve(a) => commands::serve(&config, &a, out),
        Command::Generate(a) => commands::generate(&config, &a, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lists_split_on_commas() {
        let cli = Cli::try_parse_from([
            "hems",
            "evaluate",
            "--agent-types",
            "act,react+example",
            "--difficulties",
            "easy,h",
        ])
        .unwrap();
        let Command::Evaluate(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(
            a.agent_types.unwrap(),
            [AgentType::Act, AgentType::ReactWithExample]
        );
        assert_eq!(
            a.difficulties.unwrap(),
            [DifficultyMode::Easy, DifficultyMode::Hard]
        );
    }

    #[test]
    fn bad_flag_values_are_usage_errors() {
        let err =
            Cli::try_parse_from(["hems", "evaluate", "--difficulties", "brutal"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
