//! On-disk scenario format.
//!
//! A scenario file is a complete world recipe: actors, setup, the
//! implementation list, and the transaction steps. `target` is optional
//! and defaults to proxied execution; `{"standalone": {"index": N}}`
//! replays the same world with one implementation deployed alone.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tandem_core::difffuzz::{Scenario, Setup, Step};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetupFile {
    Auction { end_offset: u64 },
    Token { supply: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepFile {
    Bid { actor: usize, value: u64 },
    Finalize { actor: usize },
    AdvanceTime { seconds: u64 },
    Transfer { actor: usize, to: usize, amount: u64 },
    Approve { actor: usize, spender: usize, amount: u64 },
    TransferFrom { actor: usize, from: usize, to: usize, amount: u64 },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFile {
    #[default]
    Proxied,
    Standalone {
        index: usize,
    },
}

fn default_start_time() -> u64 {
    1_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub seed: u64,
    pub actors: usize,
    #[serde(default = "default_start_time")]
    pub start_time: u64,
    pub setup: SetupFile,
    pub implementations: Vec<String>,
    #[serde(default, skip_serializing_if = "is_proxied")]
    pub target: TargetFile,
    pub txs: Vec<StepFile>,
}

fn is_proxied(target: &TargetFile) -> bool {
    *target == TargetFile::Proxied
}

impl ScenarioFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.actors == 0 {
            bail!("scenario needs at least one actor");
        }
        if self.implementations.is_empty() {
            bail!("scenario needs at least one implementation");
        }
        if let TargetFile::Standalone { index } = self.target {
            if index >= self.implementations.len() {
                bail!(
                    "standalone index {index} out of range for {} implementations",
                    self.implementations.len()
                );
            }
        }
        let highest = self
            .txs
            .iter()
            .flat_map(|step| step.actor_references())
            .max();
        if let Some(highest) = highest {
            if highest >= self.actors {
                bail!("step references actor {highest} but only {} exist", self.actors);
            }
        }
        let has_token = self.txs.iter().any(StepFile::is_token_step);
        let has_auction = self.txs.iter().any(StepFile::is_auction_step);
        match self.setup {
            SetupFile::Auction { .. } if has_token => bail!("token steps in an auction scenario"),
            SetupFile::Token { .. } if has_auction => bail!("auction steps in a token scenario"),
            _ => Ok(()),
        }
    }

    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            seed: self.seed,
            actors: self.actors,
            setup: match self.setup {
                SetupFile::Auction { end_offset } => Setup::Auction { end_offset },
                SetupFile::Token { supply } => Setup::Token { supply },
            },
            start_time: self.start_time,
            txs: self.txs.iter().map(StepFile::to_step).collect(),
        }
    }

    pub fn from_scenario(scenario: &Scenario, implementations: &[String]) -> Self {
        ScenarioFile {
            seed: scenario.seed,
            actors: scenario.actors,
            start_time: scenario.start_time,
            setup: match scenario.setup {
                Setup::Auction { end_offset } => SetupFile::Auction { end_offset },
                Setup::Token { supply } => SetupFile::Token { supply },
            },
            implementations: implementations.to_vec(),
            target: TargetFile::Proxied,
            txs: scenario.txs.iter().map(StepFile::from_step).collect(),
        }
    }
}

impl StepFile {
    fn to_step(&self) -> Step {
        match *self {
            StepFile::Bid { actor, value } => Step::Bid { actor, value },
            StepFile::Finalize { actor } => Step::Finalize { actor },
            StepFile::AdvanceTime { seconds } => Step::AdvanceTime { seconds },
            StepFile::Transfer { actor, to, amount } => Step::Transfer { actor, to, amount },
            StepFile::Approve { actor, spender, amount } => {
                Step::Approve { actor, spender, amount }
            }
            StepFile::TransferFrom { actor, from, to, amount } => {
                Step::TransferFrom { actor, from, to, amount }
            }
        }
    }

    fn from_step(step: &Step) -> Self {
        match *step {
            Step::Bid { actor, value } => StepFile::Bid { actor, value },
            Step::Finalize { actor } => StepFile::Finalize { actor },
            Step::AdvanceTime { seconds } => StepFile::AdvanceTime { seconds },
            Step::Transfer { actor, to, amount } => StepFile::Transfer { actor, to, amount },
            Step::Approve { actor, spender, amount } => {
                StepFile::Approve { actor, spender, amount }
            }
            Step::TransferFrom { actor, from, to, amount } => {
                StepFile::TransferFrom { actor, from, to, amount }
            }
        }
    }

    fn actor_references(&self) -> Vec<usize> {
        match *self {
            StepFile::Bid { actor, .. } | StepFile::Finalize { actor } => vec![actor],
            StepFile::AdvanceTime { .. } => Vec::new(),
            StepFile::Transfer { actor, to, .. } => vec![actor, to],
            StepFile::Approve { actor, spender, .. } => vec![actor, spender],
            StepFile::TransferFrom { actor, from, to, .. } => vec![actor, from, to],
        }
    }

    fn is_token_step(&self) -> bool {
        matches!(
            self,
            StepFile::Transfer { .. } | StepFile::Approve { .. } | StepFile::TransferFrom { .. }
        )
    }

    fn is_auction_step(&self) -> bool {
        matches!(self, StepFile::Bid { .. } | StepFile::Finalize { .. })
    }

    /// One-line human description for run logs.
    pub fn describe(&self) -> String {
        match *self {
            StepFile::Bid { actor, value } => format!("bid actor={actor} value={value}"),
            StepFile::Finalize { actor } => format!("finalize actor={actor}"),
            StepFile::AdvanceTime { seconds } => format!("advance_time +{seconds}s"),
            StepFile::Transfer { actor, to, amount } => {
                format!("transfer actor={actor} to={to} amount={amount}")
            }
            StepFile::Approve { actor, spender, amount } => {
                format!("approve actor={actor} spender={spender} amount={amount}")
            }
            StepFile::TransferFrom { actor, from, to, amount } => {
                format!("transfer_from actor={actor} from={from} to={to} amount={amount}")
            }
        }
    }
}
