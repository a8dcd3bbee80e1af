use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("configuration must contain at least one miner")]
    EmptyConfiguration,
    #[error("hash rate of miner {index} must be a positive integer")]
    NonPositiveRate { index: usize },
    #[error("total hash rate overflows")]
    TotalOverflow,
    #[error("scaling function is undefined at total hash rate {total}")]
    UndefinedScaling { total: String },
    #[error("invalid scaling function: {0}")]
    InvalidScaling(String),
    #[error("rule table has no entry for configuration {0}")]
    MissingTableEntry(String),
    #[error("rule table entry for {config} is invalid: {reason}")]
    InvalidTableEntry { config: String, reason: String },
    #[error("allocation sums to {total}, which exceeds one block reward")]
    InvalidLottery { total: String },
    #[error("cannot parse rule specification `{0}`")]
    BadSpec(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UtilityError {
    #[error("reward {0} lies outside [0, 1]")]
    RewardOutOfRange(String),
    #[error("lottery probabilities must be nonnegative and sum to one (got {0})")]
    BadProbabilities(String),
    #[error("lottery must have at least one outcome")]
    EmptyLottery,
    #[error("power utility exponent must be positive (got {0})")]
    BadExponent(String),
    #[error("invalid piecewise-linear utility: {0}")]
    BadKnots(String),
    #[error("cannot parse utility specification `{0}`")]
    BadSpec(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error("invalid universe: {0}")]
    BadUniverse(String),
    #[error("invalid deviation: {0}")]
    BadDeviation(String),
    #[error("witness does not reproduce a violation: {0}")]
    NotReproduced(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error("search bounds exceeded: {0}")]
    TooLarge(String),
    #[error("invalid search setup: {0}")]
    BadSetup(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("partial-to-full ratio must be a power of two (got {0})")]
    BadRatio(u64),
    #[error("reference hash rate must be positive")]
    BadRho,
    #[error("epoch count must be at least one")]
    NoEpochs,
}

impl From<RuleError> for SearchError {
    fn from(e: RuleError) -> Self {
        SearchError::Axiom(AxiomError::Rule(e))
    }
}
