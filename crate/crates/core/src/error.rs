use thiserror::Error;

use crate::boost::BoostError;
use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::skills::SkillsError;
use crate::synth::SynthError;
use crate::tune::TuneError;

/// Any pipeline failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Skills(#[from] SkillsError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
