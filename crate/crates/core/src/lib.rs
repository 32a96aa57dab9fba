//! Evaluation harness for multilingual text detoxification: parallel
//! corpora, toxic lexicons, STA/SIM/ChrF/J metrics, baselines, descriptive
//! feature clustering and LLM prompting pipelines.

pub mod baselines;
pub mod clients;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod lang;
pub mod lexicon;
pub mod metrics;
pub mod prompting;
pub mod text;
