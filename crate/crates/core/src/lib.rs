//! Corpus analysis toolkit for crowd-annotated song lyrics: ingestion, text
//! metrics, contribution dynamics, utility fitting, simulation and expertise
//! prediction.

pub mod corpus;
pub mod dynamics;
pub mod expertise;
pub mod html;
pub mod seeds;
pub mod simulate;
pub mod stats;
pub mod synthetic;
pub mod textmetrics;
pub mod utility;
