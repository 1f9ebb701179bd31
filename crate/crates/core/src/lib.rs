//! Dance motion generation conditioned on sound-symbolic words.
//!
//! The pipeline runs left to right through the modules:
//! [`phonology`] parses a romanized word into morae, [`symbolism`] maps it onto
//! 43 adjective-pair scales, [`timeline`] lays those vectors out on a 60 fps
//! frame grid from caption files, and [`factmodel`] (built on [`diffcore`])
//! predicts motion frames that [`generator`] rolls out autoregressively.
//! [`motion`] holds the clip representation and I/O, [`trainer`] fits the
//! model, and [`evalsuite`] scores generated motion.

pub mod phonology;
pub mod symbolism;
pub mod timeline;
pub mod motion;
pub mod diffcore;
pub mod factmodel;
pub mod trainer;
pub mod generator;
pub mod evalsuite;
pub mod fixtures;
pub mod resources;
