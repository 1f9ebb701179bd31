//! Seeded synthetic dataset of paired clips and captions.
//!
//! Each word clip is 10 s at 60 fps: 2 s at rest, then an oscillation of a
//! fixed set of joints while the word is captioned. The oscillation amplitude
//! grows linearly with the word's value on the fast-slow scale, so faster
//! words move more. One extra clip stays at rest with no captions. The seed
//! picks each joint's axis and phase; the pattern is shared by every clip so
//! amplitude is the only thing the words change.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factmodel::ModelConfig;
use crate::motion::{clip_to_json, matrix_to_rot6, MotionClip, MotionError, Skeleton, IDENTITY_ROT6};
use crate::phonology::{self, PhonologyError};
use crate::symbolism::{build_dictionary, quantify, RuleTable, ScaleRegistry, SymbolismError};
use crate::timeline::{write_srt, TimedAnnotation, DEFAULT_FPS};
use crate::trainer::{Manifest, ManifestEntry, TrainConfig};

/// Index of the fast-slow scale.
pub const DESIGNATED_SCALE: usize = 7;
pub const FIXTURE_WORDS: [&str; 4] = ["pikkipikki", "kurukuru", "yurayura", "nooon"];
pub const STILL_ID: &str = "still";

const FRAMES: usize = 600;
const ONSET_S: f64 = 2.0;
const END_S: f64 = 10.0;
const FREQUENCY_HZ: f64 = 1.25;
const RAMP_S: f64 = 0.25;
const MIN_AMPLITUDE: f64 = 0.05;
const AMPLITUDE_SPAN: f64 = 0.45;
const ROOT: [f64; 3] = [0.0, 0.95, 0.0];
const MOVING_JOINTS: [&str; 10] = [
    "spine1",
    "neck",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Symbolism(#[from] SymbolismError),
    #[error(transparent)]
    Phonology(#[from] PhonologyError),
    #[error("skeleton lacks joint {0:?}")]
    MissingJoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureWord {
    pub word: String,
    /// Value on the designated scale.
    pub value: f64,
    /// Peak joint angle in radians.
    pub amplitude: f64,
    pub clip: String,
    pub captions: String,
}

/// Written as `fixture.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureDescription {
    pub seed: u64,
    pub fps: f64,
    pub frames: usize,
    pub onset_s: f64,
    pub end_s: f64,
    pub frequency_hz: f64,
    pub designated_scale: usize,
    pub designated_scale_label: String,
    pub words: Vec<FixtureWord>,
    pub still_clip: String,
    /// Words from most to least expected motion.
    pub expected_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub description: FixtureDescription,
    pub clips: Vec<(String, MotionClip)>,
    pub captions: Vec<(String, Vec<TimedAnnotation>)>,
}

pub fn amplitude_for(value: f64) -> f64 {
    MIN_AMPLITUDE + AMPLITUDE_SPAN * (value + 2.0) / 4.0
}

/// Desk model, one window per step, 1500 steps.
pub fn fixture_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        model: ModelConfig {
            init_seed: seed,
            ..ModelConfig::desk()
        },
        lr: 1e-3,
        batch_size: 1,
        steps: 1500,
        window_stride: 1,
        seed,
        record_wall_time: false,
        ..TrainConfig::default()
    }
}

struct JointWave {
    joint: usize,
    axis: Unit<Vector3<f64>>,
    phase: f64,
}

fn waves(skeleton: &Skeleton, seed: u64) -> Result<Vec<JointWave>, FixtureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MOVING_JOINTS
        .iter()
        .map(|name| {
            let joint = skeleton.index_of(name).ok_or_else(|| FixtureError::MissingJoint(name.to_string()))?;
            let axis = match rng.random_range(0..3) {
                0 => Vector3::x_axis(),
                1 => Vector3::y_axis(),
                _ => Vector3::z_axis(),
            };
            let phase = rng.random_range(0.0..TAU);
            Ok(JointWave { joint, axis, phase })
        })
        .collect()
}

fn oscillating_clip(skeleton: &Skeleton, waves: &[JointWave], amplitude: f64) -> Result<MotionClip, MotionError> {
    let j = skeleton.len();
    let mut rotations = vec![IDENTITY_ROT6; FRAMES * j];
    for f in 0..FRAMES {
        let tau = f as f64 / DEFAULT_FPS - ONSET_S;
        if tau < 0.0 {
            continue;
        }
        let envelope = (tau / RAMP_S).min(1.0);
        for w in waves {
            // sin(2 pi f tau + phase) - sin(phase) starts from the rest pose
            let angle = amplitude * envelope * ((TAU * FREQUENCY_HZ * tau + w.phase).sin() - w.phase.sin()) * 0.5;
            let m = Rotation3::from_axis_angle(&w.axis, angle);
            rotations[f * j + w.joint] = matrix_to_rot6(m.matrix());
        }
    }
    MotionClip::new(DEFAULT_FPS, skeleton.clone(), vec![ROOT; FRAMES], rotations)
}

pub fn build_fixture(seed: u64, skeleton: &Skeleton, table: &RuleTable) -> Result<Fixture, FixtureError> {
    let waves = waves(skeleton, seed)?;
    let mut words = Vec::new();
    let mut clips = Vec::new();
    let mut captions = Vec::new();
    for word in FIXTURE_WORDS {
        let parsed = phonology::parse_raw(word)?;
        let value = quantify(&parsed, table).get(DESIGNATED_SCALE);
        let amplitude = amplitude_for(value);
        clips.push((word.to_string(), oscillating_clip(skeleton, &waves, amplitude)?));
        captions.push((
            word.to_string(),
            vec![TimedAnnotation::new(word, ONSET_S, END_S).expect("valid interval")],
        ));
        words.push(FixtureWord {
            word: word.to_string(),
            value,
            amplitude,
            clip: format!("clips/{word}.json"),
            captions: format!("captions/{word}.srt"),
        });
    }
    clips.push((STILL_ID.to_string(), MotionClip::rest(skeleton.clone(), FRAMES, DEFAULT_FPS, ROOT)?));
    captions.push((STILL_ID.to_string(), Vec::new()));

    let mut order: Vec<&FixtureWord> = words.iter().collect();
    order.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.word.cmp(&b.word)));
    let expected_order = order.iter().map(|w| w.word.clone()).collect();
    let label = ScaleRegistry::default()
        .pairs()
        .get(DESIGNATED_SCALE)
        .map(|p| p.label())
        .unwrap_or_default();
    Ok(Fixture {
        description: FixtureDescription {
            seed,
            fps: DEFAULT_FPS,
            frames: FRAMES,
            onset_s: ONSET_S,
            end_s: END_S,
            frequency_hz: FREQUENCY_HZ,
            designated_scale: DESIGNATED_SCALE,
            designated_scale_label: label,
            words,
            still_clip: format!("clips/{STILL_ID}.json"),
            expected_order,
        },
        clips,
        captions,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), FixtureError> {
    std::fs::write(path, contents).map_err(|source| FixtureError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `clips/`, `captions/`, `manifest.json`, `dictionary.json`,
/// `train_config.json` and `fixture.json` under `out_dir`.
pub fn write_fixture(out_dir: &Path, seed: u64, skeleton: &Skeleton, table: &RuleTable) -> Result<Fixture, FixtureError> {
    let fixture = build_fixture(seed, skeleton, table)?;
    for sub in ["clips", "captions"] {
        let dir = out_dir.join(sub);
        std::fs::create_dir_all(&dir).map_err(|source| FixtureError::Io { path: dir, source })?;
    }
    let mut entries = Vec::new();
    for ((id, clip), (_, annotations)) in fixture.clips.iter().zip(&fixture.captions) {
        let clip_rel = format!("clips/{id}.json");
        let captions_rel = format!("captions/{id}.srt");
        write(&out_dir.join(&clip_rel), &clip_to_json(clip))?;
        write(&out_dir.join(&captions_rel), &write_srt(annotations))?;
        entries.push(ManifestEntry {
            clip: clip_rel.into(),
            captions: captions_rel.into(),
            format: None,
            split: Some("train".into()),
            id: Some(id.clone()),
        });
    }
    let manifest = Manifest {
        base_dir: out_dir.to_path_buf(),
        entries,
    };
    write(&out_dir.join("manifest.json"), &manifest.to_json())?;
    let dict = build_dictionary(&FIXTURE_WORDS, table)?;
    write(&out_dir.join("dictionary.json"), &dict.to_json())?;
    let cfg = serde_json::to_string_pretty(&fixture_train_config(seed)).expect("config serializes") + "\n";
    write(&out_dir.join("train_config.json"), &cfg)?;
    let desc = serde_json::to_string_pretty(&fixture.description).expect("description serializes") + "\n";
    write(&out_dir.join("fixture.json"), &desc)?;
    Ok(fixture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalsuite::kinetic_features;

    fn l1(clip: &MotionClip) -> f64 {
        kinetic_features(clip).unwrap().iter().sum()
    }

    #[test]
    fn words_spread_on_the_designated_scale() {
        let f = build_fixture(7, &Skeleton::default_body(), &RuleTable::default()).unwrap();
        let values: Vec<f64> = f.description.words.iter().map(|w| w.value).collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min >= 2.0, "{values:?}");
        assert_eq!(f.description.designated_scale_label, "fast-slow");
        assert_eq!(f.description.expected_order.first().map(String::as_str), Some("pikkipikki"));
        assert_eq!(f.description.expected_order.last().map(String::as_str), Some("nooon"));
    }

    #[test]
    fn clip_speed_follows_the_expected_order() {
        let f = build_fixture(3, &Skeleton::default_body(), &RuleTable::default()).unwrap();
        let speed = |id: &str| l1(&f.clips.iter().find(|(i, _)| i == id).unwrap().1);
        let ordered: Vec<f64> = f.description.expected_order.iter().map(|w| speed(w)).collect();
        assert!(ordered.windows(2).all(|p| p[0] > p[1]), "{ordered:?}");
        assert_eq!(speed(STILL_ID), 0.0);
        let first = &f.clips[0].1;
        for frame in [0, 119, 120] {
            for j in 0..first.skeleton().len() {
                assert_eq!(first.rotation(frame, j), &IDENTITY_ROT6);
            }
        }
    }

    #[test]
    fn written_tree_is_deterministic() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let s = Skeleton::default_body();
        let t = RuleTable::default();
        write_fixture(a.path(), 7, &s, &t).unwrap();
        write_fixture(b.path(), 7, &s, &t).unwrap();
        for rel in ["manifest.json", "fixture.json", "clips/kurukuru.json", "captions/nooon.srt", "train_config.json"] {
            assert_eq!(std::fs::read(a.path().join(rel)).unwrap(), std::fs::read(b.path().join(rel)).unwrap(), "{rel}");
        }
        let m = Manifest::load(a.path().join("manifest.json")).unwrap();
        let ds = crate::trainer::load_dataset(&m, Some("train"), &crate::symbolism::QuantificationDictionary::empty(t.version.clone()), &t).unwrap();
        assert_eq!(ds.len(), 5);
        assert!(ds[4].condition.frames.iter().all(|&v| v == 0.0));
        assert!(ds[0].condition.frames.row(119).iter().all(|&v| v == 0.0));
        assert!(ds[0].condition.frames[[120, DESIGNATED_SCALE]] > 1.0);
    }
}
