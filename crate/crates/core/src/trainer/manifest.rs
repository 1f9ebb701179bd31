//! Dataset manifests.
//!
//! A manifest is a JSON list of entries:
//!
//! ```json
//! [{"clip": "clips/a.json", "captions": "captions/a.srt", "format": "srt", "split": "train"}]
//! ```
//!
//! Relative paths resolve against the manifest's directory. `format` may be
//! omitted when the caption file extension names it; `split` and `id` are
//! optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PairedExample, TrainError};
use crate::motion::load_clip;
use crate::symbolism::{QuantificationDictionary, RuleTable};
use crate::timeline::{build_sequence, parse_captions, CaptionFormat, SequenceOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub clip: PathBuf,
    pub captions: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<CaptionFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl ManifestEntry {
    fn caption_format(&self) -> Result<CaptionFormat, TrainError> {
        self.format
            .or_else(|| CaptionFormat::from_extension(&self.captions))
            .ok_or_else(|| {
                TrainError::Manifest(format!(
                    "{}: no format given and the extension does not name one",
                    self.captions.display()
                ))
            })
    }

    fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            self.clip
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, TrainError> {
        let entries: Vec<ManifestEntry> = serde_json::from_str(text).map_err(|e| TrainError::Manifest(e.to_string()))?;
        Ok(Manifest {
            base_dir: base_dir.into(),
            entries,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrainError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| super::io_error(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("manifest serializes") + "\n"
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Loads every entry (or those whose `split` equals `split`), building each
/// conditioning sequence on the clip's own frame grid.
pub fn load_dataset(
    manifest: &Manifest,
    split: Option<&str>,
    dict: &QuantificationDictionary,
    table: &RuleTable,
) -> Result<Vec<PairedExample>, TrainError> {
    let mut out = Vec::new();
    for entry in &manifest.entries {
        if split.is_some() && entry.split.as_deref() != split {
            continue;
        }
        let clip = load_clip(manifest.resolve(&entry.clip))?;
        let captions_path = manifest.resolve(&entry.captions);
        let bytes = std::fs::read(&captions_path).map_err(|e| super::io_error(&captions_path, e))?;
        let parsed = parse_captions(&bytes, entry.caption_format()?)?;
        let options = SequenceOptions {
            fps: clip.fps(),
            ..SequenceOptions::default()
        };
        let (condition, _) = build_sequence(&parsed.annotations, clip.n_frames(), options, dict, table)?;
        out.push(PairedExample::from_clip(entry.id(), &clip, condition)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_defaults() {
        let m = Manifest::parse(
            r#"[{"clip": "a.json", "captions": "a.srt"}, {"clip": "/x/b.json", "captions": "b.txt", "format": "csv", "split": "val"}]"#,
            "/data",
        )
        .unwrap();
        assert_eq!(m.entries[0].caption_format().unwrap(), CaptionFormat::Srt);
        assert_eq!(m.entries[1].caption_format().unwrap(), CaptionFormat::Csv);
        assert_eq!(m.resolve(&m.entries[0].clip), PathBuf::from("/data/a.json"));
        assert_eq!(m.resolve(&m.entries[1].clip), PathBuf::from("/x/b.json"));
        assert_eq!(m.entries[0].id(), "a");
        assert!(Manifest::parse(r#"[{"clip": "a", "captions": "b", "extra": 1}]"#, ".").is_err());
        let no_format = Manifest::parse(r#"[{"clip": "a", "captions": "b.txt"}]"#, ".").unwrap();
        assert!(no_format.entries[0].caption_format().is_err());
    }
}
