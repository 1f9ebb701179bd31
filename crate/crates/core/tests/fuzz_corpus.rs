//! Replays the checked-in fuzz corpus, plus truncations and byte flips of
//! every seed, through the same checks the fuzz targets run.

use std::path::{Path, PathBuf};

use onoma::factmodel::{read_checkpoint, write_checkpoint};
use onoma::motion::{clip_from_json, clip_to_json, parse_bvh};
use onoma::phonology::{normalize, parse_word, render_morae};
use onoma::symbolism::{QuantificationDictionary, RuleTable};
use onoma::timeline::{parse_captions, CaptionFormat, ConditioningSequence};

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

/// The seed itself, up to 64 prefixes, and up to 64 single-byte flips.
fn mutants(seed: &[u8]) -> Vec<Vec<u8>> {
    let mut out = vec![seed.to_vec()];
    let step = (seed.len() / 64).max(1);
    for cut in (0..seed.len()).step_by(step) {
        out.push(seed[..cut].to_vec());
    }
    for (k, i) in (0..seed.len()).step_by(step).enumerate() {
        let mut m = seed.to_vec();
        m[i] ^= 1 << (k % 8);
        out.push(m);
    }
    out
}

fn replay(target: &str, check: impl Fn(&[u8]), must_accept: impl Fn(&[u8]) -> bool) {
    for (path, seed) in corpus(target) {
        assert!(must_accept(&seed), "seed {} is rejected by its own decoder", path.display());
        for m in mutants(&seed) {
            check(&m);
        }
    }
}

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

#[test]
fn parse_word_corpus() {
    replay(
        "parse_word",
        |data| {
            let Some(t) = text(data) else { return };
            let Ok(n) = normalize(t) else { return };
            assert_eq!(normalize(&n).as_deref(), Ok(n.as_str()));
            if let Ok(w) = parse_word(&n) {
                assert_eq!(parse_word(&render_morae(&w.morae)).unwrap().morae, w.morae);
            }
        },
        |data| text(data).and_then(|t| normalize(t).ok()).is_some_and(|n| parse_word(&n).is_ok()),
    );
}

#[test]
fn captions_corpus() {
    replay(
        "captions",
        |data| {
            for format in [CaptionFormat::Srt, CaptionFormat::Sbv, CaptionFormat::Csv] {
                if let Ok(p) = parse_captions(data, format) {
                    assert!(p.annotations.iter().all(|a| a.start_s >= 0.0 && a.start_s < a.end_s));
                }
            }
        },
        |data| [CaptionFormat::Srt, CaptionFormat::Sbv, CaptionFormat::Csv].iter().any(|f| parse_captions(data, *f).is_ok()),
    );
}

#[test]
fn clip_json_corpus() {
    replay(
        "clip_json",
        |data| {
            let Some(t) = text(data) else { return };
            if let Ok(c) = clip_from_json(t) {
                assert_eq!(clip_from_json(&clip_to_json(&c)).unwrap(), c);
            }
        },
        |data| text(data).is_some_and(|t| clip_from_json(t).is_ok()),
    );
}

#[test]
fn bvh_corpus() {
    replay(
        "bvh",
        |data| {
            let Some(t) = text(data) else { return };
            if let Ok(doc) = parse_bvh(t) {
                let _ = doc.to_clip();
            }
        },
        |data| text(data).and_then(|t| parse_bvh(t).ok()).is_some_and(|d| d.to_clip().is_ok()),
    );
}

#[test]
fn checkpoint_corpus() {
    replay(
        "checkpoint",
        |data| {
            if let Ok(m) = read_checkpoint(data) {
                let bytes = write_checkpoint(&m);
                assert_eq!(write_checkpoint(&read_checkpoint(&bytes).unwrap()), bytes);
            }
        },
        |data| read_checkpoint(data).is_ok(),
    );
}

#[test]
fn conditioning_corpus() {
    replay(
        "conditioning",
        |data| {
            if let Ok(s) = ConditioningSequence::from_bytes(data, 60.0) {
                let bytes = s.to_bytes();
                assert_eq!(ConditioningSequence::from_bytes(&bytes, 60.0).unwrap().to_bytes(), bytes);
            }
        },
        |data| ConditioningSequence::from_bytes(data, 60.0).is_ok(),
    );
}

#[test]
fn dictionary_corpus() {
    replay(
        "dictionary",
        |data| {
            let Some(t) = text(data) else { return };
            if let Ok(d) = QuantificationDictionary::from_json(t) {
                assert_eq!(QuantificationDictionary::from_json(&d.to_json()).unwrap(), d);
            }
        },
        |data| text(data).is_some_and(|t| QuantificationDictionary::from_json(t).is_ok()),
    );
}

#[test]
fn rule_table_corpus() {
    replay(
        "rule_table",
        |data| {
            let Some(t) = text(data) else { return };
            if let Ok(r) = RuleTable::from_json(t) {
                assert_eq!(RuleTable::from_json(&r.to_json()).unwrap(), r);
            }
        },
        |data| text(data).is_some_and(|t| RuleTable::from_json(t).is_ok()),
    );
}
