//! Timed word annotations and frame-aligned conditioning sequences.
//!
//! Captions come from SRT, SBV (YouTube's caption export) or a
//! `word,start_s,end_s` CSV. A conditioning sequence is an `n_frames x 43`
//! matrix; frames covered by an annotation hold that word's scale vector and
//! every other frame is zero.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolism::{self, QuantificationDictionary, RuleTable, SymbolismError, SCALE_DIMS};

pub const DEFAULT_FPS: f64 = 60.0;

const CONDITIONING_MAGIC: &[u8; 4] = b"ONOC";
const CONDITIONING_VERSION: u32 = 1;
const CONDITIONING_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("caption file is not valid UTF-8 (valid up to byte {valid_up_to})")]
    DecodeError { valid_up_to: usize },
    #[error("malformed timestamp on line {line}: {text:?}")]
    MalformedTimestamp { line: usize, text: String },
    #[error("line {line}: cue must satisfy 0 <= start < end (got {start_s} -> {end_s})")]
    InvalidInterval { line: usize, start_s: f64, end_s: f64 },
    #[error("csv captions: {0}")]
    Csv(String),
    #[error("sequence must have at least one frame")]
    NoFrames,
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("window length must be at least 1")]
    EmptyWindow,
    #[error("window start {0} is negative")]
    NegativeStart(i64),
    #[error("conditioning file: {0}")]
    Format(String),
    #[error(transparent)]
    Symbolism(#[from] SymbolismError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedAnnotation {
    pub word: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl TimedAnnotation {
    pub fn new(word: impl Into<String>, start_s: f64, end_s: f64) -> Option<Self> {
        (start_s.is_finite() && end_s.is_finite() && start_s >= 0.0 && start_s < end_s).then(|| TimedAnnotation {
            word: word.into(),
            start_s,
            end_s,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptionFormat {
    Srt,
    Sbv,
    Csv,
}

impl FromStr for CaptionFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "srt" => Ok(CaptionFormat::Srt),
            "sbv" => Ok(CaptionFormat::Sbv),
            "csv" => Ok(CaptionFormat::Csv),
            other => Err(format!("unknown caption format {other:?} (expected srt, sbv or csv)")),
        }
    }
}

impl fmt::Display for CaptionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaptionFormat::Srt => "srt",
            CaptionFormat::Sbv => "sbv",
            CaptionFormat::Csv => "csv",
        })
    }
}

impl CaptionFormat {
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CaptionParse {
    pub annotations: Vec<TimedAnnotation>,
    /// Cues whose text was empty after whitespace removal.
    pub skipped_empty: usize,
}

/// Parses `H:MM:SS[,.]mmm`. Hours may have any number of digits.
fn parse_timestamp(text: &str) -> Option<f64> {
    let text = text.trim();
    let (hms, frac) = match text.find([',', '.']) {
        Some(i) => (&text[..i], &text[i + 1..]),
        None => (text, ""),
    };
    let mut parts = hms.split(':');
    let (h, m, s) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    let digits = |x: &str, min: usize, max: usize| -> Option<u64> {
        (x.len() >= min && x.len() <= max && x.bytes().all(|b| b.is_ascii_digit())).then(|| x.parse().ok())?
    };
    let hours = digits(h, 1, 6)?;
    let minutes = digits(m, 2, 2)?;
    let seconds = digits(s, 2, 2)?;
    if minutes >= 60 || seconds >= 60 {
        return None;
    }
    let millis = if frac.is_empty() {
        0
    } else {
        let v = digits(frac, 1, 3)?;
        v * 10u64.pow(3 - frac.len() as u32)
    };
    let total_ms = ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis;
    Some(total_ms as f64 / 1000.0)
}

fn cue_word(lines: &[&str]) -> String {
    lines.iter().flat_map(|l| l.chars()).filter(|c| !c.is_whitespace()).collect()
}

struct Cue<'a> {
    line: usize,
    start_s: f64,
    end_s: f64,
    text: Vec<&'a str>,
}

fn push_cue(out: &mut CaptionParse, cue: Cue<'_>) -> Result<(), TimelineError> {
    let word = cue_word(&cue.text);
    if word.is_empty() {
        out.skipped_empty += 1;
        return Ok(());
    }
    let ann = TimedAnnotation::new(word, cue.start_s, cue.end_s).ok_or(TimelineError::InvalidInterval {
        line: cue.line,
        start_s: cue.start_s,
        end_s: cue.end_s,
    })?;
    out.annotations.push(ann);
    Ok(())
}

fn blocks(text: &str) -> Vec<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, line));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn parse_srt(text: &str, out: &mut CaptionParse) -> Result<(), TimelineError> {
    for block in blocks(text) {
        let mut rest = &block[..];
        if let Some((_, first)) = rest.first() {
            if !first.contains("-->") && first.trim().bytes().all(|b| b.is_ascii_digit()) && rest.len() > 1 {
                rest = &rest[1..];
            }
        }
        let (line, timing) = rest[0];
        let malformed = || TimelineError::MalformedTimestamp {
            line,
            text: timing.to_string(),
        };
        let (start, end) = timing.split_once("-->").ok_or_else(malformed)?;
        // cue settings may follow the end timestamp
        let end = end.split_whitespace().next().ok_or_else(malformed)?;
        let start_s = parse_timestamp(start).ok_or_else(malformed)?;
        let end_s = parse_timestamp(end).ok_or_else(malformed)?;
        let text = rest[1..].iter().map(|(_, l)| *l).collect();
        push_cue(out, Cue { line, start_s, end_s, text })?;
    }
    Ok(())
}

fn parse_sbv(text: &str, out: &mut CaptionParse) -> Result<(), TimelineError> {
    for block in blocks(text) {
        let (line, timing) = block[0];
        let malformed = || TimelineError::MalformedTimestamp {
            line,
            text: timing.to_string(),
        };
        let (start, end) = timing.trim().split_once(',').ok_or_else(malformed)?;
        let start_s = parse_timestamp(start).ok_or_else(malformed)?;
        let end_s = parse_timestamp(end).ok_or_else(malformed)?;
        let text = block[1..].iter().map(|(_, l)| *l).collect();
        push_cue(out, Cue { line, start_s, end_s, text })?;
    }
    Ok(())
}

fn parse_csv(text: &str, out: &mut CaptionParse) -> Result<(), TimelineError> {
    if text.trim().is_empty() {
        return Ok(());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| TimelineError::Csv(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["word", "start_s", "end_s"] {
        return Err(TimelineError::Csv(format!(
            "header must be word,start_s,end_s (got {})",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    for record in reader.records() {
        let record = record.map_err(|e| TimelineError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let seconds = |i: usize| -> Result<f64, TimelineError> {
            let field = &record[i];
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TimelineError::MalformedTimestamp {
                    line,
                    text: field.to_string(),
                })
        };
        let (start_s, end_s) = (seconds(1)?, seconds(2)?);
        push_cue(
            out,
            Cue {
                line,
                start_s,
                end_s,
                text: vec![&record[0]],
            },
        )?;
    }
    Ok(())
}

/// One annotation per non-empty cue, sorted (stably) by start time.
pub fn parse_captions(content: &[u8], format: CaptionFormat) -> Result<CaptionParse, TimelineError> {
    let text = std::str::from_utf8(content).map_err(|e| TimelineError::DecodeError {
        valid_up_to: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = CaptionParse::default();
    match format {
        CaptionFormat::Srt => parse_srt(text, &mut out)?,
        CaptionFormat::Sbv => parse_sbv(text, &mut out)?,
        CaptionFormat::Csv => parse_csv(text, &mut out)?,
    }
    out.annotations.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    Ok(out)
}

/// Writes annotations as SRT.
pub fn write_srt(annotations: &[TimedAnnotation]) -> String {
    fn stamp(t: f64) -> String {
        let ms = (t * 1000.0).round() as u64;
        format!("{:02}:{:02}:{:02},{:03}", ms / 3_600_000, ms / 60_000 % 60, ms / 1000 % 60, ms % 1000)
    }
    let mut out = String::new();
    for (i, a) in annotations.iter().enumerate() {
        out.push_str(&format!("{}\n{} --> {}\n{}\n\n", i + 1, stamp(a.start_s), stamp(a.end_s), a.word));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningSequence {
    pub fps: f64,
    /// `n_frames x 43`.
    pub frames: Array2<f32>,
}

impl ConditioningSequence {
    pub fn zeros(n_frames: usize, fps: f64) -> Self {
        ConditioningSequence {
            fps,
            frames: Array2::zeros((n_frames, SCALE_DIMS)),
        }
    }

    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }

    /// Rows `[start, start + length)`; rows past the end are zero.
    pub fn window(&self, start_frame: i64, length: usize) -> Result<Array2<f32>, TimelineError> {
        if start_frame < 0 {
            return Err(TimelineError::NegativeStart(start_frame));
        }
        if length == 0 {
            return Err(TimelineError::EmptyWindow);
        }
        let mut out = Array2::zeros((length, SCALE_DIMS));
        let start = (start_frame as usize).min(self.n_frames());
        let end = start.saturating_add(length).min(self.n_frames());
        if end > start {
            out.slice_mut(s![..end - start, ..]).assign(&self.frames.slice(s![start..end, ..]));
        }
        Ok(out)
    }

    /// Little-endian binary: 16-byte header (`ONOC`, version, n_frames, dims)
    /// followed by row-major `f32` values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CONDITIONING_HEADER_LEN + self.frames.len() * 4);
        out.extend_from_slice(CONDITIONING_MAGIC);
        out.extend_from_slice(&CONDITIONING_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_frames() as u32).to_le_bytes());
        out.extend_from_slice(&(SCALE_DIMS as u32).to_le_bytes());
        for v in self.frames.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// The binary header carries no frame rate; `fps` is supplied by the caller.
    pub fn from_bytes(bytes: &[u8], fps: f64) -> Result<Self, TimelineError> {
        let bad = |m: &str| TimelineError::Format(m.to_string());
        if bytes.len() < CONDITIONING_HEADER_LEN {
            return Err(bad("shorter than the 16-byte header"));
        }
        if &bytes[..4] != CONDITIONING_MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        if word(4) != CONDITIONING_VERSION {
            return Err(TimelineError::Format(format!("unsupported version {}", word(4))));
        }
        let (n, dims) = (word(8) as usize, word(12) as usize);
        if dims != SCALE_DIMS {
            return Err(TimelineError::Format(format!("expected {SCALE_DIMS} dims, found {dims}")));
        }
        let body = &bytes[CONDITIONING_HEADER_LEN..];
        if n.checked_mul(dims).and_then(|c| c.checked_mul(4)) != Some(body.len()) {
            return Err(bad("payload length does not match header"));
        }
        let values: Vec<f32> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite value"));
        }
        Ok(ConditioningSequence {
            fps,
            frames: Array2::from_shape_vec((n, dims), values).expect("length checked"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOptions {
    pub fps: f64,
    /// Fill the end frame too (`[start, end]` instead of `[start, end)`).
    pub inclusive_end: bool,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            fps: DEFAULT_FPS,
            inclusive_end: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    /// Indices (in start order) of annotations that extended past the sequence.
    pub clipped: Vec<usize>,
    /// Pairs of annotation indices (in start order) whose frame ranges overlap.
    pub overlaps: Vec<(usize, usize)>,
}

/// Frame index of a time in seconds, rounding ties to even.
pub fn frame_index(seconds: f64, fps: f64) -> i64 {
    (seconds * fps).round_ties_even() as i64
}

pub fn build_sequence(
    annotations: &[TimedAnnotation],
    n_frames: usize,
    options: SequenceOptions,
    dict: &QuantificationDictionary,
    table: &RuleTable,
) -> Result<(ConditioningSequence, BuildReport), TimelineError> {
    if n_frames == 0 {
        return Err(TimelineError::NoFrames);
    }
    if !(options.fps.is_finite() && options.fps > 0.0) {
        return Err(TimelineError::InvalidFps(options.fps));
    }
    let mut ordered: Vec<&TimedAnnotation> = annotations.iter().collect();
    ordered.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));

    let mut seq = ConditioningSequence::zeros(n_frames, options.fps);
    let mut report = BuildReport::default();
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(ordered.len());
    for (i, ann) in ordered.iter().enumerate() {
        let vector = symbolism::lookup_or_quantify(&ann.word, dict, table)?.to_f32();
        let start = frame_index(ann.start_s, options.fps);
        let mut end = frame_index(ann.end_s, options.fps);
        if options.inclusive_end {
            end += 1;
        }
        if start < 0 || end > n_frames as i64 {
            report.clipped.push(i);
        }
        let start = start.clamp(0, n_frames as i64) as usize;
        let end = end.clamp(0, n_frames as i64) as usize;
        for (j, &(s0, e0)) in ranges.iter().enumerate() {
            if start < e0 && s0 < end {
                report.overlaps.push((j, i));
            }
        }
        ranges.push((start, end));
        for mut row in seq.frames.rows_mut().into_iter().skip(start).take(end.saturating_sub(start)) {
            row.assign(&ndarray::ArrayView1::from(&vector[..]));
        }
    }
    Ok((seq, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolism::build_dictionary;

    fn setup() -> (QuantificationDictionary, RuleTable) {
        let table = RuleTable::default();
        (build_dictionary(&["kurukuru", "goro"], &table).unwrap(), table)
    }

    #[test]
    fn srt_single_cue() {
        let srt = b"1\n00:00:02,000 --> 00:00:04,000\nkurukuru\n";
        let parsed = parse_captions(srt, CaptionFormat::Srt).unwrap();
        assert_eq!(parsed.annotations, vec![TimedAnnotation::new("kurukuru", 2.0, 4.0).unwrap()]);
        assert_eq!(parsed.skipped_empty, 0);
    }

    #[test]
    fn srt_variants() {
        let srt = "\u{feff}1\r\n00:00:05,500 --> 00:00:06,250 X1:0\r\nkuru\r\nkuru\r\n\r\n2\r\n00:00:01.000 --> 00:00:02.000\r\n  goro  goro \r\n\r\n3\r\n00:00:07,000 --> 00:00:08,000\r\n   \r\n";
        let parsed = parse_captions(srt.as_bytes(), CaptionFormat::Srt).unwrap();
        let words: Vec<_> = parsed.annotations.iter().map(|a| a.word.as_str()).collect();
        assert_eq!(words, ["gorogoro", "kurukuru"]);
        assert_eq!(parsed.annotations[1].start_s, 5.5);
        assert_eq!(parsed.annotations[1].end_s, 6.25);
        assert_eq!(parsed.skipped_empty, 1);
    }

    #[test]
    fn srt_errors() {
        assert!(parse_captions(b"", CaptionFormat::Srt).unwrap().annotations.is_empty());
        let bad = b"1\n00:00:0X,000 --> 00:00:04,000\nkurukuru\n";
        match parse_captions(bad, CaptionFormat::Srt) {
            Err(TimelineError::MalformedTimestamp { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let reversed = b"1\n00:00:04,000 --> 00:00:02,000\nkurukuru\n";
        assert!(matches!(
            parse_captions(reversed, CaptionFormat::Srt),
            Err(TimelineError::InvalidInterval { line: 2, .. })
        ));
        assert!(matches!(
            parse_captions(&[0xff, 0xfe, b'1'], CaptionFormat::Srt),
            Err(TimelineError::DecodeError { valid_up_to: 0 })
        ));
    }

    #[test]
    fn sbv_cues() {
        let sbv = b"0:00:02.000,0:00:04.000\nkurukuru\n\n0:00:00.500,0:00:01.000\n \n\n0:00:05.000,0:00:06.5\ngoro\n";
        let parsed = parse_captions(sbv, CaptionFormat::Sbv).unwrap();
        assert_eq!(parsed.annotations.len(), 2);
        assert_eq!(parsed.skipped_empty, 1);
        assert_eq!(parsed.annotations[1].end_s, 6.5);
        assert!(matches!(
            parse_captions(b"0:00:02.000;0:00:04.000\nx\n", CaptionFormat::Sbv),
            Err(TimelineError::MalformedTimestamp { line: 1, .. })
        ));
    }

    #[test]
    fn csv_cues() {
        let csv = b"word,start_s,end_s\nkurukuru,2.0,4.0\n,1,2\ngoro, 0.5 ,1.5\n";
        let parsed = parse_captions(csv, CaptionFormat::Csv).unwrap();
        assert_eq!(parsed.annotations[0], TimedAnnotation::new("goro", 0.5, 1.5).unwrap());
        assert_eq!(parsed.skipped_empty, 1);
        assert!(matches!(parse_captions(b"w,s,e\nx,1,2\n", CaptionFormat::Csv), Err(TimelineError::Csv(_))));
        assert!(matches!(
            parse_captions(b"word,start_s,end_s\nx,one,2\n", CaptionFormat::Csv),
            Err(TimelineError::MalformedTimestamp { line: 2, .. })
        ));
    }

    #[test]
    fn timestamp_grammar() {
        assert_eq!(parse_timestamp("01:02:03,004"), Some(3723.004));
        assert_eq!(parse_timestamp("0:00:02.5"), Some(2.5));
        assert_eq!(parse_timestamp("00:61:00,000"), None);
        assert_eq!(parse_timestamp("00:00"), None);
        assert_eq!(parse_timestamp("00:00:00,0000"), None);
    }

    #[test]
    fn kurukuru_fills_120_to_240() {
        let (dict, table) = setup();
        let anns = [TimedAnnotation::new("kurukuru", 2.0, 4.0).unwrap()];
        let (seq, report) = build_sequence(&anns, 600, SequenceOptions::default(), &dict, &table).unwrap();
        let v = dict.get("kurukuru").unwrap().to_f32();
        for (i, row) in seq.frames.rows().into_iter().enumerate() {
            let expect_fill = (120..240).contains(&i);
            for (d, x) in row.iter().enumerate() {
                let want = if expect_fill { v[d] } else { 0.0 };
                assert_eq!(x.to_bits(), want.to_bits(), "frame {i} dim {d}");
            }
        }
        assert_eq!(report, BuildReport::default());

        let inclusive = SequenceOptions {
            inclusive_end: true,
            ..Default::default()
        };
        let (seq, _) = build_sequence(&anns, 600, inclusive, &dict, &table).unwrap();
        assert_eq!(seq.frames.row(240).to_vec(), v.to_vec());
        assert!(seq.frames.row(241).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn empty_annotations_give_zero_matrix() {
        let (dict, table) = setup();
        let (seq, _) = build_sequence(&[], 600, SequenceOptions::default(), &dict, &table).unwrap();
        assert_eq!(seq.frames.dim(), (600, 43));
        assert!(seq.frames.iter().all(|x| *x == 0.0));
        assert!(matches!(
            build_sequence(&[], 0, SequenceOptions::default(), &dict, &table),
            Err(TimelineError::NoFrames)
        ));
    }

    #[test]
    fn clipping_and_overlap() {
        let (dict, table) = setup();
        let anns = [
            TimedAnnotation::new("goro", 9.0, 12.0).unwrap(),
            TimedAnnotation::new("kurukuru", 8.0, 9.5).unwrap(),
        ];
        let (seq, report) = build_sequence(&anns, 600, SequenceOptions::default(), &dict, &table).unwrap();
        let goro = dict.get("goro").unwrap().to_f32();
        let kuru = dict.get("kurukuru").unwrap().to_f32();
        assert_eq!(seq.frames.row(480).to_vec(), kuru.to_vec());
        // goro starts later, so it overwrites 540..570
        assert_eq!(seq.frames.row(545).to_vec(), goro.to_vec());
        assert_eq!(seq.frames.row(599).to_vec(), goro.to_vec());
        assert_eq!(report.clipped, vec![1]);
        assert_eq!(report.overlaps, vec![(0, 1)]);
    }

    #[test]
    fn windows_pad_with_zeros() {
        let (dict, table) = setup();
        let anns = [TimedAnnotation::new("kurukuru", 0.0, 10.0).unwrap()];
        let (seq, _) = build_sequence(&anns, 600, SequenceOptions::default(), &dict, &table).unwrap();
        let w = seq.window(0, 240).unwrap();
        assert_eq!(w, seq.frames.slice(s![..240, ..]));
        let w = seq.window(590, 240).unwrap();
        assert_eq!(w.slice(s![..10, ..]), seq.frames.slice(s![590.., ..]));
        assert!(w.slice(s![10.., ..]).iter().all(|x| *x == 0.0));
        assert!(seq.window(700, 5).unwrap().iter().all(|x| *x == 0.0));
        assert!(matches!(seq.window(-1, 240), Err(TimelineError::NegativeStart(-1))));
        assert!(matches!(seq.window(0, 0), Err(TimelineError::EmptyWindow)));
    }

    #[test]
    fn binary_round_trip() {
        let (dict, table) = setup();
        let anns = [TimedAnnotation::new("kurukuru", 0.1, 0.3).unwrap()];
        let (seq, _) = build_sequence(&anns, 30, SequenceOptions::default(), &dict, &table).unwrap();
        let bytes = seq.to_bytes();
        assert_eq!(&bytes[..4], b"ONOC");
        assert_eq!(bytes.len(), 16 + 30 * 43 * 4);
        assert_eq!(ConditioningSequence::from_bytes(&bytes, 60.0).unwrap(), seq);
        assert!(ConditioningSequence::from_bytes(&bytes[..bytes.len() - 1], 60.0).is_err());
        let mut bad = bytes.clone();
        bad[12] = 42;
        assert!(ConditioningSequence::from_bytes(&bad, 60.0).is_err());
    }

    #[test]
    fn srt_writer_round_trips() {
        let anns = vec![
            TimedAnnotation::new("kurukuru", 2.0, 4.0).unwrap(),
            TimedAnnotation::new("goro", 61.25, 3700.5).unwrap(),
        ];
        let parsed = parse_captions(write_srt(&anns).as_bytes(), CaptionFormat::Srt).unwrap();
        assert_eq!(parsed.annotations, anns);
    }
}
