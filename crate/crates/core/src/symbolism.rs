//! Sound-symbolic quantification onto 43 adjective-pair scales.
//!
//! A word's vector is an additive function of its phonology:
//!
//! ```text
//! value[s] = clamp(base[s]
//!                  + sum_i position[bucket(i)][s] * (consonant[c_i][s] + vowel[v_i][s]
//!                                                  + voiced[s]*[voiced_i] + palatalized[s]*[palatalized_i])
//!                  + sum over long morae of word_form.long_vowel[s]
//!                  + sum over active word forms of word_form[f][s])
//! ```
//!
//! Weights live in a version-stamped JSON rule table; zero is the neutral
//! value, which is also what unannotated frames carry downstream.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::phonology::{self, Consonant, PhonWord, PhonologyError, Vowel};

pub const SCALE_DIMS: usize = 43;
pub const SCALE_MIN: f64 = -2.0;
pub const SCALE_MAX: f64 = 2.0;

const DEFAULT_SCALES: &str = include_str!("../data/scales.tsv");
const DEFAULT_RULES: &str = include_str!("../data/rules.json");

/// The four pairs whose position is fixed, as (positive, negative) poles.
const FIXED_PAIRS: [(&str, &str); 4] = [("light", "dark"), ("warm", "cold"), ("sharp", "mild"), ("heavy", "light")];

#[derive(Debug, Error)]
pub enum SymbolismError {
    #[error("scale registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error("rule table: {0}")]
    RuleTable(String),
    #[error("dictionary: {0}")]
    Dictionary(String),
    #[error("word {word:?}: {source}")]
    Word {
        word: String,
        #[source]
        source: PhonologyError,
    },
    #[error("dictionary was built with rule table {dictionary:?} but {table:?} is loaded")]
    VersionMismatch { dictionary: String, table: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjectivePair {
    pub index: usize,
    pub negative: String,
    pub positive: String,
}

impl AdjectivePair {
    pub fn label(&self) -> String {
        format!("{}-{}", self.positive, self.negative)
    }
}

#[derive(Debug, Clone)]
pub struct ScaleRegistry {
    version: String,
    pairs: Vec<AdjectivePair>,
}

impl Default for ScaleRegistry {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_SCALES).expect("bundled scale registry is valid")
    }
}

impl ScaleRegistry {
    pub fn from_tsv(text: &str) -> Result<Self, SymbolismError> {
        let mut version = String::from("unversioned");
        let mut pairs = Vec::with_capacity(SCALE_DIMS);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if let Some(v) = raw.strip_prefix("# version\t") {
                version = v.trim().to_string();
                continue;
            }
            if raw.starts_with('#') || raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| SymbolismError::Registry { line, message };
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(err("expected index, positive, negative".into()));
            }
            let index: usize = fields[0].parse().map_err(|_| err(format!("bad index {:?}", fields[0])))?;
            if index != pairs.len() {
                return Err(err(format!("index {index} out of order, expected {}", pairs.len())));
            }
            if fields[1].is_empty() || fields[2].is_empty() {
                return Err(err("empty pole label".into()));
            }
            pairs.push(AdjectivePair {
                index,
                positive: fields[1].to_string(),
                negative: fields[2].to_string(),
            });
        }
        if pairs.len() != SCALE_DIMS {
            return Err(SymbolismError::Registry {
                line: 0,
                message: format!("expected {SCALE_DIMS} pairs, found {}", pairs.len()),
            });
        }
        for (i, (pos, neg)) in FIXED_PAIRS.iter().enumerate() {
            if pairs[i].positive != *pos || pairs[i].negative != *neg {
                return Err(SymbolismError::Registry {
                    line: 0,
                    message: format!("index {i} must be {pos}-{neg}"),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in &pairs {
            if !seen.insert(p.label()) {
                return Err(SymbolismError::Registry {
                    line: 0,
                    message: format!("duplicate pair {}", p.label()),
                });
            }
        }
        Ok(ScaleRegistry { version, pairs })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn pairs(&self) -> &[AdjectivePair] {
        &self.pairs
    }

    /// Finds a scale by either pole or by its `positive-negative` label.
    pub fn find(&self, name: &str) -> Option<&AdjectivePair> {
        self.pairs
            .iter()
            .find(|p| p.label() == name)
            .or_else(|| self.pairs.iter().find(|p| p.positive == name))
            .or_else(|| self.pairs.iter().find(|p| p.negative == name))
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct AdjectiveScaleVector([f64; SCALE_DIMS]);

impl AdjectiveScaleVector {
    pub const ZERO: AdjectiveScaleVector = AdjectiveScaleVector([0.0; SCALE_DIMS]);

    pub fn new(values: [f64; SCALE_DIMS]) -> Option<Self> {
        values
            .iter()
            .all(|v| v.is_finite() && (SCALE_MIN..=SCALE_MAX).contains(v))
            .then_some(AdjectiveScaleVector(values))
    }

    pub fn from_slice(values: &[f64]) -> Option<Self> {
        let arr: [f64; SCALE_DIMS] = values.try_into().ok()?;
        Self::new(arr)
    }

    pub fn values(&self) -> &[f64; SCALE_DIMS] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn to_f32(&self) -> [f32; SCALE_DIMS] {
        self.0.map(|v| v as f32)
    }
}

impl fmt::Debug for AdjectiveScaleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Serialize for AdjectiveScaleVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AdjectiveScaleVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        if values.len() != SCALE_DIMS {
            return Err(serde::de::Error::invalid_length(values.len(), &"43 scale values"));
        }
        AdjectiveScaleVector::from_slice(&values)
            .ok_or_else(|| serde::de::Error::custom("scale values must be finite and within [-2, 2]"))
    }
}

type Weights = [f64; SCALE_DIMS];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionBucket {
    Initial,
    Medial,
    Final,
}

impl PositionBucket {
    pub const ALL: [PositionBucket; 3] = [PositionBucket::Initial, PositionBucket::Medial, PositionBucket::Final];

    pub fn of(index: usize, len: usize) -> Self {
        if index == 0 {
            PositionBucket::Initial
        } else if index + 1 == len {
            PositionBucket::Final
        } else {
            PositionBucket::Medial
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            PositionBucket::Initial => "initial",
            PositionBucket::Medial => "medial",
            PositionBucket::Final => "final",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordForm {
    Reduplicated,
    FinalGemination,
    FinalNasal,
    FinalRi,
    /// Applied once per lengthened mora.
    LongVowel,
}

impl WordForm {
    pub const ALL: [WordForm; 5] = [
        WordForm::Reduplicated,
        WordForm::FinalGemination,
        WordForm::FinalNasal,
        WordForm::FinalRi,
        WordForm::LongVowel,
    ];

    pub fn key(self) -> &'static str {
        match self {
            WordForm::Reduplicated => "reduplicated",
            WordForm::FinalGemination => "final_gemination",
            WordForm::FinalNasal => "final_nasal",
            WordForm::FinalRi => "final_ri",
            WordForm::LongVowel => "long_vowel",
        }
    }

    fn count(self, word: &PhonWord) -> usize {
        match self {
            WordForm::Reduplicated => word.reduplicated as usize,
            WordForm::FinalGemination => word.final_gemination as usize,
            WordForm::FinalNasal => word.final_nasal as usize,
            WordForm::FinalRi => word.final_ri as usize,
            WordForm::LongVowel => word.morae.iter().filter(|m| m.long_vowel).count(),
        }
    }
}

/// Additive phoneme-feature weights for every scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    pub version: String,
    pub clamp: (f64, f64),
    pub base: Weights,
    pub consonant: [Weights; 17],
    pub vowel: [Weights; 6],
    pub voiced: Weights,
    pub palatalized: Weights,
    pub position: [Weights; 3],
    pub word_form: [Weights; 5],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRuleTable {
    version: String,
    dims: usize,
    clamp: [f64; 2],
    base: Vec<f64>,
    consonant: HashMap<String, Vec<f64>>,
    vowel: HashMap<String, Vec<f64>>,
    voiced: Vec<f64>,
    palatalized: Vec<f64>,
    position: HashMap<String, Vec<f64>>,
    word_form: HashMap<String, Vec<f64>>,
}

fn weights(values: &[f64], what: &str) -> Result<Weights, SymbolismError> {
    let arr: Weights = values.try_into().map_err(|_| {
        SymbolismError::RuleTable(format!("{what}: expected {SCALE_DIMS} weights, found {}", values.len()))
    })?;
    if let Some(bad) = arr.iter().position(|v| !v.is_finite()) {
        return Err(SymbolismError::RuleTable(format!("{what}[{bad}] is not finite")));
    }
    Ok(arr)
}

fn keyed<const N: usize>(
    map: &HashMap<String, Vec<f64>>,
    keys: [&str; N],
    section: &str,
) -> Result<[Weights; N], SymbolismError> {
    if let Some(extra) = map.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(SymbolismError::RuleTable(format!("{section}: unknown key {extra:?}")));
    }
    let mut out = [[0.0; SCALE_DIMS]; N];
    for (slot, key) in out.iter_mut().zip(keys) {
        let values = map
            .get(key)
            .ok_or_else(|| SymbolismError::RuleTable(format!("{section}: missing key {key:?}")))?;
        *slot = weights(values, &format!("{section}.{key}"))?;
    }
    Ok(out)
}

impl Default for RuleTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled rule table is valid")
    }
}

impl RuleTable {
    /// Every weight zero; quantifies every word to the zero vector.
    pub fn zeros(version: impl Into<String>) -> Self {
        RuleTable {
            version: version.into(),
            clamp: (SCALE_MIN, SCALE_MAX),
            base: [0.0; SCALE_DIMS],
            consonant: [[0.0; SCALE_DIMS]; 17],
            vowel: [[0.0; SCALE_DIMS]; 6],
            voiced: [0.0; SCALE_DIMS],
            palatalized: [0.0; SCALE_DIMS],
            position: [[0.0; SCALE_DIMS]; 3],
            word_form: [[0.0; SCALE_DIMS]; 5],
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SymbolismError> {
        let raw: RawRuleTable = serde_json::from_str(text).map_err(|e| SymbolismError::RuleTable(e.to_string()))?;
        if raw.dims != SCALE_DIMS {
            return Err(SymbolismError::RuleTable(format!("dims must be {SCALE_DIMS}, got {}", raw.dims)));
        }
        let [lo, hi] = raw.clamp;
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= SCALE_MIN && hi <= SCALE_MAX) {
            return Err(SymbolismError::RuleTable(format!(
                "clamp must satisfy {SCALE_MIN} <= lo < hi <= {SCALE_MAX}"
            )));
        }
        if raw.version.trim().is_empty() {
            return Err(SymbolismError::RuleTable("empty version".into()));
        }
        Ok(RuleTable {
            version: raw.version,
            clamp: (lo, hi),
            base: weights(&raw.base, "base")?,
            consonant: keyed(&raw.consonant, Consonant::ALL.map(Consonant::key), "consonant")?,
            vowel: keyed(&raw.vowel, Vowel::ALL.map(Vowel::key), "vowel")?,
            voiced: weights(&raw.voiced, "voiced")?,
            palatalized: weights(&raw.palatalized, "palatalized")?,
            position: keyed(&raw.position, PositionBucket::ALL.map(PositionBucket::key), "position")?,
            word_form: keyed(&raw.word_form, WordForm::ALL.map(WordForm::key), "word_form")?,
        })
    }

    pub fn to_json(&self) -> String {
        let section = |keys: &[&str], rows: &[Weights]| -> serde_json::Value {
            keys.iter()
                .zip(rows)
                .map(|(k, w)| (k.to_string(), serde_json::json!(w.as_slice())))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let value = serde_json::json!({
            "version": self.version,
            "dims": SCALE_DIMS,
            "clamp": [self.clamp.0, self.clamp.1],
            "base": self.base.as_slice(),
            "consonant": section(&Consonant::ALL.map(Consonant::key), &self.consonant),
            "vowel": section(&Vowel::ALL.map(Vowel::key), &self.vowel),
            "voiced": self.voiced.as_slice(),
            "palatalized": self.palatalized.as_slice(),
            "position": section(&PositionBucket::ALL.map(PositionBucket::key), &self.position),
            "word_form": section(&WordForm::ALL.map(WordForm::key), &self.word_form),
        });
        serde_json::to_string_pretty(&value).expect("rule table serializes")
    }
}

/// Unclamped components of a quantification.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub base: Weights,
    pub mora_sum: Weights,
    pub form_sum: Weights,
}

impl Breakdown {
    pub fn total(&self) -> Weights {
        std::array::from_fn(|s| self.base[s] + self.mora_sum[s] + self.form_sum[s])
    }
}

pub fn quantify_breakdown(word: &PhonWord, table: &RuleTable) -> Breakdown {
    let mut mora_sum = [0.0; SCALE_DIMS];
    let n = word.morae.len();
    for (i, m) in word.morae.iter().enumerate() {
        let pos = &table.position[PositionBucket::of(i, n) as usize];
        let cons = &table.consonant[m.consonant.index()];
        let vowel = &table.vowel[m.vowel.index()];
        for s in 0..SCALE_DIMS {
            let mut c = cons[s] + vowel[s];
            if m.voiced {
                c += table.voiced[s];
            }
            if m.palatalized {
                c += table.palatalized[s];
            }
            mora_sum[s] += pos[s] * c;
        }
    }
    let mut form_sum = [0.0; SCALE_DIMS];
    for form in WordForm::ALL {
        let k = form.count(word) as f64;
        if k > 0.0 {
            let w = &table.word_form[form as usize];
            for s in 0..SCALE_DIMS {
                form_sum[s] += k * w[s];
            }
        }
    }
    Breakdown {
        base: table.base,
        mora_sum,
        form_sum,
    }
}

pub fn quantify(word: &PhonWord, table: &RuleTable) -> AdjectiveScaleVector {
    let (lo, hi) = table.clamp;
    AdjectiveScaleVector(quantify_breakdown(word, table).total().map(|v| v.clamp(lo, hi)))
}

/// Precomputed word vectors, keyed by normalized spelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantificationDictionary {
    pub table_version: String,
    pub entries: BTreeMap<String, AdjectiveScaleVector>,
}

impl QuantificationDictionary {
    pub fn empty(table_version: impl Into<String>) -> Self {
        QuantificationDictionary {
            table_version: table_version.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, normalized: &str) -> Option<&AdjectiveScaleVector> {
        self.entries.get(normalized)
    }

    /// Canonical serialization: sorted keys, shortest round-trip numbers.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dictionary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SymbolismError> {
        let dict: QuantificationDictionary =
            serde_json::from_str(text).map_err(|e| SymbolismError::Dictionary(e.to_string()))?;
        for key in dict.entries.keys() {
            match phonology::normalize(key) {
                Ok(n) if n == *key => {}
                _ => return Err(SymbolismError::Dictionary(format!("entry {key:?} is not a normalized word"))),
            }
        }
        Ok(dict)
    }
}

pub fn build_dictionary<S: AsRef<str>>(words: &[S], table: &RuleTable) -> Result<QuantificationDictionary, SymbolismError> {
    let mut dict = QuantificationDictionary::empty(table.version.clone());
    for raw in words {
        let raw = raw.as_ref();
        let attach = |source| SymbolismError::Word {
            word: raw.to_string(),
            source,
        };
        let normalized = phonology::normalize(raw).map_err(attach)?;
        if dict.entries.contains_key(&normalized) {
            continue;
        }
        let parsed = phonology::parse_word(&normalized).map_err(attach)?;
        dict.entries.insert(normalized, quantify(&parsed, table));
    }
    Ok(dict)
}

pub fn lookup_or_quantify(
    word: &str,
    dict: &QuantificationDictionary,
    table: &RuleTable,
) -> Result<AdjectiveScaleVector, SymbolismError> {
    if dict.table_version != table.version {
        return Err(SymbolismError::VersionMismatch {
            dictionary: dict.table_version.clone(),
            table: table.version.clone(),
        });
    }
    let attach = |source| SymbolismError::Word {
        word: word.to_string(),
        source,
    };
    let normalized = phonology::normalize(word).map_err(attach)?;
    if let Some(v) = dict.get(&normalized) {
        return Ok(*v);
    }
    let parsed = phonology::parse_word(&normalized).map_err(attach)?;
    Ok(quantify(&parsed, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::parse_word;

    #[test]
    fn registry_has_fixed_leading_pairs() {
        let reg = ScaleRegistry::default();
        assert_eq!(reg.pairs().len(), SCALE_DIMS);
        let labels: Vec<String> = reg.pairs()[..4].iter().map(AdjectivePair::label).collect();
        assert_eq!(labels, ["light-dark", "warm-cold", "sharp-mild", "heavy-light"]);
        assert_eq!(reg.find("heavy").unwrap().index, 3);
        assert_eq!(reg.find("slow").unwrap().index, 7);
    }

    #[test]
    fn registry_rejects_bad_files() {
        assert!(ScaleRegistry::from_tsv("0\tlight\tdark\n").is_err());
        let swapped = DEFAULT_SCALES.replace("0\tlight\tdark", "0\tdark\tlight");
        assert!(ScaleRegistry::from_tsv(&swapped).is_err());
        let dup = DEFAULT_SCALES.replace("42\tcheerful\tgloomy", "42\tlight\tdark");
        assert!(ScaleRegistry::from_tsv(&dup).is_err());
    }

    #[test]
    fn rule_table_round_trips_and_rejects_gaps() {
        let t = RuleTable::default();
        assert_eq!(t.version, "onoma-rules-1");
        assert_eq!(RuleTable::from_json(&t.to_json()).unwrap(), t);

        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_RULES).unwrap();
        v["consonant"].as_object_mut().unwrap().remove("Q");
        let err = RuleTable::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("\"Q\""), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_RULES).unwrap();
        v["voiced"].as_array_mut().unwrap().pop();
        assert!(RuleTable::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_RULES).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(RuleTable::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn quantify_is_deterministic() {
        let t = RuleTable::default();
        let w = parse_word("kurukuru").unwrap();
        let a = quantify(&w, &t);
        let b = quantify(&w, &t);
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn voiced_onset_is_heavier() {
        let t = RuleTable::default();
        let heavy = ScaleRegistry::default().find("heavy-light").unwrap().index;
        // g carries +0.5 heavy plus +0.3 for voicing; k carries none.
        assert!(t.consonant[Consonant::G.index()][heavy] > 0.0);
        assert_eq!(t.consonant[Consonant::K.index()][heavy], 0.0);
        let goro = quantify(&parse_word("goro").unwrap(), &t);
        let koro = quantify(&parse_word("koro").unwrap(), &t);
        assert!(goro.get(heavy) > koro.get(heavy));
        // initial position weight 1.2 * (0.5 + 0.3)
        assert!((goro.get(heavy) - koro.get(heavy) - 0.96).abs() < 1e-12);
    }

    #[test]
    fn zero_table_gives_zero_vector() {
        let t = RuleTable::zeros("zero");
        for w in ["kurukuru", "bulber", "nyaa", "pikat"] {
            assert_eq!(quantify(&parse_word(&phonology::normalize(w).unwrap()).unwrap(), &t), AdjectiveScaleVector::ZERO);
        }
    }

    #[test]
    fn clamping_bounds_extreme_words() {
        let t = RuleTable::default();
        let long = "gogogogogogogogogogogogogogogogogo";
        let v = quantify(&parse_word(long).unwrap(), &t);
        assert!(v.values().iter().all(|x| (-2.0..=2.0).contains(x)));
        assert!(v.values().contains(&2.0));
    }

    #[test]
    fn build_dictionary_collapses_spellings() {
        let t = RuleTable::default();
        assert_eq!(build_dictionary(&["kurukuru", "goro"], &t).unwrap().len(), 2);
        let d = build_dictionary(&["kurukuru", "KURU-KURU"], &t).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.table_version, t.version);
        match build_dictionary(&[""], &t) {
            Err(SymbolismError::Word { word, source }) => {
                assert_eq!(word, "");
                assert_eq!(source, PhonologyError::EmptyWord);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lookup_prefers_dictionary_entries() {
        let t = RuleTable::default();
        let mut d = build_dictionary(&["kurukuru"], &t).unwrap();
        let planted = AdjectiveScaleVector::new([0.5; SCALE_DIMS]).unwrap();
        d.entries.insert("kurukuru".into(), planted);
        assert_eq!(lookup_or_quantify("Kuru-kuru", &d, &t).unwrap(), planted);

        let novel = lookup_or_quantify("bulber", &d, &t).unwrap();
        assert!(novel.values().iter().all(|x| (-2.0..=2.0).contains(x)));
        assert!(!d.entries.contains_key("bulber"));

        let stale = QuantificationDictionary::empty("onoma-rules-0");
        assert!(matches!(
            lookup_or_quantify("kurukuru", &stale, &t),
            Err(SymbolismError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn dictionary_json_validates_entries() {
        let t = RuleTable::default();
        let d = build_dictionary(&["kurukuru", "goro", "bulber"], &t).unwrap();
        let json = d.to_json();
        assert_eq!(QuantificationDictionary::from_json(&json).unwrap(), d);
        assert_eq!(
            build_dictionary(&["kurukuru", "goro", "bulber"], &t).unwrap().to_json(),
            json
        );
        let bad = json.replacen("\"goro\"", "\"Goro\"", 1);
        assert!(QuantificationDictionary::from_json(&bad).is_err());
        let short = r#"{"table_version":"x","entries":{"a":[1.0]}}"#;
        assert!(QuantificationDictionary::from_json(short).is_err());
        let out_of_range = format!(r#"{{"table_version":"x","entries":{{"a":[{}]}}}}"#, vec!["3.0"; 43].join(","));
        assert!(QuantificationDictionary::from_json(&out_of_range).is_err());
    }
}
