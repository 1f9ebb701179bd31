//! Normalization and mora-level parsing of romanized sound-symbolic words.
//!
//! Input is romanized text. [`normalize`] folds case, strips separators and
//! canonicalizes Hepburn spellings to their kunrei forms (`shi` -> `si`,
//! `tsu` -> `tu`, ...). [`parse_word`] then folds foreign letters (`l` -> `r`,
//! `v` -> `b`, ...) and segments the string greedily into morae:
//!
//! * a doubled consonant becomes the geminate `Q` followed by the consonant,
//!   unless it directly follows another `Q`;
//! * `n` not followed by a vowel or `y` is the moraic nasal `N`;
//! * a repeated vowel lengthens the preceding mora;
//! * a single `t`, `k` or `p` at the end of the word is a final `Q`
//!   (again not directly after a `Q`);
//! * any other consonant without a vowel receives an epenthetic `u`.
//!
//! Both tables are tab-separated data files; the defaults are compiled in.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_FOLDING: &str = include_str!("../data/folding.tsv");
const DEFAULT_CONSONANTS: &str = include_str!("../data/consonants.tsv");

/// Letters that mark a word-final geminate when they close a word.
const FINAL_GEMINATION_LETTERS: &[u8] = b"tkp";
const EPENTHETIC_VOWEL: Vowel = Vowel::U;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhonologyError {
    #[error("empty word")]
    EmptyWord,
    #[error("unsupported character {ch:?} at byte {offset}")]
    UnsupportedCharacter { ch: char, offset: usize },
    #[error("no mora segmentation for {input:?} at byte {offset}")]
    UnparsableSequence { input: String, offset: usize },
    #[error("table error at line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Consonant {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "t")]
    T,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "n")]
    N,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "w")]
    W,
    /// Geminate (sokuon).
    #[serde(rename = "Q")]
    Geminate,
    /// Moraic nasal.
    #[serde(rename = "N")]
    MoraicNasal,
}

impl Consonant {
    pub const ALL: [Consonant; 17] = [
        Consonant::None,
        Consonant::K,
        Consonant::G,
        Consonant::S,
        Consonant::Z,
        Consonant::T,
        Consonant::D,
        Consonant::N,
        Consonant::H,
        Consonant::B,
        Consonant::P,
        Consonant::M,
        Consonant::Y,
        Consonant::R,
        Consonant::W,
        Consonant::Geminate,
        Consonant::MoraicNasal,
    ];

    /// Name used in data files and JSON.
    pub fn key(self) -> &'static str {
        match self {
            Consonant::None => "none",
            Consonant::K => "k",
            Consonant::G => "g",
            Consonant::S => "s",
            Consonant::Z => "z",
            Consonant::T => "t",
            Consonant::D => "d",
            Consonant::N => "n",
            Consonant::H => "h",
            Consonant::B => "b",
            Consonant::P => "p",
            Consonant::M => "m",
            Consonant::Y => "y",
            Consonant::R => "r",
            Consonant::W => "w",
            Consonant::Geminate => "Q",
            Consonant::MoraicNasal => "N",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.key() == key)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The romanized onset letter of an ordinary consonant.
    pub fn letter(self) -> Option<char> {
        match self {
            Consonant::None | Consonant::Geminate | Consonant::MoraicNasal => None,
            other => other.key().chars().next(),
        }
    }

    pub fn is_special(self) -> bool {
        matches!(self, Consonant::Geminate | Consonant::MoraicNasal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vowel {
    A,
    I,
    U,
    E,
    O,
    None,
}

impl Vowel {
    pub const ALL: [Vowel; 6] = [Vowel::A, Vowel::I, Vowel::U, Vowel::E, Vowel::O, Vowel::None];

    pub fn key(self) -> &'static str {
        match self {
            Vowel::A => "a",
            Vowel::I => "i",
            Vowel::U => "u",
            Vowel::E => "e",
            Vowel::O => "o",
            Vowel::None => "none",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.key() == key)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_letter(c: u8) -> Option<Self> {
        match c {
            b'a' => Some(Vowel::A),
            b'i' => Some(Vowel::I),
            b'u' => Some(Vowel::U),
            b'e' => Some(Vowel::E),
            b'o' => Some(Vowel::O),
            _ => None,
        }
    }

    pub fn letter(self) -> Option<char> {
        match self {
            Vowel::None => None,
            other => other.key().chars().next(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mora {
    pub consonant: Consonant,
    pub vowel: Vowel,
    pub voiced: bool,
    pub palatalized: bool,
    pub long_vowel: bool,
}

impl Mora {
    pub fn geminate() -> Self {
        Mora {
            consonant: Consonant::Geminate,
            vowel: Vowel::None,
            voiced: false,
            palatalized: false,
            long_vowel: false,
        }
    }

    pub fn moraic_nasal() -> Self {
        Mora {
            consonant: Consonant::MoraicNasal,
            ..Mora::geminate()
        }
    }

    pub fn vowel(vowel: Vowel) -> Self {
        Mora {
            consonant: Consonant::None,
            vowel,
            voiced: false,
            palatalized: false,
            long_vowel: false,
        }
    }

    /// Type-level invariants only; see [`is_legal_sequence`] for phonotactics.
    pub fn is_well_formed(&self) -> bool {
        if self.consonant.is_special() {
            return self.vowel == Vowel::None && !self.palatalized && !self.long_vowel;
        }
        self.vowel != Vowel::None
    }

    fn render_into(&self, next: Option<&Mora>, out: &mut String) {
        match self.consonant {
            Consonant::Geminate => {
                let onset = next.and_then(|m| m.consonant.letter()).unwrap_or('t');
                out.push(onset);
                return;
            }
            Consonant::MoraicNasal => {
                out.push('n');
                return;
            }
            c => {
                if let Some(l) = c.letter() {
                    out.push(l);
                }
            }
        }
        if self.palatalized {
            out.push('y');
        }
        if let Some(v) = self.vowel.letter() {
            out.push(v);
            if self.long_vowel {
                out.push(v);
            }
        }
    }
}

impl fmt::Display for Mora {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.consonant {
            Consonant::Geminate => return f.write_str("Q"),
            Consonant::MoraicNasal => return f.write_str("N"),
            _ => {}
        }
        let mut s = String::new();
        self.render_into(None, &mut s);
        if self.long_vowel {
            s.pop();
            s.push(':');
        }
        f.write_str(&s)
    }
}

/// Canonical romanization of a mora sequence. Geminates take the onset of
/// the following mora, or `t` at the end of the word.
pub fn render_morae(morae: &[Mora]) -> String {
    let mut out = String::with_capacity(morae.len() * 3);
    for (i, m) in morae.iter().enumerate() {
        m.render_into(morae.get(i + 1), &mut out);
    }
    out
}

/// Phonotactic legality under the default inventory: exactly the mora
/// sequences that [`parse_word`] reproduces from their own rendering.
pub fn is_legal_sequence(morae: &[Mora]) -> bool {
    if morae.is_empty() {
        return false;
    }
    for (i, m) in morae.iter().enumerate() {
        if !m.is_well_formed() || !is_default_inventory_mora(m) {
            return false;
        }
        let next = morae.get(i + 1);
        match m.consonant {
            Consonant::Geminate => {
                if let Some(n) = next {
                    if matches!(
                        n.consonant,
                        Consonant::None | Consonant::N | Consonant::Geminate | Consonant::MoraicNasal
                    ) {
                        return false;
                    }
                }
            }
            Consonant::MoraicNasal => {
                if let Some(n) = next {
                    if matches!(n.consonant, Consonant::None | Consonant::Y) {
                        return false;
                    }
                }
            }
            _ => {}
        }
        if m.consonant == Consonant::None && i > 0 {
            let prev = &morae[i - 1];
            if !prev.consonant.is_special() && !prev.long_vowel && prev.vowel == m.vowel {
                return false;
            }
        }
    }
    true
}

fn is_default_inventory_mora(m: &Mora) -> bool {
    let voiced = matches!(m.consonant, Consonant::G | Consonant::Z | Consonant::D | Consonant::B);
    if m.voiced != voiced {
        return false;
    }
    match m.consonant {
        Consonant::None | Consonant::Geminate | Consonant::MoraicNasal => !m.palatalized,
        Consonant::Y => !m.palatalized && matches!(m.vowel, Vowel::A | Vowel::U | Vowel::O),
        Consonant::W => !m.palatalized && matches!(m.vowel, Vowel::A | Vowel::O),
        _ => !m.palatalized || m.vowel != Vowel::I,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhonWord {
    pub morae: Vec<Mora>,
    pub reduplicated: bool,
    pub final_gemination: bool,
    pub final_nasal: bool,
    pub final_ri: bool,
    /// Canonical rendering of `morae` (post-folding, epenthesis made explicit).
    pub surface: String,
}

impl PhonWord {
    pub fn from_morae(morae: Vec<Mora>) -> Option<Self> {
        if morae.is_empty() || morae.iter().any(|m| !m.is_well_formed()) {
            return None;
        }
        let half = morae.len() / 2;
        let reduplicated = morae.len().is_multiple_of(2) && morae[..half] == morae[half..];
        let last = morae[morae.len() - 1];
        Some(PhonWord {
            surface: render_morae(&morae),
            reduplicated,
            final_gemination: last.consonant == Consonant::Geminate,
            final_nasal: last.consonant == Consonant::MoraicNasal,
            final_ri: last.consonant == Consonant::R && last.vowel == Vowel::I && !last.palatalized,
            morae,
        })
    }

    pub fn len(&self) -> usize {
        self.morae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morae.is_empty()
    }
}

#[derive(Debug, Clone)]
struct ConsonantEntry {
    class: Consonant,
    voiced: bool,
    vowels: Vec<Vowel>,
    palatal_vowels: Vec<Vowel>,
}

/// Folding and consonant tables used by the segmenter.
#[derive(Debug, Clone)]
pub struct PhonologyTables {
    folding_version: String,
    inventory_version: String,
    folding: HashMap<u8, String>,
    consonants: HashMap<u8, ConsonantEntry>,
}

impl Default for PhonologyTables {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_FOLDING, DEFAULT_CONSONANTS).expect("bundled phonology tables are valid")
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split('\t').collect()))
        }
    })
}

fn version_line(text: &str) -> Option<String> {
    text.lines().find_map(|l| {
        l.strip_prefix("# version\t")
            .map(|v| v.trim().to_string())
    })
}

fn single_letter(field: &str, line: usize) -> Result<u8, PhonologyError> {
    match field.as_bytes() {
        [c] if c.is_ascii_lowercase() => Ok(*c),
        _ => Err(PhonologyError::Table {
            line,
            message: format!("expected one lowercase letter, got {field:?}"),
        }),
    }
}

fn vowel_set(field: &str, line: usize) -> Result<Vec<Vowel>, PhonologyError> {
    if field == "-" {
        return Ok(Vec::new());
    }
    field
        .bytes()
        .map(|b| {
            Vowel::from_letter(b).ok_or_else(|| PhonologyError::Table {
                line,
                message: format!("bad vowel {:?}", b as char),
            })
        })
        .collect()
}

impl PhonologyTables {
    pub fn from_tsv(folding_tsv: &str, consonants_tsv: &str) -> Result<Self, PhonologyError> {
        let mut folding = HashMap::new();
        for (line, fields) in data_lines(folding_tsv) {
            if fields.len() != 2 {
                return Err(PhonologyError::Table {
                    line,
                    message: "expected 2 columns".into(),
                });
            }
            let from = single_letter(fields[0], line)?;
            let to = fields[1];
            if to.is_empty() || !to.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(PhonologyError::Table {
                    line,
                    message: format!("bad folding target {to:?}"),
                });
            }
            folding.insert(from, to.to_string());
        }

        let mut consonants = HashMap::new();
        for (line, fields) in data_lines(consonants_tsv) {
            if fields.len() != 5 {
                return Err(PhonologyError::Table {
                    line,
                    message: "expected 5 columns".into(),
                });
            }
            let letter = single_letter(fields[0], line)?;
            let class = Consonant::from_key(fields[1])
                .filter(|c| c.letter().is_some())
                .ok_or_else(|| PhonologyError::Table {
                    line,
                    message: format!("unknown consonant class {:?}", fields[1]),
                })?;
            let voiced = match fields[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(PhonologyError::Table {
                        line,
                        message: format!("voiced must be 0 or 1, got {other:?}"),
                    })
                }
            };
            let vowels = vowel_set(fields[3], line)?;
            consonants.insert(
                letter,
                ConsonantEntry {
                    class,
                    voiced,
                    vowels,
                    palatal_vowels: vowel_set(fields[4], line)?,
                },
            );
        }
        for c in Consonant::ALL.iter().filter(|c| c.letter().is_some()) {
            if !consonants.values().any(|e| e.class == *c) {
                return Err(PhonologyError::Table {
                    line: 0,
                    message: format!("consonant class {:?} missing from inventory", c.key()),
                });
            }
        }
        for (from, to) in &folding {
            if consonants.contains_key(from) || Vowel::from_letter(*from).is_some() {
                return Err(PhonologyError::Table {
                    line: 0,
                    message: format!("folding source {:?} is already a phoneme letter", *from as char),
                });
            }
            if to.bytes().any(|b| folding.contains_key(&b)) {
                return Err(PhonologyError::Table {
                    line: 0,
                    message: format!("folding target {to:?} is not final"),
                });
            }
        }
        Ok(PhonologyTables {
            folding_version: version_line(folding_tsv).unwrap_or_else(|| "unversioned".into()),
            inventory_version: version_line(consonants_tsv).unwrap_or_else(|| "unversioned".into()),
            folding,
            consonants,
        })
    }

    pub fn folding_version(&self) -> &str {
        &self.folding_version
    }

    pub fn inventory_version(&self) -> &str {
        &self.inventory_version
    }

    /// Applies the folding table; returns folded bytes with their source offsets.
    fn fold(&self, normalized: &str) -> Result<Vec<(u8, usize)>, PhonologyError> {
        let mut out = Vec::with_capacity(normalized.len());
        for (offset, ch) in normalized.char_indices() {
            if !ch.is_ascii_lowercase() {
                return Err(PhonologyError::UnsupportedCharacter { ch, offset });
            }
            let b = ch as u8;
            match self.folding.get(&b) {
                Some(to) => out.extend(to.bytes().map(|t| (t, offset))),
                None => out.push((b, offset)),
            }
        }
        Ok(out)
    }
}

/// Folds case, strips separators and canonicalizes romanization variants.
pub fn normalize(raw: &str) -> Result<String, PhonologyError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(PhonologyError::EmptyWord);
    }
    let mut folded = String::with_capacity(trimmed.len());
    for (offset, ch) in trimmed.char_indices() {
        for lc in ch.to_lowercase() {
            match lc {
                '-' | '\'' | '\u{2019}' | '\u{2010}' | '\u{2011}' | '\u{30fc}' => {}
                c if c.is_whitespace() => {}
                'a'..='z' => folded.push(lc),
                'ā' | 'â' => folded.push_str("aa"),
                'ī' | 'î' => folded.push_str("ii"),
                'ū' | 'û' => folded.push_str("uu"),
                'ē' | 'ê' => folded.push_str("ee"),
                'ō' | 'ô' => folded.push_str("oo"),
                _ => return Err(PhonologyError::UnsupportedCharacter { ch, offset }),
            }
        }
    }
    if folded.is_empty() {
        return Err(PhonologyError::EmptyWord);
    }
    loop {
        let next = canonicalize_digraphs(&folded);
        if next == folded {
            return Ok(folded);
        }
        folded = next;
    }
}

// Every rule strictly lowers 2*#f + #h + #c + #j + #s, so iterating to a
// fixed point terminates.
const DIGRAPHS: &[(&str, &str)] = &[
    ("shi", "si"),
    ("chi", "ti"),
    ("tsu", "tu"),
    ("sh", "sy"),
    ("ch", "ty"),
    ("fu", "hu"),
    ("ji", "zi"),
    ("j", "zy"),
];

fn canonicalize_digraphs(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    let mut rest = s;
    'outer: while !rest.is_empty() {
        for (from, to) in DIGRAPHS {
            if let Some(tail) = rest.strip_prefix(from) {
                out.push_str(to);
                rest = tail;
                continue 'outer;
            }
        }
        let mut chars = rest.chars();
        out.push(chars.next().unwrap());
        rest = chars.as_str();
    }
    out
}

/// Segments a normalized word with the bundled tables.
pub fn parse_word(normalized: &str) -> Result<PhonWord, PhonologyError> {
    parse_word_with(normalized, &PhonologyTables::default())
}

pub fn parse_word_with(normalized: &str, tables: &PhonologyTables) -> Result<PhonWord, PhonologyError> {
    if normalized.is_empty() {
        return Err(PhonologyError::EmptyWord);
    }
    let chars = tables.fold(normalized)?;
    let unparsable = |at: usize| PhonologyError::UnparsableSequence {
        input: normalized.to_string(),
        offset: chars.get(at).map_or(normalized.len(), |&(_, o)| o),
    };
    let letter = |i: usize| chars.get(i).map(|&(c, _)| c);

    let mut morae: Vec<Mora> = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].0;
        if let Some(v) = Vowel::from_letter(c) {
            if let Some(prev) = morae.last_mut() {
                if !prev.consonant.is_special() && !prev.long_vowel && prev.vowel == v {
                    prev.long_vowel = true;
                    i += 1;
                    continue;
                }
            }
            morae.push(Mora::vowel(v));
            i += 1;
            continue;
        }
        let entry = tables.consonants.get(&c).ok_or_else(|| unparsable(i))?;
        let next = letter(i + 1);
        let next_vowel = next.and_then(Vowel::from_letter);
        // A geminate never follows another geminate.
        let after_geminate = morae.last().is_some_and(|m| m.consonant == Consonant::Geminate);

        if entry.class == Consonant::N {
            // n before y takes a vowel, so it never renders as a palatal onset.
            if next_vowel.is_none() && next != Some(b'y') {
                morae.push(Mora::moraic_nasal());
                i += 1;
                continue;
            }
        } else if next == Some(c) && !after_geminate {
            morae.push(Mora::geminate());
            i += 1;
            continue;
        }

        let plain = |vowel: Vowel, palatalized: bool| Mora {
            consonant: entry.class,
            vowel,
            voiced: entry.voiced,
            palatalized,
            long_vowel: false,
        };
        if let Some(v) = next_vowel {
            if !entry.vowels.contains(&v) {
                return Err(unparsable(i));
            }
            morae.push(plain(v, false));
            i += 2;
            continue;
        }
        if next == Some(b'y') && !entry.palatal_vowels.is_empty() {
            if let Some(v) = letter(i + 2).and_then(Vowel::from_letter) {
                if !entry.palatal_vowels.contains(&v) {
                    return Err(unparsable(i));
                }
                morae.push(plain(v, true));
                i += 3;
                continue;
            }
        }
        if next.is_none() && !after_geminate && FINAL_GEMINATION_LETTERS.contains(&c) {
            morae.push(Mora::geminate());
            i += 1;
            continue;
        }
        if !entry.vowels.contains(&EPENTHETIC_VOWEL) {
            return Err(unparsable(i));
        }
        morae.push(plain(EPENTHETIC_VOWEL, false));
        i += 1;
    }
    PhonWord::from_morae(morae).ok_or_else(|| unparsable(0))
}

/// `normalize` followed by `parse_word`.
pub fn parse_raw(raw: &str) -> Result<PhonWord, PhonologyError> {
    parse_word(&normalize(raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: Consonant, v: Vowel) -> Mora {
        Mora {
            consonant: c,
            vowel: v,
            voiced: matches!(c, Consonant::G | Consonant::Z | Consonant::D | Consonant::B),
            palatalized: false,
            long_vowel: false,
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Kuru-Kuru").unwrap(), "kurukuru");
        assert_eq!(normalize(""), Err(PhonologyError::EmptyWord));
        assert_eq!(normalize("   "), Err(PhonologyError::EmptyWord));
        assert_eq!(normalize("--"), Err(PhonologyError::EmptyWord));
        assert_eq!(normalize("Bulber").unwrap(), "bulber");
    }

    #[test]
    fn normalize_hepburn_variants() {
        assert_eq!(normalize("shiku").unwrap(), "siku");
        assert_eq!(normalize("chiku-taku").unwrap(), "tikutaku");
        assert_eq!(normalize("tsun").unwrap(), "tun");
        assert_eq!(normalize("fuwa fuwa").unwrap(), "huwahuwa");
        assert_eq!(normalize("jiwa").unwrap(), "ziwa");
        assert_eq!(normalize("sha").unwrap(), "sya");
        assert_eq!(normalize("jara").unwrap(), "zyara");
        assert_eq!(normalize("Gōn").unwrap(), "goon");
        assert_eq!(normalize("pon'yo").unwrap(), "ponyo");
    }

    #[test]
    fn normalize_rejects_foreign_symbols() {
        assert!(matches!(
            normalize("ku2ru"),
            Err(PhonologyError::UnsupportedCharacter { ch: '2', offset: 2 })
        ));
        assert!(matches!(normalize("くる"), Err(PhonologyError::UnsupportedCharacter { .. })));
    }

    #[test]
    fn normalize_reaches_fixed_point_on_feedback_patterns() {
        // "sfu" -> "shu" only becomes "syu" on a second pass
        let once = normalize("sfu").unwrap();
        assert_eq!(once, "syu");
        assert_eq!(normalize(&once).unwrap(), once);
    }

    #[test]
    fn parse_kurukuru() {
        let w = parse_word("kurukuru").unwrap();
        let ku = cv(Consonant::K, Vowel::U);
        let ru = cv(Consonant::R, Vowel::U);
        assert_eq!(w.morae, vec![ku, ru, ku, ru]);
        assert!(w.reduplicated);
        assert!(!w.final_gemination && !w.final_nasal && !w.final_ri);
        assert_eq!(w.surface, "kurukuru");
    }

    #[test]
    fn parse_nyaa() {
        let w = parse_word("nyaa").unwrap();
        assert_eq!(w.morae.len(), 1);
        let m = w.morae[0];
        assert_eq!((m.consonant, m.vowel), (Consonant::N, Vowel::A));
        assert!(m.palatalized && m.long_vowel);
        assert!(!w.reduplicated);
    }

    #[test]
    fn parse_batto() {
        let w = parse_word("batto").unwrap();
        assert_eq!(
            w.morae,
            vec![cv(Consonant::B, Vowel::A), Mora::geminate(), cv(Consonant::T, Vowel::O)]
        );
        assert!(!w.final_gemination);
        assert!(w.morae[0].voiced);
    }

    #[test]
    fn parse_special_morae() {
        let w = parse_word("pikat").unwrap();
        assert!(w.final_gemination);
        assert_eq!(w.morae.len(), 3);

        let w = parse_word("gorogoron").unwrap();
        assert!(w.final_nasal && !w.reduplicated);

        let w = parse_word("tunn").unwrap();
        assert_eq!(w.morae, vec![cv(Consonant::T, Vowel::U), Mora::moraic_nasal(), Mora::moraic_nasal()]);

        let w = parse_word("kirari").unwrap();
        assert!(w.final_ri);

        let w = parse_word("konna").unwrap();
        assert_eq!(
            w.morae,
            vec![cv(Consonant::K, Vowel::O), Mora::moraic_nasal(), cv(Consonant::N, Vowel::A)]
        );
    }

    #[test]
    fn parse_folds_foreign_sounds() {
        let w = parse_word("bulber").unwrap();
        assert_eq!(w.surface, "buruberu");
        assert_eq!(w.morae.len(), 4);
        assert_eq!(parse_word("vivid").unwrap().surface, "bibidu");
        assert_eq!(parse_word("lala").unwrap().surface, "rara");
    }

    #[test]
    fn parse_reports_offset_of_failure() {
        match parse_word("kayi") {
            Err(PhonologyError::UnparsableSequence { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_word("bowl") {
            Err(PhonologyError::UnparsableSequence { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_word("Kuru"), Err(PhonologyError::UnsupportedCharacter { .. })));
    }

    #[test]
    fn legality_excludes_ambiguous_sequences() {
        let n = Mora::moraic_nasal();
        let a = Mora::vowel(Vowel::A);
        assert!(!is_legal_sequence(&[n, a]));
        assert!(!is_legal_sequence(&[Mora::geminate(), a]));
        assert!(!is_legal_sequence(&[cv(Consonant::K, Vowel::A), a]));
        assert!(is_legal_sequence(&[cv(Consonant::K, Vowel::I), a]));
        assert!(!is_legal_sequence(&[]));
    }

    #[test]
    fn clusters_parse_to_legal_sequences() {
        let w = parse_word("nyqan").unwrap();
        assert_eq!(w.surface, "nuyukan");
        let w = parse_word("pikkkpikki").unwrap();
        assert_eq!(w.surface, "pikkukupikki");
        for w in ["nyqan", "pikkkpikki", "pitt"] {
            assert!(is_legal_sequence(&parse_word(w).unwrap().morae), "{w}");
        }
    }

    #[test]
    fn table_loader_rejects_bad_rows() {
        let bad = "k\tk\t0\taiueo\n";
        assert!(PhonologyTables::from_tsv("", bad).is_err());
        assert!(PhonologyTables::from_tsv("a\tr\n", DEFAULT_CONSONANTS).is_err());
        assert!(PhonologyTables::from_tsv("l\tv\nv\tb\n", DEFAULT_CONSONANTS).is_err());
        let t = PhonologyTables::default();
        assert_eq!(t.folding_version(), "onoma-folding-1");
        assert_eq!(t.inventory_version(), "onoma-morae-1");
    }
}
