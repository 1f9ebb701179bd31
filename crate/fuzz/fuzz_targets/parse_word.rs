#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::phonology::{normalize, parse_word, render_morae};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(normalized) = normalize(text) else { return };
    assert_eq!(normalize(&normalized).as_deref(), Ok(normalized.as_str()));
    if let Ok(word) = parse_word(&normalized) {
        let again = parse_word(&render_morae(&word.morae)).expect("canonical rendering parses");
        assert_eq!(again.morae, word.morae);
    }
});
