#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::symbolism::QuantificationDictionary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(dict) = QuantificationDictionary::from_json(text) {
        let back = QuantificationDictionary::from_json(&dict.to_json()).expect("written dictionary parses");
        assert_eq!(back, dict);
    }
});
