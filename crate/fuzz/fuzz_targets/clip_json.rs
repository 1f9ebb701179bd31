#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::motion::{clip_from_json, clip_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(clip) = clip_from_json(text) {
        let back = clip_from_json(&clip_to_json(&clip)).expect("written clip parses");
        assert_eq!(back, clip);
    }
});
