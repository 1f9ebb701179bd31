#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::motion::parse_bvh;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_bvh(text) {
        let _ = doc.to_clip();
    }
});
