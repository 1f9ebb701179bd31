#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::timeline::{parse_captions, CaptionFormat};

fuzz_target!(|data: &[u8]| {
    for format in [CaptionFormat::Srt, CaptionFormat::Sbv, CaptionFormat::Csv] {
        if let Ok(parsed) = parse_captions(data, format) {
            for a in &parsed.annotations {
                assert!(a.start_s >= 0.0 && a.start_s < a.end_s);
            }
        }
    }
});
