#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::timeline::ConditioningSequence;

fuzz_target!(|data: &[u8]| {
    if let Ok(seq) = ConditioningSequence::from_bytes(data, 60.0) {
        let bytes = seq.to_bytes();
        let back = ConditioningSequence::from_bytes(&bytes, 60.0).expect("written sequence reads");
        assert_eq!(back.to_bytes(), bytes);
    }
});
