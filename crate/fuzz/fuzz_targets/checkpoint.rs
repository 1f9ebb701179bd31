#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::factmodel::{read_checkpoint, write_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = read_checkpoint(data) {
        let bytes = write_checkpoint(&model);
        let back = read_checkpoint(&bytes).expect("written checkpoint reads");
        assert_eq!(write_checkpoint(&back), bytes);
    }
});
