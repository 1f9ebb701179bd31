#![no_main]

use libfuzzer_sys::fuzz_target;
use onoma::symbolism::RuleTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = RuleTable::from_json(text) {
        let back = RuleTable::from_json(&table.to_json()).expect("written table parses");
        assert_eq!(back, table);
    }
});
