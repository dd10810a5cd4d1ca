#![no_main]

use desing_core::InvariantValue;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = text.parse::<InvariantValue>() {
        let again: InvariantValue = v.to_string().parse().unwrap();
        assert_eq!(again, v);
    }
});
