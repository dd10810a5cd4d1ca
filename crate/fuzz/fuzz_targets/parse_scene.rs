#![no_main]

use desing_cli::parse_scene;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_scene(text) {
        assert_eq!(parse_scene(&s.to_string()).unwrap(), s);
    }
});
