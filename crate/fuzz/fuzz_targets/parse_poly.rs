#![no_main]

use desing_core::parse_poly;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let vars: Vec<String> = ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    if let Ok(p) = parse_poly(text, &vars) {
        // printing is canonical and parses back to the same polynomial
        let shown = p.display(&vars).to_string();
        assert_eq!(parse_poly(&shown, &vars).unwrap(), p);
    }
});
