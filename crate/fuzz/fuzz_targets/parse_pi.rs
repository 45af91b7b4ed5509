#![no_main]

use libfuzzer_sys::fuzz_target;
use tarski::io::{parse_pi, write_pi};
use tarski::pi::check_safe_pi;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_pi(text) {
        assert_eq!(write_pi(&p), text);
        let _ = check_safe_pi(&p);
    }
});
