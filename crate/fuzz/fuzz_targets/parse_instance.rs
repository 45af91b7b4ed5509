#![no_main]

use libfuzzer_sys::fuzz_target;
use tarski::io::{parse_instance, write_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_instance(text) {
        // accepted dumps are canonical
        assert_eq!(write_instance(&f), text);
        let _ = f.validated();
    }
});
