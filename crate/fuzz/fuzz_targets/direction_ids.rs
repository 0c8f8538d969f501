#![no_main]

use libfuzzer_sys::fuzz_target;
use pathlab_harness::config::parse_direction;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for n in 1..=4 {
        if let Ok((_, mu)) = parse_direction(text, n) {
            assert!(mu < n);
        }
    }
});
