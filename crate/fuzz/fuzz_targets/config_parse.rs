#![no_main]

use libfuzzer_sys::fuzz_target;
use pathlab_harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // The normalized form must parse back to the same config.
        let again = ExperimentConfig::parse(&cfg.normalized()).expect("normalized config reparses");
        assert_eq!(again, cfg);
    }
});
