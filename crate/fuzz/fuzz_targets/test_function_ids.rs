#![no_main]

use libfuzzer_sys::fuzz_target;
use pathlab_core::geometry::{parse_model, TestFunction};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for model_id in ["s2", "s3", "t2", "r2", "r3"] {
        let model = parse_model(model_id).unwrap();
        if let Ok(f) = TestFunction::parse(text, &model) {
            let _ = TestFunction::parse(&f.id(), &model).expect("canonical id reparses");
        }
    }
});
