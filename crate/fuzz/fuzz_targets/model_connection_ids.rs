#![no_main]

use libfuzzer_sys::fuzz_target;
use pathlab_core::geometry::{parse_connection, parse_model};

// First line is a model id, the rest a connection id.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (model_id, conn_id) = text.split_once('\n').unwrap_or((text, "lc"));
    let Ok(model) = parse_model(model_id) else {
        return;
    };
    if let Ok(conn) = parse_connection(conn_id, &model) {
        let again = parse_connection(conn.id(), &model).expect("canonical id reparses");
        assert_eq!(again.id(), conn.id());
    }
});
