//! Replays the fuzz corpus through the parser entry points and throws random
//! strings at them; the properties match the fuzz targets.

use std::path::PathBuf;

use pathlab_core::geometry::{parse_connection, parse_model, TestFunction};
use pathlab_harness::config::parse_direction;
use pathlab_harness::ExperimentConfig;
use proptest::prelude::*;

fn config_round_trip(text: &str) {
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&cfg.normalized()).expect("normalized config reparses");
        assert_eq!(again, cfg);
    }
}

fn ids_round_trip(text: &str) {
    let (model_id, conn_id) = text.split_once('\n').unwrap_or((text, "lc"));
    let Ok(model) = parse_model(model_id) else {
        return;
    };
    if let Ok(conn) = parse_connection(conn_id, &model) {
        assert_eq!(parse_connection(conn.id(), &model).expect("canonical id reparses").id(), conn.id());
    }
}

fn functions_round_trip(text: &str) {
    for model_id in ["s2", "s3", "t2", "r2", "r3"] {
        let model = parse_model(model_id).unwrap();
        if let Ok(f) = TestFunction::parse(text, &model) {
            assert_eq!(TestFunction::parse(&f.id(), &model).expect("canonical id reparses").id(), f.id());
        }
    }
}

fn direction_in_range(text: &str) {
    for n in 1..=4 {
        if let Ok((_, mu)) = parse_direction(text, n) {
            assert!(mu < n);
        }
    }
}

type Target = (&'static str, fn(&str));

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut seeds: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| String::from_utf8(std::fs::read(&p).unwrap()).ok().map(|s| (p, s)))
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty(), "no seeds for {target}");
    seeds
}

#[test]
fn corpus_seeds_hold_the_properties() {
    let targets: [Target; 4] = [
        ("config_parse", config_round_trip),
        ("model_connection_ids", ids_round_trip),
        ("test_function_ids", functions_round_trip),
        ("direction_ids", direction_in_range),
    ];
    for (target, check) in targets {
        for (path, text) in corpus(target) {
            let r = std::panic::catch_unwind(|| check(&text));
            assert!(r.is_ok(), "{} panicked", path.display());
        }
    }
}

#[test]
fn valid_seeds_are_accepted() {
    for (path, text) in corpus("config_parse") {
        let bad = path.file_name().unwrap() == "errors";
        assert_eq!(ExperimentConfig::parse(&text).is_err(), bad, "{}", path.display());
    }
}

proptest! {
    #[test]
    fn arbitrary_config_text(text in "([a-z._]{0,12} ?= ?[-a-z0-9.,:=@*]{0,16}\n|#[^\n]{0,8}\n|[^\n]{0,10}\n){0,6}") {
        config_round_trip(&text);
    }

    #[test]
    fn arbitrary_ids(model in "(s[0-9]|t2|r[0-9]|flat:n=[0-9-]{1,3}|.{0,4})", conn in "(lc|[a-z]{0,9}:[a-z]{0,8}=[-+0-9.e]{0,8}|.{0,10})") {
        ids_round_trip(&format!("{model}\n{conn}"));
    }

    #[test]
    fn arbitrary_functions(text in "(height|y[0-9]{1,3}(\\*y[0-9]{1,3})?|const:[-+0-9.e]{0,8}|wave:[0-9]{0,3}:[-0-9]{0,6}|.{0,8})") {
        functions_round_trip(&text);
    }

    #[test]
    fn arbitrary_directions(text in "((cos|sin|const)[0-9]{0,22}@u[0-9]{0,22}|.{0,12})") {
        direction_in_range(&text);
    }
}
