#![no_main]

use goggin::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_toml_str(text) else { return };
    // A config accepted from TOML must convert losslessly to the canonical
    // JSON syntax and back.
    let canon = cfg.canonical_json();
    let again = RunConfig::from_json_str(&canon).expect("canonical form must re-parse");
    assert_eq!(cfg, again);
    let _ = cfg.to_experiment();
});
