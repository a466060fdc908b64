#![no_main]

use goggin::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_json_str(text) else { return };
    // Accepted configs survive the canonical round trip bit-for-bit.
    let canon = cfg.canonical_json();
    let again = RunConfig::from_json_str(&canon).expect("canonical form must re-parse");
    assert_eq!(cfg, again);
    assert_eq!(canon, again.canonical_json());
    // Resolution may reject, but must not panic.
    let _ = cfg.to_experiment();
});
