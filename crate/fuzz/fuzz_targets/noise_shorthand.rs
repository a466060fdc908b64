#![no_main]

use goggin::noise::{NoiseModel, NoiseSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = NoiseSpec::parse_shorthand(text) else { return };
    let Ok(model) = NoiseModel::from_spec(&spec) else { return };
    // Anything accepted must be numerically sane.
    assert!(model.fisher_information().is_finite() && model.fisher_information() > 0.0);
    assert!(model.density(0.0).is_finite() && model.density(0.0) > 0.0);
    assert!(model.score(0.0).is_finite());
});
