#![no_main]

use goggin::noise::{NoiseModel, NoiseSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<NoiseSpec>(data) else { return };
    // Spec -> JSON -> spec is lossless for anything the decoder accepts.
    let canon = serde_json::to_string(&spec).expect("spec serialization");
    let again: NoiseSpec = serde_json::from_str(&canon).expect("canonical spec must re-parse");
    assert_eq!(spec, again);
    let Ok(model) = NoiseModel::from_spec(&spec) else { return };
    assert!(model.fisher_information().is_finite() && model.fisher_information() > 0.0);
    assert!(model.density(0.0).is_finite() && model.density(0.0) > 0.0);
});
