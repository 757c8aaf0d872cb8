#![no_main]
use lancer_core::diffmodels::MlpModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = MlpModel::from_bytes(data) {
        let bytes = model.to_bytes();
        assert_eq!(bytes.as_slice(), data);
    }
});
