#![no_main]
use lancer_core::diffmodels::MlpModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = MlpModel::from_json(data) {
        let json = model.to_json().expect("accepted model serializes");
        let back = MlpModel::from_json(&json).expect("own output parses");
        assert_eq!(back.to_bytes(), model.to_bytes());
    }
});
