#![no_main]
use lancer_core::problems::Dataset;
use libfuzzer_sys::fuzz_target;

// Accepted datasets must survive a write/read round trip unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok((ds, prov)) = Dataset::from_json_with_provenance(data) {
        let bytes = ds.to_json_with_provenance(&prov).expect("accepted dataset serializes");
        let (back, prov_back) = Dataset::from_json_with_provenance(&bytes).expect("own output parses");
        assert_eq!(back, ds);
        assert_eq!(prov_back, prov);
    }
});
