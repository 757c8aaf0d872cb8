#![no_main]
use lancer_cli::config::{Overrides, RunConfig};
use libfuzzer_sys::fuzz_target;

// Any accepted config must re-resolve to itself with the same hash.
fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = RunConfig::resolve(Some(data), &Overrides::default()) {
        let back = RunConfig::resolve(Some(&cfg.to_json()), &Overrides::default()).expect("own output resolves");
        assert_eq!(back.hash(), cfg.hash());
    }
});
