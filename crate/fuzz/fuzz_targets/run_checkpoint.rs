#![no_main]
use lancer_cli::checkpoint::RunCheckpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ck) = RunCheckpoint::from_json(data) {
        let bytes = ck.to_json().expect("accepted checkpoint serializes");
        let back = RunCheckpoint::from_json(&bytes).expect("own output parses");
        assert_eq!(back.to_json().expect("serializes"), bytes);
    }
});
