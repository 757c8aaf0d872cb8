#![no_main]
use lancer_core::metrics::{read_history_csv, write_history_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_history_csv(data) {
        let mut out = Vec::new();
        write_history_csv(&rows, &mut out, None).expect("accepted rows serialize");
        let back = read_history_csv(out.as_slice()).expect("own output parses");
        assert_eq!(back.len(), rows.len());
    }
});
