#![no_main]
use lancer_core::metrics::{read_curve_csv, write_curve_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = read_curve_csv(data) {
        let mut out = Vec::new();
        write_curve_csv(&points, &mut out, None).expect("accepted points serialize");
        let back = read_curve_csv(out.as_slice()).expect("own output parses");
        assert_eq!(back.len(), points.len());
    }
});
