#![no_main]

use libfuzzer_sys::fuzz_target;
use robin_core::io::{parse_sweep_csv, parse_verdict_csv, sweep_csv, verdict_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_sweep_csv(text) {
        let again = parse_sweep_csv(&sweep_csv(&rows)).unwrap();
        assert_eq!(again.len(), rows.len());
    }
    if let Ok(rows) = parse_verdict_csv(text) {
        let again = parse_verdict_csv(&verdict_csv(&rows)).unwrap();
        assert_eq!(again.len(), rows.len());
    }
});
