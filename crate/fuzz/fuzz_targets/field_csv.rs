#![no_main]

use libfuzzer_sys::fuzz_target;
use robin_core::io::{field_from_rows, parse_field_csv};
use robin_core::{rasterize, DomainSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_field_csv(text) else {
        return;
    };
    let grid = rasterize(&DomainSpec::square(1.0), 0.25).unwrap();
    if let Ok(values) = field_from_rows(&grid, &rows) {
        assert_eq!(values.len(), grid.len());
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
