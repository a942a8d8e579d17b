#![no_main]

use libfuzzer_sys::fuzz_target;
use robin_core::io::Mask;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mask) = Mask::parse(text) else {
        return;
    };
    assert_eq!(Mask::parse(&mask.to_text()).unwrap(), mask);
    if mask.cells.len() <= 1 << 16 {
        if let Ok(grid) = mask.to_grid([0.0, 0.0]) {
            assert_eq!(grid.len(), mask.cells.iter().filter(|&&c| c).count());
        }
    }
});
