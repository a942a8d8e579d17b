#![no_main]

use libfuzzer_sys::fuzz_target;
use robin_core::DomainSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<DomainSpec>(data) else {
        return;
    };
    if spec.validate().is_ok() {
        let _ = (spec.volume(), spec.perimeter(), spec.smoothness());
        if spec.dimension() == 2 {
            let b = spec.bounding_box();
            let c = [0.5 * (b[0] + b[2]), 0.5 * (b[1] + b[3])];
            let _ = spec.contains(c);
        }
    }
});
