#![no_main]

use libfuzzer_sys::fuzz_target;
use msbpd::recon::LambdaGrid;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = text.parse::<LambdaGrid>() {
            if let LambdaGrid::Relative { lo, hi, per_decade } = grid {
                if (hi / lo).log10() * per_decade as f64 > 1e6 {
                    return;
                }
            }
            assert!(grid.values(1.0).iter().all(|v| *v >= 0.0));
        }
    }
});
