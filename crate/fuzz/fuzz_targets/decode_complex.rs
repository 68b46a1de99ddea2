#![no_main]

use libfuzzer_sys::fuzz_target;
use msbpd::io::{decode_complex, encode_complex};

fuzz_target!(|data: &[u8]| {
    if let Ok(image) = decode_complex(data) {
        assert!(image.as_slice().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        assert_eq!(encode_complex(&image).unwrap(), data);
    }
});
