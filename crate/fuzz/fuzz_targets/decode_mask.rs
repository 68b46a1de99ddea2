#![no_main]

use libfuzzer_sys::fuzz_target;
use msbpd::io::{decode_mask, encode_mask};

fuzz_target!(|data: &[u8]| {
    if let Ok(mask) = decode_mask(data) {
        assert!(mask.count() > 0);
        assert_eq!(decode_mask(&encode_mask(&mask)).unwrap(), mask);
    }
});
