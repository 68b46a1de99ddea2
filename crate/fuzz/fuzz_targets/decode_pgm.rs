#![no_main]

use libfuzzer_sys::fuzz_target;
use msbpd::io::{decode_image, decode_pgm, encode_pgm};

fuzz_target!(|data: &[u8]| {
    if let Ok(pgm) = decode_pgm(data) {
        assert_eq!(pgm.samples.len(), pgm.width * pgm.height);
        assert!(pgm.samples.iter().all(|&s| s <= pgm.maxval));
        assert_eq!(decode_pgm(&encode_pgm(&pgm)).unwrap(), pgm);
    }
    let _ = decode_image(data);
});
