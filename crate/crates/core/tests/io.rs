use msbpd::io::*;
use msbpd::sampling::{fsr_mask, gen_laplacian_mask};
use msbpd::{ComplexImage, Error, RealImage, SamplingMask, C64};
use proptest::prelude::*;
use std::path::Path;

fn malformed(name: &str) -> Vec<u8> {
    std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/malformed").join(name)).unwrap()
}

#[test]
fn malformed_images_are_rejected_with_typed_errors() {
    let check = |name: &str, ok: fn(&Error) -> bool| {
        let err = decode_image(&malformed(name)).unwrap_err();
        assert!(ok(&err), "{name}: {err:?}");
    };
    check("ascii_p2.pgm", |e| matches!(e, Error::UnsupportedFormat(_)));
    check("bad_magic.pgm", |e| matches!(e, Error::MalformedHeader(_)));
    check("truncated.pgm", |e| matches!(e, Error::TruncatedPayload { expected: 16, found: 10 }));
    check("trailing.pgm", |e| matches!(e, Error::TrailingData(2)));
    check("maxval_zero.pgm", |e| matches!(e, Error::UnsupportedFormat(_)));
    check("missing_height.pgm", |e| matches!(e, Error::MalformedHeader(_)));
    check("sample_over_maxval.pgm", |e| matches!(e, Error::MalformedHeader(_)));
    check("huge_dims.pgm", |e| matches!(e, Error::SizeOverflow { .. }));
}

#[test]
fn malformed_masks_are_rejected_with_typed_errors() {
    assert!(matches!(
        decode_mask(&malformed("mask_gray_value.pgm")),
        Err(Error::InvalidMaskValue { value: 128, index: 2 })
    ));
    assert!(matches!(decode_mask(&malformed("mask_bad_fsr.pgm")), Err(Error::MalformedHeader(_))));
    assert!(decode_mask(&malformed("mask_incomplete_fsr.pgm")).is_err());
    assert!(decode_mask(&malformed("truncated.pgm")).is_err());
}

#[test]
fn malformed_complex_arrays_are_rejected_with_typed_errors() {
    assert!(matches!(decode_complex(&malformed("csi_bad_magic.csi")), Err(Error::BadMagic)));
    assert!(matches!(
        decode_complex(&malformed("csi_truncated.csi")),
        Err(Error::TruncatedPayload { expected: 64, found: 40 })
    ));
    assert!(matches!(decode_complex(&malformed("csi_zero_dims.csi")), Err(Error::MalformedHeader(_))));
    assert!(matches!(decode_complex(&malformed("csi_nan.csi")), Err(Error::NonFinite(0))));
    assert!(matches!(decode_complex(&malformed("csi_short_header.csi")), Err(Error::MalformedHeader(_))));
}

#[test]
fn mask_with_fsr_round_trips_through_file() {
    let dir = std::env::temp_dir().join(format!("msbpd-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mask.pgm");
    let mask = gen_laplacian_mask(64, 48, 0.2, 0.2, 3, Some(3)).unwrap();
    save_mask(&path, &mask).unwrap();
    let back = load_mask(&path).unwrap();
    assert_eq!(back, mask);
    assert_eq!(back.fsr_extent(), Some((8, 6)));
    assert!(back.contains(&fsr_mask(64, 48, 3).unwrap()));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn eight_bit_image_round_trip_is_exact() {
    let img = RealImage::from_fn(5, 7, |r, c| ((r * 7 + c) * 7 % 256) as f64 / 255.0);
    let bytes = encode_image(&img);
    let back = decode_image(&bytes).unwrap();
    assert_eq!(back.real_part(), img);
    assert_eq!(encode_image(&back.real_part()), bytes);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE)]
}

proptest! {
    #[test]
    fn complex_round_trip_is_bit_exact(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f64::from_bits(state >> 2 | 0x3000_0000_0000_0000) * if state & 1 == 0 { 1.0 } else { -1.0 }
        };
        let img = ComplexImage::from_fn(rows, cols, |_, _| C64::new(next(), next()));
        let back = decode_complex(&encode_complex(&img).unwrap()).unwrap();
        prop_assert_eq!(back.shape(), img.shape());
        for (a, b) in back.as_slice().iter().zip(img.as_slice()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn complex_round_trip_special_values(values in prop::collection::vec((finite(), finite()), 1..40)) {
        let n = values.len();
        let img = ComplexImage::new(1, n, values.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
        let back = decode_complex(&encode_complex(&img).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(img.as_slice()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn mask_round_trip_is_exact(rows in 1usize..20, cols in 1usize..20, bits in prop::collection::vec(any::<bool>(), 400)) {
        let mut sampled = bits[..rows * cols].to_vec();
        sampled[0] = true;
        let mask = SamplingMask::new(rows, cols, sampled, None).unwrap();
        prop_assert_eq!(decode_mask(&encode_mask(&mask)).unwrap(), mask);
    }

    #[test]
    fn pgm_round_trip_is_exact(width in 1usize..10, height in 1usize..10, maxval in 1u16..=65535, raw in prop::collection::vec(any::<u16>(), 100)) {
        let samples: Vec<u16> = raw[..width * height].iter().map(|v| v % (maxval as u32 + 1) as u16).collect();
        let pgm = Pgm { width, height, maxval, samples, comments: vec!["note".into()] };
        let back = decode_pgm(&encode_pgm(&pgm)).unwrap();
        prop_assert_eq!(back, pgm);
    }

    #[test]
    fn decoders_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = decode_pgm(&bytes);
        let _ = decode_mask(&bytes);
        let _ = decode_complex(&bytes);
        let mut prefixed = b"P5\n".to_vec();
        prefixed.extend_from_slice(&bytes);
        let _ = decode_image(&prefixed);
    }
}
