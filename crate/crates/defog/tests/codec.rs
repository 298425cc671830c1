use std::fs;

use defog::{load_image, save_image, DefogError};
use defog_core::PlanarImage;
use proptest::prelude::*;

fn write_png_rgb8(path: &std::path::Path, w: u32, h: u32, px: [u8; 3]) {
    let img = image::RgbImage::from_pixel(w, h, image::Rgb(px));
    img.save(path).unwrap();
}

#[test]
fn eight_bit_samples_scale_by_255() {
    let dir = tempfile::tempdir().unwrap();
    let white = dir.path().join("white.png");
    write_png_rgb8(&white, 3, 3, [255, 255, 255]);
    assert!(load_image(&white).unwrap().data().iter().all(|&v| v == 1.0));

    let black = dir.path().join("black.png");
    write_png_rgb8(&black, 3, 3, [0, 0, 0]);
    assert!(load_image(&black).unwrap().data().iter().all(|&v| v == 0.0));

    let mid = dir.path().join("mid.png");
    write_png_rgb8(&mid, 4, 3, [128, 0, 255]);
    let img = load_image(&mid).unwrap();
    assert_eq!((img.height(), img.width(), img.channels()), (3, 4, 3));
    assert_eq!(img.get(1, 2, 0), 128.0 / 255.0);
    assert!((img.get(1, 2, 0) - 0.50196).abs() < 1e-5);
}

#[test]
fn sixteen_bit_and_gray_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let p16 = dir.path().join("deep.png");
    image::ImageBuffer::<image::Rgb<u16>, _>::from_pixel(3, 3, image::Rgb([65535u16, 32768, 0])).save(&p16).unwrap();
    let img = load_image(&p16).unwrap();
    assert_eq!(img.get(0, 0, 0), 1.0);
    assert_eq!(img.get(0, 0, 1), 32768.0 / 65535.0);

    let gray = dir.path().join("gray.png");
    image::GrayImage::from_pixel(5, 4, image::Luma([51])).save(&gray).unwrap();
    let img = load_image(&gray).unwrap();
    assert_eq!(img.channels(), 3);
    assert!(img.data().iter().all(|&v| v == 0.2));
}

#[test]
fn binary_ppm_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.ppm");
    let mut bytes = b"P6\n3 3\n255\n".to_vec();
    for k in 0..9u8 {
        bytes.extend_from_slice(&[k * 10, 255 - k, 7]);
    }
    fs::write(&path, bytes).unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.get(2, 2, 0), 80.0 / 255.0);
    assert_eq!(img.get(0, 1, 1), 254.0 / 255.0);
}

#[test]
fn rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_image(dir.path().join("missing.png")), Err(DefogError::Io { .. })));

    let ascii = dir.path().join("ascii.ppm");
    fs::write(&ascii, "P3\n3 3\n255\n0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n").unwrap();
    assert!(matches!(load_image(&ascii), Err(DefogError::Format { .. })));

    let bmp = dir.path().join("x.bmp");
    fs::write(&bmp, b"BM not really").unwrap();
    assert!(matches!(load_image(&bmp), Err(DefogError::Format { .. })));

    let tiny = dir.path().join("tiny.png");
    write_png_rgb8(&tiny, 2, 5, [1, 2, 3]);
    assert!(matches!(load_image(&tiny), Err(DefogError::TooSmall { .. })));

    let img = PlanarImage::constant(3, 3, 3, 0.5).unwrap();
    assert!(matches!(save_image(&img, dir.path().join("no/such/dir/out.png")), Err(DefogError::Io { .. })));
}

#[test]
fn saved_samples_round_to_nearest_level() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.png");
    let img = PlanarImage::from_fn(3, 3, 3, |i, _, _| [0.0, 0.5, 1.0][i]).unwrap();
    save_image(&img, &path).unwrap();
    let raw = image::open(&path).unwrap().to_rgb8();
    assert_eq!(raw.get_pixel(0, 0).0, [0, 0, 0]);
    assert_eq!(raw.get_pixel(0, 1).0, [128, 128, 128]);
    assert_eq!(raw.get_pixel(0, 2).0, [255, 255, 255]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_error_is_half_a_level(data in prop::collection::vec(0.0f64..=1.0, 5 * 6 * 3)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        let img = PlanarImage::new(5, 6, 3, data).unwrap();
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
        }
    }
}
