use hci_core::frame::validate_frame;
use hci_core::sim::render_depth_frame;
use hci_core::sim::synthesize_stream;
use hci_core::SceneScript;
use proptest::prelude::*;

fn sphere_scene(x: f64, y: f64, z: f64, radius: f64) -> SceneScript {
    let json = format!(
        r#"{{
            "camera": {{"fx": 525, "fy": 525, "cx": 160, "cy": 120}},
            "resolution": {{"width": 320, "height": 240}},
            "fps": 30, "duration_ms": 0,
            "hand": {{"radius": {radius}, "keyframes": [[0, {x}, {y}, {z}]]}}
        }}"#
    );
    SceneScript::from_json(&json).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sphere_rows_are_single_runs(x in -150.0f64..150.0, y in -100.0f64..100.0, z in 700.0f64..2500.0, r in 20.0f64..90.0) {
        let f = render_depth_frame(&sphere_scene(x, y, z, r), 0).unwrap();
        for v in 0..f.height {
            let row: Vec<bool> = (0..f.width).map(|u| f.player_index[f.index(u, v)] != 0).collect();
            let starts = row.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(row[0]);
            prop_assert!(starts <= 1, "row {} has {} runs", v, starts);
        }
    }

    // Near the optical axis the apex of the sphere projects onto the center pixel.
    #[test]
    fn center_pixel_is_nearest(x in -60.0f64..60.0, y in -60.0f64..60.0, z in 900.0f64..2000.0, r in 30.0f64..80.0) {
        let scene = sphere_scene(x, y, z, r);
        let f = render_depth_frame(&scene, 0).unwrap();
        let u = (525.0 * x / z + 160.0).round() as usize;
        let v = (525.0 * y / z + 120.0).round() as usize;
        let center = f.depth[f.index(u, v)];
        prop_assert!(f.player_index[f.index(u, v)] != 0);
        let min = (0..f.depth.len()).filter(|&i| f.player_index[i] != 0).map(|i| f.depth[i]).min().unwrap();
        prop_assert!(center <= min + 1, "center {} min {}", center, min);
    }

    #[test]
    fn synthesized_frames_are_valid(x in -200.0f64..200.0, z in 600.0f64..3000.0, sigma in 0.0f64..20.0, seed in any::<u64>()) {
        let mut scene = sphere_scene(x, 0.0, z, 50.0);
        scene.duration_ms = 200;
        scene.noise_sigma_mm = sigma;
        scene.seed = seed;
        let stream = synthesize_stream(&scene).unwrap();
        prop_assert_eq!(stream.frames.len(), 7);
        for fr in &stream.frames {
            prop_assert!(validate_frame(&fr.depth).is_empty());
        }
        prop_assert!(stream.check().is_ok());
    }
}
