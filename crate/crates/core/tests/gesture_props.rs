use hci_core::gesture::{normalized_distance, TrajectorySample};
use hci_core::{quantize_trajectory, DirectionString, Trajectory, Vec3};
use proptest::prelude::*;

fn traj(points: &[Vec3]) -> Trajectory {
    Trajectory::new(points.iter().enumerate().map(|(k, &pos)| TrajectorySample { t_ms: k as u64 * 33, pos }).collect()).unwrap()
}

fn arb_points() -> impl Strategy<Value = Vec<Vec3>> {
    prop::collection::vec((-400.0f64..400.0, -400.0f64..400.0, 500.0f64..2500.0), 0..30)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect())
}

proptest! {
    #[test]
    fn translation_invariant(points in arb_points(), dx in -500.0f64..500.0, dy in -500.0f64..500.0, dz in -300.0f64..300.0) {
        // offsets on a 1/8 mm grid keep the differences exact
        let shift = Vec3::new((dx * 8.0).round() / 8.0, (dy * 8.0).round() / 8.0, (dz * 8.0).round() / 8.0);
        let grid: Vec<Vec3> = points.iter().map(|p| Vec3::new((p.x * 8.0).round() / 8.0, (p.y * 8.0).round() / 8.0, (p.z * 8.0).round() / 8.0)).collect();
        let moved: Vec<Vec3> = grid.iter().map(|&p| p + shift).collect();
        prop_assert_eq!(quantize_trajectory(&traj(&grid), 40.0), quantize_trajectory(&traj(&moved), 40.0));
    }

    #[test]
    fn scale_invariant_when_every_step_emits(steps in prop::collection::vec((-300.0f64..300.0, -300.0f64..300.0, -100.0f64..100.0), 1..20), k in 1.0f64..4.0) {
        let min_step = 40.0;
        let steps: Vec<Vec3> = steps.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).filter(|s| s.norm() > min_step).collect();
        let walk = |scale: f64| {
            let mut p = Vec3::new(0.0, 0.0, 1500.0);
            let mut pts = vec![p];
            for s in &steps {
                p = p + *s * scale;
                pts.push(p);
            }
            pts
        };
        prop_assert_eq!(quantize_trajectory(&traj(&walk(1.0)), min_step), quantize_trajectory(&traj(&walk(k)), min_step));
    }

    #[test]
    fn mirror_symmetry(points in arb_points()) {
        let mirrored: Vec<Vec3> = points.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        let a = quantize_trajectory(&traj(&points), 40.0);
        let b = quantize_trajectory(&traj(&mirrored), 40.0);
        prop_assert_eq!(a.mirror_x(), b);
    }

    #[test]
    fn distance_bounds(a in arb_points(), b in arb_points()) {
        let sa = quantize_trajectory(&traj(&a), 40.0);
        let sb = quantize_trajectory(&traj(&b), 40.0);
        let d = normalized_distance(&sa, &sb);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(normalized_distance(&sa, &sa), 0.0);
        prop_assert_eq!(d, normalized_distance(&sb, &sa));
    }

    #[test]
    fn no_consecutive_duplicates(points in arb_points()) {
        let s: DirectionString = quantize_trajectory(&traj(&points), 25.0);
        prop_assert!(s.symbols().windows(2).all(|w| w[0] != w[1]));
    }
}
