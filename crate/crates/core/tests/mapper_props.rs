use hci_core::mapper::MapperConfig;
use hci_core::{CommandKind, CommandMapper, GestureLibrary, HandPose, Vec3};
use proptest::prelude::*;

fn arb_pose() -> impl Strategy<Value = HandPose> {
    prop_oneof![Just(HandPose::Fist), Just(HandPose::Open), Just(HandPose::Unknown)]
}

/// Transition counter over known poses, ignoring any FIST run before the first OPEN.
fn edge_balance(poses: &[HandPose]) -> i64 {
    let known: Vec<HandPose> = poses.iter().copied().filter(|p| p.is_known()).skip_while(|&p| p == HandPose::Fist).collect();
    let mut bal = 0;
    for w in known.windows(2) {
        match (w[0], w[1]) {
            (HandPose::Open, HandPose::Fist) => bal += 1,
            (HandPose::Fist, HandPose::Open) => bal -= 1,
            _ => {}
        }
    }
    bal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn click_edge_discipline(poses in prop::collection::vec(arb_pose(), 0..80)) {
        let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
        let mut balance = 0i64;
        for (k, &p) in poses.iter().enumerate() {
            let events = m.step(k as u64 * 33, p, Vec3::new(10.0, -20.0, 1200.0), Vec3::new(0.0, 0.0, 1500.0)).unwrap();
            if p == HandPose::Unknown {
                prop_assert!(events.is_empty());
            }
            for e in &events {
                match e.kind {
                    CommandKind::ClickDown => balance += 1,
                    CommandKind::ClickUp => balance -= 1,
                    _ => {}
                }
                prop_assert!(balance == 0 || balance == 1);
            }
            prop_assert_eq!(balance, edge_balance(&poses[..=k]));
        }
    }

    #[test]
    fn identical_inputs_identical_events(poses in prop::collection::vec((arb_pose(), -300.0f64..300.0, -300.0f64..300.0), 0..60)) {
        let run = || {
            let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
            poses.iter().enumerate().flat_map(|(k, &(p, x, y))| {
                m.step(k as u64 * 33, p, Vec3::new(x, y, 1200.0), Vec3::new(0.0, 0.0, 1500.0)).unwrap()
            }).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn cursor_stays_on_screen(x in -2000.0f64..2000.0, y in -2000.0f64..2000.0, w in 1u32..4000, h in 1u32..3000, mirror in any::<bool>()) {
        let cfg = MapperConfig { screen: (w, h), mirror_x: mirror, ..MapperConfig::default() };
        let mut m = CommandMapper::new(cfg, GestureLibrary::default());
        let ev = m.step(0, HandPose::Open, Vec3::new(x, y, 1000.0), Vec3::ZERO).unwrap();
        match ev[0].kind {
            CommandKind::CursorMove { x, y } => prop_assert!(x < w && y < h),
            ref other => prop_assert!(false, "unexpected {:?}", other),
        }
    }
}
