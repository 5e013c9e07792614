use hci_core::segmentation::BinaryMask;
use hci_core::{compute_alpha, smooth_mask, DepthFrame, SegmentationParams};
use proptest::prelude::*;

fn alpha_at(depth: u16, p: &SegmentationParams) -> u8 {
    let f = DepthFrame { width: 1, height: 1, depth: vec![depth], player_index: vec![p.target_player], timestamp_ms: 0 };
    compute_alpha(&f, p).alpha[0]
}

fn arb_params() -> impl Strategy<Value = SegmentationParams> {
    (300.0f64..4000.0, 1.0f64..400.0, 1.0f64..400.0, 1u8..7).prop_map(|(doh, d, u, player)| SegmentationParams {
        depth_of_hand: doh,
        d_limit: d,
        u_limit: u,
        target_player: player,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn alpha_is_monotone_in_depth(p in arb_params(), a in 1u16..u16::MAX, b in 1u16..u16::MAX) {
        let (near, far) = (a.min(b), a.max(b));
        prop_assert!(alpha_at(near, &p) >= alpha_at(far, &p));
    }

    #[test]
    fn positive_alpha_implies_inside_far_limit(p in arb_params(), d in 1u16..u16::MAX) {
        if alpha_at(d, &p) > 0 {
            prop_assert!((d as f64) < p.depth_of_hand + p.u_limit);
        }
    }

    #[test]
    fn alpha_matches_direct_formula(p in arb_params(), d in 1u16..u16::MAX) {
        let direct = 255.0 - 255.0 * (d as f64 - p.depth_of_hand + p.d_limit) / (p.d_limit + p.u_limit);
        let expected = if direct <= 0.0 { 0 } else if direct >= 255.0 { 255 } else { direct as u8 };
        prop_assert_eq!(alpha_at(d, &p), expected);
    }

    #[test]
    fn smoothing_keeps_uniform_neighborhoods(w in 3usize..24, h in 3usize..24, seed in prop::collection::vec(any::<bool>(), 24 * 24)) {
        let m = BinaryMask::from_fn(w, h, |x, y| seed[y * 24 + x]);
        let s = smooth_mask(&m);
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let v = m.get(x, y);
                let uniform = (y - 1..=y + 1).all(|yy| (x - 1..=x + 1).all(|xx| m.get(xx, yy) == v));
                if uniform {
                    prop_assert_eq!(s.get(x, y), v);
                }
            }
        }
    }
}
