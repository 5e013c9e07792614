use hci_core::frame::{decode_stream, encode_stream, stream_file_len};
use hci_core::{read_stream, write_stream, DepthFrame, RecordedStream, SkeletonFrame, StreamFrame};
use proptest::prelude::*;

fn arb_stream() -> impl Strategy<Value = RecordedStream> {
    (1u32..7, 1u32..7, 1u32..61, 0usize..5).prop_flat_map(|(w, h, fps, n)| {
        let px = (w * h) as usize;
        let frame = (
            prop::collection::vec((0u16..4000, 0u8..7), px),
            prop::array::uniform5(prop::array::uniform3(0f32..3000.0)),
            1u64..500,
        );
        prop::collection::vec(frame, n).prop_map(move |frames| {
            let mut s = RecordedStream::new(w, h, fps);
            let mut t = 0u64;
            for (pixels, joints, dt) in frames {
                t += dt;
                let (depth, player_index): (Vec<u16>, Vec<u8>) = pixels
                    .into_iter()
                    .map(|(d, p)| if d == 0 { (0, 0) } else { (d, p) })
                    .unzip();
                s.frames.push(StreamFrame {
                    depth: DepthFrame { width: w as usize, height: h as usize, depth, player_index, timestamp_ms: t },
                    skeleton: SkeletonFrame { joints, timestamp_ms: t },
                });
            }
            s
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bytes_and_values_round_trip(s in arb_stream()) {
        let bytes = encode_stream(&s).unwrap();
        prop_assert_eq!(bytes.len() as u64, stream_file_len(s.header.width, s.header.height, s.frames.len() as u32));
        let back = decode_stream(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(encode_stream(&back).unwrap(), bytes);
    }
}

#[test]
fn file_length_matches_formula_sweep() {
    let dir = tempfile::tempdir().unwrap();
    for (w, h, n) in [(1, 1, 0), (1, 1, 3), (4, 4, 1), (7, 3, 2), (16, 9, 5)] {
        let mut s = RecordedStream::new(w, h, 30);
        for k in 0..n {
            s.frames.push(StreamFrame {
                depth: DepthFrame::empty(w as usize, h as usize, k as u64),
                skeleton: SkeletonFrame { joints: [[0.0; 3]; 5], timestamp_ms: k as u64 },
            });
        }
        let p = dir.path().join(format!("{w}x{h}x{n}.kds"));
        let written = write_stream(&s, &p).unwrap();
        let on_disk = std::fs::metadata(&p).unwrap().len();
        assert_eq!(written, on_disk);
        assert_eq!(on_disk, 24 + n as u64 * (w as u64 * h as u64 * 3 + 5 * 12 + 8));
        assert_eq!(read_stream(&p).unwrap(), s);
    }
}

#[test]
fn trailing_garbage_is_rejected() {
    let s = RecordedStream::new(2, 2, 30);
    let mut bytes = encode_stream(&s).unwrap();
    bytes.push(0);
    assert!(decode_stream(&bytes).is_err());
}
