use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Barrier};
use std::thread;

use micromvp::netlink::*;
use proptest::prelude::*;

fn tag(id: u32, x: f64, y: f64, th: f64) -> TagPose {
    TagPose { id, x, y, th }
}

#[test]
fn pose_golden_lines() {
    let empty = PoseFrame::new(0.0, vec![]).unwrap();
    assert_eq!(encode_pose_frame(&empty), "{\"t\":0,\"poses\":[]}\n");
    assert_eq!(decode_pose_frame("{\"t\":0,\"poses\":[]}\n").unwrap(), empty);

    let f = PoseFrame::new(0.5, vec![tag(3, 0.1, 0.2, 0.3), tag(1, 1.0, 2.0, -1.5)]).unwrap();
    let line = encode_pose_frame(&f);
    assert!(line.find("\"id\":1").unwrap() < line.find("\"id\":3").unwrap());
    assert!(line.ends_with('\n') && line.matches('\n').count() == 1);
}

#[test]
fn pose_decode_errors_name_the_field() {
    let dup = r#"{"t":1,"poses":[{"id":2,"x":0,"y":0,"th":0},{"id":2,"x":1,"y":0,"th":0}]}"#;
    assert!(decode_pose_frame(dup).unwrap_err().to_string().contains("duplicate id"));
    let missing = r#"{"t":1,"poses":[{"id":2,"x":0,"th":0}]}"#;
    assert!(decode_pose_frame(missing).unwrap_err().to_string().contains('y'));
    assert!(decode_pose_frame(r#"{"poses":[]}"#).unwrap_err().to_string().contains('t'));
    assert!(decode_pose_frame("{not json").is_err());
}

#[test]
fn pose_decode_renormalizes_heading() {
    let f = decode_pose_frame(r#" { "t" : 2 , "poses" : [ {"id":0,"x":0,"y":0,"th":7.0} ] } "#).unwrap();
    let expected = 7.0 - std::f64::consts::TAU;
    assert!((f.poses[0].th - expected).abs() < 1e-15);
}

#[test]
fn thrust_golden_bytes() {
    let f = ThrustFrame::new(3, 70, -70).unwrap();
    let bytes = encode_thrust_frame(&f);
    assert_eq!(bytes, [0xA5, 0x03, 0x46, 0xBA, 0x5A]);
    // Independent recomputation of the checksum chain.
    assert_eq!(bytes[..4].iter().fold(0u8, |a, b| a ^ b), 0x5A);
    assert_eq!(decode_thrust_frame(&bytes).unwrap(), f);
    assert_eq!(encode_thrust_frame(&ThrustFrame::new(0, 0, 0).unwrap()), [0xA5, 0, 0, 0, 0xA5]);
    assert!(decode_thrust_frame(&[0xA5, 0x03, 0x46, 0xBA, 0x5B]).unwrap_err().to_string().contains("checksum"));
}

#[test]
fn thrust_range_error() {
    // 101 with a correct checksum.
    let mut b = [0xA5, 1, 101, 0, 0];
    b[4] = b[..4].iter().fold(0, |a, x| a ^ x);
    assert!(decode_thrust_frame(&b).unwrap_err().to_string().contains("range"));
    assert!(ThrustFrame::new(1, -101, 0).is_err());
}

#[test]
fn decoder_resyncs_after_garbage() {
    let good = ThrustFrame::new(9, -12, 55).unwrap();
    let mut dec = ThrustDecoder::new();
    dec.push(&[0x00, 0xA5, 0x13]);
    dec.push(&encode_thrust_frame(&good));
    let out = dec.drain_frames();
    assert_eq!(out.last(), Some(&good));
}

#[test]
fn every_single_byte_corruption_is_detected() {
    for id in [0u8, 7, 255] {
        for (l, r) in [(0i8, 0i8), (100, -100), (-37, 64)] {
            let f = ThrustFrame::new(id, l, r).unwrap();
            let bytes = encode_thrust_frame(&f);
            for pos in 0..5 {
                for alt in 0..=255u8 {
                    if alt == bytes[pos] {
                        continue;
                    }
                    let mut b = bytes;
                    b[pos] = alt;
                    if let Ok(g) = decode_thrust_frame(&b) {
                        panic!("corruption at {pos} -> {alt:#04x} decoded as {g:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn lossy_send_extremes() {
    let frames: Vec<ThrustFrame> = (0..300).map(|i| ThrustFrame::new(i as u8, 10, -10).unwrap()).collect();
    assert_eq!(lossy_send(&frames, &LinkConfig::default()).unwrap(), frames);
    let dead = LinkConfig {
        drop_probability: 1.0,
        ..Default::default()
    };
    assert!(lossy_send(&frames, &dead).unwrap().is_empty());
}

#[test]
fn lossy_send_binomial_bound() {
    let frames: Vec<ThrustFrame> = (0..100_000).map(|i| ThrustFrame::new((i % 256) as u8, 1, 1).unwrap()).collect();
    for seed in 0..3 {
        let cfg = LinkConfig {
            drop_probability: 0.1,
            latency: 0.02,
            seed,
        };
        let n = lossy_send(&frames, &cfg).unwrap().len() as f64 / frames.len() as f64;
        assert!((0.894..=0.906).contains(&n), "seed {seed}: delivered fraction {n}");
    }
}

#[test]
fn survivors_keep_order() {
    let frames: Vec<ThrustFrame> = (0..1000).map(|i| ThrustFrame::new((i % 256) as u8, (i % 100) as i8, 0).unwrap()).collect();
    let cfg = LinkConfig {
        drop_probability: 0.3,
        latency: 0.0,
        seed: 11,
    };
    let out = lossy_send(&frames, &cfg).unwrap();
    // Delivered frames form a subsequence of the sent ones.
    let mut it = frames.iter();
    for f in &out {
        assert!(it.any(|g| g == f));
    }
}

#[test]
fn bus_latest_and_subset() {
    let (publisher, sub) = pose_bus();
    assert_eq!(sub.latest(None), Err(NetError::NoData));
    let f1 = PoseFrame::new(1.0, vec![tag(1, 0.0, 0.0, 0.0)]).unwrap();
    let f2 = PoseFrame::new(2.0, vec![tag(1, 0.1, 0.0, 0.0), tag(2, 0.2, 0.0, 0.0), tag(3, 0.3, 0.0, 0.0)]).unwrap();
    publisher.publish(f1).unwrap();
    publisher.publish(f2.clone()).unwrap();
    assert_eq!(sub.latest(None).unwrap(), f2);
    let only = sub.latest(Some(&[1])).unwrap();
    assert_eq!(only.ids().collect::<Vec<_>>(), vec![1]);
}

#[test]
fn bus_concurrent_subscribers_see_whole_frames() {
    const PUBLISHES: u32 = 10_000;
    let (publisher, sub) = pose_bus();
    let done = Arc::new(AtomicBool::new(false));
    let start = Arc::new(Barrier::new(5));
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let sub = sub.clone();
            let done = done.clone();
            let start = start.clone();
            thread::spawn(move || {
                let mut last = f64::NEG_INFINITY;
                let mut seen = 0u64;
                start.wait();
                loop {
                    // Checked before reading so the last pass sees the final frame.
                    let finished = done.load(Ordering::Acquire);
                    let Ok(f) = sub.latest(None) else { continue };
                    // Every pose in a published frame carries its timestamp.
                    assert_eq!(f.poses.len(), 3);
                    assert!(f.poses.iter().all(|p| p.x == f.t && p.y == -f.t));
                    assert!(f.t >= last, "time went back: {last} -> {}", f.t);
                    assert!(f.t.fract() == 0.0 && f.t < PUBLISHES as f64);
                    last = f.t;
                    seen += 1;
                    if finished {
                        break seen;
                    }
                }
            })
        })
        .collect();
    start.wait();
    for k in 0..PUBLISHES {
        let t = k as f64;
        let f = PoseFrame::new(t, (0..3).map(|id| tag(id, t, -t, 0.0)).collect()).unwrap();
        publisher.publish(f).unwrap();
    }
    done.store(true, Ordering::Release);
    for r in readers {
        assert!(r.join().unwrap() > 0);
    }
    assert_eq!(sub.latest(None).unwrap().t, (PUBLISHES - 1) as f64);
}

fn tag_strategy() -> impl Strategy<Value = TagPose> {
    (any::<u32>(), -1e3..1e3f64, -1e3..1e3f64, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(id, x, y, th)| tag(id, x, y, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pose_roundtrip(t in 0.0..1e6f64, poses in prop::collection::vec(tag_strategy(), 0..20)) {
        let mut poses = poses;
        poses.sort_by_key(|p| p.id);
        poses.dedup_by_key(|p| p.id);
        let f = PoseFrame::new(t, poses).unwrap();
        prop_assert_eq!(decode_pose_frame(&encode_pose_frame(&f)).unwrap(), f);
    }

    #[test]
    fn thrust_roundtrip(id in any::<u8>(), l in -100i8..=100, r in -100i8..=100) {
        let f = ThrustFrame::new(id, l, r).unwrap();
        prop_assert_eq!(decode_thrust_frame(&encode_thrust_frame(&f)).unwrap(), f);
    }

    #[test]
    fn decoder_recovers_frames_after_noise(noise in prop::collection::vec(any::<u8>().prop_filter("no header", |b| *b != THRUST_HEADER), 0..16),
                                           id in any::<u8>(), l in -100i8..=100, r in -100i8..=100) {
        let f = ThrustFrame::new(id, l, r).unwrap();
        let mut dec = ThrustDecoder::new();
        dec.push(&noise);
        dec.push(&encode_thrust_frame(&f));
        prop_assert_eq!(dec.drain_frames(), vec![f]);
    }
}
