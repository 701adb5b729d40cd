use serde::{Deserialize, Serialize};

use super::NetError;
use crate::vehicle::WheelThrust;

pub const THRUST_HEADER: u8 = 0xA5;
pub const THRUST_FRAME_LEN: usize = 5;

/// One controller-to-vehicle wheel command in whole percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThrustFrame {
    pub vehicle_id: u8,
    pub left_pct: i8,
    pub right_pct: i8,
}

impl ThrustFrame {
    pub fn new(vehicle_id: u8, left_pct: i8, right_pct: i8) -> Result<Self, NetError> {
        for p in [left_pct, right_pct] {
            if !(-100..=100).contains(&p) {
                return Err(NetError::Range(p));
            }
        }
        Ok(Self {
            vehicle_id,
            left_pct,
            right_pct,
        })
    }

    /// Rounds each wheel to the nearest percent.
    pub fn from_thrust(vehicle_id: u8, thrust: WheelThrust) -> Self {
        let pct = |v: f64| (v * 100.0).round().clamp(-100.0, 100.0) as i8;
        Self {
            vehicle_id,
            left_pct: pct(thrust.left()),
            right_pct: pct(thrust.right()),
        }
    }

    pub fn thrust(&self) -> WheelThrust {
        WheelThrust::clamped(f64::from(self.left_pct) / 100.0, f64::from(self.right_pct) / 100.0)
    }

    pub fn is_valid(&self) -> bool {
        (-100..=100).contains(&self.left_pct) && (-100..=100).contains(&self.right_pct)
    }
}

pub fn encode_thrust_frame(frame: &ThrustFrame) -> [u8; THRUST_FRAME_LEN] {
    let b = [THRUST_HEADER, frame.vehicle_id, frame.left_pct as u8, frame.right_pct as u8];
    [b[0], b[1], b[2], b[3], b[0] ^ b[1] ^ b[2] ^ b[3]]
}

/// Scans `bytes` for the first header and tries to decode one frame there.
///
/// Returns how many bytes were consumed and the outcome, if any. Leading
/// non-header bytes are always consumed. A bad checksum consumes only the
/// header byte so that a real header inside the corrupt frame can still be
/// found; a range error consumes the whole frame. `None` means more bytes are
/// needed.
pub fn scan_thrust_frame(bytes: &[u8]) -> (usize, Option<Result<ThrustFrame, NetError>>) {
    let Some(start) = bytes.iter().position(|&b| b == THRUST_HEADER) else {
        return (bytes.len(), None);
    };
    let rest = &bytes[start..];
    if rest.len() < THRUST_FRAME_LEN {
        return (start, None);
    }
    let expected = rest[0] ^ rest[1] ^ rest[2] ^ rest[3];
    if expected != rest[4] {
        return (start + 1, Some(Err(NetError::Checksum { expected, got: rest[4] })));
    }
    let frame = ThrustFrame {
        vehicle_id: rest[1],
        left_pct: rest[2] as i8,
        right_pct: rest[3] as i8,
    };
    let outcome = match [frame.left_pct, frame.right_pct].into_iter().find(|p| !(-100..=100).contains(p)) {
        Some(p) => Err(NetError::Range(p)),
        None => Ok(frame),
    };
    (start + THRUST_FRAME_LEN, Some(outcome))
}

/// Decodes the first frame found in `bytes`.
pub fn decode_thrust_frame(bytes: &[u8]) -> Result<ThrustFrame, NetError> {
    match scan_thrust_frame(bytes) {
        (_, Some(r)) => r,
        (used, None) => Err(NetError::Incomplete {
            need: THRUST_FRAME_LEN,
            have: bytes.len() - used.min(bytes.len()),
        }),
    }
}

/// Receiver-side byte stream reassembly.
#[derive(Debug, Default, Clone)]
pub struct ThrustDecoder {
    buf: Vec<u8>,
    checksum_errors: usize,
    range_errors: usize,
}

impl ThrustDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next decoded frame, or an error for a discarded one. `None` once the
    /// buffer holds no complete frame.
    pub fn next_frame(&mut self) -> Option<Result<ThrustFrame, NetError>> {
        let (used, outcome) = scan_thrust_frame(&self.buf);
        self.buf.drain(..used);
        if let Some(Err(e)) = &outcome {
            match e {
                NetError::Checksum { .. } => self.checksum_errors += 1,
                NetError::Range(_) => self.range_errors += 1,
                _ => {}
            }
        }
        outcome
    }

    /// All frames currently decodable; errors are counted and skipped.
    pub fn drain_frames(&mut self) -> Vec<ThrustFrame> {
        let mut out = Vec::new();
        while let Some(r) = self.next_frame() {
            if let Ok(f) = r {
                out.push(f);
            }
        }
        out
    }

    pub fn checksum_errors(&self) -> usize {
        self.checksum_errors
    }

    pub fn range_errors(&self) -> usize {
        self.range_errors
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_bytes() {
        let f = ThrustFrame::new(3, 70, -70).unwrap();
        assert_eq!(encode_thrust_frame(&f), [0xA5, 0x03, 0x46, 0xBA, 0x5A]);
        assert_eq!(decode_thrust_frame(&[0xA5, 0x03, 0x46, 0xBA, 0x5A]).unwrap(), f);
        let z = ThrustFrame::new(0, 0, 0).unwrap();
        assert_eq!(encode_thrust_frame(&z), [0xA5, 0, 0, 0, 0xA5]);
    }

    #[test]
    fn checksum_error() {
        let err = decode_thrust_frame(&[0xA5, 0x03, 0x46, 0xBA, 0x5B]).unwrap_err();
        assert!(matches!(err, NetError::Checksum { .. }));
        assert!(err.to_string().contains("checksum"));
    }

    #[test]
    fn range_error() {
        let b = [0xA5u8, 1, 101, 0];
        let bytes = [b[0], b[1], b[2], b[3], b[0] ^ b[1] ^ b[2] ^ b[3]];
        let err = decode_thrust_frame(&bytes).unwrap_err();
        assert_eq!(err, NetError::Range(101));
        assert!(err.to_string().contains("range"));
        assert!(ThrustFrame::new(0, -101, 0).is_err());
    }

    #[test]
    fn resync_after_garbage() {
        let f = ThrustFrame::new(9, -100, 100).unwrap();
        let mut bytes = vec![0x00, 0x13];
        bytes.extend_from_slice(&encode_thrust_frame(&f));
        assert_eq!(decode_thrust_frame(&bytes).unwrap(), f);
        // A stray header byte costs one checksum error, then the real frame decodes.
        let mut dec = ThrustDecoder::new();
        dec.push(&[0xA5]);
        dec.push(&encode_thrust_frame(&f));
        assert!(matches!(dec.next_frame(), Some(Err(NetError::Checksum { .. }))));
        assert_eq!(dec.next_frame(), Some(Ok(f)));
        assert_eq!(dec.next_frame(), None);
    }

    #[test]
    fn incomplete() {
        assert!(matches!(decode_thrust_frame(&[0xA5, 1, 2]), Err(NetError::Incomplete { .. })));
        let mut dec = ThrustDecoder::new();
        let bytes = encode_thrust_frame(&ThrustFrame::new(1, 2, 3).unwrap());
        dec.push(&bytes[..2]);
        assert_eq!(dec.next_frame(), None);
        dec.push(&bytes[2..]);
        assert_eq!(dec.drain_frames().len(), 1);
        assert_eq!(dec.buffered(), 0);
    }

    #[test]
    fn thrust_conversion() {
        let f = ThrustFrame::from_thrust(2, WheelThrust::new(0.704, -1.0).unwrap());
        assert_eq!((f.left_pct, f.right_pct), (70, -100));
        assert_eq!(f.thrust(), WheelThrust::new(0.7, -1.0).unwrap());
    }
}
