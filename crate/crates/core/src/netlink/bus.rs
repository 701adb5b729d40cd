use std::sync::Arc;

use arc_swap::ArcSwapOption;

use super::{NetError, PoseFrame};

/// Creates the single publisher and a cloneable subscriber handle for one
/// latest-value pose channel.
pub fn pose_bus() -> (PosePublisher, PoseSubscriber) {
    let slot = Arc::new(ArcSwapOption::empty());
    (PosePublisher { slot: slot.clone() }, PoseSubscriber { slot })
}

/// Write end. Not cloneable, so there is exactly one publisher.
#[derive(Debug)]
pub struct PosePublisher {
    slot: Arc<ArcSwapOption<PoseFrame>>,
}

impl PosePublisher {
    /// Replaces the current frame. Frames older than the current one are
    /// rejected so subscribers never see time run backwards.
    pub fn publish(&self, frame: PoseFrame) -> Result<(), NetError> {
        if let Some(cur) = self.slot.load().as_ref() {
            if frame.t < cur.t {
                return Err(NetError::NonMonotone { prev: cur.t, next: frame.t });
            }
        }
        self.slot.store(Some(Arc::new(frame)));
        Ok(())
    }

    pub fn subscriber(&self) -> PoseSubscriber {
        PoseSubscriber { slot: self.slot.clone() }
    }
}

/// Read end. Reads never block the publisher and always see a whole frame.
#[derive(Debug, Clone)]
pub struct PoseSubscriber {
    slot: Arc<ArcSwapOption<PoseFrame>>,
}

impl PoseSubscriber {
    /// Most recent frame, optionally restricted to `subset` ids.
    pub fn latest(&self, subset: Option<&[u32]>) -> Result<PoseFrame, NetError> {
        let cur = self.latest_shared()?;
        Ok(match subset {
            Some(ids) => cur.subset(ids),
            None => (*cur).clone(),
        })
    }

    /// Most recent frame without copying.
    pub fn latest_shared(&self) -> Result<Arc<PoseFrame>, NetError> {
        self.slot.load_full().ok_or(NetError::NoData)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlink::TagPose;

    fn frame(t: f64, ids: &[u32]) -> PoseFrame {
        PoseFrame::new(t, ids.iter().map(|&id| TagPose { id, x: t, y: 0.0, th: 0.0 }).collect()).unwrap()
    }

    #[test]
    fn no_data_yet() {
        let (_, sub) = pose_bus();
        assert_eq!(sub.latest(None), Err(NetError::NoData));
    }

    #[test]
    fn latest_wins() {
        let (publisher, sub) = pose_bus();
        publisher.publish(frame(1.0, &[1])).unwrap();
        publisher.publish(frame(2.0, &[1, 2, 3])).unwrap();
        assert_eq!(sub.latest(None).unwrap().t, 2.0);
        assert_eq!(sub.latest(Some(&[1])).unwrap().ids().collect::<Vec<_>>(), vec![1]);
        assert!(publisher.publish(frame(1.5, &[1])).is_err());
    }
}
