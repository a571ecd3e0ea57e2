use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::{BoundingBoxesDist, MessagingError, Sink};

#[derive(Default)]
struct Shared {
    subscribers: Vec<Sender<BoundingBoxesDist>>,
    closed: bool,
}

/// In-process fan-out channel. Clones share the same subscriber list.
///
/// Subscribers only see messages published after they subscribed.
#[derive(Clone, Default)]
pub struct InProcessBus {
    shared: Arc<Mutex<Shared>>,
}

impl InProcessBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&self) -> Subscription {
        let (tx, rx) = mpsc::channel();
        let mut shared = self.shared.lock().expect("bus lock");
        if !shared.closed {
            shared.subscribers.push(tx);
        }
        Subscription { rx }
    }

    /// Ends every subscription once its queued messages are consumed.
    pub fn close(&self) {
        let mut shared = self.shared.lock().expect("bus lock");
        shared.closed = true;
        shared.subscribers.clear();
    }
}

impl Sink for InProcessBus {
    fn deliver(&mut self, msg: &BoundingBoxesDist) -> Result<(), MessagingError> {
        let mut shared = self.shared.lock().expect("bus lock");
        if shared.closed {
            return Err(MessagingError::Closed);
        }
        shared.subscribers.retain(|tx| tx.send(msg.clone()).is_ok());
        Ok(())
    }
}

pub struct Subscription {
    rx: Receiver<BoundingBoxesDist>,
}

impl Subscription {
    /// Everything queued right now, in publication order.
    pub fn drain(&self) -> Vec<BoundingBoxesDist> {
        self.rx.try_iter().collect()
    }

    /// Blocks for the next message; `None` once the bus is closed and drained.
    pub fn recv(&self) -> Option<BoundingBoxesDist> {
        self.rx.recv().ok()
    }

    pub fn recv_timeout(
        &self,
        timeout: Duration,
    ) -> Result<Option<BoundingBoxesDist>, MessagingError> {
        match self.rx.recv_timeout(timeout) {
            Ok(m) => Ok(Some(m)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(MessagingError::Closed),
        }
    }
}

impl Iterator for Subscription {
    type Item = BoundingBoxesDist;

    fn next(&mut self) -> Option<Self::Item> {
        self.recv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::messaging::{Publisher, RATE_CAP_HZ};

    fn msg(seq: u64) -> BoundingBoxesDist {
        BoundingBoxesDist {
            seq,
            stamp: seq as f64,
            boxes: vec![],
        }
    }

    #[test]
    fn in_order_delivery() {
        let bus = InProcessBus::new();
        let sub = bus.subscribe();
        let mut p = Publisher::new(bus.clone(), RATE_CAP_HZ, 600);
        for k in 0..3 {
            p.publish(&msg(k), k * 20);
        }
        let got: Vec<u64> = sub.drain().iter().map(|m| m.seq).collect();
        assert_eq!(got, vec![0, 1, 2]);
    }

    #[test]
    fn late_subscriber_sees_only_new_messages() {
        let mut bus = InProcessBus::new();
        let early = bus.subscribe();
        bus.deliver(&msg(0)).unwrap();
        let late = bus.subscribe();
        bus.deliver(&msg(1)).unwrap();
        assert_eq!(early.drain().len(), 2);
        assert_eq!(
            late.drain().iter().map(|m| m.seq).collect::<Vec<_>>(),
            vec![1]
        );
    }

    #[test]
    fn close_ends_stream() {
        let mut bus = InProcessBus::new();
        let sub = bus.subscribe();
        bus.deliver(&msg(0)).unwrap();
        bus.close();
        assert!(bus.deliver(&msg(1)).is_err());
        let all: Vec<_> = sub.collect();
        assert_eq!(all.len(), 1);
    }

    #[test]
    fn cross_thread_handoff() {
        let bus = InProcessBus::new();
        let sub = bus.subscribe();
        let mut publisher_bus = bus.clone();
        let handle = std::thread::spawn(move || {
            for k in 0..100 {
                publisher_bus.deliver(&msg(k)).unwrap();
            }
            publisher_bus.close();
        });
        let seqs: Vec<u64> = sub.map(|m| m.seq).collect();
        handle.join().unwrap();
        assert_eq!(seqs, (0..100).collect::<Vec<_>>());
    }
}
