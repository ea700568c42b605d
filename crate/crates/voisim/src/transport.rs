//! Discrete-time model of a QUIC-like connection: a bottleneck link, a
//! stream-per-object lifecycle with reuse and reset, a supersession policy
//! for stale readings, and a windowed-max delivery-rate estimator that
//! feeds the scheduler's budget.

use std::collections::VecDeque;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::core::{Object, ObjectId, SensorId};
use crate::{Error, Result};

/// Default datagram payload: 1200 bytes.
pub const DEFAULT_MTU_BITS: u64 = 9600;

const BITS_EPS: f64 = 1e-3;

/// Link capacity. `Infinite` delivers enqueued objects instantly and is used
/// for reference runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub fn bps(self) -> Option<f64> {
        match self {
            Capacity::Finite(c) => Some(c),
            Capacity::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkMode {
    /// The head-of-queue object drains continuously at link rate; loss and
    /// MTU are ignored.
    Fluid,
    /// Objects are cut into MTU-sized packets, each lost independently and
    /// retransmitted one RTT after its send.
    Packet,
}

#[derive(Debug, Clone)]
pub struct LinkModel {
    pub capacity: Capacity,
    pub rtt_s: f64,
    pub loss_prob: f64,
    pub mtu_bits: u64,
    pub mode: LinkMode,
}

impl LinkModel {
    pub fn fluid(capacity: Capacity, rtt_s: f64) -> Self {
        LinkModel {
            capacity,
            rtt_s,
            loss_prob: 0.0,
            mtu_bits: DEFAULT_MTU_BITS,
            mode: LinkMode::Fluid,
        }
    }

    pub fn packet(capacity: Capacity, rtt_s: f64, loss_prob: f64) -> Self {
        LinkModel {
            capacity,
            rtt_s,
            loss_prob,
            mtu_bits: DEFAULT_MTU_BITS,
            mode: LinkMode::Packet,
        }
    }
}

/// What to do with an older undelivered reading when a newer one from the
/// same sensor arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupersedePolicy {
    Always,
    IfNotStarted,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportEventKind {
    Delivered,
    Reset,
    Superseded,
}

impl TransportEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportEventKind::Delivered => "delivered",
            TransportEventKind::Reset => "reset",
            TransportEventKind::Superseded => "superseded",
        }
    }
}

/// Emitted by the transport in non-decreasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportEvent {
    pub kind: TransportEventKind,
    pub time_s: f64,
    pub object_id: ObjectId,
    pub sensor_id: SensorId,
    pub stream_id: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamState {
    Idle,
    Active { object_id: ObjectId },
    Resetting { until_s: f64 },
}

/// How the sender learns the available capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    /// Reads the true link capacity.
    Oracle,
    /// Windowed max of per-RTT delivery-rate samples.
    BbrLike { window_rtts: usize },
}

pub const DEFAULT_BBR_WINDOW_RTTS: usize = 10;

#[derive(Debug, Clone)]
struct BbrState {
    window_start_s: f64,
    acked_in_window: f64,
    samples: VecDeque<f64>,
    window_rtts: usize,
}

impl BbrState {
    fn roll_to(&mut self, rtt_s: f64, now_s: f64) {
        while now_s >= self.window_start_s + rtt_s {
            if self.acked_in_window > 0.0 {
                if self.samples.len() == self.window_rtts {
                    self.samples.pop_front();
                }
                self.samples.push_back(self.acked_in_window / rtt_s);
            }
            self.acked_in_window = 0.0;
            self.window_start_s += rtt_s;
        }
    }

    /// Credits bits delivered over [from_s, to_s], split across window
    /// boundaries in proportion to time so chunk granularity cannot starve
    /// a window.
    fn on_ack_span(&mut self, bits: f64, rtt_s: f64, from_s: f64, to_s: f64) {
        if bits <= 0.0 {
            return;
        }
        if to_s <= from_s {
            self.roll_to(rtt_s, to_s);
            self.acked_in_window += bits;
            return;
        }
        let rate = bits / (to_s - from_s);
        let mut cur = from_s;
        while cur < to_s {
            let boundary = self.window_start_s + rtt_s;
            let upto = boundary.min(to_s);
            self.acked_in_window += rate * (upto - cur);
            cur = upto;
            if cur >= boundary {
                self.roll_to(rtt_s, cur);
            }
        }
    }

    fn estimate(&self) -> Option<f64> {
        self.samples.iter().copied().fold(None, |acc, s| {
            Some(acc.map_or(s, |m: f64| m.max(s)))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PacketState {
    Unsent,
    InFlight,
    /// Lost; eligible for retransmission at the contained time.
    WaitRetry(u64),
    Acked,
}

#[derive(Debug, Clone)]
struct InFlight {
    object: Object,
    stream_id: u64,
    /// Bits confirmed received (fluid: drained bits).
    acked_bits: f64,
    /// Bits put on the wire, including retransmissions.
    sent_bits: f64,
    /// Packet-mode state; empty in fluid mode.
    packets: Vec<PacketState>,
    acked_packets: usize,
    /// Retry readiness times, nanosecond-quantized for ordering.
    retry_ready: Vec<(u64, usize)>,
}

impl InFlight {
    fn packet_bits(&self, idx: usize, mtu: u64) -> u64 {
        let full = self.packets.len() - 1;
        if idx < full {
            mtu
        } else {
            self.object.size_bits - full as u64 * mtu
        }
    }

    fn started(&self) -> bool {
        // A whole bit must have gone out: fluid drain can deposit dust-sized
        // fractions when a predecessor completes exactly on a step boundary.
        self.sent_bits >= 1.0
    }
}

#[derive(Debug, Clone)]
struct CurrentTx {
    object_id: ObjectId,
    packet_idx: usize,
    bits: u64,
    finish_s: f64,
    lost: bool,
}

fn to_ns(t: f64) -> u64 {
    (t * 1e9).round() as u64
}

/// One simulated connection. Owns the send queue, the stream table, the
/// loss RNG, and the delivery-rate estimator; single-threaded per run.
#[derive(Debug)]
pub struct Transport {
    link: LinkModel,
    estimator_kind: EstimatorKind,
    bbr: BbrState,
    streams: Vec<StreamState>,
    queue: VecDeque<InFlight>,
    current_tx: Option<CurrentTx>,
    now_s: f64,
    start_s: f64,
    rng: ChaCha12Rng,
    // bit accounting
    enqueued_bits: u64,
    delivered_bits: u64,
    wasted_bits: f64,
    reclaimed_bits: f64,
    drained_bits: f64,
    busy_s: f64,
    delivered_objects: u64,
}

impl Transport {
    pub fn new(link: LinkModel, estimator: EstimatorKind, loss_seed: u64, start_s: f64) -> Self {
        Transport {
            bbr: BbrState {
                window_start_s: start_s,
                acked_in_window: 0.0,
                samples: VecDeque::new(),
                window_rtts: match estimator {
                    EstimatorKind::BbrLike { window_rtts } => window_rtts,
                    EstimatorKind::Oracle => DEFAULT_BBR_WINDOW_RTTS,
                },
            },
            link,
            estimator_kind: estimator,
            streams: Vec::new(),
            queue: VecDeque::new(),
            current_tx: None,
            now_s: start_s,
            start_s,
            rng: ChaCha12Rng::seed_from_u64(loss_seed),
            enqueued_bits: 0,
            delivered_bits: 0,
            wasted_bits: 0.0,
            reclaimed_bits: 0.0,
            drained_bits: 0.0,
            busy_s: 0.0,
            delivered_objects: 0,
        }
    }

    pub fn now_s(&self) -> f64 {
        self.now_s
    }

    /// Binds each object to the lowest idle stream (creating streams as
    /// needed) and appends it to the send queue in the given order.
    pub fn enqueue_plan(&mut self, objects: Vec<Object>, now_s: f64) -> Result<()> {
        for o in &objects {
            if self.queue.iter().any(|f| f.object.object_id == o.object_id) {
                return Err(Error::DuplicateEnqueue(o.object_id));
            }
        }
        for object in objects {
            let stream_id = self.allocate_stream(object.object_id, now_s);
            self.enqueued_bits += object.size_bits;
            let packets = if self.link.mode == LinkMode::Packet {
                let count = object.size_bits.div_ceil(self.link.mtu_bits) as usize;
                vec![PacketState::Unsent; count]
            } else {
                Vec::new()
            };
            self.queue.push_back(InFlight {
                object,
                stream_id,
                acked_bits: 0.0,
                sent_bits: 0.0,
                packets,
                acked_packets: 0,
                retry_ready: Vec::new(),
            });
        }
        Ok(())
    }

    fn allocate_stream(&mut self, object_id: ObjectId, now_s: f64) -> u64 {
        for (id, s) in self.streams.iter_mut().enumerate() {
            if let StreamState::Resetting { until_s } = *s {
                if until_s <= now_s {
                    *s = StreamState::Idle;
                }
            }
            if *s == StreamState::Idle {
                *s = StreamState::Active { object_id };
                return id as u64;
            }
        }
        self.streams.push(StreamState::Active { object_id });
        (self.streams.len() - 1) as u64
    }

    pub fn stream_states(&self) -> &[StreamState] {
        &self.streams
    }

    pub fn queued_object_ids(&self) -> Vec<ObjectId> {
        self.queue.iter().map(|f| f.object.object_id).collect()
    }

    /// Committed bits not yet confirmed delivered, rounded up.
    pub fn backlog_bits(&self) -> u64 {
        let b: f64 = self
            .queue
            .iter()
            .map(|f| f.object.size_bits as f64 - f.acked_bits)
            .sum();
        b.ceil() as u64
    }

    pub fn delivered_objects(&self) -> u64 {
        self.delivered_objects
    }

    pub fn delivered_bits(&self) -> u64 {
        self.delivered_bits
    }

    pub fn wasted_bits(&self) -> f64 {
        self.wasted_bits
    }

    /// Aborts an older queued or in-flight reading of `sensor_id` according
    /// to the policy, making room for `new_object`. Returns the reset event
    /// if something was aborted.
    pub fn supersede(
        &mut self,
        sensor_id: SensorId,
        new_object: &Object,
        policy: SupersedePolicy,
        now_s: f64,
    ) -> Option<TransportEvent> {
        debug_assert_eq!(new_object.sensor_id, sensor_id);
        if policy == SupersedePolicy::Never {
            return None;
        }
        let pos = self.queue.iter().position(|f| {
            f.object.sensor_id == sensor_id && f.object.object_id < new_object.object_id
        })?;
        if policy == SupersedePolicy::IfNotStarted && self.queue[pos].started() {
            return None;
        }
        Some(self.abort_at(pos, now_s))
    }

    fn abort_at(&mut self, pos: usize, now_s: f64) -> TransportEvent {
        let flight = self.queue.remove(pos).expect("position in range");
        if let Some(tx) = &self.current_tx {
            if tx.object_id == flight.object.object_id {
                self.current_tx = None;
            }
        }
        self.wasted_bits += flight.acked_bits;
        self.reclaimed_bits += flight.object.size_bits as f64 - flight.acked_bits;
        // RESET_STREAM: the receiver discards partial data; the stream is
        // reusable one RTT later.
        self.streams[flight.stream_id as usize] = StreamState::Resetting {
            until_s: now_s + self.link.rtt_s,
        };
        TransportEvent {
            kind: TransportEventKind::Reset,
            time_s: now_s,
            object_id: flight.object.object_id,
            sensor_id: flight.object.sensor_id,
            stream_id: Some(flight.stream_id),
        }
    }

    /// Completes everything that takes zero transmission time. Only an
    /// infinite-capacity link delivers here; on finite links this is a no-op.
    pub fn drain_instant(&mut self, now_s: f64) -> Vec<TransportEvent> {
        let mut events = Vec::new();
        if self.link.capacity != Capacity::Infinite {
            return events;
        }
        while let Some(flight) = self.queue.pop_front() {
            let remaining = flight.object.size_bits as f64 - flight.acked_bits;
            self.bbr
                .on_ack_span(remaining, self.link.rtt_s, now_s, now_s);
            events.push(self.complete_delivery(flight, now_s));
        }
        events
    }

    fn complete_delivery(&mut self, mut flight: InFlight, at_s: f64) -> TransportEvent {
        flight.acked_bits = flight.object.size_bits as f64;
        self.delivered_bits += flight.object.size_bits;
        self.delivered_objects += 1;
        self.streams[flight.stream_id as usize] = StreamState::Idle;
        TransportEvent {
            kind: TransportEventKind::Delivered,
            time_s: at_s,
            object_id: flight.object.object_id,
            sensor_id: flight.object.sensor_id,
            stream_id: Some(flight.stream_id),
        }
    }

    /// Advances simulated time by `dt_s`, draining the queue and returning
    /// the events that occurred, in time order.
    pub fn advance(&mut self, dt_s: f64) -> Vec<TransportEvent> {
        assert!(dt_s > 0.0, "advance requires dt > 0");
        let end = self.now_s + dt_s;
        let events = match (self.link.capacity, self.link.mode) {
            (Capacity::Infinite, _) => self.drain_instant(self.now_s),
            (Capacity::Finite(c), LinkMode::Fluid) => self.advance_fluid(c, end),
            (Capacity::Finite(c), LinkMode::Packet) => self.advance_packet(c, end),
        };
        self.now_s = end;
        self.bbr.roll_to(self.link.rtt_s, end);
        self.check_invariants();
        events
    }

    fn advance_fluid(&mut self, c: f64, end: f64) -> Vec<TransportEvent> {
        let mut events = Vec::new();
        let mut t = self.now_s;
        while t < end {
            let Some(head) = self.queue.front_mut() else {
                break;
            };
            let remaining = head.object.size_bits as f64 - head.acked_bits;
            let ttf = remaining / c;
            if t + ttf <= end {
                self.drained_bits += remaining;
                self.busy_s += ttf;
                self.bbr.on_ack_span(remaining, self.link.rtt_s, t, t + ttf);
                t += ttf;
                let mut flight = self.queue.pop_front().expect("head exists");
                flight.sent_bits += remaining;
                events.push(self.complete_delivery(flight, t));
            } else {
                let chunk = c * (end - t);
                head.acked_bits += chunk;
                head.sent_bits += chunk;
                self.drained_bits += chunk;
                self.busy_s += end - t;
                self.bbr.on_ack_span(chunk, self.link.rtt_s, t, end);
                t = end;
            }
        }
        events
    }

    fn advance_packet(&mut self, c: f64, end: f64) -> Vec<TransportEvent> {
        let mut events = Vec::new();
        let mut t = self.now_s;
        loop {
            if let Some(tx) = self.current_tx.clone() {
                if tx.finish_s > end {
                    break;
                }
                t = tx.finish_s;
                self.finish_tx(&tx, &mut events);
                self.current_tx = None;
                continue;
            }
            match self.next_sendable(t) {
                Some((pos, idx)) => {
                    let flight = &mut self.queue[pos];
                    let bits = flight.packet_bits(idx, self.link.mtu_bits);
                    flight.packets[idx] = PacketState::InFlight;
                    flight.retry_ready.retain(|&(_, i)| i != idx);
                    flight.sent_bits += bits as f64;
                    let lost = self.rng.random_bool(self.link.loss_prob);
                    self.drained_bits += bits as f64;
                    self.busy_s += bits as f64 / c;
                    self.current_tx = Some(CurrentTx {
                        object_id: flight.object.object_id,
                        packet_idx: idx,
                        bits,
                        finish_s: t + bits as f64 / c,
                    lost,
                    });
                }
                None => {
                    // Nothing sendable: jump to the earliest retry timer
                    // inside this window, otherwise idle out.
                    let next_retry = self
                        .queue
                        .iter()
                        .flat_map(|f| f.retry_ready.iter().map(|&(ns, _)| ns))
                        .min();
                    match next_retry {
                        Some(ns) if (ns as f64) / 1e9 <= end => {
                            t = t.max(ns as f64 / 1e9);
                        }
                        _ => break,
                    }
                }
            }
        }
        events
    }

    /// The first stream in queue order with a packet ready to send at `t`:
    /// a stalled stream never blocks the ones behind it.
    fn next_sendable(&self, t: f64) -> Option<(usize, usize)> {
        let t_ns = to_ns(t);
        for (pos, flight) in self.queue.iter().enumerate() {
            if let Some(idx) = flight.packets.iter().position(|&p| p == PacketState::Unsent) {
                return Some((pos, idx));
            }
            if let Some(&(_, idx)) = flight
                .retry_ready
                .iter()
                .filter(|&&(ns, _)| ns <= t_ns)
                .min_by_key(|&&(ns, idx)| (ns, idx))
            {
                return Some((pos, idx));
            }
        }
        None
    }

    fn finish_tx(&mut self, tx: &CurrentTx, events: &mut Vec<TransportEvent>) {
        let Some(pos) = self
            .queue
            .iter()
            .position(|f| f.object.object_id == tx.object_id)
        else {
            return; // aborted while the packet was on the wire
        };
        let flight = &mut self.queue[pos];
        if tx.lost {
            // The sender learns of the loss and retransmits one RTT after
            // the send; only this stream stalls.
            let ready = to_ns(tx.finish_s + self.link.rtt_s);
            flight.packets[tx.packet_idx] = PacketState::WaitRetry(ready);
            flight.retry_ready.push((ready, tx.packet_idx));
            return;
        }
        flight.packets[tx.packet_idx] = PacketState::Acked;
        flight.acked_packets += 1;
        flight.acked_bits += tx.bits as f64;
        let c = self.link.capacity.bps().expect("packet mode is finite");
        self.bbr.on_ack_span(
            tx.bits as f64,
            self.link.rtt_s,
            tx.finish_s - tx.bits as f64 / c,
            tx.finish_s,
        );
        if flight.acked_packets == flight.packets.len() {
            let flight = self.queue.remove(pos).expect("position in range");
            events.push(self.complete_delivery(flight, tx.finish_s));
        }
    }

    /// Capacity estimate in bps. `Oracle` reads the true capacity; the
    /// windowed-max estimator returns nothing until the first sample.
    pub fn estimate_capacity(&self) -> Option<f64> {
        match self.estimator_kind {
            EstimatorKind::Oracle => self.link.capacity.bps(),
            EstimatorKind::BbrLike { .. } => self.bbr.estimate(),
        }
    }

    /// Bit conservation and the capacity bound; cheap enough to run after
    /// every advance.
    fn check_invariants(&self) {
        let live: u64 = self.queue.iter().map(|f| f.object.size_bits).sum();
        let accounted = self.delivered_bits as f64 + self.wasted_bits + self.reclaimed_bits
            + live as f64;
        assert!(
            (accounted - self.enqueued_bits as f64).abs() <= BITS_EPS,
            "bit conservation violated: enqueued {} accounted {}",
            self.enqueued_bits,
            accounted
        );
        if let Capacity::Finite(c) = self.link.capacity {
            let elapsed = self.now_s - self.start_s;
            assert!(
                self.drained_bits <= c * elapsed + self.link.mtu_bits as f64 + BITS_EPS,
                "link exceeded capacity: drained {} in {}s at {}bps",
                self.drained_bits,
                elapsed,
                c
            );
            if self.link.mode == LinkMode::Fluid {
                let progress: f64 = self.queue.iter().map(|f| f.acked_bits).sum();
                let useful = self.delivered_bits as f64 + self.wasted_bits + progress;
                assert!(
                    (useful - self.drained_bits).abs() <= BITS_EPS,
                    "busy-time accounting broken: drained {} useful {}",
                    self.drained_bits,
                    useful
                );
            }
        }
    }
}

/// Bits the scheduler may commit for the next batch: the estimated capacity
/// over `horizon_periods` sampling periods, minus what is already queued.
/// A horizon above one lets objects larger than a single period's capacity
/// be admitted and drain across periods.
pub fn budget_for_batch(
    est_capacity_bps: f64,
    period_s: f64,
    horizon_periods: f64,
    backlog_bits: u64,
) -> u64 {
    debug_assert!(est_capacity_bps >= 0.0 && period_s >= 0.0 && horizon_periods >= 1.0);
    let window = (est_capacity_bps * period_s * horizon_periods).floor() as u64;
    window.saturating_sub(backlog_bits)
}
