//! ONU-side state: packet FIFO and circuit requests awaiting a report.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueuedPacket {
    pub arrival: f64,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingRequest {
    pub arrival: f64,
    pub onu: usize,
    pub class: usize,
    pub holding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivered {
    pub arrival: f64,
    pub size: f64,
    /// Instant the last bit reaches the OLT.
    pub delivered: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Onu {
    queue: VecDeque<QueuedPacket>,
    queued_bits: f64,
    pending: Vec<PendingRequest>,
    pub arrived: u64,
    pub sent: u64,
}

impl Onu {
    pub fn enqueue(&mut self, packet: QueuedPacket) {
        self.queued_bits += packet.size;
        self.arrived += 1;
        self.queue.push_back(packet);
    }

    pub fn queued_bits(&self) -> f64 {
        self.queued_bits
    }

    pub fn queued_packets(&self) -> usize {
        self.queue.len()
    }

    pub fn request_circuit(&mut self, request: PendingRequest) {
        self.pending.push(request);
    }

    /// Hands over the circuit requests to be reported in the next burst.
    pub fn take_requests(&mut self) -> std::vec::IntoIter<PendingRequest> {
        std::mem::take(&mut self.pending).into_iter()
    }

    /// Sends a report followed by whole packets, oldest first, in a grant of
    /// `duration` seconds starting at `now`. A packet that does not fit in
    /// the remainder stays at the head of the queue.
    pub fn serve_packet_grant(
        &mut self,
        now: f64,
        duration: f64,
        line_rate: f64,
        report_time: f64,
        propagation_delay: f64,
        out: &mut Vec<Delivered>,
    ) {
        let capacity_bits = (duration - report_time).max(0.0) * line_rate;
        let mut sent_bits = 0.0;
        while let Some(head) = self.queue.front() {
            if head.arrival > now || sent_bits + head.size > capacity_bits * (1.0 + 1e-12) {
                break;
            }
            sent_bits += head.size;
            out.push(Delivered {
                arrival: head.arrival,
                size: head.size,
                delivered: now + report_time + sent_bits / line_rate + propagation_delay,
            });
            self.queued_bits -= head.size;
            self.sent += 1;
            self.queue.pop_front();
        }
        if self.queue.is_empty() {
            self.queued_bits = 0.0;
        }
    }
}
