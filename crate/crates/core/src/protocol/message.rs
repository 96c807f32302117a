//! Typed control-plane messages.

use super::node::NodeId;

/// Parameters carried by a request-for-information message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfiParams {
    /// Data rate the receiver asks for, bits per seeded frame.
    pub requested_bits_per_frame: u32,
    /// Frames between codeword-permutation updates; `None` keeps the static
    /// mapping.
    pub pattern_update_period: Option<u64>,
    /// Whether the receiver masks the exchange with artificial noise.
    pub an_enabled: bool,
    /// Shared secret seeding the codeword permutation.
    pub remap_key: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessageKind {
    /// Harvester asks for power delivery.
    PowerRequest,
    /// Transmitter starts or restarts the identification handshake.
    IdentExchange,
    /// Peer acknowledges identification; configuration is complete.
    ConfigAck,
    /// Per-frame marker of the radiated power signal.
    PowerBeacon,
    /// Receiver requests information seeding.
    Rfi(RfiParams),
    /// The frame `tx_frame` carried the `seq`-th data block.
    SeedFrame { tx_frame: u64, seq: u64 },
    /// Error-control restart; `last_good_seed` is the count of data blocks
    /// the reporter still trusts (absent for power-side errors).
    ErrorReport { last_good_seed: Option<u64> },
    /// Information session is over.
    StopInfo,
}

impl MessageKind {
    pub fn name(&self) -> &'static str {
        match self {
            MessageKind::PowerRequest => "PowerRequest",
            MessageKind::IdentExchange => "IdentExchange",
            MessageKind::ConfigAck => "ConfigAck",
            MessageKind::PowerBeacon => "PowerBeacon",
            MessageKind::Rfi(_) => "RFI",
            MessageKind::SeedFrame { .. } => "SeedFrame",
            MessageKind::ErrorReport { .. } => "ErrorReport",
            MessageKind::StopInfo => "StopInfo",
        }
    }
}

/// Delivery scope of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audience {
    One(NodeId),
    /// Every node except the sender.
    All,
    /// Information-plane nodes only (IRs and eavesdroppers): seed-frame
    /// metadata is invisible to harvesters, which have no decode path.
    InfoPlane,
}

impl Audience {
    pub fn includes(&self, node: NodeId, sender: NodeId) -> bool {
        if node == sender {
            return false;
        }
        match self {
            Audience::One(id) => *id == node,
            Audience::All => true,
            Audience::InfoPlane => matches!(node, NodeId::Ir(_) | NodeId::Eve(_)),
        }
    }
}

/// A message in flight; delivered one frame after `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolMessage {
    pub kind: MessageKind,
    pub sender: NodeId,
    pub receiver: Audience,
    pub frame: u64,
}
