//! Node state machines: transmitter, harvesters, information receivers,
//! and passive eavesdroppers.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use super::message::{Audience, MessageKind, ProtocolMessage, RfiParams};
use crate::phy::{
    cancel_si, codebook_for_rate, index_to_bits, ml_detect, remap_codebook, ActivationPattern,
    PatternCodebook,
};
use crate::SignalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Wpt,
    Eh(u8),
    Ir(u8),
    Eve(u8),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Wpt => write!(f, "WPT"),
            NodeId::Eh(i) => write!(f, "EH{i}"),
            NodeId::Ir(i) => write!(f, "IR{i}"),
            NodeId::Eve(i) => write!(f, "EVE{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WptState {
    Idle,
    Identification,
    PowerTransfer,
    InfoSeeding,
}

impl WptState {
    pub fn name(self) -> &'static str {
        match self {
            WptState::Idle => "Idle",
            WptState::Identification => "Identification",
            WptState::PowerTransfer => "PowerTransfer",
            WptState::InfoSeeding => "InfoSeeding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EhState {
    Idle,
    Requesting,
    Configuring,
    Harvesting,
}

impl EhState {
    pub fn name(self) -> &'static str {
        match self {
            EhState::Idle => "Idle",
            EhState::Requesting => "Requesting",
            EhState::Configuring => "Configuring",
            EhState::Harvesting => "Harvesting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrState {
    Sensing,
    Estimating,
    RfiSent,
    HarvestingInfo,
}

impl IrState {
    pub fn name(self) -> &'static str {
        match self {
            IrState::Sensing => "Sensing",
            IrState::Estimating => "Estimating",
            IrState::RfiSent => "RfiSent",
            IrState::HarvestingInfo => "HarvestingInfo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveState {
    Listening,
}

impl EveState {
    pub fn name(self) -> &'static str {
        "Listening"
    }
}

/// What the transmitter radiates in one frame.
#[derive(Debug, Clone)]
pub struct WptTransmission {
    pub pattern: ActivationPattern,
    /// Present when the pattern carries data: `(tx_frame, seq, codeword)`.
    pub seeded: Option<(u64, u64, u64)>,
}

#[derive(Debug, Default)]
pub struct StepOutput {
    pub outbox: Vec<(Audience, MessageKind)>,
    /// Protocol violations observed this frame (unknown/unexpected messages).
    pub violations: Vec<String>,
}

/// The wireless power transmitter.
#[derive(Debug)]
pub struct WptNode {
    pub state: WptState,
    /// Power keeps flowing once the first harvester is configured, including
    /// through later re-identification episodes.
    pub radiating: bool,
    pub registered: BTreeSet<NodeId>,
    pub identification_entries: u64,
    n_tx: usize,
    power_pattern: ActivationPattern,
    /// Base codebook (identity mapping); the per-frame permutation is applied
    /// at seeding time.
    codebook: Option<PatternCodebook>,
    rfi: Option<RfiParams>,
    ir_peer: Option<NodeId>,
    bit_cursor: usize,
}

impl WptNode {
    pub fn new(n_tx: usize, power_pattern: ActivationPattern) -> Self {
        Self {
            state: WptState::Idle,
            radiating: false,
            registered: BTreeSet::new(),
            identification_entries: 0,
            n_tx,
            power_pattern,
            codebook: None,
            rfi: None,
            ir_peer: None,
            bit_cursor: 0,
        }
    }

    pub fn codebook(&self) -> Option<&PatternCodebook> {
        self.codebook.as_ref()
    }

    pub fn bit_cursor(&self) -> usize {
        self.bit_cursor
    }

    fn enter_identification(&mut self) {
        self.state = WptState::Identification;
        self.identification_entries += 1;
    }

    /// Consume the inbox, then radiate according to the resulting mode.
    /// Returns the control outbox and the transmission for this frame.
    pub fn step(
        &mut self,
        inbox: &[ProtocolMessage],
        frame: u64,
        payload: &[bool],
    ) -> (StepOutput, Option<WptTransmission>) {
        let mut out = StepOutput::default();
        for msg in inbox {
            match &msg.kind {
                MessageKind::PowerRequest => {
                    if self.state == WptState::Idle {
                        self.enter_identification();
                    }
                    out.outbox
                        .push((Audience::One(msg.sender), MessageKind::IdentExchange));
                }
                MessageKind::ConfigAck => {
                    self.registered.insert(msg.sender);
                    if self.state == WptState::Identification {
                        self.state = WptState::PowerTransfer;
                        self.radiating = true;
                    }
                }
                MessageKind::Rfi(params) => {
                    if self.state == WptState::PowerTransfer {
                        match codebook_for_rate(self.n_tx, params.requested_bits_per_frame) {
                            Ok(cb) => {
                                self.codebook = Some(cb);
                                self.rfi = Some(*params);
                                self.ir_peer = Some(msg.sender);
                                self.state = WptState::InfoSeeding;
                            }
                            Err(err) => out
                                .violations
                                .push(format!("RFI rejected from {}: {err}", msg.sender)),
                        }
                    } else {
                        out.violations
                            .push(format!("RFI from {} in state {}", msg.sender, self.state.name()));
                    }
                }
                MessageKind::ErrorReport { last_good_seed } => {
                    if self.state == WptState::Idle {
                        out.violations
                            .push(format!("ErrorReport from {} while idle", msg.sender));
                    } else {
                        if let (Some(gs), Some(cb)) = (last_good_seed, self.codebook.as_ref()) {
                            self.bit_cursor = (*gs as usize) * cb.bits_per_use() as usize;
                        }
                        self.enter_identification();
                        out.outbox
                            .push((Audience::One(msg.sender), MessageKind::IdentExchange));
                    }
                }
                MessageKind::StopInfo => {
                    if self.state == WptState::InfoSeeding {
                        self.state = WptState::PowerTransfer;
                        self.end_info_session();
                    } else {
                        out.violations
                            .push(format!("StopInfo from {} in state {}", msg.sender, self.state.name()));
                    }
                }
                other => out
                    .violations
                    .push(format!("unexpected {} from {}", other.name(), msg.sender)),
            }
        }

        let transmission = self.radiate(frame, payload, &mut out);
        (out, transmission)
    }

    fn end_info_session(&mut self) {
        self.codebook = None;
        self.rfi = None;
        self.ir_peer = None;
    }

    fn radiate(
        &mut self,
        frame: u64,
        payload: &[bool],
        out: &mut StepOutput,
    ) -> Option<WptTransmission> {
        if !self.radiating {
            return None;
        }
        // Power flows through every active state; the beacon is the
        // physical-signal marker all receivers can sense.
        out.outbox.push((Audience::All, MessageKind::PowerBeacon));

        if self.state == WptState::InfoSeeding {
            let cb = self.codebook.as_ref().expect("codebook set in InfoSeeding");
            let bpu = cb.bits_per_use() as usize;
            if self.bit_cursor >= payload.len() {
                // Payload exhausted: tell the receiver and fall back.
                let peer = self.ir_peer.expect("peer set in InfoSeeding");
                out.outbox.push((Audience::One(peer), MessageKind::StopInfo));
                self.state = WptState::PowerTransfer;
                self.end_info_session();
            } else {
                let rfi = self.rfi.expect("rfi set in InfoSeeding");
                let mut block = vec![false; bpu];
                for (i, b) in block.iter_mut().enumerate() {
                    *b = payload.get(self.bit_cursor + i).copied().unwrap_or(false);
                }
                let epoch_cb = remap_codebook(
                    cb,
                    rfi.remap_key,
                    frame,
                    rfi.pattern_update_period,
                )
                .expect("valid period checked at RFI time");
                let codeword = crate::phy::bits_to_index(&block);
                let pattern = epoch_cb.pattern(codeword).expect("codeword in range");
                let seq = (self.bit_cursor / bpu) as u64;
                self.bit_cursor += bpu;
                out.outbox.push((
                    Audience::InfoPlane,
                    MessageKind::SeedFrame {
                        tx_frame: frame,
                        seq,
                    },
                ));
                return Some(WptTransmission {
                    pattern,
                    seeded: Some((frame, seq, codeword)),
                });
            }
        }
        Some(WptTransmission {
            pattern: self.power_pattern.clone(),
            seeded: None,
        })
    }
}

/// The energy harvester. Its step input is the harvested power alone; it has
/// no access to codebooks, seed metadata, or observations beyond energy.
#[derive(Debug)]
pub struct EhNode {
    pub state: EhState,
    pub energy_j: f64,
    join_frame: u64,
}

impl EhNode {
    pub fn new(join_frame: u64) -> Self {
        Self {
            state: EhState::Idle,
            energy_j: 0.0,
            join_frame,
        }
    }

    /// Returns the outbox and the energy increment (joules) for this frame.
    pub fn step(
        &mut self,
        inbox: &[ProtocolMessage],
        harvested_w: Option<f64>,
        frame: u64,
        frame_duration_s: f64,
        fault: bool,
    ) -> (StepOutput, f64) {
        let mut out = StepOutput::default();
        if self.state == EhState::Idle && frame >= self.join_frame {
            out.outbox
                .push((Audience::One(NodeId::Wpt), MessageKind::PowerRequest));
            self.state = EhState::Requesting;
        }
        for msg in inbox {
            match msg.kind {
                MessageKind::IdentExchange => {
                    if self.state != EhState::Idle {
                        self.state = EhState::Configuring;
                        out.outbox
                            .push((Audience::One(NodeId::Wpt), MessageKind::ConfigAck));
                    }
                }
                MessageKind::PowerBeacon => {
                    if self.state == EhState::Configuring {
                        self.state = EhState::Harvesting;
                    }
                }
                _ => {}
            }
        }
        if fault {
            out.outbox.push((
                Audience::One(NodeId::Wpt),
                MessageKind::ErrorReport { last_good_seed: None },
            ));
        }
        let mut increment = 0.0;
        if self.state == EhState::Harvesting {
            increment = harvested_w.unwrap_or(0.0) * frame_duration_s;
            self.energy_j += increment;
        }
        (out, increment)
    }
}

/// Physical-layer input handed to an information-plane node: the scalar
/// observation of the previous frame's transmission plus the receiver-side
/// knowledge needed for coherent detection.
#[derive(Debug, Clone)]
pub struct InfoObservation {
    pub tx_frame: u64,
    pub y: Complex64,
    /// Channel estimate (exact unless the scenario adds estimation error).
    pub h_est: Vec<Complex64>,
    /// Phase-shifter settings shared through the configuration exchange.
    pub phases: Vec<f64>,
    /// This node's own artificial-noise sample, if it is the AN source.
    pub own_an: Option<Complex64>,
}

/// One decoded seed frame.
#[derive(Debug, Clone)]
pub struct Decode {
    pub tx_frame: u64,
    pub pattern: ActivationPattern,
    pub bits: Vec<bool>,
}

/// The information receiver.
#[derive(Debug)]
pub struct IrNode {
    pub state: IrState,
    pub decoded: Vec<bool>,
    pub seed_frames_decoded: u64,
    rfi: RfiParams,
    join_frame: u64,
    codebook: Option<PatternCodebook>,
    has_estimate: bool,
    /// Set after an error report: ignore beacons until re-identified.
    awaiting_reconfig: bool,
    /// Set once the transmitter ends the session; the receiver goes quiet.
    completed: bool,
}

impl IrNode {
    pub fn new(join_frame: u64, rfi: RfiParams) -> Self {
        Self {
            state: IrState::Sensing,
            decoded: Vec::new(),
            seed_frames_decoded: 0,
            rfi,
            join_frame,
            codebook: None,
            has_estimate: false,
            awaiting_reconfig: false,
            completed: false,
        }
    }

    pub fn rfi(&self) -> RfiParams {
        self.rfi
    }

    /// `fault`: when set, roll back `rollback` seed frames and report.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        inbox: &[ProtocolMessage],
        obs: Option<&InfoObservation>,
        frame: u64,
        n_tx: usize,
        signal: &SignalConfig,
        fault: Option<u64>,
    ) -> (StepOutput, Vec<Decode>) {
        let mut out = StepOutput::default();
        let mut decodes = Vec::new();

        if let Some(rollback) = fault {
            let last_good = self.seed_frames_decoded.saturating_sub(rollback);
            let bpu = self
                .codebook
                .as_ref()
                .map(|cb| cb.bits_per_use() as usize)
                .unwrap_or(0);
            self.decoded.truncate(last_good as usize * bpu);
            self.seed_frames_decoded = last_good;
            out.outbox.push((
                Audience::One(NodeId::Wpt),
                MessageKind::ErrorReport {
                    last_good_seed: Some(last_good),
                },
            ));
            self.state = IrState::Sensing;
            self.awaiting_reconfig = true;
            return (out, decodes);
        }

        for msg in inbox {
            match &msg.kind {
                MessageKind::PowerBeacon => {
                    if self.state == IrState::Sensing
                        && !self.awaiting_reconfig
                        && !self.completed
                        && frame >= self.join_frame
                    {
                        self.state = IrState::Estimating;
                    }
                }
                MessageKind::IdentExchange => {
                    // Re-configuration after an error restarts the cycle
                    // from channel estimation.
                    out.outbox
                        .push((Audience::One(NodeId::Wpt), MessageKind::ConfigAck));
                    self.awaiting_reconfig = false;
                    self.state = IrState::Estimating;
                }
                MessageKind::SeedFrame { tx_frame, .. } => {
                    if matches!(self.state, IrState::RfiSent | IrState::HarvestingInfo) {
                        assert!(self.has_estimate, "seed frames require a channel estimate");
                        self.state = IrState::HarvestingInfo;
                        if let Some(obs) = obs {
                            if obs.tx_frame == *tx_frame {
                                if let Some(d) = self.decode(obs, signal) {
                                    decodes.push(d);
                                }
                            }
                        }
                    }
                }
                MessageKind::StopInfo => {
                    self.state = IrState::Sensing;
                    self.completed = true;
                }
                _ => {}
            }
        }

        if self.state == IrState::Estimating {
            // The estimate handle is per-frame side information from here on.
            self.has_estimate = true;
            if self.codebook.is_none() {
                match codebook_for_rate(n_tx, self.rfi.requested_bits_per_frame) {
                    Ok(cb) => self.codebook = Some(cb),
                    Err(err) => {
                        out.violations.push(format!("cannot build codebook: {err}"));
                        return (out, decodes);
                    }
                }
            }
            out.outbox
                .push((Audience::One(NodeId::Wpt), MessageKind::Rfi(self.rfi)));
            self.state = IrState::RfiSent;
        }

        (out, decodes)
    }

    fn decode(&mut self, obs: &InfoObservation, signal: &SignalConfig) -> Option<Decode> {
        let cb = self.codebook.as_ref()?;
        let epoch_cb = remap_codebook(cb, self.rfi.remap_key, obs.tx_frame, self.rfi.pattern_update_period)
            .expect("period validated");
        let mut y = obs.y;
        if self.rfi.an_enabled {
            if let Some(own) = obs.own_an {
                y = cancel_si(y, own, signal);
            }
        }
        let decision = ml_detect(y, &obs.h_est, &epoch_cb, &obs.phases, signal).ok()?;
        let bits = index_to_bits(decision.codeword, epoch_cb.bits_per_use());
        self.decoded.extend_from_slice(&bits);
        self.seed_frames_decoded += 1;
        Some(Decode {
            tx_frame: obs.tx_frame,
            pattern: decision.pattern,
            bits,
        })
    }
}

/// A passive eavesdropper: full codebook knowledge, no remap key, no AN
/// waveform. Decodes every seed frame it overhears with the static mapping.
#[derive(Debug)]
pub struct EveNode {
    pub state: EveState,
    pub decoded: Vec<bool>,
    codebook: Option<PatternCodebook>,
}

impl EveNode {
    pub fn new() -> Self {
        Self {
            state: EveState::Listening,
            decoded: Vec::new(),
            codebook: None,
        }
    }

    pub fn step(
        &mut self,
        inbox: &[ProtocolMessage],
        obs: Option<&InfoObservation>,
        signal: &SignalConfig,
    ) -> (StepOutput, Vec<Decode>) {
        let out = StepOutput::default();
        let mut decodes = Vec::new();
        for msg in inbox {
            if let MessageKind::SeedFrame { tx_frame, .. } = &msg.kind {
                let Some(obs) = obs else { continue };
                if obs.tx_frame != *tx_frame {
                    continue;
                }
                let Some(cb) = self.codebook.as_ref() else { continue };
                if let Ok(decision) = ml_detect(obs.y, &obs.h_est, cb, &obs.phases, signal) {
                    let bits = index_to_bits(decision.codeword, cb.bits_per_use());
                    self.decoded.extend_from_slice(&bits);
                    decodes.push(Decode {
                        tx_frame: *tx_frame,
                        pattern: decision.pattern,
                        bits,
                    });
                }
            }
        }
        (out, decodes)
    }

    /// The eavesdropper learns `k` from protocol observation; the engine
    /// seeds it here once the transmitter's codebook exists.
    pub fn learn_codebook(&mut self, cb: &PatternCodebook) {
        if self.codebook.is_none() {
            self.codebook = Some(remap_codebook(cb, 0, 0, None).expect("identity remap"));
        }
    }
}

impl Default for EveNode {
    fn default() -> Self {
        Self::new()
    }
}
