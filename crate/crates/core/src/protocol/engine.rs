//! The frame clock: message delivery, channel draws, and node stepping.
//!
//! Everything emitted at frame `t` (control messages and the radiated
//! signal alike) is processed by receivers at frame `t + 1`. All randomness
//! is drawn from counter-based substreams keyed by `(seed, purpose, frame,
//! position)`, so a node's draws do not depend on which other nodes exist —
//! paired runs with and without an information receiver give harvesters
//! identical inputs, and co-located receivers observe identical signals.

use num_complex::Complex64;
use rand::Rng;

use super::message::{Audience, MessageKind, ProtocolMessage};
use super::node::{
    Decode, EhNode, EveNode, InfoObservation, IrNode, NodeId, WptNode, WptTransmission,
};
use super::scenario::{Scenario, ScenarioError};
use super::trace::{Trace, TraceRecord};
use crate::channel::{noise_power_dbm, LosModel};
use crate::geometry::{is_blocked, sample_field};
use crate::phy::{cophase_weights, harvested_power, rx_mean, tx_signal, ActivationPattern};
use crate::rng::{stream, stream_id};
use crate::scalar::circular_gaussian;
use crate::units::dbm_to_watts;
use crate::{ChannelSampler, LinkGeometry, Point3, TxVector};

const TAG_FIELD: u64 = 0x6669_656c_64;
const TAG_PAYLOAD: u64 = 0x7061_796c_6f61_64;
const TAG_CHANNEL: u64 = 0x6368_616e;
const TAG_NOISE: u64 = 0x6e6f_6973_65;
const TAG_AN: u64 = 0x616e;
const TAG_EST: u64 = 0x6573_74;

fn pos_tag(p: &Point3) -> u64 {
    stream_id(0x706f_73, &[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
}

#[derive(Debug, Clone, Default)]
pub struct EhSummary {
    pub energy_j: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IrSummary {
    pub decoded: Vec<bool>,
    pub seed_frames: u64,
    pub detect_total: u64,
    pub detect_errors: u64,
}

#[derive(Debug, Clone, Default)]
pub struct EveSummary {
    pub decoded: Vec<bool>,
    pub detect_total: u64,
    pub detect_errors: u64,
}

/// Aggregates alongside the trace.
#[derive(Debug, Clone)]
pub struct RunSummary {
    /// The pseudorandom payload the transmitter seeds from.
    pub payload: Vec<bool>,
    /// Radiated power per frame (`None` before power transfer starts).
    pub tx_power_w: Vec<Option<f64>>,
    pub seeded_frames: u64,
    pub wpt_identification_entries: u64,
    pub eh: Vec<EhSummary>,
    pub ir: Vec<IrSummary>,
    pub eve: Vec<EveSummary>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub summary: RunSummary,
}

struct Link {
    geom: LinkGeometry,
    los: bool,
    tag: u64,
}

#[derive(Default)]
struct PendingObs {
    eh_w: Vec<Option<f64>>,
    ir: Vec<Option<InfoObservation>>,
    eve: Vec<Option<InfoObservation>>,
}

impl PendingObs {
    fn empty(n_eh: usize, n_ir: usize, n_eve: usize) -> Self {
        Self {
            eh_w: vec![None; n_eh],
            ir: vec![None; n_ir],
            eve: vec![None; n_eve],
        }
    }
}

/// Run one scenario to completion. Deterministic per `(scenario, seed)`.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<RunOutput, ScenarioError> {
    scenario.validate()?;
    let n_tx = scenario.channel.n_tx;
    let sampler = ChannelSampler::new(scenario.channel.clone()).expect("config validated");
    let field = sample_field(&scenario.obstacles, &mut stream(seed, &[TAG_FIELD]))
        .expect("obstacle spec validated");
    let noise_w = if scenario.zero_noise {
        0.0
    } else {
        dbm_to_watts(noise_power_dbm(&scenario.channel))
    };
    let an_power_dbm = scenario.signal.an_power_dbm;

    let mut payload_rng = stream(seed, &[TAG_PAYLOAD]);
    let payload: Vec<bool> = (0..scenario.payload_bits)
        .map(|_| payload_rng.random())
        .collect();

    let mk_link = |pos: &Point3| -> Link {
        let geom = LinkGeometry::new(scenario.wpt_pos, *pos).expect("validated placement");
        Link {
            geom,
            los: !is_blocked(&field, &scenario.wpt_pos, pos),
            tag: pos_tag(pos),
        }
    };
    let eh_links: Vec<Link> = scenario.ehs.iter().map(|e| mk_link(&e.pos)).collect();
    let ir_links: Vec<Link> = scenario.irs.iter().map(|i| mk_link(&i.pos)).collect();
    let eve_links: Vec<Link> = scenario.eves.iter().map(|e| mk_link(&e.pos)).collect();

    let mut wpt = WptNode::new(n_tx, scenario.power_pattern());
    let mut ehs: Vec<EhNode> = scenario.ehs.iter().map(|e| EhNode::new(e.join_frame)).collect();
    let mut irs: Vec<IrNode> = scenario
        .irs
        .iter()
        .map(|i| IrNode::new(i.join_frame, i.rfi))
        .collect();
    let mut eves: Vec<EveNode> = scenario.eves.iter().map(|_| EveNode::new()).collect();

    let full_pattern =
        ActivationPattern::new((0..n_tx).collect()).expect("n_tx >= 1 validated");

    let mut pending_msgs: Vec<ProtocolMessage> = Vec::new();
    let mut pending_obs = PendingObs::empty(ehs.len(), irs.len(), eves.len());
    // Ground truth of the previous frame's seeded transmission.
    let mut prev_seeded: Option<(u64, ActivationPattern)> = None;

    let mut trace = Trace::default();
    let mut tx_power_w: Vec<Option<f64>> = vec![None; scenario.n_frames as usize];
    let mut seeded_frames = 0u64;
    let mut ir_summaries = vec![IrSummary::default(); irs.len()];
    let mut eve_summaries = vec![EveSummary::default(); eves.len()];

    for frame in 0..scenario.n_frames {
        let inbox_msgs = std::mem::take(&mut pending_msgs);
        let obs = std::mem::replace(
            &mut pending_obs,
            PendingObs::empty(ehs.len(), irs.len(), eves.len()),
        );
        let inbox_for = |id: NodeId| -> Vec<ProtocolMessage> {
            inbox_msgs
                .iter()
                .filter(|m| m.receiver.includes(id, m.sender))
                .cloned()
                .collect()
        };
        let fault_for = |id: NodeId| scenario.faults.iter().find(|f| f.frame == frame && f.origin == id);
        let mut outgoing: Vec<ProtocolMessage> = Vec::new();
        let send = |sender: NodeId, out: Vec<(Audience, MessageKind)>, sink: &mut Vec<ProtocolMessage>| {
            for (receiver, kind) in out {
                sink.push(ProtocolMessage {
                    kind,
                    sender,
                    receiver,
                    frame,
                });
            }
        };

        // Transmitter.
        let wpt_inbox = inbox_for(NodeId::Wpt);
        let wpt_before = wpt.state.name();
        let (wpt_out, transmission) = wpt.step(&wpt_inbox, frame, &payload);
        let wpt_event = event_label(None, &wpt_inbox, &wpt_out.violations);
        send(NodeId::Wpt, wpt_out.outbox, &mut outgoing);
        trace.records.push(TraceRecord {
            frame,
            node: NodeId::Wpt,
            state_before: wpt_before,
            event: wpt_event,
            state_after: wpt.state.name(),
            harvested_uw: None,
            bits_decoded: 0,
            detect_ok: None,
        });

        // Physical transmission of this frame: channels drawn per link from
        // counter-based streams, phase shifters cophased toward the first
        // harvester.
        let mut frame_tx: Option<(TxVector, Vec<f64>)> = None;
        let mut eh_channels: Vec<Option<Vec<Complex64>>> = vec![None; ehs.len()];
        let mut cur_seeded: Option<(u64, ActivationPattern)> = None;
        if let Some(WptTransmission { pattern, seeded }) = &transmission {
            for (i, link) in eh_links.iter().enumerate() {
                let mut rng = stream(seed, &[TAG_CHANNEL, frame, link.tag]);
                let r = sampler
                    .draw(&link.geom, LosModel::Fixed(link.los), &mut rng)
                    .expect("distance validated");
                eh_channels[i] = Some(r.h);
            }
            let phases = match eh_channels.first().and_then(|h| h.as_ref()) {
                Some(h_eh0) => cophase_weights(h_eh0, &full_pattern, scenario.signal.phase_resolution_bits)
                    .expect("continuous fading never yields exact zeros"),
                None => vec![0.0; n_tx],
            };
            let x = tx_signal(pattern, &phases, &scenario.signal).expect("pattern within array");
            tx_power_w[frame as usize] = Some(x.norm_sqr());
            if let Some((tx_frame, _seq, _codeword)) = seeded {
                cur_seeded = Some((*tx_frame, pattern.clone()));
                seeded_frames += 1;
            }
            frame_tx = Some((x, phases));
        }

        // Harvesters: state machine plus energy accrual; their input from
        // the air is a single scalar.
        for (i, eh) in ehs.iter_mut().enumerate() {
            let inbox = inbox_for(NodeId::Eh(i as u8));
            let fault = fault_for(NodeId::Eh(i as u8)).is_some();
            let before = eh.state.name();
            let (out, increment) = eh.step(&inbox, obs.eh_w[i], frame, scenario.frame_duration_s, fault);
            let event = event_label(fault.then_some("Fault"), &inbox, &out.violations);
            send(NodeId::Eh(i as u8), out.outbox, &mut outgoing);
            trace.records.push(TraceRecord {
                frame,
                node: NodeId::Eh(i as u8),
                state_before: before,
                event,
                state_after: eh.state.name(),
                harvested_uw: Some(increment / scenario.frame_duration_s * 1e6),
                bits_decoded: 0,
                detect_ok: None,
            });
        }

        // Information receivers.
        for (i, ir) in irs.iter_mut().enumerate() {
            let inbox = inbox_for(NodeId::Ir(i as u8));
            let fault = fault_for(NodeId::Ir(i as u8)).map(|f| f.rollback);
            let before = ir.state.name();
            let (out, decodes) =
                ir.step(&inbox, obs.ir[i].as_ref(), frame, n_tx, &scenario.signal, fault);
            let event = event_label(fault.map(|_| "Fault"), &inbox, &out.violations);
            send(NodeId::Ir(i as u8), out.outbox, &mut outgoing);
            let s = &mut ir_summaries[i];
            let (bits, ok) = score_decodes(&decodes, &prev_seeded, &mut s.detect_total, &mut s.detect_errors);
            s.seed_frames = ir.seed_frames_decoded;
            trace.records.push(TraceRecord {
                frame,
                node: NodeId::Ir(i as u8),
                state_before: before,
                event,
                state_after: ir.state.name(),
                harvested_uw: None,
                bits_decoded: bits,
                detect_ok: ok,
            });
        }

        // Eavesdroppers learn the codebook structure from the protocol, not
        // the key.
        for (i, eve) in eves.iter_mut().enumerate() {
            if let Some(cb) = wpt.codebook() {
                eve.learn_codebook(cb);
            }
            let inbox = inbox_for(NodeId::Eve(i as u8));
            let before = eve.state.name();
            let (out, decodes) = eve.step(&inbox, obs.eve[i].as_ref(), &scenario.signal);
            let event = event_label(None, &inbox, &out.violations);
            send(NodeId::Eve(i as u8), out.outbox, &mut outgoing);
            let s = &mut eve_summaries[i];
            let (bits, ok) = score_decodes(&decodes, &prev_seeded, &mut s.detect_total, &mut s.detect_errors);
            trace.records.push(TraceRecord {
                frame,
                node: NodeId::Eve(i as u8),
                state_before: before,
                event,
                state_after: eve.state.name(),
                harvested_uw: None,
                bits_decoded: bits,
                detect_ok: ok,
            });
        }

        // Build next frame's observations from this frame's transmission.
        if let Some((x, phases)) = &frame_tx {
            for (i, h) in eh_channels.iter().enumerate() {
                let h = h.as_ref().expect("drawn with the transmission");
                pending_obs.eh_w[i] =
                    Some(harvested_power(h, x).expect("matched lengths").watts);
            }
            // Artificial noise: one waveform sample per generating receiver,
            // reaching every information-plane observation at the configured
            // power; the generator keeps its own sample for cancellation.
            let an_sources: Vec<(usize, Complex64)> = irs
                .iter()
                .enumerate()
                .filter(|(_, ir)| {
                    ir.rfi().an_enabled
                        && matches!(
                            ir.state,
                            super::node::IrState::RfiSent | super::node::IrState::HarvestingInfo
                        )
                        && an_power_dbm > f64::NEG_INFINITY
                })
                .map(|(j, _)| {
                    let tag = ir_links[j].tag;
                    let mut rng = stream(seed, &[TAG_AN, frame, tag]);
                    (j, circular_gaussian::<f64, _>(&mut rng))
                })
                .collect();
            let an_amp = dbm_to_watts(an_power_dbm).sqrt();

            let build_info_obs = |link: &Link, own: Option<usize>, est_err: f64| {
                let mut rng = stream(seed, &[TAG_CHANNEL, frame, link.tag]);
                let r = sampler
                    .draw(&link.geom, LosModel::Fixed(link.los), &mut rng)
                    .expect("distance validated");
                let mut y = rx_mean(&r.h, x).expect("matched lengths");
                if noise_w > 0.0 {
                    let mut nrng = stream(seed, &[TAG_NOISE, frame, link.tag]);
                    y += circular_gaussian::<f64, _>(&mut nrng) * noise_w.sqrt();
                }
                let mut own_an = None;
                for (j, sample) in &an_sources {
                    y += sample * an_amp;
                    if own == Some(*j) {
                        own_an = Some(*sample);
                    }
                }
                let h_est = if est_err > 0.0 {
                    let rms = (r.h.iter().map(|e| e.norm_sqr()).sum::<f64>()
                        / r.h.len() as f64)
                        .sqrt();
                    let mut erng = stream(seed, &[TAG_EST, frame, link.tag]);
                    r.h.iter()
                        .map(|e| e + circular_gaussian::<f64, _>(&mut erng) * (est_err * rms))
                        .collect()
                } else {
                    r.h.clone()
                };
                InfoObservation {
                    tx_frame: frame,
                    y,
                    h_est,
                    phases: phases.clone(),
                    own_an,
                }
            };

            for (i, link) in ir_links.iter().enumerate() {
                pending_obs.ir[i] = Some(build_info_obs(
                    link,
                    Some(i),
                    scenario.irs[i].estimation_error_rel,
                ));
            }
            for (i, link) in eve_links.iter().enumerate() {
                pending_obs.eve[i] = Some(build_info_obs(link, None, 0.0));
            }
        }

        pending_msgs = outgoing;
        prev_seeded = cur_seeded;
    }

    let summary = RunSummary {
        payload,
        tx_power_w,
        seeded_frames,
        wpt_identification_entries: wpt.identification_entries,
        eh: ehs
            .iter()
            .map(|e| EhSummary { energy_j: e.energy_j })
            .collect(),
        ir: irs
            .iter()
            .zip(ir_summaries)
            .map(|(ir, mut s)| {
                s.decoded = ir.decoded.clone();
                s.seed_frames = ir.seed_frames_decoded;
                s
            })
            .collect(),
        eve: eves
            .iter()
            .zip(eve_summaries)
            .map(|(eve, mut s)| {
                s.decoded = eve.decoded.clone();
                s
            })
            .collect(),
    };
    Ok(RunOutput { trace, summary })
}

fn score_decodes(
    decodes: &[Decode],
    prev_seeded: &Option<(u64, ActivationPattern)>,
    total: &mut u64,
    errors: &mut u64,
) -> (u64, Option<bool>) {
    if decodes.is_empty() {
        return (0, None);
    }
    let mut bits = 0u64;
    let mut all_ok = true;
    for d in decodes {
        bits += d.bits.len() as u64;
        *total += 1;
        let ok = matches!(prev_seeded, Some((f, p)) if *f == d.tx_frame && *p == d.pattern);
        if !ok {
            *errors += 1;
            all_ok = false;
        }
    }
    (bits, Some(all_ok))
}

fn event_label(
    fault: Option<&'static str>,
    inbox: &[ProtocolMessage],
    violations: &[String],
) -> String {
    if let Some(f) = fault {
        return f.to_string();
    }
    if !violations.is_empty() {
        return "ProtocolViolation".to_string();
    }
    inbox
        .first()
        .map(|m| m.kind.name().to_string())
        .unwrap_or_else(|| "-".to_string())
}
