//! Scenario description and validation.

use std::fmt;

use super::message::RfiParams;
use super::node::NodeId;
use crate::phy::ActivationPattern;
use crate::{ChannelConfig, ObstacleSpec, Point3, SignalConfig};

/// Validation failure naming every offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub fields: Vec<String>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario: {}", self.fields.join("; "))
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone)]
pub struct EhSpec {
    pub pos: Point3,
    pub join_frame: u64,
}

#[derive(Debug, Clone)]
pub struct IrSpec {
    pub pos: Point3,
    pub join_frame: u64,
    pub rfi: RfiParams,
    /// Relative channel-estimation error (0 = perfect estimates).
    pub estimation_error_rel: f64,
}

#[derive(Debug, Clone)]
pub struct EveSpec {
    pub pos: Point3,
}

/// An injected error-control event: `origin` reports an error at `frame`,
/// rolling its acknowledged position back by `rollback` seed frames
/// (information receivers only).
#[derive(Debug, Clone, Copy)]
pub struct Fault {
    pub frame: u64,
    pub origin: NodeId,
    pub rollback: u64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub n_frames: u64,
    pub frame_duration_s: f64,
    pub wpt_pos: Point3,
    /// Active-antenna count of the plain power-transfer pattern.
    pub power_pattern_k: usize,
    /// Length of the pseudorandom payload the transmitter seeds.
    pub payload_bits: u64,
    /// Disable receiver noise (control messages are always reliable).
    pub zero_noise: bool,
    pub obstacles: ObstacleSpec,
    pub channel: ChannelConfig,
    pub signal: SignalConfig,
    pub ehs: Vec<EhSpec>,
    pub irs: Vec<IrSpec>,
    pub eves: Vec<EveSpec>,
    pub faults: Vec<Fault>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_frames: 200,
            frame_duration_s: 1e-3,
            wpt_pos: Point3::terminal(0.0, 0.0),
            power_pattern_k: 1,
            payload_bits: 600,
            zero_noise: false,
            obstacles: ObstacleSpec::default(),
            channel: ChannelConfig::default(),
            signal: SignalConfig::default(),
            ehs: Vec::new(),
            irs: Vec::new(),
            eves: Vec::new(),
            faults: Vec::new(),
        }
    }
}

impl Scenario {
    /// Reference scenario: one harvester at 1 m, one information receiver at
    /// 20 m, 200 frames, periodic codeword remapping.
    pub fn golden() -> Self {
        Self {
            ehs: vec![EhSpec {
                pos: Point3::terminal(1.0, 0.0),
                join_frame: 0,
            }],
            irs: vec![IrSpec {
                pos: Point3::terminal(20.0, 0.0),
                join_frame: 0,
                rfi: RfiParams {
                    requested_bits_per_frame: 6,
                    pattern_update_period: Some(10),
                    an_enabled: false,
                    remap_key: 0xC0FF_EE00_1234_5678,
                },
                estimation_error_rel: 0.0,
            }],
            ..Self::default()
        }
    }

    pub fn power_pattern(&self) -> ActivationPattern {
        ActivationPattern::new((0..self.power_pattern_k).collect())
            .expect("validated power pattern")
    }

    pub fn node_exists(&self, id: NodeId) -> bool {
        match id {
            NodeId::Wpt => true,
            NodeId::Eh(i) => (i as usize) < self.ehs.len(),
            NodeId::Ir(i) => (i as usize) < self.irs.len(),
            NodeId::Eve(i) => (i as usize) < self.eves.len(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut fields = Vec::new();
        if self.n_frames == 0 {
            fields.push("n_frames: must be at least 1".to_string());
        }
        if !(self.frame_duration_s > 0.0) {
            fields.push("frame_duration_s: must be positive".to_string());
        }
        if self.power_pattern_k < 1 || self.power_pattern_k > self.channel.n_tx {
            fields.push(format!(
                "power_pattern_k: {} outside [1, {}]",
                self.power_pattern_k, self.channel.n_tx
            ));
        }
        if let Err(e) = self.obstacles.validate() {
            fields.push(format!("obstacles: {e}"));
        }
        if let Err(e) = self.channel.validate() {
            fields.push(format!("channel: {e}"));
        }
        if let Err(e) = self.signal.validate() {
            fields.push(format!("signal: {e}"));
        }
        for (i, eh) in self.ehs.iter().enumerate() {
            if eh.pos.z < 0.0 {
                fields.push(format!("ehs[{i}].pos.z: must be non-negative"));
            }
            if eh.pos.distance(&self.wpt_pos) == 0.0 {
                fields.push(format!("ehs[{i}].pos: coincides with the transmitter"));
            }
        }
        for (i, ir) in self.irs.iter().enumerate() {
            if ir.pos.z < 0.0 {
                fields.push(format!("irs[{i}].pos.z: must be non-negative"));
            }
            if ir.pos.distance(&self.wpt_pos) == 0.0 {
                fields.push(format!("irs[{i}].pos: coincides with the transmitter"));
            }
            if ir.rfi.requested_bits_per_frame == 0 {
                fields.push(format!("irs[{i}].rfi.requested_bits_per_frame: must be positive"));
            }
            if ir.rfi.pattern_update_period == Some(0) {
                fields.push(format!("irs[{i}].rfi.pattern_update_period: must be at least 1"));
            }
            if !(ir.estimation_error_rel >= 0.0) {
                fields.push(format!("irs[{i}].estimation_error_rel: must be non-negative"));
            }
        }
        for (i, eve) in self.eves.iter().enumerate() {
            if eve.pos.distance(&self.wpt_pos) == 0.0 {
                fields.push(format!("eves[{i}].pos: coincides with the transmitter"));
            }
        }
        if self.ehs.len() > 250 || self.irs.len() > 250 || self.eves.len() > 250 {
            fields.push("nodes: at most 250 per role".to_string());
        }
        for (i, fault) in self.faults.iter().enumerate() {
            if fault.frame >= self.n_frames {
                fields.push(format!("faults[{i}].frame: beyond the last frame"));
            }
            if !self.node_exists(fault.origin) {
                fields.push(format!("faults[{i}].origin: no such node {}", fault.origin));
            }
            if fault.origin == NodeId::Wpt {
                fields.push(format!("faults[{i}].origin: transmitter cannot self-report"));
            }
        }
        if fields.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError { fields })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_scenario_is_valid() {
        assert!(Scenario::golden().validate().is_ok());
    }

    #[test]
    fn validation_lists_every_offending_field() {
        let mut s = Scenario::golden();
        s.n_frames = 0;
        s.power_pattern_k = 0;
        s.obstacles.ocr = 1.2;
        s.faults.push(Fault {
            frame: 500,
            origin: NodeId::Ir(4),
            rollback: 0,
        });
        let err = s.validate().unwrap_err();
        assert!(err.fields.len() >= 5, "{:?}", err.fields);
        assert!(err.fields.iter().any(|f| f.starts_with("n_frames")));
        assert!(err.fields.iter().any(|f| f.starts_with("obstacles")));
        assert!(err.fields.iter().any(|f| f.contains("faults[0].frame")));
        assert!(err.fields.iter().any(|f| f.contains("faults[0].origin")));
    }
}
