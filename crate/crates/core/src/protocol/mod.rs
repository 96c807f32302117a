//! Frame-clocked simulation of the power/information transfer protocol.
//!
//! One transmitter (WPT) serves energy harvesters (EH) and, on request,
//! information receivers (IR); passive eavesdroppers may listen. Nodes
//! exchange typed control messages with one frame of latency; the radiated
//! signal reaches receivers with the same latency through per-frame channel
//! realizations. Everything is a pure function of `(scenario, seed)`.

mod engine;
mod message;
mod node;
mod scenario;
mod trace;

pub use engine::{run_scenario, RunOutput, RunSummary};
pub use message::{Audience, MessageKind, ProtocolMessage, RfiParams};
pub use node::{EhState, EveState, IrState, NodeId, WptState};
pub use scenario::{EhSpec, EveSpec, Fault, IrSpec, Scenario, ScenarioError};
pub use trace::{trace_hash, Trace, TraceRecord};
