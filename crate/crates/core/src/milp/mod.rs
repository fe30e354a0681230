//! Solver-agnostic MILP representation and the exact ReLU network encoding.

pub mod bounds;
pub mod emit;
pub mod encode;
pub mod model;
pub mod parse;

pub use bounds::{propagate_bounds, BoundBox, Interval};
pub use emit::{emit_lp, emit_mps, sanitize};
pub use encode::{encode_network, encode_relu, Embedding, NeuronStatus, ReluEncoding};
pub use model::{ConId, Constraint, LinExpr, MilpModel, Sense, VarId, VarKind, Variable};
pub use parse::{parse_lp, parse_mps};
