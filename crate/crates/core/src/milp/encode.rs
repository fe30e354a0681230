use crate::error::{Error, Result};
use crate::net::{NeuronId, SparseNet, HIDDEN_LAYERS};
use crate::oracle::FEATURE_COUNT;

use super::bounds::{propagate_bounds, BoundBox, Interval};
use super::model::{LinExpr, MilpModel, Sense, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronStatus {
    /// `ub <= 0`: output pinned to zero.
    Dead,
    /// `lb >= 0`: output equals the pre-activation.
    AlwaysOn,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluEncoding {
    pub pre: VarId,
    pub post: VarId,
    pub indicator: Option<VarId>,
    pub interval: Interval,
    pub status: NeuronStatus,
}

impl ReluEncoding {
    pub fn m_minus(&self) -> f64 {
        (-self.interval.lo).max(0.0)
    }

    pub fn m_plus(&self) -> f64 {
        self.interval.hi.max(0.0)
    }
}

/// Result of compiling one network into a model.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// Normalized network output.
    pub output: VarId,
    pub bounds: BoundBox,
    pub neurons: Vec<(NeuronId, ReluEncoding)>,
}

impl Embedding {
    pub fn binaries(&self) -> usize {
        self.neurons.iter().filter(|(_, e)| e.indicator.is_some()).count()
    }
}

/// Adds `a = max(0, x)` for a pre-activation variable `x` known to lie in `interval`.
///
/// Variables and rows are named `{name}_a`, `{name}_d`, `{name}_r1`..`{name}_r3`.
pub fn encode_relu(model: &mut MilpModel, x: VarId, interval: Interval, name: &str) -> Result<ReluEncoding> {
    if !(interval.lo <= interval.hi) || !interval.lo.is_finite() || !interval.hi.is_finite() {
        return Err(Error::Encoding(format!(
            "neuron `{name}` has invalid interval [{}, {}]",
            interval.lo, interval.hi
        )));
    }
    if interval.hi <= 0.0 {
        let a = model.continuous(format!("{name}_a"), 0.0, 0.0)?;
        return Ok(ReluEncoding {
            pre: x,
            post: a,
            indicator: None,
            interval,
            status: NeuronStatus::Dead,
        });
    }
    if interval.lo >= 0.0 {
        let a = model.continuous(format!("{name}_a"), interval.lo, interval.hi)?;
        let mut e = LinExpr::var(a);
        e.add(x, -1.0);
        model.add_constraint(format!("{name}_on"), &e, Sense::Eq, 0.0)?;
        return Ok(ReluEncoding {
            pre: x,
            post: a,
            indicator: None,
            interval,
            status: NeuronStatus::AlwaysOn,
        });
    }
    let m_minus = -interval.lo;
    let m_plus = interval.hi;
    let a = model.continuous(format!("{name}_a"), 0.0, m_plus)?;
    let d = model.binary(format!("{name}_d"))?;

    // a <= x + M-(1 - d)
    let mut r1 = LinExpr::var(a);
    r1.add(x, -1.0).add(d, m_minus);
    model.add_constraint(format!("{name}_r1"), &r1, Sense::Le, m_minus)?;
    // a >= x
    let mut r2 = LinExpr::var(a);
    r2.add(x, -1.0);
    model.add_constraint(format!("{name}_r2"), &r2, Sense::Ge, 0.0)?;
    // a <= M+ d
    let mut r3 = LinExpr::var(a);
    r3.add(d, -m_plus);
    model.add_constraint(format!("{name}_r3"), &r3, Sense::Le, 0.0)?;
    // a >= 0 is the lower bound of `a`.

    Ok(ReluEncoding {
        pre: x,
        post: a,
        indicator: Some(d),
        interval,
        status: NeuronStatus::Unstable,
    })
}

/// Compiles `net` on top of five normalized input variables.
///
/// Hidden neurons are named `{prefix}_{layer}_{neuron}_{x|a|d}` with layers
/// numbered from 1; the output is `{prefix}_3_0_x`.
pub fn encode_network(
    model: &mut MilpModel,
    net: &SparseNet,
    inputs: &[VarId; FEATURE_COUNT],
    prefix: &str,
) -> Result<Embedding> {
    let mut input_box = [Interval::ZERO; FEATURE_COUNT];
    for (slot, &v) in input_box.iter_mut().zip(inputs) {
        let var = model.var(v);
        if !var.lb.is_finite() || !var.ub.is_finite() {
            return Err(Error::Encoding(format!("input `{}` is unbounded", var.name)));
        }
        if var.lb < -1e-9 || var.ub > 1.0 + 1e-9 {
            return Err(Error::Encoding(format!(
                "input `{}` bounds [{}, {}] leave the normalized range [0, 1]",
                var.name, var.lb, var.ub
            )));
        }
        *slot = Interval::new(var.lb.max(0.0), var.ub.min(1.0));
    }
    let bounds = propagate_bounds(net, &input_box);

    let mut neurons = Vec::new();
    let mut prev: Vec<(usize, VarId)> = inputs.iter().copied().enumerate().collect();
    for h in 0..HIDDEN_LAYERS {
        let layer = &net.layers[h];
        let mut next = Vec::new();
        for j in 0..layer.outputs() {
            if !net.masks[h][j] {
                continue;
            }
            let iv = bounds.hidden[h][j];
            let name = format!("{prefix}_{}_{j}", h + 1);
            let x = model.continuous(format!("{name}_x"), iv.lo, iv.hi)?;
            let mut e = LinExpr::var(x);
            for &(i, v) in &prev {
                e.add(v, -layer.weights[j][i]);
            }
            model.add_constraint(format!("{name}_pre"), &e, Sense::Eq, layer.bias[j])?;
            let enc = encode_relu(model, x, iv, &name)?;
            next.push((j, enc.post));
            neurons.push((NeuronId { layer: h, index: j }, enc));
        }
        prev = next;
    }

    let out_layer = &net.layers[2];
    let name = format!("{prefix}_3_0");
    let y = model.continuous(format!("{name}_x"), bounds.output.lo, bounds.output.hi)?;
    let mut e = LinExpr::var(y);
    for &(i, v) in &prev {
        e.add(v, -out_layer.weights[0][i]);
    }
    model.add_constraint(format!("{name}_pre"), &e, Sense::Eq, out_layer.bias[0])?;

    Ok(Embedding {
        output: y,
        bounds,
        neurons,
    })
}
