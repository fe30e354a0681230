use crate::net::{DenseLayer, SparseNet, HIDDEN_LAYERS};
use crate::oracle::FEATURE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn relu(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// Pre-activation intervals of every neuron for a given input box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBox {
    pub input: [Interval; FEATURE_COUNT],
    pub hidden: [Vec<Interval>; HIDDEN_LAYERS],
    pub output: Interval,
}

fn affine_bounds(layer: &DenseLayer, input: &[Interval], row: usize) -> Interval {
    let mut lo = layer.bias[row];
    let mut hi = layer.bias[row];
    for (&w, x) in layer.weights[row].iter().zip(input) {
        if w >= 0.0 {
            lo += w * x.lo;
            hi += w * x.hi;
        } else {
            lo += w * x.hi;
            hi += w * x.lo;
        }
    }
    Interval { lo, hi }
}

pub fn propagate_bounds(net: &SparseNet, input_box: &[Interval; FEATURE_COUNT]) -> BoundBox {
    let mut hidden: [Vec<Interval>; HIDDEN_LAYERS] = Default::default();
    let mut post: Vec<Interval> = input_box.to_vec();
    for h in 0..HIDDEN_LAYERS {
        let layer = &net.layers[h];
        hidden[h] = (0..layer.outputs())
            .map(|j| {
                if net.masks[h][j] {
                    affine_bounds(layer, &post, j)
                } else {
                    Interval::ZERO
                }
            })
            .collect();
        post = hidden[h].iter().map(|iv| iv.relu()).collect();
    }
    let output = affine_bounds(&net.layers[2], &post, 0);
    BoundBox {
        input: *input_box,
        hidden,
        output,
    }
}
