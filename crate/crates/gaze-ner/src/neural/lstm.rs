//! Single-layer LSTM on the tape. Gate weights are packed `[i; f; g; o]`
//! into one input matrix, one recurrent matrix, and one bias vector.

use rand::Rng;

use super::tape::{NodeId, Tape};
use super::tensor::{ParamId, ParamSet, Tensor};

#[derive(Debug, Clone, Copy)]
pub struct LstmParams {
    pub w_input: ParamId,
    pub w_recurrent: ParamId,
    pub bias: ParamId,
    pub hidden: usize,
}

impl LstmParams {
    pub fn init(
        params: &mut ParamSet,
        name: &str,
        input_dim: usize,
        hidden: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let w_input = params.register(
            format!("{name}.w_input"),
            xavier(4 * hidden, input_dim, rng),
        );
        let w_recurrent = params.register(
            format!("{name}.w_recurrent"),
            xavier(4 * hidden, hidden, rng),
        );
        let bias = params.register(format!("{name}.bias"), Tensor::zeros(4 * hidden, 1));
        LstmParams {
            w_input,
            w_recurrent,
            bias,
            hidden,
        }
    }

    /// One step; `state` is `(h, c)` from the previous step.
    pub fn step(
        &self,
        tape: &mut Tape,
        x: NodeId,
        state: Option<(NodeId, NodeId)>,
    ) -> (NodeId, NodeId) {
        let h = self.hidden;
        let from_input = tape.matvec(self.w_input, x);
        let pre = match state {
            Some((h_prev, _)) => {
                let from_hidden = tape.matvec(self.w_recurrent, h_prev);
                tape.add(from_input, from_hidden)
            }
            None => from_input,
        };
        let gates = tape.add_bias(pre, self.bias);
        let i_raw = tape.slice(gates, 0, h);
        let f_raw = tape.slice(gates, h, h);
        let g_raw = tape.slice(gates, 2 * h, h);
        let o_raw = tape.slice(gates, 3 * h, h);
        let i = tape.sigmoid(i_raw);
        let f = tape.sigmoid(f_raw);
        let g = tape.tanh(g_raw);
        let o = tape.sigmoid(o_raw);
        let ig = tape.mul(i, g);
        let c = match state {
            Some((_, c_prev)) => {
                let fc = tape.mul(f, c_prev);
                tape.add(fc, ig)
            }
            None => ig,
        };
        let c_act = tape.tanh(c);
        let h_out = tape.mul(o, c_act);
        (h_out, c)
    }

    /// Hidden states for the whole sequence, in input order.
    pub fn run(&self, tape: &mut Tape, inputs: &[NodeId]) -> Vec<NodeId> {
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut state = None;
        for &x in inputs {
            let (h, c) = self.step(tape, x, state);
            outputs.push(h);
            state = Some((h, c));
        }
        outputs
    }

    /// Final hidden state, or a zero constant for an empty sequence.
    pub fn final_state(&self, tape: &mut Tape, inputs: &[NodeId]) -> NodeId {
        match self.run(tape, inputs).last() {
            Some(&h) => h,
            None => tape.constant(vec![0.0; self.hidden]),
        }
    }
}

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
pub fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Tensor::from_rows(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn output_shapes_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = ParamSet::new();
        let lstm = LstmParams::init(&mut params, "lstm", 3, 4, &mut rng);
        let mut tape = Tape::new(&params);
        let x0 = tape.constant(vec![0.1, 0.2, 0.3]);
        let x1 = tape.constant(vec![0.4, 0.5, 0.6]);
        let hs = lstm.run(&mut tape, &[x0, x1]);
        assert_eq!(hs.len(), 2);
        assert_eq!(tape.value(hs[1]).len(), 4);

        let mut tape2 = Tape::new(&params);
        let y0 = tape2.constant(vec![0.1, 0.2, 0.3]);
        let y1 = tape2.constant(vec![0.4, 0.5, 0.6]);
        let hs2 = lstm.run(&mut tape2, &[y0, y1]);
        assert_eq!(tape.value(hs[1]), tape2.value(hs2[1]));
    }

    #[test]
    fn empty_sequence_gives_zero_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = ParamSet::new();
        let lstm = LstmParams::init(&mut params, "lstm", 2, 3, &mut rng);
        let mut tape = Tape::new(&params);
        let h = lstm.final_state(&mut tape, &[]);
        assert_eq!(tape.value(h), &[0.0, 0.0, 0.0]);
    }
}
