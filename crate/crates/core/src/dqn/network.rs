//! Fully connected ReLU network with a flat parameter vector and exact
//! backpropagation of the one-step TD loss.

use std::borrow::Borrow;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("expected an input of length {expected}, got {got}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub got: usize,
}

/// One stored interaction with the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_observation: Vec<f64>,
    pub terminal: bool,
    /// Action that is unavailable in the next state (the node the agent is
    /// standing on); excluded from the bootstrap maximum.
    pub next_masked_action: Option<usize>,
}

/// Multi-layer perceptron `sizes[0] → … → sizes[last]`, ReLU after every
/// hidden layer and a linear output.
///
/// Parameters are stored layer by layer: the `out × in` weight matrix in
/// row-major order followed by the `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct QNetwork {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl QNetwork {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0), "invalid layer sizes {sizes:?}");
        Self { sizes: sizes.to_vec(), params: vec![0.0; param_count(sizes)] }
    }

    /// Fan-in scaled uniform weights, `U(-√(6/fan_in), √(6/fan_in))`, and
    /// zero biases.
    pub fn he_uniform<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    /// `2l → hidden → hidden → l` for an `l`-node graph.
    pub fn for_nodes<R: Rng + ?Sized>(node_count: usize, hidden: usize, rng: &mut R) -> Self {
        Self::he_uniform(&[2 * node_count, hidden, hidden, node_count], rng)
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>) -> Option<Self> {
        (sizes.len() >= 2 && sizes.iter().all(|&s| s > 0) && params.len() == param_count(&sizes))
            .then_some(Self { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Weight matrix and bias vector of layer `i`.
    pub fn layer(&self, i: usize) -> (&[f64], &[f64]) {
        let offset: usize = self.sizes[..i + 1].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (fan_in, fan_out) = (self.sizes[i], self.sizes[i + 1]);
        let w = &self.params[offset..offset + fan_in * fan_out];
        let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        (w, b)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        self.check_input(input)?;
        let mut acts = Activations::default();
        self.forward_cached(input, &mut acts);
        Ok(acts.layers.pop().unwrap())
    }

    fn check_input(&self, input: &[f64]) -> Result<(), DimensionMismatch> {
        if input.len() != self.input_len() {
            return Err(DimensionMismatch { expected: self.input_len(), got: input.len() });
        }
        Ok(())
    }

    /// Fills `acts.layers[i]` with the post-activation output of layer `i`
    /// (`layers[0]` is the input).
    fn forward_cached(&self, input: &[f64], acts: &mut Activations) {
        let depth = self.sizes.len();
        acts.layers.resize_with(depth, Vec::new);
        acts.layers[0].clear();
        acts.layers[0].extend_from_slice(input);
        let last = depth - 2;
        let mut offset = 0;
        for i in 0..depth - 1 {
            let (fan_in, fan_out) = (self.sizes[i], self.sizes[i + 1]);
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let (prev, next) = acts.layers.split_at_mut(i + 1);
            let x = &prev[i];
            let out = &mut next[0];
            out.clear();
            for r in 0..fan_out {
                let row = &w[r * fan_in..(r + 1) * fan_in];
                let z = b[r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                out.push(if i < last { z.max(0.0) } else { z });
            }
            offset += fan_in * fan_out + fan_out;
        }
    }

    /// Adds `∂(dq · Q(input)[action])/∂θ` into `grad`.
    fn backward(&self, acts: &Activations, action: usize, dq: f64, grad: &mut [f64], scratch: &mut Vec<f64>) {
        let depth = self.sizes.len();
        let mut offsets = Vec::with_capacity(depth - 1);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }

        let mut delta = vec![0.0; self.output_len()];
        delta[action] = dq;
        for i in (0..depth - 1).rev() {
            let (fan_in, fan_out) = (self.sizes[i], self.sizes[i + 1]);
            let base = offsets[i];
            let x = &acts.layers[i];
            for r in 0..fan_out {
                let d = delta[r];
                if d == 0.0 {
                    continue;
                }
                let g = &mut grad[base + r * fan_in..base + (r + 1) * fan_in];
                for (gw, xv) in g.iter_mut().zip(x) {
                    *gw += d * xv;
                }
                grad[base + fan_in * fan_out + r] += d;
            }
            if i == 0 {
                break;
            }
            let w = &self.params[base..base + fan_in * fan_out];
            scratch.clear();
            scratch.resize(fan_in, 0.0);
            for r in 0..fan_out {
                let d = delta[r];
                if d == 0.0 {
                    continue;
                }
                for (c, s) in scratch.iter_mut().enumerate() {
                    *s += w[r * fan_in + c] * d;
                }
            }
            // ReLU gate of the hidden layer feeding this one
            for (s, a) in scratch.iter_mut().zip(x) {
                if *a <= 0.0 {
                    *s = 0.0;
                }
            }
            std::mem::swap(&mut delta, scratch);
        }
    }
}

#[derive(Default)]
struct Activations {
    layers: Vec<Vec<f64>>,
}

/// Greedy value of `q` with `masked` excluded.
pub(crate) fn masked_max(q: &[f64], masked: Option<usize>) -> f64 {
    q.iter().enumerate().filter(|&(i, _)| Some(i) != masked).map(|(_, &v)| v).fold(f64::NEG_INFINITY, f64::max)
}

/// Mean squared TD error over `batch` and its exact gradient with respect to
/// `net`'s parameters. Targets are `r + γ · max_a' Q_target(s', a')`, or `r`
/// for terminal transitions, and are held constant.
pub fn td_loss_and_gradients<T: Borrow<Transition>>(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: &[T],
    gamma: f64,
) -> Result<(f64, Vec<f64>), DimensionMismatch> {
    let mut grad = vec![0.0; net.param_count()];
    if batch.is_empty() {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut acts = Activations::default();
    let mut target_acts = Activations::default();
    let mut scratch = Vec::new();
    let mut loss = 0.0;

    for t in batch {
        let t = t.borrow();
        net.check_input(&t.observation)?;
        if t.action >= net.output_len() {
            return Err(DimensionMismatch { expected: net.output_len(), got: t.action + 1 });
        }
        let target = if t.terminal {
            t.reward
        } else {
            target_net.check_input(&t.next_observation)?;
            target_net.forward_cached(&t.next_observation, &mut target_acts);
            t.reward + gamma * masked_max(target_acts.layers.last().unwrap(), t.next_masked_action)
        };

        net.forward_cached(&t.observation, &mut acts);
        let error = acts.layers.last().unwrap()[t.action] - target;
        loss += error * error * scale;
        net.backward(&acts, t.action, 2.0 * error * scale, &mut grad, &mut scratch);
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&[4, 3, 3, 2]);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(net.param_count(), 4 * 3 + 3 + 3 * 3 + 3 + 3 * 2 + 2);
    }

    #[test]
    fn hand_set_forward_pass() {
        // 2 → 2 → 2 → 1
        let params = vec![
            1.0, 0.0, 0.0, -1.0, // W0
            0.5, 0.0, // b0
            2.0, 0.0, 1.0, 1.0, // W1
            0.0, -1.0, // b1
            1.0, -3.0, // W2
            0.25, // b2
        ];
        let net = QNetwork::from_parts(vec![2, 2, 2, 1], params).unwrap();
        // h0 = relu([1.5, -2]) = [1.5, 0]; h1 = relu([3, 0.5]) = [3, 0.5]; out = 3 - 1.5 + 0.25
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.75]);
        // h0 = relu([0.5, 1]) = [0.5, 1]; h1 = relu([1, 0.5]) = [1, 0.5]; out = 1 - 1.5 + 0.25
        assert_eq!(net.forward(&[0.0, -1.0]).unwrap(), vec![-0.25]);
    }

    #[test]
    fn dimension_mismatch() {
        let net = QNetwork::zeros(&[4, 3, 2]);
        assert_eq!(net.forward(&[1.0]).unwrap_err(), DimensionMismatch { expected: 4, got: 1 });
        assert!(QNetwork::from_parts(vec![2, 2], vec![0.0; 3]).is_none());
    }

    #[test]
    fn layer_views() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::for_nodes(5, 16, &mut rng);
        assert_eq!(net.sizes(), &[10, 16, 16, 5]);
        let (w, b) = net.layer(2);
        assert_eq!((w.len(), b.len()), (80, 5));
        assert!(b.iter().all(|&x| x == 0.0));
        let limit = (6.0f64 / 16.0).sqrt();
        assert!(w.iter().all(|x| x.abs() <= limit));
    }

    #[test]
    fn terminal_batch_at_its_rewards_has_zero_loss() {
        let params = vec![0.0; 2 * 2 + 2];
        let mut net = QNetwork::from_parts(vec![2, 2], params).unwrap();
        net.params_mut()[4] = -3.0;
        net.params_mut()[5] = 1.5;
        let batch = vec![
            Transition {
                observation: vec![0.3, 0.1],
                action: 0,
                reward: -3.0,
                next_observation: vec![0.0; 2],
                terminal: true,
                next_masked_action: None,
            },
            Transition {
                observation: vec![0.9, 0.4],
                action: 1,
                reward: 1.5,
                next_observation: vec![0.0; 2],
                terminal: true,
                next_masked_action: None,
            },
        ];
        let (loss, grad) = td_loss_and_gradients(&net, &net, &batch, 0.95).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn masked_max_skips_the_masked_action() {
        assert_eq!(masked_max(&[5.0, 1.0, 2.0], Some(0)), 2.0);
        assert_eq!(masked_max(&[5.0, 1.0, 2.0], None), 5.0);
    }
}
