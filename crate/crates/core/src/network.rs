//! Importance scoring with a small feedforward network.
//!
//! One hidden layer, sigmoid activations with a shared steepness `theta`:
//!
//! ```text
//! h_j = f(sum_i w1[i][j] x_i)      y_k = f(sum_j w2[j][k] h_j)
//! f(x) = 1 / (1 + e^{-theta x})
//! ```
//!
//! Training minimizes the summed squared error `E = 1/2 sum (y_k - d_k)^2`
//! over the whole training set by plain full-batch gradient descent with
//! exact analytic gradients; no momentum, no stochastic shuffling. The seed
//! recorded in the weights controls initialization (uniform on
//! `[-0.5, 0.5]`) and nothing else, so training is bit-reproducible.
//!
//! Raw output activations turn into importance weights by normalization:
//! `p_k = y_k / sum y`. An all-zero output vector has no information to
//! normalize, so it falls back to uniform weights with a flag.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logistic activation with steepness `theta`.
pub fn sigmoid(x: f64, theta: f64) -> f64 {
    1.0 / (1.0 + (-theta * x).exp())
}

/// Weights of the two layers, stored row-major: `w1[i * hidden + j]` links
/// input `i` to hidden unit `j`, `w2[j * outputs + k]` links hidden unit `j`
/// to output `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkWeights {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub theta: f64,
    /// Seed the initial weights were drawn from, kept for reproducibility.
    pub seed: u64,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl NetworkWeights {
    /// Fresh weights drawn uniformly from `[-0.5, 0.5]`.
    pub fn random(inputs: usize, hidden: usize, outputs: usize, theta: f64, seed: u64) -> Result<Self> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::input("network dimensions must all be positive"));
        }
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::input(format!(
                "activation steepness theta must be finite and positive, got {theta}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = (0..inputs * hidden).map(|_| rng.random::<f64>() - 0.5).collect();
        let w2 = (0..hidden * outputs).map(|_| rng.random::<f64>() - 0.5).collect();
        Ok(NetworkWeights {
            inputs,
            hidden,
            outputs,
            theta,
            seed,
            w1,
            w2,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden == 0 || self.outputs == 0 {
            return Err(Error::input("network dimensions must all be positive"));
        }
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::input(format!(
                "activation steepness theta must be finite and positive, got {}",
                self.theta
            )));
        }
        if self.w1.len() != self.inputs * self.hidden {
            return Err(Error::input(format!(
                "w1 has {} entries, expected {} x {}",
                self.w1.len(),
                self.inputs,
                self.hidden
            )));
        }
        if self.w2.len() != self.hidden * self.outputs {
            return Err(Error::input(format!(
                "w2 has {} entries, expected {} x {}",
                self.w2.len(),
                self.hidden,
                self.outputs
            )));
        }
        if self.w1.iter().chain(self.w2.iter()).any(|w| !w.is_finite()) {
            return Err(Error::input("network weights must all be finite"));
        }
        Ok(())
    }
}

/// One forward pass; returns the hidden and output activations.
pub fn forward(weights: &NetworkWeights, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    weights.validate()?;
    if input.len() != weights.inputs {
        return Err(Error::input(format!(
            "input has {} entries, network expects {}",
            input.len(),
            weights.inputs
        )));
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("input entries must be finite"));
    }
    let mut hidden = vec![0.0; weights.hidden];
    for j in 0..weights.hidden {
        let mut z = 0.0;
        for (i, &x) in input.iter().enumerate() {
            z += weights.w1[i * weights.hidden + j] * x;
        }
        hidden[j] = sigmoid(z, weights.theta);
    }
    let mut output = vec![0.0; weights.outputs];
    for k in 0..weights.outputs {
        let mut z = 0.0;
        for (j, &h) in hidden.iter().enumerate() {
            z += weights.w2[j * weights.outputs + k] * h;
        }
        output[k] = sigmoid(z, weights.theta);
    }
    Ok((hidden, output))
}

/// Half squared error between an output and its target.
pub fn loss(output: &[f64], target: &[f64]) -> Result<f64> {
    if output.len() != target.len() {
        return Err(Error::input(format!(
            "output has {} entries but target has {}",
            output.len(),
            target.len()
        )));
    }
    Ok(output
        .iter()
        .zip(target)
        .map(|(y, d)| 0.5 * (y - d) * (y - d))
        .sum())
}

/// One training sample: an input vector and its desired output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// A batch of training samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub samples: Vec<TrainingSample>,
}

impl TrainingSet {
    fn validate_against(&self, weights: &NetworkWeights) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::input("training set must contain at least one sample"));
        }
        for (idx, sample) in self.samples.iter().enumerate() {
            if sample.input.len() != weights.inputs {
                return Err(Error::input(format!(
                    "sample {idx}: input has {} entries, network expects {}",
                    sample.input.len(),
                    weights.inputs
                )));
            }
            if sample.target.len() != weights.outputs {
                return Err(Error::input(format!(
                    "sample {idx}: target has {} entries, network expects {}",
                    sample.target.len(),
                    weights.outputs
                )));
            }
            if sample.input.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("sample {idx}: input entries must be finite")));
            }
            if sample.target.iter().any(|d| !d.is_finite() || !(0.0..=1.0).contains(d)) {
                return Err(Error::input(format!(
                    "sample {idx}: target entries must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Summed loss of the network over a whole training set.
pub fn batch_loss(weights: &NetworkWeights, data: &TrainingSet) -> Result<f64> {
    data.validate_against(weights)?;
    let mut total = 0.0;
    for sample in &data.samples {
        let (_, y) = forward(weights, &sample.input)?;
        total += loss(&y, &sample.target)?;
    }
    Ok(total)
}

/// Exact gradient of [`batch_loss`] with respect to both weight matrices,
/// in the same row-major layout.
pub fn loss_gradient(weights: &NetworkWeights, data: &TrainingSet) -> Result<(Vec<f64>, Vec<f64>)> {
    data.validate_against(weights)?;
    let theta = weights.theta;
    let mut g1 = vec![0.0; weights.w1.len()];
    let mut g2 = vec![0.0; weights.w2.len()];
    for sample in &data.samples {
        let (hidden, output) = forward(weights, &sample.input)?;
        // Output layer: dE/dz2_k = (y_k - d_k) f'(z2_k), with
        // f'(z) = theta f(z)(1 - f(z)) expressed through the activation.
        let dz2: Vec<f64> = output
            .iter()
            .zip(&sample.target)
            .map(|(&y, &d)| (y - d) * theta * y * (1.0 - y))
            .collect();
        for (j, &h) in hidden.iter().enumerate() {
            for (k, &dz) in dz2.iter().enumerate() {
                g2[j * weights.outputs + k] += dz * h;
            }
        }
        // Hidden layer, chaining through every output unit.
        for (j, &h) in hidden.iter().enumerate() {
            let mut dh = 0.0;
            for (k, &dz) in dz2.iter().enumerate() {
                dh += dz * weights.w2[j * weights.outputs + k];
            }
            let dz1 = dh * theta * h * (1.0 - h);
            for (i, &x) in sample.input.iter().enumerate() {
                g1[i * weights.hidden + j] += dz1 * x;
            }
        }
    }
    Ok((g1, g2))
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingOutcome {
    pub weights: NetworkWeights,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs_run: usize,
}

/// Full-batch gradient descent from the given initial weights.
///
/// Runs exactly `epochs` epochs; convergence checking is the caller's
/// concern (the final loss is reported). A zero learning rate leaves the
/// weights bit-identical, which is occasionally useful as a dry run.
pub fn train_backprop(
    weights: NetworkWeights,
    data: &TrainingSet,
    learning_rate: f64,
    epochs: usize,
) -> Result<TrainingOutcome> {
    if !learning_rate.is_finite() || learning_rate < 0.0 {
        return Err(Error::input(format!(
            "learning rate must be finite and nonnegative, got {learning_rate}"
        )));
    }
    let mut weights = weights;
    let initial_loss = batch_loss(&weights, data)?;
    for _ in 0..epochs {
        let (g1, g2) = loss_gradient(&weights, data)?;
        for (w, g) in weights.w1.iter_mut().zip(&g1) {
            *w -= learning_rate * g;
        }
        for (w, g) in weights.w2.iter_mut().zip(&g2) {
            *w -= learning_rate * g;
        }
    }
    let final_loss = batch_loss(&weights, data)?;
    Ok(TrainingOutcome {
        weights,
        initial_loss,
        final_loss,
        epochs_run: epochs,
    })
}

/// Normalized importance weights with a degenerate-input marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub weights: Vec<f64>,
    /// True when the raw outputs were all zero and the uniform fallback was
    /// used; such a ranking carries no information.
    pub uniform_fallback: bool,
}

/// Normalizes raw output activations into weights that sum to one.
pub fn importance_weights(outputs: &[f64]) -> Result<ImportanceVector> {
    if outputs.is_empty() {
        return Err(Error::input("at least one output activation is required"));
    }
    for (idx, &y) in outputs.iter().enumerate() {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::input(format!(
                "output {idx}: activations must be finite and nonnegative, got {y}"
            )));
        }
    }
    let total: f64 = outputs.iter().sum();
    if total == 0.0 {
        let uniform = 1.0 / outputs.len() as f64;
        return Ok(ImportanceVector {
            weights: vec![uniform; outputs.len()],
            uniform_fallback: true,
        });
    }
    Ok(ImportanceVector {
        weights: outputs.iter().map(|y| y / total).collect(),
        uniform_fallback: false,
    })
}

/// Scales historical fault densities linearly onto `[0.1, 0.9]` for use as
/// training targets; a constant history maps to 0.5 everywhere.
pub fn targets_from_fault_density(densities: &[f64]) -> Result<Vec<f64>> {
    if densities.is_empty() {
        return Err(Error::input("at least one fault density is required"));
    }
    for (idx, &d) in densities.iter().enumerate() {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::input(format!(
                "density {idx}: fault densities must be finite and nonnegative, got {d}"
            )));
        }
    }
    let lo = densities.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = densities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(vec![0.5; densities.len()]);
    }
    Ok(densities
        .iter()
        .map(|d| 0.1 + 0.8 * (d - lo) / (hi - lo))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sigmoid_reference_values() {
        for theta in [0.5, 1.0, 2.0] {
            assert_eq!(sigmoid(0.0, theta), 0.5);
        }
        assert!(approx_eq(sigmoid(3f64.ln(), 1.0), 0.75, 1e-15));
        // Steepness theta scales the argument.
        assert_eq!(sigmoid(1.0, 2.0), sigmoid(2.0, 1.0));
    }

    #[test]
    fn sigmoid_is_antisymmetric_around_half() {
        for x in [-3.0, -0.7, 0.1, 2.5] {
            let sum = sigmoid(x, 1.3) + sigmoid(-x, 1.3);
            assert!(approx_eq(sum, 1.0, 1e-12), "got {sum}");
        }
    }

    #[test]
    fn zero_second_layer_pins_outputs_at_half() {
        let mut w = NetworkWeights::random(4, 3, 2, 1.0, 9).unwrap();
        w.w2 = vec![0.0; w.w2.len()];
        let (_, y) = forward(&w, &[0.3, 0.9, 0.1, 0.5]).unwrap();
        assert_eq!(y, vec![0.5, 0.5]);
    }

    #[test]
    fn minimal_network_reference_value() {
        let w = NetworkWeights {
            inputs: 1,
            hidden: 1,
            outputs: 1,
            theta: 1.0,
            seed: 0,
            w1: vec![1.0],
            w2: vec![1.0],
        };
        let (h, y) = forward(&w, &[0.0]).unwrap();
        assert_eq!(h, vec![0.5]);
        assert!(approx_eq(y[0], 0.6224593312018546, 1e-15), "got {}", y[0]);
    }

    #[test]
    fn forward_matches_a_hand_computation() {
        // 2 inputs, 2 hidden, 1 output, written out longhand.
        let w = NetworkWeights {
            inputs: 2,
            hidden: 2,
            outputs: 1,
            theta: 1.5,
            seed: 0,
            w1: vec![0.2, -0.4, 0.1, 0.3], // w1[i*2+j]
            w2: vec![0.5, -0.2],
        };
        let x = [0.8, 0.6];
        let h0 = sigmoid(0.2 * 0.8 + 0.1 * 0.6, 1.5);
        let h1 = sigmoid(-0.4 * 0.8 + 0.3 * 0.6, 1.5);
        let y0 = sigmoid(0.5 * h0 - 0.2 * h1, 1.5);
        let (h, y) = forward(&w, &x).unwrap();
        assert!(approx_eq(h[0], h0, 1e-15) && approx_eq(h[1], h1, 1e-15));
        assert!(approx_eq(y[0], y0, 1e-15));
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let w = NetworkWeights::random(3, 2, 2, 1.0, 1).unwrap();
        assert!(matches!(forward(&w, &[0.1, 0.2]), Err(Error::Input(_))));
    }

    #[test]
    fn loss_reference_values() {
        assert_eq!(loss(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(loss(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(loss(&[0.5], &[0.0]).unwrap(), 0.125);
        assert!(matches!(loss(&[0.5], &[0.1, 0.2]), Err(Error::Input(_))));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let weights = NetworkWeights::random(3, 4, 2, 1.0, 17).unwrap();
        let data = TrainingSet {
            samples: vec![
                TrainingSample { input: vec![0.2, 0.8, 0.5], target: vec![0.9, 0.1] },
                TrainingSample { input: vec![0.7, 0.1, 0.3], target: vec![0.2, 0.6] },
            ],
        };
        let (g1, g2) = loss_gradient(&weights, &data).unwrap();
        let eps = 1e-5;
        let check = |matrix: fn(&mut NetworkWeights) -> &mut Vec<f64>, grads: &[f64]| {
            for idx in 0..grads.len() {
                let mut plus = weights.clone();
                matrix(&mut plus)[idx] += eps;
                let mut minus = weights.clone();
                matrix(&mut minus)[idx] -= eps;
                let fd = (batch_loss(&plus, &data).unwrap() - batch_loss(&minus, &data).unwrap())
                    / (2.0 * eps);
                let denom = grads[idx].abs().max(fd.abs()).max(1e-4);
                assert!(
                    (grads[idx] - fd).abs() / denom < 1e-4,
                    "index {idx}: analytic {} vs fd {fd}",
                    grads[idx]
                );
            }
        };
        check(|w| &mut w.w1, &g1);
        check(|w| &mut w.w2, &g2);
    }

    #[test]
    fn training_reaches_a_single_sample_target() {
        let weights = NetworkWeights::random(3, 4, 2, 1.0, 5).unwrap();
        let data = TrainingSet {
            samples: vec![TrainingSample {
                input: vec![0.3, 0.9, 0.2],
                target: vec![0.8, 0.25],
            }],
        };
        let outcome = train_backprop(weights, &data, 0.5, 5000).unwrap();
        assert!(
            outcome.final_loss < 1e-3,
            "final loss {} after {} epochs",
            outcome.final_loss,
            outcome.epochs_run
        );
        assert!(outcome.final_loss < outcome.initial_loss);
    }

    #[test]
    fn zero_learning_rate_keeps_weights_bitwise() {
        let weights = NetworkWeights::random(2, 3, 1, 1.0, 8).unwrap();
        let data = TrainingSet {
            samples: vec![TrainingSample { input: vec![0.5, 0.5], target: vec![0.3] }],
        };
        let outcome = train_backprop(weights.clone(), &data, 0.0, 50).unwrap();
        assert_eq!(outcome.weights, weights);
        assert_eq!(outcome.initial_loss, outcome.final_loss);
    }

    #[test]
    fn training_is_deterministic_for_a_seed() {
        let data = TrainingSet {
            samples: vec![TrainingSample { input: vec![0.1, 0.9], target: vec![0.7, 0.2] }],
        };
        let run = |seed| {
            let w = NetworkWeights::random(2, 3, 2, 1.0, seed).unwrap();
            train_backprop(w, &data, 0.25, 200).unwrap()
        };
        let a = run(4);
        let b = run(4);
        assert_eq!(a, b);
        let c = run(5);
        assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn importance_reference_values() {
        let v = importance_weights(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(v.weights, vec![0.2, 0.3, 0.5]);
        assert!(!v.uniform_fallback);

        let v = importance_weights(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v.weights, vec![0.25; 4]);

        let v = importance_weights(&[2.0, 6.0]).unwrap();
        assert_eq!(v.weights, vec![0.25, 0.75]);
    }

    #[test]
    fn all_zero_outputs_fall_back_to_uniform() {
        let v = importance_weights(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.weights, vec![1.0 / 3.0; 3]);
        assert!(v.uniform_fallback);
    }

    #[test]
    fn negative_outputs_are_rejected() {
        assert!(matches!(importance_weights(&[0.5, -0.1]), Err(Error::Input(_))));
        assert!(matches!(importance_weights(&[]), Err(Error::Input(_))));
    }

    #[test]
    fn fault_density_targets_span_the_documented_band() {
        let targets = targets_from_fault_density(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(targets, vec![0.1, 0.5, 0.9]);
        let flat = targets_from_fault_density(&[3.0, 3.0]).unwrap();
        assert_eq!(flat, vec![0.5, 0.5]);
    }
}
