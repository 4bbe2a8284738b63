//! Dense tanh networks with hand-written reverse mode.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

/// `y = x · Wᵀ + b`, with `W` stored `(out, in)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

/// Matrix with orthonormal rows (or columns, whichever is shorter) scaled by
/// `gain`, from Gram-Schmidt on a Gaussian draw.
pub fn orthogonal_init<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Array2<f64> {
    assert!(rows >= 1 && cols >= 1, "orthogonal_init needs a non-empty shape");
    let (long, short) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    // columns of `basis` are orthonormalized, `long` entries each
    let mut basis = Array2::<f64>::zeros((long, short));
    for k in 0..short {
        loop {
            let mut v: Array1<f64> = (0..long).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for prev in 0..k {
                let u = basis.column(prev);
                let proj = u.dot(&v);
                v.scaled_add(-proj, &u);
            }
            // second pass for numerical orthogonality
            for prev in 0..k {
                let u = basis.column(prev);
                let proj = u.dot(&v);
                v.scaled_add(-proj, &u);
            }
            let norm = v.dot(&v).sqrt();
            if norm > 1e-8 {
                basis.column_mut(k).assign(&(v / norm));
                break;
            }
        }
    }
    let basis = basis * gain;
    if rows >= cols {
        basis
    } else {
        basis.reversed_axes().as_standard_layout().into_owned()
    }
}

/// Stack of dense layers, tanh on every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// `activations[k]` feeds layer `k`; the last entry is the network output.
    pub activations: Vec<Array2<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache holds at least the input")
    }
}

impl Mlp {
    /// Orthogonal weights, zero biases. Hidden layers use `hidden_gain`, the
    /// output layer `output_gain`.
    pub fn new<R: Rng + ?Sized>(
        inputs: usize,
        hidden: &[usize],
        outputs: usize,
        hidden_gain: f64,
        output_gain: f64,
        rng: &mut R,
    ) -> Self {
        let mut widths = vec![inputs];
        widths.extend_from_slice(hidden);
        widths.push(outputs);
        let last = widths.len() - 2;
        let layers = (0..=last)
            .map(|k| {
                let gain = if k == last { output_gain } else { hidden_gain };
                Dense {
                    weight: orthogonal_init(widths[k + 1], widths[k], gain, rng),
                    bias: Array1::zeros(widths[k + 1]),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs(), l.outputs())).collect(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().map(Dense::outputs).unwrap_or(0)
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(Dense::outputs).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Batched forward pass, one row per sample.
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            h = h.dot(&layer.weight.t()) + &layer.bias;
            if k < last {
                h.mapv_inplace(f64::tanh);
            }
        }
        h
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> MlpCache {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut h = activations[k].dot(&layer.weight.t()) + &layer.bias;
            if k < last {
                h.mapv_inplace(f64::tanh);
            }
            activations.push(h);
        }
        MlpCache { activations }
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂output`.
    pub fn backward(&self, cache: &MlpCache, grad_output: Array2<f64>, grad: &mut Mlp) {
        let mut delta = grad_output;
        for k in (0..self.layers.len()).rev() {
            let input = &cache.activations[k];
            grad.layers[k].weight += &delta.t().dot(input);
            grad.layers[k].bias += &delta.sum_axis(Axis(0));
            if k > 0 {
                let mut back = delta.dot(&self.layers[k].weight);
                // tanh' = 1 - h²
                back.zip_mut_with(input, |d, h| *d *= 1.0 - h * h);
                delta = back;
            }
        }
    }

    /// Parameters in storage order: per layer, weight rows then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().flatten().copied().collect()
    }

    /// Copy of `self` with parameters read from `flat` in [`Mlp::to_flat`] order.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.num_params(), "flat parameter length");
        let mut out = self.clone();
        let mut offset = 0;
        for t in out.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        out
    }

    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| {
            [
                l.weight.as_slice().expect("standard layout"),
                l.bias.as_slice().expect("standard layout"),
            ]
        })
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| {
            [
                l.weight.as_slice_mut().expect("standard layout"),
                l.bias.as_slice_mut().expect("standard layout"),
            ]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_orthogonal_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = orthogonal_init(4, 4, 1.0, &mut rng);
        let g = w.t().dot(&w);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn wide_and_tall_shapes_scale_by_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let wide = orthogonal_init(4, 64, 0.01, &mut rng);
        let g = wide.dot(&wide.t());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1e-4 } else { 0.0 };
                assert!((g[[i, j]] - expect).abs() < 1e-10);
            }
            let row_norm = wide.row(i).dot(&wide.row(i)).sqrt();
            assert!((row_norm - 0.01).abs() < 1e-9);
        }
        let tall = orthogonal_init(64, 28, 2f64.sqrt(), &mut rng);
        assert_eq!(tall.dim(), (64, 28));
        let g = tall.t().dot(&tall);
        for i in 0..28 {
            assert!((g[[i, i]] - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn seeded_init_repeats() {
        let a = orthogonal_init(5, 3, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        let b = orthogonal_init(5, 3, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(7, &[5, 5], 2, 1.0, 1.0, &mut rng).zeros_like();
        let y = net.forward(array![[1.0, -2.0, 3.0, 0.5, 0.0, 9.0, -1.0]].view());
        assert_eq!(y, Array2::<f64>::zeros((1, 2)));
    }

    #[test]
    fn batch_matches_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::new(6, &[8, 8, 8], 3, 2f64.sqrt(), 1.0, &mut rng);
        let x = Array2::from_shape_fn((5, 6), |(i, j)| (i as f64 - 2.0) * 0.3 + j as f64 * 0.1);
        let batch = net.forward(x.view());
        for i in 0..5 {
            let row = net.forward(x.slice(ndarray::s![i..i + 1, ..]));
            for j in 0..3 {
                assert!((row[[0, j]] - batch[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::new(3, &[4, 4], 2, 1.0, 1.0, &mut rng);
        let x = array![[0.3, -0.7, 1.1], [0.5, 0.2, -0.4]];
        // L = Σ y²/2, so ∂L/∂y = y
        let loss = |n: &Mlp| n.forward(x.view()).mapv(|v| 0.5 * v * v).sum();
        let cache = net.forward_cached(x.view());
        let mut grad = net.zeros_like();
        net.backward(&cache, cache.output().clone(), &mut grad);
        let analytic = grad.to_flat();
        let base = net.to_flat();
        for idx in 0..base.len() {
            let mut up = base.clone();
            up[idx] += 1e-6;
            let mut down = base.clone();
            down[idx] -= 1e-6;
            let numeric = (loss(&net.with_flat(&up)) - loss(&net.with_flat(&down))) / 2e-6;
            assert!((numeric - analytic[idx]).abs() < 1e-7, "param {idx}: {numeric} vs {}", analytic[idx]);
        }
    }
}
