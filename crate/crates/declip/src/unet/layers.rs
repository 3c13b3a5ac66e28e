//! Network building blocks with hand-written backward passes: same-padded
//! cross-correlation conv, ReLU, 2x2 max pooling, nearest-neighbour
//! upsampling, channel concatenation, and Adam.
//!
//! Convolutions run as row AXPYs (one kernel tap scaling a shifted input
//! row into an output row) so the inner loops stay on contiguous slices.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::tensor::Tensor4;

/// A 2D convolution (cross-correlation) with bias and same-padding.
///
/// Odd kernels pad symmetrically; even kernels pad the extra row/column
/// on the bottom/right. The layer owns its gradient buffers and Adam
/// moments so an optimizer step is local to the layer.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pad: usize, // top/left padding; bottom/right is kernel - 1 - pad
    /// Weights indexed `[out][in][ky][kx]`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub grad_weights: Vec<f64>,
    pub grad_bias: Vec<f64>,
    pub m_weights: Vec<f64>,
    pub v_weights: Vec<f64>,
    pub m_bias: Vec<f64>,
    pub v_bias: Vec<f64>,
    /// Adam step counter (number of updates applied).
    pub step: u64,
}

impl Conv2d {
    /// Creates the layer with zero weights; call [`Conv2d::init_he`] or
    /// fill the weights by hand.
    pub fn new(in_ch: usize, out_ch: usize, kernel: usize) -> Self {
        assert!(kernel >= 1 && in_ch >= 1 && out_ch >= 1);
        let wlen = out_ch * in_ch * kernel * kernel;
        Conv2d {
            in_ch,
            out_ch,
            kernel,
            pad: (kernel - 1) / 2,
            weights: vec![0.0; wlen],
            bias: vec![0.0; out_ch],
            grad_weights: vec![0.0; wlen],
            grad_bias: vec![0.0; out_ch],
            m_weights: vec![0.0; wlen],
            v_weights: vec![0.0; wlen],
            m_bias: vec![0.0; out_ch],
            v_bias: vec![0.0; out_ch],
            step: 0,
        }
    }

    /// He-normal initialization: std `sqrt(2 / fan_in)`, zero biases.
    pub fn init_he(&mut self, rng: &mut ChaCha8Rng) {
        let fan_in = (self.in_ch * self.kernel * self.kernel) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("finite std");
        for w in &mut self.weights {
            *w = normal.sample(rng);
        }
        for b in &mut self.bias {
            *b = 0.0;
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    #[inline]
    fn weight(&self, co: usize, ci: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((co * self.in_ch + ci) * self.kernel + ky) * self.kernel + kx]
    }

    /// Valid output-row/col ranges for one kernel tap, so the inner loops
    /// never index outside the unpadded input.
    #[inline]
    fn tap_ranges(&self, k: usize, size: usize) -> (usize, usize, isize) {
        // out + k - pad must land in [0, size)
        let shift = k as isize - self.pad as isize;
        let lo = (-shift).max(0) as usize;
        let hi = ((size as isize - shift).min(size as isize)).max(0) as usize;
        (lo, hi, shift)
    }

    pub fn forward(&self, x: &Tensor4) -> Tensor4 {
        let (n, c, h, w) = x.shape();
        assert_eq!(c, self.in_ch, "input channel mismatch");
        let mut out = Tensor4::zeros(n, self.out_ch, h, w);
        for b in 0..n {
            for co in 0..self.out_ch {
                out.plane_mut(b, co).fill(self.bias[co]);
            }
            for ci in 0..self.in_ch {
                let x_plane = x.plane(b, ci);
                for co in 0..self.out_ch {
                    let out_plane = out.plane_mut(b, co);
                    for ky in 0..self.kernel {
                        let (y0, y1, ys) = self.tap_ranges(ky, h);
                        for kx in 0..self.kernel {
                            let wv = self.weight(co, ci, ky, kx);
                            if wv == 0.0 {
                                continue;
                            }
                            let (x0, x1, xs) = self.tap_ranges(kx, w);
                            for oy in y0..y1 {
                                let iy = (oy as isize + ys) as usize;
                                let orow = &mut out_plane[oy * w + x0..oy * w + x1];
                                let irow = &x_plane
                                    [iy * w + (x0 as isize + xs) as usize..][..x1 - x0];
                                for (o, &xv) in orow.iter_mut().zip(irow) {
                                    *o += wv * xv;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates weight/bias gradients from this call and returns the
    /// gradient with respect to the cached input.
    pub fn backward(&mut self, grad_out: &Tensor4, input: &Tensor4) -> Tensor4 {
        let (n, c, h, w) = input.shape();
        assert_eq!(c, self.in_ch);
        assert_eq!(grad_out.shape(), (n, self.out_ch, h, w));
        let mut grad_in = Tensor4::zeros(n, self.in_ch, h, w);

        for b in 0..n {
            for co in 0..self.out_ch {
                let g_plane = grad_out.plane(b, co);
                self.grad_bias[co] += g_plane.iter().sum::<f64>();
                for ci in 0..self.in_ch {
                    let x_plane = input.plane(b, ci);
                    let gi_plane = grad_in.plane_mut(b, ci);
                    for ky in 0..self.kernel {
                        let (y0, y1, ys) = self.tap_ranges(ky, h);
                        for kx in 0..self.kernel {
                            let (x0, x1, xs) = self.tap_ranges(kx, w);
                            if x1 <= x0 {
                                continue;
                            }
                            let widx =
                                ((co * self.in_ch + ci) * self.kernel + ky) * self.kernel + kx;
                            let wv = self.weights[widx];
                            let mut wgrad = 0.0;
                            for oy in y0..y1 {
                                let iy = (oy as isize + ys) as usize;
                                let grow = &g_plane[oy * w + x0..oy * w + x1];
                                let ibase = iy * w + (x0 as isize + xs) as usize;
                                let irow = &x_plane[ibase..][..x1 - x0];
                                let girow = &mut gi_plane[ibase..][..x1 - x0];
                                for ((&g, &xv), gi) in
                                    grow.iter().zip(irow).zip(girow.iter_mut())
                                {
                                    wgrad += g * xv;
                                    *gi += wv * g;
                                }
                            }
                            self.grad_weights[widx] += wgrad;
                        }
                    }
                }
            }
        }
        grad_in
    }

    pub fn zero_grads(&mut self) {
        self.grad_weights.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    /// One Adam update from the accumulated gradients.
    pub fn adam_step(&mut self, cfg: &AdamConfig) {
        self.step += 1;
        adam_update(
            &mut self.weights,
            &self.grad_weights,
            &mut self.m_weights,
            &mut self.v_weights,
            self.step,
            cfg,
        );
        adam_update(
            &mut self.bias,
            &self.grad_bias,
            &mut self.m_bias,
            &mut self.v_bias,
            self.step,
            cfg,
        );
    }
}

/// Adam hyperparameters; the defaults are the usual 0.9 / 0.999 / 1e-8
/// with the training default learning rate.
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 2e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..Default::default()
        }
    }
}

/// In-place Adam with bias correction; `step` counts this update (1-based).
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    cfg: &AdamConfig,
) {
    assert_eq!(params.len(), grads.len());
    let bc1 = 1.0 - cfg.beta1.powi(step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(step as i32);
    for i in 0..params.len() {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

pub fn relu(x: &Tensor4) -> Tensor4 {
    let (n, c, h, w) = x.shape();
    let data = x.as_slice().iter().map(|&v| v.max(0.0)).collect();
    Tensor4::from_vec(data, n, c, h, w)
}

/// Gradient through ReLU, gated on the activation output (the gradient at
/// exactly zero is zero).
pub fn relu_backward(grad_out: &Tensor4, activated: &Tensor4) -> Tensor4 {
    assert_eq!(grad_out.shape(), activated.shape());
    let (n, c, h, w) = grad_out.shape();
    let data = grad_out
        .as_slice()
        .iter()
        .zip(activated.as_slice())
        .map(|(&g, &a)| if a > 0.0 { g } else { 0.0 })
        .collect();
    Tensor4::from_vec(data, n, c, h, w)
}

/// Winner positions of a 2x2 max pool, one quadrant index (0..4) per
/// output cell, in output scan order.
pub struct PoolIndices {
    quadrant: Vec<u8>,
    in_shape: (usize, usize, usize, usize),
}

/// 2x2 max pooling with stride 2; ties go to the first position in
/// (top-left, top-right, bottom-left, bottom-right) order.
pub fn maxpool2(x: &Tensor4) -> (Tensor4, PoolIndices) {
    let (n, c, h, w) = x.shape();
    assert!(h % 2 == 0 && w % 2 == 0, "pooling needs even height/width");
    let (ho, wo) = (h / 2, w / 2);
    let mut out = Tensor4::zeros(n, c, ho, wo);
    let mut quadrant = vec![0u8; n * c * ho * wo];
    let mut qi = 0usize;
    for b in 0..n {
        for ch in 0..c {
            let plane = x.plane(b, ch);
            let out_plane = out.plane_mut(b, ch);
            for oy in 0..ho {
                for ox in 0..wo {
                    let base = 2 * oy * w + 2 * ox;
                    let cand = [plane[base], plane[base + 1], plane[base + w], plane[base + w + 1]];
                    let mut best = 0usize;
                    for q in 1..4 {
                        if cand[q] > cand[best] {
                            best = q;
                        }
                    }
                    out_plane[oy * wo + ox] = cand[best];
                    quadrant[qi] = best as u8;
                    qi += 1;
                }
            }
        }
    }
    (
        out,
        PoolIndices {
            quadrant,
            in_shape: (n, c, h, w),
        },
    )
}

/// Routes pooled gradients back to the winning input positions.
pub fn maxpool2_backward(grad_out: &Tensor4, idx: &PoolIndices) -> Tensor4 {
    let (n, c, h, w) = idx.in_shape;
    assert_eq!(grad_out.shape(), (n, c, h / 2, w / 2));
    let (ho, wo) = (h / 2, w / 2);
    let mut grad_in = Tensor4::zeros(n, c, h, w);
    let mut qi = 0usize;
    for b in 0..n {
        for ch in 0..c {
            let g_plane = grad_out.plane(b, ch);
            let gi_plane = grad_in.plane_mut(b, ch);
            for oy in 0..ho {
                for ox in 0..wo {
                    let q = idx.quadrant[qi] as usize;
                    qi += 1;
                    let base = 2 * oy * w + 2 * ox;
                    let pos = base + (q / 2) * w + (q % 2);
                    gi_plane[pos] += g_plane[oy * wo + ox];
                }
            }
        }
    }
    grad_in
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample2(x: &Tensor4) -> Tensor4 {
    let (n, c, h, w) = x.shape();
    let mut out = Tensor4::zeros(n, c, 2 * h, 2 * w);
    for b in 0..n {
        for ch in 0..c {
            let plane = x.plane(b, ch);
            let out_plane = out.plane_mut(b, ch);
            for y in 0..h {
                for x_ in 0..w {
                    let v = plane[y * w + x_];
                    let base = 2 * y * 2 * w + 2 * x_;
                    out_plane[base] = v;
                    out_plane[base + 1] = v;
                    out_plane[base + 2 * w] = v;
                    out_plane[base + 2 * w + 1] = v;
                }
            }
        }
    }
    out
}

/// Each input cell collects the gradients of the four outputs it fed.
pub fn upsample2_backward(grad_out: &Tensor4) -> Tensor4 {
    let (n, c, h2, w2) = grad_out.shape();
    assert!(h2 % 2 == 0 && w2 % 2 == 0);
    let (h, w) = (h2 / 2, w2 / 2);
    let mut grad_in = Tensor4::zeros(n, c, h, w);
    for b in 0..n {
        for ch in 0..c {
            let g_plane = grad_out.plane(b, ch);
            let gi_plane = grad_in.plane_mut(b, ch);
            for y in 0..h {
                for x_ in 0..w {
                    let base = 2 * y * w2 + 2 * x_;
                    gi_plane[y * w + x_] =
                        g_plane[base] + g_plane[base + 1] + g_plane[base + w2] + g_plane[base + w2 + 1];
                }
            }
        }
    }
    grad_in
}

/// Concatenates two tensors along the channel axis.
pub fn concat_channels(a: &Tensor4, b: &Tensor4) -> Tensor4 {
    let (n, ca, h, w) = a.shape();
    let (nb, cb, hb, wb) = b.shape();
    assert!(n == nb && h == hb && w == wb, "concat shape mismatch");
    let mut out = Tensor4::zeros(n, ca + cb, h, w);
    for bi in 0..n {
        for c in 0..ca {
            out.plane_mut(bi, c).copy_from_slice(a.plane(bi, c));
        }
        for c in 0..cb {
            out.plane_mut(bi, ca + c).copy_from_slice(b.plane(bi, c));
        }
    }
    out
}

/// Splits a gradient back into the two channel blocks of a concat.
pub fn split_channels(grad: &Tensor4, first_channels: usize) -> (Tensor4, Tensor4) {
    let (n, c, h, w) = grad.shape();
    assert!(first_channels <= c);
    let mut a = Tensor4::zeros(n, first_channels, h, w);
    let mut b = Tensor4::zeros(n, c - first_channels, h, w);
    for bi in 0..n {
        for ch in 0..first_channels {
            a.plane_mut(bi, ch).copy_from_slice(grad.plane(bi, ch));
        }
        for ch in 0..c - first_channels {
            b.plane_mut(bi, ch)
                .copy_from_slice(grad.plane(bi, first_channels + ch));
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_tensor(n: usize, c: usize, h: usize, w: usize, seed: u64) -> Tensor4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor4::from_vec(data, n, c, h, w)
    }

    fn random_conv(in_ch: usize, out_ch: usize, kernel: usize, seed: u64) -> Conv2d {
        let mut layer = Conv2d::new(in_ch, out_ch, kernel);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut layer.weights {
            *w = rng.gen_range(-1.0..1.0);
        }
        for b in &mut layer.bias {
            *b = rng.gen_range(-0.5..0.5);
        }
        layer
    }

    /// Reference convolution with six explicit loops; deliberately slow
    /// and obvious so the fast path can be checked against it.
    fn naive_conv(layer: &Conv2d, x: &Tensor4) -> Tensor4 {
        let (n, _, h, w) = x.shape();
        let pad = (layer.kernel - 1) / 2;
        let mut out = Tensor4::zeros(n, layer.out_ch, h, w);
        for b in 0..n {
            for co in 0..layer.out_ch {
                for oy in 0..h {
                    for ox in 0..w {
                        let mut acc = layer.bias[co];
                        for ci in 0..layer.in_ch {
                            for ky in 0..layer.kernel {
                                for kx in 0..layer.kernel {
                                    let iy = oy as isize + ky as isize - pad as isize;
                                    let ix = ox as isize + kx as isize - pad as isize;
                                    if iy >= 0
                                        && (iy as usize) < h
                                        && ix >= 0
                                        && (ix as usize) < w
                                    {
                                        acc += layer.weight(co, ci, ky, kx)
                                            * x.at(b, ci, iy as usize, ix as usize);
                                    }
                                }
                            }
                        }
                        out.set(b, co, oy, ox, acc);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel_reproduces_the_input() {
        let mut layer = Conv2d::new(1, 1, 3);
        layer.weights[4] = 1.0; // centre tap
        let x = random_tensor(2, 1, 6, 7, 1);
        let y = layer.forward(&x);
        assert_eq!(x.as_slice(), y.as_slice());
    }

    #[test]
    fn averaging_kernel_matches_hand_computation() {
        let mut layer = Conv2d::new(1, 1, 3);
        layer.weights.fill(1.0 / 9.0);
        let x = Tensor4::from_vec((1..=9).map(|v| v as f64).collect(), 1, 1, 3, 3);
        let y = layer.forward(&x);
        // Centre pixel sees all nine values.
        assert!((y.at(0, 0, 1, 1) - 5.0).abs() < 1e-12);
        // Top-left corner sees 1,2,4,5 and five zero pads.
        assert!((y.at(0, 0, 0, 0) - 12.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn fast_conv_matches_naive_conv_for_all_kernel_sizes() {
        for (kernel, seed) in [(1usize, 10u64), (2, 11), (3, 12), (5, 13)] {
            let layer = random_conv(3, 4, kernel, seed);
            let x = random_tensor(2, 3, 8, 9, seed + 100);
            let fast = layer.forward(&x);
            let slow = naive_conv(&layer, &x);
            let max_err = fast
                .as_slice()
                .iter()
                .zip(slow.as_slice())
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err < 1e-12, "kernel {kernel}: max error {max_err}");
        }
    }

    #[test]
    fn even_kernel_pads_bottom_right() {
        // A 2x2 kernel reading only the bottom-right tap must shift the
        // image up-left, with zeros entering from the bottom/right pad.
        let mut layer = Conv2d::new(1, 1, 2);
        layer.weights[3] = 1.0; // tap (ky=1, kx=1)
        let x = Tensor4::from_vec((1..=4).map(|v| v as f64).collect(), 1, 1, 2, 2);
        let y = layer.forward(&x);
        assert_eq!(y.as_slice(), &[4.0, 0.0, 0.0, 0.0]);
    }

    /// Scalar loss used by the finite-difference checks: a fixed random
    /// projection of the output.
    fn proj_loss(out: &Tensor4, proj: &Tensor4) -> f64 {
        out.as_slice()
            .iter()
            .zip(proj.as_slice())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    #[test]
    fn conv_gradients_match_finite_differences() {
        for (kernel, seed) in [(1usize, 20u64), (2, 21), (3, 22)] {
            let mut layer = random_conv(2, 3, kernel, seed);
            let x = random_tensor(2, 2, 5, 6, seed + 50);
            let proj = random_tensor(2, 3, 5, 6, seed + 80);
            layer.zero_grads();
            let grad_in = layer.backward(&proj, &x);

            let h = 1e-5;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
            for _ in 0..20 {
                let wi = rng.gen_range(0..layer.weights.len());
                let orig = layer.weights[wi];
                layer.weights[wi] = orig + h;
                let up = proj_loss(&layer.forward(&x), &proj);
                layer.weights[wi] = orig - h;
                let down = proj_loss(&layer.forward(&x), &proj);
                layer.weights[wi] = orig;
                let fd = (up - down) / (2.0 * h);
                let an = layer.grad_weights[wi];
                assert!(
                    (fd - an).abs() <= 1e-6 * (1.0 + fd.abs().max(an.abs())),
                    "kernel {kernel} weight {wi}: fd {fd} vs {an}"
                );
            }
            for bi in 0..layer.bias.len() {
                let orig = layer.bias[bi];
                layer.bias[bi] = orig + h;
                let up = proj_loss(&layer.forward(&x), &proj);
                layer.bias[bi] = orig - h;
                let down = proj_loss(&layer.forward(&x), &proj);
                layer.bias[bi] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!((fd - layer.grad_bias[bi]).abs() <= 1e-6 * (1.0 + fd.abs()));
            }
            let mut xp = x.clone();
            for _ in 0..20 {
                let xi = rng.gen_range(0..xp.len());
                let orig = xp.as_slice()[xi];
                xp.as_mut_slice()[xi] = orig + h;
                let up = proj_loss(&layer.forward(&xp), &proj);
                xp.as_mut_slice()[xi] = orig - h;
                let down = proj_loss(&layer.forward(&xp), &proj);
                xp.as_mut_slice()[xi] = orig;
                let fd = (up - down) / (2.0 * h);
                let an = grad_in.as_slice()[xi];
                assert!(
                    (fd - an).abs() <= 1e-6 * (1.0 + fd.abs().max(an.abs())),
                    "kernel {kernel} input {xi}: fd {fd} vs {an}"
                );
            }
        }
    }

    #[test]
    fn backward_accumulates_rather_than_overwrites() {
        let mut layer = random_conv(1, 1, 3, 30);
        let x = random_tensor(1, 1, 4, 4, 31);
        let g = random_tensor(1, 1, 4, 4, 32);
        layer.zero_grads();
        layer.backward(&g, &x);
        let once = layer.grad_weights.clone();
        layer.backward(&g, &x);
        for (a, b) in once.iter().zip(&layer.grad_weights) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn relu_clamps_and_gates() {
        let x = Tensor4::from_vec(vec![-1.0, 0.0, 2.0, -0.5], 1, 1, 2, 2);
        let y = relu(&x);
        assert_eq!(y.as_slice(), &[0.0, 0.0, 2.0, 0.0]);
        let g = Tensor4::from_vec(vec![1.0, 1.0, 1.0, 1.0], 1, 1, 2, 2);
        let gi = relu_backward(&g, &y);
        assert_eq!(gi.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn relu_gradient_matches_finite_differences_away_from_zero() {
        let x = Tensor4::from_vec(vec![-0.7, 0.9, 0.3, -0.2], 1, 1, 2, 2);
        let proj = Tensor4::from_vec(vec![0.5, -1.0, 2.0, 1.5], 1, 1, 2, 2);
        let y = relu(&x);
        let gi = relu_backward(&proj, &y);
        let h = 1e-6;
        for i in 0..4 {
            let mut xp = x.clone();
            xp.as_mut_slice()[i] += h;
            let up = proj_loss(&relu(&xp), &proj);
            xp.as_mut_slice()[i] -= 2.0 * h;
            let down = proj_loss(&relu(&xp), &proj);
            let fd = (up - down) / (2.0 * h);
            assert!((fd - gi.as_slice()[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn maxpool_picks_maxima_and_routes_gradients() {
        let x = Tensor4::from_vec(
            vec![
                1.0, 3.0, 2.0, 2.0, //
                4.0, 2.0, 2.0, 2.0, //
                5.0, 5.0, 0.0, -1.0, //
                5.0, 5.0, -2.0, 0.5,
            ],
            1,
            1,
            4,
            4,
        );
        let (y, idx) = maxpool2(&x);
        assert_eq!(y.as_slice(), &[4.0, 2.0, 5.0, 0.5]);
        let g = Tensor4::from_vec(vec![1.0, 2.0, 3.0, 4.0], 1, 1, 2, 2);
        let gi = maxpool2_backward(&g, &idx);
        // The all-5 quadrant ties; the first position (top-left) wins.
        assert_eq!(
            gi.as_slice(),
            &[
                0.0, 0.0, 2.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                3.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 4.0
            ]
        );
        // The 2,2,2,2 quadrant also ties: gradient 2.0 went top-left.
    }

    #[test]
    fn upsample_repeats_and_its_backward_sums() {
        let x = Tensor4::from_vec(vec![1.0, 2.0, 3.0, 4.0], 1, 1, 2, 2);
        let y = upsample2(&x);
        assert_eq!(
            y.as_slice(),
            &[
                1.0, 1.0, 2.0, 2.0, //
                1.0, 1.0, 2.0, 2.0, //
                3.0, 3.0, 4.0, 4.0, //
                3.0, 3.0, 4.0, 4.0
            ]
        );
        let g = Tensor4::from_vec((1..=16).map(|v| v as f64).collect(), 1, 1, 4, 4);
        let gi = upsample2_backward(&g);
        assert_eq!(gi.as_slice(), &[1.0 + 2.0 + 5.0 + 6.0, 3.0 + 4.0 + 7.0 + 8.0, 9.0 + 10.0 + 13.0 + 14.0, 11.0 + 12.0 + 15.0 + 16.0]);
    }

    #[test]
    fn concat_then_split_round_trips() {
        let a = random_tensor(2, 3, 4, 4, 40);
        let b = random_tensor(2, 5, 4, 4, 41);
        let cat = concat_channels(&a, &b);
        assert_eq!(cat.shape(), (2, 8, 4, 4));
        let (ga, gb) = split_channels(&cat, 3);
        assert_eq!(ga.as_slice(), a.as_slice());
        assert_eq!(gb.as_slice(), b.as_slice());
    }

    #[test]
    fn adam_minimizes_a_scalar_quadratic() {
        // d/dw (w - 3)^2, starting at 0 with lr 0.1.
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..Default::default()
        };
        let mut w = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        for step in 1..=100 {
            let g = vec![2.0 * (w[0] - 3.0)];
            adam_update(&mut w, &g, &mut m, &mut v, step, &cfg);
        }
        assert!((w[0] - 3.0).abs() < 0.5, "w = {}", w[0]);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // With bias correction the very first update is lr * sign(g).
        let cfg = AdamConfig::with_learning_rate(0.01);
        let mut w = vec![1.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        adam_update(&mut w, &[0.37], &mut m, &mut v, 1, &cfg);
        assert!((w[0] - (1.0 - 0.01)).abs() < 1e-6, "w = {}", w[0]);
    }

    #[test]
    fn he_init_is_seed_deterministic_with_zero_bias() {
        let mut a = Conv2d::new(4, 8, 3);
        let mut b = Conv2d::new(4, 8, 3);
        a.init_he(&mut ChaCha8Rng::seed_from_u64(5));
        b.init_he(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.weights, b.weights);
        assert!(a.bias.iter().all(|&x| x == 0.0));
        let std = (a.weights.iter().map(|&w| w * w).sum::<f64>() / a.weights.len() as f64).sqrt();
        let expect = (2.0f64 / (4.0 * 9.0)).sqrt();
        assert!((std - expect).abs() / expect < 0.15, "std {std} vs {expect}");
    }
}
