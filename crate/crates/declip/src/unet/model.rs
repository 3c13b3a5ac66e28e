//! The U-Net itself: a four-level (by default) encoder/decoder with skip
//! connections, assembled from the primitives in `layers`.
//!
//! Per contraction level: two same-padded 3x3 convs with ReLU, then a 2x2
//! max pool; filter counts double per level. The bottleneck is two more
//! 3x3 convs. Per expansion level: nearest 2x upsample, a 2x2 conv with
//! ReLU halving the channels, concatenation with the matching skip, then
//! two 3x3 convs with ReLU. A linear 1x1 conv maps back to one channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{
    concat_channels, maxpool2, maxpool2_backward, relu, relu_backward, split_channels, upsample2,
    upsample2_backward, AdamConfig, Conv2d, PoolIndices,
};
use super::tensor::Tensor4;
use super::UnetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UNetConfig {
    pub depth: usize,
    pub base_filters: usize,
    /// Input images are `image_size x image_size`, single channel.
    pub image_size: usize,
}

impl Default for UNetConfig {
    fn default() -> Self {
        // Full-scale setup; see `desk` for the fast test-sized variant.
        UNetConfig {
            depth: 4,
            base_filters: 64,
            image_size: 256,
        }
    }
}

impl UNetConfig {
    /// Small configuration for desk experiments and tests: 64x64 images,
    /// 8 base filters, three resolution levels. At this image size the
    /// shallower contraction path trains better than the full-depth one.
    pub fn desk() -> Self {
        UNetConfig {
            depth: 3,
            base_filters: 8,
            image_size: 64,
        }
    }

    pub fn validate(&self) -> Result<(), UnetError> {
        if self.depth == 0 || self.base_filters == 0 {
            return Err(UnetError::BadConfig(
                "depth and base_filters must be positive".into(),
            ));
        }
        if self.image_size % (1 << self.depth) != 0 || self.image_size == 0 {
            return Err(UnetError::BadConfig(format!(
                "image size {} is not divisible by 2^depth = {}",
                self.image_size,
                1 << self.depth
            )));
        }
        Ok(())
    }

    /// Output channels of contraction level `level` (0-based).
    pub fn level_channels(&self, level: usize) -> usize {
        self.base_filters << level
    }
}

#[derive(Debug, Clone)]
pub struct EncLevel {
    pub conv1: Conv2d,
    pub conv2: Conv2d,
}

#[derive(Debug, Clone)]
pub struct DecLevel {
    /// 2x2 conv applied right after upsampling; halves the channels.
    pub up_conv: Conv2d,
    pub conv1: Conv2d,
    pub conv2: Conv2d,
}

#[derive(Debug, Clone)]
pub struct UNetModel {
    pub config: UNetConfig,
    pub enc: Vec<EncLevel>,
    pub bottleneck1: Conv2d,
    pub bottleneck2: Conv2d,
    /// Expansion levels stored deepest first.
    pub dec: Vec<DecLevel>,
    pub final_conv: Conv2d,
}

impl UNetModel {
    /// Builds the network with He-normal weights drawn from the seed, in
    /// a fixed layer order, so identical seeds give identical models.
    pub fn new(config: UNetConfig, seed: u64) -> Result<Self, UnetError> {
        config.validate()?;
        let d = config.depth;
        let mut enc = Vec::with_capacity(d);
        for level in 0..d {
            let c_in = if level == 0 {
                1
            } else {
                config.level_channels(level - 1)
            };
            let c_out = config.level_channels(level);
            enc.push(EncLevel {
                conv1: Conv2d::new(c_in, c_out, 3),
                conv2: Conv2d::new(c_out, c_out, 3),
            });
        }
        let c_deep = config.level_channels(d - 1);
        let bottleneck1 = Conv2d::new(c_deep, 2 * c_deep, 3);
        let bottleneck2 = Conv2d::new(2 * c_deep, 2 * c_deep, 3);
        let mut dec = Vec::with_capacity(d);
        for level in (0..d).rev() {
            let c_level = config.level_channels(level);
            dec.push(DecLevel {
                up_conv: Conv2d::new(2 * c_level, c_level, 2),
                conv1: Conv2d::new(2 * c_level, c_level, 3),
                conv2: Conv2d::new(c_level, c_level, 3),
            });
        }
        let final_conv = Conv2d::new(config.base_filters, 1, 1);

        let mut model = UNetModel {
            config,
            enc,
            bottleneck1,
            bottleneck2,
            dec,
            final_conv,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        model.visit_layers_mut(&mut |layer| layer.init_he(&mut rng));
        Ok(model)
    }

    /// Visits every conv layer in the fixed topology order (contraction,
    /// bottleneck, expansion deepest-first, final).
    pub fn visit_layers<'a>(&'a self, f: &mut dyn FnMut(&'a Conv2d)) {
        for level in &self.enc {
            f(&level.conv1);
            f(&level.conv2);
        }
        f(&self.bottleneck1);
        f(&self.bottleneck2);
        for level in &self.dec {
            f(&level.up_conv);
            f(&level.conv1);
            f(&level.conv2);
        }
        f(&self.final_conv);
    }

    pub fn visit_layers_mut(&mut self, f: &mut dyn FnMut(&mut Conv2d)) {
        for level in &mut self.enc {
            f(&mut level.conv1);
            f(&mut level.conv2);
        }
        f(&mut self.bottleneck1);
        f(&mut self.bottleneck2);
        for level in &mut self.dec {
            f(&mut level.up_conv);
            f(&mut level.conv1);
            f(&mut level.conv2);
        }
        f(&mut self.final_conv);
    }

    pub fn parameter_count(&self) -> usize {
        let mut count = 0;
        self.visit_layers(&mut |l| count += l.parameter_count());
        count
    }

    fn check_input(&self, x: &Tensor4) -> Result<(), UnetError> {
        let (_, c, h, w) = x.shape();
        let s = self.config.image_size;
        if c != 1 || h != s || w != s {
            return Err(UnetError::ShapeMismatch(format!(
                "expected (N, 1, {s}, {s}) input, got {:?}",
                x.shape()
            )));
        }
        Ok(())
    }

    /// Inference pass without gradient bookkeeping.
    pub fn forward(&self, x: &Tensor4) -> Result<Tensor4, UnetError> {
        self.check_input(x)?;
        let mut skips = Vec::with_capacity(self.config.depth);
        let mut cur = x.clone();
        for level in &self.enc {
            let a = relu(&level.conv1.forward(&cur));
            let a = relu(&level.conv2.forward(&a));
            let (pooled, _) = maxpool2(&a);
            skips.push(a);
            cur = pooled;
        }
        cur = relu(&self.bottleneck1.forward(&cur));
        cur = relu(&self.bottleneck2.forward(&cur));
        for (i, level) in self.dec.iter().enumerate() {
            let up = upsample2(&cur);
            let up = relu(&level.up_conv.forward(&up));
            let cat = concat_channels(&up, &skips[self.config.depth - 1 - i]);
            let a = relu(&level.conv1.forward(&cat));
            cur = relu(&level.conv2.forward(&a));
        }
        Ok(self.final_conv.forward(&cur))
    }

    /// Training pass: returns the output plus the activation tape needed
    /// by [`UNetModel::backward`].
    pub fn forward_train(&self, x: &Tensor4) -> Result<(Tensor4, UNetTape), UnetError> {
        self.check_input(x)?;
        let mut enc_tapes = Vec::with_capacity(self.config.depth);
        let mut cur = x.clone();
        for level in &self.enc {
            let input = cur;
            let a1 = relu(&level.conv1.forward(&input));
            let a2 = relu(&level.conv2.forward(&a1));
            let (pooled, pool_idx) = maxpool2(&a2);
            enc_tapes.push(EncTape {
                input,
                a1,
                a2,
                pool_idx,
            });
            cur = pooled;
        }
        let bott_in = cur;
        let bott_a1 = relu(&self.bottleneck1.forward(&bott_in));
        let bott_a2 = relu(&self.bottleneck2.forward(&bott_a1));
        let mut cur = bott_a2.clone();
        let mut dec_tapes = Vec::with_capacity(self.config.depth);
        for (i, level) in self.dec.iter().enumerate() {
            let upsampled = upsample2(&cur);
            let up_a = relu(&level.up_conv.forward(&upsampled));
            let cat = concat_channels(&up_a, &enc_tapes[self.config.depth - 1 - i].a2);
            let a1 = relu(&level.conv1.forward(&cat));
            let a2 = relu(&level.conv2.forward(&a1));
            cur = a2.clone();
            dec_tapes.push(DecTape {
                upsampled,
                up_a,
                cat,
                a1,
                a2,
            });
        }
        let out = self.final_conv.forward(&cur);
        Ok((
            out,
            UNetTape {
                enc: enc_tapes,
                bott_in,
                bott_a1,
                bott_a2,
                dec: dec_tapes,
            },
        ))
    }

    /// Backpropagates `grad_out` through the taped pass, accumulating
    /// weight and bias gradients in every layer.
    pub fn backward(&mut self, tape: &UNetTape, grad_out: &Tensor4) {
        let depth = self.config.depth;
        // Final 1x1 conv.
        let mut g = self
            .final_conv
            .backward(grad_out, &tape.dec[depth - 1].a2);
        // Expansion path, shallowest level first; skip gradients are
        // parked until the matching encoder level comes up.
        let mut skip_grads: Vec<Option<Tensor4>> = (0..depth).map(|_| None).collect();
        for i in (0..depth).rev() {
            let level = &mut self.dec[i];
            let t = &tape.dec[i];
            let g2 = relu_backward(&g, &t.a2);
            let g2 = level.conv2.backward(&g2, &t.a1);
            let g1 = relu_backward(&g2, &t.a1);
            let g_cat = level.conv1.backward(&g1, &t.cat);
            let up_channels = t.up_a.channels();
            let (g_up, g_skip) = split_channels(&g_cat, up_channels);
            skip_grads[depth - 1 - i] = Some(g_skip);
            let g_up = relu_backward(&g_up, &t.up_a);
            let g_upsampled = level.up_conv.backward(&g_up, &t.upsampled);
            g = upsample2_backward(&g_upsampled);
        }
        // Bottleneck.
        let gb = relu_backward(&g, &tape.bott_a2);
        let gb = self.bottleneck2.backward(&gb, &tape.bott_a1);
        let gb = relu_backward(&gb, &tape.bott_a1);
        g = self.bottleneck1.backward(&gb, &tape.bott_in);
        // Contraction path, deepest level first.
        for i in (0..depth).rev() {
            let level = &mut self.enc[i];
            let t = &tape.enc[i];
            let mut g_a2 = maxpool2_backward(&g, &t.pool_idx);
            if let Some(gs) = &skip_grads[i] {
                for (a, &b) in g_a2.as_mut_slice().iter_mut().zip(gs.as_slice()) {
                    *a += b;
                }
            }
            let g_a2 = relu_backward(&g_a2, &t.a2);
            let g_a1 = level.conv2.backward(&g_a2, &t.a1);
            let g_a1 = relu_backward(&g_a1, &t.a1);
            g = level.conv1.backward(&g_a1, &t.input);
        }
    }

    pub fn zero_grads(&mut self) {
        self.visit_layers_mut(&mut |l| l.zero_grads());
    }

    pub fn adam_step(&mut self, cfg: &AdamConfig) {
        self.visit_layers_mut(&mut |l| l.adam_step(cfg));
    }
}

pub struct EncTape {
    pub input: Tensor4,
    pub a1: Tensor4,
    /// Post second conv+ReLU; this is the skip tensor.
    pub a2: Tensor4,
    pub pool_idx: PoolIndices,
}

pub struct DecTape {
    pub upsampled: Tensor4,
    pub up_a: Tensor4,
    pub cat: Tensor4,
    pub a1: Tensor4,
    pub a2: Tensor4,
}

/// Cached activations of one training forward pass.
pub struct UNetTape {
    pub enc: Vec<EncTape>,
    pub bott_in: Tensor4,
    pub bott_a1: Tensor4,
    pub bott_a2: Tensor4,
    pub dec: Vec<DecTape>,
}
