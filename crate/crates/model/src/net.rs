use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BranchKind, ShapePlan, TargetNorm, U2fConfig, SHUFFLE_GROUPS};
use crate::{ModelError, Result};
use u2s_nn::{
    batch_norm3d_backward, batch_norm3d_forward, channel_concat, channel_shuffle,
    channel_shuffle_backward, channel_split, conv3d_backward, conv3d_forward, linear_backward,
    linear_forward, max_pool3d, max_pool3d_backward, relu, relu_backward, BnContext, ConvSpec,
    Mode, PoolContext, Tensor,
};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

pub struct U2fModel {
    pub config: U2fConfig,
    pub plan: ShapePlan,
    pub params: IndexMap<String, Tensor>,
    pub buffers: IndexMap<String, Tensor>,
    pub norm: TargetNorm,
    pub seed: u64,
    pub epoch: u32,
}

/// Everything the backward pass needs, captured during forward.
pub struct ForwardTape {
    input: Tensor,
    conv1_out: Tensor,
    bn1_ctx: BnContext,
    bn1_out: Tensor,
    pool1_ctx: PoolContext,
    pool1_out: Tensor,
    branch_inputs: Vec<Tensor>, // empty for the plain-3d variant
    hybrid_out: Tensor,
    bn2_ctx: BnContext,
    bn2_out: Tensor,
    pool2_ctx: PoolContext,
    gconv_in: Tensor,
    gconv_out: Tensor,
    bn3_ctx: BnContext,
    bn3_out: Tensor,
    pool3_ctx: PoolContext,
    flat: Tensor,
    batch: usize,
}

pub struct BackwardArtifacts {
    pub param_grads: IndexMap<String, Tensor>,
    /// Gradient with respect to the network input.
    pub input_grad: Tensor,
    /// Gradient at the last convolutional activation (the ReLU output
    /// feeding the final pooling), shape (B, C, T', H', W').
    pub lastconv_grad: Tensor,
}

fn uniform_init(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize) -> Tensor {
    let bound = (1.0 / fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor::from_vec(shape, data).expect("init shape")
}

impl U2fModel {
    /// Allocates and initializes every layer of the network graph for
    /// the given config. Fails on an inconsistent config before any
    /// allocation.
    pub fn build(config: U2fConfig, seed: u64) -> Result<Self> {
        let plan = config.plan()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = IndexMap::new();
        let mut buffers = IndexMap::new();

        let l1 = config.layer1_filters;
        params.insert("conv1.weight".into(), uniform_init(&mut rng, &[l1, 1, 1, 1, 1], 1));
        params.insert("conv1.bias".into(), Tensor::zeros(&[l1]));
        params.insert("bn1.gamma".into(), Tensor::filled(&[l1], 1.0));
        params.insert("bn1.beta".into(), Tensor::zeros(&[l1]));

        let total = plan.hybrid_total;
        if config.hybrid_as_plain3d {
            let fan_in = l1 * 27;
            params.insert(
                "hybrid.plain.weight".into(),
                uniform_init(&mut rng, &[total, l1, 3, 3, 3], fan_in),
            );
            params.insert("hybrid.plain.bias".into(), Tensor::zeros(&[total]));
        } else {
            for kind in config.enabled_branches() {
                let (kt, kh, kw) = kind.kernel();
                let fan_in = plan.branch_in * kt * kh * kw;
                params.insert(
                    format!("hybrid.{}.weight", kind.name()),
                    uniform_init(&mut rng, &[plan.branch_out, plan.branch_in, kt, kh, kw], fan_in),
                );
                params.insert(format!("hybrid.{}.bias", kind.name()), Tensor::zeros(&[plan.branch_out]));
            }
        }
        params.insert("bn2.gamma".into(), Tensor::filled(&[total], 1.0));
        params.insert("bn2.beta".into(), Tensor::zeros(&[total]));

        let c3 = config.grouped_conv_filters;
        let g = config.grouped_conv_groups;
        params.insert(
            "gconv.weight".into(),
            uniform_init(&mut rng, &[c3, total / g, 1, 1, 1], total / g),
        );
        params.insert("gconv.bias".into(), Tensor::zeros(&[c3]));
        params.insert("bn3.gamma".into(), Tensor::filled(&[c3], 1.0));
        params.insert("bn3.beta".into(), Tensor::zeros(&[c3]));

        let m = config.head_outputs;
        for head in ["head1", "head2"] {
            // regression heads get a deliberately small init (0.1x the
            // fan-in bound) so initial outputs stay near the bias value
            // instead of adding unit-scale noise over 2880+ features
            let mut w = uniform_init(&mut rng, &[m, plan.flatten], plan.flatten);
            for v in w.data_mut() {
                *v *= 0.1;
            }
            params.insert(format!("{head}.weight"), w);
            // targets are min-max normalized to [0, 1]; starting the
            // heads at the range midpoint saves the early epochs
            // otherwise spent drifting into range
            params.insert(format!("{head}.bias"), Tensor::filled(&[m], 0.5));
        }

        for (bn, c) in [("bn1", l1), ("bn2", total), ("bn3", c3)] {
            buffers.insert(format!("{bn}.running_mean"), Tensor::zeros(&[c]));
            buffers.insert(format!("{bn}.running_var"), Tensor::filled(&[c], 1.0));
        }

        Ok(Self {
            config,
            plan,
            params,
            buffers,
            norm: TargetNorm::default(),
            seed,
            epoch: 0,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.values().map(|t| t.len()).sum()
    }

    pub fn param(&self, name: &str) -> &Tensor {
        self.params.get(name).unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    fn buffer_pair(&mut self, bn: &str) -> (Vec<f64>, Vec<f64>) {
        let m = self.buffers[&format!("{bn}.running_mean")].data().to_vec();
        let v = self.buffers[&format!("{bn}.running_var")].data().to_vec();
        (m, v)
    }

    fn store_buffer_pair(&mut self, bn: &str, mean: Vec<f64>, var: Vec<f64>) {
        let c = mean.len();
        self.buffers.insert(
            format!("{bn}.running_mean"),
            Tensor::from_vec(&[c], mean).expect("buffer shape"),
        );
        self.buffers.insert(
            format!("{bn}.running_var"),
            Tensor::from_vec(&[c], var).expect("buffer shape"),
        );
    }

    fn bn_forward(&mut self, bn: &str, input: &Tensor, mode: Mode) -> Result<(Tensor, BnContext)> {
        let gamma = self.param(&format!("{bn}.gamma")).data().to_vec();
        let beta = self.param(&format!("{bn}.beta")).data().to_vec();
        let (mut rm, mut rv) = self.buffer_pair(bn);
        let out = batch_norm3d_forward(
            input, &gamma, &beta, &mut rm, &mut rv, BN_EPS, BN_MOMENTUM, mode,
        )?;
        if matches!(mode, Mode::Training) {
            self.store_buffer_pair(bn, rm, rv);
        }
        Ok(out)
    }

    fn conv_spec(&self, name: &str) -> ConvSpec {
        let cfg = &self.config;
        let plan = &self.plan;
        match name {
            "conv1" => ConvSpec {
                in_channels: 1,
                out_channels: cfg.layer1_filters,
                kernel: (1, 1, 1),
                padding: (0, 0, 0),
                groups: 1,
            },
            "hybrid.plain" => ConvSpec {
                in_channels: cfg.layer1_filters,
                out_channels: plan.hybrid_total,
                kernel: (3, 3, 3),
                padding: (1, 1, 1),
                groups: 1,
            },
            "gconv" => ConvSpec {
                in_channels: plan.hybrid_total,
                out_channels: cfg.grouped_conv_filters,
                kernel: (1, 1, 1),
                padding: (0, 0, 0),
                groups: cfg.grouped_conv_groups,
            },
            _ => unreachable!("unknown conv {name}"),
        }
    }

    fn branch_spec(&self, kind: BranchKind) -> ConvSpec {
        ConvSpec {
            in_channels: self.plan.branch_in,
            out_channels: self.plan.branch_out,
            kernel: kind.kernel(),
            padding: kind.padding(),
            groups: 1,
        }
    }

    /// Runs the network on a batch shaped (B, 1, T, H, W). Returns the
    /// two head outputs, each (B, head_outputs), plus the tape for
    /// backward. Training mode updates batch-norm running statistics.
    pub fn forward(&mut self, batch: &Tensor, mode: Mode) -> Result<(Tensor, Tensor, ForwardTape)> {
        let dims = batch.dims5()?;
        let (c, t, h, w) = self.config.input_shape;
        if dims[1..] != [c, t, h, w] {
            return Err(ModelError::InvalidConfig(format!(
                "batch shaped {:?}, model expects (B, {c}, {t}, {h}, {w})",
                batch.shape()
            )));
        }
        let b = dims[0];

        let spec1 = self.conv_spec("conv1");
        let conv1_out = conv3d_forward(batch, &spec1, self.param("conv1.weight"), self.param("conv1.bias"))?;
        let (bn1_out, bn1_ctx) = self.bn_forward("bn1", &conv1_out, mode)?;
        let relu1 = relu(&bn1_out);
        let (pool1_out, pool1_ctx) = max_pool3d(&relu1)?;

        let (hybrid_out, branch_inputs) = if self.config.hybrid_as_plain3d {
            let spec = self.conv_spec("hybrid.plain");
            let out = conv3d_forward(
                &pool1_out,
                &spec,
                self.param("hybrid.plain.weight"),
                self.param("hybrid.plain.bias"),
            )?;
            (out, Vec::new())
        } else {
            let branches = self.config.enabled_branches();
            let sizes = vec![self.plan.branch_in; branches.len()];
            let parts = channel_split(&pool1_out, &sizes)?;
            let mut outs = Vec::with_capacity(branches.len());
            for (kind, part) in branches.iter().zip(&parts) {
                let spec = self.branch_spec(*kind);
                outs.push(conv3d_forward(
                    part,
                    &spec,
                    self.param(&format!("hybrid.{}.weight", kind.name())),
                    self.param(&format!("hybrid.{}.bias", kind.name())),
                )?);
            }
            (channel_concat(&outs)?, parts)
        };

        let (bn2_out, bn2_ctx) = self.bn_forward("bn2", &hybrid_out, mode)?;
        let relu2 = relu(&bn2_out);
        let (pool2_out, pool2_ctx) = max_pool3d(&relu2)?;

        let gconv_in = if self.config.use_shuffle {
            channel_shuffle(&pool2_out, SHUFFLE_GROUPS)?
        } else {
            pool2_out
        };
        let gspec = self.conv_spec("gconv");
        let gconv_out = conv3d_forward(&gconv_in, &gspec, self.param("gconv.weight"), self.param("gconv.bias"))?;
        let (bn3_out, bn3_ctx) = self.bn_forward("bn3", &gconv_out, mode)?;
        let relu3 = relu(&bn3_out);
        let (pool3_out, pool3_ctx) = max_pool3d(&relu3)?;

        let flat = pool3_out.clone().reshape(&[b, self.plan.flatten])?;
        let out1 = linear_forward(&flat, self.param("head1.weight"), self.param("head1.bias"))?;
        let out2 = linear_forward(&flat, self.param("head2.weight"), self.param("head2.bias"))?;

        let tape = ForwardTape {
            input: batch.clone(),
            conv1_out,
            bn1_ctx,
            bn1_out,
            pool1_ctx,
            pool1_out,
            branch_inputs,
            hybrid_out,
            bn2_ctx,
            bn2_out,
            pool2_ctx,
            gconv_in,
            gconv_out,
            bn3_ctx,
            bn3_out,
            pool3_ctx,
            flat,
            batch: b,
        };
        Ok((out1, out2, tape))
    }

    /// Backpropagates head gradients through the tape. Returns parameter
    /// gradients keyed like `params`, plus the input-level and
    /// last-conv-activation gradients.
    pub fn backward(
        &self,
        tape: &ForwardTape,
        grad_head1: &Tensor,
        grad_head2: &Tensor,
    ) -> Result<BackwardArtifacts> {
        let mut grads: IndexMap<String, Tensor> = IndexMap::new();

        let g1 = linear_backward(&tape.flat, self.param("head1.weight"), grad_head1)?;
        let g2 = linear_backward(&tape.flat, self.param("head2.weight"), grad_head2)?;
        grads.insert("head1.weight".into(), g1.weights);
        grads.insert("head1.bias".into(), g1.bias);
        grads.insert("head2.weight".into(), g2.weights);
        grads.insert("head2.bias".into(), g2.bias);
        let mut dflat = g1.input;
        for (a, b) in dflat.data_mut().iter_mut().zip(g2.input.data()) {
            *a += b;
        }

        let c3 = self.config.grouped_conv_filters;
        let p3 = self.plan.after_pool3;
        let dpool3 = dflat.reshape(&[tape.batch, c3, p3[0], p3[1], p3[2]])?;
        let drelu3 = max_pool3d_backward(&tape.pool3_ctx, &dpool3)?;
        let lastconv_grad = drelu3.clone();
        let dbn3 = relu_backward(&tape.bn3_out, &drelu3)?;
        let (dgconv_out, dgamma3, dbeta3) = batch_norm3d_backward(
            &tape.gconv_out,
            self.param("bn3.gamma").data(),
            &tape.bn3_ctx,
            &dbn3,
        )?;
        grads.insert("bn3.gamma".into(), Tensor::from_vec(&[c3], dgamma3)?);
        grads.insert("bn3.beta".into(), Tensor::from_vec(&[c3], dbeta3)?);

        let gspec = self.conv_spec("gconv");
        let gc = conv3d_backward(&tape.gconv_in, &gspec, self.param("gconv.weight"), &dgconv_out)?;
        grads.insert("gconv.weight".into(), gc.weights);
        grads.insert("gconv.bias".into(), gc.bias);
        let dpool2 = if self.config.use_shuffle {
            channel_shuffle_backward(&gc.input, SHUFFLE_GROUPS)?
        } else {
            gc.input
        };

        let drelu2 = max_pool3d_backward(&tape.pool2_ctx, &dpool2)?;
        let dbn2 = relu_backward(&tape.bn2_out, &drelu2)?;
        let total = self.plan.hybrid_total;
        let (dhybrid_out, dgamma2, dbeta2) = batch_norm3d_backward(
            &tape.hybrid_out,
            self.param("bn2.gamma").data(),
            &tape.bn2_ctx,
            &dbn2,
        )?;
        grads.insert("bn2.gamma".into(), Tensor::from_vec(&[total], dgamma2)?);
        grads.insert("bn2.beta".into(), Tensor::from_vec(&[total], dbeta2)?);

        let dpool1 = if self.config.hybrid_as_plain3d {
            let spec = self.conv_spec("hybrid.plain");
            let g = conv3d_backward(&tape.pool1_out, &spec, self.param("hybrid.plain.weight"), &dhybrid_out)?;
            grads.insert("hybrid.plain.weight".into(), g.weights);
            grads.insert("hybrid.plain.bias".into(), g.bias);
            g.input
        } else {
            let branches = self.config.enabled_branches();
            let sizes = vec![self.plan.branch_out; branches.len()];
            let douts = channel_split(&dhybrid_out, &sizes)?;
            let mut dparts = Vec::with_capacity(branches.len());
            for ((kind, part), dout) in branches.iter().zip(&tape.branch_inputs).zip(&douts) {
                let spec = self.branch_spec(*kind);
                let g = conv3d_backward(part, &spec, self.param(&format!("hybrid.{}.weight", kind.name())), dout)?;
                grads.insert(format!("hybrid.{}.weight", kind.name()), g.weights);
                grads.insert(format!("hybrid.{}.bias", kind.name()), g.bias);
                dparts.push(g.input);
            }
            channel_concat(&dparts)?
        };

        let drelu1 = max_pool3d_backward(&tape.pool1_ctx, &dpool1)?;
        let dbn1 = relu_backward(&tape.bn1_out, &drelu1)?;
        let l1 = self.config.layer1_filters;
        let (dconv1_out, dgamma1, dbeta1) = batch_norm3d_backward(
            &tape.conv1_out,
            self.param("bn1.gamma").data(),
            &tape.bn1_ctx,
            &dbn1,
        )?;
        grads.insert("bn1.gamma".into(), Tensor::from_vec(&[l1], dgamma1)?);
        grads.insert("bn1.beta".into(), Tensor::from_vec(&[l1], dbeta1)?);

        let spec1 = self.conv_spec("conv1");
        let g = conv3d_backward(&tape.input, &spec1, self.param("conv1.weight"), &dconv1_out)?;
        grads.insert("conv1.weight".into(), g.weights);
        grads.insert("conv1.bias".into(), g.bias);

        // align gradient order with parameter order
        let mut ordered = IndexMap::with_capacity(self.params.len());
        for name in self.params.keys() {
            let g = grads
                .shift_remove(name)
                .ok_or_else(|| ModelError::Corrupt(format!("missing gradient for {name}")))?;
            ordered.insert(name.clone(), g);
        }
        Ok(BackwardArtifacts { param_grads: ordered, input_grad: g.input, lastconv_grad })
    }
}
