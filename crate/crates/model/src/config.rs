use crate::{ModelError, Result};

/// The shuffle reshapes channels as (3, N); fixed by the three-branch
/// design of the hybrid layer.
pub const SHUFFLE_GROUPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U2fConfig {
    /// Input sample shape (C, T, H, W).
    pub input_shape: (usize, usize, usize, usize),
    pub layer1_filters: usize,
    /// Hybrid layer filters per branch with all three branches enabled;
    /// the total (3x this) is preserved under ablation.
    pub hybrid_filters_per_branch: usize,
    pub grouped_conv_filters: usize,
    pub grouped_conv_groups: usize,
    pub head_outputs: usize,
    pub use_spatial_branch: bool,
    pub use_temporal_branch: bool,
    pub use_joint_branch: bool,
    pub use_shuffle: bool,
    pub hybrid_as_plain3d: bool,
}

impl Default for U2fConfig {
    fn default() -> Self {
        Self {
            input_shape: (1, 30, 50, 82),
            layer1_filters: 48,
            hybrid_filters_per_branch: 32,
            grouped_conv_filters: 32,
            grouped_conv_groups: 4,
            head_outputs: 30,
            use_spatial_branch: true,
            use_temporal_branch: true,
            use_joint_branch: true,
            use_shuffle: true,
            hybrid_as_plain3d: false,
        }
    }
}

impl U2fConfig {
    /// Desk-scale variant (filters 12/24/16) used by the synthetic-data
    /// experiments.
    pub fn reduced() -> Self {
        Self {
            layer1_filters: 12,
            hybrid_filters_per_branch: 8,
            grouped_conv_filters: 16,
            ..Self::default()
        }
    }

    pub fn hybrid_total_filters(&self) -> usize {
        3 * self.hybrid_filters_per_branch
    }

    pub fn enabled_branches(&self) -> Vec<BranchKind> {
        let mut v = Vec::new();
        if self.use_spatial_branch {
            v.push(BranchKind::Spatial);
        }
        if self.use_temporal_branch {
            v.push(BranchKind::Temporal);
        }
        if self.use_joint_branch {
            v.push(BranchKind::Joint);
        }
        v
    }

    /// Validates the config and works out the full activation shape
    /// chain, before any parameter allocation.
    pub fn plan(&self) -> Result<ShapePlan> {
        let (c, t, h, w) = self.input_shape;
        if c != 1 {
            return Err(ModelError::InvalidConfig(format!(
                "input must be single-channel, got {c}"
            )));
        }
        if self.layer1_filters == 0
            || self.hybrid_filters_per_branch == 0
            || self.grouped_conv_filters == 0
            || self.head_outputs == 0
        {
            return Err(ModelError::InvalidConfig("zero-size layer".into()));
        }
        let total = self.hybrid_total_filters();
        let branches = self.enabled_branches();
        let (branch_in, branch_out) = if self.hybrid_as_plain3d {
            (self.layer1_filters, total)
        } else {
            if branches.is_empty() {
                return Err(ModelError::InvalidConfig(
                    "at least one hybrid branch must be enabled".into(),
                ));
            }
            let nb = branches.len();
            if self.layer1_filters % nb != 0 {
                return Err(ModelError::InvalidConfig(format!(
                    "layer1 filters {} not divisible by {} enabled branches",
                    self.layer1_filters, nb
                )));
            }
            if total % nb != 0 {
                return Err(ModelError::InvalidConfig(format!(
                    "hybrid total {total} not divisible by {nb} enabled branches"
                )));
            }
            (self.layer1_filters / nb, total / nb)
        };
        if self.use_shuffle && total % SHUFFLE_GROUPS != 0 {
            return Err(ModelError::InvalidConfig(format!(
                "shuffle groups {SHUFFLE_GROUPS} must divide hybrid output channels {total}"
            )));
        }
        let g = self.grouped_conv_groups;
        if g == 0 || total % g != 0 || self.grouped_conv_filters % g != 0 {
            return Err(ModelError::InvalidConfig(format!(
                "grouped conv groups {g} must divide {total} and {}",
                self.grouped_conv_filters
            )));
        }

        let pool = |e: [usize; 3]| -> Result<[usize; 3]> {
            if e.iter().any(|&x| x < 2) {
                return Err(ModelError::InvalidConfig(format!(
                    "pooled extent below 2 in {e:?}"
                )));
            }
            Ok([e[0] / 2, e[1] / 2, e[2] / 2])
        };
        let after_pool1 = pool([t, h, w])?;
        let after_pool2 = pool(after_pool1)?;
        let after_pool3 = pool(after_pool2)?;
        let flatten = self.grouped_conv_filters * after_pool3.iter().product::<usize>();

        Ok(ShapePlan {
            after_pool1,
            after_pool2,
            after_pool3,
            branch_in,
            branch_out,
            hybrid_total: total,
            flatten,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Spatial,
    Temporal,
    Joint,
}

impl BranchKind {
    pub fn name(&self) -> &'static str {
        match self {
            BranchKind::Spatial => "spatial",
            BranchKind::Temporal => "temporal",
            BranchKind::Joint => "joint",
        }
    }

    pub fn kernel(&self) -> (usize, usize, usize) {
        match self {
            BranchKind::Spatial => (1, 3, 3),
            BranchKind::Temporal => (3, 1, 1),
            BranchKind::Joint => (3, 3, 3),
        }
    }

    pub fn padding(&self) -> (usize, usize, usize) {
        match self {
            BranchKind::Spatial => (0, 1, 1),
            BranchKind::Temporal => (1, 0, 0),
            BranchKind::Joint => (1, 1, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapePlan {
    pub after_pool1: [usize; 3],
    pub after_pool2: [usize; 3],
    pub after_pool3: [usize; 3],
    pub branch_in: usize,
    pub branch_out: usize,
    pub hybrid_total: usize,
    pub flatten: usize,
}

/// Per-formant min-max normalization constants (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetNorm {
    pub f1_min: f64,
    pub f1_max: f64,
    pub f2_min: f64,
    pub f2_max: f64,
}

impl Default for TargetNorm {
    fn default() -> Self {
        Self { f1_min: 0.0, f1_max: 1.0, f2_min: 0.0, f2_max: 1.0 }
    }
}

impl TargetNorm {
    pub fn validate(&self) -> Result<()> {
        if self.f1_min >= self.f1_max || self.f2_min >= self.f2_max {
            return Err(ModelError::Corrupt(
                "normalization constants must satisfy min < max per formant".into(),
            ));
        }
        Ok(())
    }

    pub fn normalize_f1(&self, hz: f64) -> f64 {
        (hz - self.f1_min) / (self.f1_max - self.f1_min)
    }

    pub fn normalize_f2(&self, hz: f64) -> f64 {
        (hz - self.f2_min) / (self.f2_max - self.f2_min)
    }

    pub fn denormalize_f1(&self, v: f64) -> f64 {
        self.f1_min + v * (self.f1_max - self.f1_min)
    }

    pub fn denormalize_f2(&self, v: f64) -> f64 {
        self.f2_min + v * (self.f2_max - self.f2_min)
    }
}
