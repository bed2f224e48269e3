//! SGD updates: momentum descent and raw gradient ascent.

use crate::error::{Error, Result};
use crate::nn::mlp::{GradBundle, MlpParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            lr: 0.01,
            momentum: 0.9,
            weight_decay: 1e-3,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config(format!("learning rate must be >= 0, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config(format!(
                "weight decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Learning rate, momentum, decay, and one velocity buffer per parameter.
#[derive(Debug, Clone)]
pub struct OptimState {
    cfg: SgdConfig,
    velocity: GradBundle,
}

impl OptimState {
    /// Fresh state with zeroed momentum buffers shaped like `params`.
    pub fn new(params: &MlpParams, cfg: SgdConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(OptimState {
            cfg,
            velocity: params.zeros_like(),
        })
    }

    pub fn config(&self) -> SgdConfig {
        self.cfg
    }

    pub fn velocity(&self) -> &GradBundle {
        &self.velocity
    }

    /// `v ← μ·v + g;  θ ← θ − λ·(v + wd·θ)`.
    pub fn descend(&mut self, params: &mut MlpParams, grads: &GradBundle) -> Result<()> {
        self.check(params, grads)?;
        let SgdConfig {
            lr,
            momentum,
            weight_decay,
        } = self.cfg;
        for ((p, g), v) in params
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.velocity.layers)
        {
            for (theta, (gi, vi)) in [
                (p.weight.data_mut(), (g.weight.data(), v.weight.data_mut())),
                (p.bias.data_mut(), (g.bias.data(), v.bias.data_mut())),
            ] {
                for ((t, gj), vj) in theta.iter_mut().zip(gi).zip(vi.iter_mut()) {
                    *vj = momentum * *vj + gj;
                    *t -= lr * (*vj + weight_decay * *t);
                }
            }
        }
        Ok(())
    }

    /// `θ ← θ + λ·g`. No momentum and no decay; velocity buffers are untouched.
    pub fn ascend(&self, params: &mut MlpParams, grads: &GradBundle) -> Result<()> {
        self.check(params, grads)?;
        let lr = self.cfg.lr;
        for (p, g) in params.layers_mut().iter_mut().zip(&grads.layers) {
            for (t, gj) in p.weight.data_mut().iter_mut().zip(g.weight.data()) {
                *t += lr * gj;
            }
            for (t, gj) in p.bias.data_mut().iter_mut().zip(g.bias.data()) {
                *t += lr * gj;
            }
        }
        Ok(())
    }

    fn check(&self, params: &MlpParams, grads: &GradBundle) -> Result<()> {
        if !grads.matches(params) || !self.velocity.matches(params) {
            return Err(Error::shape("gradients or optimizer state do not match parameters"));
        }
        Ok(())
    }
}

/// One momentum-SGD step on a fresh or existing state.
pub fn descend(params: &mut MlpParams, grads: &GradBundle, opt: &mut OptimState) -> Result<()> {
    opt.descend(params, grads)
}

/// One raw gradient-ascent step.
pub fn ascend(params: &mut MlpParams, grads: &GradBundle, opt: &OptimState) -> Result<()> {
    opt.ascend(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::{backward, init_params};
    use crate::tensor::Tensor;

    fn setup() -> (MlpParams, GradBundle) {
        let p = init_params(&[2, 3, 2], 4).unwrap();
        let x = Tensor::from_rows(&[[0.5, -1.0], [1.0, 2.0]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0], [0.3, 0.7]]).unwrap();
        let (_, g) = backward(&p, &x, &t).unwrap();
        (p, g)
    }

    fn flat(p: &MlpParams) -> Vec<f64> {
        p.layers()
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(l.bias.data()).copied())
            .collect()
    }

    fn flat_g(g: &GradBundle) -> Vec<f64> {
        g.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(l.bias.data()).copied())
            .collect()
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let (p0, g) = setup();
        let cfg = SgdConfig { lr: 0.0, ..SgdConfig::default() };
        let mut p = p0.clone();
        let mut opt = OptimState::new(&p, cfg).unwrap();
        opt.descend(&mut p, &g).unwrap();
        opt.ascend(&mut p, &g).unwrap();
        assert_eq!(p, p0);
    }

    #[test]
    fn plain_sgd_step() {
        let (p0, g) = setup();
        let cfg = SgdConfig { lr: 0.1, momentum: 0.0, weight_decay: 0.0 };
        let mut p = p0.clone();
        OptimState::new(&p, cfg).unwrap().descend(&mut p, &g).unwrap();
        for ((a, b), gi) in flat(&p).iter().zip(flat(&p0)).zip(flat_g(&g)) {
            assert_eq!(*a, b - 0.1 * gi);
        }
    }

    #[test]
    fn momentum_matches_unrolled_recurrence() {
        let (p0, g) = setup();
        let (lr, mu, wd) = (0.05, 0.9, 1e-3);
        let mut p = p0.clone();
        let mut opt = OptimState::new(&p, SgdConfig { lr, momentum: mu, weight_decay: wd }).unwrap();
        opt.descend(&mut p, &g).unwrap();
        opt.descend(&mut p, &g).unwrap();
        for ((a, t0), gi) in flat(&p).iter().zip(flat(&p0)).zip(flat_g(&g)) {
            let v1 = gi;
            let t1 = t0 - lr * (v1 + wd * t0);
            let v2 = mu * v1 + gi;
            let t2 = t1 - lr * (v2 + wd * t1);
            assert!((a - t2).abs() < 1e-15, "{a} vs {t2}");
        }
    }

    #[test]
    fn ascent_then_descent_is_identity() {
        let (p0, g) = setup();
        let cfg = SgdConfig { lr: 0.25, momentum: 0.0, weight_decay: 0.0 };
        let mut p = p0.clone();
        let mut opt = OptimState::new(&p, cfg).unwrap();
        opt.ascend(&mut p, &g).unwrap();
        opt.descend(&mut p, &g).unwrap();
        for (a, b) in flat(&p).iter().zip(flat(&p0)) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ascent_leaves_velocity_untouched() {
        let (p0, g) = setup();
        let mut p = p0.clone();
        let opt = OptimState::new(&p, SgdConfig::default()).unwrap();
        opt.ascend(&mut p, &g).unwrap();
        assert!(flat_g(opt.velocity()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_config_rejected() {
        let p = init_params(&[2, 2], 0).unwrap();
        for cfg in [
            SgdConfig { lr: -1.0, ..SgdConfig::default() },
            SgdConfig { momentum: 1.0, ..SgdConfig::default() },
            SgdConfig { weight_decay: -0.1, ..SgdConfig::default() },
        ] {
            assert!(matches!(OptimState::new(&p, cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn mismatched_grads_error() {
        let (p, _) = setup();
        let other = init_params(&[2, 4, 2], 0).unwrap();
        let g = other.zeros_like();
        let mut q = p.clone();
        let mut opt = OptimState::new(&p, SgdConfig::default()).unwrap();
        assert!(matches!(opt.descend(&mut q, &g), Err(Error::Shape(_))));
    }
}
