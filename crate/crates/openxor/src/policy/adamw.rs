//! AdamW with decoupled weight decay.

use super::net::NetError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-3,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamW {
    pub fn new(param_count: usize) -> Self {
        AdamW {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    /// One update: moment accumulation, bias correction, then
    /// `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta`.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grad: &[f64],
        config: &OptimizerConfig,
    ) -> Result<(), NetError> {
        assert_eq!(params.len(), self.m.len(), "parameter shape mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient shape mismatch");
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(NetError::NonFinite {
                context: "gradient passed to optimizer".into(),
            });
        }
        self.t += 1;
        let bc1 = 1.0 - config.beta1.powi(self.t as i32);
        let bc2 = 1.0 - config.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = config.beta1 * self.m[i] + (1.0 - config.beta1) * g;
            self.v[i] = config.beta2 * self.v[i] + (1.0 - config.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps)
                + config.learning_rate * config.weight_decay * params[i];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grad_zero_decay_leaves_params_unchanged() {
        let mut params = vec![0.5, -0.25, 3.0];
        let mut opt = AdamW::new(3);
        let cfg = OptimizerConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        opt.step(&mut params, &[0.0; 3], &cfg).unwrap();
        assert_eq!(params, vec![0.5, -0.25, 3.0]);
    }

    #[test]
    fn zero_grad_with_decay_shrinks_by_factor() {
        let mut params = vec![2.0, -4.0];
        let mut opt = AdamW::new(2);
        let cfg = OptimizerConfig::default(); // lr 1e-3, wd 0.01
        opt.step(&mut params, &[0.0; 2], &cfg).unwrap();
        let factor = 1.0 - 1e-3 * 0.01;
        assert!((params[0] - 2.0 * factor).abs() < 1e-15);
        assert!((params[1] - -4.0 * factor).abs() < 1e-15);
    }

    #[test]
    fn single_scalar_step_matches_hand_computed_recurrence() {
        // written out by hand from the update formulas
        let theta0 = 0.7f64;
        let g = 0.3f64;
        let (lr, wd, b1, b2, eps) = (1e-3f64, 0.01f64, 0.9f64, 0.999f64, 1e-8f64);

        let m1 = (1.0 - b1) * g; // 0.03
        let v1 = (1.0 - b2) * g * g; // 0.00009
        let m_hat = m1 / (1.0 - b1); // 0.3
        let v_hat = v1 / (1.0 - b2); // 0.09
        let expected = theta0 - lr * m_hat / (v_hat.sqrt() + eps) - lr * wd * theta0;

        let mut params = vec![theta0];
        let mut opt = AdamW::new(1);
        let cfg = OptimizerConfig {
            learning_rate: lr,
            weight_decay: wd,
            beta1: b1,
            beta2: b2,
            eps,
        };
        opt.step(&mut params, &[g], &cfg).unwrap();
        assert!(
            (params[0] - expected).abs() < 1e-12,
            "got {} want {expected}",
            params[0]
        );

        // second step exercises the moment recurrences
        let m2 = b1 * m1 + (1.0 - b1) * g;
        let v2 = b2 * v1 + (1.0 - b2) * g * g;
        let m_hat2 = m2 / (1.0 - b1 * b1);
        let v_hat2 = v2 / (1.0 - b2 * b2);
        let expected2 = params[0] - lr * m_hat2 / (v_hat2.sqrt() + eps) - lr * wd * params[0];
        opt.step(&mut params, &[g], &cfg).unwrap();
        assert!((params[0] - expected2).abs() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut params = vec![1.0];
        let mut opt = AdamW::new(1);
        let err = opt
            .step(&mut params, &[f64::NAN], &OptimizerConfig::default())
            .unwrap_err();
        assert!(matches!(err, NetError::NonFinite { .. }));
        assert_eq!(params, vec![1.0]);
    }
}
