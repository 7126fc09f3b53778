//! Adadelta parameter updates.
//!
//! Each parameter keeps two exponentially decayed accumulators: `eg` for
//! squared gradients and `ed` for squared updates. A step computes
//!
//! ```text
//! eg    <- rho * eg + (1 - rho) * g^2
//! delta  = -sqrt(ed + eps) / sqrt(eg + eps) * g
//! ed    <- rho * ed + (1 - rho) * delta^2
//! param <- param + delta
//! ```
//!
//! so the learning rate is adaptive per parameter with nothing to tune
//! beyond the decay `rho` and the stabilizer `eps`.

/// Applies one Adadelta update to `params` in place. All slices must share
/// one length; accumulator slices are updated alongside the parameters.
pub fn adadelta_step(
    params: &mut [f64],
    grads: &[f64],
    eg: &mut [f64],
    ed: &mut [f64],
    rho: f64,
    eps: f64,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), eg.len());
    debug_assert_eq!(params.len(), ed.len());
    for i in 0..params.len() {
        let g = grads[i];
        eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
        let delta = -((ed[i] + eps).sqrt() / (eg[i] + eps).sqrt()) * g;
        ed[i] = rho * ed[i] + (1.0 - rho) * delta * delta;
        params[i] += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_unit_gradient_step_has_known_size() {
        let mut params = vec![0.0];
        let mut eg = vec![0.0];
        let mut ed = vec![0.0];
        adadelta_step(&mut params, &[1.0], &mut eg, &mut ed, 0.95, 1e-6);
        // sqrt(1e-6) / sqrt(0.05 + 1e-6) = 0.004472...
        assert!((params[0] + 0.004472).abs() < 1e-6, "step was {}", params[0]);
        assert!((eg[0] - 0.05).abs() < 1e-15);
        assert!(ed[0] > 0.0);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = vec![1.5, -2.0];
        let mut eg = vec![0.3, 0.3];
        let mut ed = vec![0.1, 0.1];
        adadelta_step(&mut params, &[0.0, 0.0], &mut eg, &mut ed, 0.95, 1e-6);
        assert_eq!(params, vec![1.5, -2.0]);
        // Accumulators still decay toward zero.
        assert!((eg[0] - 0.285).abs() < 1e-12);
        assert!((ed[0] - 0.095).abs() < 1e-12);
    }

    #[test]
    fn identical_histories_produce_identical_updates() {
        let mut a = vec![0.5; 4];
        let mut b = vec![0.5; 4];
        let mut eg_a = vec![0.0; 4];
        let mut ed_a = vec![0.0; 4];
        let mut eg_b = vec![0.0; 4];
        let mut ed_b = vec![0.0; 4];
        for step in 0..20 {
            let g = vec![0.1 * (step as f64 + 1.0); 4];
            adadelta_step(&mut a, &g, &mut eg_a, &mut ed_a, 0.95, 1e-6);
            adadelta_step(&mut b, &g, &mut eg_b, &mut ed_b, 0.95, 1e-6);
        }
        assert_eq!(a, b);
        assert_eq!(eg_a, eg_b);
    }

    #[test]
    fn updates_descend_against_the_gradient() {
        let mut params = vec![1.0, -1.0];
        let mut eg = vec![0.0; 2];
        let mut ed = vec![0.0; 2];
        adadelta_step(&mut params, &[2.0, -3.0], &mut eg, &mut ed, 0.95, 1e-6);
        assert!(params[0] < 1.0);
        assert!(params[1] > -1.0);
    }
}
