use serde::{Deserialize, Serialize};

/// ADAM moment estimates for gradient ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(n: usize, beta1: f64, beta2: f64) -> Self {
        AdamState {
            beta1,
            beta2,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// Moves `params` uphill along `gradient` with step size `eta`.
    pub fn step(&mut self, params: &mut [f64], gradient: &[f64], eta: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = gradient[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] += eta * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(mut state: AdamState, params: &mut [f64], gradient: &[f64], eta: f64) -> AdamState {
    state.step(params, gradient, eta);
    state
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_eta() {
        // Bias correction makes the first step eta * sign(g) up to eps.
        let mut st = AdamState::new(2, 0.9, 0.999);
        let mut p = [0.0, 0.0];
        st.step(&mut p, &[3.0, -0.01], 0.05);
        assert!((p[0] - 0.05).abs() < 1e-8);
        assert!((p[1] + 0.05).abs() < 1e-5);
    }

    #[test]
    fn zero_gradient_does_not_move() {
        let mut st = AdamState::new(1, 0.9, 0.999);
        let mut p = [0.3];
        for _ in 0..5 {
            st.step(&mut p, &[0.0], 0.1);
        }
        assert_eq!(p, [0.3]);
        assert_eq!(st.t, 5);
    }
}
