use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    None,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn forward(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::None => x,
        }
    }

    /// Derivative at the pre-activation `x`.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            // Subgradient at 0 is taken as 0.
            Activation::Relu => f64::from(u8::from(x > 0.0)),
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::None => 1.0,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => f64::from(u8::from(y > 0.0)),
            Activation::Sigmoid => y * (1.0 - y),
            Activation::None => 1.0,
        }
    }

    pub fn apply(self, xs: &mut [f64]) {
        if self != Activation::None {
            xs.iter_mut().for_each(|x| *x = self.forward(*x));
        }
    }

    /// `grad_out * f'(.)` given the forward outputs.
    pub fn backward(self, outputs: &[f64], grad_out: &[f64]) -> Vec<f64> {
        outputs
            .iter()
            .zip(grad_out)
            .map(|(&y, &g)| g * self.derivative_from_output(y))
            .collect()
    }
}
