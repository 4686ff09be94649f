//! Built-in test functions, in maximization form.

use std::f64::consts::{E, FRAC_PI_2, PI};

use super::{Objective, ObjectiveSpec};
use crate::points::Bounds;

const HARTMANN6_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

macro_rules! default_from_new {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                Self::new()
            }
        })*
    };
}

default_from_new!(Hartmann6, Shekel4, Michalewicz5, LogGoldsteinPrice, Ackley4, Toy1d);

pub struct Hartmann6(ObjectiveSpec);

impl Hartmann6 {
    pub fn new() -> Self {
        Hartmann6(ObjectiveSpec {
            name: "hartmann6".into(),
            bounds: Bounds::unit(6),
            noise_variance: 0.5,
            optimum_value: 3.322368011415514,
            optimiser: vec![0.20168951, 0.15001069, 0.47687397, 0.27533243, 0.31165161, 0.65730053],
        })
    }
}

impl Objective for Hartmann6 {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..4)
            .map(|i| {
                let r: f64 = (0..6)
                    .map(|j| HARTMANN6_A[i][j] * (x[j] - HARTMANN6_P[i][j]).powi(2))
                    .sum();
                HARTMANN6_ALPHA[i] * (-r).exp()
            })
            .sum()
    }
}

const SHEKEL_BETA: [f64; 10] = [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5];
const SHEKEL_C: [[f64; 10]; 4] = [
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
];

/// Shekel function with ten terms on `[0, 10]^4`.
pub struct Shekel4(ObjectiveSpec);

impl Shekel4 {
    pub fn new() -> Self {
        Shekel4(ObjectiveSpec {
            name: "shekel4".into(),
            bounds: Bounds::uniform(4, 0.0, 10.0),
            noise_variance: 0.1,
            optimum_value: 10.536443153483512,
            optimiser: vec![4.00074686, 3.99950947, 4.00074686, 3.99950947],
        })
    }
}

impl Objective for Shekel4 {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..10)
            .map(|i| {
                let r: f64 = (0..4).map(|j| (x[j] - SHEKEL_C[j][i]).powi(2)).sum();
                1.0 / (r + SHEKEL_BETA[i])
            })
            .sum()
    }
}

/// Michalewicz function with steepness 10 on `[0, pi]^5`.
pub struct Michalewicz5(ObjectiveSpec);

impl Michalewicz5 {
    pub fn new() -> Self {
        Michalewicz5(ObjectiveSpec {
            name: "michalewicz5".into(),
            bounds: Bounds::uniform(5, 0.0, PI),
            noise_variance: 0.1,
            optimum_value: 4.687658179088133,
            optimiser: vec![2.20290551, FRAC_PI_2, 1.28499157, 1.92305847, 1.72046977],
        })
    }
}

impl Objective for Michalewicz5 {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, v)| v.sin() * ((i + 1) as f64 * v * v / PI).sin().powi(20))
            .sum()
    }
}

/// Standardized log Goldstein-Price on the unit square.
pub struct LogGoldsteinPrice(ObjectiveSpec);

impl LogGoldsteinPrice {
    pub fn new() -> Self {
        LogGoldsteinPrice(ObjectiveSpec {
            name: "log_goldstein_price".into(),
            bounds: Bounds::unit(2),
            noise_variance: 0.0,
            optimum_value: -(3f64.ln() - 8.693) / 2.427,
            optimiser: vec![0.5, 0.25],
        })
    }
}

impl Objective for LogGoldsteinPrice {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        let a = 4.0 * x[0] - 2.0;
        let b = 4.0 * x[1] - 2.0;
        let t1 = 1.0
            + (a + b + 1.0).powi(2)
                * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
        let t2 = 30.0
            + (2.0 * a - 3.0 * b).powi(2)
                * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
        -((t1 * t2).ln() - 8.693) / 2.427
    }
}

pub struct Ackley4(ObjectiveSpec);

impl Ackley4 {
    pub fn new() -> Self {
        Ackley4(ObjectiveSpec {
            name: "ackley4".into(),
            bounds: Bounds::uniform(4, -32.768, 32.768),
            noise_variance: 0.1,
            optimum_value: 0.0,
            optimiser: vec![0.0; 4],
        })
    }
}

impl Objective for Ackley4 {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
        let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
        -(-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E)
    }
}

/// Noise-free concave toy problem on `[0, 1]` for smoke runs.
pub struct Toy1d(ObjectiveSpec);

impl Toy1d {
    pub fn new() -> Self {
        Toy1d(ObjectiveSpec {
            name: "toy1d".into(),
            bounds: Bounds::unit(1),
            noise_variance: 0.0,
            optimum_value: 0.0,
            optimiser: vec![0.3],
        })
    }
}

impl Objective for Toy1d {
    fn spec(&self) -> &ObjectiveSpec {
        &self.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        -(x[0] - 0.3).powi(2)
    }
}
