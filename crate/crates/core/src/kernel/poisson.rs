/// Truncated Poisson(λ) weights `w_k`, `k ∈ [left, left + weights.len())`,
/// normalised over the kept range.
///
/// Weights are generated from the mode outwards by the ratio recursion, so no
/// factorials or `e^{-λ}` are formed. `tail` bounds the discarded mass relative
/// to the kept mass using geometric tail bounds that hold on both sides of
/// the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    pub left: usize,
    pub weights: Vec<f64>,
    pub tail: f64,
}

impl PoissonWeights {
    pub fn new(lambda: f64, tol: f64) -> PoissonWeights {
        assert!(lambda >= 0.0 && tol > 0.0);
        if lambda == 0.0 {
            return PoissonWeights {
                left: 0,
                weights: vec![1.0],
                tail: 0.0,
            };
        }
        let mode = lambda.floor() as usize;
        let mut right = vec![1.0f64]; // r_mode, r_mode+1, ...
        let mut leftw: Vec<f64> = Vec::new(); // r_mode-1, r_mode-2, ...
        let mut sum = 1.0;

        let right_bound = |right: &[f64]| {
            let k = mode + right.len() - 1;
            let next = right.last().unwrap() * lambda / (k + 1) as f64;
            next / (1.0 - lambda / (k + 2) as f64)
        };
        let left_bound = |leftw: &[f64]| {
            let l = mode - leftw.len();
            if l == 0 {
                return 0.0;
            }
            let r_l = leftw.last().copied().unwrap_or(1.0);
            let prev = r_l * l as f64 / lambda;
            prev / (1.0 - (l - 1) as f64 / lambda)
        };
        loop {
            let mut grew = false;
            while right_bound(&right) > 0.25 * tol * sum {
                let k = mode + right.len() - 1;
                let next = right.last().unwrap() * lambda / (k + 1) as f64;
                right.push(next);
                sum += next;
                grew = true;
            }
            while left_bound(&leftw) > 0.25 * tol * sum {
                let l = mode - leftw.len();
                let r_l = leftw.last().copied().unwrap_or(1.0);
                let prev = r_l * l as f64 / lambda;
                leftw.push(prev);
                sum += prev;
                grew = true;
            }
            if !grew {
                break;
            }
        }
        let tail = (right_bound(&right) + left_bound(&leftw)) / sum;
        let left = mode - leftw.len();
        let mut weights: Vec<f64> = leftw.into_iter().rev().collect();
        weights.extend(right);
        for w in &mut weights {
            *w /= sum;
        }
        PoissonWeights {
            left,
            weights,
            tail,
        }
    }

    /// Last index with a weight.
    pub fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }

    pub fn weight(&self, k: usize) -> f64 {
        if k < self.left {
            0.0
        } else {
            self.weights.get(k - self.left).copied().unwrap_or(0.0)
        }
    }
}
