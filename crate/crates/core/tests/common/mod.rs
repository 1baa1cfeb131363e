//! Dense reference chain shared by the oracle and acceptance suites.
#![allow(dead_code)]

use std::collections::HashMap;

use lcr_core::rules::{successors, total_chips, winner, GameState};
use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

pub struct DenseChain {
    pub transient: Vec<GameState>,
    pub absorbing: Vec<GameState>,
    index: HashMap<GameState, (bool, usize)>,
    n_matrix: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn all_states(n: usize) -> Vec<GameState> {
    fn compositions(seats: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if seats == 0 {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=budget {
            prefix.push(c);
            compositions(seats - 1, budget - c, prefix, out);
            prefix.pop();
        }
    }
    let mut comps = Vec::new();
    compositions(n, total_chips(n), &mut Vec::new(), &mut comps);
    comps
        .into_iter()
        .filter(|c| c.iter().any(|&x| x > 0))
        .flat_map(|c| (0..n).map(move |t| GameState::new(c.clone(), t).unwrap()))
        .collect()
}

impl DenseChain {
    pub fn build(n: usize) -> Self {
        let (absorbing, transient): (Vec<_>, Vec<_>) =
            all_states(n).into_iter().partition(|s| winner(s).is_some());
        let mut index = HashMap::new();
        for (i, s) in transient.iter().enumerate() {
            index.insert(s.clone(), (true, i));
        }
        for (i, s) in absorbing.iter().enumerate() {
            index.insert(s.clone(), (false, i));
        }
        let t = transient.len();
        let mut q = DMatrix::<f64>::zeros(t, t);
        let mut r = DMatrix::<f64>::zeros(t, absorbing.len());
        for (i, s) in transient.iter().enumerate() {
            for (next, p) in successors(s).unwrap() {
                let p = p.to_f64().unwrap();
                match index[&next] {
                    (true, j) => q[(i, j)] += p,
                    (false, j) => r[(i, j)] += p,
                }
            }
        }
        let n_matrix = (DMatrix::<f64>::identity(t, t) - q).try_inverse().unwrap();
        DenseChain {
            transient,
            absorbing,
            index,
            n_matrix,
            r,
        }
    }

    /// (mean, variance, per-seat wins) from a distribution over states, plus
    /// `offset` steps already taken.
    pub fn stats(&self, n: usize, dist: &[(GameState, f64)], offset: f64) -> (f64, f64, Vec<f64>) {
        let t = self.transient.len();
        let ones = DVector::<f64>::from_element(t, 1.0);
        let w = &self.n_matrix * &ones;
        let w_sq = w.map(|x| x * x);
        let var_vec = (2.0 * &self.n_matrix - DMatrix::<f64>::identity(t, t)) * &w - &w_sq;
        let b = &self.n_matrix * &self.r;
        let mut mean = offset;
        let mut second = 0.0;
        let mut wins = vec![0.0; n];
        for (s, p) in dist {
            match self.index[s] {
                (true, i) => {
                    mean += p * w[i];
                    second += p * (var_vec[i] + w[i] * w[i]);
                    for (j, a) in self.absorbing.iter().enumerate() {
                        wins[winner(a).unwrap()] += p * b[(i, j)];
                    }
                }
                (false, _) => wins[winner(s).unwrap()] += p,
            }
        }
        let m = mean - offset;
        (mean, second - m * m, wins)
    }
}
