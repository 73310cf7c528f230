//! Closed-form queueing references the simulator is validated against:
//! Erlang-B, generic finite CTMC steady states, and multi-class Erlang loss
//! by state-space enumeration. These live in the library (not the test
//! tree) so the CLI could print analytic overlays next to simulated rows.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;

const STATE_SPACE_LIMIT: usize = 1_000_000;

/// Blocking probability of an M/M/c/c loss system at `offered_load`
/// erlangs, via the numerically stable recursion
/// `B(k) = a B(k-1) / (k + a B(k-1))`, `B(0) = 1`.
pub fn erlang_b(servers: u64, offered_load: f64) -> f64 {
    let mut b = 1.0;
    for k in 1..=servers {
        b = offered_load * b / (k as f64 + offered_load * b);
    }
    b
}

/// Finite continuous-time Markov chain given by its off-diagonal rates.
#[derive(Debug, Clone)]
pub struct CtmcSpec {
    n_states: usize,
    transitions: Vec<(usize, usize, f64)>,
}

impl CtmcSpec {
    pub fn new(n_states: usize) -> CtmcSpec {
        CtmcSpec {
            n_states,
            transitions: Vec::new(),
        }
    }

    pub fn add_rate(&mut self, from: usize, to: usize, rate: f64) -> Result<(), Error> {
        if from >= self.n_states || to >= self.n_states {
            return Err(Error::config(
                "ctmc",
                format!("transition {from}->{to} outside 0..{}", self.n_states),
            ));
        }
        if from == to {
            return Err(Error::config("ctmc", "self-loops are not rates"));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::config("ctmc", format!("rate {rate} must be >= 0")));
        }
        if rate > 0.0 {
            self.transitions.push((from, to, rate));
        }
        Ok(())
    }

    /// Both-direction reachability from state 0: a unique stationary
    /// distribution needs one strongly connected chain.
    fn is_irreducible(&self) -> bool {
        if self.n_states == 0 {
            return false;
        }
        let mut forward = vec![Vec::new(); self.n_states];
        let mut backward = vec![Vec::new(); self.n_states];
        for &(from, to, _) in &self.transitions {
            forward[from].push(to);
            backward[to].push(from);
        }
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; self.n_states];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(s) = stack.pop() {
                for &t in &adj[s] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(&forward) && reach(&backward)
    }

    /// Stationary distribution: solves `pi Q = 0`, `sum(pi) = 1` by a dense
    /// LU factorization and verifies the residual to 1e-10.
    pub fn steady_state(&self) -> Result<Vec<f64>, Error> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = self.n_states;
        let mut q = DMatrix::<f64>::zeros(n, n);
        for &(from, to, rate) in &self.transitions {
            q[(from, to)] += rate;
            q[(from, from)] -= rate;
        }
        // Transposed balance equations with the last row swapped for the
        // normalization constraint.
        let mut m = q.transpose();
        for j in 0..n {
            m[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[n - 1] = 1.0;
        let pi = m.lu().solve(&rhs).ok_or(Error::NotIrreducible)?;
        let residual = (pi.transpose() * &q).abs().max();
        if residual > 1e-10 {
            return Err(Error::config(
                "ctmc",
                format!("stationary residual {residual:e} exceeds 1e-10"),
            ));
        }
        if pi.iter().any(|&p| p < -1e-12) {
            return Err(Error::config("ctmc", "negative stationary mass"));
        }
        Ok(pi.iter().map(|&p| p.max(0.0)).collect())
    }
}

/// Per-class blocking probabilities of a multi-class Erlang loss system:
/// class `i` holds `demands[i]` capacity units for an exponential holding
/// time and offers `loads[i]` erlangs. Exact, from the product-form
/// stationary distribution over the coordinate-convex feasible set.
pub fn blocking_multiclass(
    capacity: u64,
    demands: &[u64],
    loads: &[f64],
) -> Result<Vec<f64>, Error> {
    if demands.len() != loads.len() {
        return Err(Error::config(
            "oracle",
            format!("{} demands vs {} loads", demands.len(), loads.len()),
        ));
    }
    if demands.iter().any(|&d| d == 0) {
        return Err(Error::config("oracle", "class demand must be positive"));
    }
    if loads.iter().any(|&a| !a.is_finite() || a < 0.0) {
        return Err(Error::config("oracle", "loads must be finite and >= 0"));
    }

    struct Walk<'a> {
        capacity: u64,
        demands: &'a [u64],
        loads: &'a [f64],
        normalizer: f64,
        blocked: Vec<f64>,
        states: usize,
    }

    impl Walk<'_> {
        fn visit(&mut self, class: usize, used: u64, weight: f64) -> Result<(), Error> {
            if class == self.demands.len() {
                self.states += 1;
                if self.states > STATE_SPACE_LIMIT {
                    return Err(Error::StateSpaceTooLarge {
                        states: self.states,
                        limit: STATE_SPACE_LIMIT,
                    });
                }
                self.normalizer += weight;
                for (i, &d) in self.demands.iter().enumerate() {
                    if used + d > self.capacity {
                        self.blocked[i] += weight;
                    }
                }
                return Ok(());
            }
            // n = 0, 1, ... while the class still fits; the product-form
            // weight picks up a/n per admitted customer.
            let mut w = weight;
            let mut n = 0u64;
            loop {
                self.visit(class + 1, used + n * self.demands[class], w)?;
                n += 1;
                if used + n * self.demands[class] > self.capacity {
                    return Ok(());
                }
                w *= self.loads[class] / n as f64;
            }
        }
    }

    let mut walk = Walk {
        capacity,
        demands,
        loads,
        normalizer: 0.0,
        blocked: vec![0.0; demands.len()],
        states: 0,
    };
    walk.visit(0, 0, 1.0)?;
    Ok(walk.blocked.iter().map(|b| b / walk.normalizer).collect())
}
