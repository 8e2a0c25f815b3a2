//! Continuation of converged roots to smaller N along the integers.

use nalgebra::Complex;

use super::{abs, newton_refine, BetheState, NewtonOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct ContinuationSchedule<T> {
    /// Nominal decrement of N.
    pub step: T,
    /// Smallest sub-step tried after Newton failures.
    pub min_step: T,
    /// Consecutive failures at the smallest sub-step before giving up.
    pub max_floor_failures: usize,
    pub newton: NewtonOptions<T>,
}

impl<T: Real> Default for ContinuationSchedule<T> {
    fn default() -> Self {
        Self { step: T::one(), min_step: T::lit(1.0 / 16.0), max_floor_failures: 3, newton: NewtonOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContinuationOutcome<T> {
    Completed,
    /// Newton kept failing at the floor step just below `last_converged_n`.
    Chaotic { last_converged_n: T, attempted_n: T, reason: String },
}

#[derive(Clone, Debug)]
pub struct ContinuationRun<T: Real> {
    pub k: usize,
    /// Converged states at every integer N reached, starting with the input.
    pub states: Vec<BetheState<T>>,
    /// Integer N values whose step down had to be split.
    pub refined_at: Vec<T>,
    pub outcome: ContinuationOutcome<T>,
}

impl<T: Real> ContinuationRun<T> {
    pub fn completed(&self) -> bool {
        self.outcome == ContinuationOutcome::Completed
    }

    /// Largest N at which integer steps stopped working.
    pub fn first_refinement(&self) -> Option<T> {
        self.refined_at.first().copied()
    }

    /// `k/N` at the first refinement: where the continuation changes character.
    pub fn breakdown_density(&self) -> Option<T> {
        self.first_refinement().map(|n| T::from_usize(self.k).expect("size") / n)
    }
}

fn min_separation<T: Real>(roots: &[Complex<T>]) -> T {
    let mut best = roots.iter().map(|u| abs(*u)).fold(T::zero(), |a, b| a.max(b));
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min(abs(roots[i] - roots[j]));
        }
    }
    best
}

/// Linear extrapolation of the roots to `n` through the last two states.
fn predict<T: Real>(prev: Option<&BetheState<T>>, cur: &BetheState<T>, n: T) -> BetheState<T> {
    let mut guess = cur.clone();
    guess.n_param = n;
    guess.converged = false;
    if let Some(p) = prev {
        let span = cur.n_param - p.n_param;
        if span.abs() > T::default_epsilon() {
            let t = Complex::new((n - cur.n_param) / span, T::zero());
            for (g, (c, q)) in guess.roots.iter_mut().zip(cur.roots.iter().zip(&p.roots)) {
                *g = *c + (*c - *q) * t;
            }
        }
    }
    guess
}

/// One corrector attempt; rejects solutions that jumped to another branch.
fn correct<T: Real>(guess: &BetheState<T>, from: &BetheState<T>, options: &NewtonOptions<T>) -> Result<BetheState<T>> {
    let sol = newton_refine(guess, options)?;
    let bound = T::lit(0.25) * (T::one() + min_separation(&from.roots));
    let moved = sol.roots.iter().zip(&from.roots).map(|(a, b)| abs(*a - *b)).fold(T::zero(), |a, b| a.max(b));
    let conj_ok = from.conjugation_defect() > T::lit(1e-6) || sol.conjugation_defect() <= T::lit(1e-6);
    if moved > bound || !conj_ok {
        return Err(Error::Divergence { iterations: options.max_iter, residual: moved.to_f64_lossy() });
    }
    Ok(sol)
}

/// Follows a converged state from its `N` down to `n_target`.
///
/// Integer steps are tried first. A failed step is halved down to
/// `min_step`; at the floor the corrector is retried without the predictor
/// and with damping, and `max_floor_failures` consecutive failures end the
/// run as chaotic with the partial chain returned.
pub fn continue_in_n<T: Real>(
    start: &BetheState<T>,
    n_target: T,
    schedule: &ContinuationSchedule<T>,
) -> Result<ContinuationRun<T>> {
    if !start.converged {
        return Err(Error::InvalidParameter("continuation needs a converged starting state".into()));
    }
    if n_target > start.n_param {
        return Err(Error::InvalidParameter("continuation runs toward smaller N".into()));
    }
    let mut run = ContinuationRun { k: start.k, states: vec![start.clone()], refined_at: Vec::new(), outcome: ContinuationOutcome::Completed };
    let mut prev: Option<BetheState<T>> = None;
    let mut cur = start.clone();

    while cur.n_param > n_target {
        let top = cur.n_param;
        let goal = (top - schedule.step).max(n_target);
        let mut dh = goal - top;
        let mut refined = false;
        let mut floor_failures = 0;
        while cur.n_param > goal {
            let n_next = (cur.n_param + dh).max(goal);
            let at_floor = dh.abs() <= schedule.min_step;
            let attempt = if at_floor && floor_failures > 0 {
                let damped = NewtonOptions { damped: true, max_iter: schedule.newton.max_iter * 2, ..schedule.newton };
                let guess = if floor_failures == 1 { predict(None, &cur, n_next) } else { predict(prev.as_ref(), &cur, n_next) };
                correct(&guess, &cur, &damped)
            } else {
                correct(&predict(prev.as_ref(), &cur, n_next), &cur, &schedule.newton)
            };
            match attempt {
                Ok(sol) => {
                    prev = Some(std::mem::replace(&mut cur, sol));
                    floor_failures = 0;
                    if refined {
                        dh = (dh * T::lit(2.0)).max(goal - top);
                    }
                }
                Err(e) => {
                    if !refined {
                        refined = true;
                        run.refined_at.push(top);
                    }
                    if !at_floor {
                        dh = (dh * T::lit(0.5)).min(-schedule.min_step);
                        continue;
                    }
                    floor_failures += 1;
                    if floor_failures >= schedule.max_floor_failures {
                        run.outcome = ContinuationOutcome::Chaotic {
                            last_converged_n: cur.n_param,
                            attempted_n: n_next,
                            reason: e.to_string(),
                        };
                        return Ok(run);
                    }
                }
            }
        }
        cur.n_param = goal;
        run.states.push(cur.clone());
    }
    Ok(run)
}
