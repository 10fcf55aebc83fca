//! Arclength profile of the rotationally symmetric minimal hypersurface
//! in R^{m+1}: state (t, y, alpha) driven by
//!     t' = cos(alpha),  y' = sin(alpha),  alpha' = (m-1) cos(alpha) / y
//! with initial data (0, 1, 0) at the neck. The quantity
//! y^{m-1} cos(alpha) is a first integral equal to 1; its drift over the
//! stored nodes is reported as an integration diagnostic.

use crate::error::{Error, Result};

const ODE_TOL: f64 = 1e-10;
const H_INIT: f64 = 1e-3;
const H_MIN: f64 = 1e-9;
// cap keeps cubic Hermite dense-output error below ~1e-9
const H_MAX: f64 = 0.02;

#[derive(Debug, Clone, Copy)]
pub struct ProfileState {
    pub t: f64,
    pub y: f64,
    pub alpha: f64,
}

pub struct ProfileSolution {
    m: usize,
    s_max: f64,
    nodes: Vec<f64>,
    states: Vec<[f64; 3]>,
    derivs: Vec<[f64; 3]>,
    pub max_drift: f64,
}

fn rhs(m: usize, st: &[f64; 3]) -> [f64; 3] {
    let (ca, sa) = (st[2].cos(), st[2].sin());
    [ca, sa, (m - 1) as f64 * ca / st[1]]
}

fn rk4_step(m: usize, st: &[f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs(m, st);
    let mut tmp = [0.0; 3];
    for i in 0..3 {
        tmp[i] = st[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(m, &tmp);
    for i in 0..3 {
        tmp[i] = st[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(m, &tmp);
    for i in 0..3 {
        tmp[i] = st[i] + h * k3[i];
    }
    let k4 = rhs(m, &tmp);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = st[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

impl ProfileSolution {
    /// Integrate the profile for arclength s in [0, s_max]; negative s is
    /// served through the odd/even symmetry of (t, alpha) / y.
    pub fn solve(m: usize, s_max: f64) -> Result<ProfileSolution> {
        if m < 2 {
            return Err(Error::InvalidArgument(
                "profile requires surface dimension m >= 2".into(),
            ));
        }
        let mut s = 0.0;
        let mut state = [0.0, 1.0, 0.0];
        let mut nodes = vec![0.0];
        let mut states = vec![state];
        let mut derivs = vec![rhs(m, &state)];
        let mut h = H_INIT;
        let mut drift: f64 = 0.0;
        while s < s_max {
            h = h.min(s_max - s);
            // step doubling: compare one h step against two h/2 steps
            let full = rk4_step(m, &state, h);
            let half = rk4_step(m, &rk4_step(m, &state, 0.5 * h), 0.5 * h);
            let err = (0..3)
                .map(|i| (full[i] - half[i]).abs())
                .fold(0.0f64, f64::max)
                / 15.0;
            if err <= ODE_TOL || h <= H_MIN {
                s += h;
                // local Richardson extrapolation of the step-doubling pair
                for i in 0..3 {
                    state[i] = half[i] + (half[i] - full[i]) / 15.0;
                }
                nodes.push(s);
                states.push(state);
                derivs.push(rhs(m, &state));
                drift = drift.max((state[1].powi(m as i32 - 1) * state[2].cos() - 1.0).abs());
            }
            let scale = if err > 0.0 {
                0.9 * (ODE_TOL / err).powf(0.2)
            } else {
                5.0
            };
            h = (h * scale.clamp(0.2, 5.0)).clamp(H_MIN, H_MAX);
        }
        if drift > 1e-8 {
            return Err(Error::Numeric(format!(
                "profile first-integral drift {drift:.3e} exceeds 1e-8"
            )));
        }
        Ok(ProfileSolution {
            m,
            s_max,
            nodes,
            states,
            derivs,
            max_drift: drift,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Cubic Hermite evaluation between stored nodes.
    fn eval_positive(&self, s: f64) -> [f64; 3] {
        debug_assert!(s >= 0.0 && s <= self.s_max + 1e-12);
        let idx = match self
            .nodes
            .binary_search_by(|n| n.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.states[i],
            Err(i) => i.min(self.nodes.len() - 1).max(1),
        };
        let (s0, s1) = (self.nodes[idx - 1], self.nodes[idx]);
        let h = s1 - s0;
        let x = (s - s0) / h;
        let (x2, x3) = (x * x, x * x * x);
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = h00 * self.states[idx - 1][i]
                + h10 * h * self.derivs[idx - 1][i]
                + h01 * self.states[idx][i]
                + h11 * h * self.derivs[idx][i];
        }
        out
    }

    /// Profile state at signed arclength `s`; t and alpha are odd in s,
    /// y is even.
    pub fn state(&self, s: f64) -> Result<ProfileState> {
        if s.abs() > self.s_max + 1e-9 {
            return Err(Error::Domain(format!(
                "arclength {s} outside integrated range [-{0}, {0}]",
                self.s_max
            )));
        }
        let st = self.eval_positive(s.abs().min(self.s_max));
        if s >= 0.0 {
            Ok(ProfileState {
                t: st[0],
                y: st[1],
                alpha: st[2],
            })
        } else {
            Ok(ProfileState {
                t: -st[0],
                y: st[1],
                alpha: -st[2],
            })
        }
    }

    /// d(alpha)/ds at signed arclength `s`.
    pub fn alpha_prime(&self, s: f64) -> Result<f64> {
        let st = self.state(s)?;
        Ok((self.m - 1) as f64 * st.alpha.cos() / st.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn m2_reproduces_the_catenary() {
        // for m = 2 the first integral gives y = sqrt(1 + s^2) exactly
        let p = ProfileSolution::solve(2, 10.0).unwrap();
        for s in [0.0, 0.5, 1.7, 4.0, 9.5, -3.2] {
            let st = p.state(s).unwrap();
            assert_relative_eq!(st.y, (1.0 + s * s).sqrt(), epsilon = 1e-8);
            assert_relative_eq!(st.t, s.asinh(), epsilon = 1e-8);
        }
    }

    #[test]
    fn first_integral_drift_small() {
        let p = ProfileSolution::solve(3, 20.0).unwrap();
        assert!(p.max_drift <= 1e-8, "drift {}", p.max_drift);
        // spot check between nodes via dense output
        for s in [0.123, 2.7182, 11.33, 19.9] {
            let st = p.state(s).unwrap();
            let inv = st.y * st.y * st.alpha.cos();
            assert_relative_eq!(inv, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn symmetry() {
        let p = ProfileSolution::solve(3, 5.0).unwrap();
        let a = p.state(2.0).unwrap();
        let b = p.state(-2.0).unwrap();
        assert_relative_eq!(a.y, b.y);
        assert_relative_eq!(a.t, -b.t);
        assert_relative_eq!(a.alpha, -b.alpha);
    }

    #[test]
    fn out_of_range_errors() {
        let p = ProfileSolution::solve(3, 5.0).unwrap();
        assert!(p.state(5.5).is_err());
    }
}
