//! Numerical integration of `ż = F(z)(ξ − ξ0)` over `t ∈ [0, 1]`.
//!
//! The default method is the Dormand–Prince 5(4) pair with its quartic
//! dense output. A fixed-step classical Runge–Kutta method with cubic
//! Hermite interpolation serves as a cross-check.

mod compiled;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::FiscidsSystem;
use compiled::CompiledSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    AdaptiveRk45,
    FixedRk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::AdaptiveRk45 => "adaptive_rk45",
            Method::FixedRk4 => "fixed_rk4",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        match s {
            "adaptive_rk45" => Some(Method::AdaptiveRk45),
            "fixed_rk4" => Some(Method::FixedRk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub fixed_steps: usize,
    pub max_steps: usize,
    pub blowup_bound: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            method: Method::AdaptiveRk45,
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            fixed_steps: 1000,
            max_steps: 1_000_000,
            blowup_bound: 1e12,
        }
    }
}

impl IntegrationConfig {
    pub fn fixed(steps: usize) -> Self {
        IntegrationConfig {
            method: Method::FixedRk4,
            fixed_steps: steps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.fixed_steps >= 1
            && self.max_steps >= 1
            && self.blowup_bound > 0.0;
        if ok {
            Ok(())
        } else {
            Err(IntegrateError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("state left the bound at t = {t}")]
    Blowup { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("maximum step count exceeded")]
    MaxStepsExceeded,
    #[error("domain error at t = {t}: {reason}")]
    Domain { t: f64, reason: String },
    #[error("input has {got} entries, expected {expected}")]
    InputDimension { got: usize, expected: usize },
    #[error("time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("invalid integration config")]
    InvalidConfig,
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone)]
enum Dense {
    /// Dormand–Prince continuous extension coefficients.
    Dopri { t0: f64, h: f64, r: [Vec<f64>; 5] },
    /// Cubic Hermite through both ends and their slopes.
    Hermite {
        t0: f64,
        h: f64,
        y0: Vec<f64>,
        y1: Vec<f64>,
        f0: Vec<f64>,
        f1: Vec<f64>,
    },
}

impl Dense {
    fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Dense::Dopri { t0, h, r } => {
                let th = (t - t0) / h;
                let th1 = 1.0 - th;
                (0..r[0].len())
                    .map(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
                    .collect()
            }
            Dense::Hermite { t0, h, y0, y1, f0, f1 } => {
                let s = (t - t0) / h;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (0..y0.len())
                    .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
                    .collect()
            }
        }
    }
}

/// The accepted steps of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    outputs: Vec<Option<Vec<f64>>>,
    dense: Vec<Dense>,
}

impl Trajectory {
    /// Accepted times, from 0 to the final time.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// States at the accepted times; the first is `z0`.
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// Outputs at the accepted times, `None` where `h` is undefined.
    pub fn outputs(&self) -> &[Option<Vec<f64>>] {
        &self.outputs
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("nonempty")
    }

    pub fn final_output(&self) -> Option<&[f64]> {
        self.outputs.last().expect("nonempty").as_deref()
    }

    /// Dense-output state at `t`. Accepted times return the stored state.
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        if t < 0.0 || t > self.final_time() {
            return None;
        }
        let i = self.times.partition_point(|s| *s < t);
        if i < self.times.len() && self.times[i] == t {
            return Some(self.states[i].clone());
        }
        Some(self.dense[i - 1].eval(t))
    }

    fn push(&mut self, t: f64, z: Vec<f64>, y: Option<Vec<f64>>, dense: Dense) {
        self.times.push(t);
        self.states.push(z);
        self.outputs.push(y);
        self.dense.push(dense);
    }
}

fn check_bounds(z: &[f64], bound: f64, t: f64) -> Result<(), IntegrateError> {
    if z.iter().all(|v| v.is_finite() && v.abs() <= bound) {
        Ok(())
    } else {
        Err(IntegrateError::Blowup { t })
    }
}

fn prepare(sys: &FiscidsSystem, xi: &[f64], config: &IntegrationConfig) -> Result<CompiledSystem, IntegrateError> {
    config.validate()?;
    if xi.len() != sys.n() {
        return Err(IntegrateError::InputDimension {
            got: xi.len(),
            expected: sys.n(),
        });
    }
    CompiledSystem::new(sys).map_err(|reason| IntegrateError::Domain { t: 0.0, reason })
}

/// Integrates from 0 to 1.
pub fn integrate(sys: &FiscidsSystem, xi: &[f64], config: &IntegrationConfig) -> Result<Trajectory, IntegrateError> {
    integrate_to(sys, xi, 1.0, config)
}

/// Integrates from 0 to `t_end ∈ [0, 1]`, landing on `t_end` exactly.
pub fn integrate_to(
    sys: &FiscidsSystem,
    xi: &[f64],
    t_end: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory, IntegrateError> {
    if !(0.0..=1.0).contains(&t_end) {
        return Err(IntegrateError::TimeOutOfRange(t_end));
    }
    let cs = prepare(sys, xi, config)?;
    let u = cs.shifted_input(xi);
    let z0 = cs.z0.clone();
    check_bounds(&z0, config.blowup_bound, 0.0)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![z0.clone()],
        outputs: vec![cs.output(&z0).ok()],
        dense: Vec::new(),
    };
    if t_end == 0.0 {
        return Ok(traj);
    }
    match config.method {
        Method::FixedRk4 => rk4(&cs, &u, t_end, config, &mut traj)?,
        Method::AdaptiveRk45 => dopri5(&cs, &u, t_end, config, &mut traj)?,
    }
    Ok(traj)
}

/// `y(t; ξ)`. At `t = 0` this is `h(z0)` and nothing is integrated.
pub fn output_at(
    sys: &FiscidsSystem,
    xi: &[f64],
    t: f64,
    config: &IntegrationConfig,
) -> Result<Vec<f64>, IntegrateError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(IntegrateError::TimeOutOfRange(t));
    }
    if t == 0.0 {
        let cs = prepare(sys, xi, config)?;
        return cs.output(&cs.z0).map_err(|reason| IntegrateError::Domain { t, reason });
    }
    let traj = integrate_to(sys, xi, t, config)?;
    traj.final_output()
        .map(<[f64]>::to_vec)
        .ok_or_else(|| IntegrateError::Domain {
            t,
            reason: String::from("output map undefined at the final state"),
        })
}

/// Outputs at each of the sorted `times` from a single integration.
pub fn outputs_at(
    sys: &FiscidsSystem,
    xi: &[f64],
    times: &[f64],
    config: &IntegrationConfig,
) -> Result<Vec<Vec<f64>>, IntegrateError> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    if let Some(bad) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(IntegrateError::TimeOutOfRange(*bad));
    }
    let cs = prepare(sys, xi, config)?;
    let traj = integrate_to(sys, xi, t_max, config)?;
    times
        .iter()
        .map(|&t| {
            let z = traj.state_at(t).expect("time within trajectory");
            cs.output(&z).map_err(|reason| IntegrateError::Domain { t, reason })
        })
        .collect()
}

fn eval_rhs(cs: &CompiledSystem, z: &[f64], u: &[f64], out: &mut [f64], t: f64) -> Result<(), IntegrateError> {
    cs.rhs(z, u, out).map_err(|reason| IntegrateError::Domain { t, reason })
}

fn rk4(
    cs: &CompiledSystem,
    u: &[f64],
    t_end: f64,
    config: &IntegrationConfig,
    traj: &mut Trajectory,
) -> Result<(), IntegrateError> {
    let dim = cs.big_n();
    let steps = config.fixed_steps;
    let h = t_end / steps as f64;
    let mut z = traj.states[0].clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    eval_rhs(cs, &z, u, &mut k1, 0.0)?;
    for s in 0..steps {
        let t0 = t_end * s as f64 / steps as f64;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        eval_rhs(cs, &tmp, u, &mut k2, t0)?;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        eval_rhs(cs, &tmp, u, &mut k3, t0)?;
        for i in 0..dim {
            tmp[i] = z[i] + h * k3[i];
        }
        eval_rhs(cs, &tmp, u, &mut k4, t0)?;
        let z1: Vec<f64> = (0..dim)
            .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let t1 = if s + 1 == steps {
            t_end
        } else {
            t_end * (s + 1) as f64 / steps as f64
        };
        check_bounds(&z1, config.blowup_bound, t1)?;
        let mut f1 = vec![0.0; dim];
        eval_rhs(cs, &z1, u, &mut f1, t1)?;
        let dense = Dense::Hermite {
            t0,
            h: t1 - t0,
            y0: z.clone(),
            y1: z1.clone(),
            f0: k1.clone(),
            f1: f1.clone(),
        };
        traj.push(t1, z1.clone(), cs.output(&z1).ok(), dense);
        z = z1;
        k1 = f1;
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn rms(v: impl Iterator<Item = f64>, dim: usize) -> f64 {
    libm::sqrt(v.map(|x| x * x).sum::<f64>() / dim.max(1) as f64)
}

/// Starting step from the local scale of the solution and its slope.
fn initial_step(
    cs: &CompiledSystem,
    u: &[f64],
    z: &[f64],
    f0: &[f64],
    config: &IntegrationConfig,
    h_max: f64,
) -> Result<f64, IntegrateError> {
    let dim = z.len();
    let sk: Vec<f64> = z.iter().map(|v| config.abs_tol + config.rel_tol * v.abs()).collect();
    let dnf = rms(f0.iter().zip(&sk).map(|(f, s)| f / s), dim);
    let dny = rms(z.iter().zip(&sk).map(|(y, s)| y / s), dim);
    let mut h = if dnf <= 1e-5 || dny <= 1e-5 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h = h.min(h_max);
    let z1: Vec<f64> = (0..dim).map(|i| z[i] + h * f0[i]).collect();
    let mut f1 = vec![0.0; dim];
    if cs.rhs(&z1, u, &mut f1).is_err() || f1.iter().any(|v| !v.is_finite()) {
        return Ok(h * 1e-3);
    }
    let der2 = rms((0..dim).map(|i| (f1[i] - f0[i]) / sk[i]), dim) / h;
    let der12 = der2.abs().max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / der12, 0.2)
    };
    Ok((100.0 * h).min(h1).min(h_max))
}

fn dopri5(
    cs: &CompiledSystem,
    u: &[f64],
    t_end: f64,
    config: &IntegrationConfig,
    traj: &mut Trajectory,
) -> Result<(), IntegrateError> {
    let dim = cs.big_n();
    let mut z = traj.states[0].clone();
    let mut t = 0.0;
    let mut k1 = vec![0.0; dim];
    eval_rhs(cs, &z, u, &mut k1, 0.0)?;
    let mut h = initial_step(cs, u, &z, &k1, config, t_end)?;
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut y = vec![0.0; dim];
    let mut z1 = vec![0.0; dim];
    let mut attempts = 0usize;
    let mut rejected_last = false;

    while t < t_end {
        attempts += 1;
        if attempts > config.max_steps {
            return Err(IntegrateError::MaxStepsExceeded);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 16.0 * f64::EPSILON * t.max(1.0) {
            return Err(IntegrateError::StepUnderflow { t });
        }

        let stages = (|| -> Result<(), String> {
            for i in 0..dim {
                y[i] = z[i] + h * A21 * k1[i];
            }
            cs.rhs(&y, u, &mut k2)?;
            for i in 0..dim {
                y[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            cs.rhs(&y, u, &mut k3)?;
            for i in 0..dim {
                y[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            cs.rhs(&y, u, &mut k4)?;
            for i in 0..dim {
                y[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            cs.rhs(&y, u, &mut k5)?;
            for i in 0..dim {
                y[i] = z[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            cs.rhs(&y, u, &mut k6)?;
            for i in 0..dim {
                z1[i] = z[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            cs.rhs(&z1, u, &mut k7)?;
            Ok(())
        })();

        let err = match stages {
            Ok(()) => rms(
                (0..dim).map(|i| {
                    let sk = config.abs_tol + config.rel_tol * z[i].abs().max(z1[i].abs());
                    h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]) / sk
                }),
                dim,
            ),
            Err(_) => f64::NAN,
        };

        if !err.is_finite() {
            // A stage left the domain or overflowed.
            h *= 0.25;
            rejected_last = true;
            continue;
        }

        if err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            check_bounds(&z1, config.blowup_bound, t1)?;
            let r5: Vec<f64> = (0..dim)
                .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                .collect();
            let ydiff: Vec<f64> = (0..dim).map(|i| z1[i] - z[i]).collect();
            let bspl: Vec<f64> = (0..dim).map(|i| h * k1[i] - ydiff[i]).collect();
            let r4: Vec<f64> = (0..dim).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
            let dense = Dense::Dopri {
                t0: t,
                h,
                r: [z.clone(), ydiff, bspl, r4, r5],
            };
            traj.push(t1, z1.clone(), cs.output(&z1).ok(), dense);
            t = t1;
            z.copy_from_slice(&z1);
            core::mem::swap(&mut k1, &mut k7);
            let mut fac = if err == 0.0 { 10.0 } else { 0.9 * libm::pow(err, -0.2) };
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h *= fac;
        } else {
            let fac = (0.9 * libm::pow(err, -0.2)).clamp(0.2, 1.0);
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(())
}
