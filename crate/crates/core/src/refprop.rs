//! Step-by-step reference propagators (split diagonal phase with second-order
//! differencing of the coupling, short iterative Lanczos, adaptive
//! Dormand-Prince) and the comparison of their wave operators with the
//! global solution.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::molecular::DrivenHamiltonian;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Krylov vectors with norm below this end the subspace early.
pub const LANCZOS_BREAKDOWN: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMethod {
    SplitSod,
    Sil,
}

impl std::str::FromStr for StepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" | "split_sod" | "sod" => Ok(StepMethod::SplitSod),
            "sil" | "lanczos" => Ok(StepMethod::Sil),
            other => Err(Error::config(format!(
                "unknown step method '{other}' (expected split or sil)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepPropagatorConfig {
    pub n_steps: usize,
    pub method: StepMethod,
    pub lanczos_dim: usize,
    /// Keep every `record_stride`-th state; the final state is always kept.
    pub record_stride: usize,
}

impl StepPropagatorConfig {
    pub fn new(n_steps: usize, method: StepMethod) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::config(format!("n_steps must be at least 2, got {n_steps}")));
        }
        Ok(Self {
            n_steps,
            method,
            lanczos_dim: 10,
            record_stride: usize::MAX,
        })
    }

    pub fn with_lanczos_dim(self, lanczos_dim: usize) -> Result<Self> {
        if lanczos_dim < 2 {
            return Err(Error::config(format!(
                "lanczos_dim must be at least 2, got {lanczos_dim}"
            )));
        }
        Ok(Self { lanczos_dim, ..self })
    }

    pub fn with_record_stride(self, record_stride: usize) -> Result<Self> {
        if record_stride == 0 {
            return Err(Error::config("record stride must be positive"));
        }
        Ok(Self { record_stride, ..self })
    }
}

/// States recorded along a propagation, starting with the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
}

impl Trajectory {
    fn start(psi0: &[C64]) -> Self {
        Self {
            times: vec![0.0],
            states: vec![psi0.to_vec()],
        }
    }

    fn record(&mut self, step: usize, n_steps: usize, stride: usize, t: f64, psi: &[C64]) {
        if step % stride == 0 || step == n_steps {
            self.times.push(t);
            self.states.push(psi.to_vec());
        }
    }

    pub fn final_state(&self) -> &[C64] {
        self.states
            .last()
            .expect("a trajectory holds at least its initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("a trajectory holds at least its initial state")
    }
}

/// Unit vector on level `i`.
pub fn initial_state(dim: usize, i: usize) -> Vec<C64> {
    let mut psi = vec![ZERO; dim];
    psi[i] = C64::new(1.0, 0.0);
    psi
}

fn norm(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_inputs(psi0: &[C64], ham: &DrivenHamiltonian, t_final: f64) -> Result<()> {
    if psi0.len() != ham.dim() {
        return Err(Error::config(format!(
            "initial state has {} components, system {}",
            psi0.len(),
            ham.dim()
        )));
    }
    if (norm(psi0) - 1.0).abs() > 1e-10 {
        return Err(Error::config("initial state must be normalized"));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::config(format!("final time must be positive, got {t_final}")));
    }
    Ok(())
}

/// Dispatches on `config.method`.
pub fn propagate(
    psi0: &[C64],
    ham: &DrivenHamiltonian,
    t_final: f64,
    config: &StepPropagatorConfig,
) -> Result<Trajectory> {
    match config.method {
        StepMethod::SplitSod => split_sod_propagate(psi0, ham, t_final, config),
        StepMethod::Sil => sil_propagate(psi0, ham, t_final, config),
    }
}

/// `exp(-i dt d C) psi` by a Taylor series run to machine precision.
fn coupling_exp(ham: &DrivenHamiltonian, drive: f64, dt: f64, psi: &[C64]) -> Vec<C64> {
    let n = psi.len();
    let mut out = psi.to_vec();
    let mut term = psi.to_vec();
    let mut next = vec![ZERO; n];
    for k in 1..60 {
        ham.apply_coupling(drive, &term, &mut next);
        for z in next.iter_mut() {
            *z *= -I * dt / k as f64;
        }
        std::mem::swap(&mut term, &mut next);
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
        if norm(&term) < 1e-17 * norm(&out) {
            break;
        }
    }
    out
}

/// Split propagation: the diagonal part is applied exactly as phases and the
/// coupling by second-order differencing in the interaction picture,
/// `psi_{n+1} = D^2 psi_{n-1} - 2 i dt D V(t_n) psi_n` with `D = exp(-i E dt)`.
/// The first step is a Strang split with an exact coupling exponential.
pub fn split_sod_propagate(
    psi0: &[C64],
    ham: &DrivenHamiltonian,
    t_final: f64,
    config: &StepPropagatorConfig,
) -> Result<Trajectory> {
    check_inputs(psi0, ham, t_final)?;
    let n = ham.dim();
    let steps = config.n_steps;
    let dt = t_final / steps as f64;
    let d1: Vec<C64> = ham.energies().iter().map(|&e| (-I * e * dt).exp()).collect();
    let d2: Vec<C64> = d1.iter().map(|z| z * z).collect();
    let half: Vec<C64> = ham.energies().iter().map(|&e| (-I * e * 0.5 * dt).exp()).collect();

    let mut traj = Trajectory::start(psi0);
    let mut prev = psi0.to_vec();
    let mid: Vec<C64> = prev.iter().zip(&half).map(|(p, h)| p * h).collect();
    let mut cur: Vec<C64> = coupling_exp(ham, ham.drive(0.5 * dt), dt, &mid)
        .iter()
        .zip(&half)
        .map(|(p, h)| p * h)
        .collect();
    traj.record(1, steps, config.record_stride, dt, &cur);

    let mut vpsi = vec![ZERO; n];
    for step in 2..=steps {
        let t = (step - 1) as f64 * dt;
        ham.apply_coupling(ham.drive(t), &cur, &mut vpsi);
        for i in 0..n {
            prev[i] = d2[i] * prev[i] - 2.0 * I * dt * d1[i] * vpsi[i];
        }
        std::mem::swap(&mut prev, &mut cur);
        traj.record(step, steps, config.record_stride, step as f64 * dt, &cur);
    }
    if cur.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(
            "split propagation produced non-finite amplitudes".into(),
        ));
    }
    Ok(traj)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Krylov basis and tridiagonal coefficients reused across steps.
struct LanczosWorkspace {
    q: Vec<Vec<C64>>,
    w: Vec<C64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    coeffs: Vec<C64>,
}

impl LanczosWorkspace {
    fn new(n: usize, m: usize) -> Self {
        Self {
            q: vec![vec![ZERO; n]; m],
            w: vec![ZERO; n],
            alpha: Vec::with_capacity(m),
            beta: Vec::with_capacity(m),
            coeffs: Vec::with_capacity(m),
        }
    }
}

/// `psi <- exp(-i H dt) psi` in the Krylov space of dimension at most `m`.
fn lanczos_step(ham: &DrivenHamiltonian, drive: f64, dt: f64, psi: &mut [C64], m: usize, ws: &mut LanczosWorkspace) {
    let beta0 = norm(psi);
    if beta0 == 0.0 {
        return;
    }
    let m = m.min(psi.len()).min(ws.q.len());
    let LanczosWorkspace {
        q,
        w,
        alpha,
        beta,
        coeffs,
    } = ws;
    alpha.clear();
    beta.clear();
    for (qi, p) in q[0].iter_mut().zip(psi.iter()) {
        *qi = p / beta0;
    }
    let mut k = 0;
    for j in 0..m {
        k = j + 1;
        ham.apply_with_drive(drive, &q[j], w);
        let a = dot(&q[j], w).re;
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&q[j]) {
            *wi -= qi * a;
        }
        if j > 0 {
            for (wi, qi) in w.iter_mut().zip(&q[j - 1]) {
                *wi -= qi * beta[j - 1];
            }
        }
        for qk in &q[..=j] {
            let h = dot(qk, w);
            for (wi, qi) in w.iter_mut().zip(qk) {
                *wi -= h * qi;
            }
        }
        if j + 1 == m {
            break;
        }
        let b = norm(w);
        if b < LANCZOS_BREAKDOWN {
            break;
        }
        beta.push(b);
        for (qi, wi) in q[j + 1].iter_mut().zip(w.iter()) {
            *qi = wi / b;
        }
    }
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let u = &eig.eigenvectors;
    let phases: Vec<C64> = (0..k)
        .map(|s| (-I * eig.eigenvalues[s] * dt).exp() * u[(0, s)] * beta0)
        .collect();
    coeffs.clear();
    coeffs.extend((0..k).map(|r| (0..k).map(|s| phases[s] * u[(r, s)]).sum::<C64>()));
    psi.fill(ZERO);
    for (c, qj) in coeffs.iter().zip(q.iter()) {
        for (o, x) in psi.iter_mut().zip(qj) {
            *o += c * x;
        }
    }
}

/// Short iterative Lanczos: each step exponentiates `H(t + dt/2)` in a fully
/// reorthogonalized Krylov space of dimension `lanczos_dim`.
pub fn sil_propagate(
    psi0: &[C64],
    ham: &DrivenHamiltonian,
    t_final: f64,
    config: &StepPropagatorConfig,
) -> Result<Trajectory> {
    check_inputs(psi0, ham, t_final)?;
    let steps = config.n_steps;
    let dt = t_final / steps as f64;
    let mut traj = Trajectory::start(psi0);
    let mut psi = psi0.to_vec();
    let mut ws = LanczosWorkspace::new(psi.len(), config.lanczos_dim);
    for step in 1..=steps {
        let t_mid = (step as f64 - 0.5) * dt;
        lanczos_step(ham, ham.drive(t_mid), dt, &mut psi, config.lanczos_dim, &mut ws);
        traj.record(step, steps, config.record_stride, step as f64 * dt, &psi);
    }
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(
            "Lanczos propagation produced non-finite amplitudes".into(),
        ));
    }
    Ok(traj)
}

/// Error tolerances of the adaptive Dormand-Prince integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk45Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Rk45Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
        }
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince 5(4) integration of `i dpsi/dt = H(t) psi` from
/// `t = 0`, returning the state at each of the non-decreasing `times`.
pub fn rk45_propagate(
    psi0: &[C64],
    ham: &DrivenHamiltonian,
    times: &[f64],
    tol: Rk45Tolerance,
) -> Result<Vec<Vec<C64>>> {
    if psi0.len() != ham.dim() {
        return Err(Error::config("initial state does not match the system dimension"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::config("output times must be non-negative and non-decreasing"));
    }
    let n = psi0.len();
    let rhs = |t: f64, y: &[C64], out: &mut [C64]| {
        ham.apply(t, y, out);
        for o in out.iter_mut() {
            *o *= -I;
        }
    };
    let mut y = psi0.to_vec();
    let mut t: f64 = 0.0;
    let mut h: f64 = 1e-3;
    let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 7];
    let mut stage = vec![ZERO; n];
    let mut y5 = vec![ZERO; n];
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            for s in 0..7 {
                for i in 0..n {
                    stage[i] = y[i] + (0..s).map(|r| k[r][i] * (DP_A[s][r] * step)).sum::<C64>();
                }
                rhs(t + DP_C[s] * step, &stage, &mut k[s]);
            }
            let mut err: f64 = 0.0;
            for i in 0..n {
                y5[i] = y[i] + (0..7).map(|s| k[s][i] * (DP_B5[s] * step)).sum::<C64>();
                let y4 = y[i] + (0..7).map(|s| k[s][i] * (DP_B4[s] * step)).sum::<C64>();
                let scale = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
                err = err.max((y5[i] - y4).norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Numerical(
                    "Dormand-Prince step produced non-finite values".into(),
                ));
            }
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                y.copy_from_slice(&y5);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
            if h < 1e-14 * target.max(1.0) {
                return Err(Error::Numerical("Dormand-Prince step size underflow".into()));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `Omega_v(t) = Psi_v(t) / Psi_i(t)` for a one-dimensional model space.
pub fn reconstruct_wave_operator(psi: &[C64], initial: usize) -> Result<Vec<C64>> {
    let p = *psi
        .get(initial)
        .ok_or_else(|| Error::config("initial index outside the state"))?;
    if p.norm() <= 1e-12 {
        return Err(Error::ModelSpaceBreakdown { amplitude: p.norm() });
    }
    Ok(psi.iter().map(|z| z / p).collect())
}

/// `F_C = sum_v |Omega_A(v) - Omega_B(v)|^2`.
pub fn cross_convergence_factor(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::config(format!(
            "wave operators have {} and {} components",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum())
}

/// Step-count measurement of a reference propagator against a fixed wave
/// operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub n_steps: usize,
    pub factor: f64,
    /// `psi(t_final)`.
    pub state: Vec<C64>,
    /// `||psi(t_final)||^2 - 1`.
    pub norm_drift: f64,
    pub seconds: f64,
}

/// Compares step propagators started from level `initial` with a reference
/// wave operator `Omega(t_final)`.
#[derive(Clone, Debug)]
pub struct CrossCheck<'a> {
    ham: &'a DrivenHamiltonian,
    initial: usize,
    t_final: f64,
    reference: Vec<C64>,
    lanczos_dim: usize,
}

impl<'a> CrossCheck<'a> {
    pub fn new(ham: &'a DrivenHamiltonian, initial: usize, t_final: f64, reference: Vec<C64>) -> Result<Self> {
        if reference.len() != ham.dim() || initial >= ham.dim() {
            return Err(Error::config("reference wave operator does not match the Hamiltonian"));
        }
        Ok(Self {
            ham,
            initial,
            t_final,
            reference,
            lanczos_dim: 10,
        })
    }

    pub fn with_lanczos_dim(self, lanczos_dim: usize) -> Self {
        Self { lanczos_dim, ..self }
    }

    pub fn run(&self, method: StepMethod, n_steps: usize) -> Result<SweepPoint> {
        let cfg = StepPropagatorConfig::new(n_steps, method)?.with_lanczos_dim(self.lanczos_dim)?;
        let psi0 = initial_state(self.ham.dim(), self.initial);
        let start = std::time::Instant::now();
        let traj = propagate(&psi0, self.ham, self.t_final, &cfg)?;
        let seconds = start.elapsed().as_secs_f64();
        let psi = traj.final_state();
        let omega = reconstruct_wave_operator(psi, self.initial)?;
        Ok(SweepPoint {
            n_steps,
            factor: cross_convergence_factor(&omega, &self.reference)?,
            norm_drift: norm(psi).powi(2) - 1.0,
            seconds,
            state: psi.to_vec(),
        })
    }

    pub fn sweep(&self, method: StepMethod, steps: &[usize]) -> Result<Vec<SweepPoint>> {
        steps.iter().map(|&n| self.run(method, n)).collect()
    }

    /// First measured step count with `F_C <= threshold`. Reuses `sweep` when
    /// it already reaches the threshold; otherwise extrapolates the order of
    /// its last two points and grows the step count by 25% per retry, giving
    /// up beyond `max_steps`.
    pub fn steps_for_threshold(
        &self,
        method: StepMethod,
        threshold: f64,
        sweep: &[SweepPoint],
        max_steps: usize,
    ) -> Result<Option<SweepPoint>> {
        if let Some(p) = sweep.iter().find(|p| p.factor <= threshold) {
            return Ok(Some(p.clone()));
        }
        let mut n = match sweep {
            [.., a, b] if a.factor > b.factor && b.factor > 0.0 => {
                let order = (a.factor / b.factor).ln() / (b.n_steps as f64 / a.n_steps as f64).ln();
                (b.n_steps as f64 * (b.factor / threshold).powf(1.0 / order) * 1.05) as usize
            }
            [.., b] => 2 * b.n_steps,
            [] => 1024,
        };
        n = n.div_ceil(1024) * 1024;
        while n <= max_steps {
            let p = self.run(method, n)?;
            if p.factor <= threshold {
                return Ok(Some(p));
            }
            n = (n + n / 4).div_ceil(1024) * 1024;
        }
        Ok(None)
    }
}
