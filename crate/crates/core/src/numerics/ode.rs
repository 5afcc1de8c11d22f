//! Dormand-Prince 5(4) with continuous output and event location.

use crate::error::{Error, Result};
use crate::numerics::roots::find_root;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Terminate once any component exceeds this magnitude.
    pub state_cap: f64,
}

impl OdeOptions {
    /// Options for a requested accuracy `tol`; the per-step tolerances are
    /// set one decade tighter so that long runs stay within `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: 0.1 * tol, atol: 0.1 * tol, ..Self::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
            state_cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn accepts(self, g0: f64, g1: f64) -> bool {
        match self {
            Crossing::Rising => g0 < 0.0 && g1 >= 0.0,
            Crossing::Falling => g0 > 0.0 && g1 <= 0.0,
            Crossing::Either => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
        }
    }
}

/// A scalar event function `g(t, y)`; an event fires where `g` changes sign.
pub struct Event<'a> {
    pub g: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    pub direction: Crossing,
    pub terminal: bool,
}

impl<'a> Event<'a> {
    pub fn new(g: impl Fn(f64, &[f64]) -> f64 + 'a, direction: Crossing, terminal: bool) -> Self {
        Self { g: Box::new(g), direction, terminal }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    /// Index into the event list passed to the integrator.
    pub index: usize,
    pub t: f64,
    pub y: Vec<f64>,
    /// `true` if `g` went from negative to positive.
    pub rising: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Completed,
    TerminalEvent(usize),
    StateCap,
    StepUnderflow,
    StepBudget,
}

#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.r[0][i]
                + th * (self.r[1][i]
                    + th1 * (self.r[2][i] + th * (self.r[3][i] + th1 * self.r[4][i])));
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub events: Vec<EventRecord>,
    pub stop: StopReason,
    dense: Vec<DenseStep>,
}

impl OdeTrajectory {
    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory has the initial sample")
    }

    pub fn y_end(&self) -> &[f64] {
        self.y.last().expect("trajectory has the initial sample")
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn events_of(&self, index: usize) -> impl Iterator<Item = &EventRecord> {
        self.events.iter().filter(move |e| e.index == index)
    }

    /// Continuous-output state at `t` (clamped to the integrated range).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = self.y[0].clone();
        if self.dense.is_empty() || t <= self.t[0] {
            return out;
        }
        if t >= self.t_end() {
            return self.y_end().to_vec();
        }
        let i = self.dense.partition_point(|s| s.t0 + s.h < t).min(self.dense.len() - 1);
        self.dense[i].eval_into(t, &mut out);
        out
    }
}

struct Stepper<'f, F> {
    f: &'f mut F,
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y1: Vec<f64>,
    err: Vec<f64>,
}

impl<'f, F: FnMut(f64, &[f64], &mut [f64])> Stepper<'f, F> {
    fn new(f: &'f mut F, n: usize) -> Self {
        let z = || vec![0.0; n];
        Self { f, n, k: [z(), z(), z(), z(), z(), z(), z()], tmp: z(), y1: z(), err: z() }
    }

    /// One trial step; `k[0]` must hold `f(t, y)`. Result in `y1`, error in `err`.
    fn step(&mut self, t: f64, y: &[f64], h: f64) {
        let n = self.n;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        (self.f)(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        (self.f)(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        (self.f)(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        (self.f)(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        (self.f)(t + h, tmp, k6);
        for i in 0..n {
            self.y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        (self.f)(t + h, &self.y1, k7);
        for i in 0..n {
            self.err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
    }

    fn dense(&self, t0: f64, y0: &[f64], h: f64) -> DenseStep {
        let n = self.n;
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let dy = self.y1[i] - y0[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y0[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        DenseStep { t0, h, r }
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &OdeOptions) -> f64 {
    y0.iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| (e / (opts.atol + opts.rtol * a.abs().max(b.abs()))).abs())
        .fold(0.0, f64::max)
}

/// Integrates `y' = f(t, y)` over `[t0, t1]`, failing on step-size underflow.
pub fn integrate<F>(
    f: F,
    y0: &[f64],
    t_span: (f64, f64),
    opts: &OdeOptions,
    events: &[Event<'_>],
) -> Result<OdeTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let traj = integrate_lenient(f, y0, t_span, opts, events)?;
    match traj.stop {
        StopReason::StepUnderflow => Err(Error::StepUnderflow {
            t: traj.t_end(),
            state: traj.y_end().to_vec(),
        }),
        StopReason::StepBudget => Err(Error::StepBudget(opts.max_steps)),
        _ => Ok(traj),
    }
}

/// As [`integrate`], but reports underflow and budget exhaustion through
/// [`OdeTrajectory::stop`] so the partial trajectory stays available.
pub fn integrate_lenient<F>(
    mut f: F,
    y0: &[f64],
    t_span: (f64, f64),
    opts: &OdeOptions,
    events: &[Event<'_>],
) -> Result<OdeTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = t_span;
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Domain("ODE tolerances must be positive".into()));
    }
    if !(t1 > t0) {
        return Err(Error::Domain(format!("empty time span [{t0}, {t1}]")));
    }
    let n = y0.len();
    let mut traj = OdeTrajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        events: Vec::new(),
        stop: StopReason::Completed,
        dense: Vec::new(),
    };
    if y0.iter().any(|v| v.abs() > opts.state_cap) {
        traj.stop = StopReason::StateCap;
        return Ok(traj);
    }

    let mut st = Stepper::new(&mut f, n);
    let mut t = t0;
    let mut y = y0.to_vec();
    (st.f)(t, &y, &mut st.k[0]);

    let mut h = opts.h_init.unwrap_or_else(|| {
        let d0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let d1 = st.k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(opts.h_max).min(t1 - t0).max(1e-10 * (t1 - t0))
    });
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut steps = 0usize;
    let mut last_rejected = false;

    while t < t1 {
        if steps >= opts.max_steps {
            traj.stop = StopReason::StepBudget;
            break;
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            traj.stop = StopReason::StepUnderflow;
            break;
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        st.step(t, &y, h);
        steps += 1;
        let en = error_norm(&y, &st.y1, &st.err, opts);
        if !en.is_finite() || en > 1.0 {
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= fac;
            last_rejected = true;
            continue;
        }

        let step = st.dense(t, &y, h);
        let t_new = if last { t1 } else { t + h };
        let y_new = st.y1.clone();

        // events on the accepted step
        let mut fired: Option<(f64, usize, Vec<f64>, bool)> = None;
        let mut g_new = Vec::with_capacity(events.len());
        for (i, ev) in events.iter().enumerate() {
            let g1 = (ev.g)(t_new, &y_new);
            g_new.push(g1);
            if ev.direction.accepts(g_prev[i], g1) {
                let mut buf = vec![0.0; n];
                let gfun = |tt: f64| {
                    let mut b = vec![0.0; n];
                    step.eval_into(tt, &mut b);
                    (ev.g)(tt, &b)
                };
                let te = if g1 == 0.0 {
                    t_new
                } else {
                    let tol = 1e-3 * opts.atol.min(opts.rtol).max(1e-15) * t_new.abs().max(1.0);
                    find_root(gfun, t, t_new, tol.max(4.0 * f64::EPSILON * t_new.abs()))
                        .unwrap_or(t_new)
                };
                step.eval_into(te, &mut buf);
                let rising = g_prev[i] < 0.0;
                traj.events.push(EventRecord { index: i, t: te, y: buf.clone(), rising });
                if ev.terminal && fired.as_ref().map_or(true, |f| te < f.0) {
                    fired = Some((te, i, buf, rising));
                }
            }
        }

        if let Some((te, i, ye, _)) = fired {
            // drop events recorded after the terminal one on this step
            traj.events.retain(|e| e.t <= te);
            traj.dense.push(step);
            traj.t.push(te);
            traj.y.push(ye);
            traj.stop = StopReason::TerminalEvent(i);
            return Ok(traj);
        }

        traj.dense.push(step);
        t = t_new;
        y.copy_from_slice(&y_new);
        traj.t.push(t);
        traj.y.push(y.clone());
        g_prev = g_new;
        let k7 = st.k[6].clone();
        st.k[0].copy_from_slice(&k7);

        if y.iter().any(|v| !v.is_finite() || v.abs() > opts.state_cap) {
            traj.stop = StopReason::StateCap;
            return Ok(traj);
        }

        let mut fac = if en == 0.0 { 10.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 10.0) };
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(opts.h_max);
    }
    Ok(traj)
}
