//! Adaptive explicit Runge-Kutta integration for complex-valued states.
//!
//! Two embedded Dormand-Prince pairs are provided: the 8(5,3) scheme used for
//! Jost shooting and the 5(4) scheme used for the radial continuation. The
//! independent variable is a real path parameter; complex paths are handled by
//! the caller through the chain rule.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step budget of {budget} exhausted at t = {t}")]
    StepBudget { t: f64, budget: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Dop853,
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 200_000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-14)
    }
}

/// Result of an integration: the state at each requested output and at the end.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub outputs: Vec<[Complex64; N]>,
    pub end: [Complex64; N],
    pub steps: usize,
}

type State<const N: usize> = [Complex64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        let w = h * c;
        for i in 0..N {
            out[i] += k[i] * w;
        }
    }
    out
}

fn finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`, recording the state at every
/// point of `outputs` (which must lie between `t0` and `t1` and be ordered in
/// the direction of integration). Steps are clipped so outputs are hit exactly.
pub fn integrate<const N: usize, E, F>(
    scheme: Scheme,
    mut rhs: F,
    t0: f64,
    y0: State<N>,
    t1: f64,
    outputs: &[f64],
    tol: &Tolerance,
) -> Result<Trajectory<N>, E>
where
    E: From<OdeError>,
    F: FnMut(f64, &State<N>) -> Result<State<N>, E>,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        outputs: Vec::with_capacity(outputs.len()),
        end: y0,
        steps: 0,
    };
    let mut pending = outputs.iter().copied().peekable();
    while let Some(&p) = pending.peek() {
        if (p - t0) * dir <= 0.0 {
            traj.outputs.push(y0);
            pending.next();
        } else {
            break;
        }
    }
    if t1 == t0 {
        for _ in pending {
            traj.outputs.push(y0);
        }
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = y0;
    let mut f0 = rhs(t, &y)?;
    let mut h = initial_step(scheme, &mut rhs, t, &y, &f0, dir, tol)?;
    let order = match scheme {
        Scheme::Dop853 => 8.0,
        Scheme::Dopri5 => 5.0,
    };
    let span = (t1 - t0).abs();
    let mut rejected_last = false;

    loop {
        if traj.steps >= tol.max_steps {
            return Err(OdeError::StepBudget {
                t,
                budget: tol.max_steps,
            }
            .into());
        }
        let target = pending.peek().copied().unwrap_or(t1);
        let remaining = target - t;
        let proposed = h;
        let mut hit = false;
        if (h * 1.01 - remaining) * dir >= 0.0 {
            h = remaining;
            hit = true;
        }
        if h.abs() <= 1e-15 * span.max(t.abs()).max(1.0) && !hit {
            return Err(OdeError::StepUnderflow { t }.into());
        }

        let (y_new, f_new, err) = match scheme {
            Scheme::Dop853 => dop853_step(&mut rhs, t, &y, &f0, h, tol)?,
            Scheme::Dopri5 => dopri5_step(&mut rhs, t, &y, &f0, h, tol)?,
        };
        traj.steps += 1;

        let err = if err.is_finite() { err } else { f64::INFINITY };
        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-1.0 / order)).clamp(0.2, 6.0)
        };
        if err <= 1.0 && finite(&y_new) {
            t = if hit { target } else { t + h };
            y = y_new;
            f0 = f_new;
            if hit {
                if pending.peek().is_some() {
                    traj.outputs.push(y);
                    pending.next();
                    while let Some(&p) = pending.peek() {
                        if p == t {
                            traj.outputs.push(y);
                            pending.next();
                        } else {
                            break;
                        }
                    }
                    if t == t1 && pending.peek().is_none() {
                        break;
                    }
                } else {
                    break;
                }
            }
            let grow = if rejected_last { fac.min(1.0) } else { fac };
            // A step clipped onto an output point says nothing about the
            // admissible step size.
            h = if hit {
                (h * grow).abs().max(proposed.abs()) * dir
            } else {
                h * grow
            };
            rejected_last = false;
        } else {
            if !err.is_finite() && !finite(&y_new) && h.abs() < 1e-12 {
                return Err(OdeError::NonFinite { t }.into());
            }
            #[allow(clippy::manual_clamp)]
            let shrink = fac.min(1.0).max(0.1);
            h *= shrink;
            rejected_last = true;
        }
    }
    traj.end = y;
    Ok(traj)
}

fn initial_step<const N: usize, E, F>(
    scheme: Scheme,
    rhs: &mut F,
    t: f64,
    y: &State<N>,
    f0: &State<N>,
    dir: f64,
    tol: &Tolerance,
) -> Result<f64, E>
where
    E: From<OdeError>,
    F: FnMut(f64, &State<N>) -> Result<State<N>, E>,
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = tol.atol + y[i].norm() * tol.rtol;
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (f0[i].norm() / sc).powi(2);
    }
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * (d0 / d1).sqrt()
    };
    h0 *= dir;
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = rhs(t + h0, &y1)?;
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = tol.atol + y[i].norm() * tol.rtol;
        d2 += ((f1[i] - f0[i]).norm() / sc).powi(2);
    }
    let d2 = d2.sqrt() / h0.abs();
    let order = match scheme {
        Scheme::Dop853 => 8.0,
        Scheme::Dopri5 => 5.0,
    };
    let dmax = d1.sqrt().max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0.abs() * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / order)
    };
    Ok(dir * (100.0 * h0.abs()).min(h1))
}

fn scale<const N: usize>(y: &State<N>, y_new: &State<N>, tol: &Tolerance) -> [f64; N] {
    let mut sc = [0.0; N];
    for i in 0..N {
        sc[i] = tol.atol + y[i].norm().max(y_new[i].norm()) * tol.rtol;
    }
    sc
}

const DP5_A: [[f64; 6]; 6] = [
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
const DP5_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP5_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type StepOut<const N: usize> = (State<N>, State<N>, f64);

fn dopri5_step<const N: usize, E, F>(
    rhs: &mut F,
    t: f64,
    y: &State<N>,
    f0: &State<N>,
    h: f64,
    tol: &Tolerance,
) -> Result<StepOut<N>, E>
where
    E: From<OdeError>,
    F: FnMut(f64, &State<N>) -> Result<State<N>, E>,
{
    let mut k: [State<N>; 7] = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = *f0;
    let mut y_new = *y;
    for s in 1..7 {
        let mut yi = *y;
        for j in 0..s {
            let a = DP5_A[s - 1][j];
            if a != 0.0 {
                for i in 0..N {
                    yi[i] += k[j][i] * (h * a);
                }
            }
        }
        if s == 6 {
            y_new = yi;
        }
        k[s] = rhs(t + DP5_C[s] * h, &yi)?;
    }
    let sc = scale(y, &y_new, tol);
    let mut err = 0.0;
    for i in 0..N {
        let mut e = Complex64::new(0.0, 0.0);
        for s in 0..7 {
            e += k[s][i] * DP5_E[s];
        }
        err += (e.norm() * h.abs() / sc[i]).powi(2);
    }
    let err = (err / N as f64).sqrt();
    Ok((y_new, k[6], err))
}

const DOP853_A: [[f64; 11]; 11] = [
    [
        5.26001519587677318785587544488E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.97250569845378994544595329183E-2,
        5.91751709536136983633785987549E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.95875854768068491816892993775E-2,
        0.0,
        8.87627564304205475450678981324E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
        0.0,
        0.0,
    ],
    [
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
        0.0,
    ],
    [
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];
const DOP853_C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];
const DOP853_B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];
const DOP853_BHH: [f64; 3] = [
    0.244094488188976377952755905512E+00,
    0.733846688281611857341361741547E+00,
    0.220588235294117647058823529412E-01,
];
const DOP853_E: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

fn dop853_step<const N: usize, E, F>(
    rhs: &mut F,
    t: f64,
    y: &State<N>,
    f0: &State<N>,
    h: f64,
    tol: &Tolerance,
) -> Result<StepOut<N>, E>
where
    E: From<OdeError>,
    F: FnMut(f64, &State<N>) -> Result<State<N>, E>,
{
    let mut k: [State<N>; 12] = [[Complex64::new(0.0, 0.0); N]; 12];
    k[0] = *f0;
    for s in 1..12 {
        let mut yi = *y;
        for j in 0..s {
            let a = DOP853_A[s - 1][j];
            if a != 0.0 {
                for i in 0..N {
                    yi[i] += k[j][i] * (h * a);
                }
            }
        }
        k[s] = rhs(t + DOP853_C[s] * h, &yi)?;
    }
    let mut incr = [Complex64::new(0.0, 0.0); N];
    for s in 0..12 {
        let b = DOP853_B[s];
        if b != 0.0 {
            for i in 0..N {
                incr[i] += k[s][i] * b;
            }
        }
    }
    let mut y_new = *y;
    for i in 0..N {
        y_new[i] += incr[i] * h;
    }
    let sc = scale(y, &y_new, tol);
    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..N {
        let mut e = Complex64::new(0.0, 0.0);
        for s in 0..12 {
            e += k[s][i] * DOP853_E[s];
        }
        err += (e.norm() / sc[i]).powi(2);
        let e2 = incr[i] - k[0][i] * DOP853_BHH[0] - k[8][i] * DOP853_BHH[1] - k[11][i] * DOP853_BHH[2];
        err2 += (e2.norm() / sc[i]).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err / (deno * N as f64).sqrt();
    let f_new = rhs(t + h, &y_new)?;
    Ok((y_new, f_new, err))
}
