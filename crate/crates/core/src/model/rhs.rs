use std::sync::Arc;

use num_complex::Complex64;

use super::params::ModelParams;
use super::state::{zero_comps, Comps, SimState, FIELDS};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{Grid, ScalarField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

// Per-point kernel output slots. The first ten are transformed every stage.
const SLOT_A: usize = 0; // u equation: w_u x u + w_v x v + v div v + sigma1 G_u
const SLOT_B: usize = 3; // v equation: -(u x w_v) - (v x w_u) + sigma2 G_v
const SLOT_S: usize = 6; // u . v
const SLOT_F: usize = 7; // u theta
const SLOT_GU: usize = 10; // |u|^(alpha-1) u
const SLOT_GV: usize = 13; // |v|^(beta-1) v
const SLOT_PU: usize = 16; // |u|^(alpha+1)
const SLOT_PV: usize = 17; // |v|^(beta+1)
const SLOT_SPEED: usize = 18; // max |component| of u and v
const SLOTS: usize = 19;

// Physical fields produced by the inverse transforms.
const PHYS_CURL_U: usize = 7;
const PHYS_CURL_V: usize = 10;
const PHYS_DIV_V: usize = 13;
const PHYS_ADVECTIVE: usize = 14;
const PHYS_VELOCITIES: usize = 6;

/// Explicit part of the time derivative, already projected and dealiased.
/// The diffusion `-c |k|^2` is applied separately by the integrator.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub du: VectorField,
    pub dv: VectorField,
    pub dtheta: ScalarField,
}

/// Energy bookkeeping at one instant.
///
/// With `E = ||(u, v, theta)||^2` and
/// `D = nu ||grad u||^2 + eta ||grad v||^2 + mu ||grad theta||^2
///    + sigma1 ||u||_{alpha+1}^{alpha+1} + sigma2 ||v||_{beta+1}^{beta+1}`
/// the semi-discrete system satisfies `dE/dt = -2 D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRates {
    pub energy: f64,
    pub dissipation: f64,
    /// `dD/dt` along the exact semi-discrete flow.
    pub dissipation_rate: f64,
}

/// By-products of one right-hand-side evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct StageInfo {
    pub max_speed: Option<f64>,
    pub energy: Option<EnergyRates>,
}

/// Per-point kernel outputs in blocks of `BLOCK` points, slot-major within
/// a block, so each slot is read with unit stride.
#[derive(Default)]
struct Points {
    data: Vec<f64>,
}

impl Points {
    const BLOCK: usize = 256;

    fn resize(&mut self, len: usize) {
        let blocks = len.div_ceil(Self::BLOCK);
        self.data.resize(blocks * Self::BLOCK * SLOTS, 0.0);
    }

    /// Fills every point `i < len` with `f(i)`.
    fn fill<F>(&mut self, len: usize, f: F)
    where
        F: Fn(usize) -> [f64; SLOTS] + Sync + Send,
    {
        const B: usize = Points::BLOCK;
        par::for_each_chunk(&mut self.data, B * SLOTS, |b, chunk| {
            for p in 0..B.min(len - b * B) {
                let o = f(b * B + p);
                for (s, v) in o.into_iter().enumerate() {
                    chunk[s * B + p] = v;
                }
            }
        });
    }

    #[inline]
    fn get(&self, i: usize, slot: usize) -> f64 {
        const B: usize = Points::BLOCK;
        self.data[(i / B) * B * SLOTS + slot * B + i % B]
    }
}

/// Scratch buffers reused across evaluations.
#[derive(Default)]
pub(crate) struct Workspace {
    phys: Vec<Vec<f64>>,
    points: Points,
    spec: Vec<Vec<Complex64>>,
}

/// `|w|^e` from `|w|^2`, with the conventions `0^0 = 1` and `0^e = 0`.
#[inline]
fn mag_pow(m2: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 2.0 {
        m2
    } else {
        m2.powf(0.5 * e)
    }
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Coefficient of inverse-transform input `f` at mode `k`.
#[inline]
fn phys_coeff(grid: &Grid, y: &Comps, f: usize, k: usize) -> Complex64 {
    if f < FIELDS {
        return y[f][k];
    }
    let kv = grid.deriv_wavevector(k);
    let curl = |o: usize, c: usize| {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        I * (kv[a] * y[o + b][k] - kv[b] * y[o + a][k])
    };
    match f {
        PHYS_CURL_U..=9 => curl(0, f - PHYS_CURL_U),
        PHYS_CURL_V..=12 => curl(3, f - PHYS_CURL_V),
        _ => I * (kv[0] * y[3][k] + kv[1] * y[4][k] + kv[2] * y[5][k]),
    }
}

/// Evaluates the explicit tendency of `y` into `out`.
///
/// `y` must vanish outside the dealias mask; `out` does too. With `energy`
/// the energy rates of `y` are returned as well.
pub(crate) fn evaluate(
    grid: &Arc<Grid>,
    params: &ModelParams,
    y: &Comps,
    out: &mut Comps,
    ws: &mut Workspace,
    energy: bool,
) -> Result<StageInfo> {
    let len = grid.len();
    let adv = params.terms.advection;
    let (s1, s2) = (params.sigma1, params.sigma2);
    let damped = s1 > 0.0 || s2 > 0.0;
    let nphys = if adv {
        PHYS_ADVECTIVE
    } else if damped || energy {
        PHYS_VELOCITIES
    } else {
        0
    };
    let nspec = if adv {
        SLOT_GU
    } else if damped {
        SLOT_S
    } else {
        0
    };
    let want_g = energy && damped;

    let mut info = StageInfo::default();
    if nphys > 0 {
        ws.phys.resize_with(nphys.max(ws.phys.len()), Vec::new);
        grid.inverse_fields(nphys, true, |f, k| phys_coeff(grid, y, f, k), &mut ws.phys);

        let ph = &ws.phys;
        let (ea, eb) = (params.alpha - 1.0, params.beta - 1.0);
        ws.points.resize(len);
        ws.points.fill(len, |i| {
            let u = [ph[0][i], ph[1][i], ph[2][i]];
            let v = [ph[3][i], ph[4][i], ph[5][i]];
            let (uu, vv) = (dot(u, u), dot(v, v));
            let mut o = [0.0; SLOTS];
            let gu = if s1 > 0.0 || energy {
                mag_pow(uu, ea)
            } else {
                0.0
            };
            let gv = if s2 > 0.0 || energy {
                mag_pow(vv, eb)
            } else {
                0.0
            };
            for c in 0..3 {
                o[SLOT_GU + c] = gu * u[c];
                o[SLOT_GV + c] = gv * v[c];
                o[SLOT_A + c] = s1 * gu * u[c];
                o[SLOT_B + c] = s2 * gv * v[c];
            }
            o[SLOT_PU] = gu * uu;
            o[SLOT_PV] = gv * vv;
            o[SLOT_SPEED] = u.iter().chain(&v).fold(0.0, |m, x| m.max(x.abs()));
            if adv {
                let th = ph[6][i];
                let wu = [
                    ph[PHYS_CURL_U][i],
                    ph[PHYS_CURL_U + 1][i],
                    ph[PHYS_CURL_U + 2][i],
                ];
                let wv = [
                    ph[PHYS_CURL_V][i],
                    ph[PHYS_CURL_V + 1][i],
                    ph[PHYS_CURL_V + 2][i],
                ];
                let divv = ph[PHYS_DIV_V][i];
                let (a1, a2) = (cross(wu, u), cross(wv, v));
                let (b1, b2) = (cross(u, wv), cross(v, wu));
                for c in 0..3 {
                    o[SLOT_A + c] += a1[c] + a2[c] + v[c] * divv;
                    o[SLOT_B + c] -= b1[c] + b2[c];
                    o[SLOT_F + c] = u[c] * th;
                }
                o[SLOT_S] = dot(u, v);
            }
            o
        });
        let pts = &ws.points;
        info.max_speed = Some(par::max_indexed(len, |i| pts.get(i, SLOT_SPEED)));

        let nout = nspec + if want_g { 6 } else { 0 };
        ws.spec.resize_with(nout.max(ws.spec.len()), Vec::new);
        if nspec > 0 {
            grid.forward_fields(nspec, true, |f, i| pts.get(i, f), &mut ws.spec[..nspec]);
        }
        if want_g {
            grid.forward_fields(
                6,
                true,
                |f, i| pts.get(i, SLOT_GU + f),
                &mut ws.spec[nspec..nout],
            );
        }
        if ws.spec[..nout]
            .iter()
            .any(|s| !s[0].re.is_finite() || !s[0].im.is_finite())
            || !info.max_speed.is_some_and(f64::is_finite)
        {
            return Err(Error::NonFinite("nonlinear products".into()));
        }
    }
    assemble(grid, params, y, out, &ws.spec, nspec);

    if energy {
        let g = want_g.then(|| &ws.spec[nspec..nspec + 6]);
        info.energy = Some(energy_rates_of(
            grid,
            params,
            y,
            out,
            g,
            &ws.points,
            nphys > 0,
        ));
    }
    Ok(info)
}

/// Combines the transformed products with the linear coupling terms.
fn assemble(
    grid: &Grid,
    params: &ModelParams,
    y: &Comps,
    out: &mut Comps,
    spec: &[Vec<Complex64>],
    nspec: usize,
) {
    let coupling = if params.terms.coupling { 1.0 } else { 0.0 };
    let mask = grid.dealias_mask();
    let get = |slot: usize, k: usize| if slot < nspec { spec[slot][k] } else { ZERO };
    for o in out.iter_mut() {
        o.resize(grid.len(), ZERO);
    }
    for k in 0..grid.len() {
        if !mask[k] {
            for o in out.iter_mut() {
                o[k] = ZERO;
            }
            continue;
        }
        let kv = grid.deriv_wavevector(k);
        let k2 = dot(kv, kv);

        let w = [-get(SLOT_A, k), -get(SLOT_A + 1, k), -get(SLOT_A + 2, k)];
        let proj = if k2 > 0.0 {
            (kv[0] * w[0] + kv[1] * w[1] + kv[2] * w[2]) / k2
        } else {
            ZERO
        };
        let s = get(SLOT_S, k);
        let theta = y[6][k];
        let mut flux = ZERO;
        let mut divv = ZERO;
        for c in 0..3 {
            out[c][k] = w[c] - kv[c] * proj;
            out[3 + c][k] = -(get(SLOT_B + c, k) + I * kv[c] * (s + coupling * theta));
            flux += kv[c] * get(SLOT_F + c, k);
            divv += kv[c] * y[3 + c][k];
        }
        out[6][k] = -I * (flux + coupling * divv);
    }
}

/// Energy, dissipation and its time derivative; `g` holds the transformed
/// damping profiles `G_u, G_v` when damping is active.
fn energy_rates_of(
    grid: &Grid,
    params: &ModelParams,
    y: &Comps,
    out: &Comps,
    g: Option<&[Vec<Complex64>]>,
    points: &Points,
    have_points: bool,
) -> EnergyRates {
    let kmag2 = grid.kmag2();
    let visc = [
        params.nu, params.nu, params.nu, params.eta, params.eta, params.eta, params.mu,
    ];
    let vol = grid.box_volume();

    let energy = vol * par::sum_indexed(grid.len(), |k| y.iter().map(|f| f[k].norm_sqr()).sum());
    let diffusive = vol
        * par::sum_indexed(grid.len(), |k| {
            kmag2[k]
                * (0..FIELDS)
                    .map(|f| visc[f] * y[f][k].norm_sqr())
                    .sum::<f64>()
        });
    let (pu, pv) = if have_points {
        let dv = grid.cell_volume();
        (
            dv * par::sum_indexed(grid.len(), |i| points.get(i, SLOT_PU)),
            dv * par::sum_indexed(grid.len(), |i| points.get(i, SLOT_PV)),
        )
    } else {
        (0.0, 0.0)
    };
    let dissipation = diffusive + params.sigma1 * pu + params.sigma2 * pv;

    let damp_w = [
        params.sigma1 * (params.alpha + 1.0),
        params.sigma2 * (params.beta + 1.0),
    ];
    let dissipation_rate = vol
        * par::sum_indexed(grid.len(), |k| {
            let mut acc = 0.0;
            for f in 0..FIELDS {
                let yt = out[f][k] - visc[f] * kmag2[k] * y[f][k];
                acc += 2.0 * visc[f] * kmag2[k] * (y[f][k].conj() * yt).re;
                if let (Some(g), true) = (g, f < 6) {
                    acc += damp_w[f / 3] * (g[f][k].conj() * yt).re;
                }
            }
            acc
        });
    EnergyRates {
        energy,
        dissipation,
        dissipation_rate,
    }
}

/// Explicit tendency of `state`: `-P[(u.grad)u + div(v (x) v) + sigma1 |u|^(alpha-1) u]`,
/// `-[(u.grad)v + (v.grad)u + grad theta + sigma2 |v|^(beta-1) v]` and
/// `-[(u.grad)theta + div v]`, with products dealiased by the two-thirds rule.
///
/// Coefficients of `state` outside the dealias mask are ignored.
pub fn nonlinear_rhs(state: &SimState, params: &ModelParams) -> Result<Tendency> {
    let grid = state.grid().clone();
    let y = masked_comps(state);
    let mut out = zero_comps(grid.len());
    evaluate(
        &grid,
        params,
        &y,
        &mut out,
        &mut Workspace::default(),
        false,
    )?;
    let t = SimState::from_comps(&grid, &out, state.time);
    Ok(Tendency {
        du: t.u,
        dv: t.v,
        dtheta: t.theta,
    })
}

/// Linear diffusion part `(nu Lap u, eta Lap v, mu Lap theta)`.
pub fn linear_tendency(state: &SimState, params: &ModelParams) -> Tendency {
    let lap = |f: &ScalarField, c: f64| {
        let mut g = crate::spectral::laplacian(f);
        g.scale(c);
        g
    };
    let lap_vec = |w: &VectorField, c: f64| {
        let [a, b, d] = w.comps();
        VectorField::new([lap(a, c), lap(b, c), lap(d, c)]).expect("shared grid")
    };
    Tendency {
        du: lap_vec(&state.u, params.nu),
        dv: lap_vec(&state.v, params.eta),
        dtheta: lap(&state.theta, params.mu),
    }
}

/// Energy, dissipation and dissipation rate of `state`.
pub fn energy_rates(state: &SimState, params: &ModelParams) -> Result<EnergyRates> {
    let grid = state.grid().clone();
    let y = masked_comps(state);
    let mut out = zero_comps(grid.len());
    let info = evaluate(&grid, params, &y, &mut out, &mut Workspace::default(), true)?;
    Ok(info.energy.expect("requested"))
}

pub(crate) fn masked_comps(state: &SimState) -> Comps {
    let mask = state.grid().dealias_mask();
    let mut y = state.to_comps();
    for f in y.iter_mut() {
        for (c, &keep) in f.iter_mut().zip(mask) {
            if !keep {
                *c = ZERO;
            }
        }
    }
    y
}

/// Pseudo-spectral damping `sigma |w|^(gamma-1) w`, with `|w|` the pointwise
/// Euclidean magnitude, dealiased by the two-thirds rule.
pub fn damping_term(w: &VectorField, gamma: f64, sigma: f64) -> Result<VectorField> {
    if !(gamma >= 1.0) {
        return Err(Error::param(
            "gamma",
            format!("damping exponent must be >= 1, got {gamma}"),
        ));
    }
    let grid = w.grid().clone();
    let phys = w.to_physical();
    let prod: Vec<[f64; 3]> = (0..grid.len())
        .map(|i| {
            let u = [phys[0][i], phys[1][i], phys[2][i]];
            let g = sigma * mag_pow(dot(u, u), gamma - 1.0);
            [g * u[0], g * u[1], g * u[2]]
        })
        .collect();
    if prod.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("damping term".into()));
    }
    let mut spec = vec![Vec::new(); 3];
    grid.forward_fields(3, true, |f, i| prod[i][f], &mut spec);
    let [a, b, c] = [0, 1, 2].map(|f| {
        ScalarField::from_coeffs(&grid, std::mem::take(&mut spec[f])).expect("length matches grid")
    });
    VectorField::new([a, b, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Terms;
    use crate::spectral::norms;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn state(
        g: &Arc<Grid>,
        u: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send,
        v: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send,
        th: impl Fn([f64; 3]) -> f64 + Sync + Send,
    ) -> SimState {
        SimState::new(
            VectorField::from_fn(g, u),
            VectorField::from_fn(g, v),
            ScalarField::from_fn(g, th),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = grid(8);
        let t = nonlinear_rhs(&SimState::zeros(&g), &ModelParams::default()).unwrap();
        for f in [
            &t.du[0], &t.du[1], &t.du[2], &t.dv[0], &t.dv[1], &t.dv[2], &t.dtheta,
        ] {
            assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn temperature_gradient_drives_v_only() {
        let g = grid(16);
        let s = state(&g, |_| [0.0; 3], |_| [0.0; 3], |x| x[0].sin());
        let t = nonlinear_rhs(&s, &ModelParams::default()).unwrap();
        let expect = ScalarField::from_fn(&g, |x| -x[0].cos());
        assert!(max_diff(&t.dv[0], &expect) < 1e-15);
        assert!(max_diff(&t.dv[1], &ScalarField::zeros(&g)) < 1e-15);
        assert!(max_diff(&t.dtheta, &ScalarField::zeros(&g)) < 1e-15);
    }

    #[test]
    fn shear_flow_does_not_self_advect() {
        let g = grid(16);
        let s = state(&g, |x| [x[1].sin(), 0.0, 0.0], |_| [0.0; 3], |_| 0.0);
        let p = ModelParams::default().without_damping();
        let t = nonlinear_rhs(&s, &p).unwrap();
        for c in 0..3 {
            assert!(max_diff(&t.du[c], &ScalarField::zeros(&g)) < 1e-15);
        }
    }

    #[test]
    fn advection_matches_direct_formula() {
        // u = (sin y, 0, 0) advects theta = cos x: (u.grad)theta = -sin y sin x.
        let g = grid(16);
        let s = state(&g, |x| [x[1].sin(), 0.0, 0.0], |_| [0.0; 3], |x| x[0].cos());
        let p = ModelParams::default().without_damping().with_terms(Terms {
            advection: true,
            coupling: false,
        });
        let t = nonlinear_rhs(&s, &p).unwrap();
        let expect = ScalarField::from_fn(&g, |x| x[1].sin() * x[0].sin());
        assert!(max_diff(&t.dtheta, &expect) < 1e-15);
    }

    #[test]
    fn damping_examples() {
        let g = grid(16);
        let z = damping_term(&VectorField::zeros(&g), 3.0, 1.0).unwrap();
        assert!(z[0].coeffs().iter().all(|c| c.norm() == 0.0));

        let c = 0.7;
        let w = VectorField::from_fn(&g, |_| [c, 0.0, 0.0]);
        let d = damping_term(&w, 3.0, 1.0).unwrap();
        assert!((d[0].mean() - c.powi(3)).abs() < 1e-15);

        let w = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let d = damping_term(&w, 3.0, 2.0).unwrap();
        let expect = ScalarField::from_fn(&g, |x| {
            2.0 * (0.75 * x[1].sin() - 0.25 * (3.0 * x[1]).sin())
        });
        assert!(max_diff(&d[0], &expect) < 1e-15);

        let lin = damping_term(&w, 1.0, 0.5).unwrap();
        assert!(max_diff(&lin[0], &w[0].scaled(0.5)) < 1e-15);
        assert!(damping_term(&w, 0.5, 1.0).is_err());
    }

    #[test]
    fn energy_derivative_matches_dissipation() {
        // dE/dt = 2 Re <y, y_t> must equal -2 D for any band-limited state.
        let g = grid(16);
        let u = crate::spectral::leray_project(&VectorField::from_fn(&g, |x| {
            [
                0.3 * (x[1] + 2.0 * x[2]).sin(),
                0.2 * (x[0] - x[2]).cos(),
                0.1 * (2.0 * x[0] + x[1]).sin(),
            ]
        }));
        let s = SimState::new(
            u,
            VectorField::from_fn(&g, |x| {
                [
                    0.2 * x[2].cos(),
                    0.1 * (x[0] + x[1]).sin(),
                    0.3 * x[1].sin(),
                ]
            }),
            ScalarField::from_fn(&g, |x| 0.25 * (x[0] - 2.0 * x[1]).cos()),
            0.0,
        )
        .unwrap();
        let p = ModelParams::new(0.7, 0.9, 1.1, 0.8, 1.3, 2.5, 3.5).unwrap();
        let rates = energy_rates(&s, &p).unwrap();
        let nl = nonlinear_rhs(&s, &p).unwrap();
        let lin = linear_tendency(&s, &p);
        let vol = g.box_volume();
        let pair = |a: &ScalarField, b: &ScalarField, c: &ScalarField| {
            vol * a
                .coeffs()
                .iter()
                .zip(b.coeffs().iter().zip(c.coeffs()))
                .map(|(y, (n, l))| 2.0 * (y.conj() * (n + l)).re)
                .sum::<f64>()
        };
        let mut de = pair(&s.theta, &nl.dtheta, &lin.dtheta);
        for c in 0..3 {
            de += pair(&s.u[c], &nl.du[c], &lin.du[c]) + pair(&s.v[c], &nl.dv[c], &lin.dv[c]);
        }
        assert!((de + 2.0 * rates.dissipation).abs() < 1e-13 * rates.dissipation);
        let e = s.triple_norm_sq(0.0);
        assert!((rates.energy - e).abs() < 1e-14 * e);
        let grad = p.nu * norms::sobolev_norm_vec_sq(&s.u, 1.0, true)
            + p.eta * norms::sobolev_norm_vec_sq(&s.v, 1.0, true)
            + p.mu * norms::sobolev_norm_sq(&s.theta, 1.0, true);
        assert!(rates.dissipation > grad);
    }
}
