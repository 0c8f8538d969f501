//! Brownian motion on a model driven by its stochastically transported frame.
//!
//! The state of the coupled system is `p` followed by the columns of `Z`
//! and then any extra transported vectors, each column stored contiguously:
//!
//! ```text
//! dp^k  = Z^k_ρ ∘ dB^ρ
//! dX^k  = −Γ^k_{ij} Z^i_ρ X^j ∘ dB^ρ     (for every column X)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{default_frame, ChartPoint, ConnectionSpec, ManifoldModel, TestFunction};
use crate::linalg::*;
use crate::sde::{integrate_stratonovich, BrownianDraw, ChartPolicy, StatePath, StratonovichSystem, TimeGrid};

/// Frames further than this from orthonormal are rejected at the start.
const FRAME0_TOL: f64 = 1e-10;
/// Upper bound on `‖Z‖_F‖Z⁻¹‖_F` along a healthy path.
pub const MAX_FRAME_CONDITION: f64 = 1e3;

/// The frame equations with `extra` additional transported columns.
pub struct FrameSystem<'a> {
    conn: &'a ConnectionSpec,
    extra: usize,
}

impl<'a> FrameSystem<'a> {
    pub fn new(conn: &'a ConnectionSpec, extra: usize) -> Self {
        FrameSystem { conn, extra }
    }

    fn n(&self) -> usize {
        self.conn.dim()
    }

    fn columns(&self) -> usize {
        self.n() + self.extra
    }

    /// Packs `p`, the frame and extra columns into a state vector.
    pub fn pack(&self, p: &Vector, z: &Matrix, extra: &[Vector]) -> Vec<f64> {
        let n = self.n();
        let mut x = Vec::with_capacity(self.state_dim());
        x.extend_from_slice(&p[..n]);
        for mu in 0..n {
            x.extend_from_slice(&column(n, z, mu)[..n]);
        }
        for v in extra {
            x.extend_from_slice(&v[..n]);
        }
        x
    }

    fn chart_point(&self, chart: usize, x: &[f64]) -> ChartPoint {
        ChartPoint::new(chart, &x[..self.n()])
    }
}

impl StratonovichSystem for FrameSystem<'_> {
    fn state_dim(&self) -> usize {
        self.n() * (1 + self.columns())
    }

    fn noise_dim(&self) -> usize {
        self.n()
    }

    fn drift(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }

    fn diffusion(&self, chart: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        let gamma = self.conn.christoffel(&self.chart_point(chart, x))?;
        let z = |i: usize, rho: usize| x[n + rho * n + i];
        for k in 0..n {
            for rho in 0..n {
                out[k * n + rho] = z(k, rho);
            }
        }
        for c in 0..self.columns() {
            let col = &x[n + c * n..n + (c + 1) * n];
            for k in 0..n {
                let row = n + c * n + k;
                for rho in 0..n {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += gamma[k][i][j] * z(i, rho) * col[j];
                        }
                    }
                    out[row * n + rho] = -s;
                }
            }
        }
        Ok(())
    }
}

/// Re-expresses the point and pushes every column through the transition Jacobian.
fn apply_switch(model: &ManifoldModel, new: &ChartPoint, jac: &Matrix, chart: &mut usize, x: &mut [f64]) {
    let n = model.dim();
    x[..n].copy_from_slice(&new.x[..n]);
    *chart = new.chart;
    let cols = x.len() / n - 1;
    for c in 0..cols {
        let slot = &mut x[n + c * n..n + (c + 1) * n];
        let v = mat_vec(n, jac, &vector_from(slot));
        slot.copy_from_slice(&v[..n]);
    }
}

/// Switches charts whenever the model asks to, recording the steps.
pub struct ModelPolicy<'a> {
    model: &'a ManifoldModel,
    pub switches: Vec<usize>,
}

impl<'a> ModelPolicy<'a> {
    pub fn new(model: &'a ManifoldModel) -> Self {
        ModelPolicy {
            model,
            switches: Vec::new(),
        }
    }
}

impl ChartPolicy for ModelPolicy<'_> {
    fn after_step(&mut self, step: usize, chart: &mut usize, x: &mut [f64]) -> Result<()> {
        let n = self.model.dim();
        let cp = ChartPoint::new(*chart, &x[..n]);
        if let Some((new, jac)) = self.model.chart_switch(&cp)? {
            apply_switch(self.model, &new, &jac, chart, x);
            self.switches.push(step);
        }
        Ok(())
    }
}

/// Replays a recorded switching schedule, so perturbed or augmented runs
/// stay in the same charts as the base path.
pub struct ForcedPolicy<'a> {
    model: &'a ManifoldModel,
    schedule: &'a [usize],
    next: usize,
}

impl<'a> ForcedPolicy<'a> {
    pub fn new(model: &'a ManifoldModel, schedule: &'a [usize]) -> Self {
        ForcedPolicy { model, schedule, next: 0 }
    }
}

impl ChartPolicy for ForcedPolicy<'_> {
    fn after_step(&mut self, step: usize, chart: &mut usize, x: &mut [f64]) -> Result<()> {
        if self.schedule.get(self.next) == Some(&step) {
            self.next += 1;
            let n = self.model.dim();
            let (new, jac) = self.model.forced_switch(&ChartPoint::new(*chart, &x[..n]))?;
            apply_switch(self.model, &new, &jac, chart, x);
        }
        Ok(())
    }
}

/// One simulated trajectory with its transported frame.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub draw: BrownianDraw,
    pub charts: Vec<usize>,
    pub p: Vec<Vector>,
    /// Column `μ` of `z[i]` is the transported frame vector `u_μ(t_i)`.
    pub z: Vec<Matrix>,
    /// Steps after which the path changed chart.
    pub switches: Vec<usize>,
    pub start: ChartPoint,
    pub frame0: Matrix,
}

impl PathBundle {
    pub fn dim(&self) -> usize {
        self.draw.dims
    }

    pub fn point(&self, i: usize) -> ChartPoint {
        ChartPoint {
            chart: self.charts[i],
            x: self.p[i],
        }
    }

    pub fn seed(&self) -> u64 {
        self.draw.seed
    }

    pub fn path_index(&self) -> u64 {
        self.draw.path_index
    }
}

fn unpack(n: usize, path: &StatePath, extra: usize) -> (Vec<Vector>, Vec<Matrix>, Vec<Vec<Vector>>) {
    let mut p = Vec::with_capacity(path.len());
    let mut z = Vec::with_capacity(path.len());
    let mut cols = vec![Vec::with_capacity(path.len()); extra];
    for i in 0..path.len() {
        let s = path.state(i);
        p.push(vector_from(&s[..n]));
        let mut m = ZERO_MAT;
        for mu in 0..n {
            set_column(n, &mut m, mu, &vector_from(&s[n + mu * n..n + (mu + 1) * n]));
        }
        z.push(m);
        for (e, col) in cols.iter_mut().enumerate() {
            let off = n + (n + e) * n;
            col.push(vector_from(&s[off..off + n]));
        }
    }
    (p, z, cols)
}

/// `max |ᵗZ g Z − Id|` at one point.
pub fn orthonormality_defect(model: &ManifoldModel, cp: &ChartPoint, z: &Matrix) -> Result<f64> {
    let n = model.dim();
    let g = model.metric(cp)?;
    let gram = mat_mul(n, &transpose(n, z), &mat_mul(n, &g, z));
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[i][j] - want).abs());
        }
    }
    Ok(worst)
}

/// Integrates the frame equations driven by a given draw.
pub fn simulate_with_draw(conn: &ConnectionSpec, draw: BrownianDraw, start: ChartPoint, frame0: Matrix) -> Result<PathBundle> {
    let model = conn.model();
    let n = model.dim();
    if draw.dims != n {
        return Err(Error::Contract(format!("draw has {} components, model dimension is {n}", draw.dims)));
    }
    let defect = orthonormality_defect(model, &start, &frame0)?;
    if defect > FRAME0_TOL {
        return Err(Error::Contract(format!("initial frame is not orthonormal (defect {defect:e})")));
    }
    let system = FrameSystem::new(conn, 0);
    let x0 = system.pack(&start.x, &frame0, &[]);
    let mut policy = ModelPolicy::new(model);
    let path = integrate_stratonovich(&system, &x0, start.chart, draw.grid, &draw.increments, &mut policy)?;
    let (p, z, _) = unpack(n, &path, 0);
    Ok(PathBundle {
        grid: draw.grid,
        charts: path.charts,
        p,
        z,
        switches: policy.switches,
        start,
        frame0,
        draw,
    })
}

pub fn simulate_brownian_frame(
    conn: &ConnectionSpec,
    grid: TimeGrid,
    seed: u64,
    path_index: u64,
    start: ChartPoint,
    frame0: Matrix,
) -> Result<PathBundle> {
    let draw = BrownianDraw::sample(grid, conn.dim(), seed, path_index)?;
    simulate_with_draw(conn, draw, start, frame0)
}

/// Simulation from the default start (chart-0 origin, Gram–Schmidt frame).
pub fn simulate_default(conn: &ConnectionSpec, grid: TimeGrid, seed: u64, path_index: u64) -> Result<PathBundle> {
    let start = conn.model().origin();
    let frame0 = default_frame(conn.model(), &start)?;
    simulate_brownian_frame(conn, grid, seed, path_index, start, frame0)
}

/// Re-simulates `p` from `draw` replaying a recorded chart schedule.
/// Returns the chart and coordinates at every grid point.
pub fn simulate_forced(
    conn: &ConnectionSpec,
    draw: &BrownianDraw,
    start: ChartPoint,
    frame0: Matrix,
    schedule: &[usize],
) -> Result<Vec<ChartPoint>> {
    let model = conn.model();
    let n = model.dim();
    let system = FrameSystem::new(conn, 0);
    let x0 = system.pack(&start.x, &frame0, &[]);
    let mut policy = ForcedPolicy::new(model, schedule);
    let path = integrate_stratonovich(&system, &x0, start.chart, draw.grid, &draw.increments, &mut policy)?;
    Ok((0..path.len())
        .map(|i| ChartPoint::new(path.charts[i], &path.state(i)[..n]))
        .collect())
}

/// Transports the given start vectors along the bundle's path by
/// re-integrating the augmented system with the same increments and
/// chart schedule.
pub fn spt_transport_many(bundle: &PathBundle, conn: &ConnectionSpec, x0: &[Vector]) -> Result<Vec<Vec<Vector>>> {
    let model = conn.model();
    let n = model.dim();
    let system = FrameSystem::new(conn, x0.len());
    let state0 = system.pack(&bundle.start.x, &bundle.frame0, x0);
    let mut policy = ForcedPolicy::new(model, &bundle.switches);
    let path = integrate_stratonovich(&system, &state0, bundle.start.chart, bundle.grid, &bundle.draw.increments, &mut policy)?;
    let (_, _, cols) = unpack(n, &path, x0.len());
    Ok(cols)
}

pub fn spt_transport(bundle: &PathBundle, conn: &ConnectionSpec, x0: &Vector) -> Result<Vec<Vector>> {
    Ok(spt_transport_many(bundle, conn, std::slice::from_ref(x0))?.remove(0))
}

/// `F_{f,t}(ω) = f(p(t))`; `t` must be a grid point.
pub fn eval_cylinder(bundle: &PathBundle, model: &ManifoldModel, f: &TestFunction, t: f64) -> Result<f64> {
    let i = bundle.grid.index_of(t)?;
    f.value(model, &bundle.point(i))
}

/// `sup_t max|ᵗZ g Z − Id|`.
pub fn frame_defect(bundle: &PathBundle, model: &ManifoldModel) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..bundle.p.len() {
        worst = worst.max(orthonormality_defect(model, &bundle.point(i), &bundle.z[i])?);
    }
    Ok(worst)
}

/// `sup_t ‖Z‖_F‖Z⁻¹‖_F`.
pub fn max_frame_condition(bundle: &PathBundle) -> Result<f64> {
    let n = bundle.dim();
    let mut worst: f64 = 0.0;
    for (i, z) in bundle.z.iter().enumerate() {
        let inv = inverse(n, z).ok_or(Error::IllConditioned {
            step: i,
            condition: f64::INFINITY,
        })?;
        worst = worst.max(condition_estimate(n, z, &inv));
    }
    Ok(worst)
}

/// Two random unit vectors at the start, transported; returns the sup over
/// time of the largest change of their Gram matrix entries.
pub fn isometry_defect(bundle: &PathBundle, conn: &ConnectionSpec) -> Result<f64> {
    let model = conn.model();
    let n = model.dim();
    let g0 = model.metric(&bundle.start)?;
    let mut rng = ChaCha20Rng::seed_from_u64(bundle.seed() ^ 0x5be0_cd19_137e_2179);
    rng.set_stream(bundle.path_index());
    let mut vs = [ZERO_VEC; 2];
    for v in vs.iter_mut() {
        for c in v.iter_mut().take(n) {
            *c = 2.0 * rng.random::<f64>() - 1.0;
        }
        let len = quad(n, &g0, v, v).sqrt();
        for c in v.iter_mut().take(n) {
            *c /= len;
        }
    }
    let cols = spt_transport_many(bundle, conn, &vs)?;
    let gram = |i: usize| -> Result<[f64; 3]> {
        let g = model.metric(&bundle.point(i))?;
        let (a, b) = (&cols[0][i], &cols[1][i]);
        Ok([quad(n, &g, a, a), quad(n, &g, a, b), quad(n, &g, b, b)])
    };
    let initial = gram(0)?;
    let mut worst: f64 = 0.0;
    for i in 1..bundle.p.len() {
        let now = gram(i)?;
        for (x, y) in now.iter().zip(&initial) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Per-path results of `kernel` for `paths` indices, in index order.
pub fn ensemble_map<T, F>(paths: usize, kernel: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..paths as u64).into_par_iter().map(&kernel).collect()
}

/// Sum over paths of per-step vectors of length `len`, reduced in a fixed
/// chunk order so the result does not depend on thread scheduling.
pub fn ensemble_sum<F>(paths: usize, len: usize, kernel: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    const CHUNK: usize = 64;
    let chunks: Vec<Vec<f64>> = (0..paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut acc = vec![0.0; len];
            for p in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                let row = kernel(p as u64)?;
                for (a, r) in acc.iter_mut().zip(&row) {
                    *a += r;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; len];
    for c in &chunks {
        for (a, r) in total.iter_mut().zip(c) {
            *a += r;
        }
    }
    Ok(total)
}

/// Mean and Monte Carlo standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
