//! Discrete snake energy and its semi-implicit evolution.
//!
//! The energy of a contour `y` with nodes `y_s` is
//!
//! ```text
//! E(y) = sum_s [ D(y_s) + alpha |y_{s+1} - y_s|^2 + beta(y_s) |y_{s+1} - 2 y_s + y_{s-1}|^2 ]
//!      + sum_{(u,v) in region(y)} kappa(u, v)
//! ```
//!
//! with `D`, `beta` sampled bilinearly at the nodes and indices cyclic. One
//! evolution step is implicit in the internal terms and explicit in the
//! external and balloon forces:
//!
//! ```text
//! (I + tau A) y' = y + tau (F_ext(y) + F_balloon(y))
//! ```
//!
//! where `A` is the Hessian of the internal energy with `beta` frozen at the
//! pre-step node samples.

use crate::error::{Error, Result};
use crate::field::{BinaryMask, ScalarField};
use crate::flow::{ForceField, DEFAULT_CLIP_NORM};
use crate::geometry::{rasterize, Contour, Point};

/// Weights of the snake energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    alpha: f64,
    beta: ScalarField,
    kappa: ScalarField,
}

impl ParameterSet {
    pub fn new(alpha: f64, beta: ScalarField, kappa: ScalarField) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if beta.dims() != kappa.dims() {
            return Err(Error::mismatch(beta.dims(), kappa.dims()));
        }
        if beta.min() < 0.0 {
            return Err(Error::InvalidParameter("beta must be >= 0 everywhere".into()));
        }
        Ok(ParameterSet { alpha, beta, kappa })
    }

    /// Spatially uniform weights.
    pub fn uniform(width: usize, height: usize, alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        ParameterSet::new(
            alpha,
            ScalarField::filled(width, height, beta)?,
            ScalarField::filled(width, height, kappa)?,
        )
    }

    /// Uniform `alpha` and `beta` with a balloon that pushes toward the
    /// boundary of `mask` from both sides: `+magnitude` (inflate) on
    /// foreground pixels, `-magnitude` (deflate) on background pixels.
    pub fn toward_boundary(mask: &BinaryMask, alpha: f64, beta: f64, magnitude: f64) -> Result<Self> {
        let (w, h) = mask.dims();
        let kappa = ScalarField::from_fn(w, h, |u, v| if mask.get(u, v) { magnitude } else { -magnitude })?;
        ParameterSet::new(alpha, ScalarField::filled(w, h, beta)?, kappa)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &ScalarField {
        &self.beta
    }

    pub fn kappa(&self) -> &ScalarField {
        &self.kappa
    }

    pub fn dims(&self) -> (usize, usize) {
        self.beta.dims()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_kappa(self, kappa: ScalarField) -> Result<Self> {
        ParameterSet::new(self.alpha, self.beta, kappa)
    }

    pub fn with_beta(self, beta: ScalarField) -> Result<Self> {
        ParameterSet::new(self.alpha, beta, self.kappa)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnakeConfig {
    /// Number of evolution steps. Zero only records the initial state.
    pub iterations: usize,
    pub time_step: f64,
    pub node_count: usize,
    /// Redistribute nodes uniformly by arc length after every step.
    pub resample_each_step: bool,
    pub clip_norm: f64,
}

impl Default for SnakeConfig {
    fn default() -> Self {
        SnakeConfig {
            iterations: 50,
            time_step: 0.1,
            node_count: 60,
            resample_each_step: false,
            clip_norm: DEFAULT_CLIP_NORM,
        }
    }
}

impl SnakeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.time_step
            )));
        }
        if self.node_count < 3 {
            return Err(Error::TooFewNodes(self.node_count));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "clip norm must be positive, got {}",
                self.clip_norm
            )));
        }
        Ok(())
    }
}

/// Breakdown of [`energy_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub total: f64,
    pub external: f64,
    pub continuity: f64,
    pub curvature: f64,
    pub region: f64,
    /// The contour encloses no area; `region` is then zero.
    pub degenerate: bool,
}

/// Evaluates the snake energy of `contour`.
pub fn energy_eval(contour: &Contour, external: &ScalarField, params: &ParameterSet) -> Result<Energy> {
    params.beta.ensure_dims(external.dims())?;
    let mut ext = 0.0;
    let mut cont = 0.0;
    let mut curv = 0.0;
    let first = contour.first_differences();
    let second = contour.second_differences();
    for (s, &y) in contour.nodes().iter().enumerate() {
        ext += external.bilinear_sample(y)?;
        cont += params.alpha * first[s].norm_sq();
        curv += params.beta.bilinear_sample(y)? * second[s].norm_sq();
    }
    let (w, h) = external.dims();
    let raster = rasterize(contour, w, h)?;
    let region: f64 = raster.mask.foreground().map(|p| params.kappa.get(p.u, p.v)).sum();
    Ok(Energy {
        total: ext + cont + curv + region,
        external: ext,
        continuity: cont,
        curvature: curv,
        region,
        degenerate: raster.degenerate,
    })
}

/// Dense symmetric `L x L` matrix of the internal energy's Hessian. Only the
/// five cyclic diagonals around the main one are ever non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalSystem {
    n: usize,
    a: Vec<f64>,
}

impl InternalSystem {
    fn zeros(n: usize) -> Self {
        InternalSystem { n, a: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, x: f64) {
        self.a[i * self.n + j] += x;
    }

    /// Adds `weight * c c^T` for a sparse vector `c`.
    fn add_outer(&mut self, terms: &[(usize, f64)], weight: f64) {
        for &(i, ci) in terms {
            for &(j, cj) in terms {
                self.add(i, j, weight * ci * cj);
            }
        }
    }

    /// Row `i` read at cyclic offsets `-2..=2`.
    pub fn stencil(&self, i: usize) -> [f64; 5] {
        let n = self.n as isize;
        let mut out = [0.0; 5];
        for (k, off) in (-2isize..=2).enumerate() {
            out[k] = self.get(i, (i as isize + off).rem_euclid(n) as usize);
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> InternalSystem {
        let mut out = InternalSystem::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.a[i * self.n + j] = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        out
    }

    /// Cholesky factor of `I + tau A`.
    fn factor_shifted(&self, tau: f64) -> Result<Cholesky> {
        let n = self.n;
        let mut m: Vec<f64> = self.a.iter().map(|x| x * tau).collect();
        for i in 0..n {
            m[i * n + i] += 1.0;
        }
        Cholesky::factor(m, n)
    }
}

struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(mut m: Vec<f64>, n: usize) -> Result<Self> {
        for j in 0..n {
            let mut d = m[j * n + j];
            for k in 0..j {
                d -= m[j * n + k] * m[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Solve("system matrix is not positive definite"));
            }
            let d = d.sqrt();
            m[j * n + j] = d;
            for i in j + 1..n {
                let mut s = m[i * n + j];
                for k in 0..j {
                    s -= m[i * n + k] * m[j * n + k];
                }
                m[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { n, l: m })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

/// Hessian of the internal energy with `beta` frozen at the current node
/// samples: `2 alpha` times the cyclic second-difference operator plus
/// `2 sum_s beta_s d_s d_s^T` for the second-difference rows `d_s`.
///
/// Works for any `L >= 3`; coinciding cyclic indices for `L < 5` simply
/// accumulate.
pub fn assemble_internal_system(contour: &Contour, params: &ParameterSet) -> Result<InternalSystem> {
    let betas = contour
        .nodes()
        .iter()
        .map(|&p| params.beta.bilinear_sample(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_with_betas(params.alpha, &betas))
}

fn assemble_with_betas(alpha: f64, betas: &[f64]) -> InternalSystem {
    let n = betas.len();
    let mut a = InternalSystem::zeros(n);
    for s in 0..n {
        let next = (s + 1) % n;
        let prev = (s + n - 1) % n;
        a.add_outer(&[(s, -1.0), (next, 1.0)], 2.0 * alpha);
        a.add_outer(&[(prev, 1.0), (s, -2.0), (next, 1.0)], 2.0 * betas[s]);
    }
    a
}

/// Per-node `kappa(y_s) * n_s` with `n_s` the unit outward normal, taken
/// perpendicular to `y_{s+1} - y_{s-1}`. Positive `kappa` inflates.
pub fn balloon_force(contour: &Contour, kappa: &ScalarField) -> Result<Vec<Point>> {
    (0..contour.len() as isize)
        .map(|s| {
            let t = contour.node(s + 1) - contour.node(s - 1);
            let len = t.norm();
            if len < 1e-12 {
                return Ok(Point::ZERO);
            }
            let normal = Point::new(t.v, -t.u) * (1.0 / len);
            Ok(normal * kappa.bilinear_sample(contour.node(s))?)
        })
        .collect()
}

/// One semi-implicit step.
pub fn evolve_step(
    contour: &Contour,
    force: &ForceField,
    params: &ParameterSet,
    config: &SnakeConfig,
) -> Result<Contour> {
    let dims = force.dims();
    params.beta.ensure_dims(dims)?;
    let tau = config.time_step;
    let system = assemble_internal_system(contour, params)?.symmetrized();
    let chol = system.factor_shifted(tau)?;
    let balloon = balloon_force(contour, &params.kappa)?;
    let n = contour.len();
    let mut bu = Vec::with_capacity(n);
    let mut bv = Vec::with_capacity(n);
    for (s, &y) in contour.nodes().iter().enumerate() {
        let f = force.sample(y)? + balloon[s];
        bu.push(y.u + tau * f.u);
        bv.push(y.v + tau * f.v);
    }
    chol.solve(&mut bu);
    chol.solve(&mut bv);
    let nodes: Vec<Point> = bu.into_iter().zip(bv).map(|(u, v)| Point::new(u, v)).collect();
    if nodes.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("updated contour node"));
    }
    let next = Contour::new_clamped(nodes, dims.0, dims.1)?;
    if config.resample_each_step {
        Ok(next.resampled(n)?.clamped(dims.0, dims.1))
    } else {
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub contour: Contour,
    pub energy: f64,
    /// Mean node displacement from the previous entry, pixels.
    pub mean_displacement: f64,
}

/// Snapshots of an evolution; entry 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub entries: Vec<TraceEntry>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn displacements(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean_displacement).collect()
    }
}

fn mean_displacement(a: &Contour, b: &Contour) -> f64 {
    if a.len() != b.len() {
        return f64::NAN;
    }
    let total: f64 = a.nodes().iter().zip(b.nodes()).map(|(p, q)| p.distance(*q)).sum();
    total / a.len() as f64
}

/// Runs `config.iterations` steps from `initial`, recording the energy
/// (against the force field's potential) and mean displacement after each.
pub fn evolve(
    initial: &Contour,
    force: &ForceField,
    params: &ParameterSet,
    config: &SnakeConfig,
) -> Result<(Contour, EvolutionTrace)> {
    config.validate()?;
    let wrap = |iteration: usize| move |e: Error| Error::Evolution { iteration, source: Box::new(e) };
    let energy = |c: &Contour, it: usize| {
        energy_eval(c, force.potential(), params)
            .map(|e| e.total)
            .map_err(wrap(it))
    };
    let mut current = initial.clone();
    let mut trace = EvolutionTrace {
        entries: Vec::with_capacity(config.iterations + 1),
    };
    trace.entries.push(TraceEntry {
        contour: current.clone(),
        energy: energy(&current, 0)?,
        mean_displacement: 0.0,
    });
    for it in 1..=config.iterations {
        let next = evolve_step(&current, force, params, config).map_err(wrap(it))?;
        let moved = mean_displacement(&current, &next);
        trace.entries.push(TraceEntry {
            contour: next.clone(),
            energy: energy(&next, it)?,
            mean_displacement: moved,
        });
        current = next;
    }
    Ok((current, trace))
}
