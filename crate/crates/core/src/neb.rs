//! Nudged-elastic-band minimum-energy paths over pluggable potentials.
//!
//! Interior images feel the perpendicular component of the real force plus a
//! parallel spring force along the improved (uphill-neighbor) tangent, and
//! relax under damped-velocity (FIRE-style) descent until the largest force
//! component drops below the threshold. Endpoints never move. A
//! climbing-image variant is available behind a flag and is off by default.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NebError {
    #[error("paths need at least 3 images, got {0}")]
    TooFewImages(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degenerate tangent: images {0} and {1} coincide")]
    DegenerateTangent(usize, usize),
}

/// An energy surface with analytic gradients.
pub trait Potential: Sync {
    fn energy(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Chain of images; endpoints are fixed.
#[derive(Debug, Clone)]
pub struct Path {
    pub images: Vec<Vec<f64>>,
}

impl Path {
    pub fn new(images: Vec<Vec<f64>>) -> Result<Self, NebError> {
        if images.len() < 3 {
            return Err(NebError::TooFewImages(images.len()));
        }
        let dim = images[0].len();
        for img in &images {
            if img.len() != dim {
                return Err(NebError::DimensionMismatch(img.len(), dim));
            }
        }
        Ok(Path { images })
    }

    pub fn dimension(&self) -> usize {
        self.images[0].len()
    }

    pub fn energies(&self, potential: &dyn Potential) -> Vec<f64> {
        self.images.iter().map(|x| potential.energy(x)).collect()
    }
}

/// Evenly spaced convex combinations between two endpoints (inclusive).
pub fn interpolate_linear(
    reactant: &[f64],
    product: &[f64],
    n_images: usize,
) -> Result<Path, NebError> {
    if reactant.len() != product.len() {
        return Err(NebError::DimensionMismatch(reactant.len(), product.len()));
    }
    if n_images < 3 {
        return Err(NebError::TooFewImages(n_images));
    }
    let images = (0..n_images)
        .map(|k| {
            let t = k as f64 / (n_images - 1) as f64;
            reactant
                .iter()
                .zip(product)
                .map(|(r, p)| r * (1.0 - t) + p * t)
                .collect()
        })
        .collect();
    Ok(Path { images })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Improved-tangent estimate at interior image `i`: the displacement toward
/// the higher-energy neighbor, with an energy-weighted blend at extrema.
fn tangent(path: &Path, energies: &[f64], i: usize) -> Result<Vec<f64>, NebError> {
    let plus = sub(&path.images[i + 1], &path.images[i]);
    let minus = sub(&path.images[i], &path.images[i - 1]);
    if norm(&plus) < 1e-12 {
        return Err(NebError::DegenerateTangent(i, i + 1));
    }
    if norm(&minus) < 1e-12 {
        return Err(NebError::DegenerateTangent(i - 1, i));
    }
    let (e_prev, e_here, e_next) = (energies[i - 1], energies[i], energies[i + 1]);
    let raw: Vec<f64> = if e_next > e_here && e_here > e_prev {
        plus
    } else if e_next < e_here && e_here < e_prev {
        minus
    } else {
        let d_max = (e_next - e_here).abs().max((e_prev - e_here).abs());
        let d_min = (e_next - e_here).abs().min((e_prev - e_here).abs());
        if e_next > e_prev {
            plus.iter().zip(&minus).map(|(p, m)| p * d_max + m * d_min).collect()
        } else {
            plus.iter().zip(&minus).map(|(p, m)| p * d_min + m * d_max).collect()
        }
    };
    let len = norm(&raw);
    if len < 1e-12 {
        return Err(NebError::DegenerateTangent(i - 1, i + 1));
    }
    Ok(raw.iter().map(|x| x / len).collect())
}

/// Per-image NEB forces: perpendicular true force plus parallel spring force;
/// zero on the endpoints. With `climbing_image = Some(i)`, image `i` feels
/// the full true force with its parallel component inverted and no spring.
pub fn neb_forces(
    path: &Path,
    potential: &dyn Potential,
    k_spring: f64,
    climbing_image: Option<usize>,
) -> Result<Vec<Vec<f64>>, NebError> {
    let n = path.images.len();
    let dim = path.dimension();
    let energies = path.energies(potential);
    let mut forces = vec![vec![0.0; dim]; n];
    for i in 1..(n - 1) {
        let tau = tangent(path, &energies, i)?;
        let grad = potential.gradient(&path.images[i]);
        let g_par = dot(&grad, &tau);
        if climbing_image == Some(i) {
            // full force with inverted parallel component, no spring
            for d in 0..dim {
                forces[i][d] = -grad[d] + 2.0 * g_par * tau[d];
            }
            continue;
        }
        let plus = sub(&path.images[i + 1], &path.images[i]);
        let minus = sub(&path.images[i], &path.images[i - 1]);
        let spring = k_spring * (norm(&plus) - norm(&minus));
        for d in 0..dim {
            forces[i][d] = -(grad[d] - g_par * tau[d]) + spring * tau[d];
        }
    }
    Ok(forces)
}

/// Optimization settings; `max_force` is the ∞-norm convergence threshold on
/// interior NEB force components. `max_step` clips the per-component image
/// displacement per relaxation step, which keeps the damped-velocity descent
/// stable on steep surfaces regardless of their force scale.
#[derive(Debug, Clone)]
pub struct NebConfig {
    pub max_force: f64,
    pub k_spring: f64,
    pub max_steps: usize,
    pub climbing: bool,
    pub max_step: f64,
}

impl Default for NebConfig {
    fn default() -> Self {
        NebConfig {
            max_force: 1e-3,
            k_spring: 0.1,
            max_steps: 500_000,
            climbing: false,
            max_step: 0.05,
        }
    }
}

/// Result of a path optimization.
#[derive(Debug, Clone)]
pub struct NebOutcome {
    pub path: Path,
    pub energies: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
    pub max_force: f64,
}

/// Damped-velocity (FIRE) relaxation of the interior images.
pub fn optimize_path(
    path: &Path,
    potential: &dyn Potential,
    config: &NebConfig,
) -> Result<NebOutcome, NebError> {
    let n = path.images.len();
    let dim = path.dimension();
    let mut current = path.clone();
    let mut velocity = vec![vec![0.0; dim]; n];

    // FIRE parameters
    let dt_start = 0.01f64;
    let dt_max = 0.1f64;
    let mut dt = dt_start;
    let mut alpha = 0.1;
    let mut steps_since_uphill = 0usize;

    let mut converged = false;
    let mut steps = 0usize;
    let mut worst = f64::INFINITY;

    for step in 0..config.max_steps {
        steps = step + 1;
        let climbing_image = if config.climbing {
            let energies = current.energies(potential);
            let top = (1..n - 1)
                .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
                .unwrap();
            Some(top)
        } else {
            None
        };
        let forces = neb_forces(&current, potential, config.k_spring, climbing_image)?;

        worst = forces
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        if worst < config.max_force {
            converged = true;
            break;
        }

        // FIRE velocity mixing over the whole chain
        let power: f64 = (1..n - 1).map(|i| dot(&forces[i], &velocity[i])).sum();
        let v_norm: f64 =
            (1..n - 1).map(|i| dot(&velocity[i], &velocity[i])).sum::<f64>().sqrt();
        let f_norm: f64 =
            (1..n - 1).map(|i| dot(&forces[i], &forces[i])).sum::<f64>().sqrt();
        if power > 0.0 {
            steps_since_uphill += 1;
            if steps_since_uphill > 5 {
                dt = (dt * 1.1).min(dt_max);
                alpha *= 0.99;
            }
            if f_norm > 1e-300 {
                let mix = alpha * v_norm / f_norm;
                for i in 1..(n - 1) {
                    for d in 0..dim {
                        velocity[i][d] = (1.0 - alpha) * velocity[i][d] + mix * forces[i][d];
                    }
                }
            }
        } else {
            for v in velocity.iter_mut() {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
            dt *= 0.5;
            alpha = 0.1;
            steps_since_uphill = 0;
        }

        for i in 1..(n - 1) {
            for d in 0..dim {
                velocity[i][d] += forces[i][d] * dt;
                let step_d = (velocity[i][d] * dt).clamp(-config.max_step, config.max_step);
                current.images[i][d] += step_d;
            }
        }
    }

    let energies = current.energies(potential);
    Ok(NebOutcome { path: current, energies, converged, steps, max_force: worst })
}

/// Newton iteration on `∇E = 0` with a finite-difference Hessian; converges
/// to the stationary point nearest the start (used to pin exact endpoint
/// minima for built-in surfaces).
pub fn newton_refine(potential: &dyn Potential, start: &[f64]) -> Vec<f64> {
    let dim = start.len();
    let mut x = start.to_vec();
    for _ in 0..200 {
        let g = potential.gradient(&x);
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-12 {
            break;
        }
        let h = 1e-5;
        let mut hess = vec![vec![0.0; dim]; dim];
        for d in 0..dim {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[d] += h;
            minus[d] -= h;
            let gp = potential.gradient(&plus);
            let gm = potential.gradient(&minus);
            for r in 0..dim {
                hess[r][d] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        // solve H·dx = g by Gaussian elimination with partial pivoting
        let mut a = hess;
        let mut b = g;
        for col in 0..dim {
            let pivot = (col..dim)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let diag = a[col][col];
            if diag.abs() < 1e-14 {
                return x; // singular Hessian; keep the current point
            }
            for row in 0..dim {
                if row != col {
                    let factor = a[row][col] / diag;
                    for k in col..dim {
                        a[row][k] -= factor * a[col][k];
                    }
                    b[row] -= factor * b[col];
                }
            }
        }
        for d in 0..dim {
            x[d] -= b[d] / a[d][d];
        }
    }
    x
}

// ---------------------------------------------------------------------------
// Built-in potentials
// ---------------------------------------------------------------------------

/// Isotropic harmonic well centered at the origin (any dimension).
pub struct Harmonic {
    pub k: f64,
}

impl Potential for Harmonic {
    fn energy(&self, x: &[f64]) -> f64 {
        0.5 * self.k * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.k * v).collect()
    }
}

/// The standard two-dimensional four-Gaussian benchmark surface with two
/// outer minima separated by an intermediate well and two saddle points.
pub struct MuellerBrown;

impl MuellerBrown {
    const A: [f64; 4] = [-200.0, -100.0, -170.0, 15.0];
    const AA: [f64; 4] = [-1.0, -1.0, -6.5, 0.7];
    const BB: [f64; 4] = [0.0, 0.0, 11.0, 0.6];
    const CC: [f64; 4] = [-10.0, -10.0, -6.5, 0.7];
    const X0: [f64; 4] = [1.0, 0.0, -0.5, -1.0];
    const Y0: [f64; 4] = [0.0, 0.5, 1.5, 1.0];

    /// Approximate locations of the two outer minima (suitable starting
    /// points for a local refinement).
    pub fn minima_guesses() -> ([f64; 2], [f64; 2]) {
        ([-0.558, 1.442], [0.623, 0.028])
    }
}

impl Potential for MuellerBrown {
    fn energy(&self, x: &[f64]) -> f64 {
        let (px, py) = (x[0], x[1]);
        (0..4)
            .map(|k| {
                let dx = px - Self::X0[k];
                let dy = py - Self::Y0[k];
                Self::A[k]
                    * (Self::AA[k] * dx * dx + Self::BB[k] * dx * dy + Self::CC[k] * dy * dy)
                        .exp()
            })
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (px, py) = (x[0], x[1]);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for k in 0..4 {
            let dx = px - Self::X0[k];
            let dy = py - Self::Y0[k];
            let e = Self::A[k]
                * (Self::AA[k] * dx * dx + Self::BB[k] * dx * dy + Self::CC[k] * dy * dy).exp();
            gx += e * (2.0 * Self::AA[k] * dx + Self::BB[k] * dy);
            gy += e * (Self::BB[k] * dx + 2.0 * Self::CC[k] * dy);
        }
        vec![gx, gy]
    }
}
