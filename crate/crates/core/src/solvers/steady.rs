//! Steady states of time-independent Liouvillians.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use super::evolve::{evolve_schedule, EvolveOptions, Schedule, StateStorage, StepControl};
use super::SolverError;
use crate::model::{unvectorize, SystemModel};
use crate::quantum::{CMat, DensityMatrix};

/// Eigenvalues in `[-CLIP_TOL, 0)` are set to zero; anything more negative
/// is an error.
pub const CLIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho_ss: DensityMatrix,
    /// `‖L vec(ρ)‖₂` after post-processing.
    pub residual: f64,
    /// `residual / ‖L‖_∞`.
    pub residual_scaled: f64,
    /// Liouvillian dimension and non-zeros of the factorised system.
    pub dim: usize,
    pub nnz: usize,
    /// Most negative eigenvalue before clipping.
    pub min_eig_raw: f64,
}

/// Solves `L vec(ρ) = 0` with `Tr ρ = 1` by replacing the first row of `L` by
/// the trace functional and factorising with sparse LU.
///
/// Every frame used by [`SystemModel`] yields a time-independent generator,
/// so the result is a steady state of that frame.
pub fn steady_state(model: &SystemModel) -> Result<SteadyStateResult, SolverError> {
    let l = model.liouvillian()?;
    let d = model.dim();
    let n = d * d;
    let mut triplets: Vec<Triplet<usize, usize, Complex64>> = l
        .iter()
        .filter(|(i, _, _)| *i != 0)
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    for k in 0..d {
        triplets.push(Triplet::new(0, k + k * d, Complex64::new(1.0, 0.0)));
    }
    let nnz = triplets.len();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| SolverError::Singular(format!("matrix assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| SolverError::Singular(format!("LU factorisation failed: {e:?}")))?;
    let rhs = faer::Mat::<Complex64>::from_fn(n, 1, |i, _| {
        if i == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let x = lu.solve(&rhs);
    let mut v: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    // two rounds of iterative refinement against the bordered system
    for _ in 0..2 {
        let mut r = l.matvec(&v)?;
        r[0] = (0..d).map(|k| v[k + k * d]).sum::<Complex64>() - 1.0;
        let rm = faer::Mat::<Complex64>::from_fn(n, 1, |i, _| r[i]);
        let dx = lu.solve(&rm);
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= dx[(i, 0)];
        }
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SolverError::Singular("solution is not finite".into()));
    }

    let (rho, min_eig_raw) = postprocess(unvectorize(&v, d))?;
    let rho = DensityMatrix::from_matrix_unchecked(model.space.clone(), rho)?;
    let vec_rho = crate::model::vectorize(rho.matrix());
    let r = l.matvec(&vec_rho)?;
    let residual = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = l.norm_inf().max(f64::MIN_POSITIVE);
    let residual_scaled = residual / scale;
    if residual_scaled > 1e-6 {
        return Err(SolverError::Singular(format!(
            "scaled residual {residual_scaled:.3e} indicates a degenerate null space"
        )));
    }
    Ok(SteadyStateResult {
        rho_ss: rho,
        residual,
        residual_scaled,
        dim: n,
        nnz,
        min_eig_raw,
    })
}

/// Hermitises, clips small negative eigenvalues and renormalises.
fn postprocess(raw: CMat) -> Result<(CMat, f64), SolverError> {
    let h = raw.hermitian_part();
    let (vals, vecs) = h.hermitian_eigen()?;
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -CLIP_TOL {
        return Err(SolverError::Negativity { min_eig: min });
    }
    let out = if min < 0.0 {
        let n = h.rows();
        let mut m = CMat::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = vecs.get(i, k) * lam;
                for j in 0..n {
                    let cur = m.get(i, j);
                    m.set(i, j, cur + vi * vecs.get(j, k).conj());
                }
            }
        }
        m
    } else {
        h
    };
    let tr = out.trace().re;
    Ok((out.scale(Complex64::new(1.0 / tr, 0.0)), min))
}

/// Evolves until the trace-norm change over `check_interval` drops to
/// `1e-8`, as an independent check of [`steady_state`].
pub fn steady_state_by_evolution(
    model: &SystemModel,
    rho0: &DensityMatrix,
    horizon: f64,
    check_interval: f64,
) -> Result<DensityMatrix, SolverError> {
    if !(check_interval > 0.0) || !(horizon >= check_interval) {
        return Err(SolverError::InvalidInput("need 0 < check_interval <= horizon".into()));
    }
    let schedule = Schedule::constant(model.liouvillian()?);
    let opts = EvolveOptions {
        control: StepControl::Adaptive {
            atol: 1e-13,
            rtol: 1e-11,
        },
        initial_step: Some(check_interval * 1e-4),
        storage: StateStorage::None,
        leak_guard: None,
        ..EvolveOptions::default()
    };
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut last_change = f64::INFINITY;
    while t < horizon {
        let next = evolve_schedule(&schedule, &rho, &[0.0, check_interval], &[], opts)?.final_state;
        last_change = 2.0 * next.trace_distance(&rho)?;
        rho = next;
        t += check_interval;
        if last_change <= 1e-8 {
            return Ok(rho.hermitize());
        }
    }
    Err(SolverError::NotConverged { horizon, last_change })
}
