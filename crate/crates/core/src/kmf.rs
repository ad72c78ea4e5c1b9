//! Boundary data completion by alternating well-posed mixed solves.
//!
//! Both drivers reconstruct the missing Dirichlet trace and Neumann flux on
//! the inaccessible boundary `Gamma1` from overdetermined data on `Gamma0`.
//!
//! * [`kmf_standard`] alternates two mixed problems on the whole of
//!   `Gamma1`: a solve with the current flux as Neumann data yields the next
//!   trace, a solve with that trace as Dirichlet data yields the next flux.
//! * [`kmf_alternating`] splits `Gamma1` into the equal-measure halves
//!   `Gamma11` and `Gamma12` and completes each half in turn, four mixed
//!   solves per iteration; freshly computed data on one half enters the
//!   remaining solves of the same iteration immediately.
//!
//! The stopping functional `E_n = ||u_n - u_{n+1}||_{L2(Gamma1)}` compares
//! consecutive traces, so each recorded iteration needs a look-ahead trace
//! solve; the look-ahead is excluded from the reported iteration and solve
//! counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::fem::{
    assemble_stiffness, l2_boundary_norm, normal_derivative, solve_mixed_bvp_with, trace,
    BoundaryCondition, BoundaryField, FemError, FemSolution, MixedBvp,
};
use crate::mesh::{Region, TriMesh};
use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum KmfError {
    #[error("Cauchy data must live on Gamma0, got {0:?}")]
    DataNotOnGamma0(Region),
    #[error("the initial guess must live on Gamma1, got {0:?}")]
    GuessNotOnGamma1(Region),
    #[error("stopping tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("max_iters must be at least 1")]
    ZeroMaxIters,
    #[error("relaxation parameter must lie in (0, 2], got {0}")]
    OmegaOutOfRange(f64),
    #[error("sub-segment {0:?} has no boundary edges; cannot alternate")]
    EmptySubSegment(Region),
    #[error("exact reference fields must live on Gamma1")]
    ExactFieldsNotOnGamma1,
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// The overdetermined data pair on the accessible segment: a Dirichlet
/// trace and a Neumann flux, both on `Gamma0` of the same mesh.
#[derive(Debug, Clone)]
pub struct CauchyData<T> {
    pub dirichlet: BoundaryField<T>,
    pub neumann: BoundaryField<T>,
}

impl<T: Real> CauchyData<T> {
    pub fn new(
        dirichlet: BoundaryField<T>,
        neumann: BoundaryField<T>,
    ) -> Result<Self, KmfError> {
        for f in [&dirichlet, &neumann] {
            if f.region() != Region::Gamma0 {
                return Err(KmfError::DataNotOnGamma0(f.region()));
            }
        }
        Ok(CauchyData { dirichlet, neumann })
    }
}

/// Reference trace and flux on `Gamma1` for manufactured problems; when
/// present, per-iteration errors against them are recorded.
#[derive(Debug, Clone)]
pub struct ExactGamma1<T> {
    pub trace: BoundaryField<T>,
    pub flux: BoundaryField<T>,
}

/// Driver options. Defaults: tolerance `1e-5`, at most 1000 iterations, no
/// relaxation, no reference fields.
#[derive(Debug, Clone)]
pub struct KmfOptions<T> {
    /// Threshold on the successive-trace norm `E`.
    pub tol: T,
    pub max_iters: usize,
    /// Relaxation factor applied to the flux update; `1` disables it.
    pub omega: T,
    pub exact: Option<ExactGamma1<T>>,
}

impl<T: Real> Default for KmfOptions<T> {
    fn default() -> Self {
        KmfOptions {
            tol: real(1e-5),
            max_iters: 1000,
            omega: T::one(),
            exact: None,
        }
    }
}

impl<T: Real> KmfOptions<T> {
    fn validate(&self) -> Result<(), KmfError> {
        if !(self.tol > T::zero()) {
            return Err(KmfError::NonPositiveTolerance(
                self.tol.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if self.max_iters == 0 {
            return Err(KmfError::ZeroMaxIters);
        }
        if !(self.omega > T::zero() && self.omega <= real(2.0)) {
            return Err(KmfError::OmegaOutOfRange(
                self.omega.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if let Some(exact) = &self.exact {
            if exact.trace.region() != Region::Gamma1 || exact.flux.region() != Region::Gamma1 {
                return Err(KmfError::ExactFieldsNotOnGamma1);
            }
        }
        Ok(())
    }
}

/// Seed value for one driver: either a Dirichlet trace guess (the usual
/// entry point, requiring one initialization solve) or a Neumann flux guess
/// that enters the main loop directly.
#[derive(Debug, Clone)]
pub enum InitialGuess<T> {
    Trace(BoundaryField<T>),
    Flux(BoundaryField<T>),
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    /// 1-based iteration index.
    pub n: usize,
    /// Successive-trace norm `||u_n - u_{n+1}||_{L2(Gamma1)}`.
    pub stopping: T,
    /// `||u_n - u_exact||_{L2(Gamma1)}` when reference fields are present.
    pub trace_error: Option<T>,
    /// `||v_n - v_exact||_{L2(Gamma1)}` when reference fields are present.
    pub flux_error: Option<T>,
    /// Mixed solves performed through this iteration.
    pub solves_so_far: usize,
}

/// Output of one completion run.
#[derive(Debug, Clone)]
pub struct CompletionResult<'m, T> {
    /// Recovered Dirichlet trace on `Gamma1`.
    pub trace_gamma1: BoundaryField<T>,
    /// Recovered Neumann flux on `Gamma1`.
    pub flux_gamma1: BoundaryField<T>,
    pub history: Vec<IterationRecord<T>>,
    pub converged: bool,
    /// Full-domain solution of the final flux solve (Dirichlet trace on
    /// `Gamma1`, Neumann data on `Gamma0`).
    pub final_solution: FemSolution<'m, T>,
}

struct Iterate<'m, T> {
    n: usize,
    trace: BoundaryField<T>,
    flux: BoundaryField<T>,
    solution: FemSolution<'m, T>,
    trace_error: Option<T>,
    flux_error: Option<T>,
    solves_so_far: usize,
}

impl<'m, T: Real> Iterate<'m, T> {
    fn into_result(
        self,
        history: Vec<IterationRecord<T>>,
        converged: bool,
    ) -> CompletionResult<'m, T> {
        CompletionResult {
            trace_gamma1: self.trace,
            flux_gamma1: self.flux,
            history,
            converged,
            final_solution: self.solution,
        }
    }
}

fn errors_against<T: Real>(
    mesh: &TriMesh<T>,
    exact: &Option<ExactGamma1<T>>,
    trace: &BoundaryField<T>,
    flux: &BoundaryField<T>,
) -> Result<(Option<T>, Option<T>), KmfError> {
    match exact {
        None => Ok((None, None)),
        Some(e) => Ok((
            Some(l2_boundary_norm(&trace.sub(&e.trace)?, mesh)),
            Some(l2_boundary_norm(&flux.sub(&e.flux)?, mesh)),
        )),
    }
}

/// Classical completion iteration on the whole inaccessible segment,
/// started from a Dirichlet trace guess.
pub fn kmf_standard<'m, T: Real>(
    mesh: &'m TriMesh<T>,
    data: &CauchyData<T>,
    initial_trace: &BoundaryField<T>,
    opts: &KmfOptions<T>,
) -> Result<CompletionResult<'m, T>, KmfError> {
    kmf_standard_with_guess(mesh, data, InitialGuess::Trace(initial_trace.clone()), opts)
}

/// Classical completion iteration with either guess kind. A trace guess
/// triggers one initialization solve (flux extraction); a flux guess enters
/// the loop directly, so its solve counts grow as `2n` instead of `1 + 2n`.
pub fn kmf_standard_with_guess<'m, T: Real>(
    mesh: &'m TriMesh<T>,
    data: &CauchyData<T>,
    guess: InitialGuess<T>,
    opts: &KmfOptions<T>,
) -> Result<CompletionResult<'m, T>, KmfError> {
    opts.validate()?;
    let stiffness = assemble_stiffness(mesh)?;
    let mut solves = 0usize;

    let mut flux_prev = match guess {
        InitialGuess::Trace(u0) => {
            if u0.region() != Region::Gamma1 {
                return Err(KmfError::GuessNotOnGamma1(u0.region()));
            }
            let bvp = MixedBvp::new(vec![
                BoundaryCondition::Dirichlet(u0),
                BoundaryCondition::Neumann(data.neumann.clone()),
            ])?;
            let solved = solve_mixed_bvp_with(mesh, &bvp, &stiffness)?;
            solves += 1;
            normal_derivative(
                &solved.solution,
                Region::Gamma1,
                &stiffness,
                &solved.neumann_load,
            )?
        }
        InitialGuess::Flux(v0) => {
            if v0.region() != Region::Gamma1 {
                return Err(KmfError::GuessNotOnGamma1(v0.region()));
            }
            v0
        }
    };

    let mut history: Vec<IterationRecord<T>> = Vec::new();
    let mut prev: Option<Iterate<'m, T>> = None;
    let mut converged = false;

    let last = loop {
        // trace solve: known Dirichlet data on Gamma0, current flux on Gamma1
        let bvp_trace = MixedBvp::new(vec![
            BoundaryCondition::Dirichlet(data.dirichlet.clone()),
            BoundaryCondition::Neumann(flux_prev.clone()),
        ])?;
        let solved_trace = solve_mixed_bvp_with(mesh, &bvp_trace, &stiffness)?;
        solves += 1;
        let trace_next = trace(&solved_trace.solution, Region::Gamma1)?;

        if let Some(p) = &prev {
            let stopping = l2_boundary_norm(&trace_next.sub(&p.trace)?, mesh);
            history.push(IterationRecord {
                n: p.n,
                stopping,
                trace_error: p.trace_error,
                flux_error: p.flux_error,
                solves_so_far: p.solves_so_far,
            });
            if stopping <= opts.tol {
                converged = true;
                break prev.take().unwrap();
            }
            if p.n >= opts.max_iters {
                break prev.take().unwrap();
            }
        }

        // flux solve: the fresh trace as Dirichlet data, flux data on Gamma0
        let bvp_flux = MixedBvp::new(vec![
            BoundaryCondition::Dirichlet(trace_next.clone()),
            BoundaryCondition::Neumann(data.neumann.clone()),
        ])?;
        let solved_flux = solve_mixed_bvp_with(mesh, &bvp_flux, &stiffness)?;
        solves += 1;
        let mut flux_next = normal_derivative(
            &solved_flux.solution,
            Region::Gamma1,
            &stiffness,
            &solved_flux.neumann_load,
        )?;
        if opts.omega != T::one() {
            flux_next = relax(&flux_next, &flux_prev, opts.omega)?;
        }

        let n = prev.as_ref().map_or(0, |p| p.n) + 1;
        let (trace_error, flux_error) =
            errors_against(mesh, &opts.exact, &trace_next, &flux_next)?;
        prev = Some(Iterate {
            n,
            trace: trace_next,
            flux: flux_next.clone(),
            solution: solved_flux.solution,
            trace_error,
            flux_error,
            solves_so_far: solves,
        });
        flux_prev = flux_next;
    };

    Ok(last.into_result(history, converged))
}

/// Split-boundary completion: each iteration updates the trace on
/// `Gamma11`, then on `Gamma12`, then the flux on `Gamma11`, then on
/// `Gamma12`, feeding every fresh field into the remaining solves.
pub fn kmf_alternating<'m, T: Real>(
    mesh: &'m TriMesh<T>,
    data: &CauchyData<T>,
    initial_trace: &BoundaryField<T>,
    opts: &KmfOptions<T>,
) -> Result<CompletionResult<'m, T>, KmfError> {
    opts.validate()?;
    if initial_trace.region() != Region::Gamma1 {
        return Err(KmfError::GuessNotOnGamma1(initial_trace.region()));
    }
    for region in [Region::Gamma11, Region::Gamma12] {
        if mesh.region_edges(region).is_empty() {
            return Err(KmfError::EmptySubSegment(region));
        }
    }
    let stiffness = assemble_stiffness(mesh)?;
    let mut solves = 0usize;

    // initialization: whole-Gamma1 Dirichlet guess, flux split into halves
    let bvp0 = MixedBvp::new(vec![
        BoundaryCondition::Dirichlet(initial_trace.clone()),
        BoundaryCondition::Neumann(data.neumann.clone()),
    ])?;
    let solved0 = solve_mixed_bvp_with(mesh, &bvp0, &stiffness)?;
    solves += 1;
    let flux0 = normal_derivative(
        &solved0.solution,
        Region::Gamma1,
        &stiffness,
        &solved0.neumann_load,
    )?;
    let mut flux1_prev = flux0.restrict(mesh, Region::Gamma11)?;
    let mut flux2_prev = flux0.restrict(mesh, Region::Gamma12)?;

    let mut history: Vec<IterationRecord<T>> = Vec::new();
    let mut prev: Option<Iterate<'m, T>> = None;
    let mut converged = false;

    let last = loop {
        // trace on Gamma11: both half fluxes as Neumann data
        let bvp_a = MixedBvp::new(vec![
            BoundaryCondition::Dirichlet(data.dirichlet.clone()),
            BoundaryCondition::Neumann(flux1_prev.clone()),
            BoundaryCondition::Neumann(flux2_prev.clone()),
        ])?;
        let solved_a = solve_mixed_bvp_with(mesh, &bvp_a, &stiffness)?;
        solves += 1;
        let trace1 = trace(&solved_a.solution, Region::Gamma11)?;

        // trace on Gamma12: the fresh Gamma11 trace switches to Dirichlet
        let bvp_b = MixedBvp::new(vec![
            BoundaryCondition::Dirichlet(data.dirichlet.clone()),
            BoundaryCondition::Dirichlet(trace1.clone()),
            BoundaryCondition::Neumann(flux2_prev.clone()),
        ])?;
        let solved_b = solve_mixed_bvp_with(mesh, &bvp_b, &stiffness)?;
        solves += 1;
        let trace2 = trace(&solved_b.solution, Region::Gamma12)?;
        let trace_union = concat_halves(mesh, &trace1, &trace2)?;

        if let Some(p) = &prev {
            let stopping = l2_boundary_norm(&trace_union.sub(&p.trace)?, mesh);
            history.push(IterationRecord {
                n: p.n,
                stopping,
                trace_error: p.trace_error,
                flux_error: p.flux_error,
                solves_so_far: p.solves_so_far,
            });
            if stopping <= opts.tol {
                converged = true;
                break prev.take().unwrap();
            }
            if p.n >= opts.max_iters {
                break prev.take().unwrap();
            }
        }

        // flux on Gamma11: both half traces as Dirichlet data
        let bvp_c = MixedBvp::new(vec![
            BoundaryCondition::Dirichlet(trace_union.clone()),
            BoundaryCondition::Neumann(data.neumann.clone()),
        ])?;
        let solved_c = solve_mixed_bvp_with(mesh, &bvp_c, &stiffness)?;
        solves += 1;
        let flux_union = normal_derivative(
            &solved_c.solution,
            Region::Gamma1,
            &stiffness,
            &solved_c.neumann_load,
        )?;
        let mut flux1_next = flux_union.restrict(mesh, Region::Gamma11)?;
        if opts.omega != T::one() {
            flux1_next = relax(&flux1_next, &flux1_prev, opts.omega)?;
        }

        // flux on Gamma12: the fresh Gamma11 flux switches to Neumann
        let bvp_d = MixedBvp::new(vec![
            BoundaryCondition::Neumann(flux1_next.clone()),
            BoundaryCondition::Dirichlet(trace2.clone()),
            BoundaryCondition::Neumann(data.neumann.clone()),
        ])?;
        let solved_d = solve_mixed_bvp_with(mesh, &bvp_d, &stiffness)?;
        solves += 1;
        let mut flux2_next = normal_derivative(
            &solved_d.solution,
            Region::Gamma12,
            &stiffness,
            &solved_d.neumann_load,
        )?;
        if opts.omega != T::one() {
            flux2_next = relax(&flux2_next, &flux2_prev, opts.omega)?;
        }
        let flux_joined = concat_halves(mesh, &flux1_next, &flux2_next)?;

        let n = prev.as_ref().map_or(0, |p| p.n) + 1;
        let (trace_error, flux_error) =
            errors_against(mesh, &opts.exact, &trace_union, &flux_joined)?;
        prev = Some(Iterate {
            n,
            trace: trace_union,
            flux: flux_joined,
            solution: solved_c.solution,
            trace_error,
            flux_error,
            solves_so_far: solves,
        });
        flux1_prev = flux1_next;
        flux2_prev = flux2_next;
    };

    Ok(last.into_result(history, converged))
}

/// Joins fields on `Gamma11` and `Gamma12` into one field on the union; the
/// `Gamma11` side wins at the shared junction node.
fn concat_halves<T: Real>(
    mesh: &TriMesh<T>,
    first: &BoundaryField<T>,
    second: &BoundaryField<T>,
) -> Result<BoundaryField<T>, KmfError> {
    if first.region() != Region::Gamma11 || second.region() != Region::Gamma12 {
        return Err(KmfError::Fem(FemError::IncompatibleFields));
    }
    if first.node_ids().last() != second.node_ids().first() {
        return Err(KmfError::Fem(FemError::IncompatibleFields));
    }
    let values: Vec<T> = first
        .values()
        .iter()
        .chain(second.values()[1..].iter())
        .copied()
        .collect();
    Ok(BoundaryField::from_values(mesh, Region::Gamma1, values)?)
}

/// Affine blend `omega * new + (1 - omega) * old`, componentwise.
pub fn relax<T: Real>(
    new_field: &BoundaryField<T>,
    old_field: &BoundaryField<T>,
    omega: T,
) -> Result<BoundaryField<T>, KmfError> {
    if !(omega > T::zero() && omega <= real(2.0)) {
        return Err(KmfError::OmegaOutOfRange(omega.to_f64().unwrap_or(f64::NAN)));
    }
    if !new_field.is_compatible(old_field) {
        return Err(KmfError::Fem(FemError::IncompatibleFields));
    }
    let mut blended = new_field.clone();
    for (v, &old) in blended.values_mut().iter_mut().zip(old_field.values()) {
        *v = omega * *v + (T::one() - omega) * old;
    }
    Ok(blended)
}

/// Adds seeded Gaussian noise scaled by `noise_level * max|values|`. The
/// same seed always reproduces the same perturbation.
pub fn perturb<T: Real>(field: &BoundaryField<T>, noise_level: T, seed: u64) -> BoundaryField<T> {
    assert!(
        noise_level >= T::zero(),
        "noise_level must be non-negative"
    );
    if noise_level == T::zero() {
        return field.clone();
    }
    let amplitude = noise_level
        * field
            .values()
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = field.clone();
    for v in noisy.values_mut() {
        let xi: f64 = StandardNormal.sample(&mut rng);
        *v += amplitude * real::<T>(xi);
    }
    noisy
}
