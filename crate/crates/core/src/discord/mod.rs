//! Quantum discord by numerical minimization of the measured conditional entropy over
//! rank-1 measurements, plus an exhaustive Bloch-angle grid for qubits and the fixed-basis
//! variant that skips the minimization.
//!
//! For a bipartite state with measured factor `B` and unmeasured factor `A`:
//!
//! ```text
//! J(A:B) = S(A) - min_Π Σ_j p_j S(ρ_{A|j})
//! D(A:B) = I(A:B) - J(A:B)
//! ```

pub mod nelder_mead;

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::entropy::{correlation_report, spectrum_entropy, CorrelationReport};
use crate::error::{Error, Result};
use crate::measure::{measured_conditional_entropy, Povm, ZERO_PROB};
use crate::parallel::{map_indexed, Execution};
use crate::qmat::{hermitian_eigenvalues, kron, unitary_from_generator, ComplexMatrix, C64};
use crate::states::{seeded_rng, DensityMatrix};
use nelder_mead::{NelderMeadOptions, NelderMeadOutcome};

/// Which rank-1 measurements the optimizer searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PovmMode {
    /// Complete orthogonal bases of the measured factor.
    #[default]
    Projective,
    /// Orthogonal bases of the measured factor dilated by an ancilla of equal dimension,
    /// i.e. rank-1 POVMs with up to `d²` outcomes.
    Neumark,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Simplex spread (in bits) at which a start is converged; also the stall threshold.
    pub ftol: f64,
    pub mode: PovmMode,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            max_iters: 2000,
            ftol: 1e-9,
            mode: PovmMode::Projective,
            execution: Execution::Parallel,
        }
    }
}

/// Iterations over which the best objective must improve by more than `ftol`.
pub const STALL_WINDOW: usize = 50;

/// Real coordinates of a Hermitian generator on a `d`-dimensional factor: `d` diagonal
/// entries followed by (real, imaginary) parts of the upper triangle, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementParams(pub Vec<f64>);

impl MeasurementParams {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim * dim])
    }

    pub fn hermitian(&self, dim: usize) -> Result<ComplexMatrix> {
        if self.0.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "{} generator coordinates for dimension {dim} (need {})",
                self.0.len(),
                dim * dim
            )));
        }
        let mut h = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = C64::new(self.0[i], 0.0);
        }
        let mut k = dim;
        for i in 0..dim {
            for j in i + 1..dim {
                let z = C64::new(self.0[k], self.0[k + 1]);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
                k += 2;
            }
        }
        Ok(h)
    }

    /// Columns of `exp(i H)`.
    pub fn unitary(&self, dim: usize) -> Result<ComplexMatrix> {
        unitary_from_generator(&self.hermitian(dim)?)
    }
}

/// Rank-1 orthogonal projectors onto the columns of `exp(i H(params))`.
pub fn basis_from_params(params: &MeasurementParams, dim: usize, subsystem: &str) -> Result<Povm> {
    Povm::from_basis(subsystem, &params.unitary(dim)?)
}

#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub starts: usize,
    /// Best objective seen after each start, in start order.
    pub best_objective_history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged_starts: usize,
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    pub discord: f64,
    /// `J(A:B)`
    pub classical_corr: f64,
    pub report: CorrelationReport,
    pub tilde_s_min: f64,
    /// Measurement on the measured factor attaining `tilde_s_min`. In Neumark mode this is
    /// the compressed rank-1 POVM with `d²` elements.
    pub optimal_basis: Povm,
    pub optimal_params: MeasurementParams,
    /// Whether the winning start met a convergence criterion before the iteration cap.
    pub converged: bool,
    pub optimizer_trace: OptimizerTrace,
}

/// Measured conditional entropy as a function of the measurement unitary, with the
/// measured factor ordered last.
struct Objective {
    rest_dim: usize,
    meas_dim: usize,
    rho: ComplexMatrix,
}

impl Objective {
    fn conditional_entropy(&self, u: &ComplexMatrix) -> f64 {
        let (ra, m) = (self.rest_dim, self.meas_dim);
        let mut total = 0.0;
        let mut sigma = ComplexMatrix::zeros(ra, ra);
        for j in 0..m {
            let e: Vec<C64> = u.column(j);
            for a in 0..ra {
                for a2 in 0..ra {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..m {
                        let eb = e[b].conj();
                        if eb == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let row = self.rho.row(a * m + b);
                        let inner: C64 = (0..m).map(|b2| row[a2 * m + b2] * e[b2]).sum();
                        acc += eb * inner;
                    }
                    sigma[(a, a2)] = acc;
                }
            }
            let p = sigma.trace().re;
            if p < ZERO_PROB {
                continue;
            }
            let eigs = match hermitian_eigenvalues(&sigma.scale_real(1.0 / p)) {
                Ok(e) => e,
                Err(_) => return f64::INFINITY,
            };
            total += p * spectrum_entropy(&eigs).unwrap_or(f64::INFINITY);
        }
        total
    }

    fn at_params(&self, x: &[f64]) -> f64 {
        match MeasurementParams(x.to_vec()).unitary(self.meas_dim) {
            Ok(u) => self.conditional_entropy(&u),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Splits a bipartite layout into (unmeasured, measured) labels.
fn bipartite_labels<'a>(rho: &'a DensityMatrix, measured: &str) -> Result<(&'a str, &'a str)> {
    let labels = rho.layout().labels();
    if labels.len() != 2 {
        return Err(Error::NotBipartite(format!(
            "discord needs exactly two subsystems, got {}",
            rho.layout()
        )));
    }
    let pos = rho.layout().position(measured)?;
    Ok((labels[1 - pos], labels[pos]))
}

fn start_point(seed: u64, index: usize, n: usize) -> Vec<f64> {
    if index == 0 {
        return vec![0.0; n];
    }
    let mut rng: ChaCha8Rng = seeded_rng(seed);
    rng.set_stream(index as u64);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * PI / 2.0
        })
        .collect()
}

fn run_start(obj: &Objective, x0: Vec<f64>, cfg: &OptimizerConfig) -> NelderMeadOutcome {
    let opts = NelderMeadOptions {
        max_iters: cfg.max_iters,
        ftol: cfg.ftol,
        stall_window: STALL_WINDOW,
        stall_tol: cfg.ftol,
        initial_step: 0.5,
    };
    let first = nelder_mead::minimize(|x| obj.at_params(x), &x0, &opts);
    // restart from the best vertex with a fresh simplex to escape premature collapse
    let second = nelder_mead::minimize(|x| obj.at_params(x), &first.x, &NelderMeadOptions {
        initial_step: 0.1,
        ..opts
    });
    let mut out = if second.fx <= first.fx { second.clone() } else { first.clone() };
    out.iterations = first.iterations + second.iterations;
    out.evaluations = first.evaluations + second.evaluations;
    out.converged = second.converged;
    out
}

/// Discord `D(A:B)` with the measurement on `measured`.
pub fn discord(rho: &DensityMatrix, measured: &str, cfg: &OptimizerConfig) -> Result<DiscordResult> {
    let (other, measured) = bipartite_labels(rho, measured)?;
    if cfg.starts == 0 {
        return Err(Error::InvalidParameter("at least one optimizer start required".into()));
    }
    let report = correlation_report(rho, &[other], &[measured])?;
    let ordered = rho.permuted(&[other, measured])?;
    let rest_dim = ordered.layout().dims()[0];
    let d = ordered.layout().dims()[1];

    let (obj_rho, meas_dim) = match cfg.mode {
        PovmMode::Projective => (ordered.matrix().clone(), d),
        PovmMode::Neumark => {
            let mut anc = vec![0.0; d];
            anc[0] = 1.0;
            (kron(ordered.matrix(), &ComplexMatrix::from_real_diagonal(&anc)), d * d)
        }
    };
    let obj = Objective {
        rest_dim,
        meas_dim,
        rho: obj_rho,
    };
    let n = meas_dim * meas_dim;

    let runs = map_indexed(cfg.starts, cfg.execution, |k| {
        run_start(&obj, start_point(cfg.seed, k, n), cfg)
    });

    let mut best = 0usize;
    let mut history = Vec::with_capacity(runs.len());
    for (k, r) in runs.iter().enumerate() {
        if r.fx < runs[best].fx {
            best = k;
        }
        history.push(runs[best].fx);
    }
    let winner = &runs[best];
    let params = MeasurementParams(winner.x.clone());
    let u = params.unitary(meas_dim)?;
    let optimal_basis = match cfg.mode {
        PovmMode::Projective => Povm::from_basis(measured, &u)?,
        PovmMode::Neumark => {
            // ⟨0_E| Π_j |0_E⟩ for each dilated projector
            let elements = (0..meas_dim)
                .map(|j| {
                    let col = u.column(j);
                    let w: Vec<C64> = (0..d).map(|b| col[b * d]).collect();
                    ComplexMatrix::outer(&w, &w)
                })
                .collect();
            Povm::new(measured, elements)?
        }
    };

    let tilde_s_min = winner.fx;
    let classical_corr = report.s_a - tilde_s_min;
    Ok(DiscordResult {
        discord: report.mutual_info - classical_corr,
        classical_corr,
        report,
        tilde_s_min,
        optimal_basis,
        optimal_params: params,
        converged: winner.converged,
        optimizer_trace: OptimizerTrace {
            starts: cfg.starts,
            best_objective_history: history,
            iterations: runs.iter().map(|r| r.iterations).sum(),
            evaluations: runs.iter().map(|r| r.evaluations).sum(),
            converged_starts: runs.iter().filter(|r| r.converged).count(),
        },
    })
}

/// `I(A:B) - [S(A) - S̃_basis(A|B)]` for one complete orthogonal basis on the measured factor.
pub fn fixed_basis_discord(rho: &DensityMatrix, basis: &Povm) -> Result<f64> {
    let (other, measured) = bipartite_labels(rho, basis.subsystem())?;
    basis.orthonormal_basis()?;
    let report = correlation_report(rho, &[other], &[measured])?;
    let tilde = measured_conditional_entropy(rho, basis)?;
    Ok(report.mutual_info - (report.s_a - tilde))
}

/// Qubit basis `{|n⟩, |-n⟩}` for the Bloch direction `(θ, φ)`.
pub fn bloch_basis(theta: f64, phi: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ph = C64::from_polar(1.0, phi);
    ComplexMatrix::from_rows(&[
        vec![C64::new(c, 0.0), -ph.conj() * s],
        vec![ph * s, C64::new(c, 0.0)],
    ])
    .expect("2x2")
}

/// Minimum of the fixed-basis discord over a Bloch-angle grid on a measured qubit.
///
/// `θ_i = i·(π/2)/n_theta` for `i = 0..=n_theta` and `φ_j = 2πj/n_phi` for `j < n_phi`; the
/// upper hemisphere covers every projective qubit measurement up to relabelling outcomes.
/// Grids whose resolutions divide each other are nested, so refinement never raises the
/// minimum.
pub fn discord_grid_oracle(
    rho: &DensityMatrix,
    measured: &str,
    resolution: (usize, usize),
) -> Result<f64> {
    let (other, measured) = bipartite_labels(rho, measured)?;
    if rho.layout().dim_of(measured)? != 2 {
        return Err(Error::InvalidParameter(format!(
            "grid oracle needs a qubit measured factor, `{measured}` has dimension {}",
            rho.layout().dim_of(measured)?
        )));
    }
    let (n_theta, n_phi) = resolution;
    if n_theta == 0 || n_phi == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    let report = correlation_report(rho, &[other], &[measured])?;
    let rows = map_indexed(n_theta + 1, Execution::Parallel, |i| -> Result<f64> {
        let theta = i as f64 * (PI / 2.0) / n_theta as f64;
        let mut best = f64::INFINITY;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let basis = Povm::from_basis(measured, &bloch_basis(theta, phi))?;
            best = best.min(measured_conditional_entropy(rho, &basis)?);
        }
        Ok(best)
    });
    let mut tilde_min = f64::INFINITY;
    for r in rows {
        tilde_min = tilde_min.min(r?);
    }
    Ok(report.mutual_info - (report.s_a - tilde_min))
}
