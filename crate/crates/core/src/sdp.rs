//! Interior-point solver for the cloning SDP
//!
//! ```text
//!   maximize  ⟨Q, X⟩              minimize  Tr(Y)
//!   s.t.      Tr_out(X) = 𝟙_in    s.t.      𝟙_out ⊗ Y ⪰ Q
//!             X ⪰ 0                         Y Hermitian
//! ```
//!
//! over the complex Hermitian cone. The method is an infeasible-start
//! primal-dual path-following scheme with Nesterov–Todd scaling and a
//! Mehrotra predictor-corrector. The equality constraint is written in an
//! orthonormal basis of `Herm(C^in)` (diagonal units plus the symmetric and
//! antisymmetric off-diagonal pairs, each tensored with `𝟙_out`), so the
//! Schur complement system is a real `in² × in²` positive definite matrix and
//! the dual variable is exactly the `Y ∈ Herm(C^in)` of the dual problem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    c64, eig_unchecked, frobenius, hermitian_part, kron, max_abs, trace_out_leading, ComplexMatrix,
    FactoredDims, HermitianOperator,
};

/// Tolerance on the minimum eigenvalue of `Q` when validating the objective.
pub const Q_PSD_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// The cloning SDP for an objective `Q` on `out_1 ⊗ … ⊗ out_m ⊗ in`.
#[derive(Debug, Clone, PartialEq)]
pub struct CloningSdp {
    q: HermitianOperator,
    dims: FactoredDims,
    q_norm: f64,
}

impl CloningSdp {
    /// `dims` lists the output factors followed by the input factor, which is
    /// the one kept by the partial-trace constraint.
    pub fn new(q: HermitianOperator, dims: FactoredDims) -> Result<Self> {
        dims.check(q.dim())?;
        if dims.len() < 2 {
            return Err(Error::Dimension(
                "cloning SDP needs at least one output factor and an input factor".into(),
            ));
        }
        let values = q.eigenvalues()?;
        let min_eigenvalue = values[0];
        if min_eigenvalue < -Q_PSD_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let q_norm = values[values.len() - 1].max(0.0);
        Ok(Self { q, dims, q_norm })
    }

    pub fn q(&self) -> &HermitianOperator {
        &self.q
    }

    pub fn dims(&self) -> &FactoredDims {
        &self.dims
    }

    pub fn in_dim(&self) -> usize {
        *self.dims.as_slice().last().expect("at least two factors")
    }

    pub fn out_dim(&self) -> usize {
        self.q.dim() / self.in_dim()
    }

    /// `‖Q‖`, the largest eigenvalue of the PSD objective.
    pub fn q_norm(&self) -> f64 {
        self.q_norm
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.q.scale(factor), self.dims.clone())
    }

    /// `𝟙_out ⊗ Y`.
    pub fn lift(&self, y: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::identity(self.out_dim()).kron(y)
    }

    /// `Tr_out(X)`.
    pub fn reduce(&self, x: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&trace_out_leading(
            x.matrix(),
            self.out_dim(),
            self.in_dim(),
        ))
    }
}

/// Tunable solver parameters.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    pub predictor_corrector: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            step_fraction: 0.98,
            predictor_corrector: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `‖Tr_out(X) − 𝟙‖_F`.
    pub primal_infeasibility: f64,
    /// `‖𝟙 ⊗ Y − Q − S‖_F / ‖Q‖`.
    pub dual_infeasibility: f64,
    /// `|Tr Y − ⟨Q,X⟩| / max(|Tr Y|, |⟨Q,X⟩|)`.
    pub relative_gap: f64,
}

/// Objective values and residuals of one interior-point iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateStats {
    pub iteration: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    pub mu: f64,
    pub residuals: Residuals,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_x: HermitianOperator,
    pub dual_y: HermitianOperator,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value − primal_value`.
    pub gap: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub history: Vec<IterateStats>,
}

/// Solves with default options and the given tolerance.
pub fn solve(p: &CloningSdp, tol: f64) -> Result<SdpSolution> {
    solve_with(p, &SolverOptions::with_tol(tol))
}

/// `Y = ‖Q‖ 𝟙_in`, always dual feasible, with value `in·‖Q‖`.
pub fn dual_norm_bound(p: &CloningSdp) -> (HermitianOperator, f64) {
    let y = HermitianOperator::identity(p.in_dim()).scale(p.q_norm());
    let value = p.in_dim() as f64 * p.q_norm();
    (y, value)
}

/// Orthonormal basis of `Herm(C^n)` under `⟨A, B⟩ = Tr(AB)`.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = 0.5f64.sqrt();
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(i, i)] = c64(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym[(i, j)] = c64(s, 0.0);
            sym[(j, i)] = c64(s, 0.0);
            basis.push(sym);
            let mut anti = ComplexMatrix::zeros(n, n);
            anti[(i, j)] = c64(0.0, s);
            anti[(j, i)] = c64(0.0, -s);
            basis.push(anti);
        }
    }
    basis
}

/// Per-iteration Nesterov–Todd scaling: `W = G G*`, `G* S G = G⁻¹ X G⁻* = diag(v)`.
struct Scaling {
    g: ComplexMatrix,
    g_inv: ComplexMatrix,
    w: ComplexMatrix,
    v: Vec<f64>,
}

impl Scaling {
    fn new(x: &ComplexMatrix, s: &ComplexMatrix) -> Result<Self> {
        let es = eig_unchecked(s)?;
        if es.values[0] <= 0.0 {
            return Err(Error::NotPositive {
                min_eigenvalue: es.values[0],
            });
        }
        let sqrt_s = es.map_values(f64::sqrt);
        let inv_sqrt_s = es.map_values(|x| 1.0 / x.sqrt());
        let k = hermitian_part(&(&sqrt_s * x * &sqrt_s));
        let ek = eig_unchecked(&k)?;
        if ek.values[0] <= 0.0 {
            return Err(Error::NotPositive {
                min_eigenvalue: ek.values[0],
            });
        }
        let n = x.nrows();
        let mut quarter = ek.vectors.clone();
        let mut inv_quarter = ek.vectors.adjoint();
        for j in 0..n {
            let l = ek.values[j];
            let mut col = quarter.column_mut(j);
            col *= c64(l.powf(0.25), 0.0);
            let mut row = inv_quarter.row_mut(j);
            row *= c64(l.powf(-0.25), 0.0);
        }
        let g = &inv_sqrt_s * quarter;
        let g_inv = inv_quarter * &sqrt_s;
        let w = hermitian_part(&(&g * g.adjoint()));
        let v = ek.values.iter().map(|l| l.sqrt()).collect();
        Ok(Self { g, g_inv, w, v })
    }

    fn scale_primal(&self, dx: &ComplexMatrix) -> ComplexMatrix {
        hermitian_part(&(&self.g_inv * dx * self.g_inv.adjoint()))
    }

    fn scale_dual(&self, ds: &ComplexMatrix) -> ComplexMatrix {
        hermitian_part(&(self.g.adjoint() * ds * &self.g))
    }

    /// Solves `V Z + Z V = R` for diagonal `V`.
    fn lyapunov(&self, r: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
            r[(i, j)] / (self.v[i] + self.v[j])
        })
    }

    /// Largest `α` with `diag(v) + α Δ ⪰ 0` (∞ when unbounded).
    fn max_step(&self, delta_scaled: &ComplexMatrix) -> Result<f64> {
        let inv_sqrt: Vec<f64> = self.v.iter().map(|x| 1.0 / x.sqrt()).collect();
        let h = ComplexMatrix::from_fn(delta_scaled.nrows(), delta_scaled.ncols(), |i, j| {
            delta_scaled[(i, j)] * (inv_sqrt[i] * inv_sqrt[j])
        });
        let lmin = eig_unchecked(&hermitian_part(&h))?.values[0];
        Ok(if lmin >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / lmin
        })
    }
}

struct Workspace<'a> {
    p: &'a CloningSdp,
    basis: Vec<ComplexMatrix>,
    /// Columns are the row-major vectorizations of the basis matrices.
    basis_mat: ComplexMatrix,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a CloningSdp) -> Self {
        let nin = p.in_dim();
        let basis = hermitian_basis(nin);
        let basis_mat =
            ComplexMatrix::from_fn(nin * nin, basis.len(), |r, c| basis[c][(r / nin, r % nin)]);
        Self {
            p,
            basis,
            basis_mat,
        }
    }

    fn lift(&self, y: &ComplexMatrix) -> ComplexMatrix {
        kron(
            &ComplexMatrix::identity(self.p.out_dim(), self.p.out_dim()),
            y,
        )
    }

    fn reduce(&self, x: &ComplexMatrix) -> ComplexMatrix {
        trace_out_leading(x, self.p.out_dim(), self.p.in_dim())
    }

    /// Real Schur complement `M_ab = ⟨𝟙⊗B_a, W (𝟙⊗B_b) W⟩`.
    fn schur(&self, w: &ComplexMatrix) -> DMatrix<f64> {
        let (nout, nin) = (self.p.out_dim(), self.p.in_dim());
        let m = nin * nin;
        // K[(i,i'),(k,l)] = Σ_{o,o'} W[(o,i),(o',k)] W[(o',l),(o,i')]
        let mut k = ComplexMatrix::zeros(m, m);
        for o in 0..nout {
            for o2 in 0..nout {
                let w1 = w.view((o * nin, o2 * nin), (nin, nin));
                let w2 = w.view((o2 * nin, o * nin), (nin, nin));
                for i in 0..nin {
                    for ip in 0..nin {
                        let row = i * nin + ip;
                        for kk in 0..nin {
                            let a = w1[(i, kk)];
                            for l in 0..nin {
                                k[(row, kk * nin + l)] += a * w2[(l, ip)];
                            }
                        }
                    }
                }
            }
        }
        let reduced = self.basis_mat.adjoint() * k * &self.basis_mat;
        let mut out = reduced.map(|z| z.re);
        let sym = (&out + out.transpose()) * 0.5;
        out.copy_from(&sym);
        out
    }

    fn coordinates(&self, h: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|b| {
                b.iter()
                    .zip(h.iter())
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum::<f64>()
            }),
        )
    }

    fn matrix_from_coordinates(&self, c: &DVector<f64>) -> ComplexMatrix {
        let nin = self.p.in_dim();
        let mut out = ComplexMatrix::zeros(nin, nin);
        for (b, &x) in self.basis.iter().zip(c.iter()) {
            out += b * c64(x, 0.0);
        }
        out
    }
}

struct Direction {
    dx: ComplexMatrix,
    dy: ComplexMatrix,
    ds: ComplexMatrix,
}

struct Newton<'a> {
    ws: &'a Workspace<'a>,
    scaling: Scaling,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    rp: ComplexMatrix,
    rd: ComplexMatrix,
    w_rd_w: ComplexMatrix,
}

impl Newton<'_> {
    /// Direction with `ΔX + W ΔS W = G Z G*` for a scaled right-hand side `Z`.
    fn solve(&self, z: &ComplexMatrix) -> Direction {
        let sc = &self.scaling;
        let rc = hermitian_part(&(&sc.g * z * sc.g.adjoint()));
        let rhs = hermitian_part(&(self.ws.reduce(&(&rc - &self.w_rd_w)) - &self.rp));
        let coords = self.chol.solve(&self.ws.coordinates(&rhs));
        let dy = hermitian_part(&self.ws.matrix_from_coordinates(&coords));
        let ds = self.ws.lift(&dy) + &self.rd;
        let dx = hermitian_part(&(rc - &sc.w * &ds * &sc.w));
        Direction { dx, dy, ds }
    }
}

fn inner_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

struct Iterate {
    x: ComplexMatrix,
    y: ComplexMatrix,
    s: ComplexMatrix,
}

impl Iterate {
    fn into_solution(
        self,
        p: &CloningSdp,
        stats: IterateStats,
        history: Vec<IterateStats>,
    ) -> SdpSolution {
        let primal_x = HermitianOperator::from_hermitian_part(&self.x);
        let dual_y = HermitianOperator::from_hermitian_part(&self.y);
        let primal_value = p.q().inner(&primal_x);
        let dual_value = dual_y.trace();
        SdpSolution {
            primal_x,
            dual_y,
            primal_value,
            dual_value,
            gap: dual_value - primal_value,
            residuals: stats.residuals,
            iterations: stats.iteration,
            history,
        }
    }
}

/// Solves the cloning SDP.
///
/// Starts from the strictly feasible pair `X = 𝟙/out`, `Y = 2‖Q‖𝟙`, which
/// makes the iterates equivariant under scaling of `Q`. Stops when the
/// relative gap, the primal residual and the relative dual residual are all
/// at most `tol`.
pub fn solve_with(p: &CloningSdp, opts: &SolverOptions) -> Result<SdpSolution> {
    if !(1e-12..=1e-2).contains(&opts.tol) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {} outside [1e-12, 1e-2]",
            opts.tol
        )));
    }
    let (nout, nin) = (p.out_dim(), p.in_dim());
    let n = nout * nin;

    if max_abs(p.q().matrix()) == 0.0 {
        let x = HermitianOperator::identity(n).scale(1.0 / nout as f64);
        let stats = IterateStats {
            iteration: 0,
            primal_value: 0.0,
            dual_value: 0.0,
            mu: 0.0,
            residuals: Residuals {
                primal_infeasibility: 0.0,
                dual_infeasibility: 0.0,
                relative_gap: 0.0,
            },
        };
        return Ok(SdpSolution {
            primal_x: x,
            dual_y: HermitianOperator::zeros(nin),
            primal_value: 0.0,
            dual_value: 0.0,
            gap: 0.0,
            residuals: stats.residuals,
            iterations: 0,
            history: vec![stats],
        });
    }

    let ws = Workspace::new(p);
    let q = p.q().matrix();
    let q_norm = p.q_norm();
    let ident_in = ComplexMatrix::identity(nin, nin);
    let ident_n = ComplexMatrix::identity(n, n);

    let x0 = &ident_n * c64(1.0 / nout as f64, 0.0);
    let y0 = &ident_in * c64(2.0 * q_norm, 0.0);
    let s0 = ws.lift(&y0) - q;
    let mut it = Iterate {
        x: x0,
        y: y0,
        s: s0,
    };
    let mut history = Vec::new();

    for iteration in 0..=opts.max_iterations {
        let primal_value = inner_re(q, &it.x);
        let dual_value = it.y.trace().re;
        let rp = &ident_in - ws.reduce(&it.x);
        let rd = ws.lift(&it.y) - q - &it.s;
        let mu = inner_re(&it.x, &it.s) / n as f64;
        let scale = primal_value
            .abs()
            .max(dual_value.abs())
            .max(f64::MIN_POSITIVE);
        let residuals = Residuals {
            primal_infeasibility: frobenius(&rp),
            dual_infeasibility: frobenius(&rd) / q_norm,
            relative_gap: (dual_value - primal_value).abs() / scale,
        };
        let stats = IterateStats {
            iteration,
            primal_value,
            dual_value,
            mu,
            residuals,
        };
        history.push(stats);

        if residuals.primal_infeasibility <= opts.tol
            && residuals.dual_infeasibility <= opts.tol
            && residuals.relative_gap <= opts.tol
        {
            return Ok(it.into_solution(p, stats, history));
        }
        if iteration == opts.max_iterations {
            let best = it.into_solution(p, stats, history);
            return Err(Error::MaxIterations {
                iterations: iteration,
                best: Box::new(best),
            });
        }

        let scaling = Scaling::new(&it.x, &it.s)?;
        let chol = ws.schur(&scaling.w).cholesky().ok_or(Error::Singular)?;
        let w_rd_w = &scaling.w * &rd * &scaling.w;
        let newton = Newton {
            ws: &ws,
            scaling,
            chol,
            rp,
            rd,
            w_rd_w,
        };
        let sc = &newton.scaling;
        let v2 = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            n,
            sc.v.iter().map(|v| c64(v * v, 0.0)),
        ));

        let step = |d: &Direction| -> Result<(f64, f64, ComplexMatrix, ComplexMatrix)> {
            let dxs = sc.scale_primal(&d.dx);
            let dss = sc.scale_dual(&d.ds);
            let ap = sc.max_step(&dxs)?;
            let ad = sc.max_step(&dss)?;
            Ok((ap, ad, dxs, dss))
        };

        let (sigma, corrector) = if opts.predictor_corrector {
            let affine = newton.solve(&newton.scaling.lyapunov(&(&v2 * c64(-2.0, 0.0))));
            let (ap, ad, dxs, dss) = step(&affine)?;
            let ap = ap.min(1.0);
            let ad = ad.min(1.0);
            let x_aff = &it.x + &affine.dx * c64(ap, 0.0);
            let s_aff = &it.s + &affine.ds * c64(ad, 0.0);
            let mu_aff = inner_re(&x_aff, &s_aff) / n as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let corr = &dxs * &dss + &dss * &dxs;
            (sigma, Some(corr))
        } else {
            (0.1, None)
        };

        let mut rhs =
            ComplexMatrix::identity(n, n) * c64(2.0 * sigma * mu, 0.0) - &v2 * c64(2.0, 0.0);
        if let Some(corr) = corrector {
            rhs -= corr;
        }
        let z = newton.scaling.lyapunov(&rhs);
        let dir = newton.solve(&z);
        let (ap, ad, _, _) = step(&dir)?;
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);

        it.x = hermitian_part(&(&it.x + &dir.dx * c64(ap, 0.0)));
        it.y = hermitian_part(&(&it.y + &dir.dy * c64(ad, 0.0)));
        it.s = hermitian_part(&(&it.s + &dir.ds * c64(ad, 0.0)));
    }
    unreachable!("loop returns on the final iteration")
}

/// Solution of a family of block problems combined with nonnegative weights.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub blocks: Vec<SdpSolution>,
    pub weights: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
}

impl BlockSolution {
    /// Primal and dual variables of the direct-sum problem built by
    /// [`direct_sum_problem`]: `X = ⊕ X_b`, `Y = ⊕ w_b Y_b`.
    pub fn assemble(
        &self,
        problems: &[CloningSdp],
    ) -> Result<(HermitianOperator, HermitianOperator)> {
        let xs: Vec<&HermitianOperator> = self.blocks.iter().map(|b| &b.primal_x).collect();
        let ys: Vec<HermitianOperator> = self
            .blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| b.dual_y.scale(w))
            .collect();
        let x = embed_blocks(problems, &xs)?;
        let y = direct_sum(&ys.iter().collect::<Vec<_>>());
        Ok((x, y))
    }
}

fn check_block_shapes(problems: &[CloningSdp]) -> Result<()> {
    let Some(first) = problems.first() else {
        return Err(Error::InvalidArgument("no blocks".into()));
    };
    if problems.iter().any(|p| p.dims() != first.dims()) {
        return Err(Error::Dimension(
            "blocks have different factor dimensions".into(),
        ));
    }
    Ok(())
}

/// Block-diagonal sum of square matrices.
fn direct_sum(parts: &[&HermitianOperator]) -> HermitianOperator {
    let n: usize = parts.iter().map(|p| p.dim()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut offset = 0;
    for p in parts {
        let d = p.dim();
        out.view_mut((offset, offset), (d, d)).copy_from(p.matrix());
        offset += d;
    }
    HermitianOperator::from_hermitian_part(&out)
}

/// Places operators on `out ⊗ in` into `out ⊗ (block ⊗ in)`, block diagonal
/// in the block register.
fn embed_blocks(
    problems: &[CloningSdp],
    parts: &[&HermitianOperator],
) -> Result<HermitianOperator> {
    check_block_shapes(problems)?;
    let (nout, nin) = (problems[0].out_dim(), problems[0].in_dim());
    let nb = parts.len();
    let inner = nb * nin;
    let mut out = ComplexMatrix::zeros(nout * inner, nout * inner);
    for (b, part) in parts.iter().enumerate() {
        let m = part.matrix();
        for o in 0..nout {
            for o2 in 0..nout {
                let src = m.view((o * nin, o2 * nin), (nin, nin));
                out.view_mut((o * inner + b * nin, o2 * inner + b * nin), (nin, nin))
                    .copy_from(&src);
            }
        }
    }
    Ok(HermitianOperator::from_hermitian_part(&out))
}

/// Single cloning SDP equivalent to the weighted block family: the block index
/// becomes part of the input register, `Q = ⊕ w_b Q_b`.
pub fn direct_sum_problem(problems: &[CloningSdp], weights: &[f64]) -> Result<CloningSdp> {
    check_block_shapes(problems)?;
    if weights.len() != problems.len() {
        return Err(Error::Dimension("one weight per block required".into()));
    }
    let scaled: Vec<HermitianOperator> = problems
        .iter()
        .zip(weights)
        .map(|(p, &w)| p.q().scale(w))
        .collect();
    let q = embed_blocks(problems, &scaled.iter().collect::<Vec<_>>())?;
    let mut dims = problems[0].dims().as_slice().to_vec();
    let nin = dims.pop().expect("at least two factors");
    dims.push(problems.len() * nin);
    CloningSdp::new(q, FactoredDims::new(dims)?)
}

/// Solves each block and combines the values with the given weights.
pub fn solve_block_diagonal(
    blocks: &[CloningSdp],
    weights: &[f64],
    tol: f64,
) -> Result<BlockSolution> {
    if blocks.len() != weights.len() || blocks.is_empty() {
        return Err(Error::InvalidArgument(
            "need one nonnegative weight per block".into(),
        ));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
    {
        return Err(Error::InvalidArgument(format!(
            "weights must be nonnegative and sum to 1, got {weights:?}"
        )));
    }
    let solutions = blocks
        .iter()
        .map(|b| solve(b, tol))
        .collect::<Result<Vec<_>>>()?;
    let primal_value = solutions
        .iter()
        .zip(weights)
        .map(|(s, w)| w * s.primal_value)
        .sum();
    let dual_value: f64 = solutions
        .iter()
        .zip(weights)
        .map(|(s, w)| w * s.dual_value)
        .sum();
    Ok(BlockSolution {
        blocks: solutions,
        weights: weights.to_vec(),
        primal_value,
        dual_value,
        gap: dual_value - primal_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build_q_quantum, build_q_symmetric, quantum_problem, wiesner_ensemble};

    fn wiesner() -> CloningSdp {
        quantum_problem(build_q_quantum(&wiesner_ensemble()), 2).unwrap()
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            assert!(frobenius(&(x - x.adjoint())) == 0.0);
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner_re(x, y) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn wiesner_value() {
        let sol = solve(&wiesner(), 1e-8).unwrap();
        assert!(
            (sol.primal_value - 0.75).abs() < 1e-7,
            "{}",
            sol.primal_value
        );
        assert!((sol.dual_value - 0.75).abs() < 1e-7);
        assert!(sol.gap >= -1e-8);
    }

    #[test]
    fn symmetric_values() {
        for d in 2..=3 {
            let p = quantum_problem(build_q_symmetric(d).unwrap(), d).unwrap();
            let sol = solve(&p, 1e-8).unwrap();
            assert!(
                (sol.primal_value - 2.0 / (d + 1) as f64).abs() < 1e-6,
                "d={d}"
            );
        }
    }

    #[test]
    fn weak_duality_on_every_iterate() {
        let sol = solve(&wiesner(), 1e-9).unwrap();
        assert!(sol.history.len() > 2);
        for h in &sol.history {
            assert!(h.dual_value >= h.primal_value - 1e-8, "{h:?}");
        }
    }

    #[test]
    fn zero_objective_is_total() {
        let p = CloningSdp::new(
            HermitianOperator::zeros(8),
            FactoredDims::uniform(2, 3).unwrap(),
        )
        .unwrap();
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.primal_value, 0.0);
        assert!(
            p.reduce(&sol.primal_x)
                .max_abs_diff(&HermitianOperator::identity(2))
                < 1e-15
        );
    }

    #[test]
    fn rejects_non_psd_objective_and_bad_tolerance() {
        let q = HermitianOperator::from_real_diagonal(&[1.0, -0.5, 0.0, 0.0]);
        assert!(matches!(
            CloningSdp::new(q, FactoredDims::uniform(2, 2).unwrap()),
            Err(Error::NotPositive { .. })
        ));
        assert!(solve(&wiesner(), 0.1).is_err());
        assert!(solve(&wiesner(), 1e-13).is_err());
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let opts = SolverOptions {
            max_iterations: 2,
            ..SolverOptions::default()
        };
        match solve_with(&wiesner(), &opts) {
            Err(Error::MaxIterations { iterations, best }) => {
                assert_eq!(iterations, 2);
                assert!(best.primal_value > 0.0 && best.dual_value > best.primal_value);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn without_predictor_corrector_still_converges() {
        let opts = SolverOptions {
            predictor_corrector: false,
            ..SolverOptions::default()
        };
        let sol = solve_with(&wiesner(), &opts).unwrap();
        assert!((sol.primal_value - 0.75).abs() < 1e-7);
    }

    #[test]
    fn dual_norm_bound_for_wiesner() {
        let (y, value) = dual_norm_bound(&wiesner());
        assert!(y.max_abs_diff(&HermitianOperator::identity(2).scale(0.375)) < 1e-12);
        assert!((value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn identical_blocks_match_single_solve() {
        let p = wiesner();
        let single = solve(&p, 1e-8).unwrap();
        let blocks = solve_block_diagonal(&[p.clone(), p.clone()], &[0.5, 0.5], 1e-8).unwrap();
        assert!((blocks.primal_value - single.primal_value).abs() < 1e-12);
        assert!(solve_block_diagonal(std::slice::from_ref(&p), &[0.7], 1e-8).is_err());
        assert!(solve_block_diagonal(&[p.clone(), p], &[1.5, -0.5], 1e-8).is_err());
    }
}
