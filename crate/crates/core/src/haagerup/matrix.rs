//! Level-n Haagerup norms.
//!
//! For `U = [u_ij]` the level-n norm is `inf ‖R‖ ‖C‖` over grids with
//! `u_ij = Σ_k ⟨R_ik| ⊗ |C_kj⟩`. Everything is computed fibrewise on the
//! realigned matrix `T̃[(j,a),(i,b)] = φ(u_ij)_x[a,b]`: a factorization is a
//! pair `X Y* = T̃`, and for `n x n` matrices `a, b` of unit Hilbert-Schmidt norm
//! `‖(a ⊗ 1) T̃ (b* ⊗ 1)‖_1` never exceeds the norm. The upper bound rescales a
//! singular value factorization by such `a, b`; the lower bound pairs the
//! entries with contractive grids of matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{phi, TensorElement};
use crate::error::{Error, Result};
use crate::linalg::{op_norm, polar, svd, CMatrix, C64, ZERO};
use crate::module::{same_module, ModuleElement, ModuleRef};
use crate::spectrum::Point;
use crate::traceclass::trace_norm_module;

/// Sweeps stop once an iteration gains less than this, relative to the value.
const ASCENT_TOL: f64 = 1e-14;

/// Relative shifts `a + ε‖a‖ 1` tried when turning a rescaling into a factorization.
const REGULARIZATION: [f64; 7] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2];

/// Largest accepted condition number of a rescaling matrix.
const MAX_CONDITION: f64 = 1e13;

/// `[u_ij]`, an `n x n` grid of tensors over one module.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTensor {
    module: ModuleRef,
    n: usize,
    entries: Vec<TensorElement>,
}

impl MatrixTensor {
    /// `entries` in row-major order.
    pub fn new(module: &ModuleRef, n: usize, entries: Vec<TensorElement>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {n}x{n} matrix tensor",
                entries.len()
            )));
        }
        if entries.iter().any(|u| !same_module(u.module(), module)) {
            return Err(Error::ModuleMismatch("matrix tensor entries over different modules".into()));
        }
        Ok(Self {
            module: module.clone(),
            n,
            entries,
        })
    }

    pub fn zero(module: &ModuleRef, n: usize) -> Result<Self> {
        Self::new(module, n, vec![TensorElement::zero(module); n * n])
    }

    /// `diag(u_1, …, u_n)`.
    pub fn diagonal(module: &ModuleRef, diag: &[TensorElement]) -> Result<Self> {
        let n = diag.len();
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    diag[k / n].clone()
                } else {
                    TensorElement::zero(module)
                }
            })
            .collect();
        Self::new(module, n, entries)
    }

    pub fn module(&self) -> &ModuleRef {
        &self.module
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[TensorElement] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &TensorElement {
        &self.entries[i * self.n + j]
    }

    /// `φ(u_ij)_x` for every point, row-major in `(i, j)`.
    fn localized(&self) -> Result<Vec<(Point, Vec<CMatrix>)>> {
        let images = self.entries.iter().map(phi).collect::<Result<Vec<_>>>()?;
        self.module
            .spectrum()
            .points()
            .map(|p| {
                let blocks = images.iter().map(|t| t.matrix(p).cloned()).collect::<Result<_>>()?;
                Ok((p, blocks))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Size `m` of the probing grids; defaults to `n`.
    pub probe_width: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            probe_width: None,
            restarts: 16,
            seed: 0,
            max_sweeps: 500,
        }
    }
}

impl SearchOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// One seed per restart.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.restarts.max(1) as u64).map(|r| self.seed.wrapping_add(r)).collect()
    }
}

/// A level-n factorization `u_ij = Σ_k ⟨R_ik| ⊗ |C_kj⟩`.
#[derive(Clone, Debug)]
pub struct MatrixFactorization {
    /// `‖R‖ · ‖C‖`, evaluated with [`super::block_norm`].
    pub upper: f64,
    /// `n x m` grid of bras.
    pub rows: Vec<Vec<ModuleElement>>,
    /// `m x n` grid of kets.
    pub cols: Vec<Vec<ModuleElement>>,
}

impl MatrixFactorization {
    /// `[Σ_k ⟨R_ik| ⊗ |C_kj⟩]` as a matrix tensor.
    pub fn to_matrix_tensor(&self, module: &ModuleRef) -> Result<MatrixTensor> {
        let n = self.rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let terms = self.rows[i]
                    .iter()
                    .zip(&self.cols)
                    .map(|(r, c)| (r.clone(), c[j].clone()))
                    .collect();
                entries.push(TensorElement::new(module, terms)?);
            }
        }
        MatrixTensor::new(module, n, entries)
    }
}

fn kron_identity(a: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(a.rows() * d, a.cols() * d, |r, c| {
        if r % d == c % d {
            a[(r / d, c / d)]
        } else {
            ZERO
        }
    })
}

/// `Tr_d`: traces out the inner `d`-dimensional factor.
fn partial_trace(m: &CMatrix, n: usize, d: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| (0..d).map(|a| m[(i * d + a, j * d + a)]).sum())
}

fn realign(blocks: &[CMatrix], n: usize, d: usize) -> CMatrix {
    CMatrix::from_fn(n * d, n * d, |r, c| {
        let (j, a, i, b) = (r / d, r % d, c / d, c % d);
        blocks[i * n + j][(a, b)]
    })
}

fn inverse(a: &CMatrix) -> Result<Option<CMatrix>> {
    let s = svd(a)?;
    let top = s.sigma.first().copied().unwrap_or(0.0);
    let low = s.sigma.last().copied().unwrap_or(0.0);
    if top == 0.0 || low * MAX_CONDITION < top {
        return Ok(None);
    }
    let k = s.sigma.len();
    Ok(Some(CMatrix::from_fn(a.cols(), a.rows(), |i, j| {
        (0..k).map(|l| s.v[(i, l)] * (1.0 / s.sigma[l]) * s.u[(j, l)].conj()).sum()
    })))
}

fn unit_frobenius(m: CMatrix) -> Option<CMatrix> {
    let f = m.frobenius();
    (f > 0.0 && f.is_finite()).then(|| m.scale_real(1.0 / f))
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    Ok(polar(&gaussian(n, rng))?.isometry)
}

/// A fibre factorization `X Y* = T̃` with balanced norms.
#[derive(Clone, Debug)]
struct LocalFactor {
    value: f64,
    x: CMatrix,
    y: CMatrix,
}

/// Builds `X = (a⁻¹ ⊗ 1) U Σ^{1/2}`, `Y = (b⁻¹ ⊗ 1) V Σ^{1/2}` from the SVD of
/// `(a ⊗ 1) T̃ (b* ⊗ 1)` and evaluates `‖Tr_d XX*‖^{1/2} ‖Tr_d YY*‖^{1/2}`.
fn factor_from_scaling(tt: &CMatrix, a: &CMatrix, b: &CMatrix, n: usize, d: usize) -> Result<Option<LocalFactor>> {
    let (Some(ai), Some(bi)) = (inverse(a)?, inverse(b)?) else {
        return Ok(None);
    };
    let w = &(&kron_identity(a, d) * tt) * &kron_identity(&b.adjoint(), d);
    let s = svd(&w)?;
    let rank = s.rank();
    let nd = n * d;
    let ux = CMatrix::from_fn(nd, rank, |r, k| s.u[(r, k)] * s.sigma[k].sqrt());
    let vy = CMatrix::from_fn(nd, rank, |r, k| s.v[(r, k)] * s.sigma[k].sqrt());
    let x = &kron_identity(&ai, d) * &ux;
    let y = &kron_identity(&bi, d) * &vy;
    let residual = (&(&x * &y.adjoint()) - tt).max_abs();
    if residual > 1e-10 * (1.0 + tt.max_abs()) {
        return Ok(None);
    }
    let cn = op_norm(&partial_trace(&(&x * &x.adjoint()), n, d))?;
    let rn = op_norm(&partial_trace(&(&y * &y.adjoint()), n, d))?;
    if cn == 0.0 || rn == 0.0 {
        return Ok(Some(LocalFactor {
            value: 0.0,
            x: CMatrix::zeros(nd, 0),
            y: CMatrix::zeros(nd, 0),
        }));
    }
    let lambda = (rn / cn).powf(0.25);
    Ok(Some(LocalFactor {
        value: (cn * rn).sqrt(),
        x: x.scale_real(lambda),
        y: y.scale_real(1.0 / lambda),
    }))
}

/// Alternating maximisation of `‖(a ⊗ 1) T̃ (b* ⊗ 1)‖_1` over unit `a, b`.
///
/// The maximiser may be singular, so the factorization built from every
/// iterate is evaluated and the best one kept.
fn ascend(
    tt: &CMatrix,
    mut a: CMatrix,
    mut b: CMatrix,
    n: usize,
    d: usize,
    sweeps: usize,
) -> Result<Option<LocalFactor>> {
    let mut best: Option<LocalFactor> = None;
    let mut last = f64::NEG_INFINITY;
    for sweep in 0..sweeps {
        if sweep % 16 == 0 {
            keep_best(&mut best, best_factor(tt, &a, &b, n, d)?);
        } else {
            keep_best(&mut best, factor_from_scaling(tt, &a, &b, n, d)?);
        }
        let w = &(&kron_identity(&a, d) * tt) * &kron_identity(&b.adjoint(), d);
        let s = svd(&w)?;
        let value: f64 = s.sigma.iter().sum();
        if value - last <= ASCENT_TOL * (1.0 + value) {
            keep_best(&mut best, best_factor(tt, &a, &b, n, d)?);
            break;
        }
        last = value;
        let z = &s.v * &s.u.adjoint();
        let Some(na) = unit_frobenius(partial_trace(&(&(tt * &kron_identity(&b.adjoint(), d)) * &z), n, d).adjoint())
        else {
            break;
        };
        a = na;
        let w = &(&kron_identity(&a, d) * tt) * &kron_identity(&b.adjoint(), d);
        let s = svd(&w)?;
        let z = &s.v * &s.u.adjoint();
        let Some(nb) = unit_frobenius(partial_trace(&(&(&z * &kron_identity(&a, d)) * tt), n, d)) else {
            break;
        };
        b = nb;
    }
    Ok(best)
}

fn keep_best(best: &mut Option<LocalFactor>, candidate: Option<LocalFactor>) {
    if let Some(f) = candidate {
        if best.as_ref().is_none_or(|b| f.value < b.value) {
            *best = Some(f);
        }
    }
}

/// Best factorization from `(a, b)` and slightly shifted copies of them.
fn best_factor(tt: &CMatrix, a: &CMatrix, b: &CMatrix, n: usize, d: usize) -> Result<Option<LocalFactor>> {
    let mut best: Option<LocalFactor> = None;
    for eps in REGULARIZATION {
        let shift = |m: &CMatrix| {
            let s = eps * m.frobenius().max(f64::MIN_POSITIVE);
            m + &CMatrix::identity(n).scale_real(s)
        };
        keep_best(&mut best, factor_from_scaling(tt, &shift(a), &shift(b), n, d)?);
    }
    Ok(best)
}

fn local_upper(tt: &CMatrix, n: usize, d: usize, seed: u64, restart: usize, sweeps: usize) -> Result<LocalFactor> {
    let nd = n * d;
    if tt.max_abs() == 0.0 {
        return Ok(LocalFactor {
            value: 0.0,
            x: CMatrix::zeros(nd, 0),
            y: CMatrix::zeros(nd, 0),
        });
    }
    let id = CMatrix::identity(n);
    let mut best = if restart == 0 {
        // the canonical candidate: the singular value factorization of T̃ itself
        factor_from_scaling(tt, &id, &id, n, d)?
    } else {
        None
    };
    let (a0, b0) = if restart == 0 {
        (id.clone(), id)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = unit_frobenius(gaussian(n, &mut rng)).unwrap_or_else(|| id.clone());
        let b = unit_frobenius(gaussian(n, &mut rng)).unwrap_or(id);
        (a, b)
    };
    keep_best(&mut best, ascend(tt, a0, b0, n, d, sweeps)?);
    best.ok_or(Error::NoConvergence {
        routine: "matrix_haagerup_upper",
        sweeps,
    })
}

/// The best `‖R‖ ‖C‖` found from the canonical factorization and seeded
/// rescaling searches. An upper bound for the level-n norm by construction.
pub fn matrix_haagerup_upper(u: &MatrixTensor, opts: &SearchOptions) -> Result<MatrixFactorization> {
    let (n, d) = (u.n, u.module.dim());
    let fibres = u.localized()?;
    let seeds = opts.seeds();
    let per_point: Vec<LocalFactor> = fibres
        .par_iter()
        .map(|(_, blocks)| {
            let tt = realign(blocks, n, d);
            let candidates = seeds
                .par_iter()
                .enumerate()
                .map(|(r, &s)| local_upper(&tt, n, d, s, r, opts.max_sweeps))
                .collect::<Result<Vec<_>>>()?;
            Ok(candidates
                .into_iter()
                .reduce(|a, b| if b.value < a.value { b } else { a })
                .expect("at least one restart"))
        })
        .collect::<Result<_>>()?;

    let width = per_point.iter().map(|f| f.x.cols()).max().unwrap_or(0);
    let module = &u.module;
    let locate = |p: Point| fibres.iter().position(|(q, _)| *q == p).expect("point");
    let slice = |m: &CMatrix, block: usize, k: usize| -> Vec<C64> {
        if k < m.cols() {
            (0..d).map(|a| m[(block * d + a, k)]).collect()
        } else {
            vec![ZERO; d]
        }
    };
    let rows = (0..n)
        .map(|i| {
            (0..width)
                .map(|k| ModuleElement::projected(module, |p| slice(&per_point[locate(p)].y, i, k)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = (0..width)
        .map(|k| {
            (0..n)
                .map(|j| ModuleElement::projected(module, |p| slice(&per_point[locate(p)].x, j, k)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let upper = super::block_norm(&rows, super::Orientation::Row)? * super::block_norm(&cols, super::Orientation::Column)?;
    Ok(MatrixFactorization { upper, rows, cols })
}

/// `P[(i,k),(j,l)] = trace(t_ij K_kl)`.
fn pairing(blocks: &[CMatrix], k: &CMatrix, n: usize, m: usize, d: usize) -> CMatrix {
    CMatrix::from_fn(n * m, n * m, |r, c| {
        let (i, kk, j, l) = (r / m, r % m, c / m, c % m);
        let t = &blocks[i * n + j];
        let mut acc = ZERO;
        for a in 0..d {
            for b in 0..d {
                acc += t[(a, b)] * k[(kk * d + b, l * d + a)];
            }
        }
        acc
    })
}

fn local_lower(blocks: &[CMatrix], n: usize, m: usize, d: usize, seed: u64, restart: usize, sweeps: usize) -> Result<f64> {
    let md = m * d;
    let mut k = if restart == 0 {
        CMatrix::identity(md)
    } else {
        random_unitary(md, &mut ChaCha8Rng::seed_from_u64(seed))?
    };
    let mut best: f64 = 0.0;
    let mut last = f64::NEG_INFINITY;
    for _ in 0..sweeps {
        let s = svd(&pairing(blocks, &k, n, m, d))?;
        let value = s.sigma[0];
        best = best.max(value);
        if value - last <= ASCENT_TOL * (1.0 + value) {
            break;
        }
        last = value;
        let alpha = s.u.column(0);
        let beta = s.v.column(0);
        let g = CMatrix::from_fn(md, md, |r, c| {
            let (l, a, kk, b) = (r / d, r % d, c / d, c % d);
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    acc += alpha[i * m + kk].conj() * beta[j * m + l] * blocks[i * n + j][(a, b)];
                }
            }
            acc
        });
        let sg = svd(&g)?;
        k = &sg.v * &sg.u.adjoint();
    }
    Ok(best)
}

/// Largest `‖[trace(φ(u_ij)_x K_kl)]‖` found over contractive `m x m` grids `K`
/// of `d x d` matrices and points `x`; a lower bound for the level-n norm.
pub fn matrix_dual_lower(u: &MatrixTensor, opts: &SearchOptions) -> Result<f64> {
    let (n, d) = (u.n, u.module.dim());
    let m = opts.probe_width.unwrap_or(n).max(1);
    let fibres = u.localized()?;
    let seeds = opts.seeds();
    let values = fibres
        .par_iter()
        .flat_map(|(_, blocks)| {
            seeds
                .par_iter()
                .enumerate()
                .map(move |(r, &s)| local_lower(blocks, n, m, d, s, r, opts.max_sweeps))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub level: usize,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    /// The accepted gap, `tol · (1 + upper)`.
    pub allowed_gap: f64,
    /// `trace_norm_module(φ(u))`, reported at level one.
    pub trace_norm: Option<f64>,
    pub verdict: String,
    pub seeds: Vec<u64>,
}

impl IsometryReport {
    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }
}

/// Sandwiches the level-n norm between [`matrix_dual_lower`] and
/// [`matrix_haagerup_upper`]; passes when the gap is at most `tol · (1 + upper)`.
pub fn verify_complete_isometry(u: &MatrixTensor, opts: &SearchOptions, tol: f64) -> Result<IsometryReport> {
    if !(1..=3).contains(&u.n) {
        return Err(Error::ShapeMismatch(format!("level {} outside 1..=3", u.n)));
    }
    let upper = matrix_haagerup_upper(u, opts)?.upper;
    let lower = matrix_dual_lower(u, opts)?;
    let gap = upper - lower;
    let allowed_gap = tol * (1.0 + upper);
    let mut pass = gap <= allowed_gap;
    let trace_norm = if u.n == 1 {
        let tn = trace_norm_module(&phi(&u.entries[0])?)?;
        pass &= (upper - tn).abs() <= 1e-7 && (lower - tn).abs() <= 1e-7;
        Some(tn)
    } else {
        None
    };
    Ok(IsometryReport {
        level: u.n,
        upper,
        lower,
        gap,
        allowed_gap,
        trace_norm,
        verdict: if pass { "PASS" } else { "FAIL" }.to_string(),
        seeds: opts.seeds(),
    })
}
