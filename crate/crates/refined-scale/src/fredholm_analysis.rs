//! Numerical Fredholm analysis of weighted Galerkin sections.
//!
//! The finite section of a system between refined spaces is the matrix
//! `G = W_target · M · W_source^{-1}`, where `M` is the L2 Galerkin block
//! matrix at band `K`, the target carries the weights of index `(s, phi)`,
//! and the k-th source column block carries `(s + m_k, phi)`. Unit vectors of
//! the weighted coordinates correspond to unit refined norms, so singular
//! values of `G` probe the operator between the actual scale spaces.
//!
//! Rank decisions are certified: singular values below
//! `rank_tol * max(1, sigma_max)` form the zero group, and the report is
//! flagged ambiguous unless the smallest retained singular value exceeds the
//! largest discarded one by three orders of magnitude.
//!
//! Square truncation produces spurious null vectors supported at the section
//! edge (a column whose image would leave the band has nothing left inside).
//! Genuine kernel and cokernel vectors of an elliptic system are smooth, with
//! coefficient mass at low modes; zero-group vectors whose mass sits above
//! `K/2` are therefore classified as truncation artifacts and reported
//! separately instead of entering the defect dimensions.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pdo_calculus::{galerkin_matrix, PdoSystem};
use crate::refined_spaces::{gamma_pairing, weight, FourierField, ManifoldSpec, RefinedIndex};
use crate::slowly_varying::SlowlyVaryingFunction;

/// Default relative threshold separating the zero group.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Required ratio between retained and discarded singular values.
pub const SIGMA_GAP_THRESHOLD: f64 = 1e3;
/// Band limit above which indices of the test systems have stabilized.
pub const DEFAULT_STABILIZATION_K: i64 = 8;
/// Zero-group vectors with more than this fraction of squared coefficient
/// mass above `K/2` count as truncation artifacts.
const ARTIFACT_MASS_THRESHOLD: f64 = 0.5;

/// The finite section of a system as a matrix between weighted coefficient
/// spaces.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    spec: ManifoldSpec,
    p: usize,
    band: i64,
    target: RefinedIndex,
    sources: Vec<RefinedIndex>,
    /// Diagonal target weights, component-major.
    w_target: Vec<f64>,
    /// Diagonal source weights, component-major.
    w_source: Vec<f64>,
    /// `W_target M W_source^{-1}`.
    matrix: Array2<Complex64>,
}

impl GalerkinOperator {
    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn target(&self) -> &RefinedIndex {
        &self.target
    }

    pub fn sources(&self) -> &[RefinedIndex] {
        &self.sources
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Total coefficient dimension `p * mode_count`.
    pub fn dim(&self) -> usize {
        self.p * self.spec.mode_count(self.band)
    }

    /// Operator norm of the weighted section (largest singular value);
    /// finite sections of bounded operators keep this stable in `K`.
    pub fn operator_norm(&self) -> Result<f64> {
        let (_, s, _) = self.matrix.svd(false, false)?;
        Ok(s.iter().cloned().fold(0.0, f64::max))
    }

    /// Flatten `p` fields (bands at most `K`) into a coefficient vector.
    pub fn flatten(&self, fields: &[FourierField]) -> Result<Array1<Complex64>> {
        flatten_fields(self.spec, self.band, self.p, fields)
    }

    /// Split a coefficient vector back into `p` fields of band `K`.
    pub fn unflatten(&self, v: &Array1<Complex64>) -> Vec<FourierField> {
        unflatten_fields(self.spec, self.band, self.p, v)
    }
}

pub fn flatten_fields(
    spec: ManifoldSpec,
    band: i64,
    p: usize,
    fields: &[FourierField],
) -> Result<Array1<Complex64>> {
    if fields.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "expected {p} components, got {}",
            fields.len()
        )));
    }
    let mc = spec.mode_count(band);
    let mut v = Array1::zeros(p * mc);
    for (k, field) in fields.iter().enumerate() {
        if field.spec() != spec {
            return Err(Error::SpecMismatch { expected: spec.dim(), got: field.spec().dim() });
        }
        if field.band() > band {
            return Err(Error::DimensionMismatch(format!(
                "component band {} exceeds section band {band}",
                field.band()
            )));
        }
        for (mode, value) in field.iter() {
            v[k * mc + spec.flat_index(band, mode)] = value;
        }
    }
    Ok(v)
}

pub fn unflatten_fields(
    spec: ManifoldSpec,
    band: i64,
    p: usize,
    v: &Array1<Complex64>,
) -> Vec<FourierField> {
    let mc = spec.mode_count(band);
    (0..p)
        .map(|k| {
            let mut field = FourierField::zero(spec, band);
            for (i, mode) in spec.modes(band).into_iter().enumerate() {
                field.set(mode, v[k * mc + i]).expect("mode inside band");
            }
            field
        })
        .collect()
}

/// Assemble the weighted finite section of operator between the refined
/// spaces of indices `(s + m_k, phi) -> (s, phi)` at band `K`.
pub fn truncate(
    system: &PdoSystem,
    band: i64,
    s: f64,
    phi: &SlowlyVaryingFunction,
) -> Result<GalerkinOperator> {
    if band < 0 {
        return Err(Error::Domain("band limit must be nonnegative".into()));
    }
    let spec = system.spec();
    let p = system.size();
    let target = RefinedIndex::new(s, phi.clone())?;
    let sources: Vec<RefinedIndex> = system
        .column_orders()
        .iter()
        .map(|&m_k| RefinedIndex { s: s + m_k, phi: phi.clone() })
        .collect();
    let mc = spec.mode_count(band);
    let modes = spec.modes(band);
    let mut w_target = Vec::with_capacity(p * mc);
    let mut w_source = Vec::with_capacity(p * mc);
    for k in 0..p {
        for &mode in &modes {
            w_target.push(weight(mode, &target));
            w_source.push(weight(mode, &sources[k]));
        }
    }
    let mut matrix = galerkin_matrix(system, band);
    for ((r, c), v) in matrix.indexed_iter_mut() {
        *v *= w_target[r] / w_source[c];
    }
    Ok(GalerkinOperator { spec, p, band, target, sources, w_target, w_source, matrix })
}

/// Retained singular-value factors of a section, kept for the restricted
/// solve.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Array2<Complex64>,
    pub sigma: Array1<f64>,
    pub vt: Array2<Complex64>,
    /// Number of singular values in the zero group.
    pub zero_count: usize,
}

/// Numerical kernel/cokernel report of a weighted finite section.
#[derive(Debug, Clone)]
pub struct FredholmReport {
    pub band: i64,
    pub rank_tol: f64,
    pub dim_kernel: usize,
    pub dim_cokernel: usize,
    pub index: i64,
    /// Kernel basis vectors, each a vector of `p` fields, orthonormal in the
    /// plain coefficient l2 metric.
    pub kernel_basis: Vec<Vec<FourierField>>,
    /// Cokernel basis vectors (null vectors of the adjoint section), same
    /// normalization.
    pub cokernel_basis: Vec<Vec<FourierField>>,
    /// Smallest retained over largest discarded singular value; `None` when
    /// nothing was discarded or the discarded group is exactly zero.
    pub sigma_gap: Option<f64>,
    /// Gap below [`SIGMA_GAP_THRESHOLD`]: the rank decision is not certified.
    pub ambiguous: bool,
    /// Zero-group vectors rejected as finite-section edge artifacts.
    pub kernel_artifacts: usize,
    pub cokernel_artifacts: usize,
    pub singular_values: Vec<f64>,
    pub factors: SvdFactors,
}

/// SVD-based kernel/cokernel extraction with the gap certificate and the
/// edge-artifact filter.
pub fn fredholm_report(op: &GalerkinOperator, rank_tol: f64) -> Result<FredholmReport> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::Domain(format!("rank_tol must lie in (0, 1); got {rank_tol}")));
    }
    let (u, sigma, vt) = op.matrix.svd(true, true)?;
    let u = u.expect("u requested");
    let vt = vt.expect("vt requested");
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max.max(1.0);
    let zero_idx: Vec<usize> =
        (0..sigma.len()).filter(|&i| sigma[i] < cutoff).collect();
    let retained_min = (0..sigma.len())
        .filter(|&i| sigma[i] >= cutoff)
        .map(|i| sigma[i])
        .fold(f64::INFINITY, f64::min);
    let zero_max = zero_idx.iter().map(|&i| sigma[i]).fold(0.0, f64::max);

    let sigma_gap = if zero_idx.is_empty() || zero_max < 1e-300 || !retained_min.is_finite() {
        None
    } else {
        Some(retained_min / zero_max)
    };
    let ambiguous = matches!(sigma_gap, Some(g) if g < SIGMA_GAP_THRESHOLD);

    let spec = op.spec;

    // Kernel candidates: right singular vectors mapped through the inverse
    // source weights.
    let mut kernel_fields = Vec::new();
    let mut kernel_artifacts = 0;
    for &i in &zero_idx {
        let mut coeff = Array1::zeros(op.dim());
        for c in 0..op.dim() {
            coeff[c] = vt[(i, c)].conj() / op.w_source[c];
        }
        normalize(&mut coeff);
        if is_edge_artifact(spec, op.band, op.p, &coeff) {
            kernel_artifacts += 1;
        } else {
            kernel_fields.push(coeff);
        }
    }
    // Cokernel candidates: left singular vectors mapped through the target
    // weights (null vectors of the adjoint section).
    let mut cokernel_fields = Vec::new();
    let mut cokernel_artifacts = 0;
    for &i in &zero_idx {
        let mut coeff = Array1::zeros(op.dim());
        for r in 0..op.dim() {
            coeff[r] = u[(r, i)] * op.w_target[r];
        }
        normalize(&mut coeff);
        if is_edge_artifact(spec, op.band, op.p, &coeff) {
            cokernel_artifacts += 1;
        } else {
            cokernel_fields.push(coeff);
        }
    }
    orthonormalize(&mut kernel_fields);
    orthonormalize(&mut cokernel_fields);

    let dim_kernel = kernel_fields.len();
    let dim_cokernel = cokernel_fields.len();
    Ok(FredholmReport {
        band: op.band,
        rank_tol,
        dim_kernel,
        dim_cokernel,
        index: dim_kernel as i64 - dim_cokernel as i64,
        kernel_basis: kernel_fields
            .iter()
            .map(|v| unflatten_fields(spec, op.band, op.p, v))
            .collect(),
        cokernel_basis: cokernel_fields
            .iter()
            .map(|v| unflatten_fields(spec, op.band, op.p, v))
            .collect(),
        sigma_gap,
        ambiguous,
        kernel_artifacts,
        cokernel_artifacts,
        singular_values: sigma.to_vec(),
        factors: SvdFactors { u, sigma, vt, zero_count: zero_idx.len() },
    })
}

fn normalize(v: &mut Array1<Complex64>) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.mapv_inplace(|c| c / n);
    }
}

/// Squared-mass fraction above `K/2` decides edge artifacts.
fn is_edge_artifact(spec: ManifoldSpec, band: i64, p: usize, coeff: &Array1<Complex64>) -> bool {
    if band < 2 {
        return false;
    }
    let mc = spec.mode_count(band);
    let half = band / 2;
    let mut high = 0.0;
    let mut total = 0.0;
    for k in 0..p {
        for (i, mode) in spec.modes(band).into_iter().enumerate() {
            let mass = coeff[k * mc + i].norm_sqr();
            total += mass;
            if mode[0].abs() > half || mode[1].abs() > half {
                high += mass;
            }
        }
    }
    total > 0.0 && high / total > ARTIFACT_MASS_THRESHOLD
}

/// Modified Gram-Schmidt in the coefficient l2 metric; drops near-dependent
/// vectors.
fn orthonormalize(vecs: &mut Vec<Array1<Complex64>>) {
    let mut out: Vec<Array1<Complex64>> = Vec::with_capacity(vecs.len());
    for mut v in vecs.drain(..) {
        for q in &out {
            let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (value, basis) in v.iter_mut().zip(q.iter()) {
                *value -= proj * basis;
            }
        }
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-10 {
            v.mapv_inplace(|c| c / n);
            out.push(v);
        }
    }
    *vecs = out;
}

/// Fraction of squared kernel-coefficient mass above `K/2`; the smoothness
/// proxy checked for elliptic systems.
pub fn high_mode_mass_fraction(fields: &[FourierField], band: i64) -> f64 {
    let half = band / 2;
    let mut high = 0.0;
    let mut total = 0.0;
    for field in fields {
        for (mode, value) in field.iter() {
            let mass = value.norm_sqr();
            total += mass;
            if mode[0].abs() > half || mode[1].abs() > half {
                high += mass;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        high / total
    }
}

/// One row of the invariance table.
#[derive(Debug, Clone, Serialize)]
pub struct IndexTableRow {
    pub s: f64,
    pub phi: String,
    pub band: i64,
    pub dim_kernel: usize,
    pub dim_cokernel: usize,
    pub index: i64,
    pub ambiguous: bool,
}

/// Indices of one system across smoothness indices and band limits.
#[derive(Debug, Clone, Serialize)]
pub struct IndexInvarianceTable {
    pub rows: Vec<IndexTableRow>,
    /// All certified rows report one and the same index.
    pub consistent: bool,
}

/// Tabulate the reported index across `(s, phi)` pairs and band limits,
/// flagging ambiguity and disagreement.
pub fn index_invariance_experiment(
    system: &PdoSystem,
    idx_list: &[(f64, SlowlyVaryingFunction)],
    k_list: &[i64],
    rank_tol: f64,
) -> Result<IndexInvarianceTable> {
    if idx_list.is_empty() || k_list.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::new();
    for (s, phi) in idx_list {
        for &k in k_list {
            let op = truncate(system, k, *s, phi)?;
            let report = fredholm_report(&op, rank_tol)?;
            rows.push(IndexTableRow {
                s: *s,
                phi: phi.to_string(),
                band: k,
                dim_kernel: report.dim_kernel,
                dim_cokernel: report.dim_cokernel,
                index: report.index,
                ambiguous: report.ambiguous,
            });
        }
    }
    let certified: Vec<i64> =
        rows.iter().filter(|r| !r.ambiguous).map(|r| r.index).collect();
    let consistent = !certified.is_empty() && certified.iter().all(|&i| i == certified[0]);
    Ok(IndexInvarianceTable { rows, consistent })
}

/// Defect pairings of a right-hand side against the cokernel.
#[derive(Debug, Clone, Serialize)]
pub struct SolvabilityReport {
    pub solvable: bool,
    /// `(f, w)_Gamma` per cokernel basis vector.
    pub defects: Vec<Complex64>,
    /// `tol * ||f||_Gamma`, the acceptance threshold applied to each defect.
    pub threshold: f64,
}

/// Range test: `f` is solvable iff its Gamma-pairings against every cokernel
/// vector vanish to `tol * ||f||_Gamma`. The pairing is the unweighted one,
/// independent of `(s, phi)`.
pub fn solvability_test(
    f: &[FourierField],
    report: &FredholmReport,
    tol: f64,
) -> Result<SolvabilityReport> {
    let f_norm = {
        let mut sq = 0.0;
        for comp in f {
            sq += gamma_pairing(comp, comp)?.re;
        }
        sq.max(0.0).sqrt()
    };
    let mut defects = Vec::with_capacity(report.cokernel_basis.len());
    for w in &report.cokernel_basis {
        if w.len() != f.len() {
            return Err(Error::DimensionMismatch(
                "component count differs between f and the cokernel".into(),
            ));
        }
        let mut pairing = Complex64::new(0.0, 0.0);
        for (fj, wj) in f.iter().zip(w) {
            pairing += gamma_pairing(fj, wj)?;
        }
        defects.push(pairing);
    }
    let threshold = tol * f_norm;
    let solvable = defects.iter().all(|d| d.norm() <= threshold);
    Ok(SolvabilityReport { solvable, defects, threshold })
}

/// The complementary projectors of the kernel/cokernel decompositions.
///
/// `P` acts on the source coefficient space: it annihilates the kernel and
/// ranges over the fields whose Gamma-pairing with every kernel vector
/// vanishes. `P_plus` acts on the target space: it annihilates the cokernel
/// and ranges over the numerical range of the section. Because the pairing
/// defining both complements is the flat-torus L2 one, both matrices are
/// orthogonal projectors in coefficient coordinates; on the weighted spaces
/// they are the oblique projectors of the scale decompositions.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub p: Array2<Complex64>,
    pub p_plus: Array2<Complex64>,
}

impl ProjectorPair {
    /// `max |(P^2 - P)_{ij}|`, for contract checks.
    pub fn idempotency_defect(&self) -> f64 {
        let d1 = idempotency_defect(&self.p);
        let d2 = idempotency_defect(&self.p_plus);
        d1.max(d2)
    }
}

fn idempotency_defect(p: &Array2<Complex64>) -> f64 {
    let sq = p.dot(p);
    sq.iter().zip(p.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn projector_complement(dim: usize, basis: &[Array1<Complex64>]) -> Array2<Complex64> {
    let mut p = Array2::eye(dim);
    for q in basis {
        for r in 0..dim {
            for c in 0..dim {
                let sub = q[r] * q[c].conj();
                p[(r, c)] -= sub;
            }
        }
    }
    p
}

/// Build the projector pair from a certified report.
pub fn projectors(op: &GalerkinOperator, report: &FredholmReport) -> Result<ProjectorPair> {
    if report.ambiguous {
        return Err(Error::AmbiguousRank {
            gap: report.sigma_gap.unwrap_or(f64::INFINITY),
            threshold: SIGMA_GAP_THRESHOLD,
        });
    }
    let kernel: Vec<Array1<Complex64>> = report
        .kernel_basis
        .iter()
        .map(|fields| op.flatten(fields))
        .collect::<Result<_>>()?;
    let cokernel: Vec<Array1<Complex64>> = report
        .cokernel_basis
        .iter()
        .map(|fields| op.flatten(fields))
        .collect::<Result<_>>()?;
    // The report bases are orthonormalized; a rank drop here means the
    // complement decomposition is degenerate.
    if kernel.len() != report.dim_kernel || cokernel.len() != report.dim_cokernel {
        return Err(Error::IllConditioned("defect bases lost rank".into()));
    }
    Ok(ProjectorPair {
        p: projector_complement(op.dim(), &kernel),
        p_plus: projector_complement(op.dim(), &cokernel),
    })
}

/// A successful restricted solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub fields: Vec<FourierField>,
    /// `||G u - P_plus f||` in the weighted coordinates, i.e. the refined
    /// target norm of the residual.
    pub residual: f64,
    /// Largest over smallest retained singular value.
    pub restricted_condition: f64,
}

/// Outcome of [`solve`]: either the representative solution in the range of
/// `P`, or the defect pairings that obstruct solvability.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(Solution),
    Unsolvable { defects: Vec<Complex64> },
}

/// Solve `A u = f` through the restricted isomorphism: project `f` onto the
/// numerical range, invert on the retained singular directions, and return
/// the representative with `P u = u`.
pub fn solve(
    op: &GalerkinOperator,
    report: &FredholmReport,
    f: &[FourierField],
    tol: f64,
) -> Result<SolveOutcome> {
    if report.ambiguous {
        return Err(Error::AmbiguousRank {
            gap: report.sigma_gap.unwrap_or(f64::INFINITY),
            threshold: SIGMA_GAP_THRESHOLD,
        });
    }
    let solvability = solvability_test(f, report, tol)?;
    if !solvability.solvable {
        return Ok(SolveOutcome::Unsolvable { defects: solvability.defects });
    }
    let dim = op.dim();
    let f_flat = op.flatten(f)?;
    // P_plus f: remove cokernel components (orthogonal in coefficient l2).
    let mut f_range = f_flat;
    for w in &report.cokernel_basis {
        let w_flat = op.flatten(w)?;
        let proj: Complex64 =
            w_flat.iter().zip(f_range.iter()).map(|(a, b)| a.conj() * b).sum();
        for (v, b) in f_range.iter_mut().zip(w_flat.iter()) {
            *v -= proj * b;
        }
    }
    // Weighted right-hand side.
    let mut f_w = f_range.clone();
    for (i, v) in f_w.iter_mut().enumerate() {
        *v *= op.w_target[i];
    }
    // Pseudo-inverse on the retained singular directions.
    let factors = &report.factors;
    let sigma_max = factors.sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = report.rank_tol * sigma_max.max(1.0);
    let mut u_w = Array1::zeros(dim);
    let mut sigma_min_retained = f64::INFINITY;
    for i in 0..factors.sigma.len() {
        let s = factors.sigma[i];
        if s < cutoff {
            continue;
        }
        sigma_min_retained = sigma_min_retained.min(s);
        let coef: Complex64 =
            (0..dim).map(|r| factors.u[(r, i)].conj() * f_w[r]).sum::<Complex64>() / s;
        for c in 0..dim {
            u_w[c] += factors.vt[(i, c)].conj() * coef;
        }
    }
    // Back to plain coefficients, then pick the P-representative.
    let mut u_flat = u_w.clone();
    for (i, v) in u_flat.iter_mut().enumerate() {
        *v /= op.w_source[i];
    }
    for n in &report.kernel_basis {
        let n_flat = op.flatten(n)?;
        let proj: Complex64 =
            n_flat.iter().zip(u_flat.iter()).map(|(a, b)| a.conj() * b).sum();
        for (v, b) in u_flat.iter_mut().zip(n_flat.iter()) {
            *v -= proj * b;
        }
    }
    // Residual in weighted coordinates.
    let mut u_w_final = u_flat.clone();
    for (i, v) in u_w_final.iter_mut().enumerate() {
        *v *= op.w_source[i];
    }
    let image = op.matrix.dot(&u_w_final);
    let residual = image
        .iter()
        .zip(f_w.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(SolveOutcome::Solved(Solution {
        fields: op.unflatten(&u_flat),
        residual,
        restricted_condition: sigma_max / sigma_min_retained,
    }))
}

/// Verdict of the a priori constant scan across band limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AprioriVerdict {
    Bounded,
    Growing,
    Inconclusive,
}

/// The constant of the a priori estimate, per band limit.
#[derive(Debug, Clone, Serialize)]
pub struct AprioriReport {
    pub s: f64,
    pub phi: String,
    pub sigma: f64,
    /// `(K, c_quad(K))` pairs.
    pub entries: Vec<(i64, f64)>,
    pub verdict: AprioriVerdict,
}

/// Quadratic-form constant of the a priori estimate at one band limit:
///
/// `c_quad(K)^2 = max_u  sum_k ||u_k||^2_{s+m_k,phi} /
///                (sum_j ||(Au)_j||^2_{s,phi} + sum_k ||u_k||^2_{s-sigma})`.
///
/// This sum-of-squares form brackets the sum-of-norms constant within a
/// fixed factor `sqrt(2p)` either way. The weaker norm in the denominator is
/// the plain Sobolev one, which keeps that block positive definite, so the
/// maximum is `1 / sigma_min` of a stacked weighted matrix.
pub fn apriori_constant(
    system: &PdoSystem,
    s: f64,
    phi: &SlowlyVaryingFunction,
    sigma: f64,
    band: i64,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive; got {sigma}")));
    }
    if system.is_constant_coefficient() {
        apriori_constant_modewise(system, s, phi, sigma, band)
    } else {
        apriori_constant_dense(system, s, phi, sigma, band)
    }
}

/// Mode-decoupled evaluation for constant-coefficient systems: per lattice
/// frequency the pencil is a `p x p` Hermitian problem.
pub fn apriori_constant_modewise(
    system: &PdoSystem,
    s: f64,
    phi: &SlowlyVaryingFunction,
    sigma: f64,
    band: i64,
) -> Result<f64> {
    if !system.is_constant_coefficient() {
        return Err(Error::Domain(
            "modewise a priori constants need constant coefficients".into(),
        ));
    }
    let spec = system.spec();
    let p = system.size();
    let target = RefinedIndex::new(s, phi.clone())?;
    let weak = RefinedIndex::sobolev(s - sigma);
    let orders = system.column_orders().to_vec();
    let mut best = 0.0_f64;
    for mode in spec.modes(band) {
        let a = system.multiplier_matrix(mode);
        let w_t = weight(mode, &target);
        let w_weak = weight(mode, &weak);
        let w_num: Vec<f64> = orders
            .iter()
            .map(|&m_k| weight(mode, &RefinedIndex { s: s + m_k, phi: phi.clone() }))
            .collect();
        // B = w_t^2 A^H A + w_weak^2 I, scaled by the numerator weights.
        let mut b = Array2::<Complex64>::zeros((p, p));
        for i in 0..p {
            for j in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..p {
                    acc += a[(l, i)].conj() * a[(l, j)];
                }
                b[(i, j)] = acc * w_t * w_t;
            }
            b[(i, i)] += Complex64::new(w_weak * w_weak, 0.0);
        }
        for i in 0..p {
            for j in 0..p {
                b[(i, j)] /= Complex64::new(w_num[i] * w_num[j], 0.0);
            }
        }
        let lambda_min = if p == 1 {
            b[(0, 0)].re
        } else {
            let (eigs, _) = b.eigh(UPLO::Lower)?;
            eigs.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if lambda_min > 0.0 {
            best = best.max(1.0 / lambda_min.sqrt());
        }
    }
    Ok(best)
}

/// Dense evaluation via the smallest singular value of the stacked weighted
/// matrix `[W_t M W_num^{-1}; W_weak W_num^{-1}]`.
pub fn apriori_constant_dense(
    system: &PdoSystem,
    s: f64,
    phi: &SlowlyVaryingFunction,
    sigma: f64,
    band: i64,
) -> Result<f64> {
    let op = truncate(system, band, s, phi)?;
    let dim = op.dim();
    let spec = system.spec();
    let p = system.size();
    let mc = spec.mode_count(band);
    let weak = RefinedIndex::sobolev(s - sigma);
    let mut stacked = Array2::<Complex64>::zeros((2 * dim, dim));
    // Top block: W_t M W_num^{-1} = the weighted section itself.
    for r in 0..dim {
        for c in 0..dim {
            stacked[(r, c)] = op.matrix[(r, c)];
        }
    }
    // Bottom block: diag(w_weak / w_num).
    let modes = spec.modes(band);
    for k in 0..p {
        for (i, &mode) in modes.iter().enumerate() {
            let idx = k * mc + i;
            stacked[(dim + idx, idx)] =
                Complex64::new(weight(mode, &weak) / op.w_source[idx], 0.0);
        }
    }
    let (_, sv, _) = stacked.svd(false, false)?;
    let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(sigma_min > 0.0) {
        return Err(Error::Linalg("stacked pencil lost definiteness".into()));
    }
    Ok(1.0 / sigma_min)
}

/// Scan `c_quad` across band limits and classify the growth.
pub fn apriori_report(
    system: &PdoSystem,
    s: f64,
    phi: &SlowlyVaryingFunction,
    sigma: f64,
    k_list: &[i64],
    k_min: i64,
) -> Result<AprioriReport> {
    if k_list.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut entries = Vec::with_capacity(k_list.len());
    for &k in k_list {
        entries.push((k, apriori_constant(system, s, phi, sigma, k)?));
    }
    let ratios: Vec<f64> = entries
        .windows(2)
        .filter(|w| w[0].0 >= k_min)
        .map(|w| w[1].1 / w[0].1)
        .collect();
    let verdict = if ratios.is_empty() {
        AprioriVerdict::Inconclusive
    } else if ratios.iter().all(|r| (r - 1.0).abs() <= 0.10) {
        AprioriVerdict::Bounded
    } else if ratios.iter().all(|&r| r >= 2.0) {
        AprioriVerdict::Growing
    } else {
        AprioriVerdict::Inconclusive
    };
    Ok(AprioriReport { s, phi: phi.to_string(), sigma, entries, verdict })
}

/// Kernel and cokernel of a constant-coefficient system read off mode by
/// mode (null directions of the `p x p` multiplier matrices). Cheap at any
/// band, used by the large-band regularity experiments.
pub fn modewise_defect(
    system: &PdoSystem,
    band: i64,
    rel_tol: f64,
) -> Result<(Vec<Vec<FourierField>>, Vec<Vec<FourierField>>)> {
    if !system.is_constant_coefficient() {
        return Err(Error::Domain("modewise defect needs constant coefficients".into()));
    }
    let spec = system.spec();
    let p = system.size();
    let mut kernel = Vec::new();
    let mut cokernel = Vec::new();
    for mode in spec.modes(band) {
        let a = system.multiplier_matrix(mode);
        let (u, sv, vt) = a.svd(true, true)?;
        let (u, vt) = (u.unwrap(), vt.unwrap());
        let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
        let cutoff = rel_tol * sigma_max.max(1.0);
        for i in 0..sv.len() {
            if sv[i] < cutoff {
                let mut kv = vec![FourierField::zero(spec, band); p];
                let mut cv = vec![FourierField::zero(spec, band); p];
                for k in 0..p {
                    kv[k].set(mode, vt[(i, k)].conj())?;
                    cv[k].set(mode, u[(k, i)])?;
                }
                kernel.push(kv);
                cokernel.push(cv);
            }
        }
    }
    Ok((kernel, cokernel))
}

/// Solve a constant-coefficient system mode by mode with a per-mode
/// pseudo-inverse; singular directions receive zero.
pub fn solve_modewise(
    system: &PdoSystem,
    f: &[FourierField],
    rel_tol: f64,
) -> Result<Vec<FourierField>> {
    if !system.is_constant_coefficient() {
        return Err(Error::Domain("modewise solve needs constant coefficients".into()));
    }
    if f.len() != system.size() {
        return Err(Error::DimensionMismatch(format!(
            "system size {} but {} right-hand components",
            system.size(),
            f.len()
        )));
    }
    let spec = system.spec();
    let p = system.size();
    let band = f.iter().map(FourierField::band).max().unwrap_or(0);
    let mut out = vec![FourierField::zero(spec, band); p];
    for mode in spec.modes(band) {
        let rhs: Vec<Complex64> = f.iter().map(|comp| comp.get(mode)).collect();
        if rhs.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let a = system.multiplier_matrix(mode);
        if p == 1 {
            let coeff = a[(0, 0)];
            if coeff.norm() > rel_tol {
                out[0].set(mode, rhs[0] / coeff)?;
            }
            continue;
        }
        let (u, sv, vt) = a.svd(true, true)?;
        let (u, vt) = (u.unwrap(), vt.unwrap());
        let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
        let cutoff = rel_tol * sigma_max.max(1.0);
        let mut x = vec![Complex64::new(0.0, 0.0); p];
        for i in 0..sv.len() {
            if sv[i] < cutoff {
                continue;
            }
            let coef: Complex64 =
                (0..p).map(|r| u[(r, i)].conj() * rhs[r]).sum::<Complex64>() / sv[i];
            for c in 0..p {
                x[c] += vt[(i, c)].conj() * coef;
            }
        }
        for k in 0..p {
            out[k].set(mode, x[k])?;
        }
    }
    Ok(out)
}
