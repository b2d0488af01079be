//! Classical polyhomogeneous symbols and systems on the torus.
//!
//! A scalar symbol is a finite sum of positively homogeneous terms
//! `c(x) sigma(xi/|xi|) |xi|^d chi_cut(|xi|)` of strictly decreasing degrees
//! `d`, where the coefficient `c(x)` is a trigonometric polynomial and the
//! angular profile `sigma` lives on unit directions. With the default cutoff
//! radius 1 the cutoff only touches `xi = 0` on the integer lattice, so the
//! expansion is exact on lattice frequencies; the value at `xi = 0` is fixed
//! by an explicit, recorded rule.
//!
//! Operators act by toroidal quantization
//! `(Au)(x) = sum_xi e^{i x·xi} a(x, xi) u_hat(xi)`: every coefficient mode
//! `eta` of `c(x)` moves mass from `xi` to `xi + eta`, so the output band of
//! an application grows by the coefficient bandwidth and is never silently
//! truncated. Galerkin finite sections, by contrast, discard output modes
//! beyond the section band.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::refined_spaces::{FourierField, ManifoldSpec, Mode};

/// Angular profile of a homogeneous term on unit cotangent directions.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularProfile {
    /// One-dimensional torus: one value per direction.
    Line { plus: Complex64, minus: Complex64 },
    /// Two-dimensional torus: trigonometric polynomial in the angle,
    /// `sigma(theta) = sum c_m e^{i m theta}`.
    Circle { modes: Vec<(i64, Complex64)> },
}

impl AngularProfile {
    pub fn eval(&self, omega: [f64; 2]) -> Complex64 {
        match self {
            AngularProfile::Line { plus, minus } => {
                if omega[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            AngularProfile::Circle { modes } => {
                let theta = omega[1].atan2(omega[0]);
                modes
                    .iter()
                    .map(|&(m, c)| c * Complex64::new(0.0, m as f64 * theta).exp())
                    .sum()
            }
        }
    }

    fn is_identically_zero(&self) -> bool {
        match self {
            AngularProfile::Line { plus, minus } => plus.norm() == 0.0 && minus.norm() == 0.0,
            AngularProfile::Circle { modes } => modes.iter().all(|(_, c)| c.norm() == 0.0),
        }
    }

    fn dim(&self) -> usize {
        match self {
            AngularProfile::Line { .. } => 1,
            AngularProfile::Circle { .. } => 2,
        }
    }
}

/// One positively homogeneous term of a classical symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousTerm {
    /// Homogeneity degree.
    pub degree: f64,
    /// Fourier modes of the x-dependent coefficient `c(x)`.
    pub coeff_modes: Vec<(Mode, Complex64)>,
    /// Profile on unit directions.
    pub angular: AngularProfile,
    /// The radial cutoff is 0 below `cutoff_radius / 2` and 1 above
    /// `cutoff_radius`. Default 1, so nonzero lattice points are untouched.
    pub cutoff_radius: f64,
}

impl HomogeneousTerm {
    /// Term with constant coefficient `c(x) ≡ 1`.
    pub fn constant_coeff(degree: f64, angular: AngularProfile) -> Self {
        Self {
            degree,
            coeff_modes: vec![([0, 0], Complex64::new(1.0, 0.0))],
            angular,
            cutoff_radius: 1.0,
        }
    }

    /// Largest `|eta|_inf` over the coefficient modes.
    pub fn bandwidth(&self) -> i64 {
        self.coeff_modes
            .iter()
            .map(|(m, _)| m[0].abs().max(m[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// The xi-dependent factor `sigma(xi/|xi|) |xi|^d chi_cut(|xi|)` at a
    /// real frequency; zero at the origin (the zero-mode rule lives on the
    /// symbol, not the term).
    pub fn frequency_factor(&self, xi: [f64; 2]) -> Complex64 {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let omega = [xi[0] / r, xi[1] / r];
        self.angular.eval(omega) * r.powf(self.degree) * radial_cutoff(r, self.cutoff_radius)
    }

    /// Value of the positively homogeneous extension at `(x, omega)`,
    /// `|omega| = 1`, without the cutoff: `c(x) sigma(omega)`.
    pub fn principal_value(&self, x: [f64; 2], omega: [f64; 2]) -> Complex64 {
        self.coeff_value(x) * self.angular.eval(omega)
    }

    fn coeff_value(&self, x: [f64; 2]) -> Complex64 {
        self.coeff_modes
            .iter()
            .map(|&(eta, c)| {
                c * Complex64::new(0.0, eta[0] as f64 * x[0] + eta[1] as f64 * x[1]).exp()
            })
            .sum()
    }
}

/// Smooth radial cutoff: 0 for `r <= r0/2`, 1 for `r >= r0`, a C-infinity
/// bump transition in between.
pub fn radial_cutoff(r: f64, r0: f64) -> f64 {
    if r >= r0 {
        return 1.0;
    }
    if r <= r0 / 2.0 {
        return 0.0;
    }
    let t = (r - r0 / 2.0) / (r0 / 2.0);
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// How a symbol acts on the zero frequency, where homogeneity says nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroModeRule {
    /// Evaluate each term's angular profile at the positive first axis, with
    /// `|0|^d` read as its continuous extension: 1 for `d = 0`, 0 otherwise.
    /// This keeps differential operators annihilating constants while giving
    /// order-zero shift symbols the expected action on the mean.
    PositiveAxis,
    /// The symbol sends the zero mode to zero.
    Annihilate,
}

/// A classical symbol: homogeneous terms of strictly decreasing degree plus
/// the zero-mode rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSymbol {
    terms: Vec<HomogeneousTerm>,
    zero_mode: ZeroModeRule,
}

impl ClassicalSymbol {
    /// Degrees must be non-increasing; several terms may share the top
    /// degree (their sum is the principal component, which a single
    /// coefficient-times-profile product cannot always express).
    pub fn new(terms: Vec<HomogeneousTerm>, zero_mode: ZeroModeRule) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidSymbol("a symbol needs at least one term".into()));
        }
        let dim = terms[0].angular.dim();
        if terms.iter().any(|t| t.angular.dim() != dim) {
            return Err(Error::InvalidSymbol("mixed angular profile dimensions".into()));
        }
        for w in terms.windows(2) {
            if w[1].degree > w[0].degree {
                return Err(Error::InvalidSymbol(format!(
                    "term degrees must be non-increasing; got {} then {}",
                    w[0].degree, w[1].degree
                )));
            }
        }
        let top = terms[0].degree;
        if terms
            .iter()
            .take_while(|t| t.degree == top)
            .all(|t| t.angular.is_identically_zero())
        {
            return Err(Error::InvalidSymbol(
                "the top-degree angular profile must not vanish identically".into(),
            ));
        }
        if terms.iter().any(|t| !(t.cutoff_radius > 0.0)) {
            return Err(Error::InvalidSymbol("cutoff radius must be positive".into()));
        }
        Ok(Self { terms, zero_mode })
    }

    pub fn order(&self) -> f64 {
        self.terms[0].degree
    }

    pub fn terms(&self) -> &[HomogeneousTerm] {
        &self.terms
    }

    pub fn zero_mode(&self) -> ZeroModeRule {
        self.zero_mode
    }

    pub fn bandwidth(&self) -> i64 {
        self.terms.iter().map(HomogeneousTerm::bandwidth).max().unwrap_or(0)
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.bandwidth() == 0
    }

    /// The zero-mode rule applied to one term.
    fn zero_factor(&self, term: &HomogeneousTerm) -> Complex64 {
        match self.zero_mode {
            ZeroModeRule::Annihilate => Complex64::new(0.0, 0.0),
            ZeroModeRule::PositiveAxis => {
                if term.degree == 0.0 {
                    term.angular.eval([1.0, 0.0])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// The xi-dependent factor of one term at a lattice frequency, with the
    /// zero-mode rule applied at the origin.
    fn term_factor(&self, term: &HomogeneousTerm, xi: Mode) -> Complex64 {
        if xi == [0, 0] {
            self.zero_factor(term)
        } else {
            term.frequency_factor([xi[0] as f64, xi[1] as f64])
        }
    }

    /// Full symbol value at a point of phase space (real frequency). At
    /// `xi = 0` the zero-mode rule decides.
    pub fn value_at(&self, x: [f64; 2], xi: [f64; 2]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let factor = if xi == [0.0, 0.0] {
                    self.zero_factor(t)
                } else {
                    t.frequency_factor(xi)
                };
                t.coeff_value(x) * factor
            })
            .sum()
    }

    /// The diagonal multiplier of a constant-coefficient symbol at a lattice
    /// frequency.
    pub fn multiplier(&self, xi: Mode) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let c: Complex64 = t.coeff_modes.iter().map(|&(_, c)| c).sum();
                c * self.term_factor(t, xi)
            })
            .sum()
    }
}

/// Apply a scalar symbol to a field by toroidal quantization.
///
/// The output coefficient at `xi + eta` accumulates
/// `c_hat(eta) * factor(xi) * u_hat(xi)`; the output band is `K + B`.
pub fn apply(symbol: &ClassicalSymbol, u: &FourierField) -> FourierField {
    let out_band = u.band() + symbol.bandwidth();
    let mut out = FourierField::zero(u.spec(), out_band);
    for (xi, value) in u.iter() {
        if value.norm() == 0.0 {
            continue;
        }
        for term in symbol.terms() {
            let factor = symbol.term_factor(term, xi);
            if factor.norm() == 0.0 {
                continue;
            }
            for &(eta, c_hat) in &term.coeff_modes {
                let target = [xi[0] + eta[0], xi[1] + eta[1]];
                let current = out.get(target);
                out.set(target, current + c_hat * factor * value)
                    .expect("target lies inside the grown band");
            }
        }
    }
    out
}

/// A `p x p` system of classical symbols; `None` entries are the zero symbol.
#[derive(Debug, Clone)]
pub struct PdoSystem {
    spec: ManifoldSpec,
    p: usize,
    entries: Vec<Option<ClassicalSymbol>>,
    column_orders: Vec<f64>,
}

impl PdoSystem {
    /// Build a system from row-major entries. Every column must contain a
    /// nonzero symbol (otherwise its order is undefined), and the angular
    /// profiles must match the manifold dimension.
    pub fn new(
        spec: ManifoldSpec,
        p: usize,
        entries: Vec<Option<ClassicalSymbol>>,
    ) -> Result<Self> {
        if p == 0 || entries.len() != p * p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {p} x {p} system, got {}",
                p * p,
                entries.len()
            )));
        }
        for (i, entry) in entries.iter().enumerate() {
            if let Some(sym) = entry {
                let dim = sym.terms()[0].angular.dim();
                if dim != spec.dim() {
                    return Err(Error::InvalidSymbol(format!(
                        "entry ({}, {}) has a {dim}-dimensional angular profile on a {}-torus",
                        i / p + 1,
                        i % p + 1,
                        spec.dim()
                    )));
                }
            }
        }
        let mut column_orders = Vec::with_capacity(p);
        for k in 0..p {
            let order = (0..p)
                .filter_map(|j| entries[j * p + k].as_ref().map(ClassicalSymbol::order))
                .fold(f64::NEG_INFINITY, f64::max);
            if order == f64::NEG_INFINITY {
                return Err(Error::InvalidSymbol(format!(
                    "column {} contains only zero symbols; its order is undefined",
                    k + 1
                )));
            }
            column_orders.push(order);
        }
        Ok(Self { spec, p, entries, column_orders })
    }

    /// A `1 x 1` system.
    pub fn scalar(spec: ManifoldSpec, symbol: ClassicalSymbol) -> Result<Self> {
        Self::new(spec, 1, vec![Some(symbol)])
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn entry(&self, row: usize, col: usize) -> Option<&ClassicalSymbol> {
        self.entries[row * self.p + col].as_ref()
    }

    /// Column orders `m_k = max_j ord A_{j,k}`.
    pub fn column_orders(&self) -> &[f64] {
        &self.column_orders
    }

    /// Orders of the individual entries (None for zero symbols), row-major.
    pub fn order_matrix(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.p)
            .map(|j| (0..self.p).map(|k| self.entry(j, k).map(ClassicalSymbol::order)).collect())
            .collect()
    }

    pub fn bandwidth(&self) -> i64 {
        self.entries
            .iter()
            .flatten()
            .map(ClassicalSymbol::bandwidth)
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.bandwidth() == 0
    }

    /// The `p x p` multiplier matrix of a constant-coefficient system at one
    /// lattice frequency.
    pub fn multiplier_matrix(&self, xi: Mode) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.p, self.p));
        for j in 0..self.p {
            for k in 0..self.p {
                if let Some(sym) = self.entry(j, k) {
                    m[(j, k)] = sym.multiplier(xi);
                }
            }
        }
        m
    }
}

/// Apply a system to a vector of fields: `f_j = sum_k A_{j,k} u_k`.
pub fn apply_system(system: &PdoSystem, u: &[FourierField]) -> Result<Vec<FourierField>> {
    if u.len() != system.size() {
        return Err(Error::DimensionMismatch(format!(
            "system size {} but {} input components",
            system.size(),
            u.len()
        )));
    }
    let band = u.first().map(FourierField::band).unwrap_or(0);
    for comp in u {
        if comp.spec() != system.spec() {
            return Err(Error::SpecMismatch {
                expected: system.spec().dim(),
                got: comp.spec().dim(),
            });
        }
        if comp.band() != band {
            return Err(Error::DimensionMismatch("input components must share one band".into()));
        }
    }
    let out_band = band + system.bandwidth();
    let mut out = vec![FourierField::zero(system.spec(), out_band); system.size()];
    for (k, comp) in u.iter().enumerate() {
        for j in 0..system.size() {
            if let Some(sym) = system.entry(j, k) {
                let contribution = apply(sym, comp).padded(out_band)?;
                out[j].add_assign(&contribution)?;
            }
        }
    }
    Ok(out)
}

/// Principal-symbol matrix at `(x, omega)` with the order-bookkeeping zero
/// convention: the entry is the top term of `A_{j,k}` when
/// `ord A_{j,k} = m_k`, and exactly zero when the order falls short.
pub fn principal_symbol(
    system: &PdoSystem,
    x: [f64; 2],
    omega: [f64; 2],
) -> Result<Array2<Complex64>> {
    let r2 = omega[0] * omega[0] + omega[1] * omega[1];
    if (r2 - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("omega must be a unit direction; |omega|^2 = {r2}")));
    }
    let p = system.size();
    let mut m = Array2::zeros((p, p));
    for j in 0..p {
        for k in 0..p {
            if let Some(sym) = system.entry(j, k) {
                let order = sym.order();
                if (order - system.column_orders()[k]).abs() < 1e-12 {
                    m[(j, k)] = sym
                        .terms()
                        .iter()
                        .take_while(|t| t.degree == order)
                        .map(|t| t.principal_value(x, omega))
                        .sum();
                }
            }
        }
    }
    Ok(m)
}

/// Outcome of the Petrovskii ellipticity scan.
#[derive(Debug, Clone, Serialize)]
pub struct PetrovskiiReport {
    pub min_abs_det: f64,
    pub elliptic: bool,
    pub delta: f64,
    pub argmin_x: [f64; 2],
    pub argmin_omega: [f64; 2],
}

/// Default ellipticity threshold.
pub const DEFAULT_ELLIPTICITY_DELTA: f64 = 1e-8;

/// Uniform x-grid adequate for trigonometric-polynomial coefficients.
pub fn default_x_grid(spec: ManifoldSpec, bandwidth: i64) -> Vec<[f64; 2]> {
    let per_axis = (4 * bandwidth + 1).max(16) as usize;
    let step = 2.0 * std::f64::consts::PI / per_axis as f64;
    match spec.dim() {
        1 => (0..per_axis).map(|i| [i as f64 * step, 0.0]).collect(),
        _ => {
            let mut grid = Vec::with_capacity(per_axis * per_axis);
            for i in 0..per_axis {
                for j in 0..per_axis {
                    grid.push([i as f64 * step, j as f64 * step]);
                }
            }
            grid
        }
    }
}

/// Unit directions: both signs on the line, uniform angles on the circle.
pub fn default_omega_grid(spec: ManifoldSpec, resolution: usize) -> Vec<[f64; 2]> {
    match spec.dim() {
        1 => vec![[1.0, 0.0], [-1.0, 0.0]],
        _ => (0..resolution)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                [theta.cos(), theta.sin()]
            })
            .collect(),
    }
}

/// Scan `|det principal_symbol|` over the grids; elliptic in Petrovskii's
/// sense iff the minimum clears `delta`. A numerical certificate at grid
/// resolution, not a proof.
pub fn petrovskii_check(
    system: &PdoSystem,
    x_grid: &[[f64; 2]],
    omega_grid: &[[f64; 2]],
    delta: f64,
) -> Result<PetrovskiiReport> {
    if x_grid.is_empty() || omega_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut min_abs_det = f64::INFINITY;
    let mut argmin_x = x_grid[0];
    let mut argmin_omega = omega_grid[0];
    for &x in x_grid {
        for &omega in omega_grid {
            let m = principal_symbol(system, x, omega)?;
            let d = determinant(&m).norm();
            if d < min_abs_det {
                min_abs_det = d;
                argmin_x = x;
                argmin_omega = omega;
            }
        }
    }
    Ok(PetrovskiiReport {
        min_abs_det,
        elliptic: min_abs_det >= delta,
        delta,
        argmin_x,
        argmin_omega,
    })
}

/// Determinant by LU with partial pivoting; the matrices here are tiny.
pub fn determinant(m: &Array2<Complex64>) -> Complex64 {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap())
            .unwrap();
        if a[(piv, col)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(piv, c)];
                a[(piv, c)] = tmp;
            }
            det = -det;
        }
        det *= a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            for c in col..n {
                let sub = f * a[(col, c)];
                a[(r, c)] -= sub;
            }
        }
    }
    det
}

/// Assemble the finite-section block matrix of a system in L2 coordinates.
///
/// `M[(j, xi'), (k, xi)]` sums `c_hat(xi' - xi) * factor(xi)` over the terms
/// of `A_{j,k}`, for source and target modes in `|xi|_inf <= K`; output modes
/// beyond the band are discarded (finite-section truncation). Blocks are laid
/// out component-major: index = component * mode_count + flat mode index.
pub fn galerkin_matrix(system: &PdoSystem, band: i64) -> Array2<Complex64> {
    let spec = system.spec();
    let p = system.size();
    let mc = spec.mode_count(band);
    let dim = p * mc;
    let mut m = Array2::zeros((dim, dim));
    for k in 0..p {
        for (col_local, xi) in spec.modes(band).into_iter().enumerate() {
            let col = k * mc + col_local;
            for j in 0..p {
                let Some(sym) = system.entry(j, k) else { continue };
                for term in sym.terms() {
                    let factor = sym.term_factor(term, xi);
                    if factor.norm() == 0.0 {
                        continue;
                    }
                    for &(eta, c_hat) in &term.coeff_modes {
                        let target = [xi[0] + eta[0], xi[1] + eta[1]];
                        if spec.contains(band, target) {
                            let row = j * mc + spec.flat_index(band, target);
                            m[(row, col)] += c_hat * factor;
                        }
                    }
                }
            }
        }
    }
    m
}

/// Finite section of the formally adjoint system: the conjugate transpose in
/// the L2-orthonormal coefficient coordinates.
pub fn formal_adjoint_galerkin(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

/// Ready-made symbols and systems used across the tests and experiments.
pub mod gallery {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `d/dx` on the 1-torus: symbol `i xi`.
    pub fn derivative_1d() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![HomogeneousTerm::constant_coeff(
                1.0,
                AngularProfile::Line { plus: c64(0.0, 1.0), minus: c64(0.0, -1.0) },
            )],
            ZeroModeRule::PositiveAxis,
        )
        .expect("valid symbol")
    }

    /// `-Laplace` on the 1-torus: symbol `xi^2`.
    pub fn minus_laplace_1d() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![HomogeneousTerm::constant_coeff(
                2.0,
                AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
            )],
            ZeroModeRule::PositiveAxis,
        )
        .expect("valid symbol")
    }

    /// `1 - Laplace` on the 1-torus: symbol `1 + xi^2`.
    pub fn one_minus_laplace_1d() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![
                HomogeneousTerm::constant_coeff(
                    2.0,
                    AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
                ),
                HomogeneousTerm::constant_coeff(
                    0.0,
                    AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
                ),
            ],
            ZeroModeRule::PositiveAxis,
        )
        .expect("valid symbol")
    }

    /// The shift-Toeplitz symbol on the 1-torus: acts as `e_k -> e_{k+1}`
    /// for `k >= 0` (the zero mode counts as positive) and as the identity
    /// for `k < 0`. Fredholm of index -1. Two degree-0 terms share the top
    /// degree; their sum is the principal component.
    pub fn shift_toeplitz() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![
                HomogeneousTerm {
                    degree: 0.0,
                    coeff_modes: vec![([1, 0], c64(1.0, 0.0))],
                    angular: AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(0.0, 0.0) },
                    cutoff_radius: 1.0,
                },
                HomogeneousTerm {
                    degree: 0.0,
                    coeff_modes: vec![([0, 0], c64(1.0, 0.0))],
                    angular: AngularProfile::Line { plus: c64(0.0, 0.0), minus: c64(1.0, 0.0) },
                    cutoff_radius: 1.0,
                },
            ],
            ZeroModeRule::PositiveAxis,
        )
        .expect("valid symbol")
    }

    /// Cauchy-Riemann system on the 2-torus:
    /// `[[d_1, -d_2], [d_2, d_1]]`.
    pub fn cauchy_riemann() -> PdoSystem {
        let spec = ManifoldSpec::torus(2).unwrap();
        let d1 = || {
            ClassicalSymbol::new(
                vec![HomogeneousTerm::constant_coeff(
                    1.0,
                    AngularProfile::Circle {
                        modes: vec![(1, c64(0.0, 0.5)), (-1, c64(0.0, 0.5))],
                    },
                )],
                ZeroModeRule::PositiveAxis,
            )
            .unwrap()
        };
        let d2 = |sign: f64| {
            ClassicalSymbol::new(
                vec![HomogeneousTerm::constant_coeff(
                    1.0,
                    AngularProfile::Circle {
                        modes: vec![(1, c64(sign * 0.5, 0.0)), (-1, c64(-sign * 0.5, 0.0))],
                    },
                )],
                ZeroModeRule::PositiveAxis,
            )
            .unwrap()
        };
        PdoSystem::new(
            spec,
            2,
            vec![Some(d1()), Some(d2(-1.0)), Some(d2(1.0)), Some(d1())],
        )
        .unwrap()
    }

    /// `1 - Laplace` on the 2-torus.
    pub fn one_minus_laplace_2d() -> ClassicalSymbol {
        let all_one = AngularProfile::Circle { modes: vec![(0, c64(1.0, 0.0))] };
        ClassicalSymbol::new(
            vec![
                HomogeneousTerm::constant_coeff(2.0, all_one.clone()),
                HomogeneousTerm::constant_coeff(0.0, all_one),
            ],
            ZeroModeRule::PositiveAxis,
        )
        .unwrap()
    }

    /// `d_1` on the 2-torus: symbol `i xi_1` (not elliptic).
    pub fn d1_2d() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![HomogeneousTerm::constant_coeff(
                1.0,
                AngularProfile::Circle { modes: vec![(1, c64(0.0, 0.5)), (-1, c64(0.0, 0.5))] },
            )],
            ZeroModeRule::PositiveAxis,
        )
        .unwrap()
    }

    /// `(1 - Laplace) + 0.1 e^{i x_1} d_1` on the 2-torus: a variable
    /// coefficient elliptic perturbation.
    pub fn perturbed_laplace_2d() -> ClassicalSymbol {
        let all_one = AngularProfile::Circle { modes: vec![(0, c64(1.0, 0.0))] };
        ClassicalSymbol::new(
            vec![
                HomogeneousTerm::constant_coeff(2.0, all_one.clone()),
                HomogeneousTerm {
                    degree: 1.0,
                    coeff_modes: vec![([1, 0], c64(0.1, 0.0))],
                    angular: AngularProfile::Circle {
                        modes: vec![(1, c64(0.0, 0.5)), (-1, c64(0.0, 0.5))],
                    },
                    cutoff_radius: 1.0,
                },
                HomogeneousTerm::constant_coeff(0.0, all_one),
            ],
            ZeroModeRule::PositiveAxis,
        )
        .unwrap()
    }

    /// Multiplication by `e^{i x}` on the 1-torus.
    pub fn modulation_1d() -> ClassicalSymbol {
        ClassicalSymbol::new(
            vec![HomogeneousTerm {
                degree: 0.0,
                coeff_modes: vec![([1, 0], c64(1.0, 0.0))],
                angular: AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
                cutoff_radius: 1.0,
            }],
            ZeroModeRule::PositiveAxis,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::gallery;
    use super::*;
    use crate::refined_spaces::ManifoldSpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec1() -> ManifoldSpec {
        ManifoldSpec::torus(1).unwrap()
    }

    fn spec2() -> ManifoldSpec {
        ManifoldSpec::torus(2).unwrap()
    }

    #[test]
    fn derivative_acts_diagonally() {
        let e2 = FourierField::basis(spec1(), [2, 0]);
        let out = apply(&gallery::derivative_1d(), &e2);
        assert!((out.get([2, 0]) - c64(0.0, 2.0)).norm() < 1e-15);
        // d/dx kills constants.
        let e0 = FourierField::basis(spec1(), [0, 0]);
        let out = apply(&gallery::derivative_1d(), &e0);
        assert_eq!(out.l2_norm(), 0.0);
    }

    #[test]
    fn modulation_shifts_modes() {
        let e2 = FourierField::basis(spec1(), [2, 0]);
        let out = apply(&gallery::modulation_1d(), &e2);
        assert!((out.get([3, 0]) - c64(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(out.band(), 3);
    }

    #[test]
    fn shift_toeplitz_basis_action() {
        let sym = gallery::shift_toeplitz();
        let cases = [([-3i64, 0i64], [-3i64, 0i64]), ([2, 0], [3, 0]), ([0, 0], [1, 0])];
        for (src, dst) in cases {
            let out = apply(&sym, &FourierField::basis(spec1(), src));
            assert!(
                (out.get(dst) - c64(1.0, 0.0)).norm() < 1e-15,
                "e_{src:?} should map to e_{dst:?}"
            );
            let total: f64 = out.iter().map(|(_, v)| v.norm_sqr()).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn apply_system_diagonal_and_cr() {
        // diag(1 - Laplace, 1 - Laplace) on (e_1, 0) -> (2 e_1, 0).
        let one_minus = gallery::one_minus_laplace_1d();
        let sys = PdoSystem::new(
            spec1(),
            2,
            vec![Some(one_minus.clone()), None, None, Some(one_minus)],
        )
        .unwrap();
        let u = vec![FourierField::basis(spec1(), [1, 0]), FourierField::zero(spec1(), 1)];
        let f = apply_system(&sys, &u).unwrap();
        assert!((f[0].get([1, 0]) - c64(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(f[1].l2_norm(), 0.0);

        // Cauchy-Riemann on (e_{(1,0)}, 0) -> (i e_{(1,0)}, 0).
        let cr = gallery::cauchy_riemann();
        let u = vec![FourierField::basis(spec2(), [1, 0]), FourierField::zero(spec2(), 1)];
        let f = apply_system(&cr, &u).unwrap();
        assert!((f[0].get([1, 0]) - c64(0.0, 1.0)).norm() < 1e-14);
        assert!(f[1].l2_norm() < 1e-14);
    }

    #[test]
    fn apply_is_linear_and_homogeneous() {
        let sym = gallery::perturbed_laplace_2d();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let u = FourierField::from_fn(spec2(), 3, |_| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let v = FourierField::from_fn(spec2(), 3, |_| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let lambda = c64(0.7, -0.3);
        let mut lin = u.clone();
        lin.scale(lambda);
        lin.add_assign(&v).unwrap();
        let lhs = apply(&sym, &lin);
        let mut rhs = apply(&sym, &u);
        rhs.scale(lambda);
        rhs.add_assign(&apply(&sym, &v)).unwrap();
        let err = lhs
            .iter()
            .map(|(m, val)| (val - rhs.get(m)).norm())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn column_orders_follow_the_max_rule() {
        // [[-Laplace, d_1], [d_1, 1]] on T^2: m = (2, 1).
        let minus_lap = {
            let all_one = AngularProfile::Circle { modes: vec![(0, c64(1.0, 0.0))] };
            ClassicalSymbol::new(
                vec![HomogeneousTerm::constant_coeff(2.0, all_one)],
                ZeroModeRule::PositiveAxis,
            )
            .unwrap()
        };
        let one = {
            let all_one = AngularProfile::Circle { modes: vec![(0, c64(1.0, 0.0))] };
            ClassicalSymbol::new(
                vec![HomogeneousTerm::constant_coeff(0.0, all_one)],
                ZeroModeRule::PositiveAxis,
            )
            .unwrap()
        };
        let sys = PdoSystem::new(
            spec2(),
            2,
            vec![
                Some(minus_lap),
                Some(gallery::d1_2d()),
                Some(gallery::d1_2d()),
                Some(one),
            ],
        )
        .unwrap();
        assert_eq!(sys.column_orders(), &[2.0, 1.0]);

        // Principal matrix: [[1, i w_1], [0, 0]].
        let m = principal_symbol(&sys, [0.3, 1.1], [0.6, 0.8]).unwrap();
        assert!((m[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((m[(0, 1)] - c64(0.0, 0.6)).norm() < 1e-14);
        assert!(m[(1, 0)].norm() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15);
        // Petrovskii determinant vanishes identically.
        let report = petrovskii_check(
            &sys,
            &default_x_grid(spec2(), 0),
            &default_omega_grid(spec2(), 64),
            DEFAULT_ELLIPTICITY_DELTA,
        )
        .unwrap();
        assert!(!report.elliptic);
        assert!(report.min_abs_det < 1e-14);
    }

    #[test]
    fn petrovskii_elliptic_examples() {
        let sys = PdoSystem::scalar(spec1(), gallery::one_minus_laplace_1d()).unwrap();
        let report = petrovskii_check(
            &sys,
            &default_x_grid(spec1(), 0),
            &default_omega_grid(spec1(), 2),
            DEFAULT_ELLIPTICITY_DELTA,
        )
        .unwrap();
        assert!(report.elliptic);
        assert_relative_eq!(report.min_abs_det, 1.0, max_relative = 1e-13);

        let cr = gallery::cauchy_riemann();
        let report = petrovskii_check(
            &cr,
            &default_x_grid(spec2(), 0),
            &default_omega_grid(spec2(), 256),
            DEFAULT_ELLIPTICITY_DELTA,
        )
        .unwrap();
        assert!(report.elliptic);
        assert_relative_eq!(report.min_abs_det, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn principal_symbol_rejects_non_unit_direction() {
        let sys = PdoSystem::scalar(spec1(), gallery::minus_laplace_1d()).unwrap();
        assert!(principal_symbol(&sys, [0.0, 0.0], [2.0, 0.0]).is_err());
    }

    #[test]
    fn principal_symbol_homogeneity_limit() {
        // Full symbol at (x, t omega) over t^m converges to the principal
        // entry; exact for single-term symbols, improving for multi-term.
        let sym = gallery::perturbed_laplace_2d();
        let sys = PdoSystem::scalar(spec2(), sym.clone()).unwrap();
        let x = [0.7, 0.2];
        let omega = [0.28, 0.96];
        let principal = principal_symbol(&sys, x, omega).unwrap()[(0, 0)];
        let mut prev = f64::INFINITY;
        for t in [10.0, 100.0, 1000.0] {
            let full = sym.value_at(x, [t * omega[0], t * omega[1]]);
            let rel = (full / t.powi(2) - principal).norm() / principal.norm();
            assert!(rel < prev, "error should decrease with t");
            prev = rel;
        }
        assert!(prev <= 1e-3, "relative error {prev} at t = 1e3");

        let single = gallery::minus_laplace_1d();
        let sys1 = PdoSystem::scalar(spec1(), single.clone()).unwrap();
        let p = principal_symbol(&sys1, [0.0, 0.0], [1.0, 0.0]).unwrap()[(0, 0)];
        let full = single.value_at([0.0, 0.0], [1000.0, 0.0]);
        assert_relative_eq!((full / 1e6).re, p.re, max_relative = 1e-12);
    }

    #[test]
    fn petrovskii_verdict_stable_under_row_scaling() {
        // Scaling every equation by 2 scales |det| by 2^p; with delta
        // rescaled the same way the verdict is unchanged.
        let cr = gallery::cauchy_riemann();
        let p = cr.size() as i32;
        let scaled = {
            let mut entries = Vec::new();
            for j in 0..cr.size() {
                for k in 0..cr.size() {
                    entries.push(cr.entry(j, k).map(|sym| {
                        let mut sym = sym.clone();
                        let terms: Vec<HomogeneousTerm> = sym
                            .terms()
                            .iter()
                            .map(|t| {
                                let mut t = t.clone();
                                for (_, c) in &mut t.coeff_modes {
                                    *c *= 2.0;
                                }
                                t
                            })
                            .collect();
                        sym = ClassicalSymbol::new(terms, sym.zero_mode()).unwrap();
                        sym
                    }));
                }
            }
            PdoSystem::new(spec2(), cr.size(), entries).unwrap()
        };
        let omega = default_omega_grid(spec2(), 64);
        let x = default_x_grid(spec2(), 0);
        let base = petrovskii_check(&cr, &x, &omega, DEFAULT_ELLIPTICITY_DELTA).unwrap();
        let double = petrovskii_check(
            &scaled,
            &x,
            &omega,
            DEFAULT_ELLIPTICITY_DELTA * 2f64.powi(p),
        )
        .unwrap();
        assert_eq!(base.elliptic, double.elliptic);
        assert_relative_eq!(
            double.min_abs_det,
            base.min_abs_det * 2f64.powi(p),
            max_relative = 1e-12
        );
    }

    #[test]
    fn galerkin_diag_example() {
        // 1 - Laplace at K = 2: diag(5, 2, 1, 2, 5).
        let sys = PdoSystem::scalar(spec1(), gallery::one_minus_laplace_1d()).unwrap();
        let m = galerkin_matrix(&sys, 2);
        let expected = [5.0, 2.0, 1.0, 2.0, 5.0];
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { expected[i] } else { 0.0 };
                assert_abs_diff_eq!(m[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(m[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn galerkin_modulation_is_subdiagonal() {
        let sys = PdoSystem::scalar(spec1(), gallery::modulation_1d()).unwrap();
        let m = galerkin_matrix(&sys, 2);
        for row in 0..5 {
            for col in 0..5 {
                let want = if row == col + 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m[(row, col)].re, want, epsilon = 1e-14);
            }
        }
        // Adjoint is the superdiagonal shift, and the involution holds.
        let adj = formal_adjoint_galerkin(&m);
        for row in 0..5 {
            for col in 0..5 {
                let want = if col == row + 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(adj[(row, col)].re, want, epsilon = 1e-14);
            }
        }
        let back = formal_adjoint_galerkin(&adj);
        assert!(back.iter().zip(m.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn galerkin_shift_toeplitz_blocks() {
        // Identity on xi < 0, subdiagonal on xi >= 0; the column xi = K maps
        // outside the band and is zero after truncation.
        let sys = PdoSystem::scalar(spec1(), gallery::shift_toeplitz()).unwrap();
        let k = 2i64;
        let m = galerkin_matrix(&sys, k);
        let idx = |xi: i64| (xi + k) as usize;
        for xi in -k..0 {
            assert_abs_diff_eq!(m[(idx(xi), idx(xi))].re, 1.0, epsilon = 1e-14);
        }
        for xi in 0..k {
            assert_abs_diff_eq!(m[(idx(xi + 1), idx(xi))].re, 1.0, epsilon = 1e-14);
        }
        let top_col: f64 = (0..5).map(|r| m[(r, idx(k))].norm()).sum();
        assert_eq!(top_col, 0.0);
        // Column sums: each column has exactly one unit entry except xi = K.
        let ones: usize = m.iter().filter(|v| (v.norm() - 1.0).abs() < 1e-14).count();
        assert_eq!(ones, 4);
    }

    #[test]
    fn galerkin_matches_apply_inside_band() {
        // For band-limited input with K_u + B <= K the finite section and
        // the quantized application agree exactly.
        let sys = PdoSystem::scalar(spec2(), gallery::perturbed_laplace_2d()).unwrap();
        let k_u = 3i64;
        let k = k_u + sys.bandwidth();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = FourierField::from_fn(spec2(), k_u, |_| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let direct = apply_system(&sys, std::slice::from_ref(&u)).unwrap();

        let m = galerkin_matrix(&sys, k);
        let spec = spec2();
        let mc = spec.mode_count(k);
        let mut vec_in = vec![Complex64::new(0.0, 0.0); mc];
        for (mode, v) in u.iter() {
            vec_in[spec.flat_index(k, mode)] = v;
        }
        let mut vec_out = vec![Complex64::new(0.0, 0.0); mc];
        for row in 0..mc {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..mc {
                acc += m[(row, col)] * vec_in[col];
            }
            vec_out[row] = acc;
        }
        let err = spec
            .modes(k)
            .into_iter()
            .map(|mode| (direct[0].get(mode) - vec_out[spec.flat_index(k, mode)]).norm())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-12, "finite section disagrees with apply: {err}");
    }

    #[test]
    fn symbol_validation_errors() {
        // Degrees must not increase.
        let t2 = HomogeneousTerm::constant_coeff(
            2.0,
            AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
        );
        let t3 = HomogeneousTerm::constant_coeff(
            3.0,
            AngularProfile::Line { plus: c64(1.0, 0.0), minus: c64(1.0, 0.0) },
        );
        assert!(ClassicalSymbol::new(vec![t2.clone(), t3], ZeroModeRule::PositiveAxis).is_err());
        // Equal degrees are allowed (the principal component is their sum).
        assert!(ClassicalSymbol::new(vec![t2.clone(), t2.clone()], ZeroModeRule::PositiveAxis)
            .is_ok());
        // Top profile must not vanish.
        let zero_profile = HomogeneousTerm::constant_coeff(
            1.0,
            AngularProfile::Line { plus: c64(0.0, 0.0), minus: c64(0.0, 0.0) },
        );
        assert!(
            ClassicalSymbol::new(vec![zero_profile], ZeroModeRule::PositiveAxis).is_err()
        );
        // Empty term list.
        assert!(ClassicalSymbol::new(vec![], ZeroModeRule::PositiveAxis).is_err());
        // Column of zeros.
        let sym2 =
            ClassicalSymbol::new(vec![t2.clone()], ZeroModeRule::PositiveAxis).unwrap();
        assert!(PdoSystem::new(
            spec1(),
            2,
            vec![Some(sym2.clone()), None, Some(sym2), None]
        )
        .is_err());
        // Wrong angular dimension for the manifold.
        let circle = HomogeneousTerm::constant_coeff(
            1.0,
            AngularProfile::Circle { modes: vec![(0, c64(1.0, 0.0))] },
        );
        let sym = ClassicalSymbol::new(vec![circle], ZeroModeRule::PositiveAxis).unwrap();
        assert!(PdoSystem::scalar(spec1(), sym).is_err());
    }

    #[test]
    fn apply_system_dimension_errors() {
        let sys = PdoSystem::scalar(spec1(), gallery::minus_laplace_1d()).unwrap();
        let u2 = vec![FourierField::zero(spec1(), 2), FourierField::zero(spec1(), 2)];
        assert!(apply_system(&sys, &u2).is_err());
        let wrong_spec = vec![FourierField::zero(spec2(), 2)];
        assert!(apply_system(&sys, &wrong_spec).is_err());
    }

    #[test]
    fn radial_cutoff_shape() {
        assert_eq!(radial_cutoff(0.4, 1.0), 0.0);
        assert_eq!(radial_cutoff(0.5, 1.0), 0.0);
        assert_eq!(radial_cutoff(1.0, 1.0), 1.0);
        assert_eq!(radial_cutoff(7.3, 1.0), 1.0);
        let mid = radial_cutoff(0.75, 1.0);
        assert!(mid > 0.0 && mid < 1.0);
        // Monotone on the transition.
        assert!(radial_cutoff(0.8, 1.0) > radial_cutoff(0.7, 1.0));
    }
}
