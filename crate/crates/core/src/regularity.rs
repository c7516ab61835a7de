//! Discrete Dirichlet problems Au = f in a ball with exterior data on a
//! collar, and measurement of the oscillation decay over intrinsic balls.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::quadrature::{integrate, GL4_NODES, GL4_WEIGHTS};
use crate::scale::ScaleCalculus;

/// Largest interior system solved densely.
pub const MAX_UNKNOWNS: usize = 20_000;
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Annuli with fewer nodes are left out of the fit.
pub const MIN_ANNULUS_NODES: usize = 8;
pub const MIN_USABLE_ANNULI: usize = 4;

/// Lattice x = center + (k − offset)·Δx on the ball B_r(center) plus a
/// collar of exterior nodes out to r + collar.
#[derive(Clone, Debug)]
pub struct GridProblem {
    kernel: JumpKernel,
    center: Vec<f64>,
    r: f64,
    dx: f64,
    collar: f64,
    interior: Vec<Vec<f64>>,
    exterior: Vec<Vec<f64>>,
    interior_idx: Vec<Vec<i64>>,
    exterior_idx: Vec<Vec<i64>>,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl GridProblem {
    /// `nodes` interior nodes across a diameter (Δx = 2r/(nodes + 1)).
    /// The collar has width min(R₀, 1) and the kernel is cut off beyond it.
    pub fn new(kernel: JumpKernel, center: &[f64], r: f64, nodes: usize) -> Result<Self> {
        let d = kernel.dim();
        if !(d == 1 || d == 2) {
            return Err(Error::Config(format!("grid problems support d ∈ {{1, 2}}, got {d}")));
        }
        if center.len() != d {
            return Err(Error::domain("center dimension does not match the kernel"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain("solve radius must be positive"));
        }
        let dx = 2.0 * r / (nodes as f64 + 1.0);
        // d = 2 at r/64 would need ~1.3·10⁴ dense unknowns
        let per_radius = if d == 1 { 64.0 } else { 16.0 };
        if dx > r / per_radius {
            return Err(Error::Config(format!("Δx = {dx} must not exceed r/{per_radius}")));
        }
        let collar = kernel.support().min(1.0);
        let outer = r + collar;
        let k = ((outer + r) / dx).ceil() as i64 + 1;
        let shift = (nodes as f64 + 1.0) / 2.0;
        let pos = |i: i64| (i as f64 - shift) * dx;
        let mut interior = Vec::new();
        let mut exterior = Vec::new();
        let mut interior_idx = Vec::new();
        let mut exterior_idx = Vec::new();
        let lo = -k;
        let hi = nodes as i64 + 1 + k;
        let mut visit = |idx: Vec<i64>| {
            let off: Vec<f64> = idx.iter().map(|&i| pos(i)).collect();
            let n = off.iter().map(|v| v * v).sum::<f64>().sqrt();
            let p: Vec<f64> = off.iter().zip(center).map(|(o, c)| o + c).collect();
            if n < r - 1e-12 * r {
                interior.push(p);
                interior_idx.push(idx);
            } else if n <= outer {
                exterior.push(p);
                exterior_idx.push(idx);
            }
        };
        if d == 1 {
            for i in lo..=hi {
                visit(vec![i]);
            }
        } else {
            for i in lo..=hi {
                for j in lo..=hi {
                    visit(vec![i, j]);
                }
            }
        }
        if interior.len() > MAX_UNKNOWNS {
            return Err(Error::Config(format!(
                "{} unknowns exceed the dense-solver limit {MAX_UNKNOWNS}",
                interior.len()
            )));
        }
        let (ni, ne) = (interior.len(), exterior.len());
        Ok(GridProblem {
            kernel,
            center: center.to_vec(),
            r,
            dx,
            collar,
            interior,
            exterior,
            interior_idx,
            exterior_idx,
            f: vec![0.0; ni],
            g: vec![0.0; ne],
        })
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn interior_points(&self) -> &[Vec<f64>] {
        &self.interior
    }

    pub fn exterior_points(&self) -> &[Vec<f64>] {
        &self.exterior
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn set_f(&mut self, f: Vec<f64>) -> Result<()> {
        if f.len() != self.interior.len() {
            return Err(Error::Config(format!("f has {} values, expected {}", f.len(), self.interior.len())));
        }
        self.f = f;
        Ok(())
    }

    pub fn set_g(&mut self, g: Vec<f64>) -> Result<()> {
        if g.len() != self.exterior.len() {
            return Err(Error::Config(format!("g has {} values, expected {}", g.len(), self.exterior.len())));
        }
        self.g = g;
        Ok(())
    }

    pub fn with_f(mut self, f: impl Fn(&[f64]) -> f64) -> Self {
        self.f = self.interior.iter().map(|p| f(p)).collect();
        self
    }

    pub fn with_g(mut self, g: impl Fn(&[f64]) -> f64) -> Self {
        self.g = self.exterior.iter().map(|p| g(p)).collect();
        self
    }

    /// Weights by lattice offset: ∫ over the offset cell of the kernel,
    /// cut off at min(support, collar), with the self cell folded into
    /// the nearest neighbours as a discrete Laplacian.
    fn weight_table(&self) -> Result<HashMap<Vec<i64>, f64>> {
        let calc = self.kernel.calculus();
        let cut = self.kernel.support().min(self.collar);
        let dx = self.dx;
        let kmax = (cut / dx).ceil() as i64 + 1;
        let mut table = HashMap::new();
        match self.dim() {
            1 => {
                let big_l = |s: f64| -> Result<f64> {
                    if s >= cut {
                        return Ok(0.0);
                    }
                    Ok(calc.eval_l(s)? - calc.l_or_zero(cut)?)
                };
                for p in 1..=kmax {
                    let lo = (p as f64 - 0.5) * dx;
                    let hi = (p as f64 + 0.5) * dx;
                    let w = big_l(lo)? - big_l(hi)?;
                    if w > 0.0 {
                        table.insert(vec![p], w);
                        table.insert(vec![-p], w);
                    }
                }
                let self_term = calc.second_moment(0.5 * dx)? / (dx * dx);
                for p in [1, -1] {
                    *table.entry(vec![p]).or_insert(0.0) += self_term;
                }
            }
            _ => {
                let offsets: Vec<(i64, i64)> = (0..=kmax).flat_map(|p| (0..=p).map(move |q| (p, q))).collect();
                let weights: Vec<f64> = offsets
                    .par_iter()
                    .map(|&(p, q)| if p == 0 && q == 0 { 0.0 } else { self.cell_weight_2d(p, q, cut) })
                    .collect();
                for (&(p, q), &w) in offsets.iter().zip(&weights) {
                    if w <= 0.0 {
                        continue;
                    }
                    for (a, b) in [(p, q), (q, p)] {
                        for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                            table.insert(vec![sa * a, sb * b], w);
                        }
                    }
                }
                let m_cell = self.self_cell_moment_2d(cut)?;
                let self_term = m_cell / (4.0 * dx * dx);
                for key in [vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]] {
                    *table.entry(key).or_insert(0.0) += self_term;
                }
            }
        }
        Ok(table)
    }

    fn cell_weight_2d(&self, p: i64, q: i64, cut: f64) -> f64 {
        let dx = self.dx;
        let sub = if p.abs().max(q.abs()) <= 2 { 8 } else if p.abs().max(q.abs()) <= 8 { 2 } else { 1 };
        let h = dx / sub as f64;
        let mut acc = 0.0;
        for a in 0..sub {
            for b in 0..sub {
                let x0 = (p as f64 - 0.5) * dx + a as f64 * h;
                let y0 = (q as f64 - 0.5) * dx + b as f64 * h;
                for (xi, wx) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                    for (yi, wy) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                        let x = x0 + 0.5 * h * (1.0 + xi);
                        let y = y0 + 0.5 * h * (1.0 + yi);
                        let s = x.hypot(y);
                        if s < cut {
                            acc += wx * wy * self.kernel.j(s);
                        }
                    }
                }
            }
        }
        acc * 0.25 * h * h
    }

    /// ∫ over the square [−Δx/2, Δx/2]² of |h|² j(|h|) dh.
    fn self_cell_moment_2d(&self, cut: f64) -> Result<f64> {
        let calc = self.kernel.calculus();
        let half = 0.5 * self.dx;
        let disc = 2.0 * std::f64::consts::PI * calc.second_moment(half)?;
        let tol = 1e-10;
        let corner = |th: f64| {
            let top = (half / th.cos()).min(cut);
            if top <= half {
                return 0.0;
            }
            integrate(|s| s * self.kernel.ell_hat(s), half, top, tol, 0.0).map(|i| i.value).unwrap_or(f64::NAN)
        };
        let c = integrate(corner, 0.0, std::f64::consts::FRAC_PI_4, tol, 0.0)?.value;
        if !c.is_finite() {
            return Err(Error::numeric("self-cell moment quadrature failed", f64::INFINITY));
        }
        Ok(disc + 8.0 * c)
    }

    /// Rows of the discrete operator at the interior nodes, split into the
    /// interior block (with diagonal) and the exterior block.
    pub fn assemble(&self) -> Result<OperatorMatrix> {
        let table = self.weight_table()?;
        let ni = self.interior.len();
        let ne = self.exterior.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..ni)
            .into_par_iter()
            .map(|i| {
                let ci = &self.interior_idx[i];
                let xi = &self.interior[i];
                let weight = |cj: &[i64], xj: &[f64]| -> f64 {
                    let off: Vec<i64> = cj.iter().zip(ci).map(|(a, b)| a - b).collect();
                    match table.get(&off) {
                        Some(w) => {
                            let h: Vec<f64> = xj.iter().zip(xi).map(|(a, b)| a - b).collect();
                            w * self.kernel.symmetric_coefficient(xi, &h)
                        }
                        None => 0.0,
                    }
                };
                let mut a_int = vec![0.0; ni];
                let mut a_ext = vec![0.0; ne];
                for j in 0..ni {
                    if j != i {
                        a_int[j] = weight(&self.interior_idx[j], &self.interior[j]);
                    }
                }
                for j in 0..ne {
                    a_ext[j] = weight(&self.exterior_idx[j], &self.exterior[j]);
                }
                let sum: f64 = a_int.iter().sum::<f64>() + a_ext.iter().sum::<f64>();
                a_int[i] = -sum;
                (a_int, a_ext)
            })
            .collect();
        let mut int_buf = Vec::with_capacity(ni * ni);
        let mut ext_buf = Vec::with_capacity(ni * ne);
        for (a, b) in rows {
            int_buf.extend(a);
            ext_buf.extend(b);
        }
        Ok(OperatorMatrix {
            interior: DMatrix::from_row_slice(ni, ni, &int_buf),
            exterior: DMatrix::from_row_slice(ni, ne, &ext_buf),
        })
    }

    /// Assemble, factor and solve with the stored f and g.
    pub fn solve(&self) -> Result<GridSolution> {
        let solver = Solver::new(self)?;
        solver.solve(&self.f, &self.g)
    }
}

/// Interior rows of the discrete operator: (Au)_i = Σ_j A_ij u_j + Σ_k E_ik g_k.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub interior: DMatrix<f64>,
    pub exterior: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn apply(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let v = &self.interior * DVector::from_column_slice(u) + &self.exterior * DVector::from_column_slice(g);
        v.iter().copied().collect()
    }

    /// max_i |Σ_j A_ij + Σ_k E_ik| relative to the largest diagonal entry.
    pub fn constant_defect(&self) -> f64 {
        let n = self.interior.nrows();
        let scale = (0..n).map(|i| self.interior[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        (0..n)
            .map(|i| (self.interior.row(i).sum() + self.exterior.row(i).sum()).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Most negative off-diagonal entry (0 if none).
    pub fn min_off_diagonal(&self) -> f64 {
        let n = self.interior.nrows();
        let mut m = self.exterior.iter().copied().fold(0.0, f64::min);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.min(self.interior[(i, j)]);
                }
            }
        }
        m
    }

    /// max |A_ij − A_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let a = &self.interior;
        let scale = a.amax().max(1e-300);
        (a - a.transpose()).amax() / scale
    }
}

/// A factored operator for repeated solves with different data.
pub struct Solver {
    matrix: OperatorMatrix,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    interior: Vec<Vec<f64>>,
    exterior: Vec<Vec<f64>>,
    center: Vec<f64>,
    r: f64,
    dx: f64,
}

impl Solver {
    pub fn new(problem: &GridProblem) -> Result<Self> {
        let matrix = problem.assemble()?;
        let lu = matrix.interior.clone().lu();
        Ok(Solver {
            matrix,
            lu,
            interior: problem.interior.clone(),
            exterior: problem.exterior.clone(),
            center: problem.center.clone(),
            r: problem.r,
            dx: problem.dx,
        })
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    /// Interior values with A u = f in the ball and u = g on the collar.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<GridSolution> {
        let (ni, ne) = (self.interior.len(), self.exterior.len());
        if f.len() != ni || g.len() != ne {
            return Err(Error::Config("data length does not match the grid".into()));
        }
        let gv = DVector::from_column_slice(g);
        let rhs = DVector::from_column_slice(f) - &self.matrix.exterior * &gv;
        let singular = || {
            let diag = self.lu.u().diagonal();
            let k = diag.iamin();
            Error::Singular(format!("zero pivot: |U_kk| = {:e} at row {k}", diag[k].abs()))
        };
        let mut u = self.lu.solve(&rhs).ok_or_else(singular)?;
        let scale = self.matrix.interior.amax() * u.amax().max(1e-300) + rhs.amax();
        let mut res = (&rhs - &self.matrix.interior * &u).amax() / scale.max(1e-300);
        for _ in 0..3 {
            if res <= RESIDUAL_TOL {
                break;
            }
            let r = &rhs - &self.matrix.interior * &u;
            u += self.lu.solve(&r).ok_or_else(singular)?;
            res = (&rhs - &self.matrix.interior * &u).amax() / scale.max(1e-300);
        }
        if !(res <= RESIDUAL_TOL) {
            return Err(Error::numeric("dense solve residual above tolerance", res));
        }
        Ok(GridSolution {
            interior: self.interior.clone(),
            exterior: self.exterior.clone(),
            u: u.iter().copied().collect(),
            g: g.to_vec(),
            f: f.to_vec(),
            center: self.center.clone(),
            r: self.r,
            dx: self.dx,
            residual: res,
        })
    }
}

#[derive(Clone, Debug)]
pub struct GridSolution {
    pub interior: Vec<Vec<f64>>,
    pub exterior: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub center: Vec<f64>,
    pub r: f64,
    pub dx: f64,
    /// Relative residual of the final solve.
    pub residual: f64,
}

impl GridSolution {
    /// sup |u| over interior and collar nodes.
    pub fn sup_u(&self) -> f64 {
        self.u.iter().chain(&self.g).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_f(&self) -> f64 {
        self.f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The same solution with values multiplied by c (f and g included).
    pub fn scaled(&self, c: f64) -> GridSolution {
        let mut s = self.clone();
        s.u.iter_mut().chain(s.g.iter_mut()).chain(s.f.iter_mut()).for_each(|v| *v *= c);
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntrinsicRadii {
    pub radii: Vec<f64>,
    /// The sequence ended early because L⁻¹ ran out of range.
    pub truncated: bool,
}

/// r_n = L⁻¹(a^{n−1} L(r/2)), n = 1..n_max.
pub fn intrinsic_radii(calc: &ScaleCalculus, a: f64, r: f64, n_max: usize) -> Result<IntrinsicRadii> {
    if !(a > 2.0) {
        return Err(Error::domain(format!("intrinsic radii need a > 2, got {a}")));
    }
    let base = calc.eval_l(0.5 * r)?;
    let mut radii = vec![0.5 * r];
    let mut truncated = false;
    for n in 1..n_max {
        let y = a.powi(n as i32) * base;
        match calc.invert_l(y) {
            Ok(v) if v >= calc.r_min() && v < *radii.last().unwrap() => radii.push(v),
            Ok(_) | Err(Error::Range(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    radii.truncate(n_max.max(1));
    Ok(IntrinsicRadii { radii, truncated })
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusRow {
    pub n: usize,
    pub r_n: f64,
    pub osc: f64,
    pub nodes: usize,
    pub used: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub a: f64,
    pub rows: Vec<AnnulusRow>,
    /// Oscillation vanished (constant solution); no fit.
    pub degenerate: bool,
    /// −slope of ln osc_n against ln L(r_n).
    pub beta_fit: f64,
    /// Per-step decay factor: osc_n ≈ C b^{−n}.
    pub b_fit: f64,
    /// 2(1 − 1/b).
    pub theta: f64,
    /// Oscillations strictly decrease over the used annuli.
    pub strictly_decreasing: bool,
    /// ρ = min(r, R₀/2): pairs are drawn from B_{ρ/4}(x0).
    pub rho: f64,
    /// sup |u(x) − u(y)| L(|x − y|)^β over pairs in B_{ρ/4}.
    pub holder_quotient: f64,
    /// holder_quotient / (L(ρ)^β ‖u‖_∞ + L(ρ)^{β−1} ‖f‖_∞).
    pub rhs_bound_empirical: f64,
    pub sup_u: f64,
    pub sup_f: f64,
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Oscillation of u over the intrinsic balls B_{r_n}(x0) and the fitted
/// decay. The first annulus and annuli with fewer than 8 nodes are left out.
pub fn measure_regularity(sol: &GridSolution, calc: &ScaleCalculus, a: f64, x0: &[f64]) -> Result<RegularityReport> {
    if x0.len() != sol.center.len() {
        return Err(Error::domain("x0 dimension does not match the grid"));
    }
    let dist = |p: &[f64]| p.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let from_center = dist(&sol.center);
    if from_center >= 0.5 * sol.r {
        return Err(Error::domain("x0 must lie in B_{r/2} of the grid center"));
    }
    let radii = intrinsic_radii(calc, a, sol.r - from_center, 64)?;
    let sup_u = sol.sup_u();
    let sup_f = sol.sup_f();
    let mut rows = Vec::new();
    for (k, &rn) in radii.radii.iter().enumerate() {
        let vals: Vec<f64> =
            sol.interior.iter().zip(&sol.u).filter(|(p, _)| dist(p) < rn).map(|(_, v)| *v).collect();
        if vals.is_empty() {
            break;
        }
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(AnnulusRow { n: k + 1, r_n: rn, osc: max - min, nodes: vals.len(), used: k > 0 && vals.len() >= MIN_ANNULUS_NODES });
    }
    let rho = sol.r.min(0.5 * calc.r0());
    let degenerate = rows.iter().all(|r| r.osc <= 1e-14 * (1.0 + sup_u));
    let mut report = RegularityReport {
        a,
        rows,
        degenerate,
        beta_fit: f64::NAN,
        b_fit: f64::NAN,
        theta: f64::NAN,
        strictly_decreasing: false,
        rho,
        holder_quotient: 0.0,
        rhs_bound_empirical: f64::NAN,
        sup_u,
        sup_f,
    };
    if degenerate {
        return Ok(report);
    }
    let used: Vec<&AnnulusRow> = report.rows.iter().filter(|r| r.used).collect();
    if used.len() < MIN_USABLE_ANNULI {
        return Err(Error::InsufficientResolution(format!(
            "{} usable intrinsic annuli, need {MIN_USABLE_ANNULI}",
            used.len()
        )));
    }
    report.strictly_decreasing = used.windows(2).all(|w| w[1].osc < w[0].osc);
    let ns: Vec<f64> = used.iter().map(|r| r.n as f64).collect();
    let log_osc: Vec<f64> = used.iter().map(|r| r.osc.max(1e-300).ln()).collect();
    let log_l: Vec<f64> = used.iter().map(|r| calc.eval_l(r.r_n).map(f64::ln)).collect::<Result<_>>()?;
    report.b_fit = (-least_squares_slope(&ns, &log_osc)).exp();
    report.beta_fit = -least_squares_slope(&log_l, &log_osc);
    report.theta = 2.0 * (1.0 - 1.0 / report.b_fit);

    let beta = report.beta_fit;
    let inner: Vec<(&Vec<f64>, f64)> =
        sol.interior.iter().zip(&sol.u).filter(|(p, _)| dist(p) < 0.25 * rho).map(|(p, v)| (p, *v)).collect();
    let stride = (inner.len() / 400).max(1);
    let sample: Vec<&(&Vec<f64>, f64)> = inner.iter().step_by(stride).collect();
    let mut hq = 0.0_f64;
    for (i, (p, u)) in sample.iter().enumerate() {
        for (q, v) in sample.iter().skip(i + 1) {
            let h = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if h > 0.0 && h < calc.r0() {
                hq = hq.max((u - v).abs() * calc.eval_l(h)?.powf(beta));
            }
        }
    }
    report.holder_quotient = hq;
    let l_rho = if rho < calc.r0() { calc.eval_l(rho)? } else { calc.eval_l(0.5 * calc.r0())? };
    let rhs = l_rho.powf(beta) * sup_u + l_rho.powf(beta - 1.0) * sup_f;
    report.rhs_bound_empirical = hq / rhs;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::TailRule;
    use crate::profile::KernelProfile;

    fn problem(nodes: usize) -> GridProblem {
        let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
        let k = JumpKernel::new(calc, 1, TailRule::None).unwrap();
        GridProblem::new(k, &[0.0], 0.5, nodes).unwrap()
    }

    #[test]
    fn constants_are_harmonic() {
        let p = problem(255).with_g(|_| 2.5);
        let s = p.solve().unwrap();
        assert!(s.u.iter().all(|v| (v - 2.5).abs() < 1e-10));
        let m = p.assemble().unwrap();
        assert!(m.constant_defect() < 1e-12);
        assert!(m.min_off_diagonal() >= 0.0);
        assert!(m.asymmetry() < 1e-12);
    }

    #[test]
    fn radii_closed_form() {
        let calc = ScaleCalculus::closed_form(KernelProfile::constant(1.0).unwrap()).unwrap();
        let r = intrinsic_radii(&calc, 4.0, 0.5, 3).unwrap();
        assert_eq!(r.radii[0], 0.25);
        assert!((r.radii[1] - 0.25f64.powi(4)).abs() < 1e-14);
        for w in r.radii.windows(2) {
            assert!((calc.phi(4.0, w[1]).unwrap() - w[0]).abs() < 1e-10 * w[0]);
        }
    }

    #[test]
    fn two_dimensional_constants() {
        let calc = ScaleCalculus::closed_form(KernelProfile::constant(0.25).unwrap()).unwrap();
        let k = JumpKernel::new(calc, 2, TailRule::None).unwrap();
        let p = GridProblem::new(k, &[0.0, 0.0], 0.2, 31).unwrap().with_g(|_| -1.0);
        let s = p.solve().unwrap();
        assert!(s.u.iter().all(|v| (v + 1.0).abs() < 1e-10));
    }
}
