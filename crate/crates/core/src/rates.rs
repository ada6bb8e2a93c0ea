//! Single-letter rate functions over finite alphabets: the coordination
//! rate-distortion function, the side-information (Wyner-Ziv style) rate,
//! and lossy coding under a family of distortion measures.
//!
//! The convex problems (coordination, multi-distortion) are solved by
//! conditional gradient: each linearized subproblem is an LP over joint
//! tables with the source marginal pinned, so no projection onto the
//! seminorm ball is ever needed. The side-information objective is not
//! convex; it is attacked per reconstruction map by multi-restart coordinate
//! descent and reported as best-found.

use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::lp::{self, Lp, LpOutcome, LpRow, Sense};
use crate::math::{log2, pow};
use crate::pmf::JointPmf;
use crate::rng::SplitMix64;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

const GAP_TOL: f64 = 1e-6;
const MAX_FW_ITERS: usize = 10_000;
const FEAS_TOL: f64 = 1e-9;
/// Exact-path alphabet ceiling.
const MAX_CELLS: usize = 64;

#[derive(Debug, Clone)]
pub struct CoordinationProblem {
    /// Source marginal P_X.
    pub source: Vec<f64>,
    /// Target conditional P_{Y|X}, one stochastic row per source symbol.
    pub kernel: Vec<Vec<f64>>,
    /// Test-function class on the product alphabet (pairing x * |Y| + y).
    pub class: FunctionClass,
    pub delta: f64,
}

impl CoordinationProblem {
    pub fn target_joint(&self) -> Result<JointPmf> {
        JointPmf::from_marginal_kernel(&self.source, &self.kernel)
    }
}

#[derive(Debug, Clone)]
pub struct RateSolution {
    pub rate_bits: f64,
    pub q: JointPmf,
    /// Final conditional-gradient surrogate gap, in bits.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Seminorm of (q - base) restricted to the classes with a polyhedral fast
/// path on finite product alphabets.
pub(crate) fn class_deviation(class: &FunctionClass, q: &[f64], base: &[f64]) -> Result<f64> {
    match class {
        FunctionClass::AllFunctions { alphabet } => {
            debug_assert_eq!(*alphabet, q.len());
            Ok(q.iter().zip(base.iter()).map(|(a, b)| (a - b).abs()).sum())
        }
        FunctionClass::ConvexHull { table } => {
            let mut best = 0.0f64;
            for row in table {
                if row.len() != q.len() {
                    return Err(Error::DimensionMismatch {
                        expected: q.len(),
                        got: row.len(),
                    });
                }
                let v: f64 = row
                    .iter()
                    .zip(q.iter().zip(base.iter()))
                    .map(|(f, (a, b))| f * (a - b))
                    .sum();
                best = best.max(v.abs());
            }
            Ok(best)
        }
        other => Err(Error::UnsupportedExact(format!(
            "rate solvers need a class with a polyhedral ball on the finite product alphabet, got {}",
            other.id()
        ))),
    }
}

/// The seminorm-ball / linear constraints of a rate problem, in LP form.
enum BallKind {
    /// ||q - center||_F <= radius via l1 epigraph variables.
    L1 { center: Vec<f64>, radius: f64 },
    /// |f_i . (q - center)| <= radius per tabulated function.
    Hull {
        table: Vec<Vec<f64>>,
        center: Vec<f64>,
        radius: f64,
    },
    /// rho_k . q <= level_k.
    Linear { rows: Vec<Vec<f64>>, levels: Vec<f64> },
}

struct FwSpec {
    nx: usize,
    ny: usize,
    source: Vec<f64>,
    ball: BallKind,
}

impl FwSpec {
    fn k(&self) -> usize {
        self.nx * self.ny
    }

    fn n_aux(&self) -> usize {
        match self.ball {
            BallKind::L1 { .. } => self.k(),
            _ => 0,
        }
    }

    /// Rows shared by every subproblem: marginal equalities plus the ball.
    fn constraint_rows(&self) -> Vec<LpRow> {
        let k = self.k();
        let nv = k + self.n_aux();
        let mut rows = Vec::new();
        for x in 0..self.nx {
            let mut coeffs = vec![0.0; nv];
            for y in 0..self.ny {
                coeffs[x * self.ny + y] = 1.0;
            }
            rows.push(LpRow {
                coeffs,
                sense: Sense::Eq,
                rhs: self.source[x],
            });
        }
        match &self.ball {
            BallKind::L1 { center, radius } => {
                for i in 0..k {
                    let mut up = vec![0.0; nv];
                    up[i] = 1.0;
                    up[k + i] = -1.0;
                    rows.push(LpRow {
                        coeffs: up,
                        sense: Sense::Le,
                        rhs: center[i],
                    });
                    let mut dn = vec![0.0; nv];
                    dn[i] = -1.0;
                    dn[k + i] = -1.0;
                    rows.push(LpRow {
                        coeffs: dn,
                        sense: Sense::Le,
                        rhs: -center[i],
                    });
                }
                let mut sum_t = vec![0.0; nv];
                for i in 0..k {
                    sum_t[k + i] = 1.0;
                }
                rows.push(LpRow {
                    coeffs: sum_t,
                    sense: Sense::Le,
                    rhs: *radius,
                });
            }
            BallKind::Hull {
                table,
                center,
                radius,
            } => {
                for f in table {
                    let fc: f64 = f.iter().zip(center.iter()).map(|(a, b)| a * b).sum();
                    let mut up = vec![0.0; nv];
                    up[..k].copy_from_slice(f);
                    rows.push(LpRow {
                        coeffs: up,
                        sense: Sense::Le,
                        rhs: radius + fc,
                    });
                    let mut dn = vec![0.0; nv];
                    for (d, &v) in dn.iter_mut().zip(f.iter()) {
                        *d = -v;
                    }
                    rows.push(LpRow {
                        coeffs: dn,
                        sense: Sense::Le,
                        rhs: radius - fc,
                    });
                }
            }
            BallKind::Linear { rows: lin, levels } => {
                for (r, &lev) in lin.iter().zip(levels.iter()) {
                    let mut coeffs = vec![0.0; nv];
                    coeffs[..k].copy_from_slice(r);
                    rows.push(LpRow {
                        coeffs,
                        sense: Sense::Le,
                        rhs: lev,
                    });
                }
            }
        }
        rows
    }

    /// argmin over the feasible polytope of <grad, q>.
    fn lp_argmin(&self, grad: &[f64]) -> Result<Option<Vec<f64>>> {
        let k = self.k();
        let mut cost = vec![0.0; k + self.n_aux()];
        cost[..k].copy_from_slice(grad);
        let lp = Lp {
            cost,
            rows: self.constraint_rows(),
        };
        match lp::solve(&lp)? {
            LpOutcome::Optimal(sol) => Ok(Some(sol.x[..k].to_vec())),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Numerical("bounded polytope reported unbounded".into())),
        }
    }
}

fn mutual_information_cells(q: &[f64], nx: usize, ny: usize) -> f64 {
    JointPmf::new(nx, ny, q.iter().map(|v| v.max(0.0)).collect::<Vec<_>>())
        .map(|j| j.mutual_information())
        .unwrap_or(0.0)
}

/// d I / d q in bits, up to an additive constant that is orthogonal to the
/// feasible directions (total mass is fixed by the marginal equalities).
fn grad_bits(q: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let tiny = 1e-18;
    let mut qx = vec![0.0; nx];
    let mut qy = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            qx[x] += q[x * ny + y];
            qy[y] += q[x * ny + y];
        }
    }
    let mut g = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let c = q[x * ny + y].max(tiny);
            g[x * ny + y] = log2(c / (qx[x].max(tiny) * qy[y].max(tiny)));
        }
    }
    g
}

/// Conditional-gradient minimization of I(Q) from a feasible start.
fn frank_wolfe(spec: &FwSpec, q0: Vec<f64>) -> Result<RateSolution> {
    let (nx, ny) = (spec.nx, spec.ny);
    let mut q = q0;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..MAX_FW_ITERS {
        iterations = it + 1;
        let g = grad_bits(&q, nx, ny);
        let s = spec
            .lp_argmin(&g)?
            .ok_or_else(|| Error::Infeasible("constraint set became empty".into()))?;
        gap = g
            .iter()
            .zip(q.iter().zip(s.iter()))
            .map(|(gi, (qi, si))| gi * (qi - si))
            .sum::<f64>();
        if gap < GAP_TOL {
            break;
        }
        let d: Vec<f64> = s.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
        let eta = line_search(&q, &d, nx, ny);
        if eta <= 0.0 {
            break;
        }
        for (qi, di) in q.iter_mut().zip(d.iter()) {
            *qi = (*qi + eta * di).max(0.0);
        }
    }
    let rate = mutual_information_cells(&q, nx, ny);
    Ok(RateSolution {
        rate_bits: rate,
        q: JointPmf::new(nx, ny, q)?,
        gap,
        iterations,
        converged: gap < GAP_TOL,
    })
}

/// Exact line search on the segment: the directional derivative of I is
/// increasing, so bisection on it finds the minimizer.
fn line_search(q: &[f64], d: &[f64], nx: usize, ny: usize) -> f64 {
    let phi_prime = |eta: f64| -> f64 {
        let tiny = 1e-18;
        let mut qx = vec![0.0; nx];
        let mut qy = vec![0.0; ny];
        let mut cells = vec![0.0; q.len()];
        for x in 0..nx {
            for y in 0..ny {
                let i = x * ny + y;
                cells[i] = (q[i] + eta * d[i]).max(0.0);
                qx[x] += cells[i];
                qy[y] += cells[i];
            }
        }
        let mut s = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let i = x * ny + y;
                s += d[i] * log2(cells[i].max(tiny) / (qx[x].max(tiny) * qy[y].max(tiny)));
            }
        }
        s
    };
    if phi_prime(0.0) >= 0.0 {
        return 0.0;
    }
    if phi_prime(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if phi_prime(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// If some product distribution P_X x r is feasible, the rate is exactly 0.
/// One LP over r decides it.
fn zero_rate_product(spec: &FwSpec) -> Result<Option<Vec<f64>>> {
    let (nx, ny) = (spec.nx, spec.ny);
    let k = nx * ny;
    // Variables: r (ny) plus l1 auxiliaries when needed.
    let n_aux = match spec.ball {
        BallKind::L1 { .. } => k,
        _ => 0,
    };
    let nv = ny + n_aux;
    let mut rows: Vec<LpRow> = Vec::new();
    let mut sum_r = vec![0.0; nv];
    for y in 0..ny {
        sum_r[y] = 1.0;
    }
    rows.push(LpRow {
        coeffs: sum_r,
        sense: Sense::Eq,
        rhs: 1.0,
    });
    match &spec.ball {
        BallKind::L1 { center, radius } => {
            for x in 0..nx {
                for y in 0..ny {
                    let i = x * ny + y;
                    let mut up = vec![0.0; nv];
                    up[y] = spec.source[x];
                    up[ny + i] = -1.0;
                    rows.push(LpRow {
                        coeffs: up,
                        sense: Sense::Le,
                        rhs: center[i],
                    });
                    let mut dn = vec![0.0; nv];
                    dn[y] = -spec.source[x];
                    dn[ny + i] = -1.0;
                    rows.push(LpRow {
                        coeffs: dn,
                        sense: Sense::Le,
                        rhs: -center[i],
                    });
                }
            }
            let mut sum_t = vec![0.0; nv];
            for i in 0..k {
                sum_t[ny + i] = 1.0;
            }
            rows.push(LpRow {
                coeffs: sum_t,
                sense: Sense::Le,
                rhs: *radius,
            });
        }
        BallKind::Hull {
            table,
            center,
            radius,
        } => {
            for f in table {
                let fc: f64 = f.iter().zip(center.iter()).map(|(a, b)| a * b).sum();
                let mut up = vec![0.0; nv];
                let mut dn = vec![0.0; nv];
                for x in 0..nx {
                    for y in 0..ny {
                        up[y] += spec.source[x] * f[x * ny + y];
                        dn[y] -= spec.source[x] * f[x * ny + y];
                    }
                }
                rows.push(LpRow {
                    coeffs: up,
                    sense: Sense::Le,
                    rhs: radius + fc,
                });
                rows.push(LpRow {
                    coeffs: dn,
                    sense: Sense::Le,
                    rhs: radius - fc,
                });
            }
        }
        BallKind::Linear { rows: lin, levels } => {
            for (r, &lev) in lin.iter().zip(levels.iter()) {
                let mut coeffs = vec![0.0; nv];
                for x in 0..nx {
                    for y in 0..ny {
                        coeffs[y] += spec.source[x] * r[x * ny + y];
                    }
                }
                rows.push(LpRow {
                    coeffs,
                    sense: Sense::Le,
                    rhs: lev,
                });
            }
        }
    }
    let lp = Lp {
        cost: vec![0.0; nv],
        rows,
    };
    match lp::solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let mut q = vec![0.0; k];
            for x in 0..nx {
                for y in 0..ny {
                    q[x * ny + y] = spec.source[x] * sol.x[y];
                }
            }
            Ok(Some(q))
        }
        _ => Ok(None),
    }
}

fn validate_source(source: &[f64]) -> Result<()> {
    if source.is_empty() {
        return Err(Error::InvalidDistribution("empty source".into()));
    }
    let s: f64 = source.iter().sum();
    if (s - 1.0).abs() > 1e-12 || source.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidDistribution("source is not a distribution".into()));
    }
    Ok(())
}

/// Minimal mutual information among joints with the source marginal within
/// distortion `delta` of the target coordination in the class seminorm.
pub fn coordination_rate(p: &CoordinationProblem) -> Result<RateSolution> {
    validate_source(&p.source)?;
    if p.delta < 0.0 {
        return Err(Error::InvalidArgument("delta must be nonnegative".into()));
    }
    let target = p.target_joint()?;
    let (nx, ny) = (target.nx(), target.ny());
    if nx * ny > MAX_CELLS {
        return Err(Error::SupportTooLarge {
            limit: MAX_CELLS,
            got: nx * ny,
        });
    }
    let ball = match &p.class {
        FunctionClass::AllFunctions { alphabet } if *alphabet == nx * ny => BallKind::L1 {
            center: target.cells().to_vec(),
            radius: p.delta,
        },
        FunctionClass::ConvexHull { table } => BallKind::Hull {
            table: table.clone(),
            center: target.cells().to_vec(),
            radius: p.delta,
        },
        other => {
            return Err(Error::UnsupportedExact(format!(
                "coordination_rate supports AllFunctions / ConvexHull on the product alphabet, got {}",
                other.id()
            )))
        }
    };
    let spec = FwSpec {
        nx,
        ny,
        source: p.source.clone(),
        ball,
    };
    if let Some(q) = zero_rate_product(&spec)? {
        return Ok(RateSolution {
            rate_bits: 0.0,
            q: JointPmf::new(nx, ny, q)?,
            gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    // The target itself is always feasible (deviation 0 <= delta).
    frank_wolfe(&spec, target.cells().to_vec())
}

#[derive(Debug, Clone)]
pub struct MultiDistortionProblem {
    pub source: Vec<f64>,
    /// Distortion tables rho: X x Y -> [0,1], row-major like the joint.
    pub distortions: Vec<Vec<f64>>,
    /// One level per distortion measure.
    pub levels: Vec<f64>,
    pub ny: usize,
}

/// Classical rate-distortion under a finite family of distortion measures:
/// convex objective, linear constraints Q(rho) <= Delta_rho.
pub fn multi_distortion_rate(p: &MultiDistortionProblem) -> Result<RateSolution> {
    validate_source(&p.source)?;
    let nx = p.source.len();
    let ny = p.ny;
    if nx * ny > MAX_CELLS {
        return Err(Error::SupportTooLarge {
            limit: MAX_CELLS,
            got: nx * ny,
        });
    }
    if p.distortions.len() != p.levels.len() || p.distortions.is_empty() {
        return Err(Error::InvalidArgument(
            "one level per distortion measure, at least one measure".into(),
        ));
    }
    for rho in &p.distortions {
        if rho.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                got: rho.len(),
            });
        }
        if rho.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument("distortions must map into [0,1]".into()));
        }
    }
    if p.levels.iter().any(|&d| d < 0.0) {
        return Err(Error::InvalidArgument("levels must be nonnegative".into()));
    }
    let spec = FwSpec {
        nx,
        ny,
        source: p.source.clone(),
        ball: BallKind::Linear {
            rows: p.distortions.clone(),
            levels: p.levels.clone(),
        },
    };
    if let Some(q) = zero_rate_product(&spec)? {
        return Ok(RateSolution {
            rate_bits: 0.0,
            q: JointPmf::new(nx, ny, q)?,
            gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    // Any feasible start: minimize 0 over the polytope.
    let q0 = spec
        .lp_argmin(&vec![0.0; nx * ny])?
        .ok_or_else(|| Error::Infeasible("no joint meets all distortion levels".into()))?;
    frank_wolfe(&spec, q0)
}

// ---------------------------------------------------------------------------
// side information (Wyner-Ziv style)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SideInfoProblem {
    /// Joint source P_XY.
    pub joint: JointPmf,
    /// Class on X x Y (pairing x * |Y| + y).
    pub class: FunctionClass,
    pub delta: f64,
    /// Caller-supplied bound on the auxiliary alphabet size.
    pub u_bound: usize,
}

#[derive(Debug, Clone)]
pub struct WzSolution {
    /// Best found value of I(X;U) - I(Y;U); an upper bound on the infimum.
    pub rate_bits: f64,
    /// Kernel Q_{U|X}, one row per x.
    pub kernel: Vec<Vec<f64>>,
    /// Reconstruction map g[y][u] -> x.
    pub g_map: Vec<Vec<usize>>,
    /// Deviation ||Q_WY - P||_F achieved by the returned solution.
    pub constraint_value: f64,
    /// Always true: the objective is nonconvex and the search is best-found.
    pub is_upper_bound: bool,
    /// Number of reconstruction maps with a feasible kernel.
    pub feasible_maps: usize,
}

struct WzEval<'a> {
    p: &'a SideInfoProblem,
    px: Vec<f64>,
    nx: usize,
    ny: usize,
    nu: usize,
    target_cells: Vec<f64>,
}

impl<'a> WzEval<'a> {
    fn new(p: &'a SideInfoProblem) -> Self {
        let nx = p.joint.nx();
        let ny = p.joint.ny();
        WzEval {
            px: p.joint.marginal_x(),
            nx,
            ny,
            nu: p.u_bound,
            target_cells: p.joint.cells().to_vec(),
            p,
        }
    }

    /// (objective bits, constraint deviation) for a kernel and map.
    fn evaluate(&self, kernel: &[Vec<f64>], g: &[Vec<usize>]) -> Result<(f64, f64)> {
        let (nx, ny, nu) = (self.nx, self.ny, self.nu);
        let mut q_xu = vec![0.0; nx * nu];
        for x in 0..nx {
            for u in 0..nu {
                q_xu[x * nu + u] = self.px[x] * kernel[x][u];
            }
        }
        let mut q_yu = vec![0.0; ny * nu];
        for x in 0..nx {
            for y in 0..ny {
                let pxy = self.p.joint.get(x, y);
                if pxy == 0.0 {
                    continue;
                }
                for u in 0..nu {
                    q_yu[y * nu + u] += pxy * kernel[x][u];
                }
            }
        }
        let i_xu = mutual_information_cells(&q_xu, nx, nu);
        let i_yu = mutual_information_cells(&q_yu, ny, nu);
        // W = g(Y, U); the observed pair is (W, Y) on the X x Y alphabet.
        let mut q_wy = vec![0.0; nx * ny];
        for y in 0..ny {
            for u in 0..nu {
                let w = g[y][u];
                q_wy[w * ny + y] += q_yu[y * nu + u];
            }
        }
        let cons = class_deviation(&self.p.class, &q_wy, &self.target_cells)?;
        Ok((i_xu - i_yu, cons))
    }

    fn penalized(&self, kernel: &[Vec<f64>], g: &[Vec<usize>], penalty: f64) -> f64 {
        match self.evaluate(kernel, g) {
            Ok((obj, cons)) => {
                let excess = (cons - self.p.delta).max(0.0);
                obj + penalty * excess * excess
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Best-found side-information rate: enumerate deterministic reconstruction
/// maps, optimize the kernel per map by multi-restart pairwise-transfer
/// coordinate descent under a quadratic feasibility penalty.
pub fn wz_rate(p: &SideInfoProblem) -> Result<WzSolution> {
    if p.u_bound == 0 {
        return Err(Error::InvalidArgument("auxiliary alphabet bound must be >= 1".into()));
    }
    if p.delta < 0.0 {
        return Err(Error::InvalidArgument("delta must be nonnegative".into()));
    }
    let nx = p.joint.nx();
    let ny = p.joint.ny();
    let nu = p.u_bound;
    let n_maps = pow(nx as f64, (ny * nu) as f64);
    if !(n_maps <= 4096.0) {
        return Err(Error::SupportTooLarge {
            limit: 4096,
            got: n_maps as usize,
        });
    }
    let ev = WzEval::new(p);
    let rng = SplitMix64::new(0x5a1d_ecaf);
    let mut best: Option<(f64, Vec<Vec<f64>>, Vec<Vec<usize>>, f64)> = None;
    let mut feasible_maps = 0usize;
    let n_maps = n_maps as usize;
    for map_id in 0..n_maps {
        let g = decode_map(map_id, nx, ny, nu);
        let mut map_feasible = false;
        for restart in 0..8u64 {
            let mut kernel = initial_kernel(restart, nx, nu, &rng.split2(map_id as u64, restart));
            // The raw initial point counts as a candidate: equality-tight
            // levels are often met exactly there and only approximately
            // after penalized descent.
            let mut candidates = alloc::vec![kernel.clone()];
            // Increasing penalty schedule drives the violation to zero.
            for penalty in [1e5, 1e9, 1e13] {
                coordinate_descent(&ev, &mut kernel, &g, penalty);
                candidates.push(kernel.clone());
            }
            for cand in candidates {
                let Ok((obj, cons)) = ev.evaluate(&cand, &g) else {
                    continue;
                };
                if cons <= p.delta + FEAS_TOL {
                    map_feasible = true;
                    let better = match &best {
                        None => true,
                        Some((b, ..)) => obj < b - 1e-12,
                    };
                    if better {
                        best = Some((obj, cand, g.clone(), cons));
                    }
                }
            }
        }
        if map_feasible {
            feasible_maps += 1;
        }
    }
    match best {
        Some((obj, kernel, g, cons)) => Ok(WzSolution {
            rate_bits: obj.max(0.0),
            kernel,
            g_map: g,
            constraint_value: cons,
            is_upper_bound: true,
            feasible_maps,
        }),
        None => Err(Error::Infeasible(
            "no (map, kernel) pair meets the distortion bound".into(),
        )),
    }
}

fn decode_map(mut id: usize, nx: usize, ny: usize, nu: usize) -> Vec<Vec<usize>> {
    let mut g = vec![vec![0usize; nu]; ny];
    for row in g.iter_mut() {
        for slot in row.iter_mut() {
            *slot = id % nx;
            id /= nx;
        }
    }
    g
}

fn initial_kernel(restart: u64, nx: usize, nu: usize, rng: &SplitMix64) -> Vec<Vec<f64>> {
    let mut kernel = vec![vec![0.0; nu]; nx];
    match restart {
        0 => {
            for row in kernel.iter_mut() {
                row[0] = 1.0;
            }
        }
        1 => {
            for (x, row) in kernel.iter_mut().enumerate() {
                row[x % nu] = 1.0;
            }
        }
        2 => {
            for row in kernel.iter_mut() {
                for v in row.iter_mut() {
                    *v = 1.0 / nu as f64;
                }
            }
        }
        _ => {
            let mut r = rng.split(restart);
            for row in kernel.iter_mut() {
                let mut s = 0.0;
                for v in row.iter_mut() {
                    *v = r.next_f64() + 1e-3;
                    s += *v;
                }
                for v in row.iter_mut() {
                    *v /= s;
                }
            }
        }
    }
    kernel
}

/// Pairwise mass transfers within each kernel row, golden-section per pair.
fn coordinate_descent(ev: &WzEval<'_>, kernel: &mut Vec<Vec<f64>>, g: &[Vec<usize>], penalty: f64) {
    let nx = kernel.len();
    let nu = kernel[0].len();
    if nu == 1 {
        return;
    }
    let mut current = ev.penalized(kernel, g, penalty);
    for _sweep in 0..60 {
        let before = current;
        for x in 0..nx {
            for u1 in 0..nu {
                for u2 in (u1 + 1)..nu {
                    // Transfer tau from u1 to u2: tau in [-k2, k1].
                    let k1 = kernel[x][u1];
                    let k2 = kernel[x][u2];
                    let lo = -k2;
                    let hi = k1;
                    if hi - lo < 1e-12 {
                        continue;
                    }
                    let eval_tau = |tau: f64, kernel: &mut Vec<Vec<f64>>| -> f64 {
                        kernel[x][u1] = k1 - tau;
                        kernel[x][u2] = k2 + tau;
                        ev.penalized(kernel, g, penalty)
                    };
                    let tau = golden_section(lo, hi, |t| eval_tau(t, kernel));
                    let v = eval_tau(tau, kernel);
                    if v < current - 1e-14 {
                        current = v;
                    } else {
                        // Revert.
                        kernel[x][u1] = k1;
                        kernel[x][u2] = k2;
                    }
                }
            }
        }
        if before - current < 1e-10 {
            break;
        }
    }
}

fn golden_section(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..48 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    // Also test the exact endpoints: transfers to a vertex are common optima.
    let f0 = f(0.0f64.clamp(lo, hi));
    let fm = f(mid);
    let fl = f(lo);
    let fh = f(hi);
    let mut best = (fm, mid);
    for (v, t) in [(f0, 0.0f64.clamp(lo, hi)), (fl, lo), (fh, hi)] {
        if v < best.0 {
            best = (v, t);
        }
    }
    best.1
}
