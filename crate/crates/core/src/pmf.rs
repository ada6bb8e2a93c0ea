//! Finite joint probability tables: marginals, mutual information,
//! conditional mutual information, information density.
//!
//! All information quantities are in bits, with the 0 log 0 = 0 convention.

use crate::error::{Error, Result};
use crate::math::{log2, xlog2x};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

const SUM_TOL: f64 = 1e-12;

fn entropy_bits(p: impl Iterator<Item = f64>) -> f64 {
    -p.map(xlog2x).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    nx: usize,
    ny: usize,
    p: Vec<f64>,
}

impl JointPmf {
    pub fn new(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || p.len() != nx * ny {
            return Err(Error::InvalidDistribution(format!(
                "table of {} cells for a {nx} x {ny} pmf",
                p.len()
            )));
        }
        let mut total = 0.0;
        for &v in &p {
            if !(v >= 0.0) {
                return Err(Error::InvalidDistribution(format!("negative cell {v}")));
            }
            total += v;
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("cells sum to {total}")));
        }
        Ok(JointPmf { nx, ny, p })
    }

    pub fn from_marginal_kernel(px: &[f64], kernel: &[Vec<f64>]) -> Result<Self> {
        let nx = px.len();
        if kernel.len() != nx || nx == 0 {
            return Err(Error::InvalidDistribution(
                "kernel must have one row per source symbol".into(),
            ));
        }
        let ny = kernel[0].len();
        let mut p = vec![0.0; nx * ny];
        for (x, row) in kernel.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::InvalidDistribution("ragged kernel".into()));
            }
            let rs: f64 = row.iter().sum();
            if (rs - 1.0).abs() > SUM_TOL || row.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "kernel row {x} is not a distribution"
                )));
            }
            for (y, &k) in row.iter().enumerate() {
                p[x * ny + y] = px[x] * k;
            }
        }
        JointPmf::new(nx, ny, p)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    pub fn cells(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nx];
        for x in 0..self.nx {
            for y in 0..self.ny {
                m[x] += self.get(x, y);
            }
        }
        m
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.ny];
        for x in 0..self.nx {
            for y in 0..self.ny {
                m[y] += self.get(x, y);
            }
        }
        m
    }

    pub fn product_of_marginals(&self) -> JointPmf {
        let mx = self.marginal_x();
        let my = self.marginal_y();
        let mut p = vec![0.0; self.nx * self.ny];
        for x in 0..self.nx {
            for y in 0..self.ny {
                p[x * self.ny + y] = mx[x] * my[y];
            }
        }
        JointPmf {
            nx: self.nx,
            ny: self.ny,
            p,
        }
    }

    /// I(X;Y) = H(X) + H(Y) - H(X,Y), in bits. Zero exactly for products.
    pub fn mutual_information(&self) -> f64 {
        let hx = entropy_bits(self.marginal_x().into_iter());
        let hy = entropy_bits(self.marginal_y().into_iter());
        let hxy = entropy_bits(self.p.iter().copied());
        (hx + hy - hxy).max(0.0)
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.p.iter().copied())
    }

    /// H(X|Y) in bits.
    pub fn conditional_entropy_x_given_y(&self) -> f64 {
        self.entropy() - entropy_bits(self.marginal_y().into_iter())
    }

    pub fn l1_distance(&self, other: &JointPmf) -> f64 {
        debug_assert_eq!(self.p.len(), other.p.len());
        self.p
            .iter()
            .zip(other.p.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Additive information density of a pair of tuples under the i.i.d.
    /// extension: sum_t log2 [ p(v_t, w_t) / (p_V(v_t) p_W(w_t)) ].
    /// A zero-probability pair is a distinct error, not a number.
    pub fn information_density(&self, v: &[usize], w: &[usize]) -> Result<f64> {
        if v.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                got: w.len(),
            });
        }
        let mx = self.marginal_x();
        let my = self.marginal_y();
        let mut total = 0.0;
        for (t, (&a, &b)) in v.iter().zip(w.iter()).enumerate() {
            if a >= self.nx || b >= self.ny {
                return Err(Error::InvalidArgument(format!(
                    "tuple symbol ({a},{b}) outside {} x {}",
                    self.nx, self.ny
                )));
            }
            let joint = self.get(a, b);
            if joint <= 0.0 {
                return Err(Error::ZeroProbabilityPair { position: t });
            }
            total += log2(joint / (mx[a] * my[b]));
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf3 {
    na: usize,
    nb: usize,
    nc: usize,
    p: Vec<f64>,
}

/// Which conditional mutual information to read off a 3-way table with
/// coordinates (A, B, C).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmiPattern {
    /// I(A; B | C)
    AbGivenC,
    /// I(A; C | B)
    AcGivenB,
    /// I(B; C | A)
    BcGivenA,
}

impl JointPmf3 {
    pub fn new(na: usize, nb: usize, nc: usize, p: Vec<f64>) -> Result<Self> {
        if na == 0 || nb == 0 || nc == 0 || p.len() != na * nb * nc {
            return Err(Error::InvalidDistribution("3-way table shape mismatch".into()));
        }
        let mut total = 0.0;
        for &v in &p {
            if !(v >= 0.0) {
                return Err(Error::InvalidDistribution(format!("negative cell {v}")));
            }
            total += v;
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("cells sum to {total}")));
        }
        Ok(JointPmf3 { na, nb, nc, p })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.na, self.nb, self.nc)
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.p[(a * self.nb + b) * self.nc + c]
    }

    fn entropy_of(&self, keep: (bool, bool, bool)) -> f64 {
        let mut acc: Vec<f64> = vec![
            0.0;
            (if keep.0 { self.na } else { 1 })
                * (if keep.1 { self.nb } else { 1 })
                * (if keep.2 { self.nc } else { 1 })
        ];
        let nb = if keep.1 { self.nb } else { 1 };
        let nc = if keep.2 { self.nc } else { 1 };
        for a in 0..self.na {
            for b in 0..self.nb {
                for c in 0..self.nc {
                    let ia = if keep.0 { a } else { 0 };
                    let ib = if keep.1 { b } else { 0 };
                    let ic = if keep.2 { c } else { 0 };
                    acc[(ia * nb + ib) * nc + ic] += self.get(a, b, c);
                }
            }
        }
        entropy_bits(acc.into_iter())
    }

    /// Conditional mutual information in bits.
    pub fn conditional_mutual_information(&self, pattern: CmiPattern) -> f64 {
        let habc = self.entropy_of((true, true, true));
        let v = match pattern {
            CmiPattern::AbGivenC => {
                self.entropy_of((true, false, true)) + self.entropy_of((false, true, true))
                    - self.entropy_of((false, false, true))
                    - habc
            }
            CmiPattern::AcGivenB => {
                self.entropy_of((true, true, false)) + self.entropy_of((false, true, true))
                    - self.entropy_of((false, true, false))
                    - habc
            }
            CmiPattern::BcGivenA => {
                self.entropy_of((true, true, false)) + self.entropy_of((true, false, true))
                    - self.entropy_of((true, false, false))
                    - habc
            }
        };
        v.max(0.0)
    }

    /// The (A, B) pair marginal.
    pub fn marginal_ab(&self) -> JointPmf {
        let mut p = vec![0.0; self.na * self.nb];
        for a in 0..self.na {
            for b in 0..self.nb {
                for c in 0..self.nc {
                    p[a * self.nb + b] += self.get(a, b, c);
                }
            }
        }
        JointPmf {
            nx: self.na,
            ny: self.nb,
            p,
        }
    }

    pub fn marginal_ac(&self) -> JointPmf {
        let mut p = vec![0.0; self.na * self.nc];
        for a in 0..self.na {
            for b in 0..self.nb {
                for c in 0..self.nc {
                    p[a * self.nc + c] += self.get(a, b, c);
                }
            }
        }
        JointPmf {
            nx: self.na,
            ny: self.nc,
            p,
        }
    }

    pub fn marginal_bc(&self) -> JointPmf {
        let mut p = vec![0.0; self.nb * self.nc];
        for a in 0..self.na {
            for b in 0..self.nb {
                for c in 0..self.nc {
                    p[b * self.nc + c] += self.get(a, b, c);
                }
            }
        }
        JointPmf {
            nx: self.nb,
            ny: self.nc,
            p,
        }
    }
}

/// Mutual information of a 2-way table, in bits.
pub fn mutual_information(q: &JointPmf) -> f64 {
    q.mutual_information()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::binary_entropy;

    #[test]
    fn product_has_zero_information() {
        let q = JointPmf::new(2, 2, vec![0.06, 0.14, 0.24, 0.56]).unwrap();
        assert!(q.mutual_information().abs() < 1e-12);
    }

    #[test]
    fn identity_coupling_is_one_bit() {
        let q = JointPmf::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((q.mutual_information() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubly_symmetric_crossover() {
        let e = 0.11;
        let q = JointPmf::new(
            2,
            2,
            vec![(1.0 - e) / 2.0, e / 2.0, e / 2.0, (1.0 - e) / 2.0],
        )
        .unwrap();
        assert!((q.mutual_information() - (1.0 - binary_entropy(e))).abs() < 1e-12);
    }

    #[test]
    fn markov_chain_has_zero_cmi() {
        // A -> B -> C with A,B,C binary: I(A;C|B) = 0.
        let pa = [0.3, 0.7];
        let k_ab = [[0.8, 0.2], [0.25, 0.75]];
        let k_bc = [[0.6, 0.4], [0.1, 0.9]];
        let mut p = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    p[(a * 2 + b) * 2 + c] = pa[a] * k_ab[a][b] * k_bc[b][c];
                }
            }
        }
        let q = JointPmf3::new(2, 2, 2, p).unwrap();
        assert!(q.conditional_mutual_information(CmiPattern::AcGivenB) < 1e-12);
    }

    #[test]
    fn independent_first_coordinate() {
        // A independent of (B, C): I(A;B|C) = 0.
        let pa = [0.4, 0.6];
        let pbc = [0.1, 0.3, 0.2, 0.4];
        let mut p = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    p[(a * 2 + b) * 2 + c] = pa[a] * pbc[b * 2 + c];
                }
            }
        }
        let q = JointPmf3::new(2, 2, 2, p).unwrap();
        assert!(q.conditional_mutual_information(CmiPattern::AbGivenC) < 1e-12);
    }

    #[test]
    fn information_density_cases() {
        let prod = JointPmf::new(2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(prod.information_density(&[0, 1, 1], &[1, 0, 1]).unwrap(), 0.0);
        let ident = JointPmf::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let n = 16;
        let v: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let d = ident.information_density(&v, &v).unwrap();
        assert!((d - n as f64).abs() < 1e-9);
        assert!(matches!(
            ident.information_density(&[0], &[1]),
            Err(Error::ZeroProbabilityPair { position: 0 })
        ));
    }
}
