use crate::{Error, Result, C64};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `A^H A` and `A^H b` for least-squares normal equations.
    pub fn normal_equations(&self, b: &[C64]) -> (DenseMatrix, Vec<C64>) {
        let n = self.cols;
        let mut ata = DenseMatrix::zeros(n, n);
        let mut atb = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                ata[(i, j)] = (0..self.rows).map(|k| self[(k, i)].conj() * self[(k, j)]).sum();
            }
            atb[i] = (0..self.rows).map(|k| self[(k, i)].conj() * b[k]).sum();
        }
        (ata, atb)
    }

    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Dimension(format!("LU of a {}x{} matrix", a.rows, a.cols)));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[(x, k)].norm().total_cmp(&lu[(y, k)].norm()))
                .expect("nonempty");
            let piv = lu[(p, k)].norm();
            if piv == 0.0 || piv <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::Singular { step: k, pivot: piv });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / d;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= m * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.perm.len();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.perm.len();
        let mut inv = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

pub fn solve_dense(a: &DenseMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.rows {
        return Err(Error::Dimension("right-hand side length".into()));
    }
    Ok(DenseLu::factor(a)?.solve(b))
}

/// 1-norm condition number from an explicit inverse; infinite when singular.
pub fn cond1(a: &DenseMatrix) -> f64 {
    match DenseLu::factor(a) {
        Ok(lu) => a.norm1() * lu.inverse().norm1(),
        Err(_) => f64::INFINITY,
    }
}
