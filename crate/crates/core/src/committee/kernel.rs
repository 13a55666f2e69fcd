use ndarray::Array2;

/// Kernel functions for the SVMs and the Gaussian process classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
    Poly { gamma: f64, degree: i32, coef0: f64 },
}

impl Kernel {
    fn from_parts(self, dot: f64, sq_dist: f64) -> f64 {
        match self {
            Kernel::Linear => dot,
            Kernel::Rbf { gamma } => (-gamma * sq_dist.max(0.0)).exp(),
            Kernel::Poly { gamma, degree, coef0 } => (gamma * dot + coef0).powi(degree),
        }
    }

    /// Kernel matrix between the rows of `a` and the rows of `b`.
    pub fn cross(&self, a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        let dots = a.dot(&b.t());
        if matches!(self, Kernel::Linear) {
            return dots;
        }
        let na: Vec<f64> = a.rows().into_iter().map(|r| r.dot(&r)).collect();
        let nb: Vec<f64> = b.rows().into_iter().map(|r| r.dot(&r)).collect();
        let mut out = dots;
        for ((i, j), v) in out.indexed_iter_mut() {
            let sq = na[i] + nb[j] - 2.0 * *v;
            *v = self.from_parts(*v, sq);
        }
        out
    }

    /// Symmetric Gram matrix of the rows of `x`.
    pub fn gram(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut g = self.cross(x, x);
        let n = g.nrows();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (g[[i, j]] + g[[j, i]]);
                g[[i, j]] = v;
                g[[j, i]] = v;
            }
            if let Kernel::Rbf { .. } = self {
                g[[i, i]] = 1.0;
            }
        }
        g
    }
}
