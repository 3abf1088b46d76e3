use nalgebra::SymmetricEigen;

use super::error::AlgebraError;
use super::form::PointForm;
use super::tables::{complement, compound, mask_of, position_of_mask, shuffle_sign, Mat7, DIM};

/// Floor on the smallest eigenvalue of the normalized bilinear form below
/// which a 3-form is treated as outside the positive cone.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

/// A positive definite metric at a point with its inverse and volume factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: Mat7,
    g_inv: Mat7,
    det: f64,
    vol: f64,
    /// Cholesky factor, g = L L^T.
    chol: Mat7,
}

impl Metric {
    pub fn identity() -> Self {
        Self {
            g: Mat7::identity(),
            g_inv: Mat7::identity(),
            det: 1.0,
            vol: 1.0,
            chol: Mat7::identity(),
        }
    }

    /// Symmetrizes `g` and factors it; fails unless it is positive definite.
    pub fn new(g: Mat7) -> Result<Self, AlgebraError> {
        let g = (g + g.transpose()) * 0.5;
        let chol = g.cholesky().ok_or(AlgebraError::SingularMetric)?;
        let l = chol.l();
        let vol: f64 = (0..DIM).map(|i| l[(i, i)]).product();
        if !(vol * vol > 1e-12) || !vol.is_finite() {
            return Err(AlgebraError::SingularMetric);
        }
        let mut g_inv = chol.inverse();
        g_inv = (g_inv + g_inv.transpose()) * 0.5;
        Ok(Self {
            g,
            g_inv,
            det: vol * vol,
            vol,
            chol: l,
        })
    }

    pub fn g(&self) -> &Mat7 {
        &self.g
    }

    pub fn inv(&self) -> &Mat7 {
        &self.g_inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// Volume density, the square root of det g.
    pub fn vol(&self) -> f64 {
        self.vol
    }

    pub fn cholesky_factor(&self) -> &Mat7 {
        &self.chol
    }

    /// Rows are the coordinate components of a g-orthonormal coframe dual to
    /// an orthonormal frame: E = L^{-1} with g = L L^T, so E g E^T = I.
    pub fn orthonormal_frame(&self) -> Mat7 {
        self.chol
            .solve_lower_triangular(&Mat7::identity())
            .expect("triangular factor is invertible")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.g).eigenvalues.min()
    }
}

/// The volume-form valued bilinear form of a 3-form, stored by its
/// coefficient on dx1..dx7.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearFormB {
    pub b: Mat7,
}

impl BilinearFormB {
    pub fn of(phi: &PointForm) -> Self {
        assert_eq!(phi.degree(), 3, "bilinear form needs a 3-form");
        let contracted: Vec<PointForm> = (0..DIM).map(|i| phi.interior_basis(i)).collect();
        let with_phi: Vec<PointForm> = contracted.iter().map(|a| a.wedge(phi)).collect();
        let mut b = Mat7::zeros();
        for i in 0..DIM {
            for j in i..DIM {
                let v = contracted[j].wedge(&with_phi[i]).components()[0] / 6.0;
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        Self { b }
    }

    pub fn det(&self) -> f64 {
        self.b.determinant()
    }
}

/// Metric induced by a 3-form: g = B det(B)^(-1/9), which is the identity
/// for the standard structure.
pub fn metric_from_phi(phi: &PointForm) -> Result<(Metric, BilinearFormB), AlgebraError> {
    let bf = BilinearFormB::of(phi);
    let det = bf.det();
    if !(det > 0.0) {
        return Err(AlgebraError::NotPositive {
            min_eigenvalue: SymmetricEigen::new(bf.b).eigenvalues.min(),
        });
    }
    let g = bf.b * det.powf(-1.0 / 9.0);
    let min_eig = SymmetricEigen::new(g).eigenvalues.min();
    if !(min_eig > POSITIVITY_FLOOR) {
        return Err(AlgebraError::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    let m = Metric::new(g).map_err(|_| AlgebraError::NotPositive {
        min_eigenvalue: min_eig,
    })?;
    Ok((m, bf))
}

/// Hodge star for the orientation of the ordered coordinate frame, so that
/// a ^ *b = <a, b> vol.
pub fn hodge_star(a: &PointForm, m: &Metric) -> PointForm {
    let p = a.degree();
    let c = compound(m.inv(), p);
    let src = a.components();
    let mut out = PointForm::zero(DIM - p);
    let dst = out.components_mut();
    for i in 0..src.len() {
        let raised: f64 = (0..src.len()).map(|k| c[(i, k)] * src[k]).sum();
        let mask = mask_of(p, i);
        let comp = complement(mask);
        dst[position_of_mask(comp)] = m.vol() * raised * shuffle_sign(mask, comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_frame_is_orthonormal() {
        let mut g = Mat7::identity() * 2.0;
        g[(0, 3)] = 0.3;
        g[(3, 0)] = 0.3;
        let m = Metric::new(g).unwrap();
        let e = m.orthonormal_frame();
        assert!((e * g * e.transpose() - Mat7::identity()).abs().max() < 1e-14);
        assert!((m.g() * m.inv() - Mat7::identity()).abs().max() < 1e-13);
        assert!((m.vol() * m.vol() - m.det()).abs() < 1e-12);
    }

    #[test]
    fn star_of_one_is_positive_volume() {
        let mut g = Mat7::identity();
        g[(2, 2)] = 4.0;
        let m = Metric::new(g).unwrap();
        let v = hodge_star(&PointForm::scalar(1.0), &m);
        assert!((v.components()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let mut g = Mat7::identity();
        g[(4, 4)] = -1.0;
        assert!(Metric::new(g).is_err());
    }
}
