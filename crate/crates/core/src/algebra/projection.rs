use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{SMatrix, SVector};

use super::form::PointForm;
use super::metric::{hodge_star, Metric};
use super::tables::{compound, DIM};

/// Irreducible pieces of 2- and 3-forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Two7,
    Two14,
    Three1,
    Three7,
    Three27,
}

impl Component {
    pub fn label(self) -> &'static str {
        match self {
            Component::Two7 => "2_7",
            Component::Two14 => "2_14",
            Component::Three1 => "3_1",
            Component::Three7 => "3_7",
            Component::Three27 => "3_27",
        }
    }

    /// Dimension of the irreducible piece.
    pub fn rank(self) -> usize {
        match self {
            Component::Two7 | Component::Three7 => 7,
            Component::Two14 => 14,
            Component::Three1 => 1,
            Component::Three27 => 27,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSplit {
    parts: BTreeMap<Component, PointForm>,
}

impl ProjectionSplit {
    pub fn part(&self, c: Component) -> &PointForm {
        self.parts
            .get(&c)
            .unwrap_or_else(|| panic!("split has no {c} part"))
    }

    pub fn parts(&self) -> &BTreeMap<Component, PointForm> {
        &self.parts
    }

    pub fn into_parts(self) -> BTreeMap<Component, PointForm> {
        self.parts
    }

    pub fn sum(&self) -> PointForm {
        let mut it = self.parts.values();
        let mut acc = it.next().expect("nonempty split").clone();
        for p in it {
            acc += p;
        }
        acc
    }
}

/// The map b -> *(phi ^ b) on 2-forms; eigenvalue 2 on the 7-dimensional
/// piece and -1 on the 14-dimensional one.
pub fn two_form_operator(b: &PointForm, phi: &PointForm, m: &Metric) -> PointForm {
    hodge_star(&phi.wedge(b), m)
}

/// Splits a 2- or 3-form into its irreducible pieces relative to `phi`,
/// whose induced metric must be `m`. Panics on other degrees.
pub fn project(a: &PointForm, phi: &PointForm, m: &Metric) -> ProjectionSplit {
    let mut parts = BTreeMap::new();
    match a.degree() {
        2 => {
            let op = two_form_operator(a, phi, m);
            let seven = (op + a.clone()) * (1.0 / 3.0);
            let fourteen = a.clone() - seven.clone();
            parts.insert(Component::Two7, seven);
            parts.insert(Component::Two14, fourteen);
        }
        3 => {
            let c3 = compound(m.inv(), 3);
            let raise = |f: &PointForm| -> Vec<f64> {
                let v = f.components();
                (0..v.len())
                    .map(|i| (0..v.len()).map(|k| c3[(i, k)] * v[k]).sum())
                    .collect()
            };
            let dot = |x: &PointForm, y_raised: &[f64]| -> f64 {
                x.components()
                    .iter()
                    .zip(y_raised)
                    .map(|(a, b)| a * b)
                    .sum()
            };
            let phi_up = raise(phi);
            let one = phi.scale(dot(a, &phi_up) / dot(phi, &phi_up));

            let psi = hodge_star(phi, m);
            let basis: Vec<PointForm> = (0..DIM).map(|i| psi.interior_basis(i)).collect();
            let raised: Vec<Vec<f64>> = basis.iter().map(raise).collect();
            let gram = SMatrix::<f64, 7, 7>::from_fn(|i, j| dot(&basis[i], &raised[j]));
            let rhs = SVector::<f64, 7>::from_fn(|i, _| dot(a, &raised[i]));
            let coef = gram
                .cholesky()
                .expect("contractions of psi are independent")
                .solve(&rhs);
            let mut seven = PointForm::zero(3);
            for (i, b) in basis.iter().enumerate() {
                seven += &b.scale(coef[i]);
            }
            let rest = a.clone() - one.clone() - seven.clone();
            parts.insert(Component::Three1, one);
            parts.insert(Component::Three7, seven);
            parts.insert(Component::Three27, rest);
        }
        p => panic!("projection is defined on 2- and 3-forms, got degree {p}"),
    }
    ProjectionSplit { parts }
}
