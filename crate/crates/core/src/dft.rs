//! Fourier transform `C[G] -> C^Ghat` for a finite abelian group.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abelian::{decompose_finite_abelian, dual_add, AbelianDecomposition, DualCharacter, FgAbelianGroup};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::hopf::{AlgebraElement, Field};
use crate::linalg::max_abs_diff;
use crate::scalar::C64;

#[derive(Debug, Clone)]
pub struct DftBridge {
    group: Arc<FiniteGroup>,
    decomposition: AbelianDecomposition,
    characters: Vec<DualCharacter>,
    /// `matrix[chi][g] = exp(2 pi i sum_k chi_k y_k(g) / n_k)`.
    matrix: Vec<Vec<C64>>,
}

impl DftBridge {
    pub fn new(group: &Arc<FiniteGroup>) -> Result<Self> {
        let decomposition = decompose_finite_abelian(group)?;
        let structure = &decomposition.structure;
        let characters = structure.elements().expect("finite group");
        let matrix = characters
            .iter()
            .map(|chi| {
                decomposition
                    .coords
                    .iter()
                    .map(|y| {
                        let phase: f64 = chi
                            .torsion
                            .iter()
                            .zip(y)
                            .zip(structure.torsion())
                            .map(|((&c, &yk), &nk)| ((c * yk) % nk) as f64 / nk as f64)
                            .sum();
                        C64::from_polar(1.0, 2.0 * PI * phase)
                    })
                    .collect()
            })
            .collect();
        Ok(DftBridge { group: Arc::clone(group), decomposition, characters, matrix })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// The dual group, with the same invariant factors as `G`.
    pub fn dual(&self) -> &FgAbelianGroup {
        &self.decomposition.structure
    }

    pub fn decomposition(&self) -> &AbelianDecomposition {
        &self.decomposition
    }

    pub fn characters(&self) -> &[DualCharacter] {
        &self.characters
    }

    pub fn matrix(&self) -> &[Vec<C64>] {
        &self.matrix
    }

    pub fn character_index(&self, chi: &DualCharacter) -> Option<usize> {
        self.characters.iter().position(|c| c == chi)
    }

    pub fn forward(&self, a: &AlgebraElement) -> Vec<C64> {
        self.matrix.iter().map(|row| row.iter().zip(a.coeffs()).map(|(f, x)| f * x).sum()).collect()
    }

    /// Inverse transform, landing in `C[G]`.
    pub fn inverse(&self, phi: &[C64]) -> Result<AlgebraElement> {
        let n = self.group.order();
        if phi.len() != n {
            return Err(Error::ShapeMismatch(format!("{} values for {n} characters", phi.len())));
        }
        let coeffs = (0..n)
            .map(|g| self.matrix.iter().zip(phi).map(|(row, p)| row[g].conj() * p).sum::<C64>() / n as f64)
            .collect();
        AlgebraElement::new(&self.group, Field::C, coeffs, 0.0)
    }

    /// `max |F^{-1} F - I|` on the basis.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.group.order();
        (0..n)
            .map(|g| {
                let d = AlgebraElement::basis(&self.group, Field::C, g);
                self.inverse(&self.forward(&d)).expect("length n").max_abs_diff(&d)
            })
            .fold(0.0, f64::max)
    }

    /// Worst `|F(ab) - F(a) F(b)|` over random pairs.
    pub fn convolution_residual(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let a = AlgebraElement::random(&self.group, Field::C, &mut rng);
            let b = AlgebraElement::random(&self.group, Field::C, &mut rng);
            let lhs = self.forward(&a.multiply(&b).expect("same algebra"));
            let rhs: Vec<C64> = self.forward(&a).iter().zip(self.forward(&b)).map(|(x, y)| x * y).collect();
            worst = worst.max(max_abs_diff(&lhs, &rhs));
        }
        worst
    }

    /// Compares `(F (x) F)(c(a))` with `(chi1, chi2) -> F(a)(chi1 + chi2)` entrywise.
    pub fn comultiplication_residual(&self, samples: usize, seed: u64) -> f64 {
        let n = self.group.order();
        let dual = self.dual();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let a = AlgebraElement::random(&self.group, Field::C, &mut rng);
            let phi = self.forward(&a);
            let ca = a.comultiply();
            for (i, c1) in self.characters.iter().enumerate() {
                for (j, c2) in self.characters.iter().enumerate() {
                    let mut lhs = C64::new(0.0, 0.0);
                    for g in 0..n {
                        for h in 0..n {
                            let t = ca.coeff(g, h);
                            if t != C64::new(0.0, 0.0) {
                                lhs += t * self.matrix[i][g] * self.matrix[j][h];
                            }
                        }
                    }
                    let sum = dual_add(dual, c1, c2).expect("conforming characters");
                    let k = self.character_index(&sum).expect("closed under addition");
                    worst = worst.max((lhs - phi[k]).norm());
                }
            }
        }
        worst
    }

    /// `|F(exp a) - exp(F a)|` with the exponential applied pointwise on the right.
    pub fn exp_residual(&self, a: &AlgebraElement, tolerance: f64) -> f64 {
        let lhs = self.forward(&a.exp(tolerance));
        let rhs: Vec<C64> = self.forward(a).iter().map(|z| z.exp()).collect();
        max_abs_diff(&lhs, &rhs)
    }
}
