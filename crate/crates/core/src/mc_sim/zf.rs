//! Zero-forcing precoding.
//!
//! [`zf_precoder`] builds the precoder explicitly. The simulator uses
//! [`ZfWorkspace`], which yields the same gains from the `K × K` Gram matrix
//! without forming `W`: with `G = H†H`, the unit-norm ZF column is
//! `w_k = H·G⁻¹·e_k / √(G⁻¹)_kk`, so `|h_k†w_k|² = 1/(G⁻¹)_kk` and
//! `|v†w_k|² = |(G⁻¹·H†v)_k|² / (G⁻¹)_kk`.
//!
//! For i.i.d. `CN(0, 1)` channels the gains only depend on the Cholesky
//! factor `L` of `G`, whose law is known (Bartlett): `|L_jj|² ~ Gamma(M − j)`
//! and `L_ij ~ CN(0, 1)` below the diagonal, all independent. And for an
//! independent `v`, `H†v` given `H` is `CN(0, G)`, i.e. `L·u` with white `u`.
//! [`ZfWorkspace::draw_factor`] and [`ZfWorkspace::leakage_white`] use this
//! to skip the `M`-dimensional draws.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Relative pivot floor below which the Gram matrix counts as singular.
const RANK_TOLERANCE: f64 = 1e-12;

/// Normalized columns of `H·(H†H)⁻¹` for an `M × K` channel matrix.
///
/// Column `k` has unit norm and is orthogonal to every channel column `j ≠ k`.
pub fn zf_precoder(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (m, k) = h.shape();
    if k == 0 || k > m {
        return Err(Error::domain(format!("ZF needs 1 ≤ K ≤ M, got a {m}×{k} channel")));
    }
    let gram = h.adjoint() * h;
    let trace: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    if (0..k).any(|i| chol.l_dirty()[(i, i)].re <= (RANK_TOLERANCE * trace).sqrt()) {
        return Err(Error::RankDeficient);
    }
    let mut w = h * chol.inverse();
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }
    Ok(w)
}

pub(crate) fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Reusable buffers for repeated ZF gain evaluations at fixed `(M, K)`.
#[derive(Debug, Clone)]
pub struct ZfWorkspace {
    m: usize,
    k: usize,
    /// Lower Cholesky factor of the Gram matrix, row-major `K × K`.
    l: Vec<Complex64>,
    /// `L⁻¹`, row-major `K × K`.
    linv: Vec<Complex64>,
    /// `(G⁻¹)_kk`.
    diag_inv: Vec<f64>,
    a: Vec<Complex64>,
    z: Vec<Complex64>,
}

impl ZfWorkspace {
    pub fn new(m: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= m, "ZF workspace needs 1 ≤ K ≤ M");
        Self {
            m,
            k,
            l: vec![Complex64::default(); k * k],
            linv: vec![Complex64::default(); k * k],
            diag_inv: vec![0.0; k],
            a: vec![Complex64::default(); k],
            z: vec![Complex64::default(); k],
        }
    }

    /// Factors `G = H†H` for a column-major `M × K` channel `h`.
    pub fn factor(&mut self, h: &[Complex64]) -> Result<()> {
        let (m, k) = (self.m, self.k);
        debug_assert_eq!(h.len(), m * k);
        let col = |j: usize| &h[j * m..(j + 1) * m];

        let mut trace = 0.0;
        for j in 0..k {
            let cj = col(j);
            for i in 0..=j {
                let ci = col(i);
                // G[j][i] = Σ conj(h_mj)·h_mi
                let mut s = Complex64::default();
                for r in 0..m {
                    s += cj[r].conj() * ci[r];
                }
                self.l[j * k + i] = s;
            }
            trace += self.l[j * k + j].re;
        }

        let floor = (RANK_TOLERANCE * trace).sqrt();
        for j in 0..k {
            let mut d = self.l[j * k + j].re;
            for p in 0..j {
                d -= self.l[j * k + p].norm_sqr();
            }
            if !(d > 0.0) || d.sqrt() <= floor {
                return Err(Error::RankDeficient);
            }
            let djj = d.sqrt();
            self.l[j * k + j] = Complex64::new(djj, 0.0);
            for i in j + 1..k {
                let mut s = self.l[i * k + j];
                for p in 0..j {
                    s -= self.l[i * k + p] * self.l[j * k + p].conj();
                }
                self.l[i * k + j] = s / djj;
            }
        }

        self.invert();
        Ok(())
    }

    /// Draws the Cholesky factor of `H†H` for an i.i.d. `CN(0, 1)` channel
    /// directly. `diag[j]` must be `Gamma(M − j, 1)`.
    pub fn draw_factor<R: Rng + ?Sized>(&mut self, rng: &mut R, diag: &[Gamma<f64>]) {
        let k = self.k;
        debug_assert_eq!(diag.len(), k);
        self.l.iter_mut().for_each(|x| *x = Complex64::default());
        for j in 0..k {
            self.l[j * k + j] = Complex64::new(diag[j].sample(rng).sqrt(), 0.0);
            for p in 0..j {
                self.l[j * k + p] = cn(rng);
            }
        }
        self.invert();
    }

    fn invert(&mut self) {
        let k = self.k;
        // Columns of L⁻¹ by forward substitution.
        self.linv.iter_mut().for_each(|x| *x = Complex64::default());
        for c in 0..k {
            for i in c..k {
                let mut s = if i == c { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                for p in c..i {
                    s -= self.l[i * k + p] * self.linv[p * k + c];
                }
                self.linv[i * k + c] = s / self.l[i * k + i].re;
            }
        }
        // (G⁻¹)_cc = ‖L⁻¹ e_c‖²
        for c in 0..k {
            self.diag_inv[c] = (c..k).map(|i| self.linv[i * k + c].norm_sqr()).sum();
        }
    }

    /// `|h_k†w_k|²` for the factored channel.
    pub fn own_gain(&self, user: usize) -> f64 {
        1.0 / self.diag_inv[user]
    }

    /// `Σ_k |v†w_k|²` for the factored channel and an outside channel `v`.
    pub fn leakage(&mut self, h: &[Complex64], v: &[Complex64]) -> f64 {
        let (m, k) = (self.m, self.k);
        for j in 0..k {
            let cj = &h[j * m..(j + 1) * m];
            let mut s = Complex64::default();
            for r in 0..m {
                s += cj[r].conj() * v[r];
            }
            self.a[j] = s;
        }
        // z = L⁻¹ a
        for i in 0..k {
            let mut s = Complex64::default();
            for p in 0..=i {
                s += self.linv[i * k + p] * self.a[p];
            }
            self.z[i] = s;
        }
        self.leakage_from_z()
    }

    /// Same law as [`leakage`](Self::leakage) with `v ~ CN(0, I)` independent
    /// of the channel, drawn as `z = L⁻¹H†v ~ CN(0, I_K)`.
    pub fn leakage_white<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        for i in 0..self.k {
            self.z[i] = cn(rng);
        }
        self.leakage_from_z()
    }

    fn leakage_from_z(&self) -> f64 {
        let k = self.k;
        // y = L⁻† z, accumulated straight into the gain sum
        let mut total = 0.0;
        for c in 0..k {
            let mut y = Complex64::default();
            for i in c..k {
                y += self.linv[i * k + c].conj() * self.z[i];
            }
            total += y.norm_sqr() / self.diag_inv[c];
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cn(rng: &mut impl Rng) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
    }

    fn random_channel(rng: &mut impl Rng, m: usize, k: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, k, |_, _| cn(rng))
    }

    #[test]
    fn zero_forcing_and_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_channel(&mut rng, 4, 2);
        let w = zf_precoder(&h).unwrap();
        for k in 0..2 {
            assert!((w.column(k).norm() - 1.0).abs() < 1e-12);
        }
        assert!((h.column(0).adjoint() * w.column(1))[(0, 0)].norm() < 1e-10);
        assert!((h.column(1).adjoint() * w.column(0))[(0, 0)].norm() < 1e-10);
    }

    #[test]
    fn single_user_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_channel(&mut rng, 6, 1);
        let w = zf_precoder(&h).unwrap();
        let mrt = &h / Complex64::new(h.norm(), 0.0);
        assert!((w - mrt).norm() < 1e-12);
    }

    #[test]
    fn orthonormal_columns_are_kept() {
        let mut h = DMatrix::<Complex64>::zeros(4, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(0.0, 1.0);
        let w = zf_precoder(&h).unwrap();
        assert!((w - &h).norm() < 1e-14);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mut h = DMatrix::<Complex64>::zeros(3, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(0, 1)] = Complex64::new(2.0, 0.0);
        assert!(matches!(zf_precoder(&h), Err(Error::RankDeficient)));
        let flat: Vec<Complex64> = h.iter().copied().collect();
        assert!(matches!(ZfWorkspace::new(3, 2).factor(&flat), Err(Error::RankDeficient)));
        assert!(zf_precoder(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn workspace_matches_explicit_precoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(m, k) in &[(4, 2), (8, 7), (12, 6), (5, 1)] {
            let h = random_channel(&mut rng, m, k);
            let v: Vec<Complex64> = (0..m).map(|_| cn(&mut rng)).collect();
            let w = zf_precoder(&h).unwrap();
            let mut ws = ZfWorkspace::new(m, k);
            let flat: Vec<Complex64> = h.iter().copied().collect();
            ws.factor(&flat).unwrap();
            for u in 0..k {
                let direct = (h.column(u).adjoint() * w.column(u))[(0, 0)].norm_sqr();
                assert!((ws.own_gain(u) - direct).abs() < 1e-10 * direct);
            }
            let vv = DMatrix::from_column_slice(m, 1, &v);
            let direct: f64 = (vv.adjoint() * &w).iter().map(|x| x.norm_sqr()).sum();
            let fast = ws.leakage(&flat, &v);
            assert!((fast - direct).abs() < 1e-10 * direct.max(1e-300), "{m}x{k}: {fast} vs {direct}");
        }
    }

    #[test]
    fn sampled_factor_matches_explicit_channels_in_law() {
        let n = 20_000;
        for (seed, &(m, k)) in [(4usize, 2usize), (8, 7), (12, 6)].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed as u64);
            let diag: Vec<Gamma<f64>> = (0..k).map(|j| Gamma::new((m - j) as f64, 1.0).unwrap()).collect();
            let mut ws = ZfWorkspace::new(m, k);
            let mut explicit = [Vec::new(), Vec::new(), Vec::new()];
            let mut sampled = [Vec::new(), Vec::new(), Vec::new()];
            for _ in 0..n {
                let h: Vec<Complex64> = (0..m * k).map(|_| cn(&mut rng)).collect();
                let v: Vec<Complex64> = (0..m).map(|_| cn(&mut rng)).collect();
                ws.factor(&h).unwrap();
                explicit[0].push(ws.own_gain(0));
                explicit[1].push(ws.own_gain(k - 1));
                explicit[2].push(ws.leakage(&h, &v));

                ws.draw_factor(&mut rng, &diag);
                sampled[0].push(ws.own_gain(0));
                sampled[1].push(ws.own_gain(k - 1));
                sampled[2].push(ws.leakage_white(&mut rng));
            }
            for (what, (a, b)) in ["first user", "last user", "leakage"].iter().zip(explicit.iter().zip(&sampled)) {
                let (d, p) = crate::mc_sim::ks_two_sample(a, b);
                assert!(p > 1e-3, "{m}x{k} {what}: KS D = {d}, p = {p}");
            }
        }
    }
}
