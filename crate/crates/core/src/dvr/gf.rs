//! Finite extension fields `F_{p^k}`, used only to sample invertible
//! combinations when the prime field is too small.

use super::matrix::Mat;
use super::poly::{self, Poly};
use super::{Fp, Ring};

#[derive(Clone, Debug)]
pub struct Gf {
    f: Fp,
    modulus: Poly,
}

impl Gf {
    /// `F_{p^k}` built from the lexicographically first monic irreducible
    /// polynomial of degree `k`.
    pub fn new(f: Fp, k: usize) -> Gf {
        let p = f.p() as usize;
        let total = p.pow(k as u32);
        for code in 0..total {
            let mut m = Vec::with_capacity(k + 1);
            let mut c = code;
            for _ in 0..k {
                m.push((c % p) as u32);
                c /= p;
            }
            m.push(1);
            if poly::is_irreducible(&f, &m) {
                return Gf { f, modulus: m };
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// Smallest extension with more than `bound` elements.
    pub fn larger_than(f: Fp, bound: usize) -> Gf {
        let mut k = 1;
        while (f.p() as u128).pow(k as u32) <= bound as u128 {
            k += 1;
        }
        Gf::new(f, k)
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn random(&self, rng: &mut impl rand::Rng) -> Poly {
        poly::trim(
            (0..self.degree())
                .map(|_| rng.gen_range(0..self.f.p()))
                .collect(),
        )
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        poly::add(&self.f, a, b)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        poly::mulmod(&self.f, a, b, &self.modulus)
    }

    pub fn scale(&self, s: u32, a: &Poly) -> Poly {
        poly::scale(&self.f, s, a)
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        if a.is_empty() {
            return None;
        }
        let (g, s, _) = poly::xgcd(&self.f, a, &self.modulus);
        (g == vec![1]).then(|| poly::rem(&self.f, &s, &self.modulus))
    }

    /// Whether `Σ c_i · B_i` is invertible for the given extension-field
    /// coefficients and prime-field matrices.
    pub fn combination_invertible(&self, coeffs: &[Poly], mats: &[&Mat<u32>]) -> bool {
        let n = mats[0].rows;
        let mut m: Vec<Vec<Poly>> = vec![vec![Vec::new(); n]; n];
        for (c, b) in coeffs.iter().zip(mats) {
            for i in 0..n {
                for j in 0..n {
                    let x = b.get(i, j);
                    if x != 0 {
                        m[i][j] = self.add(&m[i][j], &self.scale(x, c));
                    }
                }
            }
        }
        self.nonsingular(m)
    }

    /// Rank of a matrix with entries in this field.
    pub fn rank(&self, mut m: Vec<Vec<Poly>>) -> usize {
        let f = &self.f;
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_empty()) else {
                continue;
            };
            m.swap(rank, piv);
            let inv = self.inv(&m[rank][c]).expect("nonzero element of a field");
            for i in rank + 1..rows {
                if m[i][c].is_empty() {
                    continue;
                }
                let factor = self.mul(&m[i][c], &inv);
                for j in c..cols {
                    let t = self.mul(&factor, &m[rank][j]);
                    m[i][j] = poly::sub(f, &m[i][j], &t);
                }
            }
            rank += 1;
        }
        rank
    }

    fn nonsingular(&self, mut m: Vec<Vec<Poly>>) -> bool {
        let n = m.len();
        let f = &self.f;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&i| !m[i][c].is_empty()) else {
                return false;
            };
            m.swap(c, piv);
            let inv = self.inv(&m[c][c]).expect("nonzero element of a field");
            for i in c + 1..n {
                if m[i][c].is_empty() {
                    continue;
                }
                let factor = self.mul(&m[i][c], &inv);
                for j in c..n {
                    let t = self.mul(&factor, &m[c][j]);
                    m[i][j] = poly::sub(f, &m[i][j], &t);
                }
            }
        }
        true
    }
}

/// Randomly samples `tries` prime-field combinations of `mats` and returns
/// the first invertible one.
pub fn sample_invertible(
    f: &Fp,
    mats: &[&Mat<u32>],
    tries: usize,
    rng: &mut impl rand::Rng,
) -> Option<Vec<u32>> {
    if mats.is_empty() {
        return None;
    }
    for _ in 0..tries {
        let coeffs: Vec<u32> = mats.iter().map(|_| rng.gen_range(0..f.p())).collect();
        let n = mats[0].rows;
        let m = Mat::from_fn(n, n, |i, j| {
            coeffs
                .iter()
                .zip(mats)
                .fold(0, |acc, (&c, b)| f.add(acc, f.mul(c, b.get(i, j))))
        });
        if super::matrix::det_field(f, &m) != 0 {
            return Some(coeffs);
        }
    }
    None
}
