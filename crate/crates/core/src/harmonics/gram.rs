//! `L²(S^{d−1})` Gram matrices of conical harmonics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ConicHarmonic;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct GramMatrix {
    pub entries: Vec<Vec<f64>>,
    /// Standard error per entry for the randomised rule (`d > 3`).
    pub std_error: Option<Vec<Vec<f64>>>,
}

impl GramMatrix {
    /// `max_{i≠j} |G_ij| / √(G_ii G_jj)`.
    pub fn max_offdiag_ratio(&self) -> f64 {
        let g = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j {
                    worst = worst.max(g[i][j].abs() / (g[i][i] * g[j][j]).sqrt());
                }
            }
        }
        worst
    }
}

/// Nodes and weights of `order`-point Gauss–Legendre on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn check_degrees(harmonics: &[ConicHarmonic]) -> Result<usize> {
    let Some(first) = harmonics.first() else {
        return Err(Error::InvalidInput("no harmonics given".into()));
    };
    for h in harmonics {
        if h.degree() != first.degree() {
            return Err(Error::MixedDegrees(first.degree(), h.degree()));
        }
        if h.problem.a() != first.problem.a() {
            return Err(Error::InvalidInput(
                "harmonics must share the cone parameters".into(),
            ));
        }
    }
    Ok(first.problem.dim())
}

/// Gram matrix of the restrictions to the unit sphere.
///
/// For `d = 3` this is product Gauss–Legendre (in the polar cosine, `order`
/// nodes) times the trapezoid rule (in the azimuth, `2·order` nodes), exact
/// for polynomial integrands of degree `≤ 2N` once `order ≥ N + 1`. For
/// `d > 3` it is a randomly shifted Halton rule with `1024·order` points per
/// replicate over 16 replicates, with standard errors.
pub fn sphere_gram(harmonics: &[ConicHarmonic], order: usize) -> Result<GramMatrix> {
    let d = check_degrees(harmonics)?;
    if order == 0 {
        return Err(Error::InvalidInput(
            "quadrature order must be positive".into(),
        ));
    }
    if d == 3 {
        let (z, wz) = gauss_legendre(order);
        let az = 2 * order;
        let mut points = Vec::with_capacity(order * az);
        let mut weights = Vec::with_capacity(order * az);
        for (zi, wi) in z.iter().zip(&wz) {
            let rho = (1.0 - zi * zi).sqrt();
            for k in 0..az {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / az as f64;
                points.push(vec![rho * phi.cos(), rho * phi.sin(), *zi]);
                weights.push(wi * 2.0 * std::f64::consts::PI / az as f64);
            }
        }
        Ok(GramMatrix {
            entries: weighted_gram(harmonics, &points, &weights),
            std_error: None,
        })
    } else if d == 2 {
        let count = 4 * order;
        let points: Vec<Vec<f64>> = (0..count)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect();
        let weights = vec![2.0 * std::f64::consts::PI / count as f64; count];
        Ok(GramMatrix {
            entries: weighted_gram(harmonics, &points, &weights),
            std_error: None,
        })
    } else {
        Ok(randomized_gram(harmonics, d, 1024 * order, 16))
    }
}

fn weighted_gram(
    harmonics: &[ConicHarmonic],
    points: &[Vec<f64>],
    weights: &[f64],
) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = harmonics
        .par_iter()
        .map(|h| points.iter().map(|p| h.eval(p)).collect())
        .collect();
    let n = harmonics.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    crate::poly::neumaier_sum(
                        weights
                            .iter()
                            .enumerate()
                            .map(|(p, w)| w * values[i][p] * values[j][p]),
                    )
                })
                .collect()
        })
        .collect()
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn sphere_area(d: usize) -> f64 {
    // 2π^{d/2}/Γ(d/2) through |S^{d−1}| = 2π/(d−2)·|S^{d−3}|.
    let mut area = if d.is_multiple_of(2) {
        2.0 * std::f64::consts::PI
    } else {
        4.0 * std::f64::consts::PI
    };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k < d {
        k += 2;
        area *= 2.0 * std::f64::consts::PI / (k - 2) as f64;
    }
    area
}

fn randomized_gram(
    harmonics: &[ConicHarmonic],
    d: usize,
    points: usize,
    replicates: usize,
) -> GramMatrix {
    let dims = d + d % 2;
    assert!(
        dims <= PRIMES.len(),
        "dimension too large for the Halton rule"
    );
    let area = sphere_area(d);
    let n = harmonics.len();
    let estimates: Vec<Vec<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + rep as u64);
            let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
            let pts: Vec<Vec<f64>> = (1..=points as u64)
                .map(|i| {
                    let u: Vec<f64> = (0..dims)
                        .map(|k| (radical_inverse(i, PRIMES[k]) + shift[k]).fract())
                        .collect();
                    // Box–Muller pairs give Gaussian coordinates; normalising
                    // them is uniform on the sphere.
                    let mut g = Vec::with_capacity(dims);
                    for pair in u.chunks(2) {
                        let rad = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                        let ang = 2.0 * std::f64::consts::PI * pair[1];
                        g.push(rad * ang.cos());
                        g.push(rad * ang.sin());
                    }
                    g.truncate(d);
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    g.iter().map(|v| v / norm).collect()
                })
                .collect();
            let w = vec![area / points as f64; points];
            weighted_gram(harmonics, &pts, &w)
        })
        .collect();
    let r = replicates as f64;
    let mut mean = vec![vec![0.0; n]; n];
    let mut se = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let m = estimates.iter().map(|e| e[i][j]).sum::<f64>() / r;
            let var = estimates.iter().map(|e| (e[i][j] - m).powi(2)).sum::<f64>() / (r - 1.0);
            mean[i][j] = m;
            se[i][j] = (var / r).sqrt();
        }
    }
    GramMatrix {
        entries: mean,
        std_error: Some(se),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        for k in 0..12 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k + 1) as f64
            };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q}");
        }
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        let pi = std::f64::consts::PI;
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * pi * pi / 3.0).abs() < 1e-13);
    }
}
