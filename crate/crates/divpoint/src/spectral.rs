//! Substitution matrix, Perron-Frobenius eigendata and exact counting.
//!
//! The matrix entry `A(i, j)` is the number of copies of prototile `i` in
//! the subdivision of prototile `j`. For a primitive system the dominant
//! eigenvalue is `λ²`, the left eigenvector (normalized to sum 1) holds the
//! prototile areas, and powers of `A` count tiles exactly. Counting is done
//! with big integers; floating point appears only in the eigendata.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{cast, Real};
use crate::substitution::SubstitutionSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not primitive; Perron-Frobenius eigendata undefined")]
    NotPrimitive,
    #[error("power iteration did not converge within {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dominant eigenvalue {gamma} does not match lambda² = {lambda_sq}")]
    GammaLambdaMismatch { gamma: f64, lambda_sq: f64 },
}

/// Non-negative integer substitution matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    entries: Vec<Vec<u64>>,
}

impl SubstitutionMatrix {
    pub fn new(entries: Vec<Vec<u64>>) -> Self {
        let n = entries.len();
        assert!(n > 0, "matrix must be non-empty");
        assert!(
            entries.iter().all(|row| row.len() == n),
            "matrix must be square"
        );
        SubstitutionMatrix { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn column_sum(&self, j: usize) -> u64 {
        (0..self.n()).map(|i| self.entries[i][j]).sum()
    }

    /// Sum of all entries (= number of edges between consecutive levels of
    /// the induced stationary diagram).
    pub fn total(&self) -> u64 {
        self.entries.iter().flatten().sum()
    }

    /// `A · v` over big integers.
    pub fn apply_big(&self, v: &[BigUint]) -> Vec<BigUint> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = BigUint::zero();
                for (x, &e) in v.iter().zip(&self.entries[i]) {
                    if e != 0 {
                        acc += x * e;
                    }
                }
                acc
            })
            .collect()
    }

    /// `Aᵀ · v` over big integers.
    pub fn apply_transpose_big(&self, v: &[BigUint]) -> Vec<BigUint> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let mut acc = BigUint::zero();
                for (x, row) in v.iter().zip(&self.entries) {
                    if row[j] != 0 {
                        acc += x * row[j];
                    }
                }
                acc
            })
            .collect()
    }

    fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i][j] as f64 * v[j]).sum())
            .collect()
    }

    fn apply_transpose_f64(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).map(|i| self.entries[i][j] as f64 * v[i]).sum())
            .collect()
    }
}

impl std::fmt::Display for SubstitutionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let width = self
            .entries
            .iter()
            .flatten()
            .map(|e| e.to_string().len())
            .max()
            .unwrap_or(1);
        for row in &self.entries {
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e:width$}")?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Builds the substitution matrix by counting rule entries.
pub fn build_matrix<R: Real>(sys: &SubstitutionSystem<R>) -> SubstitutionMatrix {
    let n = sys.prototiles().len();
    let mut entries = vec![vec![0u64; n]; n];
    for (j, rule) in sys.rules().iter().enumerate() {
        for placement in rule {
            entries[placement.child][j] += 1;
        }
    }
    SubstitutionMatrix::new(entries)
}

/// Smallest `M` with `A^M` entrywise positive, searched up to the Wielandt
/// bound `N² - 2N + 2`; `None` when the matrix is not primitive.
pub fn primitivity_exponent(a: &SubstitutionMatrix) -> Option<usize> {
    let n = a.n();
    let bound = n * n + 2 - 2 * n;
    let base: Vec<Vec<bool>> = a
        .rows()
        .iter()
        .map(|row| row.iter().map(|&e| e > 0).collect())
        .collect();
    let mut power = base.clone();
    for m in 1..=bound.max(1) {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(m);
        }
        // boolean product: power ← power ∘ base
        let mut next = vec![vec![false; n]; n];
        for (i, next_row) in next.iter_mut().enumerate() {
            for k in 0..n {
                if power[i][k] {
                    for (j, cell) in next_row.iter_mut().enumerate() {
                        *cell = *cell || base[k][j];
                    }
                }
            }
        }
        power = next;
    }
    None
}

/// Perron-Frobenius eigendata of a primitive substitution matrix.
#[derive(Debug, Clone)]
pub struct SpectralData<R> {
    /// Dominant eigenvalue γ (= λ² for a substitution in the plane).
    pub gamma: R,
    /// Left eigenvector, entries > 0, Σ = 1; entry `i` is the area of
    /// prototile `i` when the prototile set has total area 1.
    pub v_left: Vec<R>,
    /// Right eigenvector, entries > 0, scaled so `v_leftᵀ · v_right = 1`.
    pub v_right: Vec<R>,
    /// Vertex count per prototile (the vector `v` of the counting formulas).
    pub vertex_counts: Vec<u64>,
    /// Max-norm residual of the two eigenvector equations.
    pub eig_residual: R,
    /// `|v_leftᵀ v_right - 1|`.
    pub biorth_residual: R,
}

/// Options for the power iteration.
#[derive(Debug, Clone, Copy)]
pub struct PerronOptions {
    /// Convergence threshold on successive Rayleigh quotients.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions {
            tol: 1e-13,
            max_iterations: 100_000,
        }
    }
}

fn power_iteration(
    a: &SubstitutionMatrix,
    transpose: bool,
    opts: PerronOptions,
) -> Result<(f64, Vec<f64>), SpectralError> {
    let n = a.n();
    let mut x = vec![1.0 / n as f64; n];
    let mut rayleigh_prev = f64::NAN;
    let mut residual = f64::NAN;
    let tol = opts.tol.max(f64::EPSILON * 16.0);
    for _ in 0..opts.max_iterations {
        let y = if transpose {
            a.apply_transpose_f64(&x)
        } else {
            a.apply_f64(&x)
        };
        let num: f64 = x.iter().zip(&y).map(|(xi, yi)| xi * yi).sum();
        let den: f64 = x.iter().map(|xi| xi * xi).sum();
        let rayleigh = num / den;
        // The Rayleigh difference alone can dip below tolerance transiently
        // when subdominant eigenvalues are complex; the eigen-residual on the
        // current iterate guards against stopping on such a phase alignment.
        residual = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| (yi - rayleigh * xi).abs())
            .fold(0.0, f64::max);
        let done = (rayleigh - rayleigh_prev).abs() < tol && residual < tol * rayleigh.abs();
        let scale: f64 = y.iter().sum();
        x = y.into_iter().map(|v| v / scale).collect();
        if done {
            return Ok((rayleigh, x));
        }
        rayleigh_prev = rayleigh;
    }
    Err(SpectralError::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Computes γ, v_L and v_R by power iteration on `A` and `Aᵀ`.
///
/// `lambda` is the substitution scale; a dominant eigenvalue away from `λ²`
/// is rejected since it means the matrix does not belong to the claimed
/// geometry. `vertex_counts[i]` must hold the vertex count of prototile `i`.
pub fn perron<R: Real>(
    a: &SubstitutionMatrix,
    lambda: R,
    vertex_counts: Vec<u64>,
    opts: PerronOptions,
) -> Result<SpectralData<R>, SpectralError> {
    if primitivity_exponent(a).is_none() {
        return Err(SpectralError::NotPrimitive);
    }
    let n = a.n();
    let (gamma_r, vr_raw) = power_iteration(a, false, opts)?;
    let (gamma_l, vl_raw) = power_iteration(a, true, opts)?;
    let gamma = 0.5 * (gamma_r + gamma_l);

    let sum_l: f64 = vl_raw.iter().sum();
    let v_left: Vec<f64> = vl_raw.iter().map(|v| v / sum_l).collect();
    let dot: f64 = v_left.iter().zip(&vr_raw).map(|(l, r)| l * r).sum();
    let v_right: Vec<f64> = vr_raw.iter().map(|v| v / dot).collect();

    let mut eig_residual = 0.0f64;
    let av_r = a.apply_f64(&v_right);
    let atv_l = a.apply_transpose_f64(&v_left);
    for i in 0..n {
        eig_residual = eig_residual
            .max((av_r[i] - gamma * v_right[i]).abs())
            .max((atv_l[i] - gamma * v_left[i]).abs());
    }
    let biorth: f64 = v_left.iter().zip(&v_right).map(|(l, r)| l * r).sum();
    let biorth_residual = (biorth - 1.0).abs();

    let lambda_sq = (lambda * lambda).to_f64().unwrap_or(f64::NAN);
    if (gamma - lambda_sq).abs() > 1e-9 * lambda_sq.max(1.0) {
        return Err(SpectralError::GammaLambdaMismatch { gamma, lambda_sq });
    }
    assert_eq!(vertex_counts.len(), n, "vertex count vector length");

    Ok(SpectralData {
        gamma: cast(gamma),
        v_left: v_left.into_iter().map(cast).collect(),
        v_right: v_right.into_iter().map(cast).collect(),
        vertex_counts,
        eig_residual: cast(eig_residual),
        biorth_residual: cast(biorth_residual),
    })
}

/// Eigendata for a whole system: matrix from the rules, vertex counts from
/// the prototile polygons.
pub fn spectral_data<R: Real>(
    sys: &SubstitutionSystem<R>,
) -> Result<SpectralData<R>, SpectralError> {
    let a = build_matrix(sys);
    let vcounts = sys
        .prototiles()
        .iter()
        .map(|p| p.shape.vertices().len() as u64)
        .collect();
    perron(&a, sys.lambda(), vcounts, PerronOptions::default())
}

fn ones(n: usize) -> Vec<BigUint> {
    vec![BigUint::one(); n]
}

fn basis(n: usize, s: usize) -> Vec<BigUint> {
    let mut v = vec![BigUint::zero(); n];
    v[s] = BigUint::one();
    v
}

fn pow_apply(a: &SubstitutionMatrix, k: usize, mut v: Vec<BigUint>) -> Vec<BigUint> {
    for _ in 0..k {
        v = a.apply_big(&v);
    }
    v
}

/// `1ᵀ Aᵏ 1`: total number of tiles at level `k`.
pub fn count_tiles(a: &SubstitutionMatrix, k: usize) -> BigUint {
    pow_apply(a, k, ones(a.n())).into_iter().sum()
}

/// `1ᵀ Aᵏ e_s`: number of level-`k` descendants of one prototile-`s` tile.
pub fn count_subtiles(a: &SubstitutionMatrix, k: usize, s: usize) -> BigUint {
    pow_apply(a, k, basis(a.n(), s)).into_iter().sum()
}

/// `vᵀ Aᵏ 1`: total number of (tile, vertex) incidences at level `k`.
pub fn count_vertex_incidences(a: &SubstitutionMatrix, vertex_counts: &[u64], k: usize) -> BigUint {
    assert_eq!(vertex_counts.len(), a.n());
    pow_apply(a, k, ones(a.n()))
        .into_iter()
        .zip(vertex_counts)
        .map(|(c, &v)| c * v)
        .sum()
}

/// Per-type tile counts at level `k`: the vector `Aᵏ 1`.
pub fn count_tiles_per_type(a: &SubstitutionMatrix, k: usize) -> Vec<BigUint> {
    pow_apply(a, k, ones(a.n()))
}

/// `‖γ^{-k} Aᵏ − v_R v_Lᵀ‖_∞` (entrywise max), a convergence diagnostic for
/// the projection onto the dominant eigenspace.
pub fn projection_defect<R: Real>(
    a: &SubstitutionMatrix,
    data: &SpectralData<R>,
    k: usize,
) -> R {
    let n = a.n();
    // Aᵏ columns exactly, then scale in floating point.
    let mut defect = R::zero();
    let gamma_pow = data.gamma.powi(k as i32);
    for j in 0..n {
        let col = pow_apply(a, k, basis(n, j));
        for (i, entry) in col.iter().enumerate() {
            let scaled = cast::<R>(entry.to_f64().expect("finite count")) / gamma_pow;
            let target = data.v_right[i] * data.v_left[j];
            defect = defect.max((scaled - target).abs());
        }
    }
    defect
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    const PHI: f64 = 1.618_033_988_749_895;

    fn penrose_matrix() -> SubstitutionMatrix {
        build_matrix(&systems::penrose::<f64>())
    }

    #[test]
    fn penrose_matrix_matches_known_entries() {
        let a = penrose_matrix();
        let expected = [
            [1, 0, 0, 1],
            [0, 1, 1, 0],
            [1, 0, 1, 1],
            [0, 1, 1, 1],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(a.entry(i, j), *want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn square4_matrix_is_four() {
        let a = build_matrix(&systems::square4::<f64>());
        assert_eq!(a.n(), 1);
        assert_eq!(a.entry(0, 0), 4);
    }

    #[test]
    fn column_sums_match_rule_lengths() {
        let sys = systems::penrose::<f64>();
        let a = build_matrix(&sys);
        for (j, rule) in sys.rules().iter().enumerate() {
            assert_eq!(a.column_sum(j), rule.len() as u64);
        }
    }

    #[test]
    fn primitivity_exponents() {
        assert_eq!(primitivity_exponent(&penrose_matrix()), Some(2));
        let a = SubstitutionMatrix::new(vec![vec![4]]);
        assert_eq!(primitivity_exponent(&a), Some(1));
        // two prototiles substituting only into themselves
        let block = SubstitutionMatrix::new(vec![vec![4, 0], vec![0, 4]]);
        assert_eq!(primitivity_exponent(&block), None);
    }

    #[test]
    fn perron_rejects_non_primitive() {
        let block = SubstitutionMatrix::new(vec![vec![4, 0], vec![0, 4]]);
        let err = perron::<f64>(&block, 2.0, vec![4, 4], PerronOptions::default()).unwrap_err();
        assert_eq!(err, SpectralError::NotPrimitive);
    }

    #[test]
    fn penrose_eigendata_golden() {
        let sd = spectral_data(&systems::penrose::<f64>()).unwrap();
        assert!((sd.gamma - PHI * PHI).abs() < 1e-9);
        let expected_vl = [1.0, 1.0, PHI, PHI].map(|v| v / (2.0 * PHI * PHI));
        for (got, want) in sd.v_left.iter().zip(expected_vl) {
            assert!((got - want).abs() < 1e-9, "v_L entry {got} vs {want}");
        }
        // v_R = φ²/(φ²+1) · [1, 1, φ, φ]ᵀ
        let scale = PHI * PHI / (PHI * PHI + 1.0);
        let expected_vr = [1.0, 1.0, PHI, PHI].map(|v| v * scale);
        for (got, want) in sd.v_right.iter().zip(expected_vr) {
            assert!((got - want).abs() < 1e-9, "v_R entry {got} vs {want}");
        }
        let dot: f64 = sd.v_left.iter().zip(&sd.v_right).map(|(l, r)| l * r).sum();
        assert!((dot - 1.0).abs() < 1e-12);
        assert!(sd.eig_residual < 1e-10);
    }

    #[test]
    fn trivial_matrix_eigendata() {
        let a = SubstitutionMatrix::new(vec![vec![4]]);
        let sd = perron::<f64>(&a, 2.0, vec![4], PerronOptions::default()).unwrap();
        assert_eq!(sd.gamma, 4.0);
        assert_eq!(sd.v_left, vec![1.0]);
        assert_eq!(sd.v_right, vec![1.0]);
    }

    #[test]
    fn counting_goldens() {
        let a = penrose_matrix();
        assert_eq!(count_tiles(&a, 2), BigUint::from(26u32));
        assert_eq!(
            count_vertex_incidences(&a, &[3, 3, 3, 3], 2),
            BigUint::from(78u32)
        );
        // prototile b has index 1
        assert_eq!(count_subtiles(&a, 2, 1), BigUint::from(5u32));
        assert_eq!(count_tiles(&a, 0), BigUint::from(4u32));
    }

    #[test]
    fn projection_defect_decays() {
        let sys = systems::penrose::<f64>();
        let a = build_matrix(&sys);
        let sd = spectral_data(&sys).unwrap();
        assert!(projection_defect(&a, &sd, 20) < 1e-6);
        let mut prev = projection_defect(&a, &sd, 2);
        for k in 3..=16 {
            let d = projection_defect(&a, &sd, k);
            assert!(d < prev, "defect not decreasing at k={k}: {d} vs {prev}");
            prev = d;
        }
    }

    #[test]
    fn projection_defect_exact_for_1x1() {
        let a = SubstitutionMatrix::new(vec![vec![4]]);
        let sd = perron::<f64>(&a, 2.0, vec![4], PerronOptions::default()).unwrap();
        for k in 0..30 {
            assert!(projection_defect(&a, &sd, k) <= 1e-15);
        }
    }

    #[test]
    fn ratio_limit_reaches_left_eigenvector() {
        // 1ᵀ A^{k-j} e_s / 1ᵀ Aᵏ 1 → v_L(s) / γ^j
        let sys = systems::penrose::<f64>();
        let a = build_matrix(&sys);
        let sd = spectral_data(&sys).unwrap();
        for j in 0..3usize {
            for s in 0..4 {
                let k = j + 12;
                let num = count_subtiles(&a, k - j, s).to_f64().unwrap();
                let den = count_tiles(&a, k).to_f64().unwrap();
                let expect = sd.v_left[s] / sd.gamma.powi(j as i32);
                assert!(
                    (num / den - expect).abs() < 1e-4,
                    "ratio limit failed for j={j} s={s}"
                );
            }
        }
    }
}
