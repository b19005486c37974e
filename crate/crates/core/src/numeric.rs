//! Small dense linear-algebra helpers.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn distance_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest eigenvalue of a symmetric positive semidefinite `dim x dim`
/// row-major matrix by power iteration from the all-ones vector.
///
/// Stops when successive estimates agree to `rel_tol` or after `max_iter`.
pub fn power_iteration(matrix: &[f64], dim: usize, rel_tol: f64, max_iter: usize) -> f64 {
    assert_eq!(matrix.len(), dim * dim);
    if dim == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut next = vec![0.0; dim];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        for (r, out) in next.iter_mut().enumerate() {
            *out = dot(&matrix[r * dim..(r + 1) * dim], &v);
        }
        let norm = norm_l2(&next);
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, ni) in v.iter_mut().zip(&next) {
            *vi = ni / norm;
        }
        let converged = (norm - estimate).abs() <= rel_tol * norm;
        estimate = norm;
        if converged {
            break;
        }
    }
    estimate
}

/// Mean and standard error (sample std / sqrt(count)) of `values`.
pub fn mean_and_se(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    let count = values.len();
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut sum = CompensatedSum::new();
    for &v in &values {
        sum.add(v);
    }
    let mean = sum.value() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-10)).abs() < 1e-22);
    }

    #[test]
    fn power_iteration_diagonal() {
        let m = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let l = power_iteration(&m, 3, 1e-12, 10_000);
        assert!((l - 3.0).abs() < 1e-8);
    }

    #[test]
    fn power_iteration_rank_one() {
        // x x^T with x = (1, 2): eigenvalue 5
        let m = [1.0, 2.0, 2.0, 4.0];
        assert!((power_iteration(&m, 2, 1e-12, 100) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn se_of_constant_is_zero() {
        let (m, se) = mean_and_se([2.0; 10]);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn norms() {
        let v = [3.0, -4.0];
        assert_eq!(norm_l1(&v), 7.0);
        assert_eq!(norm_l2(&v), 5.0);
        assert_eq!(norm_inf(&v), 4.0);
    }
}
