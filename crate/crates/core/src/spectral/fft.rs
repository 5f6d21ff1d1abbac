use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid3;

struct Plan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan(n: usize) -> Arc<Plan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

fn transform(grid: Grid3, data: &mut [Complex64], dir: Direction) {
    let p = plan(grid.n());
    let n = p.n;
    debug_assert_eq!(data.len(), n * n * n);
    let fft = match dir {
        Direction::Forward => &p.forward,
        Direction::Inverse => &p.inverse,
    };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // z lines are contiguous
    fft.process_with_scratch(data, &mut scratch);

    let mut lines = vec![Complex64::default(); n * n * n];
    // y lines: gather each (i, l) line into a contiguous buffer
    for i in 0..n {
        for l in 0..n {
            let dst = (i * n + l) * n;
            for j in 0..n {
                lines[dst + j] = data[(i * n + j) * n + l];
            }
        }
    }
    fft.process_with_scratch(&mut lines, &mut scratch);
    for i in 0..n {
        for l in 0..n {
            let src = (i * n + l) * n;
            for j in 0..n {
                data[(i * n + j) * n + l] = lines[src + j];
            }
        }
    }
    // x lines
    for j in 0..n {
        for l in 0..n {
            let dst = (j * n + l) * n;
            for i in 0..n {
                lines[dst + i] = data[(i * n + j) * n + l];
            }
        }
    }
    fft.process_with_scratch(&mut lines, &mut scratch);
    for j in 0..n {
        for l in 0..n {
            let src = (j * n + l) * n;
            for i in 0..n {
                data[(i * n + j) * n + l] = lines[src + i];
            }
        }
    }
}

/// Physical values to Fourier coefficients normalised so that
/// `f(x) = Σ_k f̂(k) e^{ik·x}` (the zero mode is the grid mean).
pub(crate) fn forward_real(grid: Grid3, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, Direction::Forward);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Fourier coefficients to physical values; the imaginary part is discarded.
pub(crate) fn inverse_real(grid: Grid3, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    transform(grid, &mut data, Direction::Inverse);
    data.into_iter().map(|c| c.re).collect()
}
