use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::geometry::{BoundingBox, Point};

/// Complex values on the pixel centers of a box.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub bbox: BoundingBox,
    pub level: u32,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(bbox: BoundingBox, level: u32) -> Self {
        let n = 1usize << level;
        ComplexField {
            bbox,
            level,
            values: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Samples `f` at every pixel center.
    pub fn from_fn(bbox: BoundingBox, level: u32, f: impl Fn(Point) -> Complex64) -> Self {
        let n = 1usize << level;
        let values = (0..n * n)
            .map(|k| f(bbox.pixel_center(level, k % n, k / n)))
            .collect();
        ComplexField {
            bbox,
            level,
            values,
        }
    }

    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn pixel_size(&self) -> f64 {
        self.bbox.pixel_size(self.level)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `sum |v|^2 h^2`, the squared L2 norm of the pixelwise-constant field.
    pub fn l2_squared(&self) -> f64 {
        let h = self.pixel_size();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// In-place 2-D FFT of an `m x m` row-major array.
fn fft2(data: &mut [Complex64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        for j in 0..m {
            col[j] = data[j * m + i];
        }
        fft.process(&mut col);
        for j in 0..m {
            data[j * m + i] = col[j];
        }
    }
}

/// Discrete Cauchy transform `(1 / (pi z)) * density`: each pixel carries
/// mass `density * h^2`, the kernel vanishes at the origin pixel, and the
/// convolution runs on a zero-padded grid of twice the size so it is not
/// periodic.
pub fn cauchy_transform(density: &ComplexField) -> ComplexField {
    let n = density.n();
    let m = 2 * n;
    let h = density.pixel_size();
    let mut kernel = vec![Complex64::new(0.0, 0.0); m * m];
    for dj in -(n as i64 - 1)..=(n as i64 - 1) {
        for di in -(n as i64 - 1)..=(n as i64 - 1) {
            if di == 0 && dj == 0 {
                continue;
            }
            let z = Complex64::new(di as f64, dj as f64) * h;
            let k = (dj.rem_euclid(m as i64) as usize) * m + di.rem_euclid(m as i64) as usize;
            kernel[k] = h * h / (std::f64::consts::PI * z);
        }
    }
    let mut padded = vec![Complex64::new(0.0, 0.0); m * m];
    for j in 0..n {
        padded[j * m..j * m + n].copy_from_slice(&density.values[j * n..(j + 1) * n]);
    }
    fft2(&mut kernel, m, false);
    fft2(&mut padded, m, false);
    for (a, b) in padded.iter_mut().zip(&kernel) {
        *a *= b;
    }
    fft2(&mut padded, m, true);
    let scale = 1.0 / (m * m) as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            values[j * n + i] = padded[j * m + i] * scale;
        }
    }
    ComplexField {
        bbox: density.bbox,
        level: density.level,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BoundingBox {
        BoundingBox::new(Point::ORIGIN, 1.0).unwrap()
    }

    #[test]
    fn matches_direct_sum() {
        let bbox = unit_box();
        let level = 4;
        let d = ComplexField::from_fn(bbox, level, |p| Complex64::new(p.x * p.y + 0.3, p.x - p.y));
        let c = cauchy_transform(&d);
        let n = d.n();
        let h = d.pixel_size();
        for k in (0..n * n).step_by(7) {
            let z = bbox.pixel_center(level, k % n, k / n);
            let mut s = Complex64::new(0.0, 0.0);
            for q in 0..n * n {
                if q != k {
                    let w = bbox.pixel_center(level, q % n, q / n);
                    let dz = Complex64::new(z.x - w.x, z.y - w.y);
                    s += d.values[q] * h * h / (std::f64::consts::PI * dz);
                }
            }
            assert!((s - c.values[k]).norm() < 1e-12, "{k}");
        }
    }

    #[test]
    fn disk_indicator_closed_form() {
        let bbox = unit_box();
        let level = 9;
        let r = 0.5;
        let d = ComplexField::from_fn(bbox, level, |p| {
            Complex64::new(if p.norm() <= r { 1.0 } else { 0.0 }, 0.0)
        });
        let c = cauchy_transform(&d);
        let n = d.n();
        let mut worst = 0.0f64;
        for k in 0..n * n {
            let p = bbox.pixel_center(level, k % n, k / n);
            let z = Complex64::new(p.x, p.y);
            let exact = if p.norm() <= r { z.conj() } else { r * r / z };
            worst = worst.max((c.values[k] - exact).norm());
        }
        assert!(worst <= 0.03 * r, "{worst}");
    }

    #[test]
    fn zero_density_gives_zero() {
        let c = cauchy_transform(&ComplexField::zeros(unit_box(), 5));
        assert_eq!(c.sup_norm(), 0.0);
    }
}
