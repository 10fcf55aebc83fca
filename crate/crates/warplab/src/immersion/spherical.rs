//! Unit sphere S^{d-1} in R^d in generic spherical coordinates, with
//! analytic first and second angle derivatives.
//!
//! Component i of the embedding is a product of sines and one cosine:
//! n_0 = cos t_0, n_i = cos t_i * prod_{j<i} sin t_j,
//! n_{d-1} = prod_{j<d-1} sin t_j.

#[derive(Clone, Copy)]
enum Factor {
    One,
    Sin,
    Cos,
}

pub struct SphericalChart {
    /// Ambient dimension d; the chart takes d-1 angles.
    pub dim: usize,
}

impl SphericalChart {
    pub fn angle_count(&self) -> usize {
        self.dim - 1
    }

    fn factor(&self, comp: usize, angle: usize) -> Factor {
        if angle < comp.min(self.dim - 1) {
            Factor::Sin
        } else if angle == comp && comp < self.dim - 1 {
            Factor::Cos
        } else {
            Factor::One
        }
    }

    /// Component `comp` with factor of angle `a` differentiated `da` times
    /// and factor of angle `b` differentiated `db` times.
    fn component(&self, angles: &[f64], comp: usize, d: &[(usize, usize)]) -> f64 {
        let mut acc = 1.0;
        for (j, &t) in angles.iter().enumerate() {
            let order: usize = d.iter().filter(|(a, _)| *a == j).map(|(_, o)| o).sum();
            let f = match self.factor(comp, j) {
                Factor::One => match order {
                    0 => 1.0,
                    _ => 0.0,
                },
                Factor::Sin => match order {
                    0 => t.sin(),
                    1 => t.cos(),
                    _ => -t.sin(),
                },
                Factor::Cos => match order {
                    0 => t.cos(),
                    1 => -t.sin(),
                    _ => -t.cos(),
                },
            };
            if f == 0.0 {
                return 0.0;
            }
            acc *= f;
        }
        acc
    }

    pub fn value(&self, angles: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|c| self.component(angles, c, &[]))
            .collect()
    }

    pub fn d1(&self, angles: &[f64], a: usize) -> Vec<f64> {
        (0..self.dim)
            .map(|c| self.component(angles, c, &[(a, 1)]))
            .collect()
    }

    pub fn d2(&self, angles: &[f64], a: usize, b: usize) -> Vec<f64> {
        let d: Vec<(usize, usize)> = if a == b {
            vec![(a, 2)]
        } else {
            vec![(a, 1), (b, 1)]
        };
        (0..self.dim)
            .map(|c| self.component(angles, c, &d))
            .collect()
    }
}
