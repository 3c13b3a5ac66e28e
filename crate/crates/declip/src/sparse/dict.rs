//! Overcomplete DCT dictionary with the operations the solvers need:
//! sparse synthesis, full analysis and a precomputed gradient step size.

/// A real dictionary whose columns are unit-norm DCT-II atoms sampled at
/// `n_atoms` uniformly spaced frequencies. With `n_atoms == frame_len`
/// this is the orthonormal DCT basis; the default elsewhere is twofold
/// overcomplete (`n_atoms = 2 * frame_len`).
#[derive(Debug, Clone)]
pub struct Dictionary {
    frame_len: usize,
    n_atoms: usize,
    /// Atom-major storage: atom `j` occupies `atoms[j*frame_len..(j+1)*frame_len]`.
    atoms: Vec<f64>,
    norm_sq: f64,
}

impl Dictionary {
    /// Builds the dictionary and precomputes its squared spectral norm by
    /// power iteration (used as `1 / norm_sq` gradient step size).
    ///
    /// # Panics
    /// Panics unless `0 < frame_len <= n_atoms`.
    pub fn overcomplete_dct(frame_len: usize, n_atoms: usize) -> Self {
        assert!(frame_len > 0, "frame length must be positive");
        assert!(
            n_atoms >= frame_len,
            "need at least as many atoms as samples for a complete dictionary"
        );
        let mut atoms = Vec::with_capacity(frame_len * n_atoms);
        for j in 0..n_atoms {
            let freq = std::f64::consts::PI * j as f64 / n_atoms as f64;
            let start = atoms.len();
            let mut energy = 0.0;
            for t in 0..frame_len {
                let v = (freq * (t as f64 + 0.5)).cos();
                energy += v * v;
                atoms.push(v);
            }
            let scale = 1.0 / energy.sqrt();
            for v in &mut atoms[start..] {
                *v *= scale;
            }
        }
        let mut dict = Dictionary {
            frame_len,
            n_atoms,
            atoms,
            norm_sq: 0.0,
        };
        dict.norm_sq = dict.power_iteration_norm_sq();
        dict
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Squared spectral norm of the dictionary matrix.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        &self.atoms[j * self.frame_len..(j + 1) * self.frame_len]
    }

    /// `D * a` for a sparse coefficient vector given as (atom, value) pairs.
    pub fn synthesize(&self, coeffs: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.frame_len];
        for &(j, c) in coeffs {
            for (o, &v) in out.iter_mut().zip(self.atom(j)) {
                *o += c * v;
            }
        }
        out
    }

    /// `D^T * r`, the correlation of a residual with every atom.
    pub fn analyze(&self, r: &[f64], out: &mut [f64]) {
        assert_eq!(r.len(), self.frame_len);
        assert_eq!(out.len(), self.n_atoms);
        for (j, slot) in out.iter_mut().enumerate() {
            let atom = self.atom(j);
            let mut acc = 0.0;
            for (&a, &b) in atom.iter().zip(r) {
                acc += a * b;
            }
            *slot = acc;
        }
    }

    fn power_iteration_norm_sq(&self) -> f64 {
        // Largest eigenvalue of D D^T; the starting vector just needs a
        // component along the top eigenvector, a fixed ramp works fine.
        let mut v: Vec<f64> = (0..self.frame_len)
            .map(|t| 1.0 + (t as f64) / (self.frame_len as f64))
            .collect();
        let mut lambda = 1.0;
        let mut coeffs = vec![0.0; self.n_atoms];
        for _ in 0..80 {
            self.analyze(&v, &mut coeffs);
            let mut next = vec![0.0; self.frame_len];
            for (j, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    for (o, &a) in next.iter_mut().zip(self.atom(j)) {
                        *o += c * a;
                    }
                }
            }
            let norm = next.iter().map(|&x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            lambda = norm / v.iter().map(|&x| x * x).sum::<f64>().sqrt().max(1e-300);
            for (slot, &x) in v.iter_mut().zip(&next) {
                *slot = x / norm;
            }
        }
        lambda
    }
}
