//! A minimal dense NCHW tensor. Nothing clever: a flat `Vec<f64>` with
//! shape bookkeeping and plane accessors for the conv loops.

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    data: Vec<f64>,
    n: usize,
    c: usize,
    h: usize,
    w: usize,
}

impl Tensor4 {
    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Self {
        Tensor4 {
            data: vec![0.0; n * c * h * w],
            n,
            c,
            h,
            w,
        }
    }

    pub fn from_vec(data: Vec<f64>, n: usize, c: usize, h: usize, w: usize) -> Self {
        assert_eq!(data.len(), n * c * h * w, "data length does not match shape");
        Tensor4 { data, n, c, h, w }
    }

    /// Shape as (batch, channels, height, width).
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn batch(&self) -> usize {
        self.n
    }

    pub fn channels(&self) -> usize {
        self.c
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((n * self.c + c) * self.h + y) * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, v: f64) {
        self.data[((n * self.c + c) * self.h + y) * self.w + x] = v;
    }

    /// One (batch, channel) plane as a row-major slice.
    #[inline]
    pub fn plane(&self, n: usize, c: usize) -> &[f64] {
        let start = (n * self.c + c) * self.h * self.w;
        &self.data[start..start + self.h * self.w]
    }

    #[inline]
    pub fn plane_mut(&mut self, n: usize, c: usize) -> &mut [f64] {
        let start = (n * self.c + c) * self.h * self.w;
        &mut self.data[start..start + self.h * self.w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major_nchw() {
        let mut t = Tensor4::zeros(2, 3, 4, 5);
        t.set(1, 2, 3, 4, 7.0);
        assert_eq!(t.as_slice()[2 * 3 * 4 * 5 - 1], 7.0);
        assert_eq!(t.at(1, 2, 3, 4), 7.0);
        assert_eq!(t.plane(1, 2)[3 * 5 + 4], 7.0);
    }

    #[test]
    #[should_panic]
    fn from_vec_rejects_wrong_lengths() {
        Tensor4::from_vec(vec![0.0; 5], 1, 1, 2, 3);
    }
}
