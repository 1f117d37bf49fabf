//! Matrices over F_l packed into a single `u64`, used for every hot path of
//! the enumeration oracle.

use crate::gf::{FieldElement, Mat};

pub const MAX_SIDE: usize = 8;

/// Packs an `n x n` matrix over F_l with `bits` bits per entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Codec {
    n: usize,
    ell: u64,
    bits: u32,
    /// `floor(2^64 / ell)`, for reduction without division.
    barrett: u64,
}

impl Codec {
    /// `None` when the matrix does not fit in 64 bits.
    pub fn new(n: usize, ell: u64) -> Option<Codec> {
        let bits = 64 - (ell - 1).leading_zeros();
        if n == 0 || n > MAX_SIDE || (n * n) as u32 * bits > 64 {
            return None;
        }
        Some(Codec {
            n,
            ell,
            bits,
            barrett: (u128::from(u64::MAX) / u128::from(ell)) as u64,
        })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    #[inline]
    pub fn unpack(&self, mut key: u64, out: &mut [u32; MAX_SIDE * MAX_SIDE]) {
        let mask = (1u64 << self.bits) - 1;
        for slot in out.iter_mut().take(self.n * self.n) {
            *slot = (key & mask) as u32;
            key >>= self.bits;
        }
    }

    #[inline]
    pub fn pack(&self, entries: &[u32]) -> u64 {
        let mut key = 0u64;
        for &e in entries[..self.n * self.n].iter().rev() {
            key = (key << self.bits) | e as u64;
        }
        key
    }

    pub fn identity(&self) -> u64 {
        let mut e = [0u32; MAX_SIDE * MAX_SIDE];
        for i in 0..self.n {
            e[i * self.n + i] = 1;
        }
        self.pack(&e)
    }

    #[inline]
    fn reduce(&self, acc: u64) -> u32 {
        let q = ((acc as u128 * self.barrett as u128) >> 64) as u64;
        let mut r = acc - q * self.ell;
        while r >= self.ell {
            r -= self.ell;
        }
        r as u32
    }

    #[inline]
    pub(crate) fn mul_unpacked(&self, x: &[u32], y: &[u32], z: &mut [u32]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += x[i * n + k] as u64 * y[k * n + j] as u64;
                }
                z[i * n + j] = self.reduce(acc);
            }
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let mut x = [0u32; MAX_SIDE * MAX_SIDE];
        let mut y = [0u32; MAX_SIDE * MAX_SIDE];
        let mut z = [0u32; MAX_SIDE * MAX_SIDE];
        self.unpack(a, &mut x);
        self.unpack(b, &mut y);
        self.mul_unpacked(&x, &y, &mut z);
        self.pack(&z)
    }

    /// `s a s^-1`, with `s` and `s^-1` given unpacked.
    #[inline]
    pub(crate) fn conj_unpacked(&self, s: &[u32], a: u64, si: &[u32]) -> u64 {
        let mut x = [0u32; MAX_SIDE * MAX_SIDE];
        let mut y = [0u32; MAX_SIDE * MAX_SIDE];
        self.unpack(a, &mut x);
        self.mul_unpacked(s, &x, &mut y);
        self.mul_unpacked(&y, si, &mut x);
        self.pack(&x)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse by Gauss-Jordan; `None` if singular.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let n = self.n;
        let p = self.ell;
        let mut m = [0u32; MAX_SIDE * MAX_SIDE];
        self.unpack(a, &mut m);
        let mut r = [0u32; MAX_SIDE * MAX_SIDE];
        for i in 0..n {
            r[i * n + i] = 1;
        }
        for col in 0..n {
            let piv = (col..n).find(|&row| m[row * n + col] != 0)?;
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
                r.swap(piv * n + j, col * n + j);
            }
            let s = crate::gf::pow_mod(m[col * n + col] as u64, p - 2, p);
            for j in 0..n {
                m[col * n + j] = (m[col * n + j] as u64 * s % p) as u32;
                r[col * n + j] = (r[col * n + j] as u64 * s % p) as u32;
            }
            for row in 0..n {
                let fct = m[row * n + col] as u64;
                if row == col || fct == 0 {
                    continue;
                }
                for j in 0..n {
                    m[row * n + j] = ((m[row * n + j] as u64 + (p - fct) * m[col * n + j] as u64) % p) as u32;
                    r[row * n + j] = ((r[row * n + j] as u64 + (p - fct) * r[col * n + j] as u64) % p) as u32;
                }
            }
        }
        Some(self.pack(&r))
    }

    pub fn encode(&self, m: &Mat) -> u64 {
        debug_assert_eq!(m.side(), self.n);
        let e: Vec<u32> = m.entries().iter().map(|x| x.0).collect();
        self.pack(&e)
    }

    pub fn decode(&self, key: u64) -> Mat {
        let mut e = [0u32; MAX_SIDE * MAX_SIDE];
        self.unpack(key, &mut e);
        Mat::from_entries(self.n, e[..self.n * self.n].iter().map(|&v| FieldElement(v)).collect())
            .expect("codec side is consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    #[test]
    fn width_limits() {
        assert!(Codec::new(4, 13).is_some());
        assert!(Codec::new(4, 17).is_none());
        assert!(Codec::new(3, 127).is_some());
        assert!(Codec::new(9, 5).is_none());
    }

    #[test]
    fn agrees_with_dense_arithmetic() {
        let k = Field::prime(7).unwrap();
        let c = Codec::new(3, 7).unwrap();
        let a = k.mat_from_ints(&[&[1, 2, 3], &[0, 1, 4], &[5, 6, 1]]);
        let b = k.mat_from_ints(&[&[2, 0, 1], &[3, 1, 0], &[0, 6, 5]]);
        assert_eq!(c.decode(c.encode(&a)), a);
        assert_eq!(c.decode(c.mul(c.encode(&a), c.encode(&b))), k.mat_mul(&a, &b));
        assert_eq!(c.decode(c.inv(c.encode(&a)).unwrap()), k.mat_inv(&a).unwrap());
        assert_eq!(c.decode(c.pow(c.encode(&a), 5)), k.mat_pow(&a, 5));
        assert_eq!(c.decode(c.identity()), Mat::identity(3));
    }
}
