//! Gray-labelled square QAM and the 512-point cross constellation.

use super::PhyError;
use num_complex::Complex64;

/// Supported modulation orders.
pub const QAM_ORDERS: [u32; 6] = [4, 16, 64, 256, 512, 1024];

/// Unit-energy constellation with its bit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    bits: u32,
    /// `points[label]`.
    points: Vec<Complex64>,
}

fn gray_to_binary(mut g: u32) -> u32 {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Odd-integer amplitude of Gray label `g` on an axis with `levels` levels.
fn axis_level(g: u32, levels: u32) -> f64 {
    2.0 * gray_to_binary(g) as f64 - (levels as f64 - 1.0)
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self, PhyError> {
        if !QAM_ORDERS.contains(&order) {
            return Err(PhyError::QamOrder(order));
        }
        let bits = order.trailing_zeros();
        // square orders split bits evenly; 512 starts from a 32 x 16 Gray grid
        let (bi, bq) = (bits.div_ceil(2), bits / 2);
        let (li, lq) = (1u32 << bi, 1u32 << bq);
        let mut points: Vec<Complex64> = (0..order)
            .map(|label| {
                let (gi, gq) = (label >> bq, label & (lq - 1));
                let (x, y) = (axis_level(gi, li), axis_level(gq, lq));
                if order == 512 && x.abs() > 23.0 {
                    // fold the outer columns into the empty top and bottom bands
                    Complex64::new(x.signum() * y.abs(), y.signum() * (x.abs() - 8.0))
                } else {
                    Complex64::new(x, y)
                }
            })
            .collect();
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let s = energy.sqrt().recip();
        points.iter_mut().for_each(|p| *p *= s);
        Ok(Self { order, bits, points })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn map_labels(&self, labels: &[u32]) -> Vec<Complex64> {
        labels.iter().map(|&l| self.points[l as usize]).collect()
    }

    /// Nearest constellation label of every symbol.
    pub fn demap_labels(&self, symbols: &[Complex64]) -> Vec<u32> {
        symbols
            .iter()
            .map(|s| {
                let mut best = (f64::INFINITY, 0u32);
                for (l, p) in self.points.iter().enumerate() {
                    let d = (s - p).norm_sqr();
                    if d < best.0 {
                        best = (d, l as u32);
                    }
                }
                best.1
            })
            .collect()
    }

    /// Bits (one per byte, MSB first per symbol) to symbols.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>, PhyError> {
        let k = self.bits as usize;
        if !bits.len().is_multiple_of(k) {
            return Err(PhyError::BitCount { got: bits.len(), per_symbol: k });
        }
        Ok(bits
            .chunks(k)
            .map(|c| self.points[c.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)])
            .collect())
    }

    /// Minimum-distance hard decisions back to bits.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let k = self.bits;
        self.demap_labels(symbols).into_iter().flat_map(|l| (0..k).rev().map(move |i| ((l >> i) & 1) as u8)).collect()
    }
}

/// Maps bits to unit-energy QAM symbols.
pub fn qam_map(bits: &[u8], order: u32) -> Result<Vec<Complex64>, PhyError> {
    Constellation::new(order)?.map(bits)
}

/// Minimum-distance demapping to bits.
pub fn qam_demap(symbols: &[Complex64], order: u32) -> Result<Vec<u8>, PhyError> {
    Ok(Constellation::new(order)?.demap(symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qpsk_quadrants() {
        let s = qam_map(&[0, 0, 0, 1, 1, 1, 1, 0], 4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [(-h, -h), (-h, h), (h, h), (h, -h)];
        for (p, (x, y)) in s.iter().zip(want) {
            assert!((p.re - x).abs() < 1e-15 && (p.im - y).abs() < 1e-15, "{p}");
        }
    }

    #[test]
    fn unit_energy_and_distinct_points() {
        for order in QAM_ORDERS {
            let c = Constellation::new(order).unwrap();
            let e = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            assert!((e - 1.0).abs() < 1e-12, "order {order}");
            let mut keys: Vec<(i64, i64)> =
                c.points().iter().map(|p| ((p.re * 1e9).round() as i64, (p.im * 1e9).round() as i64)).collect();
            keys.sort_unstable();
            keys.dedup();
            assert_eq!(keys.len(), order as usize);
        }
    }

    #[test]
    fn cross_shape() {
        let c = Constellation::new(512).unwrap();
        let scale = c.points().iter().map(|p| p.re.abs()).fold(0.0, f64::max) / 23.0;
        for p in c.points() {
            let (x, y) = ((p.re / scale).round().abs(), (p.im / scale).round().abs());
            assert!(x <= 23.0 && y <= 23.0);
            assert!(!(x > 15.0 && y > 15.0), "corner point {x} {y}");
        }
    }

    #[test]
    fn square_neighbours_differ_in_one_bit() {
        let c = Constellation::new(64).unwrap();
        let d = 2.0 / (42.0f64).sqrt();
        for (a, pa) in c.points().iter().enumerate() {
            for (b, pb) in c.points().iter().enumerate() {
                if ((pa - pb).norm() - d).abs() < 1e-9 {
                    assert_eq!((a ^ b).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for order in QAM_ORDERS {
            let k = order.trailing_zeros() as usize;
            let bits: Vec<u8> = (0..(10_000 / k) * k).map(|_| rng.gen_range(0..2)).collect();
            let s = qam_map(&bits, order).unwrap();
            assert_eq!(qam_demap(&s, order).unwrap(), bits);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(qam_map(&[0, 1], 8), Err(PhyError::QamOrder(8)));
        assert_eq!(qam_map(&[0, 1, 1], 16), Err(PhyError::BitCount { got: 3, per_symbol: 4 }));
    }
}
