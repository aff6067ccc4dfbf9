//! Counter-based random numbers (Philox4x32-10).
//!
//! Every draw is a pure function of `(seed, run_index, step, slot)`, so a
//! path can be replayed from any step and paths can be distributed over
//! workers in any order without changing their noise.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// The Philox4x32 bijection with 10 rounds.
#[inline]
pub fn philox4x32_10(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Uniform on the open interval (0, 1) from 64 random bits.
#[inline(always)]
fn open_unit(hi: u32, lo: u32) -> f64 {
    let bits = (((hi as u64) << 32) | lo as u64) >> 11;
    (bits as f64 + 0.5) * TWO_POW_M53
}

/// Random stream of one simulated path.
///
/// The stream is positioned at a step with [`RngStream::seek_step`]; within a
/// step, successive draws walk through consecutive counter blocks.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u32; 2],
    run_lo: u32,
    step: u64,
    block: u32,
    buf: [u32; 4],
    used: usize,
}

impl RngStream {
    pub fn new(seed: u64, run_index: u64) -> Self {
        // the high half of the run index is folded into the key; for a fixed
        // seed the map (run_index -> key, counter) stays injective
        let key = [seed as u32, ((seed >> 32) as u32) ^ ((run_index >> 32) as u32)];
        RngStream {
            key,
            run_lo: run_index as u32,
            step: 0,
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }

    /// Position the stream at the first draw slot of `step`.
    #[inline]
    pub fn seek_step(&mut self, step: u64) {
        self.step = step;
        self.block = 0;
        self.used = 4;
    }

    #[inline]
    fn refill(&mut self) {
        let ctr = [self.block, self.run_lo, self.step as u32, (self.step >> 32) as u32];
        self.buf = philox4x32_10(ctr, self.key);
        self.block = self.block.wrapping_add(1);
        self.used = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.used >= 4 {
            self.refill();
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    /// Uniform draw on (0, 1).
    #[inline]
    pub fn draw_uniform(&mut self) -> f64 {
        let hi = self.next_u32();
        let lo = self.next_u32();
        open_unit(hi, lo)
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    #[inline]
    pub fn draw_gaussian(&mut self) -> f64 {
        let u1 = self.draw_uniform();
        let u2 = self.draw_uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn known_answers() {
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn same_key_same_stream() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for step in [0u64, 1, 99, 1 << 40] {
            a.seek_step(step);
            b.seek_step(step);
            for _ in 0..9 {
                assert_eq!(a.draw_gaussian().to_bits(), b.draw_gaussian().to_bits());
            }
        }
    }

    #[test]
    fn replay_from_any_step() {
        let mut a = RngStream::new(1, 0);
        let mut seq = Vec::new();
        for step in 0..50 {
            a.seek_step(step);
            seq.push((a.draw_gaussian(), a.draw_uniform()));
        }
        let mut b = RngStream::new(1, 0);
        b.seek_step(37);
        assert_eq!((b.draw_gaussian(), b.draw_uniform()), seq[37]);
    }

    #[test]
    fn runs_and_seeds_differ() {
        let first = |seed, run| {
            let mut r = RngStream::new(seed, run);
            r.seek_step(0);
            r.next_u32()
        };
        assert_ne!(first(0, 0), first(0, 1));
        assert_ne!(first(0, 0), first(1, 0));
        assert_ne!(first(0, 1 << 32), first(0, 0));
    }

    #[test]
    fn uniform_and_gaussian_moments() {
        let n = 200_000;
        let mut r = RngStream::new(42, 0);
        let (mut su, mut sg, mut sg2, mut sg4) = (0.0, 0.0, 0.0, 0.0);
        for step in 0..n {
            r.seek_step(step);
            let u = r.draw_uniform();
            assert!(u > 0.0 && u < 1.0);
            su += u;
            let g = r.draw_gaussian();
            sg += g;
            sg2 += g * g;
            sg4 += g * g * g * g;
        }
        let n = n as f64;
        assert!((su / n - 0.5).abs() < 4.0 * (1.0 / 12.0f64 / n).sqrt());
        assert!((sg / n).abs() < 4.0 / n.sqrt());
        assert!((sg2 / n - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
        assert!((sg4 / n - 3.0).abs() < 4.0 * (96.0 / n).sqrt());
    }

    #[test]
    fn cross_run_correlation_is_small() {
        let n = 100_000u64;
        let mut a = RngStream::new(5, 10);
        let mut b = RngStream::new(5, 11);
        let mut s = 0.0;
        for step in 0..n {
            a.seek_step(step);
            b.seek_step(step);
            s += a.draw_gaussian() * b.draw_gaussian();
        }
        assert!((s / n as f64).abs() < 4.0 / (n as f64).sqrt());
    }
}
