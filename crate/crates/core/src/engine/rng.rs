use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Separates the random streams of the different estimators.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Domain {
    Shot = 1,
    Ensemble = 2,
    Instructions = 3,
    Hybrid = 4,
}

/// Counter-based stream: the ChaCha key is `(seed, domain)` and the stream id
/// is the shot (or chunk) index, so results do not depend on scheduling.
pub(crate) fn stream_rng(seed: u64, domain: Domain, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n < 16 {
        return (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
    }
    Binomial::new(n, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(1, Domain::Shot, 5).random();
        let b: u64 = stream_rng(1, Domain::Shot, 5).random();
        let c: u64 = stream_rng(1, Domain::Shot, 6).random();
        let d: u64 = stream_rng(1, Domain::Hybrid, 5).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn binomial_edges() {
        let mut rng = stream_rng(0, Domain::Shot, 0);
        assert_eq!(binomial(&mut rng, 0, 0.5), 0);
        assert_eq!(binomial(&mut rng, 10, 0.0), 0);
        assert_eq!(binomial(&mut rng, 10, 1.0), 10);
        let n = 1_000_000;
        let k = binomial(&mut rng, n, 0.3) as f64;
        assert!((k - 300_000.0).abs() < 5.0 * (n as f64 * 0.21).sqrt());
    }
}
