use rand::seq::SliceRandom;
use rand::Rng;

use super::BoxDomain;

/// Latin hypercube design of `n` points: each axis is cut into `n` equal
/// bins and every bin receives exactly one point, placed uniformly at random
/// inside it. Bins are matched across axes by independent permutations.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, domain: &BoxDomain, rng: &mut R) -> Vec<Vec<f64>> {
    let d = domain.dims();
    let mut points = vec![vec![0.0; d]; n];
    let mut bins: Vec<usize> = (0..n).collect();
    for axis in 0..d {
        bins.shuffle(rng);
        let (lo, width) = (domain.lower()[axis], domain.width(axis));
        for (point, &bin) in points.iter_mut().zip(&bins) {
            let t = (bin as f64 + rng.gen::<f64>()) / n as f64;
            // Rounding in `lo + width * t` could land on the next bin edge.
            let upper_edge = lo + width * (bin + 1) as f64 / n as f64;
            point[axis] = (lo + width * t).min(upper_edge);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stratified(points: &[Vec<f64>], domain: &BoxDomain) -> bool {
        let n = points.len();
        (0..domain.dims()).all(|axis| {
            let mut seen = vec![false; n];
            for p in points {
                let t = (p[axis] - domain.lower()[axis]) / domain.width(axis);
                let bin = ((t * n as f64).floor() as usize).min(n - 1);
                if seen[bin] {
                    return false;
                }
                seen[bin] = true;
            }
            true
        })
    }

    #[test]
    fn four_points_one_per_quarter() {
        let unit = BoxDomain::cube(0.0, 1.0, 2).unwrap();
        let pts = latin_hypercube(4, &unit, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(stratified(&pts, &unit));
    }

    #[test]
    fn single_point_inside() {
        let dom = BoxDomain::cube(-2.0, 2.0, 1).unwrap();
        let pts = latin_hypercube(1, &dom, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(pts.len(), 1);
        assert!(dom.contains(&pts[0]));
    }

    #[test]
    fn deterministic_given_seed() {
        let dom = BoxDomain::cube(-1.0, 3.0, 3).unwrap();
        let a = latin_hypercube(30, &dom, &mut ChaCha8Rng::seed_from_u64(11));
        let b = latin_hypercube(30, &dom, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn stratification_sweep() {
        for d in 1..=10 {
            let dom = BoxDomain::new((0..d).map(|i| -(i as f64)).collect(), vec![1.5; d]).unwrap();
            for n in 1..=50 {
                for seed in 0..20 {
                    let pts = latin_hypercube(n, &dom, &mut ChaCha8Rng::seed_from_u64(seed));
                    assert!(stratified(&pts, &dom), "n={n} d={d} seed={seed}");
                    assert!(pts.iter().all(|p| dom.contains(p)));
                }
            }
        }
    }
}
