use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::functions as f;
use super::oracle::{run_oracle, OracleOptions};
use crate::engine::Objective;
use crate::gp::Outcome;
use crate::numerics::BoxDomain;
use crate::{Error, Result};

/// Returned by [`log10_distance`] for an exact hit.
pub const LOG10_DISTANCE_FLOOR: f64 = -16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemId {
    Csf,
    Ros,
    Bra,
    Gpr,
    Cam,
    Shu,
    Hm3,
    Sh5,
    Sh7,
    Sh10,
    Hm6,
    Ras,
}

impl ProblemId {
    pub const ALL: [ProblemId; 12] = [
        ProblemId::Csf,
        ProblemId::Ros,
        ProblemId::Bra,
        ProblemId::Gpr,
        ProblemId::Cam,
        ProblemId::Shu,
        ProblemId::Hm3,
        ProblemId::Sh5,
        ProblemId::Sh7,
        ProblemId::Sh10,
        ProblemId::Hm6,
        ProblemId::Ras,
    ];

    pub fn abbreviation(&self) -> &'static str {
        match self {
            ProblemId::Csf => "CSF",
            ProblemId::Ros => "ROS",
            ProblemId::Bra => "BRA",
            ProblemId::Gpr => "GPR",
            ProblemId::Cam => "CAM",
            ProblemId::Shu => "SHU",
            ProblemId::Hm3 => "HM3",
            ProblemId::Sh5 => "SH5",
            ProblemId::Sh7 => "SH7",
            ProblemId::Sh10 => "SH10",
            ProblemId::Hm6 => "HM6",
            ProblemId::Ras => "RAS",
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ProblemId::Csf => f::cosine_sine(x),
            ProblemId::Ros => f::rosenbrock(x),
            ProblemId::Bra => f::branin(x),
            ProblemId::Gpr => f::goldstein_price(x),
            ProblemId::Cam => f::six_hump_camel(x),
            ProblemId::Shu => f::shubert(x),
            ProblemId::Hm3 => f::hartmann3(x),
            ProblemId::Sh5 => f::shekel(x, 5),
            ProblemId::Sh7 => f::shekel(x, 7),
            ProblemId::Sh10 => f::shekel(x, 10),
            ProblemId::Hm6 => f::hartmann6(x),
            ProblemId::Ras => f::rastrigin(x),
        }
    }

    /// Per-coordinate term when the function is a plain sum over axes.
    pub fn separable_term(&self) -> Option<fn(f64) -> f64> {
        match self {
            ProblemId::Ras => Some(f::rastrigin_term),
            _ => None,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        ProblemId::ALL
            .iter()
            .copied()
            .find(|p| p.abbreviation() == upper)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Region of the domain in which evaluations fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FailureRegion {
    /// `lo ≤ x[axis] ≤ hi`.
    Interval { axis: usize, lo: f64, hi: f64 },
    /// Closed Euclidean ball.
    Disc { center: Vec<f64>, radius: f64 },
    /// Closed axis-aligned box.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `normal · x ≤ offset`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

impl FailureRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FailureRegion::Interval { axis, lo, hi } => x[*axis] >= *lo && x[*axis] <= *hi,
            FailureRegion::Disc { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() <= radius * radius
            }
            FailureRegion::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= *l && *v <= *u)
            }
            FailureRegion::HalfSpace { normal, offset } => x.iter().zip(normal).map(|(a, n)| a * n).sum::<f64>() <= *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub id: ProblemId,
    pub dims: usize,
    pub domain: BoxDomain,
    /// Reference global minimum value (of the success region when a failure
    /// region covers every unconstrained argmin).
    pub f_glob: f64,
    pub global_argmins: Vec<Vec<f64>>,
    pub n_local: u64,
    pub n_global: u64,
    pub failure_region: Option<FailureRegion>,
    pub noise_snr_db: Option<f64>,
    /// Set when the failure region hides every unconstrained global argmin.
    pub region_covers_optimum: bool,
}

impl BenchmarkProblem {
    pub fn name(&self) -> &'static str {
        self.id.abbreviation()
    }

    /// Noise-free closed-form value, ignoring any failure region.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.id.value(x)
    }

    pub fn fails_at(&self, x: &[f64]) -> bool {
        self.failure_region.as_ref().is_some_and(|r| r.contains(x))
    }

    /// Objective adapter for the BO engine.
    pub fn objective(&self, noise: Option<NoiseSpec>) -> ProblemObjective {
        ProblemObjective::new(self.clone(), noise)
    }
}

fn problem(id: ProblemId, domain: BoxDomain, f_glob: f64, argmins: Vec<Vec<f64>>, n_local: u64, n_global: u64) -> BenchmarkProblem {
    BenchmarkProblem {
        id,
        dims: domain.dims(),
        domain,
        f_glob,
        global_argmins: argmins,
        n_local,
        n_global,
        failure_region: None,
        noise_snr_db: None,
        region_covers_optimum: false,
    }
}

fn shubert_argmins() -> Vec<Vec<f64>> {
    // The 1-D factor attains its minimum at `lows` and its maximum at `highs`;
    // the product is minimal on every mixed pair.
    let lows = [-7.708_313_735_499_347, -1.425_128_428_319_761, 4.858_056_878_859_826];
    let highs = [-7.083_506_407_651_56, -0.800_321_100_471_973_1, 5.482_864_206_707_613];
    let mut pts = Vec::with_capacity(18);
    for a in lows {
        for b in highs {
            pts.push(vec![a, b]);
            pts.push(vec![b, a]);
        }
    }
    pts
}

pub fn make_problem(name: &str) -> Result<BenchmarkProblem> {
    let id: ProblemId = name.parse()?;
    let bx = |lo: Vec<f64>, hi: Vec<f64>| BoxDomain::new(lo, hi).expect("static bounds");
    let cube = |lo: f64, hi: f64, d: usize| BoxDomain::cube(lo, hi, d).expect("static bounds");
    Ok(match id {
        ProblemId::Csf => problem(id, cube(0.0, 10.0, 1), -2.909_218_261_567_362_5, vec![vec![4.421_244_377_450_941]], 8, 1),
        ProblemId::Ros => problem(id, cube(-5.0, 10.0, 2), 0.0, vec![vec![1.0, 1.0]], 1, 1),
        ProblemId::Bra => problem(
            id,
            bx(vec![-5.0, 0.0], vec![10.0, 15.0]),
            0.397_887_357_729_738_2,
            vec![
                vec![-std::f64::consts::PI, 12.275],
                vec![std::f64::consts::PI, 2.275],
                vec![3.0 * std::f64::consts::PI, 2.475],
            ],
            3,
            3,
        ),
        ProblemId::Gpr => problem(id, cube(-2.0, 2.0, 2), 3.0, vec![vec![0.0, -1.0]], 4, 1),
        ProblemId::Cam => problem(
            id,
            bx(vec![-3.0, -2.0], vec![3.0, 2.0]),
            -1.031_628_453_489_877_4,
            vec![vec![0.089_842_008_935_272_33, -0.712_656_403_019_058], vec![-0.089_842_010_005_280_86, 0.712_656_401_643_332_8]],
            6,
            2,
        ),
        ProblemId::Shu => problem(id, cube(-10.0, 10.0, 2), -186.730_908_831_023_8, shubert_argmins(), 760, 18),
        ProblemId::Hm3 => problem(
            id,
            cube(0.0, 1.0, 3),
            -3.862_779_787_332_663,
            vec![vec![0.114_588_869_085_410_62, 0.555_648_892_832_236_7, 0.852_546_985_428_261_1]],
            4,
            1,
        ),
        ProblemId::Sh5 => problem(
            id,
            cube(0.0, 10.0, 4),
            -10.153_199_679_058_229,
            vec![vec![4.000_037_152_376_549, 4.000_133_278_657_566, 4.000_037_151_057_555, 4.000_133_277_090_425]],
            5,
            1,
        ),
        ProblemId::Sh7 => problem(
            id,
            cube(0.0, 10.0, 4),
            -10.402_940_566_818_662,
            vec![vec![4.000_572_914_277_084, 4.000_689_366_040_889, 3.999_489_710_793_844_7, 3.999_606_160_006_792_3]],
            7,
            1,
        ),
        ProblemId::Sh10 => problem(
            id,
            cube(0.0, 10.0, 4),
            -10.536_409_816_692_046,
            vec![vec![4.000_746_533_201_553, 4.000_592_934_538_832, 3.999_663_397_220_255_8, 3.999_509_801_285_225_5]],
            10,
            1,
        ),
        ProblemId::Hm6 => problem(
            id,
            cube(0.0, 1.0, 6),
            -3.322_368_011_415_515,
            vec![vec![
                0.201_689_512_094_809_95,
                0.150_010_692_776_851_97,
                0.476_873_971_833_793,
                0.275_332_431_065_528,
                0.311_651_617_985_189_6,
                0.657_300_535_855_056,
            ]],
            4,
            1,
        ),
        ProblemId::Ras => problem(id, cube(-5.12, 5.12, 10), 0.0, vec![vec![0.0; 10]], 11u64.pow(10), 1),
    })
}

/// Wraps `base` so that evaluations inside `region` fail. When the region
/// hides every unconstrained argmin, the reference optimum is recomputed by
/// the oracle over the success region and `region_covers_optimum` is set.
pub fn make_constrained_problem(base: &str, region: FailureRegion) -> Result<BenchmarkProblem> {
    let mut p = make_problem(base)?;
    let kept: Vec<Vec<f64>> = p.global_argmins.iter().filter(|x| !region.contains(x)).cloned().collect();
    p.failure_region = Some(region);
    if kept.is_empty() {
        let report = run_oracle(&p, &OracleOptions::coarse())?;
        p.f_glob = report.f_best;
        p.global_argmins = report.global_minima;
        p.region_covers_optimum = true;
    } else {
        p.global_argmins = kept;
    }
    Ok(p)
}

/// Additive Gaussian noise at a given signal-to-noise ratio (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
    /// Resolved noise standard deviation.
    pub std: f64,
}

impl NoiseSpec {
    /// `std = RMS(f - mean f) / 10^(snr/20)` with the signal statistics
    /// estimated from 10⁴ uniform samples of the domain.
    pub fn new(problem: &BenchmarkProblem, snr_db: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3d);
        let values: Vec<f64> = (0..10_000).map(|_| problem.value(&problem.domain.sample_uniform(&mut rng))).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let rms = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
        let std = if snr_db.is_infinite() && snr_db > 0.0 { 0.0 } else { rms / 10f64.powf(snr_db / 20.0) };
        Self { snr_db, seed, std }
    }
}

/// Evaluates `p` at `x`: failure inside the failure region, otherwise the
/// closed-form value plus Gaussian noise when `noise` is given.
pub fn eval_problem<R: Rng + ?Sized>(p: &BenchmarkProblem, x: &[f64], noise: Option<&NoiseSpec>, rng: &mut R) -> Result<Outcome> {
    if !p.domain.contains(x) {
        return Err(Error::OutOfDomain);
    }
    if p.fails_at(x) {
        return Ok(Outcome::Failure);
    }
    let mut v = p.value(x);
    if let Some(n) = noise.filter(|n| n.std > 0.0) {
        v += Normal::new(0.0, n.std).expect("positive std").sample(rng);
    }
    Ok(Outcome::Success(v))
}

/// `log10 |f_min - f_glob|`, floored at -16 for an exact hit.
pub fn log10_distance(f_min: f64, f_glob: f64) -> f64 {
    let d = (f_min - f_glob).abs();
    if d == 0.0 {
        LOG10_DISTANCE_FLOOR
    } else {
        d.log10().max(LOG10_DISTANCE_FLOOR)
    }
}

/// A benchmark problem bound to its own noise stream.
#[derive(Debug, Clone)]
pub struct ProblemObjective {
    problem: BenchmarkProblem,
    noise: Option<NoiseSpec>,
    rng: ChaCha8Rng,
}

impl ProblemObjective {
    pub fn new(problem: BenchmarkProblem, noise: Option<NoiseSpec>) -> Self {
        let seed = noise.map_or(0, |n| n.seed);
        Self { problem, noise, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn problem(&self) -> &BenchmarkProblem {
        &self.problem
    }
}

impl Objective for ProblemObjective {
    fn evaluate(&mut self, x: &[f64]) -> Outcome {
        let mut clipped = x.to_vec();
        self.problem.domain.clip(&mut clipped);
        eval_problem(&self.problem, &clipped, self.noise.as_ref(), &mut self.rng).expect("clipped point lies in the domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_and_unknown_names() {
        for id in ProblemId::ALL {
            let p = make_problem(id.abbreviation()).unwrap();
            assert_eq!(p.dims, p.domain.dims());
            assert_eq!(p.global_argmins.len() as u64, p.n_global);
            for x in &p.global_argmins {
                assert!(p.domain.contains(x), "{id}");
                assert!((p.value(x) - p.f_glob).abs() <= 1e-6, "{id}: {} vs {}", p.value(x), p.f_glob);
            }
        }
        assert_eq!(make_problem("sh10").unwrap().id, ProblemId::Sh10);
        assert!(matches!(make_problem("XYZ"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn closed_form_spot_values() {
        assert_eq!(f::rosenbrock(&[1.0, 1.0]), 0.0);
        assert_eq!(f::rastrigin(&[0.0; 10]), 0.0);
        assert_eq!(f::goldstein_price(&[0.0, -1.0]), 3.0);
        assert!((f::branin(&[std::f64::consts::PI, 2.275]) - 0.397_887).abs() < 1e-6);
        let cam = make_problem("CAM").unwrap();
        assert!((cam.f_glob + 1.031_628).abs() < 1e-6);
    }

    #[test]
    fn log10_distance_examples() {
        assert!((log10_distance(0.398_887, 0.397_887) + 3.0).abs() < 1e-9);
        assert_eq!(log10_distance(5.0, 5.0), -16.0);
        assert!((log10_distance(-10.1532 + 0.01, -10.1532) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn failure_region_and_domain_checks() {
        let mut p = make_problem("CSF").unwrap();
        p.failure_region = Some(FailureRegion::Interval { axis: 0, lo: 0.0, hi: 5.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(eval_problem(&p, &[2.0], None, &mut rng).unwrap(), Outcome::Failure);
        assert!(matches!(eval_problem(&p, &[7.0], None, &mut rng).unwrap(), Outcome::Success(_)));
        assert_eq!(eval_problem(&p, &[11.0], None, &mut rng), Err(Error::OutOfDomain));
    }

    #[test]
    fn infinite_snr_is_noiseless() {
        let p = make_problem("BRA").unwrap();
        let n = NoiseSpec::new(&p, f64::INFINITY, 3);
        assert_eq!(n.std, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(eval_problem(&p, &[1.0, 2.0], Some(&n), &mut rng).unwrap(), Outcome::Success(p.value(&[1.0, 2.0])));
    }

    #[test]
    fn constrained_interval_keeps_csf_optimum() {
        let p = make_constrained_problem("CSF", FailureRegion::Interval { axis: 0, lo: 0.0, hi: 3.0 }).unwrap();
        assert_eq!(p.f_glob, make_problem("CSF").unwrap().f_glob);
        assert!(!p.region_covers_optimum);
    }
}
