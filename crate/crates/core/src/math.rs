//! Complex vector helpers, seeded CSCG sampling and the exponential-integral
//! ergodic rate.

use std::ops::{Add, Index, Sub};

use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::num::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const E1_MAX_ITER: usize = 1000;
/// Crossover between the power series and the continued fraction.
const E1_SERIES_LIMIT: f64 = 1.0;

/// Dense complex vector carrying one per-AP channel or beamformer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexVec<T>(pub Vec<Complex<T>>);

impl<T: Real> ComplexVec<T> {
    pub fn zeros(n: usize) -> Self {
        ComplexVec(vec![Complex::new(T::zero(), T::zero()); n])
    }

    pub fn from_parts(entries: &[(T, T)]) -> Self {
        ComplexVec(entries.iter().map(|&(re, im)| Complex::new(re, im)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// `self^H other`, conjugating the receiver.
    pub fn dot(&self, other: &Self) -> Result<Complex<T>> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn scale(&self, k: T) -> Self {
        ComplexVec(self.0.iter().map(|z| z * k).collect())
    }

    pub fn scale_complex(&self, k: Complex<T>) -> Self {
        ComplexVec(self.0.iter().map(|z| z * k).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> Index<usize> for ComplexVec<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.0[i]
    }
}

impl<T: Real> Add for &ComplexVec<T> {
    type Output = ComplexVec<T>;

    fn add(self, rhs: Self) -> ComplexVec<T> {
        assert_eq!(self.len(), rhs.len(), "vector lengths differ");
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<T: Real> Sub for &ComplexVec<T> {
    type Output = ComplexVec<T>;

    fn sub(self, rhs: Self) -> ComplexVec<T> {
        assert_eq!(self.len(), rhs.len(), "vector lengths differ");
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Deterministic generator; every stochastic routine takes one explicitly.
#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator owned by one Monte Carlo trial: the base key with the
    /// trial index as ChaCha stream id. XOR-ing the index into the seed
    /// would make base seeds that differ only in low bits share trial sets.
    pub fn for_trial(seed: u64, trial: usize) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(trial as u64);
        SimRng { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn standard_normal<T: Real>(&mut self) -> T {
        let v: f64 = StandardNormal.sample(&mut self.inner);
        T::lit(v)
    }

    /// One CN(0, variance) draw: real and imaginary parts each N(0, variance/2).
    pub fn cscg<T: Real>(&mut self, variance: T) -> Complex<T> {
        let s = (variance / T::lit(2.0)).sqrt();
        let re: T = self.standard_normal();
        let im: T = self.standard_normal();
        Complex::new(re * s, im * s)
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `n` i.i.d. CN(0, variance) entries.
pub fn sample_cscg_vector<T: Real>(n: usize, variance: T, rng: &mut SimRng) -> Result<ComplexVec<T>> {
    if n == 0 {
        return Err(Error::invalid("n", "vector length must be positive"));
    }
    if !(variance >= T::zero()) || !variance.is_finite() {
        return Err(Error::invalid("variance", format!("must be finite and >= 0, got {variance}")));
    }
    Ok(ComplexVec((0..n).map(|_| rng.cscg(variance)).collect()))
}

/// `e^x E1(x)` for `x > 0`, never forming `e^x` for large `x`.
pub fn exp_scaled_e1<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() || !(x > T::zero()) {
        return Err(Error::invalid("x", format!("must be finite and > 0, got {x}")));
    }
    if x <= T::lit(E1_SERIES_LIMIT) {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(scaled_e1_continued_fraction(x))
    }
}

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
fn e1_series<T: Real>(x: T) -> T {
    let eps = T::epsilon();
    let mut sum = T::zero();
    let mut fact_term = T::one(); // (-x)^k / k!
    for k in 1..E1_MAX_ITER {
        let kk = T::lit(k as f64);
        fact_term = fact_term * (-x) / kk;
        let term = fact_term / kk;
        sum = sum + term;
        if term.abs() <= sum.abs() * eps {
            break;
        }
    }
    -T::lit(EULER_GAMMA) - x.ln() - sum
}

// Modified Lentz evaluation of e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
fn scaled_e1_continued_fraction<T: Real>(x: T) -> T {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let two = T::lit(2.0);
    let mut b = x + T::one();
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..E1_MAX_ITER {
        let fi = T::lit(i as f64);
        let an = -fi * fi;
        b = b + two;
        d = T::one() / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h = h * del;
        if (del - T::one()).abs() <= eps {
            break;
        }
    }
    h
}

/// `∫₀^∞ log₂(1 + βx) e^{-x} dx`, ergodic rate of a link whose gain is
/// exponentially distributed with mean `beta`.
pub fn ergodic_rayleigh_rate<T: Real>(beta: T) -> Result<T> {
    if !beta.is_finite() || !(beta >= T::zero()) {
        return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    if beta == T::zero() {
        return Ok(T::zero());
    }
    let x = beta.recip();
    if !x.is_finite() {
        // subnormal beta: e^x E1(x) ~ 1/x
        return Ok(beta * T::LOG2_E());
    }
    Ok(exp_scaled_e1(x)? * T::LOG2_E())
}

/// `Σ_m a_m^H w_m`.
pub fn beamformed_sum<T: Real>(channels: &[ComplexVec<T>], weights: &[ComplexVec<T>]) -> Result<Complex<T>> {
    if channels.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} channel vectors vs {} weight vectors",
            channels.len(),
            weights.len()
        )));
    }
    channels
        .iter()
        .zip(weights)
        .try_fold(Complex::new(T::zero(), T::zero()), |acc, (a, w)| Ok(acc + a.dot(w)?))
}
