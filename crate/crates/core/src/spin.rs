//! Direction geometry, the consecutive-measurement law and the singlet
//! joint distribution, each with a closed form and a sampler.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Neg;

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{bernoulli, uniform01};

/// Tolerance on `|v|² − 1` accepted by [`Direction::new`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Tolerance on the total of a [`JointDistribution`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// A unit vector: a measurement axis or an intrinsic spin orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const Z: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };
    pub const X: Direction = Direction {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Direction = Direction {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };

    /// Accepts components whose squared norm is within [`UNIT_TOLERANCE`] of 1.
    /// Never normalizes; use [`Direction::normalized`] for raw vectors.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm_sq = x * x + y * y + z * z;
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitDirection { x, y, z, norm_sq });
        }
        Ok(Self { x, y, z })
    }

    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::DegenerateVector);
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// From polar angle `theta` (from +z) and azimuth `phi`, in radians.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// Direction in the x–z plane at `angle` radians from the vertical (+z)
    /// axis, positive towards +x.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: s, y: 0.0, z: c }
    }

    /// Isotropic direction: `z` uniform on `[−1, 1]`, azimuth uniform.
    /// Consumes exactly two `u64` draws.
    pub fn random_uniform<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let z = 2.0 * uniform01(rng) - 1.0;
        let phi = 2.0 * PI * uniform01(rng);
        let r = (1.0 - z * z).max(0.0).sqrt();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: r * cp,
            y: r * sp,
            z,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Dot product, clamped to `[−1, 1]`.
    pub fn dot(&self, other: &Direction) -> f64 {
        (self.x * other.x + self.y * other.y + self.z * other.z).clamp(-1.0, 1.0)
    }

    fn cross_norm(&self, other: &Direction) -> f64 {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        (cx * cx + cy * cy + cz * cz).sqrt()
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Direction::new(v[0], v[1], v[2])
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.components()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// Binary measurement result; `Plus` is deflection along the measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign())
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    /// `+axis` for `Plus`, `−axis` for `Minus`.
    pub fn orient(self, axis: Direction) -> Direction {
        match self {
            Outcome::Plus => axis,
            Outcome::Minus => -axis,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidArgument(format!(
                "outcome must be ±1, got {other}"
            ))),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.sign()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// Definite pre-measurement spin orientations of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinAssignment {
    pub alice_spin: Direction,
    pub bob_spin: Direction,
}

/// Probabilities of the four joint outcomes, indexed (Alice, Bob).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

impl JointDistribution {
    pub fn new(p_pp: f64, p_pm: f64, p_mp: f64, p_mm: f64) -> Result<Self> {
        let cells = [p_pp, p_pm, p_mp, p_mm];
        if let Some(p) = cells.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!(
                "cell {p} outside [0, 1]"
            )));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("cells sum to {total}")));
        }
        Ok(Self {
            p_pp,
            p_pm,
            p_mp,
            p_mm,
        })
    }

    pub fn cells(&self) -> [f64; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }

    pub fn probability(&self, alice: Outcome, bob: Outcome) -> f64 {
        match (alice, bob) {
            (Outcome::Plus, Outcome::Plus) => self.p_pp,
            (Outcome::Plus, Outcome::Minus) => self.p_pm,
            (Outcome::Minus, Outcome::Plus) => self.p_mp,
            (Outcome::Minus, Outcome::Minus) => self.p_mm,
        }
    }

    /// Expected product of outcomes.
    pub fn correlation(&self) -> f64 {
        self.p_pp - self.p_pm - self.p_mp + self.p_mm
    }

    pub fn alice_plus(&self) -> f64 {
        self.p_pp + self.p_pm
    }

    pub fn bob_plus(&self) -> f64 {
        self.p_pp + self.p_mp
    }

    pub fn max_abs_deviation(&self, other: &JointDistribution) -> f64 {
        self.cells()
            .iter()
            .zip(other.cells())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Angle between two directions in `[0, π]`.
pub fn angle_between(m: &Direction, n: &Direction) -> f64 {
    // atan2 form keeps full precision near 0 and π, unlike acos.
    let raw_dot = m.x * n.x + m.y * n.y + m.z * n.z;
    m.cross_norm(n).atan2(raw_dot)
}

/// Probability that a measurement along `n` repeats an outcome just obtained
/// along `m`: `cos²(α/2) = (1 + m·n)/2`.
pub fn consecutive_same_probability(m: &Direction, n: &Direction) -> f64 {
    ((1.0 + m.dot(n)) / 2.0).clamp(0.0, 1.0)
}

/// Measures a particle with definite spin `spin` along `measure`.
///
/// Returns the outcome and the collapsed spin (`±measure`). Consumes exactly
/// one `u64` draw.
pub fn sequential_sample<R: RngCore + ?Sized>(
    spin: &Direction,
    measure: &Direction,
    rng: &mut R,
) -> (Outcome, Direction) {
    let outcome = Outcome::from_bool(bernoulli(rng, consecutive_same_probability(spin, measure)));
    (outcome, outcome.orient(*measure))
}

/// Singlet statistics: `p_pp = p_mm = sin²(α/2)/2`, `p_pm = p_mp = cos²(α/2)/2`.
pub fn singlet_joint_distribution(a: &Direction, b: &Direction) -> JointDistribution {
    let d = a.dot(b);
    let same = (1.0 - d) / 4.0;
    let opposite = (1.0 + d) / 4.0;
    JointDistribution {
        p_pp: same,
        p_pm: opposite,
        p_mp: opposite,
        p_mm: same,
    }
}

pub fn singlet_correlation_exact(a: &Direction, b: &Direction) -> f64 {
    -a.dot(b)
}

/// Draws one pair outcome from the singlet distribution. Alice's outcome is
/// a fair coin; Bob agrees with it with probability `sin²(α/2)`. Consumes
/// exactly two `u64` draws, Alice's first.
pub fn sample_singlet<R: RngCore + ?Sized>(
    a: &Direction,
    b: &Direction,
    rng: &mut R,
) -> (Outcome, Outcome) {
    let alice = Outcome::from_bool(bernoulli(rng, 0.5));
    let agree = bernoulli(rng, (1.0 - a.dot(b)) / 2.0);
    let bob = if agree { alice } else { alice.flipped() };
    (alice, bob)
}
