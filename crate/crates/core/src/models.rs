//! Pair-measurement theories behind one interface: the quantum singlet,
//! three hidden-spin models and a deterministic sign model.
//!
//! Local models never see the remote setting. Their station responses are
//! computed by [`local_response`], whose signature only carries the
//! station's own setting and a redacted [`MeasurementContext`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{
    angle_between, sample_singlet, sequential_sample, Direction, Outcome, SpinAssignment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Station {
    Alice,
    Bob,
}

impl Station {
    pub fn other(self) -> Station {
        match self {
            Station::Alice => Station::Bob,
            Station::Bob => Station::Alice,
        }
    }
}

/// Which station measures first in the simulated time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Ordering {
    #[default]
    AliceFirst,
    BobFirst,
}

impl Ordering {
    pub fn stations(self) -> [Station; 2] {
        match self {
            Ordering::AliceFirst => [Station::Alice, Station::Bob],
            Ordering::BobFirst => [Station::Bob, Station::Alice],
        }
    }
}

/// Spin values of the pair along the preparation axis: `+−` puts Alice up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Assignment {
    #[default]
    #[serde(rename = "+-")]
    PlusMinus,
    #[serde(rename = "-+")]
    MinusPlus,
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+-" | "pm" | "plus-minus" => Ok(Assignment::PlusMinus),
            "-+" | "mp" | "minus-plus" => Ok(Assignment::MinusPlus),
            other => Err(Error::InvalidArgument(format!(
                "assignment must be '+-' or '-+', got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assignment::PlusMinus => "+-",
            Assignment::MinusPlus => "-+",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Quantum,
    DefiniteAligned,
    IsotropicOpposite,
    NonlocalAligning,
    DeterministicSign,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Quantum,
        ModelKind::DefiniteAligned,
        ModelKind::IsotropicOpposite,
        ModelKind::NonlocalAligning,
        ModelKind::DeterministicSign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Quantum => "quantum",
            ModelKind::DefiniteAligned => "definite",
            ModelKind::IsotropicOpposite => "isotropic",
            ModelKind::NonlocalAligning => "nonlocal",
            ModelKind::DeterministicSign => "sign",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quantum" | "singlet" => Ok(ModelKind::Quantum),
            "definite" | "definite-aligned" => Ok(ModelKind::DefiniteAligned),
            "isotropic" | "isotropic-opposite" => Ok(ModelKind::IsotropicOpposite),
            "nonlocal" | "nonlocal-aligning" => Ok(ModelKind::NonlocalAligning),
            "sign" | "deterministic-sign" => Ok(ModelKind::DeterministicSign),
            other => Err(Error::InvalidArgument(format!(
                "unknown model '{other}' (expected quantum, definite, isotropic, nonlocal or sign)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A pair-measurement theory together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Singlet statistics sampled directly; no hidden spins.
    Quantum,
    /// Spins fixed along `axis` with the given assignment, measured locally
    /// with the consecutive-measurement law.
    DefiniteAligned {
        axis: Direction,
        assignment: Assignment,
    },
    /// Opposite spins `(λ, −λ)` with λ isotropic, measured locally.
    IsotropicOpposite,
    /// Opposite isotropic spins; the first measurement re-aligns the remote
    /// spin anti-parallel to its collapsed direction.
    NonlocalAligning,
    /// Alice outputs `sign(a·λ)`, Bob `−sign(b·λ)`, λ isotropic.
    DeterministicSign,
}

impl ModelSpec {
    /// Spec of the given kind with default parameters (`DefiniteAligned`
    /// uses the vertical axis and `+−`).
    pub fn with_defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Quantum => ModelSpec::Quantum,
            ModelKind::DefiniteAligned => ModelSpec::DefiniteAligned {
                axis: Direction::Z,
                assignment: Assignment::PlusMinus,
            },
            ModelKind::IsotropicOpposite => ModelSpec::IsotropicOpposite,
            ModelKind::NonlocalAligning => ModelSpec::NonlocalAligning,
            ModelKind::DeterministicSign => ModelSpec::DeterministicSign,
        }
    }

    pub fn definite_aligned(axis: Direction, assignment: Assignment) -> Self {
        ModelSpec::DefiniteAligned { axis, assignment }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Quantum => ModelKind::Quantum,
            ModelSpec::DefiniteAligned { .. } => ModelKind::DefiniteAligned,
            ModelSpec::IsotropicOpposite => ModelKind::IsotropicOpposite,
            ModelSpec::NonlocalAligning => ModelKind::NonlocalAligning,
            ModelSpec::DeterministicSign => ModelKind::DeterministicSign,
        }
    }

    /// Whether a station's response may depend on the remote setting.
    pub fn is_parameter_dependent(&self) -> bool {
        matches!(self, ModelSpec::Quantum | ModelSpec::NonlocalAligning)
    }

    pub fn is_local(&self) -> bool {
        !self.is_parameter_dependent()
    }

    /// Draws the hidden state for one trial.
    ///
    /// Isotropic, non-local and sign models consume two `u64` draws; the
    /// other models consume none.
    pub fn prepare<R: RngCore + ?Sized>(&self, rng: &mut R) -> HiddenState {
        let spins = match self {
            ModelSpec::Quantum => return HiddenState::unprepared(ModelKind::Quantum),
            ModelSpec::DefiniteAligned { axis, assignment } => {
                let alice = match assignment {
                    Assignment::PlusMinus => *axis,
                    Assignment::MinusPlus => -*axis,
                };
                SpinAssignment {
                    alice_spin: alice,
                    bob_spin: -alice,
                }
            }
            ModelSpec::IsotropicOpposite
            | ModelSpec::NonlocalAligning
            | ModelSpec::DeterministicSign => {
                let lambda = Direction::random_uniform(rng);
                SpinAssignment {
                    alice_spin: lambda,
                    bob_spin: -lambda,
                }
            }
        };
        let mut state = HiddenState::unprepared(self.kind());
        state.spins = Some(spins);
        state
            .history
            .push(HistoryEvent::Prepared(Station::Alice), spins.alice_spin);
        state
            .history
            .push(HistoryEvent::Prepared(Station::Bob), spins.bob_spin);
        state
    }

    /// Measures Alice along `a` and Bob along `b`, in the given order,
    /// mutating the hidden state. Returns `(alice, bob)`.
    pub fn measure_pair<R: RngCore + ?Sized>(
        &self,
        state: &mut HiddenState,
        a: &Direction,
        b: &Direction,
        ordering: Ordering,
        rng: &mut R,
    ) -> Result<(Outcome, Outcome)> {
        if state.model != self.kind() {
            return Err(Error::ModelMismatch {
                spec: self.kind().name(),
                state: state.model.name(),
            });
        }
        if let ModelSpec::Quantum = self {
            return Ok(sample_singlet(a, b, rng));
        }
        if state.spins.is_none() {
            return Err(Error::InvalidArgument(format!(
                "{} state has not been prepared",
                self.kind()
            )));
        }

        let setting = |s: Station| match s {
            Station::Alice => a,
            Station::Bob => b,
        };
        let mut outcomes = [Outcome::Plus; 2];
        let slot = |s: Station| match s {
            Station::Alice => 0,
            Station::Bob => 1,
        };

        if self.is_local() {
            for station in ordering.stations() {
                let ctx = MeasurementContext::redacted(station, ordering);
                outcomes[slot(station)] = local_response(self, state, &ctx, setting(station), rng);
            }
        } else {
            let [first, second] = ordering.stations();
            let ctx = MeasurementContext::parameter_dependent(first, ordering, *setting(second));
            let (outcome, collapsed) = measure_station(state, first, setting(first), rng);
            outcomes[slot(first)] = outcome;
            nonlocal_realign(state, &ctx, collapsed);

            let ctx = MeasurementContext::parameter_dependent(second, ordering, *setting(first));
            debug_assert!(ctx.remote_setting_visible());
            outcomes[slot(second)] = measure_station(state, second, setting(second), rng).0;
        }
        Ok((outcomes[0], outcomes[1]))
    }

    /// Closed-form expected product of outcomes for settings `a`, `b`.
    pub fn exact_correlation(&self, a: &Direction, b: &Direction) -> f64 {
        match self {
            ModelSpec::Quantum | ModelSpec::NonlocalAligning => -a.dot(b),
            // Independent stations: E = ⟨A⟩⟨B⟩ = (a·s_A)(b·s_B) with s_B = −s_A.
            ModelSpec::DefiniteAligned { axis, .. } => -a.dot(axis) * b.dot(axis),
            ModelSpec::IsotropicOpposite => -a.dot(b) / 3.0,
            ModelSpec::DeterministicSign => -1.0 + 2.0 * angle_between(a, b) / PI,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::DefiniteAligned { axis, assignment } => {
                write!(f, "definite(axis={axis}, {assignment})")
            }
            other => f.write_str(other.kind().name()),
        }
    }
}

/// What a station is allowed to know when producing its outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementContext {
    pub station: Station,
    pub ordering: Ordering,
    remote_setting: Option<Direction>,
}

impl MeasurementContext {
    pub fn redacted(station: Station, ordering: Ordering) -> Self {
        Self {
            station,
            ordering,
            remote_setting: None,
        }
    }

    pub fn parameter_dependent(station: Station, ordering: Ordering, remote: Direction) -> Self {
        Self {
            station,
            ordering,
            remote_setting: Some(remote),
        }
    }

    pub fn remote_setting_visible(&self) -> bool {
        self.remote_setting.is_some()
    }

    pub fn remote_setting(&self) -> Option<&Direction> {
        self.remote_setting.as_ref()
    }
}

/// Outcome of one station under a local model. Only the station's own
/// setting is available here.
fn local_response<R: RngCore + ?Sized>(
    spec: &ModelSpec,
    state: &mut HiddenState,
    ctx: &MeasurementContext,
    own_setting: &Direction,
    rng: &mut R,
) -> Outcome {
    debug_assert!(!ctx.remote_setting_visible());
    match spec {
        ModelSpec::DeterministicSign => {
            let spin = state.spin(ctx.station);
            state
                .history
                .push(HistoryEvent::PreMeasurement(ctx.station), spin);
            // Bob's hidden spin is −λ.
            let lambda = match ctx.station {
                Station::Alice => spin,
                Station::Bob => -spin,
            };
            let sign = Outcome::from_bool(own_setting.dot(&lambda) >= 0.0);
            match ctx.station {
                Station::Alice => sign,
                Station::Bob => sign.flipped(),
            }
        }
        _ => measure_station(state, ctx.station, own_setting, rng).0,
    }
}

/// Consecutive-law measurement of one station's hidden spin, with collapse.
fn measure_station<R: RngCore + ?Sized>(
    state: &mut HiddenState,
    station: Station,
    setting: &Direction,
    rng: &mut R,
) -> (Outcome, Direction) {
    let spin = state.spin(station);
    state
        .history
        .push(HistoryEvent::PreMeasurement(station), spin);
    let (outcome, collapsed) = sequential_sample(&spin, setting, rng);
    state.set_spin(station, collapsed);
    state
        .history
        .push(HistoryEvent::Collapsed(station), collapsed);
    (outcome, collapsed)
}

fn nonlocal_realign(state: &mut HiddenState, ctx: &MeasurementContext, collapsed: Direction) {
    let remote = ctx.station.other();
    state.set_spin(remote, -collapsed);
    state
        .history
        .push(HistoryEvent::RemoteAligned(remote), -collapsed);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HistoryEvent {
    Prepared(Station),
    PreMeasurement(Station),
    Collapsed(Station),
    RemoteAligned(Station),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub event: HistoryEvent,
    pub spin: Direction,
}

/// Append-only record of a pair's hidden spin orientations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History(Vec<HistoryEntry>);

impl History {
    fn push(&mut self, event: HistoryEvent, spin: Direction) {
        self.0.push(HistoryEntry { event, spin });
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Spin recorded at the first occurrence of `event`.
    pub fn find(&self, event: HistoryEvent) -> Option<Direction> {
        self.0.iter().find(|e| e.event == event).map(|e| e.spin)
    }
}

/// Per-trial hidden variables of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub model: ModelKind,
    spins: Option<SpinAssignment>,
    history: History,
}

impl HiddenState {
    fn unprepared(model: ModelKind) -> Self {
        Self {
            model,
            spins: None,
            history: History::default(),
        }
    }

    /// Current hidden spins; `None` for the quantum model.
    pub fn spins(&self) -> Option<&SpinAssignment> {
        self.spins.as_ref()
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    fn spin(&self, station: Station) -> Direction {
        let spins = self.spins.as_ref().expect("hidden spins are prepared");
        match station {
            Station::Alice => spins.alice_spin,
            Station::Bob => spins.bob_spin,
        }
    }

    fn set_spin(&mut self, station: Station, spin: Direction) {
        let spins = self.spins.as_mut().expect("hidden spins are prepared");
        match station {
            Station::Alice => spins.alice_spin = spin,
            Station::Bob => spins.bob_spin = spin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{derive_stream, StreamFamily, StreamSpec};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    const HIDDEN: [ModelKind; 4] = [
        ModelKind::DefiniteAligned,
        ModelKind::IsotropicOpposite,
        ModelKind::NonlocalAligning,
        ModelKind::DeterministicSign,
    ];

    fn run(
        spec: &ModelSpec,
        a: &Direction,
        b: &Direction,
        ordering: Ordering,
        seed: u64,
        label: &str,
        n: u64,
    ) -> Vec<(Outcome, Outcome)> {
        let fam = StreamFamily::new(seed, label);
        (0..n)
            .map(|i| {
                let mut rng = fam.stream(i);
                let mut state = spec.prepare(&mut rng);
                spec.measure_pair(&mut state, a, b, ordering, &mut rng)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn definite_aligned_preparation() {
        let mut rng = derive_stream(&StreamSpec::new(1, "prep", 0));
        let s = ModelSpec::definite_aligned(Direction::Z, Assignment::PlusMinus).prepare(&mut rng);
        assert_eq!(s.spins().unwrap().alice_spin, Direction::Z);
        assert_eq!(s.spins().unwrap().bob_spin, -Direction::Z);
        let s = ModelSpec::definite_aligned(Direction::Z, Assignment::MinusPlus).prepare(&mut rng);
        assert_eq!(s.spins().unwrap().alice_spin, -Direction::Z);
        assert_eq!(s.history().len(), 2);
    }

    #[test]
    fn quantum_preparation_has_no_hidden_spins() {
        let mut rng = derive_stream(&StreamSpec::new(1, "prep-q", 0));
        let s = ModelSpec::Quantum.prepare(&mut rng);
        assert!(s.spins().is_none());
        assert!(s.history().is_empty());
    }

    #[test]
    fn isotropic_spins_are_exactly_opposite() {
        let fam = StreamFamily::new(3, "iso-opposite");
        for i in 0..10_000 {
            let s = ModelSpec::IsotropicOpposite.prepare(&mut fam.stream(i));
            let sp = s.spins().unwrap();
            assert_eq!(sp.alice_spin, -sp.bob_spin);
        }
    }

    #[test]
    fn isotropic_first_moments_vanish() {
        // uniform-sphere moment oracle: E[λ] = 0, Var(λ_i) = 1/3 ≤ 1
        let n = 1_000_000u64;
        let fam = StreamFamily::new(4, "iso-moment");
        let mut sum = [0.0f64; 3];
        for i in 0..n {
            let s = ModelSpec::IsotropicOpposite.prepare(&mut fam.stream(i));
            for (acc, c) in sum
                .iter_mut()
                .zip(s.spins().unwrap().alice_spin.components())
            {
                *acc += c;
            }
        }
        for acc in sum {
            assert!((acc / n as f64).abs() < 5.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn nonlocal_equal_settings_always_opposite() {
        let a = Direction::planar(0.4);
        for ordering in [Ordering::AliceFirst, Ordering::BobFirst] {
            for (x, y) in run(
                &ModelSpec::NonlocalAligning,
                &a,
                &a,
                ordering,
                5,
                "nl-eq",
                20_000,
            ) {
                assert_ne!(x, y);
            }
        }
    }

    #[test]
    fn definite_aligned_measured_on_own_axes() {
        let spec = ModelSpec::definite_aligned(Direction::Z, Assignment::PlusMinus);
        for pair in run(
            &spec,
            &Direction::Z,
            &-Direction::Z,
            Ordering::AliceFirst,
            6,
            "def-own",
            10_000,
        ) {
            assert_eq!(pair, (Outcome::Plus, Outcome::Plus));
        }
    }

    #[test]
    fn sign_model_equal_settings_always_opposite() {
        // brute force over sampled λ, including the exact-tie case a ⊥ λ
        let fam = StreamFamily::new(7, "sign-eq");
        let a = Direction::planar(1.3);
        for i in 0..20_000 {
            let mut rng = fam.stream(i);
            let mut state = ModelSpec::DeterministicSign.prepare(&mut rng);
            let (x, y) = ModelSpec::DeterministicSign
                .measure_pair(&mut state, &a, &a, Ordering::AliceFirst, &mut rng)
                .unwrap();
            assert_ne!(x, y);
        }
        let mut state = HiddenState::unprepared(ModelKind::DeterministicSign);
        state.spins = Some(SpinAssignment {
            alice_spin: Direction::X,
            bob_spin: -Direction::X,
        });
        let mut rng = fam.stream(0);
        let (x, y) = ModelSpec::DeterministicSign
            .measure_pair(
                &mut state,
                &Direction::Z,
                &Direction::Z,
                Ordering::AliceFirst,
                &mut rng,
            )
            .unwrap();
        assert_eq!((x, y), (Outcome::Plus, Outcome::Minus));
    }

    #[test]
    fn mismatched_state_rejected() {
        let mut rng = derive_stream(&StreamSpec::new(1, "mismatch", 0));
        let mut state = ModelSpec::IsotropicOpposite.prepare(&mut rng);
        let err = ModelSpec::NonlocalAligning
            .measure_pair(
                &mut state,
                &Direction::Z,
                &Direction::Z,
                Ordering::AliceFirst,
                &mut rng,
            )
            .unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { .. }));
        let mut bare = HiddenState::unprepared(ModelKind::IsotropicOpposite);
        assert!(ModelSpec::IsotropicOpposite
            .measure_pair(
                &mut bare,
                &Direction::Z,
                &Direction::Z,
                Ordering::AliceFirst,
                &mut rng
            )
            .is_err());
    }

    /// Enumerates the four outcome pairs of a local model with independent
    /// stations and definite spins, using the consecutive law directly.
    fn enumerate_definite(
        alice_spin: Direction,
        bob_spin: Direction,
        a: &Direction,
        b: &Direction,
    ) -> f64 {
        let p_plus = |spin: &Direction, m: &Direction| {
            let alpha = angle_between(spin, m);
            (alpha / 2.0).cos().powi(2)
        };
        let pa = p_plus(&alice_spin, a);
        let pb = p_plus(&bob_spin, b);
        let mut e = 0.0;
        for (xa, qa) in [(1.0, pa), (-1.0, 1.0 - pa)] {
            for (xb, qb) in [(1.0, pb), (-1.0, 1.0 - pb)] {
                e += xa * xb * qa * qb;
            }
        }
        e
    }

    #[test]
    fn definite_exact_matches_enumeration() {
        let a = Direction::planar(FRAC_PI_4);
        let b = Direction::planar(-FRAC_PI_4);
        for assignment in [Assignment::PlusMinus, Assignment::MinusPlus] {
            let spec = ModelSpec::definite_aligned(Direction::Z, assignment);
            let s = spec.prepare(&mut derive_stream(&StreamSpec::new(0, "x", 0)));
            let sp = s.spins().unwrap();
            let oracle = enumerate_definite(sp.alice_spin, sp.bob_spin, &a, &b);
            assert!((oracle + 0.5).abs() < 1e-12, "{oracle}");
            assert!((spec.exact_correlation(&a, &b) - oracle).abs() < 1e-12);
        }
        for (ta, tb, axis) in [(0.3, 2.0, 0.1), (1.0, -0.7, 2.5), (3.0, 0.2, -1.0)] {
            let axis = Direction::planar(axis);
            let spec = ModelSpec::definite_aligned(axis, Assignment::PlusMinus);
            let (a, b) = (Direction::planar(ta), Direction::planar(tb));
            let oracle = enumerate_definite(axis, -axis, &a, &b);
            assert!((spec.exact_correlation(&a, &b) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_correlation_examples() {
        let z = Direction::Z;
        assert!((ModelSpec::IsotropicOpposite.exact_correlation(&z, &z) + 1.0 / 3.0).abs() < 1e-15);
        let b = Direction::planar(FRAC_PI_3);
        assert!((ModelSpec::NonlocalAligning.exact_correlation(&z, &b) + 0.5).abs() < 1e-15);
        assert!(
            ModelSpec::DeterministicSign
                .exact_correlation(&z, &Direction::X)
                .abs()
                < 1e-15
        );
        assert_eq!(ModelSpec::DeterministicSign.exact_correlation(&z, &z), -1.0);
        assert!((ModelSpec::DeterministicSign.exact_correlation(&z, &-z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_exact_matches_brute_force_over_lambda() {
        let n = 400_000u64;
        let fam = StreamFamily::new(8, "sign-brute");
        let a = Direction::Z;
        for theta in [0.0, 0.5, FRAC_PI_2, 2.2, 3.0] {
            let b = Direction::planar(theta);
            let sum: f64 = (0..n)
                .map(|i| {
                    let lambda = Direction::random_uniform(&mut fam.stream(i));
                    let sa = if a.dot(&lambda) >= 0.0 { 1.0 } else { -1.0 };
                    let sb = if b.dot(&lambda) >= 0.0 { 1.0 } else { -1.0 };
                    -sa * sb
                })
                .sum();
            let exact = ModelSpec::DeterministicSign.exact_correlation(&a, &b);
            assert!((sum / n as f64 - exact).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn local_models_ignore_remote_setting_bitwise() {
        let a = Direction::planar(0.3);
        let (b1, b2) = (Direction::planar(-1.1), Direction::planar(2.4));
        for kind in [
            ModelKind::DefiniteAligned,
            ModelKind::IsotropicOpposite,
            ModelKind::DeterministicSign,
        ] {
            let spec = ModelSpec::with_defaults(kind);
            for ordering in [Ordering::AliceFirst, Ordering::BobFirst] {
                let r1 = run(&spec, &a, &b1, ordering, 9, "loc", 20_000);
                let r2 = run(&spec, &a, &b2, ordering, 9, "loc", 20_000);
                assert!(r1.iter().zip(&r2).all(|(x, y)| x.0 == y.0), "{kind} Alice");
                // and symmetrically for Bob
                let r1 = run(&spec, &b1, &a, ordering, 9, "loc", 20_000);
                let r2 = run(&spec, &b2, &a, ordering, 9, "loc", 20_000);
                assert!(r1.iter().zip(&r2).all(|(x, y)| x.1 == y.1), "{kind} Bob");
            }
        }
    }

    #[test]
    fn nonlocal_orderings_agree_cellwise() {
        let n = 200_000u64;
        let a = Direction::planar(0.2);
        let b = Direction::planar(1.9);
        let mut freq = Vec::new();
        for ordering in [Ordering::AliceFirst, Ordering::BobFirst] {
            let mut counts = crate::stats::JointCounts::default();
            for (x, y) in run(
                &ModelSpec::NonlocalAligning,
                &a,
                &b,
                ordering,
                10,
                "nl-ord",
                n,
            ) {
                counts.record(x, y);
            }
            freq.push(counts.frequencies().unwrap());
        }
        let exact = crate::spin::singlet_joint_distribution(&a, &b);
        for ((x, y), p) in freq[0]
            .cells()
            .iter()
            .zip(freq[1].cells())
            .zip(exact.cells())
        {
            assert!((x - y).abs() < 5.0 * (p * (1.0 - p) / n as f64).sqrt());
        }
    }

    #[test]
    fn isotropic_equal_settings_agreement_rate() {
        // agreement rate at a = b is (1 + E)/2 = ½(1 − ⅓)
        let n = 200_000u64;
        let a = Direction::planar(0.9);
        let agree = run(
            &ModelSpec::IsotropicOpposite,
            &a,
            &a,
            Ordering::AliceFirst,
            11,
            "iso-agree",
            n,
        )
        .into_iter()
        .filter(|(x, y)| x == y)
        .count();
        let p = 0.5 * (1.0 - 1.0 / 3.0);
        let f = agree as f64 / n as f64;
        assert!(
            (f - p).abs() < 5.0 * (p * (1.0 - p) / n as f64).sqrt(),
            "{f}"
        );
    }

    #[test]
    fn history_is_append_only() {
        let fam = StreamFamily::new(12, "history");
        let (a, b) = (Direction::planar(0.5), Direction::planar(2.0));
        for kind in HIDDEN {
            let spec = ModelSpec::with_defaults(kind);
            for ordering in [Ordering::AliceFirst, Ordering::BobFirst] {
                let mut rng = fam.stream(0);
                let mut state = spec.prepare(&mut rng);
                let before = state.history().clone();
                spec.measure_pair(&mut state, &a, &b, ordering, &mut rng)
                    .unwrap();
                let after = state.history();
                assert!(after.len() >= before.len() + 2, "{kind}");
                assert_eq!(&after.entries()[..before.len()], before.entries());
                let snapshot = after.clone();
                spec.measure_pair(&mut state, &a, &b, ordering, &mut rng)
                    .unwrap();
                assert_eq!(
                    &state.history().entries()[..snapshot.len()],
                    snapshot.entries()
                );
            }
        }
    }

    #[test]
    fn nonlocal_history_records_remote_alignment() {
        let mut rng = derive_stream(&StreamSpec::new(13, "nl-hist", 0));
        let spec = ModelSpec::NonlocalAligning;
        let mut state = spec.prepare(&mut rng);
        let lambda = state.spins().unwrap().alice_spin;
        let (a, b) = (Direction::Z, Direction::planar(FRAC_PI_3));
        let (_, _) = spec
            .measure_pair(&mut state, &a, &b, Ordering::BobFirst, &mut rng)
            .unwrap();
        let h = state.history();
        let bob_collapsed = h.find(HistoryEvent::Collapsed(Station::Bob)).unwrap();
        assert_eq!(
            h.find(HistoryEvent::RemoteAligned(Station::Alice)),
            Some(-bob_collapsed)
        );
        assert_eq!(
            h.find(HistoryEvent::PreMeasurement(Station::Alice)),
            Some(-bob_collapsed)
        );
        assert_eq!(h.find(HistoryEvent::Prepared(Station::Alice)), Some(lambda));
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "isotropic".parse::<ModelKind>().unwrap(),
            ModelKind::IsotropicOpposite
        );
        assert_eq!(
            "Sign".parse::<ModelKind>().unwrap(),
            ModelKind::DeterministicSign
        );
        assert!("bohm".parse::<ModelKind>().is_err());
        assert_eq!("-+".parse::<Assignment>().unwrap(), Assignment::MinusPlus);
        assert!("++".parse::<Assignment>().is_err());
        for kind in ModelKind::ALL {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
            assert_eq!(ModelSpec::with_defaults(kind).kind(), kind);
        }
    }

    #[test]
    fn parameter_dependence_flags() {
        assert!(ModelSpec::NonlocalAligning.is_parameter_dependent());
        assert!(ModelSpec::IsotropicOpposite.is_local());
        assert!(ModelSpec::DeterministicSign.is_local());
        assert!(ModelSpec::with_defaults(ModelKind::DefiniteAligned).is_local());
        let ctx = MeasurementContext::redacted(Station::Alice, Ordering::AliceFirst);
        assert!(ctx.remote_setting().is_none());
    }
}
