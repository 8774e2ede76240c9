//! Hamiltonians, decay channels, parameter conditions and the analytic and
//! effective descriptions of the resonantly driven two-atom system.
//!
//! Both atoms are driven on `|1⟩ ↔ |r⟩` with the harmonic Rabi frequency
//! `Ω(t) = Ω_m cos(ωt)` and interact through `V|rr⟩⟨rr|`. The CNOT variant adds
//! a drive `−Ω(t)` on `|0⟩₂ ↔ |r⟩₂`. When `V ≈ 2ω` the two-photon process
//! `|11⟩ ↔ |rr⟩` becomes resonant while single excitations stay off-resonant,
//! which is what the effective Hamiltonians below capture.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{
    basis::*, basis_vector, commutator, embed_single_atom, outer, projector, transition, Atom, AtomLevel, StateVector,
    TwoAtomIndex, TwoAtomOperator, C64, DIM, I, ONE, ZERO,
};

/// Perturbative validity requires `ω ≫ Ω_m/2`; below this ratio a warning is emitted.
pub const MIN_PERTURBATIVE_RATIO: f64 = 5.0;

/// Relative tolerance under which two harmonic frequencies count as resonant.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cz,
    Cnot,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Cz => "cz",
            GateKind::Cnot => "cnot",
        })
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cz" => Ok(GateKind::Cz),
            "cnot" | "cx" => Ok(GateKind::Cnot),
            other => Err(Error::InvalidParameter {
                name: "gate",
                reason: format!("unknown gate `{other}` (expected cz or cnot)"),
            }),
        }
    }
}

/// Drive and interaction parameters, all in angular units (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    /// Peak Rabi frequency `Ω_m`; zero is accepted as the undriven limit.
    pub omega_m: f64,
    /// Envelope modulation frequency `ω`.
    pub omega: f64,
    /// Rydberg–Rydberg interaction strength `V`.
    pub v: f64,
    /// Total decay rate `γ` out of `|r⟩`, split equally into the two ground states.
    pub gamma: f64,
    pub gate: GateKind,
}

impl DriveParams {
    pub fn new(omega_m: f64, omega: f64, v: f64, gamma: f64, gate: GateKind) -> Result<Self> {
        let p = Self { omega_m, omega, v, gamma, gate };
        p.validate()?;
        if let Some(w) = p.validity_warning() {
            log::warn!("{w}");
        }
        Ok(p)
    }

    /// Parameters with `V` set by the gate's Stark-shift-compensating condition.
    pub fn at_resonance(omega_m: f64, omega: f64, gamma: f64, gate: GateKind) -> Result<Self> {
        Self::new(omega_m, omega, rri_condition(omega_m, omega, gate), gamma, gate)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, x: f64, strict: bool) -> Result<()> {
            let ok = x.is_finite() && if strict { x > 0.0 } else { x >= 0.0 };
            if ok {
                Ok(())
            } else {
                let bound = if strict { "> 0" } else { "≥ 0" };
                Err(Error::InvalidParameter { name, reason: format!("{x} must be finite and {bound}") })
            }
        }
        check("omega_m", self.omega_m, false)?;
        check("omega", self.omega, true)?;
        check("v", self.v, false)?;
        check("gamma", self.gamma, false)
    }

    pub fn validity_warning(&self) -> Option<String> {
        (self.omega < MIN_PERTURBATIVE_RATIO * self.omega_m).then(|| {
            format!(
                "ω/Ω_m = {:.3} < {MIN_PERTURBATIVE_RATIO}: second-order effective description may be inaccurate",
                self.omega / self.omega_m
            )
        })
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.omega_m, self.omega, self.v, gamma, self.gate)
    }

    pub fn with_v(self, v: f64) -> Result<Self> {
        Self::new(self.omega_m, self.omega, v, self.gamma, self.gate)
    }

    /// Fastest frequency scale `max(V, 2ω, Ω_m)` of the full dynamics.
    pub fn fastest_frequency(&self) -> f64 {
        self.v.max(2.0 * self.omega).max(self.omega_m)
    }

    /// Effective `|11⟩ ↔ |rr⟩` coupling `Ω_m²/2ω`.
    pub fn effective_coupling(&self) -> f64 {
        self.omega_m * self.omega_m / (2.0 * self.omega)
    }
}

pub fn drive_envelope(params: &DriveParams, t: f64) -> f64 {
    params.omega_m * (params.omega * t).cos()
}

/// Unit-amplitude Hermitian drive pattern: `H(t) = Ω(t)·D + V|rr⟩⟨rr|`.
pub fn drive_operator(gate: GateKind) -> TwoAtomOperator {
    let up = transition(AtomLevel::G1, AtomLevel::Ryd);
    let mut d = embed_single_atom(&up, Atom::First) + embed_single_atom(&up, Atom::Second);
    if gate == GateKind::Cnot {
        d -= embed_single_atom(&transition(AtomLevel::G0, AtomLevel::Ryd), Atom::Second);
    }
    d + d.adjoint()
}

pub fn rr_projector() -> TwoAtomOperator {
    projector(&basis_vector(SRR))
}

/// `Σ_j Ω(t)|1⟩_j⟨r| + h.c. + V|rr⟩⟨rr|`, whatever `params.gate` says.
pub fn hamiltonian_cz(params: &DriveParams, t: f64) -> TwoAtomOperator {
    build_hamiltonian(params, GateKind::Cz, t)
}

/// The CZ Hamiltonian plus a `−Ω(t)` drive on `|0⟩₂ ↔ |r⟩₂`.
pub fn hamiltonian_cnot(params: &DriveParams, t: f64) -> TwoAtomOperator {
    build_hamiltonian(params, GateKind::Cnot, t)
}

/// Hamiltonian selected by `params.gate`.
pub fn hamiltonian(params: &DriveParams, t: f64) -> TwoAtomOperator {
    build_hamiltonian(params, params.gate, t)
}

fn build_hamiltonian(params: &DriveParams, gate: GateKind, t: f64) -> TwoAtomOperator {
    let mut h = drive_operator(gate).scale(drive_envelope(params, t));
    h[(SRR.index(), SRR.index())] += C64::from(params.v);
    h
}

/// Interaction strength that absorbs the `|rr⟩` Stark shift into `V`:
/// `2ω − 2Ω_m²/3ω` for CZ and `2ω − Ω_m²/ω` for CNOT.
pub fn rri_condition(omega_m: f64, omega: f64, gate: GateKind) -> f64 {
    let om2 = omega_m * omega_m;
    match gate {
        GateKind::Cz => 2.0 * omega - 2.0 * om2 / (3.0 * omega),
        GateKind::Cnot => 2.0 * omega - om2 / omega,
    }
}

/// Time of complete `|11⟩ → |rr⟩` transfer, `πω/Ω_m²`.
pub fn antiblockade_time(omega_m: f64, omega: f64) -> f64 {
    PI * omega / (omega_m * omega_m)
}

/// One-step gate time: `2πω/Ω_m²` (CZ) or `√2·πω/Ω_m²` (CNOT).
pub fn gate_time(omega_m: f64, omega: f64, gate: GateKind) -> f64 {
    let base = antiblockade_time(omega_m, omega);
    match gate {
        GateKind::Cz => 2.0 * base,
        GateKind::Cnot => SQRT_2 * base,
    }
}

/// `√(γ/2)·|g⟩_j⟨r|` for `g ∈ {0, 1}` and `j ∈ {1, 2}`, in that order.
pub fn collapse_operators(gamma: f64) -> [TwoAtomOperator; 4] {
    let amp = (gamma / 2.0).sqrt();
    let decay = |g, atom| embed_single_atom(&transition(g, AtomLevel::Ryd), atom).scale(amp);
    [
        decay(AtomLevel::G0, Atom::First),
        decay(AtomLevel::G1, Atom::First),
        decay(AtomLevel::G0, Atom::Second),
        decay(AtomLevel::G1, Atom::Second),
    ]
}

/// Ideal gate on the qubit subspace, identity on states containing `|r⟩`.
pub fn target_unitary(gate: GateKind) -> TwoAtomOperator {
    let mut u = TwoAtomOperator::identity();
    let (i10, i11) = (S10.index(), S11.index());
    match gate {
        GateKind::Cz => u[(i11, i11)] = -ONE,
        GateKind::Cnot => {
            u[(i10, i10)] = ZERO;
            u[(i11, i11)] = ZERO;
            u[(i10, i11)] = ONE;
            u[(i11, i10)] = ONE;
        }
    }
    u
}

/// Closed-form effective Hamiltonian at the Stark-compensated interaction:
/// `g|11⟩⟨rr| + h.c.` (CZ) or `g(|11⟩ − |10⟩)⟨rr| + h.c.` (CNOT), `g = Ω_m²/2ω`.
pub fn effective_hamiltonian(params: &DriveParams) -> TwoAtomOperator {
    let g = C64::from(params.effective_coupling());
    let rr = basis_vector(SRR);
    let mut bright = basis_vector(S11);
    if params.gate == GateKind::Cnot {
        bright -= basis_vector(S10);
    }
    let h = outer(&bright, &rr).scale(g.re);
    h + h.adjoint()
}

/// Solution of the effective dynamics from a supported initial basis state.
///
/// CZ accepts `|11⟩` only; CNOT accepts `|10⟩` or `|11⟩`.
pub fn analytic_state(params: &DriveParams, initial: TwoAtomIndex, t: f64) -> Result<StateVector> {
    let mut psi = StateVector::zeros();
    match (params.gate, initial) {
        (GateKind::Cz, S11) => {
            let phase = params.effective_coupling() * t;
            psi[S11.index()] = C64::from(phase.cos());
            psi[SRR.index()] = -I * phase.sin();
        }
        (GateKind::Cnot, S11 | S10) => {
            let theta = params.effective_coupling() * t / SQRT_2;
            let (same, other) = if initial == S11 { (S11, S10) } else { (S10, S11) };
            let sign = if initial == S11 { -1.0 } else { 1.0 };
            psi[same.index()] = C64::from(theta.cos().powi(2));
            psi[other.index()] = C64::from(theta.sin().powi(2));
            psi[SRR.index()] = I * (sign * (2.0 * theta).sin() / SQRT_2);
        }
        (gate, s) => return Err(Error::Precondition(format!("no analytic {gate} solution from {s}"))),
    }
    Ok(psi)
}

/// One harmonic component `h·e^{−i·freq·t} + h†·e^{+i·freq·t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicTerm {
    pub h: TwoAtomOperator,
    pub freq: f64,
}

impl HarmonicTerm {
    pub fn at(&self, t: f64) -> TwoAtomOperator {
        let phase = C64::from_polar(1.0, -self.freq * t);
        let part = self.h * phase;
        part + part.adjoint()
    }

    /// Same component written with a non-negative frequency.
    fn positive(&self) -> HarmonicTerm {
        if self.freq < 0.0 {
            HarmonicTerm { h: self.h.adjoint(), freq: -self.freq }
        } else {
            self.clone()
        }
    }
}

/// `e^{iH_rr t}(H(t) − H_rr)e^{−iH_rr t}`, evaluated directly.
pub fn rotated_hamiltonian(params: &DriveParams, t: f64) -> TwoAtomOperator {
    let d = drive_operator(params.gate).scale(drive_envelope(params, t));
    let rr = SRR.index();
    TwoAtomOperator::from_fn(|a, b| {
        let de = params.v * (f64::from(u8::from(a == rr)) - f64::from(u8::from(b == rr)));
        d[(a, b)] * C64::from_polar(1.0, de * t)
    })
}

/// Harmonic decomposition of [`rotated_hamiltonian`].
///
/// Each raising element `⟨a|D|b⟩` (`a` more excited than `b`) splits into the
/// two envelope sidebands `e^{±iωt}`, further shifted by `e^{iVt}` when `a = |rr⟩`.
/// Components sharing a sideband and energy offset are grouped into one term,
/// giving frequencies `±ω` and `±ω − V`.
pub fn rotating_frame_harmonics(params: &DriveParams) -> Vec<HarmonicTerm> {
    if params.omega_m == 0.0 {
        return Vec::new();
    }
    let d = drive_operator(params.gate);
    let rr = SRR.index();
    let amp = params.omega_m / 2.0;
    let mut terms = Vec::with_capacity(4);
    for into_rr in [false, true] {
        let de = if into_rr { params.v } else { 0.0 };
        let mut h = TwoAtomOperator::zeros();
        for a in 0..DIM {
            if (a == rr) != into_rr {
                continue;
            }
            for b in 0..a {
                h[(a, b)] = d[(a, b)] * amp;
            }
        }
        if h.iter().all(|z| *z == ZERO) {
            continue;
        }
        for sideband in [1.0, -1.0] {
            terms.push(HarmonicTerm { h, freq: -sideband * params.omega - de });
        }
    }
    terms
}

/// Time-averaged second-order Hamiltonian of a harmonic expansion.
///
/// Keeps the static part of `Σ_{m,n} (1/ω̄_mn)[h_m†, h_n]e^{i(ω_m−ω_n)t}` with
/// the harmonic mean `1/ω̄_mn = (1/ω_m + 1/ω_n)/2`. Terms are first rewritten with
/// positive frequencies; pairs count as resonant when their frequencies agree
/// to [`RESONANCE_TOL`] relative.
pub fn derive_effective_hamiltonian(terms: &[HarmonicTerm]) -> Result<TwoAtomOperator> {
    let scale = terms.iter().map(|t| t.freq.abs()).fold(0.0, f64::max);
    let terms: Vec<HarmonicTerm> = terms.iter().map(HarmonicTerm::positive).collect();
    if let Some(t) = terms.iter().find(|t| !t.freq.is_finite() || t.freq <= RESONANCE_TOL * scale || t.freq == 0.0) {
        return Err(Error::DegenerateFrequency { freq: t.freq });
    }

    let mut heff = TwoAtomOperator::zeros();
    for m in &terms {
        let hm_dag = m.h.adjoint();
        for n in &terms {
            if (m.freq - n.freq).abs() > RESONANCE_TOL * m.freq.max(n.freq) {
                continue;
            }
            let inv_mean = 0.5 * (1.0 / m.freq + 1.0 / n.freq);
            heff += commutator(&hm_dag, &n.h).scale(inv_mean);
        }
    }
    Ok(heff)
}
