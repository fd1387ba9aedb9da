//! The observer register, its Gibbs state, the replacer channel that sends
//! any observer state to that Gibbs state, and the ancilla anti-controlled
//! application of that channel followed by post-selection.

use nalgebra::DVector;
use serde::Deserialize;
use thiserror::Error;

use crate::state::{
    Branch, BranchedState, CMatrix, DensityMatrix, PureState, StateError, Vitality, C64,
};

/// Squared-norm tolerance for inputs that must be normalized.
const INPUT_NORM_TOL: f64 = 1e-8;
/// Below this alive mass every branch is considered observer-free.
const ALIVE_FLOOR: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid observer: {0}")]
    InvalidObserver(String),
    #[error("input state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("all branches observer-free: instance unsatisfiable")]
    AllObserversDead,
    #[error("Kraus set is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Which state the observers start in.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Ground,
    Gibbs,
    Explicit(DensityMatrix),
}

/// Observers as an abstract `dim`-level system with Hamiltonian
/// `V diag(energies) V^dagger` at inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverRegister {
    energies: Vec<f64>,
    eigenbasis: Option<CMatrix>,
    beta: f64,
    initial: DensityMatrix,
}

impl Default for ObserverRegister {
    /// Two levels, `E = [0, 1]`, `beta = 1`, starting in the ground state.
    fn default() -> Self {
        ObserverRegister::new(vec![0.0, 1.0], 1.0).expect("default observer is valid")
    }
}

impl ObserverRegister {
    /// Diagonal Hamiltonian, initial state the ground state.
    pub fn new(energies: Vec<f64>, beta: f64) -> Result<Self, ChannelError> {
        Self::build(energies, None, beta, InitialState::Ground)
    }

    pub fn build(
        energies: Vec<f64>,
        eigenbasis: Option<CMatrix>,
        beta: f64,
        initial: InitialState,
    ) -> Result<Self, ChannelError> {
        let invalid = |msg: String| Err(ChannelError::InvalidObserver(msg));
        let d = energies.len();
        if d == 0 {
            return invalid("dimension must be at least 1".into());
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return invalid("energies must be finite".into());
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return invalid(format!("beta must be finite and non-negative, got {beta}"));
        }
        if let Some(v) = &eigenbasis {
            if v.nrows() != d || v.ncols() != d {
                return invalid(format!("eigenbasis must be {d}x{d}"));
            }
            let dev = (v.adjoint() * v - CMatrix::identity(d, d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > 1e-10 {
                return invalid(format!("eigenbasis is not unitary (deviation {dev:e})"));
            }
        }
        let mut obs = ObserverRegister {
            energies,
            eigenbasis,
            beta,
            initial: DensityMatrix::basis_projector(d, 0),
        };
        obs.initial = match initial {
            InitialState::Ground => obs.ground_state(),
            InitialState::Gibbs => gibbs_state(&obs),
            InitialState::Explicit(rho) => {
                if rho.dim() != d {
                    return invalid(format!("initial state must be {d}x{d}"));
                }
                if (rho.trace() - 1.0).abs() > 1e-10 {
                    return invalid(format!("initial state has trace {}", rho.trace()));
                }
                if !rho.is_psd(1e-10) {
                    return invalid("initial state is not positive semidefinite".into());
                }
                rho
            }
        };
        Ok(obs)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.initial
    }

    /// Eigenvector columns; identity when the Hamiltonian is diagonal.
    pub fn eigenbasis(&self) -> CMatrix {
        self.eigenbasis
            .clone()
            .unwrap_or_else(|| CMatrix::identity(self.dim(), self.dim()))
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let v = self.eigenbasis();
        let diag = DVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|&e| C64::new(e, 0.0)),
        );
        &v * CMatrix::from_diagonal(&diag) * v.adjoint()
    }

    /// Projector on the lowest-energy eigenvector (first one on ties).
    pub fn ground_state(&self) -> DensityMatrix {
        let ground = self
            .energies
            .iter()
            .enumerate()
            .fold(0, |best, (i, &e)| if e < self.energies[best] { i } else { best });
        let v = self.eigenbasis();
        let col = v.column(ground).into_owned();
        DensityMatrix::from_matrix_unchecked(&col * col.adjoint())
    }

    /// Boltzmann weights `exp(-beta (E_i - E_min)) / Z`, in eigenbasis order.
    pub fn gibbs_weights(&self) -> Vec<f64> {
        let e_min = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = self
            .energies
            .iter()
            .map(|&e| (-self.beta * (e - e_min)).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / z).collect()
    }

    /// Load from an observer spec document. `.json` paths are read as JSON,
    /// anything else as TOML.
    pub fn from_spec_str(text: &str, json: bool) -> Result<Self, ChannelError> {
        let spec: ObserverSpec = if json {
            serde_json::from_str(text).map_err(|e| ChannelError::InvalidObserver(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| ChannelError::InvalidObserver(e.to_string()))?
        };
        spec.into_register()
    }
}

/// On-disk observer spec. Complex entries are `[re, im]` pairs, row-major.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub dim: usize,
    pub energies: Vec<f64>,
    pub beta: f64,
    #[serde(default)]
    pub eigenbasis: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Matrix(Vec<[f64; 2]>),
}

fn square_from_pairs(d: usize, pairs: &[[f64; 2]], what: &str) -> Result<CMatrix, ChannelError> {
    if pairs.len() != d * d {
        return Err(ChannelError::InvalidObserver(format!(
            "{what} needs {} entries, found {}",
            d * d,
            pairs.len()
        )));
    }
    Ok(CMatrix::from_row_iterator(
        d,
        d,
        pairs.iter().map(|&[re, im]| C64::new(re, im)),
    ))
}

impl ObserverSpec {
    pub fn into_register(self) -> Result<ObserverRegister, ChannelError> {
        if self.energies.len() != self.dim {
            return Err(ChannelError::InvalidObserver(format!(
                "dim is {} but {} energies were given",
                self.dim,
                self.energies.len()
            )));
        }
        let eigenbasis = self
            .eigenbasis
            .as_deref()
            .map(|p| square_from_pairs(self.dim, p, "eigenbasis"))
            .transpose()?;
        let initial = match self.initial {
            None => InitialState::Ground,
            Some(InitialSpec::Named(name)) => match name.as_str() {
                "ground" => InitialState::Ground,
                "gibbs" => InitialState::Gibbs,
                other => {
                    return Err(ChannelError::InvalidObserver(format!(
                        "unknown initial state `{other}`"
                    )))
                }
            },
            Some(InitialSpec::Matrix(pairs)) => {
                let m = square_from_pairs(self.dim, &pairs, "initial")?;
                InitialState::Explicit(DensityMatrix::new(m)?)
            }
        };
        ObserverRegister::build(self.energies, eigenbasis, self.beta, initial)
    }
}

/// `exp(-beta H) / Tr exp(-beta H)`, built from the spectrum.
pub fn gibbs_state(obs: &ObserverRegister) -> DensityMatrix {
    let weights = obs.gibbs_weights();
    let diag = DensityMatrix::from_diagonal(&weights).into_matrix();
    match &obs.eigenbasis {
        None => DensityMatrix::from_matrix_unchecked(diag),
        Some(v) => DensityMatrix::from_matrix_unchecked(v * diag * v.adjoint()),
    }
}

/// A Kraus representation `{K_a}` of a channel on one register.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let set = KrausSet { ops };
        let dev = set.completeness_deviation();
        if dev > 1e-10 {
            return Err(ChannelError::NotTracePreserving(dev));
        }
        Ok(set)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Max entrywise deviation of `sum K^dagger K` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        let Some(first) = self.ops.first() else {
            return f64::INFINITY;
        };
        let d = first.ncols();
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        (sum - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `sum_a K_a rho K_a^dagger`.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let m = rho.matrix();
        let out = self
            .ops
            .iter()
            .fold(CMatrix::zeros(m.nrows(), m.nrows()), |acc, k| {
                acc + k * m * k.adjoint()
            });
        DensityMatrix::from_matrix_unchecked(out)
    }
}

/// Kraus operators `sqrt(w_i) |w_i><j|` of the channel that replaces any
/// input with `omega`. Zero-weight eigencomponents are dropped.
pub fn replacer_kraus(omega: &DensityMatrix) -> Result<KrausSet, ChannelError> {
    let tr = omega.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(StateError::TraceNotUnit(tr).into());
    }
    let m = omega.matrix();
    let d = m.nrows();
    let off_diagonal = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max);
    let (weights, vectors) = if off_diagonal == 0.0 {
        let w: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
        (w, CMatrix::identity(d, d))
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    KrausSet::new(kraus_from_spectrum(&weights, &vectors))
}

fn kraus_from_spectrum(weights: &[f64], vectors: &CMatrix) -> Vec<CMatrix> {
    let d = vectors.nrows();
    let mut ops = Vec::with_capacity(weights.len() * d);
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let col = vectors.column(i) * C64::new(w.sqrt(), 0.0);
        for j in 0..d {
            let mut k = CMatrix::zeros(d, d);
            k.set_column(j, &col);
            ops.push(k);
        }
    }
    ops
}

/// Replacer Kraus set for `obs`, taken straight from its spectral data.
pub fn doomsday_kraus(obs: &ObserverRegister) -> KrausSet {
    KrausSet {
        ops: kraus_from_spectrum(&obs.gibbs_weights(), &obs.eigenbasis()),
    }
}

fn check_normalized(psi: &PureState) -> Result<(), ChannelError> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > INPUT_NORM_TOL {
        return Err(ChannelError::NotNormalized(norm));
    }
    Ok(())
}

/// Apply the doomsday channel to the observers, anti-controlled on the
/// ancilla (the last qubit of `psi_b`).
///
/// Kraus set `{P_1 (x) I} U {P_0 (x) K_a}`: the ancilla-1 sector keeps the
/// initial observer state, the ancilla-0 sector gets the Gibbs state. The
/// result always has exactly one alive and one dead branch, in that order.
pub fn anti_controlled_doomsday(
    psi_b: &PureState,
    obs: &ObserverRegister,
) -> Result<BranchedState, ChannelError> {
    check_normalized(psi_b)?;
    let ancilla = psi_b.num_qubits() - 1;
    let (alive, _) = psi_b.project(ancilla, true)?;
    let (dead, _) = psi_b.project(ancilla, false)?;
    let dead_observer = doomsday_kraus(obs).apply(obs.initial());
    Ok(BranchedState {
        branches: vec![
            Branch {
                label: Vitality::Alive,
                sa_state: alive,
                observer: obs.initial().clone(),
            },
            Branch {
                label: Vitality::Dead,
                sa_state: dead,
                observer: dead_observer,
            },
        ],
    })
}

/// Dense reference evolution of `|psi_b><psi_b| (x) rho` under the full
/// joint Kraus set `{P_1 (x) I} U {P_0 (x) K_a}`.
pub fn apply_dense(psi_b: &PureState, obs: &ObserverRegister) -> Result<DensityMatrix, ChannelError> {
    check_normalized(psi_b)?;
    let sa_dim = psi_b.dim();
    let d = obs.dim();
    let sigma_b = psi_b.to_density().kron(obs.initial()).into_matrix();

    let projector = |value: usize| {
        CMatrix::from_fn(sa_dim, sa_dim, |i, j| {
            if i == j && i % 2 == value {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let mut joint = vec![projector(1).kronecker(&CMatrix::identity(d, d))];
    let p0 = projector(0);
    joint.extend(doomsday_kraus(obs).ops().iter().map(|k| p0.kronecker(k)));

    let dim = sa_dim * d;
    let out = joint.iter().fold(CMatrix::zeros(dim, dim), |acc, k| {
        acc + k * &sigma_b * k.adjoint()
    });
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Condition on the alive branch. Returns the renormalized `S (x) A` state
/// and the alive probability.
pub fn postselect_alive(sigma_c: &BranchedState) -> Result<(PureState, f64), ChannelError> {
    let alive = sigma_c
        .branch(Vitality::Alive)
        .ok_or(ChannelError::AllObserversDead)?;
    let p_alive = alive.weight();
    if p_alive < ALIVE_FLOOR {
        return Err(ChannelError::AllObserversDead);
    }
    Ok((alive.sa_state.normalized()?, p_alive))
}

/// One-qubit cat state `a|0>|dead> + b|1>|alive>` run through the same
/// anti-controlled channel. Returns `(p_dead, p_alive)`.
pub fn demo_cat(a: C64, b: C64, obs: &ObserverRegister) -> Result<(f64, f64), ChannelError> {
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(ChannelError::NotNormalized(norm));
    }
    let psi = PureState::new(1, vec![a, b])?;
    let branched = anti_controlled_doomsday(&psi, obs)?;
    let weight = |label| branched.branch(label).map_or(0.0, Branch::weight);
    Ok((weight(Vitality::Dead), weight(Vitality::Alive)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::dense_sigma;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag_of(m: &DensityMatrix) -> Vec<f64> {
        (0..m.dim()).map(|i| m.matrix()[(i, i)].re).collect()
    }

    #[test]
    fn gibbs_infinite_temperature() {
        let obs = ObserverRegister::new(vec![0.0, 0.3, 2.0], 0.0).unwrap();
        let g = gibbs_state(&obs);
        assert!(g.max_abs_diff(&DensityMatrix::maximally_mixed(3)) < 1e-15);
    }

    #[test]
    fn gibbs_ln2() {
        let obs = ObserverRegister::new(vec![0.0, 1.0], std::f64::consts::LN_2).unwrap();
        let g = gibbs_state(&obs);
        let w = diag_of(&g);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gibbs_cold_limit() {
        let obs = ObserverRegister::new(vec![0.0, 1.0], 50.0).unwrap();
        let w = diag_of(&gibbs_state(&obs));
        assert!(w[0] >= 1.0 - 1e-20);
        let expected = (-50.0f64).exp() / (1.0 + (-50.0f64).exp());
        assert!((w[1] - expected).abs() < 1e-30);
    }

    #[test]
    fn gibbs_survives_huge_beta() {
        let obs = ObserverRegister::new(vec![1e3, 2e3], 1e6).unwrap();
        let w = diag_of(&gibbs_state(&obs));
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn observer_validation() {
        assert!(ObserverRegister::new(vec![], 1.0).is_err());
        assert!(ObserverRegister::new(vec![f64::NAN], 1.0).is_err());
        assert!(ObserverRegister::new(vec![0.0], -1.0).is_err());
        assert!(ObserverRegister::new(vec![0.0], f64::INFINITY).is_err());
        let not_unitary = CMatrix::from_element(2, 2, c(1.0));
        assert!(ObserverRegister::build(vec![0.0, 1.0], Some(not_unitary), 1.0, InitialState::Ground).is_err());
        let bad_rho = DensityMatrix::from_diagonal(&[0.5, 0.25]);
        assert!(ObserverRegister::build(vec![0.0, 1.0], None, 1.0, InitialState::Explicit(bad_rho)).is_err());
    }

    #[test]
    fn default_observer() {
        let obs = ObserverRegister::default();
        assert_eq!(obs.dim(), 2);
        assert_eq!(obs.energies(), &[0.0, 1.0]);
        assert_eq!(obs.beta(), 1.0);
        assert_eq!(obs.initial(), &DensityMatrix::basis_projector(2, 0));
    }

    #[test]
    fn ground_state_follows_lowest_energy() {
        let obs = ObserverRegister::new(vec![3.0, -1.0, 2.0], 1.0).unwrap();
        assert_eq!(obs.initial(), &DensityMatrix::basis_projector(3, 1));
    }

    #[test]
    fn pure_replacer() {
        let omega = DensityMatrix::basis_projector(2, 0);
        let kraus = replacer_kraus(&omega).unwrap();
        let mut k0 = CMatrix::zeros(2, 2);
        k0[(0, 0)] = c(1.0);
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = c(1.0);
        assert_eq!(kraus.ops(), &[k0, k1]);
        for rho in [
            DensityMatrix::basis_projector(2, 1),
            DensityMatrix::maximally_mixed(2),
        ] {
            assert!(kraus.apply(&rho).max_abs_diff(&omega) < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_replacer() {
        let kraus = replacer_kraus(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(kraus.len(), 4);
        for k in kraus.ops() {
            let nonzero: Vec<_> = k.iter().filter(|z| z.norm() > 0.0).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((nonzero[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!(kraus.completeness_deviation() < 1e-15);
    }

    #[test]
    fn thermal_replacer_on_excited_state() {
        let omega = DensityMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]);
        let out = replacer_kraus(&omega)
            .unwrap()
            .apply(&DensityMatrix::basis_projector(2, 1));
        assert!(out.max_abs_diff(&omega) < 1e-15);
    }

    #[test]
    fn replacer_non_diagonal_omega() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(1, vec![c(h), c(h)]).unwrap().to_density();
        let omega = DensityMatrix::new(
            plus.matrix() * c(0.7) + DensityMatrix::basis_projector(2, 1).matrix() * c(0.3),
        )
        .unwrap();
        let kraus = replacer_kraus(&omega).unwrap();
        assert!(kraus.completeness_deviation() < 1e-12);
        let out = kraus.apply(&DensityMatrix::basis_projector(2, 0));
        assert!(out.max_abs_diff(&omega) < 1e-12);
    }

    #[test]
    fn replacer_rejects_bad_trace() {
        let omega = DensityMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(replacer_kraus(&omega).is_err());
    }

    #[test]
    fn kraus_set_rejects_incomplete() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(KrausSet::new(vec![half]), Err(ChannelError::NotTracePreserving(_))));
    }

    fn xnor_psi_b() -> PureState {
        // (|00,1> + |01,0> + |10,0> + |11,1>) / 2
        let amps = [0, 1, 1, 0, 1, 0, 0, 1]
            .iter()
            .map(|&x| c(0.5 * x as f64))
            .collect();
        PureState::new(3, amps).unwrap()
    }

    #[test]
    fn tautology_never_fires() {
        let psi = PureState::new(2, vec![c(0.0), c(0.6), c(0.0), c(0.8)]).unwrap();
        let obs = ObserverRegister::default();
        let sigma = anti_controlled_doomsday(&psi, &obs).unwrap();
        assert_eq!(sigma.branch(Vitality::Dead).unwrap().weight(), 0.0);
        let alive = sigma.branch(Vitality::Alive).unwrap();
        assert_eq!(alive.sa_state, psi);
        assert_eq!(&alive.observer, obs.initial());
    }

    #[test]
    fn unsatisfiable_always_fires() {
        let psi = PureState::new(2, vec![c(0.6), c(0.0), c(0.8), c(0.0)]).unwrap();
        let obs = ObserverRegister::new(vec![0.0, 1.0], 0.5).unwrap();
        let sigma = anti_controlled_doomsday(&psi, &obs).unwrap();
        assert_eq!(sigma.branch(Vitality::Alive).unwrap().weight(), 0.0);
        let dead = sigma.branch(Vitality::Dead).unwrap();
        assert!(dead.observer.max_abs_diff(&gibbs_state(&obs)) < 1e-15);
        assert_eq!(postselect_alive(&sigma), Err(ChannelError::AllObserversDead));
    }

    #[test]
    fn xnor_structured_matches_dense() {
        let obs = ObserverRegister::new(vec![0.0, 1.0], std::f64::consts::LN_2).unwrap();
        let psi = xnor_psi_b();
        let sigma = anti_controlled_doomsday(&psi, &obs).unwrap();
        assert!((sigma.branch(Vitality::Alive).unwrap().weight() - 0.5).abs() < 1e-15);
        let structured = dense_sigma(&sigma).unwrap();
        let dense = apply_dense(&psi, &obs).unwrap();
        assert_eq!(structured.dim(), 16);
        assert!(structured.max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn xnor_postselection() {
        let obs = ObserverRegister::default();
        let sigma = anti_controlled_doomsday(&xnor_psi_b(), &obs).unwrap();
        let (alive, p) = postselect_alive(&sigma).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [0.0, h, 0.0, 0.0, 0.0, 0.0, 0.0, h];
        for (a, e) in alive.amplitudes().iter().zip(expected) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_unnormalized_input() {
        let psi = PureState::new(1, vec![c(0.5), c(0.5)]).unwrap();
        assert!(matches!(
            anti_controlled_doomsday(&psi, &ObserverRegister::default()),
            Err(ChannelError::NotNormalized(_))
        ));
    }

    #[test]
    fn cat_state_probabilities() {
        let obs = ObserverRegister::default();
        assert_eq!(demo_cat(c(1.0), c(0.0), &obs).unwrap(), (1.0, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (dead, alive) = demo_cat(c(h), c(h), &obs).unwrap();
        assert!((dead - 0.5).abs() < 1e-15 && (alive - 0.5).abs() < 1e-15);
        let (dead, alive) = demo_cat(c(0.6), c(0.8), &obs).unwrap();
        assert!((dead - 0.36).abs() <= 4.0 * f64::EPSILON);
        assert!((alive - 0.64).abs() <= 4.0 * f64::EPSILON);
        assert!(demo_cat(c(0.6), c(0.6), &obs).is_err());
    }

    #[test]
    fn spec_file_toml() {
        let text = r#"
dim = 2
energies = [0.0, 1.0]
beta = 0.6931471805599453
initial = "gibbs"
"#;
        let obs = ObserverRegister::from_spec_str(text, false).unwrap();
        let w = diag_of(obs.initial());
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spec_file_explicit_matrices() {
        let text = r#"
dim = 2
energies = [0.0, 1.0]
beta = 1.0
eigenbasis = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
initial = [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]
"#;
        let obs = ObserverRegister::from_spec_str(text, false).unwrap();
        assert_eq!(obs.initial(), &DensityMatrix::maximally_mixed(2));
        // the swapped eigenbasis puts the ground level on |1>
        assert_eq!(obs.ground_state(), DensityMatrix::basis_projector(2, 1));
    }

    #[test]
    fn spec_file_json_and_errors() {
        let json = r#"{"dim": 1, "energies": [5.0], "beta": 2.0, "initial": "ground"}"#;
        let obs = ObserverRegister::from_spec_str(json, true).unwrap();
        assert_eq!(obs.dim(), 1);
        for bad in [
            "dim = 2\nenergies = [0.0]\nbeta = 1.0\n",
            "dim = 1\nenergies = [0.0]\nbeta = 1.0\ninitial = \"hot\"\n",
            "dim = 1\nenergies = [0.0]\n",
            "dim = 1\nenergies = [0.0]\nbeta = 1.0\ncolour = 3\n",
        ] {
            assert!(ObserverRegister::from_spec_str(bad, false).is_err(), "{bad}");
        }
    }
}
