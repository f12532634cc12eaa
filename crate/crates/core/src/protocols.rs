//! Entropic rate budgets for the mother (fully quantum Slepian-Wolf) protocol, its version
//! with dephasing at B, and the children derived from it: state merging, noisy dense coding
//! and one-way entanglement distillation.
//!
//! Sign convention for [`ProtocolBudget`]: channel rates are positive when consumed and
//! negative when generated; the ebit rate is positive when generated and negative when
//! consumed. A negative qubit rate for state merging means `-S(A|B)` ebits are left over.
//!
//! Decoherence at B is modelled by an ancilla `C` that coherently records a projective
//! measurement of B and is then discarded. The reference system of the decohered protocol is
//! the original purifying system `R`, whose joint state with `A` is untouched by anything
//! acting on B.

use std::fmt;

use crate::discord::{discord, fixed_basis_discord, OptimizerConfig, PovmMode};
use crate::entropy::{correlation_report, entropy_of, mutual_information, CorrelationReport};
use crate::error::{Error, Result};
use crate::measure::{ancilla_extension_pure, fresh_label, Povm};
use crate::states::{from_pure, purify, DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Mother,
    /// Mother protocol after dephasing at B.
    Fqswd,
    StateMerging,
    DenseCoding,
    Distillation,
}

impl Protocol {
    pub fn id(self) -> &'static str {
        match self {
            Self::Mother => "mother",
            Self::Fqswd => "fqswd",
            Self::StateMerging => "qsm",
            Self::DenseCoding => "sdc",
            Self::Distillation => "ed",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        [
            Self::Mother,
            Self::Fqswd,
            Self::StateMerging,
            Self::DenseCoding,
            Self::Distillation,
        ]
        .into_iter()
        .find(|p| p.id() == id)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolBudget {
    pub protocol: Protocol,
    pub qubit_channel_rate: f64,
    pub cbit_channel_rate: f64,
    pub ebit_rate: f64,
    pub notes: String,
}

/// Quantities that decoherence at B must leave unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentInvariants {
    pub mutual_info_ar: f64,
    pub mutual_info_ar_after: f64,
    pub s_a: f64,
    pub s_a_after: f64,
    /// `I(A′ : R C)`; exceeds `I(A:R)` by the basis-dependent discord.
    pub mutual_info_a_rc_after: f64,
}

impl EnvironmentInvariants {
    pub fn max_residual(&self) -> f64 {
        (self.mutual_info_ar_after - self.mutual_info_ar)
            .abs()
            .max((self.s_a_after - self.s_a).abs())
    }
}

#[derive(Debug, Clone)]
pub struct DecoherenceComparison {
    pub before: ProtocolBudget,
    pub after: ProtocolBudget,
    /// In bits (mutual-information or conditional-entropy units) per copy.
    pub loss: f64,
    pub basis: Povm,
    /// Discord the loss is compared against: fixed-basis for a given basis, optimized
    /// otherwise.
    pub discord: f64,
    pub equals_discord_residual: f64,
    pub invariants: EnvironmentInvariants,
}

/// Measurement basis for the dephasing at B.
#[derive(Debug, Clone)]
pub enum BasisChoice {
    Fixed(Povm),
    /// Use the discord-minimizing projective basis.
    Optimize(OptimizerConfig),
}

struct Decohered {
    basis: Povm,
    discord: f64,
    before: CorrelationReport,
    after: CorrelationReport,
    invariants: EnvironmentInvariants,
}

/// Labels `(A, B, R)` of a tripartite pure state.
fn abr_labels(psi: &PureState) -> Result<()> {
    let mut labels = psi.layout().labels();
    labels.sort_unstable();
    if labels != ["A", "B", "R"] {
        return Err(Error::InvalidLayout(format!(
            "expected a pure state on A, B, R; got {}",
            psi.layout()
        )));
    }
    Ok(())
}

fn resolve_basis(rho_ab: &DensityMatrix, choice: &BasisChoice) -> Result<(Povm, f64)> {
    match choice {
        BasisChoice::Fixed(basis) => {
            if basis.subsystem() != "B" {
                return Err(Error::InvalidPovm(format!(
                    "dephasing acts on B, basis is on `{}`",
                    basis.subsystem()
                )));
            }
            Ok((basis.clone(), fixed_basis_discord(rho_ab, basis)?))
        }
        BasisChoice::Optimize(cfg) => {
            if cfg.mode != PovmMode::Projective {
                return Err(Error::InvalidParameter(
                    "dephasing needs a projective basis; use PovmMode::Projective".into(),
                ));
            }
            let r = discord(rho_ab, "B", cfg)?;
            Ok((r.optimal_basis, r.discord))
        }
    }
}

fn decohere(psi: &PureState, choice: &BasisChoice) -> Result<Decohered> {
    abr_labels(psi)?;
    let full = from_pure(psi);
    let rho_ab = full.reduced(&["A", "B"])?;
    let (basis, discord_value) = resolve_basis(&rho_ab, choice)?;

    let c = fresh_label(psi.layout(), "C");
    let extended = from_pure(&ancilla_extension_pure(psi, &basis, &c)?);
    let rho_ab_after = extended.reduced(&["A", "B"])?;

    let before = correlation_report(&rho_ab, &["A"], &["B"])?;
    let after = correlation_report(&rho_ab_after, &["A"], &["B"])?;
    let invariants = EnvironmentInvariants {
        mutual_info_ar: mutual_information(&full, &["A"], &["R"])?,
        mutual_info_ar_after: mutual_information(&extended, &["A"], &["R"])?,
        s_a: entropy_of(&full, &["A"])?,
        s_a_after: entropy_of(&extended, &["A"])?,
        mutual_info_a_rc_after: mutual_information(&extended, &["A"], &["R", c.as_str()])?,
    };
    Ok(Decohered {
        basis,
        discord: discord_value,
        before,
        after,
        invariants,
    })
}

fn bipartite_ab(rho_ab: &DensityMatrix) -> Result<()> {
    let mut labels = rho_ab.layout().labels();
    labels.sort_unstable();
    if labels != ["A", "B"] {
        return Err(Error::NotBipartite(format!(
            "expected a state on A, B; got {}",
            rho_ab.layout()
        )));
    }
    Ok(())
}

fn decohere_mixed(rho_ab: &DensityMatrix, choice: &BasisChoice) -> Result<Decohered> {
    bipartite_ab(rho_ab)?;
    let psi = purify(&rho_ab.permuted(&["A", "B"])?, "R")?;
    decohere(&psi, choice)
}

fn comparison(d: Decohered, before: ProtocolBudget, after: ProtocolBudget, loss: f64) -> DecoherenceComparison {
    DecoherenceComparison {
        before,
        after,
        loss,
        equals_discord_residual: loss - d.discord,
        basis: d.basis,
        discord: d.discord,
        invariants: d.invariants,
    }
}

/// `⟨Ψ^AB⟩ + ½I(A:R)[q→q] ≥ ½I(A:B)[qq]`
pub fn mother_budget(psi: &PureState) -> Result<ProtocolBudget> {
    abr_labels(psi)?;
    let full = from_pure(psi);
    let i_ar = mutual_information(&full, &["A"], &["R"])?;
    let i_ab = mutual_information(&full, &["A"], &["B"])?;
    Ok(ProtocolBudget {
        protocol: Protocol::Mother,
        qubit_channel_rate: 0.5 * i_ar,
        cbit_channel_rate: 0.0,
        ebit_rate: 0.5 * i_ab,
        notes: "qubit cost I(A:R)/2, ebit yield I(A:B)/2, plus transfer of A's share to B".into(),
    })
}

/// Mother protocol before and after dephasing B. The loss is `I(A:B) - I(A′:B′)`, twice
/// the drop in ebit yield.
pub fn fqswd_budget(psi: &PureState, choice: &BasisChoice) -> Result<DecoherenceComparison> {
    let before = mother_budget(psi)?;
    let d = decohere(psi, choice)?;
    let after = ProtocolBudget {
        protocol: Protocol::Fqswd,
        qubit_channel_rate: 0.5 * d.invariants.mutual_info_ar_after,
        cbit_channel_rate: 0.0,
        ebit_rate: 0.5 * d.after.mutual_info,
        notes: "qubit cost I(A':R')/2, ebit yield I(A':B')/2".into(),
    };
    let loss = d.before.mutual_info - d.after.mutual_info;
    Ok(comparison(d, before, after, loss))
}

/// `⟨Ψ^AB⟩ + S(A|B)[q→q] + I(A:B)[c→c] ≥ ⟨id^{S→B̂}⟩`
pub fn merging_budget(rho_ab: &DensityMatrix) -> Result<ProtocolBudget> {
    bipartite_ab(rho_ab)?;
    let r = correlation_report(rho_ab, &["A"], &["B"])?;
    Ok(merging_from_report(&r))
}

fn merging_from_report(r: &CorrelationReport) -> ProtocolBudget {
    ProtocolBudget {
        protocol: Protocol::StateMerging,
        qubit_channel_rate: r.cond_entropy,
        cbit_channel_rate: r.mutual_info,
        ebit_rate: 0.0,
        notes: "qubit cost S(A|B) (negative: that many ebits left over), cbit cost I(A:B)".into(),
    }
}

/// Increase `S(A′|B′) - S(A|B)` in the merging cost caused by dephasing B.
pub fn merging_markup(rho_ab: &DensityMatrix, choice: &BasisChoice) -> Result<DecoherenceComparison> {
    let d = decohere_mixed(rho_ab, choice)?;
    let before = merging_from_report(&d.before);
    let after = merging_from_report(&d.after);
    let loss = d.after.cond_entropy - d.before.cond_entropy;
    Ok(comparison(d, before, after, loss))
}

/// `⟨Ψ^AB⟩ + S(A)[q→q] ≥ I(A:B)[c→c]`; loss is the drop `I(A:B) - I(A′:B′)` in cbits.
pub fn dense_coding_loss(rho_ab: &DensityMatrix, choice: &BasisChoice) -> Result<DecoherenceComparison> {
    let d = decohere_mixed(rho_ab, choice)?;
    let budget = |r: &CorrelationReport, s_a: f64| ProtocolBudget {
        protocol: Protocol::DenseCoding,
        qubit_channel_rate: s_a,
        cbit_channel_rate: -r.mutual_info,
        ebit_rate: 0.0,
        notes: "qubit cost S(A), cbit yield I(A:B)".into(),
    };
    let before = budget(&d.before, d.invariants.s_a);
    let after = budget(&d.after, d.invariants.s_a_after);
    let loss = d.before.mutual_info - d.after.mutual_info;
    Ok(comparison(d, before, after, loss))
}

/// `⟨Ψ^AB⟩ + I(A:R)[c→c] ≥ I(A⟩B)[qq]`; loss is `S(A′|B′) - S(A|B)` in ebits.
pub fn distillation_loss(rho_ab: &DensityMatrix, choice: &BasisChoice) -> Result<DecoherenceComparison> {
    let d = decohere_mixed(rho_ab, choice)?;
    let budget = |r: &CorrelationReport, i_ar: f64| ProtocolBudget {
        protocol: Protocol::Distillation,
        qubit_channel_rate: 0.0,
        cbit_channel_rate: i_ar,
        ebit_rate: r.coherent_info,
        notes: "cbit cost I(A:R), ebit yield I(A>B) = -S(A|B)".into(),
    };
    let before = budget(&d.before, d.invariants.mutual_info_ar);
    let after = budget(&d.after, d.invariants.mutual_info_ar_after);
    let loss = d.after.cond_entropy - d.before.cond_entropy;
    Ok(comparison(d, before, after, loss))
}
