//! Every check the runner knows about, grouped into suites.

use iclab::{bodies, conc, measures, tau, transports};

pub const SUITES: &[&str] = &["paper-core", "transports", "tau", "concentration", "bodies", "evidence"];

/// Acceptance checks and the criterion each one belongs to.
pub const PAPER_CORE: &[(&str, u32)] = &[
    ("legendre_fast_brute", 1),
    ("lambda_nu_conjugate", 1),
    ("cramer_sandwich", 2),
    ("tau_maurey", 3),
    ("tau_ic9", 3),
    ("tau_constant", 3),
    ("tau_separable", 4),
    ("tau_joint_2d", 4),
    ("profile_semigroup", 5),
    ("profile_domination", 5),
    ("tbp_ii", 6),
    ("tbp_iii", 6),
    ("tbp_iv", 6),
    ("f_pn_limit", 6),
    ("pushforward", 7),
    ("lipschitz_t", 8),
    ("lipschitz_w", 8),
    ("lipschitz_s", 8),
    ("lipschitz_s_tilde", 8),
    ("estv_i", 9),
    ("estv_ii", 9),
    ("estv_iii", 9),
    ("estw_i", 9),
    ("estw_ii", 9),
    ("wprop_iv", 9),
    ("temp_gamma", 9),
    ("difw_consistency", 9),
    ("two_level_exp", 10),
    ("magia", 10),
    ("ci_halfspace_mu", 10),
    ("gauss_profile", 10),
    ("second_moment", 11),
    ("single_push", 11),
    ("push_pop", 11),
    ("lp_push_pop", 11),
    ("exp_slab", 11),
    ("slab_volume", 12),
    ("mala_norma", 13),
    ("variance_norm", 14),
    ("alpha_regularity", 15),
    ("body_sandwich", 16),
    ("body_growth", 16),
];

/// Conjecture-evidence runs; reported, never gating.
pub const EVIDENCE: &[&str] = &["weak_strong", "moment_growth", "magia", "ci_halfspace_mu", "cheeger_1d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    Convex,
    Measures,
    Transports,
    Tau,
    Conc,
    Bodies,
}

impl Module {
    pub fn name(self) -> &'static str {
        match self {
            Module::Convex => "convex",
            Module::Measures => "measures",
            Module::Transports => "transports",
            Module::Tau => "tau",
            Module::Conc => "conc",
            Module::Bodies => "bodies",
        }
    }
}

pub fn module_of(id: &str) -> Option<Module> {
    if id == "legendre_fast_brute" {
        Some(Module::Convex)
    } else if measures::FOUNDATION_CHECK_IDS.contains(&id) {
        Some(Module::Measures)
    } else if transports::TRANSPORT_CHECK_IDS.contains(&id) {
        Some(Module::Transports)
    } else if tau::TAU_CHECK_IDS.contains(&id) {
        Some(Module::Tau)
    } else if conc::CONC_CHECK_IDS.contains(&id) {
        Some(Module::Conc)
    } else if bodies::BODY_CHECK_IDS.contains(&id) {
        Some(Module::Bodies)
    } else {
        None
    }
}

pub fn all_ids() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = measures::FOUNDATION_CHECK_IDS.to_vec();
    v.extend(transports::TRANSPORT_CHECK_IDS);
    v.extend(tau::TAU_CHECK_IDS);
    v.extend(conc::CONC_CHECK_IDS);
    v.extend(bodies::BODY_CHECK_IDS);
    v
}

pub fn suite_ids(suite: &str) -> Option<Vec<&'static str>> {
    Some(match suite {
        "paper-core" => PAPER_CORE.iter().map(|(id, _)| *id).collect(),
        "transports" => transports::TRANSPORT_CHECK_IDS.to_vec(),
        "tau" => {
            let mut v = measures::FOUNDATION_CHECK_IDS.to_vec();
            v.extend(tau::TAU_CHECK_IDS);
            v
        }
        "concentration" => conc::CONC_CHECK_IDS.to_vec(),
        "bodies" => bodies::BODY_CHECK_IDS.to_vec(),
        "evidence" => EVIDENCE.to_vec(),
        _ => return None,
    })
}

/// Suites that list `id`.
pub fn suites_of(id: &str) -> Vec<&'static str> {
    SUITES
        .iter()
        .filter(|s| suite_ids(s).is_some_and(|v| v.contains(&id)))
        .copied()
        .collect()
}

pub fn criterion_of(id: &str) -> Option<u32> {
    PAPER_CORE.iter().find(|(i, _)| *i == id).map(|(_, c)| *c)
}

/// Parameters an operation accepts when run on its own.
pub fn accepted_params(id: &str) -> &'static [&'static str] {
    match id {
        "two_level_exp" | "magia" | "ci_halfspace_mu" | "gauss_profile" => &["p", "n", "x", "t"],
        "mala_norma" => &["p", "n", "c", "alpha"],
        _ => &[],
    }
}
