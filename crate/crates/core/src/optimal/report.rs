use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mild::{apriori_bounds, MeshSpec, SpectralProblem, Trajectory};
use crate::relax::{
    chattering_approximate, embed_dirac, trajectory_gap, ControlGrid, GapPoint, OrdinaryControl,
    RelaxedControl, TestFamily,
};

use super::cost::{cost_along, CostIntegrand};
use super::hypotheses::{validate_hypotheses, Ledger};
use super::search::{minimize_ordinary_with, minimize_relaxed_with, Evaluator, SearchSpec};

/// Both minimizations, the chattering study of the relaxed minimizer, and every bound check.
///
/// `m_o` is the better of the best `P`-piece ordinary control and the
/// chattering realization of the relaxed minimizer on `n_cells` cells.
/// Every ordinary candidate enters the relaxed pool through its Dirac
/// embedding, so `m_r ≤ m_o` holds by construction and the reported gap is
/// what the relaxed search gains over ordinary controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationReport {
    pub m_o: f64,
    pub m_r: f64,
    pub gap: f64,
    /// Best cost over `P`-piece ordinary controls.
    pub m_o_pieces: f64,
    /// Cost of the chattered relaxed minimizer.
    pub m_o_chattered: f64,
    /// Best cost found by the relaxed pattern search alone.
    pub m_r_search: f64,
    pub certified_enumeration: bool,
    pub argmin_ordinary: OrdinaryControl,
    pub argmin_relaxed: RelaxedControl,
    pub chattering_curve: Vec<GapPoint>,
    pub bound_checks: Ledger,
    pub search: SearchSpec,
    pub mesh: MeshSpec,
    pub seeds: Vec<u64>,
    pub test_family: String,
    pub evaluations: usize,
    pub passed: bool,
}

/// `n_cells` halved down to 8, in increasing order.
pub fn chattering_ladder(n_cells: usize) -> Vec<usize> {
    let mut out = vec![n_cells];
    while *out.last().unwrap() / 2 >= 8 {
        out.push(out.last().unwrap() / 2);
    }
    out.reverse();
    out
}

/// Records `pc_norm ≤ D₁` before the first impulse and `≤ D₂` after, per interval.
pub fn bound_compliance(
    problem: &SpectralProblem,
    traj: &Trajectory,
    label: &str,
) -> Result<Ledger> {
    let bounds = apriori_bounds(problem)?;
    let mut ledger = Ledger::default();
    for (k, sup) in traj.interval_sups().into_iter().enumerate() {
        let (clause, d) = if k == 0 {
            ("D1 bound", bounds.d1)
        } else {
            ("D2 bound", bounds.d2)
        };
        ledger.at_most(clause, sup, d, format!("{label}, interval {k}"));
    }
    Ok(ledger)
}

pub fn relaxation_report(
    problem: &SpectralProblem,
    grid: &ControlGrid,
    integrand: &dyn CostIntegrand,
    spec: &MeshSpec,
    search: &SearchSpec,
    warm: &[RelaxedControl],
) -> Result<RelaxationReport> {
    let mut ledger = validate_hypotheses(problem, grid, integrand, search.seed);
    let eval = Evaluator::uniform(problem, grid, integrand, spec, search.pieces)?;
    let ord = minimize_ordinary_with(&eval, search)?;
    let mut starts = warm.to_vec();
    starts.push(embed_dirac(&ord.argmin, grid)?);
    let rel = minimize_relaxed_with(&eval, search, &starts)?;

    // the chattered minimizer lives on its own mesh, refined by its switch times
    let chattered = chattering_approximate(&rel.argmin, search.n_cells, &problem.impulses.times())?;
    let ch_eval = Evaluator::new(
        problem,
        grid,
        integrand,
        spec,
        chattered.breakpoints().to_vec(),
    )?;
    let ch_dirac = embed_dirac(&chattered, grid)?;
    let ch_traj = ch_eval
        .solver()
        .solve(&crate::relax::relaxed_rhs(problem, grid, &ch_dirac)?)?;
    let m_o_chattered = cost_along(&ch_traj, grid, &ch_dirac, integrand)?;

    let (m_o, argmin_ordinary) = if m_o_chattered < ord.m_o {
        (m_o_chattered, chattered)
    } else {
        (ord.m_o, ord.argmin.clone())
    };
    let (m_r, argmin_relaxed) = if m_o < rel.m_r {
        (m_o, embed_dirac(&argmin_ordinary, grid)?)
    } else {
        (rel.m_r, rel.argmin.clone())
    };
    ledger.at_most(
        "m_r ≤ m_o",
        m_r - m_o,
        search.tol,
        "relaxed minimum does not exceed ordinary",
    );

    let rel_traj = eval
        .solver()
        .solve(&crate::relax::relaxed_rhs(problem, grid, &rel.argmin)?)?;
    ledger.extend(bound_compliance(problem, &rel_traj, "relaxed minimizer")?);
    ledger.extend(bound_compliance(problem, &ch_traj, "chattered minimizer")?);
    let chattering_curve = if rel.argmin.is_dirac() {
        Vec::new()
    } else {
        trajectory_gap(
            problem,
            grid,
            &rel.argmin,
            &chattering_ladder(search.n_cells),
            spec,
        )?
    };
    for w in chattering_curve.windows(2) {
        ledger.at_most(
            "chattering monotone",
            w[1].pc_gap,
            1.1 * w[0].pc_gap,
            format!("n_cells {} → {}", w[0].n_cells, w[1].n_cells),
        );
    }
    for diag in [rel_traj.diagnostics(), ch_traj.diagnostics()] {
        ledger.at_most(
            "contraction",
            diag.worst_ratio(),
            0.5,
            format!("{} sweeps", diag.sweeps),
        );
    }
    let passed = ledger.passed();
    Ok(RelaxationReport {
        m_o,
        m_r,
        gap: m_o - m_r,
        m_o_pieces: ord.m_o,
        m_o_chattered,
        m_r_search: rel.m_r,
        certified_enumeration: ord.certified,
        argmin_ordinary,
        argmin_relaxed,
        chattering_curve,
        bound_checks: ledger,
        search: search.clone(),
        mesh: spec.clone(),
        seeds: ord.seeds,
        test_family: TestFamily::default().tag(),
        evaluations: eval.evaluations() + ch_eval.evaluations(),
        passed,
    })
}
