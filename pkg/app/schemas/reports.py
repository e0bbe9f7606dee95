from typing import Dict, List, Literal, Optional

from sqlmodel import SQLModel


class TTMSummary(SQLModel):
    """Summary of the two-time measurement pipeline (ttm_summary.json)"""

    mean_work: float
    exp_avg: float
    z0: float
    ztau: float
    delta_f: float
    jarzynski_residual: float
    first_law_residual: float
    measurement_entropy_change: float  # entropy produced by the final energy measurement
    dephasing_energy_residual: float
    atoms: int
    unitarity_defect: Optional[float] = None
    steps: Optional[int] = None


class ModifiedJarzynskiReport(SQLModel):
    """Measurement-free Jarzynski identity with its residuals"""

    lhs: float
    delta_f: float
    s_rel: float
    s_rel_closed_form: float
    rhs: float
    residual: float
    relative_residual: float
    closed_form_residual: float
    support_violation: bool = False


class BoundsReport(SQLModel):
    """Maximum-work bounds with plain and information free energy"""

    beta_w: float
    beta_df: float
    s_rel: float
    beta_df_tilde: float
    slack19: float  # beta<W> - beta dF - S
    slack21: float  # beta<W> - beta dF_tilde
    slack_max_work: float  # beta<W> - beta dF
    f0: float
    f_tau: float
    f_tilde_tau: float


class RelativeEntropyTerms(SQLModel):
    """Negentropy and cross entropy of the pseudo-Gibbs state, matrix and closed form"""

    negentropy: float
    negentropy_closed_form: float
    cross_entropy: float
    cross_entropy_closed_form: float
    pseudo_mean_energy: float


class MFSummary(SQLModel):
    """Summary of the measurement-free pipeline (mf_summary.json)"""

    mean_work: float
    exp_avg: float
    z_tilde: float
    z_tilde_transitions: float
    s_rel_matrix: float
    s_rel_closed_form: float
    residual_eq18: float
    slack_eq19: float
    pseudo_partition_residual: float
    atoms: int
    basis_convention: str
    relative_entropy_terms: RelativeEntropyTerms
    bounds: BoundsReport
    unitarity_defect: Optional[float] = None
    steps: Optional[int] = None


class SweepRow(SQLModel):
    """One grid point of the oscillator figure sweep"""

    qstar: float
    beta_w: float
    beta_df: float
    beta_df_plus_s: float
    duration: Optional[float] = None  # set in tau mode only


class SweepResult(SQLModel):
    """Oscillator figure sweep (oscillator_sweep.json)"""

    preset: Optional[str] = None
    mode: Literal["qstar", "tau"]
    omega_0: float
    omega_tau: float
    beta: float
    hbar: float
    rows: List[SweepRow]
    monotonicity: Dict[str, str]  # reported per curve, never asserted


class OscillatorCrossCheck(SQLModel):
    """Truncated-Fock numerics against the closed-form oscillator results"""

    qstar: float
    qstar_converged: bool
    n_trunc: int
    steps: int
    unitarity_defect: float
    mean_work_analytic: float
    mean_work_ttm: float
    mean_work_mf: float
    mean_work_relative_deviation: float
    delta_f_analytic: float
    delta_f_numeric: float
    z_tilde_analytic: float
    z_tilde_numeric: float
    s_rel_analytic: float
    s_rel_numeric: float
    mean_occupation_analytic: List[float]
    mean_occupation_numeric: List[float]
    mean_occupation_max_deviation: float
    tail_occupancy: float
    trusted: bool


class IdentityCheck(SQLModel):
    """Worst-case residual of one identity over all checked instances"""

    name: str
    kind: Literal["max_abs", "min_value"]
    worst: float
    tolerance: float
    instances: int
    passed: bool


class VerifyReport(SQLModel):
    """Residual report written by the verify command"""

    seed: int
    instances: int
    passed: bool
    checks: List[IdentityCheck]
