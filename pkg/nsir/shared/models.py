"""
Pydantic Models for the Nonlocal SIR Laboratory

This module contains the validated data structures shared across modules:
- Model parameters and kernel specifications (ModelParams, KernelSpec)
- Check / report models emitted as JSON (NormalizationReport, CheckReport, ...)
- Free-boundary verdicts (Classification, MuBracket, UpperSolutionReport)
- Run and sweep configuration (RunConfig, SweepConfig and their sections)
"""

from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# Model Parameters
# ============================================================================

class ModelParams(BaseModel):
    """Epidemiological and diffusive constants; b may be given via M_cap"""
    model_config = ConfigDict(extra="forbid")

    a: float = Field(gt=0, description="Birth rate (1/time)")
    beta: float = Field(gt=0, description="Intrinsic death rate (1/time)")
    b: Optional[float] = Field(default=None, gt=0, description="Crowding coefficient, b = (a-beta)/M_cap")
    M_cap: Optional[float] = Field(default=None, gt=0, description="Carrying capacity (density)")
    k: float = Field(gt=0, description="Infection rate (1/(density*time))")
    gamma: float = Field(gt=0, description="Recovery rate (1/time)")
    d: float = Field(default=1.0, gt=0, description="Diffusivity (length^2/time)")
    mu: float = Field(default=1.0, gt=0, description="Front expansion coefficient (free boundary only)")
    h0: float = Field(default=1.0, gt=0, description="Initial half-span of the infected interval")

    @model_validator(mode="after")
    def _resolve_capacity(self) -> "ModelParams":
        if self.a <= self.beta:
            raise ValueError(f"a={self.a} must exceed beta={self.beta}")
        growth = self.a - self.beta
        if self.b is None and self.M_cap is None:
            raise ValueError("one of b or M_cap is required")
        if self.b is None:
            self.b = growth / self.M_cap
        elif self.M_cap is None:
            self.M_cap = growth / self.b
        elif abs(self.b * self.M_cap - growth) > 1e-12 * max(1.0, growth):
            raise ValueError(f"b={self.b} and M_cap={self.M_cap} disagree: b*M_cap must equal a-beta")
        return self

    @property
    def growth(self) -> float:
        """a - beta"""
        return self.a - self.beta

    @property
    def N_star(self) -> float:
        """Logistic carrying level (a-beta)/b"""
        return self.growth / self.b

    def with_(self, **changes: float) -> "ModelParams":
        """Copy with changed fields, re-validated (M_cap follows b unless given)"""
        data = self.model_dump()
        if "b" in changes and "M_cap" not in changes:
            data["M_cap"] = None
        if "M_cap" in changes and "b" not in changes:
            data["b"] = None
        if ("a" in changes or "beta" in changes) and "M_cap" not in changes:
            data["M_cap"] = None
        data.update(changes)
        return ModelParams(**data)


# ============================================================================
# Kernel Specification
# ============================================================================

class KernelFamily(str, Enum):
    UNIFORM = "Uniform"
    TRUNCATED_GAUSSIAN = "TruncatedGaussian"
    TOP_HAT = "TopHat"


class Normalization(str, Enum):
    COLUMN_STOCHASTIC = "ColumnStochastic"
    SINKHORN_SYMMETRIC = "SinkhornSymmetric"
    NONE = "None"


class KernelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: KernelFamily = Field(default=KernelFamily.UNIFORM, description="Kernel family")
    width: float = Field(default=1.0, gt=0, description="TopHat half-width or Gaussian sigma (length)")
    normalization: Normalization = Field(default=Normalization.NONE, description="Normalization mode")

    @property
    def is_convolution(self) -> bool:
        return self.family in (KernelFamily.TOP_HAT, KernelFamily.TRUNCATED_GAUSSIAN)

    @property
    def translation_invariant(self) -> bool:
        """Convolution family with no boundary-dependent renormalization"""
        return self.is_convolution and self.normalization == Normalization.NONE


# ============================================================================
# Check Reports
# ============================================================================

class NormalizationReport(BaseModel):
    max_column_deviation: float = Field(description="max_j |sum_i w_i P_ij - 1|")
    max_row_deviation: float = Field(description="max_i |sum_j P_ij w_j - 1|")
    max_asymmetry: float = Field(description="max |P_ij - P_ji| of the kernel density")
    symmetric: bool = Field(description="max_asymmetry < 1e-12")
    strictly_positive: bool = Field(description="P > 0 at every node pair")
    under_resolved: bool = Field(default=False, description="kernel width below grid spacing")
    normalization: str = Field(description="normalization mode applied")
    sinkhorn_sweeps: int = Field(default=0, description="sweeps used by symmetric scaling")


class CheckResult(BaseModel):
    name: str = Field(description="Check identifier")
    passed: bool = Field(description="Whether the check holds")
    value: Optional[float] = Field(default=None, description="Worst observed value")
    limit: Optional[float] = Field(default=None, description="Admissible limit for value")
    detail: str = Field(default="", description="Human-readable context for failures")


class CheckReport(BaseModel):
    """A group of named checks, serialized one report per file"""
    report: str = Field(description="Report kind, e.g. verify_bounds")
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


class NormalizationCheck(CheckReport):
    """Normalization checks for one kernel, with the raw report alongside"""
    report: str = "normalization"
    kernel: NormalizationReport


# ============================================================================
# Steady States (Dirichlet)
# ============================================================================

class FieldSnapshot(BaseModel):
    t: float
    x: List[float]
    S: List[float]
    I: List[float]
    R: List[float]


class SteadyRun(BaseModel):
    label: str = Field(description="Initial-data label")
    converged: bool = Field(description="Steady-state detector fired before the horizon")
    t_final: float
    residual: float = Field(description="sup |state change| / dt at the end")
    I_max: float = Field(description="sup of I at the end")
    positive: bool = Field(description="Run ended at a positive (endemic) state")


class SteadyReport(BaseModel):
    converged: bool = Field(description="All runs met the steady-state detector")
    final: Optional[FieldSnapshot] = Field(default=None, description="Terminal state of the first run")
    residual: float = Field(description="Largest terminal residual over the runs")
    lambda1_local_check: float = Field(description="lambda1(beta - a), closed form")
    lambda1_nonlocal_check: float = Field(description="lambda1(P, N~)")
    exists_predicted: bool
    runs: List[SteadyRun] = Field(default_factory=list)
    pairwise_agreement: Optional[float] = Field(default=None, description="max sup-distance between terminal states")
    empirical_exists: Optional[bool] = Field(default=None, description="All runs ended positive")
    agrees_with_prediction: Optional[bool] = None


# ============================================================================
# Free Boundary Verdicts
# ============================================================================

class Verdict(str, Enum):
    SPREADING = "Spreading"
    VANISHING = "Vanishing"
    UNDECIDED = "Undecided"


class Classification(BaseModel):
    verdict: Verdict
    final_span: float = Field(description="h(T) - g(T)")
    span_rate: float = Field(description="mean of h' - g' over the last 10% of the run")
    I_max_final: float
    l_star_used: float
    r02_initial: Optional[float] = None
    t_final: float = 0.0
    mu: Optional[float] = None


class MuProbe(BaseModel):
    mu: float
    verdict: Verdict
    final_span: float
    t_final: float


class MuBracket(BaseModel):
    mu_lo: float = Field(description="Largest probed mu classified Vanishing")
    mu_hi: float = Field(description="Smallest probed mu classified Spreading")
    probes: List[MuProbe] = Field(default_factory=list)
    monotone: bool = Field(description="Verdicts sorted by mu switch Vanishing->Spreading once")
    iterations: int = 0

    @property
    def width(self) -> float:
        return self.mu_hi - self.mu_lo


class UpperSolutionReport(BaseModel):
    lambda_eps: float = Field(description="Principal eigenvalue with c1 = k((a-beta)/b + eps), c2 = gamma + beta")
    eps: float
    delta: float
    A_amp: float
    A_min: float = Field(description="Smallest amplitude satisfying the initial ordering")
    phi_slope: float = Field(description="max |phi'(+-h0)|")
    mu0: float = Field(description="h0 delta^2 (1+delta) / (A |phi'(+-h0)|)")
    slack_pde: float = Field(description="min normalized residual of the differential inequality")
    slack_front: float = Field(description="min of s' - mu0 |I_x(+-s)|")
    slack_initial: float = Field(description="min over [-h0,h0] of upper(0,x) - I0(x)")
    n_space: int
    n_time: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ============================================================================
# Run Configuration
# ============================================================================

class ModelKind(str, Enum):
    NEUMANN = "Neumann"
    DIRICHLET = "Dirichlet"
    STEFAN = "Stefan"
    EIGEN = "Eigen"
    THRESHOLDS = "Thresholds"


class Numerics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=201, ge=3, description="Grid nodes on the fixed interval")
    left: float = Field(default=-1.0, description="Fixed interval left end")
    right: float = Field(default=1.0, description="Fixed interval right end")
    dt: Optional[float] = Field(default=None, gt=0, description="Time step; default from the stability rule")
    T: float = Field(default=200.0, gt=0, description="Horizon")
    record_every: int = Field(default=0, ge=0, description="Steps between snapshots (0: about 400 snapshots)")
    stop_at_steady: bool = Field(default=False, description="Stop once the steady-state detector fires")
    L_dom: Optional[float] = Field(default=None, gt=0, description="Truncated line half-length (free boundary)")
    inner_nodes: int = Field(default=41, ge=5, description="Nodes on the infected interval (free boundary)")
    outer_nodes: int = Field(default=81, ge=3, description="Nodes on each outer patch (free boundary)")
    stop_span_factor: Optional[float] = Field(default=3.0, gt=1, description="Stop a free-boundary run once h-g >= factor*l*")
    eigen_n: int = Field(default=201, ge=5, description="Nodes for eigenvalue computations")

    @model_validator(mode="after")
    def _check_interval(self) -> "Numerics":
        if not self.left < self.right:
            raise ValueError(f"left={self.left} must be < right={self.right}")
        return self


class InitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    profile: Literal["perturbed", "constant", "sine", "cosine_bump", "equilibrium"] = Field(
        default="perturbed", description="Named initial profile")
    amplitude: float = Field(default=0.2, ge=0, description="Relative perturbation or I0 amplitude")
    S_level: Optional[float] = Field(default=None, gt=0, description="S0 level (constant/cosine_bump)")
    I_level: Optional[float] = Field(default=None, gt=0, description="I0 level (constant/sine)")
    seed: Optional[int] = Field(default=None, description="Seed for the optional random perturbation")
    noise: float = Field(default=0.0, ge=0, description="Relative random perturbation amplitude")


class EigenSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    c1: float = Field(default=5.0, ge=0, description="Nonlocal coefficient")
    c2: float = Field(default=2.5, description="Local coefficient")
    length: float = Field(default=2.0, gt=0, description="Interval length (centered)")
    d: Optional[float] = Field(default=None, gt=0, description="Diffusivity; defaults to params.d")
    tol: float = Field(default=1e-6, gt=0, description="Critical-length bisection tolerance")
    oracle: bool = Field(default=False, description="Also run the dense eigensolver")
    dump_eigenfunction: bool = Field(default=False)


class DirichletSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    task: Literal["simulate", "existence"] = "simulate"


class StefanSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    task: Literal["classify", "critical_mu", "upper_solution"] = "classify"
    mu_bracket: Tuple[float, float] = Field(default=(0.01, 100.0))
    mu_tol: float = Field(default=0.1, gt=0)
    max_doublings: int = Field(default=4, ge=0)
    delta: float = Field(default=0.05, gt=0, lt=0.5)
    eps: float = Field(default=0.3, gt=0)
    A_amp: Optional[float] = Field(default=None, gt=0)


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = Field(default=None, description="Run directory; default <output root>/<name>")
    snapshot_times: List[float] = Field(default_factory=list, description="Times for field CSV snapshots")
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="run", description="Run label")
    preset: Optional[str] = Field(default=None, description="Preset this config was derived from")
    model: ModelKind
    params: ModelParams
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    numerics: Numerics = Field(default_factory=Numerics)
    init: InitSpec = Field(default_factory=InitSpec)
    eigen: EigenSettings = Field(default_factory=EigenSettings)
    dirichlet: DirichletSettings = Field(default_factory=DirichletSettings)
    stefan: StefanSettings = Field(default_factory=StefanSettings)
    outputs: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _check_model_requirements(self) -> "RunConfig":
        if self.model == ModelKind.STEFAN and not self.kernel.translation_invariant:
            raise ValueError("free-boundary runs need a TopHat/TruncatedGaussian kernel with normalization None")
        if self.model == ModelKind.NEUMANN and self.kernel.normalization == Normalization.NONE \
                and self.kernel.family != KernelFamily.UNIFORM:
            raise ValueError("Neumann runs need a Uniform kernel or a normalized one")
        return self


class ValueRange(BaseModel):
    lo: float
    hi: float
    count: int = Field(ge=2)
    spacing: Literal["linear", "log"] = "linear"


class Reducer(str, Enum):
    CLASSIFICATION = "Classification"
    TERMINAL_STATE = "TerminalState"
    LAMBDA1 = "Lambda1"


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="sweep")
    base: RunConfig
    axis: str = Field(description="Dotted path of the swept numeric field, e.g. params.mu")
    values: Union[List[float], ValueRange]
    reducer: Reducer
    workers: Optional[int] = Field(default=None, ge=1, description="Pool size; default available parallelism")

    @field_validator("axis")
    @classmethod
    def _axis_shape(cls, v: str) -> str:
        if "." not in v:
            raise ValueError("axis must be a dotted path such as params.mu")
        return v


class RunSummary(BaseModel):
    name: str
    model: str
    wall_time: float
    directory: str
    results: Dict[str, Any] = Field(default_factory=dict)
    checks_passed: bool = True
    failed_checks: List[str] = Field(default_factory=list)
