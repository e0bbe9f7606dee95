from typing import Literal, Optional

from pydantic import model_validator
from sqlmodel import Field, SQLModel

ModelKind = Literal["two_level", "parametric_oscillator", "custom", "random"]
Shape = Literal["linear", "smoothstep", "sudden", "constant", "tabulated"]


class ModelSection(SQLModel):
    """[model] Hamiltonian family H(lambda)"""

    kind: ModelKind = "two_level"
    delta: float = 1.0
    axis: Literal["x", "y"] = "x"
    mass: float = Field(default=1.0, gt=0)
    n_trunc: int = Field(default=120, ge=2)
    omega_ref: Optional[float] = Field(default=None, gt=0)
    path: Optional[str] = None  # npz with arrays lambdas, hamiltonians
    dim: int = Field(default=2, ge=2)
    scale: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_custom_path(self):
        if self.kind == "custom" and not self.path:
            raise ValueError("custom model needs a path to an npz file")
        return self


class ScheduleSection(SQLModel):
    """[schedule] Control protocol lambda(t)"""

    shape: Shape = "linear"
    duration: float = Field(default=1.0, gt=0)
    start: float = 0.0
    end: float = 1.0
    knots: Optional[str] = None  # "t:value, t:value, ..."


class RunSection(SQLModel):
    """[run] Thermal reference and propagation settings"""

    beta: float = Field(default=1.0, gt=0)
    hbar: float = Field(default=1.0, gt=0)
    steps: int = Field(default=2000, ge=1)
    tolerance: float = Field(default=1e-9, gt=0)
    auto_converge: bool = False
    seed: int = Field(default=0, ge=0)


class OscillatorSection(SQLModel):
    """[oscillator] Parametric oscillator protocol and sweep grid"""

    omega_0: float = Field(default=1.0, gt=0)
    omega_tau: float = Field(default=2.0, gt=0)
    beta: float = Field(default=1.0, gt=0)
    hbar: float = Field(default=1.0, gt=0)
    mass: float = Field(default=1.0, gt=0)
    shape: Shape = "smoothstep"
    duration: float = Field(default=1.0, gt=0)
    mode: Literal["qstar", "tau"] = "qstar"
    qstar_min: float = Field(default=1.0, ge=1)
    qstar_max: float = Field(default=3.0, ge=1)
    points: int = Field(default=21, ge=1)
    durations: Optional[str] = None  # comma separated, tau mode
    ode_steps: int = Field(default=1000, ge=100)
    n_trunc: int = Field(default=120, ge=2)
    steps: int = Field(default=2000, ge=1)
    n_max: int = Field(default=10, ge=0)

    @model_validator(mode="after")
    def check_grid(self):
        if self.qstar_max < self.qstar_min:
            raise ValueError("qstar_max must not be below qstar_min")
        if self.mode == "tau" and not self.durations:
            raise ValueError("tau mode needs a durations list")
        return self


class VerifySection(SQLModel):
    """[verify] Random-instance identity suite"""

    instances: int = Field(default=200, ge=0)
    dim_min: int = Field(default=2, ge=2)
    dim_max: int = Field(default=8, ge=2)
    beta_min: float = Field(default=0.1, gt=0)
    beta_max: float = Field(default=5.0, gt=0)
    steps: int = Field(default=200, ge=1)
    tolerance: float = Field(default=1e-10, gt=0)
    dephasing_pairs: int = Field(default=1000, ge=0)
    oscillator: bool = False

    @model_validator(mode="after")
    def check_ranges(self):
        if self.dim_max < self.dim_min:
            raise ValueError("dim_max must not be below dim_min")
        if self.beta_max < self.beta_min:
            raise ValueError("beta_max must not be below beta_min")
        return self


class OutputSection(SQLModel):
    """[output] Where report files go"""

    dir: Optional[str] = None


class RunConfig(SQLModel):
    """Complete, validated run configuration"""

    model: ModelSection = Field(default_factory=ModelSection)
    schedule: ScheduleSection = Field(default_factory=ScheduleSection)
    run: RunSection = Field(default_factory=RunSection)
    oscillator: OscillatorSection = Field(default_factory=OscillatorSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    output: OutputSection = Field(default_factory=OutputSection)
    preset: Optional[str] = None
