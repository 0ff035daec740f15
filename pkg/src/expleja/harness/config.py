"""Run configuration and expansion of parameter grids.

A sweep file is plain ``key = value`` text split into sections, one section
per family of runs. Any value may be a comma-separated list; a section
expands to the Cartesian product of its lists, so

    [viscous]
    problem = viscous_burgers_1d
    N = 100, 300
    tol = 1e-4, 1e-5

yields four runs. Keys mirror the command-line flags.
"""
from __future__ import annotations

import configparser
import itertools
from dataclasses import asdict, dataclass, fields

from ..controllers import VARIANTS
from ..integrators import LejaSettings
from ..phi_kernel import DEFAULT_RESOLUTION, MAX_NODES
from ..problems import KINDS, make_problem

TOL_RANGE = (1e-13, 1e-1)
ESTIMATORS = ("embedded", "richardson")
# integrators a controlled run can use; Rosenbrock-Euler has no error estimate
RUN_INTEGRATORS = ("exprb43", "rkf45")
DECADE_TOLS = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


@dataclass(frozen=True)
class RunConfig:
    problem: str
    N: int = None
    Nx: int = None
    Ny: int = None
    eta: float = None
    etax: float = None
    etay: float = None
    integrator: str = "exprb43"
    controller: str = "traditional"
    estimator: str = "embedded"
    tol: float = 1e-6
    dt0: float = None
    dt_max: float = None
    t_end: float = None
    leja_max_iter: int = MAX_NODES
    candidate_resolution: int = DEFAULT_RESOLUTION
    tol_multiplier: float = 1.0
    power_iterations: int = 20
    power_safety: float = 1.25

    def __post_init__(self):
        if self.problem not in KINDS:
            raise ValueError(f"unknown problem {self.problem!r}; choose from {KINDS}")
        if self.integrator not in RUN_INTEGRATORS:
            raise ValueError(f"integrator must be one of {RUN_INTEGRATORS}, got {self.integrator!r}")
        if self.controller not in VARIANTS:
            raise ValueError(f"controller must be one of {VARIANTS}, got {self.controller!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.estimator == "richardson" and self.integrator != "exprb43":
            raise ValueError("the Richardson estimator is only available for exprb43")
        if not TOL_RANGE[0] <= self.tol <= TOL_RANGE[1]:
            raise ValueError(f"tol must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}], got {self.tol:g}")
        for name in ("dt0", "dt_max", "t_end", "N", "Nx", "Ny", "eta", "etax", "etay"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 1 <= self.leja_max_iter <= MAX_NODES:
            raise ValueError(f"leja_max_iter must be in [1, {MAX_NODES}]")
        if self.tol_multiplier <= 0 or self.power_safety < 1.0:
            raise ValueError("tol_multiplier must be positive and power_safety at least 1")
        # fail early on missing grid sizes or Peclet numbers
        self.build_problem()

    @property
    def descriptor_name(self):
        if self.estimator == "richardson":
            return "exprb43_richardson"
        return self.integrator

    @property
    def is_2d(self):
        return self.problem.endswith("_2d")

    def leja_settings(self):
        return LejaSettings(
            max_iter=self.leja_max_iter,
            tol_multiplier=self.tol_multiplier,
            power_iterations=self.power_iterations,
            power_safety=self.power_safety,
            resolution=self.candidate_resolution,
        )

    def build_problem(self):
        return make_problem(
            self.problem, n=self.N, eta=self.eta, nx=self.Nx, ny=self.Ny,
            etax=self.etax, etay=self.etay, t_end=self.t_end,
        )

    def grid_columns(self):
        """(N, Nx, Ny, eta, etax, etay) as written to the summary; unused slots are None."""
        if self.is_2d:
            return (None, self.Nx or self.N, self.Ny or self.N,
                    None, self.etax or self.eta, self.etay or self.eta)
        return (self.N, None, None, self.eta, None, None)

    def sort_key(self):
        n, nx, ny, eta, ex, ey = self.grid_columns()
        size = (n or 0, nx or 0, ny or 0)
        peclet = (eta or 0.0, ex or 0.0, ey or 0.0)
        return (self.problem, size, peclet, self.controller, self.tol, self.descriptor_name)

    def as_dict(self):
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}
_ALIASES = {
    "n": "N", "nx": "Nx", "ny": "Ny",
    "dt-max": "dt_max", "t-end": "t_end",
    "leja-max-iter": "leja_max_iter", "candidate-resolution": "candidate_resolution",
    "tol-multiplier": "tol_multiplier", "power-iterations": "power_iterations",
    "power-safety": "power_safety",
}


def canonical_key(key):
    key = key.strip()
    key = _ALIASES.get(key.lower(), key)
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown configuration key {key!r}")
    return key


def _cast(key, text):
    kind = _FIELD_TYPES[key]
    if kind == "int":
        value = float(text)
        if value != int(value):
            raise ValueError(f"{key} must be an integer, got {text!r}")
        return int(value)
    return _CASTS[kind](text)


def expand(section):
    """All RunConfigs described by a mapping of key -> comma-separated values."""
    keys, choices = [], []
    for raw_key, raw_value in section.items():
        if raw_value is None or str(raw_value).strip() == "":
            continue
        key = canonical_key(raw_key)
        keys.append(key)
        choices.append([_cast(key, item.strip()) for item in str(raw_value).split(",") if item.strip()])
    if "problem" not in keys:
        raise ValueError("every run needs a problem")
    return [RunConfig(**dict(zip(keys, combo))) for combo in itertools.product(*choices)]


def read_sweep(path, overrides=None):
    """Parse a sweep file; ``overrides`` (key -> text) replace values in every section."""
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        parser.read_file(fh)
    configs = []
    sections = parser.sections() or ["DEFAULT"]
    for name in sections:
        section = {canonical_key(k): v for k, v in parser[name].items()}
        for key, value in (overrides or {}).items():
            section[canonical_key(key)] = value
        configs.extend(expand(section))
    return configs


def tolerance_grid(half_decades=False):
    """Default tolerances 1e-4 .. 1e-8, optionally with half-decade midpoints."""
    if not half_decades:
        return list(DECADE_TOLS)
    exponents = [-4 - 0.5 * k for k in range(9)]
    return [float(f"{10.0 ** e:.6g}") for e in exponents]
