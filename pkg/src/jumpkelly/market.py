"""Jump-diffusion market definition and validation.

A market has n stocks whose instantaneous returns diffuse with drift ``mu``,
volatility ``sigma`` and correlation ``rho``, plus Poisson-timed jumps whose
net-return vectors are drawn from a finite list of atoms. A risk-free bond
accrues continuously at rate ``r``.

Markets are read from JSON documents with keys
``n, nu | mu (exactly one), sigma, rho (optional), r, lambda, atoms``.
The geometric drift ``nu`` is converted to the arithmetic drift via
``mu = nu + sigma**2 / 2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

# Relative tolerance for covariance pivots, against the largest diagonal entry.
PIVOT_RTOL = 1e-12


class MarketFileError(ValueError):
    """A market document failed to parse; message carries the offending path."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def covariance_matrix(sigma: Sequence[float], rho: Sequence[Sequence[float]]) -> np.ndarray:
    """Covariance of instantaneous returns per unit time: cov_ij = rho_ij * sigma_i * sigma_j.

    Raises ValueError on dimension mismatch or non-positive volatilities.
    """
    s = np.asarray(sigma, dtype=float)
    c = np.asarray(rho, dtype=float)
    if s.ndim != 1:
        raise ValueError("sigma must be a vector")
    if c.shape != (s.size, s.size):
        raise ValueError(f"rho has shape {c.shape}, expected ({s.size}, {s.size})")
    if np.any(s <= 0):
        raise ValueError("sigma entries must be positive")
    return np.outer(s, s) * c


@dataclass(frozen=True)
class DiffusionParams:
    """Diffusive part of the market: drift, volatility, correlation, bond rate.

    ``sigma`` entries may be zero (pure-jump market); value-domain problems
    such as out-of-range correlations are reported by :func:`validate`, not
    raised here. Shape mismatches raise immediately.
    """

    n: int
    mu: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    r: float

    def __post_init__(self):
        object.__setattr__(self, "mu", _freeze(self.mu))
        object.__setattr__(self, "sigma", _freeze(self.sigma))
        object.__setattr__(self, "rho", _freeze(self.rho))
        object.__setattr__(self, "r", float(self.r))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.mu.shape != (self.n,):
            raise ValueError(f"mu has shape {self.mu.shape}, expected ({self.n},)")
        if self.sigma.shape != (self.n,):
            raise ValueError(f"sigma has shape {self.sigma.shape}, expected ({self.n},)")
        if self.rho.shape != (self.n, self.n):
            raise ValueError(f"rho has shape {self.rho.shape}, expected ({self.n}, {self.n})")

    @property
    def covariance(self) -> np.ndarray:
        """cov_ij = rho_ij * sigma_i * sigma_j (no positivity requirement here)."""
        return np.outer(self.sigma, self.sigma) * self.rho


@dataclass(frozen=True)
class JumpModel:
    """Poisson jumps: intensity ``lam`` per year and a finite net-return support.

    ``returns`` is a (K, n) matrix of net-return vectors, ``probs`` the matching
    probabilities. A market without jumps has ``lam == 0`` and an empty support.
    """

    lam: float
    returns: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        r = np.array(self.returns, dtype=float)
        if r.ndim == 1:
            r = r.reshape(-1, 1)
        object.__setattr__(self, "returns", _freeze(r))
        object.__setattr__(self, "probs", _freeze(np.atleast_1d(self.probs)))
        if self.returns.shape[0] != self.probs.shape[0]:
            raise ValueError("returns and probs must list the same number of atoms")

    @classmethod
    def none(cls, n: int) -> "JumpModel":
        """A jump-free model (lam = 0, empty support) for n stocks."""
        return cls(0.0, np.zeros((0, n)), np.zeros(0))

    @classmethod
    def from_atoms(cls, lam: float, atoms: Sequence[tuple[Sequence[float], float]]) -> "JumpModel":
        """Build from (net-return vector, probability) pairs."""
        if not atoms:
            return cls(lam, np.zeros((0, 1)), np.zeros(0))
        xs = np.array([np.atleast_1d(x) for x, _ in atoms], dtype=float)
        ps = np.array([p for _, p in atoms], dtype=float)
        return cls(lam, xs, ps)

    @property
    def n_atoms(self) -> int:
        return self.returns.shape[0]


@dataclass(frozen=True)
class MarketSpec:
    """A complete market: diffusion plus jumps. Immutable; safe to share."""

    diffusion: DiffusionParams
    jumps: JumpModel

    def __post_init__(self):
        if self.jumps.n_atoms > 0 and self.jumps.returns.shape[1] != self.diffusion.n:
            raise ValueError(
                f"jump atoms have dimension {self.jumps.returns.shape[1]}, "
                f"market has {self.diffusion.n} stocks"
            )

    @property
    def n(self) -> int:
        return self.diffusion.n

    @property
    def mu(self) -> np.ndarray:
        return self.diffusion.mu

    @property
    def sigma(self) -> np.ndarray:
        return self.diffusion.sigma

    @property
    def r(self) -> float:
        return self.diffusion.r

    @property
    def lam(self) -> float:
        return self.jumps.lam

    @property
    def covariance(self) -> np.ndarray:
        return self.diffusion.covariance

    def without_jumps(self) -> "MarketSpec":
        """The diffusion-only market (lam = 0, no jump support)."""
        return MarketSpec(self.diffusion, JumpModel.none(self.n))


@dataclass(frozen=True)
class ValidationReport:
    """Every violated market invariant, or nothing when the market is sound."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _min_eigenvalue(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(mat)[0])


def validate(spec: MarketSpec, check_arbitrage: bool = True) -> ValidationReport:
    """Check every market invariant and report each violation.

    Covers the diffusion block (correlation range/symmetry, covariance
    positive semidefinite, strictly positive definite when there are no
    jumps), the jump block (probabilities, limited liability, support
    consistent with lam), per-stock risk exposure, and, when the jump block
    is structurally sound, the no-arbitrage condition on the support.
    """
    v: list[str] = []
    d, j = spec.diffusion, spec.jumps

    if np.any(d.sigma < 0):
        v.append("sigma: volatilities must be nonnegative")
    if not np.allclose(d.rho, d.rho.T, atol=1e-12):
        v.append("rho: correlation matrix must be symmetric")
    if not np.allclose(np.diag(d.rho), 1.0, atol=1e-12):
        v.append("rho: diagonal entries must equal 1")
    if np.any(np.abs(d.rho) > 1 + 1e-12):
        v.append("rho: correlation out of range [-1, 1]")

    cov = d.covariance
    max_diag = float(np.max(np.diag(cov))) if cov.size else 0.0
    pivot_tol = PIVOT_RTOL * max(max_diag, 1.0)
    min_eig = _min_eigenvalue(cov)
    if min_eig < -pivot_tol:
        v.append("covariance: matrix is not positive semidefinite")
    elif j.lam == 0 and min_eig <= pivot_tol:
        v.append("covariance: matrix must be positive definite when the market has no jumps")

    jumps_ok = True
    if j.lam < 0:
        v.append("lambda: jump intensity must be nonnegative")
        jumps_ok = False
    if j.lam > 0 and j.n_atoms == 0:
        v.append("atoms: lambda > 0 requires a nonempty atom list")
        jumps_ok = False
    if j.lam == 0 and j.n_atoms > 0:
        v.append("atoms: atom list must be empty when lambda = 0")
        jumps_ok = False
    if j.n_atoms > 0:
        if np.any(j.probs <= 0):
            v.append("atoms: probabilities must be positive")
            jumps_ok = False
        if abs(float(j.probs.sum()) - 1.0) > 1e-12:
            v.append("atoms: probabilities must sum to 1")
            jumps_ok = False
        bad = np.where(np.any(j.returns < -1, axis=1))[0]
        if bad.size:
            v.append(f"atoms: net return below -1 at atom index {int(bad[0])} (limited liability)")
            jumps_ok = False

    # a stock with zero volatility and zero jump exposure makes the growth
    # objective linear in that coordinate; the lam == 0 case is already
    # caught by the positive-definite requirement above
    if j.lam > 0 and j.n_atoms > 0:
        for i in range(d.n):
            if d.sigma[i] == 0 and not np.any(j.returns[:, i] != 0):
                v.append(f"stock {i}: zero volatility and zero jump exposure")

    if check_arbitrage and jumps_ok and j.n_atoms > 0:
        from .admissible import check_no_arbitrage

        report = check_no_arbitrage(j)
        if not report.passed:
            v.append(
                "atoms: jump support admits arbitrage "
                f"(direction {np.round(report.direction, 6).tolist()} has strictly "
                "positive worst-case jump return)"
            )

    return ValidationReport(tuple(v))


# --- JSON document handling -------------------------------------------------


class AtomDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")
    x: list[float]
    p: float


class MarketDocument(BaseModel):
    """The market JSON schema. Exactly one of ``nu`` / ``mu`` must be given."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    n: int = Field(ge=1)
    nu: float | list[float] | None = None
    mu: float | list[float] | None = None
    sigma: float | list[float]
    rho: list[list[float]] | None = None
    r: float
    lam: float = Field(alias="lambda")
    atoms: list[AtomDocument] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_shapes(self) -> "MarketDocument":
        if (self.nu is None) == (self.mu is None):
            raise ValueError("exactly one of 'nu' and 'mu' must be given")
        for name in ("nu", "mu", "sigma"):
            val = getattr(self, name)
            if isinstance(val, list) and len(val) != self.n:
                raise ValueError(f"'{name}' must have length n = {self.n}")
        if self.rho is not None:
            if len(self.rho) != self.n or any(len(row) != self.n for row in self.rho):
                raise ValueError(f"'rho' must be an {self.n} x {self.n} matrix")
        for k, atom in enumerate(self.atoms):
            if len(atom.x) != self.n:
                raise ValueError(f"atom {k}: 'x' must have length n = {self.n}")
        return self

    def _vec(self, val: float | list[float]) -> np.ndarray:
        if isinstance(val, list):
            return np.array(val, dtype=float)
        return np.full(self.n, float(val))

    def to_spec(self) -> MarketSpec:
        sigma = self._vec(self.sigma)
        if self.nu is not None:
            mu = self._vec(self.nu) + sigma**2 / 2
        else:
            mu = self._vec(self.mu)
        rho = np.eye(self.n) if self.rho is None else np.array(self.rho, dtype=float)
        diffusion = DiffusionParams(n=self.n, mu=mu, sigma=sigma, rho=rho, r=self.r)
        if self.atoms:
            jumps = JumpModel.from_atoms(self.lam, [(a.x, a.p) for a in self.atoms])
        else:
            jumps = JumpModel(self.lam, np.zeros((0, self.n)), np.zeros(0))
        return MarketSpec(diffusion, jumps)


def _format_validation_error(err: ValidationError, where: str) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "$"
        lines.append(f"{where}: {loc}: {e['msg']}")
    return "\n".join(lines)


def market_document(doc: dict[str, Any] | str, where: str = "<market>") -> MarketDocument:
    """Parse a market JSON document (dict or JSON text).

    Schema violations raise :class:`MarketFileError` identifying the
    offending location (JSON line/column for syntax errors, field path for
    schema errors).
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise MarketFileError(f"{where}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return MarketDocument.model_validate(doc)
    except ValidationError as e:
        raise MarketFileError(_format_validation_error(e, where)) from e


def parse_market(doc: dict[str, Any] | str, where: str = "<market>") -> MarketSpec:
    """Parse a market JSON document (dict or JSON text) into a MarketSpec."""
    return market_document(doc, where).to_spec()


def load_market_document(path: str) -> MarketDocument:
    """Read a market JSON file from disk without converting it."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return market_document(text, where=path)


def load_market(path: str) -> MarketSpec:
    """Read a market JSON file from disk."""
    return load_market_document(path).to_spec()


# Built-in example market used by the docs, the service and the CLI:
# geometric drift 7%, volatility 15%, bond rate 3%, one jump per year on
# average, and Shannon's Demon jumps (the price doubles or halves, 50/50).
EXAMPLE_MARKET_DOC: dict[str, Any] = {
    "n": 1,
    "nu": 0.07,
    "sigma": 0.15,
    "r": 0.03,
    "lambda": 1.0,
    "atoms": [{"x": [1.0], "p": 0.5}, {"x": [-0.5], "p": 0.5}],
}


def example_market() -> MarketSpec:
    """The built-in single-stock demonstration market."""
    return parse_market(EXAMPLE_MARKET_DOC, where="<built-in example>")
