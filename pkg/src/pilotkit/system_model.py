"""Cell-free massive MIMO system model.

Holds the system tuple (APs, users, per-user serving sets, large-scale
fading matrix, pilots) together with the radio parameters needed to
evaluate uplink achievable rates, plus a seeded synthetic-instance
generator based on a single-slope path-loss model with log-normal
shadowing.

Conventions: all indices are 0-based (users 0..K-1, APs 0..M-1, pilots
0..tau-1); fading and channel-estimate coefficients are dimensionless.
"""

from __future__ import annotations

import math
import warnings
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "InfeasibleAssignmentError",
    "PilotAssignment",
    "CfMmimoSystem",
    "GenerationConfig",
    "ValidationResult",
    "validate_system",
    "generate_system",
    "compute_gamma_default",
    "uplink_rate",
    "system_throughput",
    "check_assignment",
    "exact_beta_squares",
]

# Reference path loss at d0 = 1 m for the synthetic channel model, in dB.
PATHLOSS_REF_DB = 30.0


class InfeasibleAssignmentError(ValueError):
    """A pilot assignment that is not a surjective map onto the pilot set."""


@dataclass(frozen=True)
class PilotAssignment:
    """Map from users to pilots.

    Feasibility requires surjectivity: every pilot in 0..n_pilots-1 must
    be used by at least one user. The constructor enforces this, so any
    live ``PilotAssignment`` is feasible for its pilot count.
    """

    pilot_of: tuple[int, ...]
    n_pilots: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "pilot_of", tuple(int(p) for p in self.pilot_of))
        if self.n_pilots < 1:
            raise InfeasibleAssignmentError("need at least one pilot")
        used = set()
        for p in self.pilot_of:
            if not 0 <= p < self.n_pilots:
                raise InfeasibleAssignmentError(
                    f"pilot index {p} out of range [0, {self.n_pilots})"
                )
            used.add(p)
        if len(used) != self.n_pilots:
            missing = sorted(set(range(self.n_pilots)) - used)
            raise InfeasibleAssignmentError(
                f"assignment is not surjective: pilots {missing} unused"
            )

    @property
    def n_users(self) -> int:
        return len(self.pilot_of)

    def relabeled(self, perm: Sequence[int]) -> "PilotAssignment":
        """Apply a bijection on pilot labels (perm[p] is the new label of p)."""
        return PilotAssignment(tuple(perm[p] for p in self.pilot_of), self.n_pilots)


@dataclass(frozen=True, eq=False)
class CfMmimoSystem:
    """The system tuple plus the radio constants of the uplink rate.

    beta[k, m] is the large-scale fading coefficient between user k and
    AP m; it must be strictly positive whenever m serves k. gamma[k, m]
    is the mean-square of the channel estimate, treated as a constant
    fixed before pilot assignment. ``beta_sq_exact``, when present,
    carries exact rational values of beta**2 so that reduction
    certificates avoid square-root rounding; it is filled in by the
    graph-to-system construction in rational mode and ignored by the
    floating-point paths.
    """

    m_aps: int
    k_users: int
    tau_pilots: int
    beta: np.ndarray
    serving_sets: tuple[tuple[int, ...], ...]
    gamma: np.ndarray
    eta: np.ndarray
    rho_u: float
    tau_c: int
    beta_sq_exact: Optional[tuple[tuple[Fraction, ...], ...]] = None

    def __post_init__(self) -> None:
        beta = np.ascontiguousarray(np.asarray(self.beta, dtype=float))
        gamma = np.ascontiguousarray(np.asarray(self.gamma, dtype=float))
        eta = np.ascontiguousarray(np.asarray(self.eta, dtype=float))
        for arr in (beta, gamma, eta):
            arr.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(
            self,
            "serving_sets",
            tuple(tuple(sorted(set(int(m) for m in a))) for a in self.serving_sets),
        )


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...]


def validate_system(s: CfMmimoSystem) -> ValidationResult:
    """Diagnostic well-formedness check; collects violations, never raises."""
    v: list[str] = []
    if s.m_aps < 1:
        v.append("AP count must be positive")
    if s.k_users < 1:
        v.append("user count must be positive")
    if s.tau_pilots < 1:
        v.append("pilot count must be positive")
    if s.tau_pilots > s.k_users:
        v.append(
            f"pilot count {s.tau_pilots} exceeds user count {s.k_users}: "
            "no surjective assignment possible"
        )
    if s.tau_c <= s.tau_pilots:
        v.append(f"coherence interval tau_c={s.tau_c} must exceed pilot length {s.tau_pilots}")
    if not (math.isfinite(s.rho_u) and s.rho_u > 0):
        v.append(f"uplink SNR rho_u={s.rho_u} must be positive and finite")

    if s.beta.shape != (s.k_users, s.m_aps):
        v.append(f"beta shape {s.beta.shape} != (K, M) = ({s.k_users}, {s.m_aps})")
    if s.gamma.shape != (s.k_users, s.m_aps):
        v.append(f"gamma shape {s.gamma.shape} != (K, M) = ({s.k_users}, {s.m_aps})")
    if s.eta.shape != (s.k_users,):
        v.append(f"eta shape {s.eta.shape} != (K,) = ({s.k_users},)")
    if len(s.serving_sets) != s.k_users:
        v.append(f"{len(s.serving_sets)} serving sets for {s.k_users} users")
    if v:
        return ValidationResult(False, tuple(v))

    if not np.isfinite(s.beta).all():
        v.append("beta contains non-finite entries")
    elif (s.beta < 0).any():
        v.append("beta contains negative entries")
    if not np.isfinite(s.gamma).all():
        v.append("gamma contains non-finite entries")
    elif (s.gamma < 0).any():
        v.append("gamma contains negative entries")
    if not np.isfinite(s.eta).all() or (s.eta < 0).any() or (s.eta > 1).any():
        v.append("eta entries must lie in [0, 1]")

    for k, aps in enumerate(s.serving_sets):
        if not aps:
            v.append(f"serving set of user {k} is empty")
            continue
        for m in aps:
            if not 0 <= m < s.m_aps:
                v.append(f"serving set of user {k} references AP {m} out of range")
            elif s.beta[k, m] <= 0:
                v.append(f"zero coefficient on serving link: beta[{k}, {m}] = {s.beta[k, m]}")

    if s.beta_sq_exact is not None:
        if len(s.beta_sq_exact) != s.k_users or any(
            len(row) != s.m_aps for row in s.beta_sq_exact
        ):
            v.append("exact beta-square payload has wrong shape")

    return ValidationResult(not v, tuple(v))


def check_assignment(s: CfMmimoSystem, a: PilotAssignment) -> None:
    """Raise unless the (already surjective) assignment matches the system."""
    if a.n_users != s.k_users:
        raise InfeasibleAssignmentError(
            f"assignment covers {a.n_users} users, system has {s.k_users}"
        )
    if a.n_pilots != s.tau_pilots:
        raise InfeasibleAssignmentError(
            f"assignment uses {a.n_pilots} pilots, system has {s.tau_pilots}"
        )


# Cache of float-derived exact squares, keyed by system identity. Systems are
# immutable after construction, so the derived payload never goes stale.
_EXACT_BSQ_CACHE: "weakref.WeakKeyDictionary[CfMmimoSystem, tuple]" = (
    weakref.WeakKeyDictionary()
)


def exact_beta_squares(s: CfMmimoSystem) -> tuple[tuple[Fraction, ...], ...]:
    """Exact rational values of beta**2.

    Prefers the symbolic payload installed by the rational-mode reduction;
    otherwise converts each stored float bit-exactly (every finite float is
    a rational), which keeps equality certificates exact even for systems
    that only exist in floating point.
    """
    if s.beta_sq_exact is not None:
        return s.beta_sq_exact
    cached = _EXACT_BSQ_CACHE.get(s)
    if cached is None:
        cached = tuple(
            tuple(Fraction(float(b)) ** 2 for b in row) for row in s.beta
        )
        _EXACT_BSQ_CACHE[s] = cached
    return cached


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for the synthetic-instance generator.

    ap_selection_rule is either ``"top:N"`` (the N strongest APs per user)
    or ``"energy:THETA"`` (the smallest prefix of APs, in decreasing
    fading order, capturing fraction THETA of the user's total fading
    energy). eta_policy is ``"full"`` (eta = 1 for everyone) or
    ``"uniform"`` (eta = 1/K). rho_p is the pilot-phase SNR used for the
    default channel-estimate coefficients; it falls back to rho_u.

    The default rho_u is the normalized SNR of a 100 mW transmitter over
    thermal noise at 20 MHz with a 9 dB noise figure (about -92 dBm),
    which keeps generated instances out of the purely noise-limited
    regime given the raw linear fading gains of the path-loss model.
    """

    area_side_m: float = 1000.0
    seed: int = 0
    pathloss_exponent: float = 3.5
    shadowing_sigma_db: float = 8.0
    ap_selection_rule: str = "energy:0.95"
    rho_u: float = 1.57e11
    tau_c: int = 200
    eta_policy: str = "full"
    rho_p: Optional[float] = None


def _parse_ap_rule(rule: str) -> tuple[str, float]:
    kind, _, arg = rule.partition(":")
    try:
        if kind == "top":
            n = int(arg)
            if n < 1:
                raise ValueError
            return ("top", float(n))
        if kind == "energy":
            theta = float(arg)
            if not 0 < theta <= 1:
                raise ValueError
            return ("energy", theta)
    except ValueError:
        pass
    raise ValueError(
        f"invalid AP selection rule {rule!r}: expected 'top:N' (N >= 1) "
        "or 'energy:THETA' (0 < THETA <= 1)"
    )


def _gamma_from_beta(beta: np.ndarray, rho_p: float, tau: int) -> np.ndarray:
    x = tau * rho_p * beta
    with np.errstate(invalid="ignore"):
        g = np.where(beta > 0, x * beta / (x + 1.0), 0.0)
    return g


def compute_gamma_default(s: CfMmimoSystem, rho_p: float, tau: int) -> np.ndarray:
    """Default mean-square channel-estimate matrix.

    gamma[k, m] = tau * rho_p * beta[k, m]**2 / (tau * rho_p * beta[k, m] + 1),
    the contamination-free LMMSE estimate quality for a pilot of length tau
    sent at SNR rho_p. Satisfies 0 <= gamma < beta wherever beta > 0 and
    saturates to beta as tau * rho_p grows.
    """
    if not rho_p > 0:
        raise ValueError(f"rho_p must be positive, got {rho_p}")
    if tau < 1:
        raise ValueError(f"tau must be a positive integer, got {tau}")
    return _gamma_from_beta(s.beta, rho_p, tau)


def generate_system(
    cfg: GenerationConfig, m_aps: int, k_users: int, tau_pilots: int
) -> CfMmimoSystem:
    """Generate a random system, deterministically from cfg.seed.

    APs and users are placed uniformly in a square of side
    cfg.area_side_m. Fading follows a single-slope log-distance model,
    beta = 10**((-PL0 - 10 * alpha * log10(d / d0) + X) / 10) with
    PL0 = 30 dB at d0 = 1 m, alpha = cfg.pathloss_exponent, and shadowing
    X ~ N(0, cfg.shadowing_sigma_db**2); distances are floored at d0.
    Serving sets come from cfg.ap_selection_rule and gamma from the
    default channel-estimate formula.

    Raises ValueError on an invalid configuration (including
    tau_pilots > k_users, which would make every assignment infeasible);
    warns, but proceeds, when k_users > m_aps.
    """
    rule_kind, rule_arg = _parse_ap_rule(cfg.ap_selection_rule)
    if cfg.area_side_m <= 0:
        raise ValueError(f"area side must be positive, got {cfg.area_side_m}")
    if cfg.shadowing_sigma_db < 0:
        raise ValueError("shadowing sigma must be nonnegative")
    if min(m_aps, k_users, tau_pilots) < 1:
        raise ValueError("m_aps, k_users and tau_pilots must all be positive")
    if tau_pilots > k_users:
        raise ValueError(
            f"pilot count {tau_pilots} exceeds user count {k_users}: "
            "no surjective assignment exists"
        )
    if cfg.tau_c <= tau_pilots:
        raise ValueError(f"tau_c={cfg.tau_c} must exceed the pilot length {tau_pilots}")
    if not cfg.rho_u > 0:
        raise ValueError("rho_u must be positive")
    if cfg.eta_policy not in ("full", "uniform"):
        raise ValueError(f"unknown eta policy {cfg.eta_policy!r}")
    if cfg.rho_p is not None and not cfg.rho_p > 0:
        raise ValueError("rho_p must be positive when given")
    if k_users > m_aps:
        warnings.warn(
            f"{k_users} users with only {m_aps} APs: atypical deployment",
            stacklevel=2,
        )

    rng = np.random.default_rng(cfg.seed)
    ap_xy = rng.uniform(0.0, cfg.area_side_m, size=(m_aps, 2))
    ue_xy = rng.uniform(0.0, cfg.area_side_m, size=(k_users, 2))
    shadow = rng.normal(0.0, cfg.shadowing_sigma_db, size=(k_users, m_aps))

    diff = ue_xy[:, None, :] - ap_xy[None, :, :]
    dist = np.maximum(np.sqrt((diff**2).sum(axis=-1)), 1.0)
    pl_db = PATHLOSS_REF_DB + 10.0 * cfg.pathloss_exponent * np.log10(dist)
    beta = 10.0 ** ((-pl_db + shadow) / 10.0)

    serving = []
    for k in range(k_users):
        order = np.argsort(-beta[k], kind="stable")
        if rule_kind == "top":
            take = min(int(rule_arg), m_aps)
        else:
            cum = np.cumsum(beta[k][order])
            take = int(np.searchsorted(cum, rule_arg * cum[-1], side="left")) + 1
            take = min(max(take, 1), m_aps)
        serving.append(tuple(sorted(int(m) for m in order[:take])))

    rho_p = cfg.rho_p if cfg.rho_p is not None else cfg.rho_u
    gamma = _gamma_from_beta(beta, rho_p, tau_pilots)
    eta = np.full(k_users, 1.0 if cfg.eta_policy == "full" else 1.0 / k_users)

    s = CfMmimoSystem(
        m_aps=m_aps,
        k_users=k_users,
        tau_pilots=tau_pilots,
        beta=beta,
        serving_sets=tuple(serving),
        gamma=gamma,
        eta=eta,
        rho_u=cfg.rho_u,
        tau_c=cfg.tau_c,
    )
    result = validate_system(s)
    if not result.ok:  # pragma: no cover - generator postcondition
        raise RuntimeError("generator produced an invalid system: " + "; ".join(result.violations))
    return s


def uplink_rate(s: CfMmimoSystem, a: PilotAssignment, k: int) -> float:
    """Uplink achievable rate of user k in bits/s/Hz.

    (1 - tau/tau_c)/2 * log2(1 + SINR), where the SINR numerator is
    rho_u * eta[k] * (sum of gamma over the serving set squared) and the
    denominator adds coherent interference from users sharing k's pilot,
    non-coherent interference from every user (including k itself), and
    the noise term sum(gamma).
    """
    check_assignment(s, a)
    if not 0 <= k < s.k_users:
        raise IndexError(f"user index {k} out of range [0, {s.k_users})")

    idx = np.asarray(s.serving_sets[k], dtype=int)
    g = s.gamma[k, idx]
    b_own = s.beta[k, idx]
    gsum = float(g.sum())
    numerator = s.rho_u * float(s.eta[k]) * gsum * gsum
    if numerator == 0.0:
        return 0.0

    pk = a.pilot_of[k]
    coherent = 0.0
    for j in range(s.k_users):
        if j != k and a.pilot_of[j] == pk:
            ratio = float((g * (s.beta[j, idx] / b_own)).sum())
            coherent += float(s.eta[j]) * ratio * ratio
    coherent *= s.rho_u

    noncoherent = s.rho_u * float(s.eta @ (s.beta[:, idx] @ g))
    sinr = numerator / (coherent + noncoherent + gsum)
    prelog = (1.0 - s.tau_pilots / s.tau_c) / 2.0
    return prelog * math.log2(1.0 + sinr)


def system_throughput(s: CfMmimoSystem, a: PilotAssignment) -> float:
    """Sum of the uplink rates of all users."""
    return sum(uplink_rate(s, a, k) for k in range(s.k_users))
