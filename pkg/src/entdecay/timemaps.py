"""Maps from physical time t to the channel strength q(t).

Every statistic computed as a function of q carries over to time through
q(t). Units: hbar = k_B = 1, so temperatures are frequencies.
"""
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelKind, SideSpec
from .entanglement import EsdKind, esd_time_analytic
from .errors import ConsistencyError, DomainError, ResolutionError
from .smallmat import adaptive_quad

CUTOFF_FACTOR = 50.0
EVENT_TOL = 1e-12
MAX_PIECES = 20000


def q_markov(gamma, t):
    """``1 - exp(-gamma t)``."""
    if not gamma > 0.0:
        raise DomainError("gamma must be positive")
    t = _times(t)
    out = -np.expm1(-gamma * t)
    return float(out) if out.ndim == 0 else out


def q_nonautonomous(gamma_env, gamma_rate, t):
    """Strength under a generator damped as ``exp(-gamma_env t)``.

    The accumulated dissipation is ``gamma_rate (1 - exp(-gamma_env t)) /
    gamma_env`` and ``q = 1 - exp(-accumulated)``; it saturates at
    ``1 - exp(-gamma_rate / gamma_env)``.
    """
    if not (gamma_env > 0.0 and gamma_rate > 0.0):
        raise DomainError("rates must be positive")
    t = _times(t)
    theta = gamma_rate * t * _expm1_ratio(gamma_env * t)
    out = -np.expm1(-theta)
    return float(out) if out.ndim == 0 else out


def q_nonautonomous_limit(gamma_env, gamma_rate):
    return -math.expm1(-gamma_rate / gamma_env)


def _expm1_ratio(x):
    """``(1 - exp(-x)) / x`` with the x -> 0 limit 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(x > 1e-12, -np.expm1(-x) / np.where(x > 0, x, 1.0), 1.0 - 0.5 * x)
    return out


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0):
        raise DomainError("times must be finite and non-negative")
    return t


def pseudomode_amplitude(lam, gamma0, t):
    """Real envelope of the excited-state amplitude (the phase drops out of |c0|)."""
    if not (lam > 0.0 and gamma0 > 0.0):
        raise DomainError("lambda and gamma0 must be positive")
    t = _times(t)
    disc = lam * (2.0 * gamma0 - lam)
    if disc > 0.0:
        om = 0.5 * math.sqrt(disc)
        return np.exp(-0.5 * lam * t) * (np.cos(om * t) + lam / (2.0 * om) * np.sin(om * t))
    if disc == 0.0:
        return np.exp(-0.5 * lam * t) * (1.0 + 0.5 * lam * t)
    om = 0.5 * math.sqrt(-disc)
    # exp(-lam t / 2) (cosh + lam / (2 om) sinh) without overflow
    grow = np.exp((om - 0.5 * lam) * t)
    decay = np.exp(-(om + 0.5 * lam) * t)
    k = lam / (2.0 * om)
    return np.where(t > 0.0, 0.5 * (grow * (1.0 + k) + decay * (1.0 - k)), 1.0)


def q_pseudomode_ad(lam, gamma0, t):
    """``1 - |c0(t)|^2`` for a qubit in a Lorentzian reservoir."""
    c = pseudomode_amplitude(lam, gamma0, t)
    out = np.clip(1.0 - c * c, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def pseudomode_zero_times(lam, gamma0, count):
    """First ``count`` times where q = 1 (zeros of c0), oscillatory regime only."""
    disc = lam * (2.0 * gamma0 - lam)
    if not disc > 0.0:
        return np.array([])
    om = 0.5 * math.sqrt(disc)
    first = (math.pi - math.atan(2.0 * om / lam)) / om
    return first + math.pi / om * np.arange(count)


def _coth_factor(w, temperature):
    if temperature == 0.0:
        return np.ones_like(w)
    x = w / (2.0 * temperature)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0.0, 1.0 / np.tanh(np.where(x > 0.0, x, 1.0)), 0.0)


def _kernel(w, t, power):
    # (1 - cos wt) / w^power with 1 - cos written as 2 sin^2 to keep small-w accuracy
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0.0, 2.0 * np.sin(0.5 * w * t) ** 2 / np.where(w > 0.0, w, 1.0) ** power, 0.0)


def decoherence_ohmic(lam, temperature, t, kernel="printed", tol=1e-11):
    """Dephasing exponent for ``J(w) = (w / lam) exp(-w / lam)``, cut at 50 lam.

    ``kernel="printed"`` integrates ``J(w) (1 - cos wt) / w coth(w / 2T)``;
    ``kernel="standard"`` uses the usual ``1 / w^2``.
    """
    power = _kernel_power(kernel)
    cut = CUTOFF_FACTOR * lam
    t = float(t)
    if t == 0.0:
        return 0.0

    def f(w):
        j = (w / lam) * np.exp(-w / lam)
        return j * _kernel(w, t, power) * _coth_factor(w, temperature)

    # one piece per oscillation period keeps each adaptive call smooth
    period = 2.0 * math.pi / t
    n_pieces = int(min(math.ceil(cut / period), MAX_PIECES))
    edges = np.linspace(0.0, cut, n_pieces + 1)
    return math.fsum(adaptive_quad(f, a, b, tol / n_pieces, rel_tol=1e-11, max_subdivisions=4000)
                     for a, b in zip(edges[:-1], edges[1:]))


def decoherence_oscillator(omega, coupling, temperature, t, kernel="printed"):
    """Single-frequency dephasing exponent ``g^2 (1 - cos wt) / w^p coth(w / 2T)``."""
    power = _kernel_power(kernel)
    if not omega > 0.0:
        raise DomainError("omega must be positive")
    t = _times(t)
    w = np.array(omega, dtype=float)
    return coupling ** 2 * _kernel(w, t, power) * _coth_factor(w, temperature)


def _kernel_power(kernel):
    if kernel == "printed":
        return 1
    if kernel == "standard":
        return 2
    raise DomainError(f"unknown kernel {kernel!r}")


class ProfileKind(str, enum.Enum):
    IDENTITY = "identity"
    MARKOV = "markov"
    NONAUTONOMOUS = "nonautonomous"
    PSEUDOMODE = "pseudomode"
    OHMIC = "ohmic"
    OSCILLATOR = "oscillator"


_PARAMS = {
    ProfileKind.IDENTITY: (),
    ProfileKind.MARKOV: ("gamma",),
    ProfileKind.NONAUTONOMOUS: ("gamma_env", "gamma_rate"),
    ProfileKind.PSEUDOMODE: ("lam", "gamma0"),
    ProfileKind.OHMIC: ("lam", "temperature"),
    ProfileKind.OSCILLATOR: ("omega", "coupling", "temperature"),
}


@dataclass(frozen=True)
class QProfile:
    """Named time profile with its parameters.

    ``kernel`` selects the dephasing integrand for the ohmic and oscillator
    kinds ("printed" by default, "standard" for ``1 / w^2``).
    """

    kind: ProfileKind
    params: dict = field(default_factory=dict)
    kernel: str = "printed"

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        missing = set(_PARAMS[kind]) - set(self.params)
        if missing:
            raise DomainError(f"{kind.value} profile needs {sorted(missing)}")
        clean = {k: float(self.params[k]) for k in _PARAMS[kind]}
        if any(not math.isfinite(v) for v in clean.values()):
            raise DomainError("profile parameters must be finite")
        if "temperature" in clean and clean["temperature"] < 0.0:
            raise DomainError("temperature must be non-negative")
        object.__setattr__(self, "params", clean)
        _kernel_power(self.kernel)

    def __call__(self, t):
        t = _times(t)
        p = self.params
        k = self.kind
        if k == ProfileKind.IDENTITY:
            if np.any(t > 1.0):
                raise DomainError("identity profile is defined on [0, 1]")
            out = t.copy()
        elif k == ProfileKind.MARKOV:
            out = q_markov(p["gamma"], t)
        elif k == ProfileKind.NONAUTONOMOUS:
            out = q_nonautonomous(p["gamma_env"], p["gamma_rate"], t)
        elif k == ProfileKind.PSEUDOMODE:
            out = q_pseudomode_ad(p["lam"], p["gamma0"], t)
        else:
            out = q_dephasing(self, t)
        out = np.asarray(out, dtype=float)
        return float(out) if out.ndim == 0 else out

    def to_csv(self, t_grid, path=None):
        t_grid = np.asarray(t_grid, dtype=float)
        q = np.atleast_1d(self(t_grid))
        buf = io.StringIO()
        buf.write(f"# profile,{self.kind.value}\n")
        for key in sorted(self.params):
            buf.write(f"# {key},{self.params[key]!r}\n")
        if self.kind in (ProfileKind.OHMIC, ProfileKind.OSCILLATOR):
            buf.write(f"# kernel,{self.kernel}\n")
        buf.write("t,q\n")
        for t, v in zip(np.atleast_1d(t_grid), q):
            buf.write(f"{float(t)!r},{float(v)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, t_grid=None):
        d = {"kind": self.kind.value, "params": dict(self.params), "kernel": self.kernel}
        if t_grid is not None:
            t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
            d["samples"] = [[float(t), float(q)] for t, q in zip(t_grid, np.atleast_1d(self(t_grid)))]
        return json.dumps(d, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["kind"], d["params"], d.get("kernel", "printed"))


def MarkovConstant(gamma):
    return QProfile(ProfileKind.MARKOV, {"gamma": gamma})


def NonAutonomous(gamma_env, gamma_rate):
    return QProfile(ProfileKind.NONAUTONOMOUS, {"gamma_env": gamma_env, "gamma_rate": gamma_rate})


def PseudomodeAD(lam, gamma0):
    return QProfile(ProfileKind.PSEUDOMODE, {"lam": lam, "gamma0": gamma0})


def OhmicDephasing(lam, temperature=0.0, kernel="printed"):
    return QProfile(ProfileKind.OHMIC, {"lam": lam, "temperature": temperature}, kernel)


def SingleOscillatorDephasing(omega, coupling, temperature=0.0, kernel="printed"):
    return QProfile(ProfileKind.OSCILLATOR,
                    {"omega": omega, "coupling": coupling, "temperature": temperature}, kernel)


def IdentityProfile():
    return QProfile(ProfileKind.IDENTITY, {})


def q_dephasing(profile, t):
    """``1 - exp(-Gamma(t))`` for an ohmic or single-oscillator dephasing profile."""
    t = _times(t)
    p = profile.params
    if profile.kind == ProfileKind.OHMIC:
        if not p["lam"] > 0.0:
            raise DomainError("lambda must be positive")
        flat = np.array([decoherence_ohmic(p["lam"], p["temperature"], x, profile.kernel)
                         for x in t.ravel()])
        gamma = flat.reshape(t.shape)
    elif profile.kind == ProfileKind.OSCILLATOR:
        gamma = decoherence_oscillator(p["omega"], p["coupling"], p["temperature"], t,
                                       profile.kernel)
    else:
        raise DomainError("q_dephasing needs an ohmic or oscillator profile")
    out = -np.expm1(-np.asarray(gamma, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TimePoint:
    t: float
    q: float
    value: object


def compose_through_profile(family, profile, t_grid):
    """Evaluate a q-indexed family at q(t) for every time in ``t_grid``.

    Raises
    ------
    ConsistencyError
        If the profile leaves [0, 1].
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    qs = np.atleast_1d(profile(t_grid))
    if np.any(~np.isfinite(qs)) or np.any(qs < 0.0) or np.any(qs > 1.0):
        raise ConsistencyError("profile left [0, 1]")
    return [TimePoint(float(t), float(q), family(float(q))) for t, q in zip(t_grid, qs)]


class EventKind(str, enum.Enum):
    DEATH = "death"
    BIRTH = "birth"


@dataclass(frozen=True)
class SuddenEvent:
    time: float
    kind: EventKind
    state_index: int = 0


def _bisect(g, lo, hi, tol=EVENT_TOL):
    g_lo = g(lo) >= 0.0
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if (g(mid) >= 0.0) == g_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_sudden_events(psi, kind, profile, t_grid, side=SideSpec.BOTH, state_index=0):
    """Entanglement death and birth times of a pure state along ``profile``.

    Entanglement is present while q(t) < q_S. Sign changes of q(t) - q_S on
    the grid are refined by bisection; a sign flip at an interval midpoint
    with equal signs at both ends reveals two crossings the grid cannot
    separate.

    Raises
    ------
    DomainError
        For an initially separable state.
    ResolutionError
        If the grid is too coarse to separate adjacent crossings.
    """
    outcome = esd_time_analytic(ChannelKind.parse(kind), psi, side)
    if outcome.kind == EsdKind.SEPARABLE:
        raise DomainError("state is initially separable")
    if outcome.kind == EsdKind.ASYMPTOTIC:
        return []
    q_s = outcome.q_s
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0.0):
        raise DomainError("t_grid must be ascending with at least 2 points")
    g = lambda t: float(profile(t)) - q_s
    dead = np.atleast_1d(profile(t_grid)) - q_s >= 0.0
    mids = 0.5 * (t_grid[1:] + t_grid[:-1])
    dead_mid = np.atleast_1d(profile(mids)) - q_s >= 0.0
    events = []
    for i in range(t_grid.size - 1):
        if dead[i] == dead[i + 1]:
            if dead_mid[i] != dead[i]:
                raise ResolutionError(
                    f"two crossings inside [{t_grid[i]:.6g}, {t_grid[i + 1]:.6g}]; refine the grid")
            continue
        t_c = _bisect(g, t_grid[i], t_grid[i + 1])
        events.append(SuddenEvent(float(t_c), EventKind.DEATH if dead[i + 1] else EventKind.BIRTH,
                                  state_index))
    return events
