"""Tabulated densities, ensemble summaries and their serialisation."""
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

NORM_TOL = 2e-3


def fmt(x):
    """Shortest round-tripping text for a float; fixes the CSV/JSON bytes."""
    return repr(float(x))


@dataclass
class DensityCurve:
    """Density tabulated on an ascending grid, plus optional point masses.

    Between grid points the density is linear; outside the grid it is 0.
    ``cdf_values``, when given, holds the exact cumulative distribution at
    the grid points (continuous part only) and replaces the trapezoid rule.
    """

    grid: np.ndarray
    values: np.ndarray
    masses: list = field(default_factory=list)
    domain: tuple = None
    meta: dict = field(default_factory=dict)
    cdf_values: np.ndarray = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise DomainError("grid and values must be 1-d arrays of equal length")
        if self.grid.size and np.any(np.diff(self.grid) <= 0.0):
            raise DomainError("grid must be strictly ascending")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0.0):
            raise DomainError("density values must be finite and non-negative")
        self.masses = [(float(loc), float(w)) for loc, w in self.masses]
        if any(not 0.0 <= w <= 1.0 for _, w in self.masses):
            raise DomainError("point-mass weights must lie in [0, 1]")
        if self.domain is None:
            lo = [self.grid[0]] if self.grid.size else []
            hi = [self.grid[-1]] if self.grid.size else []
            locs = [loc for loc, _ in self.masses]
            self.domain = (min(lo + locs), max(hi + locs))
        self.domain = (float(self.domain[0]), float(self.domain[1]))
        if self.cdf_values is not None:
            self.cdf_values = np.asarray(self.cdf_values, dtype=float)

    @property
    def mass_weight(self):
        return math.fsum(w for _, w in self.masses)

    def continuous_mass(self):
        if self.cdf_values is not None:
            return float(self.cdf_values[-1])
        return float(np.trapezoid(self.values, self.grid)) if self.grid.size > 1 else 0.0

    def total_mass(self):
        return self.continuous_mass() + self.mass_weight

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.total_mass() - 1.0) <= tol

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.grid.size == 0:
            return np.zeros(x.shape)
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def _cumulative(self):
        if self.cdf_values is not None:
            return self.cdf_values
        steps = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def cdf(self, x):
        """Cumulative probability, point masses counted at and after their location."""
        x = np.asarray(x, dtype=float)
        if self.grid.size > 1:
            out = np.interp(x, self.grid, self._cumulative(), left=0.0)
        else:
            out = np.zeros(x.shape)
        for loc, w in self.masses:
            out = out + np.where(x >= loc, w, 0.0)
        return out

    def argmax(self):
        return float(self.grid[int(np.argmax(self.values))])

    def mean(self):
        cont = float(np.trapezoid(self.grid * self.values, self.grid)) if self.grid.size > 1 else 0.0
        return cont + math.fsum(loc * w for loc, w in self.masses)

    # serialisation -------------------------------------------------------

    def to_csv(self, path=None):
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key},{self.meta[key]}\n")
        buf.write(f"# domain,{fmt(self.domain[0])},{fmt(self.domain[1])}\n")
        buf.write("x,density\n")
        for x, v in zip(self.grid, self.values):
            buf.write(f"{fmt(x)},{fmt(v)}\n")
        for loc, w in self.masses:
            buf.write(f"# mass,{fmt(loc)},{fmt(w)}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text):
        grid, values, masses, meta, domain = [], [], [], {}, None
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("#"):
                key, _, rest = line[1:].strip().partition(",")
                if key == "mass":
                    loc, w = rest.split(",")
                    masses.append((float(loc), float(w)))
                elif key == "domain":
                    lo, hi = rest.split(",")
                    domain = (float(lo), float(hi))
                else:
                    meta[key] = rest
                continue
            if line.startswith("x,"):
                continue
            x, v = line.split(",")[:2]
            grid.append(float(x))
            values.append(float(v))
        return cls(np.array(grid), np.array(values), masses, domain, meta)

    def to_dict(self):
        return {
            "grid": [float(x) for x in self.grid],
            "values": [float(v) for v in self.values],
            "masses": [[loc, w] for loc, w in self.masses],
            "domain": list(self.domain),
            "meta": dict(self.meta),
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), sort_keys=True, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(np.array(d["grid"], dtype=float), np.array(d["values"], dtype=float),
                   [tuple(m) for m in d["masses"]], tuple(d["domain"]), d.get("meta", {}))


@dataclass(frozen=True)
class EnsembleStats:
    """Mean, spread and separable fraction of concurrence over an ensemble."""

    mean: float
    std: float
    separable_fraction: float
    max_seen: float
    n: int

    def __post_init__(self):
        if self.std < 0.0 or not 0.0 <= self.separable_fraction <= 1.0:
            raise DomainError("invalid ensemble statistics")

    @property
    def stderr(self):
        return self.std / math.sqrt(self.n)

    @property
    def separable_stderr(self):
        p = self.separable_fraction
        return math.sqrt(p * (1.0 - p) / self.n)

    @classmethod
    def from_sums(cls, total, total_sq, n_sep, max_seen, n):
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0)
        return cls(mean, math.sqrt(var), n_sep / n, max_seen, n)


def ks_distance(samples, cdf):
    """Kolmogorov-Smirnov distance between a sample and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty sample")
    right = np.asarray(cdf(x), dtype=float)
    left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - right), np.max(left - (i - 1) / n), 0.0))


def empirical_density(samples, bins, domain=None, censored=None, meta=None):
    """Normalised histogram of ``samples``.

    Parameters
    ----------
    samples : array_like
        Observed values. Entries flagged in ``censored`` are not binned but
        collected as a point mass at the upper end of ``domain`` (e.g. states
        that only separate asymptotically).
    bins : int
        Number of histogram bins, at least 2.
    domain : (lo, hi), optional
        Histogram range; defaults to the sample range.
    censored : bool array, optional

    Returns
    -------
    DensityCurve
        Bin-centre grid; values are counts / (n_total * width) so that the
        continuous mass plus the point masses is 1.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empirical_density needs at least one sample")
    if bins < 2:
        raise DomainError("bins must be at least 2")
    cens = np.zeros(x.size, dtype=bool) if censored is None else np.asarray(censored, dtype=bool).ravel()
    if cens.shape != x.shape:
        raise DomainError("censored mask must match the samples")
    obs = x[~cens]
    if not np.all(np.isfinite(obs)):
        raise DomainError("uncensored samples must be finite")
    n = x.size
    if domain is None:
        domain = (float(obs.min()), float(obs.max())) if obs.size else (0.0, 1.0)
    lo, hi = float(domain[0]), float(domain[1])
    masses = []
    if obs.size and obs.min() == obs.max():
        masses.append((float(obs[0]), obs.size / n))
        grid, values = np.array([]), np.array([])
        if hi <= lo:
            lo, hi = float(obs[0]), float(obs[0])
    else:
        if not hi > lo:
            raise DomainError("domain must have positive width")
        if np.any((obs < lo) | (obs > hi)):
            raise DomainError("samples fall outside the domain")
        counts, edges = np.histogram(obs, bins=bins, range=(lo, hi))
        width = edges[1] - edges[0]
        grid = 0.5 * (edges[1:] + edges[:-1])
        values = counts / (n * width)
    if cens.any():
        masses.append((hi, int(cens.sum()) / n))
    return DensityCurve(grid, values, masses, (lo, hi), dict(meta or {}))


GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _scaling_misfit(a, b, alpha, points=4001):
    top = max(a.domain[1], alpha * b.domain[1])
    lo = min(a.domain[0], alpha * b.domain[0])
    x = np.linspace(lo, top, points)
    diff = a(x) - b(x / alpha) / alpha
    return float(np.trapezoid(diff * diff, x))


def mixed_scaling_fit(curve_a, curve_b, bounds=(0.25, 4.0), grid_points=161, xtol=1e-6):
    """Time-scaling factor alpha with ``p_A(q) ~ p_B(q / alpha) / alpha``.

    Least squares over the continuous parts: a log-spaced alpha grid
    locates the basin, golden-section search refines it.

    Raises
    ------
    FitError
        If either curve has (almost) no continuous mass.
    """
    from ..errors import FitError

    for c in (curve_a, curve_b):
        if c.grid.size < 2 or c.continuous_mass() < 1e-3:
            raise FitError("curve has no continuous part to fit")
    alphas = np.geomspace(bounds[0], bounds[1], grid_points)
    cost = [_scaling_misfit(curve_a, curve_b, al) for al in alphas]
    k = int(np.argmin(cost))
    lo = alphas[max(k - 1, 0)]
    hi = alphas[min(k + 1, grid_points - 1)]
    f = lambda al: _scaling_misfit(curve_a, curve_b, al)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)
