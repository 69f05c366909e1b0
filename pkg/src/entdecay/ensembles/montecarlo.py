"""Monte Carlo estimators over random-state ensembles.

Samples are drawn in fixed-size blocks; block ``k`` uses the Philox stream
``k`` of the job seed. Blocks are independent and results are merged in
block order, so the output does not depend on how many worker processes
shared the work.
"""
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..channels import ChannelKind, SideSpec, check_q
from ..entanglement import (
    ZERO_TOL, concurrence_evolved, concurrence_pure, concurrence_single, esd_analytic_arrays,
    esd_numeric_arrays,
)
from ..errors import DomainError
from .. import kernels
from ..qstate import SeedSpec, sample_bures_mixed, sample_haar_pure, sample_hs_mixed
from .curves import EnsembleStats

BLOCK = 1 << 16
WORKERS_ENV = "ENTDECAY_WORKERS"

SAMPLERS = {
    "haar": sample_haar_pure,
    "hs": sample_hs_mixed,
    "bures": sample_bures_mixed,
}


def parse_measure(name):
    key = str(name).strip().lower().replace("-", "").replace("_", "")
    aliases = {"haar": "haar", "haarpure": "haar", "pure": "haar",
               "hs": "hs", "hsmixed": "hs", "hilbertschmidt": "hs",
               "bures": "bures", "buresmixed": "bures"}
    if key not in aliases:
        raise DomainError(f"unknown measure {name!r}")
    return aliases[key]


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise DomainError(f"{WORKERS_ENV} must be an integer")


def block_sizes(n, block=BLOCK):
    if n < 1:
        raise DomainError("n must be at least 1")
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def draw_block(measure, seed, stream, size):
    return SAMPLERS[parse_measure(measure)](SeedSpec(seed, stream), size)


def sample_states(measure, seed, n, block=BLOCK):
    """All ``n`` states of a job, concatenated in block order."""
    return np.concatenate([draw_block(measure, seed, k, m)
                           for k, m in enumerate(block_sizes(n, block))])


def _run(job):
    task, measure, seed, stream, size, args = job
    return task(draw_block(measure, seed, stream, size), *args)


def map_blocks(task, measure, seed, n, workers=1, block=BLOCK, args=()):
    """Apply ``task(states, *args)`` to every block; results in block order.

    ``task`` must be a module-level function so worker processes can
    import it.
    """
    jobs = [(task, measure, seed, k, m, tuple(args))
            for k, m in enumerate(block_sizes(n, block))]
    if workers <= 1 or len(jobs) == 1:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
        return list(ex.map(_run, jobs))


def is_pure_batch(states):
    return np.ndim(states) == 2


def evolved_concurrences(states, kind, side, qs):
    """Concurrence of each state at each strength, shape ``(n, len(qs))``.

    Pure states under channels on both qubits use the closed forms; every
    other case goes through the Kraus route.
    """
    kind = ChannelKind.parse(kind)
    side = SideSpec.parse(side)
    qs = np.atleast_1d(check_q(qs)).astype(float)
    states = np.asarray(states)
    if is_pure_batch(states):
        if side == SideSpec.BOTH:
            return np.atleast_2d(concurrence_evolved(kind, qs, states))
        if side == SideSpec.FIRST:
            c0 = concurrence_pure(states)
            return np.stack([concurrence_single(kind, q, c0) for q in qs], axis=1)
    return kernels.evolved_concurrence(np.ascontiguousarray(states), int(kind), int(side), qs)


def initial_concurrences(states):
    states = np.asarray(states)
    if is_pure_batch(states):
        return concurrence_pure(states)
    return kernels.concurrence(np.ascontiguousarray(states))


def esd_outcomes(states, kind, side=SideSpec.BOTH, method="auto"):
    """ESD codes and strengths for a batch (analytic for pure states when possible)."""
    states = np.asarray(states)
    if method not in ("auto", "analytic", "numeric"):
        raise DomainError(f"unknown method {method!r}")
    if is_pure_batch(states) and method != "numeric":
        return esd_analytic_arrays(kind, states, side)
    if method == "analytic":
        raise DomainError("analytic ESD strengths exist for pure states only")
    rho = states
    if is_pure_batch(states):
        rho = np.einsum("ni,nj->nij", states, np.conj(states))
    return esd_numeric_arrays(rho, kind, side)


def _task_sums(states, kind, side, qs):
    # one contiguous row per strength: sums do not depend on the other strengths
    c = np.ascontiguousarray(evolved_concurrences(states, kind, side, qs).T)
    sep = np.sum(c <= ZERO_TOL, axis=1)
    return c.sum(axis=1), (c * c).sum(axis=1), sep, c.max(axis=1), c.shape[1]


def _task_concurrence(states, kind, side, qs):
    return evolved_concurrences(states, kind, side, qs)


def _task_initial(states):
    return initial_concurrences(states)


def _task_esd(states, kind, side, method):
    return esd_outcomes(states, kind, side, method)


def ensemble_stats(kind, q, states, side=SideSpec.BOTH):
    """Mean, spread, separable fraction and maximum of the evolved concurrence."""
    states = np.asarray(states)
    if states.shape[0] == 0:
        raise DomainError("empty state list")
    c = evolved_concurrences(states, kind, side, [q])[:, 0]
    return EnsembleStats(float(np.mean(c)), float(np.std(c)),
                         float(np.mean(c <= ZERO_TOL)), float(np.max(c)), int(c.size))


def mc_stats(kind, qs, measure="haar", n=100_000, seed=0, side=SideSpec.BOTH,
             workers=1, block=BLOCK):
    """:class:`EnsembleStats` at each strength in ``qs``, merged block by block."""
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    parts = map_blocks(_task_sums, measure, seed, n, workers, block,
                       (ChannelKind.parse(kind), SideSpec.parse(side), qs))
    out = []
    for j in range(qs.size):
        total = math.fsum(p[0][j] for p in parts)
        total_sq = math.fsum(p[1][j] for p in parts)
        n_sep = int(sum(int(p[2][j]) for p in parts))
        mx = float(max(p[3][j] for p in parts))
        out.append(EnsembleStats.from_sums(total, total_sq, n_sep, mx, n))
    return out


def mc_concurrence(kind, qs, measure="haar", n=100_000, seed=0, side=SideSpec.BOTH,
                   workers=1, block=BLOCK):
    """Evolved concurrences of every sampled state, shape ``(n, len(qs))``."""
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    return np.concatenate(map_blocks(_task_concurrence, measure, seed, n, workers, block,
                                     (ChannelKind.parse(kind), SideSpec.parse(side), qs)))


def mc_initial_concurrence(measure="haar", n=100_000, seed=0, workers=1, block=BLOCK):
    return np.concatenate(map_blocks(_task_initial, measure, seed, n, workers, block))


def mc_esd(kind, measure="haar", n=100_000, seed=0, side=SideSpec.BOTH, method="auto",
           workers=1, block=BLOCK):
    """ESD codes and strengths of every sampled state."""
    parts = map_blocks(_task_esd, measure, seed, n, workers, block,
                       (ChannelKind.parse(kind), SideSpec.parse(side), method))
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
