"""Command-line front end.

Subcommands: ``sample``, ``evolve``, ``density esd|conc``, ``stats``,
``profile``, ``events`` and ``figure 1-5``. Output goes to ``--out`` (stdout
when omitted) as CSV with ``#`` metadata lines or as JSON.

Exit status: 0 on success, 2 for usage errors, 3 for domain and invariant
violations, 4 when a numerical procedure misses its tolerance.
"""
import argparse
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import kernels
from .channels import ChannelKind, SideSpec
from .entanglement import ZERO_TOL, esd_time_analytic, max_concurrence
from .ensembles import (
    AD_DELTA, analytic_conc_curve, analytic_esd_curve, ks_distance, mc_concurrence, mc_esd,
    mc_stats, p_c, p_qs_grid, qs_domain, sample_states,
)
from .ensembles.montecarlo import default_workers, evolved_concurrences, initial_concurrences
from .ensembles.montecarlo import parse_measure
from .errors import (
    AccuracyError, ConsistencyError, DomainError, RefinementError, ResolutionError,
)
from .qstate import PureState
from .svgplot import write_chart
from .timemaps import (
    MarkovConstant, NonAutonomous, OhmicDephasing, PseudomodeAD, SingleOscillatorDephasing,
    detect_sudden_events,
)

N_DEFAULT = 100_000
N_FULL = 1_000_000
PROFILE_KINDS = ("markov", "nonautonomous", "pseudomode", "ohmic", "oscillator")


class UsageError(Exception):
    pass


# parsing helpers -------------------------------------------------------------

def parse_grid(text):
    """``"a:b:n"`` (n evenly spaced points) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid {text!r} is not start:stop:num")
        try:
            lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        if num < 1:
            raise argparse.ArgumentTypeError("grid needs at least one point")
        return np.linspace(lo, hi, num)
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def parse_state(text):
    try:
        amps = np.array([complex(x.strip().replace(" ", "")) for x in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad amplitude list {text!r}")
    if amps.size != 4:
        raise argparse.ArgumentTypeError("a two-qubit state needs 4 amplitudes")
    return amps


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def seed_int(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _kind(text):
    try:
        return ChannelKind.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _side(text):
    try:
        return SideSpec.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _measure(text):
    try:
        return parse_measure(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


# output ----------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


class Table:
    """Column table with metadata, written as CSV or JSON."""

    def __init__(self, columns, rows, meta):
        self.columns = list(columns)
        self.rows = rows
        self.meta = dict(meta)

    def to_csv(self):
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key},{_cell(self.meta[key])}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self):
        def conv(v):
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return v if math.isfinite(v) else None
            if isinstance(v, np.integer):
                return int(v)
            return v
        d = {"meta": {k: conv(v) for k, v in self.meta.items()},
             "columns": self.columns,
             "rows": [[conv(v) for v in row] for row in self.rows]}
        return json.dumps(d, sort_keys=True, indent=1) + "\n"

    def column(self, name):
        j = self.columns.index(name)
        return np.array([float(r[j]) for r in self.rows])


def emit(table, args, path=None):
    text = table.to_json() if args.format == "json" else table.to_csv()
    path = path or args.out
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def base_meta(args, **extra):
    meta = {"version": __version__, "command": args.command}
    for key in ("kind", "side", "measure", "n", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            meta[key] = v.name if hasattr(v, "name") else v
    meta.update(extra)
    return meta


def plot_path(args):
    if not args.plot:
        return None
    if args.out is None or args.out == "-":
        raise UsageError("--plot needs --out to name the SVG file")
    return os.path.splitext(args.out)[0] + ".svg"


def n_of(args):
    if args.n is not None:
        return args.n
    return N_FULL if args.full else N_DEFAULT


# commands ----------------------------------------------------------------------

def cmd_sample(args):
    n = n_of(args)
    states = sample_states(args.measure, args.seed, n)
    conc = initial_concurrences(states)
    if states.ndim == 2:
        cols = ["index"] + [f"{p}{b}" for b in ("00", "01", "10", "11") for p in ("re", "im")] + ["concurrence"]
        rows = [[i] + [x for a in states[i] for x in (a.real, a.imag)] + [conc[i]] for i in range(n)]
    else:
        purity = np.einsum("nij,nji->n", states, states).real
        cols = ["index", "purity", "concurrence"]
        rows = [[i, purity[i], conc[i]] for i in range(n)]
    emit(Table(cols, rows, base_meta(args, n=n)), args)


def cmd_evolve(args):
    psi = PureState.from_unnormalized(args.state).amplitudes
    qs = np.asarray(args.q_list, dtype=float)
    closed = evolved_concurrences(psi[None, :], args.kind, args.side, qs)[0]
    rho = np.outer(psi, psi.conj())[None]
    kraus = kernels.evolved_concurrence(np.ascontiguousarray(rho), int(args.kind), int(args.side), qs)[0]
    outcome = esd_time_analytic(args.kind, psi, args.side)
    meta = base_meta(args, esd=outcome.kind.name,
                     q_s=outcome.q_s if outcome.q_s is not None else "none")
    table = Table(["q", "concurrence", "concurrence_kraus"],
                  [[q, a, b] for q, a, b in zip(qs, closed, kraus)], meta)
    emit(table, args)
    svg = plot_path(args)
    if svg:
        write_chart(svg, [("closed form", qs, closed), ("Kraus", qs, kraus)],
                    title=f"{args.kind.name} evolution", xlabel="q", ylabel="C")


def _histogram(values, lo, hi, bins, n_total):
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    return 0.5 * (edges[1:] + edges[:-1]), counts / (n_total * width)


def cmd_density(args):
    n = n_of(args)
    pure = args.measure == "haar"
    if args.which == "esd":
        codes, q_s = mc_esd(args.kind, args.measure, n, args.seed, args.side, workers=args.workers)
        lo, hi = qs_domain(args.kind) if pure else (0.0, 1.0)
        finite = codes == kernels.FINITE
        x, emp = _histogram(q_s[finite], lo, hi, args.bins, n)
        emp_masses = {"asymptotic_at_1": float(np.mean(codes == kernels.ASYMPTOTIC)),
                      "separable_at_0": float(np.mean(codes == kernels.SEPARABLE))}
        meta = base_meta(args, target="esd", bins=args.bins, **{f"empirical_{k}": v for k, v in emp_masses.items()})
        cols = ["q_s", "empirical"]
        columns = [x, emp]
        if pure and args.side == SideSpec.BOTH:
            ana = p_qs_grid(args.kind, x)
            curve = analytic_esd_curve(args.kind, points=args.points)
            samples = np.where(codes == kernels.ASYMPTOTIC, 1.0, q_s)
            meta["analytic_delta_at_1"] = AD_DELTA if args.kind == ChannelKind.AD else 0.0
            meta["ks_distance"] = ks_distance(samples, curve.cdf)
            cols.insert(1, "analytic")
            columns.insert(1, ana)
        xlabel = "q_S"
    else:
        if args.q is None:
            raise UsageError("density conc needs --q")
        q = float(args.q)
        c = mc_concurrence(args.kind, [q], args.measure, n, args.seed, args.side,
                           workers=args.workers)[:, 0]
        sep = c <= ZERO_TOL
        x, emp = _histogram(c[~sep], 0.0, 1.0, args.bins, n)
        meta = base_meta(args, target="conc", q=q, bins=args.bins,
                         empirical_separable_at_0=float(np.mean(sep)))
        cols = ["c", "empirical"]
        columns = [x, emp]
        if pure and args.side == SideSpec.BOTH:
            cm = max_concurrence(args.kind, q)
            ana = np.zeros_like(x)
            inside = x < cm
            if np.any(inside):
                ana[inside] = p_c(args.kind, x[inside], q)
            curve = analytic_conc_curve(args.kind, q, points=args.points)
            meta["analytic_separable_at_0"] = curve.mass_weight
            meta["ks_distance"] = ks_distance(c, curve.cdf)
            cols.insert(1, "analytic")
            columns.insert(1, ana)
        xlabel = "C"
    table = Table(cols, [list(r) for r in zip(*columns)], meta)
    emit(table, args)
    svg = plot_path(args)
    if svg:
        write_chart(svg, [(name, columns[0], col) for name, col in zip(cols[1:], columns[1:])],
                    title=f"{args.kind.name} {args.which} density", xlabel=xlabel, ylabel="density")


def cmd_stats(args):
    n = n_of(args)
    qs = np.asarray(args.q_list, dtype=float)
    stats = mc_stats(args.kind, qs, args.measure, n, args.seed, args.side, workers=args.workers)
    cm = np.atleast_1d(max_concurrence(args.kind, qs, args.side))
    rows = [[q, s.mean, s.std, s.separable_fraction, s.max_seen, m]
            for q, s, m in zip(qs, stats, cm)]
    table = Table(["q", "mean", "std", "separable_fraction", "max_seen", "c_max"], rows,
                  base_meta(args, n=n))
    emit(table, args)
    svg = plot_path(args)
    if svg:
        mean = table.column("mean")
        write_chart(svg, [("mean", qs, mean), ("mean + std", qs, mean + table.column("std")),
                          ("C_M", qs, cm)],
                    title=f"{args.kind.name} concurrence", xlabel="q", ylabel="C")


def build_profile(args):
    k = args.profile_kind
    need = lambda name: _require(args, name)
    if k == "markov":
        return MarkovConstant(need("gamma"))
    if k == "nonautonomous":
        return NonAutonomous(need("gamma_env"), need("gamma_rate"))
    if k == "pseudomode":
        return PseudomodeAD(need("lam"), need("gamma0"))
    if k == "ohmic":
        return OhmicDephasing(need("lam"), args.temperature, args.kernel)
    return SingleOscillatorDephasing(need("omega"), need("coupling"), args.temperature, args.kernel)


def _require(args, name):
    v = getattr(args, name)
    if v is None:
        flag = {"lam": "lambda"}.get(name, name).replace("_", "-")
        raise UsageError(f"profile {args.profile_kind} needs --{flag}")
    return v


def cmd_profile(args):
    prof = build_profile(args)
    t = np.asarray(args.t_grid, dtype=float)
    q = np.atleast_1d(prof(t))
    meta = {"version": __version__, "command": "profile", "profile": prof.kind.value}
    meta.update(prof.params)
    if prof.kind.value in ("ohmic", "oscillator"):
        meta["kernel"] = prof.kernel
    emit(Table(["t", "q"], [[a, b] for a, b in zip(t, q)], meta), args)
    svg = plot_path(args)
    if svg:
        write_chart(svg, [(prof.kind.value, t, q)], title="q(t)", xlabel="t", ylabel="q",
                    ylim=(0.0, 1.0))


def cmd_events(args):
    prof = build_profile(args)
    psi = PureState.from_unnormalized(args.state).amplitudes
    events = detect_sudden_events(psi, args.kind, prof, np.asarray(args.t_grid, dtype=float))
    outcome = esd_time_analytic(args.kind, psi)
    meta = {"version": __version__, "command": "events", "kind": args.kind.name,
            "profile": prof.kind.value, "esd": outcome.kind.name,
            "q_s": outcome.q_s if outcome.q_s is not None else "none"}
    meta.update(prof.params)
    emit(Table(["time", "event"], [[e.time, e.kind.value] for e in events], meta), args)


# figures -------------------------------------------------------------------------

def _figure_files(args, num):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    ext = "json" if args.format == "json" else "csv"
    return os.path.join(out, f"fig{num}.{ext}"), os.path.join(out, f"fig{num}.svg")


def figure1(args):
    grid = np.linspace(0.0, 1.0, args.points)
    cols = {"q_s": grid}
    meta = {"version": __version__, "command": "figure", "figure": 1, "ad_delta_at_1": AD_DELTA}
    for kind in ChannelKind:
        v = p_qs_grid(kind, grid)
        if kind == ChannelKind.AD:
            v = np.where(grid < 1.0, v, np.nan)  # the delta sits at 1
        cols[kind.name] = v
        if kind != ChannelKind.AD:
            meta[f"argmax_{kind.name}"] = float(grid[int(np.nanargmax(v))])
    return Table(list(cols), [list(r) for r in zip(*cols.values())], meta), \
        dict(series=[(k, grid, cols[k]) for k in ("D", "AD", "PD")],
             title="Separation-strength densities", xlabel="q_S", ylabel="p(q_S)",
             ylim=(0.0, float(np.nanmax(cols["D"])) * 1.05))


def figure_conc(args, kind):
    n = n_of(args)
    qs = np.linspace(0.0, 1.0, args.points if args.points < 64 else 41)
    stats = mc_stats(kind, qs, "haar", n, args.seed, workers=args.workers)
    cm = np.atleast_1d(max_concurrence(kind, qs))
    mean = np.array([s.mean for s in stats])
    std = np.array([s.std for s in stats])
    ent = np.array([1.0 - s.separable_fraction for s in stats])
    meta = {"version": __version__, "command": "figure", "figure": int(kind) + 2,
            "kind": kind.name, "n": n, "seed": args.seed, "measure": "haar"}
    rows = [list(r) for r in zip(qs, mean, std, mean + std, ent, cm)]
    table = Table(["q", "mean", "std", "mean_plus_std", "entangled_fraction", "c_max"], rows, meta)
    return table, dict(series=[("mean", qs, mean), ("mean + std", qs, mean + std),
                               ("entangled fraction", qs, ent), ("C_M", qs, cm)],
                       title=f"{kind.name}: average concurrence", xlabel="q", ylabel="C",
                       ylim=(0.0, 1.0))


def figure5(args):
    t = np.linspace(0.0, 10.0, args.points)
    profiles = {
        "oscillator": SingleOscillatorDephasing(1.0, 1.0, 0.0),
        "ohmic_T1": OhmicDephasing(1.0, 1.0),
        "ohmic_T0": OhmicDephasing(1.0, 0.0),
        "pseudomode": PseudomodeAD(1.0, 4.0),
    }
    cols = {"t": t}
    for name, prof in profiles.items():
        cols[name] = np.atleast_1d(prof(t))
    meta = {"version": __version__, "command": "figure", "figure": 5,
            "oscillator": "omega=1 coupling=1 T=0", "ohmic_T1": "lambda=1 T=1",
            "ohmic_T0": "lambda=1 T=0", "pseudomode": "lambda=1 gamma0=4"}
    return Table(list(cols), [list(r) for r in zip(*cols.values())], meta), \
        dict(series=[(k, t, cols[k]) for k in profiles], title="q(t)", xlabel="t (1/lambda)",
             ylabel="q", ylim=(0.0, 1.0))


def cmd_figure(args):
    if args.number == 1:
        table, chart = figure1(args)
    elif args.number in (2, 3, 4):
        table, chart = figure_conc(args, ChannelKind(args.number - 2))
    else:
        table, chart = figure5(args)
    data_path, svg_path = _figure_files(args, args.number)
    emit(table, args, data_path)
    write_chart(svg_path, **chart)
    print(data_path)
    print(svg_path)


# parser ----------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="entdecay", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"entdecay {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, kind=True, mc=True):
        if kind:
            sp.add_argument("--kind", type=_kind, default=ChannelKind.D, help="D, AD or PD")
            sp.add_argument("--side", type=_side, default=SideSpec.BOTH, help="both or first")
        if mc:
            sp.add_argument("--measure", type=_measure, default="haar", help="haar, hs or bures")
            sp.add_argument("--n", type=positive_int, default=None)
            sp.add_argument("--full", action="store_true", help=f"n = {N_FULL} unless --n is given")
            sp.add_argument("--seed", type=seed_int, default=0)
            sp.add_argument("--workers", type=positive_int, default=None,
                            help="worker processes (default: $ENTDECAY_WORKERS or 1)")
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--plot", action="store_true", help="also write an SVG next to --out")

    def profile_args(sp, kind_flag):
        sp.add_argument(kind_flag, dest="profile_kind", choices=PROFILE_KINDS, required=True)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--gamma-env", type=float)
        sp.add_argument("--gamma-rate", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--gamma0", type=float)
        sp.add_argument("--omega", type=float)
        sp.add_argument("--coupling", type=float)
        sp.add_argument("--temperature", type=float, default=0.0)
        sp.add_argument("--kernel", choices=("printed", "standard"), default="printed")
        sp.add_argument("--t-grid", type=parse_grid, default=np.linspace(0.0, 10.0, 201))

    sp = sub.add_parser("sample", help="draw states and their concurrence")
    common(sp, kind=False)

    sp = sub.add_parser("evolve", help="one state through a q-grid")
    common(sp, mc=False)
    sp.add_argument("--state", type=parse_state, required=True, help="a00,a01,a10,a11")
    sp.add_argument("--q-list", "--q", type=parse_grid, default=np.linspace(0.0, 1.0, 21))

    sp = sub.add_parser("density", help="analytic and empirical densities")
    sp.add_argument("which", choices=("esd", "conc"))
    common(sp)
    sp.add_argument("--q", type=float, help="strength for the concurrence density")
    sp.add_argument("--bins", type=int, default=100)
    sp.add_argument("--points", type=positive_int, default=257,
                    help="grid of the analytic curve used for the KS distance")

    sp = sub.add_parser("stats", help="ensemble statistics over a q-grid")
    common(sp)
    sp.add_argument("--q-list", "--q", type=parse_grid, default=np.linspace(0.0, 1.0, 11))

    sp = sub.add_parser("profile", help="tabulate q(t)")
    common(sp, kind=False, mc=False)
    profile_args(sp, "--kind")

    sp = sub.add_parser("events", help="sudden death and birth of one state")
    common(sp, mc=False)
    profile_args(sp, "--profile")
    sp.add_argument("--state", type=parse_state, required=True)

    sp = sub.add_parser("figure", help="reproduce a figure as data + SVG")
    sp.add_argument("number", type=int, choices=(1, 2, 3, 4, 5))
    common(sp, kind=False)
    sp.add_argument("--points", type=positive_int, default=201)
    return p


COMMANDS = {"sample": cmd_sample, "evolve": cmd_evolve, "density": cmd_density,
            "stats": cmd_stats, "profile": cmd_profile, "events": cmd_events,
            "figure": cmd_figure}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "bins", 2) < 2:
        parser.error("--bins must be at least 2")
    if hasattr(args, "workers") and args.workers is None:
        try:
            args.workers = default_workers()
        except DomainError as exc:
            parser.error(str(exc))
    for name in ("q_list",):
        v = getattr(args, name, None)
        if v is not None and (v.size == 0 or np.any((v < 0.0) | (v > 1.0))):
            parser.error("q values must lie in [0, 1]")
    if getattr(args, "q", None) is not None and not 0.0 <= args.q <= 1.0:
        parser.error("q must lie in [0, 1]")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except AccuracyError as exc:
        print(f"entdecay: accuracy error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, ConsistencyError, RefinementError, ResolutionError) as exc:
        print(f"entdecay: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
