"""Command-line front end: sweeps, peak tables, run-time scaling fits.

Run ``qwtree --help`` (or ``python -m qwtree --help``) for the subcommands.
Every subcommand writes CSV or JSON to stdout or to ``--out``.  On failure
the process exits with status 1 after printing a single JSON error line to
stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .asymptotics import asymptotic_probability
from .btree import simulate_projected, simulate_tree
from .classical import ChainParams, chain_dp, hit_probability
from .errors import NoSignalError, ParameterError, QWTreeError
from .interchange import ProductState, evolve, line_walk
from .memchain import evolve_distribution, marginal, persistent_cycle_chain, point_mass
from .series import FORMS, amplitude_sequence

__all__ = [
    "SweepResult",
    "FitReport",
    "LinearFit",
    "PeakTimeFit",
    "default_t_max",
    "quantum_probabilities",
    "classical_probabilities",
    "sweep",
    "peak",
    "runtime_estimate",
    "linear_fit",
    "fit_scaling",
    "fit_peak_times",
    "classical_tail_rate",
    "table1",
    "emit_results",
    "main",
]

SWEEP_HEADER = ("n", "t", "prob_quantum", "prob_classical", "prob_asymptotic")
MP_DPS = 40


def _fmt(x):
    """17 significant digits, the shortest width that round-trips a double."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def default_t_max(n):
    return max(4 * n, n + 600)


# ---------------------------------------------------------------- sweeps


def quantum_probabilities(n, t_max, method="series", form="walk", precision="double"):
    """``|H_n(t)|^2`` for ``t = 0..t_max``."""
    if method == "series":
        dps = MP_DPS if precision == "mp" else None
        amps = amplitude_sequence(n, t_max, dps=dps, form=form)
        if dps is not None:
            return np.array([float(abs(x)) ** 2 for x in amps])
        return np.abs(amps) ** 2
    if form != "walk":
        raise ParameterError("direct simulation always follows the walk; use --method series for other forms")
    if method == "projected":
        return np.abs(simulate_projected(n, t_max)) ** 2
    if method == "tree":
        return np.abs(simulate_tree(n, t_max)) ** 2
    raise ParameterError(f"unknown quantum method {method!r}")


def classical_probabilities(n, t_max, method="dp", params=None):
    params = params or ChainParams()
    if method == "dp":
        return chain_dp(n, t_max, params)
    if method == "integral":
        return np.array([hit_probability(n, t, params) for t in range(t_max + 1)])
    raise ParameterError(f"unknown classical method {method!r}")


@dataclass
class SweepResult:
    """Probabilities at the root for one starting level ``n``.

    Any of the three probability columns may be ``None`` when that method
    was not run; the asymptotic column is ``None`` at ``t <= n`` where the
    formula does not apply, and may exceed 1 at small ``t - n``.
    """

    n: int
    t: list
    prob_quantum: list | None = None
    prob_classical: list | None = None
    prob_asymptotic: list | None = None
    peaks: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise ParameterError("sweep times must be strictly increasing")
        for name in ("prob_quantum", "prob_classical", "prob_asymptotic"):
            col = getattr(self, name)
            if col is None:
                continue
            if len(col) != len(self.t):
                raise ParameterError(f"{name} has {len(col)} entries for {len(self.t)} times")
            vals = [v for v in col if v is not None]
            if vals and min(vals) < 0:
                raise ParameterError(f"{name} has negative entries")
            # the leading-order asymptotic is unbounded as tau -> 0, so only
            # the exact columns are held to the unit interval
            if vals and name != "prob_asymptotic" and max(vals) > 1 + 1e-12:
                raise ParameterError(f"{name} exceeds 1")
        for name, label in (("prob_quantum", "quantum"), ("prob_classical", "classical")):
            col = getattr(self, name)
            if col is not None and label not in self.peaks and self.t:
                self.peaks[label] = peak(self.t, col)

    def rows(self):
        for i, t in enumerate(self.t):
            yield (
                self.n,
                t,
                None if self.prob_quantum is None else self.prob_quantum[i],
                None if self.prob_classical is None else self.prob_classical[i],
                None if self.prob_asymptotic is None else self.prob_asymptotic[i],
            )


def peak(ts, probs):
    """``(t_star, p_star)``; the earliest time wins a tie."""
    probs = np.asarray(probs, dtype=float)
    k = int(np.argmax(probs))
    return int(ts[k]), float(probs[k])


def sweep(n, t_max=None, quantum="series", classical="dp", asymptotic=True, form="walk",
          precision="double", t_min=None):
    """Tabulate all requested methods on ``t = t_min..t_max`` (default ``n..default_t_max(n)``).

    Pass ``None`` for ``quantum`` or ``classical`` to skip that method.
    """
    t_max = default_t_max(n) if t_max is None else t_max
    t_min = n if t_min is None else t_min
    if not 0 <= t_min <= t_max:
        raise ParameterError(f"need 0 <= t_min <= t_max, got {t_min}, {t_max}")
    ts = list(range(t_min, t_max + 1))
    res = {}
    if quantum:
        res["prob_quantum"] = [float(x) for x in quantum_probabilities(n, t_max, quantum, form, precision)[t_min:]]
    if classical:
        res["prob_classical"] = [float(x) for x in classical_probabilities(n, t_max, classical)[t_min:]]
    if asymptotic:
        res["prob_asymptotic"] = [
            asymptotic_probability(n, t, form) if t > n else None for t in ts
        ]
    return SweepResult(n, ts, **res)


# ---------------------------------------------------------------- fits


def runtime_estimate(probs):
    """``(t_best, t_best / p)`` minimizing ``t / p`` over ``(t, p)`` pairs."""
    best = None
    for t, p in probs:
        if p > 0:
            r = t / p
            if best is None or r < best[1] or (r == best[1] and t < best[0]):
                best = (int(t), r)
    if best is None:
        raise NoSignalError("all probabilities are zero; no run time can be estimated")
    return best


@dataclass
class LinearFit:
    slope: float
    intercept: float
    window: tuple
    residuals: list

    def __call__(self, x):
        return self.slope * x + self.intercept


def linear_fit(x, y, window_frac=1.0):
    """Least squares ``y = slope x + intercept`` on the last ``window_frac`` of the points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ParameterError("x and y differ in length")
    if not 0 < window_frac <= 1:
        raise ParameterError(f"window fraction must lie in (0, 1], got {window_frac}")
    order = np.argsort(x)
    x, y = x[order], y[order]
    k = max(int(math.ceil(window_frac * x.size)), 2)
    xs, ys = x[-k:], y[-k:]
    if xs.size < 2 or np.ptp(xs) == 0:
        raise ParameterError("fit window needs at least two distinct abscissae")
    slope, intercept = np.polyfit(xs, ys, 1)
    return LinearFit(float(slope), float(intercept), (float(xs[0]), float(xs[-1])),
                     [float(r) for r in ys - (slope * xs + intercept)])


@dataclass
class FitReport:
    """Exponential run-time scaling ``ln(runtime) ~ b n`` for both walks."""

    slope_quantum: float
    slope_classical: float
    ratio: float
    window: tuple
    residuals_quantum: list
    residuals_classical: list
    power_quantum: float | None = None
    power_classical: float | None = None
    full_range: dict = field(default_factory=dict)


def _check_points(points, label):
    pts = sorted((float(n), float(r)) for n, r in points)
    if len(pts) < 4:
        raise ParameterError(f"{label}: a scaling fit needs at least 4 points, got {len(pts)}")
    if any(r <= 0 for _, r in pts):
        raise ParameterError(f"{label}: run times must be positive")
    return np.array(pts)


def fit_scaling(quantum_points, classical_points, window_frac=0.25):
    """Fit ``ln(runtime)`` against ``n`` on the last ``window_frac`` of each range.

    Both sets of points must cover the same ``n`` values for the window to be
    shared.  Also reports the whole-range slopes and a power-law slope of
    ``ln(runtime)`` against ``ln n`` as a trend check.
    """
    q = _check_points(quantum_points, "quantum")
    c = _check_points(classical_points, "classical")
    lq = linear_fit(q[:, 0], np.log(q[:, 1]), window_frac)
    lc = linear_fit(c[:, 0], np.log(c[:, 1]), window_frac)
    if lq.window != lc.window:
        raise ParameterError(f"quantum and classical fit windows differ: {lq.window} vs {lc.window}")
    fq = linear_fit(q[:, 0], np.log(q[:, 1]))
    fc = linear_fit(c[:, 0], np.log(c[:, 1]))
    pq = linear_fit(np.log(q[:, 0]), np.log(np.log(q[:, 1])), window_frac) if np.all(q[:, 1] > 1) else None
    pc = linear_fit(np.log(c[:, 0]), np.log(np.log(c[:, 1])), window_frac) if np.all(c[:, 1] > 1) else None
    return FitReport(
        slope_quantum=lq.slope,
        slope_classical=lc.slope,
        ratio=lq.slope / lc.slope,
        window=lq.window,
        residuals_quantum=lq.residuals,
        residuals_classical=lc.residuals,
        power_quantum=None if pq is None else pq.slope,
        power_classical=None if pc is None else pc.slope,
        full_range={"slope_quantum": fq.slope, "slope_classical": fc.slope, "ratio": fq.slope / fc.slope},
    )


@dataclass
class PeakTimeFit:
    """``t_star = alpha n + beta`` and ``t_star = alpha n + delta ln n + beta``."""

    linear: tuple
    linear_log: tuple
    max_rel_residual_linear: float
    max_rel_residual_log: float


def fit_peak_times(ns, t_stars):
    ns = np.asarray(ns, dtype=float)
    ts = np.asarray(t_stars, dtype=float)
    if ns.size < 3:
        raise ParameterError("need at least 3 peak times")
    lin = np.polyfit(ns, ts, 1)
    rel_lin = np.max(np.abs(np.polyval(lin, ns) - ts) / ts)
    X = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(X, ts, rcond=None)
    rel_log = np.max(np.abs(X @ coef - ts) / ts)
    return PeakTimeFit(tuple(float(v) for v in lin), tuple(float(v) for v in coef),
                       float(rel_lin), float(rel_log))


def classical_tail_rate(n=10, t_lo=1000, t_hi=2000, params=None):
    """Limiting decay factor of ``p_t(n, 0)`` from a log-corrected tail fit.

    The tail behaves as ``t^{-3/2} (2 sqrt(pq))^t``, so ``ln p_t`` is fitted
    with ``s t + beta ln t + c`` over the even-parity times in
    ``[t_lo, t_hi]``; ``exp(s)`` estimates the factor.
    """
    params = params or ChainParams()
    p = chain_dp(n, t_hi, params)
    t = np.arange(t_lo + ((t_lo - n) % 2), t_hi + 1, 2)
    y = np.log(p[t])
    X = np.column_stack([t, np.log(t), np.ones(t.size)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(np.exp(coef[0])), float(coef[1])


# ---------------------------------------------------------------- table


def table1(ns=(10, 20, 50, 100, 200, 500), form="walk", precision="double"):
    """Quantum and classical peaks ``(t_star, p_star)`` for each ``n``."""
    rows = []
    for n in ns:
        T = default_t_max(n)
        tq, pq = peak(range(T + 1), quantum_probabilities(n, T, "series", form, precision))
        tc, pc = peak(range(T + 1), chain_dp(n, T))
        rows.append({"n": n, "t_quantum": tq, "peak_quantum": pq, "t_classical": tc, "peak_classical": pc})
    return rows


# ---------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _json_dumps(obj):
    # repr of a float is the shortest round-tripping form, at most 17 digits
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def emit_results(result, fmt="csv"):
    """Serialize a sweep, a list of sweeps, a fit report or a table to bytes."""
    if fmt not in ("csv", "json"):
        raise ParameterError(f"unknown format {fmt!r}")
    sweeps = None
    if isinstance(result, SweepResult):
        sweeps = [result]
    elif isinstance(result, list) and all(isinstance(r, SweepResult) for r in result):
        sweeps = sorted(result, key=lambda r: r.n)
    if fmt == "json":
        if sweeps is not None:
            payload = [asdict(s) for s in sweeps]
        elif isinstance(result, (FitReport, PeakTimeFit)):
            payload = asdict(result)
        else:
            payload = result
        return _json_dumps(payload).encode()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if sweeps is not None:
        w.writerow(SWEEP_HEADER)
        for s in sweeps:
            for row in s.rows():
                w.writerow([_fmt(v) for v in row])
    elif isinstance(result, FitReport):
        w.writerow(("quantity", "value"))
        for key in ("slope_quantum", "slope_classical", "ratio", "power_quantum", "power_classical"):
            w.writerow((key, _fmt(getattr(result, key))))
        w.writerow(("window_n_min", _fmt(result.window[0])))
        w.writerow(("window_n_max", _fmt(result.window[1])))
        for key, val in result.full_range.items():
            w.writerow((f"full_range_{key}", _fmt(val)))
    elif isinstance(result, list) and result and isinstance(result[0], dict):
        keys = list(result[0])
        w.writerow(keys)
        for row in result:
            w.writerow([_fmt(row[k]) for k in keys])
    elif isinstance(result, list):
        pass
    else:
        raise ParameterError(f"cannot emit {type(result).__name__} as CSV")
    return buf.getvalue().encode()


def _write(data, out):
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(out, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from exc


# ---------------------------------------------------------------- commands


def _ns(args):
    if args.n:
        return sorted(set(args.n))
    return list(range(args.n_min, args.n_max + 1, args.n_step))


def cmd_simulate(args):
    method = args.method or "projected"
    res = [sweep(n, args.t_max, quantum=method, classical=None, asymptotic=False) for n in _ns(args)]
    return emit_results(res, args.format)


def cmd_series(args):
    res = [
        sweep(n, args.t_max, quantum="series", classical=None, asymptotic=False,
              form=args.gf_form, precision=args.precision)
        for n in _ns(args)
    ]
    return emit_results(res, args.format)


def cmd_asympt(args):
    res = [sweep(n, args.t_max, quantum=None, classical=None, asymptotic=True, form=args.gf_form, t_min=n + 1)
           for n in _ns(args)]
    return emit_results(res, args.format)


def cmd_classical(args):
    method = args.method or "dp"
    res = [sweep(n, args.t_max, quantum=None, classical=method, asymptotic=False) for n in _ns(args)]
    return emit_results(res, args.format)


def cmd_table1(args):
    ns = _ns(args) if args.n else (10, 20, 50, 100, 200, 500)
    return emit_results(table1(ns, args.gf_form, args.precision), args.format)


def scaling_points(ns, form="walk", precision="double"):
    """Run times and peak times for both walks at each ``n``."""
    out = []
    for n in ns:
        T = default_t_max(n)
        qp = quantum_probabilities(n, T, "series", form, precision)
        cp = chain_dp(n, T)
        tq, rq = runtime_estimate(enumerate(qp))
        tc, rc = runtime_estimate(enumerate(cp))
        out.append({
            "n": n,
            "runtime_quantum": rq, "t_runtime_quantum": tq,
            "runtime_classical": rc, "t_runtime_classical": tc,
            "t_peak_quantum": peak(range(T + 1), qp)[0],
            "t_peak_classical": peak(range(T + 1), cp)[0],
        })
    return out


def cmd_fit(args):
    ns = _ns(args)
    pts = scaling_points(ns, args.gf_form, args.precision)
    rep = fit_scaling([(p["n"], p["runtime_quantum"]) for p in pts],
                      [(p["n"], p["runtime_classical"]) for p in pts], args.window_frac)
    if args.format == "json":
        big = [p for p in pts if p["n"] >= 50]
        payload = {"fit": asdict(rep), "points": pts}
        if len(big) >= 3:
            payload["peak_time_quantum"] = asdict(fit_peak_times([p["n"] for p in big], [p["t_peak_quantum"] for p in big]))
        payload["peak_time_classical"] = asdict(fit_peak_times([p["n"] for p in pts], [p["t_peak_classical"] for p in pts]))
        return _json_dumps(payload).encode()
    return emit_results(rep, "csv")


def cmd_memchain_demo(args):
    n_sites = args.sites
    chain = persistent_cycle_chain(n_sites, args.p)
    mu = point_mass(n_sites, n_sites - 1, 0)
    rows = []
    t_max = 10 if args.t_max is None else args.t_max
    for t in range(t_max + 1):
        for site, prob in enumerate(marginal(mu)):
            rows.append({"t": t, "site": site, "prob": float(prob)})
        mu = evolve_distribution(mu, chain)
    return emit_results(rows, args.format)


def cmd_line_demo(args):
    walk = line_walk(args.p)
    t_max = 20 if args.t_max is None else args.t_max
    states = evolve(ProductState.pure(-1, 0), walk, t_max)
    rows = []
    for t, st in enumerate(states):
        probs = {}
        for (_, cur), c in st:
            probs[cur] = probs.get(cur, 0.0) + abs(c) ** 2
        for site in sorted(probs):
            rows.append({"t": t, "site": site, "prob": probs[site]})
    return emit_results(rows, args.format)


def build_parser():
    ap = argparse.ArgumentParser(prog="qwtree", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_default=(10, 500, 20)):
        p.add_argument("--n", type=int, action="append", help="starting level (repeatable)")
        p.add_argument("--n-min", type=int, default=n_default[0])
        p.add_argument("--n-max", type=int, default=n_default[1])
        p.add_argument("--n-step", type=int, default=n_default[2])
        p.add_argument("--t-max", type=int, default=None, help="last time step (default max(4n, n+600))")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--gf-form", choices=FORMS, default="walk",
                       help="generating function used by the series and asymptotic routes")
        p.add_argument("--precision", choices=("double", "mp"), default="double",
                       help="coefficient arithmetic for the series route")
        return p

    p = common(sub.add_parser("simulate", help="root probabilities by direct evolution"))
    p.add_argument("--method", choices=("projected", "tree"), default=None)
    p.set_defaults(func=cmd_simulate)
    common(sub.add_parser("series", help="root probabilities from the generating function")).set_defaults(func=cmd_series)
    common(sub.add_parser("asympt", help="large-time asymptotic probabilities")).set_defaults(func=cmd_asympt)
    p = common(sub.add_parser("classical", help="classical hitting probabilities"))
    p.add_argument("--method", choices=("dp", "integral"), default=None)
    p.set_defaults(func=cmd_classical)
    common(sub.add_parser("table1", help="peak probabilities and times for both walks")).set_defaults(func=cmd_table1)
    p = common(sub.add_parser("fit", help="run-time scaling fits"), n_default=(20, 500, 20))
    p.add_argument("--window-frac", type=float, default=0.25)
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("memchain-demo", help="persistent walk on a cycle, memory-2 chain")
    p.add_argument("--sites", type=int, default=8)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_memchain_demo)
    p = sub.add_parser("line-demo", help="coinless line walk from |-1>|0>")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_line_demo)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        data = args.func(args)
        _write(data, args.out)
    except (QWTreeError, OSError, ValueError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
