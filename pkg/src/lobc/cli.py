"""Command-line frontend wiring the library into reproducible experiments.

Every task reads its settings from flags, optionally backed by a flat
key=value config file (flags override the file), writes its artifacts
atomically into the output directory, and prints a short summary.  Numeric
output uses 17 significant digits and LF line endings so identical configs
give byte-identical files.

Exit codes: 0 success, 1 precondition failure, 2 usage or config error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .channel import (
    Cmlobc,
    ErasurePattern,
    build_cmloc,
    cmloc_capacity,
    validate_channel,
)
from .degradation import (
    DegradationOrder,
    check_degraded,
    check_strong_degraded,
    construct_degrading_channel,
)
from .errors import ConvergenceError, InfeasibleError, ParameterError, SolverError
from .io_utils import write_csv, write_json
from .lattice import LatticeParams, gaussian_binomial, incidence_matrix
from .pg22 import classify_region, curve_points, pg22_capacity
from .region import (
    boundary_sweep,
    erasure_identity_residuals,
    filter_time_sharing,
    sample_achievable_points,
    weighted_sum_bound_check,
    JointDistribution,
)

PRESETS = {
    "example1": {"q": 2, "m": 3, "l": 2, "eps1": (0.05, 0.24, 0.71), "eps2": (0.30, 0.15, 0.55)},
    "example2": {"q": 2, "m": 3, "l": 2, "eps1": (0.05, 0.20, 0.75), "eps2": (0.30, 0.15, 0.55)},
    "example3": {"q": 2, "m": 3, "l": 2, "eps1": (0.01, 0.10, 0.89), "eps2": (0.09, 0.30, 0.61)},
    "example4": {"q": 2, "m": 3, "l": 2, "eps1": (0.0, 0.10, 0.90), "eps2": (0.0, 0.30, 0.70)},
    "example5": {"q": 2, "m": 3, "l": 2, "eps1": (0.1, 0.0, 0.9), "eps2": (0.3, 0.0, 0.7)},
}


def preset(name: str) -> dict:
    """Bundled benchmark channel configurations."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in str(text).split(","))


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name -> (converter, default, help); default None without a fallback means required.
_COMMON = {
    "out": (str, ".", "output directory"),
    "config": (str, None, "key=value config file; flags override it"),
}
_CHANNEL_KEYS = {
    "q": (int, None, "prime field order"),
    "m": (int, None, "ambient dimension"),
    "l": (int, None, "constant input dimension"),
}
_BASE = {"base": (str, "nats", "log base for emitted values: nats, bits, or qary")}

TASK_OPTIONS = {
    "lattice": {
        **_COMMON,
        **_CHANNEL_KEYS,
        "s": (int, None, "column layer of the incidence matrix (default l - 1)"),
        "plain": (_bool, False, "emit the 0/1 incidence matrix instead of the stochastic one"),
    },
    "channel": {**_COMMON, **_CHANNEL_KEYS, "eps": (_floats, None, "erasure pattern eps_0,...,eps_l")},
    "capacity": {
        **_COMMON,
        **_CHANNEL_KEYS,
        **_BASE,
        "eps": (_floats, None, "erasure pattern eps_0,...,eps_l"),
        "tol": (float, 1e-9, "capacity gap tolerance"),
        "max-iter": (int, 100_000, "iteration cap"),
    },
    "degrade": {
        **_COMMON,
        **_CHANNEL_KEYS,
        "eps1": (_floats, None, "pattern of the first subchannel"),
        "eps2": (_floats, None, "pattern of the second subchannel"),
    },
    "region": {
        **_COMMON,
        **_BASE,
        "preset": (str, None, "named channel pair (example1..example5)"),
        "q": (int, None, "prime field order"),
        "m": (int, None, "ambient dimension"),
        "l": (int, None, "constant input dimension"),
        "eps1": (_floats, None, "pattern of the first subchannel"),
        "eps2": (_floats, None, "pattern of the second subchannel"),
        "n": (int, 10_000, "number of sampled joints"),
        "seed": (int, None, "sampling seed (required)"),
        "u-size": (int, None, "auxiliary alphabet size (default |X|)"),
        "mu-points": (int, 41, "size of the geometric weight grid"),
        "restarts": (int, 8, "random restarts per weight"),
        "tol": (float, 1e-10, "per-iteration gain tolerance of the boundary solver"),
        "max-iter": (int, 20_000, "iteration cap of the boundary solver"),
        "no-plot": (_bool, False, "skip figure rendering"),
    },
    "pg22": {
        **_COMMON,
        "eps1": (_floats, None, "length-3 pattern of the first subchannel"),
        "eps2": (_floats, None, "length-3 pattern of the second subchannel"),
        "grid": (int, 1001, "number of sigma grid points"),
        "no-plot": (_bool, False, "skip figure rendering"),
    },
    "erasure-check": {
        **_COMMON,
        "q": (int, 2, "prime field order"),
        "m": (int, 3, "ambient dimension"),
        "l": (int, 2, "constant input dimension"),
        "rho1": (float, None, "erasure probability of the first subchannel"),
        "rho2": (float, None, "erasure probability of the second subchannel"),
        "n": (int, 10_000, "number of random joints for the bound checks"),
        "seed": (int, None, "sampling seed (required)"),
        "mu-points": (int, 41, "size of the geometric weight grid"),
        "restarts": (int, 8, "random restarts per weight"),
        "tol": (float, 1e-10, "per-iteration gain tolerance of the boundary solver"),
        "max-iter": (int, 20_000, "iteration cap of the boundary solver"),
        "no-plot": (_bool, False, "skip figure rendering"),
    },
}

_REQUIRED_ANYWAY = {
    "channel": ("q", "m", "l", "eps"),
    "capacity": ("q", "m", "l", "eps"),
    "lattice": ("q", "m", "l"),
    "degrade": ("q", "m", "l", "eps1", "eps2"),
    "region": ("seed",),
    "pg22": ("eps1", "eps2"),
    "erasure-check": ("rho1", "rho2", "seed"),
}


class UsageError(Exception):
    pass


def load_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_options(task: str, ns: argparse.Namespace) -> dict:
    """Merge CLI flags over the config file over defaults; convert types."""
    spec = TASK_OPTIONS[task]
    config: dict[str, str] = {}
    if getattr(ns, "config", None):
        config = load_config(ns.config)
        config.pop("task", None)
        known = {key.replace("-", "_") for key in spec}
        unknown = set(config) - known
        if unknown:
            raise UsageError(f"unknown config keys for task {task}: {sorted(unknown)}")
    resolved = {}
    for key, (convert, default, _help) in spec.items():
        attr = key.replace("-", "_")
        value = getattr(ns, attr, None)
        if value is None and attr in config:
            try:
                value = convert(config[attr])
            except ValueError as exc:
                raise UsageError(f"bad config value for {key}: {exc}") from exc
        if value is None:
            value = default
        resolved[attr] = value
    for key in _REQUIRED_ANYWAY.get(task, ()):
        attr = key.replace("-", "_")
        if resolved.get(attr) is None:
            raise UsageError(f"task {task} requires --{key}")
    return resolved


def _base_factor(base: str, q: int) -> float:
    if base == "nats":
        return 1.0
    if base == "bits":
        return 1.0 / math.log(2.0)
    if base == "qary":
        return 1.0 / math.log(q)
    raise UsageError(f"unknown log base {base!r}; choose nats, bits, or qary")


def _resolve_channel_pair(opts: dict) -> tuple[LatticeParams, ErasurePattern, ErasurePattern]:
    if opts.get("preset"):
        chosen = preset(opts["preset"])
        for key in ("q", "m", "l", "eps1", "eps2"):
            if opts.get(key) is None:
                opts[key] = chosen[key]
    missing = [key for key in ("q", "m", "l", "eps1", "eps2") if opts.get(key) is None]
    if missing:
        raise UsageError(f"missing channel settings: {missing} (flags or --preset)")
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    return params, ErasurePattern.of(opts["eps1"]), ErasurePattern.of(opts["eps2"])


def run_lattice(opts: dict) -> int:
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    out = Path(opts["out"])
    s = opts["s"] if opts["s"] is not None else max(params.l - 1, 0)
    inc = incidence_matrix(params, params.l, s, stochastic=not opts["plain"])
    write_csv(out / "incidence.csv", None, inc.entries.tolist())
    sizes = [gaussian_binomial(params.m, d, params.q) for d in range(params.m + 1)]
    print(f"lattice F_{params.q}^{params.m}: layer sizes {sizes}")
    print(
        f"incidence {params.l} vs {s}: {inc.rows} x {inc.cols}"
        f" ({'plain' if opts['plain'] else 'stochastic'}) -> {out / 'incidence.csv'}"
    )
    return 0


def run_channel(opts: dict) -> int:
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    channel = build_cmloc(params, opts["eps"])
    out = Path(opts["out"])
    write_json(
        out / "channel.json",
        {"q": params.q, "m": params.m, "l": params.l, "eps": list(channel.eps.eps)},
    )
    write_csv(out / "matrix.csv", None, channel.matrix.tolist())
    report = validate_channel(channel)
    print(f"channel {channel.rows} x {channel.cols}, blocks at {channel.block_offsets}")
    print(f"validation: {'ok' if report.ok else '; '.join(report.issues)}")
    return 0


def run_capacity(opts: dict) -> int:
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    channel = build_cmloc(params, opts["eps"])
    result = cmloc_capacity(channel, tol=opts["tol"], max_iter=opts["max_iter"])
    factor = _base_factor(opts["base"], params.q)
    out = Path(opts["out"])
    write_json(
        out / "capacity.json",
        {
            "capacity": result.capacity * factor,
            "base": opts["base"],
            "gap": result.gap,
            "iterations": result.iterations,
            "input_distribution": result.input_distribution.tolist(),
        },
    )
    print(f"capacity = {result.capacity * factor:.12g} {opts['base']} (gap {result.gap:.2e})")
    return 0


def run_degrade(opts: dict) -> int:
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    eps1 = ErasurePattern.of(opts["eps1"])
    eps2 = ErasurePattern.of(opts["eps2"])
    verdict = check_degraded(eps1, eps2, l_less_than_m=params.l < params.m)
    strong = check_strong_degraded(eps1, eps2)
    out = Path(opts["out"])
    write_json(
        out / "degrade.json",
        {
            "verdict": verdict.value,
            "strong_condition": strong,
            "eps1": list(eps1.eps),
            "eps2": list(eps2.eps),
        },
    )
    print(f"verdict: {verdict.value} (componentwise sufficient condition: {strong})")
    if verdict is DegradationOrder.INCOMPARABLE:
        return 0
    if verdict is DegradationOrder.Y1_DEGRADED_FROM_Y2:
        cert = construct_degrading_channel(params, eps2, eps1)
        print("certificate constructed for the reversed orientation")
    else:
        cert = construct_degrading_channel(params, eps1, eps2)
    write_json(
        out / "certificate.json",
        {
            "lambda": None if cert.layer_matrix is None else cert.layer_matrix.tolist(),
            "residual": cert.residual,
        },
    )
    write_csv(out / "t_matrix.csv", None, cert.degrader.tolist())
    print(f"certificate residual {cert.residual:.3e} -> {out / 'certificate.json'}")
    return 0


def _scaled_point_rows(points, factor: float):
    for p in points:
        yield (p.r1 * factor, p.r2 * factor, p.tag, "" if p.seed is None else p.seed)


def run_region(opts: dict) -> int:
    params, eps1, eps2 = _resolve_channel_pair(opts)
    factor = _base_factor(opts["base"], params.q)
    ch = Cmlobc(params, eps1, eps2)
    out = Path(opts["out"])

    est = sample_achievable_points(ch, n=opts["n"], seed=opts["seed"], u_size=opts["u_size"])
    filtered = filter_time_sharing(est)
    mus = np.geomspace(1e-3, 1e3, opts["mu_points"])
    sweep = boundary_sweep(
        ch,
        mus=mus,
        restarts=opts["restarts"],
        seed=opts["seed"],
        u_size=opts["u_size"],
        tol=opts["tol"],
        max_iter=opts["max_iter"],
    )

    header = ("r1", "r2", "tag", "seed")
    write_csv(out / "before.csv", header, _scaled_point_rows(est.points, factor))
    write_csv(out / "after.csv", header, _scaled_point_rows(filtered.points, factor))
    write_csv(
        out / "boundary.csv",
        ("mu", "r1", "r2"),
        ((mu, res.point.r1 * factor, res.point.r2 * factor) for mu, res in sweep),
    )
    ts = np.linspace(0.0, 1.0, 101)
    write_csv(
        out / "timeshare.csv",
        ("r1", "r2"),
        ((est.c1 * (1.0 - t) * factor, est.c2 * t * factor) for t in ts),
    )
    write_json(
        out / "region.json",
        {
            "q": params.q,
            "m": params.m,
            "l": params.l,
            "eps1": list(eps1.eps),
            "eps2": list(eps2.eps),
            "base": opts["base"],
            "c1": est.c1 * factor,
            "c2": est.c2 * factor,
            "n": opts["n"],
            "seed": opts["seed"],
            "u_size": est.metadata["u_size"],
            "points_before": len(est.points),
            "points_after": len(filtered.points),
            "mu_grid": [float(mu) for mu in mus],
            "restarts": opts["restarts"],
            "solver_tol": opts["tol"],
            "solver_max_iter": opts["max_iter"],
            "nonconverged_weights": sum(1 for _, res in sweep if not res.converged),
        },
    )
    if not opts["no_plot"]:
        from . import plots

        plots.region_figure(
            out / "region.png",
            est.points,
            filtered.points,
            [res.point for _, res in sweep],
            est.c1,
            est.c2,
        )
    print(
        f"sampled {len(est.points)} points, {len(filtered.points)} on or above the "
        f"time-sharing line; boundary sweep over {len(sweep)} weights"
    )
    print(f"artifacts in {out}")
    return 0


def run_pg22(opts: dict) -> int:
    eps1 = ErasurePattern.of(opts["eps1"])
    eps2 = ErasurePattern.of(opts["eps2"])
    classification = classify_region(eps1, eps2)
    c1 = pg22_capacity(eps1)
    c2 = pg22_capacity(eps2)
    points = curve_points(eps1, eps2, num=opts["grid"])
    out = Path(opts["out"])
    write_csv(out / "curve.csv", ("sigma", "r1", "r2"), points.tolist())
    write_json(
        out / "summary.json",
        {
            "case": classification.case.value,
            "discriminant": classification.discriminant,
            "c1": c1,
            "c2": c2,
        },
    )
    if not opts["no_plot"]:
        from . import plots

        plots.curve_figure(out / "curve.png", points, c1, c2, "rate curve")
    print(
        f"classification {classification.case.value} "
        f"(discriminant {classification.discriminant:.6g}), C1 {c1:.6f}, C2 {c2:.6f}"
    )
    return 0


def run_erasure_check(opts: dict) -> int:
    params = LatticeParams(q=opts["q"], m=opts["m"], l=opts["l"])
    rho1, rho2 = opts["rho1"], opts["rho2"]
    if not 0.0 <= rho1 <= rho2 <= 1.0:
        raise ParameterError(f"need 0 <= rho1 <= rho2 <= 1, got {rho1}, {rho2}")
    x_size = gaussian_binomial(params.m, params.l, params.q)
    log_x = math.log(x_size)
    c1 = (1.0 - rho1) * log_x
    c2 = (1.0 - rho2) * log_x

    def erasure_pattern(rho: float) -> tuple[float, ...]:
        return (rho,) + (0.0,) * (params.l - 1) + (1.0 - rho,)

    ch = Cmlobc.of(params, erasure_pattern(rho1), erasure_pattern(rho2))
    mus = np.geomspace(1e-3, 1e3, opts["mu_points"])
    sweep = boundary_sweep(
        ch,
        mus=mus,
        restarts=opts["restarts"],
        seed=opts["seed"],
        tol=opts["tol"],
        max_iter=opts["max_iter"],
    )
    line_values = [res.point.r1 / c1 + res.point.r2 / c2 for _, res in sweep]

    rng_count = opts["n"]
    min_slack = math.inf
    max_identity_residual = 0.0
    for i in range(rng_count):
        rng = np.random.default_rng([opts["seed"], i])
        joint = JointDistribution(
            rng.dirichlet(np.ones(x_size * x_size)).reshape(x_size, x_size)
        )
        min_slack = min(min_slack, weighted_sum_bound_check(joint, rho1, rho2))
        rho = float(rng.uniform(0.0, 1.0))
        res1, res2 = erasure_identity_residuals(joint, rho)
        max_identity_residual = max(max_identity_residual, res1, res2)

    uniform_diag = JointDistribution(np.eye(x_size) / x_size)
    equality_slack = weighted_sum_bound_check(uniform_diag, rho1, rho2)

    out = Path(opts["out"])
    write_csv(
        out / "boundary.csv",
        ("mu", "r1", "r2"),
        ((mu, res.point.r1, res.point.r2) for mu, res in sweep),
    )
    write_json(
        out / "erasure.json",
        {
            "rho1": rho1,
            "rho2": rho2,
            "x_size": x_size,
            "c1": c1,
            "c2": c2,
            "max_line_value": max(line_values),
            "all_points_inside": all(v <= 1.0 + 1e-6 for v in line_values),
            "line_approached": max(line_values) > 1.0 - 1e-3,
            "min_outer_bound_slack": min_slack,
            "uniform_equality_slack": equality_slack,
            "max_identity_residual": max_identity_residual,
            "joints_checked": rng_count,
            "seed": opts["seed"],
        },
    )
    if not opts["no_plot"]:
        from . import plots

        plots.sweep_figure(out / "erasure.png", [res.point for _, res in sweep], c1, c2)
    print(
        f"C1 {c1:.6f}, C2 {c2:.6f}; max line value {max(line_values):.9f}; "
        f"min outer-bound slack {min_slack:.3e}; max identity residual {max_identity_residual:.3e}"
    )
    return 0


TASK_RUNNERS = {
    "lattice": run_lattice,
    "channel": run_channel,
    "capacity": run_capacity,
    "degrade": run_degrade,
    "region": run_region,
    "pg22": run_pg22,
    "erasure-check": run_erasure_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lobc",
        description="Subspace broadcast channels: degradation certificates and capacity regions.",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task, spec in TASK_OPTIONS.items():
        task_parser = sub.add_parser(task, help=f"run the {task} task")
        for key, (convert, _default, help_text) in spec.items():
            if convert is _bool:
                task_parser.add_argument(
                    f"--{key}", action="store_const", const=True, default=None,
                    help=help_text,
                )
            else:
                task_parser.add_argument(
                    f"--{key}", type=convert, default=None, help=help_text,
                )
    run_parser = sub.add_parser("run", help="run the task named in a config file")
    run_parser.add_argument("--config", required=True, help="config file with a task= entry")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    task = ns.task
    try:
        if task == "run":
            config = load_config(ns.config)
            task = config.get("task")
            if task not in TASK_RUNNERS:
                raise UsageError(f"config file must name a task, got {task!r}")
            ns = argparse.Namespace(config=ns.config)
        opts = resolve_options(task, ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return TASK_RUNNERS[task](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, SolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
