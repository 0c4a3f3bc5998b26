"""Command-line interface: ``gsliced <subcommand> ...``.

Exit status is 0 on success, 1 on a runtime failure and 2 on a usage error.
Options may also come from a ``key=value`` file given with ``--config``;
explicit flags win over the file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import warnings

from .divergences import DivergenceKind, DivergenceSpec
from .entropic import SinkhornConvergenceWarning
from .estimator import SmoothedSliceConfig, estimate_gssd
from .experiments import (
    Axis,
    CsvScenario,
    GaussianScenario,
    SweepError,
    SweepPlan,
    __version__,
    run_sweep,
)
from .sampling import DatasetError, RngStream, SampleSet, derive_key, gen_gaussian, load_csv

SEED_ENV = "GSLICED_SEED"

DESK_SAMPLES = (64, 128, 256, 512, 1024, 2048, 4096)
EXTENDED_SAMPLES = DESK_SAMPLES + (8192, 16384, 25000)


class UsageError(Exception):
    pass


def _available_cpus() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not on Linux
        return os.cpu_count() or 1


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _kinds(text: str) -> tuple[DivergenceKind, ...]:
    try:
        return tuple(DivergenceKind(v.strip()) for v in text.split(",") if v.strip())
    except ValueError:
        choices = ", ".join(k.value for k in DivergenceKind)
        raise argparse.ArgumentTypeError(f"divergence kinds are {choices}; got {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- parser

def _add_divergence_flags(p: argparse.ArgumentParser, many: bool):
    g = p.add_argument_group("divergence")
    g.add_argument("--kind", type=_kinds, default=(DivergenceKind.WASSERSTEIN,),
                   help="base divergence" + (" (comma-separated list)" if many else "")
                   + ": wasserstein, sinkhorn or mmd (default: %(default)s)")
    g.add_argument("--p", type=float, default=2.0, help="order p (default: %(default)s)")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1,
                   help="Sinkhorn entropic regularization (default: %(default)s)")
    g.add_argument("--sinkhorn-tol", type=float, default=1e-9,
                   help="Sinkhorn marginal tolerance (default: %(default)s)")
    g.add_argument("--sinkhorn-max-iter", type=int, default=10000,
                   help="Sinkhorn iteration cap (default: %(default)s)")
    g.add_argument("--bandwidth", type=float, default=None,
                   help="fixed MMD bandwidth; default: mean pairwise distance of pooled values")
    g.add_argument("--sigma", type=float, default=3.0, help="smoothing noise level (default: %(default)s)")
    g.add_argument("-L", "--projections", dest="L", type=int, default=50,
                   help="number of random directions (default: %(default)s)")
    g.add_argument("--seed", type=int, default=None,
                   help=f"master seed (default: ${SEED_ENV} or 0)")


def _add_synthetic_flags(p: argparse.ArgumentParser, n: int, d: int, mean1: float, mean2: float):
    g = p.add_argument_group("synthetic scenario (ignored when CSV inputs are given)")
    g.add_argument("--n", type=int, default=None, help=f"samples per set (default: {n})")
    g.add_argument("--d", type=int, default=None, help=f"dimension (default: {d})")
    g.add_argument("--mean1", type=float, default=None, help=f"first mean, times the ones vector (default: {mean1})")
    g.add_argument("--mean2", type=float, default=None, help=f"second mean (default: {mean2})")
    g.add_argument("--scale1", type=float, default=None, help="first standard deviation (default: 1.0)")
    g.add_argument("--scale2", type=float, default=None, help="second standard deviation (default: 1.0)")
    p.set_defaults(_synthetic_defaults=dict(n=n, d=d, mean1=mean1, mean2=mean2, scale1=1.0, scale2=1.0))


def _add_sweep_flags(p: argparse.ArgumentParser, grid_help: str, inner: bool):
    g = p.add_argument_group("sweep")
    g.add_argument("--grid", type=_float_list, default=None, help=grid_help)
    if inner:
        g.add_argument("--inner-grid", type=_int_list, default=None,
                       help="sample sizes crossed with the grid (default: 64..4096, doubling)")
    g.add_argument("--replicates", type=int, default=20, help="runs per grid point (default: %(default)s)")
    g.add_argument("--jobs", type=int, default=_available_cpus(),
                   help="worker processes (default: available CPUs, %(default)s)")
    g.add_argument("--output", "-o", default=None, help="CSV path (default: sweep-<axis>.csv)")
    g.add_argument("--paper-scale", action="store_true",
                   help="extend sample-size grids to 25000")
    g.add_argument("--timing", action="store_true",
                   help="fill wall_time_ms; output is then no longer byte-reproducible")
    g.add_argument("--csv", nargs=2, metavar=("MU", "NU"), default=None,
                   help="draw from two CSV datasets instead of Gaussians")
    g.add_argument("--shared-noise-key", action="store_true",
                   help="give both CSV datasets the same noise stream")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsliced", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", default=None, help="key=value file of option defaults")
        return p

    p = add("estimate", "smoothed sliced divergence between two datasets")
    p.add_argument("inputs", nargs="*", metavar="CSV", help="zero or two CSV files")
    p.add_argument("--shared-noise-key", action="store_true",
                   help="give both inputs the same noise stream (identical files then give 0)")
    _add_divergence_flags(p, many=False)
    _add_synthetic_flags(p, n=500, d=10, mean1=0.0, mean2=1.0)

    p = add("metric-check", "check the metric axioms on three datasets")
    p.add_argument("inputs", nargs="*", metavar="CSV", help="zero, two or three CSV files")
    p.add_argument("--fault-negate", action="store_true",
                   help="testing hook: negate every divergence value")
    _add_divergence_flags(p, many=False)
    _add_synthetic_flags(p, n=50, d=5, mean1=0.0, mean2=1.0)

    p = add("sweep-samples", "estimates against growing sample size (same law on both sides)")
    _add_divergence_flags(p, many=True)
    _add_synthetic_flags(p, n=500, d=10, mean1=0.0, mean2=0.0)
    _add_sweep_flags(p, "sample sizes (default: 64..4096, doubling)", inner=False)

    p = add("sweep-dim", "sample-size sweeps repeated over dimensions")
    _add_divergence_flags(p, many=True)
    _add_synthetic_flags(p, n=500, d=10, mean1=0.0, mean2=0.0)
    _add_sweep_flags(p, "dimensions (default: 5,20,50)", inner=True)

    p = add("sweep-displacement", "second mean s*1 swept against a first mean of 2*1")
    _add_divergence_flags(p, many=True)
    _add_synthetic_flags(p, n=2000, d=50, mean1=2.0, mean2=0.0)
    _add_sweep_flags(p, "displacements s (default: 0,0.5,...,4)", inner=False)

    p = add("sweep-projections", "Monte-Carlo error against the number of directions")
    _add_divergence_flags(p, many=True)
    _add_synthetic_flags(p, n=500, d=50, mean1=0.0, mean2=1.0)
    _add_sweep_flags(p, "direction counts (default: 10,50,250,1250)", inner=False)
    p.add_argument("--L-ref", type=int, default=10000, help="reference direction count (default: %(default)s)")

    p = add("sweep-noise", "sample-size sweeps repeated over noise levels")
    _add_divergence_flags(p, many=True)
    _add_synthetic_flags(p, n=500, d=10, mean1=0.0, mean2=0.0)
    _add_sweep_flags(p, "noise levels (default: 0,1,3,5,15)", inner=True)
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = (s.strip() for s in line.split("=", 1))
                values[key.replace("-", "_")] = value
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    return values


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv) -> argparse.Namespace:
    """Parse ``argv``, applying a ``--config`` file beneath the explicit flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    file_values = _read_config(args.config)
    sub = _subparser(parser, args.command)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in file_values.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"{args.config}: unknown option {key!r} for {args.command}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{args.config}: {key} expects true or false")
            defaults[key] = raw.lower() in ("true", "1", "yes")
        elif action.nargs in ("*", 2):
            defaults[key] = raw.split()
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"{args.config}: bad value for {key}: {exc}") from None
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# ---------------------------------------------------------------- helpers

def _specs(args) -> tuple[DivergenceSpec, ...]:
    try:
        return tuple(DivergenceSpec(kind=k, p=args.p, sinkhorn_lambda=args.lam, sinkhorn_tol=args.sinkhorn_tol,
                                    sinkhorn_max_iter=args.sinkhorn_max_iter, mmd_bandwidth=args.bandwidth)
                     for k in dict.fromkeys(args.kind))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _single_spec(args) -> DivergenceSpec:
    specs = _specs(args)
    if len(specs) != 1:
        raise UsageError(f"{args.command} takes exactly one --kind")
    return specs[0]


def _config(args, spec) -> SmoothedSliceConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    if seed < 0:
        raise UsageError("seed must be non-negative")
    try:
        return SmoothedSliceConfig(sigma=args.sigma, L=args.L, seed=seed, spec=spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _synthetic(args) -> dict:
    base = dict(args._synthetic_defaults)
    for key in base:
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    return base


def _synthetic_given(args) -> list[str]:
    return ["--" + k for k in args._synthetic_defaults if getattr(args, k) is not None]


def _gaussian_scenario(args, identical_default: bool = False) -> GaussianScenario:
    s = _synthetic(args)
    if s["n"] < 1 or s["d"] < 1 or s["scale1"] <= 0 or s["scale2"] <= 0:
        raise UsageError("n, d and the scales must be positive")
    return GaussianScenario(d=int(s["d"]), n=int(s["n"]), mu_mean=s["mean1"], nu_mean=s["mean2"],
                            mu_scale=s["scale1"], nu_scale=s["scale2"])


def _load_inputs(args, paths, shared: bool) -> list[SampleSet]:
    sets = []
    for path in paths:
        key = sets[0].noise_key if (shared and sets) else None
        sets.append(load_csv(path, noise_key=key))
    for a, b in itertools.combinations(range(len(sets)), 2):
        if sets[a].d != sets[b].d:
            raise UsageError(f"dimension mismatch: {paths[a]} has d={sets[a].d}, {paths[b]} has d={sets[b].d}")
    return sets


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- commands

def cmd_estimate(args) -> int:
    spec = _single_spec(args)
    cfg = _config(args, spec)
    if args.inputs:
        if len(args.inputs) != 2:
            raise UsageError("estimate takes zero or two CSV inputs")
        if _synthetic_given(args):
            raise UsageError(f"CSV inputs and synthetic options ({', '.join(_synthetic_given(args))}) are exclusive")
        mu, nu = _load_inputs(args, args.inputs, args.shared_noise_key)
    else:
        mu, nu = _gaussian_scenario(args).draw(cfg.seed, 0)
        if args.shared_noise_key:
            nu = SampleSet(nu.points, mu.noise_key)
    rep = estimate_gssd(mu, nu, cfg)
    print(f"estimate={_fmt(rep.value)} stderr={_fmt(rep.stderr)} L={rep.L} sigma={_fmt(cfg.sigma)}")
    return 0


def _metric_sets(args, cfg) -> tuple[list[SampleSet], list[str]]:
    if args.inputs:
        if len(args.inputs) not in (2, 3):
            raise UsageError("metric-check takes zero, two or three CSV inputs")
        if _synthetic_given(args):
            raise UsageError("CSV inputs and synthetic options are exclusive")
        sets = _load_inputs(args, args.inputs, shared=False)
        names = list(args.inputs)
        if len(sets) == 2:
            # third set: a jittered midpoint of the two
            a, b = sets
            k = min(a.n, b.n)
            gen = RngStream(cfg.seed, (derive_key("midpoint"),)).generator()
            mid = 0.5 * (a.points[:k] + b.points[:k]) + 0.1 * gen.standard_normal((k, a.d))
            sets.append(SampleSet(mid, derive_key(cfg.seed, "midpoint")))
            names.append("midpoint")
        return sets, names
    s = _synthetic(args)
    means = (s["mean1"], 0.5 * (s["mean1"] + s["mean2"]), s["mean2"])
    scales = (s["scale1"], 0.5 * (s["scale1"] + s["scale2"]), s["scale2"])
    sets = [gen_gaussian(RngStream(cfg.seed, (derive_key("metric"), i)), int(s["n"]), int(s["d"]), m, sc)
            for i, (m, sc) in enumerate(zip(means, scales))]
    return sets, ["A", "B", "C"]


def cmd_metric_check(args) -> int:
    spec = _single_spec(args)
    cfg = _config(args, spec)
    sets, names = _metric_sets(args, cfg)
    sign = -1.0 if args.fault_negate else 1.0

    def G(a, b) -> float:
        return sign * estimate_gssd(sets[a], sets[b], cfg).value

    idx = range(len(sets))
    pairs = list(itertools.combinations(idx, 2))
    values = {(a, b): G(a, b) for a in idx for b in idx if a != b}
    selfs = {a: G(a, a) for a in idx}
    identity_tol = 10 * spec.sinkhorn_tol if spec.kind is DivergenceKind.SINKHORN else 0.0

    checks = []  # (axiom, passed, slack, where)
    neg = min(values.values())
    checks.append(("non-negativity", neg >= 0, neg, "min over pairs"))
    asym = max(abs(values[a, b] - values[b, a]) for a, b in pairs)
    sym_ok = all(values[a, b] == values[b, a] for a, b in pairs)
    checks.append(("symmetry", sym_ok, -asym, "max |G(a,b) - G(b,a)|"))
    worst_self = max(abs(v) for v in selfs.values())
    checks.append(("self-identity", worst_self <= identity_tol, identity_tol - worst_self, "max |G(a,a)|"))

    def root(v):
        return math.copysign(abs(v) ** (1.0 / spec.p), v)

    slack = math.inf
    where = ""
    for a, b, c in itertools.permutations(idx, 3):
        s = root(values[a, b]) + root(values[b, c]) - root(values[a, c])
        if s < slack:
            slack, where = s, f"{names[a]} -> {names[b]} -> {names[c]}"
    checks.append(("triangle", slack >= -1e-9, slack, where))

    first_failure = None
    for axiom, ok, sl, info in checks:
        print(f"{axiom}: {'PASS' if ok else 'FAIL'} slack={sl:.6e} ({info})")
        if not ok and first_failure is None:
            first_failure = (axiom, sl)
    if first_failure is not None:
        print(f"error: {first_failure[0]} violated, slack {first_failure[1]:.6e}", file=sys.stderr)
        return 1
    return 0


def _check_writable(path: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(directory):
        raise RuntimeError(f"output directory {directory} does not exist")
    if not os.access(directory, os.W_OK):
        raise RuntimeError(f"output directory {directory} is not writable")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise RuntimeError(f"output file {path} is not writable")


_SWEEPS = {
    "sweep-samples": Axis.SAMPLE_SIZE,
    "sweep-dim": Axis.DIMENSION,
    "sweep-displacement": Axis.DISPLACEMENT,
    "sweep-projections": Axis.PROJECTIONS,
    "sweep-noise": Axis.NOISE_LEVEL,
}


def _default_grid(axis: Axis, extended: bool) -> tuple:
    return {
        Axis.SAMPLE_SIZE: EXTENDED_SAMPLES if extended else DESK_SAMPLES,
        Axis.DIMENSION: (5, 20, 50),
        Axis.DISPLACEMENT: tuple(0.5 * k for k in range(9)),
        Axis.PROJECTIONS: (10, 50, 250, 1250),
        Axis.NOISE_LEVEL: (0.0, 1.0, 3.0, 5.0, 15.0),
    }[axis]


def cmd_sweep(args) -> int:
    axis = _SWEEPS[args.command]
    specs = _specs(args)
    cfg = _config(args, specs[0])
    output = args.output or f"sweep-{axis.value}.csv"
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")

    grid = args.grid or _default_grid(axis, args.paper_scale)
    if axis in (Axis.SAMPLE_SIZE, Axis.DIMENSION, Axis.PROJECTIONS):
        if any(v != int(v) for v in grid):
            raise UsageError(f"{axis.value} grid must hold integers")
        grid = tuple(int(v) for v in grid)
    inner = ()
    if axis in (Axis.DIMENSION, Axis.NOISE_LEVEL):
        inner = args.inner_grid or (EXTENDED_SAMPLES if args.paper_scale else DESK_SAMPLES)

    if args.csv:
        if _synthetic_given(args):
            raise UsageError("--csv and synthetic options are exclusive")
        scenario = CsvScenario(args.csv[0], args.csv[1], shared_noise_key=args.shared_noise_key)
        try:
            scenario.d  # load and validate up front
        except SweepError as exc:
            raise UsageError(str(exc)) from None
    else:
        scenario = _gaussian_scenario(args)

    extra = {}
    if axis is Axis.PROJECTIONS:
        extra["L_ref"] = args.L_ref
        if args.L_ref in grid:
            raise UsageError(f"--L-ref {args.L_ref} is in the grid (self-comparison)")
    try:
        plan = SweepPlan(axis=axis, grid=grid, replicates=args.replicates, specs=specs, cfg=cfg,
                         scenario=scenario, inner_grid=inner, jobs=args.jobs, timing=args.timing, **extra)
    except SweepError as exc:
        raise UsageError(str(exc)) from None

    _check_writable(output)
    result = run_sweep(plan)
    meta = result.write(output, plan)
    summary = [f"wrote {output} ({len(result.rows)} rows), metadata {meta}"]
    for label, s in (result.slope or {}).items():
        summary.append(f"slope[{label}]={s:.4f} r2={result.slope_r2[label]:.4f}")
    for label, gap in result.extras.get("max_slope_gap", {}).items():
        summary.append(f"max_slope_gap[{label}]={gap:.4f}")
    for label, s in result.extras.get("argmin", {}).items():
        summary.append(f"argmin[{label}]={s}")
    print(" ".join(summary))
    return 0


_COMMANDS = {"estimate": cmd_estimate, "metric-check": cmd_metric_check, **{k: cmd_sweep for k in _SWEEPS}}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"gsliced: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0) if isinstance(exc.code, int) else 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", SinkhornConvergenceWarning)
            return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gsliced: error: {exc}", file=sys.stderr)
        return 2
    except (DatasetError, OSError, RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"gsliced: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
