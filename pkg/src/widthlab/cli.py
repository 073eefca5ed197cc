"""widthlab command line: bound tables, verification suites, search, maps and fibers.

Exit codes: 0 success, 1 a checked claim or bound failed, 2 usage or regime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bounds, embeddings, hadamard, hemisphere_search
from .errors import BoundViolationError, RegimeViolationError, WidthLabError
from .lp_core import Exponent, LpVector, PointConfiguration, format_exponent, lp_norms, set_diameter

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers


def _exponent(text: str) -> Exponent:
    try:
        return Exponent.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad exponent {text!r}: {exc}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return v


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def parse_eps_grid(text: str) -> list[float]:
    """``a:b:step`` with both endpoints included; values are rounded to 12 decimals."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"eps grid must be a:b:step, got {text!r}")
    try:
        a, b, step = (Fraction(s.strip()) for s in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"eps grid must be numeric, got {text!r}") from None
    if step <= 0 or a <= 0 or b < a:
        raise UsageError("eps grid needs 0 < a <= b and step > 0")
    count = int((b - a) / step) + 1
    if count > 100_000:
        raise UsageError("eps grid too large")
    return [round(float(a + i * step), 12) for i in range(count)]


# ---------------------------------------------------------------------------
# output


@dataclass
class Output:
    """What a command produced: rows for CSV/text and a JSON document."""

    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    doc: dict = field(default_factory=dict)
    text: str | None = None
    note: str | None = None
    code: int = EXIT_OK


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(out: Output, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, **out.doc}, indent=2, sort_keys=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.columns)
        for r in out.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    if out.text is not None:
        return out.text
    widths = [max(len(c), *(len(_cell(r[i])) for r in out.rows)) if out.rows else len(c) for i, c in enumerate(out.columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(out.columns, widths))]
    lines += ["  ".join(_cell(v).ljust(w) for v, w in zip(r, widths)) for r in out.rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# table


def cmd_table(args) -> Output:
    if args.eps is None and args.eps_grid is None:
        raise UsageError("table needs --eps or --eps-grid")
    grid = [args.eps] if args.eps is not None else parse_eps_grid(args.eps_grid)
    metric = bounds.Metric.parse(args.metric)
    out = Output(columns=["n", "p", "metric", "eps", "lo", "hi", "sources"])
    docs = []
    for eps in grid:
        iv = bounds.wdim_interval(
            args.n, args.p, metric, eps, wdm3_mode=not args.no_wdm3, empirical_samples=args.empirical_samples, seed=args.seed
        )
        out.rows.append([args.n, format_exponent(args.p), metric.value, eps, iv.lo, iv.hi, ";".join(iv.sources)])
        docs.append(iv.as_dict())
    out.doc = {"command": "table", "rows": docs}
    return out


# ---------------------------------------------------------------------------
# verify


@dataclass
class Check:
    suite: str
    claim: str
    passed: bool
    margin: float

    def as_row(self):
        return [self.suite, "PASS" if self.passed else "FAIL", self.margin, self.claim]


def _generators(n: int, p: Exponent, choice: str = "auto") -> PointConfiguration:
    """Generator set for the cone maps.

    ``auto``: the four-point set for n = 3 and p != 2, a Hadamard set of order
    n + 1 for p < 2 when one is available, otherwise the regular simplex.
    """
    if choice == "simplex" or (choice == "auto" and p.value == 2.0):
        return embeddings.regular_simplex(n, p)
    if choice == "dim3" or (choice == "auto" and n == 3):
        if n != 3:
            raise UsageError("the four-point set lives in dimension 3")
        return embeddings.dim3_set(p)
    if choice == "hadamard" or (choice == "auto" and p.value < 2.0 and hadamard.hadamard_order_available(n + 1)):
        if not hadamard.hadamard_order_available(n + 1):
            raise UsageError(f"no Hadamard matrix of order {n + 1} in the registry")
        return hadamard.hadamard_set(hadamard.construct(n + 1), p)
    return embeddings.regular_simplex(n, p)


def _suite_hadamard(args) -> list[Check]:
    checks = []
    for order in range(1, 33):
        avail = hadamard.hadamard_order_available(order)
        if not avail:
            # orders that are multiples of 4 but outside the registry (28) are a gap, not a failure
            impossible = not (order in (1, 2) or order % 4 == 0)
            claim = "no Hadamard matrix exists" if impossible else "outside the Sylvester/Paley/product registry"
            checks.append(Check("hadamard", f"order {order} unavailable: {claim}", True, 0.0))
            continue
        h = hadamard.construct(order)
        e = h.entries.astype(np.int64)
        err = int(np.abs(e @ e.T - order * np.eye(order, dtype=np.int64)).max())
        norm_ok = bool((e[0] == 1).all() and (e[:, 0] == 1).all())
        checks.append(Check("hadamard", f"order {order}: H H^t = {order} Id, normalized", err == 0 and norm_ok, float(err)))
        if order >= 2:
            full = hadamard.row_agreement_counts(h)
            off = full[~np.eye(order, dtype=bool)]
            ok = bool((off == order // 2).all() and (np.diag(full) == order).all())
            checks.append(Check("hadamard", f"order {order}: distinct rows agree in {order // 2} places", ok, 0.0))
        if order >= 4:
            tr = hadamard.row_agreement_counts(h, truncated=True)
            off = tr[~np.eye(order, dtype=bool)]
            ok = bool((off == order // 2 - 1).all())
            checks.append(Check("hadamard", f"order {order}: truncated rows agree in {order // 2 - 1} places", ok, 0.0))
            for p in (1.0, 1.5, 2.0):
                d = set_diameter(hadamard.hadamard_set(h, p))
                want = hadamard.hadamard_set_diameter(order, p)
                checks.append(Check("hadamard", f"order {order}, p={p:g}: set diameter = 2^(1/p')(1+1/(N-1))^(1/p)", abs(d - want) <= 1e-12, abs(d - want)))
    return checks


def _suite_fibers(args) -> list[Check]:
    n, p = args.n or 3, args.p
    samples = args.samples
    checks = []
    if not p.is_inf:
        for j in range(1, n + 1):
            want, s0 = embeddings.collapse_fiber_diameter(n, p, j)
            x = s0.coords
            zero = np.abs(embeddings.collapse_projection(np.vstack([x, -x]), j)).max()
            d = float(lp_norms(2 * x, math.inf))
            checks.append(Check("fibers", f"pi_{j} on l^{p}({n}): +-s0 collapse to 0, distance 2(n-j+1)^(-1/p)", zero == 0 and abs(d - want) <= 1e-12, abs(d - want)))
            fs = embeddings.sample_fiber(LpVector(np.zeros(n), p), embeddings.EmbeddingSpec.collapse(j), j, min(samples, 5000), args.seed)
            sd = embeddings.fiber_diameter(fs)
            checks.append(Check("fibers", f"pi_{j}: sampled fiber at 0 within the bound", sd <= want + 1e-9, want - sd))
    if n >= 2 and not p.is_inf:
        gens = _generators(n, p)
        spec = embeddings.EmbeddingSpec.cascade(gens, 1)
        fs = embeddings.sample_fiber(np.zeros(n), spec, 1, samples, args.seed)
        d = embeddings.fiber_diameter(fs)
        gdiam = set_diameter(gens)
        sharp = p.value <= 2.0 and (p.value == 2.0 or n == 3 or hadamard.hadamard_order_available(n + 1))
        if sharp:
            want = bounds.b_lower(n, p)
            rel = (want - d) / want
            checks.append(Check("fibers", f"sigma_1 fiber at 0 (n={n}, p={format_exponent(p)}): diameter within 1% below {want:.9f}", -1e-9 <= rel <= 0.01, rel))
        checks.append(Check("fibers", f"sigma_1 fiber at 0: diameter {d:.9f} < 2", d < 2.0, 2.0 - d))
        checks.append(Check("fibers", "sigma_1 fiber at 0 no wider than the generator set", d <= gdiam + 1e-9, gdiam - d))
    return checks


def _suite_bounds(args) -> list[Check]:
    checks = []
    grid = np.linspace(0.0125, 2.5, 200)
    for metric in (bounds.Metric.INTRINSIC, bounds.Metric.SUP):
        for p in ("1", "1.5", "2", "3", "inf"):
            los = {}
            mono = zero_ok = gap_ok = True
            for n in range(1, 7):
                prev = None
                row = []
                for eps in grid:
                    iv = bounds.wdim_interval(n, p, metric, float(eps))
                    row.append(iv.lo)
                    if prev is not None and (iv.lo > prev.lo or iv.hi > prev.hi):
                        mono = False
                    if (iv.lo == iv.hi == 0) != (eps >= 2.0):
                        zero_ok = False
                    # the n/2 - 1 gap is a statement about the intrinsic metric
                    if metric is bounds.Metric.INTRINSIC and eps < 2.0 and not iv.lo > n / 2 - 1:
                        gap_ok = False
                    prev = iv
                los[n] = row
            nest = all(los[n][i] <= los[n + 1][i] for n in range(1, 6) for i in range(len(grid)))
            tag = f"{metric.value}, p={p}"
            checks.append(Check("bounds", f"{tag}: interval non-increasing in eps", mono, 0.0))
            checks.append(Check("bounds", f"{tag}: [0,0] exactly when eps >= 2", zero_ok, 0.0))
            checks.append(Check("bounds", f"{tag}: lo non-decreasing in n", nest, 0.0))
            if metric is bounds.Metric.INTRINSIC:
                checks.append(Check("bounds", f"{tag}: lo > n/2 - 1 for eps < 2", gap_ok, 0.0))
    return checks


def _suite_embeddings(args) -> list[Check]:
    checks = []
    rng = np.random.default_rng(args.seed)
    gens = embeddings.regular_simplex(3, 2)
    xs = embeddings.random_ball_points(3, 2, 2000, rng)
    sk = embeddings.EmbeddingSpec.skeleton(gens)
    s = np.array([embeddings.skeleton_projection(x, sk).coords for x in xs])
    c = embeddings.cascade_projection(xs, embeddings.EmbeddingSpec.cascade(gens, 1), 1)
    err = float(np.abs(s - c).max())
    checks.append(Check("embeddings", "sigma_1 agrees with the skeleton projection", err <= 1e-9, err))
    gens5 = embeddings.regular_simplex(5, 2)
    coef = embeddings.cascade_coefficients(embeddings.random_ball_points(5, 2, 2000, rng), embeddings.EmbeddingSpec.cascade(gens5, 2), 2)
    supp = int((coef > 0).sum(axis=1).max())
    checks.append(Check("embeddings", "sigma_2 on l^2(5): conic support <= 3", supp <= 3, float(3 - supp)))
    x = rng.uniform(-1, 1, (2000, 4))
    y = x + rng.normal(scale=0.05, size=x.shape)
    lip = float((np.abs(embeddings.collapse_projection(x, 2) - embeddings.collapse_projection(y, 2)).max(axis=1) / np.abs(x - y).max(axis=1)).max())
    checks.append(Check("embeddings", "pi_j is 2-Lipschitz in the sup metric", lip <= 2.0 + 1e-12, 2.0 - lip))
    budget = max(2000, args.samples // 10)
    for label, cfg in (
        ("regular simplex n=3, p=2", embeddings.regular_simplex(3, 2)),
        ("four-point set, p=1.5", embeddings.dim3_set(1.5)),
        ("Hadamard set order 4, p=1", hadamard.hadamard_set(hadamard.construct(4), 1)),
    ):
        rep = embeddings.hypothesis_check(cfg, samples=budget, seed=args.seed)
        checks.append(Check("embeddings", f"cone hypothesis holds: {label}", rep.passed, -rep.worst_margin))
    return checks


def _suite_search(args) -> list[Check]:
    checks = []
    for n, p, want in ((2, "2", math.sqrt(3.0)), (3, "2", math.sqrt(8.0 / 3.0)), (3, "1", 4.0 / 3.0)):
        try:
            r = hemisphere_search.min_diameter_search(n, p, restarts=args.restarts, seed=args.seed)
        except BoundViolationError as exc:
            checks.append(Check("search", f"n={n}, p={p}: {exc}", False, -math.inf))
            continue
        err = abs(r.diameter - want)
        checks.append(Check("search", f"n={n}, p={p}: best found {r.diameter:.9f} within 1e-3 of {want:.9f}", err <= 1e-3, err))
    for n in range(3, 9):
        res = hemisphere_search.certify_against_bound(hemisphere_search.linf_family(n), label="one_over")
        err = abs(res.diameter - n / (n - 1))
        checks.append(Check("search", f"l^inf family n={n}: diameter n/(n-1)", err <= 1e-12, err))
    return checks


SUITES = {
    "hadamard": _suite_hadamard,
    "fibers": _suite_fibers,
    "bounds": _suite_bounds,
    "embeddings": _suite_embeddings,
    "search": _suite_search,
}


def cmd_verify(args) -> Output:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks = [c for name in names for c in SUITES[name](args)]
    out = Output(columns=["suite", "status", "margin", "claim"], rows=[c.as_row() for c in checks])
    failed = sum(not c.passed for c in checks)
    out.doc = {
        "command": "verify",
        "suites": names,
        "passed": failed == 0,
        "checks": [{"suite": c.suite, "claim": c.claim, "passed": c.passed, "margin": c.margin} for c in checks],
    }
    out.text = "".join(f"{'PASS' if c.passed else 'FAIL'}  [{c.suite}] {c.claim}  (margin {c.margin:.3g})\n" for c in checks)
    out.text += f"{len(checks) - failed}/{len(checks)} checks passed\n"
    out.code = EXIT_OK if failed == 0 else EXIT_FAIL
    return out


# ---------------------------------------------------------------------------
# search


def cmd_search(args) -> Output:
    if args.n is None:
        raise UsageError("search needs --n")
    if args.family:
        if not args.p.is_inf:
            raise UsageError("--family selects an l^inf configuration; use --p inf")
        cfg = hemisphere_search.linf_family(args.n, args.family)
        res = hemisphere_search.certify_against_bound(cfg, label=f"family {args.family}")
    else:
        res = hemisphere_search.min_diameter_search(args.n, args.p, restarts=args.restarts, seed=args.seed)
    d = res.as_dict()
    out = Output(doc={"command": "search", **d})
    out.columns = ["index"] + [f"x{i}" for i in range(args.n)] + ["norm"]
    norms = lp_norms(res.config.points, res.config.p)
    out.rows = [[i, *row.tolist(), float(nv)] for i, (row, nv) in enumerate(zip(res.config.points, norms))]
    out.text = (
        f"{res.label}: n={args.n} p={format_exponent(args.p)}\n"
        f"diameter {res.diameter!r}\nbound    {res.bound!r}\ngap      {res.gap!r}\n"
    )
    out.note = f"diameter={res.diameter!r} bound={res.bound!r} gap={res.gap!r}"
    return out


# ---------------------------------------------------------------------------
# embed / fibers


def _spec(args, n: int) -> embeddings.EmbeddingSpec:
    kind = args.map
    j = args.j
    if kind == "collapse":
        return embeddings.EmbeddingSpec.collapse(j)
    if args.p.is_inf:
        raise UsageError("cone maps need a finite exponent")
    gens = _generators(n, args.p, args.generators)
    if kind == "skeleton":
        return embeddings.EmbeddingSpec.skeleton(gens)
    embeddings._check_regime(n, j)
    return embeddings.EmbeddingSpec.cascade(gens, j)


def _points_output(cmd: str, pts: np.ndarray, p: Exponent, extra: dict) -> Output:
    n = pts.shape[1]
    norms = lp_norms(pts, p)
    out = Output(columns=["index"] + [f"x{i}" for i in range(n)] + ["norm"])
    out.rows = [[i, *row.tolist(), float(v)] for i, (row, v) in enumerate(zip(pts, norms))]
    out.doc = {"command": cmd, **extra, "points": pts.tolist(), "norms": norms.tolist()}
    return out


def cmd_embed(args) -> Output:
    if args.point is not None:
        xs = np.atleast_2d(args.point)
        n = xs.shape[1]
        if args.n is not None and args.n != n:
            raise UsageError("--point length does not match --n")
    else:
        if args.n is None:
            raise UsageError("embed needs --point or --n")
        n = args.n
        rng = np.random.default_rng(args.seed)
        xs = embeddings.random_ball_points(n, args.p, args.samples, rng)
    spec = _spec(args, n)
    if spec.kind is embeddings.MapKind.COLLAPSE:
        ys = embeddings.collapse_projection(xs, args.j)
    elif spec.kind is embeddings.MapKind.SKELETON:
        ys = np.array([embeddings.skeleton_projection(x, spec).coords for x in xs])
    else:
        ys = embeddings.cascade_projection(xs, spec, args.j)
    ys = np.where(ys == 0.0, 0.0, ys)  # no negative zeros in the output
    return _points_output("embed", ys, args.p, {"map": args.map, "j": args.j, "p": format_exponent(args.p), "inputs": xs.tolist()})


def cmd_fibers(args) -> Output:
    n = args.n
    target = args.target
    if n is None:
        if target is None:
            raise UsageError("fibers needs --n or --target")
        n = target.size
    if target is None or (target.size == 1 and n > 1 and target[0] == 0.0):
        target = np.zeros(n)
    if target.size != n:
        raise UsageError("--target length does not match --n")
    spec = _spec(args, n)
    if spec.kind is embeddings.MapKind.COLLAPSE:
        fs = embeddings.sample_fiber(LpVector(target, args.p), spec, args.j, args.samples, args.seed)
    else:
        fs = embeddings.sample_fiber(target, spec, args.j, args.samples, args.seed)
    diam = embeddings.fiber_diameter(fs)
    out = _points_output(
        "fibers",
        fs.points,
        fs.metric,
        {"map": args.map, "j": args.j, "p": format_exponent(args.p), "target": target.tolist(), "metric": format_exponent(fs.metric), "diameter": diam},
    )
    if spec.kind is embeddings.MapKind.COLLAPSE:
        out.rows = [[i, *row.tolist(), float(v)] for i, (row, v) in enumerate(zip(fs.points, lp_norms(fs.points, args.p)))]
        out.doc["norms"] = lp_norms(fs.points, args.p).tolist()
    out.note = f"diameter={diam!r}"
    out.text = f"fiber of {args.map} (j={args.j}) over {target.tolist()}: {fs.count} points, diameter {diam!r}\n"
    return out


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="widthlab", description="Width dimension of l^p balls.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt):
        sp.add_argument("--n", type=_positive_int)
        sp.add_argument("--p", type=_exponent, default=Exponent(2.0))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=_positive_int, default=10_000)
        sp.add_argument("--restarts", type=_positive_int, default=16)
        sp.add_argument("--format", choices=["json", "csv", "text"], default=fmt)
        sp.add_argument("--output", "-o")

    t = sub.add_parser("table", help="certified wdim intervals over an eps grid")
    common(t, "csv")
    t.add_argument("--metric", default="lp", choices=["lp", "intrinsic", "intrinsic_lp", "sup", "sup_metric", "linf"])
    t.add_argument("--eps", type=_positive_float)
    t.add_argument("--eps-grid")
    t.add_argument("--empirical-samples", type=int, default=0)
    t.add_argument("--no-wdm3", action="store_true", help="use the conservative Borsuk-Ulam floor at p = 1")

    v = sub.add_parser("verify", help="run invariant suites")
    common(v, "text")
    v.add_argument("--suite", choices=["all", *SUITES], default="all")

    s = sub.add_parser("search", help="small-diameter spanning configurations")
    common(s, "json")
    s.add_argument("--family", choices=[f.value for f in hemisphere_search.LinfVariant])

    for name, fmt in (("embed", "csv"), ("fibers", "csv")):
        e = sub.add_parser(name, help="apply a map" if name == "embed" else "sample a fiber")
        common(e, fmt)
        e.add_argument("--map", choices=["collapse", "skeleton", "cascade"], default="cascade")
        e.add_argument("--j", type=_positive_int, default=1)
        e.add_argument("--generators", choices=["auto", "simplex", "dim3", "hadamard"], default="auto")
        if name == "embed":
            e.add_argument("--point", type=_vector)
        else:
            e.add_argument("--target", type=_vector)
    return parser


COMMANDS = {"table": cmd_table, "verify": cmd_verify, "search": cmd_search, "embed": cmd_embed, "fibers": cmd_fibers}


def _finish(out: Output, args) -> int:
    text = render(out, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if out.note and args.format != "json":
        print(out.note, file=sys.stderr)
    return out.code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"widthlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command == "verify" and args.suite == "fibers" and args.samples == 10_000:
        args.samples = 100_000
    try:
        return _finish(COMMANDS[args.command](args), args)
    except BoundViolationError as exc:
        print(f"widthlab: bound violated: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, RegimeViolationError, WidthLabError) as exc:
        print(f"widthlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
