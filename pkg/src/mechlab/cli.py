"""Command line front end.

Two subcommands::

    mechlab run CONFIG [--out DIR] [--tol X] [--seed N]
    mechlab export-lp CONFIG [--out DIR]

`run` executes the experiment described by a JSON config and writes
summary.json (canonical form: sorted keys, floats rendered with %.12g,
no timestamps, so reruns are byte-identical), audits.json, and, when the
run produces one, mechanism.csv and distribution.csv.

Exit codes: 0 all asserted checks passed, 1 an asserted check failed,
2 the config is invalid (the message names the offending field),
3 the solver failed (the offending model is dumped as model.lp when
available).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import gen
from .dist import (
    Distribution,
    DistributionError,
    MarginalCdf,
    check_mcafee_mcmillan,
    density_grid,
    distribution_from_density,
    identical_distribution_from_density,
    iid_distribution,
    one_step_map,
    restrict_to_strict,
    table_distribution,
    to_identical_density,
    uniform_distribution,
)
from .mech import (
    AuditReport,
    MechanismError,
    check_feasible_identical,
    check_ic,
    check_ir,
    expected_revenue,
    write_mechanism_csv,
)
from .monotone import (
    is_almost_deterministic,
    lmax_repair,
    run_revenue_monotonicity_experiment,
)
from .optlp import (
    AUDIT_TOL,
    InfeasibleError,
    LpError,
    build_revenue_lp,
    certify_equivalence,
    export_lp_text,
    optimal_deterministic,
    optimal_mechanism,
    optimal_symmetric_mechanism,
    optimal_uniform_price,
    uniform_price_mechanism,
    worst_case_revenue,
)
from .symmetry import certify_theorem1, symmetrize
from .typespace import (
    Grid,
    HETEROGENEOUS,
    IDENTICAL,
    enumerate_hetero,
    enumerate_identical,
)

KINDS = (
    "solve",
    "certify_equivalence",
    "certify_theorem1",
    "robust",
    "monotonicity",
    "repair",
    "deterministic",
)


class ConfigError(ValueError):
    """Invalid config; the message names the field."""


# ---------------------------------------------------------------------------
# canonical JSON

def _render(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f) or math.isinf(f):
            raise ValueError("non-finite number in a report")
        return format(f, ".12g")
    if isinstance(obj, dict):
        items = sorted(((str(k), v) for k, v in obj.items()), key=lambda kv: kv[0])
        if len({k for k, _ in items}) != len(items):
            raise ValueError("keys collide after string conversion")
        parts = [f"{json.dumps(k, ensure_ascii=True)}:{_render(v)}" for k, v in items]
        return "{" + ",".join(parts) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_render(x) for x in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _render(obj.tolist())
    raise TypeError(f"cannot render {type(obj).__name__} canonically")


def canonical_json(obj) -> str:
    return _render(obj) + "\n"


# ---------------------------------------------------------------------------
# config parsing

def _take(cfg: dict, field: str, kinds, where: str = "", required: bool = True, default=None):
    label = f"{where}.{field}" if where else field
    if field not in cfg:
        if required:
            raise ConfigError(f"missing field '{label}'")
        return default
    val = cfg[field]
    if kinds is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"field '{label}' must be a boolean")
        return val
    if kinds is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"field '{label}' must be an integer")
        return val
    if kinds is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"field '{label}' must be a number")
        return float(val)
    if kinds is str:
        if not isinstance(val, str):
            raise ConfigError(f"field '{label}' must be a string")
        return val
    if kinds is list:
        if not isinstance(val, list):
            raise ConfigError(f"field '{label}' must be a list")
        return val
    if kinds is dict:
        if not isinstance(val, dict):
            raise ConfigError(f"field '{label}' must be an object")
        return val
    raise AssertionError(kinds)


def _float_list(cfg: dict, field: str, where: str) -> list:
    raw = _take(cfg, field, list, where)
    out = []
    for i, x in enumerate(raw):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"field '{where}.{field}[{i}]' must be a number")
        out.append(float(x))
    return out


def build_grid(cfg: dict) -> Grid:
    sub = _take(cfg, "grid", dict)
    n = _take(sub, "n", int, "grid")
    v_low = _take(sub, "v_low", float, "grid", required=False, default=0.0)
    v_high = _take(sub, "v_high", float, "grid", required=False, default=1.0)
    try:
        if "levels" in sub:
            levels = _float_list(sub, "levels", "grid")
            return Grid(n=n, levels=tuple(levels), v_low=v_low, v_high=v_high)
        points = _take(sub, "points", int, "grid")
        return Grid.uniform(n=n, v_low=v_low, v_high=v_high, points=points)
    except ValueError as exc:
        raise ConfigError(f"field 'grid': {exc}") from exc


def _domain(cfg: dict) -> str:
    domain = _take(cfg, "domain", str, required=False, default=IDENTICAL)
    if domain not in (IDENTICAL, HETEROGENEOUS):
        raise ConfigError(
            f"field 'domain' must be '{IDENTICAL}' or '{HETEROGENEOUS}', got {domain!r}"
        )
    return domain


def build_distribution(cfg: dict, grid: Grid, domain: str, strict_only: bool, types) -> Distribution:
    sub = _take(cfg, "distribution", dict)
    kind = _take(sub, "kind", str, "distribution")
    try:
        if kind == "uniform":
            return uniform_distribution(types, domain)
        if kind == "iid":
            if "pmf" in sub:
                pmf = _float_list(sub, "pmf", "distribution")
            else:
                pmf = [1.0 / grid.m] * grid.m
            if len(pmf) != grid.m:
                raise ConfigError(
                    f"field 'distribution.pmf' must have {grid.m} entries, got {len(pmf)}"
                )
            marg = MarginalCdf.from_pmf(grid.levels, pmf)
            if domain == HETEROGENEOUS:
                dist = iid_distribution(marg, grid.n)
                return restrict_to_strict(dist) if strict_only else dist
            density = np.ones((grid.m,) * grid.n)
            arr = np.asarray(pmf)
            for axis in range(grid.n):
                shape = [1] * grid.n
                shape[axis] = grid.m
                density = density * arr.reshape(shape)
            dist = identical_distribution_from_density(grid, density)
            return restrict_to_strict(dist) if strict_only else dist
        if kind == "table":
            raw_types = _take(sub, "types", list, "distribution")
            weights = _float_list(sub, "weights", "distribution")
            parsed = []
            known = set(tuple(v) for v in types)
            for i, row in enumerate(raw_types):
                if not isinstance(row, list):
                    raise ConfigError(f"field 'distribution.types[{i}]' must be a list")
                point = tuple(float(x) for x in row)
                if point not in known:
                    raise ConfigError(
                        f"field 'distribution.types[{i}]': {point} is not on the grid"
                    )
                parsed.append(point)
            return table_distribution(parsed, weights, domain)
        if kind == "density":
            expr = _take(sub, "expr", str, "distribution")
            params = _take(sub, "params", dict, "distribution", required=False, default={})
            density = density_grid(grid, expr, params)
            if domain == HETEROGENEOUS:
                return distribution_from_density(grid, density, strict_only=strict_only)
            dist = identical_distribution_from_density(grid, density)
            return restrict_to_strict(dist) if strict_only else dist
    except ConfigError:
        raise
    except (DistributionError, ValueError) as exc:
        raise ConfigError(f"field 'distribution': {exc}") from exc
    raise ConfigError(
        "field 'distribution.kind' must be one of 'uniform', 'iid', 'table', 'density'"
        f", got {kind!r}"
    )


def _g_avg(cfg: dict) -> MarginalCdf:
    sub = _take(cfg, "g_avg", dict)
    levels = _float_list(sub, "levels", "g_avg")
    pmf = _float_list(sub, "pmf", "g_avg")
    if len(levels) != len(pmf):
        raise ConfigError("field 'g_avg': levels and pmf must have equal length")
    try:
        return MarginalCdf.from_pmf(levels, pmf)
    except DistributionError as exc:
        raise ConfigError(f"field 'g_avg': {exc}") from exc


# ---------------------------------------------------------------------------
# artifacts

def write_distribution_csv(dist: Distribution, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"v{i+1}" for i in range(dist.n)] + ["weight"])
        for v, w in zip(dist.types, dist.weights):
            writer.writerow([format(x, ".17g") for x in v] + [format(float(w), ".17g")])


class RunOutput:
    """Accumulates the summary, audit reports, and file artifacts."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.summary: dict = {}
        self.audits: list = []
        self.asserted: list = []

    def audit(self, report: AuditReport, asserted: bool = True) -> AuditReport:
        self.audits.append(report)
        if asserted:
            self.asserted.append(report)
        return report

    def finish(self) -> bool:
        ok = all(r.passed for r in self.asserted)
        self.summary["checks"] = {r.check: r.passed for r in self.audits}
        self.summary["asserted_ok"] = ok
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "summary.json").write_text(canonical_json(self.summary))
        (self.out_dir / "audits.json").write_text(
            canonical_json([r.to_jsonable() for r in self.audits])
        )
        return ok


# ---------------------------------------------------------------------------
# run kinds

def _run_solve(cfg: dict, out: RunOutput, tol: float) -> None:
    grid = build_grid(cfg)
    domain = _domain(cfg)
    strict_only = _take(cfg, "strict_only", bool, required=False, default=False)
    mode = _take(cfg, "mode", str, required=False, default="auto")
    if mode not in ("auto", "full", "lazy"):
        raise ConfigError(f"field 'mode' must be 'auto', 'full', or 'lazy', got {mode!r}")
    if domain == IDENTICAL:
        types = enumerate_identical(grid, strict_only=strict_only)
    else:
        types = enumerate_hetero(grid, strict_only=strict_only)
    dist = build_distribution(cfg, grid, domain, strict_only, types)
    try:
        res = optimal_mechanism(types, dist, domain, mode=mode)
    except LpError:
        lp = build_revenue_lp(types, dist, domain)
        out.out_dir.mkdir(parents=True, exist_ok=True)
        (out.out_dir / "model.lp").write_text(export_lp_text(lp, comment="failed solve"))
        raise
    mech = res.mechanism
    out.audit(check_ic(mech, tol=tol))
    out.audit(check_ir(mech, tol=tol))
    if domain == IDENTICAL:
        out.audit(check_feasible_identical(mech, tol=tol))
    out.summary.update(
        {
            "kind": "solve",
            "domain": domain,
            "n_types": len(types),
            "revenue": res.revenue,
            "lp": {
                "mode": res.mode,
                "rounds": res.rounds,
                "n_ic_rows": res.n_ic_rows,
                "iterations": res.solution.iterations,
                "duality_gap": res.solution.duality_gap,
            },
        }
    )
    write_mechanism_csv(mech, out.out_dir.joinpath("mechanism.csv").as_posix())
    write_distribution_csv(dist, out.out_dir / "distribution.csv")


def _run_equivalence(cfg: dict, out: RunOutput, tol: float) -> None:
    grid = build_grid(cfg)
    types_h = enumerate_hetero(grid, strict_only=True)
    dist_h = build_distribution(cfg, grid, HETEROGENEOUS, True, types_h)
    try:
        dist_i = to_identical_density(dist_h)
    except DistributionError as exc:
        raise ConfigError(f"field 'distribution': {exc}") from exc
    types_i = enumerate_identical(grid, strict_only=True)
    rep = certify_equivalence((types_i, dist_i), (types_h, dist_h), tol=tol)
    out.audit(rep)
    out.summary.update(
        {
            "kind": "certify_equivalence",
            "n_types_identical": len(types_i),
            "n_types_heterogeneous": len(types_h),
            "revenue_identical": rep.info["revenue_identical"],
            "revenue_symmetric": rep.info["revenue_symmetric"],
            "revenue_gap": abs(rep.info["revenue_identical"] - rep.info["revenue_symmetric"]),
        }
    )
    write_distribution_csv(dist_h, out.out_dir.joinpath("distribution.csv"))


def _run_theorem1(cfg: dict, out: RunOutput, tol: float, seed: int) -> None:
    grid = build_grid(cfg)
    sub = _take(cfg, "mechanism", dict)
    source = _take(sub, "kind", str, "mechanism")
    mechs = []
    if source == "lp":
        types_h = enumerate_hetero(grid, strict_only=True)
        dist_h = build_distribution(cfg, grid, HETEROGENEOUS, True, types_h)
        res = optimal_symmetric_mechanism(types_h, dist_h)
        mechs.append(("lp_optimum", res.mechanism))
    elif source == "random":
        count = _take(sub, "count", int, "mechanism", required=False, default=20)
        if count < 1:
            raise ConfigError("field 'mechanism.count' must be positive")
        rng = gen.rng_from_seed(seed)
        for i in range(count):
            raw = gen.random_ic_heterogeneous(rng, grid, max_items=4, strict_only=True)
            mechs.append((f"random_{i}", symmetrize(raw)))
    else:
        raise ConfigError(
            f"field 'mechanism.kind' must be 'lp' or 'random', got {source!r}"
        )
    rows = []
    for name, mech in mechs:
        rep = certify_theorem1(mech, tol=tol)
        out.audit(rep)
        rows.append(
            {
                "name": name,
                "equivalence_holds": rep.passed,
                "ic": rep.info["ic_global"].passed,
                "rank_preserving": rep.info["rank_preserving"].passed,
                "ic_on_cells": rep.info["ic_on_cells"].passed,
            }
        )
    out.summary.update(
        {
            "kind": "certify_theorem1",
            "n_mechanisms": len(rows),
            "mechanisms": rows,
            "seed": seed,
        }
    )
    if mechs:
        write_mechanism_csv(mechs[-1][1], out.out_dir.joinpath("mechanism.csv").as_posix())


def _run_robust(cfg: dict, out: RunOutput, tol: float) -> None:
    n = _take(cfg, "n", int)
    if n < 1:
        raise ConfigError("field 'n' must be positive")
    g = _g_avg(cfg)
    price = _take(cfg, "price", float, required=False, default=None)
    if price is None:
        price, revenue = optimal_uniform_price(g, n)
    else:
        revenue = n * price * g.mass_at_or_above(price)
    v_low = 0.0 if g.levels[0] >= 0.0 else g.levels[0]
    grid = Grid(n=n, levels=g.levels, v_low=v_low, v_high=g.levels[-1])
    types = enumerate_identical(grid)
    mech = uniform_price_mechanism(types, price, IDENTICAL)
    wc_min, dist_min, _ = worst_case_revenue(mech, g, sense="min")
    wc_max, _, _ = worst_case_revenue(mech, g, sense="max")
    violations = []
    if abs(wc_min - revenue) > tol:
        violations.append((("worst_case_vs_formula", wc_min, revenue), abs(wc_min - revenue)))
    if abs(wc_max - wc_min) > tol:
        violations.append((("revenue_not_flat", wc_min, wc_max), abs(wc_max - wc_min)))
    rep = AuditReport(
        check="robust_uniform_price",
        passed=not violations,
        violations=tuple(violations),
        max_slack=max((s for _, s in violations), default=0.0),
        info={"price": price, "formula_revenue": revenue},
    )
    out.audit(rep)
    # payments are fl(k * price), so audits can see one rounding of noise
    out.audit(check_ic(mech, tol=1e-12))
    out.audit(check_ir(mech, tol=1e-12))
    out.summary.update(
        {
            "kind": "robust",
            "n": n,
            "price": price,
            "formula_revenue": revenue,
            "worst_case_min": wc_min,
            "worst_case_max": wc_max,
        }
    )
    write_mechanism_csv(mech, out.out_dir.joinpath("mechanism.csv").as_posix())
    write_distribution_csv(dist_min, out.out_dir / "distribution.csv")


def _run_monotonicity(cfg: dict, out: RunOutput, tol: float) -> None:
    grid = build_grid(cfg)
    sub = _take(cfg, "density", dict)
    expr = _take(sub, "expr", str, "density")
    params = _take(sub, "params", dict, "density", required=False, default={})
    try:
        density = density_grid(grid, expr, params)
        mm = check_mcafee_mcmillan(density, grid)
        dist = identical_distribution_from_density(grid, density)
    except DistributionError as exc:
        raise ConfigError(f"field 'density': {exc}") from exc
    out.audit(mm, asserted=False)
    res = optimal_mechanism(list(dist.types), dist, IDENTICAL)
    ad = is_almost_deterministic(res.mechanism)
    out.audit(ad, asserted=False)
    shift = one_step_map(grid.levels)
    exp = run_revenue_monotonicity_experiment(res.mechanism, dist, shift)
    out.audit(exp)
    out.summary.update(
        {
            "kind": "monotonicity",
            "density_condition_holds": mm.passed,
            "density_min_value": mm.info["min_value"],
            "revenue": res.revenue,
            "almost_deterministic": ad.passed,
            "revenue_before": exp.info["revenue_before"],
            "revenue_after": exp.info["revenue_after"],
            "revenue_delta": exp.info["delta"],
            "increase_asserted": exp.info["asserted"],
            "assertion_reason": exp.info["reason"],
        }
    )
    write_mechanism_csv(res.mechanism, out.out_dir.joinpath("mechanism.csv").as_posix())
    write_distribution_csv(dist, out.out_dir / "distribution.csv")


def _run_repair(cfg: dict, out: RunOutput, tol: float, seed: int) -> None:
    grid = build_grid(cfg)
    count = _take(cfg, "count", int, required=False, default=20)
    ad_count = _take(cfg, "almost_det_count", int, required=False, default=0)
    if count < 0 or ad_count < 0:
        raise ConfigError("field 'count' and 'almost_det_count' must be nonnegative")
    rng = gen.rng_from_seed(seed)
    drift = 0.0
    failures = []
    last = None
    for i in range(count + ad_count):
        almost = i >= count
        mech = gen.random_ic_identical(
            rng, grid, max_items=3, almost_deterministic=almost
        )
        fixed = lmax_repair(mech, almost_deterministic=almost)
        last = fixed
        label = f"{'ad' if almost else 'flat'}_{i}"
        for rep in (
            check_ic(fixed, tol=tol),
            check_ir(fixed, tol=tol),
            check_feasible_identical(fixed, tol=tol),
        ):
            if not rep.passed:
                failures.append(((label, rep.check), rep.max_slack))
        du = float(np.max(np.abs(fixed.utilities() - mech.utilities())))
        drift = max(drift, du)
        if du > 1e-10:
            failures.append(((label, "utility_drift"), du))
    rep = AuditReport(
        check="repair_fuzz",
        passed=not failures,
        violations=tuple(failures),
        max_slack=max((s for _, s in failures), default=0.0),
        info={"count": count, "almost_det_count": ad_count, "max_utility_drift": drift},
    )
    out.audit(rep)
    out.summary.update(
        {
            "kind": "repair",
            "count": count,
            "almost_det_count": ad_count,
            "max_utility_drift": drift,
            "seed": seed,
        }
    )
    if last is not None:
        write_mechanism_csv(last, out.out_dir.joinpath("mechanism.csv").as_posix())


def _run_deterministic(cfg: dict, out: RunOutput, tol: float) -> None:
    grid = build_grid(cfg)
    domain = _domain(cfg)
    strict_only = _take(cfg, "strict_only", bool, required=False, default=False)
    if domain == IDENTICAL:
        types = enumerate_identical(grid, strict_only=strict_only)
    else:
        types = enumerate_hetero(grid, strict_only=strict_only)
    dist = build_distribution(cfg, grid, domain, strict_only, types)
    det = optimal_deterministic(types, dist, domain, collect_all=True)
    lp = optimal_mechanism(types, dist, domain)
    gap = lp.revenue - det.revenue
    violations = []
    if gap < -1e-7:
        violations.append((("deterministic_above_lp", det.revenue, lp.revenue), -gap))
    rep = AuditReport(
        check="deterministic_vs_lp",
        passed=not violations,
        violations=tuple(violations),
        max_slack=max((s for _, s in violations), default=0.0),
        info={"revenue_deterministic": det.revenue, "revenue_lp": lp.revenue},
    )
    out.audit(rep)
    out.audit(check_ic(det.mechanism, tol=0.0))
    out.audit(check_ir(det.mechanism, tol=0.0))
    out.summary.update(
        {
            "kind": "deterministic",
            "domain": domain,
            "revenue": det.revenue,
            "lp_revenue": lp.revenue,
            "lp_gap": gap,
            "n_menus_searched": det.n_menus_searched,
            "n_optimal_menus": len(det.optimal_menus),
        }
    )
    write_mechanism_csv(det.mechanism, out.out_dir.joinpath("mechanism.csv").as_posix())
    write_distribution_csv(dist, out.out_dir / "distribution.csv")


# ---------------------------------------------------------------------------
# drivers

def load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


DEFAULT_TOLS = {
    "solve": AUDIT_TOL,
    "certify_equivalence": 1e-7,
    "certify_theorem1": 1e-9,
    "robust": 1e-8,
    "monotonicity": 1e-9,
    "repair": 1e-9,
    "deterministic": 1e-9,
}


def run_config(cfg: dict, out_dir: Path, tol_override=None, seed_override=None) -> bool:
    kind = _take(cfg, "kind", str)
    if kind not in KINDS:
        raise ConfigError(f"field 'kind' must be one of {', '.join(KINDS)}; got {kind!r}")
    tol = tol_override
    if tol is None:
        tol = _take(cfg, "tol", float, required=False, default=DEFAULT_TOLS[kind])
    if tol < 0:
        raise ConfigError("field 'tol' must be nonnegative")
    seed = seed_override
    if seed is None:
        seed = _take(cfg, "seed", int, required=False, default=0)
    out = RunOutput(out_dir)
    if kind == "solve":
        _run_solve(cfg, out, tol)
    elif kind == "certify_equivalence":
        _run_equivalence(cfg, out, tol)
    elif kind == "certify_theorem1":
        _run_theorem1(cfg, out, tol, seed)
    elif kind == "robust":
        _run_robust(cfg, out, tol)
    elif kind == "monotonicity":
        _run_monotonicity(cfg, out, tol)
    elif kind == "repair":
        _run_repair(cfg, out, tol, seed)
    else:
        _run_deterministic(cfg, out, tol)
    return out.finish()


def export_config(cfg: dict, out_dir: Path) -> Path:
    kind = _take(cfg, "kind", str)
    if kind != "solve":
        raise ConfigError(f"field 'kind': export-lp supports only 'solve', got {kind!r}")
    grid = build_grid(cfg)
    domain = _domain(cfg)
    strict_only = _take(cfg, "strict_only", bool, required=False, default=False)
    if domain == IDENTICAL:
        types = enumerate_identical(grid, strict_only=strict_only)
    else:
        types = enumerate_hetero(grid, strict_only=strict_only)
    dist = build_distribution(cfg, grid, domain, strict_only, types)
    lp = build_revenue_lp(types, dist, domain)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "model.lp"
    path.write_text(export_lp_text(lp, comment=f"revenue model, {len(types)} types"))
    return path


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechlab",
        description="Solve, certify, and stress-test multi-object selling mechanisms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a JSON experiment config")
    run.add_argument("config", help="path to the JSON config")
    run.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
    run.add_argument("--tol", type=float, default=None, help="override the config tolerance")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    exp = sub.add_parser("export-lp", help="write the revenue model in LP text form")
    exp.add_argument("config", help="path to the JSON config (kind 'solve')")
    exp.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
    return parser


def _default_out(config_path: str) -> Path:
    p = Path(config_path)
    return p.parent / (p.stem + "_out")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out) if args.out else _default_out(args.config)
        if args.command == "export-lp":
            path = export_config(cfg, out_dir)
            print(f"wrote {path}")
            return 0
        ok = run_config(
            cfg, out_dir, tol_override=args.tol, seed_override=args.seed
        )
        status = "ok" if ok else "FAILED"
        print(f"{cfg['kind']}: {status} (outputs in {out_dir})")
        return 0 if ok else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LpError, InfeasibleError, MechanismError, DistributionError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
