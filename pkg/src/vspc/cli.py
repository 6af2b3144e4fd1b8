"""Command-line front end: solves, equilibrium checks, dynamics and sweeps.

Exit codes: 0 ok, 2 parse/validation error, 3 solver non-convergence,
4 deviation budget exceeded.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from vspc import analysis, graph as gr
from vspc.epidemic import SteadyStateCache, steady_state
from vspc.game import (BudgetExceeded, CostModel, GameParams, is_ad_stable, is_nash_exact,
                       parse_ownership, run_dynamics)
from vspc.graph import ConvergenceError, UNREACHABLE

CSV_VERSION = "vspc-csv v1"
SWEEP_COLUMNS = ["alpha", "gamma", "tau", "seed", "L", "avg_hopcount", "sum_infection",
                 "social_cost", "ad_stable", "poa", "poa_kind", "status", "audit_delta"]
EXACT_POA_MAX_N = 7

EXIT_OK, EXIT_PARSE, EXIT_CONVERGENCE, EXIT_BUDGET = 0, 2, 3, 4


class SpecError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.12g}"
    return str(x)


@dataclass
class SweepSpec:
    n: int
    alpha_grid: list[float]
    gamma_grid: list[float]
    tau_grid: list[float]
    seeds: list[int]
    zero_gamma: bool = False
    no_virus: bool = False
    t_max: int = 200
    p_init: float = 0.5
    out: str | None = None

    def __post_init__(self):
        for name in ("alpha_grid", "gamma_grid", "tau_grid", "seeds"):
            if not getattr(self, name):
                raise SpecError(f"{name} must not be empty")
        for name in ("alpha_grid", "gamma_grid", "tau_grid"):
            for x in getattr(self, name):
                if not math.isfinite(x) or x < 0:
                    raise SpecError(f"{name} values must be finite and >= 0, got {x}")
        if any(t == 0 for t in self.tau_grid):
            raise SpecError("tau must be positive")
        if self.n < 2:
            raise SpecError("n must be at least 2")
        if self.t_max < 1:
            raise SpecError("t_max must be at least 1")
        if not 0 < self.p_init <= 1:
            raise SpecError("p_init must lie in (0, 1]")

    def cells(self) -> list[tuple[float, float, float]]:
        return [(a, g, t) for t in self.tau_grid for g in self.gamma_grid for a in self.alpha_grid]


def _floats(value: str) -> list[float]:
    return [float(x) for x in value.split(",") if x.strip()]


def _ints(value: str) -> list[int]:
    out = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise SpecError(f"not a boolean: {value!r}")


_SPEC_KEYS = {
    "n": ("n", int),
    "alpha": ("alpha_grid", _floats),
    "gamma": ("gamma_grid", _floats),
    "tau": ("tau_grid", _floats),
    "seeds": ("seeds", _ints),
    "zero_gamma": ("zero_gamma", _bool),
    "no_virus": ("no_virus", _bool),
    "t_max": ("t_max", int),
    "p_init": ("p_init", float),
    "out": ("out", str),
}


def parse_sweep_spec(text: str) -> SweepSpec:
    """Flat ``key = value`` lines; lists are comma separated, seeds allow ``a-b``."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SPEC_KEYS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        name, conv = _SPEC_KEYS[key]
        try:
            kwargs[name] = conv(value)
        except ValueError as exc:
            raise SpecError(f"line {lineno}: {exc}") from None
    gamma_default = [0.0] if kwargs.get("zero_gamma") else None
    kwargs.setdefault("gamma_grid", gamma_default)
    missing = [k for k in ("n", "alpha_grid", "gamma_grid", "tau_grid", "seeds") if kwargs.get(k) is None]
    if missing:
        raise SpecError(f"missing keys: {', '.join(missing)}")
    return SweepSpec(**kwargs)


def _audit_cost(g: gr.Graph, p: GameParams) -> float:
    """Social cost rebuilt from the hopcount table and a fresh solve."""
    h = gr.hopcounts(g)
    if (h == UNREACHABLE).any():
        return math.inf
    v = np.zeros(g.n) if p.no_virus else steady_state(g, p.tau, p.tol, p.max_iter).v
    return p.alpha * g.link_count + p.hop_weight * float(h.sum()) + float(v.sum())


def run_cell(spec: SweepSpec, alpha: float, gamma: float, tau: float) -> list[list[str]]:
    p = GameParams(alpha, gamma, tau, zero_gamma=spec.zero_gamma, no_virus=spec.no_virus)
    model = CostModel(p, SteadyStateCache())
    n = spec.n
    runs = []
    for seed in spec.seeds:
        res = run_dynamics(n, p, seed, spec.p_init, spec.t_max, model)
        g, own = res.graph, res.ownership
        hops = model.hop_sums(g)
        avg_hop = sum(hops) / (n * (n - 1))
        v_sum = float(model.infection(g).sum())
        J = model.social(g)
        runs.append((seed, g, J, avg_hop, v_sum, is_ad_stable(g, own, p, model), res.status,
                     abs(J - _audit_cost(g, p))))
    if n <= EXACT_POA_MAX_N:
        opt, kind = analysis.optimal_social_cost(n, p, model=model).best_cost, "exact"
    else:
        ref = [gr.star(n), gr.path(n), gr.complete(n)] + [r[1] for r in runs]
        opt, kind = min(model.social(g) for g in ref), "reference"
    rows = []
    for seed, g, J, avg_hop, v_sum, ad, status, audit in runs:
        rows.append([alpha, gamma, tau, seed, g.link_count, avg_hop, v_sum, J, ad,
                     J / opt, kind, status, audit])
    cols = list(zip(*runs))
    mean = lambda xs: float(np.mean([float(x) for x in xs]))
    rows.append([alpha, gamma, tau, "mean", mean(g.link_count for g in cols[1]), mean(cols[3]),
                 mean(cols[4]), mean(cols[2]), mean(cols[5]), mean(J / opt for J in cols[2]),
                 kind, f"{sum(s == 'converged' for s in cols[6])}/{len(runs)}", max(cols[7])])
    return [[fmt(x) for x in row] for row in rows]


def _run_cell_packed(args):
    return run_cell(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> str:
    """The full sweep as CSV text; row order follows the spec, never completion order."""
    jobs = [(spec, a, g, t) for a, g, t in spec.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_packed, jobs))
    else:
        results = [run_cell(*job) for job in jobs]
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    buf.write(f"# n={spec.n} zero_gamma={fmt(spec.zero_gamma)} no_virus={fmt(spec.no_virus)} "
              f"t_max={spec.t_max} p_init={fmt(spec.p_init)}\n")
    if spec.no_virus:
        buf.write("# no_virus: infection probabilities forced to zero (solver bypassed)\n")
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for rows in results:
        for row in rows:
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


POA_COLUMNS = ["tau", "J_path", "J_star", "path_over_star", "star_over_path", "poa", "poa_bound"]


def poa_curve(n: int, alpha: float, taus, zero_gamma: bool = True, gamma: float = 0.0) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    buf.write(f"# n={n} alpha={fmt(alpha)} zero_gamma={fmt(zero_gamma)} gamma={fmt(gamma)}\n")
    buf.write(",".join(POA_COLUMNS) + "\n")
    cache = SteadyStateCache()
    for tau in taus:
        p = GameParams(alpha, gamma, float(tau), zero_gamma=zero_gamma)
        r = analysis.path_star_poa(n, p, CostModel(p, cache))
        try:
            bound = fmt(analysis.path_star_poa_bound(alpha, float(tau)))
        except analysis.GuardError:
            bound = ""
        buf.write(",".join([fmt(float(tau)), fmt(r["J_path"]), fmt(r["J_star"]),
                            fmt(r["path_over_star"]), fmt(r["star_over_path"]),
                            fmt(r["PoA"]), bound]) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    g = gr.read_edge_list(args.graph)
    ss = steady_state(g, args.tau, args.tol)
    lines = [f"{x:.6f}" for x in ss.v]
    lam = gr.spectral_radius(g)
    lines.append(f"# tau_c = {1 / lam:.10g}" if lam > 0 else "# tau_c = undefined (no links)")
    if ss.below_threshold:
        lines.append("# below threshold: all probabilities are zero")
    lines.append(f"# converged={ss.converged} iterations={ss.iterations} residual={ss.residual:.3g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ss.converged else EXIT_CONVERGENCE


def _params(args) -> GameParams:
    return GameParams(args.alpha, args.gamma, args.tau, zero_gamma=args.zero_gamma,
                      no_virus=args.no_virus, tol=args.tol)


def cmd_equilibrium(args) -> int:
    g = gr.read_edge_list(args.graph)
    with open(args.ownership) as fh:
        own = parse_ownership(fh.read(), g)
    p = _params(args)
    model = CostModel(p)
    rep = is_nash_exact(g, own, p, model)
    out = {"alpha": p.alpha, "gamma": p.gamma, "tau": p.tau, "zero_gamma": p.zero_gamma,
           "J": model.social(g), **rep.to_dict()}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_dynamics(args) -> int:
    p = _params(args)
    model = CostModel(p)
    res = run_dynamics(args.n, p, args.seed, args.p_init, args.t_max, model)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("t, node, action, counterpart, J_i_before, J_i_after\n")
            for a in res.actions:
                fh.write(a.format() + "\n")
    g, own = res.graph, res.ownership
    out = {"alpha": p.alpha, "gamma": p.gamma, "tau": p.tau, "seed": args.seed,
           "status": res.status, "slots": res.slots, "L": g.link_count, "edges": g.edges(),
           "owners": [[u, v, o] for (u, v), o in sorted(own.owner_map().items())],
           "J": model.social(g), "ad_stable": is_ad_stable(g, own, p, model)}
    try:
        out["exact_ne"] = is_nash_exact(g, own, p, model).exact_ne
    except BudgetExceeded:
        out["exact_ne"] = None
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        spec = parse_sweep_spec(fh.read())
    if args.zero_gamma:
        spec.zero_gamma = True
    if args.no_virus:
        spec.no_virus = True
    if args.t_max is not None:
        spec.t_max = args.t_max
    if args.seed is not None:
        spec.seeds = [args.seed]
    _emit(run_sweep(spec, args.workers), args.out or spec.out)
    return EXIT_OK


def cmd_poa_curve(args) -> int:
    if not 2 <= args.n <= gr.MAX_NODES:
        raise SpecError(f"n must lie in [2, {gr.MAX_NODES}]")
    steps = int(round((args.tau_max - args.tau_min) / args.tau_step))
    taus = [round(args.tau_min + k * args.tau_step, 12) for k in range(steps + 1)]
    _emit(poa_curve(args.n, args.alpha, taus, args.zero_gamma, args.gamma), args.out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    if args.non_ne:
        p = GameParams(args.alpha, 0.0, args.tau, zero_gamma=True)
        graphs = analysis.trees_without_equilibrium(args.n, p)
    elif args.kind == "trees":
        graphs = gr.enumerate_trees(args.n)
    else:
        graphs = gr.enumerate_connected_graphs(args.n)
    count = 0
    lines = []
    for g in graphs:
        count += 1
        if args.list:
            lines.append(" ".join(f"{u}-{v}" for u, v in g.edges()))
    lines.append(f"# count={count}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vspc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def game_flags(sp, need_tau=True):
        sp.add_argument("--alpha", type=float, required=True)
        sp.add_argument("--gamma", type=float, default=0.0)
        sp.add_argument("--tau", type=float, required=need_tau)
        sp.add_argument("--zero-gamma", action="store_true")
        sp.add_argument("--no-virus", action="store_true")

    sp = sub.add_parser("solve", help="metastable infection probabilities of a graph")
    sp.add_argument("graph")
    sp.add_argument("--tau", type=float, required=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("equilibrium", help="exact Nash and AD-stability check (JSON)")
    sp.add_argument("graph")
    sp.add_argument("ownership")
    game_flags(sp)
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("dynamics", help="run the best-response heuristic once (JSON)")
    sp.add_argument("--n", type=int, required=True)
    game_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t-max", type=int, default=200)
    sp.add_argument("--p-init", type=float, default=0.5)
    sp.add_argument("--trace", help="write the per-action log here")
    sp.set_defaults(func=cmd_dynamics)

    sp = sub.add_parser("sweep", help="dynamics over an (alpha, gamma, tau) grid (CSV)")
    sp.add_argument("spec")
    sp.add_argument("--zero-gamma", action="store_true")
    sp.add_argument("--no-virus", action="store_true")
    sp.add_argument("--t-max", type=int)
    sp.add_argument("--seed", type=int, help="run this single seed instead of the config's")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("poa-curve", help="path/star PoA against tau (CSV)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--zero-gamma", action="store_true")
    sp.add_argument("--tau-min", type=float, default=0.3)
    sp.add_argument("--tau-max", type=float, default=20.0)
    sp.add_argument("--tau-step", type=float, default=0.01)
    sp.set_defaults(func=cmd_poa_curve)

    sp = sub.add_parser("enumerate", help="count or list labelled trees / connected graphs")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--kind", choices=("trees", "connected"), default="trees")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--non-ne", action="store_true",
                    help="only trees without an exact-equilibrium ownership (zero-gamma)")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--tau", type=float, default=5.0)
    sp.set_defaults(func=cmd_enumerate)

    for sp in sub.choices.values():
        sp.add_argument("--tol", type=float, default=1e-12)
        sp.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
