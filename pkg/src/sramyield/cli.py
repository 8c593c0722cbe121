"""``sramyield`` command line: generate, characterize, yield, optimize, bench.

Exit codes: 0 success, 2 usage error, 3 unresolved statistical or
optimization run, 4 backend failure (simulator missing or failing).
"""

from __future__ import annotations

import dataclasses
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import __version__, kernels
from .circuit_model import (
    ConfigError,
    LeakagePolicy,
    SramArrayConfig,
    default_config,
    load_config,
    sample_matrix,
    sample_variations,
)
from .report import OutputDir, make_manifest

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNRESOLVED = 3
EXIT_BACKEND = 4


class BackendFailure(click.ClickException):
    exit_code = EXIT_BACKEND


class Unresolved(Exception):
    pass


def _parse_pattern(text: str | None):
    if text is None or text in ("all_zero", "all_one"):
        return text
    if set(text) <= {"0", "1"}:
        return tuple(int(c) for c in text)
    raise click.BadParameter("use all_zero, all_one or a 0/1 string", param_hint="--idle-pattern")


def config_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="YAML/JSON config file (SI units); flags below override it."),
        click.option("--rows", type=click.IntRange(min=1), help="Array rows (default 32)."),
        click.option("--cols", type=click.IntRange(min=1), help="Array columns (default 1)."),
        click.option("--vdd", type=float, help="Supply voltage in volts."),
        click.option("--parasitics/--no-parasitics", default=None,
                     help="Distributed bitline/wordline RC (default on)."),
        click.option("--peripherals/--no-peripherals", default=None,
                     help="Sense amp, drivers and precharge with their own variation (default off)."),
        click.option("--idle-pattern", help="Idle-cell data: all_zero, all_one or a bit string (rows-1 bits)."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def common_options(fn):
    fn = click.option("--out", "out_dir", default=".", show_default=True, type=click.Path(file_okay=False),
                      help="Output directory.")(fn)
    fn = click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1),
                      help="Parallel evaluations; results do not depend on it.")(fn)
    return fn


def build_config(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern) -> SramArrayConfig:
    try:
        if config_path:
            cfg = load_config(config_path)
        else:
            cfg = default_config(rows or 32, cols or 1, peripherals=bool(peripherals),
                                 parasitics=True if parasitics is None else parasitics)
            rows = cols = None
            parasitics = peripherals = None
        changes = {}
        if rows is not None:
            changes["rows"] = rows
        if cols is not None:
            changes["cols"] = cols
        if vdd is not None:
            changes["vdd"] = vdd
        if parasitics is not None:
            changes["parasitics"] = dataclasses.replace(cfg.parasitics, enabled=parasitics)
        if peripherals is not None:
            changes["peripherals"] = default_config(1, 1, peripherals=True).peripherals if peripherals else None
        pat = _parse_pattern(idle_pattern)
        if pat is not None:
            changes["leakage"] = LeakagePolicy(pat, cfg.leakage.i_leak_per_cell, cfg.leakage.vdd_exponent)
        return dataclasses.replace(cfg, **changes) if changes else cfg
    except ConfigError as exc:
        raise click.UsageError(f"invalid config: {exc}") from None


def _pmap(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _spice_handle():
    from .spice_adapter import handle_from_env, probe

    h = handle_from_env()
    pr = probe(h)
    if not pr.available:
        raise BackendFailure(f"SPICE backend unavailable: {pr.diagnostic} "
                             "(set SRAMYIELD_SPICE to the simulator executable)")
    h.version = h.version or pr.version
    return h


def _backend_name(backend: str, handle=None) -> str:
    if backend == "surrogate" or handle is None:
        return backend
    return f"spice:{getattr(handle, 'version', '') or handle.executable}"


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="sramyield")
def main():
    """SRAM array netlists, rare-event yield estimation and cell sizing optimization."""


# ---------------------------------------------------------------------------
# generate

@main.command()
@config_options
@common_options
@click.option("--sample", default="nominal", show_default=True,
              help="'nominal' or a Monte Carlo sample index to bake into the netlists.")
@click.option("--seed", default=0, show_default=True, type=int, help="Variation seed for --sample/--mc-samples.")
@click.option("--mc-samples", default=0, show_default=True, type=click.IntRange(min=0),
              help="Also write a table of this many Monte Carlo samples.")
@click.option("--decks/--no-decks", default=True, show_default=True,
              help="Write the SNM and transient analysis decks besides the array netlist.")
def generate(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern, out_dir, jobs,
             sample, seed, mc_samples, decks):
    """Write the array netlist (.sp), analysis decks and Monte Carlo tables."""
    from .netlist import DeckKind, emit_array, emit_deck, emit_mc_tables
    from .report import spice_text

    cfg = build_config(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern)
    if sample == "nominal":
        z = "nominal"
    else:
        try:
            idx = int(sample)
        except ValueError:
            raise click.BadParameter("must be 'nominal' or an integer", param_hint="--sample") from None
        z = sample_matrix(cfg, seed, idx, 1)[0]
    man = make_manifest("generate", config_hash=cfg.hash(), seed=seed, backend="netlist",
                        options={"sample": sample, "mc_samples": mc_samples, "decks": decks})
    out = OutputDir(out_dir, man)
    arr = emit_array(cfg, z)
    out.write("array", ".sp", spice_text(man, arr.text))
    deck_manifests = {}
    if decks:
        zz = None if isinstance(z, str) else z
        for kind in DeckKind:
            d = emit_deck(cfg, kind, zz)
            out.write(f"deck_{kind.value}", ".sp", spice_text(man, d.text))
            deck_manifests[kind.value] = d.manifest
    if mc_samples:
        out.write("mc_samples", ".mc.csv", f"# manifest: {_line(man)}\n" +
                  emit_mc_tables(cfg, sample_variations(cfg, seed, mc_samples)))
    body = {"netlist": arr.manifest, "decks": deck_manifests,
            "files": [p.name for p in out.written]}
    out.json("generate", body)
    click.echo(_json_stdout(man, {"netlist": arr.manifest, "files": [p.name for p in out.written]}))


def _line(man):
    from .report import manifest_line

    return manifest_line(man)


def _json_stdout(man, body) -> str:
    from .report import json_text

    return json_text(man, body).rstrip("\n")


# ---------------------------------------------------------------------------
# characterize

def _parse_sweep(text: str) -> tuple[str, list[float]]:
    if "=" not in text:
        raise click.BadParameter("expected rows=... or vdd=...", param_hint="--sweep")
    key, vals = text.split("=", 1)
    key = key.strip().lower()
    if key not in ("rows", "vdd"):
        raise click.BadParameter("sweep variable must be rows or vdd", param_hint="--sweep")
    try:
        nums = [float(v) for v in vals.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter("values must be numbers", param_hint="--sweep") from None
    if not nums:
        raise click.BadParameter("empty sweep", param_hint="--sweep")
    if key == "rows":
        if any(v < 1 or v != int(v) for v in nums):
            raise click.BadParameter("rows must be positive integers", param_hint="--sweep")
        nums = [int(v) for v in nums]
    elif any(v <= 0 for v in nums):
        raise click.BadParameter("vdd must be positive", param_hint="--sweep")
    return key, nums


@main.command()
@config_options
@common_options
@click.option("--sweep", default="rows=8,16,32,64,128,256", show_default=True,
              help="rows=<list> or vdd=<list>, comma separated.")
@click.option("--backend", type=click.Choice(["surrogate", "spice"]), default="surrogate", show_default=True)
@click.option("--curves/--no-curves", default=False, help="Also dump butterfly curves and a write trajectory.")
def characterize(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern, out_dir, jobs,
                 sweep, backend, curves):
    """Nominal metrics over a rows or supply-voltage sweep, as plot-ready CSV.

    A rows sweep adds the read delay with parasitics removed and the ratio;
    a vdd sweep adds the read delay for both idle patterns and their gap.
    """
    from .surrogate import evaluate

    cfg = build_config(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern)
    key, values = _parse_sweep(sweep)
    handle = None
    if backend == "spice":
        from .spice_adapter import SpiceError, evaluate_via_spice

        handle = _spice_handle()

        def ev(c):
            try:
                return evaluate_via_spice(c, None, handle)
            except SpiceError as exc:
                raise BackendFailure(str(exc)) from None
    else:
        ev = evaluate

    def point(v):
        try:
            if key == "rows":
                c = dataclasses.replace(cfg, rows=v)
                m = ev(c)
                t_off = ev(dataclasses.replace(c, parasitics=dataclasses.replace(c.parasitics, enabled=False))).t_read
                return {"rows": v, **m.to_dict(), "t_read_no_parasitics": t_off,
                        "parasitic_ratio": m.t_read / t_off}
            c = dataclasses.replace(cfg, vdd=v)
            m = ev(c)
            t = {}
            for pat in ("all_zero", "all_one"):
                cp = dataclasses.replace(c, leakage=dataclasses.replace(c.leakage, idle_pattern=pat))
                t[pat] = ev(cp).t_read
            return {"vdd": v, **m.to_dict(), "t_read_all_zero": t["all_zero"], "t_read_all_one": t["all_one"],
                    "idle_delay_gap": t["all_zero"] - t["all_one"]}
        except ConfigError as exc:
            raise click.UsageError(f"invalid sweep point {key}={v}: {exc}") from None

    man = make_manifest("characterize", config_hash=cfg.hash(), seed=None, backend=_backend_name(backend, handle),
                        options={"sweep": {key: values}, "curves": curves})
    out = OutputDir(out_dir, man)
    t0 = time.perf_counter()
    rows_out = _pmap(point, values, jobs)
    out.csv("characterize", rows_out)
    if curves:
        from .surrogate.devices import cell_devices
        from .surrogate.snm import MODES, cell_butterfly
        from .surrogate.timing import write_trajectory

        crow = []
        for mode in MODES:
            bc = cell_butterfly(cfg, mode)
            for g, a, b in zip(bc.grid, bc.lobe1, bc.lobe2):
                crow.append({"mode": mode, "v_in": float(g), "lobe1": float(a), "lobe2": float(b)})
        out.csv("butterfly", crow)
        tr = write_trajectory(cfg, cell_devices(cfg, np.zeros((1, cfg.variation_dim))))
        trow = [{"node": "QB", "t": float(t), "v": float(v)} for t, v in zip(tr["t_qb"], tr["v_qb"])]
        trow += [{"node": "Q", "t": float(t), "v": float(v)} for t, v in zip(tr["t_q"], tr["v_q"])]
        out.csv("write_trajectory", trow)
    out.json("characterize", {"sweep": key, "points": len(values), "files": [p.name for p in out.written]})
    out.timing("characterize", {"wall_s": time.perf_counter() - t0, "jobs": jobs, "kernels": kernels.BACKEND})
    click.echo(_json_stdout(man, {"files": [p.name for p in out.written]}))


# ---------------------------------------------------------------------------
# yield

@main.command("yield")
@config_options
@common_options
@click.option("--method", required=True, type=click.Choice(["mc", "mnis", "ais", "acs", "hscs"]),
              help="Estimator.")
@click.option("--oracle", type=click.Choice(["linear3", "twotail35", "planted2sparse", "dense"]),
              help="Analytic limit state with known failure probability instead of the circuit.")
@click.option("--oracle-dim", type=click.IntRange(min=1), help="Dimension of the oracle (default per oracle).")
@click.option("--metric", default="t_write", show_default=True,
              type=click.Choice(["t_write", "t_read", "hsnm", "rsnm", "wsnm", "pass_fail"]),
              help="Circuit metric whose spec violation counts as failure.")
@click.option("--threshold", type=float, help="Spec for --metric in SI units (default: timing spec / SNM floor).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--fom-target", default=0.1, show_default=True, type=float, help="Stop when std/p falls below this.")
@click.option("--max-sims", default=1_000_000, show_default=True, type=click.IntRange(min=1))
@click.option("--min-failures", default=10, show_default=True, type=click.IntRange(min=0))
@click.option("--array-cells", type=click.IntRange(min=1),
              help="Also report array yield for this many independent copies of the limit state.")
@click.option("--backend", type=click.Choice(["surrogate", "spice"]), default="surrogate", show_default=True)
def yield_cmd(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern, out_dir, jobs, method,
              oracle, oracle_dim, metric, threshold, seed, fom_target, max_sims, min_failures, array_cells,
              backend):
    """Estimate a failure probability and write the report and convergence trace."""
    from .yield_engine import (
        RegionNotFoundError,
        ShiftNotFoundError,
        StoppingRule,
        SurrogateLimitState,
        make_oracle,
        run,
        yield_from_pfail,
    )

    if oracle:
        cfg_hash = None
        limit = make_oracle(oracle, oracle_dim)
        backend_name = f"oracle:{oracle}"
    else:
        cfg = build_config(config_path, rows or 1, cols or 1, vdd, parasitics, peripherals, idle_pattern)
        cfg_hash = cfg.hash()
        if backend == "spice":
            from .spice_adapter import SpiceLimitState

            handle = _spice_handle()
            limit = SpiceLimitState(cfg, handle, metric, threshold)
        else:
            handle = None
            limit = SurrogateLimitState(cfg, metric, threshold)
        backend_name = _backend_name(backend, handle)
    stop = StoppingRule(fom_target, max_sims, min_failures)
    man = make_manifest("yield", config_hash=cfg_hash, seed=seed, backend=backend_name,
                        options={"method": method, "metric": None if oracle else metric,
                                 "threshold": threshold, "dim": limit.dim, "fom_target": fom_target,
                                 "max_sims": max_sims, "min_failures": min_failures,
                                 "array_cells": array_cells})
    out = OutputDir(out_dir, man)
    t0 = time.perf_counter()
    try:
        est = run(method, limit, stop, seed, jobs=jobs)
    except (ShiftNotFoundError, RegionNotFoundError) as exc:
        out.json("yield", {"status": "unresolved", "error": str(exc)})
        click.echo(f"unresolved: {exc}", err=True)
        sys.exit(EXIT_UNRESOLVED)
    except Exception as exc:
        from .spice_adapter import SpiceError

        if isinstance(exc, SpiceError):
            raise BackendFailure(str(exc)) from None
        raise
    body = est.summary()
    if getattr(limit, "p_true", None) is not None:
        body["p_true"] = limit.p_true
        body["within_3_std"] = abs(est.p_fail - limit.p_true) <= 3 * est.std_p_fail
    if array_cells:
        body["array_yield"] = yield_from_pfail(min(max(est.p_fail, 0.0), 1.0), array_cells)
    body["diagnostics"] = {k: v for k, v in est.diagnostics.items() if k != "proposal"}
    out.json("yield", body)
    out.csv("yield_trace", [{"n_sims": n, "p_fail": p, "estimator_fom": f} for n, p, f in est.trace],
            ["n_sims", "p_fail", "estimator_fom"])
    out.timing("yield", {"wall_s": time.perf_counter() - t0, "jobs": jobs, "kernels": kernels.BACKEND})
    click.echo(_json_stdout(man, est.summary()))
    if est.status == "unresolved":
        sys.exit(EXIT_UNRESOLVED)


# ---------------------------------------------------------------------------
# optimize

@main.command()
@config_options
@common_options
@click.option("--algo", required=True, help="One of cbo, pso, sa, smbo.")
@click.option("--budget", default=400, show_default=True, type=click.IntRange(min=1),
              help="Distinct design evaluations.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--control/--no-control", default=False,
              help="Optimize on the simplified model (no parasitics/peripherals), then re-evaluate "
                   "the winner on the full model.")
@click.option("--robust", default=0, show_default=True, type=click.IntRange(min=0),
              help="Also require this many Monte Carlo samples per design to pass all checks.")
@click.option("--multi-objective", type=click.Choice(["power-snm", "area-snm", "area-power"]),
              help="CBO only: hypervolume-driven search on this objective pair.")
@click.option("--backend", type=click.Choice(["surrogate", "spice"]), default="surrogate", show_default=True)
def optimize(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern, out_dir, jobs, algo,
             budget, seed, control, robust, multi_objective, backend):
    """Size the bitcell for the design FoM under the timing constraints."""
    from .optimizer import ALGORITHMS, PAIRS, EvalBudget, control_study, pareto_extract
    from .optimizer import optimize as run_opt
    from .optimizer.algorithms import OUT_OF_SCOPE

    name = algo.lower()
    if name in OUT_OF_SCOPE:
        raise click.UsageError(f"--algo {algo}: out of scope; {OUT_OF_SCOPE[name]}")
    if name not in ALGORITHMS:
        raise click.UsageError(f"--algo must be one of {', '.join(ALGORITHMS)}")
    if multi_objective and name != "cbo":
        raise click.UsageError("--multi-objective is only supported with --algo cbo")
    cfg = build_config(config_path, rows, cols, vdd, parasitics, peripherals, idle_pattern)
    be = handle = None
    if backend == "spice":
        from .spice_adapter import spice_backend

        handle = _spice_handle()
        be = spice_backend(handle)
    eb = EvalBudget(budget, robust, seed)
    man = make_manifest("optimize", config_hash=cfg.hash(), seed=seed, backend=_backend_name(backend, handle),
                        options={"algo": name, "budget": budget, "control": control, "robust": robust,
                                 "multi_objective": multi_objective})
    out = OutputDir(out_dir, man)
    t0 = time.perf_counter()
    kw = {"multi_objective": multi_objective} if multi_objective else {}
    try:
        if control:
            rep = control_study(cfg, name, eb, seed, jobs=jobs, backend=be)
            res = rep.result
        else:
            rep = None
            res = run_opt(cfg, name, eb, seed, jobs=jobs, backend=be, **kw)
    except Exception as exc:
        from .spice_adapter import SpiceError

        cause = exc.__cause__ if exc.__cause__ is not None else exc
        if isinstance(cause, SpiceError):
            raise BackendFailure(str(cause)) from None
        raise
    body = res.summary()
    if rep is not None:
        body["control"] = {"re-evaluated under full model": rep.summary()}
    pareto_files = {}
    for pair in PAIRS:
        ps = res.pareto if (res.pareto is not None and pair == multi_objective) else pareto_extract(res.history, pair)
        p = out.csv(f"pareto_{pair}", [r.row() for r in ps.members],
                    None if ps.members else ["eval"])
        pareto_files[pair] = {"file": p.name, "size": len(ps)}
    body["pareto"] = pareto_files
    out.csv("history", [r.row() for r in res.history])
    out.json("optimize", body)
    out.timing("optimize", {"wall_s": time.perf_counter() - t0, "jobs": jobs, "kernels": kernels.BACKEND})
    click.echo(_json_stdout(man, {k: body[k] for k in ("algorithm", "status", "n_evals", "baseline_fom",
                                                        "best_fom")}))
    if res.status == "unresolved":
        sys.exit(EXIT_UNRESOLVED)


# ---------------------------------------------------------------------------
# bench

@main.command()
@common_options
@click.option("--size", default=100_000, show_default=True, type=click.IntRange(min=1000))
@click.option("--repeats", default=5, show_default=True, type=click.IntRange(min=1))
def bench(out_dir, jobs, size, repeats):
    """Time compiled vs numpy kernels; agreement goes to the report, timings to the sidecar."""
    from .bench import run_bench

    man = make_manifest("bench", config_hash=None, seed=0, backend="kernels",
                        options={"size": size, "repeats": repeats})
    out = OutputDir(out_dir, man)
    report, timings = run_bench(size, repeats)
    out.json("bench", report)
    out.timing("bench", {"jobs": jobs, "kernels": timings})
    click.echo(_json_stdout(man, report))
    for k, t in timings.items():
        extra = f"  cython {t['cython_s'] * 1e3:8.2f} ms  speedup {t['speedup']:.1f}x" if "cython_s" in t else ""
        click.echo(f"{k:14s} python {t['python_s'] * 1e3:8.2f} ms{extra}", err=True)


@main.command()
@click.pass_context
def manual(ctx):
    """Print the help text of every command."""
    parent = ctx.parent
    click.echo(parent.get_help())
    for name in sorted(main.commands):
        cmd = main.commands[name]
        sub = click.Context(cmd, info_name=name, parent=parent)
        click.echo("\n" + "=" * 72 + f"\nsramyield {name}\n" + "=" * 72)
        click.echo(cmd.get_help(sub))


if __name__ == "__main__":  # pragma: no cover
    main()
