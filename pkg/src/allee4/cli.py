"""Command-line front end.

    allee4 [global flags] <command> [command options]

Global parameter flags (--K --A --a --b --d) override a --config JSON
file.  Results are emitted as JSON (full precision), CSV (trajectories,
sweeps) or SVG (portraits, region maps), always with a reproducibility
manifest.

Exit codes: 0 success, 2 configuration/schema, 3 parameter invariant,
4 I/O, 5 internal consistency (dual-route mismatch or failed certificate).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .hopf import (CertificationError, ConsistencyError, focus_quantities,
                   hopf3_search)
from .localbif import bt_point, cusp_coeffs, ns_coeffs, unfolding_map
from .model import ModelParams, ParamError, equilibria, region, trap_bound
from .render import portrait_svg, region_map_svg
from .sim import (DEFAULT_RTOL, existence_check, find_cycles, integrate,
                  no_cycle_certificate)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PARAMS = 3
EXIT_IO = 4
EXIT_INTERNAL = 5

COMMANDS = ("equilibria", "region", "bt", "unfold", "ns", "hopf", "hopf3",
            "simulate", "cycles", "certify", "sweep", "portrait")

_OPTION_SCHEMA: dict[str, set[str]] = {
    "equilibria": set(),
    "region": set(),
    "bt": set(),
    "unfold": {"fd_step"},
    "ns": set(),
    "hopf": {"order"},
    "hopf3": {"a", "n_edge"},
    "simulate": {"x0", "y0", "t_end", "tol"},
    "cycles": {"n_seed", "tol", "s_min", "s_max"},
    "certify": set(),
    "sweep": {"d_min", "d_max", "n_d", "A_min", "A_max", "n_A", "workers"},
    "portrait": {"orbits", "t_end", "tol", "with_cycles", "n_seed"},
}

_PARAM_KEYS = ("K", "A", "a", "b", "d")


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class RunConfig:
    params: ModelParams | None
    command: str
    options: dict
    output_format: str       # json | csv | svg
    out: str | None


def parse_config(argv: list[str]) -> RunConfig:
    ap = argparse.ArgumentParser(prog="allee4", add_help=True,
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON config file; flags override it")
    for k in _PARAM_KEYS:
        ap.add_argument(f"--{k}", type=float, default=None)
    ap.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="may also come from the config file")
    ap.add_argument("opts", nargs="*", metavar="key=value",
                    help="command options as key=value pairs")
    ns = ap.parse_args(argv)

    file_params: dict = {}
    file_opts: dict = {}
    file_format = None
    file_out = None
    file_command = None
    if ns.config:
        try:
            with open(ns.config) as fh:
                doc = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        for key in doc:
            if key not in ("params", "command", "options", "format", "out"):
                raise ConfigError(f"unknown config key {key!r}")
        file_params = doc.get("params", {})
        if not isinstance(file_params, dict):
            raise ConfigError("config 'params' must be an object")
        for key in file_params:
            if key not in _PARAM_KEYS:
                raise ConfigError(f"unknown parameter key {key!r} in config")
        file_opts = doc.get("options", {})
        file_format = doc.get("format")
        file_out = doc.get("out")
        file_command = doc.get("command")

    command = ns.command or file_command
    if command not in COMMANDS:
        raise ConfigError(f"no command given (choose from {', '.join(COMMANDS)})")
    schema = _OPTION_SCHEMA[command]
    options = dict(file_opts)
    for item in ns.opts:
        if "=" not in item:
            raise ConfigError(f"command option {item!r} is not key=value")
        k, v = item.split("=", 1)
        options[k] = v
    for k in options:
        if k not in schema:
            raise ConfigError(f"unknown option {k!r} for command {command!r} "
                              f"(allowed: {sorted(schema) or 'none'})")

    pdict = dict(file_params)
    for k in _PARAM_KEYS:
        v = getattr(ns, k)
        if v is not None:
            pdict[k] = v
    params = None
    if len(pdict) == 5:
        params = ModelParams(**{k: float(v) for k, v in pdict.items()})
    elif pdict and command not in ("hopf3", "bt", "unfold", "ns"):
        missing = [k for k in _PARAM_KEYS if k not in pdict]
        raise ConfigError(f"incomplete parameters: missing {missing}")
    elif pdict:
        # bt/unfold/ns/hopf3 only need a subset; keep what was given
        params = _partial_params(pdict)

    fmt = ns.format or file_format or "json"
    if fmt not in ("json", "csv", "svg"):
        raise ConfigError(f"unknown format {fmt!r}")
    return RunConfig(params=params, command=command, options=options,
                     output_format=fmt, out=ns.out or file_out)


class _Partial:
    def __init__(self, d):
        self._d = d

    def __getattr__(self, k):
        try:
            return self._d[k]
        except KeyError:
            raise ConfigError(f"command needs parameter --{k}")


def _partial_params(pdict):
    if len(pdict) == 5:
        return ModelParams(**pdict)
    return _Partial(pdict)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "value") and obj.__class__.__name__ in ("Region", "Stability"):
        return obj.value
    return obj


def _manifest(cfg: RunConfig, extra=None):
    m = {
        "package": "allee4",
        "version": __version__,
        "command": cfg.command,
        "options": _jsonable(cfg.options),
        "format": cfg.output_format,
        "tolerances": {"rtol_default": DEFAULT_RTOL, "atol_default": 1e-12},
    }
    if isinstance(cfg.params, ModelParams):
        m["params"] = dataclasses.asdict(cfg.params)
    if extra:
        m.update(extra)
    return m


def _emit_text(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        print(f"allee4: cannot write {path}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def emit(result, cfg: RunConfig, manifest_extra=None, csv_rows=None,
         csv_header=None, svg: str | None = None):
    """Serialize per the requested format; sidecar manifest for csv/svg."""
    manifest = _manifest(cfg, manifest_extra)
    if cfg.output_format == "json":
        doc = {"result": _jsonable(result), "manifest": manifest}
        _emit_text(json.dumps(doc, indent=2, allow_nan=True) + "\n", cfg.out)
        return
    if cfg.output_format == "csv":
        if csv_rows is None:
            raise ConfigError(f"command {cfg.command!r} has no CSV form")
        lines = [",".join(csv_header)]
        lines += [",".join(repr(float(v)) if isinstance(v, (int, float, np.floating)) else str(v)
                           for v in row) for row in csv_rows]
        _emit_text("\n".join(lines) + "\n", cfg.out)
    else:
        if svg is None:
            raise ConfigError(f"command {cfg.command!r} has no SVG form")
        _emit_text(svg, cfg.out)
    if cfg.out:
        _emit_text(json.dumps({"manifest": manifest}, indent=2) + "\n",
                   cfg.out + ".manifest.json")


def _cmd_equilibria(cfg):
    reps = equilibria(cfg.params)
    rows = [(e.kind, e.location[0], e.location[1],
             e.eigenvalues[0].real, e.eigenvalues[0].imag,
             e.eigenvalues[1].real, e.eigenvalues[1].imag,
             e.stability.kind.value) for e in reps]
    emit(reps, cfg, csv_rows=rows,
         csv_header=("kind", "x", "y", "re1", "im1", "re2", "im2", "stability"))


def _cmd_region(cfg):
    lab = region(cfg.params)
    emit({"region": lab.region.value, "detail": lab.detail,
          "trap_bound": trap_bound(cfg.params)}, cfg)


def _cmd_bt(cfg):
    a, K = cfg.params.a, cfg.params.K
    base = bt_point(a, K)
    result = {"point": _jsonable(base)}
    if base.feasible:
        p = ModelParams(K=K, A=base.A_star, a=a, b=base.b_star, d=base.d_m)
        result["cusp"] = _jsonable(cusp_coeffs(p))
    emit(result, cfg)


def _cmd_unfold(cfg):
    fd = cfg.options.get("fd_step")
    rep = unfolding_map(cfg.params.a, cfg.params.K,
                        fd_step=float(fd) if fd is not None else None)
    emit(rep, cfg)


def _cmd_ns(cfg):
    emit(ns_coeffs(cfg.params.a, cfg.params.K, cfg.params.b), cfg)


def _cmd_hopf(cfg):
    order = int(cfg.options.get("order", 8))
    emit(focus_quantities(cfg.params, order=order), cfg)


def _cmd_hopf3(cfg):
    a = float(cfg.options.get("a", 0.00025573))
    n_edge = int(cfg.options.get("n_edge", 101))
    emit(hopf3_search(a, n_edge=n_edge), cfg)


def _cmd_simulate(cfg):
    o = cfg.options
    tr = integrate(cfg.params, float(o.get("x0", 1.0)), float(o.get("y0", 1.0)),
                   float(o.get("t_end", 100.0)), tol=float(o.get("tol", DEFAULT_RTOL)))
    rows = [(t, x, y) for t, x, y in tr.samples]
    svg = portrait_svg(cfg.params, trajectories=[tr])
    emit({"termination": tr.termination, "converged_to": tr.converged_to,
          "n_samples": len(tr.samples),
          "samples": [list(map(float, r)) for r in tr.samples]},
         cfg, csv_rows=rows, csv_header=("t", "x", "y"), svg=svg)


def _cmd_cycles(cfg):
    o = cfg.options
    rep = find_cycles(cfg.params,
                      s_min=float(o["s_min"]) if "s_min" in o else None,
                      s_max=float(o["s_max"]) if "s_max" in o else None,
                      n_seed=int(o.get("n_seed", 200)),
                      tol=float(o.get("tol", DEFAULT_RTOL)))
    svg = portrait_svg(cfg.params, cycles=rep)
    rows = [(c.s, c.period, c.stability, c.floquet, c.residual) for c in rep.cycles]
    result = {"count": rep.count, "strip": rep.strip,
              "section": {"alpha": rep.section.alpha, "y_level": rep.section.y_level},
              "cycles": _jsonable(rep.cycles),
              "no_return_windows": rep.no_return_windows}
    emit(result, cfg, manifest_extra={"n_seed": int(o.get("n_seed", 200))},
         csv_rows=rows, csv_header=("s", "period", "stability", "floquet", "residual"),
         svg=svg)


def _cmd_certify(cfg):
    emit({"no_cycle_certificate": no_cycle_certificate(cfg.params),
          "existence_check": existence_check(cfg.params)}, cfg)


def _cmd_sweep(cfg):
    o = cfg.options
    p = cfg.params
    d0 = float(o.get("d_min", 0.5 * p.d))
    d1 = float(o.get("d_max", 1.5 * p.d))
    A0 = float(o.get("A_min", -0.9 * p.K))
    A1 = float(o.get("A_max", 0.9 * p.K))
    n_d = int(o.get("n_d", 60))
    n_A = int(o.get("n_A", 60))
    workers = int(o.get("workers", 1))
    ds = np.linspace(d0, d1, n_d)
    As = np.linspace(A0, A1, n_A)

    def classify(i):
        row = []
        for j in range(n_A):
            try:
                q = ModelParams(K=p.K, A=float(As[j]), a=p.a, b=p.b, d=float(ds[i]))
                row.append(region(q).region.value)
            except ParamError:
                row.append("invalid")
        return row

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            grid = list(ex.map(classify, range(n_d)))
    else:
        grid = [classify(i) for i in range(n_d)]
    rows = [(float(ds[i]), float(As[j]), grid[i][j])
            for i in range(n_d) for j in range(n_A)]
    svg = region_map_svg(p, (d0, d1), (A0, A1), n_d, n_A,
                         grid=[[g if g != "invalid" else "V0_4" for g in row] for row in grid])
    emit({"d": list(map(float, ds)), "A": list(map(float, As)), "region": grid},
         cfg, csv_rows=rows, csv_header=("d", "A", "region"), svg=svg)


def _cmd_portrait(cfg):
    o = cfg.options
    t_end = float(o.get("t_end", 50.0))
    tol = float(o.get("tol", 1e-9))
    trajectories = []
    for chunk in str(o.get("orbits", "")).split(";"):
        if not chunk.strip():
            continue
        x0, y0 = (float(v) for v in chunk.split(","))
        trajectories.append(integrate(cfg.params, x0, y0, t_end, tol=tol))
    cycles = None
    if str(o.get("with_cycles", "")).lower() in ("1", "true", "yes"):
        cycles = find_cycles(cfg.params, n_seed=int(o.get("n_seed", 120)), tol=tol)
    svg = portrait_svg(cfg.params, trajectories=trajectories, cycles=cycles)
    emit({"orbits": len(trajectories),
          "cycles": None if cycles is None else cycles.count}, cfg, svg=svg)


_DISPATCH = {
    "equilibria": _cmd_equilibria,
    "region": _cmd_region,
    "bt": _cmd_bt,
    "unfold": _cmd_unfold,
    "ns": _cmd_ns,
    "hopf": _cmd_hopf,
    "hopf3": _cmd_hopf3,
    "simulate": _cmd_simulate,
    "cycles": _cmd_cycles,
    "certify": _cmd_certify,
    "sweep": _cmd_sweep,
    "portrait": _cmd_portrait,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as e:
        print(f"allee4: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except ParamError as e:
        print(f"allee4: invalid parameters: {e}", file=sys.stderr)
        return EXIT_PARAMS
    except SystemExit as e:  # argparse --help or usage error
        return 0 if e.code == 0 else EXIT_SCHEMA
    try:
        _DISPATCH[cfg.command](cfg)
    except ConfigError as e:
        print(f"allee4: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except ParamError as e:
        print(f"allee4: invalid parameters: {e}", file=sys.stderr)
        return EXIT_PARAMS
    except (ConsistencyError, CertificationError) as e:
        print(f"allee4: internal consistency: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as e:
        print(f"allee4: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as e:
        return int(e.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
