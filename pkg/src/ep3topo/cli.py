"""Command-line front end.

Every command builds a :class:`RunConfig`, which can be saved with
``--save-config`` and replayed with ``ep3topo --config FILE``.  Data go to
``--output`` as CSV or as a JSON envelope ``{"meta": ..., "rows": [...]}``;
a one-line summary is printed to standard output.

Exit status is 0 on success, 2 for an invalid configuration and 3 for a
numerical failure.  Failures also print a JSON error record to standard
error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ExtractionError, SymmetryFitError, extract_eigenenergies,
                       fit_symmetric_parametrization, pairwise_concurrence,
                       reduced_pair_state, wootters_concurrence, write_extraction_csv)
from .dynamics import (EXPERIMENT, IntegrationError, design_modulation, evolve_modulated,
                       evolve_nh, population_rms)
from .io import format_float
from .model import build_chain_hamiltonian, three_mode_chain
from .polynomials import ConvergenceError
from .spectra import (classify_point, eigenvector_for, locate_ep3, scan_spectral_map,
                      write_map_csv)
from .topology import (LoopKind, ParameterLoop, ResultantZeroError,
                       RealnessError, winding_number, write_winding_trace_csv)

__all__ = ["RunConfig", "parse_loop_spec", "run", "main", "WORKERS_ENV", "COMMANDS"]

COMMANDS = ("spectrum", "eps", "winding", "evolve", "modulated", "extract",
            "concurrence", "arcs")
FORMATS = ("csv", "json")
WORKERS_ENV = "EP3TOPO_WORKERS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# parameters that carry a rate or coupling and are scaled by --mhz2pi
_RATE_KEYS = {"kappa", "lambda1", "lambda2", "g_b", "g_r", "delta_b", "delta_r",
              "lambda1_min", "lambda1_max", "lambda2_min", "lambda2_max"}


class ConfigError(ValueError):
    """Invalid command-line or JSON configuration."""


@dataclass
class RunConfig:
    """One reproducible invocation: command, parameters, output target."""

    command: str
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be a mapping")
        for key, value in self.params.items():
            _check_value(key, value)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params,
                           "output_path": self.output_path, "format": self.format},
                          sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - {"command", "params", "output_path", "format"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in doc:
            raise ConfigError("config has no command")
        return cls(doc["command"], doc.get("params", {}), doc.get("output_path"),
                   doc.get("format", "csv"))


def _check_value(key, value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ConfigError(f"parameter {key} must be finite, got {value!r}")
        return
    if isinstance(value, list):
        for v in value:
            _check_value(key, v)
        return
    raise ConfigError(f"parameter {key} has unsupported type {type(value).__name__}")


# ---------------------------------------------------------------- parsing

def parse_loop_spec(text: str) -> ParameterLoop:
    """Loop from ``square:<m>``, ``theta:<m>:<n>`` or ``polyline:<file or JSON>``.

    For ``theta`` the integer is the number of samples per quarter turn used
    as the starting grid of the winding computation.
    """
    kind, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ConfigError(f"malformed loop spec {text!r}")
    if kind == "square":
        return _checked_loop(LoopKind.SQUARE, rest)
    if kind == "theta":
        m, sep, n = rest.partition(":")
        if not sep:
            raise ConfigError(f"theta loop needs theta:<lambda_m>:<n_samples>, got {text!r}")
        _positive_int(n, "theta sample count")
        return _checked_loop(LoopKind.THETA, m)
    if kind == "polyline":
        source = rest.strip()
        if not source.startswith("["):
            try:
                source = Path(source).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read polyline file {rest!r}: {exc}") from None
        try:
            vertices = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"polyline is not a JSON array: {exc}") from None
        try:
            return ParameterLoop.polyline(vertices)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown loop kind {kind!r}")


def _checked_loop(kind, text):
    try:
        m = float(text)
        return ParameterLoop(kind, lambda_m=m)
    except ValueError as exc:
        raise ConfigError(f"invalid lambda_m {text!r}: {exc}") from None


def _positive_int(text, what):
    try:
        n = int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be an integer, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"{what} must be positive, got {n}")
    return n


def _theta_samples(spec: str) -> int | None:
    if spec.startswith("theta:"):
        return _positive_int(spec.split(":")[2], "theta sample count")
    return None


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(v.replace(" ", "")) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse amplitudes {text!r}") from None


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


# ---------------------------------------------------------------- commands

@dataclass
class _Result:
    summary: str
    csv_text: str | None = None
    meta: dict = field(default_factory=dict)


def _p(cfg: RunConfig, key, default=None, required=False):
    # defaults are already in 1/us; only user-supplied rates are converted
    if key in cfg.params and cfg.params[key] is not None:
        value = cfg.params[key]
    elif required:
        raise ConfigError(f"{cfg.command} needs parameter {key}")
    else:
        return default
    if key in _RATE_KEYS and cfg.params.get("mhz2pi"):
        try:
            value = 2 * math.pi * float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key} must be a number, got {value!r}") from None
    return value


def _num(cfg, key, default=None, required=False, positive=False, nonneg=False):
    value = _p(cfg, key, default, required)
    if value is None:
        return None
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"parameter {key} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"parameter {key} must be positive, got {value}")
    if nonneg and value < 0:
        raise ConfigError(f"parameter {key} must be non-negative, got {value}")
    return value


def _grid(cfg, axis):
    lo = _num(cfg, f"{axis}_min", required=True)
    hi = _num(cfg, f"{axis}_max", required=True)
    n = _positive_int(cfg.params.get(f"{axis}_points", 0), f"{axis}_points")
    if not hi > lo:
        raise ConfigError(f"{axis} grid must have positive extent")
    if n < 2:
        raise ConfigError(f"{axis} grid needs at least 2 points")
    return np.linspace(lo, hi, n)


def _unit_note(cfg):
    return " (inputs in MHz, multiplied by 2pi)" if cfg.params.get("mhz2pi") else ""


def _cmd_spectrum(cfg, arcs=False):
    kappa = _num(cfg, "kappa", required=True, nonneg=True)
    tol = _num(cfg, "tol", positive=True)
    records = scan_spectral_map(kappa, _grid(cfg, "lambda1"), _grid(cfg, "lambda2"),
                                tol=tol, workers=_workers())
    n_iso = sum(r.isofrequency for r in records)
    n_if = sum(r.ifermi for r in records)
    if arcs:
        records = [r for r in records if r.isofrequency or r.ifermi]
    summary = (f"points={len(records)}, isofrequency={n_iso}, ifermi={n_if}"
               + _unit_note(cfg))
    return _Result(summary, write_map_csv(records))


def _cmd_eps(cfg):
    kappa = _num(cfg, "kappa", required=True, positive=True)
    points = locate_ep3(kappa)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("lambda1", "lambda2", "re_E", "im_E", "min_gap"))
    for l1, l2 in points:
        c = classify_point(l1, l2, kappa)
        w.writerow([format_float(l1), format_float(l2),
                    format_float(c.degenerate_energy.real),
                    format_float(c.degenerate_energy.imag), format_float(c.min_gap)])
    text = ", ".join(f"({l1:+.6f}, {l2:+.6f})" for l1, l2 in points)
    return _Result(f"EP3 at {text}; E=-i*{kappa / 6:.6g}" + _unit_note(cfg), buf.getvalue())


def _cmd_winding(cfg):
    kappa = _num(cfg, "kappa", required=True, nonneg=True)
    spec = _p(cfg, "loop", required=True)
    loop = parse_loop_spec(str(spec))
    if cfg.params.get("mhz2pi"):
        loop = _scaled_loop(loop, 2 * math.pi)
    if cfg.params.get("reverse"):
        loop = loop.reversed()
    n = _theta_samples(str(spec)) or int(cfg.params.get("samples_per_edge", 512))
    result = winding_number(loop, kappa, samples_per_edge=_positive_int(n, "samples"))
    return _Result(f"W_raw={result.raw!r}, W={result.rounded}" + _unit_note(cfg),
                   write_winding_trace_csv(result),
                   {"winding_raw": result.raw, "winding": result.rounded})


def _scaled_loop(loop, factor):
    if loop.kind is LoopKind.POLYLINE:
        return ParameterLoop(loop.kind, vertices=loop.vertices * factor,
                             orientation=loop.orientation)
    return ParameterLoop(loop.kind, lambda_m=loop.lambda_m * factor,
                         orientation=loop.orientation)


def _psi0(cfg, n_modes, spread=False):
    text = cfg.params.get("psi0")
    if text is None:
        if spread:
            return np.full(n_modes, 1 / math.sqrt(n_modes), dtype=complex)
        psi = np.zeros(n_modes, dtype=complex)
        psi[-1] = 1
        return psi
    psi = _parse_complex_list(str(text))
    if psi.size != n_modes:
        raise ConfigError(f"psi0 needs {n_modes} amplitudes, got {psi.size}")
    return psi


def _chain(cfg):
    kappa = _num(cfg, "kappa", required=True, nonneg=True)
    l1 = _num(cfg, "lambda1", required=True)
    l2 = _num(cfg, "lambda2", required=True)
    return l1, l2, kappa


def _cmd_evolve(cfg):
    l1, l2, kappa = _chain(cfg)
    h = build_chain_hamiltonian(three_mode_chain(l1, l2, kappa))
    dt = _num(cfg, "dt", 1e-3, positive=True)
    t_final = _num(cfg, "t_final", 1.0, positive=True)
    stride = _positive_int(cfg.params.get("stride", 1), "stride")
    trace = evolve_nh(h, _psi0(cfg, 3), dt, t_final)
    return _Result(f"samples={len(trace)}, final_norm2={float(trace.norms[-1])!r}" + _unit_note(cfg),
                   trace.to_csv(stride=stride))


def _cmd_modulated(cfg):
    p = {k: _num(cfg, k, EXPERIMENT[k]) for k in
         ("lambda1", "lambda2", "g_b", "g_r", "delta_b", "delta_r", "kappa")}
    mod = design_modulation(p["lambda1"], p["lambda2"], p["g_b"], p["g_r"],
                            p["delta_b"], p["delta_r"], p["kappa"])
    dt = _num(cfg, "dt", positive=True)
    t_final = _num(cfg, "t_final", 1.0, positive=True)
    stride = _positive_int(cfg.params.get("stride", 1), "stride")
    psi0 = _psi0(cfg, 3)
    trace = evolve_modulated(mod, psi0, dt, t_final)
    meta = {"epsilon1": mod.epsilon1, "epsilon2": mod.epsilon2,
            "nu1": mod.nu1, "nu2": mod.nu2}
    summary = f"samples={len(trace)}, mu1={mod.mu1:.6g}, mu2={mod.mu2:.6g}"
    if cfg.params.get("compare"):
        h = build_chain_hamiltonian(three_mode_chain(p["lambda1"], p["lambda2"], p["kappa"]))
        n = max(1, round(t_final / 1e-3))
        ref = evolve_nh(h, psi0, t_final / n, t_final)
        rms = population_rms(trace, ref)
        meta["population_rms"] = [float(x) for x in rms]
        summary += ", rms=[" + ", ".join(f"{x:.4f}" for x in rms) + "]"
    return _Result(summary + _unit_note(cfg), trace.to_csv(stride=stride), meta)


def _cmd_extract(cfg):
    kappa = _num(cfg, "kappa", required=True, nonneg=True)
    pts = cfg.params.get("points")
    if pts is None:
        pts = [[_p(cfg, "lambda1", required=True), _p(cfg, "lambda2", required=True)]]
    elif cfg.params.get("mhz2pi"):
        pts = [[2 * math.pi * a, 2 * math.pi * b] for a, b in pts]
    dt = _num(cfg, "dt", 1e-3, positive=True)
    t_final = _num(cfg, "t_final", 3.0, positive=True)
    stride = _positive_int(cfg.params.get("stride", 10), "stride")
    component = _positive_int(cfg.params.get("component", 2), "component")
    order = _positive_int(cfg.params.get("model_order", 3), "model_order")
    re_tol = _num(cfg, "re_tol", positive=True)
    rows = []
    fitted = failed = 0
    for l1, l2 in pts:
        h = build_chain_hamiltonian(three_mode_chain(float(l1), float(l2), kappa))
        trace = evolve_nh(h, _psi0(cfg, 3, spread=True), dt, t_final, stride=stride)
        try:
            energies = extract_eigenenergies(trace, component, order)
        except ExtractionError:
            # e.g. a decoupled mode lowers the rank; the row keeps empty fields
            rows.append((float(l1), float(l2), [], None))
            failed += 1
            continue
        fit = None
        if len(energies) == 3:
            try:
                fit = fit_symmetric_parametrization(energies, re_tol=re_tol, kappa=kappa)
                fitted += 1
            except SymmetryFitError:
                fit = None
        rows.append((float(l1), float(l2), energies, fit))
    return _Result(f"points={len(rows)}, parametrized={fitted}, failed={failed}" + _unit_note(cfg),
                   write_extraction_csv(rows))


def _cmd_concurrence(cfg):
    state = cfg.params.get("state")
    if state is None:
        kappa = _num(cfg, "kappa", 1.0, positive=True)
        l1, l2 = locate_ep3(kappa)[0]
        c = classify_point(l1, l2, kappa)
        h = build_chain_hamiltonian(three_mode_chain(l1, l2, kappa))
        psi = eigenvector_for(h, c.degenerate_energy).normalized().amplitudes
        label = "EP3 eigenstate"
    else:
        psi = _parse_complex_list(str(state))
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ConfigError("state is zero")
        psi = psi / norm
        label = "state"
    n = psi.size
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("i", "j", "concurrence", "wootters"))
    parts = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            c = pairwise_concurrence(psi, (i, j))
            general = wootters_concurrence(reduced_pair_state(psi, (i, j)))
            w.writerow([i, j, format_float(c), format_float(general)])
            parts.append(f"C{i}{j}={c:.7f}")
    return _Result(f"{label}: " + ", ".join(parts), buf.getvalue())


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "arcs": lambda cfg: _cmd_spectrum(cfg, arcs=True),
    "eps": _cmd_eps,
    "winding": _cmd_winding,
    "evolve": _cmd_evolve,
    "modulated": _cmd_modulated,
    "extract": _cmd_extract,
    "concurrence": _cmd_concurrence,
}


# ---------------------------------------------------------------- output

def _cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _json_envelope(cfg: RunConfig, result: _Result) -> str:
    rows = []
    if result.csv_text:
        reader = csv.reader(io.StringIO(result.csv_text))
        header = next(reader)
        rows = [{k: _cell(v) for k, v in zip(header, row)} for row in reader]
    meta = {"command": cfg.command, "params": cfg.params, "summary": result.summary,
            "version": __version__}
    meta.update(result.meta)
    return json.dumps({"meta": meta, "rows": rows}, sort_keys=True, indent=1) + "\n"


def _write_output(cfg: RunConfig, result: _Result):
    if cfg.output_path is None:
        return
    if cfg.format == "json":
        text = _json_envelope(cfg, result)
    else:
        text = result.csv_text or ""
    with open(cfg.output_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _error(status: int, exc: BaseException, stream) -> int:
    record = {"error": {"status": status, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record, sort_keys=True), file=stream)
    return status


def run(config: RunConfig, stdout=None, stderr=None) -> int:
    """Execute ``config``; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        result = _DISPATCH[config.command](config)
        _write_output(config, result)
    except (ResultantZeroError, ConvergenceError, IntegrationError, ExtractionError,
            RealnessError, ArithmeticError) as exc:
        return _error(EXIT_NUMERIC, exc, stderr)
    except (ConfigError, ValueError, OSError) as exc:
        return _error(EXIT_CONFIG, exc, stderr)
    print(result.summary, file=stdout)
    return EXIT_OK


# ---------------------------------------------------------------- argparse

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ep3topo", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="run a saved JSON RunConfig")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("-o", "--output", dest="output_path")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--mhz2pi", action="store_true",
                       help="treat rates and couplings as MHz and multiply by 2pi")
        p.add_argument("--save-config", help="write the RunConfig as JSON and exit")
        return p

    for name in ("spectrum", "arcs"):
        p = common(sub.add_parser(name, help="gap statistics on a (lambda1, lambda2) grid"
                                  if name == "spectrum" else "grid points on the Fermi arcs"))
        p.add_argument("--kappa", type=float, required=True)
        p.add_argument("--lambda1-range", nargs=3, metavar=("MIN", "MAX", "N"), required=True)
        p.add_argument("--lambda2-range", nargs=3, metavar=("MIN", "MAX", "N"), required=True)
        p.add_argument("--tol", type=float)

    p = common(sub.add_parser("eps", help="the four EP3 locations"))
    p.add_argument("--kappa", type=float, required=True)

    p = common(sub.add_parser("winding", help="winding number of the resultant vector"))
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--loop", required=True,
                   help="square:<m>, theta:<m>:<n> or polyline:<file or JSON>")
    p.add_argument("--reverse", action="store_true")
    p.add_argument("--samples-per-edge", type=int)

    p = common(sub.add_parser("evolve", help="no-jump trajectory of the three-mode chain"))
    _chain_args(p)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--psi0", help="comma-separated complex amplitudes, default mode 3")

    p = common(sub.add_parser("modulated", help="trajectory under two-tone qubit modulation"))
    for name in ("lambda1", "lambda2", "g_b", "g_r", "delta_b", "delta_r", "kappa"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--psi0")
    p.add_argument("--compare", action="store_true",
                   help="also report population RMS against the effective model")

    p = common(sub.add_parser("extract", help="eigenenergies from simulated traces"))
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--points", help="JSON array of [lambda1, lambda2] pairs")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--component", type=int)
    p.add_argument("--model-order", type=int)
    p.add_argument("--re-tol", type=float)
    p.add_argument("--psi0", help="initial amplitudes, default equal weight on all modes")

    p = common(sub.add_parser("concurrence", help="pairwise concurrences of a state"))
    p.add_argument("--state", help="comma-separated complex amplitudes")
    p.add_argument("--kappa", type=float, help="use the EP3 eigenstate at this kappa")
    return parser


def _chain_args(p):
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    skip = {"command", "config", "output_path", "format", "save_config"}
    params = {}
    for key, value in vars(ns).items():
        if key in skip or value is None or value is False:
            continue
        if key in ("lambda1_range", "lambda2_range"):
            axis = key[:-6]
            try:
                params[f"{axis}_min"] = float(value[0])
                params[f"{axis}_max"] = float(value[1])
            except ValueError:
                raise ConfigError(f"{axis} range bounds must be numbers") from None
            params[f"{axis}_points"] = _positive_int(value[2], f"{axis} point count")
            continue
        if key == "points":
            try:
                value = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"points is not valid JSON: {exc}") from None
        params[key] = value
    return RunConfig(ns.command, params, ns.output_path, ns.format)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if ns.config:
            config = RunConfig.from_json(Path(ns.config).read_text())
        elif ns.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_CONFIG
        else:
            config = config_from_args(ns)
            if ns.save_config:
                Path(ns.save_config).write_text(config.to_json() + "\n")
                print(f"config written to {ns.save_config}")
                return EXIT_OK
    except (ConfigError, OSError) as exc:
        return _error(EXIT_CONFIG, exc, sys.stderr)
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
