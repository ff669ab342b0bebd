"""Experiment configuration, dispatch and result serialization.

An :class:`ExperimentConfig` names a subcommand and its parameters.
:func:`run` validates it, calls the owning module, writes the data file and a
JSON :class:`RunRecord` sidecar next to it (``<out>.run.json``).  Data files
contain no timing or host information, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .errors import ArwavesError, ConfigInvalid, ModuleError

__all__ = [
    "SCHEMA_VERSION",
    "OUTPUT_DIR_ENV",
    "SUBCOMMANDS",
    "ExperimentConfig",
    "RunRecord",
    "validate",
    "execute",
    "run",
    "render",
    "source_revision",
]

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "ARWAVES_OUTPUT_DIR"

# subcommand -> default output format
SUBCOMMANDS = {
    "lattice": "json",
    "covariance": "csv",
    "almost-period": "json",
    "simulate": "csv",
    "optimality": "csv",
    "nodal": "json",
    "expected-length": "json",
    "correlation": "json",
    "compare-models": "csv",
}


@dataclass
class ExperimentConfig:
    subcommand: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    threads: Optional[int] = None
    out: Optional[str] = None
    format: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict) or "subcommand" not in d:
            raise ConfigInvalid("config needs a subcommand")
        if d.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigInvalid(f"unsupported schema_version {d.get('schema_version')}")
        known = {"subcommand", "params", "seed", "threads", "out", "format", "schema_version"}
        extra = set(d) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        if self.out:
            ext = Path(self.out).suffix.lower().lstrip(".")
            if ext in ("csv", "json"):
                return ext
        return SUBCOMMANDS[self.subcommand]


@dataclass
class RunRecord:
    config: dict
    revision: str
    seed: int
    wall_time: float
    outputs: List[str]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def source_revision() -> str:
    """Package version plus the git commit of the source tree when available."""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"arwaves {__version__} ({rev.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"arwaves {__version__}"


# ---------------------------------------------------------------- validation


def _need(p: dict, key: str):
    if p.get(key) is None:
        raise ConfigInvalid(f"missing parameter {key!r}")
    return p[key]


def _int(p, key, lo=None, hi=None, default=None):
    v = p.get(key, default)
    if v is None:
        raise ConfigInvalid(f"missing parameter {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise ConfigInvalid(f"{key} must be an integer, got {v!r}")
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ConfigInvalid(f"{key}={v} outside [{lo}, {hi}]")
    return int(v)


def _real(p, key, lo=None, hi=None, open_lo=False, default=None):
    v = p.get(key, default)
    if v is None:
        raise ConfigInvalid(f"missing parameter {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigInvalid(f"{key} must be a finite real, got {v!r}")
    if lo is not None and (v < lo or (open_lo and v == lo)):
        raise ConfigInvalid(f"{key}={v} below {'or at ' if open_lo else ''}{lo}")
    if hi is not None and v > hi:
        raise ConfigInvalid(f"{key}={v} above {hi}")
    return float(v)


def _representable(n: int):
    from .lattice import is_sum_of_two_squares

    if not is_sum_of_two_squares(n):
        raise ConfigInvalid(f"n={n} is not a sum of two squares")


def _window(p, key="window"):
    from .nodal import parse_window

    try:
        return parse_window(str(_need(p, key)))
    except ValueError as exc:
        raise ConfigInvalid(f"bad window: {exc}") from exc


def validate(cfg: ExperimentConfig) -> None:
    """Check ``cfg`` against the preconditions of the owning module; raises ConfigInvalid."""
    from .lattice import MAX_N

    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigInvalid(f"unknown subcommand {cfg.subcommand!r}")
    if cfg.format not in (None, "csv", "json"):
        raise ConfigInvalid(f"format must be csv or json, got {cfg.format!r}")
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise ConfigInvalid("seed must be an unsigned 64-bit integer")
    if cfg.threads is not None and (not isinstance(cfg.threads, int) or cfg.threads < 1):
        raise ConfigInvalid("threads must be a positive integer")
    p = cfg.params
    sc = cfg.subcommand
    if sc == "lattice":
        if p.get("action", "show") == "scan":
            _int(p, "limit", 2, 10**7)
            if _real(p, "kappa", 0, open_lo=True) >= math.log(2) / 2:
                raise ConfigInvalid("kappa must be below log(2)/2")
        else:
            _int(p, "n", 1, MAX_N)
    elif sc == "covariance":
        _representable(_int(p, "n", 1, MAX_N))
        h = _real(p, "grid", 0, open_lo=True)
        R = _real(p, "radius", 0, open_lo=True)
        if (2 * R / h) ** 2 > 4e7:
            raise ConfigInvalid("grid too fine for the requested radius")
    elif sc == "almost-period":
        _representable(_int(p, "n", 1, MAX_N))
        mode = p.get("mode", "pigeonhole")
        if mode not in ("pigeonhole", "scan", "linearised"):
            raise ConfigInvalid(f"unknown mode {mode!r}")
        if mode == "pigeonhole":
            _int(p, "m", 2, 10**6)
        else:
            _real(p, "eps", 0, 1, open_lo=True)
            if p["eps"] >= 1:
                raise ConfigInvalid("eps must be below 1")
        if mode == "scan":
            _real(p, "radius", 1, 500)
            _real(p, "h", 0, 1, open_lo=True)
    elif sc == "simulate":
        _representable(_int(p, "n", 1, MAX_N))
        h = _real(p, "grid", 0, open_lo=True)
        x0, y0, x1, y1 = _window(p).bbox
        if (x1 - x0) * (y1 - y0) / h**2 > 4e7:
            raise ConfigInvalid("grid too fine for the window")
    elif sc == "optimality":
        _int(p, "d", 2, 2)
        _real(p, "a", 0, open_lo=True)
        _real(p, "eps", 0, 1, open_lo=True)
        _int(p, "trials", 1)
        Ns = _need(p, "N")
        if not isinstance(Ns, list) or not Ns or not all(isinstance(v, int) and v >= 1 for v in Ns):
            raise ConfigInvalid("N must be a nonempty list of positive integers")
        for N in Ns:
            if math.exp(p["a"] * N) * N > 1e4:
                raise ConfigInvalid(f"N={N}: e^(aN) N exceeds 1e4 grid points per axis")
    elif sc == "nodal":
        _representable(_int(p, "n", 1, MAX_N))
        h = _real(p, "h", 0, open_lo=True)
        x0, y0, x1, y1 = _window(p).bbox
        if (x1 - x0) * (y1 - y0) / h**2 > 4e7:
            raise ConfigInvalid("grid too fine for the window")
        if p.get("phi", "const") not in ("const", "coordx", "bump"):
            raise ConfigInvalid(f"unknown phi {p.get('phi')!r}")
    elif sc == "expected-length":
        n = _int(p, "n", 1, 10**6)
        _representable(n)
        _int(p, "trials", 1)
        if p.get("h") is not None:
            _real(p, "h", 0, 1 / (20 * math.sqrt(n)), open_lo=True)
    elif sc == "correlation":
        _representable(_int(p, "n", 1, 5000))
        _int(p, "trials", 3)
        if p.get("eps") is not None:
            _real(p, "eps", 0, 0.5)
    elif sc == "compare-models":
        _representable(_int(p, "n", 1, MAX_N))
        _real(p, "eps", 0, 1, open_lo=True)


# ---------------------------------------------------------------- dispatch


def _lattice(p, cfg):
    from .lattice import (
        admissible_sequence,
        angular_measure,
        enumerate_lattice,
        kolmogorov_distance,
        representation_count,
    )

    if p.get("action", "show") == "scan":
        seq = admissible_sequence(p["limit"], p["kappa"])
        return [{"n": n, "N": representation_count(n)} for n in seq]
    fs = enumerate_lattice(p["n"])
    if cfg.output_format == "csv":
        return [
            {"x": x, "y": y, "angle": math.atan2(y, x) % (2 * math.pi)} for x, y in fs.points
        ]
    return {
        "n": fs.n,
        "N": fs.cardinality,
        "omega": fs.omega,
        "factorization": {str(k): v for k, v in sorted(fs.factorization.items())},
        "split_primes": list(fs.split_primes),
        "split_angles": list(fs.split_angles),
        "base_angle": fs.base_angle,
        "kolmogorov_distance": kolmogorov_distance(angular_measure(fs)) if fs.cardinality else None,
        "points": [list(pt) for pt in fs.points],
    }


def _covariance(p, cfg):
    from .bessel import bessel_j
    from .covariance import rescaled_kernel
    from .lattice import enumerate_lattice

    k = rescaled_kernel(enumerate_lattice(p["n"]))
    h, R = p["grid"], p["radius"]
    M = int(math.floor(R / h + 1e-9))
    ax = np.arange(-M, M + 1) * h
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    keep = X**2 + Y**2 <= R * R + 1e-12
    pts = np.column_stack([X[keep], Y[keep]])
    r = k(pts)
    j0 = bessel_j(0, 2 * np.pi * np.hypot(pts[:, 0], pts[:, 1]))
    return {"t1": pts[:, 0], "t2": pts[:, 1], "r": r, "j0": j0, "difference": r - j0}


def _almost_period(p, cfg):
    from .almost_period import (
        almost_period_of_kernel,
        linearised_almost_period,
        smallest_almost_period_scan,
    )
    from .covariance import linearised_kernel, rescaled_kernel
    from .lattice import enumerate_lattice

    fs = enumerate_lattice(p["n"])
    mode = p.get("mode", "pigeonhole")
    if mode == "pigeonhole":
        ap = almost_period_of_kernel(rescaled_kernel(fs), p["m"])
    elif mode == "scan":
        ap = smallest_almost_period_scan(rescaled_kernel(fs), p["eps"], p["radius"], p["h"])
        if ap is None:
            return {"n": fs.n, "mode": mode, "found": False, "eps": p["eps"], "radius": p["radius"]}
    else:
        ap = linearised_almost_period(linearised_kernel(fs), p["eps"])
    out = {"n": fs.n, "mode": mode, "found": True}
    out.update(ap.to_dict())
    return out


def _simulate(p, cfg):
    from .field import sample_arw
    from .lattice import enumerate_lattice
    from .nodal import Disk, _grid_axes, parse_window

    win = parse_window(p["window"])
    f = sample_arw(enumerate_lattice(p["n"]), cfg.seed, rescaled=bool(p.get("rescaled", False)))
    xs, ys = _grid_axes(win, p["grid"])
    V = f.grid(xs, ys)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    keep = win.contains(X, Y) if isinstance(win, Disk) else np.ones_like(V, dtype=bool)
    return {"x": X[keep], "y": Y[keep], "value": V[keep]}


def _optimality(p, cfg):
    from .field import optimality_experiment

    return optimality_experiment(
        p["d"], p["N"], p["a"], p["eps"], p["trials"], cfg.seed, spacing=p.get("spacing")
    )


def _nodal(p, cfg):
    from .experiments import phi_bank
    from .field import sample_arw
    from .lattice import enumerate_lattice
    from .nodal import extract_nodal, low_margin_threshold, observe, parse_window

    win = parse_window(p["window"])
    f = sample_arw(enumerate_lattice(p["n"]), cfg.seed, rescaled=bool(p.get("rescaled", False)))
    curves = extract_nodal(f, win, p["h"])
    if cfg.output_format == "csv":
        cols = ["x1", "y1", "x2", "y2", "len"]
        rows = list(curves.to_rows())
        return {c: np.array([r[i] for r in rows]) for i, c in enumerate(cols)}
    phi_name = p.get("phi", "const")
    obs = observe(f, curves, phi_bank(win, [phi_name])[phi_name])
    margin, thr = low_margin_threshold(f, curves)
    return {
        "n": p["n"],
        "seed": cfg.seed,
        "window": str(win),
        "h": p["h"],
        "phi": phi_name,
        "segments": len(curves),
        "length": obs.length,
        "weighted_integral": obs.weighted_integral,
        "regular_margin": obs.regular_margin,
        "margin_threshold": thr,
        "boundary_fraction": obs.boundary_fraction,
    }


def _expected_length(p, cfg):
    from .experiments import expected_length_check

    return expected_length_check(p["n"], p["trials"], cfg.seed, h=p.get("h"))


def _correlation(p, cfg):
    from .experiments import correlation_experiment

    return correlation_experiment(p["n"], p.get("eps"), p["trials"], cfg.seed, h=p.get("h"))


def _compare_models(p, cfg):
    from .experiments import compare_models

    return compare_models(p["n"], p["eps"], scan_radius=p.get("scan_radius", 50.0))


_DISPATCH = {
    "lattice": _lattice,
    "covariance": _covariance,
    "almost-period": _almost_period,
    "simulate": _simulate,
    "optimality": _optimality,
    "nodal": _nodal,
    "expected-length": _expected_length,
    "correlation": _correlation,
    "compare-models": _compare_models,
}


def execute(cfg: ExperimentConfig):
    """Validate and compute; returns a record (dict), table (list of dicts) or columns (dict of arrays)."""
    validate(cfg)
    try:
        if cfg.threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=cfg.threads):
                return _DISPATCH[cfg.subcommand](cfg.params, cfg)
        return _DISPATCH[cfg.subcommand](cfg.params, cfg)
    except ConfigInvalid:
        raise
    except (ArwavesError, ValueError, ArithmeticError) as exc:
        raise ModuleError(f"{cfg.subcommand}: {type(exc).__name__}: {exc}") from exc


# ---------------------------------------------------------------- rendering


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip decimal
    return str(v)


def _as_table(result):
    if isinstance(result, list):
        header = []
        for row in result:
            for k in row:
                if k not in header:
                    header.append(k)
        return header, [[row.get(k) for k in header] for row in result]
    if isinstance(result, dict) and result and all(
        isinstance(v, np.ndarray) and v.ndim == 1 for v in result.values()
    ):
        header = list(result)
        cols = [result[k].tolist() for k in header]
        return header, [list(r) for r in zip(*cols)]
    # scalar record -> one row, nested values as JSON text
    header = list(result)
    row = [json.dumps(_plain(v)) if isinstance(v, (dict, list, tuple, np.ndarray)) else v
           for v in result.values()]
    return header, [row]


def render(result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_plain(result), indent=2) + "\n"
    header, rows = _as_table(result)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _resolve_out(cfg: ExperimentConfig) -> Optional[Path]:
    if cfg.out and cfg.out != "-":
        return Path(cfg.out)
    if cfg.out is None and os.environ.get(OUTPUT_DIR_ENV):
        return Path(os.environ[OUTPUT_DIR_ENV]) / f"{cfg.subcommand}.{cfg.output_format}"
    return None


def run(cfg: ExperimentConfig, stdout=None) -> RunRecord:
    """Execute ``cfg``, write its data file and RunRecord sidecar; stdout when no path resolves."""
    t0 = time.perf_counter()
    result = execute(cfg)
    text = render(result, cfg.output_format)
    path = _resolve_out(cfg)
    outputs = []
    if path is None:
        (stdout or _stdout()).write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        outputs.append(str(path))
    rec = RunRecord(
        config=cfg.to_dict(),
        revision=source_revision(),
        seed=cfg.seed,
        wall_time=time.perf_counter() - t0,
        outputs=outputs,
    )
    if path is not None:
        Path(str(path) + ".run.json").write_text(rec.to_json() + "\n")
    return rec


def _stdout():
    import sys

    return sys.stdout
