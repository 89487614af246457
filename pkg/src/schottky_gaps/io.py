"""Run configuration files and CSV/JSON artifacts.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Angles are radians and may be written with ``pi`` (``7pi/12``, ``5*pi/3``).
Every artifact starts with ``# key: value`` metadata lines.  Floats are
written with 17 significant digits so they read back bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .config import GroupConfig, build_config
from .errors import ConfigError, OutputError
from .geometry import wrap_angle

OUTPUT_DIR_ENV = "SCHOTTKY_GAPS_OUTPUT_DIR"

DELTA_METHODS = ("eigenvalue", "slope-fit")

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_ANGLE_RE = re.compile(rf"^([+-]?)\s*({_NUM})?\s*(\*?\s*(?:pi|π))?\s*(?:/\s*({_NUM}))?$")


def parse_angle(text: str) -> float:
    """Parse ``1.5``, ``pi``, ``-pi/4``, ``7pi/12`` or ``5*pi/3`` as a float (radians)."""
    s = text.strip()
    m = _ANGLE_RE.match(s)
    if not s or m is None or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"cannot parse angle {text!r}")
    sign, num, has_pi, den = m.groups()
    val = float(num) if num is not None else 1.0
    if has_pi:
        val *= math.pi
    if den is not None:
        d = float(den)
        if d == 0.0:
            raise ValueError(f"division by zero in {text!r}")
        val /= d
    return -val if sign == "-" else val


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    arcs: tuple[tuple[float, float], ...] = (
        (math.pi / 3.0, 7.0 * math.pi / 12.0),
        (math.pi, 7.0 * math.pi / 12.0),
        (5.0 * math.pi / 3.0, 7.0 * math.pi / 12.0),
    )
    T: Optional[float] = None
    interval: Optional[tuple[float, float]] = None
    r0_override: Optional[float] = None
    delta_method: str = "eigenvalue"
    delta_depth: int = 6
    histogram_bin: float = 0.2
    seed: int = 0
    output_dir: str = "."
    canvas_size: int = 800
    stroke_width: float = 0.5
    render_depth: int = 8

    def group(self) -> GroupConfig:
        return build_config(self.arcs, self.r0_override)

    def config_hash(self) -> str:
        """Hash of the computational settings; the output location is excluded."""
        text = serialize_config(replace(self, output_dir="."))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_KEYS = ("arc1", "arc2", "arc3", "T", "interval", "r0", "delta_method", "delta_depth",
         "histogram_bin", "seed", "output_dir", "canvas_size", "stroke_width", "render_depth")


def _pair(value: str) -> tuple[float, float]:
    parts = [p for p in re.split(r"[,\s]+", value.strip()) if p]
    if len(parts) != 2:
        raise ValueError("expected two comma-separated angles")
    return parse_angle(parts[0]), parse_angle(parts[1])


def _positive(x: float, what: str) -> float:
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"{what} must be positive and finite")
    return x


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse a config file body; errors name ``source:line``."""
    values: dict[str, Any] = {}
    arcs: dict[int, tuple[float, float]] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in lines:
            raise ConfigError(f"{where}: duplicate key {key!r} (first on line {lines[key]})")
        lines[key] = lineno
        try:
            if key.startswith("arc"):
                center, length = _pair(value)
                arcs[int(key[3])] = (wrap_angle(center), length)
            elif key == "T":
                values["T"] = _positive(float(value), "T")
            elif key == "interval":
                a, b = _pair(value)
                a, b = wrap_angle(a), wrap_angle(b)
                if a == b:
                    raise ValueError("empty interval; omit the key for the full circle")
                values["interval"] = (a, b)
            elif key == "r0":
                values["r0_override"] = _positive(float(value), "r0")
            elif key == "delta_method":
                if value not in DELTA_METHODS:
                    raise ValueError(f"must be one of {', '.join(DELTA_METHODS)}")
                values["delta_method"] = value
            elif key in ("delta_depth", "canvas_size", "render_depth"):
                n = int(value)
                if n < 1:
                    raise ValueError(f"{key} must be at least 1")
                values[key] = n
            elif key == "seed":
                n = int(value)
                if not 0 <= n < 2**64:
                    raise ValueError("seed must be a 64-bit unsigned integer")
                values["seed"] = n
            elif key in ("histogram_bin", "stroke_width"):
                values[key] = _positive(float(value), key)
            elif key == "output_dir":
                if not value:
                    raise ValueError("output_dir is empty")
                values["output_dir"] = value
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    if arcs:
        missing = [k for k in (1, 2, 3) if k not in arcs]
        if missing:
            raise ConfigError(f"{source}: arcs {missing} missing; give all of arc1, arc2, arc3")
        values["arcs"] = (arcs[1], arcs[2], arcs[3])
    cfg = RunConfig(**values)
    try:
        cfg.group()
    except ConfigError as exc:
        line = min((lines[k] for k in ("arc1", "arc2", "arc3", "r0") if k in lines), default=0)
        raise ConfigError(f"{source}:{line}: {exc}") from None
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    out = [f"arc{n} = {fmt_float(c)}, {fmt_float(L)}" for n, (c, L) in enumerate(cfg.arcs, start=1)]
    if cfg.T is not None:
        out.append(f"T = {fmt_float(cfg.T)}")
    if cfg.interval is not None:
        out.append(f"interval = {fmt_float(cfg.interval[0])}, {fmt_float(cfg.interval[1])}")
    if cfg.r0_override is not None:
        out.append(f"r0 = {fmt_float(cfg.r0_override)}")
    out += [f"delta_method = {cfg.delta_method}", f"delta_depth = {cfg.delta_depth}",
            f"histogram_bin = {fmt_float(cfg.histogram_bin)}", f"seed = {cfg.seed}",
            f"output_dir = {cfg.output_dir}", f"canvas_size = {cfg.canvas_size}",
            f"stroke_width = {fmt_float(cfg.stroke_width)}", f"render_depth = {cfg.render_depth}"]
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{p}: config file not found") from None
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(p))


def resolve_output_dir(cfg: RunConfig, cli_value: Optional[str] = None) -> Path:
    """CLI flag, then the environment override, then the config value."""
    if cli_value:
        return Path(cli_value)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env)
    return Path(cfg.output_dir)


def metadata(cfg: RunConfig, command: str, **extra) -> dict:
    meta = {"tool": "schottky-gaps", "version": __version__, "command": command,
            "config_hash": cfg.config_hash(), "seed": cfg.seed}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------- CSV


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]], meta: Optional[dict] = None) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("w", newline="", encoding="utf-8") as fh:
            for k, v in (meta or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(x) for x in row])
    except OSError as exc:
        raise OutputError(f"{p}: cannot write: {exc.strerror or exc}") from None
    return p


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    p = Path(path)
    meta: dict[str, str] = {}
    try:
        with p.open(newline="", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OutputError(f"{p}: cannot read: {exc.strerror or exc}") from None
    body = []
    for line in lines:
        if line.startswith("# ") and not body:
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise OutputError(f"{p}: missing header row")
    return meta, rows[0], rows[1:]


def word_to_str(word) -> str:
    return "".join(str(x) for x in word)


def str_to_word(s: str) -> tuple[int, ...]:
    return tuple(int(c) for c in s)


ORBIT_COLUMNS = ("word", "length", "theta", "kappa", "norm")


def write_orbit_csv(path, points, meta: Optional[dict] = None) -> Path:
    """One row per orbit point: word digits, length, tangency angle, curvature, norm."""
    rows = ((word_to_str(p.word), len(p.word), p.theta, p.norm_sq, math.sqrt(p.norm_sq)) for p in points)
    return write_csv(path, ORBIT_COLUMNS, rows, meta)


def read_orbit_csv(path) -> tuple[dict, list[dict]]:
    meta, header, rows = read_csv(path)
    if tuple(header) != ORBIT_COLUMNS:
        raise OutputError(f"{path}: unexpected columns {header}")
    out = [{"word": str_to_word(r[0]), "length": int(r[1]), "theta": float(r[2]),
            "kappa": float(r[3]), "norm": float(r[4])} for r in rows]
    return meta, out


def write_cdf_csv(path, s, F, meta: Optional[dict] = None) -> Path:
    return write_csv(path, ("s", "F"), zip(np.asarray(s, float), np.asarray(F, float)), meta)


def read_cdf_csv(path) -> tuple[dict, np.ndarray, np.ndarray]:
    meta, header, rows = read_csv(path)
    if header != ["s", "F"]:
        raise OutputError(f"{path}: unexpected columns {header}")
    arr = np.array([[float(a), float(b)] for a, b in rows]).reshape(-1, 2)
    return meta, arr[:, 0], arr[:, 1]


def write_histogram_csv(path, edges, density, meta: Optional[dict] = None) -> Path:
    e = np.asarray(edges, float)
    return write_csv(path, ("bin_left", "bin_right", "density"),
                     zip(e[:-1], e[1:], np.asarray(density, float)), meta)


def write_gaps_csv(path, table, meta: Optional[dict] = None) -> Path:
    n = len(table.gaps)
    words = table.words or ((),) * table.n_points
    rows = ((i, word_to_str(words[i]), word_to_str(words[(i + 1) % table.n_points]),
             table.points[i], table.gaps[i], table.scaled[i]) for i in range(n))
    return write_csv(path, ("index", "word_left", "word_right", "theta_left", "gap", "scaled"), rows, meta)


def write_text(path, text: str) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"{p}: cannot write: {exc.strerror or exc}") from None
    return p


# ---------------------------------------------------------------- JSON


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, (tuple, set)):
        return list(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def dumps_report(data: dict, meta: Optional[dict] = None) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps({"meta": meta or {}, "data": data}, indent=2, sort_keys=True,
                      default=_jsonable, allow_nan=True) + "\n"


def write_report_json(path, data: dict, meta: Optional[dict] = None) -> Path:
    return write_text(path, dumps_report(data, meta))


def read_report_json(path) -> tuple[dict, dict]:
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OutputError(f"{p}: cannot read: {exc.strerror or exc}") from None
    return obj["meta"], obj["data"]


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    """Replace fields whose override value is not ``None``."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
