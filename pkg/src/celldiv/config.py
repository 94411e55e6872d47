"""Run configuration: plain-text parsing, canonical formatting, manifests.

Configuration files are key = value sections (configparser syntax).  The
seed is mandatory; there is no wall-clock default anywhere in the package.
`format_config` emits a canonical form with `parse_config(format_config(c))
== c`, which the manifest embeds so every output can be reproduced bit for
bit.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass

from .division import DEFAULT_MAX_EVENTS
from .geometry import (
    Atoms2D,
    Box,
    ConstantRule,
    GeometryError,
    IntrinsicVolumeRule,
    LambdaRule,
    Mondrian,
    SumOfSidesRule,
)
from .streams import GENERATOR_NAME

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "format_config",
    "load_config",
    "phi_to_spec",
    "phi_from_spec",
    "rule_to_spec",
    "rule_from_spec",
    "window_to_spec",
    "window_from_spec",
    "write_manifest",
]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# spec strings shared by config files and data file headers


def phi_to_spec(phi) -> str:
    if isinstance(phi, Mondrian):
        return "mondrian " + " ".join(repr(w) for w in phi.weights)
    parts = [f"{u[0]!r} {u[1]!r} {p!r}" for u, p in zip(phi.directions, phi.weights)]
    return "atoms2d " + " ; ".join(parts)


def phi_from_spec(text: str):
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty directional distribution spec")
    kind = tokens[0]
    if kind == "mondrian":
        try:
            return Mondrian(tuple(float(t) for t in tokens[1:]))
        except (ValueError, GeometryError) as exc:
            raise ConfigError(f"bad mondrian spec {text!r}: {exc}") from exc
    if kind == "atoms2d":
        body = text[len("atoms2d") :]
        dirs, weights = [], []
        for chunk in body.split(";"):
            vals = chunk.split()
            if not vals:
                continue
            if len(vals) != 3:
                raise ConfigError(f"atom needs 'ux uy weight', got {chunk!r}")
            dirs.append((float(vals[0]), float(vals[1])))
            weights.append(float(vals[2]))
        try:
            return Atoms2D(tuple(dirs), tuple(weights))
        except GeometryError as exc:
            raise ConfigError(f"bad atoms2d spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown directional distribution kind {kind!r}")


def rule_to_spec(rule) -> str:
    if isinstance(rule, LambdaRule):
        return "lambda"
    if isinstance(rule, SumOfSidesRule):
        return "sum-of-sides"
    if isinstance(rule, IntrinsicVolumeRule):
        return f"intrinsic n={rule.n} alpha={rule.alpha!r}"
    if isinstance(rule, ConstantRule):
        return f"constant c={rule.c!r}"
    raise ConfigError(f"unknown rule {rule!r}")


def rule_from_spec(text: str):
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty rule spec")
    kind = tokens[0]
    kv = {}
    for t in tokens[1:]:
        if "=" not in t:
            raise ConfigError(f"bad rule parameter {t!r} (expected key=value)")
        k, v = t.split("=", 1)
        kv[k] = v
    try:
        if kind == "lambda":
            return LambdaRule()
        if kind == "sum-of-sides":
            return SumOfSidesRule()
        if kind == "intrinsic":
            return IntrinsicVolumeRule(int(kv["n"]), float(kv.get("alpha", 1.0)))
        if kind == "constant":
            return ConstantRule(float(kv["c"]))
    except (KeyError, ValueError, GeometryError) as exc:
        raise ConfigError(f"bad rule spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown rule kind {kind!r}")


def window_to_spec(window) -> str:
    if isinstance(window, Box):
        return (
            "box "
            + " ".join(repr(v) for v in window.lower)
            + " ; "
            + " ".join(repr(v) for v in window.upper)
        )
    return "poly " + " ; ".join(f"{x!r} {y!r}" for x, y in window.vertices)


def window_from_spec(text: str):
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty window spec")
    if tokens[0] == "box":
        parts = text[len("box") :].split(";")
        if len(parts) != 2:
            raise ConfigError("box window needs 'lower ; upper'")
        lo = tuple(float(t) for t in parts[0].split())
        hi = tuple(float(t) for t in parts[1].split())
        try:
            return Box(lo, hi)
        except GeometryError as exc:
            raise ConfigError(f"bad window {text!r}: {exc}") from exc
    if tokens[0] == "poly":
        from .geometry import ConvexPolygon2

        verts = []
        for chunk in text[len("poly") :].split(";"):
            vals = chunk.split()
            if not vals:
                continue
            if len(vals) != 2:
                raise ConfigError(f"polygon vertex needs 'x y', got {chunk!r}")
            verts.append((float(vals[0]), float(vals[1])))
        try:
            return ConvexPolygon2(tuple(verts))
        except GeometryError as exc:
            raise ConfigError(f"bad window {text!r}: {exc}") from exc
    raise ConfigError(f"unknown window kind {tokens[0]!r}")


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    d: int
    phi: object
    rule: object
    window: Box
    seed: int
    t_max: float = 1.0
    replicates: int = 1
    snapshot_times: tuple[float, ...] = ()
    max_events: int = DEFAULT_MAX_EVENTS
    min_cell_volume: float = 0.0
    depth: int = 200
    n_jumps: int = 1000
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.d != self.phi.dim:
            raise ConfigError(f"[model] d = {self.d} does not match the distribution dimension {self.phi.dim}")
        if self.window.dim != self.d:
            raise ConfigError(f"[window] dimension {self.window.dim} does not match [model] d = {self.d}")
        if self.replicates < 1:
            raise ConfigError("[run] replicates must be >= 1")
        if not self.t_max > 0.0:
            raise ConfigError("[run] t_max must be > 0")
        if self.depth < 1:
            raise ConfigError("[run] depth must be >= 1")
        if self.n_jumps < 1:
            raise ConfigError("[run] n_jumps must be >= 1")
        if self.max_events < 1:
            raise ConfigError("[run] max_events must be >= 1")
        if self.min_cell_volume < 0.0:
            raise ConfigError("[run] min_cell_volume must be >= 0")
        if any(not 0.0 <= t <= self.t_max for t in self.snapshot_times):
            raise ConfigError("[run] snapshot_times must lie in [0, t_max]")


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    def need(section: str, key: str) -> str:
        if not cp.has_option(section, key):
            raise ConfigError(f"missing required key [{section}] {key}")
        return cp.get(section, key)

    def opt(section: str, key: str, default: str) -> str:
        return cp.get(section, key) if cp.has_option(section, key) else default

    phi = phi_from_spec(need("model", "phi"))
    rule = rule_from_spec(need("model", "rule"))
    d = int(opt("model", "d", str(phi.dim)))
    lo = tuple(float(v) for v in need("window", "lower").split())
    hi = tuple(float(v) for v in need("window", "upper").split())
    try:
        window = Box(lo, hi)
    except GeometryError as exc:
        raise ConfigError(f"bad [window]: {exc}") from exc
    seed_text = need("run", "seed")
    try:
        seed = int(seed_text)
    except ValueError as exc:
        raise ConfigError(f"[run] seed must be an integer, got {seed_text!r}") from exc
    t_max = float(opt("run", "t_max", "1"))
    snapshot_times = tuple(float(v) for v in opt("run", "snapshot_times", "").split())
    return RunConfig(
        d=d,
        phi=phi,
        rule=rule,
        window=window,
        seed=seed,
        t_max=t_max,
        replicates=int(opt("run", "replicates", "1")),
        snapshot_times=snapshot_times,
        max_events=int(opt("run", "max_events", str(DEFAULT_MAX_EVENTS))),
        min_cell_volume=float(opt("run", "min_cell_volume", "0")),
        depth=int(opt("run", "depth", "200")),
        n_jumps=int(opt("run", "n_jumps", "1000")),
        out_dir=opt("output", "dir", "out"),
    )


def format_config(cfg: RunConfig) -> str:
    out = io.StringIO()
    out.write("[model]\n")
    out.write(f"d = {cfg.d}\n")
    out.write(f"phi = {phi_to_spec(cfg.phi)}\n")
    out.write(f"rule = {rule_to_spec(cfg.rule)}\n\n")
    out.write("[window]\n")
    out.write("lower = " + " ".join(repr(v) for v in cfg.window.lower) + "\n")
    out.write("upper = " + " ".join(repr(v) for v in cfg.window.upper) + "\n\n")
    out.write("[run]\n")
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"t_max = {cfg.t_max!r}\n")
    out.write(f"replicates = {cfg.replicates}\n")
    if cfg.snapshot_times:
        out.write("snapshot_times = " + " ".join(repr(t) for t in cfg.snapshot_times) + "\n")
    out.write(f"max_events = {cfg.max_events}\n")
    out.write(f"min_cell_volume = {cfg.min_cell_volume!r}\n")
    out.write(f"depth = {cfg.depth}\n")
    out.write(f"n_jumps = {cfg.n_jumps}\n\n")
    out.write("[output]\n")
    out.write(f"dir = {cfg.out_dir}\n")
    return out.getvalue()


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# manifest


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, *, command: str, cfg: RunConfig, version: str, outputs) -> None:
    """Manifest with the config echo, the rng identity, per-replicate stream
    keys and a sha256 digest per output file; sufficient to bit-reproduce
    every output."""
    lines = ["# celldiv-manifest 1"]
    lines.append(f"command = {command}")
    lines.append(f"code_version = {version}")
    lines.append(f"rng = {GENERATOR_NAME}")
    lines.append("stream_scheme = SeedSequence(entropy=seed, spawn_key=(replicate,))")
    lines.append(f"seed = {cfg.seed}")
    for i in range(cfg.replicates):
        lines.append(f"stream_{i} = entropy={cfg.seed} spawn_key=({i},)")
    for key, value in sorted(
        (k, v) for k, v in _config_echo(cfg)
    ):
        lines.append(f"config.{key} = {value}")
    for out in sorted(str(p) for p in outputs):
        import os

        lines.append(f"sha256 {os.path.basename(out)} = {_sha256(out)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _config_echo(cfg: RunConfig):
    text = format_config(cfg)
    section = ""
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]")
            continue
        key, value = line.split("=", 1)
        yield f"{section}.{key.strip()}", value.strip()
