"""Flat ``key = value`` experiment configuration.

One key per line, ``#`` starts a comment, lists are comma separated.
Numeric values may use ``pi`` and basic arithmetic (``pi/4``, ``2*pi/3``).
"""

from __future__ import annotations

import ast
import hashlib
import math
import operator
from dataclasses import dataclass, field, fields

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


class ConfigError(ValueError):
    pass


def parse_number(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse number {text!r}")

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def _floats(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    out = []
    for t in text.split(","):
        if t.strip():
            x = parse_number(t)
            if x != int(x):
                raise ConfigError(f"expected an integer, got {t!r}")
            out.append(int(x))
    return out


@dataclass
class ExperimentConfig:
    experiment_name: str = "qbatt"
    N: int = 200
    q: float = 0.25
    c: float = 1.0
    alpha: float = 0.0
    theta: float = math.pi / 4
    g: float = 1.0
    E: float = 1.0
    k_max: int = 600
    record_every: int = 10
    n0: int = 0
    q_grid: list[float] = field(default_factory=lambda: [0.25, 0.49])
    k_grid: list[int] = field(default_factory=lambda: [0, 20, 40, 60, 80, 100])
    theta_grid: list[float] = field(default_factory=list)
    kT_grid: list[float] = field(default_factory=lambda: [0.05, 0.15, 0.5, 1.0, 2.0])
    ktheta_max: float = 100.0
    ktheta_step: float = 0.5
    output_dir: str = ""
    seed: int = 20210101
    validate_trials: int = 1000
    unitary_trials: int = 100000
    tol_generator: float = 1e-12
    tol_walk: float = 1e-10
    tol_moments: float = 1e-9
    tol_phase_space: float = 1e-10
    tol_analytics_tv: float = 0.08
    tol_ergotropy: float = 1e-6
    tol_bessel: float = 1e-10
    tol_eigen: float = 1e-9

    def __post_init__(self):
        self.check()

    def check(self) -> None:
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        for name in ("q", "c"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if any(not 0.0 <= x <= 1.0 for x in self.q_grid):
            raise ConfigError("q_grid entries must lie in [0, 1]")
        if self.theta < 0 or any(t < 0 for t in self.theta_grid):
            raise ConfigError("theta must be non-negative")
        if self.k_max < 0 or any(k < 0 for k in self.k_grid):
            raise ConfigError("k values must be non-negative")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not 0 <= self.n0 <= self.N:
            raise ConfigError("n0 must lie on the ladder")
        if any(t <= 0 for t in self.kT_grid):
            raise ConfigError("kT_grid entries must be positive")
        if self.g <= 0 or self.E <= 0:
            raise ConfigError("g and E must be positive")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            kind = kinds[key]
            try:
                if kind == "str":
                    values[key] = val
                elif kind == "int":
                    values[key] = _ints(val)[0]
                elif kind == "float":
                    values[key] = parse_number(val)
                elif kind == "list[float]":
                    values[key] = _floats(val)
                elif kind == "list[int]":
                    values[key] = _ints(val)
                else:  # pragma: no cover
                    raise ConfigError(f"unsupported type {kind}")
            except (ConfigError, IndexError) as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        lines = []
        for key, val in self.as_dict().items():
            if isinstance(val, list):
                val = ",".join(repr(x) for x in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        """SHA-256 of the canonical text form, excluding the output location."""
        d = self.as_dict()
        d.pop("output_dir")
        text = "\n".join(f"{k}={v!r}" for k, v in d.items())
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.as_dict()
        d.update(changes)
        return type(self)(**d)
