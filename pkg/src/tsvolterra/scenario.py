"""JSON scenario files: the data of one integral equation plus solver settings."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, fields
from functools import cached_property
from pathlib import Path

from .calculus import GridFunction
from .dsl import Expr, evaluate_array, parse, variables
from .errors import ConfigError, InvalidStep, TimeScaleSyntaxError
from .solver import SolveConfig
from .timescale import Grid, TimeScale, discretize, parse_timescale

REQUIRED = ("name", "timescale", "f", "k")
_NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class ScenarioError(ConfigError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    timescale: str
    f: str
    k: str
    v: str | None = None
    w: str | None = None
    tol: float = 1e-10
    max_iter: int = 200
    step_h: float = 1e-3
    lipschitz_L: float | None = None
    penalty_sign: str = "corrected"
    n_bracket_iters: int = 20

    def __post_init__(self):
        self._validate()

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ScenarioError(f"unknown scenario field(s): {', '.join(unknown)}")
        missing = [k for k in REQUIRED if k not in data]
        if missing:
            raise ScenarioError(f"missing scenario field(s): {', '.join(missing)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario: {exc}") from exc
        except UnicodeDecodeError as exc:
            raise ScenarioError(f"scenario is not UTF-8: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def _validate(self):
        for key in ("name", "timescale", "f", "k"):
            if not isinstance(getattr(self, key), str):
                raise ScenarioError(f"field {key!r} must be a string")
        for key in ("v", "w"):
            if getattr(self, key) is not None and not isinstance(getattr(self, key), str):
                raise ScenarioError(f"field {key!r} must be a string or null")
        if not _NAME_RE.match(self.name):
            raise ScenarioError("name must be non-empty and use only letters, digits, '_', '-', '.'")
        for key in ("tol", "step_h"):
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not (math.isfinite(val) and val > 0):
                raise ScenarioError(f"field {key!r} must be a positive number")
        for key in ("max_iter", "n_bracket_iters"):
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, int) or val < 1:
                raise ScenarioError(f"field {key!r} must be an integer >= 1")
        L = self.lipschitz_L
        if L is not None and (isinstance(L, bool) or not isinstance(L, (int, float)) or not (math.isfinite(L) and L >= 0)):
            raise ScenarioError("field 'lipschitz_L' must be a nonnegative number or null")
        if self.penalty_sign not in ("corrected", "verbatim"):
            raise ScenarioError("field 'penalty_sign' must be 'corrected' or 'verbatim'")
        try:
            parse_timescale(self.timescale)
        except (TimeScaleSyntaxError, ValueError) as exc:
            raise ScenarioError(f"timescale: {exc}") from exc
        for key in ("f", "v", "w"):
            text = getattr(self, key)
            if text is not None and variables(parse(text)) - {"t"}:
                raise ScenarioError(f"expression {key!r} may only depend on t")
        parse(self.k)
        if self.v is not None and self.w is None or self.w is not None and self.v is None:
            raise ScenarioError("v and w must be given together")

    # compiled views

    @cached_property
    def ts(self) -> TimeScale:
        return parse_timescale(self.timescale)

    @cached_property
    def grid(self) -> Grid:
        try:
            return discretize(self.ts, self.step_h)
        except InvalidStep as exc:
            raise ScenarioError(str(exc)) from exc

    @cached_property
    def f_expr(self) -> Expr:
        return parse(self.f)

    @cached_property
    def k_expr(self) -> Expr:
        return parse(self.k)

    @property
    def has_bracket(self) -> bool:
        return self.v is not None and self.w is not None

    def sample(self, text: str) -> GridFunction:
        e = parse(text)
        vals = evaluate_array(e, t=self.grid.nodes)
        return GridFunction(self.grid, vals)

    def solve_config(self, lipschitz_L: float | None = None) -> SolveConfig:
        L = self.lipschitz_L if lipschitz_L is None else lipschitz_L
        return SolveConfig(tol=float(self.tol), max_iter=self.max_iter, step_h=float(self.step_h), lipschitz_L=L)
