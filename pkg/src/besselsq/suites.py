"""Named verification suites and their configuration."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import jsonschema
import numpy as np

from .envelopes import ENVELOPES, envelope_check
from .equivalence import equivalence_study
from .errors import ConfigError
from .fracderiv import g_field
from .gamma_norm import gamma_mc_check, gamma_scalar_check
from .grids import make_radial_grid, make_time_grid
from .hankel import hankel_consistency_check, make_test_function
from .hardy_bmo import bmoo_log_check, bmoo_step_check, h1o_atom_check
from .poisson import closed_form_check, poisson_path_check, semigroup_check
from .report import Report
from .riesz import (RieszEvaluator, cauchy_riemann_check, commutation_check, intertwining_check,
                    polarization_check)

SUITES = ("identities", "envelopes", "equivalence", "gamma")

_num_list = {"type": "array", "minItems": 1, "items": {"type": "number"}}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["seed"],
    "properties": {
        "suite": {"enum": list(SUITES)},
        "seed": {"type": "integer", "minimum": 0},
        "lambdas": {**_num_list, "items": {"type": "number", "minimum": 1}},
        "betas": {**_num_list, "items": {"type": "number", "exclusiveMinimum": 0}},
        "gammas": {**_num_list, "items": {"type": "number", "not": {"const": 0}}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_x": {"type": "integer", "minimum": 16},
                "m_t": {"type": "integer", "minimum": 16},
                "x_min": {"type": "number", "exclusiveMinimum": 0},
                "x_max": {"type": "number", "exclusiveMinimum": 0},
                "t_min": {"type": "number", "exclusiveMinimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "banach": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object", "additionalProperties": False, "required": ["p", "n"],
                "properties": {"p": {"type": "number", "exclusiveMinimum": 1},
                               "n": {"type": "integer", "minimum": 1, "maximum": 16}},
            },
        },
        "samples": {"type": "integer", "minimum": 100},
        "spaces": {"type": "array", "minItems": 1, "items": {"enum": ["H1o", "BMOo"]}},
        "levels": {"type": "array", "minItems": 2,
                   "items": {"type": "array", "minItems": 2, "maxItems": 2,
                             "items": {"type": "integer", "minimum": 16}}},
        "checks": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
        "out": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
    },
}


@dataclass
class SuiteConfig:
    suite: str
    seed: int
    lambdas: list = field(default_factory=lambda: [1.0, 2.0])
    betas: list = field(default_factory=lambda: [0.5, 1.0])
    gammas: list = field(default_factory=lambda: [0.25, 0.5])
    grid: dict = field(default_factory=dict)
    banach: list = field(default_factory=lambda: [{"p": 2, "n": 4}, {"p": 4, "n": 4}])
    samples: int = 400
    spaces: list = field(default_factory=lambda: ["H1o", "BMOo"])
    levels: list = field(default_factory=lambda: [[256, 128], [512, 256]])
    checks: list | None = None
    tolerances: dict = field(default_factory=dict)
    out: str = "verify-out"
    threads: int = 1

    def xgrid(self, n: int | None = None):
        g = self.grid
        return make_radial_grid(g.get("x_min", 1e-3), g.get("x_max", 50.0), n or g.get("n_x", 512))

    def tgrid(self, m: int | None = None):
        g = self.grid
        return make_time_grid(g.get("t_min", 1e-3), g.get("t_max", 50.0), m or g.get("m_t", 256))

    def tol(self, check: str, default: float) -> float:
        return float(self.tolerances.get(check, default))

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(data: dict, **overrides) -> SuiteConfig:
    """Validate a config mapping (CLI overrides applied first); raises ConfigError."""
    merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        jsonschema.validate(merged, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config at {'/'.join(map(str, exc.path)) or '<root>'}: {exc.message}") from None
    if "suite" not in merged:
        raise ConfigError("no suite given")
    g = merged.get("grid", {})
    for lo, hi in (("x_min", "x_max"), ("t_min", "t_max")):
        if lo in g and hi in g and not g[lo] < g[hi]:
            raise ConfigError(f"grid {lo} must be below {hi}")
    cfg = SuiteConfig(**merged)
    unknown = set(cfg.checks or ()) - set(checks_of(cfg.suite))
    if unknown:
        raise ConfigError(f"checks not in suite {cfg.suite!r}: {sorted(unknown)}")
    return cfg


# ---------------------------------------------------------------- registry

@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    run: Callable[[SuiteConfig], list]


REGISTRY: dict[str, Check] = {}


def register(suite: str, name: str):
    def deco(fn):
        if name in REGISTRY:
            raise ValueError(f"check {name!r} registered twice")
        REGISTRY[name] = Check(name, suite, fn)
        return fn
    return deco


def checks_of(suite: str) -> list[str]:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}")
    return [c.name for c in REGISTRY.values() if c.suite == suite]


def _gauss(cfg: SuiteConfig, lam: float, n: int | None = None):
    return make_test_function("slambda_gauss", cfg.xgrid(n), lam=lam)


# identities

@register("identities", "polarization")
def _polarization(cfg):
    """f = a = chi_(0,1) at beta = 1; a Gaussian-type f against a = chi_(0,1) otherwise."""
    out = []
    chi = make_test_function("indicator", cfg.xgrid(), interval=[0.0, 1.0])
    for lam in cfg.lambdas:
        for beta in cfg.betas:
            f = chi if beta == 1 else _gauss(cfg, lam)
            out.append(polarization_check(f, chi, lam, beta, cfg.tgrid(), tol=cfg.tol("polarization", 2e-2)))
    return out


@register("identities", "cauchy_riemann")
def _cauchy_riemann(cfg):
    """Deviation at the configured grids and at half resolution; order from the pair."""
    out = []
    n, m = cfg.grid.get("n_x", 512), cfg.grid.get("m_t", 256)
    tol = cfg.tol("cauchy_riemann", 2e-3)
    for lam in cfg.lambdas:
        coarse = cauchy_riemann_check(_gauss(cfg, lam, n // 2), lam, cfg.tgrid(m // 2), tol=tol)
        fine = cauchy_riemann_check(_gauss(cfg, lam, n), lam, cfg.tgrid(m), tol=tol)
        order = math.log2(coarse.value / fine.value) if fine.value > 0 and coarse.value > 0 else math.inf
        fine.values.update(coarse_deviation=coarse.value, order=order)
        fine.runtime += coarse.runtime
        fine.stable = order >= 1.0
        fine.passed = fine.passed and fine.stable
        out.append(fine)
    return out


@register("identities", "intertwining")
def _intertwining(cfg):
    return [intertwining_check(_gauss(cfg, lam), lam, beta, gamma, cfg.tgrid(),
                               tol=cfg.tol("intertwining", 5e-3))
            for lam in cfg.lambdas for beta in cfg.betas for gamma in cfg.gammas]


@register("identities", "commutation")
def _commutation(cfg):
    return [commutation_check(RieszEvaluator(lam), _gauss(cfg, lam), s, tol=cfg.tol("commutation", 1e-3))
            for lam in cfg.lambdas for s in (0.5, 20.0)]


@register("identities", "semigroup")
def _semigroup(cfg):
    return [semigroup_check(lam, grid=cfg.xgrid(), tol=cfg.tol("semigroup", 1e-4)) for lam in cfg.lambdas]


@register("identities", "poisson_paths")
def _poisson_paths(cfg):
    return [poisson_path_check(lam, grid=cfg.xgrid(), tol=cfg.tol("poisson_paths", 1e-4)) for lam in cfg.lambdas]


@register("identities", "poisson_closed_form")
def _closed_form(cfg):
    return [closed_form_check(cfg.tol("poisson_closed_form", 1e-8))]


@register("identities", "hankel_roundtrip")
def _hankel(cfg):
    return [hankel_consistency_check(lam, 2048, cfg.tol("hankel_roundtrip", 1e-3)) for lam in cfg.lambdas]


# envelopes

def _envelope_runner(name):
    def run(cfg):
        return [envelope_check(name, lam, cfg.tol("envelopes", 0.05)) for lam in cfg.lambdas]
    return run


for _name in ENVELOPES:
    register("envelopes", _name)(_envelope_runner(_name))


# equivalence

@register("equivalence", "ratio_study")
def _ratio_study(cfg):
    deltas = sorted({float(b) for b in cfg.betas} | {float(b) + 1.0 for b in cfg.betas})
    return equivalence_study(tuple(cfg.lambdas), tuple(deltas), tuple((b["p"], b["n"]) for b in cfg.banach),
                             tuple(cfg.spaces), tuple(tuple(l) for l in cfg.levels), cfg.samples, cfg.seed)


@register("equivalence", "h1o_atom")
def _h1o_atom(cfg):
    return [h1o_atom_check(tuple(cfg.lambdas), tol=cfg.tol("h1o_atom", 0.05))]


@register("equivalence", "bmoo_log")
def _bmoo_log(cfg):
    return [bmoo_log_check(tol=cfg.tol("bmoo_log", 1e-2))]


@register("equivalence", "bmoo_step")
def _bmoo_step(cfg):
    return [bmoo_step_check(tol=cfg.tol("bmoo_step", 0.02))]


# gamma

@register("gamma", "mc_coverage")
def _mc_coverage(cfg):
    return [gamma_mc_check(200, max(cfg.samples, 1000), cfg.seed)]


@register("gamma", "scalar_identification")
def _scalar(cfg):
    lam = cfg.lambdas[0]
    F = g_field(_gauss(cfg, lam, 256), lam, 1.0, cfg.tgrid(128))
    i = int(np.argmax(np.sum(np.abs(F.values) ** 2, axis=0)))
    return [gamma_scalar_check(F.values[:, i], F.tgrid.logweights, tol=cfg.tol("scalar_identification", 1e-12))]


def run_suite(cfg: SuiteConfig) -> list[Report]:
    """Run the selected checks of the suite; reports sorted by case id."""
    names = cfg.checks or checks_of(cfg.suite)
    checks = [REGISTRY[n] for n in names]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            batches = list(pool.map(lambda c: c.run(cfg), checks))
    else:
        batches = [c.run(cfg) for c in checks]
    reports = [r for b in batches for r in b]
    for r in reports:
        if r.seed is None:
            r.seed = cfg.seed
    return sorted(reports, key=lambda r: r.case)
