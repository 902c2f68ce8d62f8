"""INI-style run configuration with line-number error reporting.

Sections and keys:

    [grid]     scheme (fd2|compact4|sem), degree, d, cells, half_width
    [problem]  potential (exact_case | sin2_product | harmonic_lattice |
               constant(c) | file(path)), beta
    [flow]     kind, alpha, tau (number or 'linesearch'), dt, initial
    [stop]     tol, max_iter, stall_window
    [study]    levels (whitespace-separated cells values), schemes
    [output]   prefix

[grid] and [problem] are required; everything else has defaults
(alpha = 0.15, tau = 1, modified_h1 flow).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .flows import FixedStep, FlowConfig, FlowKind, LineSearchStep, StopRule
from .grids import GridSpec, Scheme
from . import potentials


class ConfigError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_KNOWN = {
    "grid": {"scheme", "degree", "d", "cells", "half_width"},
    "problem": {"potential", "beta"},
    "flow": {"kind", "alpha", "tau", "dt", "initial"},
    "stop": {"tol", "max_iter", "stall_window"},
    "study": {"levels", "schemes"},
    "output": {"prefix"},
}

_SCHEMES = {"fd2": Scheme.FD2, "compact4": Scheme.COMPACT4, "sem": Scheme.SEM}
_FLOWS = {k.value: k for k in FlowKind}


@dataclass
class RunConfig:
    grid: GridSpec
    potential_name: str
    potential_fn: object        # callable coords -> node values
    beta: float
    flow: FlowConfig
    stop: StopRule
    initial: str = "constant"
    prefix: str = "gpflow"
    study_levels: list[int] = field(default_factory=list)
    study_schemes: list[tuple[Scheme, int]] = field(default_factory=list)


def _tokenize(text: str):
    """Yield (line_number, section, key, value) for every assignment."""
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([a-z_]+)\]", line)
        if m:
            section = m.group(1)
            if section not in _KNOWN:
                raise ConfigError(ln, f"unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(ln, f"expected key = value, got {line!r}")
        if section is None:
            raise ConfigError(ln, "assignment before any [section] header")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN[section]:
            raise ConfigError(ln, f"unknown key {key!r} in section [{section}]")
        yield ln, section, key, value


def _numval(entry, key, kind=float):
    ln, value = entry
    return _number(ln, key, value, kind)


def _number(ln, key, value, kind=float):
    try:
        x = kind(value)
    except ValueError:
        raise ConfigError(ln, f"{key}: expected a {kind.__name__}, got {value!r}")
    if not np.isfinite(x):
        raise ConfigError(ln, f"{key}: value must be finite, got {value!r}")
    return x


def _parse_potential(ln, value, beta):
    m = re.fullmatch(r"([a-z_0-9]+)(?:\((.*)\))?", value.strip())
    if not m:
        raise ConfigError(ln, f"malformed potential spec {value!r}")
    name, arg = m.group(1), m.group(2)
    if name == "constant":
        if arg is None:
            raise ConfigError(ln, "constant potential needs a value: constant(c)")
        return name, potentials.constant(_number(ln, "potential", arg))
    if name == "file":
        if not arg:
            raise ConfigError(ln, "file potential needs a path: file(path)")
        return name, potentials.from_file(arg)
    if arg is not None:
        raise ConfigError(ln, f"potential {name!r} takes no argument")
    if name == "sin2_product":
        return name, potentials.sin2_product
    if name == "harmonic_lattice":
        return name, potentials.harmonic_lattice
    if name == "exact_case":
        return name, potentials.exact_case_potential(beta)
    raise ConfigError(ln, f"unknown potential {name!r}")


def _scheme_token(ln, tok):
    """'fd2', 'compact4', 'sem3' -> (Scheme, degree)."""
    m = re.fullmatch(r"(fd2|compact4)|sem(\d+)", tok)
    if not m:
        raise ConfigError(ln, f"unknown scheme {tok!r}")
    if m.group(1):
        return _SCHEMES[m.group(1)], 1
    return Scheme.SEM, int(m.group(2))


def parse_config(text: str) -> RunConfig:
    values: dict[tuple[str, str], tuple[int, str]] = {}
    sections = set()
    for ln, section, key, value in _tokenize(text):
        sections.add(section)
        values[(section, key)] = (ln, value)

    for required in ("grid", "problem"):
        if required not in sections:
            raise ConfigError(0, f"missing required section [{required}]")

    def get(section, key, default=None):
        return values.get((section, key), (0, default))

    # grid
    ln, tok = get("grid", "scheme", "fd2")
    scheme = _SCHEMES.get(tok.lower())
    degree = 1
    if scheme is None:
        scheme, degree = _scheme_token(ln, tok.lower())
    if scheme is Scheme.SEM and ("grid", "degree") in values:
        ln_d, dv = values[("grid", "degree")]
        degree = int(_number(ln_d, "degree", dv, int))
    d = int(_numval(get("grid", "d", "1"), "d", int))
    cells = int(_numval(get("grid", "cells", "32"), "cells", int))
    half_width = _numval(get("grid", "half_width", "1"), "half_width")
    try:
        grid = GridSpec(half_width, d, cells, scheme, degree)
    except ValueError as e:
        raise ConfigError(get("grid", "scheme")[0], str(e))

    # problem
    beta = _numval(get("problem", "beta", "0"), "beta")
    if beta < 0:
        raise ConfigError(get("problem", "beta")[0], f"beta must be >= 0, got {beta}")
    ln, pot = get("problem", "potential", None)
    if pot is None:
        raise ConfigError(0, "missing key 'potential' in section [problem]")
    pot_name, pot_fn = _parse_potential(ln, pot, beta)

    # flow
    ln, kind_tok = get("flow", "kind", "modified_h1")
    if kind_tok not in _FLOWS:
        raise ConfigError(ln, f"unknown flow kind {kind_tok!r}")
    alpha = _numval(get("flow", "alpha", "0.15"), "alpha")
    if alpha < 0:
        raise ConfigError(get("flow", "alpha")[0], f"alpha must be >= 0, got {alpha}")
    ln, tau_tok = get("flow", "tau", "1")
    if tau_tok.strip().lower() == "linesearch":
        step = LineSearchStep()
    else:
        tau = _number(ln, "tau", tau_tok)
        if tau <= 0:
            raise ConfigError(ln, f"tau must be positive, got {tau}")
        step = FixedStep(tau)
    dt = _numval(get("flow", "dt", "0.1"), "dt")
    if dt <= 0:
        raise ConfigError(get("flow", "dt")[0], f"dt must be positive, got {dt}")
    flow = FlowConfig(kind=_FLOWS[kind_tok], alpha=alpha, step=step, dt=dt)

    ln, initial = get("flow", "initial", "constant")
    if initial not in ("constant", "linear"):
        raise ConfigError(ln, f"initial must be 'constant' or 'linear', got {initial!r}")

    # stop
    tol = _numval(get("stop", "tol", "1e-12"), "tol")
    max_iter = int(_numval(get("stop", "max_iter", "500"), "max_iter", int))
    stall = int(_numval(get("stop", "stall_window", "10"), "stall_window", int))
    try:
        stop = StopRule(residual_tol=tol, stall_window=stall, max_iter=max_iter)
    except ValueError as e:
        raise ConfigError(get("stop", "tol")[0], str(e))

    # study
    levels = []
    if ("study", "levels") in values:
        ln, lv = values[("study", "levels")]
        levels = [int(_number(ln, "levels", t, int)) for t in lv.split()]
    schemes = []
    if ("study", "schemes") in values:
        ln, sv = values[("study", "schemes")]
        schemes = [_scheme_token(ln, t.lower()) for t in sv.split()]

    prefix = get("output", "prefix", "gpflow")[1]
    return RunConfig(grid=grid, potential_name=pot_name, potential_fn=pot_fn,
                     beta=beta, flow=flow, stop=stop, initial=initial,
                     prefix=prefix, study_levels=levels, study_schemes=schemes)
