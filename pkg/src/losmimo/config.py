"""Experiment configuration files.

Format
------
INI-style text read with :mod:`configparser`. Powers and Rician factors are
written in dB and converted to linear units exactly once, in
:meth:`ScenarioSpec.template`. Example::

    [experiment]
    name = fig1
    axis = M
    grid = 10, 20, 50, 100
    trials = 10000
    drops = 1
    seed = 1
    report = individual
    prelog = include

    [scenario]
    kind = single-user
    N = 10
    beta = 0.20479
    kappa_db = 5
    scaling = fixed-energy
    level_db = 20

    [series FF]
    scheme = FF

``[scenario]`` holds the base parameters; each ``[series LABEL]`` section
overrides some of them and becomes one table. Without series sections the
base scenario is the only series. Grid values on the ``E_u``, ``E_b``,
``p_u`` and ``kappa`` axes are in dB; other axes are linear.
"""

from dataclasses import dataclass, field, fields, replace
import configparser
import math
import re

from .analytic import SCALING_MODES, ScalingPolicy
from .channel import CellGeometry
from .errors import InvalidArgumentError
from .montecarlo import AXES, KINDS, SCHEMES, ScenarioTemplate
from .beamforming import DETECTORS

__all__ = ["ConfigError", "ScenarioSpec", "ExperimentConfig", "parse_config",
           "load_config", "serialize_config", "db_to_linear", "DB_AXES"]

DB_AXES = ("E_u", "E_b", "p_u", "kappa")
REPORTS = ("individual", "sum")
PRELOGS = ("include", "exclude")
ANGLE_MODES = ("given", "formula", "random")


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


class ConfigError(InvalidArgumentError):
    """Malformed or inconsistent configuration, with the offending line if known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario parameters in human units (dB powers, degree angles).

    ``beta=None`` draws gains from the cell geometry. ``tau=None`` uses one
    pilot symbol per user.
    """

    kind: str = "single-user"
    M: int = 10
    N: int = 10
    K: int = 1
    beta: float = 0.20479
    kappa_db: float = 5.0
    d: float = 0.3
    d_k: float = 0.3
    angles: str = "given"
    theta_deg: float = 45.0
    phi_deg: float = 45.0
    scaling: str = "fixed-energy"
    level_db: float = 20.0
    detector: str = "MRC"
    scheme: str = "LOS"
    T: int = 196
    tau: int = None
    g_b: float = 0.0
    g_u: float = 0.0
    alpha: float = None
    iota: float = None

    def template(self):
        """Linear-unit :class:`~losmimo.montecarlo.ScenarioTemplate`."""
        return ScenarioTemplate(
            kind=self.kind, M=self.M, N=self.N, K=self.K, beta=self.beta,
            kappa=db_to_linear(self.kappa_db), d=self.d, d_k=self.d_k,
            angles=self.angles, theta=math.radians(self.theta_deg),
            phi=math.radians(self.phi_deg),
            scaling=ScalingPolicy(self.scaling, db_to_linear(self.level_db)),
            detector=self.detector, scheme=self.scheme, T=self.T, tau=self.tau,
            g_b=self.g_b, g_u=self.g_u, alpha=self.alpha, iota=self.iota,
            geometry=CellGeometry(),
        )


_FIELDS = {f.name: f for f in fields(ScenarioSpec)}
_INT_KEYS = {"M", "N", "K", "T", "tau"}
_OPTIONAL = {"beta", "tau", "alpha", "iota"}
_CHOICES = {"kind": KINDS, "angles": ANGLE_MODES, "scaling": SCALING_MODES,
            "detector": DETECTORS, "scheme": SCHEMES}


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep over ``axis`` for one or more labelled scenario series."""

    name: str
    axis: str
    grid: tuple
    base: ScenarioSpec = field(default_factory=ScenarioSpec)
    series: tuple = ()
    trials: int = 10000
    drops: int = 1
    seed: int = 1
    report: str = "individual"
    prelog: str = "include"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown axis {self.axis!r}; expected one of {', '.join(AXES)}")
        if not self.grid:
            raise ConfigError("grid is empty")
        if self.trials < 0 or self.drops < 1 or self.seed < 0:
            raise ConfigError("need trials >= 0, drops >= 1 and seed >= 0")
        if self.report not in REPORTS:
            raise ConfigError(f"report must be one of {REPORTS}, got {self.report!r}")
        if self.prelog not in PRELOGS:
            raise ConfigError(f"prelog must be one of {PRELOGS}, got {self.prelog!r}")
        labels = [label for label, _ in self.series]
        if len(set(labels)) != len(labels):
            raise ConfigError("series labels must be unique")

    def resolved(self):
        """List of ``(label, ScenarioSpec)`` pairs, one per output table."""
        if not self.series:
            return [(self.name, self.base)]
        return [(label, replace(self.base, **dict(overrides))) for label, overrides in self.series]

    def grid_transform(self):
        """Map from grid values to the linear values applied to a template."""
        return db_to_linear if self.axis in DB_AXES else None


def _convert(key, raw, line):
    if key not in _FIELDS:
        raise ConfigError(f"unknown scenario key {key!r}", line)
    raw = raw.strip()
    if key in _OPTIONAL and raw.lower() in ("", "none", "random", "auto"):
        return None
    if key in _CHOICES:
        if raw not in _CHOICES[key]:
            raise ConfigError(f"{key} must be one of {', '.join(_CHOICES[key])}, got {raw!r}", line)
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number", line) from None


def _key_lines(text):
    """``(section, key) -> line number`` for diagnostics."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
        elif section and s and s[0] not in "#;" and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            out[(section, key)] = i
    return out


def _section_lines(text):
    return {m.group(1).strip(): i for i, line in enumerate(text.splitlines(), start=1)
            if (m := re.match(r"\s*\[(.+)\]\s*$", line))}


def _parser():
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    p.optionxform = str
    return p


def parse_config(text):
    """Parse configuration text into an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        With the line number of the offending entry when it can be located.
    """
    parser = _parser()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("entry before the first [section] header", exc.lineno) from None
    except configparser.ParsingError as exc:
        line, bad = exc.errors[0]
        raise ConfigError(f"cannot parse {bad.strip()}", line) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(str(exc), exc.lineno) from None

    lines = _key_lines(text)
    sections = _section_lines(text)
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    exp = parser["experiment"]
    allowed = {"name", "axis", "grid", "trials", "drops", "seed", "report", "prelog"}
    for key in exp:
        if key not in allowed:
            raise ConfigError(f"unknown experiment key {key!r}", lines.get(("experiment", key)))

    def get(key, cast, default):
        if key not in exp:
            return default
        try:
            return cast(exp[key].strip())
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {exp[key]!r}", lines.get(("experiment", key))) from None

    if "axis" not in exp or "grid" not in exp:
        raise ConfigError("[experiment] needs axis and grid", sections.get("experiment"))
    grid_line = lines.get(("experiment", "grid"))
    try:
        grid = tuple(float(v) for v in exp["grid"].split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"grid: cannot parse {exp['grid']!r}", grid_line) from None

    base_kwargs = {}
    if "scenario" in parser:
        for key, raw in parser["scenario"].items():
            base_kwargs[key] = _convert(key, raw, lines.get(("scenario", key)))
    series = []
    for name in parser.sections():
        if name.startswith("series "):
            label = name[len("series "):].strip()
            overrides = tuple((k, _convert(k, raw, lines.get((name, k)))) for k, raw in parser[name].items())
            series.append((label, overrides))
        elif name not in ("experiment", "scenario"):
            raise ConfigError(f"unknown section [{name}]", sections.get(name))
    checks = (("axis", AXES), ("report", REPORTS), ("prelog", PRELOGS))
    for key, choices in checks:
        if key in exp and exp[key].strip() not in choices:
            raise ConfigError(f"{key} must be one of {', '.join(choices)}, got {exp[key].strip()!r}",
                              lines.get(("experiment", key)))
    if not grid:
        raise ConfigError("grid is empty", grid_line)
    return ExperimentConfig(
        name=exp.get("name", "experiment").strip(), axis=exp["axis"].strip(), grid=grid,
        base=ScenarioSpec(**base_kwargs), series=tuple(series),
        trials=get("trials", int, 10000), drops=get("drops", int, 1), seed=get("seed", int, 1),
        report=get("report", str, "individual"), prelog=get("prelog", str, "include"),
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg):
    """Text form of ``cfg``; :func:`parse_config` inverts it exactly."""
    out = ["[experiment]",
           f"name = {cfg.name}",
           f"axis = {cfg.axis}",
           "grid = " + ", ".join(repr(float(v)) for v in cfg.grid),
           f"trials = {cfg.trials}",
           f"drops = {cfg.drops}",
           f"seed = {cfg.seed}",
           f"report = {cfg.report}",
           f"prelog = {cfg.prelog}",
           "",
           "[scenario]"]
    out += [f"{f.name} = {_fmt(getattr(cfg.base, f.name))}" for f in fields(ScenarioSpec)]
    for label, overrides in cfg.series:
        out += ["", f"[series {label}]"]
        out += [f"{k} = {_fmt(v)}" for k, v in overrides]
    return "\n".join(out) + "\n"
