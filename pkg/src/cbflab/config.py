"""Run configuration: a flat sectioned key = value format, fully validated.

The grammar (documented in the README) is deliberately small:

    [section]
    key = value        # '#' starts a comment anywhere

Field-valued entries (forcing, phi, initial) use one of

    none
    file <path>
    modes k=(i,j[,l]) a=(<complex>,...) | k=... a=...
    random seed=<int> hnorm=<float> kmax=<float>

Parsing reports every syntax error with its line number and every semantic
violation with its field path, not just the first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields as dc_fields

from .errors import ValidationError
from .fields import SpectralVelocity, random_field, read_field, single_mode_field
from .grid import TorusGrid

_MODES = ("none", "additive", "multiplicative")


# ---------------------------------------------------------------------------
# field specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoneSpec:
    def serialize(self) -> str:
        return "none"


@dataclass(frozen=True)
class FileSpec:
    path: str

    def serialize(self) -> str:
        return f"file {self.path}"


@dataclass(frozen=True)
class ModesSpec:
    entries: tuple  # of (mode tuple, amplitude tuple of complex)

    def serialize(self) -> str:
        parts = []
        for k, a in self.entries:
            ks = ",".join(str(int(m)) for m in k)
            amps = ",".join(repr(complex(c)) for c in a)
            parts.append(f"k=({ks}) a=({amps})")
        return "modes " + " | ".join(parts)


@dataclass(frozen=True)
class RandomSpec:
    seed: int
    hnorm: float
    kmax: float = -1.0  # nonpositive means "use the grid default N/4"

    def serialize(self) -> str:
        return f"random seed={self.seed} hnorm={self.hnorm!r} kmax={self.kmax!r}"


def parse_field_spec(text: str, where: str, problems: list):
    text = text.strip()
    if text == "none" or text == "":
        return NoneSpec()
    if text.startswith("file"):
        path = text[4:].strip()
        if not path:
            problems.append(f"{where}: file spec needs a path")
            return NoneSpec()
        return FileSpec(path)
    if text.startswith("random"):
        kv = dict(re.findall(r"(\w+)\s*=\s*([^\s]+)", text[6:]))
        try:
            return RandomSpec(
                seed=int(kv.get("seed", "0")),
                hnorm=float(kv.get("hnorm", "1.0")),
                kmax=float(kv.get("kmax", "-1.0")),
            )
        except ValueError as exc:
            problems.append(f"{where}: bad random spec ({exc})")
            return NoneSpec()
    if text.startswith("modes"):
        entries = []
        body = text[5:].strip()
        for chunk in body.split("|"):
            m = re.match(
                r"\s*k=\(([^)]*)\)\s+a=\((.*)\)\s*$", chunk
            )
            if not m:
                problems.append(f"{where}: cannot parse mode entry {chunk.strip()!r}")
                continue
            try:
                k = tuple(int(s) for s in m.group(1).split(","))
                amps = tuple(complex(s.strip()) for s in m.group(2).split(","))
            except ValueError as exc:
                problems.append(f"{where}: bad mode entry {chunk.strip()!r} ({exc})")
                continue
            if len(k) != len(amps):
                problems.append(
                    f"{where}: mode {k} has {len(amps)} amplitude components"
                )
                continue
            entries.append((k, amps))
        if not entries:
            problems.append(f"{where}: modes spec has no valid entries")
            return NoneSpec()
        return ModesSpec(tuple(entries))
    problems.append(f"{where}: unknown field spec {text!r}")
    return NoneSpec()


def build_field(spec, grid: TorusGrid, h_norm_override: float | None = None):
    """Materialize a field spec on a grid; None for the zero/none spec."""
    if isinstance(spec, NoneSpec):
        return None
    if isinstance(spec, FileSpec):
        u = read_field(spec.path, dealias_factor=grid.dealias_factor)
        if not u.grid.compatible(grid):
            raise ValidationError(f"field file {spec.path} has an incompatible grid")
        return u
    if isinstance(spec, RandomSpec):
        kmax = spec.kmax if spec.kmax > 0 else grid.N / 4.0
        return random_field(grid, spec.seed, h_norm=spec.hnorm, kmax=kmax)
    if isinstance(spec, ModesSpec):
        total = None
        for k, a in spec.entries:
            u = single_mode_field(grid, k, a)
            total = u.coeffs if total is None else total + u.coeffs
        u = SpectralVelocity(grid, total)
        if h_norm_override is not None:
            from .fields import rescale_to_h

            u = rescale_to_h(u, h_norm_override)
        return u
    raise ValidationError(f"unhandled field spec {spec!r}")


# ---------------------------------------------------------------------------
# config sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSection:
    dim: int = 2
    N: int = 32
    L: float = 2.0 * math.pi
    dealias_factor: float = 1.5


@dataclass(frozen=True)
class PhysicsSection:
    mu: float = 1.0
    beta: float = 1.0
    r: float = 3.0
    darcy: float = 0.0
    forcing: object = field(default_factory=NoneSpec)
    forcing_h_norm: float | None = None


@dataclass(frozen=True)
class NoiseSection:
    mode: str = "none"
    epsilon: float = 0.0
    eps_grid: tuple = ()
    ou_alpha: float = 1.0
    phi: object = field(default_factory=NoneSpec)
    seed: int = 0
    n_samples: int = 2


@dataclass(frozen=True)
class SolverSection:
    h: float = 0.01
    T: float = 10.0
    t_pull: float = 40.0
    tol: float = 1.0e-8
    pullback_tol: float = 1.0e-4
    cfl_safety: float = 0.4
    blowup_guard: float = 1.0e6
    n_probes: int = 3
    sample_every: int = 0
    initial: object = field(default_factory=NoneSpec)


@dataclass(frozen=True)
class ConstantsSection:
    c1: float = math.sqrt(2.0)
    c2: float = math.sqrt(2.0)
    c3: float = 2.0


@dataclass(frozen=True)
class OutputSection:
    snapshot_every: int = 0


@dataclass(frozen=True)
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    solver: SolverSection = field(default_factory=SolverSection)
    constants: ConstantsSection = field(default_factory=ConstantsSection)
    output: OutputSection = field(default_factory=OutputSection)


_SECTIONS = {
    "grid": GridSection,
    "physics": PhysicsSection,
    "noise": NoiseSection,
    "solver": SolverSection,
    "constants": ConstantsSection,
    "output": OutputSection,
}

_FIELD_SPEC_KEYS = {"forcing", "phi", "initial"}


def _convert(section, key, raw, line_no, problems):
    where = f"{section}.{key}"
    if key in _FIELD_SPEC_KEYS:
        return parse_field_spec(raw, where, problems)
    if key == "eps_grid":
        try:
            return tuple(float(s) for s in raw.split(",") if s.strip())
        except ValueError:
            problems.append(f"line {line_no}: {where}: bad number list {raw!r}")
            return ()
    if key == "mode":
        return raw.strip()
    if key == "forcing_h_norm":
        try:
            return float(raw)
        except ValueError:
            problems.append(f"line {line_no}: {where}: bad number {raw!r}")
            return None
    cls = _SECTIONS[section]
    hint = {f.name: f.type for f in dc_fields(cls)}[key]
    try:
        if "int" in str(hint):
            return int(raw)
        return float(raw)
    except ValueError:
        problems.append(f"line {line_no}: {where}: bad number {raw!r}")
        return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ValidationError listing every problem."""
    problems: list[str] = []
    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    section = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                problems.append(f"line {line_no}: unterminated section header")
                continue
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                problems.append(f"line {line_no}: unknown section [{name}]")
                section = None
            else:
                section = name
            continue
        if "=" not in line:
            problems.append(f"line {line_no}: expected key = value, got {line!r}")
            continue
        if section is None:
            problems.append(f"line {line_no}: key outside any known section")
            continue
        key, raw = (part.strip() for part in line.split("=", 1))
        known = {f.name for f in dc_fields(_SECTIONS[section])}
        if key not in known:
            problems.append(f"line {line_no}: unknown key {section}.{key}")
            continue
        val = _convert(section, key, raw, line_no, problems)
        if val is not None:
            values[section][key] = val

    if problems:
        raise ValidationError(problems)

    cfg = RunConfig(**{name: cls(**values[name]) for name, cls in _SECTIONS.items()})
    problems = validate_config(cfg)
    if problems:
        raise ValidationError(problems)
    return cfg


def validate_config(cfg: RunConfig) -> list:
    """Cross-field checks mirroring every module precondition."""
    p: list[str] = []
    g, ph, nz, sv, cs = cfg.grid, cfg.physics, cfg.noise, cfg.solver, cfg.constants
    if g.dim not in (2, 3):
        p.append(f"grid.dim: must be 2 or 3, got {g.dim}")
    if g.N % 2 or g.N < 8:
        p.append(f"grid.N: must be even and >= 8, got {g.N}")
    if not g.L > 0:
        p.append(f"grid.L: must be positive, got {g.L}")
    if not g.dealias_factor >= 1:
        p.append(f"grid.dealias_factor: must be >= 1, got {g.dealias_factor}")
    if not ph.mu > 0:
        p.append(f"physics.mu: must be positive, got {ph.mu}")
    if ph.beta < 0:
        p.append(f"physics.beta: must be >= 0, got {ph.beta}")
    if ph.r < 1:
        p.append(f"physics.r: must be >= 1, got {ph.r}")
    if ph.darcy < 0:
        p.append(f"physics.darcy: must be >= 0, got {ph.darcy}")
    if g.dim == 3:
        if ph.r < 3:
            p.append(f"physics.r: 3D requires r >= 3, got {ph.r}")
        elif ph.r == 3 and 2.0 * ph.beta * ph.mu < 1.0:
            p.append("physics.beta: 3D with r = 3 requires 2*beta*mu >= 1")
    if nz.mode not in _MODES:
        p.append(f"noise.mode: must be one of {_MODES}, got {nz.mode!r}")
    if not (0.0 <= nz.epsilon <= 1.0):
        p.append(f"noise.epsilon: must lie in [0, 1], got {nz.epsilon}")
    if any(not (0.0 < e <= 1.0) for e in nz.eps_grid):
        p.append(f"noise.eps_grid: entries must lie in (0, 1], got {nz.eps_grid}")
    if not nz.ou_alpha > 0:
        p.append(f"noise.ou_alpha: must be positive, got {nz.ou_alpha}")
    for where, spec in (
        ("physics.forcing", ph.forcing),
        ("noise.phi", nz.phi),
        ("solver.initial", sv.initial),
    ):
        if isinstance(spec, ModesSpec):
            for k, _ in spec.entries:
                if len(k) != g.dim:
                    p.append(
                        f"{where}: mode {k} has {len(k)} components for a "
                        f"{g.dim}D grid"
                    )
    if nz.mode == "additive":
        if g.dim == 3:
            p.append("noise.mode: additive noise is 2D only (no 3D additive theory)")
        if isinstance(nz.phi, NoneSpec):
            p.append("noise.phi: additive mode requires a noise profile")
    if nz.mode == "multiplicative" and not isinstance(nz.phi, NoneSpec):
        p.append("noise.phi: only meaningful for additive noise")
    if nz.mode == "none" and nz.epsilon != 0.0:
        p.append("noise.epsilon: mode 'none' requires epsilon = 0")
    if nz.mode != "none" and ph.darcy != 0.0:
        p.append("physics.darcy: random dynamics require darcy = 0")
    if nz.n_samples < 1:
        p.append(f"noise.n_samples: must be >= 1, got {nz.n_samples}")
    if not sv.h > 0:
        p.append(f"solver.h: must be positive, got {sv.h}")
    if not sv.T > 0:
        p.append(f"solver.T: must be positive, got {sv.T}")
    if not sv.t_pull > 0:
        p.append(f"solver.t_pull: must be positive, got {sv.t_pull}")
    if not sv.tol > 0:
        p.append(f"solver.tol: must be positive, got {sv.tol}")
    if not sv.pullback_tol > 0:
        p.append(f"solver.pullback_tol: must be positive, got {sv.pullback_tol}")
    if not (0.0 < sv.cfl_safety <= 1.0):
        p.append(f"solver.cfl_safety: must lie in (0, 1], got {sv.cfl_safety}")
    if sv.n_probes < 2:
        p.append(f"solver.n_probes: must be >= 2, got {sv.n_probes}")
    for name, val in (("c1", cs.c1), ("c2", cs.c2), ("c3", cs.c3)):
        if not val > 0:
            p.append(f"constants.{name}: must be positive, got {val}")
    if cfg.output.snapshot_every < 0:
        p.append("output.snapshot_every: must be >= 0")
    return p


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(text))) == parse(text)."""
    out = []
    for name, section in (
        ("grid", cfg.grid),
        ("physics", cfg.physics),
        ("noise", cfg.noise),
        ("solver", cfg.solver),
        ("constants", cfg.constants),
        ("output", cfg.output),
    ):
        out.append(f"[{name}]")
        for f in dc_fields(section):
            val = getattr(section, f.name)
            if f.name in _FIELD_SPEC_KEYS:
                out.append(f"{f.name} = {val.serialize()}")
            elif f.name == "eps_grid":
                if val:
                    out.append(f"{f.name} = {','.join(repr(float(e)) for e in val)}")
            elif val is None:
                continue
            elif isinstance(val, float):
                out.append(f"{f.name} = {val!r}")
            else:
                out.append(f"{f.name} = {val}")
        out.append("")
    return "\n".join(out)
