"""Experiment configuration: JSON in, validated dataclasses out, and back again losslessly."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidConfig, InvalidDomain
from .geometry import BoundaryDatum, ComponentPhase, Domain
from .pharmonic import SolverParams
from .stationary import MeshParams
from .vortex import VortexConfig, check_compatibility


@dataclass(frozen=True)
class StationaryParams:
    delta_trust: float = 0.05
    samples_per_dim: int = 3
    certify: bool = True


@dataclass(frozen=True)
class StressParams:
    delta: float | None = None
    delta_list: tuple = (0.1, 0.15, 0.2)


@dataclass(frozen=True)
class SweepParams:
    grid: int = 3
    radius: float = 0.05
    coarsen: float = 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    domain: dict
    boundary: list
    vortices: list
    mesh: MeshParams = field(default_factory=MeshParams)
    p_schedule: tuple = (1.9, 1.95, 1.975)
    solver: SolverParams = field(default_factory=SolverParams)
    stress: StressParams = field(default_factory=StressParams)
    stationary: StationaryParams = field(default_factory=StationaryParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    output: str = "out"
    seed: int = 0

    # derived objects

    def build_domain(self):
        d = dict(self.domain)
        kind = d.pop("kind", None)
        try:
            if kind == "disk":
                return Domain.disk()
            if kind == "annulus":
                return Domain.annulus(float(d["r_inner"]))
            if kind == "polygon":
                return Domain.polygon(np.asarray(d["vertices"], dtype=float))
        except KeyError as exc:
            raise InvalidConfig(f"domain: missing key {exc}") from exc
        raise InvalidConfig(f"domain: unknown kind {kind!r}")

    def build_datum(self):
        comps = []
        for k, c in enumerate(self.boundary):
            try:
                comps.append(
                    ComponentPhase(
                        int(c["winding"]),
                        tuple(float(a) for a in c.get("cos", ())),
                        tuple(float(b) for b in c.get("sin", ())),
                        float(c.get("offset", 0.0)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidConfig(f"boundary component {k}: {exc}") from exc
        return BoundaryDatum(tuple(comps))

    def build_vortices(self, domain):
        pts, deg = [], []
        for k, v in enumerate(self.vortices):
            try:
                pts.append((float(v["x"]), float(v["y"])))
                deg.append(int(v["degree"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidConfig(f"vortex {k}: {exc}") from exc
        return VortexConfig(pts, deg, domain)

    def resolve(self):
        """(domain, datum, vortex config); raises InvalidConfig before any solve."""
        try:
            domain = self.build_domain()
        except InvalidDomain as exc:
            raise InvalidConfig(f"domain: {exc}") from exc
        datum = self.build_datum()
        if len(datum.components) != domain.n_components:
            raise InvalidConfig(
                f"boundary: {len(datum.components)} components given, domain has {domain.n_components}"
            )
        cfg = self.build_vortices(domain)
        report = check_compatibility(domain, datum, cfg)
        if not report:
            raise InvalidConfig(f"incompatible degrees: {report}")
        ps = list(self.p_schedule)
        if any(not (1 < p < 2) for p in ps) or any(b <= a for a, b in zip(ps, ps[1:])):
            raise InvalidConfig("p_schedule must increase inside (1, 2)")
        if self.mesh.h_near <= 0 or self.mesh.h_far < self.mesh.h_near:
            raise InvalidConfig("mesh: need 0 < h_near <= h_far")
        return domain, datum, cfg

    def to_dict(self):
        out = asdict(self)
        out["p_schedule"] = list(self.p_schedule)
        out["stress"]["delta_list"] = list(self.stress.delta_list)
        return out

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _section(cls, data, name):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfig(f"{name}: unknown keys {sorted(unknown)}")
    if "delta_list" in data:
        data["delta_list"] = tuple(float(x) for x in data["delta_list"])
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{name}: {exc}") from exc


def from_dict(data):
    if not isinstance(data, dict):
        raise InvalidConfig("configuration must be a JSON object")
    required = ("domain", "boundary", "vortices")
    for key in required:
        if key not in data:
            raise InvalidConfig(f"missing section {key!r}")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfig(f"unknown keys {sorted(unknown)}")
    try:
        return ExperimentConfig(
            domain=dict(data["domain"]),
            boundary=[dict(c) for c in data["boundary"]],
            vortices=[dict(v) for v in data["vortices"]],
            mesh=_section(MeshParams, data.get("mesh"), "mesh"),
            p_schedule=tuple(float(p) for p in data.get("p_schedule", (1.9, 1.95, 1.975))),
            solver=_section(SolverParams, data.get("solver"), "solver"),
            stress=_section(StressParams, data.get("stress"), "stress"),
            stationary=_section(StationaryParams, data.get("stationary"), "stationary"),
            sweep=_section(SweepParams, data.get("sweep"), "sweep"),
            output=str(data.get("output", "out")),
            seed=int(data.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from exc


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"not valid JSON: {exc}") from exc
    return from_dict(data)


def load(path):
    try:
        with open(path) as f:
            return loads(f.read())
    except OSError as exc:
        raise InvalidConfig(f"cannot read {path}: {exc}") from exc

