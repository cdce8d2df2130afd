"""Declarative scenarios: YAML schema, validation, runs and series export.

A scenario document looks like::

    schema_version: 1
    name: qe_pair_rabi
    basis: {money: 1, debt: 1}
    terms:
      - qe: {amplitude: 1.0}
    initial_state: {vacuum: {}}
    grid: {t_start: 0.0, t_end: 3.141592653589793, n_steps: 1000}
    observables: [N_money, charge]
    seed: 0
    outputs: [csv, jsonl]

Unknown keys are errors. Validation reports every problem with a path such
as ``terms[1].viol.delta_pr``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from . import __version__
from .errors import ModelError, ParseError, UnsupportedFormat, ValidationError
from .evolve import EvolutionReport, TimeGrid, evolve_scheduled
from .exciton1d import Free, GridSpec, Harmonic, SquareWell, load_tabulated
from .fock import FockBasis, ModeId, build_basis
from .hamiltonian import (
    Constant,
    Exponential,
    LinearRamp,
    ModeEnergies,
    PiecewiseLinear,
    Schedule,
    ViolationSpec,
    h_binding,
    h_exchange,
    h_free,
    h_qe,
    h_viol,
    v_perturb,
)
from .observe import (
    TimeSeries,
    charge,
    default_partition,
    entanglement_entropy,
    exciton_count,
    mode_occupation,
    mutual_information,
    separability_gap,
)
from .ops import Operator, QubitRegister, qubit_projectors, sigma_x, sigma_z, zero
from .states import (
    ASSET_REGISTER,
    BELL_REGISTER,
    RNG_NAME,
    StateVector,
    asset_superposition,
    basis_state,
    bell_qe,
    loan_pair,
    measure,
    product_state,
    qe_pair,
    recombine,
    vacuum,
)

SCHEMA_VERSION = 1
#: Dense evolution cap for scenarios (2**12 = 4096 states).
MAX_SCENARIO_MODES = 12
FORMATS = ("csv", "jsonl")

FOCK_OBSERVABLES = (
    "N_money", "N_debt", "N_total", "charge", "energy", "exciton_count", "norm",
    "entropy", "mutual_information", "separability_gap",
)
REGISTER_OBSERVABLES = ("energy", "norm", "entropy", "mutual_information", "separability_gap")
_BIPARTITE = ("entropy", "mutual_information", "separability_gap")


# -- typed config -------------------------------------------------------------


@dataclass(frozen=True)
class FockSpec:
    money: int
    debt: int
    sector: int | None = None

    def to_dict(self):
        return {"money": self.money, "debt": self.debt, "sector": self.sector}


@dataclass(frozen=True)
class RegisterSpec:
    qubits: tuple[str, ...]

    def to_dict(self):
        return {"qubits": list(self.qubits)}


@dataclass(frozen=True)
class Term:
    """One Hamiltonian term: ``kind`` plus its validated parameters."""

    kind: str
    params: dict = field(default_factory=dict, hash=False)

    def to_dict(self):
        return {self.kind: _plain(self.params)}


@dataclass(frozen=True)
class InitialState:
    kind: str
    params: dict = field(default_factory=dict, hash=False)

    def to_dict(self):
        return {self.kind: _plain(self.params)}


@dataclass(frozen=True)
class Event:
    kind: str  # "repay" | "measure"
    t: float
    params: dict = field(default_factory=dict, hash=False)

    def to_dict(self):
        return {self.kind: {"t": self.t, **_plain(self.params)}}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    basis: FockSpec | RegisterSpec
    terms: tuple[Term, ...]
    initial_state: InitialState
    grid: TimeGrid
    observables: tuple[str, ...]
    seed: int = 0
    outputs: tuple[str, ...] = FORMATS
    energies: ModeEnergies | None = None
    events: tuple[Event, ...] = ()
    description: str = ""
    schema_version: int = SCHEMA_VERSION

    @property
    def is_fock(self) -> bool:
        return isinstance(self.basis, FockSpec)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"schema_version": self.schema_version, "name": self.name}
        if self.description:
            d["description"] = self.description
        d["basis"] = self.basis.to_dict()
        if self.energies is not None:
            d["energies"] = {"money": list(self.energies.eps_money), "debt": list(self.energies.eps_debt)}
        d["terms"] = [t.to_dict() for t in self.terms]
        d["initial_state"] = self.initial_state.to_dict()
        d["grid"] = {"t_start": self.grid.t_start, "t_end": self.grid.t_end, "n_steps": self.grid.n_steps}
        d["observables"] = list(self.observables)
        if self.events:
            d["events"] = [e.to_dict() for e in self.events]
        d["seed"] = self.seed
        d["outputs"] = list(self.outputs)
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def with_grid(self, grid: TimeGrid) -> ScenarioConfig:
        return dataclasses.replace(self, grid=grid)


def _plain(obj):
    """Convert validated parameters back to YAML-safe primitives."""
    if isinstance(obj, Schedule):
        return obj.to_dict()
    if isinstance(obj, ModeId):
        return obj.label
    if isinstance(obj, complex):
        return obj.real if obj.imag == 0 else str(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


# -- validation ---------------------------------------------------------------

_MISSING = object()


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


class _Reader:
    """Collects every validation problem instead of stopping at the first."""

    def __init__(self):
        self.errors: list[tuple[str, str]] = []

    def err(self, path, msg):
        self.errors.append((path, msg))
        return None

    def mapping(self, obj, path, required=(), optional=()):
        if not isinstance(obj, dict):
            return self.err(path, f"expected a mapping, got {type(obj).__name__}")
        allowed = tuple(required) + tuple(optional)
        for k in obj:
            if k not in allowed:
                self.err(_join(path, k), f"unknown key; expected one of {list(allowed)}")
        for k in required:
            if k not in obj:
                self.err(_join(path, k), "missing required key")
        return obj

    def tagged(self, obj, path, kinds):
        """Single-key mapping ``{kind: body}``; returns ``(kind, body, path)``."""
        if not isinstance(obj, dict) or len(obj) != 1:
            self.err(path, f"expected a single-key mapping naming one of {list(kinds)}")
            return None, None, path
        (kind, body), = obj.items()
        if kind not in kinds:
            self.err(_join(path, kind), f"unknown kind; expected one of {list(kinds)}")
            return None, None, path
        if body is None:
            body = {}
        return kind, body, _join(path, kind)

    def number(self, obj, path, minimum=None, positive=False, default=_MISSING):
        if obj is _MISSING:
            if default is _MISSING:
                return self.err(path, "missing required key")
            return default
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            return self.err(path, f"expected a number, got {obj!r}")
        x = float(obj)
        if not math.isfinite(x):
            return self.err(path, "must be finite")
        if minimum is not None and x < minimum:
            return self.err(path, f"must be >= {minimum}")
        if positive and x <= 0:
            return self.err(path, "must be > 0")
        return x

    def complex_number(self, obj, path):
        if isinstance(obj, str):
            try:
                z = complex(obj.replace(" ", ""))
            except ValueError:
                return self.err(path, f"cannot parse complex number {obj!r}")
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                return self.err(path, "must be finite")
            return z
        x = self.number(obj, path)
        return None if x is None else complex(x)

    def integer(self, obj, path, minimum=None, maximum=None, default=_MISSING):
        if obj is _MISSING:
            if default is _MISSING:
                return self.err(path, "missing required key")
            return default
        if isinstance(obj, bool) or not isinstance(obj, int):
            return self.err(path, f"expected an integer, got {obj!r}")
        if minimum is not None and obj < minimum:
            return self.err(path, f"must be >= {minimum}")
        if maximum is not None and obj > maximum:
            return self.err(path, f"must be <= {maximum}")
        return obj

    def string(self, obj, path, default=_MISSING):
        if obj is _MISSING:
            if default is _MISSING:
                return self.err(path, "missing required key")
            return default
        if not isinstance(obj, str):
            return self.err(path, f"expected a string, got {obj!r}")
        return obj

    def sequence(self, obj, path):
        if not isinstance(obj, list):
            self.err(path, f"expected a list, got {type(obj).__name__}")
            return []
        return obj

    def schedule(self, obj, path) -> Schedule | None:
        kinds = {
            "constant": ("value",),
            "linear_ramp": ("slope",),
            "exponential": ("a", "b"),
            "piecewise_linear": ("points",),
        }
        m = self.mapping(obj, path, ("kind",), ("value", "slope", "a", "b", "points"))
        if m is None or "kind" not in m:
            return None
        kind = m["kind"]
        if kind not in kinds:
            return self.err(_join(path, "kind"), f"unknown schedule kind {kind!r}; expected one of {list(kinds)}")
        for k in m:
            if k != "kind" and k in ("value", "slope", "a", "b", "points") and k not in kinds[kind]:
                self.err(_join(path, k), f"not a parameter of {kind}")
        vals = [self.number(m.get(k, _MISSING), _join(path, k)) for k in kinds[kind] if k != "points"]
        if kind == "piecewise_linear":
            pts = []
            for i, p in enumerate(self.sequence(m.get("points", []), _join(path, "points"))):
                pp = _join(_join(path, "points"), i)
                if not isinstance(p, list) or len(p) != 2:
                    self.err(pp, "expected [t, value]")
                    continue
                t, v = self.number(p[0], pp), self.number(p[1], pp)
                if t is not None and v is not None:
                    pts.append((t, v))
            try:
                sched = PiecewiseLinear(tuple(pts))
            except ValueError as e:
                return self.err(_join(path, "points"), str(e))
        elif any(v is None for v in vals):
            return None
        else:
            sched = {"constant": Constant, "linear_ramp": LinearRamp, "exponential": Exponential}[kind](*vals)
        v0 = sched.value(0.0)
        if abs(v0) > 1e-12:
            return self.err(path, f"schedule value(0) = {v0!r} != 0; perturbations must vanish at t=0 (V(0)=0)")
        return sched


def _mode_label(r: _Reader, obj, path, spec: FockSpec) -> ModeId | None:
    if not isinstance(obj, str):
        return r.err(path, f"expected a mode label like 'm0' or 'd1', got {obj!r}")
    try:
        mode = ModeId.parse(obj)
    except ValueError as e:
        return r.err(path, str(e))
    limit = spec.money if mode.species.value == "money" else spec.debt
    if mode.index >= limit:
        return r.err(path, f"mode {obj} does not exist (M={spec.money}, D={spec.debt})")
    return mode


def _pair_list(r: _Reader, obj, path, spec: FockSpec) -> list[tuple[int, int]]:
    out = []
    for i, p in enumerate(r.sequence(obj, path)):
        pp = _join(path, i)
        if not isinstance(p, list) or len(p) != 2:
            r.err(pp, "expected [k, q]")
            continue
        k = r.integer(p[0], pp, 0, spec.money - 1)
        q = r.integer(p[1], pp, 0, spec.debt - 1)
        if k is not None and q is not None:
            out.append((k, q))
    return out


def _read_term(r: _Reader, obj, path, basis) -> Term | None:
    fock_kinds = ("free", "qe", "exciton", "viol", "perturb", "exchange")
    reg_kinds = ("sigma_x", "sigma_z")
    kind, body, p = r.tagged(obj, path, fock_kinds + reg_kinds)
    if kind is None:
        return None
    if isinstance(basis, FockSpec) and kind in reg_kinds:
        return r.err(p, f"{kind} terms need a qubit register basis")
    if isinstance(basis, RegisterSpec) and kind in fock_kinds:
        return r.err(p, f"{kind} terms need a Fock basis")
    if basis is None:
        return None
    if kind == "free":
        r.mapping(body, p)
        return Term("free", {})
    if kind == "qe":
        m = r.mapping(body, p, (), ("amplitude", "pairs"))
        if m is None:
            return None
        amp = r.number(m.get("amplitude", _MISSING), _join(p, "amplitude"), default=1.0)
        pairs = (
            _pair_list(r, m["pairs"], _join(p, "pairs"), basis)
            if "pairs" in m
            else [(k, k) for k in range(min(basis.money, basis.debt))]
        )
        return Term("qe", {"amplitude": amp, "pairs": [list(x) for x in pairs]})
    if kind == "exciton":
        m = r.mapping(body, p, ("coupling",))
        if m is None or "coupling" not in m:
            return None
        cp = _join(p, "coupling")
        rows = r.sequence(m["coupling"], cp)
        if len(rows) != basis.money:
            return r.err(cp, f"expected {basis.money} rows (money modes), got {len(rows)}")
        u = []
        for i, row in enumerate(rows):
            row = r.sequence(row, _join(cp, i))
            if len(row) != basis.debt:
                r.err(_join(cp, i), f"expected {basis.debt} entries (debt modes), got {len(row)}")
            u.append([r.complex_number(x, _join(_join(cp, i), j)) for j, x in enumerate(row)])
        return Term("exciton", {"coupling": u})
    if kind == "viol":
        m = r.mapping(body, p, ("delta_pr",), ("g",))
        if m is None:
            return None
        d = r.number(m.get("delta_pr", _MISSING), _join(p, "delta_pr"), minimum=0.0)
        g = r.number(m.get("g", _MISSING), _join(p, "g"), minimum=0.0, default=1.0)
        return Term("viol", {"delta_pr": d, "g": g})
    if kind == "perturb":
        m = r.mapping(body, p, (), ("profit", "interest"))
        if m is None:
            return None
        out = {}
        for key, n in (("profit", basis.money), ("interest", basis.debt)):
            kp = _join(p, key)
            val = m.get(key, {"kind": "linear_ramp", "slope": 0.0})
            if isinstance(val, list):
                if len(val) != n:
                    r.err(kp, f"expected {n} per-mode schedules, got {len(val)}")
                out[key] = [r.schedule(s, _join(kp, i)) for i, s in enumerate(val)]
            else:
                out[key] = r.schedule(val, kp)
        return Term("perturb", out)
    if kind == "exchange":
        m = r.mapping(body, p, ("pairs",), ("amplitude",))
        if m is None:
            return None
        amp = r.number(m.get("amplitude", _MISSING), _join(p, "amplitude"), default=1.0)
        pairs = []
        for i, pr in enumerate(r.sequence(m.get("pairs", []), _join(p, "pairs"))):
            pp = _join(_join(p, "pairs"), i)
            if not isinstance(pr, list) or len(pr) != 2:
                r.err(pp, "expected [mode, mode]")
                continue
            a, b = _mode_label(r, pr[0], pp, basis), _mode_label(r, pr[1], pp, basis)
            if a is not None and a == b:
                r.err(pp, "exchange needs two distinct modes")
            elif a is not None and b is not None:
                pairs.append([a, b])
        return Term("exchange", {"amplitude": amp, "pairs": pairs})
    # sigma_x / sigma_z
    m = r.mapping(body, p, ("target",), ("amplitude",))
    if m is None:
        return None
    target = r.string(m.get("target", _MISSING), _join(p, "target"))
    if target is not None and target not in basis.qubits:
        r.err(_join(p, "target"), f"unknown qubit {target!r}; register has {list(basis.qubits)}")
    amp = r.number(m.get("amplitude", _MISSING), _join(p, "amplitude"), default=1.0)
    return Term(kind, {"target": target, "amplitude": amp})


def _read_initial(r: _Reader, obj, path, basis) -> InitialState | None:
    fock = ("vacuum", "qe_pair", "loan_pair", "occupation")
    reg = ("asset_superposition", "bell_qe", "product")
    kind, body, p = r.tagged(obj, path, fock + reg)
    if kind is None or basis is None:
        return None
    if isinstance(basis, FockSpec) != (kind in fock):
        return r.err(p, f"initial state {kind} does not live in a {'Fock basis' if kind in reg else 'qubit register'}")
    if kind == "vacuum":
        r.mapping(body, p)
        return InitialState(kind, {})
    if kind in ("qe_pair", "loan_pair"):
        m = r.mapping(body, p, (), ("k", "q"))
        if m is None:
            return None
        if basis.money < 1 or basis.debt < 1:
            return r.err(p, "a money-debt pair needs at least one money and one debt mode")
        k = r.integer(m.get("k", _MISSING), _join(p, "k"), 0, basis.money - 1, default=0)
        q = r.integer(m.get("q", _MISSING), _join(p, "q"), 0, basis.debt - 1, default=0)
        return InitialState(kind, {"k": k, "q": q})
    if kind == "occupation":
        m = r.mapping(body, p, ("bits",))
        bits = None if m is None else r.string(m.get("bits", _MISSING), _join(p, "bits"))
        if bits is None:
            return None
        if len(bits) != basis.money + basis.debt or set(bits) - {"0", "1"}:
            return r.err(_join(p, "bits"), f"expected {basis.money + basis.debt} characters of 0/1")
        return InitialState(kind, {"bits": bits})
    if kind == "asset_superposition":
        if tuple(basis.qubits) != ASSET_REGISTER.labels:
            return r.err(p, f"asset_superposition needs qubits {list(ASSET_REGISTER.labels)}")
        m = r.mapping(body, p, ("a", "b"))
        if m is None:
            return None
        a = r.complex_number(m.get("a"), _join(p, "a"))
        b = r.complex_number(m.get("b"), _join(p, "b"))
        if a is not None and b is not None and abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-9:
            return r.err(p, "|a|^2 + |b|^2 must equal 1")
        return InitialState(kind, {"a": a, "b": b})
    if kind == "bell_qe":
        if tuple(basis.qubits) != BELL_REGISTER.labels:
            return r.err(p, f"bell_qe needs qubits {list(BELL_REGISTER.labels)}")
        m = r.mapping(body, p, (), ("kind",))
        bk = None if m is None else r.string(m.get("kind", _MISSING), _join(p, "kind"), default="phi_plus")
        if bk is not None and bk != "phi_plus":
            return r.err(_join(p, "kind"), "only 'phi_plus' is defined")
        return InitialState(kind, {"kind": bk})
    m = r.mapping(body, p, ("spins",))
    spins = None if m is None else r.string(m.get("spins", _MISSING), _join(p, "spins"))
    if spins is not None and (len(spins) != len(basis.qubits) or set(spins) - set("ud")):
        return r.err(_join(p, "spins"), f"expected {len(basis.qubits)} characters of u/d")
    return InitialState(kind, {"spins": spins})


def _valid_observables(basis) -> list[str]:
    if isinstance(basis, FockSpec):
        extra = [f"n:m{k}" for k in range(basis.money)] + [f"n:d{q}" for q in range(basis.debt)]
        return list(FOCK_OBSERVABLES) + extra
    return list(REGISTER_OBSERVABLES) + [f"p_up:{lbl}" for lbl in basis.qubits]


def config_from_dict(data) -> ScenarioConfig:
    """Validate a decoded document; raises ``ValidationError`` listing all problems."""
    r = _Reader()
    top = r.mapping(
        data,
        "",
        ("schema_version", "name", "basis", "terms", "initial_state", "grid", "observables", "seed", "outputs"),
        ("description", "energies", "events"),
    )
    if top is None:
        raise ValidationError(r.errors)

    version = r.integer(top.get("schema_version", _MISSING), "schema_version")
    if version is not None and version != SCHEMA_VERSION:
        r.err("schema_version", f"unsupported schema_version {version}; this build reads {SCHEMA_VERSION}")
    name = r.string(top.get("name", _MISSING), "name")
    if name is not None and (not name or any(c in name for c in "/\\\0")):
        r.err("name", "must be a non-empty file-name-safe string")
    description = r.string(top.get("description", _MISSING), "description", default="")

    basis = None
    b = top.get("basis")
    if isinstance(b, dict) and "qubits" in b:
        m = r.mapping(b, "basis", ("qubits",))
        labels = r.sequence(m["qubits"], "basis.qubits") if m else []
        if not labels:
            r.err("basis.qubits", "need at least one qubit label")
        elif not all(isinstance(x, str) and x for x in labels):
            r.err("basis.qubits", "labels must be non-empty strings")
        elif len(set(labels)) != len(labels):
            r.err("basis.qubits", "labels must be unique")
        elif len(labels) > MAX_SCENARIO_MODES:
            r.err("basis.qubits", f"at most {MAX_SCENARIO_MODES} qubits")
        else:
            basis = RegisterSpec(tuple(labels))
    elif "basis" in top:
        m = r.mapping(b, "basis", ("money", "debt"), ("sector",))
        if m is not None:
            mm = r.integer(m.get("money", _MISSING), "basis.money", 0)
            dd = r.integer(m.get("debt", _MISSING), "basis.debt", 0)
            sec = m.get("sector")
            if sec is not None:
                sec = r.integer(sec, "basis.sector")
            if mm is not None and dd is not None:
                if mm + dd > MAX_SCENARIO_MODES:
                    r.err("basis", f"money + debt must be <= {MAX_SCENARIO_MODES} for dense evolution")
                elif mm + dd == 0:
                    r.err("basis", "need at least one mode")
                elif sec is not None and not -dd <= sec <= mm:
                    r.err("basis.sector", f"sector must lie in [{-dd}, {mm}]")
                else:
                    basis = FockSpec(mm, dd, sec)

    energies = None
    if "energies" in top:
        if isinstance(basis, RegisterSpec):
            r.err("energies", "energies apply only to Fock bases")
        m = r.mapping(top["energies"], "energies", ("money", "debt"))
        if m is not None and isinstance(basis, FockSpec):
            lists = {}
            for key, n in (("money", basis.money), ("debt", basis.debt)):
                vals = r.sequence(m.get(key, []), _join("energies", key))
                if len(vals) != n:
                    r.err(_join("energies", key), f"expected {n} values, got {len(vals)}")
                lists[key] = [r.number(v, _join(_join("energies", key), i)) for i, v in enumerate(vals)]
            if all(v is not None for vs in lists.values() for v in vs):
                energies = ModeEnergies(lists["money"], lists["debt"])
    elif isinstance(basis, FockSpec):
        energies = ModeEnergies((0.0,) * basis.money, (0.0,) * basis.debt)

    terms = []
    for i, t in enumerate(r.sequence(top.get("terms", []), "terms")):
        term = _read_term(r, t, _join("terms", i), basis)
        if term is not None:
            terms.append(term)

    initial = None
    if "initial_state" in top:
        initial = _read_initial(r, top["initial_state"], "initial_state", basis)

    grid = None
    g = r.mapping(top.get("grid"), "grid", ("t_end", "n_steps"), ("t_start",)) if "grid" in top else None
    if g is not None:
        t0 = r.number(g.get("t_start", _MISSING), "grid.t_start", default=0.0)
        t1 = r.number(g.get("t_end", _MISSING), "grid.t_end")
        n = r.integer(g.get("n_steps", _MISSING), "grid.n_steps", 1, 10**7)
        if None not in (t0, t1, n):
            if t1 <= t0:
                r.err("grid.t_end", "must exceed t_start")
            else:
                grid = TimeGrid(t0, t1, n)

    observables = []
    if basis is not None:
        valid = _valid_observables(basis)
        for i, o in enumerate(r.sequence(top.get("observables", []), "observables")):
            op = _join("observables", i)
            if o not in valid:
                r.err(op, f"unknown observable {o!r}; valid names: {valid}")
            elif o in _BIPARTITE and (
                (isinstance(basis, FockSpec) and (basis.money == 0 or basis.debt == 0))
                or (isinstance(basis, RegisterSpec) and len(basis.qubits) < 2)
            ):
                r.err(op, f"{o} needs a bipartition (money|debt modes or two or more qubits)")
            elif o in observables:
                r.err(op, f"duplicate observable {o!r}")
            else:
                observables.append(o)

    events = []
    for i, e in enumerate(r.sequence(top.get("events", []), "events")):
        kind, body, p = r.tagged(e, _join("events", i), ("repay", "measure"))
        if kind is None:
            continue
        if kind == "repay":
            m = r.mapping(body, p, ("t",), ("k", "q"))
            if m is None:
                continue
            if not isinstance(basis, FockSpec) or basis.money < 1 or basis.debt < 1:
                r.err(p, "repay events need a Fock basis with money and debt modes")
                continue
            params = {
                "k": r.integer(m.get("k", _MISSING), _join(p, "k"), 0, basis.money - 1, default=0),
                "q": r.integer(m.get("q", _MISSING), _join(p, "q"), 0, basis.debt - 1, default=0),
            }
        else:
            m = r.mapping(body, p, ("t", "target"))
            if m is None:
                continue
            if not isinstance(basis, RegisterSpec):
                r.err(p, "measure events need a qubit register basis")
                continue
            target = r.string(m.get("target", _MISSING), _join(p, "target"))
            if target is not None and target not in basis.qubits:
                r.err(_join(p, "target"), f"unknown qubit {target!r}")
            params = {"target": target}
        t = r.number(m.get("t", _MISSING), _join(p, "t"))
        if t is not None and grid is not None and not grid.t_start <= t <= grid.t_end:
            r.err(_join(p, "t"), f"event time must lie within [{grid.t_start}, {grid.t_end}]")
        events.append(Event(kind, t, params))

    seed = r.integer(top.get("seed", _MISSING), "seed", 0)
    outputs = []
    for i, o in enumerate(r.sequence(top.get("outputs", []), "outputs")):
        if o not in FORMATS:
            r.err(_join("outputs", i), f"unsupported format {o!r}; expected one of {list(FORMATS)}")
        else:
            outputs.append(o)

    if r.errors:
        raise ValidationError(r.errors)
    return ScenarioConfig(
        name=name,
        basis=basis,
        terms=tuple(terms),
        initial_state=initial,
        grid=grid,
        observables=tuple(observables),
        seed=seed,
        outputs=tuple(outputs),
        energies=energies,
        events=tuple(events),
        description=description,
        schema_version=version,
    )


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario document."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ParseError(f"malformed scenario document: {e}") from None
    except (ValueError, TypeError, RecursionError) as e:
        raise ParseError(f"malformed scenario document: {e}") from None
    return config_from_dict(data)


def serialize_scenario(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None, width=100)


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- presets ------------------------------------------------------------------


def list_presets() -> list[str]:
    files = resources.files("moneydebt").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".yaml"))


def preset_text(name: str) -> str:
    if name not in list_presets():
        raise KeyError(f"unknown preset {name!r}; available: {list_presets()}")
    return resources.files("moneydebt").joinpath("presets", f"{name}.yaml").read_text(encoding="utf-8")


def load_preset(name: str) -> ScenarioConfig:
    return parse_scenario(preset_text(name))


# -- assembly -----------------------------------------------------------------


@dataclass
class Model:
    """Everything a run needs, built from a validated config."""

    space: FockBasis | QubitRegister
    static: Operator
    perturbation: Callable[[float], Operator] | None
    initial: StateVector


def build_space(config: ScenarioConfig):
    if config.is_fock:
        return build_basis(config.basis.money, config.basis.debt, config.basis.sector)
    return QubitRegister(config.basis.qubits)


def build_model(config: ScenarioConfig) -> Model:
    space = build_space(config)
    static = zero(space)
    perturbs = []
    for term in config.terms:
        p = term.params
        if term.kind == "free":
            static = static + h_free(space, config.energies)
        elif term.kind == "qe":
            static = static + h_qe(space, p["amplitude"], [tuple(x) for x in p["pairs"]])
        elif term.kind == "exciton":
            static = static + h_binding(space, p["coupling"])
        elif term.kind == "viol":
            static = static + h_viol(space, ViolationSpec(p["delta_pr"], p["g"]))
        elif term.kind == "exchange":
            static = static + h_exchange(space, [tuple(x) for x in p["pairs"]], p["amplitude"])
        elif term.kind == "perturb":
            perturbs.append((p["profit"], p["interest"]))
        elif term.kind == "sigma_x":
            static = static + sigma_x(space, p["target"]) * p["amplitude"]
        elif term.kind == "sigma_z":
            static = static + sigma_z(space, p["target"]) * p["amplitude"]

    def perturbation(t: float) -> Operator:
        terms = [v_perturb(space, profit, interest, t) for profit, interest in perturbs]
        return terms[0] if len(terms) == 1 else sum(terms[1:], terms[0])

    return Model(space, static, perturbation if perturbs else None, initial_state(config, space))


def initial_state(config: ScenarioConfig, space) -> StateVector:
    s = config.initial_state
    p = s.params
    if s.kind == "vacuum":
        return vacuum(space)
    if s.kind == "qe_pair":
        return qe_pair(space, p["k"], p["q"])
    if s.kind == "loan_pair":
        return loan_pair(space, p["k"], p["q"])
    if s.kind == "occupation":
        return basis_state(space, p["bits"])
    if s.kind == "asset_superposition":
        return asset_superposition(p["a"], p["b"])
    if s.kind == "bell_qe":
        return bell_qe(p["kind"])
    return product_state(space, p["spins"])


def _expect(op: Operator, psi: StateVector) -> float:
    # hermiticity is guaranteed by construction; skip the per-call check
    return float(np.vdot(psi.amplitudes, op @ psi.amplitudes).real)


def _observable_fns(config: ScenarioConfig, model: Model) -> dict[str, Callable[[float, StateVector], float]]:
    space = model.space
    fns: dict[str, Callable] = {}
    part = None
    for name in config.observables:
        if name in _BIPARTITE and part is None:
            part = default_partition(space)
        if name == "energy":
            if model.perturbation is None:
                fns[name] = lambda t, psi: _expect(model.static, psi)
            else:
                fns[name] = lambda t, psi: _expect(model.static, psi) + _expect(model.perturbation(t), psi)
        elif name == "norm":
            fns[name] = lambda t, psi: psi.norm()
        elif name == "entropy":
            fns[name] = lambda t, psi: entanglement_entropy(psi, part)
        elif name == "mutual_information":
            fns[name] = lambda t, psi: mutual_information(psi, part)
        elif name == "separability_gap":
            fns[name] = lambda t, psi: separability_gap(psi, part)
        elif name == "charge":
            fns[name] = lambda t, psi: charge(psi)
        elif name == "exciton_count":
            fns[name] = lambda t, psi: exciton_count(psi)
        elif name in ("N_money", "N_debt", "N_total"):
            counts = {
                "N_money": space.n_money(),
                "N_debt": space.n_debt_counts(),
                "N_total": space.n_money() + space.n_debt_counts(),
            }[name]
            fns[name] = lambda t, psi, c=counts: float((np.abs(psi.amplitudes) ** 2) @ c)
        elif name.startswith("n:"):
            mode = ModeId.parse(name[2:])
            fns[name] = lambda t, psi, m=mode: mode_occupation(psi, m)
        elif name.startswith("p_up:"):
            up = qubit_projectors(space, name[5:])[0]
            fns[name] = lambda t, psi, u=up: _expect(u, psi)
    return fns


# -- running ------------------------------------------------------------------


@dataclass
class RunResult:
    config: ScenarioConfig
    series: TimeSeries
    summary: dict
    metadata: dict
    report: EvolutionReport | None = None


def _leading_amplitudes(psi: StateVector, n: int = 4) -> list[list]:
    space = psi.space
    order = sorted(range(psi.dim), key=lambda i: (-round(abs(psi.amplitudes[i]), 12), i))[:n]
    out = []
    for i in order:
        a = psi.amplitudes[i]
        if abs(a) < 1e-12:
            break
        if isinstance(space, FockBasis):
            label = str(space.occupation_of(i))
        else:
            label = format(i, f"0{space.n_qubits}b").translate(str.maketrans("01", "ud"))
        out.append([label, float(a.real), float(a.imag)])
    return out


def _summary(config: ScenarioConfig, model: Model, psi: StateVector, measurements: list) -> dict:
    space = model.space
    s: dict[str, Any] = {"leading_amplitudes": _leading_amplitudes(psi)}
    if isinstance(space, FockBasis):
        s["charge"] = charge(psi)
        s["exciton_count"] = exciton_count(psi)
        if space.m_money and space.n_debt:
            part = default_partition(space)
            s["entropy"] = entanglement_entropy(psi, part)
            s["mutual_information"] = mutual_information(psi, part)
            s["separability_gap"] = separability_gap(psi, part)
            pair = "1" + "0" * (space.m_money - 1) + "1" + "0" * (space.n_debt - 1)
            try:
                idx = space.index_of(pair)
                s["pair_energy"] = float(model.static.diagonal()[idx].real)
            except ModelError:
                pass
    elif space.n_qubits >= 2:
        part = default_partition(space)
        s["entropy"] = entanglement_entropy(psi, part)
        s["mutual_information"] = mutual_information(psi, part)
        s["separability_gap"] = separability_gap(psi, part)
    if measurements:
        s["measurements"] = measurements
    return s


def run_scenario(config: ScenarioConfig, keep_states: bool = False) -> RunResult:
    """Build, evolve and observe one scenario; deterministic given the config."""
    try:
        model = build_model(config)
        measurements: list[dict] = []
        events = []
        for i, ev in enumerate(config.events):
            if ev.kind == "repay":
                events.append((ev.t, lambda psi, p=ev.params: recombine(psi, p["k"], p["q"])))
            else:
                def act(psi, ev=ev, i=i):
                    projs = qubit_projectors(model.space, ev.params["target"])
                    outcome, out = measure(psi, projs, config.seed + i)
                    measurements.append({"t": ev.t, "target": ev.params["target"], "outcome": ("up", "down")[outcome]})
                    return out
                events.append((ev.t, act))
        report = evolve_scheduled(
            model.static,
            model.perturbation,
            model.initial,
            config.grid,
            _observable_fns(config, model),
            events,
            keep_states,
        )
        summary = _summary(config, model, report.final_state, measurements)
    except ModelError as e:
        e.args = (f"scenario {config.name!r}: {e}",)
        raise
    series = TimeSeries(report.times, {k: report.series[k] for k in config.observables})
    metadata = {
        "name": config.name,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "rng": RNG_NAME,
        "version": __version__,
        "schema_version": config.schema_version,
        "n_steps": config.grid.n_steps,
        "norm_drift": report.norm_drift,
    }
    return RunResult(config, series, summary, metadata, report)


def delta_pr_sweep(config: ScenarioConfig, values: Sequence[float]) -> list[tuple[float, RunResult]]:
    """Rerun ``config`` once per poor-rich gap value (replaces every viol term)."""
    if not any(t.kind == "viol" for t in config.terms):
        raise ValueError(f"scenario {config.name!r} has no viol term to sweep")
    out = []
    for d in values:
        terms = tuple(
            Term("viol", {**t.params, "delta_pr": float(d)}) if t.kind == "viol" else t
            for t in config.terms
        )
        out.append((float(d), run_scenario(dataclasses.replace(config, terms=terms))))
    return out


def spectrum(config: ScenarioConfig) -> np.ndarray:
    """Eigenvalues of the static Hamiltonian (perturbations vanish at t=0)."""
    model = build_model(config)
    return np.linalg.eigvalsh(model.static.toarray())


# -- export -------------------------------------------------------------------


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def export_series(result: RunResult, fmt: str) -> str:
    """Render a run as CSV or JSON lines; byte-identical for identical configs."""
    names = result.series.names
    cols = [result.series.columns[n] for n in names]
    buf = io.StringIO(newline="")
    if fmt == "csv":
        buf.write(",".join(["t", *names]) + "\n")
        for i, t in enumerate(result.series.times):
            buf.write(",".join([_g17(t), *(_g17(c[i]) for c in cols)]) + "\n")
    elif fmt == "jsonl":
        head = {"type": "metadata", **result.metadata, "columns": names, "summary": result.summary}
        buf.write(json.dumps(head, sort_keys=True) + "\n")
        for i, t in enumerate(result.series.times):
            row = {"t": float(t)}
            row.update({n: float(c[i]) for n, c in zip(names, cols)})
            buf.write(json.dumps(row) + "\n")
    else:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; expected one of {list(FORMATS)}")
    return buf.getvalue()


# -- exciton1d documents --------------------------------------------------------


@dataclass(frozen=True)
class ExcitonConfig:
    name: str
    grid: Any
    potential: Any
    mass: float = 1.0
    n_states: int = 6


def parse_exciton_config(text: str, base_dir=".") -> ExcitonConfig:
    """Parse a 1-D exciton solver document.

    ``potential`` is one of ``{harmonic: {omega}}``, ``{square_well: {depth,
    width}}``, ``{free: {}}`` or ``{tabulated: {file}}`` (an ``x,V`` CSV,
    relative to ``base_dir``). With a tabulated file the grid comes from the
    file and may be omitted.
    """
    try:
        data = yaml.safe_load(text)
    except (yaml.YAMLError, ValueError, TypeError, RecursionError) as e:
        raise ParseError(f"malformed exciton document: {e}") from None
    r = _Reader()
    top = r.mapping(data, "", ("schema_version", "name", "potential"), ("grid", "mass", "n_states"))
    if top is None:
        raise ValidationError(r.errors)
    version = r.integer(top.get("schema_version", _MISSING), "schema_version")
    if version is not None and version != SCHEMA_VERSION:
        r.err("schema_version", f"unsupported schema_version {version}")
    name = r.string(top.get("name", _MISSING), "name")
    mass = r.number(top.get("mass", _MISSING), "mass", positive=True, default=1.0)
    n_states = r.integer(top.get("n_states", _MISSING), "n_states", 1, default=6)

    grid = None
    if "grid" in top:
        g = r.mapping(top["grid"], "grid", ("x_min", "x_max", "n_points"))
        if g is not None:
            lo = r.number(g.get("x_min", _MISSING), "grid.x_min")
            hi = r.number(g.get("x_max", _MISSING), "grid.x_max")
            n = r.integer(g.get("n_points", _MISSING), "grid.n_points", 16, 10**6)
            if None not in (lo, hi, n):
                if hi <= lo:
                    r.err("grid.x_max", "must exceed x_min")
                else:
                    grid = GridSpec(lo, hi, n)

    potential = None
    kind, body, p = r.tagged(top.get("potential"), "potential", ("harmonic", "square_well", "free", "tabulated"))
    if kind == "harmonic":
        m = r.mapping(body, p, ("omega",))
        w = None if m is None else r.number(m.get("omega", _MISSING), _join(p, "omega"), positive=True)
        potential = None if w is None else Harmonic(w)
    elif kind == "square_well":
        m = r.mapping(body, p, ("depth", "width"))
        if m is not None:
            d = r.number(m.get("depth", _MISSING), _join(p, "depth"))
            wd = r.number(m.get("width", _MISSING), _join(p, "width"), positive=True)
            potential = None if None in (d, wd) else SquareWell(d, wd)
    elif kind == "free":
        r.mapping(body, p)
        potential = Free()
    elif kind == "tabulated":
        m = r.mapping(body, p, ("file",))
        f = None if m is None else r.string(m.get("file", _MISSING), _join(p, "file"))
        if f is not None and not r.errors:
            try:
                file_grid, potential = load_tabulated(Path(base_dir) / f, grid)
            except (ValueError, IndexError) as e:
                r.err(_join(p, "file"), str(e))
            else:
                grid = file_grid
    if grid is None and "grid" not in top and kind != "tabulated":
        r.err("grid", "missing required key")
    if r.errors:
        raise ValidationError(r.errors)
    return ExcitonConfig(name, grid, potential, mass, n_states)
