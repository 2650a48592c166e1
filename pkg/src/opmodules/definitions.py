"""YAML definition files: algebras, modules, morphisms and pairs by name.

Complex scalars are written as ``[re, im]`` pairs; a bare number is read as
a real scalar.  A matrix is a list of rows of scalars.  Example::

    default: T2
    algebras:
      T2: {kind: upper-triangular, n: 2}
    modules:
      A: {algebra: T2, construction: regular}
      S1: {algebra: T2, construction: quotient-by-ideal, ideal: [[0, 1, 0], [0, 0, 1]]}
    pairs:
      t2_I_pair: {algebra: T2, construction: ideal, ideal: [[0, 1, 0], [0, 0, 1]]}

Algebra kinds: ``semisimple`` (``sizes``), ``full`` (``n``),
``upper-triangular`` (``n``), ``diagonal`` (``n``), ``basis`` (``ambient``
and ``basis``, a list of matrices).  Module constructions: ``regular``,
``quotient-by-ideal``, ``ideal``, ``direct-sum`` (``of``: two names),
``hom`` and ``tensor`` (``of``: one name), ``concrete`` (``generators``),
``explicit`` (``basis`` and ``action``).  Ideals are lists of coordinate
vectors in the algebra basis.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .algebra import build_from_basis, build_semisimple, upper_triangular
from .errors import DefinitionError, ModuleAxiomError, OpModulesError
from .exact import KernelCokernelPair, pair_from_mono
from .haagerup import canonical_projection, tensor_module
from .modules import (
    ModMorphism,
    canonical_embedding,
    concrete_module,
    direct_sum_module,
    hom_module,
    make_module,
    make_morphism,
    quotient_module,
    regular_module,
    submodule,
)
from .numerics import DEFAULT_TOLERANCE, TolerancePolicy
from .opspace import Concrete

FIXTURES = ("C", "M_2", "semisimple_2_3", "t2", "t3", "diag2")


# -- scalars ---------------------------------------------------------------------


def read_scalar(value, where):
    if isinstance(value, bool):
        raise DefinitionError("expected a number or [re, im] pair", where)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise DefinitionError(f"expected a number or [re, im] pair, got {value!r}", where)


def read_array(value, where, ndim):
    """Nested lists of scalars with ``ndim`` array axes."""
    def walk(v, depth, loc):
        if depth == 0:
            return read_scalar(v, loc)
        if not isinstance(v, (list, tuple)):
            raise DefinitionError(f"expected a list, got {v!r}", loc)
        return [walk(x, depth - 1, f"{loc}[{i}]") for i, x in enumerate(v)]

    data = walk(value, ndim, where)
    try:
        arr = np.array(data, dtype=complex)
    except ValueError as exc:
        raise DefinitionError(f"ragged array ({exc})", where) from None
    if arr.ndim != ndim:
        raise DefinitionError(f"expected {ndim} array axes, got {arr.ndim}", where)
    return arr


def write_scalar(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def write_array(arr):
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 0:
        return write_scalar(arr)
    return [write_array(a) for a in arr]


# -- the definition object -----------------------------------------------------------


@dataclass
class DefinitionFile:
    source: str
    data: dict
    tolerance: TolerancePolicy
    algebras: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    pairs: dict = field(default_factory=dict)
    default: str | None = None

    def lookup(self, name):
        for table in (self.pairs, self.morphisms, self.modules, self.algebras):
            if name in table:
                return table[name]
        raise DefinitionError(f"unresolved name {name!r}", self.source)

    def kind_of(self, name):
        for label, table in (("pair", self.pairs), ("morphism", self.morphisms), ("module", self.modules), ("algebra", self.algebras)):
            if name in table:
                return label
        return None

    def to_dict(self):
        """Normalized data; complex scalars as ``[re, im]`` pairs."""
        return copy.deepcopy(self.data)


def _normalize_tolerance(raw, where):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise DefinitionError("tolerance must be a mapping", where)
    known = {"exact_residual", "optimization_gap", "iteration_cap", "rank_tol"}
    out = {}
    for key, value in raw.items():
        if key not in known:
            raise DefinitionError(f"unknown tolerance field {key!r}", f"{where}.{key}")
        out[key] = int(value) if key == "iteration_cap" else float(value)
    return out


def _norm_array_field(entry, key, ndim, where):
    if key not in entry:
        raise DefinitionError(f"missing field {key!r}", where)
    arr = read_array(entry[key], f"{where}.{key}", ndim)
    entry[key] = write_array(arr)
    return arr


def _build_algebra(name, entry, tol):
    where = f"algebras.{name}"
    if not isinstance(entry, dict) or "kind" not in entry:
        raise DefinitionError("algebra needs a 'kind'", where)
    kind = entry["kind"]
    try:
        if kind == "semisimple":
            sizes = entry.get("sizes")
            if not isinstance(sizes, list) or not sizes:
                raise DefinitionError("semisimple algebras need a non-empty 'sizes' list", where)
            return build_semisimple(sizes, tol=tol, name=entry.get("label", name))
        if kind == "full":
            return build_semisimple([int(entry["n"])], tol=tol, name=entry.get("label", name))
        if kind == "diagonal":
            return build_semisimple([1] * int(entry["n"]), tol=tol, name=entry.get("label", name))
        if kind == "upper-triangular":
            alg = upper_triangular(int(entry["n"]), tol=tol)
            alg.name = entry.get("label", name)
            return alg
        if kind == "basis":
            basis = _norm_array_field(entry, "basis", 3, where)
            return build_from_basis(int(entry["ambient"]), list(basis), tol=tol, name=entry.get("label", name))
    except KeyError as exc:
        raise DefinitionError(f"missing field {exc.args[0]!r}", where) from None
    except DefinitionError:
        raise
    except OpModulesError as exc:
        raise DefinitionError(str(exc), where) from None
    raise DefinitionError(f"unknown algebra kind {kind!r}", f"{where}.kind")


def _ideal_basis(entry, algebra, where):
    ideal = _norm_array_field(entry, "ideal", 2, where)
    if ideal.shape[1] != algebra.dim:
        raise DefinitionError(f"ideal vectors need {algebra.dim} coordinates", f"{where}.ideal")
    return ideal.T


def _build_module(name, entry, defs, tol):
    where = f"modules.{name}"
    if not isinstance(entry, dict):
        raise DefinitionError("module entry must be a mapping", where)
    algebra = _algebra_ref(entry, defs, where)
    how = entry.get("construction", "explicit")
    try:
        if how == "regular":
            module = regular_module(algebra)
        elif how in ("quotient-by-ideal", "ideal"):
            basis = _ideal_basis(entry, algebra, where)
            reg = regular_module(algebra)
            module = quotient_module(reg, basis)[0] if how == "quotient-by-ideal" else submodule(reg, basis)[0]
        elif how == "direct-sum":
            parts = [_module_ref(p, defs, where) for p in entry.get("of", [])]
            if len(parts) != 2:
                raise DefinitionError("direct-sum needs exactly two summands in 'of'", where)
            module = direct_sum_module(*parts).module
        elif how == "hom":
            module = hom_module(algebra, _module_ref(entry.get("of"), defs, where))
        elif how == "tensor":
            module = tensor_module(_module_ref(entry.get("of"), defs, where), algebra)
        elif how == "concrete":
            gens = _norm_array_field(entry, "generators", 3, where)
            module = concrete_module(algebra, gens)
        elif how == "explicit":
            basis = _norm_array_field(entry, "basis", 3, where)
            action = _norm_array_field(entry, "action", 3, where)
            module = make_module(Concrete(basis, tol=tol), algebra, action)
        else:
            raise DefinitionError(f"unknown construction {how!r}", f"{where}.construction")
    except ModuleAxiomError as exc:
        raise DefinitionError(f"module axiom '{exc.axiom}' fails: {exc}", where) from None
    except DefinitionError:
        raise
    except OpModulesError as exc:
        raise DefinitionError(str(exc), where) from None
    if module.algebra is not algebra:
        raise DefinitionError("summands live over a different algebra", where)
    module.name = name
    return module


def _algebra_ref(entry, defs, where):
    ref = entry.get("algebra", defs.default)
    if ref not in defs.algebras:
        raise DefinitionError(f"unresolved algebra {ref!r}", f"{where}.algebra")
    return defs.algebras[ref]


def _module_ref(ref, defs, where):
    if ref not in defs.modules:
        raise DefinitionError(f"unresolved module {ref!r}", where)
    return defs.modules[ref]


def _build_morphism(name, entry, defs):
    where = f"morphisms.{name}"
    if not isinstance(entry, dict):
        raise DefinitionError("morphism entry must be a mapping", where)
    how = entry.get("construction", "matrix")
    try:
        if how == "embedding":
            module = _module_ref(entry.get("of"), defs, where)
            return canonical_embedding(module)[1]
        if how == "projection":
            module = _module_ref(entry.get("of"), defs, where)
            return canonical_projection(module).projection
        if how == "matrix":
            src = _module_ref(entry.get("src"), defs, f"{where}.src")
            dst = _module_ref(entry.get("dst"), defs, f"{where}.dst")
            mat = _norm_array_field(entry, "matrix", 2, where)
            if mat.shape != (dst.dim, src.dim):
                raise DefinitionError(f"matrix must have shape {(dst.dim, src.dim)}", f"{where}.matrix")
            return make_morphism(src, dst, mat)
    except ModuleAxiomError as exc:
        raise DefinitionError(f"morphism axiom '{exc.axiom}' fails: {exc}", where) from None
    raise DefinitionError(f"unknown construction {how!r}", f"{where}.construction")


def _build_pair(name, entry, defs):
    where = f"pairs.{name}"
    if not isinstance(entry, dict):
        raise DefinitionError("pair entry must be a mapping", where)
    how = entry.get("construction", "maps")
    if how == "ideal":
        algebra = _algebra_ref(entry, defs, where)
        basis = _ideal_basis(entry, algebra, where)
        reg = regular_module(algebra)
        try:
            sub, incl = submodule(reg, basis)
            _, proj = quotient_module(reg, basis)
        except ModuleAxiomError as exc:
            raise DefinitionError(f"not a right ideal ({exc})", f"{where}.ideal") from None
        return KernelCokernelPair(incl, proj)
    if how == "mono":
        mono = defs.morphisms.get(entry.get("mono"))
        if mono is None:
            raise DefinitionError(f"unresolved morphism {entry.get('mono')!r}", f"{where}.mono")
        return pair_from_mono(mono)
    if how == "maps":
        mu, pi = defs.morphisms.get(entry.get("mono")), defs.morphisms.get(entry.get("epi"))
        if mu is None or pi is None:
            raise DefinitionError("pair needs resolvable 'mono' and 'epi'", where)
        return KernelCokernelPair(mu, pi)
    raise DefinitionError(f"unknown construction {how!r}", f"{where}.construction")


def build_definitions(data, source="<memory>"):
    """Validated object graph from already-parsed data."""
    if not isinstance(data, dict):
        raise DefinitionError("top level must be a mapping", source)
    data = copy.deepcopy(data)
    unknown = set(data) - {"default", "tolerance", "algebras", "modules", "morphisms", "pairs", "description"}
    if unknown:
        raise DefinitionError(f"unknown top-level fields {sorted(unknown)}", source)
    overrides = _normalize_tolerance(data.get("tolerance"), "tolerance")
    if overrides:
        data["tolerance"] = overrides
    try:
        tol = DEFAULT_TOLERANCE.with_overrides(**overrides)
    except OpModulesError as exc:
        raise DefinitionError(str(exc), "tolerance") from None
    defs = DefinitionFile(source, data, tol, default=data.get("default"))
    for section in ("algebras", "modules", "morphisms", "pairs"):
        if not isinstance(data.get(section, {}), dict):
            raise DefinitionError(f"'{section}' must be a mapping", section)
    for name, entry in data.get("algebras", {}).items():
        defs.algebras[name] = _build_algebra(name, entry, tol)
    if defs.default is None and len(defs.algebras) == 1:
        defs.default = next(iter(defs.algebras))
    for name, entry in data.get("modules", {}).items():
        defs.modules[name] = _build_module(name, entry, defs, tol)
    for name, entry in data.get("morphisms", {}).items():
        defs.morphisms[name] = _build_morphism(name, entry, defs)
    for name, entry in data.get("pairs", {}).items():
        defs.pairs[name] = _build_pair(name, entry, defs)
    return defs


def _load_yaml(text, source):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise DefinitionError(f"YAML parse error: {getattr(exc, 'problem', exc)}", where) from None


def parse_definition_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DefinitionError(f"cannot read file ({exc.strerror})", str(path)) from None
    return build_definitions(_load_yaml(text, str(path)), str(path))


def parse_definition_text(text, source="<text>"):
    return build_definitions(_load_yaml(text, source), source)


def dump_definitions(defs):
    """YAML text for ``defs``; parsing it back gives the same definitions."""
    return yaml.safe_dump(defs.to_dict(), sort_keys=False, default_flow_style=None)


def fixture_path(name):
    return resources.files("opmodules").joinpath("fixtures", f"{name}.yaml")


def load_fixture(name):
    if name not in FIXTURES:
        raise DefinitionError(f"unknown fixture {name!r}; bundled: {', '.join(FIXTURES)}")
    path = fixture_path(name)
    return build_definitions(_load_yaml(path.read_text(encoding="utf-8"), name), name)
