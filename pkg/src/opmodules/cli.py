"""Command-line front end: ``opmodules <command> [name] [options]``.

Names resolve against ``--defs FILE`` when given, otherwise against the
bundled fixtures: a fixture name stands for its default algebra (or its
regular module where a module is expected), ``fixture:name`` picks an
object from one fixture, and a bare object name is searched in all of them.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import OperatorAlgebra, is_semisimple, radical
from .errors import DefinitionError, OpModulesError
from .exact import KernelCokernelPair, axiom_suite, classify_pair, normalize_structure, split_linear, split_module
from .haagerup import elementary_tensor, haagerup_bounds, tensor_module
from .homology import (
    global_dim_zero_certificate,
    is_rel_injective,
    is_rel_projective,
    non_projective_witness,
    rel_injective_dimension,
    rel_injective_resolution,
    semisimple_retraction,
)
from .modules import ModMorphism, OpModule, classify
from .definitions import FIXTURES, build_definitions, load_fixture, parse_definition_file, fixture_path, _load_yaml
from .opspace import cb_norm_estimate

COMMANDS = (
    "check-axioms", "classify-morphism", "classify-pair", "split", "projective", "injective", "retraction",
    "resolution", "dimension", "semisimple", "gldim-zero", "witness", "haagerup-bounds", "cb-norm",
)


@dataclass
class Report:
    command: str
    inputs: dict
    verdicts: dict
    certificates: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    wall_time: float = 0.0
    notes: list = field(default_factory=list)


# -- name resolution ---------------------------------------------------------------


class Resolver:
    def __init__(self, defs_path=None, tolerance=None):
        self.defs_path = defs_path
        self.tolerance = tolerance
        self._cache = {}

    def _load(self, key):
        if key not in self._cache:
            if key == "__file__":
                defs = parse_definition_file(self.defs_path)
                if self.tolerance is not None:
                    data = defs.to_dict()
                    data.setdefault("tolerance", {})["exact_residual"] = self.tolerance
                    defs = build_definitions(data, self.defs_path)
            elif self.tolerance is not None:
                data = _load_yaml(fixture_path(key).read_text(encoding="utf-8"), key)
                data.setdefault("tolerance", {})["exact_residual"] = self.tolerance
                defs = build_definitions(data, key)
            else:
                defs = load_fixture(key)
            self._cache[key] = defs
        return self._cache[key]

    def _default(self, defs, kind):
        if defs.default is None:
            raise DefinitionError("definition file has no default algebra", defs.source)
        if kind == "module":
            if "A" in defs.modules:
                return defs.modules["A"]
        return defs.algebras[defs.default]

    def resolve(self, name, kind):
        if self.defs_path:
            defs = self._load("__file__")
            obj = self._default(defs, kind) if name is None else defs.lookup(name)
            return self._check(obj, kind, name)
        if name is None:
            raise DefinitionError(f"a {kind} name is required")
        if name in FIXTURES:
            return self._check(self._default(self._load(name), kind), kind, name)
        if ":" in name:
            fix, obj = name.split(":", 1)
            if fix not in FIXTURES:
                raise DefinitionError(f"unknown fixture {fix!r}")
            return self._check(self._load(fix).lookup(obj), kind, name)
        for fix in FIXTURES:
            defs = self._load(fix)
            if defs.kind_of(name):
                return self._check(defs.lookup(name), kind, name)
        raise DefinitionError(f"unresolved name {name!r}")

    @staticmethod
    def _check(obj, kind, name):
        expected = {"algebra": OperatorAlgebra, "module": OpModule, "morphism": ModMorphism, "pair": KernelCokernelPair}[kind]
        if kind == "algebra" and isinstance(obj, OpModule):
            return obj.algebra
        if not isinstance(obj, expected):
            raise DefinitionError(f"{name!r} is not a {kind}")
        return obj


# -- commands ----------------------------------------------------------------------


def _tol_dict(tol):
    return {
        "exact_residual": tol.exact_residual,
        "optimization_gap": tol.optimization_gap,
        "iteration_cap": tol.iteration_cap,
        "rank_tol": tol.rank_tol,
    }


def _cmd_check_axioms(args, res):
    alg = res.resolve(args.name, "algebra")
    structure = normalize_structure(args.structure)
    rep = axiom_suite(alg, structure, samples=args.samples, seed=args.seed, max_dim=args.max_dim)
    tallies = {k: {"passed": t.passed, "failed": t.failed} for k, t in rep.tallies.items()}
    certs = {
        "max_residual": {k: t.max_residual for k, t in rep.tallies.items()},
        "failing_seeds": {k: [list(s) for s in t.failing_seeds] for k, t in rep.tallies.items() if t.failing_seeds},
    }
    return alg, {"passed": rep.passed, "structure": f"E_{structure}", "axioms": tallies}, certs


def _cmd_classify_morphism(args, res):
    f = res.resolve(args.name, "morphism")
    c = classify(f, samples=args.samples, seed=args.seed, levels=args.levels)
    verdicts = {"mono": c.mono, "epi": c.epi, "rank": c.rank}
    certs = {"openness_constant": c.openness_constant, "inverse_bound": c.inverse_bound}
    return f.src.algebra, verdicts, certs


def _pair_arg(args, res):
    return res.resolve(args.pair or args.name, "pair")


def _cmd_classify_pair(args, res):
    pair = _pair_arg(args, res)
    m = classify_pair(pair)
    verdicts = {"E_min": m.e_min, "E_rel": m.e_rel, "E_max": m.e_max}
    return pair.sub.algebra, verdicts, {"diagnostics": m.diagnostics}


def _cmd_split(args, res):
    pair = _pair_arg(args, res)
    m = classify_pair(pair)
    certs = {"diagnostics": m.diagnostics}
    if m.e_max:
        mod = split_module(pair)
        lin = split_linear(pair, estimate_cb=True, levels=args.levels)
        certs["module_split"] = mod.kind
        certs["module_residuals"] = mod.residuals
        if mod.witness is not None:
            certs["infeasibility_witness"] = mod.witness
        certs["linear_section_cb"] = lin.cb_estimate
        certs["linear_residuals"] = lin.residuals
    verdicts = {"E_min": m.e_min, "E_rel": m.e_rel, "E_max": m.e_max}
    return pair.sub.algebra, verdicts, certs


def _cmd_projective(args, res):
    module = res.resolve(args.name, "module")
    v = is_rel_projective(module)
    certs = {"residuals": v.residuals}
    if v.witness is not None:
        certs["infeasibility_witness"] = v.witness
    return module.algebra, {"projective": v.projective, "module_dim": module.dim}, certs


def _cmd_injective(args, res):
    module = res.resolve(args.name, "module")
    v = is_rel_injective(module)
    certs = {"residuals": v.residuals}
    if v.witness is not None:
        certs["infeasibility_witness"] = v.witness
    return module.algebra, {"injective": v.injective, "module_dim": module.dim}, certs


def _cmd_retraction(args, res):
    module = res.resolve(args.name, "module")
    _, _, diag = semisimple_retraction(module, levels=args.levels, samples=args.samples)
    pieces = {f"r[{p.block}][{p.index}]": {"cb_estimate": p.cb.value, "per_level": list(p.cb.per_level)} for p in diag["pieces"] if p.cb}
    verdicts = {
        "rs_is_identity": diag["rs_residual"] < module.tol.exact_residual,
        "equivariant": diag["equivariance"] < module.tol.exact_residual * 1e3,
        "pieces_contractive": diag["max_piece_cb"] <= 1 + module.tol.optimization_gap,
    }
    certs = {"rs_residual": diag["rs_residual"], "equivariance": diag["equivariance"], "pieces": pieces}
    return module.algebra, verdicts, certs


def _cmd_resolution(args, res):
    module = res.resolve(args.name, "module")
    r = rel_injective_resolution(module, length_cap=args.cap)
    steps = [{"injective_dim": s.injective.dim, "cokernel_dim": s.pair.quotient.dim, "E_rel": s.admissible} for s in r.steps]
    verdicts = {"length": r.length, "truncated": r.truncated, "admissible": r.admissible}
    return module.algebra, verdicts, {"steps": steps}


def _cmd_dimension(args, res):
    module = res.resolve(args.name, "module")
    d = rel_injective_dimension(module, cap=args.cap, seed=args.seed + 1)
    verdicts = {"idim": d.idim, "infinite_at_cap": d.infinite_at_cap, "cross_check_agrees": d.agrees}
    certs = {"cross_check_idim": d.cross_check, "algebraic_idim": d.algebraic_idim}
    notes = ["algebraic_idim is reported alongside; equality with idim is observed, not asserted"]
    return module.algebra, verdicts, certs, notes


def _cmd_semisimple(args, res):
    alg = res.resolve(args.name, "algebra")
    rad = radical(alg)
    verdicts = {"semisimple": rad.shape[1] == 0, "radical_dim": rad.shape[1]}
    certs = {"radical_basis": rad.T}
    if alg.blocks is not None:
        certs["blocks"] = list(alg.blocks.sizes)
    return alg, verdicts, certs


def _witness_certs(w):
    return {
        "ideal_basis": w.ideal.T,
        "quotient_dim": w.quotient.dim,
        "infeasibility_witness": w.split.witness,
        "S_dim": w.s_one.shape[1],
        "S1_equals_S2": w.s_agree,
        "S_two_sided": w.s_two_sided,
        "annihilator_dim": w.annihilator.shape[1],
        "quotient_algebra_dim": w.quotient_algebra.dim if w.quotient_algebra else 0,
        "maximal": w.maximal,
        "enumeration": w.log,
    }


def _cmd_gldim_zero(args, res):
    alg = res.resolve(args.name, "algebra")
    g = global_dim_zero_certificate(alg, count=args.samples, seed=args.seed, max_dim=args.max_dim)
    verdicts = {"answer": g.answer, "semisimple": g.semisimple, "agrees_with_radical": g.agrees}
    certs = {}
    if g.witness is not None:
        certs.update(_witness_certs(g.witness))
    else:
        certs["modules"] = [
            {"dim": m.dim, "idim": 0 if i.injective else None, "projective": p.projective} for m, i, p in g.certificates
        ]
    return alg, verdicts, certs


def _cmd_witness(args, res):
    alg = res.resolve(args.name, "algebra")
    w = non_projective_witness(alg, seed=args.seed)
    return alg, {"found": True, "splits": w.split.split}, _witness_certs(w)


def _cmd_haagerup(args, res):
    module = res.resolve(args.name, "module")
    tensor = tensor_module(module.space, module.algebra)
    rng = np.random.default_rng(args.seed)
    rows = []
    for _ in range(args.samples):
        x = module.space.random_element(rng, args.levels)
        a = module.algebra.space.random_element(rng, 1)[0, 0]
        u = np.einsum("ije,a->ijea", x, a).reshape(x.shape[0], x.shape[1], -1)
        b = haagerup_bounds(tensor.space, u)
        product = module.space.matrix_norm(x).value * module.algebra.space.matrix_norm(a).value
        rows.append({"kind": "elementary", "lower": b.lower, "upper": b.upper, "factor_norms": product})
    for _ in range(args.samples):
        u = tensor.space.random_element(rng, args.levels)
        b = haagerup_bounds(tensor.space, u)
        rows.append({"kind": "random", "lower": b.lower, "upper": b.upper})
    gap = max((r["upper"] - r["lower"] for r in rows), default=0.0)
    return module.algebra, {"max_gap": gap, "samples": len(rows)}, {"bounds": rows}


def _cmd_cb_norm(args, res):
    f = res.resolve(args.name, "morphism")
    est = cb_norm_estimate(f.linear, level_cap=args.levels, samples=args.samples, seed=args.seed)
    verdicts = {"estimate": est.value, "upper": est.upper, "exact_at_cap": est.exact_at_cap}
    return f.src.algebra, verdicts, {"per_level": list(est.per_level)}


HANDLERS = {
    "check-axioms": _cmd_check_axioms,
    "classify-morphism": _cmd_classify_morphism,
    "classify-pair": _cmd_classify_pair,
    "split": _cmd_split,
    "projective": _cmd_projective,
    "injective": _cmd_injective,
    "retraction": _cmd_retraction,
    "resolution": _cmd_resolution,
    "dimension": _cmd_dimension,
    "semisimple": _cmd_semisimple,
    "gldim-zero": _cmd_gldim_zero,
    "witness": _cmd_witness,
    "haagerup-bounds": _cmd_haagerup,
    "cb-norm": _cmd_cb_norm,
}


def run_command(cmd, args, resolver=None):
    if cmd not in HANDLERS:
        raise DefinitionError(f"unknown command {cmd!r}; choose from {', '.join(COMMANDS)}")
    resolver = resolver or Resolver(getattr(args, "defs", None), getattr(args, "tolerance", None))
    start = time.perf_counter()
    out = HANDLERS[cmd](args, resolver)
    alg, verdicts, certs = out[:3]
    notes = out[3] if len(out) > 3 else []
    inputs = {"name": args.name, "pair": getattr(args, "pair", None), "defs": getattr(args, "defs", None), "algebra": alg.name}
    seeds = {"seed": args.seed}
    return Report(cmd, inputs, verdicts, certs, seeds, _tol_dict(alg.tol), time.perf_counter() - start, notes)


# -- output ------------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return _jsonable(np.stack([value.real, value.imag], axis=-1).tolist())
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else str(v)
    return value


def _text_value(value):
    if isinstance(value, np.ndarray):
        return np.array2string(np.round(value, 6), precision=6, separator=", ", max_line_width=120)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_text_value(v)}" for k, v in value.items())
    if isinstance(value, list) and value and isinstance(value[0], dict):
        return "\n    " + "\n    ".join(_text_value(v) for v in value)
    return str(value)


def emit_report(report, fmt="text"):
    """``text`` for people, ``json`` for machines (wall time omitted so replays match)."""
    if fmt == "json":
        payload = {
            "command": report.command,
            "inputs": report.inputs,
            "verdicts": report.verdicts,
            "certificates": report.certificates,
            "seeds": report.seeds,
            "tolerances": report.tolerances,
            "notes": report.notes,
        }
        return (json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n").encode()
    lines = [f"command: {report.command}"]
    lines.append("inputs: " + ", ".join(f"{k}={v}" for k, v in report.inputs.items() if v is not None))
    for key, value in report.verdicts.items():
        lines.append(f"verdict {key}: {_text_value(value)}")
    for key, value in report.certificates.items():
        lines.append(f"  {key}: {_text_value(value)}")
    if report.command == "gldim-zero" and "modules" in report.certificates:
        for i, m in enumerate(report.certificates["modules"]):
            lines.append(f"  module {i}: dim {m['dim']} idim {m['idim']}")
    for note in report.notes:
        lines.append(f"note: {note}")
    lines.append("seeds: " + ", ".join(f"{k}={v}" for k, v in report.seeds.items()))
    lines.append(f"wall time: {report.wall_time:.3f} s")
    return ("\n".join(lines) + "\n").encode()


def build_parser():
    parser = argparse.ArgumentParser(prog="opmodules", description="Verification workflows for operator modules.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("name", nargs="?", help="algebra, module, morphism or pair name (or a fixture name)")
    parser.add_argument("--pair", help="pair name for classify-pair and split")
    parser.add_argument("--defs", help="definition file (YAML); defaults to the bundled fixtures")
    parser.add_argument("--structure", default="max", choices=("min", "rel", "max"))
    parser.add_argument("--samples", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--levels", type=int, default=2)
    parser.add_argument("--tolerance", type=float, default=None, help="override the exact residual tolerance")
    parser.add_argument("--format", default="text", choices=("text", "json"))
    parser.add_argument("--cap", type=int, default=4)
    parser.add_argument("--max-dim", type=int, default=8)
    return parser


DEFAULT_SAMPLES = {"check-axioms": 200, "gldim-zero": 50, "haagerup-bounds": 3, "retraction": 4, "cb-norm": 12, "classify-morphism": 4}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.samples is None:
        args.samples = DEFAULT_SAMPLES.get(args.command, 4)
    try:
        report = run_command(args.command, args)
    except OpModulesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.buffer.write(emit_report(report, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
