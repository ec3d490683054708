"""Problem definition: mesh + material + loads, and its text file format.

Format (line oriented, ``#`` starts a comment, ids are 1-based)::

    # vem2d problem v1
    material E=1000 nu=0.3 mode=plane_stress thickness=1
    nodes 5
    1 0.0 0.0
    ...
    elements 1
    1 1 2 3 4 5
    nodeset support 1 5
    dirichlet support ux=0 uy=0
    dirichlet 5 ux=0
    load 2 fx=40 fy=0

``dirichlet`` and ``load`` target either a node set name or a node id.
Unknown keywords and keys are errors.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from vem2d.assembly import LoadCase
from vem2d.material import Material, PlaneMode
from vem2d.mesh import Mesh

HEADER = "# vem2d problem v1"


class ProblemFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(eq=False)
class Problem:
    mesh: Mesh
    material: Material
    loads: LoadCase = field(default_factory=LoadCase)
    thickness: float = 1.0


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _keyvals(tokens, allowed, lineno):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ProblemFormatError(f"expected key=value, got {tok!r}", lineno)
        k, v = tok.split("=", 1)
        if k not in allowed:
            raise ProblemFormatError(f"unknown key {k!r} (allowed: {', '.join(allowed)})", lineno)
        if k in out:
            raise ProblemFormatError(f"duplicate key {k!r}", lineno)
        out[k] = v
    return out


def _float(text, lineno):
    try:
        return float(text)
    except ValueError:
        raise ProblemFormatError(f"invalid number {text!r}", lineno) from None


def _int(text, lineno):
    try:
        return int(text)
    except ValueError:
        raise ProblemFormatError(f"invalid integer {text!r}", lineno) from None


def parse_problem(text: str) -> Problem:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ProblemFormatError(f"missing header {HEADER!r}", 1)
    body = []
    for lineno, raw in enumerate(lines[1:], start=2):
        s = raw.split("#", 1)[0].strip()
        if s:
            body.append((lineno, s.split()))

    material = thickness = None
    nodes = elements = None
    node_sets: dict[str, list[int]] = {}
    bc_cmds, load_cmds = [], []
    i = 0
    while i < len(body):
        lineno, tok = body[i]
        kw = tok[0]
        i += 1
        if kw == "material":
            if material is not None:
                raise ProblemFormatError("duplicate material line", lineno)
            kv = _keyvals(tok[1:], ("E", "nu", "mode", "thickness"), lineno)
            if "E" not in kv or "nu" not in kv:
                raise ProblemFormatError("material needs E and nu", lineno)
            try:
                mode = PlaneMode(kv.get("mode", "plane_stress"))
                material = Material(_float(kv["E"], lineno), _float(kv["nu"], lineno), mode)
            except ValueError as exc:
                raise ProblemFormatError(str(exc), lineno) from None
            thickness = _float(kv.get("thickness", "1"), lineno)
            if not thickness > 0:
                raise ProblemFormatError("thickness must be positive", lineno)
        elif kw in ("nodes", "elements"):
            if len(tok) != 2:
                raise ProblemFormatError(f"expected '{kw} COUNT'", lineno)
            count = _int(tok[1], lineno)
            rows = body[i : i + count]
            if len(rows) < count:
                raise ProblemFormatError(f"{kw} section ends early", lineno)
            i += count
            if kw == "nodes":
                if nodes is not None:
                    raise ProblemFormatError("duplicate nodes section", lineno)
                nodes = np.empty((count, 2))
                for k, (ln, r) in enumerate(rows):
                    if len(r) != 3 or _int(r[0], ln) != k + 1:
                        raise ProblemFormatError(f"expected node line '{k + 1} X Y'", ln)
                    nodes[k] = _float(r[1], ln), _float(r[2], ln)
            else:
                if elements is not None:
                    raise ProblemFormatError("duplicate elements section", lineno)
                elements = []
                for k, (ln, r) in enumerate(rows):
                    if len(r) < 4 or _int(r[0], ln) != k + 1:
                        raise ProblemFormatError(f"expected element line '{k + 1} N1 N2 N3 ...'", ln)
                    elements.append([_int(t, ln) - 1 for t in r[1:]])
        elif kw == "nodeset":
            if len(tok) < 3:
                raise ProblemFormatError("expected 'nodeset NAME ID ...'", lineno)
            name = tok[1]
            if name[0].isdigit():
                raise ProblemFormatError("node set names must not start with a digit", lineno)
            node_sets.setdefault(name, []).extend(_int(t, lineno) - 1 for t in tok[2:])
        elif kw == "dirichlet":
            if len(tok) < 3:
                raise ProblemFormatError("expected 'dirichlet TARGET ux=.. uy=..'", lineno)
            kv = _keyvals(tok[2:], ("ux", "uy"), lineno)
            bc_cmds.append((lineno, tok[1], {k: _float(v, lineno) for k, v in kv.items()}))
        elif kw == "load":
            if len(tok) < 3:
                raise ProblemFormatError("expected 'load TARGET fx=.. fy=..'", lineno)
            kv = _keyvals(tok[2:], ("fx", "fy"), lineno)
            load_cmds.append((lineno, tok[1], {k: _float(v, lineno) for k, v in kv.items()}))
        else:
            raise ProblemFormatError(f"unknown keyword {kw!r}", lineno)

    if material is None:
        raise ProblemFormatError("missing material line")
    if nodes is None or elements is None:
        raise ProblemFormatError("missing nodes or elements section")
    mesh = Mesh(nodes, elements, node_sets)
    n = mesh.n_nodes

    def targets(name, lineno):
        if name[0].isdigit():
            node = _int(name, lineno) - 1
            if not 0 <= node < n:
                raise ProblemFormatError(f"unknown node id {name}", lineno)
            return [node]
        if name not in mesh.node_sets:
            raise ProblemFormatError(f"unknown node set {name!r}", lineno)
        return mesh.node_sets[name].tolist()

    loads = LoadCase()
    # Set-level constraints first, so that per-node lines override them.
    for lineno, name, kv in sorted(bc_cmds, key=lambda c: c[1][0].isdigit()):
        for node in targets(name, lineno):
            loads.fix(node, kv.get("ux"), kv.get("uy"))
    for lineno, name, kv in load_cmds:
        for node in targets(name, lineno):
            loads.add_load(node, kv.get("fx", 0.0), kv.get("fy", 0.0))
    try:
        loads.check(n)
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from None
    return Problem(mesh, material, loads, thickness)


def read_problem(path) -> Problem:
    with open(path, encoding="utf-8") as f:
        return parse_problem(f.read())


def format_problem(problem: Problem) -> str:
    m, mat = problem.mesh, problem.material
    out = io.StringIO()
    w = out.write
    w(HEADER + "\n")
    w(
        f"material E={_fmt(mat.youngs_modulus)} nu={_fmt(mat.poisson_ratio)} "
        f"mode={mat.plane_mode.value} thickness={_fmt(problem.thickness)}\n"
    )
    w(f"nodes {m.n_nodes}\n")
    for k, (x, y) in enumerate(m.nodes):
        w(f"{k + 1} {_fmt(x)} {_fmt(y)}\n")
    w(f"elements {m.n_elements}\n")
    for k, conn in enumerate(m.elements):
        w(f"{k + 1} " + " ".join(str(int(c) + 1) for c in conn) + "\n")
    for name, ids in m.node_sets.items():
        if len(ids):
            w(f"nodeset {name} " + " ".join(str(int(c) + 1) for c in ids) + "\n")
    by_node: dict[int, dict[str, float]] = {}
    for dof, val in sorted(problem.loads.dirichlet.items()):
        by_node.setdefault(dof // 2, {})["ux" if dof % 2 == 0 else "uy"] = val
    for node, kv in by_node.items():
        w(f"dirichlet {node + 1} " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(kv.items())) + "\n")
    for node, fx, fy in problem.loads.point_loads:
        w(f"load {node + 1} fx={_fmt(fx)} fy={_fmt(fy)}\n")
    return out.getvalue()


def write_problem(problem: Problem, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_problem(problem))
