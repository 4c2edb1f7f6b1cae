"""JSON schemas for instances and control systems.

Instance schema: {"vertices": {id: set}, "edges": [{"u", "v", "length"}],
"source": id, "target": id}. Sets and lengths are tagged unions keyed by
"type". Loading the dump of an instance reproduces it field-exact.
"""

from __future__ import annotations

import json

import numpy as np

from . import control, costs, geometry
from .graph import Edge, Gcs, build


class SerializationError(ValueError):
    pass


def _mat(x) -> list:
    return np.asarray(x, float).tolist()


def set_to_dict(s: geometry.ConvexSet) -> dict:
    if isinstance(s, geometry.Singleton):
        return {"type": "singleton", "theta": _mat(s.theta)}
    if isinstance(s, geometry.Box):
        return {"type": "box", "lo": _mat(s.lo), "hi": _mat(s.hi)}
    if isinstance(s, geometry.PolyhedronH):
        return {"type": "polyhedron", "A": _mat(s.A), "b": _mat(s.b)}
    if isinstance(s, geometry.Ellipsoid):
        return {"type": "ellipsoid", "A": _mat(s.A), "b": _mat(s.b)}
    if isinstance(s, geometry.Product):
        return {"type": "product", "factors": [set_to_dict(f) for f in s.factors]}
    raise SerializationError(f"unknown set type {type(s).__name__}")


def set_from_dict(d: dict, where: str = "set") -> geometry.ConvexSet:
    try:
        kind = d["type"]
        if kind == "singleton":
            return geometry.Singleton(d["theta"])
        if kind == "box":
            return geometry.Box(d["lo"], d["hi"])
        if kind == "polyhedron":
            return geometry.PolyhedronH(d["A"], d["b"])
        if kind == "ellipsoid":
            return geometry.Ellipsoid(d["A"], d["b"])
        if kind == "product":
            return geometry.Product(tuple(
                set_from_dict(f, where) for f in d["factors"]))
    except KeyError as e:
        raise SerializationError(f"{where}: missing field {e.args[0]!r}") from e
    except (TypeError, geometry.GeometryError) as e:
        raise SerializationError(f"{where}: {e}") from e
    raise SerializationError(f"{where}: unknown set type {d.get('type')!r}")


def _constraint_to_dict(c: costs.AffineEdgeConstraint | None):
    if c is None:
        return None
    return {"E": _mat(c.E), "F": _mat(c.F), "g": _mat(c.g), "relation": c.relation}


def _constraint_from_dict(d):
    if d is None:
        return None
    return costs.AffineEdgeConstraint(d["E"], d["F"], d["g"], d.get("relation", "eq"))


def length_to_dict(l: costs.EdgeLength) -> dict:
    if isinstance(l, costs.Norm2Affine):
        return {"type": "norm2_affine", "C": _mat(l.C), "d": _mat(l.d),
                "n_u": l.n_u, "n_v": l.n_v}
    if isinstance(l, costs.SqNorm2Affine):
        return {"type": "sq_norm2_affine", "C": _mat(l.C), "d": _mat(l.d),
                "n_u": l.n_u, "n_v": l.n_v}
    if isinstance(l, costs.ConstantWithConstraint):
        return {"type": "const", "c": l.c, "n_u": l.n_u, "n_v": l.n_v,
                "constraint": _constraint_to_dict(l.constraint)}
    if isinstance(l, costs.QuadraticWithConstraint):
        return {"type": "quad_const", "C": _mat(l.C), "d": _mat(l.d),
                "c0": l.c0, "n_u": l.n_u, "n_v": l.n_v,
                "constraint": _constraint_to_dict(l.constraint)}
    raise SerializationError(f"unknown length type {type(l).__name__}")


def length_from_dict(d: dict, where: str = "length") -> costs.EdgeLength:
    try:
        kind = d["type"]
        if kind == "euclidean":
            return costs.euclidean(d["n"])
        if kind == "sq_euclidean":
            return costs.sq_euclidean(d["n"])
        if kind == "norm2_affine":
            return costs.Norm2Affine(d["C"], d["d"], d["n_u"], d["n_v"])
        if kind == "sq_norm2_affine":
            return costs.SqNorm2Affine(d["C"], d["d"], d["n_u"], d["n_v"])
        if kind == "const":
            return costs.ConstantWithConstraint(
                d["c"], d["n_u"], d["n_v"],
                _constraint_from_dict(d.get("constraint")))
        if kind == "quad_const":
            return costs.QuadraticWithConstraint(
                d["C"], d["d"], d["c0"], d["n_u"], d["n_v"],
                _constraint_from_dict(d.get("constraint")))
    except KeyError as e:
        raise SerializationError(f"{where}: missing field {e.args[0]!r}") from e
    except (TypeError, costs.CostError) as e:
        raise SerializationError(f"{where}: {e}") from e
    raise SerializationError(f"{where}: unknown length type {d.get('type')!r}")


def instance_to_dict(g: Gcs) -> dict:
    return {
        "vertices": {v: set_to_dict(s) for v, s in g.vertices.items()},
        "edges": [{"u": e.u, "v": e.v, "length": length_to_dict(e.length)}
                  for e in g.edges],
        "source": g.source,
        "target": g.target,
    }


def instance_from_dict(d: dict) -> Gcs:
    for key in ("vertices", "edges", "source", "target"):
        if key not in d:
            raise SerializationError(f"instance: missing field {key!r}")
    vertices = {v: set_from_dict(s, f"vertices[{v!r}]")
                for v, s in d["vertices"].items()}
    edges = []
    for i, e in enumerate(d["edges"]):
        for key in ("u", "v", "length"):
            if key not in e:
                raise SerializationError(f"edges[{i}]: missing field {key!r}")
        edges.append(Edge(e["u"], e["v"],
                          length_from_dict(e["length"], f"edges[{i}].length")))
    return build(vertices, edges, d["source"], d["target"])


def dump_instance(g: Gcs) -> str:
    return json.dumps(instance_to_dict(g), indent=2)


def load_instance(text: str) -> Gcs:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(d, dict):
        raise SerializationError("instance: top level must be an object")
    return instance_from_dict(d)


def system_from_dict(d: dict):
    """A control system: {"kind": "mintime"|"pwa", ...}."""
    kind = d.get("kind")
    try:
        if kind == "mintime":
            sys = control.LinearSystem(
                d["A"], d["B"], set_from_dict(d["S"], "S"),
                set_from_dict(d["A_set"], "A_set"), d["s0"])
            return sys, int(d["T_max"])
        if kind == "pwa":
            modes = tuple(
                control.PwaMode(set_from_dict(m["S"], f"modes[{i}].S"),
                                m["A"], m["B"], m["c"])
                for i, m in enumerate(d["modes"]))
            term = set_from_dict(d["terminal"], "terminal") \
                if d.get("terminal") is not None else None
            return (control.PwaSystem(
                modes, set_from_dict(d["A_set"], "A_set"),
                d["stage_C"], d["stage_d"], float(d.get("stage_c0", 0.0)),
                int(d["T"]), d["s0"], terminal=term,
                terminal_C=d.get("terminal_C"), terminal_d=d.get("terminal_d")),)
    except KeyError as e:
        raise SerializationError(f"system: missing field {e.args[0]!r}") from e
    except (TypeError, control.ControlError) as e:
        raise SerializationError(f"system: {e}") from e
    raise SerializationError(f"system: unknown kind {kind!r}")


def load_system(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
    return system_from_dict(d)
