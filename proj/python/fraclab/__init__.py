"""Finite-scale Assouad dimension and measure regularity toolkit.

Dict-friendly wrappers over the compiled core: inputs may be dicts or JSON
strings, outputs are parsed dicts (plain floats/lists pass through).
"""

import json as _json

try:
    from . import _fraclab as _core
except ImportError:  # in-tree build: extension on PYTHONPATH next to python/
    import _fraclab as _core

__all__ = [
    "similarity_dimension",
    "attractor_points",
    "inhomogeneous_points",
    "stopping_words",
    "check_cosc",
    "cube_tree",
    "build_mass",
    "estimate_counting",
    "estimate_measure",
    "default_ratio_grid",
    "run_experiment",
]


def _dumps(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def similarity_dimension(ifs):
    return _core.similarity_dimension(_dumps(ifs))


def attractor_points(ifs, delta, budget=1_000_000):
    return _json.loads(_core.attractor_points(_dumps(ifs), delta, budget))


def inhomogeneous_points(ifs, delta, budget=4_000_000):
    return _json.loads(_core.inhomogeneous_points(_dumps(ifs), delta, budget))


def stopping_words(ifs, rho, budget=1_000_000):
    return _core.stopping_words(_dumps(ifs), rho, budget)


def check_cosc(ifs):
    return _json.loads(_core.check_cosc(_dumps(ifs)))


def cube_tree(space, rho, depth, verify=False):
    return _json.loads(_core.cube_tree(_dumps(space), rho, depth, verify))


def build_mass(space, rho, depth, t, s, c0, M=0, doubling=False):
    return _json.loads(_core.build_mass(_dumps(space), rho, depth, t, s, c0, M, doubling))


def estimate_counting(space, mode, sweep):
    return _json.loads(_core.estimate_counting(_dumps(space), mode, _dumps(sweep)))


def estimate_measure(cloud, mode, sweep):
    return _json.loads(_core.estimate_measure(_dumps(cloud), mode, _dumps(sweep)))


def default_ratio_grid(space, guard=10.0, min_lever=16.0):
    return [tuple(pair) for pair in _core.default_ratio_grid(_dumps(space), guard, min_lever)]


def run_experiment(config, jobs=0, force=False):
    return _json.loads(_core.run_experiment(_dumps(config), jobs, force))
