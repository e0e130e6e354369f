"""Numerical laboratory for hyperbolic splittings on tori.

Thin wrapper over the C++ core; see the project README for the CLI and the
file formats.
"""

from ._core import (
    AnosovError,
    HolderReport,
    HyperbolicityEstimate,
    MapSpec,
    apply_inverse,
    apply_map,
    cocycle,
    finite_time_rates,
    fit_holder,
    graph_transform,
    grow_manifold,
    jacobian,
    orbit,
    second_difference,
    slope_of,
    stable_direction,
    stable_transversal_samples,
    subspace_angle,
    unstable_direction,
    unstable_graph,
    volume_defect,
)

CAT_MAP_JSON = '{"linear": [[2, 1], [1, 1]], "shears": []}'


def cat_map():
    """The (2 1; 1 1) torus automorphism."""
    return MapSpec.from_json(CAT_MAP_JSON)


def perturbed_cat_map(eps=0.05):
    """Cat map composed with two volume-preserving shears of amplitude eps."""
    import json

    spec = {
        "linear": [[2, 1], [1, 1]],
        "shears": [
            {
                "source": 0,
                "target": 1,
                "amplitude": eps,
                "profile": [{"freq": 1, "sin": 1.0, "cos": 0.0}],
            },
            {
                "source": 1,
                "target": 0,
                "amplitude": eps,
                "profile": [{"freq": 1, "sin": 0.7, "cos": 0.3}],
            },
        ],
    }
    return MapSpec.from_json(json.dumps(spec))


__all__ = [
    "AnosovError",
    "CAT_MAP_JSON",
    "HolderReport",
    "HyperbolicityEstimate",
    "MapSpec",
    "apply_inverse",
    "apply_map",
    "cat_map",
    "cocycle",
    "finite_time_rates",
    "fit_holder",
    "graph_transform",
    "grow_manifold",
    "jacobian",
    "orbit",
    "perturbed_cat_map",
    "second_difference",
    "slope_of",
    "stable_direction",
    "stable_transversal_samples",
    "subspace_angle",
    "unstable_direction",
    "unstable_graph",
    "volume_defect",
]
