import math

import fraclab

CANTOR_MAPS = [
    {"ratio": 1 / 3, "orthogonal": [[1.0]], "translation": [0.0]},
    {"ratio": 1 / 3, "orthogonal": [[1.0]], "translation": [2 / 3]},
]


def bare_cantor():
    return {"dim": 1, "maps": CANTOR_MAPS}


def interval_cantor():
    return {
        "dim": 1,
        "maps": CANTOR_MAPS,
        "condensation": {"kind": "interval", "a": 0.4, "b": 0.6},
        "open_set": {"vertices": [[0.0], [1.0]]},
    }


def test_similarity_dimension():
    d = fraclab.similarity_dimension(bare_cantor())
    assert abs(d - math.log(2) / math.log(3)) < 1e-9


def test_attractor_and_estimates():
    space = fraclab.attractor_points(bare_cantor(), 3.0**-8)
    assert space["dim"] == 1
    assert len(space["points"]) == 256
    sweep = {"centers": "all", "ratio_grid": [[0.00411934, 0.999], [0.01235802, 0.999]]}
    est = fraclab.estimate_counting(space, "assouad", sweep)
    assert abs(est["exponent"] - math.log(2) / math.log(3)) < 0.07
    assert est["mode"] == "assouad"
    low = fraclab.estimate_counting(space, "lower", sweep)
    assert low["exponent"] <= est["exponent"] + 1e-12


def test_determinism():
    a = fraclab.attractor_points(bare_cantor(), 3.0**-6)
    b = fraclab.attractor_points(bare_cantor(), 3.0**-6)
    assert a == b


def test_cosc():
    rep = fraclab.check_cosc(interval_cantor())
    assert rep["cosc_ok"] is True
    assert rep["cosc_margin"] > 0


def test_cube_tree_and_mass():
    space = fraclab.attractor_points(bare_cantor(), 3.0**-6)
    tree = fraclab.cube_tree(space, 0.25, 2, verify=True)
    report = tree["report"]
    assert report["partition_ok"] and report["nesting_ok"] and report["sandwich_ok"]
    n = 4096
    grid_space = {"dim": 1, "points": [[i / (n - 1)] for i in range(n)],
                  "resolution_floor": 1e-5}
    mass = fraclab.build_mass(grid_space, 0.015625, 2, t=0.25, s=0.5, c0=2.0)
    assert mass["variant"] == "plain" and mass["K"] == 3
    grid = fraclab.default_ratio_grid(space)
    assert grid and all(r < R for r, R in grid)
    cloud = {"space": space, "weights": [1.0] * len(space["points"])}
    est = fraclab.estimate_measure(cloud, "lower_reg", {"ratio_grid": grid})
    assert est["exponent"] > 0


def test_run_experiment():
    config = {
        "experiment": "vk",
        "ifs": {
            "dim": 1,
            "maps": CANTOR_MAPS,
            "condensation": {"kind": "points", "points": [[0.5]]},
            "open_set": {"vertices": [[0.0], [1.0]]},
        },
        "q": 0.4,
        "n_max": 10,
        "tolerance": 0.01,
        "sweep": {"centers": "all", "guard": 1.0, "ratio_grid": []},
    }
    rep = fraclab.run_experiment(config)
    assert rep["verdict"] == "pass"
    assert abs(rep["measured"]["c0_measured"] - 0.8) < 1e-6


def test_error_mapping():
    try:
        fraclab.estimate_counting(
            fraclab.attractor_points(bare_cantor(), 3.0**-5), "assouad", {"ratio_grid": []}
        )
    except ValueError:
        pass
    else:
        raise AssertionError("empty sweep grid should raise ValueError")
    try:
        fraclab.similarity_dimension({"dim": 1, "maps": []})
    except ValueError:
        pass
    else:
        raise AssertionError("empty map list should raise ValueError")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"{test.__name__}: ok")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    main()
