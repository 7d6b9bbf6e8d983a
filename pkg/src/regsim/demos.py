"""Named demo configs: the library's worked examples as runnable experiments.

Each demo is a complete config document; `regsim demo <name>` runs it like
any other config.  The two characterize demos share one instance and differ
only in construction route, which is what the gap-closure comparison in the
test suite diffs.
"""

from __future__ import annotations

_TWO_POINT = {"size": 2}
_G_10 = [1.0, 0.0]
_IND_X1 = [0.0, 1.0]
_CONST_1 = [1.0, 1.0]
_IND_X0 = [1.0, 0.0]

_LADDER_3 = {
    "levels": [
        {"builder": "explicit", "members": [_CONST_1]},
        {"builder": "explicit", "members": [_CONST_1, _IND_X1]},
        {"builder": "explicit", "members": [_CONST_1, _IND_X1, _IND_X0]},
    ],
    "pad_to": 10,
}

DEMOS: dict[str, dict] = {
    "boost-two-point": {
        "domain": _TWO_POINT,
        "algorithm": "boost",
        "target": _G_10,
        "distributions": {"d": {"kind": "uniform"}},
        "family": {"builder": "explicit", "members": [_IND_X1]},
        "params": {"epsilon": 0.1},
    },
    "calibrated-two-point": {
        "domain": _TWO_POINT,
        "algorithm": "calibrated",
        "target": _G_10,
        "distributions": {"d": {"kind": "uniform"}},
        "family": {"builder": "explicit", "members": [_IND_X1]},
        "params": {"epsilon": 0.1, "gamma": 0.01},
    },
    "multicalibrate-two-point": {
        "domain": _TWO_POINT,
        "algorithm": "multicalibrate",
        "target": _G_10,
        "distributions": {"d": {"kind": "uniform"}},
        "family": {"builder": "explicit", "members": [_IND_X1]},
        "params": {"epsilon": 0.2},
    },
    "supersim-expanding": {
        "domain": _TWO_POINT,
        "algorithm": "supersim-expanding",
        "target": _G_10,
        "distributions": {"d": {"kind": "uniform"}},
        "ladder": _LADDER_3,
        "growth": {"kind": "shift", "by": 1},
        "params": {"epsilon": 0.1},
    },
    "supersim-shrinking": {
        "domain": _TWO_POINT,
        "algorithm": "supersim-shrinking",
        "target": _G_10,
        "distributions": {"d": {"kind": "uniform"}},
        "ladder": _LADDER_3,
        "growth": {"kind": "shift", "by": 1},
        "schedule": {"kind": "constant", "value": 0.05},
        "params": {"alpha": 0.3},
    },
    "verify41-disjoint": {
        "domain": _TWO_POINT,
        "algorithm": "verify41",
        "distributions": {"d0": [1.0, 0.0], "d1": [0.0, 1.0]},
        "family": {"builder": "explicit", "members": [_CONST_1, _IND_X1]},
        "simulator": {"kind": "calibrated"},
        "params": {"epsilon": 0.05, "gamma": 0.05, "k": 3},
    },
    "verify42-halfsplit": {
        "domain": _TWO_POINT,
        "algorithm": "verify42",
        "distributions": {"d0": [0.5, 0.5], "d1": [0.0, 1.0]},
        "family": {"builder": "explicit", "members": [_CONST_1, _IND_X1]},
        "simulator": {"kind": "calibrated"},
        "params": {"epsilon": 0.2, "gamma": 0.01, "k": 2},
    },
    "characterize-gap": {
        "domain": _TWO_POINT,
        "algorithm": "characterize",
        "distributions": {"d0": [1.0, 0.0], "d1": [0.0, 1.0]},
        "family": {"builder": "explicit", "members": [_CONST_1, _IND_X1]},
        "params": {"epsilon": 0.1, "k": 2, "mode": "two-proxy"},
    },
    "characterize-super-gap": {
        "domain": _TWO_POINT,
        "algorithm": "characterize-super",
        "distributions": {"d0": [1.0, 0.0], "d1": [0.0, 1.0]},
        "ladder": {
            "levels": [
                {"builder": "explicit", "members": [_CONST_1]},
                {"builder": "explicit", "members": [_CONST_1, _IND_X1]},
                {"builder": "explicit", "members": [_CONST_1, _IND_X1, _IND_X0]},
            ],
            "pad_to": 8,
        },
        "growth": {"kind": "shift", "by": 1},
        "params": {"epsilon": 0.1, "k": 2, "mode": "two-proxy"},
    },
}


def demo_config(name: str) -> dict:
    if name not in DEMOS:
        raise KeyError(name)
    import copy

    return copy.deepcopy(DEMOS[name])


def demo_names() -> list[str]:
    return sorted(DEMOS)
