"""Generator for the bundled example tables.

Each table is a seeded draw around a hand-shaped response surface, designed
so the worked examples have realistic structure: an interior optimum for
the strength study, genuinely competing outputs for the multi-objective
study, a constraint that binds before the unconstrained optimum for the
shape-memory study, and roughness measurements whose +-1 error bound
yields some preference pairs but not others.

Run as a module to rewrite the CSV files in place:

    python3 -m boat.datasets._make

Regeneration is deterministic; the files only change if this generator
changes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..acquisition import pareto_mask
from ..campaign import fit_quadratic_oracle
from ..data import Dataset
from ..optimize import sobol_candidates
from ..preference import build_preferences
from ..storage import save_csv
from . import (
    _PIEZO_SPACE,
    _ROUGHNESS_SPACE,
    _SHAPE_MEMORY_SPACE,
    _STRENGTH_SPACE,
    ROUGHNESS_ERROR_BOUND,
)

HERE = Path(__file__).parent


def _unit(space, points):
    return (points - space.lower) / (space.upper - space.lower)


def make_strength_table() -> Dataset:
    """27-run three-level orthogonal array with an interior-peak response.

    The fourth factor's level index is the sum of the first three modulo
    three, a regular fraction that keeps a full quadratic in all four
    factors identifiable from the 27 runs.
    """
    levels = np.array(
        [
            [35.0, 70.0, 100.0],
            [80.0, 100.0, 120.0],
            [6.0, 10.0, 14.0],
            [1.0, 2.0, 3.0],
        ]
    )
    rows = []
    for a in range(3):
        for b in range(3):
            for c in range(3):
                d = (a + b + c) % 3
                rows.append(
                    [levels[0, a], levels[1, b], levels[2, c], levels[3, d]]
                )
    points = np.asarray(rows)
    u = _unit(_STRENGTH_SPACE, points)
    truth = (
        95.0
        - 60.0
        * (
            (u[:, 0] - 0.55) ** 2
            + (u[:, 1] - 0.45) ** 2
            + 0.8 * (u[:, 2] - 0.6) ** 2
            + 0.6 * (u[:, 3] - 0.4) ** 2
        )
        + 6.0 * (u[:, 0] - 0.5) * (u[:, 1] - 0.5)
    )
    rng = np.random.default_rng(np.random.SeedSequence([20240, 1]))
    y = np.round(truth + rng.normal(0.0, 0.8, len(points)), 2)
    data = Dataset(points, y[:, None], ("y",), space=_STRENGTH_SPACE)
    # The closed-loop demo fits a full quadratic to these rows; fail fast
    # here if the array ever stops identifying one.
    fit_quadratic_oracle(data.points, data.column("y"))
    return data


def make_piezoelectric_table() -> Dataset:
    """Two-level half fraction, three replicates, four competing outputs."""
    low_high = np.array(
        [
            [9.0, 13.0],
            [100.0, 300.0],
            [0.8, 1.2],
            [10.0, 20.0],
        ]
    )
    combos = []
    for a in range(2):
        for b in range(2):
            for c in range(2):
                d = a ^ b ^ c
                combos.append((a, b, c, d))
    rng = np.random.default_rng(np.random.SeedSequence([20240, 2]))
    points, outputs = [], []
    for a, b, c, d in combos:
        setting = [
            low_high[0, a],
            low_high[1, b],
            low_high[2, c],
            low_high[3, d],
        ]
        for _ in range(3):
            # Higher binder helps density but hurts piezoelectric response
            # and shape; bigger particles do the reverse. No setting wins
            # everywhere, so the front stays a genuine trade-off.
            density = 90.0 + 3.0 * a + 2.0 * c - 2.5 * d - 1.5 * b
            piezo = 120.0 + 45.0 * b - 20.0 * a + 10.0 * d
            permittivity = 1800.0 + 500.0 * b - 150.0 * a + 100.0 * c
            deformation = 2.5 + 1.8 * c + 1.2 * a - 0.8 * d + 0.5 * b
            points.append(setting)
            outputs.append(
                [
                    round(density + rng.normal(0.0, 0.4), 2),
                    round(piezo + rng.normal(0.0, 4.0), 1),
                    round(permittivity + rng.normal(0.0, 40.0), 1),
                    round(deformation + rng.normal(0.0, 0.15), 2),
                ]
            )
    data = Dataset(
        np.asarray(points),
        np.asarray(outputs),
        ("y_1", "y_2", "y_3", "y_4"),
        space=_PIEZO_SPACE,
    )
    front = pareto_mask(
        data.outputs, ["maximize", "maximize", "maximize", "minimize"]
    )
    assert 1 < front.sum() < data.n, "front should be a proper subset"
    return data


def make_shape_memory_table() -> Dataset:
    """17 spread-out runs where the temperature ceiling binds first.

    Both outputs are driven by the log of a linear energy-density
    surrogate, power / (speed * hatch): the recovery ratio peaks at a
    higher energy input than the austenite-finish limit allows, so the
    constrained and unconstrained optima differ.
    """
    # Speed and hatch each span roughly a decade, so the runs are spaced
    # on a log scale there; otherwise high-energy settings are never
    # visited and every run lands on one side of the ceiling.
    unit_box = sobol_candidates(
        type(_SHAPE_MEMORY_SPACE).from_bounds(
            ["a", "b", "c"], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]
        ),
        17,
        seed=20243,
    )
    lower, upper = _SHAPE_MEMORY_SPACE.lower, _SHAPE_MEMORY_SPACE.upper
    power = lower[0] + unit_box[:, 0] * (upper[0] - lower[0])
    speed = np.exp(
        np.log(lower[1]) + unit_box[:, 1] * (np.log(upper[1]) - np.log(lower[1]))
    )
    hatch = np.exp(
        np.log(lower[2]) + unit_box[:, 2] * (np.log(upper[2]) - np.log(lower[2]))
    )
    points = np.round(np.column_stack([power, speed, hatch]))
    rng = np.random.default_rng(np.random.SeedSequence([20240, 3]))
    log_energy = np.log(points[:, 0] / (points[:, 1] * points[:, 2] / 1000.0))
    recovery = 96.0 - 3.5 * (log_energy - 3.2) ** 2
    finish = -18.0 + 13.0 * (log_energy - 0.6)
    outputs = np.column_stack(
        [
            np.round(recovery + rng.normal(0.0, 0.8, len(points)), 1),
            np.round(finish + rng.normal(0.0, 1.2, len(points)), 1),
        ]
    )
    data = Dataset(
        points,
        outputs,
        ("Recovery_ratio", "Austenite_finish"),
        space=_SHAPE_MEMORY_SPACE,
    )
    feasible = data.column("Austenite_finish") <= 10.0
    assert 3 <= feasible.sum() <= len(points) - 3, "need both classes"
    assert not feasible[np.argmax(data.column("Recovery_ratio"))], (
        "the best observed recovery should violate the ceiling"
    )
    return data


def make_roughness_table() -> Dataset:
    """16-run four-level array plus five extra runs, with roughness values
    anchored so the +-1 error bound implies a short preference chain at the
    top of the table and ties elsewhere."""
    levels = np.array(
        [
            [180.0, 200.0, 220.0, 240.0],
            [20.0, 25.0, 30.0, 35.0],
            [500.0, 600.0, 700.0, 800.0],
        ]
    )
    rows = []
    for i in range(4):
        for j in range(4):
            k = (i + j) % 4
            rows.append([levels[0, i], levels[1, j], levels[2, k]])
    rng = np.random.default_rng(np.random.SeedSequence([20240, 4]))
    extra = rng.uniform(
        _ROUGHNESS_SPACE.lower, _ROUGHNESS_SPACE.upper, (5, 3)
    )
    points = np.vstack([rows, np.round(extra, 1)])
    u = _unit(_ROUGHNESS_SPACE, points)
    truth = (
        5.75
        + 2.2 * u[:, 2]
        + 1.0 * u[:, 1]
        - 2.4 * u[:, 0]
        + 0.5 * u[:, 0] * u[:, 2]
    )
    roughness = np.round(truth + rng.normal(0.0, 0.25, len(points)), 3)
    # Anchor the head of the table: the first three runs are strictly
    # ordered even after widening each value by the error bound, while the
    # first and sixth stay indistinguishable.
    roughness[0] = 5.797
    roughness[1] = 8.142
    roughness[2] = 10.356
    length_dif = np.round(rng.normal(0.0, 0.12, len(points)), 3)
    width_dif = np.round(rng.normal(0.0, 0.06, len(points)), 3)
    height_dif = np.round(rng.normal(0.0, 0.04, len(points)), 3)
    outputs = np.column_stack(
        [
            roughness,
            45.0 + length_dif,
            length_dif,
            5.0 + width_dif,
            width_dif,
            1.0 + height_dif,
            height_dif,
        ]
    )
    data = Dataset(
        points,
        outputs,
        (
            "Surface_roughness",
            "Length",
            "Length_dif",
            "Width",
            "Width_dif",
            "Height",
            "Height_dif",
        ),
        space=_ROUGHNESS_SPACE,
    )
    prefs = build_preferences(
        data.column("Surface_roughness"),
        ROUGHNESS_ERROR_BOUND,
        sense="minimize",
    )
    pairs = {tuple(p) for p in prefs.pairs.tolist()}
    assert {(0, 1), (1, 2)} <= pairs, "head of the table must be ordered"
    assert (0, 5) not in pairs and (5, 0) not in pairs, "ties must remain"
    return data


def main() -> None:
    save_csv(HERE / "BatchObj.csv", _STRENGTH_SPACE, make_strength_table())
    save_csv(HERE / "MultiObj.csv", _PIEZO_SPACE, make_piezoelectric_table())
    save_csv(
        HERE / "BBcon.csv", _SHAPE_MEMORY_SPACE, make_shape_memory_table()
    )
    save_csv(
        HERE / "SurfRough.csv", _ROUGHNESS_SPACE, make_roughness_table()
    )


if __name__ == "__main__":
    main()
