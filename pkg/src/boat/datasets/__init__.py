"""Bundled example tables from additive-manufacturing process studies.

Four ready-to-load campaign tables, one per optimization flavor:

    BatchObj.csv    binder-jetting strength study; one objective, a 27-run
                    three-level orthogonal array over four process factors
    MultiObj.csv    paste-extrusion piezoelectric ceramics; four competing
                    objectives over a replicated two-level fractional
                    factorial
    BBcon.csv       laser-fabricated shape-memory alloys; maximize recovery
                    ratio subject to a transformation-temperature ceiling
    SurfRough.csv   laser-melting surface finish; roughness measurements
                    meant for ordinal (preference) treatment, error bound
                    1 unit, plus dimensional-accuracy side columns

The tables are synthetic: `_make.py` draws them from seeded noise around
plausible response surfaces shaped like the studies they mimic, so the
numbers support worked examples and tests but no engineering conclusions.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..campaign import CampaignState, init_campaign, tell
from ..data import ConstraintSpec, Dataset, ObjectiveSpec
from ..errors import ArgumentError
from ..space import DesignSpace
from ..storage import CsvSchema, load_csv

__all__ = [
    "EXAMPLE_NAMES",
    "ExampleTable",
    "campaign_from_table",
    "load_example",
    "load_piezoelectric_study",
    "load_roughness_study",
    "load_shape_memory_study",
    "load_strength_study",
]


@dataclass(frozen=True)
class ExampleTable:
    """A bundled study: its design space, data, and output roles."""

    name: str
    space: DesignSpace
    dataset: Dataset
    objectives: tuple
    constraints: tuple = ()


_STRENGTH_SPACE = DesignSpace.from_bounds(
    ["Saturation", "Layer_thickness", "Roll_speed", "Feed_powder_ratio"],
    [35.0, 80.0, 6.0, 1.0],
    [100.0, 120.0, 14.0, 3.0],
    units=["%", "um", "mm/s", ""],
)
_STRENGTH_SCHEMA = CsvSchema(
    ("Saturation", "Layer_thickness", "Roll_speed", "Feed_powder_ratio"),
    ("y",),
    roles=("objective",),
)

_PIEZO_SPACE = DesignSpace.from_bounds(
    ["Binder_amount", "Particle_size", "Nozzle_diameter", "Printing_speed"],
    [8.0, 80.0, 0.5, 8.0],
    [15.0, 350.0, 1.5, 25.0],
    units=["wt%", "nm", "mm", "mm/s"],
)
_PIEZO_SCHEMA = CsvSchema(
    ("Binder_amount", "Particle_size", "Nozzle_diameter", "Printing_speed"),
    ("y_1", "y_2", "y_3", "y_4"),
    roles=("objective", "objective", "objective", "objective"),
)

_SHAPE_MEMORY_SPACE = DesignSpace.from_bounds(
    ["Laser_power", "Scan_speed", "Hatch_spacing"],
    [100.0, 125.0, 30.0],
    [250.0, 1500.0, 180.0],
    units=["W", "mm/s", "um"],
)
_SHAPE_MEMORY_SCHEMA = CsvSchema(
    ("Laser_power", "Scan_speed", "Hatch_spacing"),
    ("Recovery_ratio", "Austenite_finish"),
    roles=("objective", "constraint"),
)

_ROUGHNESS_SPACE = DesignSpace.from_bounds(
    ["Laser_power", "Scanning_speed", "Layer_thickness"],
    [180.0, 20.0, 500.0],
    [240.0, 35.0, 800.0],
    units=["W", "mm/s", "um"],
)
_ROUGHNESS_SCHEMA = CsvSchema(
    ("Laser_power", "Scanning_speed", "Layer_thickness"),
    (
        "Surface_roughness",
        "Length",
        "Length_dif",
        "Width",
        "Width_dif",
        "Height",
        "Height_dif",
    ),
    roles=("objective",) + ("auxiliary",) * 6,
)

ROUGHNESS_ERROR_BOUND = 1.0


def _load(file_name: str, schema: CsvSchema, space: DesignSpace) -> Dataset:
    location = resources.files(__package__) / file_name
    with resources.as_file(location) as path:
        return load_csv(path, schema, space)


def load_strength_study() -> ExampleTable:
    """27-run orthogonal array maximizing transverse rupture strength."""
    return ExampleTable(
        name="BatchObj",
        space=_STRENGTH_SPACE,
        dataset=_load("BatchObj.csv", _STRENGTH_SCHEMA, _STRENGTH_SPACE),
        objectives=(ObjectiveSpec(0, "maximize", "y"),),
    )


def load_piezoelectric_study() -> ExampleTable:
    """Replicated fractional factorial trading density, piezoelectric
    response, permittivity, and shape error against each other."""
    return ExampleTable(
        name="MultiObj",
        space=_PIEZO_SPACE,
        dataset=_load("MultiObj.csv", _PIEZO_SCHEMA, _PIEZO_SPACE),
        objectives=(
            ObjectiveSpec(0, "maximize", "y_1"),
            ObjectiveSpec(1, "maximize", "y_2"),
            ObjectiveSpec(2, "maximize", "y_3"),
            ObjectiveSpec(3, "minimize", "y_4"),
        ),
    )


def load_shape_memory_study() -> ExampleTable:
    """Recovery-ratio maximization with the austenite finish temperature
    constrained to stay at or below 10 degrees."""
    return ExampleTable(
        name="BBcon",
        space=_SHAPE_MEMORY_SPACE,
        dataset=_load("BBcon.csv", _SHAPE_MEMORY_SCHEMA, _SHAPE_MEMORY_SPACE),
        objectives=(ObjectiveSpec(0, "maximize", "Recovery_ratio"),),
        constraints=(
            ConstraintSpec(1, threshold=10.0, direction="le", name="Austenite_finish"),
        ),
    )


def load_roughness_study() -> ExampleTable:
    """Surface-roughness minimization where measurements carry a +-1 error
    bound and are best treated as an ordering, not exact values."""
    return ExampleTable(
        name="SurfRough",
        space=_ROUGHNESS_SPACE,
        dataset=_load("SurfRough.csv", _ROUGHNESS_SCHEMA, _ROUGHNESS_SPACE),
        objectives=(ObjectiveSpec(0, "minimize", "Surface_roughness"),),
    )


_LOADERS = {
    "BatchObj": load_strength_study,
    "MultiObj": load_piezoelectric_study,
    "BBcon": load_shape_memory_study,
    "SurfRough": load_roughness_study,
}

EXAMPLE_NAMES = tuple(_LOADERS)


def load_example(name: str) -> ExampleTable:
    """Load a bundled table by its file stem, e.g. ``"BatchObj"``."""
    if name not in _LOADERS:
        raise ArgumentError(
            f"unknown example {name!r}; available: {EXAMPLE_NAMES}"
        )
    return _LOADERS[name]()


def campaign_from_table(table: ExampleTable, **kwargs) -> CampaignState:
    """A campaign seeded with everything the study already measured.

    Keyword arguments pass through to init_campaign (acquisition, fit,
    budget, seed).
    """
    state = init_campaign(
        table.space,
        objectives=table.objectives,
        constraints=table.constraints,
        output_names=table.dataset.output_names,
        **kwargs,
    )
    return tell(state, table.dataset.points, table.dataset.outputs)
