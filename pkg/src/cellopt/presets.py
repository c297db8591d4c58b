"""Canned network templates and experiment presets.

The "paper" preset is the full 8-cell downlink LTE layout; the "desk"
preset keeps the first two macro and first two pico sites with a reduced
interference-level table and a coarser load bound, small enough for the
bundled branch and bound.
"""

from __future__ import annotations

from .netmodel import MACRO, PICO, Cell, DemandPoint, EnergyParams, NetworkScenario
from .units import db_to_linear, dbm_to_watts, noise_power_watts

MACRO_POSITIONS = ((200.0, 200.0), (150.0, 850.0), (800.0, 230.0), (780.0, 820.0))
PICO_POSITIONS = ((500.0, 700.0), (520.0, 310.0), (320.0, 500.0), (690.0, 490.0))

MACRO_P_MIN_DBM = 36.0
MACRO_P_MAX_DBM = 46.0
MACRO_GAIN_DB = 15.0
MACRO_BIAS_DB = 0.0
PICO_P_MIN_DBM = 26.0
PICO_P_MAX_DBM = 36.0
PICO_GAIN_DB = 5.0
PICO_BIAS_DB = 3.0  # tabulated value; the running text also mentions 2 dB

DP_GAIN_DB = 0.0
NOISE_DBM_PER_HZ = -145.0
BANDWIDTH_HZ = 20e6
BW_EFFICIENCY = 0.8
GAMMA_MIN_DB = -10.0
GAMMA_MAX_DB = 20.0

AREA_M = 1000.0

DESK_WEIGHTS = ((1.0, 1.0, 1.0), (0.25, 1.0, 1.0), (0.0, 0.0, 0.0))


def table2_cells(n_macro: int = 4, n_pico: int = 4,
                 pico_bias_db: float = PICO_BIAS_DB) -> tuple[Cell, ...]:
    """The fixed base-station layout, optionally truncated per class."""
    cells = []
    for pos in MACRO_POSITIONS[:n_macro]:
        cells.append(Cell(
            id=len(cells), position=pos,
            p_min=dbm_to_watts(MACRO_P_MIN_DBM), p_max=dbm_to_watts(MACRO_P_MAX_DBM),
            antenna_gain=db_to_linear(MACRO_GAIN_DB), bias=db_to_linear(MACRO_BIAS_DB),
            cls=MACRO))
    for pos in PICO_POSITIONS[:n_pico]:
        cells.append(Cell(
            id=len(cells), position=pos,
            p_min=dbm_to_watts(PICO_P_MIN_DBM), p_max=dbm_to_watts(PICO_P_MAX_DBM),
            antenna_gain=db_to_linear(PICO_GAIN_DB), bias=db_to_linear(pico_bias_db),
            cls=PICO))
    return tuple(cells)


def make_scenario(cells: tuple[Cell, ...],
                  dp_positions,
                  demand: float,
                  energy_params: EnergyParams = EnergyParams()) -> NetworkScenario:
    """Scenario from a cell template plus DP positions at a uniform demand."""
    dps = tuple(DemandPoint(id=m, position=(float(px), float(py)), demand=demand,
                            antenna_gain=db_to_linear(DP_GAIN_DB))
                for m, (px, py) in enumerate(dp_positions))
    return NetworkScenario(
        cells=cells,
        demand_points=dps,
        noise_power=noise_power_watts(NOISE_DBM_PER_HZ, BANDWIDTH_HZ),
        bandwidth=BANDWIDTH_HZ,
        bw_efficiency=BW_EFFICIENCY,
        gamma_min=db_to_linear(GAMMA_MIN_DB),
        gamma_max=db_to_linear(GAMMA_MAX_DB),
        energy_params=energy_params,
    )
