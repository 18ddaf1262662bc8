"""Increment surface dxi(xi_hat, E_R): table, lookup, persistence, calibration."""

from .table import (DEFAULT_LEVELS, DEFAULT_XI_GRID, TABLE_ENV, TABLE_VERSION, IncrementTable,
                    default_table, dumps_table, dxi_lookup, load_table, loads_table, save_table,
                    shipped_table_path, zero_table)

_CALIBRATION = ("CalibConfig", "CalibrationResult", "CalibrationSet", "bump_basis",
                "calibrate", "calibrate_table", "initial_column")


def __getattr__(name):
    # calibration pulls in the predictor, which itself needs .table
    if name in _CALIBRATION:
        from . import calibration
        return getattr(calibration, name)
    raise AttributeError(name)
