"""Selects the RK4 kernel at import time.

The compiled ``_rk4core`` is preferred; set ``SDDE_STAB_PURE_PYTHON=1`` to
force the pure-Python twin.
"""
import os

from . import _rk4py

BACKEND = "python"
integrate_rk4 = _rk4py.integrate_rk4

if os.environ.get("SDDE_STAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._rk4core import integrate_rk4  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

MODE_MODEL, MODE_LINEAR = _rk4py.MODE_MODEL, _rk4py.MODE_LINEAR
KIND_CODES = {"constant": _rk4py.KIND_CONSTANT, "rational_bump": _rk4py.KIND_RATIONAL,
              "user_table": _rk4py.KIND_TABLE}
