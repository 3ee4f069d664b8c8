"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``THREEWAVE_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("THREEWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import nonlinear_substeps, shoot_soliton  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass
if BACKEND == "python":
    from ._kernels_py import nonlinear_substeps, shoot_soliton  # noqa: F401

__all__ = ["BACKEND", "nonlinear_substeps", "shoot_soliton"]
