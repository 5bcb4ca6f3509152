"""Python face of the modular-variable interference laboratory.

Installed as a wheel the compiled module lives inside this package; when
running straight out of a CMake build tree (PYTHONPATH pointing at the build
directory) it is importable as a top-level module instead.
"""

try:
    from ._core import (
        ModvarError,
        default_seed,
        modular_decompose,
        run_experiment,
        weak_value,
        zn_eigenvalues,
        __version__,
    )
except ImportError:  # build-tree layout
    from _core import (
        ModvarError,
        default_seed,
        modular_decompose,
        run_experiment,
        weak_value,
        zn_eigenvalues,
        __version__,
    )

__all__ = [
    "ModvarError",
    "default_seed",
    "modular_decompose",
    "run_experiment",
    "weak_value",
    "zn_eigenvalues",
    "__version__",
]
