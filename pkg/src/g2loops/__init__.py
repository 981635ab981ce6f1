"""G2 structures, loop-space symplectic forms, relative Maslov indices and filament flow."""

__version__ = "0.1.0"

from . import cayley, errors, filament, g2struct, loopspace, maslov  # noqa: E402,F401
from .cayley import Octonion, ThreeForm, cross, oct_mul, standard_three_form  # noqa: E402,F401
from .loopspace import DiscreteLoop, NormalField  # noqa: E402,F401
