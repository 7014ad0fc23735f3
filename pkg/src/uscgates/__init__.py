"""Binomial-code holonomic gates in an ultrastrongly coupled atom-cavity system.

Model construction, shortcut-to-adiabaticity pulse synthesis, closed- and
open-system time evolution, and gate/state quality metrics, plus a
configuration-driven CLI (`uscgates`).
"""

from . import analysis, codes, config, dynamics, linalg, pulses, rabi

__version__ = "0.1.0"

__all__ = ["analysis", "codes", "config", "dynamics", "linalg", "pulses",
           "rabi", "__version__"]
