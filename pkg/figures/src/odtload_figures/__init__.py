"""Plotting scripts for the simulator's CSV outputs.

Read-only consumers: nothing here recomputes physics. Styles are pinned
so that rendering the same input twice produces identical bytes.
"""

from .contours import render_potential_contours
from .efficiency import render_efficiency_curves

__all__ = ["render_efficiency_curves", "render_potential_contours"]
__version__ = "0.1.0"
