"""Kernel backend selection: compiled extension when built, pure Python otherwise.

Both backends implement the same operations with identical arithmetic order,
so results are bitwise-identical; only speed differs.
"""

from __future__ import annotations

try:
    from motiv import _speedups as _impl
except ImportError:  # extension not built
    from motiv import _kernels_py as _impl

BACKEND: str = _impl.BACKEND

clip_ring_to_rect = _impl.clip_ring_to_rect
ring_signed_area = _impl.ring_signed_area
point_in_rings = _impl.point_in_rings
relax_layout = _impl.relax_layout
