"""Geometry of the KOH-etched silicon reaction chamber.

Wet anisotropic etching of a <100> wafer stops on {111} planes, so the
cavity walls slope inward at 54.74 degrees from the surface.  A
rectangular mask opening therefore produces a cavity whose length and
width both shrink linearly with depth, by ``2 z / tan(54.74 deg)`` at
depth ``z``.

The mask opening ("inner size" of the chip) is taken as the top of the
cavity.  Oxide and wall layers add no separate thermal terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import constants
from .errors import ConfigurationError, GeometryError, SelfTerminatedEtchError

# designed chamber volume quoted for the fabricated chip, in ul
DESIGN_VOLUME_UL = 4.5


@dataclass(frozen=True)
class EtchSpec:
    """Mask opening, etch depth and chip outline.

    Lengths in mm except ``depth_um`` and ``wafer_thickness_um``.
    ``sidewall_angle_deg`` is fixed by the crystal planes; override it only
    to probe limiting cases.
    """

    top_length_mm: float = 5.4
    top_width_mm: float = 2.4
    depth_um: float = 300.0
    wafer_thickness_um: float = 525.0
    chip_length_mm: float = 5.8
    chip_width_mm: float = 2.8
    sidewall_angle_deg: float = constants.KOH_SIDEWALL_ANGLE_DEG

    def __post_init__(self):
        if not (0 <= self.depth_um <= self.wafer_thickness_um):
            raise ConfigurationError(
                f"etch depth {self.depth_um} um must lie in [0, {self.wafer_thickness_um}] um"
            )
        if not (self.top_length_mm > 0 and self.top_width_mm > 0):
            raise ConfigurationError("mask opening dimensions must be > 0")
        if self.top_length_mm > self.chip_length_mm or self.top_width_mm > self.chip_width_mm:
            raise ConfigurationError("mask opening does not fit inside the chip outline")
        if not 0 < self.sidewall_angle_deg <= 90:
            raise ConfigurationError("sidewall angle must lie in (0, 90] degrees")

    @property
    def depth_mm(self):
        return self.depth_um * 1e-3

    @property
    def inset_per_depth(self):
        """Shrink of each dimension per unit depth, ``2 / tan(angle)``."""
        return 2.0 / math.tan(math.radians(self.sidewall_angle_deg))

    @property
    def self_termination_depth_mm(self):
        return min(self.top_length_mm, self.top_width_mm) / self.inset_per_depth


def bottom_dims(spec: EtchSpec):
    """Length and width (mm) of the cavity floor."""
    shrink = spec.inset_per_depth * spec.depth_mm
    length = spec.top_length_mm - shrink
    width = spec.top_width_mm - shrink
    if length <= 0 or width <= 0:
        raise SelfTerminatedEtchError(
            f"sidewalls meet at {spec.self_termination_depth_mm * 1e3:.1f} um, "
            f"before the requested {spec.depth_um:g} um"
        )
    return length, width


def cavity_volume(spec: EtchSpec):
    """Cavity volume in ul (1 mm^3 = 1 ul).

    The cross-section ``(a - s z)(b - s z)`` is quadratic in depth, so the
    prismatoid rule ``d/6 (A_top + 4 A_mid + A_bottom)`` is exact.  The
    similar-section frustum formula is not: it assumes top and bottom
    rectangles have the same aspect ratio, which a uniform inset breaks.
    """
    bottom_dims(spec)
    d = spec.depth_mm
    s = spec.inset_per_depth
    a, b = spec.top_length_mm, spec.top_width_mm
    a_top = a * b
    a_mid = (a - s * d / 2) * (b - s * d / 2)
    a_bot = (a - s * d) * (b - s * d)
    return d / 6.0 * (a_top + 4.0 * a_mid + a_bot)


def frustum_volume(spec: EtchSpec):
    """Similar-section frustum estimate ``d/3 (A1 + A2 + sqrt(A1 A2))``.

    Kept for comparison only; it underestimates elongated cavities.
    """
    lb, wb = bottom_dims(spec)
    a1 = spec.top_length_mm * spec.top_width_mm
    a2 = lb * wb
    return spec.depth_mm / 3.0 * (a1 + a2 + math.sqrt(a1 * a2))


def chip_heat_capacity(spec: EtchSpec):
    """Heat capacity (J/K) of the silicon chip minus its cavity."""
    outer = spec.chip_length_mm * spec.chip_width_mm * spec.wafer_thickness_um * 1e-3
    solid_mm3 = outer - cavity_volume(spec)
    if solid_mm3 <= 0:
        raise GeometryError("cavity volume exceeds the chip volume")
    return solid_mm3 * 1e-9 * constants.SILICON_DENSITY * constants.SILICON_SPECIFIC_HEAT


def geometry_report(spec: EtchSpec, design_volume_ul=DESIGN_VOLUME_UL):
    """Dimensions, volume and thermal mass, with the design-volume check."""
    lb, wb = bottom_dims(spec)
    vol = cavity_volume(spec)
    mismatch = (vol - design_volume_ul) / design_volume_ul
    return {
        "top_mm": (spec.top_length_mm, spec.top_width_mm),
        "bottom_mm": (lb, wb),
        "depth_um": spec.depth_um,
        "sidewall_angle_deg": spec.sidewall_angle_deg,
        "cavity_volume_ul": vol,
        "frustum_estimate_ul": frustum_volume(spec),
        "chip_heat_capacity_J_per_K": chip_heat_capacity(spec),
        "design_volume_ul": design_volume_ul,
        "design_volume_mismatch": mismatch,
        "design_volume_consistent": abs(mismatch) <= 0.01,
    }
