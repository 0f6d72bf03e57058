"""The etched reaction chamber.

KOH etching of a <100> wafer leaves walls at 54.74 degrees, so the cavity
narrows with depth.  Computing its volume from the mask opening and depth
shows that the stated 4.5 ul design volume cannot come from those
dimensions: they give about 3.41 ul.
"""

from rotary_pcr.errors import SelfTerminatedEtchError
from rotary_pcr.geometry import EtchSpec, geometry_report
from rotary_pcr.report import geometry_text

print(geometry_text(EtchSpec()))

rep = geometry_report(EtchSpec())
print(f"similar-section frustum formula would give {rep['frustum_estimate_ul']:.4f} ul; "
      "it assumes the floor keeps the opening's aspect ratio, which a uniform inset does not")

small = EtchSpec(top_length_mm=0.4, top_width_mm=0.4)
print(f"0.4 mm opening: walls meet at {small.self_termination_depth_mm * 1e3:.0f} um")
try:
    geometry_report(small)
except SelfTerminatedEtchError as exc:
    print("  ->", exc)
