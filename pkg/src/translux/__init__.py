"""translux: learned appearance fields for heterogeneous translucent objects.

The toolchain has three legs:

1. a reference volumetric path tracer for translucent objects under
   directional or environment lighting (``translux.render``),
2. a self-contained tiny-MLP engine that learns the object's distant-light
   subsurface response plus a sampling lobe (``translux.nn``,
   ``translux.shading``),
3. fast rendering of the learned object, either by Monte Carlo shading or
   through a degree-2 spherical-harmonics transfer table (``translux.prt``).

See README.md for the CLI and file formats.
"""

__version__ = "0.1.0"
