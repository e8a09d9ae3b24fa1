"""Solvers and samplers for the arboreal gas (edge-weighted random forests).

The arboreal gas on a finite graph weights every spanning forest F by
beta^{|F|}; equivalently it is Bernoulli(beta/(1+beta)) bond percolation
conditioned to contain no cycle.  This package computes its observables
by four independent routes and cross-validates them:

- ``arbogas.exact``: brute-force enumeration and determinant formulas
  (the ground-truth oracle on small graphs),
- ``arbogas.grassmann``: a sparse anticommuting-algebra calculator for
  the fermionic integral representation of the forest partition function,
- ``arbogas.meanfield``: exact contour quadrature and saddle-point
  asymptotics of the complete-graph integral representation,
- ``arbogas.sampler`` / ``arbogas.horo``: heat-bath Monte Carlo on the
  forest configuration, and Langevin (MALA) sampling of the equivalent
  real-field (horospherical) density, including the Mermin-Wagner
  inequality checker.

``arbogas.cli`` orchestrates named experiments over all of the above.
"""

__version__ = "0.1.0"
