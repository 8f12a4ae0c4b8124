"""Numerical laboratory for finite-time blow-up of compressible MHD flows.

Modules: ``testfn`` (the e^{w.x} test function), ``model`` (equation of
state and the MHD operators), ``crosscheck`` (cylindrical vs Cartesian
operator checks), ``solver``/``simulate`` (axisymmetric finite volumes),
``diagnostics`` (functionals and inequality checks), ``odelab``
(comparison ODEs and lifespan fits) and ``cli``.
"""

__version__ = "0.1.0"
