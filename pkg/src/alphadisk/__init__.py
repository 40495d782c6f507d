"""Numerical laboratory for filtered vortex dynamics in the exterior of a small disk.

The package is organised around one physical setup: two-dimensional
incompressible flow regularised by the Helmholtz filter (1 - alpha*Laplacian),
either in the full plane with a fixed point vortex at the origin or in the
exterior of a disk of radius eps with no-slip on the filtered velocity.

Modules:
    specfun          modified Bessel functions I0, I1, K0, K1 and adaptive quadrature
    kernels          closed-form fields: Bessel potential, filtered Biot-Savart
                     kernel, harmonic field, cutoff, exterior-disk image kernel
    radial_exterior  closed-form radial solutions outside the disk and their
                     boundary constants, energies and epsilon-rates
    mode_solver      modified Biot-Savart operator via azimuthal Fourier modes
                     and banded radial solves
    plane_solver     vortex-blob integrator for the plane limit system
    exterior_solver  semi-Lagrangian transport in the exterior domain, Picard
                     iteration, comparison against the plane limit
    harness          CLI, config files, run records, CSV/SVG emission
"""

__version__ = "0.1.0"
