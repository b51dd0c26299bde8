"""Spectra of periodic-graph Schrodinger operators and their chiral subcoverings.

The package computes dispersion relations of discrete Schrodinger operators
H = Laplacian + potential on Z^d-periodic graphs, restricts them to rolled-up
subcovering graphs selected by integer chiral matrices, locates band edges by
grid refinement, decides exact isospectrality from rational level sets, and
evaluates closed-form band-edge corrections with their convergence order.

Submodules:
    intlat      exact integer-lattice algebra (Smith form, completion, saturation)
    graph       fundamental graphs, built-in lattices, quotient constructions
    floquet     Floquet matrices, Hermitian eigensolver, dispersion sampling
    spectrum    band edges by grid refinement, spectrum sets, inclusion checks
    asymptotics band-edge corrections, Hessians, constrained nearest points
    iso         exact rational isospectrality verdicts
    cli         command-line front end
"""

from .errors import ZonefoldError

__version__ = "0.1.0"

__all__ = ["ZonefoldError", "__version__"]
