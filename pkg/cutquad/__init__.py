"""Cut-cell quadrature benchmarking toolkit."""
from cutquad._version import REVISION, __version__
