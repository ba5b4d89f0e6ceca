"""Hot-loop kernels: compiled extension when available, numpy fallback otherwise."""

try:
    from . import _sieve_c as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    from . import _sieve_py as _impl

    BACKEND = "python"

from . import _sieve_py as python_impl

filter_progression = _impl.filter_progression
sieve_quadruple_block = _impl.sieve_quadruple_block
sieve_line = _impl.sieve_line
