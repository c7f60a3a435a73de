"""Arbitrary-precision real scalars under an explicit precision context.

Values are MPFR floats (``gmpy2.mpfr``) and all arithmetic is correctly
rounded at the context's working precision, so every computation is
bit-deterministic for a fixed context.  The user-facing unit is decimal
digits; guard digits are carried internally on top of that.  Contexts trap
invalid operations, overflow and division by zero, so non-finite values
cannot propagate: out-of-domain arguments raise :class:`DomainError`
instead.
"""

from __future__ import annotations

import math
import re

import gmpy2

from .errors import DomainError

# A Real is a gmpy2.mpfr created under some PrecisionContext.  Scalars are
# deliberately not wrapped in a class: the dense linear algebra performs
# hundreds of millions of scalar operations per run.
Real = gmpy2.mpfr

_LOG2_10 = math.log2(10.0)

_FINITE_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class PrecisionContext:
    """Decimal working precision plus guard digits, bound to an MPFR context.

    All package operations accept a context explicitly and run inside
    ``with ctx.activate():`` so the precision in force is never ambient
    global state.
    """

    __slots__ = ("decimal_digits", "guard_digits", "_gmp")

    def __init__(self, decimal_digits: int, guard_digits: int = 20):
        if decimal_digits < 30:
            raise ValueError(f"decimal_digits must be >= 30, got {decimal_digits}")
        if guard_digits < 0:
            raise ValueError(f"guard_digits must be >= 0, got {guard_digits}")
        self.decimal_digits = int(decimal_digits)
        self.guard_digits = int(guard_digits)
        self._gmp = gmpy2.context(
            precision=self.bits,
            trap_invalid=True,
            trap_overflow=True,
            trap_divzero=True,
        )

    @property
    def bits(self) -> int:
        """Binary working precision (decimal + guard digits, ceiling)."""
        return math.ceil((self.decimal_digits + self.guard_digits) * _LOG2_10) + 4

    def activate(self):
        """Context manager installing this precision for the current thread.

        Returns a fresh clone each call: gmpy2 context objects cannot be
        nested reentrantly, clones can.
        """
        return gmpy2.context(self._gmp)

    def boosted(self, extra_decimal_digits: int):
        """MPFR context with extra internal digits (cancellation headroom)."""
        return gmpy2.context(
            precision=self.bits + math.ceil(extra_decimal_digits * _LOG2_10),
            trap_invalid=True,
            trap_overflow=True,
            trap_divzero=True,
        )

    def __eq__(self, other):
        return (
            isinstance(other, PrecisionContext)
            and self.decimal_digits == other.decimal_digits
            and self.guard_digits == other.guard_digits
        )

    def __hash__(self):
        return hash((self.decimal_digits, self.guard_digits))

    def __repr__(self):
        return (
            f"PrecisionContext(decimal_digits={self.decimal_digits}, "
            f"guard_digits={self.guard_digits})"
        )

    # -- construction / serialization --------------------------------------

    def real(self, x) -> Real:
        """Make a Real from int, str, float, or another Real."""
        if isinstance(x, str):
            return self.parse(x)
        with self.activate():
            return gmpy2.mpfr(x)

    def parse(self, s: str) -> Real:
        """Read a decimal string; rejects non-finite and malformed input."""
        if not _FINITE_RE.match(s.strip()):
            raise DomainError(f"not a finite decimal literal: {s!r}")
        with self.activate():
            return gmpy2.mpfr(s.strip())

    def to_str(self, x, digits: int | None = None) -> str:
        """Serialize as ``-d.ddd...e[+-]k`` with `digits` significant digits.

        Defaults to the context's full decimal_digits, which round-trips
        exactly through :meth:`parse`.
        """
        if digits is None:
            digits = self.decimal_digits
        if not isinstance(x, gmpy2.mpfr):
            x = self.real(x)
        mant, exp, _ = x.digits(10, digits)
        sign = ""
        if mant.startswith("-"):
            sign, mant = "-", mant[1:]
        if mant.strip("0") == "":  # zero
            mant = "0" * digits
            exp = 1
        mant = mant.ljust(digits, "0")
        e = exp - 1
        return f"{sign}{mant[0]}.{mant[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"

    # -- tolerances ---------------------------------------------------------

    def tol(self, lost_digits: int) -> Real:
        """10^-(decimal_digits - lost_digits), the standard residual scale."""
        with self.activate():
            return gmpy2.mpfr(10) ** (-(self.decimal_digits - lost_digits))

    # -- scalar functions ----------------------------------------------------

    def pi(self) -> Real:
        with self.activate():
            return 4 * gmpy2.atan(gmpy2.mpfr(1))

    def arcoth(self, x) -> Real:
        """(1/2) ln((x+1)/(x-1)) for |x| > 1, full precision up to |x|-1 ~ ulp.

        Uses log1p of 2/(x-1), which is cancellation-free both near the
        branch points and for large |x|.
        """
        with self.activate():
            x = gmpy2.mpfr(x)
            if not gmpy2.is_finite(x) or abs(x) <= 1:
                raise DomainError(
                    f"arcoth undefined for |x| <= 1 (got {x}); "
                    "an eigenvalue inside the forbidden band means the "
                    "discretization needs more digits or cells"
                )
            if x > 1:
                return gmpy2.log1p(2 / (x - 1)) / 2
            return -(gmpy2.log1p(2 / (-x - 1)) / 2)

    def coth(self, y) -> Real:
        """(e^2y + 1)/(e^2y - 1); inverse of arcoth on y != 0."""
        with self.activate():
            y = gmpy2.mpfr(y)
            if y == 0:
                raise DomainError("coth undefined at 0")
            if y > 0:
                return 1 + 2 / gmpy2.expm1(2 * y)
            return -(1 + 2 / gmpy2.expm1(-2 * y))

    def elementary(self, fn: str, x) -> Real:
        """Apply one of {exp, ln, sqrt, sin, cos, atan} at context precision."""
        with self.activate():
            x = gmpy2.mpfr(x)
            if fn == "exp":
                return gmpy2.exp(x)
            if fn == "ln":
                if x <= 0:
                    raise DomainError(f"ln undefined for x <= 0 (got {x})")
                return gmpy2.log(x)
            if fn == "sqrt":
                if x < 0:
                    raise DomainError(f"sqrt undefined for x < 0 (got {x})")
                return gmpy2.sqrt(x)
            if fn == "sin":
                return gmpy2.sin(x)
            if fn == "cos":
                return gmpy2.cos(x)
            if fn == "atan":
                return gmpy2.atan(x)
        raise DomainError(f"unknown elementary function {fn!r}")
