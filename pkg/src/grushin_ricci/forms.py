"""Closed forms for the warped metric, written once for every number type.

All functions take ``t = sin^2 r``, ``c2 = cos^2 r`` (and ``c = cos r`` where an
odd power of the cosine occurs) together with ``l2 = lambda^2``.  Arguments may
be floats, :class:`~grushin_ricci.interval.Interval` or
:class:`~grushin_ricci.interval.IJet`; constants must already be lifted by the
caller when rigour matters (``l2`` computed as an interval product).

Two expressions have a removable 0/0 at one end of [0, pi/2]; they are
evaluated through exact algebraic cancellations there instead of Taylor
series:

* ``(1 - h'^2)/h^2`` at r = pi/2: ``A^3 - lam^6 sin^2 r = cos^2 r * P(cos^2 r)``
  with P quadratic.
* ``(1 - f'^2)/f^2`` at r = 0: ``4 B^(5/2) - 4 = 4 (B - 1)(B^4+...+1)/(B^(5/2)+1)``
  removes the common factor sin^2 r.  This form is used on the whole range.
"""

from __future__ import annotations

from .interval import lower, xsqrt


def _sq(x):
    return x.sqr() if hasattr(x, "sqr") else x * x


def aux_A(t, c2, l2):
    return l2 * t + c2


def aux_B(t, l2):
    return 1 + l2 * t


def quarter_root(B):
    # composed square roots: tighter and monotone under intervals
    return xsqrt(xsqrt(B))


def fprime(t, c, l2):
    B = aux_B(t, l2)
    return c * (B + 1) / (2 * B * quarter_root(B))


def neg_fpp_over_f(t, l2):
    l4 = l2 * l2
    B = aux_B(t, l2)
    return (l4 * (t + 1) * t + 6 * l2 + 4) / (4 * _sq(B))


def neg_fphp_over_fh(t, c2, l2):
    A = aux_A(t, c2, l2)
    B = aux_B(t, l2)
    return l2 * (B + 1) / (2 * A * B)


def neg_hpp_over_h(t, c2, l2):
    A = aux_A(t, c2, l2)
    return l2 * ((2 - 2 * l2) * t + 1) / _sq(A)


def one_minus_hp2_over_h2_direct(t, c2, l2):
    A = aux_A(t, c2, l2)
    l6 = l2 * l2 * l2
    return (A * _sq(A) - l6 * t) / (l2 * _sq(A) * c2)


def one_minus_hp2_over_h2_cancelled(t, c2, l2):
    A = aux_A(t, c2, l2)
    k = l2 - 1
    l4 = l2 * l2
    poly = (-2 * l4 * l2 + 3 * l4) + (3 * l2 * _sq(k) - k * _sq(k) * c2) * c2
    return poly / (l2 * _sq(A))


def one_minus_hp2_over_h2(t, c2, l2):
    # direct form loses precision as cos r -> 0, the cancelled one as lambda grows at r -> 0
    if lower(c2) >= 0.5:
        return one_minus_hp2_over_h2_direct(t, c2, l2)
    return one_minus_hp2_over_h2_cancelled(t, c2, l2)


def one_minus_fp2_over_f2(t, l2):
    l4 = l2 * l2
    B = aux_B(t, l2)
    geom = (((B + 1) * B + 1) * B + 1) * B + 1
    b52 = _sq(B) * xsqrt(B)
    rest = 4 * l2 - 4 + ((l4 - 4 * l2) - l4 * t) * t
    return (4 * l2 * geom / (b52 + 1) - rest) / (4 * _sq(B))


def term_I_coeffs(l2, m, n):
    """Coefficients c0..c4 of the bracketed quantity I as a polynomial in sin^2 r."""
    l4 = l2 * l2
    l6 = l4 * l2
    l8 = l4 * l4
    k = l2 - 1
    q0 = 6 * l2 + 4
    q1 = l4
    q2 = l4
    return (
        m * q0,
        m * (q1 + 2 * k * q0) - 8 * (n - 1) * l4,
        m * (q2 + 2 * k * q1 + _sq(k) * q0) - 16 * (n - 1) * l6,
        m * (2 * k * q2 + _sq(k) * q1) - 8 * (n - 1) * l8,
        m * _sq(k) * q2,
    )


def term_I(t, l2, m, n):
    c0, c1, c2_, c3, c4 = term_I_coeffs(l2, m, n)
    return (((c4 * t + c3) * t + c2_) * t + c1) * t + c0


def term_I_lower_upper_range(t, l2, m, n):
    """Lower estimate for I used on [pi/4, pi/2]."""
    l4 = l2 * l2
    l6 = l4 * l2
    l8 = l4 * l4
    t2 = _sq(t)
    return m * (l8 * t2 * t + 6 * l6 * t2 + 4 * l4 * t2) - 8 * (n - 1) * (
        l8 * t2 * t + 2 * l6 * t2 + l4 * t
    )


def term_I_lower_lower_range(t, c2, l2, m, n):
    """Lower estimate for I used on [0, pi/4]."""
    l4 = l2 * l2
    l6 = l4 * l2
    l8 = l4 * l4
    t2 = _sq(t)
    return m * (l8 * t2 * t + 6 * l6 * t2 + 12 * l4 * t * c2) - 8 * (n - 1) * (
        l8 * t2 * t + 2 * l6 * t2 + l4 * t
    )


def hpp_ratio_estimate(t, c2, l2):
    """The lower estimate 1 - 2 lam^4 sin^2 r / A^2 offered for -h''/h."""
    A = aux_A(t, c2, l2)
    return 1 - 2 * l2 * l2 * t / _sq(A)


def hp2_ratio_estimate(t, c2, l2):
    """The lower estimate -lam^4 sin^2 r (sin^2 r + 1) / A^2 for (1 - h'^2)/h^2."""
    A = aux_A(t, c2, l2)
    return -(l2 * l2 * t * (t + 1)) / _sq(A)


def hp2_estimate_gap(t, c2, l2):
    """(1 - h'^2)/h^2 minus its lower estimate, with the cos^2 r factor cancelled.

    Uses A - lam^2 sin^2 r = cos^2 r, so A^3 - lam^6 sin^6 r = cos^2 r (A^2 + A lam^2 t + lam^4 t^2).
    """
    A = aux_A(t, c2, l2)
    return (_sq(A) + A * l2 * t + l2 * l2 * _sq(t)) / (l2 * _sq(A))


def ric_hh(t, c2, l2, m, n):
    return m * neg_fpp_over_f(t, l2) + (n - 1) * neg_hpp_over_h(t, c2, l2)


def ric_uu(t, c2, l2, m, n):
    return (
        neg_fpp_over_f(t, l2)
        + (m - 1) * one_minus_fp2_over_f2(t, l2)
        + (n - 1) * neg_fphp_over_fh(t, c2, l2)
    )


def ric_vv(t, c2, l2, m, n):
    out = neg_hpp_over_h(t, c2, l2) + m * neg_fphp_over_fh(t, c2, l2)
    if n != 2:
        out = out + (n - 2) * one_minus_hp2_over_h2(t, c2, l2)
    return out
