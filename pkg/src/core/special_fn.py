"""
Special functions for the closed-form packets

Physicists' Hermite polynomials and generalized Laguerre polynomials by upward
three-term recurrence, Kummer M(a, b; x) and orthonormal spherical harmonics
from scipy.special. All functions accept scalars or numpy arrays for the argument.
"""

import logging
from typing import Union

import numpy as np
from scipy.special import hyp1f1, sph_harm_y

from src.validation.errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, complex, np.ndarray]


def _check_index(name: str, value: int) -> int:
    if int(value) != value or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def hermite(n: int, q: ArrayLike) -> ArrayLike:
    """
    Physicists' Hermite polynomial H_n(q)

    H_0 = 1, H_1 = 2q, H_{k+1} = 2q H_k - 2k H_{k-1}.

    Args:
        n: Degree (>= 0)
        q: Argument (scalar or array)

    Returns:
        H_n(q) with the shape of q
    """
    n = _check_index("n", n)
    q = np.asarray(q)
    previous = np.ones_like(q, dtype=np.result_type(q, float))
    if n == 0:
        return previous if previous.ndim else previous[()]
    current = 2.0 * q * previous
    for k in range(1, n):
        previous, current = current, 2.0 * q * current - 2.0 * k * previous
    return current if current.ndim else current[()]


def laguerre(n: int, l: int, x: ArrayLike) -> ArrayLike:
    """
    Generalized Laguerre polynomial L_n^l(x)

    L_0^l = 1, L_1^l = 1 + l - x,
    (k+1) L_{k+1}^l = (2k + 1 + l - x) L_k^l - (k + l) L_{k-1}^l.

    Args:
        n: Degree (>= 0)
        l: Order (>= 0 integer)
        x: Argument (>= 0)
    """
    n = _check_index("n", n)
    l = _check_index("l", l)
    x = np.asarray(x)
    if np.any(x < 0):
        raise DomainError("laguerre argument must be non-negative")
    return _laguerre_recurrence(n, float(l), x)


def _laguerre_recurrence(n: int, alpha: float, x: np.ndarray) -> ArrayLike:
    previous = np.ones_like(x, dtype=np.result_type(x, float))
    if n == 0:
        return previous if previous.ndim else previous[()]
    current = 1.0 + alpha - x
    for k in range(1, n):
        previous, current = current, ((2 * k + 1 + alpha - x) * current - (k + alpha) * previous) / (k + 1)
    return current if current.ndim else current[()]


def confluent_m(a: float, b: float, x: ArrayLike) -> ArrayLike:
    """
    Kummer's confluent hypergeometric function M(a, b; x) (scipy's hyp1f1)

    For a = -k (k a non-negative integer) M is a polynomial of degree k; that
    is the validated regime. Other values of a are evaluated but logged as
    unvalidated.

    Args:
        a: Upper parameter
        b: Lower parameter (not a non-positive integer)
        x: Argument
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"b must not be a non-positive integer, got {b!r}")
    if not (a <= 0 and float(a).is_integer()):
        logger.warning(f"⚠️ confluent_m evaluated with non-polynomial a={a}: unvalidated regime")
    value = hyp1f1(float(a), float(b), np.asarray(x, dtype=float))
    return value if np.ndim(value) else value[()]


def spherical_harmonic(l: int, m: int, theta: ArrayLike, phi: ArrayLike) -> ArrayLike:
    """
    Orthonormal spherical harmonic Y_l^m(theta, phi) with the Condon-Shortley phase

    Args:
        l: Degree (>= 0)
        m: Order, |m| <= l
        theta: Polar angle (radians)
        phi: Azimuth (radians)
    """
    l = _check_index("l", l)
    if int(m) != m or abs(m) > l:
        raise DomainError(f"|m| must not exceed l, got l={l}, m={m!r}")
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    value = sph_harm_y(l, int(m), theta, phi)
    return value if np.ndim(value) else value[()]
