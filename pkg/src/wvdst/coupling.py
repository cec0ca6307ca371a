"""System-pointer interaction and exact weak values.

The pointer is a qubit prepared in ``|0><0|``. Measuring the projector
``A = |a><a|`` couples through ``U = exp(-i g A (x) sigma_x)``; after
postselecting the system on ``|psi>`` the pointer is left in a 2x2 state from
which the weak value ``<psi|a><a|rho|psi> / <psi|rho|psi>`` follows exactly via
the coupling-deformed observables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import (
    IDENTITY2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ComplexArray,
    as_pure_state,
    projector,
)

PROBABILITY_CUTOFF = 1e-14


class UndefinedPointerError(ValueError):
    """Postselection outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class PostselectedPointer:
    probability: float
    pointer: ComplexArray | None

    @property
    def defined(self) -> bool:
        return self.pointer is not None


def check_coupling(g: float) -> float:
    g = float(g)
    if not 0.0 < g < np.pi:
        raise ValueError(f"coupling strength must lie in (0, pi), got {g}")
    return g


def interaction_unitary(a: ComplexArray, g: float) -> ComplexArray:
    """Dense ``(2d, 2d)`` unitary ``exp(-i g |a><a| (x) sigma_x)``, system factor first."""
    a = as_pure_state(a)
    g = check_coupling(g)
    d = a.size
    rotation = np.cos(g) * IDENTITY2 - 1j * np.sin(g) * SIGMA_X
    return np.eye(2 * d, dtype=complex) + np.kron(projector(a), rotation - IDENTITY2)


def pointer_kraus(a: ComplexArray, g: float) -> tuple[ComplexArray, ComplexArray]:
    """System operators ``K_s = <s|_pointer U |0>_pointer`` for ``s = 0, 1``."""
    p = projector(a)
    d = a.size
    k0 = np.eye(d, dtype=complex) + (np.cos(g) - 1.0) * p
    k1 = -1j * np.sin(g) * p
    return k0, k1


def pointer_blocks(rho_s: ComplexArray, a: ComplexArray, g: float, post_basis: ComplexArray) -> ComplexArray:
    """Unnormalized pointer states for every postselection vector.

    ``blocks[j, s, t] = <psi_j| K_s rho_s K_t^dagger |psi_j>``; the trace of
    ``blocks[j]`` is the postselection probability ``P_j``.
    """
    k0, k1 = pointer_kraus(a, g)
    post_basis = np.asarray(post_basis, dtype=complex)
    # w[s, j] = K_s^dagger |psi_j>
    w = np.stack([post_basis @ k0.conj(), post_basis @ k1.conj()])
    rw = np.einsum("kl,tjl->tjk", rho_s, w)
    return np.einsum("sjk,tjk->jst", w.conj(), rw)


def postselected_pointer(rho_s: ComplexArray, a: ComplexArray, g: float, psi: ComplexArray) -> PostselectedPointer:
    a = as_pure_state(a)
    psi = as_pure_state(psi)
    g = check_coupling(g)
    rho_s = np.asarray(rho_s, dtype=complex)
    block = pointer_blocks(rho_s, a, g, psi[None, :])[0]
    probability = float(np.trace(block).real)
    if probability < PROBABILITY_CUTOFF:
        return PostselectedPointer(max(probability, 0.0), None)
    return PostselectedPointer(probability, block / probability)


def deformed_sigma_y(g: float) -> ComplexArray:
    g = check_coupling(g)
    return (g / np.sin(g)) * (SIGMA_Y - np.tan(g / 2) * (IDENTITY2 - SIGMA_Z))


def deformed_sigma_x(g: float) -> ComplexArray:
    g = check_coupling(g)
    return (g / np.sin(g)) * SIGMA_X


def _pointer_matrix(pointer: PostselectedPointer) -> ComplexArray:
    if not pointer.defined:
        raise UndefinedPointerError("pointer state undefined: postselection probability is zero")
    return pointer.pointer


def _weak_value_from(rho_d: ComplexArray, obs_y: ComplexArray, obs_x: ComplexArray, g: float) -> complex:
    ty = np.trace(rho_d @ obs_y).real
    tx = np.trace(rho_d @ obs_x).real
    return complex(-ty, tx) / (2 * g)


def exact_weak_value(pointer: PostselectedPointer, g: float) -> complex:
    """Weak value from the deformed observables; exact for any ``g`` in (0, pi)."""
    return _weak_value_from(_pointer_matrix(pointer), deformed_sigma_y(g), deformed_sigma_x(g), g)


def approx_weak_value(pointer: PostselectedPointer, g: float) -> complex:
    """Weak value read off plain sigma_y / sigma_x; biased, the bias vanishing as O(g^2)."""
    g = check_coupling(g)
    return _weak_value_from(_pointer_matrix(pointer), SIGMA_Y, SIGMA_X, g)


def postselection_probability(rho_s: ComplexArray, a: ComplexArray, g: float | None, psi: ComplexArray) -> float:
    """Probability of finding ``|psi>`` after the interaction, in closed form.

    ``<psi|rho|psi> - 2 (1 - cos g) (Re y - q)`` with ``y = <psi|a><a|rho|psi>``
    and ``q = |<psi|a>|^2 <a|rho|a>``; ``g=None`` gives the undisturbed
    ``<psi|rho|psi>``.
    """
    rho_s = np.asarray(rho_s, dtype=complex)
    a = np.asarray(a, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    p0 = np.vdot(psi, rho_s @ psi).real
    if g is None:
        return float(p0)
    g = check_coupling(g)
    y = np.vdot(psi, a) * np.vdot(a, rho_s @ psi)
    q = abs(np.vdot(psi, a)) ** 2 * np.vdot(a, rho_s @ a).real
    return float(p0 - 2.0 * (1.0 - np.cos(g)) * (y.real - q))


def weak_value_oracle(rho_s: ComplexArray, a: ComplexArray, psi: ComplexArray, g: float | None = None) -> complex:
    """Direct evaluation of ``<psi|a><a|rho|psi> / P`` (no pointer involved).

    ``P`` is the probability of the postselection outcome. With ``g=None`` it
    is the weak-coupling value ``<psi|rho|psi>``; with a coupling strength it
    is the probability actually realized after the interaction, which is what
    normalizes the pointer state returned by :func:`postselected_pointer`.
    The product ``P * W`` is the same in both conventions.
    """
    rho_s = np.asarray(rho_s, dtype=complex)
    a = np.asarray(a, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    probability = postselection_probability(rho_s, a, g, psi)
    if probability <= PROBABILITY_CUTOFF:
        raise UndefinedPointerError("postselection probability vanishes")
    return complex(np.vdot(psi, a) * np.vdot(a, rho_s @ psi) / probability)
