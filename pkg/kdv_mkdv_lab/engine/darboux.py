"""Elementary Darboux transformations of the 2×2 second-order spectral problem

    Ψ_xx + F Ψ_x + U Ψ = λ σ₃ Ψ,   F = [[0, f₁₂], [f₂₁, 0]],  U = {u_ij}

and the time part Ψ_t = Ψ_xxx + B Ψ_x + C Ψ of the Lax pair.

Potentials and spectral solutions are carried as :class:`Jet` objects so
the transformation formulas, which consume x-derivatives of the
intermediate coefficients, are evaluated exactly.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import mpmath
import numpy as np

from .closed_forms import DEFAULT_POLE_THRESHOLD, ClosedFormParams, seed_jets
from .errors import ParameterError, PoleError
from .finite_differences import (
    SUPPORTED_ORDERS,
    apply_stencil,
    mp_weight,
    stencil,
    stencil_offsets,
)
from .jets import Jet
from .precision import DEFAULT_DPS, MPMATH_BACKEND, NUMPY_BACKEND, Backend

logger = logging.getLogger("kdv-lab.darboux")

# object dtype keeps mpmath entries exact under matrix products
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=object)
IDENTITY = np.array([[1, 0], [0, 1]], dtype=object)

SEED_JET_ORDER = 4

ENTRIES = ("f12", "f21", "u11", "u12", "u21", "u22")


def _as_jet(value) -> Jet:
    return value if isinstance(value, Jet) else Jet((value,))


def _matrix(a, b, c, d) -> np.ndarray:
    out = np.empty((2, 2), dtype=object)
    out[0, 0], out[0, 1], out[1, 0], out[1, 1] = a, b, c, d
    return out


def _magnitude(value) -> float:
    return float(np.min(abs(value)))


def _require_nonzero(jet: Jet, threshold: float, what: str) -> None:
    magnitude = _magnitude(jet.value)
    if magnitude < threshold:
        raise PoleError(
            f"division by {what} with magnitude {magnitude:.3e} below threshold {threshold:g}",
            magnitude=magnitude,
        )


@dataclass(frozen=True)
class MatrixPotentials:
    """Entries of F (zero diagonal) and U as x-jets.

    ``reduced`` marks potentials that satisfy f₁₂ = f₂₁, u₁₁ = u₂₂,
    u₁₂ = u₂₁, i.e. commute with σ₁.
    """

    f12: Jet
    f21: Jet
    u11: Jet
    u12: Jet
    u21: Jet
    u22: Jet
    reduced: bool = False

    def __post_init__(self):
        for name in ENTRIES:
            object.__setattr__(self, name, _as_jet(getattr(self, name)))

    @classmethod
    def zero(cls, order: int = SEED_JET_ORDER, like=0.0) -> "MatrixPotentials":
        zero = Jet.constant(like * 0, order)
        return cls(zero, zero, zero, zero, zero, zero, reduced=True)

    @classmethod
    def symmetric(cls, f, u, v) -> "MatrixPotentials":
        """Potentials built from the reduced fields (f, u, v)."""
        return cls(f12=f, f21=f, u11=u, u12=v, u21=v, u22=u, reduced=True)

    @property
    def order(self) -> int:
        return min(getattr(self, name).order for name in ENTRIES)

    def values(self) -> Dict[str, object]:
        return {name: getattr(self, name).value for name in ENTRIES}

    def value_matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """(F, U) as 2×2 object arrays of point values."""
        zero = self.f12.value * 0
        F = _matrix(zero, self.f12.value, self.f21.value, zero)
        U = _matrix(self.u11.value, self.u12.value, self.u21.value, self.u22.value)
        return F, U

    def matrix_jets(self) -> Tuple[Jet, Jet]:
        order = self.order
        F = Jet(
            _matrix(c * 0, c, d, c * 0)
            for c, d in zip(self.f12.coeffs[: order + 1], self.f21.coeffs)
        )
        U = Jet(
            _matrix(a, b, c, d)
            for a, b, c, d in zip(
                self.u11.coeffs[: order + 1], self.u12.coeffs, self.u21.coeffs, self.u22.coeffs
            )
        )
        return F, U

    def is_reduction_symmetric(self, tolerance: float = 0.0) -> bool:
        pairs = ((self.f12, self.f21), (self.u11, self.u22), (self.u12, self.u21))
        for left, right in pairs:
            if tolerance == 0.0:
                if not np.all(np.asarray(left.value == right.value)):
                    return False
            elif _magnitude_max(left.value - right.value) > tolerance:
                return False
        return True

    def reduced_fields(self) -> Tuple[object, object, object]:
        """(f, u, v) = (f₁₂, u₁₁, u₁₂) point values."""
        return self.f12.value, self.u11.value, self.u12.value


def _magnitude_max(value) -> float:
    return float(np.max(abs(value)))


@dataclass(frozen=True)
class SpectralSolutionPair:
    """(φ₁, φ₂) at spectral parameter ``lam`` with their x-derivatives."""

    phi1: Jet
    phi2: Jet
    lam: complex


@dataclass(frozen=True)
class DTCoefficients:
    """ε-coefficients of one elementary DT.

    Stage 1 fills eps11; stage 2 (indices reversed) fills eps22.
    """

    stage: int
    eps12: Jet
    eps21: Jet
    eps11: Optional[Jet] = None
    eps22: Optional[Jet] = None

    def values(self) -> Dict[str, object]:
        out = {"eps12": self.eps12.value, "eps21": self.eps21.value}
        if self.eps11 is not None:
            out["eps11"] = self.eps11.value
        if self.eps22 is not None:
            out["eps22"] = self.eps22.value
        return out


@dataclass(frozen=True)
class DTResult:
    potentials: MatrixPotentials
    coefficients: DTCoefficients
    target: Optional[SpectralSolutionPair] = None


@dataclass(frozen=True)
class LaxTimeMatrices:
    B: np.ndarray
    C: np.ndarray


def dt1_transform(
    pots: MatrixPotentials,
    pair: SpectralSolutionPair,
    target: Optional[SpectralSolutionPair] = None,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> DTResult:
    """First elementary DT built on the solution ``pair``.

    New potentials are produced in the order f̃₁₂, f̃₂₁, ũ₁₁, ũ₁₂, ũ₂₁, ũ₂₂
    since later entries consume earlier ones. ``target`` (a solution at
    another λ) is carried over to a solution of the new problem.

    Raises:
        PoleError: |φ₁| below ``threshold``.
    """
    phi1, phi2 = pair.phi1, pair.phi2
    _require_nonzero(phi1, threshold, "phi1")
    f12, f21 = pots.f12, pots.f21
    u11, u12, u22 = pots.u11, pots.u12, pots.u22

    eps11 = -(phi1.dx() + 0.5 * f12 * phi2) / phi1
    eps12 = f12 / 2
    eps21 = -phi2 / phi1

    new_f12 = u12 + f12 * eps11
    new_f21 = -2 * eps21
    new_u11 = u11 - 2 * eps11.dx() - new_f12 * eps21 - f21 * eps12
    new_u12 = u12.dx() - eps12.dx().dx() + eps11 * u12 - eps12 * (new_u11 + u22)
    new_u21 = f21 - 2 * eps21.dx() - new_f21 * eps11
    new_u22 = u22 - eps21 * u12 - new_u21 * eps12 - new_f21 * eps12.dx()

    new_target = None
    if target is not None:
        new_target = SpectralSolutionPair(
            phi1=target.phi1.dx() + eps11 * target.phi1 + eps12 * target.phi2,
            phi2=target.phi2 + eps21 * target.phi1,
            lam=target.lam,
        )
    return DTResult(
        potentials=MatrixPotentials(new_f12, new_f21, new_u11, new_u12, new_u21, new_u22),
        coefficients=DTCoefficients(stage=1, eps11=eps11, eps12=eps12, eps21=eps21),
        target=new_target,
    )


def dt2_transform(
    pots: MatrixPotentials,
    pair: SpectralSolutionPair,
    target: Optional[SpectralSolutionPair] = None,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> DTResult:
    """Second elementary DT: :func:`dt1_transform` with indices 1 ↔ 2.

    Raises:
        PoleError: |φ₂| below ``threshold``.
    """
    phi1, phi2 = pair.phi1, pair.phi2
    _require_nonzero(phi2, threshold, "phi2")
    f12, f21 = pots.f12, pots.f21
    u11, u21, u22 = pots.u11, pots.u21, pots.u22

    eps22 = -(phi2.dx() + 0.5 * f21 * phi1) / phi2
    eps21 = f21 / 2
    eps12 = -phi1 / phi2

    new_f21 = u21 + f21 * eps22
    new_f12 = -2 * eps12
    new_u22 = u22 - 2 * eps22.dx() - new_f21 * eps12 - f12 * eps21
    new_u21 = u21.dx() - eps21.dx().dx() + eps22 * u21 - eps21 * (new_u22 + u11)
    new_u12 = f12 - 2 * eps12.dx() - new_f12 * eps22
    new_u11 = u11 - eps12 * u21 - new_u12 * eps21 - new_f12 * eps21.dx()

    new_target = None
    if target is not None:
        new_target = SpectralSolutionPair(
            phi1=target.phi1 + eps12 * target.phi2,
            phi2=target.phi2.dx() + eps22 * target.phi2 + eps21 * target.phi1,
            lam=target.lam,
        )
    return DTResult(
        potentials=MatrixPotentials(new_f12, new_f21, new_u11, new_u12, new_u21, new_u22),
        coefficients=DTCoefficients(stage=2, eps22=eps22, eps12=eps12, eps21=eps21),
        target=new_target,
    )


def automorphism_pair(
    pair: SpectralSolutionPair, pots: MatrixPotentials
) -> SpectralSolutionPair:
    """(φ₃, φ₄)(−λ) = σ₁(φ₁, φ₂)(λ).

    Raises:
        ParameterError: ``pots`` do not carry the reduction flag.
    """
    if not pots.reduced:
        raise ParameterError(
            "automorphism pairing needs reduction-symmetric potentials "
            "(f12 = f21, u11 = u22, u12 = u21)"
        )
    return SpectralSolutionPair(phi1=pair.phi2, phi2=pair.phi1, lam=-pair.lam)


def compound_dt_zero_seed(
    p: ClosedFormParams,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
    enforce_reduction: bool = True,
) -> MatrixPotentials:
    """Both elementary DTs on F = U = 0 with the automorphism pair.

    The result is reduction-symmetric with (f, u, v) = (f₁₂, u₁₁, u₁₂).
    With ``enforce_reduction`` the paired entries are taken from
    (f₁₂, u₁₁, u₁₂) so they agree bit for bit; otherwise the raw output of
    the second DT is returned unflagged.

    Raises:
        PoleError: φ₁ or the transformed φ₂ vanishes at (x, t).
    """
    phi1, phi2 = seed_jets(p, x, t, order=SEED_JET_ORDER, backend=backend)
    lam = backend.number(p.a) ** 2
    seed = MatrixPotentials.zero(SEED_JET_ORDER, like=phi1.value)
    pair = SpectralSolutionPair(phi1, phi2, lam)
    first = dt1_transform(seed, pair, automorphism_pair(pair, seed), threshold)
    second = dt2_transform(first.potentials, first.target, threshold=threshold)
    pots = second.potentials
    if enforce_reduction:
        return MatrixPotentials.symmetric(pots.f12, pots.u11, pots.u12)
    return pots


def spectral_residual(pots: MatrixPotentials, pair: SpectralSolutionPair) -> float:
    """max |Ψ_xx + FΨ_x + UΨ − λσ₃Ψ| over both components.

    ``pair`` needs jets of order ≥ 2.
    """
    if pair.phi1.order < 2 or pair.phi2.order < 2:
        raise ParameterError("spectral residual needs second derivatives of the pair")
    p0, p1, p2 = (pair.phi1.derivative(n) for n in range(3))
    q0, q1, q2 = (pair.phi2.derivative(n) for n in range(3))
    v = pots.values()
    first = p2 + v["f12"] * q1 + v["u11"] * p0 + v["u12"] * q0 - pair.lam * p0
    second = q2 + v["f21"] * p1 + v["u21"] * p0 + v["u22"] * q0 + pair.lam * q0
    return max(_magnitude_max(first), _magnitude_max(second))


def _lax_jets(F: Jet, U: Jet) -> Tuple[Jet, Jet]:
    Fx = F.dx()
    Ux = U.dx()
    B = 1.5 * U.diag_part() + 1.5 * Fx + 0.75 * (F @ F)
    C = (
        1.5 * Ux
        - 0.75 * Ux.diag_part()
        - 0.75 * (IDENTITY * (F[0, 1] * U[1, 0] + F[1, 0] * U[0, 1]))
        + 0.375 * (SIGMA3 * (Fx[0, 1] * F[1, 0] - F[0, 1] * Fx[1, 0]))
        + 0.75 * ((SIGMA3 @ F) * (U[0, 0] - U[1, 1]))
    )
    return B, C


def lax_time_matrices(
    pots: MatrixPotentials, pots_x: Optional[MatrixPotentials] = None
) -> LaxTimeMatrices:
    """B = (3/2)diag U + (3/2)F_x + (3/4)F² and the matching C.

    x-derivatives come from ``pots_x`` when given, otherwise from the
    jets of ``pots``.
    """
    if pots_x is None:
        if pots.order < 1:
            raise ParameterError("lax matrices need first x-derivatives of the potentials")
        F, U = pots.matrix_jets()
    else:
        F0, U0 = pots.value_matrices()
        F1, U1 = pots_x.value_matrices()
        F, U = Jet((F0, F1)), Jet((U0, U1))
    B, C = _lax_jets(F.truncate(1), U.truncate(1))
    return LaxTimeMatrices(B=B.value, C=C.value)


# -- compatibility residual -------------------------------------------------

Sampler = Callable[[object, object], Tuple[np.ndarray, np.ndarray]]


def zero_sampler(x, t) -> Tuple[np.ndarray, np.ndarray]:
    zero = mpmath.mpf(0)
    return _matrix(zero, zero, zero, zero), _matrix(zero, zero, zero, zero)


def compound_sampler(p: ClosedFormParams, threshold: float = DEFAULT_POLE_THRESHOLD) -> Sampler:
    """(F, U) of :func:`compound_dt_zero_seed` at the working mpmath precision."""

    def sample(x, t):
        pots = compound_dt_zero_seed(p, x, t, backend=MPMATH_BACKEND, threshold=threshold)
        return pots.value_matrices()

    return sample


def two_component_sampler(p: ClosedFormParams, threshold: float = DEFAULT_POLE_THRESHOLD) -> Sampler:
    """(F, U) after the first DT alone: only f₂₁, u₁₁, u₂₁ are nonzero."""

    def sample(x, t):
        phi1, phi2 = seed_jets(p, x, t, order=SEED_JET_ORDER, backend=MPMATH_BACKEND)
        seed = MatrixPotentials.zero(SEED_JET_ORDER, like=phi1.value)
        pair = SpectralSolutionPair(phi1, phi2, MPMATH_BACKEND.number(p.a) ** 2)
        return dt1_transform(seed, pair, threshold=threshold).potentials.value_matrices()

    return sample


def scaled_sampler(sampler: Sampler, entry: str, factor: float) -> Sampler:
    """Wrap ``sampler`` with one entry of F or U multiplied by ``factor``."""
    if entry not in ENTRIES:
        raise ParameterError(f"unknown potential entry '{entry}'")
    which = 0 if entry.startswith("f") else 1
    row, col = int(entry[1]) - 1, int(entry[2]) - 1

    def sample(x, t):
        F, U = sampler(x, t)
        mats = [F.copy(), U.copy()]
        mats[which][row, col] = mats[which][row, col] * factor
        return mats[0], mats[1]

    return sample


def _max_entry(*matrices) -> float:
    return max(float(abs(entry)) for matrix in matrices for entry in matrix.flat)


def compatibility_residual(
    sampler: Sampler,
    x: float,
    t: float,
    fd_step: float = 1e-3,
    order: int = 2,
    dps: int = DEFAULT_DPS,
) -> float:
    """Max entry of both zero-curvature matrix equations at (x, t).

    x-derivatives up to third order and the t-derivative are central
    differences of step ``fd_step`` and accuracy ``order`` on the sampled
    potentials; B, C and their derivatives follow by the product rule.

    Raises:
        ParameterError: fd_step ≤ 0 or unsupported order.
        PoleError: a singular point lies inside the stencil.
    """
    if not fd_step > 0:
        raise ParameterError(f"fd_step must be positive, got {fd_step}")
    if order not in SUPPORTED_ORDERS:
        raise ParameterError(f"stencil order must be one of {SUPPORTED_ORDERS}, got {order}")

    with mpmath.workdps(dps):
        h = mpmath.mpf(fd_step)
        x0, t0 = mpmath.mpf(x), mpmath.mpf(t)
        try:
            x_samples = {k: sampler(x0 + k * h, t0) for k in stencil_offsets(order, 3)}
            t_samples = {k: sampler(x0, t0 + k * h) for k, _ in stencil(order, 1)}
        except PoleError as exc:
            raise PoleError(
                f"singular point inside the stencil around (x={x}, t={t}): {exc.message}",
                location=(x, t),
                magnitude=exc.magnitude,
                cause=exc,
            ) from exc

        F_derivs = [
            apply_stencil({k: s[0] for k, s in x_samples.items()}, h, n, order, mp_weight)
            for n in range(4)
        ]
        U_derivs = [
            apply_stencil({k: s[1] for k, s in x_samples.items()}, h, n, order, mp_weight)
            for n in range(4)
        ]
        Ft = apply_stencil({k: s[0] for k, s in t_samples.items()}, h, 1, order, mp_weight)
        Ut = apply_stencil({k: s[1] for k, s in t_samples.items()}, h, 1, order, mp_weight)

        B, C = _lax_jets(Jet(F_derivs), Jet(U_derivs))
        F0, F1, _, F3 = F_derivs
        U0, U1, U2, U3 = U_derivs
        B0, B1, B2 = B.coeffs[:3]
        C0, C1, C2 = C.coeffs[:3]
        sBs = SIGMA3 @ B0 @ SIGMA3
        sCs = SIGMA3 @ C0 @ SIGMA3

        eq1 = (
            Ft - F3 + B2 - 3 * U2 + 2 * C1
            + F0 @ B1 - sBs @ F1
            + U0 @ B0 - sBs @ U0
            + F0 @ C0 - sCs @ F0
        )
        eq2 = Ut - U3 + C2 + U0 @ C0 - sCs @ U0 + F0 @ C1 - sBs @ U1
        residual = _max_entry(eq1, eq2)

    logger.debug(f"compatibility residual {residual:.3e} at (x={x}, t={t}), step={fd_step}, order={order}")
    return residual
