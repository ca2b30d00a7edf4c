"""Divisors at infinity on a fixed completion: intersection form, pullback,
invariant eigenclasses and the basis decomposition they induce.

A completion is held as plain matrix data: labels for the boundary prime
divisors, the symmetric intersection matrix Q, the pullback matrices Mf and
MfInv of the map and its inverse on Div_inf, and the index sets of divisors
through the attracting / repelling boundary points.  Built-in models cover
Henon compositions on P^2 and sign-stable monomial maps on P^1 x P^1; any
other completion is supplied as JSON data and validated against the same
identities rather than constructed by blow-ups.

The eigenclasses theta+ / theta- are normalised so that their intersection
pairing is 1.  Their self-pairing at a fixed finite level is generally
positive; the invariant statement (theta+)^2 = 0 concerns the limit over
all completions, where the class of the n-th normalised pullback has
self-intersection O(lambda1^(-2n)).  We therefore report the raw
self-pairings alongside the renormalised limit values (see ThetaPair).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BasisFailure,
    DegenerateEigenspace,
    NotLoxodromic,
    RequiresCustomModel,
    SchemaError,
)
from .maps import (
    HenonComposition,
    MonomialAuto,
    dynamical_degree,
    mat_inv,
    mat_mul,
)

POWER_TOL = 1e-13
POWER_MAX_ITER = 10_000
IDENTITY_TOL = 1e-9
# pullback steps used to renormalise self-pairings into their limit values
ISOTROPY_STEPS = 64


@dataclass(frozen=True)
class CompletionModel:
    names: tuple
    Q: np.ndarray
    Mf: np.ndarray
    MfInv: np.ndarray
    p_plus: frozenset
    p_minus: frozenset
    iterate_power: int = 1  # model may describe f^k rather than f

    @property
    def rank(self) -> int:
        return len(self.names)


def make_model(names, Q, Mf, MfInv, p_plus, p_minus, iterate_power=1) -> CompletionModel:
    Q = np.asarray(Q, dtype=float)
    Mf = np.asarray(Mf, dtype=float)
    MfInv = np.asarray(MfInv, dtype=float)
    model = CompletionModel(
        tuple(names), Q, Mf, MfInv, frozenset(p_plus), frozenset(p_minus),
        iterate_power,
    )
    validate_model(model)
    return model


def validate_model(model: CompletionModel) -> None:
    """Structural checks: symmetry, nonnegativity, projection formula."""
    r = model.rank
    for mat, name in ((model.Q, "Q"), (model.Mf, "Mf"), (model.MfInv, "MfInv")):
        if mat.shape != (r, r):
            raise SchemaError(f"{name} must be {r}x{r}, got {mat.shape}")
    if not np.allclose(model.Q, model.Q.T, atol=IDENTITY_TOL):
        raise SchemaError("Q must be symmetric")
    if model.Mf.min() < -IDENTITY_TOL:
        raise SchemaError("Mf must be entrywise nonnegative")
    scale = max(1.0, np.abs(model.Q).max() * np.abs(model.Mf).max())
    defect = np.abs(model.MfInv.T @ model.Q - model.Q @ model.Mf).max()
    if defect > IDENTITY_TOL * scale:
        raise SchemaError(
            f"projection-formula defect {defect:.3e}: pushforward is not the "
            "Q-adjoint of the pullback"
        )


# ---------------------------------------------------------------------------
# theta pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaPair:
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    lambda1: float
    self_pairing_plus: float
    self_pairing_minus: float
    isotropy_plus: float
    isotropy_minus: float


def _power_iteration(M: np.ndarray, tol: float = POWER_TOL,
                     max_iter: int = POWER_MAX_ITER):
    """Dominant eigenpair of a nonnegative matrix.

    Iterates M + I (same eigenvectors, spectrum shifted off any cyclic
    structure) from the all-ones vector, so the result is deterministic.
    """
    n = M.shape[0]
    shifted = M + np.eye(n)
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        y = shifted @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            raise DegenerateEigenspace("pullback matrix annihilated the cone")
        x = y / ny
        lam = float(x @ (shifted @ x))
        if np.linalg.norm(shifted @ x - lam * x) < tol * max(1.0, lam):
            return lam - 1.0, x
    raise DegenerateEigenspace(
        f"power iteration did not converge in {max_iter} steps"
    )


def theta_pair(model: CompletionModel) -> ThetaPair:
    """Perron eigenvectors of Mf and MfInv, pairing-normalised.

    Scale convention: the first nonzero entry of theta+ is set to 1, then
    theta- is scaled so theta+ . Q . theta- = 1.
    """
    lam_p, tp = _power_iteration(model.Mf)
    lam_m, tm = _power_iteration(model.MfInv)
    if lam_p <= 1.0 + 1e-12 or lam_m <= 1.0 + 1e-12:
        raise NotLoxodromic(
            f"spectral radii {lam_p:.6f} / {lam_m:.6f} not > 1"
        )
    lam = 0.5 * (lam_p + lam_m)
    if abs(lam_p - lam_m) > 1e-6 * lam:
        raise DegenerateEigenspace(
            f"Mf and MfInv disagree on lambda1: {lam_p} vs {lam_m}"
        )
    tp = np.where(np.abs(tp) < 1e-14, 0.0, tp)
    tm = np.where(np.abs(tm) < 1e-14, 0.0, tm)
    if tp.min() < 0 or tm.min() < 0:
        raise DegenerateEigenspace("Perron vector left the effective cone")
    first = next(i for i, v in enumerate(tp) if v > 0)
    tp = tp / tp[first]
    pairing = float(tp @ model.Q @ tm)
    if abs(pairing) < 1e-12:
        raise DegenerateEigenspace("theta+ . theta- pairing degenerates")
    tm = tm / pairing
    sp = float(tp @ model.Q @ tp)
    sm = float(tm @ model.Q @ tm)
    damp = lam ** (-2 * ISOTROPY_STEPS)
    return ThetaPair(
        theta_plus=tp,
        theta_minus=tm,
        lambda1=lam,
        self_pairing_plus=sp,
        self_pairing_minus=sm,
        isotropy_plus=sp * damp,
        isotropy_minus=sm * damp,
    )


def pullback(model: CompletionModel, D) -> np.ndarray:
    """Total-transform pullback of a divisor class vector."""
    return model.Mf @ np.asarray(D, dtype=float)


# ---------------------------------------------------------------------------
# decomposition  D = a theta+ + b D- + R
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    a: float
    b: float
    R: np.ndarray
    D_minus: np.ndarray
    reconstruction_error: float
    kernel_residual: float
    a_pairing: float
    pairing_defect: float


def secondary_eigenvector(model: CompletionModel, lam: float) -> np.ndarray:
    """Eigenvector of Mf with eigenvalue 1/lambda1, built constructively.

    Solve the restricted eigenproblem on the divisors through p+, then
    correct by lambda1 times the off-block image so the full eigenvalue
    equation holds whenever the remaining divisors are contracted.
    """
    idx = sorted(model.p_plus)
    sub = model.Mf[np.ix_(idx, idx)]
    k = len(idx)
    A = sub - np.eye(k) / lam
    _, _, vt = np.linalg.svd(A)
    v_small = vt[-1]
    v0 = np.zeros(model.rank)
    for j, i in enumerate(idx):
        v0[i] = v_small[j]
    correction = model.Mf @ v0 - v0 / lam
    d_minus = v0 + lam * correction
    resid = np.linalg.norm(model.Mf @ d_minus - d_minus / lam)
    if resid > 1e-8 * max(1.0, np.linalg.norm(d_minus)):
        raise BasisFailure(
            f"no eigenvector of eigenvalue 1/lambda1 through p+: residual {resid:.3e}"
        )
    return d_minus


def decompose(model: CompletionModel, theta: ThetaPair, D) -> Decomposition:
    """Write D = a theta+ + b D- + R with R off the p+ divisors.

    The coefficients are obtained by an exact linear solve in the basis
    {theta+, D-, divisors missing p+}.  When lambda1 is an integer the
    secondary eigenvector is zero and b = 0.  On a completion where every
    divisor missing p+ is contracted, a coincides with the intersection
    number D . theta- (returned as a_pairing, with the defect reported),
    and Mf R = 0 (the kernel residual).
    """
    D = np.asarray(D, dtype=float)
    lam = theta.lambda1
    integer_lam = abs(lam - round(lam)) < 1e-9
    off_idx = [i for i in range(model.rank) if i not in model.p_plus]
    columns = [theta.theta_plus]
    if integer_lam:
        d_minus = np.zeros(model.rank)
    else:
        d_minus = secondary_eigenvector(model, lam)
        columns.append(d_minus)
    for i in off_idx:
        e = np.zeros(model.rank)
        e[i] = 1.0
        columns.append(e)
    B = np.column_stack(columns)
    if B.shape[1] != model.rank or np.linalg.matrix_rank(B, tol=1e-10) < model.rank:
        raise BasisFailure(
            "theta+, D- and the divisors missing p+ do not span Div_inf"
        )
    coeffs = np.linalg.solve(B, D)
    recon = B @ coeffs
    err = float(np.abs(recon - D).max())
    scale = max(1.0, float(np.abs(D).max()))
    if err > 1e-6 * scale:
        raise BasisFailure(f"decomposition residual {err:.3e}")
    a = float(coeffs[0])
    b = 0.0 if integer_lam else float(coeffs[1])
    R = np.zeros(model.rank)
    base = 1 if integer_lam else 2
    for k, i in enumerate(off_idx):
        R[i] = coeffs[base + k]
    a_pairing = float(D @ model.Q @ theta.theta_minus)
    kernel_residual = float(np.abs(model.Mf @ R).max()) if off_idx else 0.0
    return Decomposition(
        a=a,
        b=b,
        R=R,
        D_minus=d_minus,
        reconstruction_error=err,
        kernel_residual=kernel_residual,
        a_pairing=a_pairing,
        pairing_defect=abs(a - a_pairing),
    )


# ---------------------------------------------------------------------------
# built-in completions
# ---------------------------------------------------------------------------

def _toric_pullback(mat) -> np.ndarray:
    """Pullback of the P^1 x P^1 boundary rulings under a monomial map.

    The map with exponent matrix [[a, b], [c, d]] pulls (x=0) back to the
    effective part of div(x^a y^b) at infinity: exponent e contributes e
    copies of the zero divisor when e > 0 and -e copies of the polar one
    when e < 0.  Divisor order: (x=0, x=inf, y=0, y=inf).
    """
    out = np.zeros((4, 4))
    rows = mat
    for col_zero, col_inf, (e_x, e_y) in (
        (0, 1, rows[0]),
        (2, 3, rows[1]),
    ):
        for e, zero_row, inf_row in ((e_x, 0, 1), (e_y, 2, 3)):
            if e > 0:
                out[zero_row, col_zero] += e
                out[inf_row, col_inf] += e
            elif e < 0:
                out[inf_row, col_zero] += -e
                out[zero_row, col_inf] += -e
    return out


def builtin_completion(auto) -> CompletionModel:
    """P^2 for Henon compositions, P^1 x P^1 for sign-stable monomial maps.

    A monomial matrix qualifies when it (or its square) is entrywise
    nonnegative, so the toric pullback of the four boundary rulings has
    nonnegative multiplicities; otherwise RequiresCustomModel is raised and
    the caller must provide completion data.
    """
    if isinstance(auto, HenonComposition):
        lam = dynamical_degree(auto)
        if lam <= 1:
            raise NotLoxodromic("identity composition has no invariant model")
        return make_model(
            names=("Linf",),
            Q=[[1.0]],
            Mf=[[lam]],
            MfInv=[[lam]],
            p_plus={0},
            p_minus={0},
        )
    if isinstance(auto, MonomialAuto):
        power = 1
        m = auto.matrix
        if min(min(row) for row in m) < 0:
            m = mat_mul(m, m)
            power = 2
            if min(min(row) for row in m) < 0:
                raise RequiresCustomModel(
                    "monomial matrix is not sign-stable; supply completion data"
                )
        # boundary rulings ordered (x=0, x=inf, y=0, y=inf)
        Q = [
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [1, 1, 0, 0],
            [1, 1, 0, 0],
        ]
        return make_model(
            names=("x0", "xinf", "y0", "yinf"),
            Q=Q,
            Mf=_toric_pullback(m),
            MfInv=_toric_pullback(mat_inv(m)),
            p_plus={1, 3},
            p_minus={0, 2},
            iterate_power=power,
        )
    raise RequiresCustomModel(
        f"no built-in completion for {type(auto).__name__}; supply (Q, Mf) data"
    )


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def completion_from_json(data: dict) -> CompletionModel:
    try:
        names = list(data["names"])
        Q = [[float(Fraction(str(v))) for v in row] for row in data["Q"]]
        Mf = [[float(Fraction(str(v))) for v in row] for row in data["Mf"]]
        MfInv = [[float(Fraction(str(v))) for v in row] for row in data["MfInv"]]
        p_plus = {int(i) for i in data["pPlus"]}
        p_minus = {int(i) for i in data["pMinus"]}
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}", path="completion") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), path="completion") from exc
    r = len(names)
    if not all(0 <= i < r for i in p_plus | p_minus):
        raise SchemaError("incidence index out of range", path="completion")
    return make_model(names, Q, Mf, MfInv, p_plus, p_minus)


def completion_to_json(model: CompletionModel) -> dict:
    return {
        "names": list(model.names),
        "Q": model.Q.tolist(),
        "Mf": model.Mf.tolist(),
        "MfInv": model.MfInv.tolist(),
        "pPlus": sorted(model.p_plus),
        "pMinus": sorted(model.p_minus),
    }
