"""Eigenprojection clustering, Zeno Hamiltonians, and dark/bright bases.

Splitting a Hamiltonian as ``H_K = H_S + K * H_C`` and letting the strong
coupling ``K`` grow confines the dynamics to the eigenspaces of ``H_C``:
writing ``H_C = sum_n E_n P_n`` over clustered eigenprojections, the dynamics
approaches ``exp(-i t sum_n (K E_n P_n + P_n H_S P_n))``. The functions here
build that decomposition numerically and, for the single-excitation sectors
of this system, construct the zero-eigenvalue (dark) states in closed form.

Dark states are exact and analytic; bright states come from the numeric
eigensolver because the closed forms quoted for them in the source material
are not normalized consistently (:func:`printed_bright_forms` keeps the
literal versions so reports can quantify the mismatch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .model import Branch, BranchModel, UniformParams, sector_kets
from .spaces import RestrictedSpace, require_hermitian

SPECTRAL_TOL = 1e-9

# fraction of the spectral radius used as the default clustering width
DEFAULT_CLUSTER_FRACTION = 1e-6


class ClusterAmbiguityError(ValueError):
    """Eigenvalue spacing is comparable to the clustering width."""


class DegenerateStructureError(ValueError):
    """Analytic dark/bright structure needs g > 0 and lam > 0."""


@dataclass(frozen=True, eq=False)
class ZenoDecomposition:
    """Clustered eigenprojections ``H = sum_n E_n P_n`` of a hermitian matrix."""

    eigenvalues: np.ndarray          # one representative per cluster, ascending
    projectors: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]
    width: float

    @property
    def nclusters(self) -> int:
        return len(self.projectors)

    def projector_near(self, value: float) -> np.ndarray:
        """The cluster projector whose eigenvalue is closest to ``value``."""
        i = int(np.argmin(np.abs(self.eigenvalues - value)))
        if abs(self.eigenvalues[i] - value) > max(10 * self.width, SPECTRAL_TOL):
            raise ValueError(
                f"no cluster near {value}; cluster eigenvalues are {self.eigenvalues}"
            )
        return self.projectors[i]

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.projectors[0])
        for e, p in zip(self.eigenvalues, self.projectors):
            out = out + e * p
        return out


def decompose(h_c: np.ndarray, cluster_width: float | None = None) -> ZenoDecomposition:
    """Eigendecompose ``h_c`` and merge eigenvalues closer than the width.

    The default width is ``1e-6`` times the spectral radius. Distinct clusters
    must be separated by at least twice the width, otherwise the grouping is
    ambiguous and a :class:`ClusterAmbiguityError` is raised.
    """
    h_c = np.asarray(h_c)
    require_hermitian(h_c, what="H_C")
    evals, evecs = sla.eigh(h_c)
    radius = float(np.max(np.abs(evals))) if evals.size else 0.0
    if cluster_width is None:
        cluster_width = DEFAULT_CLUSTER_FRACTION * radius
    if cluster_width < 0:
        raise ValueError("cluster_width must be >= 0")

    groups: list[list[int]] = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[groups[-1][-1]] <= cluster_width:
            groups[-1].append(i)
        else:
            groups.append([i])
    for a, b in zip(groups, groups[1:]):
        gap = evals[b[0]] - evals[a[-1]]
        if gap < 2 * cluster_width:
            raise ClusterAmbiguityError(
                f"cluster gap {gap:.3e} is below twice the clustering width "
                f"{cluster_width:.3e}; choose the width explicitly"
            )

    reps, projs, mults = [], [], []
    for g in groups:
        reps.append(float(np.mean(evals[g])))
        v = evecs[:, g]
        projs.append(v @ v.conj().T)
        mults.append(len(g))
    return ZenoDecomposition(np.array(reps), tuple(projs), tuple(mults),
                             float(cluster_width))


def zeno_hamiltonian(dec: ZenoDecomposition, h_s: np.ndarray) -> np.ndarray:
    """Block-diagonal part of ``h_s`` over the cluster projectors."""
    h_s = np.asarray(h_s)
    require_hermitian(h_s, what="H_S")
    out = np.zeros_like(h_s, dtype=complex)
    for p in dec.projectors:
        out += p @ h_s @ p
    return out


def limiting_generator(dec: ZenoDecomposition, h_s: np.ndarray, coupling: float) -> np.ndarray:
    """Generator of the large-coupling limit: ``sum_n (K E_n P_n + P_n H_S P_n)``."""
    out = zeno_hamiltonian(dec, h_s)
    for e, p in zip(dec.eigenvalues, dec.projectors):
        out += coupling * e * p
    return out


# ---------------------------------------------------------------------------
# dark / bright structure of the single-excitation sectors
# ---------------------------------------------------------------------------

def predicted_strong_spectrum(params: UniformParams, branch: Branch = Branch.LEFT) -> np.ndarray:
    """Closed-form eigenvalues {0,0,0,+g,-g,+g*chi,-g*chi} (doubled if combined)."""
    if params.g <= 0 or params.lam <= 0:
        raise DegenerateStructureError("spectrum formula needs g > 0 and lam > 0")
    gx = params.g * params.chi()
    one = [0.0, 0.0, 0.0, params.g, -params.g, gx, -gx]
    vals = one * 2 if branch == Branch.COMBINED else one
    return np.sort(np.array(vals))


@dataclass(frozen=True, eq=False)
class DarkBrightBasis:
    """Dark and bright states of a branch in restricted coordinates.

    ``dark`` columns are the analytic zero-eigenvalue states (seed state,
    transferred state, delocalized superposition). ``bright`` columns are
    numeric eigenvectors of the strong restricted Hamiltonian, ordered by the
    eigenvalues in ``bright_eigenvalues`` (+g, -g, +g*chi, -g*chi; the
    combined branch carries the balanced two-sector combinations).
    """

    branch: Branch
    restricted: RestrictedSpace
    chi: float
    dark: np.ndarray
    bright: np.ndarray
    bright_eigenvalues: tuple[float, ...]


def _sector_positions(model: BranchModel, branch: Branch) -> list[int]:
    kets = sector_kets(model.space, branch)
    return [model.restricted.local_index(int(np.argmax(np.abs(k.vec)))) for k in kets]


def _dark_columns(params: UniformParams, positions: list[int], dim: int) -> np.ndarray:
    lam_over = params.lam / (params.g * params.chi())
    cols = np.zeros((dim, 3))
    cols[positions[0], 0] = 1.0
    cols[positions[6], 1] = 1.0
    cols[positions[1], 2] = lam_over
    cols[positions[3], 2] = -1.0 / params.chi()
    cols[positions[5], 2] = lam_over
    return cols


def _numeric_bright_block(block: np.ndarray, g: float, chi: float) -> np.ndarray:
    evals, evecs = sla.eigh(block)
    targets = (g, -g, g * chi, -g * chi)
    scale = max(abs(v) for v in targets)
    cols = []
    for t in targets:
        i = int(np.argmin(np.abs(evals - t)))
        if abs(evals[i] - t) > SPECTRAL_TOL * max(1.0, scale):
            raise DegenerateStructureError(
                f"no isolated eigenvalue near {t:.6g}; spectrum is {evals}"
            )
        v = evecs[:, i]
        pivot = int(np.argmax(np.abs(v)))
        phase = v[pivot] / abs(v[pivot])
        cols.append(v / phase)  # deterministic sign convention
    return np.column_stack(cols)


def sector_dark_columns(model: BranchModel, sector: Branch) -> np.ndarray:
    """Analytic dark columns of one sector, embedded in restricted coordinates."""
    if sector == Branch.COMBINED:
        raise ValueError("pick one sector; the combined basis lives in analytic_dark_bright")
    pos = _sector_positions(model, sector)
    return _dark_columns(model.params, pos, model.dim)


def analytic_dark_bright(model: BranchModel) -> DarkBrightBasis:
    """Dark states in closed form, bright states from the eigensolver."""
    params = model.params
    if params.g <= 0 or params.lam <= 0:
        raise DegenerateStructureError("dark/bright structure needs g > 0 and lam > 0")
    chi = params.chi()
    dim = model.dim

    if model.branch == Branch.COMBINED:
        pos_l = _sector_positions(model, Branch.LEFT)
        pos_r = _sector_positions(model, Branch.RIGHT)
        dark = (_dark_columns(params, pos_l, dim)
                + _dark_columns(params, pos_r, dim)) / math.sqrt(2.0)
        bright = np.zeros((dim, 4))
        for pos in (pos_l, pos_r):
            block = model.strong[np.ix_(pos, pos)]
            b = _numeric_bright_block(block, params.g, chi)
            bright[pos, :] += b / math.sqrt(2.0)
    else:
        pos = _sector_positions(model, model.branch)
        dark = _dark_columns(params, pos, dim)
        bright = np.zeros((dim, 4))
        bright[pos, :] = _numeric_bright_block(
            model.strong[np.ix_(pos, pos)], params.g, chi
        )

    gx = params.g * chi
    return DarkBrightBasis(
        branch=model.branch,
        restricted=model.restricted,
        chi=chi,
        dark=dark,
        bright=bright,
        bright_eigenvalues=(params.g, -params.g, gx, -gx),
    )


def printed_bright_forms(params: UniformParams) -> np.ndarray:
    """The literal closed-form bright states, normalized, in sector coordinates.

    These are kept only for comparison reports: their quoted prefactors are
    mutually inconsistent (the first two columns are genuine eigenvectors,
    the last two are not), which is why :func:`analytic_dark_bright` takes
    bright states from the eigensolver instead.
    """
    if params.g <= 0 or params.lam <= 0:
        raise DegenerateStructureError("bright forms need g > 0 and lam > 0")
    chi = params.chi()
    ratio = params.lam / params.g
    cols = np.zeros((7, 4))
    cols[[1, 2, 4, 5], 0] = [-0.5, -0.5, 0.5, 0.5]
    cols[[1, 2, 4, 5], 1] = [-0.5, 0.5, -0.5, 0.5]
    cols[[1, 2, 3, 4, 5], 2] = [1.0, chi, ratio, -chi, 1.0]
    cols[[1, 2, 3, 4, 5], 3] = [1.0, -chi, ratio, -chi, 1.0]
    return cols / np.linalg.norm(cols, axis=0)


def bright_comparison(model: BranchModel, sector: Branch) -> list[tuple[float, float]]:
    """Per bright state: (eigenvalue, |<printed form|numeric eigenvector>|^2).

    Quantifies how far the literal closed forms are from the true
    eigenvectors; the first two overlaps are 1, the last two are not.
    """
    if sector == Branch.COMBINED:
        raise ValueError("bright comparison is defined per sector")
    params = model.params
    pos = _sector_positions(model, sector)
    numeric = _numeric_bright_block(
        model.strong[np.ix_(pos, pos)], params.g, params.chi()
    )
    printed = printed_bright_forms(params)[1:6, :]  # chain interior only
    out = []
    gx = params.g * params.chi()
    for i, e in enumerate((params.g, -params.g, gx, -gx)):
        ov = abs(np.vdot(printed[:, i], numeric[1:6, i])) ** 2
        out.append((float(e), float(ov)))
    return out


def principal_angles(basis: np.ndarray, projector: np.ndarray) -> np.ndarray:
    """Angles between span(basis columns) and the range of a projector.

    Computed from projector residuals, ``theta_i = arcsin ||(1 - P) q_i||``
    over an orthonormalization of the basis; near zero angles this is exact
    to machine precision where the SVD-cosine form is not.
    """
    q, _ = np.linalg.qr(np.asarray(basis, dtype=complex))
    res = q - projector @ q
    sines = np.clip(np.linalg.norm(res, axis=0), 0.0, 1.0)
    return np.arcsin(sines)


def dark_projector_residual(basis: DarkBrightBasis, strong: np.ndarray) -> np.ndarray:
    """Norms ||H_strong . D_i|| for each analytic dark column."""
    return np.linalg.norm(strong @ basis.dark, axis=0)
