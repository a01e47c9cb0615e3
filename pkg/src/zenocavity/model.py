"""System parameters and Hamiltonian assembly.

The full Hamiltonian splits into three parts: atom-cavity couplings (each
excited atomic level exchanges an excitation with one cavity polarization
mode), cavity-fiber couplings (each fiber mode exchanges photons with the
same-polarization mode of both cavities), and classical drives on the
``f -> e`` transitions. All couplings enter as ``coeff * (product operator)
+ h.c.`` with real nonnegative coefficients, so every matrix here is real
symmetric.

Operators are assembled as sparse Kronecker products and densified only when
the space is small; the physically relevant blocks are the single-excitation
sectors picked out by :func:`reachable_subspace`, which are 7-dimensional per
polarization branch (14 for the combined two-branch space).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .spaces import (
    HilbertSpace,
    InvalidSubsystemError,
    RestrictedSpace,
    State,
    SubsystemSpec,
    standard_subsystems,
)

# above this dimension operators stay sparse unless explicitly densified
DENSE_AUTO_LIMIT = 512


class ClosureOverflowError(ValueError):
    """A reachable-subspace search exceeded its basis-size cap."""


class Branch(str, enum.Enum):
    """Which polarization sector a computation lives in."""

    LEFT = "left"
    RIGHT = "right"
    COMBINED = "combined"

    def __str__(self) -> str:  # cleaner CLI/JSON rendering
        return self.value


@dataclass(frozen=True)
class FiberSpec:
    """Fiber geometry used only for the short-fiber validity check."""

    length: float
    decay_rate: float
    light_speed: float

    @property
    def mode_ratio(self) -> float:
        # number of fiber modes that interact with the cavities, up to O(1)
        return 2.0 * self.length * self.decay_rate / (2.0 * math.pi * self.light_speed)


@dataclass(frozen=True)
class SystemParams:
    """Per-transition coupling rates of the full model.

    ``g_*`` are atom-cavity couplings, ``omega_*`` classical drive amplitudes,
    ``lam_*`` cavity-fiber couplings. If a :class:`FiberSpec` is supplied, the
    short-fiber condition (at most one resonant fiber mode per polarization)
    must hold, otherwise the single-mode fiber model is invalid.
    """

    g_al: float
    g_ar: float
    g_bl: float
    g_cr: float
    omega_al: float
    omega_ar: float
    omega_bl: float
    omega_cr: float
    lam_l: float
    lam_r: float
    fiber: FiberSpec | None = None

    def __post_init__(self):
        for name in ("g_al", "g_ar", "g_bl", "g_cr", "omega_al", "omega_ar",
                     "omega_bl", "omega_cr", "lam_l", "lam_r"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.fiber is not None and self.fiber.mode_ratio > 1.0:
            raise ValueError(
                "short-fiber condition violated: 2*L*nu/(2*pi*c) = "
                f"{self.fiber.mode_ratio:.3f} > 1; the single-mode fiber model"
                " does not apply"
            )


@dataclass(frozen=True)
class UniformParams:
    """The symmetric operating point: one g, one lambda, three drives.

    Both atom-cavity couplings of every transition equal ``g``, both fiber
    couplings equal ``lam``; ``omega1`` drives the cavity-A atom (both
    polarizations), ``omega2``/``omega3`` drive the two cavity-B atoms.
    """

    g: float
    lam: float
    omega1: float = 0.0
    omega2: float = 0.0
    omega3: float = 0.0

    def __post_init__(self):
        for name in ("g", "lam", "omega1", "omega2", "omega3"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    def to_system(self, fiber: FiberSpec | None = None) -> SystemParams:
        return SystemParams(
            g_al=self.g, g_ar=self.g, g_bl=self.g, g_cr=self.g,
            omega_al=self.omega1, omega_ar=self.omega1,
            omega_bl=self.omega2, omega_cr=self.omega3,
            lam_l=self.lam, lam_r=self.lam, fiber=fiber,
        )

    def chi(self) -> float:
        """Bright-state scale factor sqrt(1 + 2 lam^2 / g^2)."""
        if self.g <= 0:
            raise ValueError("chi is undefined for g = 0")
        return math.sqrt(1.0 + 2.0 * self.lam**2 / self.g**2)


# ---------------------------------------------------------------------------
# operator assembly
# ---------------------------------------------------------------------------

def full_space(cutoff: int = 1) -> HilbertSpace:
    """The standard nine-factor space at the given photon cutoff."""
    return HilbertSpace(standard_subsystems(cutoff))


@dataclass(frozen=True, eq=False)
class CouplingTerm:
    """One product operator ``coeff * prod_k O_k``; the builder adds ``+ h.c.``."""

    part: str  # "cavity" | "fiber" | "drive"
    coeff: float
    factors: tuple[tuple[str, np.ndarray], ...]  # (subsystem name, local matrix)


def _transition(sub: SubsystemSpec, upper: str, lower: str) -> np.ndarray:
    m = np.zeros((sub.dim, sub.dim))
    m[sub.level_index(upper), sub.level_index(lower)] = 1.0
    return m


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)


def coupling_terms(params: SystemParams, space: HilbertSpace) -> list[CouplingTerm]:
    """Symbolic term list of the full Hamiltonian (hermitian halves only)."""
    subs = {s.name: s for s in space.subsystems}
    ann = {name: _annihilation(subs[name].dim) for name in subs if subs[name].is_mode}

    def up(atom: str, pol: str) -> np.ndarray:
        return _transition(subs[atom], f"e_{pol}", f"g_{pol}")

    def drv(atom: str, pol: str) -> np.ndarray:
        return _transition(subs[atom], f"e_{pol}", f"f_{pol}")

    terms: list[CouplingTerm] = []

    def add(part, coeff, *factors):
        if coeff != 0.0:
            terms.append(CouplingTerm(part, float(coeff), tuple(factors)))

    # atom-cavity: excited level drops while emitting into the matching mode
    add("cavity", params.g_al, ("a", up("a", "l")), ("A_l", ann["A_l"]))
    add("cavity", params.g_ar, ("a", up("a", "r")), ("A_r", ann["A_r"]))
    add("cavity", params.g_bl, ("b", up("b", "l")), ("B_l", ann["B_l"]))
    add("cavity", params.g_cr, ("c", up("c", "r")), ("B_r", ann["B_r"]))
    # cavity-fiber: the fiber mode absorbs from either cavity of its polarization
    add("fiber", params.lam_l, ("F_l", ann["F_l"].conj().T), ("A_l", ann["A_l"]))
    add("fiber", params.lam_l, ("F_l", ann["F_l"].conj().T), ("B_l", ann["B_l"]))
    add("fiber", params.lam_r, ("F_r", ann["F_r"].conj().T), ("A_r", ann["A_r"]))
    add("fiber", params.lam_r, ("F_r", ann["F_r"].conj().T), ("B_r", ann["B_r"]))
    # classical drives on the f -> e transitions
    add("drive", params.omega_al, ("a", drv("a", "l")))
    add("drive", params.omega_ar, ("a", drv("a", "r")))
    add("drive", params.omega_bl, ("b", drv("b", "l")))
    add("drive", params.omega_cr, ("c", drv("c", "r")))
    return terms


def _materialize(term: CouplingTerm, space: HilbertSpace) -> sp.csr_matrix:
    locals_ = dict(term.factors)
    out = sp.identity(1, format="csr")
    for sub in space.subsystems:
        m = locals_.get(sub.name)
        factor = sp.csr_matrix(m) if m is not None else sp.identity(sub.dim, format="csr")
        out = sp.kron(out, factor, format="csr")
    return term.coeff * out


@dataclass(frozen=True, eq=False)
class HamiltonianParts:
    """The three physical parts plus their sums, on one space.

    Matrices are dense ndarrays for small spaces and CSR for large ones
    (see :func:`build_hamiltonian`); ``strong = cavity + fiber`` and
    ``total = strong + drive``.
    """

    space: HilbertSpace
    cavity: object
    fiber: object
    drive: object
    strong: object
    total: object

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.total)


def to_dense(mat) -> np.ndarray:
    if sp.issparse(mat):
        return np.asarray(mat.todense(), dtype=complex)
    return np.asarray(mat, dtype=complex)


def build_hamiltonian(
    params: SystemParams | UniformParams,
    space: HilbertSpace | None = None,
    fmt: str = "auto",
) -> HamiltonianParts:
    """Assemble the Hamiltonian parts on ``space`` (default cutoff-1 space).

    ``fmt`` is "dense", "sparse", or "auto" (dense iff dim <= 512). Every
    part is hermitian by construction.
    """
    if isinstance(params, UniformParams):
        params = params.to_system()
    if space is None:
        space = full_space()
    if fmt not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown fmt {fmt!r}")
    dense = space.dim <= DENSE_AUTO_LIMIT if fmt == "auto" else fmt == "dense"

    terms = coupling_terms(params, space)
    parts = {}
    for name in ("cavity", "fiber", "drive"):
        acc = sp.csr_matrix((space.dim, space.dim))
        for term in terms:
            if term.part == name:
                m = _materialize(term, space)
                acc = acc + m + m.conj().T
        parts[name] = acc
    strong = parts["cavity"] + parts["fiber"]
    total = strong + parts["drive"]
    if dense:
        parts = {k: to_dense(v).real.astype(float) for k, v in parts.items()}
        strong, total = to_dense(strong).real.astype(float), to_dense(total).real.astype(float)
    return HamiltonianParts(space, parts["cavity"], parts["fiber"], parts["drive"],
                            strong, total)


# ---------------------------------------------------------------------------
# excitation number and sector structure
# ---------------------------------------------------------------------------

def excitation_number(space: HilbertSpace) -> np.ndarray:
    """Diagonal of the conserved excitation counter.

    Photons count 1 each; atomic ``e``/``f`` levels count 1, ``g`` levels 0.
    """
    weights = []
    for sub in space.subsystems:
        if sub.is_mode:
            weights.append(np.arange(sub.dim, dtype=float))
        else:
            weights.append(np.array(
                [0.0 if lv.startswith("g") else 1.0 for lv in sub.levels]
            ))
    diag = np.zeros(space.dim)
    for axis, w in enumerate(weights):
        shape = [1] * len(space.dims)
        shape[axis] = space.dims[axis]
        diag = diag + np.broadcast_to(
            w.reshape(shape), space.dims
        ).reshape(space.dim)
    return diag


def number_commutator_maxabs(h, number_diag: np.ndarray) -> float:
    """max |[H, N]_ij| for diagonal N, without forming the commutator."""
    if sp.issparse(h):
        coo = h.tocoo()
        if coo.nnz == 0:
            return 0.0
        return float(np.max(np.abs(coo.data * (number_diag[coo.row] - number_diag[coo.col]))))
    h = np.asarray(h)
    return float(np.max(np.abs(h * (number_diag[:, None] - number_diag[None, :]))))


def reachable_subspace(
    h,
    seed: State,
    tol: float = 1e-12,
    cap: int = 512,
) -> RestrictedSpace:
    """Breadth-first closure of the seed's support under a Hamiltonian.

    Basis states are added in FIFO discovery order with neighbors sorted by
    basis index, so the result is deterministic; for a single-state seed
    driven along a coupling chain this reproduces the natural chain order.
    Raises :class:`ClosureOverflowError` if more than ``cap`` states appear.
    """
    if isinstance(h, HamiltonianParts):
        h = h.total
    space = seed.space
    if isinstance(space, RestrictedSpace):
        raise InvalidSubsystemError("seed must live on the full space")
    hs = h.tocsr() if sp.issparse(h) else None
    hd = None if hs is not None else np.asarray(h)
    if (hs.shape if hs is not None else hd.shape) != (space.dim, space.dim):
        raise InvalidSubsystemError("Hamiltonian shape does not match the seed's space")

    start = [int(i) for i in np.flatnonzero(np.abs(seed.vec) > tol)]
    if not start:
        raise ValueError("seed state is (numerically) zero")
    order: list[int] = []
    seen = set()
    queue = list(sorted(start))
    for i in queue:
        seen.add(i)
    while queue:
        i = queue.pop(0)
        order.append(i)
        if hs is not None:
            row = hs.getrow(i)
            neigh = [int(j) for j, v in zip(row.indices, row.data) if abs(v) > tol]
        else:
            neigh = [int(j) for j in np.flatnonzero(np.abs(hd[i]) > tol)]
        for j in sorted(neigh):
            if j not in seen:
                seen.add(j)
                queue.append(j)
        if len(seen) > cap:
            raise ClosureOverflowError(
                f"reachable basis exceeded cap={cap}; raise the cap if this is intended"
            )
    return RestrictedSpace(space, tuple(order))


def restrict(h, subspace: RestrictedSpace) -> np.ndarray:
    """Compress an operator onto a restricted basis (dense output)."""
    return subspace.restrict_matrix(h)


# ---------------------------------------------------------------------------
# single-excitation sectors
# ---------------------------------------------------------------------------

def sector_kets(space: HilbertSpace, branch: Branch) -> list[State]:
    """The seven chain states of one polarization sector, in chain order.

    Order: driven atom still in f, excited cavity-A atom, photon in cavity A,
    photon in the fiber, photon in cavity B, excited cavity-B atom, cavity-B
    atom transferred to f.
    """
    if branch == Branch.LEFT:
        rest = dict(b="g_l", c="g_r")
        return [
            space.ket(a="f_l", **rest),
            space.ket(a="e_l", **rest),
            space.ket(a="g_l", **rest, A_l=1),
            space.ket(a="g_l", **rest, F_l=1),
            space.ket(a="g_l", **rest, B_l=1),
            space.ket(a="g_l", b="e_l", c="g_r"),
            space.ket(a="g_l", b="f_l", c="g_r"),
        ]
    if branch == Branch.RIGHT:
        rest = dict(b="g_l", c="g_r")
        return [
            space.ket(a="f_r", **rest),
            space.ket(a="e_r", **rest),
            space.ket(a="g_r", **rest, A_r=1),
            space.ket(a="g_r", **rest, F_r=1),
            space.ket(a="g_r", **rest, B_r=1),
            space.ket(a="g_r", b="g_l", c="e_r"),
            space.ket(a="g_r", b="g_l", c="f_r"),
        ]
    raise ValueError("sector_kets is defined per polarization branch")


def initial_state(space: HilbertSpace, branch: Branch) -> State:
    """The protocol seed: chain head of the branch, or their balanced sum."""
    if branch == Branch.COMBINED:
        left = sector_kets(space, Branch.LEFT)[0]
        right = sector_kets(space, Branch.RIGHT)[0]
        return (left + right) * (1.0 / math.sqrt(2.0))
    return sector_kets(space, branch)[0]


def chain_hamiltonian(params: UniformParams, branch: Branch) -> np.ndarray:
    """Hand-written 7x7 tridiagonal block of one single-excitation sector.

    Kept as an independent cross-check against the generic closure-derived
    restriction; couplings along the chain are (omega1, g, lam, lam, g,
    omega2 or omega3).
    """
    if branch == Branch.LEFT:
        tail = params.omega2
    elif branch == Branch.RIGHT:
        tail = params.omega3
    else:
        raise ValueError("chain_hamiltonian is defined per polarization branch")
    c = (params.omega1, params.g, params.lam, params.lam, params.g, tail)
    h = np.zeros((7, 7))
    for i, v in enumerate(c):
        h[i, i + 1] = h[i + 1, i] = v
    return h


# probe drives only decide connectivity; sector membership must not depend on
# whether a protocol happens to switch a drive off
_PROBE = dict(omega1=1.0, omega2=1.0, omega3=1.0)


@dataclass(frozen=True, eq=False)
class BranchModel:
    """One branch's sector basis plus its restricted Hamiltonian blocks."""

    branch: Branch
    params: UniformParams
    space: HilbertSpace
    restricted: RestrictedSpace
    total: np.ndarray
    strong: np.ndarray
    drive: np.ndarray

    @property
    def dim(self) -> int:
        return self.restricted.dim

    def seed(self) -> State:
        """The protocol initial state in restricted coordinates."""
        full = initial_state(self.space, self.branch)
        return State(self.restricted, self.restricted.project(full.vec))

    def local_index(self, ket: State) -> int:
        idx = int(np.argmax(np.abs(ket.vec)))
        return self.restricted.local_index(idx)


def build_branch_model(
    params: UniformParams,
    branch: Branch,
    cutoff: int = 1,
    space: HilbertSpace | None = None,
) -> BranchModel:
    """Closure plus restricted Hamiltonians for one branch (or the pair).

    The closure is computed with all drives set to a probe value so the
    sector contains the full chain even when some protocol drive is zero.
    """
    if params.g <= 0 or params.lam <= 0:
        raise ValueError("branch sectors need g > 0 and lam > 0")
    if space is None:
        space = full_space(cutoff)
    probe = replace(params, **_PROBE)
    probe_parts = build_hamiltonian(probe, space, fmt="sparse")
    seed = initial_state(space, branch)
    restricted = reachable_subspace(probe_parts.total, seed)
    parts = build_hamiltonian(params, space, fmt="sparse")
    return BranchModel(
        branch=branch,
        params=params,
        space=space,
        restricted=restricted,
        total=restrict(parts.total, restricted).real,
        strong=restrict(parts.strong, restricted).real,
        drive=restrict(parts.drive, restricted).real,
    )
