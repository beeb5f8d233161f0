"""Block impedance algebra for two-sided multiports.

Every transpose in this module is a plain (unconjugated) transpose: the
reciprocity relations of antenna and matching networks are ``Z == Z.T``.
Linear systems are solved by dense LU with partial pivoting; a matrix is
declared singular when its smallest pivot falls below ``PIVOT_RTOL`` times
its largest.
"""

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError, CrossCheckWarning, DomainError, NearSingularUpdateError

PIVOT_RTOL = 1e-12
#: Relative disagreement between Sherman-Morrison and direct paths that triggers a warning.
CROSSCHECK_RTOL = 1e-8
#: Smallest admissible ``|1 - z^T A^{-1} z / c|`` in a rank-one update.
UPDATE_TOL = 1e-12


class _LU:
    """LU factorization that refuses numerically singular matrices."""

    def __init__(self, a, block):
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.factors = sla.lu_factor(a, check_finite=True)
        piv = np.abs(np.diag(self.factors[0]))
        if piv.min() <= PIVOT_RTOL * piv.max():
            with np.errstate(all="ignore"):
                cond = np.linalg.cond(a, 1)
            raise ConditioningError(block, float(cond) if np.isfinite(cond) else float("inf"))

    def solve(self, b):
        """Solve ``A x = b``."""
        return sla.lu_solve(self.factors, b)

    def solve_t(self, b):
        """Solve ``A^T x = b`` (plain transpose)."""
        return sla.lu_solve(self.factors, b, trans=1)

    def right_divide(self, b):
        """Return ``b @ inv(A)``."""
        return self.solve_t(np.asarray(b).T).T


def _as_matrix(a):
    return np.atleast_2d(np.asarray(a, dtype=complex))


def _is_symmetric(a, rtol):
    scale = max(np.abs(a).max(initial=0.0), 1e-300)
    return np.abs(a - a.T).max(initial=0.0) <= rtol * scale


@dataclass(frozen=True, eq=False)
class PartitionedImpedance:
    """Two-sided multiport ``[[tt, tr], [rt, rr]]``.

    ``tt`` is N_T x N_T, ``tr`` N_T x N_R, ``rt`` N_R x N_T and ``rr``
    N_R x N_R, all in ohms.
    """

    tt: np.ndarray
    tr: np.ndarray
    rt: np.ndarray
    rr: np.ndarray

    def __post_init__(self):
        for name in ("tt", "tr", "rt", "rr"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name)))
        n_t, n_r = self.tt.shape[0], self.rr.shape[0]
        if (self.tt.shape != (n_t, n_t) or self.rr.shape != (n_r, n_r)
                or self.tr.shape != (n_t, n_r) or self.rt.shape != (n_r, n_t)):
            raise ValueError("inconsistent block shapes "
                             f"tt{self.tt.shape} tr{self.tr.shape} rt{self.rt.shape} rr{self.rr.shape}")

    @property
    def n_t(self):
        return self.tt.shape[0]

    @property
    def n_r(self):
        return self.rr.shape[0]

    @classmethod
    def from_full(cls, z, n_t):
        z = _as_matrix(z)
        return cls(z[:n_t, :n_t], z[:n_t, n_t:], z[n_t:, :n_t], z[n_t:, n_t:])

    def full(self):
        return np.block([[self.tt, self.tr], [self.rt, self.rr]])

    def is_reciprocal(self, rtol=1e-12):
        return _is_symmetric(self.full(), rtol)

    def unilateral(self):
        """Copy with the receiver-to-transmitter block ``tr`` zeroed."""
        return PartitionedImpedance(self.tt, np.zeros_like(self.tr), self.rt, self.rr)


class MatchingMode(enum.Enum):
    NONE = "none"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class MatchingNetworkSpec:
    """2N-port matching network; port 1 faces the source, port 2 the antennas."""

    z11: np.ndarray = None
    z12: np.ndarray = None
    z21: np.ndarray = None
    z22: np.ndarray = None
    mode: MatchingMode = MatchingMode.EXPLICIT

    def __post_init__(self):
        if self.mode is MatchingMode.NONE:
            return
        blocks = [_as_matrix(getattr(self, k)) for k in ("z11", "z12", "z21", "z22")]
        n = blocks[0].shape[0]
        if any(b.shape != (n, n) for b in blocks):
            raise ValueError("matching network blocks must all be square and of equal size")
        for name, b in zip(("z11", "z12", "z21", "z22"), blocks):
            object.__setattr__(self, name, b)

    @classmethod
    def none(cls):
        return cls(mode=MatchingMode.NONE)

    @property
    def n(self):
        return None if self.mode is MatchingMode.NONE else self.z11.shape[0]

    def is_reciprocal(self, rtol=1e-12):
        if self.mode is MatchingMode.NONE:
            return True
        return _is_symmetric(np.block([[self.z11, self.z12], [self.z21, self.z22]]), rtol)


@dataclass(frozen=True)
class TerminationSpec:
    """Generator (transmit) and load (receive) impedances, in ohms."""

    z_generator: complex
    z_load: complex

    def __post_init__(self):
        if not (complex(self.z_generator).real > 0 and complex(self.z_load).real > 0):
            raise DomainError("generator and load impedances must have positive real part")

    def swapped(self):
        return TerminationSpec(self.z_load, self.z_generator)


class Variant(enum.Enum):
    EXACT = "exact"
    UNILATERAL = "unilateral"


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Noiseless map from generator voltages to load voltages (N_R x N_T)."""

    d: np.ndarray
    variant: Variant


def _connect(a_blocks, m):
    """Attach matching network ``m`` to the ``a`` ports of a multiport.

    ``a_blocks = (z_aa, z_ab, z_ba, z_bb)``; returns the blocks of the
    resulting multiport with the ``a`` ports replaced by port 1 of ``m``.
    """
    z_aa, z_ab, z_ba, z_bb = a_blocks
    lu = _LU(z_aa + m.z22, "antenna + matching port-2 block")
    return (m.z11 - m.z12 @ lu.solve(m.z21),
            m.z12 @ lu.solve(z_ab),
            z_ba @ lu.solve(m.z21),
            z_bb - z_ba @ lu.solve(z_ab))


def cascade_with_matching(mt, antenna, mr):
    """Combine transmit matching, antenna multiport and receive matching.

    With both matching networks explicit this evaluates the closed-form
    block expressions; a side with ``MatchingMode.NONE`` is a direct
    connection. If all three inputs are reciprocal the output satisfies
    ``rt == tr.T`` exactly.
    """
    t_none = mt.mode is MatchingMode.NONE
    r_none = mr.mode is MatchingMode.NONE
    if t_none and r_none:
        return antenna
    if not t_none and mt.n != antenna.n_t:
        raise ValueError(f"transmit matching network has {mt.n} ports per side, antenna has {antenna.n_t}")
    if not r_none and mr.n != antenna.n_r:
        raise ValueError(f"receive matching network has {mr.n} ports per side, antenna has {antenna.n_r}")
    reciprocal = antenna.is_reciprocal() and mt.is_reciprocal() and mr.is_reciprocal()

    if t_none or r_none:
        if r_none:
            tt, tr, rt, rr = _connect((antenna.tt, antenna.tr, antenna.rt, antenna.rr), mt)
        else:
            rr, rt, tr, tt = _connect((antenna.rr, antenna.rt, antenna.tr, antenna.tt), mr)
    else:
        lu_at = _LU(antenna.tt + mt.z22, "A_T")
        lu_ar = _LU(antenna.rr + mr.z22, "A_R")
        lu_st = _LU((antenna.tt + mt.z22) - antenna.tr @ lu_ar.solve(antenna.rt),
                    "A_T - Z_ATR A_R^-1 Z_ART")
        lu_sr = _LU((antenna.rr + mr.z22) - antenna.rt @ lu_at.solve(antenna.tr),
                    "A_R - Z_ART A_T^-1 Z_ATR")
        tt = mt.z11 - mt.z12 @ lu_st.solve(mt.z21)
        rr = mr.z11 - mr.z12 @ lu_sr.solve(mr.z21)
        tr = mt.z12 @ lu_st.solve(antenna.tr @ lu_ar.solve(mr.z21))
        rt = mr.z12 @ lu_sr.solve(antenna.rt @ lu_at.solve(mt.z21))
    if reciprocal:
        rt = tr.T.copy()
    return PartitionedImpedance(tt, tr, rt, rr)


def _loaded(net, term):
    """Factorizations of ``Z_G*I + Z_T`` and ``Z_L*I + Z_R``."""
    gt = term.z_generator * np.eye(net.n_t) + net.tt
    rl = term.z_load * np.eye(net.n_r) + net.rr
    return gt, rl


def end_to_end_matrix(net, term):
    """Exact transfer matrix, eliminating the receive side first."""
    gt, rl = _loaded(net, term)
    x = _LU(rl, "Z_L I + Z_R").solve(net.rt)
    s = _LU(gt - net.tr @ x, "Z_G I + Z_T - Z_TR (Z_L I + Z_R)^-1 Z_RT")
    return TransferMatrix(term.z_load * s.right_divide(x), Variant.EXACT)


def end_to_end_matrix_alt(net, term):
    """Exact transfer matrix, eliminating the transmit side first."""
    gt, rl = _loaded(net, term)
    y = _LU(gt, "Z_G I + Z_T").right_divide(net.rt)
    s = _LU(rl - y @ net.tr, "Z_L I + Z_R - Z_RT (Z_G I + Z_T)^-1 Z_TR")
    return TransferMatrix(term.z_load * s.solve(y), Variant.EXACT)


def unilateral_matrix(net, term):
    gt, rl = _loaded(net, term)
    x = _LU(rl, "Z_L I + Z_R").solve(net.rt)
    return TransferMatrix(term.z_load * _LU(gt, "Z_G I + Z_T").right_divide(x), Variant.UNILATERAL)


def unilateral_deviation(net, term):
    """Relative error ``||D - D_UA||_F / ||D_UA||_F`` of the unilateral model.

    The difference is formed as ``Z_L (Z_L I + Z_R)^-1 Z_RT S^-1 C (Z_G I + Z_T)^-1``
    with ``C = Z_TR (Z_L I + Z_R)^-1 Z_RT`` and ``S = Z_G I + Z_T - C``, which
    avoids subtracting two nearly equal matrices. Deviations far below
    machine epsilon are therefore still resolved.
    """
    gt, rl = _loaded(net, term)
    x = _LU(rl, "Z_L I + Z_R").solve(net.rt)
    c = net.tr @ x
    lu_gt = _LU(gt, "Z_G I + Z_T")
    lu_s = _LU(gt - c, "Z_G I + Z_T - Z_TR (Z_L I + Z_R)^-1 Z_RT")
    d_ua = term.z_load * lu_gt.right_divide(x)
    diff = term.z_load * lu_gt.right_divide(lu_s.right_divide(x) @ c)
    return np.linalg.norm(diff) / np.linalg.norm(d_ua)


def _rank_one_response(a, z, c, z_l):
    """Return ``(z_l / c) * z^T (A - z z^T / c)^-1`` as a 1-D array.

    Dense solve on the corrected matrix is authoritative; a Sherman-Morrison
    evaluation through ``A^-1`` is computed alongside as a cross-check.
    """
    a = _as_matrix(a)
    z = np.asarray(z, dtype=complex).reshape(-1)
    if a.shape != (z.size, z.size):
        raise ValueError(f"matrix {a.shape} does not match vector of length {z.size}")
    if c == 0:
        raise DomainError("scalar impedance of the single-antenna side must be nonzero")
    scale = z_l / c
    if not np.any(z):
        return np.zeros(z.size, dtype=complex)

    lu_a = _LU(a, "array-side impedance matrix")
    y = lu_a.solve_t(z)                      # y^T = z^T A^-1
    denom = 1.0 - (y @ z) / c
    if abs(denom) < UPDATE_TOL:
        raise NearSingularUpdateError("rank-one update", float("inf"),
                                      f"rank-one update is near-singular (|1 - z^T A^-1 z / c| = {abs(denom):.3e})")
    via_sm = scale * y / denom

    direct = scale * _LU(a - np.outer(z, z) / c, "rank-one corrected matrix").solve_t(z)
    err = np.linalg.norm(direct - via_sm) / np.linalg.norm(direct)
    if err > CROSSCHECK_RTOL:
        warnings.warn(f"Sherman-Morrison and direct solve disagree (relative {err:.2e})",
                      CrossCheckWarning, stacklevel=3)
    return direct


def miso_response(z_gt, z_tr, z_rl, z_l):
    """Row vector ``d^T`` of an N-antenna transmitter and a single receiver.

    ``z_gt`` is the loaded transmit matrix ``Z_G*I + Z_AT`` (dense array or
    an :class:`~coupling_lab.antenna.IntraArrayMatrix`), ``z_tr`` the
    inter-array vector, ``z_rl = Z_L + R_r`` and ``z_l`` the load.
    """
    return _rank_one_response(_dense(z_gt), _entries(z_tr), z_rl, z_l)


def simo_response(z_rl, z_rt, z_gt, z_l):
    """Column vector ``d`` of a single transmitter and an N-antenna receiver.

    Arguments mirror :func:`miso_response` with the roles of the loaded
    matrix and the single-antenna scalar exchanged.
    """
    # (A^T)^-T = A^-1, so the row-form kernel yields the left solve
    return _rank_one_response(_dense(z_rl).T, _entries(z_rt), z_gt, z_l)


def _dense(m):
    return m.dense() if hasattr(m, "dense") else _as_matrix(m)


def _entries(v):
    return v.entries if hasattr(v, "entries") else v


def verify_appendix_identity(t, r, z, y):
    """Relative residual of ``R^-1 Z (T - Y R^-1 Z)^-1 == (R - Z T^-1 Y)^-1 Z T^-1``."""
    t, r, z, y = map(_as_matrix, (t, r, z, y))
    lu_r = _LU(r, "R")
    lu_t = _LU(t, "T")
    lhs = _LU(t - y @ lu_r.solve(z), "T - Y R^-1 Z").right_divide(lu_r.solve(z))
    rhs = _LU(r - z @ lu_t.solve(y), "R - Z T^-1 Y").solve(lu_t.right_divide(z))
    return np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)


def random_instance(rng, n_t, n_r, reciprocal=True, shift=3.0):
    """Random well-conditioned network and terminations for self-tests.

    Entries have independent real and imaginary parts uniform on [-1, 1];
    ``shift`` is added to the diagonal of both diagonal blocks.
    """
    n = n_t + n_r
    z = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    if reciprocal:
        z = (z + z.T) / 2
    z[np.diag_indices(n)] += shift
    term = TerminationSpec(complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)),
                           complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)))
    return PartitionedImpedance.from_full(z, n_t), term


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@dataclass(frozen=True)
class SelfTestResult:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self):
        return self.worst <= self.tolerance


def self_test(count=100, seed=0, max_dim=8, tol=1e-10, unilateral_tol=1e-13):
    """Randomized checks of the transfer-matrix algebra.

    Returns one :class:`SelfTestResult` each for the matrix identity behind
    the two exact transfer-matrix forms, their mutual agreement, and the
    reduction of both exact forms to the unilateral matrix when ``tr = 0``.
    """
    rng = np.random.default_rng(seed)
    identity = agreement = reduction = 0.0
    for _ in range(count):
        n, m = rng.integers(1, max_dim + 1, size=2)
        t = _random_block(rng, n, n) + 3 * np.eye(n)
        r = _random_block(rng, m, m) + 3 * np.eye(m)
        identity = max(identity, verify_appendix_identity(t, r, _random_block(rng, m, n),
                                                          _random_block(rng, n, m)))

        net, term = random_instance(rng, int(n), int(m))
        agreement = max(agreement, _rel(end_to_end_matrix(net, term).d,
                                        end_to_end_matrix_alt(net, term).d))
        uni = net.unilateral()
        d_ua = unilateral_matrix(uni, term).d
        reduction = max(reduction, _rel(end_to_end_matrix(uni, term).d, d_ua),
                        _rel(end_to_end_matrix_alt(uni, term).d, d_ua))
    return [SelfTestResult("appendix identity residual", identity, tol),
            SelfTestResult("exact forms agree", agreement, tol),
            SelfTestResult("tr = 0 reduces to unilateral", reduction, unilateral_tol)]


def _random_block(rng, rows, cols):
    return rng.uniform(-1, 1, (rows, cols)) + 1j * rng.uniform(-1, 1, (rows, cols))
