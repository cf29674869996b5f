"""Matrix moment spaces on [0, 1] and canonical moments.

Moments are symmetric p x p numpy arrays; ``MomentSequence.moments[k - 1]``
holds M_k and M_0 = I is implicit.  Block Hankel matrices follow the usual
layout:

    lower, even 2k : blocks M_{i+j},                  i, j = 0..k
    lower, odd 2k+1: blocks M_{i+j+1},                i, j = 0..k
    upper, even 2k : blocks M_{i+j+1} - M_{i+j+2},    i, j = 0..k-1
    upper, odd 2k+1: blocks M_{i+j} - M_{i+j+1},      i, j = 0..k

Canonical moments place M_i inside the interval [M_i^-, M_i^+] spanned by
the extremal moments:

    U_i = D^{-1/2} (M_i - M_i^-) D^{-1/2},   D = M_i^+ - M_i^-.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, DomainError

SYM_TOL = 1e-12
EIG_CLAMP = 1e-12
INTERIOR_MARGIN = 1e-10


@dataclass(frozen=True)
class MomentSequence:
    p: int
    moments: tuple

    def __post_init__(self):
        object.__setattr__(self, "moments", tuple(np.asarray(m, dtype=float) for m in self.moments))
        for m in self.moments:
            if m.shape != (self.p, self.p):
                raise DomainError(f"moment of shape {m.shape}, expected {(self.p, self.p)}")

    def __len__(self):
        return len(self.moments)

    def __getitem__(self, k):
        """M_k, with M_0 = I."""
        if k == 0:
            return np.eye(self.p)
        if k < 0 or k > len(self.moments):
            raise IndexError(f"moment M_{k} not available (have {len(self.moments)})")
        return self.moments[k - 1]

    @classmethod
    def scalar(cls, values):
        return cls(1, tuple(np.array([[v]], dtype=float) for v in values))


@dataclass(frozen=True)
class CanonicalSequence:
    p: int
    canon: tuple

    def __post_init__(self):
        object.__setattr__(self, "canon", tuple(np.asarray(u, dtype=float) for u in self.canon))
        for u in self.canon:
            if u.shape != (self.p, self.p):
                raise DomainError(f"canonical moment of shape {u.shape}, expected {(self.p, self.p)}")

    def __len__(self):
        return len(self.canon)

    def __getitem__(self, i):
        """U_i (1-based), with U_0 = 0."""
        if i == 0:
            return np.zeros((self.p, self.p))
        return self.canon[i - 1]

    @classmethod
    def scalar(cls, values):
        return cls(1, tuple(np.array([[v]], dtype=float) for v in values))


# ---------------------------------------------------------------------------
# Linear algebra helpers
# ---------------------------------------------------------------------------


def symmetrize(a):
    return 0.5 * (a + a.T)


def is_symmetric(a, tol=SYM_TOL):
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(a), initial=0.0)))


def sym_power(a, power, clamp=EIG_CLAMP):
    """A^power for symmetric PSD A via eigendecomposition.

    Eigenvalues in [-clamp, 0) are set to 0; more negative ones raise
    ``BoundaryError``.  Negative powers additionally require positive
    eigenvalues.
    """
    w, v = np.linalg.eigh(symmetrize(a))
    if w.size and w[0] < -clamp:
        raise BoundaryError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    w = np.maximum(w, 0.0)
    if power < 0 and w.size and w[0] <= 0:
        raise BoundaryError("matrix is singular")
    return symmetrize((v * w**power) @ v.T)


def sqrtm_psd(a):
    return sym_power(a, 0.5)


def inv_sqrtm_pd(a):
    return sym_power(a, -0.5)


def cholesky_logdet(a):
    """log det of a symmetric positive definite matrix via Cholesky.

    Cholesky failure is the positive-definiteness test.
    """
    if a.size == 0:
        return 0.0
    try:
        c = np.linalg.cholesky(symmetrize(a))
    except np.linalg.LinAlgError as exc:
        raise BoundaryError("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def is_positive_definite(a):
    try:
        cholesky_logdet(a)
    except BoundaryError:
        return False
    return True


def in_unit_cube(u, eps=INTERIOR_MARGIN):
    """eps I <= U <= (1 - eps) I in the Loewner order."""
    w = np.linalg.eigvalsh(symmetrize(u))
    return bool(w[0] >= eps and w[-1] <= 1 - eps)


def _blocks(rows):
    return np.block([[np.asarray(b) for b in row] for row in rows]) if rows else np.zeros((0, 0))


# ---------------------------------------------------------------------------
# Hankel matrices and extremal moments
# ---------------------------------------------------------------------------


def build_lower_hankel(seq: MomentSequence, k):
    """Lower block Hankel matrix of order k (needs M_1..M_k)."""
    if k > len(seq):
        raise IndexError(f"order {k} needs {k} moments, only {len(seq)} available")
    half, odd = divmod(k, 2)
    size = half + 1
    return _blocks([[seq[i + j + odd] for j in range(size)] for i in range(size)])


def build_upper_hankel(seq: MomentSequence, k):
    """Upper block Hankel matrix of order k, built from consecutive differences."""
    if k > len(seq):
        raise IndexError(f"order {k} needs {k} moments, only {len(seq)} available")
    half, odd = divmod(k, 2)
    if odd:
        size, off = half + 1, 0
    else:
        size, off = half, 1
    return _blocks([[seq[i + j + off] - seq[i + j + off + 1] for j in range(size)] for i in range(size)])


def _lower_vector(seq, k):
    # h_{2k}: M_{k+1..2k};  h_{2k-1}: M_{k..2k-1}
    half, odd = divmod(k, 2)
    if odd:
        kk = half + 1
        return np.vstack([seq[i] for i in range(kk, 2 * kk)])
    return np.vstack([seq[i] for i in range(half + 1, 2 * half + 1)])


def _upper_vector(seq, k):
    # hbar_{2k}: M_i - M_{i+1}, i = k..2k-1;  hbar_{2k-1}: i = k..2k-2
    half, odd = divmod(k, 2)
    if odd:
        kk = half + 1
        idx = range(kk, 2 * kk - 1)
    else:
        idx = range(half, 2 * half)
    if len(idx) == 0:
        return np.zeros((0, seq.p))
    return np.vstack([seq[i] - seq[i + 1] for i in idx])


def _quad_form_inverse(h, H):
    if H.size == 0:
        return np.zeros((h.shape[1], h.shape[1]))
    try:
        c = np.linalg.cholesky(symmetrize(H))
    except np.linalg.LinAlgError as exc:
        raise BoundaryError("singular or indefinite Hankel matrix (boundary point)") from exc
    y = np.linalg.solve(c, h)
    return symmetrize(y.T @ y)


def extremal_moments(seq: MomentSequence, n):
    """(M_n^-, M_n^+) given M_1..M_{n-1}."""
    if n < 1:
        raise DomainError("order must be >= 1")
    if n - 1 > len(seq):
        raise IndexError(f"order {n} needs {n - 1} moments, only {len(seq)} available")
    p = seq.p
    if n == 1:
        return np.zeros((p, p)), np.eye(p)
    lower = _quad_form_inverse(_lower_vector(seq, n - 1), build_lower_hankel(seq, n - 2))
    if n == 2:
        upper = seq[1].copy()
    else:
        upper = symmetrize(seq[n - 1] - _quad_form_inverse(_upper_vector(seq, n - 1), build_upper_hankel(seq, n - 2)))
    return lower, upper


def moments_to_canonical(seq: MomentSequence, eps=INTERIOR_MARGIN):
    canon = []
    for i in range(1, len(seq) + 1):
        lo, hi = extremal_moments(seq, i)
        d = hi - lo
        if not is_positive_definite(d):
            raise BoundaryError(f"M_{i}^+ - M_{i}^- is not positive definite")
        r = inv_sqrtm_pd(d)
        u = symmetrize(r @ (seq[i] - lo) @ r)
        if not in_unit_cube(u, eps):
            raise BoundaryError(f"canonical moment U_{i} not strictly inside (0, I)")
        canon.append(u)
    return CanonicalSequence(seq.p, tuple(canon))


def canonical_to_moments(c: CanonicalSequence, eps=INTERIOR_MARGIN):
    moments = []
    for i in range(1, len(c) + 1):
        u = c[i]
        if not in_unit_cube(u, eps):
            raise BoundaryError(f"canonical moment U_{i} not strictly inside (0, I)")
        partial = MomentSequence(c.p, tuple(moments))
        lo, hi = extremal_moments(partial, i)
        r = sqrtm_psd(hi - lo)
        moments.append(symmetrize(lo + r @ u @ r))
    return MomentSequence(c.p, tuple(moments))


def is_interior(seq: MomentSequence):
    """Strict positivity of every lower and upper Hankel matrix."""
    for k in range(1, len(seq) + 1):
        if not (is_positive_definite(build_lower_hankel(seq, k)) and is_positive_definite(build_upper_hankel(seq, k))):
            return False
    return True


def hankel_log_det_product(c: CanonicalSequence, n):
    """log det of the lower Hankel matrix of order 2n from canonical moments.

        det H_{2n} = prod_{i=1}^n [det U_{2i-1} det(I - U_{2i-1}) det U_{2i}]^{n-i+1}
                                  * det(I - U_{2i})^{n-i}
    """
    if 2 * n > len(c):
        raise IndexError(f"need {2 * n} canonical moments, have {len(c)}")
    eye = np.eye(c.p)
    total = 0.0
    for i in range(1, n + 1):
        u_odd, u_even = c[2 * i - 1], c[2 * i]
        total += (n - i + 1) * (cholesky_logdet(u_odd) + cholesky_logdet(eye - u_odd) + cholesky_logdet(u_even))
        if n - i:
            total += (n - i) * cholesky_logdet(eye - u_even)
    return total


def hankel_log_det_dense(seq: MomentSequence, n):
    """log det of the lower Hankel matrix of order 2n, assembled densely."""
    return cholesky_logdet(build_lower_hankel(seq, 2 * n))


def random_orthogonal(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def random_canonical_sequence(rng, p, length, low=0.05, high=0.95):
    """Interior canonical sequence with eigenvalues uniform in [low, high]."""
    canon = []
    for _ in range(length):
        v = random_orthogonal(rng, p)
        d = rng.uniform(low, high, size=p)
        canon.append(symmetrize((v * d) @ v.T))
    return CanonicalSequence(p, tuple(canon))


# ---------------------------------------------------------------------------
# Extended-precision oracle path
#
# Reconstructing moments from canonical moments is ill-conditioned: the
# interval widths M_i^+ - M_i^- shrink geometrically, so merely rounding the
# exact moments to float64 perturbs log det H_{2n} by up to ~1e-6 for
# p = 3, n = 5.  The dense check therefore runs the same recursion in
# mpmath arithmetic.
# ---------------------------------------------------------------------------


def _mp():
    import mpmath

    return mpmath


def _mp_block(blocks_2d, p):
    mp = _mp().mp
    size = len(blocks_2d)
    out = mp.zeros(size * p, size * p)
    for i, row in enumerate(blocks_2d):
        for j, b in enumerate(row):
            for r in range(p):
                for s in range(p):
                    out[i * p + r, j * p + s] = b[r, s]
    return out


def _mp_stack(blocks, p):
    mp = _mp().mp
    out = mp.zeros(len(blocks) * p, p)
    for t, b in enumerate(blocks):
        for r in range(p):
            for s in range(p):
                out[t * p + r, s] = b[r, s]
    return out


def _mp_quad_form_inverse(h, H):
    y = _mp_lower_solve(_mp().mp.cholesky(H), h)
    return y.T * y


def _mp_lower_solve(L, B):
    mp = _mp().mp
    n, m = B.rows, B.cols
    X = mp.zeros(n, m)
    for c in range(m):
        for i in range(n):
            acc = B[i, c]
            for k in range(i):
                acc -= L[i, k] * X[k, c]
            X[i, c] = acc / L[i, i]
    return X


def _mp_lower_hankel(M, k, p):
    half, odd = divmod(k, 2)
    size = half + 1
    return _mp_block([[M[i + j + odd] for j in range(size)] for i in range(size)], p)


def _mp_upper_hankel(M, k, p):
    half, odd = divmod(k, 2)
    size, off = (half + 1, 0) if odd else (half, 1)
    return _mp_block([[M[i + j + off] - M[i + j + off + 1] for j in range(size)] for i in range(size)], p)


def _mp_extremal(M, i, p):
    mp = _mp().mp
    if i == 1:
        return mp.zeros(p, p), mp.eye(p)
    half, odd = divmod(i - 1, 2)
    if odd:
        kk = half + 1
        hl = [M[t] for t in range(kk, 2 * kk)]
        hu = [M[t] - M[t + 1] for t in range(kk, 2 * kk - 1)]
    else:
        hl = [M[t] for t in range(half + 1, 2 * half + 1)]
        hu = [M[t] - M[t + 1] for t in range(half, 2 * half)]
    lo = _mp_quad_form_inverse(_mp_stack(hl, p), _mp_lower_hankel(M, i - 2, p))
    hi = M[i - 1]
    if hu:
        hi = hi - _mp_quad_form_inverse(_mp_stack(hu, p), _mp_upper_hankel(M, i - 2, p))
    return lo, hi


def _mp_sym_power(a, power):
    mp = _mp().mp
    w, q = mp.eigsy(a)
    return q * mp.diag([x**power for x in w]) * q.T


def canonical_to_moments_mp(c: CanonicalSequence, dps=40):
    """Moments [M_0, ..., M_n] as mpmath matrices, computed at ``dps`` digits."""
    mpmath = _mp()
    with mpmath.workdps(dps):
        M = [mpmath.mp.eye(c.p)]
        for i in range(1, len(c) + 1):
            lo, hi = _mp_extremal(M, i, c.p)
            root = _mp_sym_power(hi - lo, 0.5)
            M.append(lo + root * mpmath.mp.matrix(np.asarray(c[i]).tolist()) * root)
        return M


def hankel_log_det_dense_mp(c: CanonicalSequence, n, dps=40):
    """Dense log det H_{2n}: moments rebuilt and Cholesky-factored at ``dps`` digits."""
    mpmath = _mp()
    with mpmath.workdps(dps):
        M = canonical_to_moments_mp(c, dps)[: 2 * n + 1]
        L = mpmath.mp.cholesky(_mp_lower_hankel(M, 2 * n, c.p))
        return float(2 * sum(mpmath.log(L[i, i]) for i in range(L.rows)))


def canonical_roundtrip_mp(c: CanonicalSequence, dps=40):
    """U -> M -> U with both maps evaluated at ``dps`` digits."""
    mpmath = _mp()
    with mpmath.workdps(dps):
        M = canonical_to_moments_mp(c, dps)
        out = []
        for i in range(1, len(c) + 1):
            lo, hi = _mp_extremal(M, i, c.p)
            rinv = _mp_sym_power(hi - lo, -0.5)
            out.append(np.array((rinv * (M[i] - lo) * rinv).tolist(), dtype=float))
        return CanonicalSequence(c.p, tuple(out))
