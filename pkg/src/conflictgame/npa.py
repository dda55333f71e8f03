"""Moment-matrix upper bounds on quantum payoffs, with a built-in SDP solver.

The relaxation variables are expectation values of words in the players'
outcome-0 projectors (A_0, A_1 for Alice, B_0, B_1 for Bob).  Words
reduce under projector idempotence (PP = P) and cross-player
commutation; words equal up to reversal share a real moment.  The
moment matrix Gamma[u, v] = <reduce(reverse(u) v)> over a monomial list
must be positive semidefinite, its (1,1) entry is 1, and repeated words
pin entries equal.  Maximizing a Bell functional over such matrices
upper-bounds its quantum value.

Hierarchy levels:
  "1"     monomials 1, A_i, B_j                      (dim 5)
  "1+ab"  plus the products A_i B_j                  (dim 9)
  "2"     plus the same-player words A_iA_j, B_iB_j  (dim 13)

With two settings and binary outcomes per player, the 13 monomials of
"2" are every word of length at most two, the complete second level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import Behavior, GameSpec, ValidationError
from .quantum import QuantumStrategy

Word = tuple[tuple[int, ...], tuple[int, ...]]  # (Alice letters, Bob letters)

LEVELS = ("1", "1+ab", "2")


class SdpError(RuntimeError):
    """Interior-point solver failed to converge; carries the best bound seen."""

    def __init__(self, message: str, best_value: float | None = None):
        super().__init__(message)
        self.best_value = best_value


@dataclass(frozen=True)
class BellFunctional:
    """Affine functional on behaviors: offset + sum c[x][y] p(y|x)."""

    coefficients: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        try:
            c = np.array(self.coefficients, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError("functional coefficients are ragged or non-numeric") from exc
        if c.shape != (2, 2, 2, 2):
            raise ValidationError(f"functional coefficients must have shape (2, 2, 2, 2), got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "offset", float(self.offset))

    def value_on(self, behavior: Behavior) -> float:
        return float(self.offset + np.sum(self.coefficients * behavior.p))


def chsh_functional() -> BellFunctional:
    """CHSH combination sum_x (-1)^(xA xB) sum_y (-1)^(yA+yB) p(y|x)."""
    c = np.empty((2, 2, 2, 2))
    for xa in range(2):
        for xb in range(2):
            for ya in range(2):
                for yb in range(2):
                    c[xa, xb, ya, yb] = (-1.0) ** (xa * xb) * (-1.0) ** (ya + yb)
    return BellFunctional(c)


def payoff_functional(game: GameSpec, w_a: float, w_b: float) -> BellFunctional:
    """Functional whose value on any behavior is w_a F_A + w_b F_B."""
    util = w_a * game.utility_a + w_b * game.utility_b
    return BellFunctional(game.prior[:, :, None, None] * util)


# --- word algebra -----------------------------------------------------------

def _collapse(letters: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in letters:
        if out and out[-1] == letter:
            continue  # projector idempotence
        out.append(letter)
    return tuple(out)


def _entry_word(row: Word, col: Word) -> Word:
    a = _collapse(tuple(reversed(row[0])) + col[0])
    b = _collapse(tuple(reversed(row[1])) + col[1])
    return a, b


def _canonical(word: Word) -> Word:
    reverse = (tuple(reversed(word[0])), tuple(reversed(word[1])))
    return min(word, reverse)  # reversal conjugates, so real parts agree


def normalize_level(level) -> str:
    text = str(level).lower().replace(" ", "")
    if text not in LEVELS:
        raise ValidationError(f"level must be one of {LEVELS}, got {level!r}")
    return text


def _monomials(level: str) -> tuple[Word, ...]:
    identity: Word = ((), ())
    singles: list[Word] = [((i,), ()) for i in range(2)] + [((), (j,)) for j in range(2)]
    words = [identity] + singles
    if level in ("1+ab", "2"):
        words += [((i,), (j,)) for i in range(2) for j in range(2)]
    if level == "2":
        words += [((0, 1), ()), ((1, 0), ()), ((), (0, 1)), ((), (1, 0))]
    return tuple(words)


@dataclass(frozen=True)
class MomentStructure:
    """Moment-matrix skeleton for one hierarchy level.

    class_entries groups the upper-triangle entries (i, j) sharing one
    moment; class_words holds each class's canonical word.  Class 0 is
    the identity word at entry (0, 0), pinned to 1.  equalities lists
    the induced pairwise entry constraints.
    """

    level: str
    monomials: tuple[Word, ...]
    dim: int
    class_words: tuple[Word, ...]
    class_entries: tuple[tuple[tuple[int, int], ...], ...]
    equalities: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    _index_a: dict = field(repr=False, default_factory=dict)
    _index_b: dict = field(repr=False, default_factory=dict)

    def class_basis(self) -> np.ndarray:
        """Symmetric indicator matrix per non-identity class, stacked."""
        basis = np.zeros((len(self.class_words) - 1, self.dim, self.dim))
        for k, entries in enumerate(self.class_entries[1:]):
            for i, j in entries:
                basis[k, i, j] = 1.0
                basis[k, j, i] = 1.0
        return basis

    def embed(self, functional: BellFunctional) -> tuple[np.ndarray, float]:
        """Objective matrix C and scalar offset with <C, Gamma> + offset = functional.

        Uses p(0,0|x) = <A B>, p(0,1|x) = <A> - <AB>, p(1,0|x) = <B> - <AB>,
        p(1,1|x) = 1 - <A> - <B> + <AB> to eliminate outcome-1 projectors.
        """
        c = functional.coefficients
        cmat = np.zeros((self.dim, self.dim))
        offset = functional.offset + float(c[:, :, 1, 1].sum())
        for i in range(2):
            gamma = float((c[i, :, 0, 1] - c[i, :, 1, 1]).sum())
            idx = self._index_a[i]
            cmat[0, idx] += gamma / 2.0
            cmat[idx, 0] += gamma / 2.0
        for j in range(2):
            gamma = float((c[:, j, 1, 0] - c[:, j, 1, 1]).sum())
            idx = self._index_b[j]
            cmat[0, idx] += gamma / 2.0
            cmat[idx, 0] += gamma / 2.0
        for i in range(2):
            for j in range(2):
                gamma = float(c[i, j, 0, 0] - c[i, j, 0, 1] - c[i, j, 1, 0] + c[i, j, 1, 1])
                ia, ib = self._index_a[i], self._index_b[j]
                cmat[ia, ib] += gamma / 2.0
                cmat[ib, ia] += gamma / 2.0
        return cmat, offset

    def check_matrix(self, matrix: np.ndarray, tol: float = 1e-8) -> None:
        """Raise unless the matrix satisfies this structure's constraints."""
        m = np.asarray(matrix, dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValidationError(f"matrix must be {self.dim}x{self.dim}, got {m.shape}")
        if np.max(np.abs(m - m.T)) > tol:
            raise ValidationError("matrix is not symmetric")
        if abs(m[0, 0] - 1.0) > tol:
            raise ValidationError(f"entry (0, 0) is {m[0, 0]!r}, expected 1")
        for (i, j), (k, l) in self.equalities:
            if abs(m[i, j] - m[k, l]) > tol:
                raise ValidationError(f"entries {(i, j)} and {(k, l)} differ beyond {tol}")
        if np.linalg.eigvalsh(0.5 * (m + m.T)).min() < -tol:
            raise ValidationError("matrix is not positive semidefinite")


def build_moment_structure(level="1+ab") -> MomentStructure:
    level = normalize_level(level)
    monomials = _monomials(level)
    dim = len(monomials)
    groups: dict[Word, list[tuple[int, int]]] = {}
    order: list[Word] = []
    for i in range(dim):
        for j in range(i, dim):
            word = _canonical(_entry_word(monomials[i], monomials[j]))
            if word not in groups:
                groups[word] = []
                order.append(word)
            groups[word].append((i, j))
    identity: Word = ((), ())
    assert groups[identity] == [(0, 0)]
    order.remove(identity)
    order.insert(0, identity)
    equalities = []
    for word in order:
        entries = groups[word]
        equalities.extend((entries[0], e) for e in entries[1:])
    index_a = {i: monomials.index(((i,), ())) for i in range(2)}
    index_b = {j: monomials.index(((), (j,))) for j in range(2)}
    return MomentStructure(
        level=level,
        monomials=monomials,
        dim=dim,
        class_words=tuple(order),
        class_entries=tuple(tuple(groups[w]) for w in order),
        equalities=tuple(equalities),
        _index_a=index_a,
        _index_b=index_b,
    )


def moment_matrix_of_strategy(structure: MomentStructure, strategy: QuantumStrategy) -> np.ndarray:
    """Real moment matrix of an explicit strategy; feasible for the structure."""
    rho = strategy.state.rho
    proj_a = [strategy.alice[i].proj0 for i in range(2)]
    proj_b = [strategy.bob[j].proj0 for j in range(2)]

    def word_operator(projs, letters):
        op = np.eye(2, dtype=complex)
        for letter in letters:
            op = op @ projs[letter]
        return op

    dim = structure.dim
    out = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            wa, wb = _entry_word(structure.monomials[i], structure.monomials[j])
            op = np.kron(word_operator(proj_a, wa), word_operator(proj_b, wb))
            value = float(np.trace(rho @ op).real)
            out[i, j] = out[j, i] = value
    return out


# --- interior-point solver ---------------------------------------------------

@dataclass(frozen=True)
class SdpSolution:
    """Converged solver output.

    value is the relaxation optimum (plus functional offset); gap is the
    absolute primal-dual objective difference at termination, so the true
    relaxation value lies within gap of value.
    """

    value: float
    moment_matrix: np.ndarray
    certificate: np.ndarray
    gap: float
    iterations: int


def _max_step(current: np.ndarray, direction: np.ndarray) -> float:
    """Largest alpha keeping current + alpha * direction positive semidefinite."""
    chol = np.linalg.cholesky(current)
    inv = np.linalg.inv(chol)
    scaled = inv @ direction @ inv.T
    lam = np.linalg.eigvalsh(0.5 * (scaled + scaled.T)).min()
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _interior_point(a_stack: np.ndarray, b: np.ndarray, c_mat: np.ndarray,
                    tol: float, max_iters: int):
    """Primal-dual path following with Mehrotra predictor-corrector steps.

    Standard pair: min <C,X> s.t. <A_k,X> = b_k, X >= 0  against
    max b'y s.t. sum y_k A_k + Z = C, Z >= 0.  Infeasible start at
    scaled identity; HKM-style directions with a dense Schur system.
    """
    dim = c_mat.shape[0]
    m = len(b)
    eye = np.eye(dim)
    scale = max(1.0, float(np.abs(b).max()) if m else 1.0, float(np.linalg.norm(c_mat)))
    x = eye * scale
    z = eye * scale
    y = np.zeros(m)
    norm_b = 1.0 + np.linalg.norm(b)
    norm_c = 1.0 + np.linalg.norm(c_mat)
    best_err, best_dual, best_gap = np.inf, None, None

    def apply_a(mat: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ij->k", a_stack, mat)

    def apply_at(vec: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", vec, a_stack)

    for iteration in range(1, max_iters + 1):
        rp = b - apply_a(x)
        rd = c_mat - z - apply_at(y)
        pobj = float(np.sum(c_mat * x))
        dobj = float(b @ y)
        mu = float(np.sum(x * z)) / dim
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        err = max(relgap, np.linalg.norm(rp) / norm_b, np.linalg.norm(rd) / norm_c)
        if err < best_err:
            best_err, best_dual, best_gap = err, dobj, abs(pobj - dobj)
        if err <= tol:
            return x, y, z, abs(pobj - dobj), iteration
        z_inv = np.linalg.inv(z)
        z_inv = 0.5 * (z_inv + z_inv.T)
        t_stack = np.einsum("ij,kjl,lm->kim", z_inv, a_stack, x)
        schur = np.einsum("kij,lij->kl", a_stack, t_stack)
        schur = 0.5 * (schur + schur.T)
        schur[np.diag_indices_from(schur)] += 1e-13 * max(1.0, schur.diagonal().max())

        def newton(rc: np.ndarray):
            rhs = rp - apply_a(z_inv @ (rc - rd @ x))
            try:
                dy = np.linalg.solve(schur, rhs)
            except np.linalg.LinAlgError:
                dy = np.linalg.lstsq(schur, rhs, rcond=None)[0]
            dz = rd - apply_at(dy)
            dx = z_inv @ (rc - dz @ x)
            return 0.5 * (dx + dx.T), dy, dz

        # predictor
        rc_aff = -(z @ x)
        dx_aff, dy_aff, dz_aff = newton(rc_aff)
        alpha_p = min(1.0, _max_step(x, dx_aff))
        alpha_d = min(1.0, _max_step(z, dz_aff))
        mu_aff = float(np.sum((x + alpha_p * dx_aff) * (z + alpha_d * dz_aff))) / dim
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)
        # corrector
        rc = sigma * mu * eye - z @ x - dz_aff @ dx_aff
        dx, dy, dz = newton(rc)
        alpha_p = min(1.0, 0.98 * _max_step(x, dx))
        alpha_d = min(1.0, 0.98 * _max_step(z, dz))
        x = 0.5 * ((x + alpha_p * dx) + (x + alpha_p * dx).T)
        z = 0.5 * ((z + alpha_d * dz) + (z + alpha_d * dz).T)
        y = y + alpha_d * dy

    raise SdpError(
        f"interior-point solver did not reach tolerance {tol} in {max_iters} iterations"
        f" (best residual {best_err:.3e})",
        best_value=best_dual,
    )


def solve_sdp(structure: MomentStructure, functional: BellFunctional,
              tol: float = 1e-7, max_iters: int = 200) -> SdpSolution:
    """Maximize the functional over the structure's feasible moment matrices.

    The equality classes parametrize the matrix directly (one variable
    per class), so the solver's dual slack IS the moment matrix and the
    equality constraints hold exactly by construction.
    """
    c_mat, offset = structure.embed(functional)
    basis = structure.class_basis()
    objective = np.einsum("kij,ij->k", basis, c_mat)
    constant = c_mat[0, 0]  # identity-class entry contributes a constant
    e00 = np.zeros((structure.dim, structure.dim))
    e00[0, 0] = 1.0
    try:
        x, y, z, gap, iterations = _interior_point(-basis, objective, e00, tol, max_iters)
    except SdpError as exc:
        if exc.best_value is not None:
            exc.best_value = float(exc.best_value + offset + constant)
        raise
    value = float(objective @ y + offset + constant)
    return SdpSolution(value=value, moment_matrix=z, certificate=x, gap=float(gap),
                       iterations=iterations)


def npa_upper_bound(game: GameSpec, w_a: float, w_b: float, level="1+ab",
                    tol: float = 1e-7) -> float:
    """Upper bound on max w_a F_A + w_b F_B over quantum behaviors."""
    structure = build_moment_structure(level)
    return solve_sdp(structure, payoff_functional(game, w_a, w_b), tol=tol).value


@dataclass(frozen=True)
class BoundaryPoint:
    """Half-plane w_a F_A + w_b F_B <= bound certified at one weight direction."""

    w_a: float
    w_b: float
    bound: float
    gap: float
    level: str


def region_upper_boundary(game: GameSpec, weight_grid, level="1+ab",
                          tol: float = 1e-7) -> list[BoundaryPoint]:
    """Quantum-region outer approximation: one certified half-plane per weight."""
    level = normalize_level(level)
    structure = build_moment_structure(level)
    points = []
    for w_a, w_b in weight_grid:
        solution = solve_sdp(structure, payoff_functional(game, w_a, w_b), tol=tol)
        points.append(BoundaryPoint(w_a=float(w_a), w_b=float(w_b),
                                    bound=solution.value, gap=solution.gap, level=level))
    return points
