"""Fermionic operator algebra: symbolic CAR elements, Fock representations,
quasi-free (Wick) states, and the Z2-graded tensor (exponential law).

Two-layer design: dynamics act on the one-particle vectors inside symbolic
field-operator monomials (exact, dimension-free); dense 2^n matrices are
materialized only for states, interacting propagators, and oracles.

Conventions fixed here:
  * psi is antilinear: psi(c h) = conj(c) psi(h); {psi(f), psi*(g)} = (f|g).
  * Jordan-Wigner ordering by mode index: a_j = Z x...x Z x sm x 1 x...x 1
    with sm = [[0,1],[0,0]]; the vacuum is basis index 0.
  * Gauge-invariant Wick evaluation: for creators f_1..f_n (left to right)
    followed by annihilators g_1..g_n,
        omega(...) = (-1)^{n(n-1)/2} det[ pair(f_i, g_j) ],
    pair(f, g) = omega(psi*(f) psi(g)) = (g | c f); the sign convention is
    pinned by the Gibbs-trace oracle test.
  * Thermal covariance of the one-particle Hamiltonian h at inverse
    temperature beta: c = (1 + e^{beta h})^{-1} (so rho ~ e^{-beta dG(h)}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModeBasisError

CREATE = True
ANNIHILATE = False


# -- one-particle vectors ----------------------------------------------------------


class ArrayVector:
    """Vector in C^d with the standard inner product (antilinear first slot)."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = np.asarray(data, dtype=complex)

    def inner(self, other) -> complex:
        return complex(np.vdot(self.data, other.data))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def scaled(self, c):
        return ArrayVector(c * self.data)

    def add(self, other):
        return ArrayVector(self.data + other.data)

    def __repr__(self):
        return f"ArrayVector({self.data!r})"


class GridVector:
    """Spinor sampled on a shared uniform grid; inner product h * sum."""

    __slots__ = ("values", "h", "x_min")

    def __init__(self, values, h, x_min=0.0):
        self.values = np.asarray(values, dtype=complex)
        self.h = float(h)
        self.x_min = float(x_min)

    def inner(self, other) -> complex:
        if self.values.shape != other.values.shape or self.h != other.h:
            raise DomainError("grid vectors must share their grid")
        return complex(self.h * np.vdot(self.values, other.values))

    def norm(self) -> float:
        return float(np.sqrt(self.h) * np.linalg.norm(self.values))

    def scaled(self, c):
        return GridVector(c * self.values, self.h, self.x_min)

    def add(self, other):
        return GridVector(self.values + other.values, self.h, self.x_min)


def tensor_spinor(spatial, e):
    """kron(g, e) ordering for C^d (x) C^2 one-particle spaces."""
    return ArrayVector(np.kron(np.asarray(spatial, complex),
                               np.asarray(e, complex)))


# -- symbolic algebra ---------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraElement:
    """Linear combination of field-operator monomials.

    terms: tuple of (coefficient, monomial), monomial a tuple of
    (flag, vector) with flag CREATE for psi*, ANNIHILATE for psi.
    """

    terms: tuple

    # construction -----------------------------------------------------------

    @staticmethod
    def unit():
        return AlgebraElement(((1.0 + 0.0j, ()),))

    @staticmethod
    def zero():
        return AlgebraElement(())

    @staticmethod
    def psi(v):
        return AlgebraElement(((1.0 + 0.0j, ((ANNIHILATE, v),)),))

    @staticmethod
    def psi_star(v):
        return AlgebraElement(((1.0 + 0.0j, ((CREATE, v),)),))

    # algebra ------------------------------------------------------------------

    def __add__(self, other):
        return AlgebraElement(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, c):
        return AlgebraElement(tuple((c * coeff, mono) for coeff, mono in self.terms))

    def __rmul__(self, c):
        return self.scaled(c)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scaled(other)
        out = []
        for c1, m1 in self.terms:
            for c2, m2 in other.terms:
                out.append((c1 * c2, m1 + m2))
        return AlgebraElement(tuple(out))

    def adjoint(self):
        out = []
        for coeff, mono in self.terms:
            new = tuple((not flag, v) for flag, v in reversed(mono))
            out.append((np.conj(coeff), new))
        return AlgebraElement(tuple(out))

    def power(self, n):
        out = AlgebraElement.unit()
        for _ in range(n):
            out = out * self
        return out

    # structure ------------------------------------------------------------------

    def max_degree(self):
        return max((len(m) for _, m in self.terms), default=0)

    def degrees(self):
        return sorted({len(m) for _, m in self.terms})

    def is_homogeneous_parity(self):
        pars = {len(m) % 2 for _, m in self.terms}
        return len(pars) <= 1

    def parity(self):
        """0 for even, 1 for odd; None for mixed."""
        pars = {len(m) % 2 for _, m in self.terms}
        if not pars:
            return 0
        return pars.pop() if len(pars) == 1 else None

    def map_vectors(self, u, isometric=False, tol=1e-8):
        """Replace every monomial vector f by u(f); implements the free and
        wave quantum morphisms and the conditional expectation."""
        out = []
        for coeff, mono in self.terms:
            new = []
            for flag, v in mono:
                w = u(v)
                if isometric:
                    nv, nw = v.norm(), w.norm()
                    if abs(nv - nw) > tol * max(1.0, nv):
                        raise DomainError(
                            f"map is not isometric on a monomial vector: "
                            f"|f| = {nv:.8g} -> {nw:.8g}")
                new.append((flag, w))
            out.append((coeff, tuple(new)))
        return AlgebraElement(tuple(out))

    def normal_order(self):
        """Rewrite with creators left of annihilators via the CAR."""
        work = list(self.terms)
        done = []
        while work:
            coeff, mono = work.pop()
            idx = _first_disorder(mono)
            if idx is None:
                done.append((coeff, mono))
                continue
            f = mono[idx][1]
            g = mono[idx + 1][1]
            rest = mono[:idx] + mono[idx + 2:]
            work.append((coeff * f.inner(g), rest))
            swapped = (mono[:idx] + ((CREATE, g), (ANNIHILATE, f))
                       + mono[idx + 2:])
            work.append((-coeff, swapped))
        return AlgebraElement(tuple(done))


def _first_disorder(mono):
    for i in range(len(mono) - 1):
        if mono[i][0] == ANNIHILATE and mono[i + 1][0] == CREATE:
            return i
    return None


def element_product(a, b):
    return a * b


def element_adjoint(a):
    return a.adjoint()


def normal_order(a):
    return a.normal_order()


def apply_one_particle_map(a, u, isometric=False, tol=1e-8):
    return a.map_vectors(u, isometric=isometric, tol=tol)


# -- quasi-free states ----------------------------------------------------------------


class MatrixCovariance:
    """Covariance c on an ArrayVector space: pair(f, g) = (g | c f)."""

    def __init__(self, c, check=True, tol=1e-10):
        c = np.asarray(c, dtype=complex)
        if check:
            if np.max(np.abs(c - c.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(c))):
                raise DomainError("covariance must be Hermitian")
            ev = np.linalg.eigvalsh(c)
            if ev.min() < -tol or ev.max() > 1 + tol:
                raise DomainError(
                    f"covariance eigenvalues [{ev.min():.3g}, {ev.max():.3g}] "
                    "violate 0 <= c <= 1")
        self.c = c

    def pair(self, f, g) -> complex:
        return complex(np.vdot(g.data, self.c @ f.data))


class CallableCovariance:
    """Covariance given as pair(f, g) = omega(psi*(f) psi(g)) directly."""

    def __init__(self, pair_fn):
        self._fn = pair_fn

    def pair(self, f, g) -> complex:
        return complex(self._fn(f, g))


def quasifree_expectation(cov, a: AlgebraElement) -> complex:
    """Gauge-invariant Wick evaluation; see module docstring for the sign."""
    total = 0.0 + 0.0j
    for coeff, mono in a.normal_order().terms:
        if not mono:
            total += coeff
            continue
        creators = [v for flag, v in mono if flag == CREATE]
        annihils = [v for flag, v in mono if flag == ANNIHILATE]
        n = len(creators)
        if n != len(annihils):
            continue
        M = np.array([[cov.pair(f, g) for g in annihils] for f in creators])
        sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
        total += coeff * sign * np.linalg.det(M)
    return total


def covariance_transport(cov: MatrixCovariance, u_matrix) -> MatrixCovariance:
    """Covariance of omega . tau_u^{-1}: c -> u c u*."""
    u = np.asarray(u_matrix, dtype=complex)
    return MatrixCovariance(u @ cov.c @ u.conj().T, check=False)


# -- Fock representation ----------------------------------------------------------------


def _jw_matrices(n):
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # sm |1> = |0>
    Z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for j in range(n):
        m = np.array([[1.0]])
        for k in range(n):
            if k < j:
                m = np.kron(m, Z)
            elif k == j:
                m = np.kron(m, sm)
            else:
                m = np.kron(m, eye)
        ops.append(m.astype(complex))
    return ops


class FockRep:
    """Dense 2^n Fock representation over an orthonormal mode basis."""

    def __init__(self, mode_basis, orthonorm_tol=1e-10):
        self.basis = list(mode_basis)
        n = len(self.basis)
        gram = np.array([[b1.inner(b2) for b2 in self.basis] for b1 in self.basis])
        if np.max(np.abs(gram - np.eye(n))) > orthonorm_tol:
            raise DomainError("mode basis is not orthonormal")
        self.n_modes = n
        self.dim = 2 ** n
        self._a = _jw_matrices(n)
        self.parity = np.diag([(-1.0) ** bin(i).count("1")
                               for i in range(self.dim)]).astype(complex)
        self.identity = np.eye(self.dim, dtype=complex)
        self.vacuum = np.zeros(self.dim, dtype=complex)
        self.vacuum[0] = 1.0

    def annihilator(self, j):
        return self._a[j]

    def creator(self, j):
        return self._a[j].conj().T

    def coords(self, v):
        """Mode coordinates and the squared norm lost outside the span."""
        beta = np.array([b.inner(v) for b in self.basis])
        loss = v.norm() ** 2 - float(np.sum(np.abs(beta) ** 2))
        return beta, max(loss, 0.0)

    def field(self, v, loss_tol=None):
        """Matrix of psi(v) = sum conj(beta_j) a_j."""
        beta, loss = self.coords(v)
        if loss_tol is not None and loss > loss_tol:
            raise ModeBasisError(
                f"vector sticks out of the mode basis (lost norm^2 {loss:.3g})",
                lost_norm=loss)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for bj, aj in zip(beta, self._a):
            if bj != 0:
                out += np.conj(bj) * aj
        return out, loss

    def represent(self, a: AlgebraElement, loss_tol=None):
        """Matrix image of a symbolic element plus the worst projection loss."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        worst = 0.0
        for coeff, mono in a.terms:
            m = self.identity
            for flag, v in mono:
                fld, loss = self.field(v, loss_tol=loss_tol)
                worst = max(worst, loss)
                m = m @ (fld.conj().T if flag == CREATE else fld)
            out += coeff * m
        return out, worst

    def dgamma(self, X):
        """Second quantization sum X_ij a*_i a_j of a mode-space matrix."""
        X = np.asarray(X, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                if X[i, j] != 0:
                    out += X[i, j] * (self.creator(i) @ self.annihilator(j))
        return out

    def number_operator(self):
        return self.dgamma(np.eye(self.n_modes))

    def vacuum_vector(self, b_1p):
        """GNS vector of the quasi-free vacuum with covariance 1_{R+}(b):
        the determinant state filling the positive-energy modes."""
        vals, vecs = np.linalg.eigh(np.asarray(b_1p, complex))
        v = self.vacuum.copy()
        for E, col in zip(vals, vecs.T):
            if E > 0:
                cr = np.zeros((self.dim, self.dim), dtype=complex)
                for cj, aj in zip(col, self._a):
                    cr += cj * aj.conj().T
                v = cr @ v
        n = np.linalg.norm(v)
        if n < 1e-12:
            raise DomainError("degenerate filling (zero mode in b?)")
        return v / n

    def charge(self, b_1p):
        """Charge of the energy-split representation: generator of the
        gauge rotation psi -> psi(e^{i theta} .), normal-ordered so the
        vacuum vector (positive modes filled) has charge zero.  This is the
        Jordan-Wigner realization of dGamma(sgn b) on the split space."""
        vals = np.linalg.eigvalsh(np.asarray(b_1p, complex))
        if np.min(np.abs(vals)) < 1e-12:
            raise DomainError("one-particle energy matrix must be nonsingular")
        n_pos = int(np.sum(vals > 0))
        return self.number_operator() - n_pos * self.identity

    def hamiltonian_h0(self, b_1p):
        """Excitation energy dGamma(|b|) of the energy-split representation:
        normal-ordered so H0 >= 0 with the filled-positive-mode vacuum as
        its zero-energy ground state and [H0, charge] = 0.

        Per mode of energy E: |E| * (1 - n) for E > 0 (holes in the filling
        cost |E|), |E| * n for E < 0."""
        vals, vecs = np.linalg.eigh(np.asarray(b_1p, complex))
        if np.min(np.abs(vals)) < 1e-12:
            raise DomainError("one-particle energy matrix must be nonsingular")
        # dGamma(-b) + sum_{E>0} E  ==  sum_+ |E|(1-n) + sum_- |E| n
        A = (vecs * (-vals)) @ vecs.conj().T
        const = float(np.sum(vals[vals > 0]))
        return self.dgamma(A) + const * self.identity

    def density_matrix(self, cov: MatrixCovariance):
        """Gauge-invariant quasi-free density matrix with the given mode
        covariance: product over covariance eigenmodes of
        nu N + (1 - nu)(1 - N)."""
        vals, vecs = np.linalg.eigh(cov.c)
        rho = self.identity.copy()
        for nu, col in zip(vals, vecs.T):
            b_op = np.zeros((self.dim, self.dim), dtype=complex)
            for cj, aj in zip(col, self._a):
                b_op += np.conj(cj) * aj
            N = b_op.conj().T @ b_op
            nu = min(max(float(nu), 0.0), 1.0)
            rho = rho @ (nu * N + (1.0 - nu) * (self.identity - N))
        return rho


def gibbs_covariance(h, beta):
    """Covariance of rho ~ exp(-beta dGamma(h)): c = (1 + e^{beta h})^{-1}."""
    vals, vecs = np.linalg.eigh(np.asarray(h, complex))
    occ = np.empty_like(vals)
    pos = vals >= 0
    occ[pos] = np.exp(-beta * vals[pos]) / (1.0 + np.exp(-beta * vals[pos]))
    occ[~pos] = 1.0 / (1.0 + np.exp(beta * vals[~pos]))
    return MatrixCovariance((vecs * occ) @ vecs.conj().T, check=False)


def gibbs_density_matrix(rep: FockRep, h, beta):
    """exp(-beta dGamma(h))/Z as an exact 2^n matrix (oracle)."""
    from scipy.linalg import expm
    H = rep.dgamma(h)
    rho = expm(-beta * H)
    return rho / np.trace(rho).real


# -- Z2-graded tensor product (fermionic exponential law) -----------------------------


@dataclass(frozen=True)
class GradedPairElement:
    """Element of CAR(h1) graded-tensor CAR(h2): sum of c * (m1 (x) m2)."""

    terms: tuple

    def __mul__(self, other):
        out = []
        for c1, a1, a2 in self.terms:
            for c2, b1, b2 in other.terms:
                sign = -1.0 if (len(a2) * len(b1)) % 2 else 1.0
                out.append((sign * c1 * c2, a1 + b1, a2 + b2))
        return GradedPairElement(tuple(out))

    def __add__(self, other):
        return GradedPairElement(self.terms + other.terms)

    def adjoint(self):
        out = []
        for c, m1, m2 in self.terms:
            sign = -1.0 if (len(m1) * len(m2)) % 2 else 1.0
            r1 = tuple((not f, v) for f, v in reversed(m1))
            r2 = tuple((not f, v) for f, v in reversed(m2))
            out.append((sign * np.conj(c), r1, r2))
        return GradedPairElement(tuple(out))

    @staticmethod
    def unit():
        return GradedPairElement(((1.0 + 0.0j, (), ()),))


def exponential_law_split(a: AlgebraElement, proj1, proj2,
                          ortho_tol=1e-10) -> GradedPairElement:
    """I: CAR(h1 + h2) -> CAR(h1) (x) CAR(h2), with
    psi(h) -> psi(pi1 h) (x) 1 + 1 (x) psi(pi2 h) and Koszul signs."""
    for _, mono in a.terms:
        for _, v in mono:
            p1, p2 = proj1(v), proj2(v)
            if abs(p1.inner(p2)) > ortho_tol * max(1.0, v.norm() ** 2):
                raise DomainError("split subspaces are not orthogonal")
            resid = v.norm() ** 2 - p1.norm() ** 2 - p2.norm() ** 2
            if abs(resid) > ortho_tol * max(1.0, v.norm() ** 2):
                raise DomainError("split does not resolve the vector")
    out = GradedPairElement(())
    for coeff, mono in a.terms:
        term = GradedPairElement(((coeff, (), ()),))
        for flag, v in mono:
            left = GradedPairElement((((1.0 + 0.0j), ((flag, proj1(v)),), ()),))
            right = GradedPairElement((((1.0 + 0.0j), (), ((flag, proj2(v)),)),))
            term = term * (left + right)
        out = out + term
    return out


def exponential_law_unsplit(g: GradedPairElement) -> AlgebraElement:
    """I^{-1}: multiply the factors back inside CAR(h1 + h2)."""
    out = []
    for c, m1, m2 in g.terms:
        out.append((c, m1 + m2))
    return AlgebraElement(tuple(out))


def graded_state_tensor(omega1, omega2, g: GradedPairElement) -> complex:
    """(omega1 (x) omega2)(I(a)); omega_i evaluate AlgebraElements."""
    total = 0.0 + 0.0j
    for c, m1, m2 in g.terms:
        v1 = omega1(AlgebraElement(((1.0 + 0.0j, m1),)))
        v2 = omega2(AlgebraElement(((1.0 + 0.0j, m2),)))
        total += c * v1 * v2
    return total


def check_even_state(omega, vectors, rng, n_samples=8, tol=1e-12):
    """Evenness probe: omega must vanish on sampled odd monomials."""
    for _ in range(n_samples):
        deg = rng.choice([1, 3])
        mono = []
        for _ in range(deg):
            v = vectors[rng.integers(len(vectors))]
            mono.append((bool(rng.integers(2)), v))
        val = omega(AlgebraElement(((1.0 + 0.0j, tuple(mono)),)))
        if abs(val) > tol:
            raise DomainError(f"state is not even (odd moment {val:.3g})")


def random_element(rng, vectors, max_degree=3, n_terms=4) -> AlgebraElement:
    terms = []
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        mono = tuple((bool(rng.integers(2)), vectors[rng.integers(len(vectors))])
                     for _ in range(deg))
        coeff = complex(rng.normal(), rng.normal())
        terms.append((coeff, mono))
    return AlgebraElement(tuple(terms))
