"""Reaction terms as substitution operators on grid vectors.

Each nonlinearity acts entrywise (the Fisher weight adds x-dependence) on the
block-wise component layout and reports, per order interval: a Lipschitz
bound, a sup bound of its image, and the smallest shift mu >= 0 making
F + mu*id order-increasing on the interval.  All three come from closed-form
derivatives of the presets; random sampling only ever falsifies them in the
test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .order import GridFunction, OrderInterval


class Nonlinearity:
    """Base substitution operator; subclasses fill in the closed forms."""

    name: str = "abstract"
    components: int = 1

    def eval_values(self, values: np.ndarray) -> np.ndarray:
        """Apply pointwise to (..., dim) arrays in blocked component layout."""
        raise NotImplementedError

    def jacobian_matrix(self, values: np.ndarray) -> np.ndarray:
        """Dense Jacobian at a single state, for Newton cross-checks."""
        raise NotImplementedError

    def lipschitz_on(self, interval: OrderInterval) -> float:
        raise NotImplementedError

    def shift_on(self, interval: OrderInterval) -> float:
        """Smallest mu >= 0 with F + mu*id increasing on the interval."""
        raise NotImplementedError

    def sup_bound_on(self, interval: OrderInterval) -> float:
        raise NotImplementedError

    def __call__(self, u: GridFunction) -> GridFunction:
        if u.components != self.components:
            raise DimensionMismatchError(
                f"{self.name} expects {self.components} components, got {u.components}"
            )
        return GridFunction(self.eval_values(u.values), self.components)


def quasi_increasing_shift(f: Nonlinearity, interval: OrderInterval) -> float:
    """Shift certificate for the interval; raises if none can be certified."""
    if interval.components != f.components:
        raise DimensionMismatchError("interval and nonlinearity component mismatch")
    mu = f.shift_on(interval)
    if not np.isfinite(mu) or mu < 0:
        raise ValidationError(
            f"{f.name}: no finite quasi-increasing shift on this interval"
        )
    return mu


class _Logistic(Nonlinearity):
    """f(xi) = a*xi - b*xi^2."""

    def __init__(self, a: float, b: float):
        if a <= 0 or b <= 0:
            raise ValidationError("logistic needs a > 0 and b > 0")
        self.a, self.b = float(a), float(b)
        self.name = "logistic"

    def eval_values(self, values):
        return self.a * values - self.b * values * values

    def jacobian_matrix(self, values):
        return np.diag(self.a - 2.0 * self.b * values)

    def lipschitz_on(self, interval):
        lo, hi = interval.component_range(0)
        return max(abs(self.a - 2 * self.b * lo), abs(self.a - 2 * self.b * hi))

    def shift_on(self, interval):
        _, hi = interval.component_range(0)
        return max(0.0, 2 * self.b * hi - self.a)

    def sup_bound_on(self, interval):
        lo, hi = interval.component_range(0)
        cands = [lo, hi]
        vertex = self.a / (2 * self.b)
        if lo <= vertex <= hi:
            cands.append(vertex)
        return max(abs(self.a * x - self.b * x * x) for x in cands)


def logistic(a: float, b: float) -> Nonlinearity:
    return _Logistic(a, b)


def _fisher_h(alpha: float, xi):
    return xi * (1.0 - xi) * (alpha * (1.0 - xi) + (1.0 - alpha) * xi)


def _fisher_h_prime(alpha: float, xi):
    # h(xi) = alpha*xi + (1-3*alpha)*xi^2 - (1-2*alpha)*xi^3
    return alpha + 2.0 * (1.0 - 3.0 * alpha) * xi - 3.0 * (1.0 - 2.0 * alpha) * xi * xi


def _quadratic_range(alpha: float, lo: float, hi: float) -> tuple[float, float]:
    """Range of h' over [lo, hi]."""
    cands = [lo, hi]
    if alpha != 0.5:  # h'' root
        xi = (1.0 - 3.0 * alpha) / (3.0 * (1.0 - 2.0 * alpha))
        if lo <= xi <= hi:
            cands.append(xi)
    vals = [_fisher_h_prime(alpha, x) for x in cands]
    return min(vals), max(vals)


class _Fisher(Nonlinearity):
    """F(u) = m(x) * h(u) with h(xi) = xi(1-xi)(alpha(1-xi) + (1-alpha)xi)."""

    def __init__(self, m: np.ndarray, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ValidationError("fisher needs alpha in (0, 1)")
        self.m = np.asarray(m.values if isinstance(m, GridFunction) else m, dtype=float)
        self.alpha = float(alpha)
        self.name = "fisher"

    def eval_values(self, values):
        if values.shape[-1] != self.m.size:
            raise DimensionMismatchError("state length does not match the weight m")
        return self.m * _fisher_h(self.alpha, values)

    def jacobian_matrix(self, values):
        return np.diag(self.m * _fisher_h_prime(self.alpha, values))

    def lipschitz_on(self, interval):
        lo, hi = interval.component_range(0)
        dmin, dmax = _quadratic_range(self.alpha, lo, hi)
        return float(np.max(np.abs(self.m))) * max(abs(dmin), abs(dmax))

    def shift_on(self, interval):
        lo, hi = interval.component_range(0)
        dmin, dmax = _quadratic_range(self.alpha, lo, hi)
        worst = np.where(self.m >= 0, self.m * dmin, self.m * dmax)
        return max(0.0, -float(np.min(worst)))

    def sup_bound_on(self, interval):
        lo, hi = interval.component_range(0)
        cands = [lo, hi]
        # critical points of h inside the range
        a3 = -3.0 * (1.0 - 2.0 * self.alpha)
        a2 = 2.0 * (1.0 - 3.0 * self.alpha)
        for root in np.roots([a3, a2, self.alpha]) if a3 != 0 else np.roots([a2, self.alpha]):
            if np.isreal(root) and lo <= root.real <= hi:
                cands.append(float(root.real))
        hmax = max(abs(_fisher_h(self.alpha, x)) for x in cands)
        return float(np.max(np.abs(self.m))) * hmax


def fisher(m, alpha: float) -> Nonlinearity:
    return _Fisher(m, alpha)


class _Competition(Nonlinearity):
    """Two-species competition kinetics, increasing on boxes in the flipped
    cone once shifted."""

    components = 2

    def __init__(self, a1, a2, b11, b12, b21, b22):
        params = dict(a1=a1, a2=a2, b11=b11, b12=b12, b21=b21, b22=b22)
        if any(v <= 0 for v in params.values()):
            raise ValidationError("competition needs all rates > 0")
        self.__dict__.update({k: float(v) for k, v in params.items()})
        self.name = "competition"

    def _split(self, values):
        n = values.shape[-1] // 2
        return values[..., :n], values[..., n:]

    def eval_values(self, values):
        u1, u2 = self._split(values)
        f1 = self.a1 * u1 - self.b11 * u1 * u1 - self.b12 * u1 * u2
        f2 = self.a2 * u2 - self.b21 * u1 * u2 - self.b22 * u2 * u2
        return np.concatenate([f1, f2], axis=-1)

    def jacobian_matrix(self, values):
        u1, u2 = self._split(values)
        d11 = self.a1 - 2 * self.b11 * u1 - self.b12 * u2
        d12 = -self.b12 * u1
        d21 = -self.b21 * u2
        d22 = self.a2 - self.b21 * u1 - 2 * self.b22 * u2
        return np.block(
            [[np.diag(d11), np.diag(d12)], [np.diag(d21), np.diag(d22)]]
        )

    def _box(self, interval):
        return interval.component_range(0), interval.component_range(1)

    def shift_on(self, interval):
        (_, hi1), (_, hi2) = self._box(interval)
        mu1 = 2 * self.b11 * hi1 + self.b12 * hi2 - self.a1
        mu2 = self.b21 * hi1 + 2 * self.b22 * hi2 - self.a2
        return max(0.0, mu1, mu2)

    def lipschitz_on(self, interval):
        (lo1, hi1), (lo2, hi2) = self._box(interval)
        worst = 0.0
        for u1 in (lo1, hi1):
            for u2 in (lo2, hi2):
                r1 = abs(self.a1 - 2 * self.b11 * u1 - self.b12 * u2) + self.b12 * abs(u1)
                r2 = self.b21 * abs(u2) + abs(self.a2 - self.b21 * u1 - 2 * self.b22 * u2)
                worst = max(worst, r1, r2)
        return worst

    def sup_bound_on(self, interval):
        (lo1, hi1), (lo2, hi2) = self._box(interval)
        worst = 0.0
        for u2 in (lo2, hi2):
            cands = [lo1, hi1]
            vertex = (self.a1 - self.b12 * u2) / (2 * self.b11)
            if lo1 <= vertex <= hi1:
                cands.append(vertex)
            worst = max(
                worst,
                max(abs(u1 * (self.a1 - self.b11 * u1 - self.b12 * u2)) for u1 in cands),
            )
        for u1 in (lo1, hi1):
            cands = [lo2, hi2]
            vertex = (self.a2 - self.b21 * u1) / (2 * self.b22)
            if lo2 <= vertex <= hi2:
                cands.append(vertex)
            worst = max(
                worst,
                max(abs(u2 * (self.a2 - self.b21 * u1 - self.b22 * u2)) for u2 in cands),
            )
        return worst


def competition(a1, a2, b11, b12, b21, b22) -> Nonlinearity:
    return _Competition(a1, a2, b11, b12, b21, b22)


class _SignedSqrt(Nonlinearity):
    """f(xi) = sign(xi) sqrt(|xi|): strictly increasing, not Lipschitz at 0."""

    name = "signed_sqrt"

    def eval_values(self, values):
        return np.sign(values) * np.sqrt(np.abs(values))

    def jacobian_matrix(self, values):
        with np.errstate(divide="ignore"):
            return np.diag(0.5 / np.sqrt(np.abs(values)))

    def lipschitz_on(self, interval):
        lo, hi = interval.component_range(0)
        if lo <= 0.0 <= hi:
            return math.inf
        return 0.5 / math.sqrt(min(abs(lo), abs(hi)))

    def shift_on(self, interval):
        return 0.0

    def sup_bound_on(self, interval):
        lo, hi = interval.component_range(0)
        return math.sqrt(max(abs(lo), abs(hi)))


def signed_sqrt() -> Nonlinearity:
    return _SignedSqrt()


# Preset registry for config-driven construction.
REGISTRY = {
    "logistic": {"factory": logistic, "params": ("a", "b")},
    "fisher": {"factory": fisher, "params": ("m", "alpha")},
    "competition": {"factory": competition, "params": ("a1", "a2", "b11", "b12", "b21", "b22")},
    "signed_sqrt": {"factory": signed_sqrt, "params": ()},
}
