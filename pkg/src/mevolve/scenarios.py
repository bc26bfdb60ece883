"""Certified scenario constructions for the bundled applications.

Each builder assembles generator + reaction term + an ordered pair of
sub/super-solutions, verifies the defining inequalities numerically
(certificate-driven: the closed-form epsilon arguments only seed a dyadic
sweep), and records margins and eigenvalue data.  A scenario that reaches
the engine has already passed its certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import generators
from .errors import NumericalError, ValidationError
from .generators import GeneratorSpec, add_potential, block_generator, principal_eig
from .mild import ProblemSpec
from .monotone import asymptotic_equilibria, newton_equilibrium
from .nonlin import Nonlinearity, competition, fisher, logistic, signed_sqrt
from .order import (
    TOL_ORDER,
    ConeSpec,
    GridFunction,
    OrderInterval,
    STANDARD_CONE,
    leq,
    monotone_norm,
)

_EPS = np.finfo(float).eps


def _cert_slack(a: GeneratorSpec, u: GridFunction, f_values: np.ndarray) -> float:
    """Round-off floor for evaluating A u - F(u) entrywise."""
    scale = float(np.max(np.sum(np.abs(a.matrix), axis=1))) * monotone_norm(u)
    scale = max(scale, float(np.max(np.abs(f_values))), 1.0)
    return max(TOL_ORDER, 32.0 * _EPS * scale)


def subsolution_margin(
    a: GeneratorSpec, f: Nonlinearity, u: GridFunction, cone: ConeSpec
) -> float:
    """min of sign*(F(u) - A u); >= 0 means A u <= F(u) in the cone order."""
    svec = cone.sign_vector(u.n_points)
    fv = f.eval_values(u.values)
    return float(np.min(svec * (fv - a.matrix @ u.values)))


def supersolution_margin(
    a: GeneratorSpec, f: Nonlinearity, u: GridFunction, cone: ConeSpec
) -> float:
    svec = cone.sign_vector(u.n_points)
    fv = f.eval_values(u.values)
    return float(np.min(svec * (a.matrix @ u.values - fv)))


def verify_subsolution(
    a: GeneratorSpec,
    f: Nonlinearity,
    u: GridFunction,
    cone: ConeSpec = STANDARD_CONE,
    tol: float | None = None,
) -> bool:
    """Entrywise strong form of the weak sub-solution inequality."""
    if tol is None:
        tol = _cert_slack(a, u, f.eval_values(u.values))
    return subsolution_margin(a, f, u, cone) >= -tol


def verify_supersolution(
    a: GeneratorSpec,
    f: Nonlinearity,
    u: GridFunction,
    cone: ConeSpec = STANDARD_CONE,
    tol: float | None = None,
) -> bool:
    if tol is None:
        tol = _cert_slack(a, u, f.eval_values(u.values))
    return supersolution_margin(a, f, u, cone) >= -tol


@dataclass
class ScenarioSpec:
    name: str
    A: GeneratorSpec
    F: Nonlinearity
    interval: OrderInterval
    eig_data: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    alt_intervals: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict, repr=False)

    @property
    def cone(self) -> ConeSpec:
        return self.interval.cone

    def problem(self, horizon: float = 1.0, dt: float = 1e-2,
                interval: OrderInterval | None = None) -> ProblemSpec:
        return ProblemSpec(
            A=self.A, F=self.F,
            interval=self.interval if interval is None else interval,
            horizon=horizon, dt=dt,
        )

    def _certify(self):
        lower_ok = verify_subsolution(self.A, self.F, self.interval.lower, self.cone)
        upper_ok = verify_supersolution(self.A, self.F, self.interval.upper, self.cone)
        self.certificates["sub_margin"] = subsolution_margin(
            self.A, self.F, self.interval.lower, self.cone)
        self.certificates["super_margin"] = supersolution_margin(
            self.A, self.F, self.interval.upper, self.cone)
        if not (lower_ok and upper_ok):
            raise ValidationError(
                f"{self.name}: certificate failure "
                f"(sub margin {self.certificates['sub_margin']:.3e}, "
                f"super margin {self.certificates['super_margin']:.3e})"
            )


def _dyadic_sweep(seed: float, accept, max_halvings: int = 60) -> float | None:
    """Largest value of the form seed/2^j accepted by the predicate.

    Tries strict certificates first (margin >= 0 exactly, so no deficit leaks
    into the engine's sandwich), then falls back to the floating-point slack.
    """
    for tol in (0.0, None):
        eps = seed
        for _ in range(max_halvings):
            if eps > 0 and accept(eps, tol):
                return eps
            eps *= 0.5
    return None


# -- logistic ------------------------------------------------------------------


def build_logistic(a_gen: GeneratorSpec, a: float, b: float) -> ScenarioSpec:
    """Interval [eps*phi0, M*1] when a > lambda_1, else the [0, M*1] box
    whose predicted extremal equilibrium is 0."""
    if a <= 0 or b <= 0:
        raise ValidationError("logistic scenario needs a, b > 0")
    pair = principal_eig(a_gen)
    lam1, phi0 = pair.lambda1, pair.phi0
    f = logistic(a, b)
    n = a_gen.dim
    eig_data = {"lambda1": lam1, "phi0": phi0.values}
    ones = GridFunction(np.ones(n))

    if a > lam1:
        seed = (a - lam1) / (b * float(np.max(phi0.values)))
        eps = _dyadic_sweep(
            seed,
            lambda e, tol: verify_subsolution(
                a_gen, f, GridFunction(e * phi0.values), tol=tol
            ),
        )
        if eps is None:
            raise ValidationError("logistic sub-solution certificate failed at all eps")
        m_const = max(2.0 * a / b, 2.0 * eps * float(np.max(phi0.values)))
        for _ in range(8):
            upper = GridFunction(m_const * np.ones(n))
            if verify_supersolution(a_gen, f, upper):
                break
            m_const *= 2.0
        else:
            raise ValidationError("logistic super-solution certificate failed")
        lower = GridFunction(eps * phi0.values)
        interval = OrderInterval(lower, upper)
        scen = ScenarioSpec("logistic", a_gen, f, interval, eig_data=eig_data)
        scen.certificates.update({"eps": eps, "M": m_const})
    else:
        m_const = max(2.0 * a / b, 1.0)
        interval = OrderInterval(GridFunction(np.zeros(n)), GridFunction(m_const * np.ones(n)))
        scen = ScenarioSpec("logistic", a_gen, f, interval, eig_data=eig_data)
        scen.certificates.update({"eps": 0.0, "M": m_const})
        scen.predicted["equilibrium"] = np.zeros(n)
        scen.notes.append("a <= lambda_1: only the zero equilibrium exists")

    if monotone_norm(a_gen.matrix @ np.ones(n)) <= TOL_ORDER * monotone_norm(a_gen.matrix) and a > lam1:
        scen.predicted["equilibrium"] = (a / b) * np.ones(n)
        scen.notes.append("row sums vanish: the constant a/b is the equilibrium")
    scen._certify()
    return scen


# -- competition ----------------------------------------------------------------


FLIPPED_CONE = ConeSpec((1, -1))


def _semi_trivial(a_gen: GeneratorSpec, a: float, b: float) -> tuple[GridFunction, float]:
    """Single-species logistic steady state via the engine plus Newton polish."""
    scen = build_logistic(a_gen, a, b)
    if "equilibrium" in scen.predicted:
        guess = scen.predicted["equilibrium"]
    else:
        result = asymptotic_equilibria(
            scen.problem(horizon=2.0, dt=0.05),
            tol=1e-8, tol_eq=1e-7, tol_res=1e-9,
        )
        guess = result.u_upper_star.values
    v, res, ok = newton_equilibrium(
        ProblemSpec(a_gen, scen.F, scen.interval), guess, tol_res=1e-10
    )
    if not ok:
        raise NumericalError("semi-trivial logistic state did not polish")
    return GridFunction(np.maximum(v, 0.0)), res


def build_competition(
    a1_gen: GeneratorSpec, a2_gen: GeneratorSpec,
    a1: float, a2: float, b11: float, b12: float, b21: float, b22: float,
) -> ScenarioSpec:
    """Coexistence interval in the flipped product cone when the principal-
    eigenvalue gates hold, else the well-posedness box."""
    f = competition(a1, a2, b11, b12, b21, b22)
    n = a1_gen.dim
    if a2_gen.dim != n:
        raise ValidationError("both species need the same mesh")
    sys_gen = block_generator([a1_gen, a2_gen])
    lam_a1 = principal_eig(a1_gen).lambda1
    lam_a2 = principal_eig(a2_gen).lambda1
    eig_data = {"lambda1_A1": lam_a1, "lambda1_A2": lam_a2}
    necessary = a1 > lam_a1 and a2 > lam_a2

    w1 = GridFunction(np.zeros(n))
    w2 = GridFunction(np.zeros(n))
    res1 = res2 = 0.0
    if a1 > lam_a1:
        w1, res1 = _semi_trivial(a1_gen, a1, b11)
    if a2 > lam_a2:
        w2, res2 = _semi_trivial(a2_gen, a2, b22)
    eig_data["w_residuals"] = (res1, res2)

    coexistence = False
    if necessary and monotone_norm(w1) > 0 and monotone_norm(w2) > 0:
        shifted1 = add_potential(a1_gen, b12 * w2.values)
        shifted2 = add_potential(a2_gen, b21 * w1.values)
        pair1, pair2 = principal_eig(shifted1), principal_eig(shifted2)
        eig_data["lambda1_A1_plus_b12w2"] = pair1.lambda1
        eig_data["lambda1_A2_plus_b21w1"] = pair2.lambda1
        coexistence = a1 > pair1.lambda1 and a2 > pair2.lambda1

    if coexistence:
        v1, v2 = pair1.phi0, pair2.phi0
        seed = min(
            (a1 - pair1.lambda1) / (b11 * float(np.max(v1.values))),
            (a2 - pair2.lambda1) / (b22 * float(np.max(v2.values))),
        )

        def accept(eps, tol):
            lower = GridFunction(np.concatenate([eps * v1.values, w2.values]), 2)
            upper = GridFunction(np.concatenate([w1.values, eps * v2.values]), 2)
            return (
                leq(lower, upper, FLIPPED_CONE)
                and verify_subsolution(sys_gen, f, lower, FLIPPED_CONE, tol=tol)
                and verify_supersolution(sys_gen, f, upper, FLIPPED_CONE, tol=tol)
            )

        eps = _dyadic_sweep(seed, accept)
        if eps is None:
            raise ValidationError("coexistence certificates failed at all eps")
        lower = GridFunction(np.concatenate([eps * v1.values, w2.values]), 2)
        upper = GridFunction(np.concatenate([w1.values, eps * v2.values]), 2)
        interval = OrderInterval(lower, upper, FLIPPED_CONE)
        scen = ScenarioSpec("competition", sys_gen, f, interval, eig_data=eig_data)
        scen.certificates.update({"eps": eps, "coexistence": True})
        scen.predicted["w1"] = w1.values
        scen.predicted["w2"] = w2.values
    else:
        m_const = 2.0 * max(a1 / b11, a2 / b22)
        lower = GridFunction(np.concatenate([np.zeros(n), m_const * np.ones(n)]), 2)
        upper = GridFunction(np.concatenate([m_const * np.ones(n), np.zeros(n)]), 2)
        interval = OrderInterval(lower, upper, FLIPPED_CONE)
        scen = ScenarioSpec("competition", sys_gen, f, interval, eig_data=eig_data)
        scen.certificates.update({"M": m_const, "coexistence": False})
        if not necessary:
            scen.notes.append(
                "necessary coexistence condition fails; the engine converges to "
                "states with the corresponding species absent"
            )
    scen._certify()
    return scen


# -- Fisher ----------------------------------------------------------------------


def build_fisher(a_gen: GeneratorSpec, m, alpha: float) -> ScenarioSpec:
    """Always emits the [0, 1] scenario; adds the nontrivial interval
    [eps*phi0, 1 - eps*phi1] when both instability eigenvalues are negative
    and the certificates pass.

    Instability of 0 is gated on lambda_1(A - alpha m) < 0; instability of 1
    on lambda_1(A + (1-alpha) m) < 0 (linearization at u = 1; note the sign).
    """
    m_values = np.asarray(m.values if isinstance(m, GridFunction) else m, dtype=float)
    if m_values.size != a_gen.dim:
        raise ValidationError("weight m must live on the generator's mesh")
    if not generators.check_submarkovian(a_gen):
        raise ValidationError("fisher scenario needs a sub-markovian generator")
    f = fisher(m_values, alpha)
    n = a_gen.dim
    zero = GridFunction(np.zeros(n))
    ones = GridFunction(np.ones(n))
    interval_global = OrderInterval(zero, ones)

    pair0 = principal_eig(add_potential(a_gen, -alpha * m_values))
    pair1 = principal_eig(add_potential(a_gen, (1.0 - alpha) * m_values))
    eig_data = {
        "lambda0": pair0.lambda1, "phi0": pair0.phi0.values,
        "lambda1_tilde": pair1.lambda1, "phi1": pair1.phi0.values,
    }

    nontrivial = None
    eps_used = None
    if pair0.lambda1 < 0 and pair1.lambda1 < 0:

        def accept(eps, tol):
            lower = GridFunction(eps * pair0.phi0.values)
            upper = GridFunction(1.0 - eps * pair1.phi0.values)
            return (
                leq(lower, upper, STANDARD_CONE)
                and float(np.min(upper.values - lower.values)) > 0
                and verify_subsolution(a_gen, f, lower, tol=tol)
                and verify_supersolution(a_gen, f, upper, tol=tol)
            )

        eps_used = _dyadic_sweep(0.5, accept)
        if eps_used is not None:
            nontrivial = OrderInterval(
                GridFunction(eps_used * pair0.phi0.values),
                GridFunction(1.0 - eps_used * pair1.phi0.values),
            )

    scen = ScenarioSpec(
        "fisher", a_gen, f,
        interval=nontrivial if nontrivial is not None else interval_global,
        eig_data=eig_data,
    )
    scen.alt_intervals["global"] = interval_global
    scen.certificates["nontrivial_available"] = nontrivial is not None
    scen.certificates["eps"] = eps_used
    if nontrivial is None:
        scen.notes.append(
            "nontrivial interval unavailable: requires both instability "
            "eigenvalues negative (only possible when m changes sign)"
        )
    scen._certify()
    return scen


# -- scalar non-uniqueness ---------------------------------------------------------


def build_scalar_nonunique(a: float, m_bound: float) -> ScenarioSpec:
    """The scalar square-root example with closed-form extremal branches."""
    if a <= 0:
        raise ValidationError("needs a > 0")
    if m_bound < 1.0 / a**2:
        raise ValidationError(
            f"M = {m_bound} violates the sub/super-solution bound M >= 1/a^2 = {1 / a**2}"
        )
    gen = generators.scalar_generator(a)
    f = signed_sqrt()
    interval = OrderInterval(
        GridFunction(np.array([-m_bound])), GridFunction(np.array([m_bound]))
    )
    scen = ScenarioSpec("scalar-nonunique", gen, f, interval)
    scen.predicted["equilibria"] = [-1.0 / a**2, 0.0, 1.0 / a**2]

    def branch_max(t):
        return (1.0 - np.exp(-0.5 * a * np.asarray(t))) ** 2 / a**2

    # start time fixed by u(0) = M; the adaptive ODE oracle in the tests
    # confirms the 2/a prefactor
    arg = a * math.sqrt(m_bound) - 1.0
    t_m = (2.0 / a) * math.log(arg) if arg > 0 else None

    def envelope_max(t):
        if t_m is None:
            return np.full_like(np.asarray(t, dtype=float), m_bound)
        return (1.0 + np.exp(-0.5 * a * (np.asarray(t) - t_m))) ** 2 / a**2

    scen.oracles.update(
        {
            "u_max": branch_max,
            "u_min": lambda t: -branch_max(t),
            "U_max": envelope_max,
            "U_min": lambda t: -envelope_max(t),
            "t_M": t_m,
            "branch_family": lambda t, t0: np.where(
                np.asarray(t) >= t0, branch_max(np.maximum(np.asarray(t) - t0, 0.0)), 0.0
            ),
        }
    )
    scen._certify()
    return scen


# -- registry ------------------------------------------------------------------


def _generator_from_config(n: int, bc: str, beta=None) -> GeneratorSpec:
    return generators.build_laplacian_1d(n, bc, beta)


def _weight_from_config(m_cfg, a_gen: GeneratorSpec) -> np.ndarray:
    if isinstance(m_cfg, (int, float)):
        return float(m_cfg) * np.ones(a_gen.dim)
    if isinstance(m_cfg, list):
        arr = np.asarray(m_cfg, dtype=float)
        if arr.size != a_gen.dim:
            raise ValidationError("params.m: list length must equal n")
        return arr
    if isinstance(m_cfg, dict) and m_cfg.get("profile") == "sin":
        x = generators.mesh_nodes(a_gen)
        amp = float(m_cfg.get("amplitude", 1.0))
        freq = float(m_cfg.get("frequency", 1.0))
        return amp * np.sin(2.0 * math.pi * freq * x)
    raise ValidationError("params.m must be a number, a list, or a sin profile")


def build_from_config(name: str, params: dict, n: int, bc: str, beta=None) -> ScenarioSpec:
    if name == "logistic":
        gen = _generator_from_config(n, bc, beta)
        return build_logistic(gen, params["a"], params["b"])
    if name == "competition":
        gen1 = _generator_from_config(n, bc, beta)
        gen2 = _generator_from_config(n, bc, beta)
        return build_competition(
            gen1, gen2, params["a1"], params["a2"],
            params["b11"], params["b12"], params["b21"], params["b22"],
        )
    if name == "fisher":
        gen = _generator_from_config(n, bc, beta)
        return build_fisher(gen, _weight_from_config(params["m"], gen), params["alpha"])
    if name == "scalar-nonunique":
        return build_scalar_nonunique(params["a"], params["M"])
    raise ValidationError(f"unknown scenario {name!r}")


SCENARIOS = ("logistic", "competition", "fisher", "scalar-nonunique")
