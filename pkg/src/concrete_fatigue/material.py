"""Uniaxial reduction of the anisotropic fatigue damage model for concrete.

Compressive stress is carried as a positive magnitude ``sbar1 = -sigma_1`` and
the axial strain as a compressive magnitude. With that convention the lateral
strain is non-negative and the pristine response is linear elastic with
``E = mu (3 lambda + 2 mu) / (lambda + mu)`` and ``nu = lambda / (2 (lambda + mu))``.

The functions here are the readable reference; the cycle loops in
``kernels`` inline the same expressions for speed.
"""

from dataclasses import dataclass, replace

from .errors import SingularTangent
from .kernels import KAPPA_FORMS, SCHEMES


@dataclass(frozen=True)
class MaterialParameters:
    """Calibrated constants of the damage model (stresses in MPa).

    ``kappa_form`` selects the bracketing of the damage tangent (see
    :func:`kappa`); ``clamp_yield`` replaces ``f`` by ``max(f, 0)`` in the
    damage law, which switches off growth inside the yield surface.
    """

    lam: float = 12500.0
    mu: float = 18750.0
    g: float = -10.0
    K: float = 0.00485
    C0: float = 0.0
    C1: float = 0.0019
    alpha: float = 2237.5
    beta: float = -2116.5
    n: float = 10.0
    fc: float = 100.0
    kappa_form: str = "tangent"
    clamp_yield: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")
        if not self.K > 0:
            raise ValueError("K must be positive")
        if not self.n >= 1:
            raise ValueError("n must be >= 1")
        if self.g == 0:
            raise ValueError("g must be non-zero")
        if not self.fc > 0:
            raise ValueError("fc must be positive")
        if self.kappa_form not in KAPPA_FORMS:
            raise ValueError(f"kappa_form must be one of {sorted(KAPPA_FORMS)}")

    @property
    def youngs_modulus(self):
        return self.mu * (3 * self.lam + 2 * self.mu) / (self.lam + self.mu)

    @property
    def poisson_ratio(self):
        return self.lam / (2 * (self.lam + self.mu))

    def constants(self):
        """The nine constitutive constants as a float tuple (kernel order)."""
        return (float(self.lam), float(self.mu), float(self.g), float(self.K),
                float(self.C0), float(self.C1), float(self.alpha),
                float(self.beta), float(self.n))

    def as_dict(self):
        return {
            "lambda": self.lam, "mu": self.mu, "g": self.g, "K": self.K,
            "C0": self.C0, "C1": self.C1, "alpha": self.alpha,
            "beta": self.beta, "n": self.n, "fc": self.fc,
            "kappa_form": self.kappa_form, "clamp_yield": self.clamp_yield,
        }

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class UniaxialState:
    omega2: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    sbar1: float = 0.0
    cycles_completed: int = 0


def lateral_denominator(p, omega2):
    e_mod = p.lam + 2 * p.mu
    lw = p.lam + p.alpha * omega2
    return e_mod * (2 * (p.lam + p.mu) + 4 * (p.alpha + p.beta) * omega2) - 2 * lw * lw


def lateral_strain(p, sbar1, omega2):
    """Lateral strain from the zero lateral stress condition."""
    d = lateral_denominator(p, omega2)
    if d <= 0:
        raise SingularTangent(f"lateral stiffness vanished at omega2={omega2!r}", which="D")
    return ((p.lam + p.alpha * omega2) * sbar1 + abs(p.g) * omega2 * (p.lam + 2 * p.mu)) / d


def axial_strain(p, sbar1, eps2, omega2):
    """Axial strain magnitude, ``|eps1| = (sbar1 + 2 (lam + alpha w) eps2) / (lam + 2 mu)``."""
    return (sbar1 + 2 * (p.lam + p.alpha * omega2) * eps2) / (p.lam + 2 * p.mu)


def yield_value(p, eps2, omega2):
    return abs(p.g) * eps2 - (p.C0 + 2 * p.C1 * omega2)


def kappa(p, eps1, eps2, omega2, form=None):
    """Denominator of the damage law.

    ``eps1`` is the compressive magnitude; the expression uses the signed
    axial strain ``-eps1``. Bracketings:

    * ``tangent`` (default): ``(lam+2mu) [2(lam+mu) + 4(alpha+beta)w
      - alpha g/(2C1) (2 eps2 + eps1) - g^2/(2C1)] - 2 (lam + alpha w)^2``,
      the consistency tangent with ``w_dot = |g|/(2 C1) eps2_dot``;
    * ``threshold``: the ``g`` terms sit outside the ``(lam+2mu)`` factor;
    * ``literal``: ``(lam+2mu) 2(lam+mu) + 4(alpha+beta)w - ...`` as printed.
    """
    form = p.kappa_form if form is None else form
    e1 = -eps1
    e_mod = p.lam + 2 * p.mu
    c = p.g / (2 * p.C1)
    lw2 = 2 * (p.lam + p.alpha * omega2) ** 2
    coupling = p.alpha * c * (2 * eps2 + e1)
    if form == "tangent":
        return e_mod * (2 * (p.lam + p.mu) + 4 * (p.alpha + p.beta) * omega2 - coupling - p.g * c) - lw2
    if form == "threshold":
        return e_mod * (2 * (p.lam + p.mu) + 4 * (p.alpha + p.beta) * omega2) - coupling - p.g * c - lw2
    if form == "literal":
        return e_mod * 2 * (p.lam + p.mu) + 4 * (p.alpha + p.beta) * omega2 - coupling - p.g * c - lw2
    raise ValueError(f"unknown kappa form {form!r}")


def damage_rate(p, sbar1, omega2):
    """d(omega2)/d(sbar1) on loading at the equilibrium state ``(sbar1, omega2)``."""
    eps2 = lateral_strain(p, sbar1, omega2)
    eps1 = axial_strain(p, sbar1, eps2, omega2)
    k = kappa(p, eps1, eps2, omega2)
    if k <= 0:
        raise SingularTangent(f"kappa={k!r} at omega2={omega2!r}", which="kappa")
    f = yield_value(p, eps2, omega2)
    if p.clamp_yield:
        f = max(f, 0.0)
    # even n: sub-threshold (f < 0) states still accrue damage on loading
    return abs(p.g) / (2 * p.C1) * (abs(f) / p.K) ** p.n * max((p.lam + p.alpha * omega2) / k, 0.0)


def damage_increment(p, state, dsbar1):
    """Explicit damage increment for a stress increment starting at ``state``.

    Zero on unloading (``dsbar1 <= 0``).
    """
    k = kappa(p, state.eps1, state.eps2, state.omega2)
    if k <= 0:
        raise SingularTangent(f"kappa={k!r} at omega2={state.omega2!r}", which="kappa")
    if dsbar1 <= 0:
        return 0.0
    f = yield_value(p, state.eps2, state.omega2)
    if p.clamp_yield:
        f = max(f, 0.0)
    return (abs(p.g) / (2 * p.C1) * (abs(f) / p.K) ** p.n
            * max((p.lam + p.alpha * state.omega2) / k, 0.0) * dsbar1)


def equilibrium_state(p, sbar1, omega2, cycles_completed=0):
    eps2 = lateral_strain(p, sbar1, omega2)
    return UniaxialState(omega2=omega2, eps1=axial_strain(p, sbar1, eps2, omega2),
                         eps2=eps2, sbar1=sbar1, cycles_completed=cycles_completed)


def step(p, state, sbar1_target, substeps=20, scheme="rk4"):
    """Move the applied stress linearly to ``sbar1_target`` in ``substeps`` increments.

    ``scheme="euler"`` evaluates the damage law at each increment start;
    ``"rk4"`` integrates the same law with classical Runge-Kutta in the stress
    variable. Strains are re-equilibrated after every increment.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {sorted(SCHEMES)}")
    s0 = state.sbar1
    h = (sbar1_target - s0) / substeps
    w = state.omega2
    cur = state
    for i in range(substeps):
        s = s0 + i * h
        if h > 0:
            if scheme == "euler":
                w = w + damage_increment(p, cur, h)
            else:
                k1 = damage_rate(p, s, w)
                k2 = damage_rate(p, s + h / 2, w + h / 2 * k1)
                k3 = damage_rate(p, s + h / 2, w + h / 2 * k2)
                k4 = damage_rate(p, s + h, w + h * k3)
                w = w + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        s_next = sbar1_target if i == substeps - 1 else s0 + (i + 1) * h
        cur = equilibrium_state(p, s_next, w, state.cycles_completed)
    return cur
