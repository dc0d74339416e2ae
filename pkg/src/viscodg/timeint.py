"""Five-stage, fourth-order low-storage Runge-Kutta and the stable step estimate."""

from dataclasses import dataclass

import numpy as np

from .dg_core import NumericalInstability, check_finite
from .materials import characteristic_speeds

# Carpenter & Kennedy (1994), 2N-storage LSRK(5,4), solution 3
RK4A = np.array([
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
])
RK4B = np.array([
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
])
RK4C = np.array([
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
])


def trace_constant(N):
    return (N + 1) * (N + 2) / 2.0


def estimate_dt(op, cfl=0.5, c_n=None, relaxation_cap=True):
    """Stable step for the operator ``op`` (a DGOperator).

    ``dt = cfl / (lambda_max C_N max_f J^f / J)`` minimised over elements.
    With ``relaxation_cap`` the step is also kept below ``cfl`` times the
    inverse of the stiffest local relaxation rate.
    """
    if not cfl > 0:
        raise ValueError(f"C_CFL must be positive, got {cfl}")
    c_n = trace_constant(op.ops.N) if c_n is None else c_n
    speeds = np.array([characteristic_speeds(m) for m in op.materials])
    lam = speeds[op.mesh.material_id]
    if np.any(lam <= 0):
        raise ValueError("maximum wave speed must be positive")
    geom = op.geom
    if np.any(geom.J <= 0):
        raise ValueError("zero-measure element")
    ratio = geom.Jf.max(axis=1) / geom.J
    dt = float(np.min(cfl / (lam * c_n * ratio)))
    if relaxation_cap:
        rates = [np.max(np.abs(np.linalg.eigvals(c.Qs @ c.S))) for c in op.coeffs]
        rate = max(rates)
        if rate > 0:
            dt = min(dt, cfl / rate)
    return dt


@dataclass
class LSRK54:
    """Low-storage RK stepper; keeps one residual register."""

    dt: float
    check_every: int = 50

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def step(self, rhs, q, t, dt):
        """One step; ``q`` is left untouched and the new state returned."""
        q = np.array(q, dtype=np.result_type(q, float), copy=True)
        self._step_inplace(rhs, q, t, dt, np.zeros_like(q))
        return q

    @staticmethod
    def _step_inplace(rhs, q, t, dt, res):
        res[...] = 0.0
        for a, b, c in zip(RK4A, RK4B, RK4C):
            res *= a
            res += dt * rhs(q, t + c * dt)
            q += b * res

    def advance(self, rhs, q, t0, t1, callback=None):
        """Integrate from t0 to t1; the last step is shortened to land on t1.

        ``callback(step, t, q)`` runs after every step.  Returns the final state.
        """
        if t1 < t0:
            raise ValueError("t1 must not precede t0")
        nsteps = int(np.ceil((t1 - t0) / self.dt - 1e-12)) if t1 > t0 else 0
        q = np.array(q, dtype=np.result_type(q, float), copy=True)
        res = np.zeros_like(q)
        t = t0
        for n in range(1, nsteps + 1):
            dt = min(self.dt, t1 - t)
            self._step_inplace(rhs, q, t, dt, res)
            t = t1 if n == nsteps else t0 + n * self.dt
            if n % self.check_every == 0 or n == nsteps:
                _check(q, n)
            if callback is not None:
                callback(n, t, q)
        return q


def _check(q, step):
    if np.all(np.isfinite(q)):
        return
    if q.ndim == 3:
        check_finite(q, step)
    raise NumericalInstability(f"non-finite state detected at step {step}", step=step)


def advance(stepper, rhs, q, t0, t1, callback=None):
    return stepper.advance(rhs, q, t0, t1, callback)
