"""Fixed-step closed-loop simulation and safety metrics.

Each step samples the disturbance, reads the observer estimate, computes
the nominal input, builds the barrier constraint, filters, and then
integrates plant and observer jointly with classical RK4. Input and
disturbance are held constant over the step.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .exceptions import IntegrationError, SingularityError


def rk4_step(derivative, t: float, x, dt: float):
    """One classical fourth-order Runge-Kutta step.

    Works for floats and numpy arrays alike.
    """
    if not dt > 0:
        raise IntegrationError(f"dt must be positive, got {dt}")
    half = 0.5 * dt
    k1 = derivative(t, x)
    k2 = derivative(t + half, x + half * k1)
    k3 = derivative(t + half, x + half * k2)
    k4 = derivative(t + dt, x + dt * k3)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not (math.isfinite(out) if isinstance(out, float) else np.isfinite(out).all()):
        raise IntegrationError(f"non-finite state after the step from t={t} (x={x}, dt={dt})")
    return out


@dataclass
class Trajectory:
    """Per-step log of a closed-loop run.

    All arrays share the first axis (records). ``psi`` holds the chain
    values ``psi_1 .. psi_{r-1}`` (zero columns for first-order plants).
    A run cut short by a reciprocal singularity has ``terminated`` set and
    fewer than ``steps + 1`` records.
    """

    t: np.ndarray
    x: np.ndarray
    h: np.ndarray
    psi: np.ndarray
    u_nominal: np.ndarray
    u_applied: np.ndarray
    status: List[str]
    slack: np.ndarray
    w_true: np.ndarray
    d_hat: np.ndarray
    a: np.ndarray
    b: np.ndarray
    name: str = ""
    terminated: bool = False
    reason: str = ""
    out_of_box_steps: int = 0

    def __len__(self):
        return len(self.t)

    def columns(self) -> List[str]:
        n, r1, m = self.x.shape[1], self.psi.shape[1], self.u_applied.shape[1]
        uname = lambda base: [base] if m == 1 else [f"{base}{j}" for j in range(m)]
        return (["t"] + [f"x{i}" for i in range(n)] + ["h"] + [f"psi{i + 1}" for i in range(r1)]
                + uname("u_nominal") + uname("u_applied") + ["filter_status", "slack", "w_true", "d_hat"]
                + [f"a{j}" for j in range(m)] + ["b"])

    def rows(self):
        for k in range(len(self.t)):
            yield ([self.t[k], *self.x[k], self.h[k], *self.psi[k], *self.u_nominal[k], *self.u_applied[k]],
                   self.status[k], [self.slack[k], self.w_true[k], self.d_hat[k], *self.a[k], self.b[k]])

    def write_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(self.columns())
            for head, status, tail in self.rows():
                wr.writerow([_fmt(v) for v in head] + [status] + [_fmt(v) for v in tail])


def _fmt(v) -> str:
    return format(float(v), ".17g")


def read_trajectory_csv(path) -> Trajectory:
    """Parse a CSV written by :meth:`Trajectory.write_csv`."""
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = list(rd)
    n = sum(1 for c in header if c[0] == "x" and c[1:].isdigit())
    r1 = sum(1 for c in header if c.startswith("psi"))
    m = sum(1 for c in header if c[0] == "a" and c[1:].isdigit())
    si = header.index("filter_status")
    num = np.array([[float(v) for i, v in enumerate(row) if i != si] for row in rows]).reshape(len(rows), -1)
    status = [row[si] for row in rows]
    col = 0

    def take(k):
        nonlocal col
        out = num[:, col:col + k]
        col += k
        return out

    t = take(1)[:, 0]
    x = take(n)
    h = take(1)[:, 0]
    psi = take(r1)
    u_nom = take(m)
    u_app = take(m)
    slack, w_true, d_hat = (take(1)[:, 0] for _ in range(3))
    a = take(m)
    b = take(1)[:, 0]
    return Trajectory(t=t, x=x, h=h, psi=psi, u_nominal=u_nom, u_applied=u_app, status=status,
                      slack=slack, w_true=w_true, d_hat=d_hat, a=a, b=b, name=Path(path).stem)


@dataclass(frozen=True)
class SafetyMetrics:
    min_h: float
    first_violation_time: Optional[float]
    settling_h: float
    max_input: float
    infeasible_steps: int


def compute_metrics(traj: Trajectory, which_h: str = "h") -> SafetyMetrics:
    """Safety summary of a trajectory.

    ``which_h`` selects ``"h"`` or a chain value such as ``"psi1"``.
    ``settling_h`` is the mean over the final 10% of records.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if which_h == "h":
        hs = traj.h
    elif which_h.startswith("psi"):
        hs = traj.psi[:, int(which_h[3:]) - 1]
    else:
        raise ValueError(f"unknown selector {which_h!r}")
    min_h = float(np.min(hs))
    below = np.flatnonzero(hs < 0)
    first = float(traj.t[below[0]]) if below.size else None
    tail = max(1, int(math.ceil(0.1 * len(hs))))
    u = np.abs(traj.u_applied)
    max_input = float(np.nanmax(u)) if np.any(np.isfinite(u)) else math.nan
    infeasible = sum(1 for s in traj.status if s == "infeasible")
    return SafetyMetrics(min_h, first, float(np.mean(hs[-tail:])), max_input, infeasible)


def max_estimation_error(traj: Trajectory, after: float = 1.0) -> float:
    """``sup |d_hat - w|`` over records with ``t >= after``."""
    mask = traj.t >= after - 1e-12
    return float(np.max(np.abs(traj.d_hat[mask] - traj.w_true[mask])))


def run_scenario(config) -> Trajectory:
    """Simulate one closed-loop scenario.

    Deterministic for a given config. A reciprocal variant reaching its
    pole ends the run early with ``terminated`` set; that record keeps the
    state and ``h`` but has NaN inputs.
    """
    from .cbf_constraints import constraint_and_chain
    from .disturbance_observer import observer_rhs
    from .safety_filter import apply_filter

    plant = config.plant
    variant = config.variant
    n, m, r = plant.state_dim, plant.input_dim, plant.relative_degree
    dt, steps = config.dt, config.steps
    bounds = config.input_bounds
    dist = config.disturbance
    scale = plant.disturbance_scale
    obs_on = config.observer.enabled
    gain = config.observer.gain
    hfun = plant.safe_function().h
    plant_rhs = plant.rhs
    nan_m = np.full(m, math.nan)

    x = np.array(config.initial_state, dtype=float)
    z = config.observer.d_hat0 - gain * plant.observer_channel(x, 0.0)[0] if obs_on else 0.0

    ts, xs, hs, psis, u0s, uas, stats, slacks, ws, dhs, as_, bs = ([] for _ in range(12))
    terminated, reason, out_of_box = False, "", 0

    for k in range(steps + 1):
        t = k * dt
        w = dist(t)
        w_hat = z + gain * plant.observer_channel(x, t)[0] if obs_on else 0.0
        u0 = np.atleast_1d(plant.nominal_control(x, w_hat, t)).astype(float)
        if not plant.admissible(x):
            out_of_box += 1

        psi_row = [math.nan] * (r - 1)
        if variant is not None:
            d_in = scale * w_hat if variant.variant.uses_estimate else None
            try:
                con, chain = constraint_and_chain(variant, plant, x, d_in, t)
            except SingularityError as exc:
                terminated, reason = True, f"singular at t={t:.6g}: {exc}"
                ts.append(t); xs.append(x.copy()); hs.append(hfun(x)); psis.append(psi_row)
                u0s.append(u0); uas.append(nan_m); stats.append("singular"); slacks.append(math.nan)
                ws.append(w); dhs.append(w_hat); as_.append(nan_m); bs.append(math.nan)
                break
            psi_row = list(chain.values[1:])
            res = apply_filter(u0, con, bounds)
            u, status, slack, a_row, b_val = res.u_applied, res.status.value, res.slack, con.a, con.b
        else:
            u = u0 if bounds is None else np.clip(u0, bounds[0], bounds[1])
            status = "none"
            slack, a_row, b_val = math.nan, nan_m, math.nan

        ts.append(t); xs.append(x.copy()); hs.append(hfun(x)); psis.append(psi_row)
        u0s.append(u0); uas.append(np.asarray(u, dtype=float)); stats.append(status); slacks.append(slack)
        ws.append(w); dhs.append(w_hat); as_.append(a_row); bs.append(b_val)
        if k == steps:
            break

        forcing = u + scale * w
        if obs_on:
            def rhs(s, y, forcing=forcing, u=u):
                xx = y[:n]
                out = np.empty(n + 1)
                out[:n] = plant_rhs(xx, forcing, s)
                out[n] = observer_rhs(gain, y[n], plant, xx, u, s)
                return out

            y0 = np.empty(n + 1)
            y0[:n], y0[n] = x, z
            y = rk4_step(rhs, t, y0, dt)
            x, z = y[:n], float(y[n])
        else:
            x = rk4_step(lambda s, xx: plant_rhs(xx, forcing, s), t, x, dt)

    return Trajectory(
        t=np.array(ts), x=np.array(xs).reshape(-1, n), h=np.array(hs, dtype=float),
        psi=np.array(psis, dtype=float).reshape(len(ts), r - 1), u_nominal=np.array(u0s).reshape(-1, m),
        u_applied=np.array(uas).reshape(-1, m), status=stats, slack=np.array(slacks, dtype=float),
        w_true=np.array(ws, dtype=float), d_hat=np.array(dhs, dtype=float),
        a=np.array(as_, dtype=float).reshape(-1, m), b=np.array(bs, dtype=float),
        name=config.name, terminated=terminated, reason=reason, out_of_box_steps=out_of_box,
    )
