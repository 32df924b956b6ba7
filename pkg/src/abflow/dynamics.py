"""Trajectory integration, closed-orbit detection, and separatrix tracing.

The integrator is an embedded Dormand-Prince 5(4) pair with per-step error
control plus a hard budget on the Hamiltonian drift |H(t) - H(0)|: a step
whose endpoint violates the budget is rejected and bisected.  The Hamiltonian
is a first integral of the flow, so the budget is attainable whenever the
error tolerances are; if bisection stalls the trajectory is reported with
``step_failure`` rather than silently accepted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import critical
from .contour import Polyline, default_core_radius, polygon_area
from .errors import HomoclinicNotClosedError, InvalidParamsError, InvalidStartError
from .field import FlowParams, current

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "TrajectoryStatus",
    "OrbitResult",
    "SeparatrixResult",
    "integrate",
    "detect_closed_orbit",
    "trace_separatrix",
    "position_at",
]

# Dormand-Prince 5(4) tableau (stage times omitted: the field is autonomous)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# weights of the embedded error estimate (5th order - 4th order)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_MIN_STEP_FRACTION = 1e-13
_CLOSURE_MIN_ARC_FACTOR = 10.0


class TrajectoryStatus(enum.Enum):
    COMPLETED = "completed"
    CLOSED_ORBIT_DETECTED = "closed_orbit_detected"
    ENTERED_CORE_RADIUS = "entered_core_radius"
    LEFT_DOMAIN = "left_domain"
    STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards for trajectory integration.

    ``core_radius`` and ``domain_halfwidth`` default (None) to scale-aware
    rules: core 1e-4*(delta/k) (absolute 1e-6 without rotation) and a domain
    box covering ten saddle heights, at least [-5, 5]^2, and the start point.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    core_radius: float | None = None
    max_time: float = 100.0
    h_drift_budget: float = 1e-8
    domain_halfwidth: float | None = None
    closure_pos_tol: float = 1e-6
    closure_angle_tol: float = 1e-3

    def __post_init__(self):
        if self.rel_tol < 1e-14 or self.abs_tol < 1e-14:
            raise InvalidParamsError("tolerances must be at least 1e-14")
        for name in ("rel_tol", "abs_tol", "max_step", "max_time",
                     "h_drift_budget", "closure_pos_tol", "closure_angle_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParamsError(f"{name} must be positive, got {v!r}")
        for name in ("core_radius", "domain_halfwidth"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise InvalidParamsError(f"{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class Trajectory:
    """Integration samples with Hamiltonian-drift statistics.

    ``times`` are strictly increasing elapsed times along the integration
    direction; ``h_values`` is the Hamiltonian at each sample.  No sample
    lies inside the core exclusion radius.
    """

    times: np.ndarray
    points: np.ndarray
    h_values: np.ndarray
    max_h_drift: float
    status: TrajectoryStatus

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class OrbitResult:
    closed: bool
    period: float | None
    return_distance: float


@dataclass(frozen=True)
class SeparatrixResult:
    loop: Polyline
    unbounded_branches: list[Polyline]
    loop_area: float
    loop_max_radius: float
    lower_axis_crossing: float


def _resolve_core(params: FlowParams, cfg: IntegratorConfig) -> float:
    if cfg.core_radius is not None:
        return cfg.core_radius
    return default_core_radius(params)


def _resolve_halfwidth(params: FlowParams, cfg: IntegratorConfig, p0) -> float:
    if cfg.domain_halfwidth is not None:
        return cfg.domain_halfwidth
    half = 5.0
    if params.delta > 0.0 and params.k > 0.0:
        half = max(half, 10.0 * params.saddle_height)
    return max(half, 2.0 * max(abs(p0[0]), abs(p0[1])))


def _engine(
    params: FlowParams,
    p0,
    cfg: IntegratorConfig,
    direction: float,
    detect_closure: bool,
    return_target=None,
) -> Trajectory:
    """Shared adaptive stepper.

    ``return_target`` is (point, radius, min_departure): stop with closure
    status once the trajectory, having first moved min_departure away from
    the target, comes back within radius of it (separatrix branches).
    """
    a, b = params.a, params.b
    sgn = 1.0 if direction >= 0 else -1.0

    def rhs(x: float, y: float) -> tuple[float, float]:
        if b == 0.0:
            return -sgn * a, 0.0
        r2 = x * x + y * y
        return sgn * (-a + b * y / r2), sgn * (-b * x / r2)

    def energy(x: float, y: float) -> float:
        if b == 0.0:
            return -a * y
        return -a * y + 0.5 * b * math.log(x * x + y * y)

    x, y = float(p0[0]), float(p0[1])
    core = _resolve_core(params, cfg)
    half = _resolve_halfwidth(params, cfg, (x, y))
    if math.hypot(x, y) <= core:
        raise InvalidStartError(
            f"start point {p0!r} lies within the core exclusion radius {core!r}"
        )

    h0 = energy(x, y)
    times = [0.0]
    pts = [(x, y)]
    hs = [h0]

    fx, fy = rhs(x, y)
    speed0 = math.hypot(fx, fy)
    closure_on = detect_closure and speed0 > 0.0
    if closure_on:
        nx0, ny0 = fx / speed0, fy / speed0  # section normal = start direction
    x0, y0 = x, y
    g_prev = 0.0
    arc = 0.0
    departed = False

    t = 0.0
    h = min(cfg.max_step, 1e-3)
    status = None
    rejections = 0
    t_end = cfg.max_time

    def hermite(p, q, fp, fq, dt, s):
        # cubic Hermite on one accepted step, s in [0, 1]
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        return (
            h00 * p[0] + h10 * dt * fp[0] + h01 * q[0] + h11 * dt * fq[0],
            h00 * p[1] + h10 * dt * fp[1] + h01 * q[1] + h11 * dt * fq[1],
        )

    while t_end - t > 1e-12 * t_end:
        if h < _MIN_STEP_FRACTION * max(1.0, t):
            status = TrajectoryStatus.STEP_FAILURE
            break
        ht = min(h, t_end - t)

        # one Dormand-Prince attempt
        try:
            k = [(fx, fy)]
            for stage in range(1, 7):
                ax_ = x + ht * sum(_A[stage][m] * k[m][0] for m in range(stage))
                ay_ = y + ht * sum(_A[stage][m] * k[m][1] for m in range(stage))
                k.append(rhs(ax_, ay_))
        except ZeroDivisionError:
            status = TrajectoryStatus.STEP_FAILURE
            break
        xn, yn = ax_, ay_  # stage 7 is evaluated at the 5th-order solution
        ex = ht * sum(_E[m] * k[m][0] for m in range(7))
        ey = ht * sum(_E[m] * k[m][1] for m in range(7))
        sx = cfg.abs_tol + cfg.rel_tol * max(abs(x), abs(xn))
        sy = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))

        if err > 1.0:
            h = ht * max(0.2, 0.9 * err ** -0.2)
            rejections += 1
            if rejections > 200:
                status = TrajectoryStatus.STEP_FAILURE
                break
            continue

        if math.hypot(xn, yn) <= core:
            status = TrajectoryStatus.ENTERED_CORE_RADIUS
            break

        hn = energy(xn, yn)
        if abs(hn - h0) > cfg.h_drift_budget:
            h = 0.5 * ht
            rejections += 1
            if rejections > 200:
                status = TrajectoryStatus.STEP_FAILURE
                break
            continue
        rejections = 0
        fxn, fyn = k[6]

        if closure_on:
            g_new = (xn - x0) * nx0 + (yn - y0) * ny0
            if (
                arc > _CLOSURE_MIN_ARC_FACTOR * cfg.closure_pos_tol
                and g_prev < 0.0 <= g_new
            ):
                # refine the section crossing on the Hermite interpolant
                lo, hi = 0.0, 1.0
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    pm = hermite((x, y), (xn, yn), (fx, fy), (fxn, fyn), ht, mid)
                    gm = (pm[0] - x0) * nx0 + (pm[1] - y0) * ny0
                    if gm < 0.0:
                        lo = mid
                    else:
                        hi = mid
                s = 0.5 * (lo + hi)
                px, py = hermite((x, y), (xn, yn), (fx, fy), (fxn, fyn), ht, s)
                dist = math.hypot(px - x0, py - y0)
                vx, vy = rhs(px, py)
                angle = abs(math.atan2(vx * ny0 - vy * nx0, vx * nx0 + vy * ny0))
                if dist <= cfg.closure_pos_tol and angle <= cfg.closure_angle_tol:
                    times.append(t + s * ht)
                    pts.append((px, py))
                    hs.append(energy(px, py))
                    status = TrajectoryStatus.CLOSED_ORBIT_DETECTED
                    break
            g_prev = g_new

        arc += math.hypot(xn - x, yn - y)
        t = t + ht
        times.append(t)
        pts.append((xn, yn))
        hs.append(hn)
        x, y = xn, yn
        fx, fy = fxn, fyn  # FSAL

        if return_target is not None:
            (tx, ty), radius, min_departure = return_target
            d = math.hypot(x - tx, y - ty)
            if not departed and d > min_departure:
                departed = True
            if departed and d <= radius:
                status = TrajectoryStatus.CLOSED_ORBIT_DETECTED
                break

        if abs(x) > half or abs(y) > half:
            status = TrajectoryStatus.LEFT_DOMAIN
            break

        grow = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        h = min(cfg.max_step, ht * grow)

    if status is None:
        status = TrajectoryStatus.COMPLETED

    harr = np.array(hs)
    return Trajectory(
        times=np.array(times),
        points=np.array(pts),
        h_values=harr,
        max_h_drift=float(np.max(np.abs(harr - harr[0]))),
        status=status,
    )


def integrate(
    params: FlowParams,
    p0,
    cfg: IntegratorConfig | None = None,
    *,
    detect_closure: bool = False,
    direction: float = 1.0,
) -> Trajectory:
    """Integrate the current field from p0 under adaptive step control.

    Halts on closed-orbit detection (if requested), core entry, domain exit,
    or max_time.  ``direction=-1`` integrates backward in time; reported
    times are the elapsed magnitude.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    return _engine(params, p0, cfg, direction, detect_closure)


def detect_closed_orbit(
    params: FlowParams, p0, cfg: IntegratorConfig | None = None
) -> OrbitResult:
    """First-return test: integrate until the trajectory re-enters the
    closure tolerance of p0 with matching velocity direction, or max_time."""
    traj = integrate(params, p0, cfg, detect_closure=True)
    start = traj.points[0]
    last = traj.points[-1]
    dist = float(np.hypot(*(last - start)))
    if traj.status is TrajectoryStatus.CLOSED_ORBIT_DETECTED:
        return OrbitResult(closed=True, period=float(traj.times[-1]), return_distance=dist)
    return OrbitResult(closed=False, period=None, return_distance=dist)


def _separatrix_config(cfg: IntegratorConfig | None) -> IntegratorConfig:
    if cfg is None:
        return IntegratorConfig(
            rel_tol=1e-12,
            abs_tol=1e-14,
            max_step=0.05,
            h_drift_budget=1e-10,
            max_time=200.0,
        )
    return cfg


def trace_separatrix(
    params: FlowParams, cfg: IntegratorConfig | None = None
) -> SeparatrixResult:
    """Trace the level set through the saddle by integrating four branches
    seeded along the eigenvector directions.

    The branch that returns to the saddle is the homoclinic loop (reported
    closed through the saddle point); the two branches that leave the domain
    are the unbounded separatrix arms.
    """
    if params.delta == 0.0 or params.k == 0.0:
        raise InvalidParamsError("separatrix tracing requires delta > 0 and k > 0")
    cfg = _separatrix_config(cfg)
    saddle = critical.stagnation_point(params)
    assert saddle is not None
    loc = saddle.location
    unstable, stable = saddle.eigenvectors
    scale = params.saddle_height
    eps = 1e-6 * scale
    return_radius = 1e-4 * scale
    min_departure = 0.25 * scale
    target = ((float(loc[0]), float(loc[1])), return_radius, min_departure)

    seeds = [
        (loc + eps * unstable, 1.0),
        (loc - eps * unstable, 1.0),
        (loc + eps * stable, -1.0),
        (loc - eps * stable, -1.0),
    ]
    branches = [
        _engine(params, seed, cfg, direction, False, return_target=target)
        for seed, direction in seeds
    ]

    level = critical.separatrix_level(params)
    returned = [
        (i, br)
        for i, br in enumerate(branches)
        if br.status is TrajectoryStatus.CLOSED_ORBIT_DETECTED
    ]
    if not returned:
        raise HomoclinicNotClosedError(
            "no separatrix branch returned to the saddle",
            diagnostics={
                "statuses": [br.status.value for br in branches],
                "final_points": [br.points[-1].tolist() for br in branches],
                "max_h_drift": [br.max_h_drift for br in branches],
            },
        )
    # prefer a forward (unstable) branch so the loop follows the flow
    _, loop_branch = min(returned, key=lambda item: item[0])
    loop_pts = np.vstack([loc, loop_branch.points, loc])
    loop = Polyline(points=loop_pts, level=level, closed=True)

    unbounded = [
        Polyline(points=br.points, level=level, closed=False)
        for br in branches
        if br.status is TrajectoryStatus.LEFT_DOMAIN
    ]

    radii = np.hypot(loop_pts[:, 0], loop_pts[:, 1])
    return SeparatrixResult(
        loop=loop,
        unbounded_branches=unbounded,
        loop_area=abs(polygon_area(loop_pts[:-1])),
        loop_max_radius=float(radii.max()),
        lower_axis_crossing=_lower_axis_crossing(loop_pts),
    )


def _lower_axis_crossing(pts: np.ndarray) -> float:
    """y value where the loop crosses the negative y axis (sign change of x)."""
    x, y = pts[:, 0], pts[:, 1]
    best = None
    for i in range(len(pts) - 1):
        if y[i] >= 0.0 and y[i + 1] >= 0.0:
            continue
        if x[i] == 0.0:
            cand = y[i]
        elif x[i] * x[i + 1] < 0.0:
            s = x[i] / (x[i] - x[i + 1])
            cand = y[i] + s * (y[i + 1] - y[i])
        else:
            continue
        if cand < 0.0 and (best is None or cand < best):
            best = cand
    if best is None:
        raise HomoclinicNotClosedError("loop does not cross the negative y axis")
    return float(best)


def position_at(
    params: FlowParams, traj: Trajectory, t: float, direction: float = 1.0
) -> np.ndarray:
    """Cubic-Hermite interpolation of a trajectory at elapsed time t.

    ``direction`` must match the direction the trajectory was integrated with.
    """
    times = traj.times
    if not (times[0] <= t <= times[-1]):
        raise InvalidParamsError(f"t={t!r} outside trajectory range")
    i = int(np.searchsorted(times, t, side="right") - 1)
    i = min(i, len(times) - 2)
    dt = float(times[i + 1] - times[i])
    if dt == 0.0:
        return traj.points[i].copy()
    s = (t - float(times[i])) / dt
    p, q = traj.points[i], traj.points[i + 1]
    sgn = 1.0 if direction >= 0 else -1.0
    fp = sgn * current(params, p)
    fq = sgn * current(params, q)
    s2, s3 = s * s, s ** 3
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * p + h10 * dt * fp + h01 * q + h11 * dt * fq
