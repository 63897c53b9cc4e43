"""Numba-compiled numerical core.

Scalar field/potential evaluation, the adaptive Dormand-Prince integrator
with pump-event localization, and the parallel batch driver. Everything in
this module is plain floats and preallocated arrays so it stays nopython-
compatible; the public modules wrap these kernels with validated APIs.
"""

import math

import numpy as np
from numba import njit, prange

# Trigger / outcome codes shared with dynamics.py
CODE_AXIAL_STOP = 0
CODE_BARRIER_TOP = 1
CODE_LOST_RADIALLY = 2
CODE_TIMEOUT = 3
CODE_NONFINITE = 4

DEGENERATE_NORM = 1e-10   # T, below this |B| the gradient falls back to zero
WIRE_EXCLUSION = 1e-5     # m, minimal distance to the loop conductor
_AXIS_SWITCH = 1e-4       # fraction of R below which the on-axis expansion is used


@njit(cache=True)
def ellipke_agm(m):
    """Complete elliptic integrals (K(m), E(m)), parameter m = k^2 in [0, 1).

    Arithmetic-geometric-mean iteration; converges quadratically to machine
    precision.
    """
    a = 1.0
    b = math.sqrt(1.0 - m)
    c = math.sqrt(m)
    csum = 0.5 * c * c
    pow2 = 1.0
    for _ in range(40):
        if c <= 1e-17 * a:
            break
        an = 0.5 * (a + b)
        bn = math.sqrt(a * b)
        c = 0.5 * (a - b)
        a = an
        b = bn
        pow2 *= 2.0
        csum += 0.5 * pow2 * c * c
    K = math.pi / (2.0 * a)
    E = K * (1.0 - csum)
    return K, E


@njit(cache=True)
def loop_bz_axis(z, R, pref):
    """On-axis loop field B_z(0, z) and its first two z-derivatives.

    pref = mu0*I/(2*pi); B_z(0,z) = pi*pref*R^2/(R^2+z^2)^(3/2).
    """
    q = R * R + z * z
    b0 = math.pi * pref * R * R / q ** 1.5
    b1 = -3.0 * math.pi * pref * R * R * z / q ** 2.5
    b2 = 3.0 * math.pi * pref * R * R * (4.0 * z * z - R * R) / q ** 3.5
    return b0, b1, b2


@njit(cache=True)
def loop_field_cyl(rho, z, R, pref):
    """Off-axis loop field (B_rho, B_z) of a circular filament.

    Standard complete-elliptic-integral solution; pref = mu0*I/(2*pi).
    """
    if rho < _AXIS_SWITCH * R:
        b0, b1, b2 = loop_bz_axis(z, R, pref)
        return -0.5 * rho * b1, b0 - 0.25 * rho * rho * b2
    s2 = (R + rho) ** 2 + z * z
    A = (R - rho) ** 2 + z * z
    m = 4.0 * R * rho / s2
    Kv, Ev = ellipke_agm(m)
    rs = 1.0 / math.sqrt(s2)
    b_rho = pref * z * rs / rho * (-Kv + Ev * (R * R + rho * rho + z * z) / A)
    b_z = pref * rs * (Kv + Ev * (R * R - rho * rho - z * z) / A)
    return b_rho, b_z


@njit(cache=True)
def loop_field_jac_cyl(rho, z, R, pref):
    """Loop field and its cylindrical Jacobian.

    Returns (B_rho, B_z, dBr/drho, dBr/dz, dBz/drho, dBz/dz). Closed forms
    obtained from the elliptic-integral solution with dK/dm, dE/dm chain
    rules; pinned against finite differences in the test suite.
    """
    if rho < _AXIS_SWITCH * R:
        b0, b1, b2 = loop_bz_axis(z, R, pref)
        b_rho = -0.5 * rho * b1
        b_z = b0 - 0.25 * rho * rho * b2
        return b_rho, b_z, -0.5 * b1, -0.5 * rho * b2, -0.5 * rho * b2, b1
    C = pref
    x0 = R * R
    x1 = z * z
    x2 = rho * rho
    x3 = x1 + x2
    x4 = x0 + x3
    x5 = R - rho
    x6 = x5 * x5
    x7 = x1 + x6
    x8_ = 0.0
    m = 4.0 * R * rho / (x1 + (R + rho) ** 2)
    Kv, Ev = ellipke_agm(m)
    x8 = -Kv * x7
    x9 = Ev * x4 + x8
    x10 = 1.0 / rho
    x11 = R + rho
    x12 = x1 + x11 * x11
    x13 = C / (math.sqrt(x12) * x7)
    x14 = -x0 + x3
    x15 = Ev * x14 + x8
    x16 = 4.0 * rho
    x17 = -R * x16 + x12
    x18 = rho * x7
    x19 = Ev - Kv
    x20 = 2.0 * x11
    x21 = -rho * x20 + x12
    x22 = x7 * x7
    x23 = Ev * x12
    x24 = x22 * (-Kv * x17 + x23)
    x25 = x21 * x24
    x26 = x17 * x18 * x20
    x27 = x17 * x7
    x28 = x12 * x27 * x9
    x29 = C / (x12 ** 1.5 * x17 * x22)
    x30 = x29 * z
    x31 = x17 * x23
    x32 = 2.0 * x31
    x33 = x10 * x29
    x34 = x14 * x19
    b_rho = x10 * x13 * x9 * z
    b_z = -x13 * x15
    dbr_drho = 0.5 * x30 * (
        4.0 * Ev * rho * x12 * x17 * (x18 + x4 * x5)
        + x17 * x19 * x21 * x4 * x7 - x25 - x26 * x9 - 2.0 * x28) / x2
    dbr_dz = -x33 * (
        -x1 * x24 + x1 * x27 * (x19 * x4 + x9)
        + x1 * x32 * (x0 + x2 - x6) - x28)
    dbz_drho = -0.5 * x33 * (
        -x15 * x26 + x16 * x31 * (x14 * x5 + x18)
        + x21 * x27 * x34 - x25)
    dbz_dz = -x30 * (x24 - x27 * (x15 + x34) + x32 * (x0 - x2 + x6))
    return b_rho, b_z, dbr_drho, dbr_dz, dbz_drho, dbz_dz


@njit(cache=True)
def total_field_grad(x, y, z, bprime, R, pref):
    """Combined guide + loop field.

    Returns (Bx, By, Bz, norm, gx, gy, gz, degenerate) where (gx, gy, gz)
    is grad|B|; the gradient is the zero vector inside the degenerate band
    |B| < DEGENERATE_NORM.
    """
    rho = math.sqrt(x * x + y * y)
    if rho < _AXIS_SWITCH * R:
        b0, b1, b2 = loop_bz_axis(z, R, pref)
        bx = -bprime * x - 0.5 * x * b1
        by = bprime * y - 0.5 * y * b1
        bz = b0 - 0.25 * rho * rho * b2
        # Cartesian Jacobian of the total field near the axis
        jxx = -bprime - 0.5 * b1
        jyy = bprime - 0.5 * b1
        jxy = 0.0
        jxz = -0.5 * x * b2
        jyz = -0.5 * y * b2
        jzx = -0.5 * x * b2
        jzy = -0.5 * y * b2
        jzz = b1
    else:
        br, bzl, dbr_dr, dbr_dz, dbz_dr, dbz_dz = loop_field_jac_cyl(rho, z, R, pref)
        c = x / rho
        s = y / rho
        br_over_rho = br / rho
        bx = -bprime * x + br * c
        by = bprime * y + br * s
        bz = bzl
        jxx = -bprime + dbr_dr * c * c + br_over_rho * s * s
        jyy = bprime + dbr_dr * s * s + br_over_rho * c * c
        jxy = (dbr_dr - br_over_rho) * c * s
        jxz = dbr_dz * c
        jyz = dbr_dz * s
        jzx = dbz_dr * c
        jzy = dbz_dr * s
        jzz = dbz_dz
    norm = math.sqrt(bx * bx + by * by + bz * bz)
    if norm < DEGENERATE_NORM:
        return bx, by, bz, norm, 0.0, 0.0, 0.0, True
    # grad|B| = J^T B / |B|
    gx = (jxx * bx + jxy * by + jzx * bz) / norm
    gy = (jxy * bx + jyy * by + jzy * bz) / norm
    gz = (jxz * bx + jyz * by + jzz * bz) / norm
    return bx, by, bz, norm, gx, gy, gz, False


@njit(cache=True)
def odt_potential_grad(x, y, z, u0, w0, zR):
    """Gaussian-beam dipole potential and gradient; u0 = -depth at the focus."""
    f = 1.0 / (1.0 + (z / zR) ** 2)
    rho2 = x * x + y * y
    w02 = w0 * w0
    e = math.exp(-2.0 * rho2 * f / w02)
    u = u0 * f * e
    radial = u * (-4.0 * f / w02)
    fp = -2.0 * z * f * f / (zR * zR)
    du_dz = u0 * e * fp * (1.0 - 2.0 * rho2 * f / w02)
    return u, radial * x, radial * y, du_dz


@njit(cache=True)
def potential_force(x, y, z, mu, bprime, R, pref, u0, w0, zR):
    """Total potential U = mu*|B| + U_d and force F = -grad U.

    mu is the signed Zeeman coefficient mu_B*gJ*mJ of the current sublevel.
    Returns (U, Fx, Fy, Fz).
    """
    _, _, _, norm, gx, gy, gz, _ = total_field_grad(x, y, z, bprime, R, pref)
    ud, dx, dy, dz = odt_potential_grad(x, y, z, u0, w0, zR)
    u = mu * norm + ud
    return u, -(mu * gx + dx), -(mu * gy + dy), -(mu * gz + dz)


# --- Dormand-Prince 5(4) coefficients -------------------------------------

_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1.0 / 5.0
_A[2, 0] = 3.0 / 40.0
_A[2, 1] = 9.0 / 40.0
_A[3, 0] = 44.0 / 45.0
_A[3, 1] = -56.0 / 15.0
_A[3, 2] = 32.0 / 9.0
_A[4, 0] = 19372.0 / 6561.0
_A[4, 1] = -25360.0 / 2187.0
_A[4, 2] = 64448.0 / 6561.0
_A[4, 3] = -212.0 / 729.0
_A[5, 0] = 9017.0 / 3168.0
_A[5, 1] = -355.0 / 33.0
_A[5, 2] = 46732.0 / 5247.0
_A[5, 3] = 49.0 / 176.0
_A[5, 4] = -5103.0 / 18656.0
_A[6, 0] = 35.0 / 384.0
_A[6, 2] = 500.0 / 1113.0
_A[6, 3] = 125.0 / 192.0
_A[6, 4] = -2187.0 / 6784.0
_A[6, 5] = 11.0 / 84.0
_B = _A[6].copy()
_E = np.array([71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
               -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0])
# Dense-output interpolant (quartic in the step fraction theta)
_P = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])


@njit(cache=True)
def _rhs(y, k, mass, mu, bprime, R, pref, u0, w0, zR):
    """Equations of motion; fills k with dy/dt and returns U(position)."""
    u, fx, fy, fz = potential_force(y[0], y[1], y[2], mu, bprime, R, pref,
                                    u0, w0, zR)
    k[0] = y[3]
    k[1] = y[4]
    k[2] = y[5]
    k[3] = fx / mass
    k[4] = fy / mass
    k[5] = fz / mass
    return u


@njit(cache=True)
def _dense_eval(y0, h, K, theta, out):
    """Dense-output state at fraction theta of the accepted step."""
    t1 = theta
    t2 = t1 * theta
    t3 = t2 * theta
    t4 = t3 * theta
    for d in range(6):
        acc = 0.0
        for s in range(7):
            acc += K[s, d] * (_P[s, 0] * t1 + _P[s, 1] * t2
                              + _P[s, 2] * t3 + _P[s, 3] * t4)
        out[d] = y0[d] + h * acc


@njit(cache=True)
def _locate_event(y0, h, K, component, out):
    """Bisect the step-fraction root of a sign change in state component.

    component: 2 for z, 5 for v_z. Returns theta; out holds the state there.
    """
    lo = 0.0
    hi = 1.0
    g_lo = y0[component]
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        _dense_eval(y0, h, K, mid, out)
        g_mid = out[component]
        if (g_lo <= 0.0) == (g_mid <= 0.0):
            lo = mid
            g_lo = g_mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    theta = 0.5 * (lo + hi)
    _dense_eval(y0, h, K, theta, out)
    return theta


@njit(cache=True)
def integrate_until_event(y, mass, mu, bprime, R, pref, u0, w0, zR,
                          rho_max, t_max, rtol, atol_x, atol_v,
                          y_event, stats):
    """Advance from y (modified in place) until the pump event.

    The first of (a) v_z crossing zero from above, (b) z crossing zero from
    below ends the integration. Returns the outcome code; y_event receives
    the event (or final) state; stats receives
    [t_event, steps, max_rel_energy_drift].
    """
    K = np.empty((7, 6))
    y_stage = np.empty(6)
    y_new = np.empty(6)
    u0_pot = _rhs(y, K[0], mass, mu, bprime, R, pref, u0, w0, zR)
    e0 = 0.5 * mass * (y[3] ** 2 + y[4] ** 2 + y[5] ** 2) + u0_pot
    e_scale = abs(e0)
    if e_scale < 1e-300:
        e_scale = 1.0

    t = 0.0
    h = 1e-7
    max_drift = 0.0
    steps = 0
    code = CODE_TIMEOUT
    while t < t_max:
        if h > t_max - t:
            h = t_max - t
        # stages 1..6 (stage 0 is FSAL from the previous step)
        for s in range(1, 7):
            for d in range(6):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, d]
                y_stage[d] = y[d] + h * acc
            u_new = _rhs(y_stage, K[s], mass, mu, bprime, R, pref, u0, w0, zR)
        for d in range(6):
            y_new[d] = y_stage[d]   # stage 7 node is the 5th-order solution
        # scaled error estimate
        err = 0.0
        for d in range(6):
            ed = 0.0
            for s in range(7):
                ed += _E[s] * K[s, d]
            ed *= h
            atol = atol_x if d < 3 else atol_v
            sc = atol + rtol * max(abs(y[d]), abs(y_new[d]))
            r = ed / sc
            err += r * r
        err = math.sqrt(err / 6.0)
        if err > 1.0:
            # reject: shrink and redo from the same y (K[0] still valid)
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        steps += 1
        if not (math.isfinite(y_new[0]) and math.isfinite(y_new[3])
                and math.isfinite(y_new[2]) and math.isfinite(y_new[5])):
            code = CODE_NONFINITE
            for d in range(6):
                y_event[d] = y_new[d]
            stats[0] = t + h
            break

        # event tests over the accepted step
        hit_z = y[2] < 0.0 and y_new[2] >= 0.0
        hit_vz = y[5] > 0.0 and y_new[5] <= 0.0
        if hit_z or hit_vz:
            theta_z = 2.0
            theta_vz = 2.0
            if hit_z:
                theta_z = _locate_event(y, h, K, 2, y_stage)
            if hit_vz:
                theta_vz = _locate_event(y, h, K, 5, y_stage)
            if theta_z <= theta_vz:
                theta = theta_z
                code = CODE_BARRIER_TOP
            else:
                theta = theta_vz
                code = CODE_AXIAL_STOP
            _dense_eval(y, h, K, theta, y_event)
            stats[0] = t + theta * h
            break

        t += h
        for d in range(6):
            y[d] = y_new[d]
        for d in range(6):
            K[0, d] = K[6, d]   # FSAL
        e = 0.5 * mass * (y[3] ** 2 + y[4] ** 2 + y[5] ** 2) + u_new
        drift = abs(e - e0) / e_scale
        if drift > max_drift:
            max_drift = drift

        rho = math.sqrt(y[0] ** 2 + y[1] ** 2)
        if rho > rho_max:
            code = CODE_LOST_RADIALLY
            for d in range(6):
                y_event[d] = y[d]
            stats[0] = t
            break

        fac = 0.9 * err ** -0.2 if err > 1e-30 else 5.0
        h *= min(5.0, max(0.2, fac))
    else:
        for d in range(6):
            y_event[d] = y[d]
        stats[0] = t
    stats[1] = steps
    stats[2] = max_drift
    return code


@njit(cache=True)
def integrate_fixed_time(y, t_end, mass, mu, bprime, R, pref, u0, w0, zR,
                         rtol, atol_x, atol_v):
    """Advance y in place for exactly t_end seconds (no event handling).

    Returns (steps, max_rel_energy_drift).
    """
    K = np.empty((7, 6))
    y_stage = np.empty(6)
    u_pot = _rhs(y, K[0], mass, mu, bprime, R, pref, u0, w0, zR)
    e0 = 0.5 * mass * (y[3] ** 2 + y[4] ** 2 + y[5] ** 2) + u_pot
    e_scale = abs(e0) if abs(e0) > 1e-300 else 1.0
    t = 0.0
    h = 1e-7
    steps = 0
    max_drift = 0.0
    while t < t_end:
        last = False
        if h >= t_end - t:
            h = t_end - t
            last = True
        for s in range(1, 7):
            for d in range(6):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, d]
                y_stage[d] = y[d] + h * acc
            u_new = _rhs(y_stage, K[s], mass, mu, bprime, R, pref, u0, w0, zR)
        err = 0.0
        for d in range(6):
            ed = 0.0
            for s in range(7):
                ed += _E[s] * K[s, d]
            ed *= h
            atol = atol_x if d < 3 else atol_v
            sc = atol + rtol * max(abs(y[d]), abs(y_stage[d]))
            r = ed / sc
            err += r * r
        err = math.sqrt(err / 6.0)
        if err > 1.0 and not (last and h < 1e-14):
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        steps += 1
        t += h
        for d in range(6):
            y[d] = y_stage[d]
            K[0, d] = K[6, d]
        e = 0.5 * mass * (y[3] ** 2 + y[4] ** 2 + y[5] ** 2) + u_new
        drift = abs(e - e0) / e_scale
        if drift > max_drift:
            max_drift = drift
        fac = 0.9 * err ** -0.2 if err > 1e-30 else 5.0
        h *= min(5.0, max(0.2, fac))
    return steps, max_drift


@njit(cache=True, parallel=True)
def integrate_batch(y0s, mass, mu, bprime, R, pref, u0, w0, zR,
                    rho_max, t_max, rtol, atol_x, atol_v,
                    codes, t_events, y_events, steps, drifts):
    """Integrate many trajectories independently (one result slot each)."""
    n = y0s.shape[0]
    for i in prange(n):
        y = y0s[i].copy()
        y_ev = np.empty(6)
        stats = np.empty(3)
        code = integrate_until_event(y, mass, mu, bprime, R, pref, u0, w0,
                                     zR, rho_max, t_max, rtol, atol_x,
                                     atol_v, y_ev, stats)
        codes[i] = code
        t_events[i] = stats[0]
        for d in range(6):
            y_events[i, d] = y_ev[d]
        steps[i] = stats[1]
        drifts[i] = stats[2]


@njit(cache=True, parallel=True)
def potential_on_grid(rho_vals, z_vals, axis, mu, bprime, R, pref, u0, w0, zR):
    """Potential on a half-plane grid: axis 0 -> points (rho,0,z), 1 -> (0,rho,z).

    Returns U with shape (len(rho_vals), len(z_vals)).
    """
    nr = rho_vals.shape[0]
    nz = z_vals.shape[0]
    out = np.empty((nr, nz))
    for i in prange(nr):
        x = rho_vals[i] if axis == 0 else 0.0
        y = rho_vals[i] if axis == 1 else 0.0
        for j in range(nz):
            u, _, _, _ = potential_force(x, y, z_vals[j], mu, bprime, R,
                                         pref, u0, w0, zR)
            out[i, j] = u
    return out
