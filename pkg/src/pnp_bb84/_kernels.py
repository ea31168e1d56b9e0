"""Scalar rate kernels.

Everything here is plain ``math``-module Python so the functions compile under
numba's nopython mode and run identically without it (see ``_accel``).  The
Python-facing layers (`rates`, `optimize`, `scans`) wrap these kernels in
dataclasses and validation; nothing outside this module does heavy arithmetic.

Layouts shared with the wrappers:

``phys`` (float64[11]):
    eta_bob, loss_coeff, y0, e_det, e0, e0_vac, f_ec, m_bright, q_split,
    eps_total, eps_ec

``flags`` (int64[6]):
    gain_with_eta, coverage_half_inside, single_photon_mixed,
    finite_gain_direct, decoy_estimator (0 paired / 1 alternate / 2 strict),
    sifting_exact

Breakdown tuple (18 float64 slots):
    0 status, 1 rate, 2 mu_signal, 3 mu_decoy, 4 gain_signal, 5 qber_signal,
    6 gain_decoy, 7 qber_decoy, 8 pu_signal, 9 pu_decoy, 10 pu_vacuum,
    11 qu_lower, 12 qu_upper, 13 q1u_lower, 14 e1u_upper,
    15 finite_correction, 16 n_raw, 17 sifted

Status codes: 0 ok, 1 window condition violated, 2 no untagged pulses,
3 fluctuation exceeds untagged probability, 4 empty raw key,
5 decoy ordering violated.
"""

from __future__ import annotations

import math

from ._accel import njit

NAN = float("nan")
INF = float("inf")

# reparameterization ranges (log-spaced sigmoid maps)
DELTA_LO, DELTA_HI = 1e-5, 0.9
U_LO, U_HI = 1e-10, 0.9999
RATIO_LO, RATIO_HI = 1e-4, 0.9995
MFRAC_LO, MFRAC_HI = 1e-6, 0.995

STATUS_OK = 0.0
STATUS_WINDOW = 1.0
STATUS_NO_UNTAGGED = 2.0
STATUS_FLUCTUATION = 3.0
STATUS_EMPTY_KEY = 4.0
STATUS_ORDERING = 5.0


# --- elementary pieces --------------------------------------------------------

@njit
def h2_kernel(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


@njit
def xi_kernel(eps, m):
    # statistical deviation of an m-sample estimate at failure probability eps
    if not math.isfinite(m):
        return 0.0
    return math.sqrt((math.log(1.0 / eps) + 2.0 * math.log(m + 1.0)) / (2.0 * m))


@njit
def log_choose_kernel(upper, n):
    # generalized binomial coefficient via log-gamma; zero (=-inf) above the window
    if n > upper:
        return -INF
    return (math.lgamma(upper + 1.0) - math.lgamma(n + 1.0)
            - math.lgamma(upper - n + 1.0))


@njit
def photon_upper_kernel(m_a, delta, lam_p, n):
    # upper envelope of the emitted photon-number distribution, window (1+-delta)m_a
    if lam_p <= 0.0:
        return 1.0 if n == 0 else 0.0
    hi = (1.0 + delta) * m_a
    lo = (1.0 - delta) * m_a
    if n == 0:
        return math.exp(lo * math.log1p(-lam_p))
    if n > hi:
        return 0.0
    return math.exp(log_choose_kernel(hi, n) + n * math.log(lam_p)
                    + (hi - n) * math.log1p(-lam_p))


@njit
def photon_lower_kernel(m_a, delta, lam_p, n):
    if lam_p <= 0.0:
        return 1.0 if n == 0 else 0.0
    hi = (1.0 + delta) * m_a
    lo = (1.0 - delta) * m_a
    if n == 0:
        return math.exp(hi * math.log1p(-lam_p))
    if n > lo:
        return 0.0
    return math.exp(log_choose_kernel(lo, n) + n * math.log(lam_p)
                    + (lo - n) * math.log1p(-lam_p))


@njit
def coverage_kernel(delta, m_a, q_split, half_inside):
    if half_inside == 1:
        arg = delta * math.sqrt(m_a * (1.0 - q_split) / 2.0)
    else:
        arg = delta * math.sqrt(m_a * (1.0 - q_split)) / 2.0
    return math.erf(arg)


@njit
def gain_qber_kernel(mu, eta, y0, e_det, e0, with_eta):
    x = mu * eta if with_eta == 1 else mu
    detected = -math.expm1(-x)  # 1 - exp(-x)
    q = y0 + detected
    e = (e0 * y0 + e_det * detected) / q
    return q, e


@njit
def finite_delta_kernel(n, eps_pe, eps_bar, eps_pa):
    # rate penalty from finite raw-key length
    if not math.isfinite(n):
        return 0.0
    return (math.log2(2.0 / eps_pe) / n
            + 7.0 * math.sqrt((1.0 - math.log2(eps_bar)) / n)
            + 2.0 * math.log2(1.0 / (2.0 * eps_pa)) / n)


@njit
def decoy_correction_kernel(delta, m_a, lam_p_d, p2s_low):
    # multiphoton remainder of the single-photon estimator, in log space;
    # underflows to zero for any realistic pulse count
    if delta <= 0.0 or p2s_low <= 0.0 or lam_p_d >= 1.0:
        return 0.0
    lc = (math.log(2.0 * delta * m_a)
          + (2.0 * delta * m_a - 1.0) * math.log1p(-lam_p_d)
          + math.log(p2s_low)
          - math.lgamma((1.0 - delta) * m_a + 2.0))
    if lc < -700.0:
        return 0.0
    return math.exp(lc)


# --- rate evaluators ----------------------------------------------------------

@njit
def rate_no_decoy_infinite(dist, lam, delta, phys, flags):
    eta_bob, loss, y0, e_det, e0 = phys[0], phys[1], phys[2], phys[3], phys[4]
    f_ec, m_bright, q_split = phys[6], phys[7], phys[8]
    m_a = m_bright * 10.0 ** (-loss * dist / 10.0)
    eta = eta_bob * 10.0 ** (-loss * dist / 10.0)
    lam_p = lam * q_split / (1.0 - q_split)
    out = [NAN] * 18
    out[15], out[16], out[17] = 0.0, INF, INF
    if (1.0 + delta) * m_a * lam_p >= 1.0 or lam_p > 1.0:
        out[0] = STATUS_WINDOW
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    mu = m_a * lam * q_split
    q, e = gain_qber_kernel(mu, eta, y0, e_det, e0, flags[0])
    p_u = coverage_kernel(delta, m_a, q_split, flags[1])
    out[2], out[4], out[5] = mu, q, e
    if p_u <= 0.0:
        out[0] = STATUS_NO_UNTAGGED
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    p_t = 1.0 - p_u
    qu_up = q / p_u
    qu_low = (q - p_t) / p_u
    if qu_low < 0.0:
        qu_low = 0.0
    p0 = photon_lower_kernel(m_a, delta, lam_p, 0)
    if flags[2] == 1:
        p1 = photon_upper_kernel(m_a, delta, lam_p, 1)
    else:
        p1 = photon_lower_kernel(m_a, delta, lam_p, 1)
    q1u = qu_low + p0 + p1 - 1.0
    if q1u < 0.0:
        q1u = 0.0
    privacy = 0.0
    e1u = NAN
    if q1u > 0.0:
        e1u = q * e / q1u
        cap = e1u if e1u < 0.5 else 0.5
        privacy = q1u * (1.0 - h2_kernel(cap))
    rate = 0.5 * (-q * f_ec * h2_kernel(e) + privacy)
    out[0], out[1] = STATUS_OK, rate
    out[8] = p_u
    out[11], out[12], out[13], out[14] = qu_low, qu_up, q1u, e1u
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
            out[8], out[9], out[10], out[11], out[12], out[13], out[14],
            out[15], out[16], out[17])


@njit
def rate_no_decoy_finite(dist, n_pulses, lam, delta, m_e,
                         eps_pa, eps_bar, eps_u, eps_e, phys, flags):
    eta_bob, loss, y0, e_det, e0 = phys[0], phys[1], phys[2], phys[3], phys[4]
    f_ec, m_bright, q_split = phys[6], phys[7], phys[8]
    m_a = m_bright * 10.0 ** (-loss * dist / 10.0)
    eta = eta_bob * 10.0 ** (-loss * dist / 10.0)
    lam_p = lam * q_split / (1.0 - q_split)
    out = [NAN] * 18
    if (1.0 + delta) * m_a * lam_p >= 1.0 or lam_p > 1.0:
        out[0] = STATUS_WINDOW
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    mu = m_a * lam * q_split
    q, e = gain_qber_kernel(mu, eta, y0, e_det, e0, flags[0])
    out[2], out[4], out[5] = mu, q, e
    p_u_inf = coverage_kernel(delta, m_a, q_split, flags[1])
    if p_u_inf <= 0.0:
        out[0] = STATUS_NO_UNTAGGED
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    xi_u = xi_kernel(eps_u, n_pulses)
    p_u = p_u_inf - xi_u
    out[8] = p_u
    if p_u <= 0.0:
        out[0] = STATUS_FLUCTUATION
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    if math.isfinite(n_pulses):
        sifted = 0.5 * q * n_pulses
        n_raw = sifted - m_e
    else:
        sifted = INF
        n_raw = INF
    out[16], out[17] = n_raw, sifted
    if n_raw <= 0.0:
        out[0] = STATUS_EMPTY_KEY
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    qu_up = q / p_u
    if flags[3] == 1:
        denom = 1.0 - p_u_inf - xi_u
        qu_low = 0.0 if denom <= 0.0 else (q - p_u_inf - xi_u) / denom
    else:
        qu_low = (q - (1.0 - p_u)) / p_u
    if qu_low < 0.0:
        qu_low = 0.0
    p0 = photon_lower_kernel(m_a, delta, lam_p, 0)
    if flags[2] == 1:
        p1 = photon_upper_kernel(m_a, delta, lam_p, 1)
    else:
        p1 = photon_lower_kernel(m_a, delta, lam_p, 1)
    q1u = qu_low + p0 + p1 - 1.0
    if q1u < 0.0:
        q1u = 0.0
    privacy = 0.0
    e1u = NAN
    if q1u > 0.0:
        e1u = q * (e + xi_kernel(eps_e, m_e)) / q1u
        cap = e1u if e1u < 0.5 else 0.5
        privacy = q1u * (1.0 - h2_kernel(cap))
    eps_pe = eps_u if eps_u < eps_e else eps_e
    corr = finite_delta_kernel(n_raw, eps_pe, eps_bar, eps_pa)
    rate = 0.5 * (q * (-f_ec * h2_kernel(e) - corr) + privacy)
    if flags[5] == 1 and math.isfinite(sifted):
        rate *= 1.0 - m_e / sifted
    out[0], out[1] = STATUS_OK, rate
    out[11], out[12], out[13], out[14], out[15] = qu_low, qu_up, q1u, e1u, corr
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
            out[8], out[9], out[10], out[11], out[12], out[13], out[14],
            out[15], out[16], out[17])


@njit
def _decoy_q1u_e1u(m_a, delta, lam_p_s, lam_p_d, qu_s_up, qu_d_low, qu_v_up,
                   eq_s_up, eq_v_low, estimator):
    """Single-photon untagged gain (lower) and error (upper) for the signal class."""
    p0s_l = photon_lower_kernel(m_a, delta, lam_p_s, 0)
    p1s_l = photon_lower_kernel(m_a, delta, lam_p_s, 1)
    p2s_l = photon_lower_kernel(m_a, delta, lam_p_s, 2)
    p2s_u = photon_upper_kernel(m_a, delta, lam_p_s, 2)
    p0d_u = photon_upper_kernel(m_a, delta, lam_p_d, 0)
    p1d_u = photon_upper_kernel(m_a, delta, lam_p_d, 1)
    p2d_l = photon_lower_kernel(m_a, delta, lam_p_d, 2)
    p2d_u = photon_upper_kernel(m_a, delta, lam_p_d, 2)

    if estimator == 0:      # paired: one bound per (class, n), reused everywhere
        vac = p0s_l * p2d_u - p0d_u * p2s_l
        den = p1d_u * p2s_l - p1s_l * p2d_u
    elif estimator == 1:    # alternate: zero-photon-weighted vacuum subtraction
        vac = p0s_l * p2d_l - p0d_u * p0s_l
        den = p1d_u * p2s_u - p1s_l * p2d_l
    else:                   # strict: every slot bounded in the safe direction
        vac = p0s_l * p2d_l - p0d_u * p2s_u
        den = p1d_u * p2s_u - p1s_l * p2d_l

    corr = decoy_correction_kernel(delta, m_a, lam_p_d, p2s_l)
    q1u = 0.0
    if den > 0.0:
        num = qu_d_low * p2s_l - qu_s_up * p2d_u + qu_v_up * vac - corr
        q1u = p1s_l * num / den
        if q1u < 0.0:
            q1u = 0.0
        elif q1u > qu_s_up:
            q1u = qu_s_up
    if q1u <= 0.0:
        return 0.0, NAN
    e1u = (eq_s_up - p0s_l * eq_v_low) / q1u
    if e1u < 0.0:
        e1u = 0.0
    return q1u, e1u


@njit
def rate_decoy_infinite(dist, lam_s, lam_d, delta, phys, flags):
    eta_bob, loss, y0, e_det, e0 = phys[0], phys[1], phys[2], phys[3], phys[4]
    e0_vac, f_ec, m_bright, q_split = phys[5], phys[6], phys[7], phys[8]
    m_a = m_bright * 10.0 ** (-loss * dist / 10.0)
    eta = eta_bob * 10.0 ** (-loss * dist / 10.0)
    lam_p_s = lam_s * q_split / (1.0 - q_split)
    lam_p_d = lam_d * q_split / (1.0 - q_split)
    out = [NAN] * 18
    out[15], out[16], out[17] = 0.0, INF, INF
    if lam_d >= lam_s or lam_d <= 0.0:
        out[0] = STATUS_ORDERING
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    if (1.0 + delta) * m_a * lam_p_s >= 1.0 or lam_p_s > 1.0:
        out[0] = STATUS_WINDOW
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    mu_s = m_a * lam_s * q_split
    mu_d = m_a * lam_d * q_split
    q_s, e_s = gain_qber_kernel(mu_s, eta, y0, e_det, e0, flags[0])
    q_d, e_d = gain_qber_kernel(mu_d, eta, y0, e_det, e0, flags[0])
    q_v, e_v = y0, e0_vac
    out[2], out[3], out[4], out[5], out[6], out[7] = mu_s, mu_d, q_s, e_s, q_d, e_d
    p_u = coverage_kernel(delta, m_a, q_split, flags[1])
    if p_u <= 0.0:
        out[0] = STATUS_NO_UNTAGGED
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    p_t = 1.0 - p_u
    qu_s_up = q_s / p_u
    qu_d_low = (q_d - p_t) / p_u
    if qu_d_low < 0.0:
        qu_d_low = 0.0
    qu_v_up = q_v / p_u
    eq_s_up = e_s * q_s / p_u
    eq_v_low = (e_v * q_v - p_t) / p_u
    if eq_v_low < 0.0:
        eq_v_low = 0.0
    q1u, e1u = _decoy_q1u_e1u(m_a, delta, lam_p_s, lam_p_d, qu_s_up, qu_d_low,
                              qu_v_up, eq_s_up, eq_v_low, flags[4])
    privacy = 0.0
    if q1u > 0.0:
        cap = e1u if e1u < 0.5 else 0.5
        privacy = p_u * q1u * (1.0 - h2_kernel(cap))
    p_signal = 0.5  # random signal/decoy assignment in the asymptotic protocol
    rate = 0.5 * p_signal * (-q_s * f_ec * h2_kernel(e_s) + privacy)
    out[0], out[1] = STATUS_OK, rate
    out[8], out[9], out[10] = p_u, p_u, p_u
    out[11], out[12], out[13], out[14] = qu_d_low, qu_s_up, q1u, e1u
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
            out[8], out[9], out[10], out[11], out[12], out[13], out[14],
            out[15], out[16], out[17])


@njit
def rate_decoy_finite(dist, n_pulses, lam_s, lam_d, delta, m_e, p_s, p_d,
                      eps_pa, eps_bar, eps_us, eps_ud, eps_uv, eps_es,
                      phys, flags):
    eta_bob, loss, y0, e_det, e0 = phys[0], phys[1], phys[2], phys[3], phys[4]
    e0_vac, f_ec, m_bright, q_split = phys[5], phys[6], phys[7], phys[8]
    m_a = m_bright * 10.0 ** (-loss * dist / 10.0)
    eta = eta_bob * 10.0 ** (-loss * dist / 10.0)
    lam_p_s = lam_s * q_split / (1.0 - q_split)
    lam_p_d = lam_d * q_split / (1.0 - q_split)
    p_v = 1.0 - p_s - p_d
    out = [NAN] * 18
    if lam_d >= lam_s or lam_d <= 0.0 or p_v <= 0.0 or p_s <= 0.0 or p_d <= 0.0:
        out[0] = STATUS_ORDERING
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    if (1.0 + delta) * m_a * lam_p_s >= 1.0 or lam_p_s > 1.0:
        out[0] = STATUS_WINDOW
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    mu_s = m_a * lam_s * q_split
    mu_d = m_a * lam_d * q_split
    q_s, e_s = gain_qber_kernel(mu_s, eta, y0, e_det, e0, flags[0])
    q_d, e_d = gain_qber_kernel(mu_d, eta, y0, e_det, e0, flags[0])
    q_v, e_v = y0, e0_vac
    out[2], out[3], out[4], out[5], out[6], out[7] = mu_s, mu_d, q_s, e_s, q_d, e_d
    p_u_inf = coverage_kernel(delta, m_a, q_split, flags[1])
    if p_u_inf <= 0.0:
        out[0] = STATUS_NO_UNTAGGED
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    pu_s = p_u_inf - xi_kernel(eps_us, n_pulses * p_s)
    pu_d = p_u_inf - xi_kernel(eps_ud, n_pulses * p_d)
    pu_v = p_u_inf - xi_kernel(eps_uv, n_pulses * p_v)
    out[8], out[9], out[10] = pu_s, pu_d, pu_v
    if pu_s <= 0.0 or pu_d <= 0.0 or pu_v <= 0.0:
        out[0] = STATUS_FLUCTUATION
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    if math.isfinite(n_pulses):
        sifted = 0.5 * n_pulses * p_s * q_s
        n_raw = sifted - m_e
    else:
        sifted = INF
        n_raw = INF
    out[16], out[17] = n_raw, sifted
    if n_raw <= 0.0:
        out[0] = STATUS_EMPTY_KEY
        return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
                out[8], out[9], out[10], out[11], out[12], out[13], out[14],
                out[15], out[16], out[17])
    qu_s_up = q_s / pu_s
    if flags[3] == 1:
        denom = 1.0 - p_u_inf - (p_u_inf - pu_d)
        qu_d_low = 0.0 if denom <= 0.0 else (q_d - p_u_inf - (p_u_inf - pu_d)) / denom
    else:
        qu_d_low = (q_d - (1.0 - pu_d)) / pu_d
    if qu_d_low < 0.0:
        qu_d_low = 0.0
    qu_v_up = q_v / pu_v
    eq_s_up = q_s * (e_s + xi_kernel(eps_es, m_e)) / pu_s
    eq_v_low = (e_v * q_v - (1.0 - pu_v)) / pu_v
    if eq_v_low < 0.0:
        eq_v_low = 0.0
    q1u, e1u = _decoy_q1u_e1u(m_a, delta, lam_p_s, lam_p_d, qu_s_up, qu_d_low,
                              qu_v_up, eq_s_up, eq_v_low, flags[4])
    privacy = 0.0
    if q1u > 0.0:
        cap = e1u if e1u < 0.5 else 0.5
        privacy = pu_s * q1u * (1.0 - h2_kernel(cap))
    eps_pe = eps_us
    if eps_ud < eps_pe:
        eps_pe = eps_ud
    if eps_uv < eps_pe:
        eps_pe = eps_uv
    if eps_es < eps_pe:
        eps_pe = eps_es
    corr = finite_delta_kernel(n_raw, eps_pe, eps_bar, eps_pa)
    rate = 0.5 * p_s * (q_s * (-f_ec * h2_kernel(e_s) - corr) + privacy)
    if flags[5] == 1 and math.isfinite(sifted):
        rate *= 1.0 - m_e / sifted
    out[0], out[1] = STATUS_OK, rate
    out[11], out[12], out[13], out[14], out[15] = qu_d_low, qu_s_up, q1u, e1u, corr
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7],
            out[8], out[9], out[10], out[11], out[12], out[13], out[14],
            out[15], out[16], out[17])


# --- unconstrained-to-feasible maps (used by the optimizer) --------------------

@njit
def sigmoid_kernel(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@njit
def logrange_kernel(z, lo, hi):
    # sigmoid onto a log-spaced interval; total and strictly inside (lo, hi)
    return math.exp(math.log(lo) + sigmoid_kernel(z) * (math.log(hi) - math.log(lo)))


@njit
def lambda_cap_kernel(delta, m_a, q_split):
    # largest encoder transmittance compatible with the sub-single-photon window
    cap = (1.0 - q_split) / (q_split * (1.0 + delta) * m_a)
    return cap if cap < 1.0 else 1.0


@njit
def params_no_decoy_infinite(raw, dist, phys, flags):
    m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
    delta = logrange_kernel(raw[0], DELTA_LO, DELTA_HI)
    u = logrange_kernel(raw[1], U_LO, U_HI)
    lam = u * lambda_cap_kernel(delta, m_a, phys[8])
    return lam, delta


@njit
def params_no_decoy_finite(raw, dist, n_pulses, phys, flags):
    m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
    eta = phys[0] * 10.0 ** (-phys[1] * dist / 10.0)
    delta = logrange_kernel(raw[0], DELTA_LO, DELTA_HI)
    u = logrange_kernel(raw[1], U_LO, U_HI)
    lam = u * lambda_cap_kernel(delta, m_a, phys[8])
    mfrac = logrange_kernel(raw[2], MFRAC_LO, MFRAC_HI)
    mu = m_a * lam * phys[8]
    q, _ = gain_qber_kernel(mu, eta, phys[2], phys[3], phys[4], flags[0])
    m_e = mfrac * 0.5 * q * n_pulses
    budget = phys[9] - phys[10]
    w0 = math.exp(min(max(raw[3], -40.0), 40.0))
    w1 = math.exp(min(max(raw[4], -40.0), 40.0))
    w2 = math.exp(min(max(raw[5], -40.0), 40.0))
    w3 = math.exp(min(max(raw[6], -40.0), 40.0))
    tot = w0 + w1 + w2 + w3
    return (lam, delta, m_e, budget * w0 / tot, budget * w1 / tot,
            budget * w2 / tot, budget * w3 / tot)


@njit
def params_decoy_infinite(raw, dist, phys, flags):
    m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
    delta = logrange_kernel(raw[0], DELTA_LO, DELTA_HI)
    u = logrange_kernel(raw[1], U_LO, U_HI)
    lam_s = u * lambda_cap_kernel(delta, m_a, phys[8])
    ratio = logrange_kernel(raw[2], RATIO_LO, RATIO_HI)
    return lam_s, lam_s * ratio, delta


@njit
def params_decoy_finite(raw, dist, n_pulses, phys, flags):
    m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
    eta = phys[0] * 10.0 ** (-phys[1] * dist / 10.0)
    delta = logrange_kernel(raw[0], DELTA_LO, DELTA_HI)
    u = logrange_kernel(raw[1], U_LO, U_HI)
    lam_s = u * lambda_cap_kernel(delta, m_a, phys[8])
    ratio = logrange_kernel(raw[2], RATIO_LO, RATIO_HI)
    lam_d = lam_s * ratio
    mfrac = logrange_kernel(raw[3], MFRAC_LO, MFRAC_HI)
    ws = math.exp(min(max(raw[4], -40.0), 40.0))
    wd = math.exp(min(max(raw[5], -40.0), 40.0))
    wv = math.exp(min(max(raw[6], -40.0), 40.0))
    wt = ws + wd + wv
    p_s, p_d = ws / wt, wd / wt
    mu_s = m_a * lam_s * phys[8]
    q_s, _ = gain_qber_kernel(mu_s, eta, phys[2], phys[3], phys[4], flags[0])
    m_e = mfrac * 0.5 * n_pulses * p_s * q_s
    budget = phys[9] - phys[10]
    b0 = math.exp(min(max(raw[7], -40.0), 40.0))
    b1 = math.exp(min(max(raw[8], -40.0), 40.0))
    b2 = math.exp(min(max(raw[9], -40.0), 40.0))
    b3 = math.exp(min(max(raw[10], -40.0), 40.0))
    b4 = math.exp(min(max(raw[11], -40.0), 40.0))
    b5 = math.exp(min(max(raw[12], -40.0), 40.0))
    bt = b0 + b1 + b2 + b3 + b4 + b5
    return (lam_s, lam_d, delta, m_e, p_s, p_d,
            budget * b0 / bt, budget * b1 / bt, budget * b2 / bt,
            budget * b3 / bt, budget * b4 / bt, budget * b5 / bt)


PENALTY = -1.0e6


@njit
def objective_no_decoy_infinite(raw, dist, phys, flags):
    lam, delta = params_no_decoy_infinite(raw, dist, phys, flags)
    res = rate_no_decoy_infinite(dist, lam, delta, phys, flags)
    if res[0] != STATUS_OK:
        return PENALTY
    return res[1]


@njit
def objective_no_decoy_finite(raw, dist, n_pulses, phys, flags):
    p = params_no_decoy_finite(raw, dist, n_pulses, phys, flags)
    res = rate_no_decoy_finite(dist, n_pulses, p[0], p[1], p[2], p[3], p[4],
                               p[5], p[6], phys, flags)
    if res[0] == STATUS_FLUCTUATION:
        guide = res[8] if res[8] == res[8] else -1.0
        return PENALTY + guide
    if res[0] != STATUS_OK:
        return PENALTY
    return res[1]


@njit
def objective_decoy_infinite(raw, dist, phys, flags):
    p = params_decoy_infinite(raw, dist, phys, flags)
    res = rate_decoy_infinite(dist, p[0], p[1], p[2], phys, flags)
    if res[0] != STATUS_OK:
        return PENALTY
    return res[1]


@njit
def objective_decoy_finite(raw, dist, n_pulses, phys, flags):
    p = params_decoy_finite(raw, dist, n_pulses, phys, flags)
    res = rate_decoy_finite(dist, n_pulses, p[0], p[1], p[2], p[3], p[4], p[5],
                            p[6], p[7], p[8], p[9], p[10], p[11], phys, flags)
    if res[0] == STATUS_FLUCTUATION:
        guide = res[8]
        if res[9] < guide:
            guide = res[9]
        if res[10] < guide:
            guide = res[10]
        if guide != guide:
            guide = -1.0
        return PENALTY + guide
    if res[0] != STATUS_OK:
        return PENALTY
    return res[1]


# --- dense grid evaluation (brute-force oracle) --------------------------------

@njit
def grid_no_decoy_infinite(dist, deltas, us, phys, flags):
    best = -INF
    bi, bj = -1, -1
    for i in range(deltas.shape[0]):
        for j in range(us.shape[0]):
            m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
            lam = us[j] * lambda_cap_kernel(deltas[i], m_a, phys[8])
            res = rate_no_decoy_infinite(dist, lam, deltas[i], phys, flags)
            if res[0] == STATUS_OK and res[1] > best:
                best = res[1]
                bi, bj = i, j
    return best, bi, bj


@njit
def grid_decoy_infinite(dist, deltas, us, ratios, phys, flags):
    best = -INF
    bi, bj, bk = -1, -1, -1
    for i in range(deltas.shape[0]):
        m_a = phys[7] * 10.0 ** (-phys[1] * dist / 10.0)
        cap = lambda_cap_kernel(deltas[i], m_a, phys[8])
        for j in range(us.shape[0]):
            lam_s = us[j] * cap
            for k in range(ratios.shape[0]):
                res = rate_decoy_infinite(dist, lam_s, lam_s * ratios[k],
                                          deltas[i], phys, flags)
                if res[0] == STATUS_OK and res[1] > best:
                    best = res[1]
                    bi, bj, bk = i, j, k
    return best, bi, bj, bk
