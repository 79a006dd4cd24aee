# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Adaptive 21-point Gauss-Kronrod quadrature of the rescaled density integrand
and batched assembly of -ln p(Y) from Gram spectra, all in C with the GIL
released, so worker threads scale across cores.
"""

import math

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN, exp, fabs, fmax, log, log1p, sqrt

from blockfade.errors import QuadratureError

cnp.import_array()

BACKEND = "native"

cdef double LN_PI = 1.1447298858494001741434273513531

cdef int STATUS_OK = 0
cdef int STATUS_DEGENERATE = 1
cdef int STATUS_QUADRATURE = 2
cdef int STATUS_SIGN = 3

# 21-point Kronrod nodes/weights on [-1, 1]; the embedded 10-point Gauss rule
# lives at the odd indices (weights WG10).  Generated by tools/gen_gauss_kronrod.py.
cdef double XK21[21]
cdef double WK21[21]
cdef double WG10[10]

_XK21 = [
    -0.9956571630258080807, -0.9739065285171717201, -0.9301574913557082260,
    -0.8650633666889845107, -0.7808177265864168971, -0.6794095682990244062,
    -0.5627571346686046833, -0.4333953941292471908, -0.2943928627014601981,
    -0.1488743389816312109, 0.0, 0.1488743389816312109, 0.2943928627014601981,
    0.4333953941292471908, 0.5627571346686046833, 0.6794095682990244062,
    0.7808177265864168971, 0.8650633666889845107, 0.9301574913557082260,
    0.9739065285171717201, 0.9956571630258080807,
]
_WK21 = [
    0.01169463886737187428, 0.03255816230796472748, 0.05475589657435199603,
    0.07503967481091995277, 0.09312545458369760554, 0.1093871588022976419,
    0.1234919762620658511, 0.1347092173114733259, 0.1427759385770600808,
    0.1477391049013384914, 0.1494455540029169057, 0.1477391049013384914,
    0.1427759385770600808, 0.1347092173114733259, 0.1234919762620658511,
    0.1093871588022976419, 0.09312545458369760554, 0.07503967481091995277,
    0.05475589657435199603, 0.03255816230796472748, 0.01169463886737187428,
]
_WG10 = [
    0.06667134430868813759, 0.1494513491505805931, 0.2190863625159820440,
    0.2692667193099963551, 0.2955242247147528702, 0.2955242247147528702,
    0.2692667193099963551, 0.2190863625159820440, 0.1494513491505805931,
    0.06667134430868813759,
]

for _i in range(21):
    XK21[_i] = _XK21[_i]
    WK21[_i] = _WK21[_i]
for _i in range(10):
    WG10[_i] = _WG10[_i]


cdef struct FtParams:
    double x        # spectrum point (argument of f_k)
    double snr
    double nt
    double son      # snr / n_t
    double c_geom   # n_b + 1 - n_r
    double lg_a1    # lgamma(a_pow + 1), precomputed under the GIL
    double worst_a  # worst unconverged interval, set on failure
    double worst_b
    int a_pow       # k - 1 + n_t - n_r


cdef inline double _integrand(double z, FtParams* p) noexcept nogil:
    cdef double e
    if z < 0.0:
        return 0.0
    e = -p.x * p.nt / (z * p.snr + p.nt) - z - p.c_geom * log1p(z * p.son)
    if p.a_pow > 0:
        if z == 0.0:
            return 0.0
        e += p.a_pow * log(z)
    return exp(e)


cdef inline void _gk21(FtParams* p, double a, double b,
                       double* res, double* err) noexcept nogil:
    cdef double c = 0.5 * (a + b)
    cdef double h = 0.5 * (b - a)
    cdef double kv = 0.0, gv = 0.0, fv
    cdef int i
    for i in range(21):
        fv = _integrand(c + h * XK21[i], p)
        kv += WK21[i] * fv
        if i & 1:
            gv += WG10[(i - 1) >> 1] * fv
    res[0] = kv * h
    err[0] = fabs(kv - gv) * h


cdef inline double _tail_bound(FtParams* p, double t) noexcept nogil:
    # Gamma(a+1, t) * (t*snr/nt + 1)^-c with Gamma(a+1,t) = a! e^-t sum t^m/m!
    cdef double s = 1.0, term = 1.0
    cdef int m
    for m in range(1, p.a_pow + 1):
        term *= t / m
        s += term
    return exp(p.lg_a1 - t + log(s) - p.c_geom * log1p(t * p.son))


cdef enum:
    MAXSEG = 320


cdef double _ftilde_raw(FtParams* p, double rtol, int max_subdiv,
                        int* status) noexcept nogil:
    """Adaptive integral of the rescaled integrand over [0, inf), without
    the (n_t/snr)^(k-1) row prefactor."""
    cdef double seg_a[MAXSEG]
    cdef double seg_b[MAXSEG]
    cdef double seg_i[MAXSEG]
    cdef double seg_e[MAXSEG]
    cdef int nseg = 0, splits = 0, worst, i
    cdef double zs, t_hi, total, toterr, mid, prev

    status[0] = STATUS_OK
    zs = (sqrt(p.x * p.nt * p.snr) - p.nt) / p.snr
    if zs < 0.0:
        zs = 0.0
    t_hi = fmax(40.0, 2.0 * p.a_pow + 20.0)
    if zs > 0.0:
        t_hi = fmax(t_hi, zs + 30.0 * sqrt(zs + 1.0))

    # initial breakpoints bracketing the interior maximum, if any
    cdef double brk[3]
    brk[0] = 0.3 * zs
    brk[1] = zs
    brk[2] = 3.0 * zs
    prev = 0.0
    if zs > 0.0:
        for i in range(3):
            mid = brk[i]
            if prev + 1e-12 < mid and mid < 0.9 * t_hi:
                seg_a[nseg] = prev
                seg_b[nseg] = mid
                _gk21(p, prev, mid, &seg_i[nseg], &seg_e[nseg])
                nseg += 1
                prev = mid
    seg_a[nseg] = prev
    seg_b[nseg] = t_hi
    _gk21(p, prev, t_hi, &seg_i[nseg], &seg_e[nseg])
    nseg += 1

    while True:
        total = 0.0
        toterr = 0.0
        for i in range(nseg):
            total += seg_i[i]
            toterr += seg_e[i]
        if toterr <= rtol * fabs(total) + 5e-306:
            # converged on [0, t_hi]; extend until the tail is negligible
            if _tail_bound(p, t_hi) <= 1e-3 * rtol * total + 5e-306:
                return total
            if nseg >= MAXSEG or t_hi > 1e9:
                status[0] = STATUS_QUADRATURE
                p.worst_a = t_hi
                p.worst_b = 2.0 * t_hi
                return total
            seg_a[nseg] = t_hi
            seg_b[nseg] = 2.0 * t_hi
            _gk21(p, t_hi, 2.0 * t_hi, &seg_i[nseg], &seg_e[nseg])
            nseg += 1
            t_hi *= 2.0
            continue
        worst = 0
        for i in range(1, nseg):
            if seg_e[i] > seg_e[worst]:
                worst = i
        if nseg >= MAXSEG or splits >= max_subdiv:
            status[0] = STATUS_QUADRATURE
            p.worst_a = seg_a[worst]
            p.worst_b = seg_b[worst]
            return total
        mid = 0.5 * (seg_a[worst] + seg_b[worst])
        seg_a[nseg] = mid
        seg_b[nseg] = seg_b[worst]
        _gk21(p, mid, seg_b[worst], &seg_i[nseg], &seg_e[nseg])
        nseg += 1
        seg_b[worst] = mid
        _gk21(p, seg_a[worst], mid, &seg_i[worst], &seg_e[worst])
        splits += 1


cdef double _LGAMMA_INT[64]
_lg = [math.lgamma(m + 1) for m in range(64)]
for _i in range(64):
    _LGAMMA_INT[_i] = _lg[_i]


cdef void _fill_params(FtParams* p, int k, int n_t, int n_r, int n_b,
                       double snr):
    p.snr = snr
    p.nt = n_t
    p.son = snr / n_t
    p.c_geom = n_b + 1 - n_r
    p.a_pow = k - 1 + n_t - n_r
    p.lg_a1 = _LGAMMA_INT[p.a_pow]
    p.x = 0.0
    p.worst_a = 0.0
    p.worst_b = 0.0


def _validate(double x, int k, int n_t, int n_r, int n_b, double snr):
    if not (x >= 0.0 and x == x and x != INFINITY):
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    if not 1 <= k <= n_r:
        raise ValueError(f"k must lie in [1, n_r={n_r}], got {k}")
    if n_t < n_r or n_b < n_r:
        raise ValueError(
            f"requires n_t >= n_r and n_b >= n_r, got ({n_t}, {n_r}, {n_b})")
    if not (snr > 0 and snr != INFINITY):
        raise ValueError(f"snr must be positive, got {snr!r}")


def ftilde(double x, int k, int n_t, int n_r, int n_b, double snr,
           double rtol=1e-9, int max_subdiv=200):
    """Exponentially rescaled density integral e^{-x} f_k(x)."""
    cdef FtParams p
    cdef int st = 0
    cdef double v
    _validate(x, k, n_t, n_r, n_b, snr)
    _fill_params(&p, k, n_t, n_r, n_b, snr)
    p.x = x
    with nogil:
        v = _ftilde_raw(&p, rtol, max_subdiv, &st)
    if st != STATUS_OK:
        raise QuadratureError(
            f"density integral for k={k}, x={x} did not converge",
            worst_interval=(p.worst_a, p.worst_b))
    return (n_t / snr) ** (k - 1) * v


def ftilde_many(xs, int k, int n_t, int n_r, int n_b, double snr,
                double rtol=1e-9, int max_subdiv=200):
    xs_arr = np.ascontiguousarray(xs, dtype=np.float64)
    if xs_arr.size and not np.all(np.isfinite(xs_arr) & (xs_arr >= 0.0)):
        raise ValueError("all grid abscissae must be finite and >= 0")
    cdef double[::1] xv = xs_arr
    cdef Py_ssize_t n = xv.shape[0], i
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef FtParams p
    cdef int st = 0
    cdef double pref
    _validate(0.0, k, n_t, n_r, n_b, snr)
    _fill_params(&p, k, n_t, n_r, n_b, snr)
    pref = (n_t / snr) ** (k - 1)
    with nogil:
        for i in range(n):
            p.x = xv[i]
            out[i] = pref * _ftilde_raw(&p, rtol, max_subdiv, &st)
            if st != STATUS_OK:
                break
    if st != STATUS_OK:
        raise QuadratureError(
            f"density integral for k={k}, x={xv[i]} did not converge",
            worst_interval=(p.worst_a, p.worst_b))
    return out_arr


cdef void _slogdet_small(double* a, int n, double* logabs, double* sgn) noexcept nogil:
    """Pivoted LU sign/log|det| of a small row-major matrix (destroys a)."""
    cdef int i, j, k, piv
    cdef double big, tmp, s = 1.0, la = 0.0
    for k in range(n):
        piv = k
        big = fabs(a[k * n + k])
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > big:
                big = fabs(a[i * n + k])
                piv = i
        if big == 0.0:
            sgn[0] = 0.0
            logabs[0] = -INFINITY
            return
        if piv != k:
            s = -s
            for j in range(n):
                tmp = a[k * n + j]
                a[k * n + j] = a[piv * n + j]
                a[piv * n + j] = tmp
        tmp = a[k * n + k]
        la += log(fabs(tmp))
        if tmp < 0.0:
            s = -s
        for i in range(k + 1, n):
            tmp = a[i * n + k] / a[k * n + k]
            for j in range(k + 1, n):
                a[i * n + j] -= tmp * a[k * n + j]
    sgn[0] = s
    logabs[0] = la


cdef inline double _hermite(const double* knots, const double* vals,
                            const double* ders, Py_ssize_t np_, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = np_ - 1, mid
    cdef double x0, h, t, t2, t3
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if knots[mid] <= x:
            lo = mid
        else:
            hi = mid
    x0 = knots[lo]
    h = knots[lo + 1] - x0
    t = (x - x0) / h
    t2 = t * t
    t3 = t2 * t
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * vals[lo]
            + h * (t3 - 2.0 * t2 + t) * ders[lo]
            + (-2.0 * t3 + 3.0 * t2) * vals[lo + 1]
            + h * (t3 - t2) * ders[lo + 1])


def neg_log_density_batch(d, int n_t, int n_r, int n_b, double snr,
                          double rtol, int max_subdiv, double gap_coeff,
                          knots=None, values=None, derivs=None,
                          double x_max=-1.0):
    """-ln p(Y) for a (B, n_r) batch of ascending Gram spectra.

    Returns (neg_lnp, status); see the fallback module for the status codes.
    """
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t batch = dv.shape[0]
    cdef int nr = dv.shape[1]
    if nr != n_r:
        raise ValueError(f"spectrum width {dv.shape[1]} != n_r {n_r}")
    if nr > 8:
        raise ValueError(f"n_r <= 8 supported, got {nr}")

    out_arr = np.full(batch, np.nan)
    st_arr = np.zeros(batch, dtype=np.int8)
    cdef double[::1] out = out_arr
    cdef signed char[::1] st = st_arr

    cdef FtParams params[8]
    cdef double lpref[8]
    cdef int i, j
    for i in range(nr):
        _fill_params(&params[i], i + 1, n_t, n_r, n_b, snr)
        lpref[i] = i * log(n_t / snr)

    cdef bint have_grid = knots is not None
    cdef double[::1] gk
    cdef double[:, ::1] gv
    cdef double[:, ::1] gd
    cdef Py_ssize_t npk = 0
    if have_grid:
        gk = np.ascontiguousarray(knots, dtype=np.float64)
        gv = np.ascontiguousarray(values, dtype=np.float64)
        gd = np.ascontiguousarray(derivs, dtype=np.float64)
        npk = gk.shape[0]
    else:
        gk = np.empty(1)
        gv = np.empty((1, 1))
        gd = np.empty((1, 1))

    cdef double const_term = n_b * nr * LN_PI
    for i in range(nr):
        const_term += _LGAMMA_INT[n_t - (i + 1)]

    cdef double lnz[64]
    cdef double mat[64]
    cdef double gap_tol, dmax, xj, raw, cmax, lvdm, lnp, ld, sgn
    cdef Py_ssize_t b
    cdef int qstat, row_status

    with nogil:
        for b in range(batch):
            row_status = STATUS_OK
            dmax = dv[b, nr - 1]
            gap_tol = gap_coeff * fmax(1.0, dmax)
            for j in range(nr - 1):
                if dv[b, j + 1] - dv[b, j] < gap_tol:
                    row_status = STATUS_DEGENERATE
                    break
            if row_status == STATUS_OK:
                for j in range(nr):
                    xj = dv[b, j]
                    if have_grid and xj <= x_max:
                        for i in range(nr):
                            lnz[i * nr + j] = _hermite(&gk[0], &gv[i, 0],
                                                       &gd[i, 0], npk, xj)
                    else:
                        for i in range(nr):
                            params[i].x = xj
                            raw = _ftilde_raw(&params[i], rtol, max_subdiv,
                                              &qstat)
                            if qstat != STATUS_OK:
                                row_status = STATUS_QUADRATURE
                                break
                            lnz[i * nr + j] = (lpref[i] + log(raw)) if raw > 0.0 else -INFINITY
                    if row_status != STATUS_OK:
                        break
            if row_status == STATUS_OK:
                # rescale columns to their max before the determinant
                lnp = 0.0
                for j in range(nr):
                    cmax = lnz[j]
                    for i in range(1, nr):
                        if lnz[i * nr + j] > cmax:
                            cmax = lnz[i * nr + j]
                    if cmax == -INFINITY:
                        row_status = STATUS_SIGN
                        break
                    lnp += cmax
                    for i in range(nr):
                        mat[i * nr + j] = exp(lnz[i * nr + j] - cmax)
            if row_status == STATUS_OK:
                _slogdet_small(mat, nr, &ld, &sgn)
                if sgn <= 0.0:
                    row_status = STATUS_SIGN
                else:
                    lvdm = 0.0
                    for i in range(nr):
                        for j in range(i + 1, nr):
                            lvdm += log(dv[b, j] - dv[b, i])
                    out[b] = -(lnp + ld - lvdm - const_term)
            st[b] = <signed char> row_status
    return out_arr, st_arr
