# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: counter-based stable noise and the Euler stepper.

Both routines must agree with the numpy versions in ``_pykernels`` up to
libm rounding; the integer hashing is bit-identical.
"""

from cython.parallel cimport prange
from libc.math cimport sin, cos, tan, log, exp, pow, fabs, isfinite, M_PI
from libc.stdint cimport uint64_t, int64_t, uint8_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = 0x94D049BB133111EB
cdef double TWO_M53 = 1.0 / 9007199254740992.0

# keep in sync with models.SIGMA_KINDS / DRIFT_KINDS
cdef enum:
    MAXD = 16
    SIG_CONST = 0
    SIG_DIAG_SINE = 1
    SIG_ROT_MIX = 2
    B_ZERO = 0
    B_CONST = 1
    B_HOLDER = 2


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t path_key(uint64_t seed, int64_t path) noexcept nogil:
    return mix64(seed + GOLDEN * <uint64_t>(path + 1))


cdef inline double counter_uniform(uint64_t key, int64_t step, int64_t coord, int64_t lane) noexcept nogil:
    cdef uint64_t c = (<uint64_t>step << 20) | (<uint64_t>coord << 1) | <uint64_t>lane
    cdef uint64_t h = mix64(key ^ mix64(c + GOLDEN))
    return (<double>(h >> 11) + 0.5) * TWO_M53


cdef inline double cms(double alpha, double u1, double u2) noexcept nogil:
    cdef double v = M_PI * (u1 - 0.5)
    cdef double lw, e
    if alpha == 1.0:
        return tan(v)
    # both powers folded into one exp; cos(v) and cos((1 - alpha) v) are positive
    lw = log(-log(u2))
    e = ((1.0 - alpha) * (log(cos((1.0 - alpha) * v)) - lw) - log(cos(v))) / alpha
    return sin(alpha * v) * exp(e)


cdef inline double stable_draw(uint64_t key, int64_t step, int64_t coord, double alpha) noexcept nogil:
    return cms(alpha, counter_uniform(key, step, coord, 0), counter_uniform(key, step, coord, 1))


def stable_fill(double[:, ::1] out, uint64_t seed, int64_t path0, int64_t step,
                double alpha, double scale, int nthreads=1):
    """Fill ``out[p, i]`` with ``scale * S(seed, path0 + p, step, i)``."""
    cdef Py_ssize_t n = out.shape[0], d = out.shape[1], p, i
    cdef uint64_t key
    for p in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        key = path_key(seed, path0 + p)
        for i in range(d):
            out[p, i] = scale * stable_draw(key, step, i, alpha)


cdef inline void eval_sigma(int kind, const double* par, const double* x, double t,
                            Py_ssize_t d, double* sig) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double th, c, s, acc
    if kind == SIG_CONST:
        for i in range(d * d):
            sig[i] = par[i]
    elif kind == SIG_DIAG_SINE:
        for i in range(d * d):
            sig[i] = 0.0
        for i in range(d):
            sig[i * d + i] = 1.0 + par[0] * sin(x[i])
    else:
        # rotation by theta(x) in the (0, 1) plane applied to diag(par[2:])
        acc = 0.0
        for i in range(d):
            acc = acc + sin(x[i])
        th = par[0] + par[1] * acc
        c = cos(th)
        s = sin(th)
        for i in range(d * d):
            sig[i] = 0.0
        for i in range(d):
            sig[i * d + i] = par[2 + i]
        sig[0] = c * par[2]
        sig[1] = -s * par[3]
        sig[d] = s * par[2]
        sig[d + 1] = c * par[3]


cdef inline void eval_drift(int kind, const double* par, const double* x, double t,
                            Py_ssize_t d, double* b) noexcept nogil:
    cdef Py_ssize_t i
    cdef double sx
    if kind == B_ZERO:
        for i in range(d):
            b[i] = 0.0
    elif kind == B_CONST:
        for i in range(d):
            b[i] = par[i]
    else:
        for i in range(d):
            sx = sin(x[i])
            if sx >= 0.0:
                b[i] = par[0] * pow(sx, par[1])
            else:
                b[i] = -par[0] * pow(-sx, par[1])


cdef int euler_path(double* X, uint8_t* cens, Py_ssize_t K, Py_ssize_t d, uint64_t key,
                    int64_t step0, Py_ssize_t m, double s, double dt, double alpha,
                    double scale, int skind, const double* spar, int bkind,
                    const double* bpar) noexcept nogil:
    cdef double dz[MAXD]
    cdef double sig[MAXD * MAXD]
    cdef double b[MAXD]
    cdef double xn[MAXD]
    cdef double t, acc
    cdef Py_ssize_t k, j, i, l
    cdef double* x
    cdef bint ok
    for k in range(m):
        t = s + k * dt
        for i in range(d):
            dz[i] = scale * stable_draw(key, step0 + k, i, alpha)
        for j in range(K):
            if cens[j]:
                continue
            x = X + j * d
            eval_sigma(skind, spar, x, t, d, sig)
            eval_drift(bkind, bpar, x, t, d, b)
            ok = True
            for i in range(d):
                acc = x[i] + b[i] * dt
                for l in range(d):
                    acc = acc + sig[i * d + l] * dz[l]
                xn[i] = acc
                if not isfinite(acc):
                    ok = False
            if ok:
                for i in range(d):
                    x[i] = xn[i]
            else:
                cens[j] = 1
    return 0


def euler_chunk(double[:, :, ::1] X, uint8_t[:, ::1] censored, uint64_t seed,
                int64_t path0, int64_t step0, Py_ssize_t m, double s, double dt,
                double alpha, double scale, int sigma_kind, double[::1] sigma_params,
                int drift_kind, double[::1] drift_params, int nthreads=1):
    """Advance ``X[p, j, :]`` by ``m`` Euler steps in place.

    Noise for path ``p`` is keyed by ``path0 + p`` and shared across the
    ``K`` starting points of that path (common random numbers).
    """
    cdef Py_ssize_t n = X.shape[0], K = X.shape[1], d = X.shape[2], p
    if d > MAXD:
        raise ValueError("compiled kernel supports dim <= %d" % MAXD)
    cdef const double* spar = &sigma_params[0]
    cdef const double* bpar = &drift_params[0]
    for p in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        euler_path(&X[p, 0, 0], &censored[p, 0], K, d, path_key(seed, path0 + p),
                   step0, m, s, dt, alpha, scale, sigma_kind, spar, drift_kind, bpar)
