"""Independent numpy derivations of the frozen values used in the unit tests.

Run with `python3 tests/oracle/derive.py`; the printed numbers are pasted
into the C++ tests. Nothing here imports the library.
"""

import numpy as np


def dft(t):
    k = np.arange(t)
    return np.exp(2j * np.pi * np.outer(k, k) / t) / np.sqrt(t)


def dephase_dilation(psi, alphas):
    """|j>|0> -> |j>(a_j|0> + b_j|j+1>), returns the joint (T, T+1) amplitude array."""
    t = len(psi)
    out = np.zeros((t, t + 1), complex)
    for j in range(t):
        a = alphas[j]
        out[j, 0] = psi[j] * a
        out[j, j + 1] = psi[j] * np.sqrt(1 - abs(a) ** 2)
    return out


def traced(joint):
    return joint @ joint.conj().T


def single_segment(t, alpha2):
    """Fourier filtration of one source over t channels. Returns (p_success, p_error)."""
    f = dft(t)
    enc = np.ones(t) / np.sqrt(t)
    joint = dephase_dilation(enc, [np.sqrt(alpha2)] * t)
    dec = f.conj().T @ joint  # decoder rows: inverse DFT, useful port 0
    useful = dec[0]
    return np.sum(abs(useful) ** 2), np.sum(abs(useful[1:]) ** 2)


def series(t, total, q):
    """Q segments, filtering after each; tracks (useful amplitude) x env registers."""
    seg = total ** (1.0 / q)
    state = np.array([1.0 + 0j])  # amplitudes over all env outcomes so far
    f = dft(t)
    for _ in range(q):
        joint = np.zeros((len(state), t + 1), complex)
        for e, amp in enumerate(state):
            enc = np.ones(t) * amp / np.sqrt(t)
            d = f.conj().T @ dephase_dilation(enc, [np.sqrt(seg)] * t)
            joint[e] = d[0]
        state = joint.reshape(-1)
    p = np.sum(abs(state) ** 2)
    return p, p - abs(state[0]) ** 2


def rho_n(n, p):
    """Both arms dephased with |alpha|^2 = sqrt(p) per arm, environments traced."""
    a = p ** 0.25
    psi = np.zeros(n * n, complex)
    for j in range(n):
        psi[j * n + j] = 1 / np.sqrt(n)
    # environment outcome per arm: 0 or channel j+1
    joint = np.zeros((n * n, n + 1, n + 1), complex)
    for j in range(n):
        amp = psi[j * n + j]
        envs = [(0, a), (j + 1, np.sqrt(1 - a * a))]
        for ea, ca in envs:
            for eb, cb in envs:
                joint[j * n + j, ea, eb] += amp * ca * cb
    flat = joint.reshape(n * n, -1)
    return flat @ flat.conj().T


def purify(n, m, p):
    rho = rho_n(n, p)
    ua = np.exp(-2j * np.pi * np.outer(np.arange(1, n + 1), np.arange(1, n + 1)) / n) / np.sqrt(n)
    ub = ua.conj()
    u = np.kron(ua, ub)
    r = u @ rho @ u.conj().T
    keep = [i * n + k for i in range(m) for k in range(m)]
    rf = r[np.ix_(keep, keep)]
    ps = np.real(np.trace(rf))
    target = np.zeros(m * m)
    for j in range(m):
        target[j * m + j] = 1 / np.sqrt(m)
    fid = np.real(target @ rf @ target) / ps
    return fid, ps


def protocol2(amps, alpha2, t):
    """Each party multiplexes its copy of source i over t channels (own env per channel)."""
    s = len(amps)
    a = np.sqrt(alpha2)
    b = np.sqrt(1 - alpha2)
    dim_env = 1 + s * t
    state = np.zeros((s, s, dim_env, dim_env), complex)
    for i, ai in enumerate(amps):
        env = np.zeros(dim_env, complex)
        env[0] = a
        env[1 + i * t: 1 + (i + 1) * t] = b / t
        state[i, i] += ai * np.einsum("x,y->xy", env, env)
    flat = state.reshape(s * s, -1)
    rho = flat @ flat.conj().T
    target = np.zeros(s * s, complex)
    for i, ai in enumerate(amps):
        target[i * s + i] = ai
    ps = np.real(np.trace(rho))
    return np.real(target.conj() @ rho @ target) / ps


def visibility(t, alpha2):
    """Two sources, each Fourier-multiplexed over its own t channels."""
    vals = []
    for phi in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        src = np.array([1, np.exp(1j * phi)]) / np.sqrt(2)
        useful = []
        for l in range(2):
            enc = np.ones(t) * src[l] / np.sqrt(t)
            d = dft(t).conj().T @ dephase_dilation(enc, [np.sqrt(alpha2)] * t)
            useful.append(d[0])
        # environments of the two sources are distinct registers except outcome 0
        joint = np.zeros((2, 1 + 2 * t), complex)
        joint[0, 0] = useful[0][0]
        joint[0, 1: t + 1] = useful[0][1:]
        joint[1, 0] = useful[1][0]
        joint[1, t + 1:] = useful[1][1:]
        rho = joint @ joint.conj().T
        plus = np.array([1, 1]) / np.sqrt(2)
        vals.append(np.real(plus @ rho @ plus))
    return (max(vals) - min(vals)) / (max(vals) + min(vals))


np.set_printoptions(precision=17)
print("offdiag 0.9 T=2:", traced(dephase_dilation(np.array([1, 1]) / np.sqrt(2), [np.sqrt(0.9)] * 2))[0, 1].real)
print("single T=4 a2=0.8:", single_segment(4, 0.8))
print("series T=2 total=0.81 Q=2:", series(2, 0.81, 2))
print("series T=3 total=0.5 Q=3:", series(3, 0.5, 3))
print("rho_4(0.8) [0,0], [0,5], [1,1]:", rho_n(4, 0.8)[0, 0].real, rho_n(4, 0.8)[0, 5].real, rho_n(4, 0.8)[1, 1].real)
print("purify 4 2 0.8:", purify(4, 2, 0.8))
print("purify 6 3 0.3:", purify(6, 3, 0.3))
print("protocol2 uniform2 0.8 T=4:", protocol2([1 / np.sqrt(2)] * 2, 0.8, 4))
print("protocol2 (0.6,0.8) 0.5 T=3:", protocol2([0.6, 0.8], 0.5, 3))
print("visibility T=4 a2=0.8 (8-point sweep):", visibility(4, 0.8))
