"""Independent reference values for the unit tests.

Run with python3; the printed numbers are pasted into the C++ tests. Nothing
here imports the C++ code.
"""
from fractions import Fraction as F

import mpmath as mp
import numpy as np

mp.mp.dps = 30


def stay_probability(mu):
    return 1 - F(1) / (3 - F(mu))


def nbar(beta, a=mp.mpf("63.528"), b=mp.mpf("244.082"), c=mp.mpf("1.38148")):
    return a + b / mp.power(beta, c)


def riemann_exit_time(rho0, p_ex, L=F(1)):
    r, q = F(rho0), F(p_ex)
    if q < F(1, 2):
        if r <= q or r == 1 - q:
            return L / (1 - r)
        return r * L / (q * (1 - q))
    if r <= F(1, 2):
        return L / (1 - r)
    if q > F(1, 2):
        return 4 * r * L
    return r * L / (q * (1 - q))


def godunov_depletion(rho0, p_ex, n=4000, cfl=0.9, L=1.0, threshold=1e-4):
    def j(r):
        return r * r - r

    def flux(a, b):
        lo = np.minimum(j(a), j(b))
        hi = np.maximum(j(a), j(b))
        crit = (a <= 0.5) & (b >= 0.5)
        return np.where(a <= b, np.where(crit, -0.25, lo), hi)

    dx = L / n
    dt = cfl * dx
    rho = np.full(n, rho0)
    m0 = rho0 * L
    t = 0.0
    while True:
        left = np.concatenate(([1.0 - p_ex], rho))
        right = np.concatenate((rho, [0.0]))
        f = flux(left, right)
        rho = rho - dt / dx * (f[1:] - f[:-1])
        t += dt
        if rho.sum() * dx < threshold * m0:
            return t


def single_agent_line(n, h, beta, mu, q, start, steps):
    """Exact occupancy of one agent on a line with the exit at cell 0.

    Options: left/right neighbours and 'leave' at cell 0, weighted by
    exp(beta * drop) with phi = h * (c + 1/2) and leave drop h. Total move
    probability 1/(3 - mu). At the exit cell the agent first leaves with
    probability q, otherwise follows its options (a sampled leave is a stay).
    """
    phi = [h * (c + 0.5) for c in range(n)]
    move = 1 / (3 - mu)
    T = np.zeros((n, n))
    for c in range(n):
        opts = []
        if c > 0:
            opts.append((c - 1, phi[c] - phi[c - 1]))
        if c + 1 < n:
            opts.append((c + 1, phi[c] - phi[c + 1]))
        weights = [mp.e ** (beta * d) for _, d in opts]
        if c == 0:
            weights.append(mp.e ** (beta * h))
        total = sum(weights)
        scale = (1 - q) if c == 0 else 1.0
        stay = 1.0
        for (target, _), w in zip(opts, weights):
            p = float(move * w / total) * scale
            T[c, target] += p
            stay -= p
        if c == 0:
            stay -= q
        T[c, c] += stay
    p = np.zeros(n)
    p[start] = 1.0
    for _ in range(steps):
        p = p @ T
    return p


def entropy_density(rho, gamma):
    rho, gamma = mp.mpf(rho), mp.mpf(gamma)
    g2 = 2 * gamma + 1

    def xlogx(x):
        return x * mp.log(x) if x > 0 else mp.mpf(0)

    push = 2 * gamma * rho + 1
    return (4 * gamma + 1) / g2 * xlogx(1 - rho) + xlogx(rho) + push / g2 * mp.log(push)


if __name__ == "__main__":
    print("stay mu=1", stay_probability(1), "mu=0", stay_probability(0))
    n = nbar(mp.mpf("3.84"))
    print("nbar(3.84) =", mp.nstr(n, 17), " dt =", mp.nstr(8 / n, 17))
    print("implied speed mu=-1.22:", mp.nstr(mp.mpf("1.2") * 2 / (3 - mp.mpf("-1.22")), 17))
    for case in [("0.4", "0.3"), ("0.8", "0.6"), ("0.25", "0.6"), ("0.9", "0.2"), ("0.6", "0.5")]:
        t = riemann_exit_time(F(case[0]), F(case[1]))
        print("riemann", case, t, float(t))
    # continuity across rho0 = 1 - p_ex for p_ex < 1/2
    q = F(3, 10)
    print("interface", riemann_exit_time(1 - q, q), F(7, 10) / (q * (1 - q)))
    for case in [(0.4, 0.3), (0.8, 0.6), (0.25, 0.6)]:
        print("godunov depletion", case, repr(godunov_depletion(*case)))
    p = single_agent_line(6, 0.3, 2.0, 1.0, 0.1, 5, 10)
    print("single agent line:", ", ".join(repr(float(v)) for v in p))
    for rho, gam in [(0.3, 0), (0.5, 1), (0.8, 1)]:
        print("entropy_density", rho, gam, mp.nstr(entropy_density(rho, gam), 17))
    print("win frequency", F(2, 3), float(F(2, 3)))
