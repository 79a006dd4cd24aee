"""Generate the 21-point Gauss-Kronrod table embedded in the compiled kernels.

The Kronrod extension of the 10-point Gauss-Legendre rule is built from the
Stieltjes polynomial E_11, whose coefficients satisfy exact rational
orthogonality conditions against P_10.  Nodes and weights are computed in
60-digit arithmetic and printed as C double literals.

Run:  python tools/gen_gauss_kronrod.py
"""

from fractions import Fraction

import mpmath as mp

mp.mp.dps = 60

N = 10  # embedded Gauss order


def legendre_coeffs(n):
    """Exact monomial coefficients of P_n via Bonnet recursion (low to high)."""
    p0 = [Fraction(1)]
    p1 = [Fraction(0), Fraction(1)]
    if n == 0:
        return p0
    for k in range(1, n):
        nxt = [Fraction(0)] * (k + 2)
        for i, c in enumerate(p1):
            nxt[i + 1] += Fraction(2 * k + 1, k + 1) * c
        for i, c in enumerate(p0):
            nxt[i] -= Fraction(k, k + 1) * c
        p0, p1 = p1, nxt
    return p1


def moment(k):
    """Integral of x^k over [-1, 1]."""
    return Fraction(2, k + 1) if k % 2 == 0 else Fraction(0)


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return out


def integrate_poly(c):
    return sum(ci * moment(i) for i, ci in enumerate(c))


def stieltjes_coeffs(n):
    """Monic E_{n+1} with <P_n, E_{n+1} x^k> = 0 for k = 0..n (exact rationals)."""
    pn = legendre_coeffs(n)
    # unknowns c_0..c_n of E_{n+1}(x) = x^{n+1} + sum c_j x^j
    rows = []
    rhs = []
    for k in range(n + 1):
        xk = [Fraction(0)] * k + [Fraction(1)]
        base = poly_mul(pn, xk)
        row = []
        for j in range(n + 1):
            xj = [Fraction(0)] * j + [Fraction(1)]
            row.append(integrate_poly(poly_mul(base, xj)))
        lead = [Fraction(0)] * (n + 1) + [Fraction(1)]
        rhs.append(-integrate_poly(poly_mul(base, lead)))
        rows.append(row)
    # exact Gaussian elimination
    m = n + 1
    aug = [rows[i] + [rhs[i]] for i in range(m)]
    for col in range(m):
        piv = next(r for r in range(col, m) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pc = aug[col][col]
        aug[col] = [v / pc for v in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    c = [aug[i][m] for i in range(m)]
    return c + [Fraction(1)]


def poly_roots(coeffs_lowfirst):
    cs = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in coeffs_lowfirst]
    roots = mp.polyroots(list(reversed(cs)), maxsteps=200, extraprec=120)
    return sorted(mp.re(r) for r in roots)


def main():
    pn = legendre_coeffs(N)
    gauss_nodes = poly_roots(pn)
    e11 = stieltjes_coeffs(N)
    kron_new = poly_roots(e11)

    nodes = sorted(gauss_nodes + kron_new)
    assert len(nodes) == 2 * N + 1

    # interpolatory weights: exactness on monomials up to degree 2N
    m = 2 * N + 1
    A = mp.matrix(m, m)
    b = mp.matrix(m, 1)
    for k in range(m):
        for j in range(m):
            A[k, j] = nodes[j] ** k
        b[k] = mp.mpf(2) / (k + 1) if k % 2 == 0 else mp.mpf(0)
    wk = mp.lu_solve(A, b)

    # embedded Gauss-10 weights
    dP = [i * c for i, c in enumerate(pn)][1:]
    wg = []
    for x in gauss_nodes:
        dpv = mp.polyval(list(reversed([mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in dP])), x)
        wg.append(2 / ((1 - x ** 2) * dpv ** 2))

    # checks: degree of exactness 31 for K21, 19 for G10
    for deg in range(0, 32):
        exact = mp.mpf(2) / (deg + 1) if deg % 2 == 0 else mp.mpf(0)
        approx = sum(wk[i] * nodes[i] ** deg for i in range(m))
        assert abs(approx - exact) < mp.mpf(10) ** -45, (deg, approx - exact)
    for deg in range(0, 20):
        exact = mp.mpf(2) / (deg + 1) if deg % 2 == 0 else mp.mpf(0)
        approx = sum(wg[i] * gauss_nodes[i] ** deg for i in range(N))
        assert abs(approx - exact) < mp.mpf(10) ** -45, deg

    # Gauss nodes must sit at the odd indices of the merged table
    for i in range(N):
        assert abs(nodes[2 * i + 1] - gauss_nodes[i]) < mp.mpf(10) ** -50

    def fmt(v):
        return mp.nstr(v, 19, strip_zeros=False)

    print("XK21 = [")
    for x in nodes:
        print(f"    {fmt(x)},")
    print("]")
    print("WK21 = [")
    for i in range(m):
        print(f"    {fmt(wk[i])},")
    print("]")
    print("WG10 = [")
    for w in wg:
        print(f"    {fmt(w)},")
    print("]")


if __name__ == "__main__":
    main()
