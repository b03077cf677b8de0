"""High-precision reference values for the robustness constants.

Evaluates every formula literally at 50 significant digits.  The printed
values are frozen into tests/test_robustness.cpp.
"""
import mpmath as mp

mp.mp.dps = 50


def constants(M, w, u, eps):
    M, w, u, eps = map(mp.mpf, (M, w, u, eps))
    rad = mp.cosh(w) ** 2 - 1 - 2 * eps * mp.sinh(w)
    wt = -mp.log(mp.cosh(w) - mp.sqrt(rad))
    bt = wt + mp.log(1 + 2 * eps * mp.sinh(w))
    rho = eps * (1 + mp.e ** (-w)) / (1 - mp.e ** (-w))
    m1 = 1 / (1 - eps * mp.e ** (-w) / (1 - mp.e ** (-w - wt)))
    m2 = 1 / (1 - eps * mp.e ** (-bt) / (1 - mp.e ** (-w - bt)))
    mh = M * (1 + eps / ((1 - rho) * (1 - mp.e ** (-w)))) * max(m1, m2)
    return dict(omega_tilde=wt, beta_tilde=bt, rho=rho, M1=m1, M2=m2, M_hat=mh)


if __name__ == "__main__":
    for args in [(1, 1, 0.2, 0.1), (2, 0.5, 0.1, 0.05), (1.5, 3, 1, 0.4)]:
        print(args)
        for k, v in constants(*args).items():
            print(f"  {k:12s} {mp.nstr(v, 20)}")
