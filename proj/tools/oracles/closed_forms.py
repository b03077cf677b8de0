"""Reference values for closed-form examples, frozen into the C++ tests."""
import mpmath as mp

mp.mp.dps = 40


def barreira_exponent(a, b, t, s):
    return -b * (t - s) + a * t * mp.cos(t) - a * s * mp.cos(s) - a * mp.sin(t) + a * mp.sin(s)


def main():
    print("barreira S(pi,0)", mp.nstr(mp.e ** barreira_exponent(1, 2, mp.pi, 0), 25))
    print("barreira dual T(pi,0) = S(0,pi)", mp.nstr(mp.e ** -barreira_exponent(1, 2, mp.pi, 0), 25))
    f = lambda x: mp.e ** (-x) - mp.e ** (-mp.mpf("1.1") * x)
    xs = mp.findroot(lambda x: mp.diff(f, x), 0.9)
    print("distance argmax", mp.nstr(xs, 20), "value", mp.nstr(f(xs), 20))
    for N in (3, 7, 15, 31):
        h = mp.mpf(1) / (N + 1)
        l1 = -(2 - 2 * mp.cos(mp.pi * h)) / h ** 2
        l2 = -(2 - 2 * mp.cos(2 * mp.pi * h)) / h ** 2
        print("dirichlet N", N, "lambda1", mp.nstr(l1, 20), "lambda2", mp.nstr(l2, 20))
    print("-16(2-sqrt2)", mp.nstr(-16 * (2 - mp.sqrt(2)), 20))
    # comparison bound, Barreira a-coefficient (1,2), b = exp(-2|tau|), (t,s)=(0,-10), x0^2 = 1
    E = lambda t, s: barreira_exponent(1, 2, t, s)
    val = mp.e ** E(0, -10) + mp.quad(lambda r: mp.e ** E(0, r) * mp.e ** (-2 * abs(r)), mp.linspace(-10, 0, 41))
    print("comparison barreira", mp.nstr(val, 20))


if __name__ == "__main__":
    main()
