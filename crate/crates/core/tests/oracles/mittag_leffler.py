"""Reference Mittag-Leffler values by high-precision power series.

Run with `python3 mittag_leffler.py`; the printed values are frozen in the
Rust tests.
"""
import mpmath as mp

mp.mp.dps = 30


def ml(alpha, beta, z):
    # working precision grows with the cancellation in the series
    rho = abs(complex(z)) ** (1.0 / alpha)
    with mp.workdps(60 + int(rho / 2.3)):
        return +_series(alpha, beta, z)


def _series(alpha, beta, z):
    alpha, beta, z = mp.mpf(alpha), mp.mpf(beta), mp.mpc(z)
    total = mp.mpc(0)
    k = 0
    while True:
        term = z**k * mp.rgamma(alpha * k + beta)
        total += term
        if k > 10 and abs(term) < mp.mpf(10) ** -60 * max(abs(total), mp.mpf(10) ** -40):
            return total
        k += 1


CASES = [
    (0.5, 1.0, -3),
    (0.5, 1.0, -2),
    (0.5, 0.5, -1),
    (0.3, 0.3, mp.mpc(0.5, -1.9)),
    (0.5, 1.0, mp.mpc(-7.0, 2.0)),
    (0.5, 0.5, -10),
    (0.7, 1.0, mp.mpc(3.0, 9.0)),
    (0.8, 0.8, -25),
    (0.5, 1.0, -40),
    (0.5, 0.5, mp.mpc(-30, 10)),
    (0.3, 1.0, 6),
    (0.9, 1.0, mp.mpc(0, 20)),
    (1.0, 0.7, mp.mpc(-8, 3)),
    (0.5, 1.0, 15),
]

if __name__ == "__main__":
    for a, b, z in CASES:
        v = ml(a, b, z)
        z = mp.mpc(z)
        print(f"({a}, {b}, {mp.nstr(z.real, 17)}, {mp.nstr(z.imag, 17)}, "
              f"{mp.nstr(v.real, 17)}, {mp.nstr(v.imag, 17)}),")
