"""Reference forcing values F x0(t) = Γ(1-α)^{-1} ∫_{-∞}^{t0} (t-τ)^{-α} x0'(τ) dτ
for histories without an elementary closed form, by mpmath quadrature."""
import mpmath as mp

mp.mp.dps = 30


def sine_history(alpha, t):
    # x0(τ) = sin τ on (-∞, 0]; substitute s = t - τ
    f = lambda s: s ** (-alpha) * mp.cos(t - s)
    val = mp.quadosc(f, [t, mp.inf], omega=1)
    return val / mp.gamma(1 - alpha)


def windowed_sine_history(alpha, t, amp, nu, phi, window):
    # x0(τ) = amp sin(ν τ + φ) on [-L, 0], constant before
    f = lambda tau: (t - tau) ** (-alpha) * amp * nu * mp.cos(nu * tau + phi)
    return mp.quad(f, [-window, -window / 2, 0]) / mp.gamma(1 - alpha)


def floquet_history(alpha, t, lam, omega, p0, p1):
    # x0(τ) = Re(e^{λτ}(p0 + p1 e^{iωτ}))
    def dx(tau):
        return mp.re(p0 * lam * mp.exp(lam * tau) + p1 * (lam + 1j * omega) * mp.exp((lam + 1j * omega) * tau))
    # t > 0 keeps the kernel bounded on (-∞, 0]
    f = lambda tau: (t - tau) ** (-alpha) * dx(tau)
    return mp.quad(f, [-mp.inf] + mp.linspace(-80, 0, 41)) / mp.gamma(1 - alpha)


if __name__ == "__main__":
    print("sine", mp.nstr(sine_history(0.5, 1), 17))
    print("sine_a03_t5", mp.nstr(sine_history(0.3, 5), 17))
    print("windowed", mp.nstr(windowed_sine_history(0.5, 2.5, 1.5, 1.0, 0.3, 6.0), 17))
    print("floquet", mp.nstr(floquet_history(0.7, 1.0, mp.mpf("0.4"), 1.0, mp.mpc(1, 0), mp.mpc(0.5, -0.25)), 17))
