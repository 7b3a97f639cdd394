"""Reference values for the Wright-type density xi_mu.

Compares the power series (evaluated at precision scaled to its
cancellation) with the Kanter integral for the one-sided stable law.
"""
import sys
import mpmath as mp

mp.mp.dps = 30


def xi_series(mu, th):
    mu, th = mp.mpf(mu), mp.mpf(th)
    # terms peak near exp(c * th^(1/(1-mu))); pad precision accordingly
    digits = int(float(th) ** (1 / (1 - float(mu))) / 2.0) + 40
    with mp.workdps(digits):
        s, n = mp.mpf(0), 1
        while True:
            mag = th ** (n - 1) * mp.gamma(n * mu + 1) / mp.factorial(n)
            s += (-1) ** (n - 1) * mag * mp.sinpi(n * mu)
            # the sine factor vanishes at some n; stop on the envelope instead
            if n > 10 and mag < mp.mpf(10) ** (-35) * abs(s):
                return +s / (mp.pi * mu)
            n += 1


def xi_kanter(mu, th):
    mu, th = mp.mpf(mu), mp.mpf(th)
    sig = th ** (-1 / mu)
    A = lambda p: (mp.sin(mu * p) / mp.sin(p)) ** (1 / (1 - mu)) * mp.sin((1 - mu) * p) / mp.sin(mu * p)
    c = sig ** (-mu / (1 - mu))
    f = mu / (1 - mu) * sig ** (-1 / (1 - mu)) / mp.pi * mp.quad(lambda p: A(p) * mp.exp(-c * A(p)), [0, mp.pi])
    return f / mu * th ** (-1 - 1 / mu)


if __name__ == "__main__":
    out = open(sys.argv[1], "w") if len(sys.argv) > 1 else None
    if out:
        out.write("mu,theta,value\n")
    for mu in ["0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"]:
        for th in ["0.01", "0.1", "0.5", "1", "2", "3", "5", "8", "12"]:
            digits = float(th) ** (1 / (1 - float(mu))) / 2.0
            if digits < 300:
                a = xi_series(mu, th)
                if a < mp.mpf(10) ** -30:
                    continue
                if float(th) < 0.5:
                    # no cancellation here; Kanter's peak is too sharp for mp.quad
                    with mp.workdps(60):
                        b = xi_series(mu, th)
                else:
                    b = xi_kanter(mu, th)
            else:
                # series infeasible: Kanter against itself at higher precision
                b = xi_kanter(mu, th)
                if b < mp.mpf(10) ** -30:
                    continue
                with mp.workdps(50):
                    a = xi_kanter(mu, th)
            rel = abs((b - a) / a) if a != 0 else abs(b)
            assert rel < 1e-14, (mu, th, a, b)
            print(mu, th, mp.nstr(a, 18), mp.nstr(rel, 3), flush=True)
            if out:
                out.write(f"{mu},{th},{mp.nstr(a, 25)}\n")
