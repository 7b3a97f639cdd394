"""High-precision Mittag-Leffler reference values.

Two independent evaluations: the defining series at working precision
scaled to the cancellation, and Talbot inversion of the Laplace transform
s^(mu-beta)/(s^mu - z). Rows where both apply must agree to 1e-40.
"""
import sys
import mpmath as mp

mp.mp.dps = 60


def ml_series(mu, beta, z):
    digits = int(abs(z) ** (1 / mu) / 2.3) + 80 if z < 0 else 80
    with mp.workdps(digits):
        s, n = mp.mpf(0), 0
        while True:
            t = z**n * mp.rgamma(mu * n + beta)
            s += t
            if n > 20 and abs(t) < mp.mpf(10) ** (-50) * abs(s):
                return +s
            n += 1


def ml_talbot(mu, beta, z):
    """Talbot inversion, repeated at higher precision as a self-check."""
    vals = []
    for dps in (60, 120):
        with mp.workdps(dps):
            vals.append(mp.invertlaplace(lambda s: s ** (mu - beta) / (s**mu - z), 1, method="talbot"))
    assert abs(vals[0] - vals[1]) <= mp.mpf(10) ** (-30) * abs(vals[1]), (mu, beta, z)
    return vals[1]


def ml_kummer(beta, z):
    """mu = 1: E_{1,beta}(z) = 1F1(1; beta; z) / Gamma(beta)."""
    with mp.workdps(80):
        return mp.hyp1f1(1, beta, z) * mp.rgamma(beta)


def main(out):
    mus = ["0.1", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "0.95", "0.999", "1"]
    zs = ["0", "-0.01", "-0.3", "-1", "-2.5", "-5", "-8", "-15", "-30", "-60", "-120", "-256",
          "0.5", "2", "10", "40"]
    rows = []
    for m in mus:
        mu = mp.mpf(m)
        for b in [mu, mu + 1, mu + 2, mp.mpf(1), mp.mpf("0.75"), mp.mpf("1.3")]:
            for zz in zs:
                z = mp.mpf(zz)
                if z > 0 and z ** (1 / mu) > 600:
                    continue
                if mu == 1:
                    v = ml_kummer(b, z)
                    if abs(z) <= 60:
                        assert abs(ml_series(mu, b, z) - v) <= mp.mpf(10) ** (-40) * abs(v)
                elif z >= 0 or abs(z) ** (1 / mu) <= 60:
                    v = ml_series(mu, b, z)
                    if z < -0.5:
                        w = ml_talbot(mu, b, z)
                        assert abs(w - v) <= mp.mpf(10) ** (-40) * abs(v), (m, b, zz)
                else:
                    v = ml_talbot(mu, b, z)
                rows.append((m, mp.nstr(b, 20), zz, mp.nstr(v, 25)))
    with open(out, "w") as f:
        f.write("mu,beta,z,value\n")
        for r in rows:
            f.write(",".join(r) + "\n")
    print(len(rows), "rows")


if __name__ == "__main__":
    main(sys.argv[1])
