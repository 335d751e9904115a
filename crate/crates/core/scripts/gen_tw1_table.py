"""Regenerate data/tw1_cdf.csv.

The GOE Tracy-Widom CDF is evaluated as the Fredholm determinant
det(I - K_s) on L^2(0, inf) with K_s(x, y) = Ai((x + y)/2 + s)/2,
discretized by Gauss-Legendre quadrature on [0, 20].
"""
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import airy


def f1(s, m=120, length=20.0):
    x, w = leggauss(m)
    x = (x + 1) * length / 2
    w = w * length / 2
    k = 0.5 * airy((x[:, None] + x[None, :]) / 2 + s)[0]
    sw = np.sqrt(w)
    return np.linalg.det(np.eye(m) - sw[:, None] * k * sw[None, :])


if __name__ == "__main__":
    print("s,cdf")
    for s in np.round(np.arange(-6.0, 8.0 + 1e-9, 0.02), 2):
        print(f"{s:.2f},{max(f1(s), 0.0):.15e}")
