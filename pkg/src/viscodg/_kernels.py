"""Compiled element loop for the DG right-hand side.

Mirrors ``DGOperator.rhs_numpy`` exactly (same flux, same boundary closures);
the numpy path stays the reference implementation.
"""

import numpy as np
from numba import njit

INTERIOR, FREE, ABSORBING, EXACT = 0, 1, 2, 3


@njit(cache=True)
def rhs_kernel(q, out, Dr, Ds, lift, fmask, mapP, n1, n3, fscale,
               rx, sx, rz, sz, bcode, ext, a_s, a_v, mat, Qs, QsS, inv_rho):
    K = q.shape[1]
    Np = q.shape[2]
    nf = fmask.shape[0]
    Nfp = nf // 3
    flux = np.empty((5, nf))
    d = np.empty((10, Np))
    for k in range(K):
        for j in range(nf):
            m = fmask[j]
            nx = n1[k, j]
            nz = n3[k, j]
            tm1 = nx * q[0, k, m] + nz * q[2, k, m]
            tm2 = nz * q[1, k, m] + nx * q[2, k, m]
            v1m = q[6, k, m]
            v3m = q[7, k, m]
            code = bcode[k, j // Nfp]
            if code == INTERIOR:
                p = mapP[k, j]
                kp = p // Np
                mp = p - kp * Np
                tj1 = nx * q[0, kp, mp] + nz * q[2, kp, mp] - tm1
                tj2 = nz * q[1, kp, mp] + nx * q[2, kp, mp] - tm2
                vj1 = q[6, kp, mp] - v1m
                vj2 = q[7, kp, mp] - v3m
            elif code == FREE:
                tj1 = -2.0 * tm1
                tj2 = -2.0 * tm2
                vj1 = 0.0
                vj2 = 0.0
            elif code == ABSORBING:
                tj1 = -tm1
                tj2 = -tm2
                vj1 = -v1m
                vj2 = -v3m
            else:
                tj1 = nx * ext[0, k, j] + nz * ext[2, k, j] - tm1
                tj2 = nz * ext[1, k, j] + nx * ext[2, k, j] - tm2
                vj1 = ext[3, k, j] - v1m
                vj2 = ext[4, k, j] - v3m
            fs = fscale[k, j]
            w1 = 0.5 * vj1 + a_s * tj1
            w2 = 0.5 * vj2 + a_s * tj2
            nn = nx * nz
            flux[0, j] = fs * nx * w1
            flux[1, j] = fs * nz * w2
            flux[2, j] = fs * (nz * w1 + nx * w2)
            flux[3, j] = fs * (0.5 * tj1 + a_v * (vj1 + nn * vj2))
            flux[4, j] = fs * (0.5 * tj2 + a_v * (nn * vj1 + vj2))

        # reference derivatives of s11, s33, s13, v1, v3
        for i in range(Np):
            for c in range(10):
                d[c, i] = 0.0
            for j in range(Np):
                dr = Dr[i, j]
                ds = Ds[i, j]
                d[0, i] += dr * q[0, k, j]
                d[1, i] += dr * q[1, k, j]
                d[2, i] += dr * q[2, k, j]
                d[3, i] += dr * q[6, k, j]
                d[4, i] += dr * q[7, k, j]
                d[5, i] += ds * q[0, k, j]
                d[6, i] += ds * q[1, k, j]
                d[7, i] += ds * q[2, k, j]
                d[8, i] += ds * q[6, k, j]
                d[9, i] += ds * q[7, k, j]

        a, b, c_, e = rx[k], sx[k], rz[k], sz[k]
        g = mat[k]
        for i in range(Np):
            l0 = 0.0
            l1 = 0.0
            l2 = 0.0
            l3 = 0.0
            l4 = 0.0
            for j in range(nf):
                w = lift[i, j]
                l0 += w * flux[0, j]
                l1 += w * flux[1, j]
                l2 += w * flux[2, j]
                l3 += w * flux[3, j]
                l4 += w * flux[4, j]
            v1x = a * d[3, i] + b * d[8, i]
            v1z = c_ * d[3, i] + e * d[8, i]
            v3x = a * d[4, i] + b * d[9, i]
            v3z = c_ * d[4, i] + e * d[9, i]
            s11x = a * d[0, i] + b * d[5, i]
            s33z = c_ * d[1, i] + e * d[6, i]
            s13x = a * d[2, i] + b * d[7, i]
            s13z = c_ * d[2, i] + e * d[7, i]
            u0 = v1x + l0
            u1 = v3z + l1
            u2 = v1z + v3x + l2
            for r in range(6):
                acc = Qs[g, r, 0] * u0 + Qs[g, r, 1] * u1 + Qs[g, r, 2] * u2
                for s in range(6):
                    acc += QsS[g, r, s] * q[s, k, i]
                out[r, k, i] = acc
            out[6, k, i] = (s11x + s13z + l3) * inv_rho[k]
            out[7, k, i] = (s13x + s33z + l4) * inv_rho[k]
