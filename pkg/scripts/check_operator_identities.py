#!/usr/bin/env python3
"""Spot-check the spectral operator identities at a chosen resolution.

Usage: python scripts/check_operator_identities.py [N]
"""

import sys

from cbflab import (
    TorusGrid,
    bilinear_B,
    damping_C,
    h_norm,
    inner_h,
    lr_norm,
    random_field,
    stokes_apply,
    trilinear_b,
    v_norm,
)


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 32
    grid = TorusGrid(dim=2, N=n)
    u = random_field(grid, 1)
    v = random_field(grid, 2)
    w = random_field(grid, 3)

    print(f"N = {n}, lambda1 = {grid.lambda1}")
    print(f"b(u,v,v)            = {trilinear_b(u, v, v):.3e}  (expect ~0)")
    print(
        "b(u,v,w) + b(u,w,v) = "
        f"{trilinear_b(u, v, w) + trilinear_b(u, w, v):.3e}  (expect ~0)"
    )
    print(
        "<B(u,u), A u>       = "
        f"{inner_h(bilinear_B(u), stokes_apply(u)):.3e}  (expect ~0 in 2D)"
    )
    pairing = inner_h(damping_C(u, 3.0), u)
    print(
        f"<C(u), u> - |u|_L4^4 = {pairing - lr_norm(u, 3.0) ** 4:.3e}  (expect ~0)"
    )
    lam1 = grid.lambda1
    print(
        f"Poincare slack       = {v_norm(u) ** 2 - lam1 * h_norm(u) ** 2:.3e}"
        "  (expect >= 0)"
    )


if __name__ == "__main__":
    main()
