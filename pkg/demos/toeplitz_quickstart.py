#!/usr/bin/env python
# Assemble a few truncated Toeplitz matrices and compare them with closed forms
import numpy as np
from bargmann_lab import fock, quadrature, symbols, toeplitz

rule = quadrature.build_product_rule(1, 24)

# z as a symbol is the creation operator: sqrt(j+1) on the subdiagonal
z_symbol = symbols.make_symbol({"family": "monomial", "q": 1}, 1, 1)
T = toeplitz.assemble_toeplitz(z_symbol, fock.TruncationSpec(1, 6), rule).matrix
print(np.round(T.real, 3) + 0.0)

# a Gaussian symbol is diagonal with entries 2^-(m+1)
gauss = symbols.make_symbol({"family": "gaussian_radial", "t": 1.0}, 1, 1)
G = toeplitz.assemble_toeplitz(gauss, fock.TruncationSpec(1, 8), rule).matrix
print(np.diag(G).real)
print(0.5 ** (np.arange(9) + 1))

# matrix-valued symbols: the fiber index runs fastest (row j*d + a)
A = [[1, 1j], [-1j, 2]]
ball = symbols.make_symbol({"family": "ball_indicator", "R": 1.0, "A": A}, 1, 2)
B = toeplitz.assemble_toeplitz(ball, fock.TruncationSpec(1, 3, 2), rule)
print(B.matrix.shape, np.allclose(B.matrix, B.matrix.conj().T))

# coherent vectors: T k_z restricted to the truncation agrees with the
# translated symbol evaluated at the origin, up to the truncation tail
lam, z, g = 0.4 + 0.3j, -0.2j, np.array([1.0])
print("translation residual", toeplitz.translation_identity_residual(
    gauss, lam, g, z, fock.TruncationSpec(1, 30), quadrature.build_product_rule(1, 32)))

# save and reload in the .top.json/.top.csv format
toeplitz.save_operator(B, "/tmp/ball_D3")
print(np.array_equal(toeplitz.load_operator("/tmp/ball_D3").matrix, B.matrix))
