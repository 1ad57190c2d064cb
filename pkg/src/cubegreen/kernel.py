"""Green / covariance kernels on the unit cube indexed by a monotone family.

The kernel has the form

    G(x, xi) = prod_j min(x_j, xi_j)
               - sum_{U in family} a_U prod_{j not in U} min(x_j, xi_j)
                                        prod_{j in U} x_j xi_j,

where the integer coefficients a_U are fixed by requiring that the partial
sums of a over the family's subset lattice equal one.  G vanishes whenever
any x_j = 0 and on every face x_U = 1 with U in the family; it is the
covariance function of the matching limiting Gaussian field (Brownian
sheet, pillow and tucked sheet arise as special cases).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .families import (
    MonotoneFamily,
    coords_from_mask,
    family_from_json,
    format_subset,
    mask_from_coords,
)

# row-block size for cross-kernel matrices, keeps temporaries ~tens of MB
_BLOCK_ELEMS = 4_000_000


def compute_coefficients(family: MonotoneFamily) -> dict[int, int]:
    """Integer coefficients a_U, in increasing cardinality order.

    a_U = 1 - sum of a_V over proper subsets V of U inside the family.
    Exact integer arithmetic, so the defining relation can be tested as
    strict equality.
    """
    coeffs: dict[int, int] = {}
    for u in family.members:  # sorted by cardinality, so subsets come first
        s = 0
        for v, a in coeffs.items():
            if v & ~u == 0:
                s += a
        coeffs[u] = 1 - s
    return coeffs


@dataclass(frozen=True)
class GreenKernel:
    """A monotone family together with its kernel coefficients."""

    family: MonotoneFamily
    coefficients: dict[int, int] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.family.m

    def vanishing_faces(self) -> list[int]:
        """Masks U such that the kernel is zero whenever x_U = 1."""
        return list(self.family.members)

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.m},)")
        return x

    def evaluate(self, x, xi) -> float:
        """Kernel value G(x, xi)."""
        x = self._check_point(x)
        xi = self._check_point(xi)
        return float(self.cross(x[None, :], xi[None, :])[0, 0])

    def cross(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Kernel values for all pairs: result[i, j] = G(A[i], B[j])."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if A.shape[1] != self.m or B.shape[1] != self.m:
            raise ValueError("point dimension does not match kernel dimension")
        na, nb = A.shape[0], B.shape[0]
        out = np.empty((na, nb))
        step = max(1, _BLOCK_ELEMS // max(1, nb * self.m))
        masks = [np.array([(u >> j) & 1 for j in range(self.m)], dtype=bool)
                 for u in self.family.members]
        coefs = [self.coefficients[u] for u in self.family.members]
        for lo in range(0, na, step):
            hi = min(na, lo + step)
            mins = np.minimum(A[lo:hi, None, :], B[None, :, :])
            ks = A[lo:hi, None, :] * B[None, :, :]
            block = mins.prod(axis=2)
            for sel, a in zip(masks, coefs):
                block -= a * np.where(sel, ks, mins).prod(axis=2)
            out[lo:hi] = block
        return out

    def gram_matrix(self, points) -> np.ndarray:
        """Symmetric matrix of kernel values over a list of points."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        G = self.cross(P, P)
        # identical arithmetic order for (i,j) and (j,i) makes this exact
        return G

    def to_json(self) -> str:
        obj = {
            "m": self.m,
            "family": self.family.to_coord_lists(),
            "coefficients": [
                {"set": list(coords_from_mask(u)), "a": self.coefficients[u]}
                for u in self.family.members
            ],
        }
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "GreenKernel":
        obj = json.loads(text)
        family = family_from_json(obj["family"], int(obj["m"]))
        kern = green_kernel(family)
        for entry in obj.get("coefficients", []):
            u = mask_from_coords(entry["set"], family.m)
            if kern.coefficients.get(u) != entry["a"]:
                raise ValueError(
                    f"coefficient for {format_subset(u)} inconsistent with the family"
                )
        return kern

    def coefficients_by_name(self) -> dict[str, int]:
        return {format_subset(u): a for u, a in self.coefficients.items()}


def green_kernel(family: MonotoneFamily) -> GreenKernel:
    """Construct the kernel for a monotone family."""
    return GreenKernel(family, compute_coefficients(family))
