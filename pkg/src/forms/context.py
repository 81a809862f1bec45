"""形式求值的上下文: 系数、分解、单元系数与势的正负部"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from ..fields.decomposition import decompose, validate_ellipticity
from ..fields.models import CoefficientSet, Decomposition, Grid, ScalarField
from ..mesh.calculus import Mesh
from ..utils.config import NumericsConfig


@dataclass(frozen=True)
class FormContext:
    """Q = V + iW，V = V⁺ - V⁻，所有量均为节点值"""
    cs: CoefficientSet
    dec: Decomposition
    mesh: Mesh
    V_plus: np.ndarray
    V_minus: np.ndarray
    W: np.ndarray

    @classmethod
    def from_coefficients(
        cls,
        cs: CoefficientSet,
        check: bool = True,
        numerics: Optional[NumericsConfig] = None,
    ) -> "FormContext":
        numerics = numerics or NumericsConfig()
        dec = decompose(cs.A, numerics.reconstruction_tol)
        if check:
            validate_ellipticity(dec, numerics.eig_tol)
        V = cs.Q.values.real
        return cls(
            cs=cs,
            dec=dec,
            mesh=Mesh.for_grid(cs.grid),
            V_plus=np.maximum(V, 0.0),
            V_minus=np.maximum(-V, 0.0),
            W=cs.Q.values.imag.copy(),
        )

    @property
    def grid(self) -> Grid:
        return self.cs.grid

    @property
    def bc(self) -> str:
        return self.grid.bc.value

    # 单元系数 (顶点平均)

    @cached_property
    def A_e(self) -> np.ndarray:
        return self.mesh.element_mean(self.cs.A.values)

    @cached_property
    def A0s_e(self) -> np.ndarray:
        return self.mesh.element_mean(self.dec.A0s)

    @cached_property
    def A1s_e(self) -> np.ndarray:
        return self.mesh.element_mean(self.dec.A1s)

    @cached_property
    def b1_e(self) -> np.ndarray:
        return self.mesh.element_mean(self.cs.b1.values)

    @cached_property
    def b2_e(self) -> np.ndarray:
        return self.mesh.element_mean(self.cs.b2.values)

    @cached_property
    def re_drift_e(self) -> np.ndarray:
        """Re(b1 + b2) 的单元值"""
        return (self.b1_e + self.b2_e).real

    def adjoint(self) -> "FormContext":
        """伴随数据 (A*, -conj b2, -conj b1, conj Q)"""
        return FormContext.from_coefficients(self.cs.adjoint(), check=False)

    def with_potential(self, extra: np.ndarray, name: Optional[str] = None) -> "FormContext":
        """Q -> Q + extra (例如吸收势)"""
        Q = ScalarField(self.cs.Q.values + np.asarray(extra, dtype=complex), self.grid, name or "Q")
        return FormContext.from_coefficients(self.cs.replace(Q=Q), check=False)


def adjoint_context(ctx: FormContext) -> FormContext:
    return ctx.adjoint()
