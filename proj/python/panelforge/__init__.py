"""Blocked dense LU and QR factorizations."""

from ._panelforge import (
    Pool,
    default_threads,
    flops,
    form_q,
    gemm,
    lu,
    lu_residual,
    qr,
    qr_residual,
)

STRATEGIES = ("mtb", "rtm", "la", "la-mb")

__all__ = [
    "Pool",
    "STRATEGIES",
    "default_threads",
    "flops",
    "form_q",
    "gemm",
    "lu",
    "lu_residual",
    "qr",
    "qr_residual",
]
