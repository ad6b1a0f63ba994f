"""Shape-constrained estimation of first-price auction primitives."""

from ._auctionshape import (
    DgpSpec,
    TruthSet,
    bidder_surplus_symmetric,
    cli,
    dgp_sample,
    pava_mle,
    smooth_alpha,
    solve_ls,
)

__all__ = [
    "DgpSpec",
    "TruthSet",
    "bidder_surplus_symmetric",
    "cli",
    "dgp_sample",
    "pava_mle",
    "smooth_alpha",
    "solve_ls",
]
