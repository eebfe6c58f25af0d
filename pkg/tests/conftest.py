from fluxcirc import CouplerConfig


def make_coupler(weak_ratio=0.8, frustration=0.5, weak_index=1, winding=0):
    """Three-port coupler with one junction reduced to ``weak_ratio``."""
    ratios = [1.0, 1.0, 1.0]
    if weak_ratio < 1.0:
        ratios[weak_index - 1] = weak_ratio
        weak = weak_index
    else:
        weak = None
    return CouplerConfig(
        n_ports=3,
        junction_ratios=tuple(ratios),
        frustration=frustration,
        weak_index=weak,
        winding=winding,
    )
