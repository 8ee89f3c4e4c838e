from .network import (
    BinaryNetworkState,
    GlauberConfig,
    PopulationTrace,
    glauber_step,
    local_field,
    simulate,
)


__all__ = (
    "BinaryNetworkState",
    "GlauberConfig",
    "PopulationTrace",
    "glauber_step",
    "local_field",
    "simulate",
)
