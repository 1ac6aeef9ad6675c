"""Forward-only network graphs: conv primitives, generator, discriminators, weight bundles."""

from .bundle import NamedTensor, WeightBundle, load_bundle, random_init, save_bundle
from .generator import AMPBlockSpec, GeneratorSpec, build_generator, generator_forward
from .layers import Composite, count_parameters
from .ops import avg_pool1d, conv1d, conv2d, conv_transpose1d
from .discriminators import (
    COMBINATIONS,
    DiscriminatorOutput,
    MEDSpec,
    MPDSpec,
    MRDSpec,
    MSDSpec,
    build_discriminators,
    build_med,
    build_mpd,
    build_mrd,
    build_msd,
    ensemble_forward,
    fold_period,
    med_forward,
    mpd_forward,
    mrd_forward,
    msd_forward,
)
