"""Secrecy rate of a two-hop amplify-and-forward relay channel where the
destination jams the eavesdropper and both terminals use M-PSK."""

from relaysec.channel import (
    AwgnChannel,
    GaussianMixtureChannel,
    SystemParams,
    amplification_factor,
    destination_channel,
    eavesdropper_channel,
    simulate_two_phase,
)
from relaysec.constellation import (
    PskConstellation,
    SumConstellation,
    extremal_phases,
    min_distance,
    psk_alphabet,
    sum_constellation,
)
from relaysec.detection import SerResult, estimate_ser, ml_detect, ser_phase_profile
from relaysec.info import (
    Estimate,
    binary_entropy,
    mi_discrete_awgn,
    mi_eavesdropper,
    mixture_entropy,
    mutual_information,
)
from relaysec.secrecy import (
    SecrecyPoint,
    evaluate_point,
    fano_upper_bound,
    proposition_check,
    secrecy_rate,
)

__version__ = "0.1.0"
