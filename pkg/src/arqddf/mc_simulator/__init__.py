"""Finite-SNR Monte Carlo of the ARQ-DDF protocols under outage decoding."""
from .channels import ChannelConfig, ChannelDraw, ProtocolConfig, draw_from_gains, sample_channel
from .engine import (
    CHUNK,
    Campaign,
    Counts,
    InsufficientEventsError,
    PointEstimate,
    SlopeEstimate,
    estimate_slope,
    run_campaign,
    run_counts,
    run_trials,
    wilson,
)
from .protocols import (
    CvmaState,
    cvma_labels,
    relay_listen_fraction_cvma,
    relay_listen_fraction_mar,
    round_outage_mar,
    round_outage_relay,
    round_outcome_cvma,
    run_cvma,
    run_mar,
    run_relay,
)
