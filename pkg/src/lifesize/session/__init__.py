"""Streaming session layer: wire codec, state machine, links, pacing."""

from .bandwidth import BandwidthMeter, TokenBucketPacer, meter_record, pace
from .link import SimulatedLink, simulated_link
from .state import SessionState, step
from .wire import Mode, decode, decode_stream, encode

__all__ = [
    "BandwidthMeter",
    "Mode",
    "SessionState",
    "SimulatedLink",
    "TokenBucketPacer",
    "decode",
    "decode_stream",
    "encode",
    "meter_record",
    "pace",
    "simulated_link",
    "step",
]
