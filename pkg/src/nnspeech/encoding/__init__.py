from .codes import FeatureVector, Field, Layout, bar_code, one_of_n, phone_features
from .context import (EncodingConfig, SegmentIndex, encode_frame, encode_segment, frame_layout,
                      segment_layout)
from .taps import TapSchedule, default_tap_schedule

__all__ = [
    "EncodingConfig", "FeatureVector", "Field", "Layout", "SegmentIndex", "TapSchedule",
    "bar_code", "default_tap_schedule", "encode_frame", "encode_segment", "frame_layout",
    "one_of_n", "phone_features", "segment_layout",
]
