"""orderlab: exact continuous double auction, synthetic order streams, and
stream realism statistics."""

from .order_model import (
    LimitOrder,
    MarketObservation,
    Normalization,
    OrderType,
    Quote,
    Stream,
    StreamConfig,
    bucket_of,
    validate_observation,
)
from .matching_engine import BookSnapshot, OrderBook, Transaction, replay

__all__ = [
    "BookSnapshot",
    "LimitOrder",
    "MarketObservation",
    "Normalization",
    "OrderBook",
    "OrderType",
    "Quote",
    "Stream",
    "StreamConfig",
    "Transaction",
    "bucket_of",
    "replay",
    "validate_observation",
]
